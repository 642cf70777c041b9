//! On-disk interchange: little-endian binary trial files plus a CSV manifest.
//!
//! Trial file layout: magic "MIEEG1", format version u16 = 1, n_channels u32,
//! n_samples u32, sampling_rate_hz f64, n_channels null-terminated UTF-8
//! channel names, then all samples as f32 in channel-major order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::data::{Label, ProtocolTiming, TrialRecording, TrialSet};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 6] = b"MIEEG1";
pub const FORMAT_VERSION: u16 = 1;

struct RawTrial {
    sampling_rate_hz: f64,
    channel_names: Vec<String>,
    samples: Vec<Vec<f64>>,
}

fn read_exact(r: &mut impl Read, buf: &mut [u8], path: &Path) -> Result<()> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::format(path, "file truncated")
        } else {
            Error::io(path, e)
        }
    })
}

fn read_u16(r: &mut impl Read, path: &Path) -> Result<u16> {
    let mut b = [0u8; 2];
    read_exact(r, &mut b, path)?;
    Ok(u16::from_le_bytes(b))
}

fn read_u32(r: &mut impl Read, path: &Path) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b, path)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read, path: &Path) -> Result<f64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b, path)?;
    Ok(f64::from_le_bytes(b))
}

fn read_cstring(r: &mut impl Read, path: &Path) -> Result<String> {
    let mut bytes = Vec::new();
    let mut b = [0u8; 1];
    loop {
        read_exact(r, &mut b, path)?;
        if b[0] == 0 {
            break;
        }
        bytes.push(b[0]);
    }
    String::from_utf8(bytes)
        .map_err(|_| Error::format(path, "channel name is not valid UTF-8"))
}

fn read_trial_file(path: &Path) -> Result<RawTrial> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);

    let mut magic = [0u8; 6];
    read_exact(&mut r, &mut magic, path)?;
    if &magic != MAGIC {
        return Err(Error::format(
            path,
            format!("bad magic {:?}, expected {:?}", magic, MAGIC),
        ));
    }
    let version = read_u16(&mut r, path)?;
    if version != FORMAT_VERSION {
        return Err(Error::format(
            path,
            format!("unsupported format version {version}, expected {FORMAT_VERSION}"),
        ));
    }
    let n_channels = read_u32(&mut r, path)? as usize;
    let n_samples = read_u32(&mut r, path)? as usize;
    let sampling_rate_hz = read_f64(&mut r, path)?;
    if !(sampling_rate_hz > 0.0 && sampling_rate_hz.is_finite()) {
        return Err(Error::format(
            path,
            format!("sampling rate must be positive and finite, got {sampling_rate_hz}"),
        ));
    }
    if n_channels == 0 {
        return Err(Error::format(path, "zero channels"));
    }

    let channel_names: Vec<String> = (0..n_channels)
        .map(|_| read_cstring(&mut r, path))
        .collect::<Result<_>>()?;

    let mut payload = vec![0u8; n_channels * n_samples * 4];
    read_exact(&mut r, &mut payload, path)?;
    let mut trailing = [0u8; 1];
    match r.read(&mut trailing) {
        Ok(0) => {}
        Ok(_) => return Err(Error::format(path, "trailing bytes after sample data")),
        Err(e) => return Err(Error::io(path, e)),
    }

    let samples = (0..n_channels)
        .map(|c| {
            let row_start = c * n_samples * 4;
            (0..n_samples)
                .map(|s| {
                    let off = row_start + s * 4;
                    f32::from_le_bytes(payload[off..off + 4].try_into().unwrap()) as f64
                })
                .collect()
        })
        .collect();

    Ok(RawTrial {
        sampling_rate_hz,
        channel_names,
        samples,
    })
}

/// Writes one trial in the binary interchange layout. Samples are stored as
/// f32, so values outside f32 precision are rounded on write.
pub fn write_trial_file(path: &Path, trial: &TrialRecording) -> Result<()> {
    trial.validate()?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut out = || -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(trial.n_channels() as u32).to_le_bytes())?;
        w.write_all(&(trial.n_samples() as u32).to_le_bytes())?;
        w.write_all(&trial.sampling_rate_hz.to_le_bytes())?;
        for name in trial.channel_names.iter() {
            w.write_all(name.as_bytes())?;
            w.write_all(&[0])?;
        }
        for row in &trial.samples {
            for &v in row {
                w.write_all(&(v as f32).to_le_bytes())?;
            }
        }
        w.flush()
    };
    out().map_err(|e| Error::io(path, e))
}

/// Loads a trial set from a CSV manifest. Trial files are resolved relative
/// to the manifest's directory; manifest order is preserved.
pub fn load_trial_set(manifest_path: &Path, protocol: ProtocolTiming) -> Result<TrialSet> {
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let file = File::open(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let mut reader = csv::Reader::from_reader(BufReader::new(file));

    let headers = reader
        .headers()
        .map_err(|e| Error::Manifest {
            path: manifest_path.to_path_buf(),
            record: 0,
            detail: e.to_string(),
        })?
        .clone();
    let expected = ["subject_id", "trial_index", "label", "file"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Manifest {
            path: manifest_path.to_path_buf(),
            record: 0,
            detail: format!(
                "header must be {:?}, got {:?}",
                expected.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let manifest_err = |record: usize, detail: String| Error::Manifest {
        path: manifest_path.to_path_buf(),
        record,
        detail,
    };

    let mut trials = Vec::new();
    let mut shared_names: Option<Arc<[String]>> = None;
    for (i, row) in reader.records().enumerate() {
        let record = i + 1;
        let row = row.map_err(|e| manifest_err(record, e.to_string()))?;
        if row.len() != 4 {
            return Err(manifest_err(record, format!("expected 4 fields, got {}", row.len())));
        }
        let subject_id = row[0].to_string();
        let trial_index: u32 = row[1]
            .parse()
            .map_err(|_| manifest_err(record, format!("bad trial_index {:?}", &row[1])))?;
        let label = Label::parse(&row[2])
            .ok_or_else(|| manifest_err(record, format!("unknown label {:?}", &row[2])))?;
        let trial_path = base.join(&row[3]);
        let raw = read_trial_file(&trial_path)?;

        // Intern the channel-name list so every trial shares one allocation.
        let channel_names = match &shared_names {
            Some(names) if names.as_ref() == raw.channel_names.as_slice() => Arc::clone(names),
            _ => {
                let names: Arc<[String]> = raw.channel_names.into();
                shared_names = Some(Arc::clone(&names));
                names
            }
        };
        trials.push(TrialRecording {
            subject_id,
            trial_index,
            label,
            sampling_rate_hz: raw.sampling_rate_hz,
            channel_names,
            samples: raw.samples,
        });
    }

    let set = TrialSet { trials, protocol };
    set.validate()?;
    Ok(set)
}

/// Writes every trial plus a `manifest.csv` into `dir`; returns the manifest
/// path. Trial files are named positionally, so rewriting a loaded set
/// reproduces its files byte for byte.
pub fn write_trial_set(dir: &Path, set: &TrialSet) -> Result<PathBuf> {
    set.validate()?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let manifest_path = dir.join("manifest.csv");
    let file = File::create(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(["subject_id", "trial_index", "label", "file"])
        .map_err(|e| Error::format(&manifest_path, e.to_string()))?;
    for (i, trial) in set.trials.iter().enumerate() {
        let name = format!("trial_{i:05}.bin");
        write_trial_file(&dir.join(&name), trial)?;
        w.write_record([
            trial.subject_id.as_str(),
            &trial.trial_index.to_string(),
            trial.label.as_str(),
            &name,
        ])
        .map_err(|e| Error::format(&manifest_path, e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(&manifest_path, e))?;
    Ok(manifest_path)
}
