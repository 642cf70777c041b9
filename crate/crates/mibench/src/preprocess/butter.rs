//! Butterworth band-pass design and zero-phase application.
//!
//! Design path: analog low-pass prototype -> low-pass-to-band-pass
//! transform on pre-warped edge frequencies -> bilinear transform ->
//! second-order sections. Pre-warping puts the -3 dB points exactly at the
//! requested digital cut-off frequencies.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};

/// One direct-form-II-transposed second-order section with monic
/// denominator: H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Biquad {
    fn response_at(&self, w: f64) -> Complex64 {
        let z1 = Complex64::new(0.0, -w).exp();
        let z2 = z1 * z1;
        (self.b0 + self.b1 * z1 + self.b2 * z2) / (1.0 + self.a1 * z1 + self.a2 * z2)
    }

    /// Magnitudes of the two roots of z^2 + a1 z + a2.
    fn pole_magnitudes(&self) -> [f64; 2] {
        let disc = Complex64::new(self.a1 * self.a1 - 4.0 * self.a2, 0.0).sqrt();
        let p0 = (-self.a1 + disc.re) * 0.5;
        if disc.re != 0.0 || self.a1 * self.a1 - 4.0 * self.a2 >= 0.0 {
            let p1 = (-self.a1 - disc.re) * 0.5;
            [p0.abs(), p1.abs()]
        } else {
            let m = Complex64::new(-self.a1 * 0.5, disc.im * 0.5).norm();
            [m, m]
        }
    }
}

/// A designed band-pass filter as a cascade of second-order sections.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSpec {
    /// Overall band-pass order = number of poles; always even.
    pub order: usize,
    pub low_cut_hz: f64,
    pub high_cut_hz: f64,
    pub sampling_rate_hz: f64,
    pub sections: Vec<Biquad>,
}

impl FilterSpec {
    /// Complex frequency response at `f_hz`.
    pub fn response_at(&self, f_hz: f64) -> Complex64 {
        let w = std::f64::consts::TAU * f_hz / self.sampling_rate_hz;
        self.sections
            .iter()
            .map(|s| s.response_at(w))
            .product()
    }

    /// |H(f)| at `f_hz`.
    pub fn magnitude_at(&self, f_hz: f64) -> f64 {
        self.response_at(f_hz).norm()
    }

    /// Pole magnitudes of every section; all must be < 1 for stability.
    pub fn pole_magnitudes(&self) -> Vec<f64> {
        self.sections
            .iter()
            .flat_map(|s| s.pole_magnitudes())
            .collect()
    }
}

/// Designs a Butterworth band-pass filter of overall order `order` (an even
/// pole count; the analog prototype has `order / 2` poles).
pub fn design_butterworth(order: usize, low_hz: f64, high_hz: f64, fs: f64) -> Result<FilterSpec> {
    if order == 0 {
        return Err(Error::InvalidInput("filter order must be at least 1".into()));
    }
    if order % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "band-pass order must be even (each section pairs two poles), got {order}"
        )));
    }
    if !(low_hz > 0.0 && low_hz < high_hz && high_hz < fs / 2.0) {
        return Err(Error::InvalidInput(format!(
            "cut-offs must satisfy 0 < low < high < fs/2, got low {low_hz}, high {high_hz}, fs {fs}"
        )));
    }

    let n = order / 2;
    // Pre-warped analog edge frequencies (rad/s).
    let warp = |f_hz: f64| 2.0 * fs * (std::f64::consts::PI * f_hz / fs).tan();
    let wl = warp(low_hz);
    let wh = warp(high_hz);
    let bw = wh - wl;
    let w0 = (wl * wh).sqrt();

    // Unit-cutoff low-pass prototype poles, then low-pass -> band-pass:
    // each prototype pole p yields p*bw/2 +- sqrt((p*bw/2)^2 - w0^2).
    let mut analog_poles = Vec::with_capacity(order);
    for k in 0..n {
        let theta = std::f64::consts::PI * (2 * k + n + 1) as f64 / (2 * n) as f64;
        let proto = Complex64::new(theta.cos(), theta.sin());
        let half = proto * (bw / 2.0);
        let shift = (half * half - w0 * w0).sqrt();
        analog_poles.push(half + shift);
        analog_poles.push(half - shift);
    }

    // Bilinear transform. Analog zeros are `n` at s = 0 (mapping to z = +1)
    // plus `n` implicit zeros at infinity (mapping to z = -1); the digital
    // gain collects the (2fs - s) factors of poles and zeros.
    let fs2 = Complex64::new(2.0 * fs, 0.0);
    let digital_poles: Vec<Complex64> = analog_poles.iter().map(|&p| (fs2 + p) / (fs2 - p)).collect();
    let mut gain = Complex64::new(bw.powi(n as i32), 0.0) * fs2.powi(n as i32);
    for &p in &analog_poles {
        gain /= fs2 - p;
    }
    debug_assert!(gain.im.abs() < 1e-9 * gain.re.abs());
    let gain = gain.re;
    if !(gain > 0.0) {
        return Err(Error::InvalidInput(format!(
            "filter design degenerated (gain {gain}); band 3-35-like limits expected"
        )));
    }

    // Pair poles into sections: conjugate pairs directly, leftover real
    // poles sorted and paired consecutively.
    let mut complex_poles: Vec<Complex64> = digital_poles
        .iter()
        .copied()
        .filter(|p| p.im > 1e-12)
        .collect();
    complex_poles.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    let mut real_poles: Vec<f64> = digital_poles
        .iter()
        .filter(|p| p.im.abs() <= 1e-12)
        .map(|p| p.re)
        .collect();
    real_poles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if complex_poles.len() * 2 + real_poles.len() != order || real_poles.len() % 2 != 0 {
        return Err(Error::InvalidInput(
            "filter design produced an unpairable pole set".into(),
        ));
    }

    // Every section carries one zero at z = +1 and one at z = -1, i.e. a
    // numerator g*(z^2 - 1), with the overall gain split evenly.
    let g = gain.powf(1.0 / n as f64);
    let mut sections = Vec::with_capacity(n);
    for p in complex_poles {
        sections.push(Biquad {
            b0: g,
            b1: 0.0,
            b2: -g,
            a1: -2.0 * p.re,
            a2: p.norm_sqr(),
        });
    }
    for pair in real_poles.chunks(2) {
        sections.push(Biquad {
            b0: g,
            b1: 0.0,
            b2: -g,
            a1: -(pair[0] + pair[1]),
            a2: pair[0] * pair[1],
        });
    }
    // Least-resonant sections first.
    sections.sort_by(|a, b| {
        let ma = a.pole_magnitudes();
        let mb = b.pole_magnitudes();
        ma.iter()
            .cloned()
            .fold(0.0, f64::max)
            .partial_cmp(&mb.iter().cloned().fold(0.0, f64::max))
            .unwrap()
    });

    let spec = FilterSpec {
        order,
        low_cut_hz: low_hz,
        high_cut_hz: high_hz,
        sampling_rate_hz: fs,
        sections,
    };
    if spec.pole_magnitudes().iter().any(|&m| m >= 1.0) {
        return Err(Error::InvalidInput(
            "designed filter is unstable for the requested band".into(),
        ));
    }
    Ok(spec)
}

/// State of one section that makes a constant input a fixed point of the
/// filter recursion, scaled by `level` (the local signal value). Suppresses
/// start-up transients when combined with edge extension.
fn steady_state(s: &Biquad, level: f64) -> (f64, f64, f64) {
    let h1 = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    let y = h1 * level;
    let s1 = y - s.b0 * level;
    let s2 = s.b2 * level - s.a2 * y;
    (s1, s2, y)
}

fn run_cascade(sections: &[Biquad], x: &mut [f64]) {
    let first = x[0];
    let mut states: Vec<(f64, f64)> = Vec::with_capacity(sections.len());
    let mut level = first;
    for s in sections {
        let (s1, s2, out) = steady_state(s, level);
        states.push((s1, s2));
        level = out;
    }
    for v in x.iter_mut() {
        let mut u = *v;
        for (s, st) in sections.iter().zip(states.iter_mut()) {
            let y = s.b0 * u + st.0;
            st.0 = s.b1 * u - s.a1 * y + st.1;
            st.1 = s.b2 * u - s.a2 * y;
            u = y;
        }
        *v = u;
    }
}

/// Zero-phase filtering of one channel: odd-symmetric extension of
/// `3 * order` samples at each end, forward pass, backward pass, trim.
pub fn filtfilt(spec: &FilterSpec, x: &[f64]) -> Result<Vec<f64>> {
    let ext = 3 * spec.order;
    let n = x.len();
    if n <= ext {
        return Err(Error::InvalidInput(format!(
            "signal of {n} samples is too short for edge extension of {ext}"
        )));
    }
    let mut buf = Vec::with_capacity(n + 2 * ext);
    let first = x[0];
    let last = x[n - 1];
    for i in (1..=ext).rev() {
        buf.push(2.0 * first - x[i]);
    }
    buf.extend_from_slice(x);
    for i in 1..=ext {
        buf.push(2.0 * last - x[n - 1 - i]);
    }

    run_cascade(&spec.sections, &mut buf);
    buf.reverse();
    run_cascade(&spec.sections, &mut buf);
    buf.reverse();
    Ok(buf[ext..ext + n].to_vec())
}
