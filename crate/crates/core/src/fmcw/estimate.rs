use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{BeatMatrix, ChirpConfig, FmcwError, Window};

/// Windowed range/Doppler magnitude spectrum.
///
/// Only non-negative beat frequencies are kept, so there are
/// `fast_len / 2` range bins. Doppler bins are shifted so that bin
/// `doppler_len / 2` is zero speed. Magnitudes are divided by the windows'
/// coherent gain, so an on-bin tone of amplitude `a` peaks at `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeDopplerMap {
    magnitude: Vec<f64>,
    range_bins: usize,
    doppler_bins: usize,
    range_bin_m: f64,
    speed_bin_mps: f64,
}

impl RangeDopplerMap {
    pub fn compute(samples: &BeatMatrix, config: &ChirpConfig, window: Window) -> Result<Self, FmcwError> {
        config.validate()?;
        let (n, m) = (config.samples_per_chirp(), config.num_chirps);
        if samples.fast_len != n || samples.num_chirps != m || samples.samples.len() != n * m {
            return Err(FmcwError::ShapeMismatch {
                fast: n,
                chirps: m,
                got_fast: samples.fast_len,
                got_chirps: samples.num_chirps,
            });
        }
        let wf = window.coefficients(n);
        let ws = window.coefficients(m);
        let gain = wf.iter().sum::<f64>() * ws.iter().sum::<f64>();

        let mut planner = FftPlanner::<f64>::new();
        let fast_fft = planner.plan_fft_forward(n);
        let slow_fft = planner.plan_fft_forward(m);
        let range_bins = n / 2;

        // range_profiles[r * m + chirp]
        let mut range_profiles = vec![Complex64::new(0.0, 0.0); range_bins * m];
        let mut row = vec![Complex64::new(0.0, 0.0); n];
        for chirp in 0..m {
            for (k, (x, w)) in samples.chirp(chirp).iter().zip(&wf).enumerate() {
                row[k] = x * w;
            }
            fast_fft.process(&mut row);
            for r in 0..range_bins {
                range_profiles[r * m + chirp] = row[r] * ws[chirp];
            }
        }
        let mut magnitude = vec![0.0; range_bins * m];
        for r in 0..range_bins {
            let col = &mut range_profiles[r * m..(r + 1) * m];
            slow_fft.process(col);
            for d in 0..m {
                magnitude[r * m + d] = col[(d + m - m / 2) % m].norm() / gain;
            }
        }
        Ok(Self {
            magnitude,
            range_bins,
            doppler_bins: m,
            range_bin_m: config.range_bin_m(),
            speed_bin_mps: config.speed_bin_mps(),
        })
    }

    pub fn range_bins(&self) -> usize {
        self.range_bins
    }

    pub fn doppler_bins(&self) -> usize {
        self.doppler_bins
    }

    pub fn get(&self, range_bin: usize, doppler_bin: usize) -> f64 {
        self.magnitude[range_bin * self.doppler_bins + doppler_bin]
    }

    pub fn range_of(&self, range_bin: f64) -> f64 {
        range_bin * self.range_bin_m
    }

    /// Closing speed of a (fractional) shifted Doppler bin.
    pub fn speed_of(&self, doppler_bin: f64) -> f64 {
        (doppler_bin - (self.doppler_bins / 2) as f64) * self.speed_bin_mps
    }

    pub fn median(&self) -> f64 {
        let mut v = self.magnitude.clone();
        let mid = v.len() / 2;
        let (_, x, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
        *x
    }

    pub fn max(&self) -> f64 {
        self.magnitude.iter().copied().fold(0.0, f64::max)
    }

    fn wrap(&self, d: usize, delta: isize) -> usize {
        (d as isize + delta).rem_euclid(self.doppler_bins as isize) as usize
    }

    fn is_local_max(&self, r: usize, d: usize) -> bool {
        let v = self.get(r, d);
        let here = r * self.doppler_bins + d;
        for dr in -1isize..=1 {
            let rr = r as isize + dr;
            if rr < 0 || rr >= self.range_bins as isize {
                continue;
            }
            for dd in -1isize..=1 {
                if dr == 0 && dd == 0 {
                    continue;
                }
                let nd = self.wrap(d, dd);
                let u = self.get(rr as usize, nd);
                let there = rr as usize * self.doppler_bins + nd;
                if u > v || (u == v && there < here) {
                    return false;
                }
            }
        }
        true
    }

    /// Parabolic fit through a peak and its two neighbours.
    fn refine(&self, r: usize, d: usize) -> (f64, f64) {
        let vertex = |a: f64, b: f64, c: f64| {
            let den = a - 2.0 * b + c;
            if den.abs() < f64::MIN_POSITIVE {
                0.0
            } else {
                (0.5 * (a - c) / den).clamp(-0.5, 0.5)
            }
        };
        let b = self.get(r, d);
        let dr = if r > 0 && r + 1 < self.range_bins {
            vertex(self.get(r - 1, d), b, self.get(r + 1, d))
        } else {
            0.0
        };
        let dd = vertex(self.get(r, self.wrap(d, -1)), b, self.get(r, self.wrap(d, 1)));
        (r as f64 + dr, d as f64 + dd)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorOptions {
    pub window: Window,
    /// Detection threshold as a multiple of the median map magnitude.
    pub threshold_factor: f64,
    /// Range bins below this are ignored (transmitter leakage sits at 0).
    pub notch_bins: usize,
    /// Peaks more than this far below the strongest one are ignored.
    pub dynamic_range_db: f64,
    /// Headroom over the window's peak sidelobe level when deciding whether
    /// a weaker peak is a sidelobe of a stronger one.
    pub sidelobe_margin: f64,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self {
            window: Window::Hann,
            threshold_factor: 8.0,
            notch_bins: 2,
            dynamic_range_db: 120.0,
            sidelobe_margin: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Detection {
    pub range_m: f64,
    pub speed_mps: f64,
    pub magnitude: f64,
    pub range_bin: usize,
    pub doppler_bin: usize,
}

pub fn estimate_range_doppler(
    samples: &BeatMatrix,
    config: &ChirpConfig,
    window: Window,
) -> Result<Vec<Detection>, FmcwError> {
    let options = EstimatorOptions {
        window,
        ..EstimatorOptions::default()
    };
    estimate_range_doppler_with(samples, config, &options)
}

/// Targets found in one frame, strongest first.
///
/// A cell is reported when it is a local maximum of the map above both the
/// median-based noise floor and the dynamic-range floor, lies outside the
/// leakage notch, and cannot be explained as a sidelobe of a stronger
/// reported peak. Window sidelobes are separable: along the range axis of a
/// peak they reach at most the range window's peak sidelobe level, along the
/// Doppler axis the Doppler window's, and elsewhere the product of both.
pub fn estimate_range_doppler_with(
    samples: &BeatMatrix,
    config: &ChirpConfig,
    options: &EstimatorOptions,
) -> Result<Vec<Detection>, FmcwError> {
    let map = RangeDopplerMap::compute(samples, config, options.window)?;
    let floor = (map.median() * options.threshold_factor).max(map.max() * 10f64.powf(-options.dynamic_range_db / 20.0));
    if !(floor > 0.0) {
        return Ok(Vec::new());
    }
    let mut candidates = Vec::new();
    for r in options.notch_bins..map.range_bins() {
        for d in 0..map.doppler_bins() {
            let v = map.get(r, d);
            if v > floor && map.is_local_max(r, d) {
                candidates.push((v, r, d));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let axis_range = lobe_ratio(options.window, map.range_bins() * 2, options.sidelobe_margin);
    let axis_doppler = lobe_ratio(options.window, map.doppler_bins(), options.sidelobe_margin);
    let m = map.doppler_bins();
    let mut accepted: Vec<(f64, usize, usize)> = Vec::new();
    for (v, r, d) in candidates {
        let sidelobe = accepted.iter().any(|&(pv, pr, pd)| {
            let same_range = r.abs_diff(pr) <= 1;
            let dd = d.abs_diff(pd);
            let same_doppler = dd.min(m - dd) <= 1;
            let limit = match (same_range, same_doppler) {
                (true, true) => 1.0,
                (true, false) => axis_doppler,
                (false, true) => axis_range,
                (false, false) => axis_range * axis_doppler,
            };
            v < limit * pv
        });
        if !sidelobe {
            accepted.push((v, r, d));
        }
    }
    Ok(accepted
        .into_iter()
        .map(|(v, r, d)| {
            let (fr, fd) = map.refine(r, d);
            Detection {
                range_m: map.range_of(fr),
                speed_mps: map.speed_of(fd),
                magnitude: v,
                range_bin: r,
                doppler_bin: d,
            }
        })
        .collect())
}

fn lobe_ratio(window: Window, n: usize, margin: f64) -> f64 {
    (10f64.powf(peak_sidelobe_level_db(window, n) / 20.0) * margin).min(1.0)
}

/// Highest sidelobe relative to the mainlobe peak, dB, for a length-`n`
/// window, read off a 16× zero-padded spectrum.
pub fn peak_sidelobe_level_db(window: Window, n: usize) -> f64 {
    let len = 16 * n;
    let mut buf: Vec<Complex64> = window.coefficients(n).into_iter().map(|w| Complex64::new(w, 0.0)).collect();
    buf.resize(len, Complex64::new(0.0, 0.0));
    FftPlanner::<f64>::new().plan_fft_forward(len).process(&mut buf);
    let mag: Vec<f64> = buf.iter().map(|c| c.norm()).collect();
    let mut edge = 1;
    while edge < len / 2 && mag[edge + 1] < mag[edge] {
        edge += 1;
    }
    let side = mag[edge..=len - edge].iter().copied().fold(0.0, f64::max);
    20.0 * (side / mag[0]).log10()
}
