//! Nuclear-field statistics, lineshape convolution and the read-out model.
//!
//! Every random draw comes from a [`SeedStream`]: a ChaCha8 generator keyed by
//! the run seed and positioned on an explicit stream index, so results do not
//! depend on how work is scheduled across threads.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Normal};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NuclearFieldModel {
    /// Standard deviation of the Overhauser field, T.
    pub sigma: f64,
    /// Autocorrelation time of the slow drift, s.
    pub correlation_time: f64,
}

impl NuclearFieldModel {
    pub fn new(sigma: f64, correlation_time: f64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::param("sigma", "must be finite and non-negative"));
        }
        if !(correlation_time > 0.0) {
            return Err(Error::param("correlation_time", "must be positive"));
        }
        Ok(Self {
            sigma,
            correlation_time,
        })
    }
}

impl Default for NuclearFieldModel {
    fn default() -> Self {
        Self {
            sigma: 0.5e-3,
            correlation_time: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementModel {
    /// Probability that spin-up is read as up.
    pub fidelity_up: f64,
    /// Probability that spin-down is read as down.
    pub fidelity_down: f64,
    /// Single-shot repetitions per point.
    pub shots: u64,
}

impl MeasurementModel {
    pub fn new(fidelity_up: f64, fidelity_down: f64, shots: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&fidelity_up) {
            return Err(Error::param("fidelity_up", "must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&fidelity_down) {
            return Err(Error::param("fidelity_down", "must lie in [0, 1]"));
        }
        if shots == 0 {
            return Err(Error::param("shots", "must be at least 1"));
        }
        Ok(Self {
            fidelity_up,
            fidelity_down,
            shots,
        })
    }

    pub fn perfect(shots: u64) -> Self {
        Self {
            fidelity_up: 1.0,
            fidelity_down: 1.0,
            shots,
        }
    }
}

impl Default for MeasurementModel {
    fn default() -> Self {
        Self {
            fidelity_up: 0.95,
            fidelity_down: 0.80,
            shots: 1000,
        }
    }
}

/// Position in the run's random-number space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SeedStream {
    pub seed: u64,
    pub stream: u64,
}

/// What a stream is used for; keeps the streams of one point disjoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StreamPurpose {
    NuclearOffset = 0,
    Shots = 1,
    Drift = 2,
}

impl SeedStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Stream for `(point, sample, purpose)`. Points and samples get 32 and
    /// 28 bits respectively.
    pub fn for_task(seed: u64, point: usize, sample: usize, purpose: StreamPurpose) -> Self {
        let stream =
            ((point as u64) << 32) | (((sample as u64) & 0x0fff_ffff) << 4) | purpose as u64;
        Self { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// One quasi-static Overhauser field draw, T.
pub fn sample_nuclear_offset<R: Rng + ?Sized>(model: &NuclearFieldModel, rng: &mut R) -> f64 {
    if model.sigma == 0.0 {
        return 0.0;
    }
    let normal = Normal::new(0.0, model.sigma).expect("sigma validated");
    normal.sample(rng)
}

/// Stationary Ornstein-Uhlenbeck trace of the nuclear field sampled every
/// `dt` over `[0, total]`, using the exact discrete update.
pub fn ou_field_trace<R: Rng + ?Sized>(
    model: &NuclearFieldModel,
    dt: f64,
    total: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(dt > 0.0) || dt >= model.correlation_time / 10.0 {
        return Err(Error::param(
            "dt",
            format!(
                "drift step {dt:e} s must be positive and below a tenth of the correlation time {:e} s",
                model.correlation_time
            ),
        ));
    }
    if !(total >= 0.0) {
        return Err(Error::param("total", "must be non-negative"));
    }
    let n = (total / dt).floor() as usize + 1;
    if model.sigma == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let keep = (-dt / model.correlation_time).exp();
    let kick = model.sigma * (-(-2.0 * dt / model.correlation_time).exp_m1()).sqrt();
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut b = model.sigma * unit.sample(rng);
    let mut out = Vec::with_capacity(n);
    out.push(b);
    for _ in 1..n {
        b = b * keep + kick * unit.sample(rng);
        out.push(b);
    }
    Ok(out)
}

/// Probability of reading "down" given the true spin-down probability.
pub fn apply_measurement_fidelity(p_down: f64, model: &MeasurementModel) -> f64 {
    p_down * model.fidelity_down + (1.0 - p_down) * (1.0 - model.fidelity_up)
}

/// Fraction of `shots` Bernoulli(`p`) trials that come out positive.
pub fn sample_shots<R: Rng + ?Sized>(p: f64, shots: u64, rng: &mut R) -> Result<f64> {
    if shots == 0 {
        return Err(Error::param("shots", "must be at least 1"));
    }
    let p = p.clamp(0.0, 1.0);
    let binomial = Binomial::new(shots, p).map_err(|e| Error::param("p", e.to_string()))?;
    Ok(binomial.sample(rng) as f64 / shots as f64)
}

/// Relative tolerance on grid-spacing uniformity.
const GRID_TOL: f64 = 1e-6;
/// Kernel half-width in standard deviations.
const KERNEL_REACH: f64 = 5.0;

/// Convolves a curve sampled on a uniform field grid with a normalized
/// Gaussian of width `sigma`, truncated at five standard deviations. Near the
/// ends of the grid the kernel is renormalized over the available samples.
pub fn convolve_gaussian(curve: &[(f64, f64)], sigma: f64) -> Result<Vec<(f64, f64)>> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::param("sigma", "must be finite and non-negative"));
    }
    if sigma == 0.0 || curve.len() < 2 {
        return Ok(curve.to_vec());
    }
    let step = curve[1].0 - curve[0].0;
    if !(step > 0.0) {
        return Err(Error::param("curve", "field grid must be increasing"));
    }
    if curve
        .windows(2)
        .any(|w| ((w[1].0 - w[0].0) - step).abs() > GRID_TOL * step)
    {
        return Err(Error::param("curve", "field grid is not uniform"));
    }
    if step > 0.5 * sigma * (1.0 + GRID_TOL) {
        return Err(Error::param(
            "curve",
            format!(
                "grid spacing {step:e} T exceeds sigma/2 = {:e} T",
                0.5 * sigma
            ),
        ));
    }

    let reach = (KERNEL_REACH * sigma / step).floor() as isize;
    let weights: Vec<f64> = (-reach..=reach)
        .map(|j| {
            let x = j as f64 * step / sigma;
            (-0.5 * x * x).exp()
        })
        .collect();
    let total: f64 = weights.iter().sum();
    let n = curve.len() as isize;

    Ok((0..n)
        .map(|i| {
            let (mut acc, mut norm) = (0.0, 0.0);
            for (w, j) in weights.iter().zip(-reach..=reach) {
                let src = i - j;
                if (0..n).contains(&src) {
                    acc += w * curve[src as usize].1;
                    norm += w;
                }
            }
            // Interior points see the full kernel; use the exact total there so
            // interior sums are preserved to rounding.
            let norm = if (norm - total).abs() <= 1e-15 * total {
                total
            } else {
                norm
            };
            (curve[i as usize].0, acc / norm)
        })
        .collect())
}
