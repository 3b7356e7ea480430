//! Closed-form passage models and Rabi-frequency extraction.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spin::larmor_per_tesla;

/// Landau-Zener exponent `pi Omega^2 / (2 alpha)` for a linear chirp, with
/// `Omega = 2 pi rabi` and `alpha = 2 pi rate`. Equals `pi^2 rabi^2 / rate`.
pub fn lz_exponent(rabi: f64, rate: f64) -> f64 {
    PI * PI * rabi * rabi / rate
}

/// Probability that a single linear passage through resonance flips the spin.
pub fn landau_zener_flip_probability(rabi: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(Error::param("rate", "chirp rate must be positive"));
    }
    if !(rabi >= 0.0) {
        return Err(Error::param("rabi", "must be non-negative"));
    }
    Ok(-(-lz_exponent(rabi, rate)).exp_m1())
}

/// `Omega^2 / ((2/pi) d omega/dt)`; above 1 the passage is adiabatic.
///
/// Algebraically identical to [`lz_exponent`], so a ratio of exactly 1 gives
/// a flip probability of `1 - 1/e`.
pub fn adiabaticity_ratio(rabi: f64, rate: f64) -> f64 {
    let omega = 2.0 * PI * rabi;
    let domega_dt = 2.0 * PI * rate;
    omega * omega / (2.0 / PI * domega_dt)
}

/// Magnitude of the rotating-frame effective field: the drive field `b1`
/// combined with the fictitious longitudinal field `h detuning / (|g| mu_B)`.
pub fn effective_field(detuning: f64, b1: f64, g: f64) -> f64 {
    b1.hypot(detuning / larmor_per_tesla(g))
}

/// Spin-down probability after two passages composed incoherently.
pub fn double_passage_probability(p_single: f64) -> f64 {
    2.0 * p_single * (1.0 - p_single)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DurationSweepPoint {
    pub burst_duration: f64,
    pub p_down: f64,
}

/// Saturation level of the exponential model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SaturationLevel {
    Fixed(f64),
    Fitted,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RabiFit {
    /// Hz.
    pub rabi: f64,
    /// Time constant of `p_max (1 - exp(-tau / tau0))`, s.
    pub tau0: f64,
    pub p_max: f64,
    pub rms_residual: f64,
    pub iterations: usize,
}

/// Fits `p(tau) = p_max (1 - exp(-tau / tau0))` to a burst-duration sweep at
/// fixed FM depth and converts the time constant into a Rabi frequency.
///
/// With `rate = fm_depth / tau` the Landau-Zener exponent is
/// `pi^2 rabi^2 tau / fm_depth`, hence `rabi = sqrt(fm_depth / (pi^2 tau0))`.
pub fn extract_rabi_from_duration_sweep(
    points: &[DurationSweepPoint],
    fm_depth: f64,
    p_max: SaturationLevel,
) -> Result<RabiFit> {
    if !(fm_depth > 0.0) {
        return Err(Error::param("fm_depth", "must be positive"));
    }
    if points.len() < 4 {
        return Err(Error::Fit(format!(
            "need at least 4 points, got {}",
            points.len()
        )));
    }
    if points
        .iter()
        .any(|p| !(p.burst_duration > 0.0) || !p.p_down.is_finite())
    {
        return Err(Error::Fit(
            "durations must be positive and probabilities finite".into(),
        ));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.burst_duration.total_cmp(&b.burst_duration));
    let (tau_min, tau_max) = (pts[0].burst_duration, pts[pts.len() - 1].burst_duration);
    if tau_max - tau_min <= 1e-12 * tau_max {
        return Err(Error::Fit("all burst durations are equal".into()));
    }
    let mean = pts.iter().map(|p| p.p_down).sum::<f64>() / pts.len() as f64;
    if pts.iter().all(|p| (p.p_down - mean).abs() < 1e-12) {
        return Err(Error::Fit(
            "probabilities are constant, no decay to fit".into(),
        ));
    }

    let fit_amp = matches!(p_max, SaturationLevel::Fitted);
    let mut amp = match p_max {
        SaturationLevel::Fixed(a) if a > 0.0 && a <= 1.0 => a,
        SaturationLevel::Fixed(_) => return Err(Error::param("p_max", "must lie in (0, 1]")),
        SaturationLevel::Fitted => pts.iter().map(|p| p.p_down).fold(f64::MIN, f64::max),
    };
    let mut log_tau = initial_tau(&pts, amp).ln();

    let sse = |amp: f64, log_tau: f64| -> f64 {
        let tau0 = log_tau.exp();
        pts.iter()
            .map(|p| {
                let r = p.p_down - amp * (-(-p.burst_duration / tau0).exp_m1());
                r * r
            })
            .sum()
    };

    let mut cost = sse(amp, log_tau);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    for it in 0..500 {
        iterations = it + 1;
        let tau0 = log_tau.exp();
        // Normal equations for (log tau0, amp).
        let (mut jtj, mut jtr) = ([[0.0; 2]; 2], [0.0; 2]);
        for p in &pts {
            let s = p.burst_duration / tau0;
            let e = (-s).exp();
            let model = amp * (1.0 - e);
            let r = p.p_down - model;
            let j = [-amp * s * e, 1.0 - e];
            for a in 0..2 {
                jtr[a] += j[a] * r;
                for b in 0..2 {
                    jtj[a][b] += j[a] * j[b];
                }
            }
        }
        let step = if fit_amp {
            let m00 = jtj[0][0] * (1.0 + lambda);
            let m11 = jtj[1][1] * (1.0 + lambda);
            let det = m00 * m11 - jtj[0][1] * jtj[1][0];
            if det.abs() < f64::MIN_POSITIVE {
                return Err(Error::Fit("singular normal equations".into()));
            }
            [
                (m11 * jtr[0] - jtj[0][1] * jtr[1]) / det,
                (m00 * jtr[1] - jtj[1][0] * jtr[0]) / det,
            ]
        } else {
            let m00 = jtj[0][0] * (1.0 + lambda);
            if m00 < f64::MIN_POSITIVE {
                return Err(Error::Fit("singular normal equations".into()));
            }
            [jtr[0] / m00, 0.0]
        };
        let trial = (log_tau + step[0], amp + step[1]);
        let trial_cost = sse(trial.1, trial.0);
        if trial_cost <= cost {
            let converged = (cost - trial_cost) <= 1e-15 * cost.max(1e-30)
                && step[0].abs() < 1e-10
                && step[1].abs() < 1e-10;
            log_tau = trial.0;
            amp = trial.1;
            cost = trial_cost;
            lambda = (lambda / 3.0).max(1e-12);
            if converged {
                break;
            }
        } else {
            lambda *= 4.0;
            if lambda > 1e12 {
                break;
            }
        }
    }

    let tau0 = log_tau.exp();
    if !tau0.is_finite() || tau0 < 1e-3 * tau_min || tau0 > 1e3 * tau_max || !(amp > 0.0) {
        return Err(Error::Fit(format!(
            "fit did not converge (tau0 = {tau0:e} s)"
        )));
    }
    Ok(RabiFit {
        rabi: (fm_depth / (PI * PI * tau0)).sqrt(),
        tau0,
        p_max: amp,
        rms_residual: (cost / pts.len() as f64).sqrt(),
        iterations,
    })
}

/// Duration at which the data first reaches `amp (1 - 1/e)`, interpolated.
fn initial_tau(pts: &[DurationSweepPoint], amp: f64) -> f64 {
    let level = amp * (1.0 - (-1.0f64).exp());
    let mut prev: Option<&DurationSweepPoint> = None;
    for p in pts {
        if p.p_down >= level {
            return match prev {
                Some(q) if p.p_down > q.p_down => {
                    q.burst_duration
                        + (level - q.p_down) / (p.p_down - q.p_down)
                            * (p.burst_duration - q.burst_duration)
                }
                _ => {
                    let frac = (p.p_down / amp).min(1.0 - 1e-6);
                    p.burst_duration / -(1.0 - frac).ln()
                }
            };
        }
        prev = Some(p);
    }
    pts[pts.len() - 1].burst_duration
}
