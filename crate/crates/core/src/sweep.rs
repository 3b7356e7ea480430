//! Experiment orchestration: field sweeps, burst-duration sweeps, parity
//! scans and fixed-frequency sweeps with a drifting nuclear field.
//!
//! Sweep points are independent and are mapped over with rayon when the
//! `parallel` feature is enabled. Each point draws from its own seed stream,
//! so output is identical whatever the schedule.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use rand::Rng;

use crate::analytic::DurationSweepPoint;
use crate::drive::DriveProgram;
use crate::ensemble::{
    apply_measurement_fidelity, convolve_gaussian, ou_field_trace, sample_nuclear_offset,
    sample_shots, MeasurementModel, NuclearFieldModel, SeedStream, StreamPurpose,
};
use crate::error::{Error, Result};
use crate::integrator::{propagate, PropagationConfig};
use crate::spin::{DensityMatrix, ElectronParams};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon work-stealing over sweep points; sequential without the
    /// `parallel` feature.
    #[default]
    Parallel,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EnsembleMode {
    /// Simulate at nominal field, then convolve with the nuclear-field
    /// distribution.
    #[default]
    Convolution,
    /// Average propagations over sampled nuclear offsets.
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub b_start: f64,
    pub b_stop: f64,
    pub b_step: f64,
    pub program: DriveProgram,
    pub electron: ElectronParams,
    pub nuclear: NuclearFieldModel,
    /// `None` means ideal read-out.
    pub measurement: Option<MeasurementModel>,
    pub ensemble: EnsembleMode,
    pub mc_samples: usize,
    pub seed: u64,
    pub propagation: PropagationConfig,
    pub execution: Execution,
}

impl SweepConfig {
    /// Config with default electron, nuclear and integrator settings.
    pub fn new(b_start: f64, b_stop: f64, b_step: f64, program: DriveProgram) -> Self {
        Self {
            b_start,
            b_stop,
            b_step,
            program,
            electron: ElectronParams::default(),
            nuclear: NuclearFieldModel::default(),
            measurement: None,
            ensemble: EnsembleMode::Convolution,
            mc_samples: 20,
            seed: 0,
            propagation: PropagationConfig::default(),
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b_step > 0.0) {
            return Err(Error::param("b_step", "must be positive"));
        }
        if !(self.b_start < self.b_stop) {
            return Err(Error::param("b_start", "must be below b_stop"));
        }
        if self.b_start < 0.0 {
            return Err(Error::param("b_start", "must be non-negative"));
        }
        if self.ensemble == EnsembleMode::MonteCarlo && self.mc_samples == 0 {
            return Err(Error::param(
                "mc_samples",
                "must be at least 1 in monte-carlo mode",
            ));
        }
        Ok(())
    }

    /// Field grid `b_start, b_start + b_step, ...` up to `b_stop` inclusive.
    pub fn fields(&self) -> Vec<f64> {
        let n = ((self.b_stop - self.b_start) / self.b_step + 1e-9).floor() as usize + 1;
        (0..n)
            .map(|i| self.b_start + i as f64 * self.b_step)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineshapePoint {
    pub b: f64,
    pub p_down_true: f64,
    pub p_down_measured: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DurationSample {
    pub burst_duration: f64,
    pub p_down_true: f64,
    pub p_down_measured: f64,
}

impl DurationSample {
    pub fn fit_point(&self, measured: bool) -> DurationSweepPoint {
        DurationSweepPoint {
            burst_duration: self.burst_duration,
            p_down: if measured {
                self.p_down_measured
            } else {
                self.p_down_true
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParityPoint {
    pub f_center: f64,
    pub resonances_covered: usize,
    pub p_down: f64,
}

/// Maps `f` over `0..n`, in order, honoring `exec`.
pub(crate) fn map_indices<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
        _ => (0..n).map(f).collect(),
    }
}

/// Collects per-point results, reporting the lowest-index failure.
fn first_error<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    results.into_iter().collect()
}

/// Spin-down probability after one burst starting from |up>.
pub fn spin_down_after_burst(
    program: &DriveProgram,
    b: f64,
    electron: &ElectronParams,
    propagation: &PropagationConfig,
) -> Result<f64> {
    let cfg = PropagationConfig {
        record_trajectory: false,
        ..*propagation
    };
    propagate(&DensityMatrix::spin_up(), program, b, electron, &cfg)
        .map(|p| p.state.p_down().clamp(0.0, 1.0))
        .map_err(|e| Error::AtField {
            field: b,
            source: Box::new(e),
        })
}

fn measured(p: f64, cfg: &SweepConfig, point: usize, sample_shots_too: bool) -> Result<f64> {
    match &cfg.measurement {
        None => Ok(p),
        Some(m) => {
            let mapped = apply_measurement_fidelity(p, m);
            if sample_shots_too {
                let mut rng = SeedStream::for_task(cfg.seed, point, 0, StreamPurpose::Shots).rng();
                sample_shots(mapped, m.shots, &mut rng)
            } else {
                Ok(mapped)
            }
        }
    }
}

/// Spin-down probability versus field for the full multi-tone burst.
pub fn field_sweep_lineshape(cfg: &SweepConfig) -> Result<Vec<LineshapePoint>> {
    cfg.validate()?;
    let fields = cfg.fields();
    let n = fields.len();
    let run = |b: f64| spin_down_after_burst(&cfg.program, b, &cfg.electron, &cfg.propagation);

    match cfg.ensemble {
        EnsembleMode::Convolution => {
            let raw = first_error(map_indices(cfg.execution, n, |i| run(fields[i])))?;
            let curve: Vec<(f64, f64)> = fields.iter().copied().zip(raw).collect();
            let smoothed = convolve_gaussian(&curve, cfg.nuclear.sigma)?;
            smoothed
                .into_iter()
                .enumerate()
                .map(|(i, (b, p))| {
                    let p = p.clamp(0.0, 1.0);
                    Ok(LineshapePoint {
                        b,
                        p_down_true: p,
                        p_down_measured: measured(p, cfg, i, false)?,
                    })
                })
                .collect()
        }
        EnsembleMode::MonteCarlo => first_error(map_indices(cfg.execution, n, |i| {
            let b = fields[i];
            let mut acc = 0.0;
            for s in 0..cfg.mc_samples {
                let mut rng =
                    SeedStream::for_task(cfg.seed, i, s, StreamPurpose::NuclearOffset).rng();
                let offset = sample_nuclear_offset(&cfg.nuclear, &mut rng);
                acc += run(b + offset)?;
            }
            let p = acc / cfg.mc_samples as f64;
            Ok(LineshapePoint {
                b,
                p_down_true: p,
                p_down_measured: measured(p, cfg, i, true)?,
            })
        })),
    }
}

/// One burst per duration at fixed field `b` and fixed FM depth.
pub fn duration_sweep(cfg: &SweepConfig, b: f64, durations: &[f64]) -> Result<Vec<DurationSample>> {
    if durations.is_empty() {
        return Err(Error::param(
            "durations",
            "at least one burst duration is required",
        ));
    }
    let programs = durations
        .iter()
        .map(|&d| {
            Ok(cfg
                .program
                .with_schedule(cfg.program.schedule.with_duration(d)?))
        })
        .collect::<Result<Vec<_>>>()?;
    first_error(map_indices(cfg.execution, durations.len(), |i| {
        let p = spin_down_after_burst(&programs[i], b, &cfg.electron, &cfg.propagation)?;
        Ok(DurationSample {
            burst_duration: durations[i],
            p_down_true: p,
            p_down_measured: measured(p, cfg, i, true)?,
        })
    }))
}

/// Runs one chirp per window centre at field `b` and reports how many driven
/// resonances each window covers. Windows keep the chirp rate of
/// `cfg.program`, so the burst length scales with `fm_depth`.
pub fn parity_scan(
    cfg: &SweepConfig,
    b: f64,
    window_centers: &[f64],
    fm_depth: f64,
) -> Result<Vec<ParityPoint>> {
    if window_centers.is_empty() {
        return Err(Error::param(
            "window_centers",
            "at least one window is required",
        ));
    }
    let base = cfg.program.schedule;
    let duration = if base.fm_depth > 0.0 {
        base.duration * fm_depth / base.fm_depth
    } else {
        base.duration
    };
    let g = cfg.electron.g_factor;
    let programs = window_centers
        .iter()
        .map(|&fc| {
            let s = crate::drive::ChirpSchedule::new(fc, fm_depth, duration, base.shape)?;
            Ok(cfg.program.with_schedule(s))
        })
        .collect::<Result<Vec<_>>>()?;
    first_error(map_indices(cfg.execution, programs.len(), |i| {
        let program = &programs[i];
        Ok(ParityPoint {
            f_center: window_centers[i],
            resonances_covered: program.resonances_in_window(b, g),
            p_down: spin_down_after_burst(program, b, &cfg.electron, &cfg.propagation)?,
        })
    }))
}

/// Fixed-frequency field sweep. The nuclear field follows one slow
/// Ornstein-Uhlenbeck trace across the whole measurement; each point
/// accumulates `measurement.shots` cycles spread over
/// `measurement_time_per_point`, and every cycle sees the field of its own
/// instant.
pub fn fixed_frequency_sweep(
    cfg: &SweepConfig,
    measurement_time_per_point: f64,
) -> Result<Vec<LineshapePoint>> {
    cfg.validate()?;
    if cfg.program.schedule.fm_depth != 0.0 {
        return Err(Error::param(
            "fm_depth",
            "fixed-frequency sweep needs fm_depth = 0",
        ));
    }
    let m = cfg.measurement.ok_or_else(|| {
        Error::param(
            "measurement",
            "fixed-frequency sweep needs a measurement model",
        )
    })?;
    if !(measurement_time_per_point > 0.0) {
        return Err(Error::param("measurement_time", "must be positive"));
    }
    let fields = cfg.fields();
    let cycles = m.shots as usize;
    let cycle_time = measurement_time_per_point / cycles as f64;
    let total = cycle_time * (fields.len() * cycles - 1) as f64;
    let mut drift_rng = SeedStream::for_task(cfg.seed, 0, 0, StreamPurpose::Drift).rng();
    let trace = ou_field_trace(
        &cfg.nuclear,
        cycle_time,
        total * (1.0 + 1e-12),
        &mut drift_rng,
    )?;

    first_error(map_indices(cfg.execution, fields.len(), |i| {
        let b = fields[i];
        let mut rng = SeedStream::for_task(cfg.seed, i, 0, StreamPurpose::Shots).rng();
        let (mut p_sum, mut clicks) = (0.0, 0u64);
        for j in 0..cycles {
            let offset = trace[i * cycles + j];
            let p =
                spin_down_after_burst(&cfg.program, b + offset, &cfg.electron, &cfg.propagation)?;
            p_sum += p;
            if rng.random_bool(apply_measurement_fidelity(p, &m).clamp(0.0, 1.0)) {
                clicks += 1;
            }
        }
        Ok(LineshapePoint {
            b,
            p_down_true: p_sum / cycles as f64,
            p_down_measured: clicks as f64 / cycles as f64,
        })
    }))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LzRow {
    pub ratio: f64,
    pub rabi: f64,
    pub rate: f64,
    pub p_analytic: f64,
    pub p_numeric: f64,
}

/// Carrier used for isolated single-resonance passages. Only the detuning
/// matters in the rotating frame.
const PASSAGE_CARRIER: f64 = 10e9;

/// Single linear passages at the requested adiabaticity ratios, each chirp
/// spanning `window_factor` transition widths centred on resonance.
pub fn landau_zener_table(
    rabi: f64,
    ratios: &[f64],
    window_factor: f64,
    electron: &ElectronParams,
    propagation: &PropagationConfig,
    execution: Execution,
) -> Result<Vec<LzRow>> {
    if !(rabi > 0.0) {
        return Err(Error::param("rabi", "must be positive"));
    }
    if !(window_factor > 0.0) {
        return Err(Error::param("window_factor", "must be positive"));
    }
    if ratios.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::param("ratios", "must all be positive"));
    }
    let b = crate::spin::larmor_to_field(PASSAGE_CARRIER, electron.g_factor);
    first_error(map_indices(execution, ratios.len(), |i| {
        let ratio = ratios[i];
        let rate = std::f64::consts::PI.powi(2) * rabi * rabi / ratio;
        let width = rabi.max(rate.sqrt());
        let fm_depth = window_factor * width;
        let schedule = crate::drive::ChirpSchedule::new(
            PASSAGE_CARRIER,
            fm_depth,
            fm_depth / rate,
            crate::drive::ChirpShape::Up,
        )?;
        let program = DriveProgram::new(schedule, rabi, vec![])?;
        Ok(LzRow {
            ratio,
            rabi,
            rate,
            p_analytic: crate::analytic::landau_zener_flip_probability(rabi, rate)?,
            p_numeric: spin_down_after_burst(&program, b, electron, propagation)?,
        })
    }))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RwaRow {
    pub f_larmor: f64,
    pub p_rotating: f64,
    pub p_lab: f64,
}

impl RwaRow {
    pub fn difference(&self) -> f64 {
        (self.p_rotating - self.p_lab).abs()
    }
}

/// Propagates `program` in both frames at each Larmor frequency.
pub fn rwa_comparison(
    program: &DriveProgram,
    larmor_frequencies: &[f64],
    electron: &ElectronParams,
    dt: Option<f64>,
    execution: Execution,
) -> Result<Vec<RwaRow>> {
    let rotating = PropagationConfig {
        dt,
        ..PropagationConfig::default()
    };
    let lab = PropagationConfig {
        dt,
        ..PropagationConfig::lab()
    };
    first_error(map_indices(execution, larmor_frequencies.len(), |i| {
        let f = larmor_frequencies[i];
        let b = crate::spin::larmor_to_field(f, electron.g_factor);
        Ok(RwaRow {
            f_larmor: f,
            p_rotating: spin_down_after_burst(program, b, electron, &rotating)?,
            p_lab: spin_down_after_burst(program, b, electron, &lab)?,
        })
    }))
}

/// Shape diagnostics on a sampled lineshape.
pub mod metrics {
    use super::LineshapePoint;

    /// Mean true spin-down probability over points with `lo <= b <= hi`.
    pub fn window_mean(points: &[LineshapePoint], lo: f64, hi: f64) -> Option<f64> {
        let inside: Vec<f64> = points
            .iter()
            .filter(|p| p.b >= lo && p.b <= hi)
            .map(|p| p.p_down_true)
            .collect();
        (!inside.is_empty()).then(|| inside.iter().sum::<f64>() / inside.len() as f64)
    }

    /// Outermost fields at which the true probability crosses `level`,
    /// linearly interpolated.
    pub fn support_edges(points: &[LineshapePoint], level: f64) -> Option<(f64, f64)> {
        let first = points.iter().position(|p| p.p_down_true >= level)?;
        let last = points.iter().rposition(|p| p.p_down_true >= level)?;
        let left = if first == 0 {
            points[0].b
        } else {
            interpolate(&points[first - 1], &points[first], level)
        };
        let right = if last + 1 == points.len() {
            points[last].b
        } else {
            interpolate(&points[last], &points[last + 1], level)
        };
        Some((left, right))
    }

    /// Width of the rising edge between `lo_frac` and `hi_frac` of
    /// `plateau`, searching left-to-right up to `b_limit`.
    pub fn rising_flank_width(
        points: &[LineshapePoint],
        plateau: f64,
        lo_frac: f64,
        hi_frac: f64,
        b_limit: f64,
    ) -> Option<f64> {
        let section: Vec<LineshapePoint> =
            points.iter().copied().filter(|p| p.b <= b_limit).collect();
        let cross = |level: f64| {
            let k = section.iter().position(|p| p.p_down_true >= level)?;
            (k > 0).then(|| interpolate(&section[k - 1], &section[k], level))
        };
        Some(cross(hi_frac * plateau)? - cross(lo_frac * plateau)?)
    }

    /// Width of the falling edge between `hi_frac` and `lo_frac` of
    /// `plateau`, searching right-to-left down to `b_limit`.
    pub fn falling_flank_width(
        points: &[LineshapePoint],
        plateau: f64,
        lo_frac: f64,
        hi_frac: f64,
        b_limit: f64,
    ) -> Option<f64> {
        let section: Vec<LineshapePoint> =
            points.iter().copied().filter(|p| p.b >= b_limit).collect();
        let cross = |level: f64| {
            let k = section.iter().rposition(|p| p.p_down_true >= level)?;
            (k + 1 < section.len()).then(|| interpolate(&section[k], &section[k + 1], level))
        };
        Some(cross(lo_frac * plateau)? - cross(hi_frac * plateau)?)
    }

    fn interpolate(a: &LineshapePoint, b: &LineshapePoint, level: f64) -> f64 {
        let dp = b.p_down_true - a.p_down_true;
        if dp == 0.0 {
            return a.b;
        }
        a.b + (level - a.p_down_true) / dp * (b.b - a.b)
    }
}
