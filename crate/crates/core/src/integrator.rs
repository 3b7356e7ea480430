//! Density-matrix propagation under the chirped multi-tone drive.
//!
//! Both propagators freeze the Hamiltonian at the midpoint of each step,
//! apply its exact 2x2 exponential, and then apply the exact phase-damping
//! channel for the same interval. In units of `h`, every Hamiltonian here is
//! written as `(1/2) (hx sx + hy sy + hz sz)` with the coefficients in Hz.
//!
//! Lab frame (no approximation):
//!   hz = -f_L,
//!   hx = -2 [rabi_so cos(phi(t)) + sum_N rabi_N cos(phi(t) + 2 pi gamma_N B t)],
//! where `phi` is the accumulated carrier phase.
//!
//! Frame rotating with the instantaneous carrier phase, counter-rotating
//! terms dropped:
//!   hz = f(t) - f_L,
//!   hx = -rabi_so - sum_N rabi_N cos(2 pi gamma_N B t),
//!   hy = sum_N rabi_N sin(2 pi gamma_N B t).
//!
//! The frame change is diagonal, so populations agree between the two.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::drive::DriveProgram;
use crate::error::{Error, Result};
use crate::spin::{bloch_vector, field_to_larmor, DensityMatrix, ElectronParams};

/// The step must resolve the fastest frequency present by this factor.
pub const MIN_STEPS_PER_PERIOD: f64 = 20.0;
/// Default resolution used when no step is configured.
pub const DEFAULT_STEPS_PER_PERIOD: f64 = 40.0;

const PHASOR_RESYNC: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    Rotating,
    Lab,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagationConfig {
    /// Fixed step in seconds; `None` picks `1 / (40 f_max)`.
    pub dt: Option<f64>,
    pub frame: Frame,
    pub record_trajectory: bool,
    /// Record every this many steps.
    pub trajectory_stride: usize,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            dt: None,
            frame: Frame::Rotating,
            record_trajectory: false,
            trajectory_stride: 1000,
        }
    }
}

impl PropagationConfig {
    pub fn lab() -> Self {
        Self {
            frame: Frame::Lab,
            ..Self::default()
        }
    }

    pub fn with_dt(self, dt: f64) -> Self {
        Self {
            dt: Some(dt),
            ..self
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub bloch: [f64; 3],
    pub p_down: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Propagation {
    pub state: DensityMatrix,
    pub trajectory: Vec<TrajectoryPoint>,
    pub steps: usize,
    pub dt: f64,
}

/// Element of SU(2), `[[a, b], [-conj(b), conj(a)]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Su2 {
    pub a: Complex64,
    pub b: Complex64,
}

impl Su2 {
    pub fn identity() -> Self {
        Self {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
        }
    }

    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        [[self.a, self.b], [-self.b.conj(), self.a.conj()]]
    }

    /// `U rho U^dagger` on the pair (rho00, rho01).
    #[inline]
    fn conjugate(&self, p: f64, c: Complex64) -> (f64, Complex64) {
        let (a, b) = (self.a, self.b);
        let q = 1.0 - p;
        let m00 = a * p + b * c.conj();
        let m01 = a * c + b * q;
        let p_new = (m00 * a.conj() + m01 * b.conj()).re;
        let c_new = m01 * a - m00 * b;
        (p_new, c_new)
    }

    fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        let (p, c) = self.conjugate(rho.p_up(), rho.coherence());
        DensityMatrix::from_populations(p, c)
    }
}

/// Exact exponential `exp(-i pi dt (hx sx + hy sy + hz sz))`, the propagator
/// of `(h/2)(hx sx + hy sy + hz sz)` over `dt`, with the coefficients in Hz.
#[inline]
pub fn step_unitary(hx: f64, hy: f64, hz: f64, dt: f64) -> Su2 {
    let norm = (hx * hx + hy * hy + hz * hz).sqrt();
    if norm == 0.0 {
        return Su2::identity();
    }
    let theta = PI * dt * norm;
    let (s, c) = theta.sin_cos();
    let k = s / norm;
    Su2 {
        a: Complex64::new(c, -k * hz),
        b: Complex64::new(-k * hy, -k * hx),
    }
}

fn total_rabi(program: &DriveProgram) -> f64 {
    program.rabi_so + program.active_species().map(|s| s.rabi_hf).sum::<f64>()
}

/// Upper bound on the frequencies present in the rotating-frame Hamiltonian
/// at field `b`: carrier detuning range, largest hyperfine tone offset, and
/// the total drive amplitude.
pub fn max_rotating_frequency(program: &DriveProgram, b: f64, g: f64) -> f64 {
    let s = &program.schedule;
    let detuning = (s.f_center - field_to_larmor(b, g)).abs() + 0.5 * s.fm_depth;
    let offset = program
        .active_species()
        .map(|sp| sp.gamma * b)
        .fold(0.0, f64::max);
    detuning + offset + total_rabi(program)
}

/// Largest absolute frequency in the lab-frame Hamiltonian at field `b`.
pub fn max_lab_frequency(program: &DriveProgram, b: f64, g: f64) -> f64 {
    let offset = program
        .active_species()
        .map(|sp| sp.gamma * b)
        .fold(0.0, f64::max);
    field_to_larmor(b, g).max(program.schedule.f_high() + offset) + 2.0 * total_rabi(program)
}

#[derive(Clone, Copy, Debug)]
struct StepPlan {
    n: usize,
    dt: f64,
}

fn plan_steps(duration: f64, f_max: f64, requested: Option<f64>) -> Result<StepPlan> {
    let limit = if f_max > 0.0 {
        1.0 / (MIN_STEPS_PER_PERIOD * f_max)
    } else {
        f64::INFINITY
    };
    let target = match requested {
        Some(dt) => {
            if !(dt > 0.0) {
                return Err(Error::param("dt", "must be positive"));
            }
            if dt > limit {
                return Err(Error::StepTooLarge { dt, limit });
            }
            dt
        }
        None if f_max > 0.0 => 1.0 / (DEFAULT_STEPS_PER_PERIOD * f_max),
        None => duration,
    };
    let n = ((duration / target).ceil() as usize).max(1);
    Ok(StepPlan {
        n,
        dt: duration / n as f64,
    })
}

struct Recorder {
    enabled: bool,
    stride: usize,
    points: Vec<TrajectoryPoint>,
}

impl Recorder {
    fn new(cfg: &PropagationConfig) -> Self {
        Self {
            enabled: cfg.record_trajectory,
            stride: cfg.trajectory_stride.max(1),
            points: Vec::new(),
        }
    }

    #[inline]
    fn observe(&mut self, step: usize, last: usize, t: f64, p: f64, c: Complex64) {
        if self.enabled && (step.is_multiple_of(self.stride) || step == last) {
            let rho = DensityMatrix::from_populations(p, c);
            self.points.push(TrajectoryPoint {
                t,
                bloch: bloch_vector(&rho),
                p_down: rho.p_down(),
            });
        }
    }
}

/// Sinusoid `exp(i 2 pi f t)` sampled at step midpoints, advanced by complex
/// multiplication and periodically resynchronised to the exact value.
struct Phasor {
    freq: f64,
    amp: f64,
    z: Complex64,
    step: Complex64,
}

impl Phasor {
    fn new(freq: f64, amp: f64, dt: f64) -> Self {
        let mut p = Self {
            freq,
            amp,
            z: Complex64::new(1.0, 0.0),
            step: Complex64::from_polar(1.0, TAU * (freq * dt).fract()),
        };
        p.resync(0.5 * dt);
        p
    }

    fn resync(&mut self, t: f64) {
        self.z = Complex64::from_polar(1.0, TAU * (self.freq * t).fract());
    }
}

fn check_inputs(rho0: &DensityMatrix, b: f64) -> Result<()> {
    rho0.validate()?;
    if !b.is_finite() || b < 0.0 {
        return Err(Error::param("b", "field must be finite and non-negative"));
    }
    Ok(())
}

/// Propagates `rho0` through one burst in the carrier-rotating frame.
pub fn propagate_rotating(
    rho0: &DensityMatrix,
    program: &DriveProgram,
    b: f64,
    electron: &ElectronParams,
    cfg: &PropagationConfig,
) -> Result<Propagation> {
    if cfg.frame != Frame::Rotating {
        return Err(Error::param(
            "frame",
            "propagate_rotating needs the rotating frame",
        ));
    }
    check_inputs(rho0, b)?;
    let g = electron.g_factor;
    let schedule = &program.schedule;
    let plan = plan_steps(
        schedule.duration,
        max_rotating_frequency(program, b, g),
        cfg.dt,
    )?;
    let StepPlan { n, dt } = plan;
    let decay = (-dt / electron.t2).exp();
    let f_l = field_to_larmor(b, g);

    if program.is_time_independent() && !cfg.record_trajectory {
        let u = step_unitary(-program.rabi_so, 0.0, schedule.f_center - f_l, dt);
        let map = BlochMap::step(&u, decay).pow(n as u64);
        return Ok(Propagation {
            state: map.apply(rho0),
            trajectory: Vec::new(),
            steps: n,
            dt,
        });
    }

    let mut tones: Vec<Phasor> = program
        .active_species()
        .map(|s| Phasor::new(s.gamma * b, s.rabi_hf, dt))
        .collect();
    let mut rec = Recorder::new(cfg);
    let (mut p, mut c) = (rho0.p_up(), rho0.coherence());
    rec.observe(0, n, 0.0, p, c);

    for k in 0..n {
        let t_mid = (k as f64 + 0.5) * dt;
        if k % PHASOR_RESYNC == 0 && k > 0 {
            tones.iter_mut().for_each(|ph| ph.resync(t_mid));
        }
        let hz = schedule.frequency_unchecked(t_mid) - f_l;
        let mut hx = -program.rabi_so;
        let mut hy = 0.0;
        for ph in tones.iter_mut() {
            hx -= ph.amp * ph.z.re;
            hy += ph.amp * ph.z.im;
            ph.z *= ph.step;
        }
        let u = step_unitary(hx, hy, hz, dt);
        (p, c) = u.conjugate(p, c);
        c *= decay;
        rec.observe(k + 1, n, (k + 1) as f64 * dt, p, c);
    }

    Ok(Propagation {
        state: DensityMatrix::from_populations(p, c),
        trajectory: rec.points,
        steps: n,
        dt,
    })
}

/// Propagates `rho0` through one burst in the laboratory frame with the full
/// cosine drive.
pub fn propagate_lab(
    rho0: &DensityMatrix,
    program: &DriveProgram,
    b: f64,
    electron: &ElectronParams,
    cfg: &PropagationConfig,
) -> Result<Propagation> {
    if cfg.frame != Frame::Lab {
        return Err(Error::param("frame", "propagate_lab needs the lab frame"));
    }
    check_inputs(rho0, b)?;
    let g = electron.g_factor;
    let schedule = &program.schedule;
    let plan = plan_steps(schedule.duration, max_lab_frequency(program, b, g), cfg.dt)?;
    let StepPlan { n, dt } = plan;
    let decay = (-dt / electron.t2).exp();
    let hz = -field_to_larmor(b, g);
    let tones: Vec<(f64, f64)> = program
        .active_species()
        .map(|s| (s.gamma * b, s.rabi_hf))
        .collect();

    let mut rec = Recorder::new(cfg);
    let (mut p, mut c) = (rho0.p_up(), rho0.coherence());
    rec.observe(0, n, 0.0, p, c);

    for k in 0..n {
        let t_mid = (k as f64 + 0.5) * dt;
        let carrier = schedule.phase_cycles(t_mid);
        let mut drive = program.rabi_so * (TAU * carrier.fract()).cos();
        for &(offset, amp) in &tones {
            drive += amp * (TAU * (carrier + offset * t_mid).fract()).cos();
        }
        let u = step_unitary(-2.0 * drive, 0.0, hz, dt);
        (p, c) = u.conjugate(p, c);
        c *= decay;
        rec.observe(k + 1, n, (k + 1) as f64 * dt, p, c);
    }

    Ok(Propagation {
        state: DensityMatrix::from_populations(p, c),
        trajectory: rec.points,
        steps: n,
        dt,
    })
}

/// Dispatches on `cfg.frame`.
pub fn propagate(
    rho0: &DensityMatrix,
    program: &DriveProgram,
    b: f64,
    electron: &ElectronParams,
    cfg: &PropagationConfig,
) -> Result<Propagation> {
    match cfg.frame {
        Frame::Rotating => propagate_rotating(rho0, program, b, electron, cfg),
        Frame::Lab => propagate_lab(rho0, program, b, electron, cfg),
    }
}

/// Linear map on the Bloch vector for one step of a constant Hamiltonian
/// followed by phase damping. Used to exponentiate time-independent bursts.
#[derive(Clone, Copy, Debug, PartialEq)]
struct BlochMap([[f64; 3]; 3]);

impl BlochMap {
    fn identity() -> Self {
        Self([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    fn step(u: &Su2, decay: f64) -> Self {
        let mut m = [[0.0; 3]; 3];
        for j in 0..3 {
            let mut e = [0.0; 3];
            e[j] = 1.0;
            let col = bloch_vector(&u.apply(&DensityMatrix::from_bloch_unchecked(e)));
            m[0][j] = decay * col[0];
            m[1][j] = decay * col[1];
            m[2][j] = col[2];
        }
        Self(m)
    }

    fn mul(&self, rhs: &Self) -> Self {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        Self(out)
    }

    fn pow(&self, mut n: u64) -> Self {
        let mut base = *self;
        let mut acc = Self::identity();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        acc
    }

    fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        let r = bloch_vector(rho);
        let m = &self.0;
        let out: [f64; 3] =
            std::array::from_fn(|i| m[i][0] * r[0] + m[i][1] * r[1] + m[i][2] * r[2]);
        DensityMatrix::from_bloch_unchecked(out)
    }
}
