//! Chirped multi-tone drive programs and resonance-condition arithmetic.
//!
//! The simulation keeps a single electron resonance at `f_L(B)` and chirps
//! one carrier per mechanism through it: the spin-orbit tone sits at the
//! carrier frequency `f(t)`, and each hyperfine tone sits above it at
//! `f(t) + gamma_N * B`. Sweeping `B` therefore moves the four resonances
//! relative to the chirp window exactly as in the field-swept experiment.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::spin::{field_to_larmor, larmor_per_tesla, larmor_to_field};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Isotope {
    As75,
    Ga69,
    Ga71,
}

impl Isotope {
    pub const ALL: [Isotope; 3] = [Isotope::As75, Isotope::Ga69, Isotope::Ga71];

    /// Nuclear Larmor frequency per tesla (Hz/T).
    pub fn gamma(self) -> f64 {
        match self {
            Isotope::As75 => 7.318e6,
            Isotope::Ga69 => 10.24e6,
            Isotope::Ga71 => 13.02e6,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Isotope::As75 => "As75",
            Isotope::Ga69 => "Ga69",
            Isotope::Ga71 => "Ga71",
        }
    }
}

impl fmt::Display for Isotope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Isotope {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "as75" => Ok(Isotope::As75),
            "ga69" => Ok(Isotope::Ga69),
            "ga71" => Ok(Isotope::Ga71),
            other => Err(format!("unknown isotope `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NuclearSpecies {
    pub isotope: Isotope,
    /// Hz/T.
    pub gamma: f64,
    /// Hyperfine-mediated Rabi frequency, Hz.
    pub rabi_hf: f64,
}

impl NuclearSpecies {
    pub fn new(isotope: Isotope, gamma: f64, rabi_hf: f64) -> Result<Self> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::param("gamma", "must be finite and non-negative"));
        }
        if !(rabi_hf >= 0.0) || !rabi_hf.is_finite() {
            return Err(Error::param("rabi_hf", "must be finite and non-negative"));
        }
        Ok(Self {
            isotope,
            gamma,
            rabi_hf,
        })
    }

    /// Species with the GaAs nuclear shift of `isotope`.
    pub fn gaas(isotope: Isotope, rabi_hf: f64) -> Result<Self> {
        Self::new(isotope, isotope.gamma(), rabi_hf)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChirpShape {
    Up,
    Down,
    /// Up over the first half of the burst, back down over the second.
    Triangle,
}

impl fmt::Display for ChirpShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChirpShape::Up => "up",
            ChirpShape::Down => "down",
            ChirpShape::Triangle => "triangle",
        })
    }
}

impl FromStr for ChirpShape {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "up" => Ok(ChirpShape::Up),
            "down" => Ok(ChirpShape::Down),
            "triangle" => Ok(ChirpShape::Triangle),
            other => Err(format!(
                "unknown chirp shape `{other}` (up | down | triangle)"
            )),
        }
    }
}

/// Linear frequency chirp.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChirpSchedule {
    pub f_center: f64,
    /// Full frequency excursion, Hz.
    pub fm_depth: f64,
    /// Burst length, s.
    pub duration: f64,
    pub shape: ChirpShape,
}

impl ChirpSchedule {
    pub fn new(f_center: f64, fm_depth: f64, duration: f64, shape: ChirpShape) -> Result<Self> {
        if !f_center.is_finite() || f_center <= 0.0 {
            return Err(Error::param("f_center", "must be positive"));
        }
        if !fm_depth.is_finite() || fm_depth < 0.0 {
            return Err(Error::param("fm_depth", "must be non-negative"));
        }
        if fm_depth > 2.0 * f_center {
            return Err(Error::param(
                "fm_depth",
                "chirp would reach negative frequencies",
            ));
        }
        if !duration.is_finite() || duration <= 0.0 {
            return Err(Error::param("duration", "must be positive"));
        }
        Ok(Self {
            f_center,
            fm_depth,
            duration,
            shape,
        })
    }

    /// Magnitude of df/dt on each leg, Hz/s.
    pub fn rate(&self) -> f64 {
        match self.shape {
            ChirpShape::Up | ChirpShape::Down => self.fm_depth / self.duration,
            ChirpShape::Triangle => 2.0 * self.fm_depth / self.duration,
        }
    }

    pub fn f_low(&self) -> f64 {
        self.f_center - 0.5 * self.fm_depth
    }

    pub fn f_high(&self) -> f64 {
        self.f_center + 0.5 * self.fm_depth
    }

    /// Same chirp with a new duration.
    pub fn with_duration(&self, duration: f64) -> Result<Self> {
        Self::new(self.f_center, self.fm_depth, duration, self.shape)
    }

    /// Carrier frequency at `t`, without bounds checking.
    pub(crate) fn frequency_unchecked(&self, t: f64) -> f64 {
        let rate = self.rate();
        match self.shape {
            ChirpShape::Up => self.f_low() + rate * t,
            ChirpShape::Down => self.f_high() - rate * t,
            ChirpShape::Triangle => {
                let half = 0.5 * self.duration;
                if t <= half {
                    self.f_low() + rate * t
                } else {
                    self.f_high() - rate * (t - half)
                }
            }
        }
    }

    /// Accumulated carrier phase at `t`, in cycles (integral of `f`).
    pub(crate) fn phase_cycles(&self, t: f64) -> f64 {
        let rate = self.rate();
        match self.shape {
            ChirpShape::Up => self.f_low() * t + 0.5 * rate * t * t,
            ChirpShape::Down => self.f_high() * t - 0.5 * rate * t * t,
            ChirpShape::Triangle => {
                let half = 0.5 * self.duration;
                if t <= half {
                    self.f_low() * t + 0.5 * rate * t * t
                } else {
                    let s = t - half;
                    self.f_low() * half + 0.5 * rate * half * half + self.f_high() * s
                        - 0.5 * rate * s * s
                }
            }
        }
    }
}

/// Carrier frequency of `schedule` at time `t` within the burst.
pub fn instantaneous_frequency(schedule: &ChirpSchedule, t: f64) -> Result<f64> {
    if !(0.0..=schedule.duration).contains(&t) {
        return Err(Error::param(
            "t",
            format!(
                "{t:e} s lies outside the burst [0, {:e}] s",
                schedule.duration
            ),
        ));
    }
    Ok(schedule.frequency_unchecked(t))
}

/// A chirp plus the set of tones that ride on it.
#[derive(Clone, Debug, PartialEq)]
pub struct DriveProgram {
    pub schedule: ChirpSchedule,
    /// Spin-orbit-mediated Rabi frequency, Hz.
    pub rabi_so: f64,
    pub species: Vec<NuclearSpecies>,
}

impl DriveProgram {
    pub fn new(
        schedule: ChirpSchedule,
        rabi_so: f64,
        species: Vec<NuclearSpecies>,
    ) -> Result<Self> {
        if !(rabi_so >= 0.0) || !rabi_so.is_finite() {
            return Err(Error::param("rabi_so", "must be finite and non-negative"));
        }
        for (i, s) in species.iter().enumerate() {
            if species[..i].iter().any(|o| o.isotope == s.isotope) {
                return Err(Error::param(
                    "species",
                    format!("{} listed more than once", s.isotope),
                ));
            }
        }
        Ok(Self {
            schedule,
            rabi_so,
            species,
        })
    }

    pub fn with_schedule(&self, schedule: ChirpSchedule) -> Self {
        Self {
            schedule,
            ..self.clone()
        }
    }

    /// Hyperfine tones with non-zero amplitude.
    pub(crate) fn active_species(&self) -> impl Iterator<Item = &NuclearSpecies> {
        self.species.iter().filter(|s| s.rabi_hf > 0.0)
    }

    /// True when the rotating-frame Hamiltonian does not depend on time.
    pub fn is_time_independent(&self) -> bool {
        self.schedule.fm_depth == 0.0 && self.active_species().next().is_none()
    }

    /// Carrier frequencies at which each driven tone is resonant at field `b`:
    /// spin-orbit first, then the active hyperfine tones.
    pub fn resonant_carriers(&self, b: f64, g: f64) -> Vec<f64> {
        let f_l = field_to_larmor(b, g);
        let mut out = Vec::with_capacity(1 + self.species.len());
        if self.rabi_so > 0.0 {
            out.push(f_l);
        }
        out.extend(self.active_species().map(|s| f_l - s.gamma * b));
        out
    }

    /// Number of driven resonances the chirp window crosses at field `b`.
    pub fn resonances_in_window(&self, b: f64, g: f64) -> usize {
        let (lo, hi) = (self.schedule.f_low(), self.schedule.f_high());
        self.resonant_carriers(b, g)
            .into_iter()
            .filter(|f| (lo..=hi).contains(f))
            .count()
    }
}

/// Resonance fields of the spin-orbit line and of each hyperfine line for a
/// fixed excitation frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct ResonanceFields {
    pub spin_orbit: f64,
    pub hyperfine: Vec<(Isotope, f64)>,
}

impl ResonanceFields {
    pub fn get(&self, isotope: Isotope) -> Option<f64> {
        self.hyperfine
            .iter()
            .find(|(i, _)| *i == isotope)
            .map(|&(_, b)| b)
    }

    /// Highest resonance field of all lines.
    pub fn highest(&self) -> f64 {
        self.hyperfine
            .iter()
            .map(|&(_, b)| b)
            .fold(self.spin_orbit, f64::max)
    }
}

pub fn resonance_fields(
    f_drive: f64,
    g: f64,
    species: &[NuclearSpecies],
) -> Result<ResonanceFields> {
    if !f_drive.is_finite() || f_drive <= 0.0 {
        return Err(Error::param("f_drive", "must be positive"));
    }
    let per_tesla = larmor_per_tesla(g);
    let hyperfine = species
        .iter()
        .map(|s| {
            if s.gamma >= per_tesla {
                Err(Error::param(
                    "gamma",
                    format!(
                        "{} shift {} Hz/T exceeds the electron Zeeman slope",
                        s.isotope, s.gamma
                    ),
                ))
            } else {
                Ok((s.isotope, f_drive / (per_tesla - s.gamma)))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResonanceFields {
        spin_orbit: larmor_to_field(f_drive, g),
        hyperfine,
    })
}

/// Field span swept through by a chirp of full depth `fm_depth`.
pub fn fm_depth_to_field_span(fm_depth: f64, g: f64) -> f64 {
    larmor_to_field(fm_depth, g)
}

/// Total field range over which some resonance is crossed by the chirp:
/// the spread of the resonance fields plus one FM field span.
pub fn covered_field_span(program: &DriveProgram, g: f64) -> Result<f64> {
    let res = resonance_fields(program.schedule.f_center, g, &program.species)?;
    Ok(res.highest() - res.spin_orbit + fm_depth_to_field_span(program.schedule.fm_depth, g))
}

/// Detuning of every tone from the electron Larmor frequency at time `t`:
/// spin-orbit first, then one entry per species in program order.
pub fn detunings(program: &DriveProgram, t: f64, b: f64, g: f64) -> Result<Vec<f64>> {
    let f = instantaneous_frequency(&program.schedule, t)?;
    let f_l = field_to_larmor(b, g);
    let mut out = Vec::with_capacity(1 + program.species.len());
    out.push(f - f_l);
    out.extend(program.species.iter().map(|s| f + s.gamma * b - f_l));
    Ok(out)
}
