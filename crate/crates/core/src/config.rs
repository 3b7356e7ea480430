//! Run configuration: a strict, sectioned `key = value` grammar.
//!
//! ```text
//! experiment = lineshape
//! seed = 7
//!
//! [chirp]
//! f_center = 26.5 GHz
//! fm_depth = 40 MHz
//! duration = 500 us
//! ```
//!
//! `#` starts a comment. Quantities take an optional unit suffix and are
//! stored in SI units; a bare number is already SI. Rabi frequencies also
//! accept angular units (`Mrad/s`) and drive-field amplitudes (`mT`). Unknown
//! sections, unknown keys and repeated keys are errors.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use crate::analytic::SaturationLevel;
use crate::drive::{
    resonance_fields, ChirpSchedule, ChirpShape, DriveProgram, Isotope, NuclearSpecies,
};
use crate::ensemble::{MeasurementModel, NuclearFieldModel};
use crate::error::{Error, Result};
use crate::integrator::{Frame, PropagationConfig};
use crate::spin::{larmor_per_tesla, ElectronParams};
use crate::sweep::{EnsembleMode, Execution, SweepConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Lineshape,
    Duration,
    Parity,
    FixedFreq,
    LzTable,
    ValidateRwa,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Lineshape => "lineshape",
            Experiment::Duration => "duration",
            Experiment::Parity => "parity",
            Experiment::FixedFreq => "fixedfreq",
            Experiment::LzTable => "lz-table",
            Experiment::ValidateRwa => "validate-rwa",
        }
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "lineshape" => Experiment::Lineshape,
            "duration" => Experiment::Duration,
            "parity" => Experiment::Parity,
            "fixedfreq" => Experiment::FixedFreq,
            "lz-table" => Experiment::LzTable,
            "validate-rwa" => Experiment::ValidateRwa,
            _ => return Err(format!("unknown experiment `{s}`")),
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Csv,
    JsonLines,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json-lines" => Ok(OutputFormat::JsonLines),
            _ => Err(format!(
                "unknown output format `{s}` (expected csv or json-lines)"
            )),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::JsonLines => "json-lines",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriveSettings {
    /// Hz.
    pub rabi_so: f64,
    /// Hz, per isotope in [`Isotope::ALL`] order; `None` when not given.
    pub rabi_hf: [Option<f64>; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSettings {
    pub b_start: Option<f64>,
    pub b_stop: Option<f64>,
    pub b_step: f64,
    pub ensemble: EnsembleMode,
    pub mc_samples: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorSettings {
    pub dt: Option<f64>,
    pub frame: Frame,
    pub execution: Execution,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DurationSettings {
    /// Defaults to the spin-orbit resonance of the chirp centre.
    pub field: Option<f64>,
    pub durations: Vec<f64>,
    pub saturation: SaturationLevel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParitySettings {
    /// Defaults to the spin-orbit resonance of the chirp centre.
    pub field: Option<f64>,
    pub window_centers: Vec<f64>,
    /// Defaults to the chirp FM depth.
    pub fm_depth: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LzSettings {
    pub ratios: Vec<f64>,
    pub rabi: f64,
    pub window_factor: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RwaSettings {
    pub larmor: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub output_format: OutputFormat,
    pub output_path: Option<PathBuf>,
    pub seed: u64,
    pub electron: ElectronParams,
    pub chirp: Option<ChirpSchedule>,
    pub drive: DriveSettings,
    pub sweep: SweepSettings,
    pub nuclear: NuclearFieldModel,
    pub measurement: Option<MeasurementModel>,
    pub integrator: IntegratorSettings,
    pub duration: DurationSettings,
    pub parity: ParitySettings,
    /// Seconds of acquisition per field point.
    pub measurement_time: f64,
    pub lz: LzSettings,
    pub rwa: RwaSettings,
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("", &["experiment", "output_format", "output_path", "seed"]),
    ("electron", &["g_factor", "t2"]),
    ("chirp", &["f_center", "fm_depth", "duration", "shape"]),
    (
        "drive",
        &["rabi_so", "rabi_hf_as75", "rabi_hf_ga69", "rabi_hf_ga71"],
    ),
    (
        "sweep",
        &["b_start", "b_stop", "b_step", "ensemble", "mc_samples"],
    ),
    ("nuclear", &["sigma", "correlation_time"]),
    ("measurement", &["fidelity_up", "fidelity_down", "shots"]),
    ("integrator", &["dt", "frame", "execution"]),
    ("duration", &["field", "durations", "saturation"]),
    ("parity", &["field", "window_centers", "fm_depth"]),
    ("fixedfreq", &["measurement_time"]),
    ("lz", &["ratios", "rabi", "window_factor"]),
    ("rwa", &["larmor"]),
];

const RABI_HF_KEYS: [&str; 3] = ["rabi_hf_as75", "rabi_hf_ga69", "rabi_hf_ga71"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Dim {
    Frequency,
    Time,
    Field,
}

const FREQUENCY_UNITS: &[(&str, f64)] = &[
    ("Hz", 1.0),
    ("kHz", 1e3),
    ("MHz", 1e6),
    ("GHz", 1e9),
    ("rad/s", 1.0 / TAU),
    ("krad/s", 1e3 / TAU),
    ("Mrad/s", 1e6 / TAU),
    ("Grad/s", 1e9 / TAU),
];
const TIME_UNITS: &[(&str, f64)] = &[
    ("s", 1.0),
    ("ms", 1e-3),
    ("us", 1e-6),
    ("µs", 1e-6),
    ("ns", 1e-9),
    ("ps", 1e-12),
];
const FIELD_UNITS: &[(&str, f64)] = &[("T", 1.0), ("mT", 1e-3), ("uT", 1e-6), ("µT", 1e-6)];

fn unit_table(dim: Dim) -> &'static [(&'static str, f64)] {
    match dim {
        Dim::Frequency => FREQUENCY_UNITS,
        Dim::Time => TIME_UNITS,
        Dim::Field => FIELD_UNITS,
    }
}

fn dim_of_unit(unit: &str) -> Option<(Dim, f64)> {
    [Dim::Frequency, Dim::Time, Dim::Field]
        .into_iter()
        .find_map(|d| {
            unit_table(d)
                .iter()
                .find(|(u, _)| *u == unit)
                .map(|&(_, scale)| (d, scale))
        })
}

/// Splits `"40 MHz"` / `"40MHz"` / `"4e7"` into number and unit.
fn split_quantity(text: &str) -> std::result::Result<(f64, Option<&str>), String> {
    let text = text.trim();
    if text == "inf" {
        return Ok((f64::INFINITY, None));
    }
    let end = text
        .char_indices()
        .find(|&(i, c)| {
            let exponent = (c == 'e' || c == 'E')
                && text[i + c.len_utf8()..]
                    .chars()
                    .next()
                    .is_some_and(|n| n.is_ascii_digit() || n == '-' || n == '+');
            !(c.is_ascii_digit() || c == '.' || c == '-' || c == '+' || exponent)
        })
        .map_or(text.len(), |(i, _)| i);
    let number: f64 = text[..end]
        .trim()
        .parse()
        .map_err(|_| format!("`{text}` is not a number"))?;
    let unit = text[end..].trim();
    Ok((number, (!unit.is_empty()).then_some(unit)))
}

fn parse_quantity(text: &str, dim: Dim) -> std::result::Result<f64, String> {
    let (number, unit) = split_quantity(text)?;
    match unit {
        None => Ok(number),
        Some(u) => match dim_of_unit(u) {
            Some((d, scale)) if d == dim => Ok(number * scale),
            Some((d, _)) => {
                Err(format!("unit `{u}` is a {d:?} unit, expected {dim:?}").to_lowercase())
            }
            None => Err(format!("unknown unit `{u}`")),
        },
    }
}

/// A Rabi frequency in Hz or a drive-field amplitude in T.
#[derive(Clone, Copy, Debug)]
enum RabiValue {
    Frequency(f64),
    Field(f64),
}

fn parse_rabi(text: &str) -> std::result::Result<RabiValue, String> {
    let (number, unit) = split_quantity(text)?;
    match unit.map(dim_of_unit) {
        None => Ok(RabiValue::Frequency(number)),
        Some(Some((Dim::Frequency, s))) => Ok(RabiValue::Frequency(number * s)),
        Some(Some((Dim::Field, s))) => Ok(RabiValue::Field(number * s)),
        Some(_) => Err(format!("`{text}` is neither a frequency nor a drive field")),
    }
}

struct Entry {
    value: String,
    line: usize,
}

/// Parsed key-value pairs, consumed key by key.
struct Document {
    entries: BTreeMap<(String, String), Entry>,
    sections: BTreeMap<String, usize>,
}

impl Document {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut sections = BTreeMap::new();
        let mut section = String::new();
        let mut known: &[&str] = SECTIONS[0].1;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::config(line, "unterminated section header"))?
                    .trim();
                known = SECTIONS
                    .iter()
                    .find(|(s, _)| !s.is_empty() && *s == name)
                    .ok_or_else(|| Error::config(line, format!("unknown section [{name}]")))?
                    .1;
                if sections.insert(name.to_string(), line).is_some() {
                    return Err(Error::config(
                        line,
                        format!("section [{name}] appears twice"),
                    ));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| {
                Error::config(line, format!("expected `key = value`, found `{content}`"))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !known.contains(&key) {
                let place = if section.is_empty() {
                    "at top level".to_string()
                } else {
                    format!("in [{section}]")
                };
                return Err(Error::config(line, format!("unknown key `{key}` {place}")));
            }
            if value.is_empty() {
                return Err(Error::config(line, format!("`{key}` has no value")));
            }
            let slot = (section.clone(), key.to_string());
            if entries.contains_key(&slot) {
                return Err(Error::config(line, format!("`{key}` is set twice")));
            }
            entries.insert(
                slot,
                Entry {
                    value: value.to_string(),
                    line,
                },
            );
        }
        Ok(Self { entries, sections })
    }

    fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    fn raw(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }

    fn get<T>(
        &self,
        section: &str,
        key: &str,
        convert: impl Fn(&str) -> std::result::Result<T, String>,
    ) -> Result<Option<(T, usize)>> {
        self.raw(section, key)
            .map(|e| {
                convert(&e.value)
                    .map(|v| (v, e.line))
                    .map_err(|m| Error::config(e.line, format!("`{key}`: {m}")))
            })
            .transpose()
    }

    fn value<T>(
        &self,
        section: &str,
        key: &str,
        convert: impl Fn(&str) -> std::result::Result<T, String>,
    ) -> Result<Option<T>> {
        Ok(self.get(section, key, convert)?.map(|(v, _)| v))
    }

    fn line_of(&self, section: &str, key: &str) -> usize {
        self.raw(section, key)
            .map(|e| e.line)
            .or_else(|| self.sections.get(section).copied())
            .unwrap_or(0)
    }
}

fn quantity(dim: Dim) -> impl Fn(&str) -> std::result::Result<f64, String> {
    move |s| parse_quantity(s, dim)
}

fn quantity_list(dim: Dim) -> impl Fn(&str) -> std::result::Result<Vec<f64>, String> {
    move |s| s.split(',').map(|item| parse_quantity(item, dim)).collect()
}

fn plain_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|item| {
            item.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{}` is not a number", item.trim()))
        })
        .collect()
}

fn number(s: &str) -> std::result::Result<f64, String> {
    s.parse().map_err(|_| format!("`{s}` is not a number"))
}

fn integer<T: FromStr>(s: &str) -> std::result::Result<T, String> {
    s.parse()
        .map_err(|_| format!("`{s}` is not a non-negative integer"))
}

fn word<T: FromStr<Err = E>, E: fmt::Display>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|e: E| e.to_string())
}

fn ensemble_mode(s: &str) -> std::result::Result<EnsembleMode, String> {
    match s {
        "convolution" => Ok(EnsembleMode::Convolution),
        "monte-carlo" => Ok(EnsembleMode::MonteCarlo),
        _ => Err(format!(
            "unknown ensemble mode `{s}` (expected convolution or monte-carlo)"
        )),
    }
}

fn frame(s: &str) -> std::result::Result<Frame, String> {
    match s {
        "rotating" => Ok(Frame::Rotating),
        "lab" => Ok(Frame::Lab),
        _ => Err(format!("unknown frame `{s}` (expected rotating or lab)")),
    }
}

fn execution(s: &str) -> std::result::Result<Execution, String> {
    match s {
        "parallel" => Ok(Execution::Parallel),
        "sequential" => Ok(Execution::Sequential),
        _ => Err(format!(
            "unknown execution `{s}` (expected parallel or sequential)"
        )),
    }
}

fn saturation(s: &str) -> std::result::Result<SaturationLevel, String> {
    if s == "fitted" {
        return Ok(SaturationLevel::Fitted);
    }
    let p = number(s).map_err(|_| format!("`{s}` is neither `fitted` nor a probability"))?;
    Ok(SaturationLevel::Fixed(p))
}

/// Attaches a line number to validation errors from the domain constructors.
fn at(line: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::InvalidParameter { name, reason } => {
            Error::config(line, format!("`{name}`: {reason}"))
        }
        other => other,
    }
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let doc = Document::parse(text)?;

    let experiment = doc
        .value("", "experiment", word::<Experiment, String>)?
        .ok_or_else(|| Error::config(0, "missing mandatory key `experiment`"))?;
    let output_format = doc
        .value("", "output_format", word::<OutputFormat, String>)?
        .unwrap_or_default();
    let output_path = doc.value("", "output_path", |s| Ok::<_, String>(PathBuf::from(s)))?;
    let seed = doc.value("", "seed", integer::<u64>)?.unwrap_or(0);

    let defaults = ElectronParams::default();
    let g_factor = doc
        .value("electron", "g_factor", number)?
        .unwrap_or(defaults.g_factor);
    let t2 = doc
        .value("electron", "t2", quantity(Dim::Time))?
        .unwrap_or(defaults.t2);
    let electron =
        ElectronParams::new(g_factor, t2).map_err(at(doc.line_of("electron", "g_factor")))?;

    let chirp = if doc.has_section("chirp") {
        let need = |key: &'static str, dim| {
            doc.value("chirp", key, quantity(dim))?.ok_or_else(|| {
                Error::config(
                    doc.line_of("chirp", key),
                    format!("[chirp] is missing `{key}`"),
                )
            })
        };
        let shape = doc
            .value("chirp", "shape", word::<ChirpShape, _>)?
            .unwrap_or(ChirpShape::Up);
        Some(
            ChirpSchedule::new(
                need("f_center", Dim::Frequency)?,
                need("fm_depth", Dim::Frequency)?,
                need("duration", Dim::Time)?,
                shape,
            )
            .map_err(at(doc.line_of("chirp", "f_center")))?,
        )
    } else {
        None
    };

    let to_hz = |value: RabiValue| match value {
        RabiValue::Frequency(f) => f,
        RabiValue::Field(b) => larmor_per_tesla(g_factor) * b,
    };
    let rabi_so = doc
        .value("drive", "rabi_so", parse_rabi)?
        .map(to_hz)
        .unwrap_or(0.0);
    let mut rabi_hf = [None; 3];
    for (slot, key) in rabi_hf.iter_mut().zip(RABI_HF_KEYS) {
        *slot = doc.value("drive", key, parse_rabi)?.map(to_hz);
    }
    let drive = DriveSettings { rabi_so, rabi_hf };

    let sweep = SweepSettings {
        b_start: doc.value("sweep", "b_start", quantity(Dim::Field))?,
        b_stop: doc.value("sweep", "b_stop", quantity(Dim::Field))?,
        b_step: doc
            .value("sweep", "b_step", quantity(Dim::Field))?
            .unwrap_or(0.25e-3),
        ensemble: doc
            .value("sweep", "ensemble", ensemble_mode)?
            .unwrap_or_default(),
        mc_samples: doc
            .value("sweep", "mc_samples", integer::<usize>)?
            .unwrap_or(20),
    };

    let nuclear_default = NuclearFieldModel::default();
    let nuclear = NuclearFieldModel::new(
        doc.value("nuclear", "sigma", quantity(Dim::Field))?
            .unwrap_or(nuclear_default.sigma),
        doc.value("nuclear", "correlation_time", quantity(Dim::Time))?
            .unwrap_or(nuclear_default.correlation_time),
    )
    .map_err(at(doc.line_of("nuclear", "sigma")))?;

    let measurement = if doc.has_section("measurement") {
        let d = MeasurementModel::default();
        Some(
            MeasurementModel::new(
                doc.value("measurement", "fidelity_up", number)?
                    .unwrap_or(d.fidelity_up),
                doc.value("measurement", "fidelity_down", number)?
                    .unwrap_or(d.fidelity_down),
                doc.value("measurement", "shots", integer::<u64>)?
                    .unwrap_or(d.shots),
            )
            .map_err(at(doc.line_of("measurement", "fidelity_up")))?,
        )
    } else {
        None
    };

    let integrator = IntegratorSettings {
        dt: doc.value("integrator", "dt", quantity(Dim::Time))?,
        frame: doc
            .value("integrator", "frame", frame)?
            .unwrap_or(Frame::Rotating),
        execution: doc
            .value("integrator", "execution", execution)?
            .unwrap_or_default(),
    };

    let duration = DurationSettings {
        field: doc.value("duration", "field", quantity(Dim::Field))?,
        durations: doc
            .value("duration", "durations", quantity_list(Dim::Time))?
            .unwrap_or_default(),
        saturation: doc
            .value("duration", "saturation", saturation)?
            .unwrap_or(SaturationLevel::Fitted),
    };
    let parity = ParitySettings {
        field: doc.value("parity", "field", quantity(Dim::Field))?,
        window_centers: doc
            .value("parity", "window_centers", quantity_list(Dim::Frequency))?
            .unwrap_or_default(),
        fm_depth: doc.value("parity", "fm_depth", quantity(Dim::Frequency))?,
    };
    let measurement_time = doc
        .value("fixedfreq", "measurement_time", quantity(Dim::Time))?
        .unwrap_or(1.0);
    let lz = LzSettings {
        ratios: doc
            .value("lz", "ratios", plain_list)?
            .unwrap_or_else(|| vec![0.1, 0.3, 1.0, 3.0, 10.0]),
        rabi: doc
            .value("lz", "rabi", quantity(Dim::Frequency))?
            .unwrap_or(1e6),
        window_factor: doc.value("lz", "window_factor", number)?.unwrap_or(40.0),
    };
    let rwa = RwaSettings {
        larmor: doc
            .value("rwa", "larmor", quantity_list(Dim::Frequency))?
            .unwrap_or_else(|| vec![200e6]),
    };

    let config = RunConfig {
        experiment,
        output_format,
        output_path,
        seed,
        electron,
        chirp,
        drive,
        sweep,
        nuclear,
        measurement,
        integrator,
        duration,
        parity,
        measurement_time,
        lz,
        rwa,
    };
    config.check(&doc)?;
    Ok(config)
}

impl RunConfig {
    /// Experiment-specific requirements, reported against the relevant line.
    fn check(&self, doc: &Document) -> Result<()> {
        let missing = |section: &str, key: &str| {
            Error::config(
                doc.line_of(section, key),
                format!(
                    "{} run needs `{key}` in [{section}]",
                    self.experiment.name()
                ),
            )
        };
        if self.experiment != Experiment::LzTable && self.chirp.is_none() {
            return Err(Error::config(
                0,
                format!("{} run needs a [chirp] section", self.experiment.name()),
            ));
        }
        if self.experiment == Experiment::Lineshape {
            for (value, key) in self.drive.rabi_hf.iter().zip(RABI_HF_KEYS) {
                if value.is_none() {
                    return Err(missing("drive", key));
                }
            }
        }
        if self.chirp.is_some() {
            self.program()
                .map_err(at(doc.line_of("drive", "rabi_so")))?;
        }
        match self.experiment {
            Experiment::Lineshape | Experiment::FixedFreq => {
                if self.sweep.b_start.is_none() {
                    return Err(missing("sweep", "b_start"));
                }
                if self.sweep.b_stop.is_none() {
                    return Err(missing("sweep", "b_stop"));
                }
                self.sweep_config()?
                    .validate()
                    .map_err(at(doc.line_of("sweep", "b_start")))?;
                if self.experiment == Experiment::FixedFreq {
                    if self.measurement.is_none() {
                        return Err(Error::config(
                            0,
                            "fixedfreq run needs a [measurement] section",
                        ));
                    }
                    if self.chirp.is_some_and(|c| c.fm_depth != 0.0) {
                        return Err(Error::config(
                            doc.line_of("chirp", "fm_depth"),
                            "fixedfreq run needs fm_depth = 0",
                        ));
                    }
                    if !(self.measurement_time > 0.0) {
                        return Err(Error::config(
                            doc.line_of("fixedfreq", "measurement_time"),
                            "`measurement_time` must be positive",
                        ));
                    }
                }
            }
            Experiment::Duration => {
                if self.duration.durations.is_empty() {
                    return Err(missing("duration", "durations"));
                }
                if self.duration.durations.iter().any(|d| !(*d > 0.0)) {
                    return Err(Error::config(
                        doc.line_of("duration", "durations"),
                        "`durations` must all be positive",
                    ));
                }
            }
            Experiment::Parity => {
                if self.parity.window_centers.is_empty() {
                    return Err(missing("parity", "window_centers"));
                }
            }
            Experiment::LzTable => {
                if self.lz.ratios.is_empty() || self.lz.ratios.iter().any(|r| !(*r > 0.0)) {
                    return Err(Error::config(
                        doc.line_of("lz", "ratios"),
                        "`ratios` must be positive",
                    ));
                }
                if !(self.lz.rabi > 0.0) {
                    return Err(Error::config(
                        doc.line_of("lz", "rabi"),
                        "`rabi` must be positive",
                    ));
                }
            }
            Experiment::ValidateRwa => {
                if self.rwa.larmor.is_empty() || self.rwa.larmor.iter().any(|f| !(*f > 0.0)) {
                    return Err(Error::config(
                        doc.line_of("rwa", "larmor"),
                        "`larmor` must be positive",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Drive program from `[chirp]` and `[drive]`; hyperfine tones that were
    /// not configured are off.
    pub fn program(&self) -> Result<DriveProgram> {
        let schedule = self
            .chirp
            .ok_or_else(|| Error::config(0, "no [chirp] section"))?;
        let species = Isotope::ALL
            .iter()
            .zip(self.drive.rabi_hf)
            .map(|(&iso, rabi)| NuclearSpecies::gaas(iso, rabi.unwrap_or(0.0)))
            .collect::<Result<Vec<_>>>()?;
        DriveProgram::new(schedule, self.drive.rabi_so, species)
    }

    pub fn propagation(&self) -> PropagationConfig {
        PropagationConfig {
            dt: self.integrator.dt,
            frame: self.integrator.frame,
            ..PropagationConfig::default()
        }
    }

    pub fn sweep_config(&self) -> Result<SweepConfig> {
        let program = self.program()?;
        Ok(SweepConfig {
            b_start: self.sweep.b_start.unwrap_or(0.0),
            b_stop: self.sweep.b_stop.unwrap_or(0.0),
            b_step: self.sweep.b_step,
            program,
            electron: self.electron,
            nuclear: self.nuclear,
            measurement: self.measurement,
            ensemble: self.sweep.ensemble,
            mc_samples: self.sweep.mc_samples,
            seed: self.seed,
            propagation: self.propagation(),
            execution: self.integrator.execution,
        })
    }

    /// Field for single-field experiments: `configured`, else the spin-orbit
    /// resonance of the chirp centre.
    pub fn single_field(&self, configured: Option<f64>) -> Result<f64> {
        if let Some(b) = configured {
            return Ok(b);
        }
        let chirp = self
            .chirp
            .ok_or_else(|| Error::config(0, "no [chirp] section"))?;
        Ok(resonance_fields(chirp.f_center, self.electron.g_factor, &[])?.spin_orbit)
    }

    /// Canonical text with every value in SI units. Parses back to an equal
    /// configuration.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let kv = |out: &mut String, key: &str, value: String| {
            let _ = writeln!(out, "{key} = {value}");
        };
        let q = |v: f64, unit: &str| {
            if v.is_infinite() {
                "inf".to_string()
            } else {
                format!("{v:e} {unit}")
            }
        };
        let list = |vs: &[f64], unit: &str| {
            vs.iter()
                .map(|&v| q(v, unit))
                .collect::<Vec<_>>()
                .join(", ")
        };

        kv(&mut out, "experiment", self.experiment.name().to_string());
        kv(&mut out, "output_format", self.output_format.to_string());
        if let Some(p) = &self.output_path {
            kv(&mut out, "output_path", p.display().to_string());
        }
        kv(&mut out, "seed", self.seed.to_string());

        out.push_str("\n[electron]\n");
        kv(
            &mut out,
            "g_factor",
            format!("{:e}", self.electron.g_factor),
        );
        kv(&mut out, "t2", q(self.electron.t2, "s"));

        if let Some(c) = &self.chirp {
            out.push_str("\n[chirp]\n");
            kv(&mut out, "f_center", q(c.f_center, "Hz"));
            kv(&mut out, "fm_depth", q(c.fm_depth, "Hz"));
            kv(&mut out, "duration", q(c.duration, "s"));
            kv(&mut out, "shape", c.shape.to_string());
        }

        out.push_str("\n[drive]\n");
        kv(&mut out, "rabi_so", q(self.drive.rabi_so, "Hz"));
        for (value, key) in self.drive.rabi_hf.iter().zip(RABI_HF_KEYS) {
            if let Some(v) = value {
                kv(&mut out, key, q(*v, "Hz"));
            }
        }

        out.push_str("\n[sweep]\n");
        if let Some(b) = self.sweep.b_start {
            kv(&mut out, "b_start", q(b, "T"));
        }
        if let Some(b) = self.sweep.b_stop {
            kv(&mut out, "b_stop", q(b, "T"));
        }
        kv(&mut out, "b_step", q(self.sweep.b_step, "T"));
        kv(
            &mut out,
            "ensemble",
            match self.sweep.ensemble {
                EnsembleMode::Convolution => "convolution",
                EnsembleMode::MonteCarlo => "monte-carlo",
            }
            .to_string(),
        );
        kv(&mut out, "mc_samples", self.sweep.mc_samples.to_string());

        out.push_str("\n[nuclear]\n");
        kv(&mut out, "sigma", q(self.nuclear.sigma, "T"));
        kv(
            &mut out,
            "correlation_time",
            q(self.nuclear.correlation_time, "s"),
        );

        if let Some(m) = &self.measurement {
            out.push_str("\n[measurement]\n");
            kv(&mut out, "fidelity_up", format!("{:e}", m.fidelity_up));
            kv(&mut out, "fidelity_down", format!("{:e}", m.fidelity_down));
            kv(&mut out, "shots", m.shots.to_string());
        }

        out.push_str("\n[integrator]\n");
        if let Some(dt) = self.integrator.dt {
            kv(&mut out, "dt", q(dt, "s"));
        }
        kv(
            &mut out,
            "frame",
            match self.integrator.frame {
                Frame::Rotating => "rotating",
                Frame::Lab => "lab",
            }
            .to_string(),
        );
        kv(
            &mut out,
            "execution",
            match self.integrator.execution {
                Execution::Parallel => "parallel",
                Execution::Sequential => "sequential",
            }
            .to_string(),
        );

        out.push_str("\n[duration]\n");
        if let Some(b) = self.duration.field {
            kv(&mut out, "field", q(b, "T"));
        }
        if !self.duration.durations.is_empty() {
            kv(&mut out, "durations", list(&self.duration.durations, "s"));
        }
        kv(
            &mut out,
            "saturation",
            match self.duration.saturation {
                SaturationLevel::Fitted => "fitted".to_string(),
                SaturationLevel::Fixed(p) => format!("{p:e}"),
            },
        );

        out.push_str("\n[parity]\n");
        if let Some(b) = self.parity.field {
            kv(&mut out, "field", q(b, "T"));
        }
        if !self.parity.window_centers.is_empty() {
            kv(
                &mut out,
                "window_centers",
                list(&self.parity.window_centers, "Hz"),
            );
        }
        if let Some(f) = self.parity.fm_depth {
            kv(&mut out, "fm_depth", q(f, "Hz"));
        }

        out.push_str("\n[fixedfreq]\n");
        kv(&mut out, "measurement_time", q(self.measurement_time, "s"));

        out.push_str("\n[lz]\n");
        kv(
            &mut out,
            "ratios",
            self.lz
                .ratios
                .iter()
                .map(|r| format!("{r:e}"))
                .collect::<Vec<_>>()
                .join(", "),
        );
        kv(&mut out, "rabi", q(self.lz.rabi, "Hz"));
        kv(
            &mut out,
            "window_factor",
            format!("{:e}", self.lz.window_factor),
        );

        out.push_str("\n[rwa]\n");
        kv(&mut out, "larmor", list(&self.rwa.larmor, "Hz"));
        out
    }
}
