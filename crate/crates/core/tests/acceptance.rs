//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`). By default the process exits
//! successfully after reporting; set `ACCEPTANCE_STRICT=1` to exit non-zero
//! when any criterion fails.

use std::path::PathBuf;
use std::time::Instant;

use edsr::analytic::{
    double_passage_probability, extract_rabi_from_duration_sweep, landau_zener_flip_probability,
};
use edsr::config::{parse_config, RunConfig};
use edsr::drive::{
    fm_depth_to_field_span, resonance_fields, ChirpSchedule, ChirpShape, DriveProgram, Isotope,
    NuclearSpecies,
};
use edsr::ensemble::{apply_measurement_fidelity, convolve_gaussian, MeasurementModel, SeedStream};
use edsr::integrator::{propagate, PropagationConfig};
use edsr::spin::{
    apply_phase_damping, larmor_per_tesla, larmor_to_field, DensityMatrix, ElectronParams,
};
use edsr::sweep::{
    self, duration_sweep, field_sweep_lineshape, fixed_frequency_sweep, metrics, parity_scan,
    EnsembleMode, Execution, LineshapePoint, SweepConfig,
};
use num_complex::Complex64;
use rand::Rng;

const G: f64 = -0.339;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn preset(name: &str) -> RunConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_config(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn single_tone(
    f_center: f64,
    fm_depth: f64,
    duration: f64,
    shape: ChirpShape,
    rabi: f64,
) -> DriveProgram {
    let schedule = ChirpSchedule::new(f_center, fm_depth, duration, shape).unwrap();
    DriveProgram::new(schedule, rabi, vec![]).unwrap()
}

fn p_down(program: &DriveProgram, b: f64, t2: f64) -> f64 {
    let electron = ElectronParams::new(G, t2).unwrap();
    sweep::spin_down_after_burst(program, b, &electron, &PropagationConfig::default()).unwrap()
}

fn pi_pulse() -> Outcome {
    let rabi = 1e6;
    let f = 26.5e9;
    let program = single_tone(f, 0.0, 0.5 / rabi, ChirpShape::Up, rabi);
    let p = p_down(&program, larmor_to_field(f, G), f64::INFINITY);
    let err = (p - 1.0).abs();
    outcome(
        err <= 1e-6,
        format!("P_down = {p:.12}, |P - 1| = {err:.2e} (tol 1e-6)"),
    )
}

fn landau_zener() -> Outcome {
    let electron = ElectronParams::new(G, f64::INFINITY).unwrap();
    let rows = sweep::landau_zener_table(
        1e6,
        &[0.1, 0.3, 1.0, 3.0, 10.0],
        40.0,
        &electron,
        &PropagationConfig::default(),
        Execution::Parallel,
    )
    .unwrap();
    let worst = rows
        .iter()
        .map(|r| (r.p_numeric - r.p_analytic).abs())
        .fold(0.0, f64::max);
    let cells: Vec<String> = rows
        .iter()
        .map(|r| format!("{}:{:.4}/{:.4}", r.ratio, r.p_numeric, r.p_analytic))
        .collect();
    outcome(
        worst <= 0.01,
        format!(
            "max |numeric - LZ| = {worst:.2e} (tol 1e-2); ratio:numeric/LZ {}",
            cells.join(" ")
        ),
    )
}

fn rwa() -> Outcome {
    let cfg = preset("rwa-validate.cfg");
    let rows = sweep::rwa_comparison(
        &cfg.program().unwrap(),
        &cfg.rwa.larmor,
        &cfg.electron,
        cfg.integrator.dt,
        Execution::Parallel,
    )
    .unwrap();
    let center = *rows
        .iter()
        .find(|r| r.f_larmor == 200e6)
        .expect("200 MHz row");
    let others: Vec<String> = rows
        .iter()
        .filter(|r| r.f_larmor != 200e6)
        .map(|r| format!("{:.0} MHz: {:.2e}", r.f_larmor / 1e6, r.difference()))
        .collect();
    outcome(
        center.difference() <= 1e-3,
        format!(
            "f_L = 200 MHz: P_rot = {:.6}, P_lab = {:.6}, |diff| = {:.2e} (tol 1e-3); detuned rows {}",
            center.p_rotating,
            center.p_lab,
            center.difference(),
            others.join(", ")
        ),
    )
}

#[derive(Clone, Copy, Debug)]
struct ShapeMetrics {
    so_mean: f64,
    hf_mean: f64,
    support: f64,
    flank: f64,
}

fn lineshape_metrics(cfg: &RunConfig, fm_depth: f64, duration: f64, t2: f64) -> ShapeMetrics {
    let mut sc = cfg.sweep_config().unwrap();
    let schedule = ChirpSchedule::new(
        sc.program.schedule.f_center,
        fm_depth,
        duration,
        ChirpShape::Up,
    )
    .unwrap();
    sc.program = sc.program.with_schedule(schedule);
    sc.electron = ElectronParams::new(G, t2).unwrap();
    let pts = field_sweep_lineshape(&sc).unwrap();

    let rf = resonance_fields(schedule.f_center, G, &sc.program.species).unwrap();
    let half_span = 0.5 * fm_depth_to_field_span(fm_depth, G);
    let b_so = rf.spin_orbit;
    let b_as = rf.get(Isotope::As75).unwrap();
    let b_ga71 = rf.get(Isotope::Ga71).unwrap();

    let so_mean = metrics::window_mean(&pts, b_so - half_span, b_so + half_span).unwrap();
    let hf_mean = metrics::window_mean(&pts, b_as - half_span, b_ga71 + half_span).unwrap();
    let peak = pts.iter().map(|p| p.p_down_true).fold(0.0, f64::max);
    let (lo, hi) = metrics::support_edges(&pts, 0.5 * peak).unwrap();
    let plateau = nearest(&pts, b_so).p_down_true;
    let flank = metrics::rising_flank_width(&pts, plateau, 0.1, 0.9, b_so).unwrap();
    ShapeMetrics {
        so_mean,
        hf_mean,
        support: hi - lo,
        flank,
    }
}

fn nearest(points: &[LineshapePoint], b: f64) -> LineshapePoint {
    *points
        .iter()
        .min_by(|x, y| (x.b - b).abs().total_cmp(&(y.b - b).abs()))
        .unwrap()
}

struct WeakDrive {
    narrow: ShapeMetrics,
    wide: ShapeMetrics,
    checks: [bool; 3],
    detail: String,
}

fn weak_drive_at(t2: f64) -> WeakDrive {
    let cfg = preset("lineshape.cfg");
    let narrow = lineshape_metrics(&cfg, 40e6, 500e-6, t2);
    let wide = lineshape_metrics(&cfg, 75e6, 937e-6, t2);
    let extra_span = fm_depth_to_field_span(75e6, G) - fm_depth_to_field_span(40e6, G);
    let asym = [narrow.so_mean - narrow.hf_mean, wide.so_mean - wide.hf_mean];
    let broadening = wide.support - narrow.support;
    let flank_ratio = wide.flank / narrow.flank;
    let checks = [
        asym.iter().all(|&a| a >= 0.1),
        (broadening - extra_span).abs() <= 1e-3,
        (flank_ratio - 1.0).abs() <= 0.2,
    ];
    let detail = format!(
        "T2 = {:.0} us: SO - HF window mean = {:.3} (40 MHz), {:.3} (75 MHz) [>= 0.1]; support {:.2} -> {:.2} mT, \
         broadening {:.2} mT vs FM span difference {:.2} mT [+-1 mT]; 10-90% flank {:.3} / {:.3} mT, ratio {:.3} [+-20%]",
        t2 * 1e6,
        asym[0],
        asym[1],
        narrow.support * 1e3,
        wide.support * 1e3,
        broadening * 1e3,
        extra_span * 1e3,
        narrow.flank * 1e3,
        wide.flank * 1e3,
        flank_ratio
    );
    WeakDrive {
        narrow,
        wide,
        checks,
        detail,
    }
}

fn weak_drive_lineshape(base: &WeakDrive) -> Outcome {
    let labels = ["asymmetry", "broadening", "flanks"];
    let failed: Vec<&str> = labels
        .iter()
        .zip(base.checks)
        .filter(|(_, ok)| !ok)
        .map(|(l, _)| *l)
        .collect();
    let mut detail = base.detail.clone();
    if !failed.is_empty() {
        detail += &format!("; failing: {}", failed.join(", "));
    }
    outcome(failed.is_empty(), detail)
}

fn t2_insensitivity(base: &WeakDrive) -> Outcome {
    let mut pass = base.checks.iter().all(|&c| c);
    let mut parts = vec![format!(
        "100 us: support {:.2}/{:.2} mT, flank {:.3}/{:.3} mT",
        base.narrow.support * 1e3,
        base.wide.support * 1e3,
        base.narrow.flank * 1e3,
        base.wide.flank * 1e3
    )];
    for t2 in [250e-6, 500e-6] {
        let run = weak_drive_at(t2);
        let same_support = [(run.narrow, base.narrow), (run.wide, base.wide)]
            .iter()
            .all(|(a, b)| (a.support - b.support).abs() <= 1e-3);
        let same_flank = [(run.narrow, base.narrow), (run.wide, base.wide)]
            .iter()
            .all(|(a, b)| (a.flank / b.flank - 1.0).abs() <= 0.2);
        let ok = run.checks.iter().all(|&c| c) && same_support && same_flank;
        pass &= ok;
        parts.push(format!(
            "{:.0} us: checks {:?}, support {:.2}/{:.2} mT, flank {:.3}/{:.3} mT, asymmetry {:.3}/{:.3}",
            t2 * 1e6,
            run.checks,
            run.narrow.support * 1e3,
            run.wide.support * 1e3,
            run.narrow.flank * 1e3,
            run.wide.flank * 1e3,
            run.narrow.so_mean - run.narrow.hf_mean,
            run.wide.so_mean - run.wide.hf_mean
        ));
    }
    outcome(
        pass,
        format!(
            "{} [support +-1 mT, flank +-20% vs 100 us]",
            parts.join("; ")
        ),
    )
}

fn parity_summary(cfg: &RunConfig, t2: f64) -> (f64, f64, Vec<String>, Vec<usize>) {
    let mut sc = cfg.sweep_config().unwrap();
    sc.electron = ElectronParams::new(G, t2).unwrap();
    let b = cfg.single_field(cfg.parity.field).unwrap();
    let fm = cfg.parity.fm_depth.unwrap();
    let pts = parity_scan(&sc, b, &cfg.parity.window_centers, fm).unwrap();
    let odd_min = pts
        .iter()
        .filter(|p| p.resonances_covered % 2 == 1)
        .map(|p| p.p_down)
        .fold(f64::INFINITY, f64::min);
    let even_max = pts
        .iter()
        .filter(|p| p.resonances_covered % 2 == 0)
        .map(|p| p.p_down)
        .fold(0.0, f64::max);
    let cells = pts
        .iter()
        .map(|p| format!("{}:{:.3}", p.resonances_covered, p.p_down))
        .collect();
    let counts = pts.iter().map(|p| p.resonances_covered).collect();
    (odd_min, even_max, cells, counts)
}

fn parity() -> Outcome {
    let cfg = preset("parity.cfg");
    let t2 = cfg.electron.t2;
    let (odd_min, even_max, cells, counts) = parity_summary(&cfg, t2);
    let covers_all = [0, 1, 2, 3].iter().all(|c| counts.contains(c));
    let pass = covers_all && odd_min >= 0.9 && even_max <= 0.1;
    let (odd_inf, even_inf, _, _) = parity_summary(&cfg, f64::INFINITY);
    outcome(
        pass,
        format!(
            "T2 = {:.0} us: min odd P = {odd_min:.3} [>= 0.9], max even P = {even_max:.3} [<= 0.1]; count:P {}; \
             same windows without dephasing: min odd {odd_inf:.3}, max even {even_inf:.3}",
            t2 * 1e6,
            cells.join(" ")
        ),
    )
}

fn duration_round_trip() -> Outcome {
    let cfg = preset("duration.cfg");
    let sc = cfg.sweep_config().unwrap();
    let b = cfg.single_field(cfg.duration.field).unwrap();
    let samples = duration_sweep(&sc, b, &cfg.duration.durations).unwrap();
    let points: Vec<_> = samples.iter().map(|s| s.fit_point(false)).collect();
    let fit = extract_rabi_from_duration_sweep(
        &points,
        sc.program.schedule.fm_depth,
        cfg.duration.saturation,
    )
    .unwrap();
    let rel = (fit.rabi / cfg.drive.rabi_so - 1.0).abs();
    outcome(
        rel <= 0.1,
        format!(
            "fitted rabi = {:.4} MHz vs programmed {:.4} MHz, rel. error {:.3} (tol 0.10); tau0 = {:.1} us, p_max = {:.3}",
            fit.rabi / 1e6,
            cfg.drive.rabi_so / 1e6,
            rel,
            fit.tau0 * 1e6,
            fit.p_max
        ),
    )
}

fn unit_anchor() -> Outcome {
    let span = fm_depth_to_field_span(40e6, G);
    outcome(
        (span - 8.4e-3).abs() <= 0.1e-3,
        format!(
            "fm_depth_to_field_span(40 MHz, -0.339) = {:.4} mT (8.4 +- 0.1 mT)",
            span * 1e3
        ),
    )
}

/// Largest fidelity-mapped expected response above the zero-drive baseline.
fn peak_response(points: &[LineshapePoint], measurement: &MeasurementModel) -> f64 {
    let baseline = apply_measurement_fidelity(0.0, measurement);
    points
        .iter()
        .map(|p| apply_measurement_fidelity(p.p_down_true, measurement) - baseline)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn fixed_frequency_null() -> Outcome {
    let cfg = preset("fixedfreq-null.cfg");
    let measurement = cfg.measurement.unwrap();
    let baseline = apply_measurement_fidelity(0.0, &measurement);
    let floor = (baseline * (1.0 - baseline) / measurement.shots as f64).sqrt();

    let sc = cfg.sweep_config().unwrap();
    let drive_field = cfg.drive.rabi_so / larmor_per_tesla(G);
    let null = fixed_frequency_sweep(&sc, cfg.measurement_time).unwrap();
    let null_peak = peak_response(&null, &measurement);
    let null_sampled = null
        .iter()
        .map(|p| p.p_down_measured - baseline)
        .fold(f64::NEG_INFINITY, f64::max);

    // How typical the configured drift realization is.
    let seeds = 1..=40u64;
    let n_seeds = seeds.clone().count();
    let quiet = seeds
        .filter(|&seed| {
            let run = SweepConfig { seed, ..sc.clone() };
            peak_response(
                &fixed_frequency_sweep(&run, cfg.measurement_time).unwrap(),
                &measurement,
            ) <= 3.0 * floor
        })
        .count();

    // Control: drive amplitude ten times the nuclear-field spread.
    let mut control_cfg = sc.clone();
    control_cfg.program = DriveProgram::new(
        sc.program.schedule,
        larmor_per_tesla(G) * 10.0 * sc.nuclear.sigma,
        vec![],
    )
    .unwrap();
    let control = fixed_frequency_sweep(&control_cfg, cfg.measurement_time).unwrap();
    let control_peak = peak_response(&control, &measurement);

    let pass = null_peak <= 3.0 * floor && control_peak >= 10.0 * floor;
    outcome(
        pass,
        format!(
            "floor = {floor:.4}; drive {:.3} mT, seed {}: peak expected response {null_peak:.4} [<= {:.4}], \
             peak sampled response {null_sampled:.4}; below threshold for {quiet} of {n_seeds} drift seeds; \
             control drive {:.1} mT: peak {control_peak:.4} [>= {:.4}]",
            drive_field * 1e3,
            sc.seed,
            3.0 * floor,
            10.0 * sc.nuclear.sigma * 1e3,
            10.0 * floor
        ),
    )
}

fn double_passage() -> Outcome {
    let f = 10e9;
    let b = larmor_to_field(f, G);

    // Deeply adiabatic: both passages invert, returning the spin to up.
    let adiabatic = single_tone(f, 10e6, 100e-6, ChirpShape::Triangle, 1e6);
    let p_back = p_down(&adiabatic, b, f64::INFINITY);

    // Intermediate regime. The two crossings interfere coherently for a fixed
    // field; averaging over a field offset grid washes out the interference.
    let rabi = 0.2e6;
    let mut worst: f64 = 0.0;
    let mut cells = Vec::new();
    for ratio in [0.3, 0.7, 1.5] {
        let rate = std::f64::consts::PI.powi(2) * rabi * rabi / ratio;
        let width = rabi.max(rate.sqrt());
        let fm = 40.0 * width;
        // Triangle chirp: each leg sweeps fm in duration / 2.
        let program = single_tone(f, fm, 2.0 * fm / rate, ChirpShape::Triangle, rabi);
        let span = 0.2 * fm / larmor_per_tesla(G);
        let n = 200;
        let mean = (0..n)
            .map(|k| {
                let offset = -span + 2.0 * span * (k as f64 + 0.5) / n as f64;
                p_down(&program, b + offset, f64::INFINITY)
            })
            .sum::<f64>()
            / n as f64;
        let expect = double_passage_probability(landau_zener_flip_probability(rabi, rate).unwrap());
        worst = worst.max((mean - expect).abs());
        cells.push(format!("{ratio}:{mean:.4}/{expect:.4}"));
    }
    outcome(
        p_back <= 0.05 && worst <= 0.05,
        format!(
            "adiabatic round trip P_down = {p_back:.2e} [<= 0.05]; max |P - 2p(1-p)| = {worst:.4} [<= 0.05]; ratio:sim/model {}",
            cells.join(" ")
        ),
    )
}

fn invariant_suites() -> Outcome {
    let mut rng = SeedStream::new(2024, 0).rng();
    let mut failures = Vec::new();

    // State invariants after damping and propagation from random states.
    let program = {
        let s = ChirpSchedule::new(26.5e9, 40e6, 50e-6, ChirpShape::Triangle).unwrap();
        let species = Isotope::ALL
            .iter()
            .map(|&i| NuclearSpecies::gaas(i, 0.3e6).unwrap())
            .collect();
        DriveProgram::new(s, 0.5e6, species).unwrap()
    };
    let b0 = larmor_to_field(26.5e9, G);
    let electron = ElectronParams::new(G, 30e-6).unwrap();
    for _ in 0..20 {
        let (theta, phi, r): (f64, f64, f64) = (
            rng.random_range(0.0..std::f64::consts::PI),
            rng.random_range(0.0..std::f64::consts::TAU),
            rng.random_range(0.0..=1.0),
        );
        let rho = DensityMatrix::from_bloch(
            r * theta.sin() * phi.cos(),
            r * theta.sin() * phi.sin(),
            r * theta.cos(),
        )
        .unwrap();
        let damped = apply_phase_damping(&rho, rng.random_range(0.0..1e-4), 20e-6).unwrap();
        let b = b0 + rng.random_range(-5e-3..20e-3);
        let out = propagate(
            &damped,
            &program,
            b,
            &electron,
            &PropagationConfig::default(),
        )
        .unwrap();
        for state in [damped, out.state] {
            let e = state.elements();
            let herm = (e[0][1] - e[1][0].conj()).norm();
            let trace = (state.trace() - Complex64::new(1.0, 0.0)).norm();
            let [l0, l1] = state.eigenvalues();
            if herm > 1e-12 || trace > 1e-12 || l0.min(l1) < -1e-12 {
                failures.push(format!(
                    "state invariant (herm {herm:.1e}, trace {trace:.1e}, min eig {:.1e})",
                    l0.min(l1)
                ));
            }
        }
    }

    // Step-halving convergence on a four-tone burst.
    let b = resonance_fields(26.5e9, G, &program.species)
        .unwrap()
        .get(Isotope::As75)
        .unwrap();
    let coarse = propagate(
        &DensityMatrix::spin_up(),
        &program,
        b,
        &electron,
        &PropagationConfig::default(),
    )
    .unwrap();
    let fine = propagate(
        &DensityMatrix::spin_up(),
        &program,
        b,
        &electron,
        &PropagationConfig::default().with_dt(coarse.dt / 2.0),
    )
    .unwrap();
    let halving = (coarse.state.p_down() - fine.state.p_down()).abs();
    if halving >= 1e-4 {
        failures.push(format!("step halving changed P_down by {halving:.2e}"));
    }

    // Determinism and scheduling independence of a Monte-Carlo sweep.
    let mut sc = preset("lineshape.cfg").sweep_config().unwrap();
    let s = ChirpSchedule::new(26.5e9, 40e6, 40e-6, ChirpShape::Up).unwrap();
    sc.program = sc.program.with_schedule(s);
    sc.b_start = 5.580;
    sc.b_stop = 5.590;
    sc.b_step = 1e-3;
    sc.ensemble = EnsembleMode::MonteCarlo;
    sc.mc_samples = 4;
    sc.measurement = Some(edsr::ensemble::MeasurementModel::default());
    sc.seed = 99;
    sc.execution = Execution::Parallel;
    let first = field_sweep_lineshape(&sc).unwrap();
    let again = field_sweep_lineshape(&sc).unwrap();
    sc.execution = Execution::Sequential;
    let sequential = field_sweep_lineshape(&sc).unwrap();
    if first != again || first != sequential {
        failures.push("sweep output depends on run or schedule".to_string());
    }

    // Convolution: identity at sigma = 0, unit-area impulse, erf flanks.
    let step = 0.01e-3;
    let sigma = 0.5e-3;
    let boxcar: Vec<(f64, f64)> = (0..3001)
        .map(|i| {
            (
                5.5 + i as f64 * step,
                if (1000..2000).contains(&i) { 1.0 } else { 0.0 },
            )
        })
        .collect();
    if convolve_gaussian(&boxcar, 0.0).unwrap() != boxcar {
        failures.push("convolution with sigma = 0 is not the identity".to_string());
    }
    let impulse: Vec<(f64, f64)> = (0..3001)
        .map(|i| (5.5 + i as f64 * step, if i == 1500 { 1.0 } else { 0.0 }))
        .collect();
    let area: f64 = convolve_gaussian(&impulse, sigma)
        .unwrap()
        .iter()
        .map(|p| p.1)
        .sum();
    if (area - 1.0).abs() > 1e-9 {
        failures.push(format!("impulse response area {area}"));
    }
    let smooth = convolve_gaussian(&boxcar, sigma).unwrap();
    let cross = |level: f64| {
        let k = smooth[..1500].iter().position(|p| p.1 >= level).unwrap();
        let (a, c) = (smooth[k - 1], smooth[k]);
        a.0 + (level - a.1) / (c.1 - a.1) * (c.0 - a.0)
    };
    let width = cross(0.9) - cross(0.1);
    let erf_width = 2.0 * 1.281_551_565_5 * sigma;
    if (width / erf_width - 1.0).abs() > 0.01 {
        failures.push(format!("10-90% edge {width:e} vs erf {erf_width:e}"));
    }

    let detail = if failures.is_empty() {
        format!("state invariants on 40 random states, step halving dP = {halving:.1e} (< 1e-4), bit-identical sweeps, convolution identity/impulse/erf")
    } else {
        failures.join("; ")
    };
    outcome(failures.is_empty(), detail)
}

fn main() {
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    // Comma-separated criterion numbers, e.g. ACCEPTANCE_ONLY=3,9.
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let selected = |id: u32| only.as_ref().is_none_or(|ids| ids.contains(&id));

    let base = std::cell::OnceCell::new();
    let weak_drive = || base.get_or_init(|| weak_drive_at(100e-6));

    let criteria: [(u32, &str, &dyn Fn() -> Outcome); 11] = [
        (1, "rabi pi pulse", &pi_pulse),
        (2, "landau-zener oracle", &landau_zener),
        (3, "rwa validation", &rwa),
        (4, "weak-drive lineshape", &|| {
            weak_drive_lineshape(weak_drive())
        }),
        (5, "parity effect", &parity),
        (6, "duration sweep round trip", &duration_round_trip),
        (7, "unit anchor", &unit_anchor),
        (8, "t2 insensitivity", &|| t2_insensitivity(weak_drive())),
        (9, "fixed-frequency null", &fixed_frequency_null),
        (10, "triangle double passage", &double_passage),
        (11, "invariant suites", &invariant_suites),
    ];

    let (mut run, mut failed) = (0, 0);
    for (id, name, check) in criteria {
        if !selected(id) {
            continue;
        }
        let started = Instant::now();
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id:>2} {verdict} {name} ({:.1} s): {}",
            started.elapsed().as_secs_f64(),
            o.detail
        );
        run += 1;
        if !o.pass {
            failed += 1;
        }
    }

    println!("acceptance: {} of {run} criteria passed", run - failed);
    if strict && failed > 0 {
        std::process::exit(1);
    }
}
