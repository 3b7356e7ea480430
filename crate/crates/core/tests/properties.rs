use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use proptest::prelude::*;

use edsr::analytic::{
    extract_rabi_from_duration_sweep, landau_zener_flip_probability, DurationSweepPoint,
    SaturationLevel,
};
use edsr::drive::{ChirpSchedule, ChirpShape, DriveProgram, Isotope, NuclearSpecies};
use edsr::ensemble::{apply_measurement_fidelity, MeasurementModel};
use edsr::integrator::{propagate, PropagationConfig};
use edsr::spin::{
    apply_phase_damping, bloch_vector, field_to_larmor, larmor_to_field, DensityMatrix,
    ElectronParams,
};

const G: f64 = -0.339;

fn bloch_ball() -> impl Strategy<Value = DensityMatrix> {
    (0.0..PI, 0.0..TAU, 0.0..=1.0f64).prop_map(|(theta, phi, r)| {
        DensityMatrix::from_bloch(
            r * theta.sin() * phi.cos(),
            r * theta.sin() * phi.sin(),
            r * theta.cos(),
        )
        .unwrap()
    })
}

fn assert_physical(rho: &DensityMatrix) -> Result<(), TestCaseError> {
    let e = rho.elements();
    prop_assert!((e[0][1] - e[1][0].conj()).norm() < 1e-12);
    prop_assert!((rho.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    let [a, b] = rho.eigenvalues();
    prop_assert!(a.min(b) > -1e-12);
    prop_assert!(rho.purity() <= 1.0 + 1e-12);
    Ok(())
}

fn four_tone(
    fm: f64,
    duration: f64,
    rabi_so: f64,
    rabi_hf: f64,
    shape: ChirpShape,
) -> DriveProgram {
    let s = ChirpSchedule::new(26.5e9, fm, duration, shape).unwrap();
    let species = Isotope::ALL
        .iter()
        .map(|&i| NuclearSpecies::gaas(i, rabi_hf).unwrap())
        .collect();
    DriveProgram::new(s, rabi_so, species).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn damping_keeps_states_physical(rho in bloch_ball(), dt in 0.0..1e-3f64, t2 in 1e-7..1e-3f64) {
        let out = apply_phase_damping(&rho, dt, t2).unwrap();
        assert_physical(&out)?;
        prop_assert!((out.p_down() - rho.p_down()).abs() < 1e-15);
    }

    #[test]
    fn damping_composes(rho in bloch_ball(), a in 0.0..1e-4f64, b in 0.0..1e-4f64, t2 in 1e-6..1e-3f64) {
        let two = apply_phase_damping(&apply_phase_damping(&rho, a, t2).unwrap(), b, t2).unwrap();
        let one = apply_phase_damping(&rho, a + b, t2).unwrap();
        for (x, y) in bloch_vector(&two).iter().zip(bloch_vector(&one)) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn larmor_is_linear_in_field(b1 in 0.0..10.0f64, b2 in 0.0..10.0f64, k in 0.0..5.0f64) {
        let f = |b| field_to_larmor(b, G);
        let sum = f(b1 + b2);
        prop_assert!((sum - f(b1) - f(b2)).abs() <= 1e-12 * sum.max(1.0));
        prop_assert!((f(k * b1) - k * f(b1)).abs() <= 1e-12 * f(k * b1).max(1.0));
        prop_assert!((larmor_to_field(f(b1), G) - b1).abs() <= 1e-12 * b1.max(1.0));
    }

    #[test]
    fn flip_probability_rises_with_drive_and_falls_with_rate(
        rabi in 1e3..1e7f64,
        rate in 1e9..1e14f64,
        boost in 1.0..3.0f64,
    ) {
        let p = landau_zener_flip_probability(rabi, rate).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!(landau_zener_flip_probability(rabi * boost, rate).unwrap() >= p);
        prop_assert!(landau_zener_flip_probability(rabi, rate * boost).unwrap() <= p);
    }

    #[test]
    fn measured_probability_is_affine_and_bounded(p in 0.0..=1.0f64, fu in 0.5..=1.0f64, fd in 0.5..=1.0f64) {
        let m = MeasurementModel::new(fu, fd, 100).unwrap();
        let q = apply_measurement_fidelity(p, &m);
        prop_assert!((0.0..=1.0).contains(&q));
        let ends = (apply_measurement_fidelity(0.0, &m), apply_measurement_fidelity(1.0, &m));
        prop_assert!((q - (ends.0 + p * (ends.1 - ends.0))).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn propagation_keeps_states_physical(
        rho in bloch_ball(),
        offset in -10e-3..25e-3f64,
        t2 in prop_oneof![Just(f64::INFINITY), 5e-6..200e-6f64],
        shape in prop_oneof![Just(ChirpShape::Up), Just(ChirpShape::Down), Just(ChirpShape::Triangle)],
    ) {
        let program = four_tone(40e6, 20e-6, 0.5e6, 0.3e6, shape);
        let b = larmor_to_field(26.5e9, G) + offset;
        let electron = ElectronParams::new(G, t2).unwrap();
        let out = propagate(&rho, &program, b, &electron, &PropagationConfig::default()).unwrap();
        assert_physical(&out.state)?;
        if t2.is_infinite() {
            prop_assert!((out.state.purity() - rho.purity()).abs() < 1e-9);
        }
    }

    #[test]
    fn rabi_extraction_recovers_the_drive(rabi in 0.05e6..1e6f64, fm in 20e6..100e6f64, n in 6usize..16) {
        // Choose durations that span the decay from one tenth to three time constants.
        let tau0 = fm / (PI * PI * rabi * rabi);
        let points: Vec<DurationSweepPoint> = (0..n)
            .map(|k| {
                let tau = tau0 * (0.1 + 2.9 * k as f64 / (n - 1) as f64);
                DurationSweepPoint {
                    burst_duration: tau,
                    p_down: landau_zener_flip_probability(rabi, fm / tau).unwrap(),
                }
            })
            .collect();
        for sat in [SaturationLevel::Fixed(1.0), SaturationLevel::Fitted] {
            let fit = extract_rabi_from_duration_sweep(&points, fm, sat).unwrap();
            prop_assert!((fit.rabi - rabi).abs() <= 1e-3 * rabi, "{} vs {}", fit.rabi, rabi);
        }
    }
}
