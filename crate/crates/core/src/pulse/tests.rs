use super::*;
use crate::corpus;
use crate::linalg::{pauli, Projector};
use crate::scenario::{OperatorDoc, ScenarioDocument, ScheduleDoc, StateDoc};
use proptest::prelude::*;
use std::f64::consts::PI;

fn herm(expr: &str) -> HermitianOperator {
    crate::scenario::pauli_string(expr, None).unwrap()
}

fn unitary(m: ComplexMatrix) -> UnitaryOperator {
    UnitaryOperator::new(m).unwrap()
}

fn cz() -> UnitaryOperator {
    unitary(herm(corpus::CZ).matrix().clone())
}

#[test]
fn pulse_sequence_examples() {
    let z = unitary(pauli::z());
    let zero = GeneratorSchedule::zero(2);
    for u in pulse_sequence(&z, &zero, 1.0, 5).unwrap() {
        assert!(u.matrix().max_abs_diff(&pauli::z()) < 1e-15);
    }
    let k = GeneratorSchedule::constant(herm("0.7*Y"));
    for u in pulse_sequence(&UnitaryOperator::identity(2), &k, 1.0, 5).unwrap() {
        assert!(u.matrix().max_abs_diff(&ComplexMatrix::identity(2)) < 1e-14);
    }
    let (omega, tau, n) = (0.7, 2.0, 9u64);
    let dt = tau / n as f64;
    let pulses = pulse_sequence(&z, &k, tau, n).unwrap();
    for (i, u) in pulses.iter().enumerate() {
        let l = (i + 1) as f64;
        let r = expi_hermitian(&herm("Y"), omega * l * dt).unwrap();
        assert!(u.matrix().max_abs_diff(&r.conjugate(&pauli::z())) < 1e-13);
        assert!(u.unitarity_defect() < 1e-9);
    }
}

#[test]
fn apply_examples() {
    let h = herm("0.3*XZ + 0.5*ZI");
    let psi0 = StateVector::basis(4, 1);
    let out = apply_pulse_sequence(&psi0, &UnitaryOperator::identity(2), &GeneratorSchedule::zero(2), &h, 1.7, 1).unwrap();
    let want = expi_hermitian(&h, -1.7).unwrap().matrix().apply(psi0.amplitudes());
    assert!(out.amplitudes().iter().zip(&want).all(|(a, b)| (a - b).norm() < 1e-14));

    let z = unitary(pauli::z());
    let k = GeneratorSchedule::constant(herm("pi/2*Y"));
    let one = apply_pulse_sequence(&StateVector::basis(2, 0), &z, &k, &HermitianOperator::zeros(2), 1.0, 1).unwrap();
    let u1 = &pulse_sequence(&z, &k, 1.0, 1).unwrap()[0];
    let want = u1.matrix().apply(StateVector::basis(2, 0).amplitudes());
    assert!(one.amplitudes().iter().zip(&want).all(|(a, b)| (a - b).norm() < 1e-14));
    let long = apply_pulse_sequence(&StateVector::basis(4, 2), &cz(), &GeneratorSchedule::constant(herm("0.4*XY")), &h, 1.0, 64).unwrap();
    assert!((long.norm() - 1.0).abs() < 1e-9);
}

#[test]
fn ktilde_examples() {
    let k = herm("0.8*Y + 0.2*X");
    let sched = GeneratorSchedule::constant(k.clone());
    let zero_h = HermitianOperator::zeros(2);
    for l in [0, 3, 7] {
        let kt = ktilde_step(l, &sched, &zero_h, 1.0, 8).unwrap();
        assert!(kt.matrix().max_abs_diff(k.matrix()) < 1e-12);
    }
    let ramp = GeneratorSchedule::polynomial(vec![herm("0.5*X"), herm("Y")]).unwrap();
    let kt0 = ktilde_step(0, &ramp, &zero_h, 1.0, 16).unwrap();
    assert!(kt0.matrix().max_abs_diff(herm("0.5*X").matrix()) < 1e-12);
    let h = herm("0.3*XX + 0.1*YZ");
    for l in [0, 5] {
        let kt = ktilde_step(l, &GeneratorSchedule::zero(2), &h, 2.0, 6).unwrap();
        assert!(kt.matrix().max_abs_diff(h.matrix()) < 1e-12);
    }
    assert!(matches!(ktilde_step(6, &sched, &zero_h, 1.0, 6), Err(PulseError::StepIndex { .. })));
}

#[test]
fn ktilde_reexponentiates() {
    let sched = GeneratorSchedule::polynomial(vec![herm("0.5*XI + 0.3*YZ"), herm("0.7*ZY")]).unwrap();
    let h = herm("0.2*XXI + 0.1*IZZ + 0.3*IIX");
    let (tau, n) = (1.3, 10u64);
    let dt = tau / n as f64;
    let mut frames = Frames::new(&sched, &h, tau, n).unwrap();
    while let Some(frame) = frames.next_frame().unwrap() {
        let l = frames.l - 1;
        let kt = ktilde_step(l, &sched, &h, tau, n).unwrap();
        assert!(expi_hermitian(&kt, -dt).unwrap().matrix().max_abs_diff(frame.w.matrix()) < 1e-9);
    }
}

#[test]
fn branch_ambiguity_reported() {
    // one step of exp(-i pi Z) has eigenphases exactly at +-pi
    let err = ktilde_step(0, &GeneratorSchedule::zero(2), &herm("pi*Z"), 1.0, 1).unwrap_err();
    assert!(matches!(err, PulseError::Branch { step: 0, .. }));
}

#[test]
fn zeno_operator_examples() {
    let z = unitary(pauli::z());
    let zero_h = HermitianOperator::zeros(2);
    let uz = zeno_limit_operator(&z, &GeneratorSchedule::constant(herm("0.9*Y")), &zero_h, 1.0, 7).unwrap();
    assert!(uz.matrix().max_abs_diff(&pauli::z()) < 1e-12);
    let uz = zeno_limit_operator(&cz(), &GeneratorSchedule::zero(4), &HermitianOperator::zeros(4), 1.0, 6).unwrap();
    assert!(uz.matrix().max_abs_diff(&ComplexMatrix::identity(4)) < 1e-12);

    // m = 1: pinching is the identity, so U_Z = U0^N times the plain product of exp(-i Kt dt)
    let phase = unitary(ComplexMatrix::identity(2).scale(Complex64::from_polar(1.0, 0.4)));
    let sched = GeneratorSchedule::polynomial(vec![herm("0.3*X"), herm("0.5*Y")]).unwrap();
    let h = herm("0.2*Z");
    let n = 12;
    let uz = zeno_limit_operator(&phase, &sched, &h, 1.0, n).unwrap();
    let mut prod = ComplexMatrix::identity(2);
    for l in 0..n {
        let kt = ktilde_step(l, &sched, &h, 1.0, n).unwrap();
        prod = expi_hermitian(&kt, -1.0 / n as f64).unwrap().matrix() * &prod;
    }
    let want = phase.pow(n).matrix() * &prod;
    assert!(uz.matrix().max_abs_diff(&want) < 1e-10);
}

#[test]
fn zeno_operator_is_block_diagonal() {
    let u0 = cz();
    let sched = GeneratorSchedule::polynomial(vec![herm("0.6*XY + 0.2*ZZ"), herm("0.4*YI")]).unwrap();
    let h = herm("0.1*XIY + 0.2*ZZX + 0.1*IXZ");
    let uz = zeno_limit_operator(&u0, &sched, &h, 1.0, 32).unwrap();
    let d = decompose_unitary(&u0, 1e-8).unwrap().embed_left(2).unwrap();
    for p in d.projectors() {
        assert!(uz.matrix().commutator(p.matrix()).max_abs() < 1e-8);
    }
}

#[test]
fn residual_examples() {
    let z = unitary(pauli::z());
    assert_eq!(theorem2_residual(&z, &GeneratorSchedule::zero(2), 1.0, 64).unwrap(), 0.0);
    let commuting = GeneratorSchedule::polynomial(vec![herm("0.3*Z"), herm("Z")]).unwrap();
    assert!(theorem2_residual(&z, &commuting, 1.5, 64).unwrap() < 1e-10);
    let h = GeneratorSchedule::polynomial(vec![herm("X"), herm("X")]).unwrap();
    let mut prev = theorem2_residual(&z, &h, 1.0, 1 << 6).unwrap();
    for k in 7..=12 {
        let r = theorem2_residual(&z, &h, 1.0, 1 << k).unwrap();
        let ratio = prev / r;
        assert!((1.8..=2.2).contains(&ratio), "N = 2^{k}: ratio {ratio}");
        prev = r;
    }
    let piecewise = GeneratorSchedule::piecewise_linear(vec![(0.0, herm("X")), (1.0, herm("Y"))]).unwrap();
    assert!(matches!(theorem2_residual(&z, &piecewise, 1.0, 8), Err(PulseError::NonAnalytic("piecewise_linear"))));
    assert!(matches!(theorem2_residual(&z, &h, 1.0, 1), Err(PulseError::Steps { .. })));
}

#[test]
fn residual_sigma_x_ramp_closed_form() {
    // pairs of steps telescope; the gap is a single rotation by the odd-step remainder
    let z = unitary(pauli::z());
    let h = GeneratorSchedule::polynomial(vec![herm("X"), herm("X")]).unwrap();
    for n in [64u64, 256, 1024] {
        let t = 1.0;
        let dt = t / n as f64;
        let mut angle = 0.0;
        for l in 0..n {
            let sign = if (n - 1 - l) % 2 == 0 { 1.0 } else { -1.0 };
            angle += sign * (1.0 + l as f64 * dt) * dt;
        }
        let want = 2.0 * (angle / 2.0).sin().abs();
        let got = theorem2_residual(&z, &h, t, n).unwrap();
        assert!((got - want).abs() < 1e-12, "{n}: {got} vs {want}");
    }
}

fn qubit_pulse() -> SteeringScenario {
    corpus::qubit_pulse(1.0).validate().unwrap()
}

#[test]
fn static_pulse_study() {
    let s = ScenarioDocument::pulse(1, 0, 1.0, ScheduleDoc::Constant { op: "0*Z".into() }, "Z".into(), 0)
        .validate()
        .unwrap();
    let study = run_pulse_study(&s, &[4, 16, 64]).unwrap();
    for r in &study.rows {
        assert_eq!(r.weight, 1.0);
        assert_eq!(r.residual_norm, 0.0);
    }
    assert!(study.weight_fit.is_none() && study.residual_fit.is_none());
}

#[test]
fn sigma_z_pulse_weight_alternates_with_parity() {
    // (Z e^{-i theta Y})^2 = I, so even N returns exactly to the target; what remains
    // is accumulated roundoff in the frames, growing roughly like N^2 eps
    let s = qubit_pulse();
    for n in [16u64, 64, 1024, 4096] {
        let r = pulse_run(&s, n).unwrap();
        assert!(r.one_minus_weight.abs() < 1e-8, "{n}: {r:?}");
        assert!(r.residual_norm < 1e-11);
    }
    for n in [15u64, 63, 1023] {
        let r = pulse_run(&s, n).unwrap();
        let want = (PI / (2.0 * n as f64)).sin().powi(2);
        assert!((r.one_minus_weight - want).abs() < 1e-9, "{n}: {r:?} vs {want}");
    }
}

#[test]
fn diagonal_drive_converges_at_inverse_n() {
    let s = ScenarioDocument::pulse(1, 0, 1.0, ScheduleDoc::Constant { op: "pi/2*Y + 0.5*Z".into() }, "Z".into(), 0)
        .validate()
        .unwrap();
    let ns: Vec<u64> = (4..=12).map(|k| 1 << k).collect();
    let study = run_pulse_study(&s, &ns).unwrap();
    let fit = study.residual_fit.unwrap();
    assert!((-1.2..=-0.8).contains(&fit.slope), "{fit:?}");
    assert!(!study.non_analytic);
}

#[test]
fn weak_noise_weight_improves() {
    let s = ScenarioDocument::pulse(1, 1, 1.0, ScheduleDoc::Constant { op: "pi/2*Y".into() }, "Z".into(), 0)
        .with_noise(Some("0.05*XX + 0.05*ZY".into()), None)
        .validate()
        .unwrap();
    let lo = pulse_run(&s, 1 << 6).unwrap().weight;
    let hi = pulse_run(&s, 1 << 12).unwrap().weight;
    assert!(hi >= lo, "{lo} -> {hi}");
}

#[test]
fn preconditions() {
    let mut doc = corpus::qubit_pulse(1.0);
    doc.initial.state = Some(StateDoc::Basis(1));
    assert!(doc.validate().is_err());
    let measure = corpus::qubit_pi_rotation(1.0).validate().unwrap();
    assert!(matches!(pulse_run(&measure, 4), Err(PulseError::NotPulseScenario)));
    assert!(matches!(run_pulse_study(&qubit_pulse(), &[8, 8]), Err(PulseError::StepList)));
}

#[test]
fn piecewise_schedule_flagged() {
    let s = ScenarioDocument::pulse(
        1,
        0,
        2.0,
        ScheduleDoc::PiecewiseLinear {
            knots: vec![
                crate::scenario::KnotDoc { t: 0.0, op: "0.2*Y".into() },
                crate::scenario::KnotDoc { t: 2.0, op: "0.9*Y + 0.3*Z".into() },
            ],
        },
        "Z".into(),
        0,
    )
    .validate()
    .unwrap();
    assert!(run_pulse_study(&s, &[8, 16, 32]).unwrap().non_analytic);
}

fn random_pulse_scenario() -> impl Strategy<Value = SteeringScenario> {
    (
        proptest::collection::vec(-1.0f64..1.0, 4),
        proptest::collection::vec(-0.3f64..0.3, 3),
        any::<bool>(),
        0.5f64..2.0,
    )
        .prop_map(|(k, h, use_cz, tau)| {
            if use_cz {
                let sched = ScheduleDoc::Polynomial {
                    coefficients: vec![
                        format!("{:e}*XY + {:e}*ZI", k[0], k[1]).as_str().into(),
                        format!("{:e}*YX + {:e}*IZ", k[2], k[3]).as_str().into(),
                    ],
                };
                let noise = format!("{:e}*XIX + {:e}*ZZY + {:e}*IYZ", h[0], h[1], h[2]);
                ScenarioDocument::pulse(2, 1, tau, sched, corpus::CZ.into(), 0)
                    .with_noise(Some(OperatorDoc::from(noise.as_str())), None)
            } else {
                let sched = ScheduleDoc::Constant {
                    op: format!("{:e}*X + {:e}*Y + {:e}*Z", k[0], k[1], k[2]).as_str().into(),
                };
                let noise = format!("{:e}*XX + {:e}*ZY + {:e}*IZ", h[0], h[1], h[2]);
                ScenarioDocument::pulse(1, 1, tau, sched, "Z".into(), 1)
                    .with_noise(Some(OperatorDoc::from(noise.as_str())), None)
            }
        })
        .prop_map(|mut doc| {
            if doc.sys_qubits == 1 {
                doc.initial.state = Some(StateDoc::Basis(2));
            }
            doc.validate().unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn factorization_and_bounds(s in random_pulse_scenario(), k in 2u32..=8) {
        let r = pulse_run(&s, 1 << k).unwrap();
        prop_assert!(r.factorization_defect <= 1e-8, "{:?}", r);
        prop_assert!(r.weight <= 1.0 + 1e-10 && r.weight >= 0.0);
        prop_assert!(r.residual_norm >= 0.0);
    }

    #[test]
    fn pinching_never_grows_the_generator(s in random_pulse_scenario(), l in 0u64..16) {
        let setup = s.pulse().unwrap();
        let d = setup.decomposition.embed_left(s.bath_dim()).unwrap();
        let kt = ktilde_step(l, s.schedule(), &s.noise().total(), s.tau(), 16).unwrap();
        let pinched = project_block_diagonal(&kt, &d).unwrap();
        prop_assert!(schatten_inf_norm(pinched.matrix()) <= schatten_inf_norm(kt.matrix()) + 1e-10);
    }
}

#[test]
fn target_projector_follows_frames() {
    let s = qubit_pulse();
    let p = Projector::from_ket(&StateVector::basis(2, 0));
    assert_eq!(s.initial_projector().matrix(), p.matrix());
}

