use anesthesia_core::patient::{
    pk_derivatives, step_rk4, PatientState, PkParams, PkPreset, VirtualPatient,
};
use anesthesia_core::sim::{run_open_loop, InfusionProfile};

fn patient13() -> VirtualPatient<f64> {
    VirtualPatient::builtin(13, PkPreset::SchniderCorrected).unwrap()
}

fn euler(pk: &PkParams<f64>, x0: PatientState<f64>, u: f64, n: usize, t_end: f64) -> [f64; 4] {
    let h = t_end / n as f64;
    let mut x = x0.components();
    for _ in 0..n {
        let s = PatientState { c1: x[0], c2: x[1], c3: x[2], ce: x[3] };
        let d = pk_derivatives(&s, u, pk).components();
        for i in 0..4 {
            x[i] += h * d[i];
        }
    }
    x
}

#[test]
fn rk4_matches_fine_euler_over_one_minute() {
    let pk = patient13().pk;
    let x0 = PatientState { c1: 2.0, c2: 1.0, c3: 0.5, ce: 1.5 };
    for u in [0.0, 13.0, 100.0, 200.0] {
        let mut s = x0;
        for _ in 0..60 {
            s = step_rk4(&s, u, &pk, 1.0 / 60.0).unwrap();
        }
        let coarse = euler(&pk, x0, u, 60_000, 1.0);
        let fine = euler(&pk, x0, u, 120_000, 1.0);
        for (i, got) in s.components().iter().enumerate() {
            let oracle = 2.0 * fine[i] - coarse[i];
            assert!((got - oracle).abs() < 1e-6, "u={u} comp={i} rk4={got} euler={oracle}");
        }
    }
}

#[test]
fn single_compartment_reduction_is_exponential() {
    // With cl2 = cl3 = 0 the central compartment decouples:
    // c1(t) = u/cl1 + (c1(0) - u/cl1) e^(-k10 t).
    let pk = PkParams::from_clearances(4.27, 20.0, 238.0, 1.9, 0.0, 0.0, 0.456).unwrap();
    let k10 = 1.9 / 4.27;
    let h = 1.0 / 60.0;
    for (c0, u) in [(0.0, 50.0), (5.0, 0.0), (3.0, 13.15)] {
        let mut s = PatientState { c1: c0, ..PatientState::zero() };
        for k in 1..=600 {
            s = step_rk4(&s, u, &pk, h).unwrap();
            let t = k as f64 * h;
            let exact = u / 1.9 + (c0 - u / 1.9) * (-k10 * t).exp();
            assert!((s.c1 - exact).abs() < 1e-8, "t={t} got={} exact={exact}", s.c1);
            assert_eq!(s.c2, 0.0);
            assert_eq!(s.c3, 0.0);
        }
    }
}

#[test]
fn open_loop_settles_to_clearance_equilibrium() {
    // Slowest mode of the corrected patient-13 model is ~0.0024 /min, so the
    // approach to U/cl1 takes thousands of minutes.
    let p = patient13();
    let u = 10.0;
    let h = 1.0 / 6.0;
    let traj = run_open_loop(&p, &InfusionProfile::constant(u), 4000.0, h).unwrap();
    let last = traj.last().unwrap();
    let target = u / p.pk.cl1;
    let pk = &p.pk;
    let expected = [
        (last.c1, target),
        (last.c2, target * pk.k12 / pk.k21),
        (last.c3, target * pk.k13 / pk.k31),
        (last.ce_true, target),
    ];
    for (c, want) in expected {
        assert!((c - want).abs() / want < 1e-3, "c={c} want={want}");
    }
    let at300 = traj.at_time(300.0).unwrap();
    assert!(at300.c1 < 0.9 * target);
}

#[test]
fn equilibrium_state_is_stationary_under_rk4() {
    let p = patient13();
    let eq = PatientState::equilibrium(&p.pk, 13.0);
    let mut s = eq;
    for _ in 0..600 {
        s = step_rk4(&s, 13.0, &p.pk, 1.0 / 60.0).unwrap();
    }
    for (a, b) in s.components().iter().zip(eq.components()) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn rk4_error_shrinks_at_fourth_order() {
    let pk = patient13().pk;
    let x0 = PatientState { c1: 4.0, ..PatientState::zero() };
    let run = |n: usize| {
        let mut s = x0;
        for _ in 0..n {
            s = step_rk4(&s, 50.0, &pk, 2.0 / n as f64).unwrap();
        }
        s.c1
    };
    let reference = run(16_000);
    let e1 = (run(20) - reference).abs();
    let e2 = (run(40) - reference).abs();
    let ratio = e1 / e2;
    assert!((12.0..20.0).contains(&ratio), "ratio={ratio}");
}

#[test]
fn corrected_preset_is_deterministic_across_cohort() {
    for id in 1..=13 {
        let a = VirtualPatient::<f64>::builtin(id, PkPreset::SchniderCorrected).unwrap();
        let b = VirtualPatient::<f64>::builtin(id, PkPreset::SchniderCorrected).unwrap();
        assert_eq!(a, b);
        assert!(a.pk.k10 > 0.0 && a.pk.k12 > 0.0 && a.pk.k21 > 0.0);
    }
}
