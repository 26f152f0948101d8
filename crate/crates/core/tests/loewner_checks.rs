//! Slit maps, the capacity corollary, the coordinate-change law, and the
//! Euler-Maruyama flow: determinism, ordering, and capacity bookkeeping.

use sle_lab::config::Marked;
use sle_lab::coulomb::PsiKind;
use sle_lab::error::SleError;
use sle_lab::loewner::{
    check_capacity_corollary, coordinate_change_check, erase_slit, f_slit, g_slit, hcap_of_slit,
    run_simulation, slit_params, step_multiple_sle, zip_curve, ConformalMap, HullSpec,
    LoewnerState, SimulationConfig, SlitShape,
};
use sle_lab::operators::DriftField;
use sle_lab::params::KappaParams;
use sle_lab::pattern::LinkPattern;
use sle_lab::{cplx, Cplx};

#[test]
fn slit_capacity_table() {
    let unit = SlitShape::Vertical { height: 1.0 };
    assert!((hcap_of_slit(&unit) - 0.5).abs() < 1e-15);
    let spec = HullSpec { base: 4.2, shape: unit };
    assert!((spec.capacity() - 0.25).abs() < 1e-15);
    assert_eq!(hcap_of_slit(&SlitShape::Vertical { height: 0.0 }), 0.0);
    let tilted = SlitShape::Tilted { alpha: 0.3, scale: 1.4 };
    assert!((hcap_of_slit(&tilted) - 0.3 * 0.7 * 1.4 * 1.4 / 2.0).abs() < 1e-15);
}

#[test]
fn elementary_slit_map_round_trips() {
    let w = cplx(0.5, 0.8);
    let sp = slit_params(w).unwrap();
    for z in [cplx(0.3, 0.9), cplx(-1.2, 0.4), cplx(2.0, 2.0)] {
        let fw = f_slit(&sp, z);
        let back = g_slit(&sp, fw, z + cplx(0.05, 0.05)).unwrap();
        assert!((back - z).norm() < 1e-10, "round trip {z} -> {fw} -> {back}");
    }
}

#[test]
fn zipping_a_vertical_arc_recovers_its_capacity_exactly() {
    let x = 0.7;
    let h = 0.9;
    let pts: Vec<Cplx> = (1..=64).map(|k| cplx(x, h * k as f64 / 64.0)).collect();
    let zr = zip_curve(x, &pts).unwrap();
    assert!((zr.hcap - h * h / 2.0).abs() < 1e-12, "hcap {}", zr.hcap);
    assert!((zr.base - x).abs() < 1e-10, "base {}", zr.base);
}

#[test]
fn capacity_corollary_frozen_values() {
    let rep = check_capacity_corollary(0.0, 1.0, 1e-3, 1.0).unwrap();
    assert!((rep.predicted_ratio - 0.996).abs() < 1e-12);
    assert!((rep.measured_ratio - 0.9960316913).abs() < 1e-8, "{}", rep.measured_ratio);
    assert!((rep.defect - 3.1691e-5).abs() < 1e-8, "defect {}", rep.defect);
    assert!((rep.defect_half - 7.9612e-6).abs() < 5e-9, "defect half {}", rep.defect_half);
    assert!(
        rep.richardson > 3.2 && rep.richardson < 4.8,
        "Richardson ratio {} incompatible with a quadratic defect",
        rep.richardson
    );
}

#[test]
fn capacity_ratio_tends_to_one_with_the_hull_size() {
    let rep = check_capacity_corollary(0.0, 1.0, 1e-5, 1.0).unwrap();
    assert!(rep.measured_ratio < 1.0);
    assert!((rep.measured_ratio - 1.0).abs() < 5e-5);
}

#[test]
fn mapped_out_derivative_squares_to_the_capacity_factor() {
    // h_eps(z) = x + sqrt((z-x)^2 + 4 eps); the corollary rests on
    // h'(y)^2 = 1 - 4 eps/(x-y)^2 + O(eps^2).
    let (x, y) = (0.0, 1.0);
    for eps in [1e-3, 5e-4, 2.5e-4] {
        let d = 1e-6;
        let hp = (erase_slit(cplx(y + d, 0.0), x, eps) - erase_slit(cplx(y - d, 0.0), x, eps))
            .re
            / (2.0 * d);
        let defect = hp * hp - (1.0 - 4.0 * eps / (x - y) / (x - y));
        assert!(defect.abs() < 20.0 * eps * eps, "eps {eps}: defect {defect}");
    }
}

#[test]
fn coordinate_change_is_exact_for_the_identity_and_affine_maps() {
    let kp = KappaParams::new(6.0).unwrap();
    let ident = ConformalMap::Affine { a: 1.0, b: 0.0 };
    let rep = coordinate_change_check(&kp, &ident, 0.4, 1e-4, 64).unwrap();
    assert!(rep.drift_measured.abs() < 1e-9);
    assert!(rep.geometric_measured.abs() < 1e-9);
    assert!((rep.time_density_measured - 1.0).abs() < 1e-10);

    let aff = ConformalMap::Affine { a: 1.7, b: -0.3 };
    let rep = coordinate_change_check(&kp, &aff, 0.4, 1e-4, 64).unwrap();
    assert!(rep.drift_measured.abs() < 1e-9, "affine correction {}", rep.drift_measured);
    assert!((rep.time_density_measured - 1.7 * 1.7).abs() < 1e-9);
}

#[test]
fn coordinate_change_follows_the_pre_schwarzian_on_a_mobius_family() {
    let kp = KappaParams::new(4.0).unwrap();
    let mut last = f64::INFINITY;
    for radius in [25.0, 50.0, 100.0] {
        let map = ConformalMap::Mobius { radius };
        let rep = coordinate_change_check(&kp, &map, 0.0, 1e-4, 240).unwrap();
        assert!(rep.residual < 5e-4, "R {radius}: residual {}", rep.residual);
        assert!(rep.residual < last, "residual should shrink with R");
        assert!(
            (rep.time_density_measured / rep.time_density_predicted - 1.0).abs() < 1e-3,
            "time density {} vs {}",
            rep.time_density_measured,
            rep.time_density_predicted
        );
        last = rep.residual;
    }
    // Frozen midpoint of the family.
    let rep = coordinate_change_check(&kp, &ConformalMap::Mobius { radius: 50.0 }, 0.0, 1e-4, 240)
        .unwrap();
    assert!((rep.residual - 1.546e-4).abs() < 2e-6, "frozen residual {}", rep.residual);
    assert!((rep.drift_predicted + 0.04).abs() < 1e-12);
}

#[test]
fn coordinate_change_guards_its_domain() {
    let kp = KappaParams::new(4.0).unwrap();
    let map = ConformalMap::Mobius { radius: 1.0 };
    assert!(matches!(
        coordinate_change_check(&kp, &map, 0.9, 1e-4, 64),
        Err(SleError::BadConformalMap(_))
    ));
    let aff = ConformalMap::Affine { a: 1.0, b: 0.0 };
    assert!(matches!(
        coordinate_change_check(&kp, &aff, 0.0, 1e-4, 4),
        Err(SleError::InvalidParameter(_))
    ));
}

#[test]
fn noiseless_step_is_explicit_euler_for_the_passive_points() {
    let kp = KappaParams::new(1e-16).unwrap();
    let drift = DriftField::zero();
    let mut state = LoewnerState::new(vec![0.0, 1.0, 2.5], Marked::Finite(4.0), 3).unwrap();
    let dt = 1e-3;
    step_multiple_sle(&mut state, 0, dt, &kp, &drift).unwrap();
    assert_eq!(state.initial_driving(), &[0.0, 1.0, 2.5]);
    let w = 0.0;
    assert!((state.driving[0] - w).abs() < 1e-8, "active point barely moves");
    assert!((state.driving[1] - (1.0 + 2.0 * dt / (1.0 - w))).abs() < 1e-12);
    assert!((state.driving[2] - (2.5 + 2.0 * dt / (2.5 - w))).abs() < 1e-12);
    match state.marked {
        Marked::Finite(u) => assert!((u - (4.0 + 2.0 * dt / 4.0)).abs() < 1e-12),
        Marked::Infinity => panic!("marked point lost"),
    }
    assert_eq!(state.records().len(), 1);
    assert_eq!(state.halvings, 0);
}

fn short_config(seed: u64, with_drift: bool) -> SimulationConfig {
    SimulationConfig {
        kappa: 8.0 / 3.0,
        pattern: LinkPattern::from_arcs(2, &[(1, 2)]).unwrap(),
        x0: vec![0.0, 1.0],
        u0: None,
        t_end: 0.02,
        dt: 1e-3,
        seed,
        resolution: 5,
        with_drift,
    }
}

#[test]
fn simulation_is_bit_reproducible_under_a_fixed_seed() {
    let a = run_simulation(&short_config(42, false)).unwrap();
    let b = run_simulation(&short_config(42, false)).unwrap();
    assert_eq!(a.final_driving, b.final_driving);
    assert_eq!(a.steps, b.steps);
    assert_eq!(a.traces.len(), b.traces.len());
    for (ta, tb) in a.traces.iter().zip(&b.traces) {
        assert_eq!(ta, tb);
    }
    let c = run_simulation(&short_config(43, false)).unwrap();
    assert_ne!(a.final_driving, c.final_driving);
}

#[test]
fn flow_preserves_ordering_and_accounts_its_capacity() {
    let cfg = short_config(7, true);
    let out = run_simulation(&cfg).unwrap();
    assert!(out.final_driving.windows(2).all(|w| w[0] < w[1]));
    assert!((out.time - cfg.t_end).abs() < 1e-12);

    // Cross-check hcap additivity against the composed map at a far point.
    let state = {
        let mut st = LoewnerState::new(cfg.x0.clone(), Marked::Infinity, cfg.seed).unwrap();
        let drift = DriftField::zero();
        let kp = KappaParams::new(cfg.kappa).unwrap();
        for s in 0..20 {
            step_multiple_sle(&mut st, s % 2, cfg.dt, &kp, &drift).unwrap();
        }
        st
    };
    let total_t: f64 = state.records().iter().map(|r| r.dt).sum();
    let z0 = cplx(0.0, 1e4);
    let mut z = z0;
    for rec in state.records() {
        z = erase_slit(z, rec.center, rec.dt);
    }
    let measured_hcap = ((z - z0) * z0).re;
    assert!(
        (measured_hcap / (2.0 * total_t) - 1.0).abs() < 1e-3,
        "composed-map hcap {measured_hcap} vs 2t {}",
        2.0 * total_t
    );
}

#[test]
fn traces_grow_off_the_real_axis() {
    let cfg = short_config(5, false);
    let out = run_simulation(&cfg).unwrap();
    assert_eq!(out.traces.len(), 2);
    for trace in &out.traces {
        assert!(trace.len() >= 2, "root plus at least one tip");
        assert_eq!(trace[0].im, 0.0, "trace is anchored at its root");
        let first_tip = trace[1];
        let expected = 2.0 * cfg.dt.sqrt();
        assert!(
            (first_tip.im - expected).abs() < 0.25 * expected,
            "first tip height {} vs {expected}",
            first_tip.im
        );
        let last = trace.last().unwrap();
        assert!(last.im > first_tip.im, "trace should leave the axis");
        assert!(trace[1..].iter().all(|p| p.im > 0.0));
    }
}

#[test]
fn simulation_config_round_trips_and_rejects_unknown_keys() {
    let cfg = short_config(9, false);
    let text = serde_json::to_string(&cfg).unwrap();
    let back: SimulationConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back.seed, cfg.seed);
    assert_eq!(back.x0, cfg.x0);
    let with_unknown = text.replace("\"kappa\"", "\"extra\":1,\"kappa\"");
    assert!(serde_json::from_str::<SimulationConfig>(&with_unknown).is_err());
}

#[test]
fn drift_from_the_two_point_partition_matches_its_closed_form() {
    let kp = KappaParams::new(8.0 / 3.0).unwrap();
    let pat = LinkPattern::from_arcs(2, &[(1, 2)]).unwrap();
    let drift = DriftField::from_partition(PsiKind::Ground, pat, 1e-8, 1e-3);
    let b = drift.values(&kp, &[0.0, 1.0], Marked::Infinity).unwrap();
    let expected = kp.kappa * (1.0 - 6.0 / kp.kappa);
    assert!((b[0] + expected).abs() < 5e-4, "b0 {} vs {}", b[0], -expected);
    assert!((b[1] - expected).abs() < 5e-4, "b1 {} vs {}", b[1], expected);
}
