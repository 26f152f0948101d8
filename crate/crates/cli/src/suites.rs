//! Builders for the verification suites.  Every subcommand that gates
//! residuals goes through one of these, and `report` chains them into a
//! fixed battery, so tolerances live here as named defaults unless an
//! explicit flag overrides them.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sle_lab::config::{BoundaryConfig, Marked};
use sle_lab::coulomb::{PsiEvaluator, PsiKind};
use sle_lab::loewner::{
    check_capacity_corollary, coordinate_change_check, erase_slit, run_simulation, ConformalMap,
    LoewnerState, SimulationConfig,
};
use sle_lab::operators::{
    cm_conjugation_residual, commutator_residual_l, commutator_residual_m, nullvec_residuals,
    ward_residuals, DriftField, PsiCache, StencilSpec,
};
use sle_lab::params::{verify_charge_conventions, KappaParams};
use sle_lab::pattern::{count_report, enumerate_link_patterns, LinkPattern};
use sle_lab::report::SuiteSummary;
use sle_lab::{cplx, Cplx, Result, SleError};

/// Absolute quadrature tolerance handed to the screening integrals.
pub const QUAD_TOL: f64 = 1e-10;
/// Gate for the null-vector PDE rows.
pub const NULLVEC_TOL: f64 = 1e-4;
/// A smooth non-solution must leave residuals above this floor.
pub const CONTROL_FLOOR: f64 = 1e-2;
/// Gate for the three Ward identity rows.
pub const WARD_TOL: f64 = 1e-4;
/// A wrong conformal weight must inflate its row by at least this factor
/// over the gate.
pub const WRONG_WEIGHT_FACTOR: f64 = 100.0;
/// Gate for the Calogero-Moser conjugation residual.
pub const CM_TOL: f64 = 1e-5;
/// Gate for both commutator relations (rational form only).
pub const COMMUTATOR_TOL: f64 = 1e-3;
/// Richardson ratio of the capacity defect must sit in 4 +- this.
pub const RICHARDSON_HALF_WIDTH: f64 = 0.8;
/// Affine coordinate changes carry no correction term at all.
pub const AFFINE_TOL: f64 = 1e-9;
/// Drift-law residual for the Mobius family at the default radius.
pub const MOBIUS_TOL: f64 = 5e-4;
/// Seed used by every randomized component unless --seed overrides it.
pub const DEFAULT_SEED: u64 = 7;
/// Default stencil step (fraction of the local gap).  Wider than the
/// library default: near-resonant kappa suppresses the integral's
/// magnitude, and the relative rounding floor grows as 1/step^2 in the
/// second-derivative rows while the truncation term stays far below the
/// gates at this width.
pub const STEP_SCALE: f64 = 1e-2;

/// Numerical knobs shared by all suites.
#[derive(Debug, Clone, Copy)]
pub struct Knobs {
    pub quad_tol: f64,
    pub stencil: StencilSpec,
    pub seed: u64,
}

impl Default for Knobs {
    fn default() -> Self {
        let stencil = StencilSpec { step_scale: STEP_SCALE, ..StencilSpec::default() };
        Self { quad_tol: QUAD_TOL, stencil, seed: DEFAULT_SEED }
    }
}

/// Mildly irregular growth points: unit-plus gaps, no accidental
/// symmetry for the negative controls to hide behind.
pub fn default_points(n: usize) -> Vec<f64> {
    let mut x = 0.0;
    (0..n)
        .map(|k| {
            if k > 0 {
                x += 1.0 + 0.1 * k as f64;
            }
            x
        })
        .collect()
}

fn patterns_for(
    n: usize,
    m: usize,
    arcs: &Option<Vec<(usize, usize)>>,
) -> Result<Vec<LinkPattern>> {
    match arcs {
        Some(list) => {
            if list.len() != m {
                return Err(SleError::InvalidParameter(format!(
                    "pattern has {} arcs but m = {m}",
                    list.len()
                )));
            }
            Ok(vec![LinkPattern::from_arcs(n, list)?])
        }
        None => enumerate_link_patterns(n, m),
    }
}

/// Closed-form charge conventions over the full small-(n,m) sweep.
pub fn charge_suite() -> Result<SuiteSummary> {
    let t0 = Instant::now();
    let mut suite = SuiteSummary::new("charges");
    for kappa in [2.0, 8.0 / 3.0, 3.0, 4.0, 6.0, 8.0] {
        let kp = KappaParams::new(kappa)?;
        let mut worst = 0.0f64;
        for n in 2..=6 {
            for m in 1..=n / 2 {
                verify_charge_conventions(&kp, n, m)?;
                let dg = (kp.lambda_of_sigma(kp.sigma_u_ground(n, m))
                    - kp.lambda_ground_closed(n, m))
                .abs();
                let de = (kp.lambda_of_sigma(kp.sigma_u_excited(n, m))
                    - kp.lambda_excited_closed(n, m))
                .abs();
                worst = worst.max(dg).max(de);
            }
        }
        suite.push(format!("charge conventions kappa={kappa} n<=6"), worst, 1e-12);
    }
    suite.wall_time_s = t0.elapsed().as_secs_f64();
    Ok(suite)
}

/// Link-pattern counts against the ballot closed form and named values.
pub fn pattern_suite() -> Result<SuiteSummary> {
    let t0 = Instant::now();
    let mut suite = SuiteSummary::new("patterns");
    for (n, m, expected) in [(4, 1, 3usize), (4, 2, 2), (6, 3, 5)] {
        let got = enumerate_link_patterns(n, m)?.len();
        suite.push(
            format!("pattern count ({n},{m}) = {expected}"),
            got.abs_diff(expected) as f64,
            0.0,
        );
    }
    let mut worst = 0.0f64;
    for n in 2..=10 {
        for m in 1..=n / 2 {
            let rep = count_report(n, m)?;
            worst = worst.max((rep.enumerated as i64 - rep.formula_ballot).unsigned_abs() as f64);
        }
    }
    suite.push("enumeration equals ballot formula for n<=10", worst, 0.0);
    suite.wall_time_s = t0.elapsed().as_secs_f64();
    Ok(suite)
}

/// Inputs for the null-vector suite.
pub struct NullvecSetup {
    pub kind: PsiKind,
    pub kappa: f64,
    pub n: usize,
    pub m: usize,
    pub arcs: Option<Vec<(usize, usize)>>,
    pub points: Option<Vec<f64>>,
    pub u: Marked,
    pub tol: f64,
}

/// Null-vector PDE rows on a partition function, with a smooth
/// non-solution control.
pub fn nullvec_suite(setup: &NullvecSetup, knobs: &Knobs) -> Result<SuiteSummary> {
    let t0 = Instant::now();
    let mut suite = SuiteSummary::new("null-vector");
    let kp = KappaParams::new(setup.kappa)?;
    let points = setup.points.clone().unwrap_or_else(|| default_points(setup.n));
    let config = BoundaryConfig::new(points.clone(), setup.u)?;
    for pat in patterns_for(setup.n, setup.m, &setup.arcs)? {
        let label = format!("kappa={} {}", setup.kappa, pat);
        let rows = (|| -> Result<(Vec<f64>, f64)> {
            let ev = PsiEvaluator::new(setup.kind, &kp, &pat, &config, knobs.quad_tol)?;
            let lam = ev.spec().lambda_u;
            let cache = PsiCache::new(&ev);
            let rep = nullvec_residuals(&cache, &kp, &points, setup.u, lam, &knobs.stencil)?;
            let h_err = rep
                .back_solved_h
                .iter()
                .map(|h| (h - kp.h()).abs())
                .fold(0.0, f64::max);
            Ok((rep.residuals, h_err))
        })();
        match rows {
            Ok((residuals, h_err)) => {
                for (j, r) in residuals.iter().enumerate() {
                    suite.push(format!("nullvec {label} row j={}", j + 1), *r, setup.tol);
                }
                suite.push(format!("nullvec {label} back-solved weight"), h_err, setup.tol);
            }
            Err(e) => suite.push_error(format!("nullvec {label} ({e})"), setup.tol),
        }
    }
    let control = |p: &[f64], _mk: Marked| -> Result<Cplx> {
        Ok(cplx((1.0 + p.iter().map(|x| x * x).sum::<f64>()).ln(), 0.0))
    };
    let rep = nullvec_residuals(&control, &kp, &points, setup.u, 0.0, &knobs.stencil)?;
    let worst = rep.residuals.iter().copied().fold(0.0, f64::max);
    suite.push(
        format!("control rejection margin (floor {CONTROL_FLOOR:e} over worst row)"),
        CONTROL_FLOOR / worst,
        1.0,
    );
    suite.wall_time_s = t0.elapsed().as_secs_f64();
    Ok(suite)
}

/// Inputs for the Ward suite.
pub struct WardSetup {
    pub kind: PsiKind,
    pub kappa: f64,
    pub n: usize,
    pub m: usize,
    pub arcs: Option<Vec<(usize, usize)>>,
    pub points: Option<Vec<f64>>,
    pub u: f64,
    pub tol: f64,
}

/// Translation, dilatation, and special conformal Ward rows at a finite
/// marked point, plus a wrong-weight rejection control.
pub fn ward_suite(setup: &WardSetup, knobs: &Knobs) -> Result<SuiteSummary> {
    let t0 = Instant::now();
    let mut suite = SuiteSummary::new("ward");
    let kp = KappaParams::new(setup.kappa)?;
    let points = setup.points.clone().unwrap_or_else(|| default_points(setup.n));
    let marked = Marked::Finite(setup.u);
    let config = BoundaryConfig::new(points.clone(), marked)?;
    for pat in patterns_for(setup.n, setup.m, &setup.arcs)? {
        let label = format!("kappa={} {}", setup.kappa, pat);
        let rows = (|| -> Result<[f64; 4]> {
            let ev = PsiEvaluator::new(setup.kind, &kp, &pat, &config, knobs.quad_tol)?;
            let lam = ev.spec().lambda_u;
            let cache = PsiCache::new(&ev);
            let w = ward_residuals(&cache, &points, marked, kp.h(), lam, &knobs.stencil)?;
            let wrong =
                ward_residuals(&cache, &points, marked, kp.h(), lam + 0.5, &knobs.stencil)?;
            Ok([w.translation, w.dilatation, w.special, wrong.dilatation])
        })();
        match rows {
            Ok([tr, di, sp, wrong]) => {
                suite.push(format!("ward translation {label}"), tr, setup.tol);
                suite.push(format!("ward dilatation {label}"), di, setup.tol);
                suite.push(format!("ward special {label}"), sp, setup.tol);
                suite.push(
                    format!(
                        "wrong-weight rejection margin {label} (must exceed {WRONG_WEIGHT_FACTOR}x gate)"
                    ),
                    WRONG_WEIGHT_FACTOR * setup.tol / wrong,
                    1.0,
                );
            }
            Err(e) => suite.push_error(format!("ward {label} ({e})"), setup.tol),
        }
    }
    suite.wall_time_s = t0.elapsed().as_secs_f64();
    Ok(suite)
}

/// Inputs for the Calogero-Moser suite.
pub struct CmSetup {
    pub n: usize,
    pub kappas: Vec<f64>,
    pub trials: usize,
    pub points: Option<Vec<f64>>,
    pub tol: f64,
}

/// Conjugation of the summed null-vector operators to the Calogero-Moser
/// Hamiltonian over seeded random polynomial test functions.
pub fn cm_suite(setup: &CmSetup, knobs: &Knobs) -> Result<SuiteSummary> {
    let t0 = Instant::now();
    let mut suite = SuiteSummary::new("calogero-moser");
    let points = setup.points.clone().unwrap_or_else(|| default_points(setup.n));
    let mut rng = ChaCha8Rng::seed_from_u64(knobs.seed);
    for &kappa in &setup.kappas {
        let kp = KappaParams::new(kappa)?;
        let mut worst = 0.0f64;
        for _ in 0..setup.trials {
            let coef: Vec<f64> =
                (0..4 * setup.n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let g = move |p: &[f64], _mk: Marked| -> Result<Cplx> {
                let mut v = coef[0];
                for (j, &x) in p.iter().enumerate() {
                    let c = &coef[1 + 3 * j..4 + 3 * j];
                    v += c[0] * x + c[1] * x * x + c[2] * x * x * x;
                }
                for j in 0..p.len() - 1 {
                    v += coef[1 + 3 * p.len() + j] * p[j] * p[j + 1];
                }
                Ok(cplx(v, 0.0))
            };
            let r = cm_conjugation_residual(&g, &kp, &points, &knobs.stencil)?;
            worst = worst.max(r);
        }
        suite.push(
            format!(
                "cm conjugation n={} kappa={kappa} (worst of {} random cubics)",
                setup.n, setup.trials
            ),
            worst,
            setup.tol,
        );
    }
    suite.wall_time_s = t0.elapsed().as_secs_f64();
    Ok(suite)
}

/// Inputs for the commutator suite.
pub struct CommutatorSetup {
    pub cases: Vec<(usize, usize)>,
    pub kappa: f64,
    pub tol: f64,
}

fn commutator_test_function(p: &[f64], _mk: Marked) -> Result<Cplx> {
    let mut v = 0.0;
    for (j, &x) in p.iter().enumerate() {
        v += (0.2 + 0.1 * j as f64) * x * x * x - x * x + 2.0 * x;
    }
    for j in 0..p.len() - 1 {
        v += 0.3 * p[j] * p[j + 1];
    }
    Ok(cplx(v, 0.0))
}

/// Commutators of the drifted generators against their exchange relation,
/// plus the null-vector commutator in rational (gated) and trigonometric
/// (reported only) form.
pub fn commutator_suite(setup: &CommutatorSetup, knobs: &Knobs) -> Result<SuiteSummary> {
    let t0 = Instant::now();
    let mut suite = SuiteSummary::new("commutators");
    let kp = KappaParams::new(setup.kappa)?;
    for &(n, m) in &setup.cases {
        let pat = enumerate_link_patterns(n, m)?
            .into_iter()
            .next()
            .ok_or(SleError::BadPatternShape { n, m })?;
        let points = default_points(n);
        let drift = DriftField::from_partition(
            PsiKind::Ground,
            pat.clone(),
            knobs.quad_tol,
            knobs.stencil.step_scale,
        );
        for i in 0..n {
            for j in (i + 1)..n {
                let r = commutator_residual_m(
                    &commutator_test_function,
                    &drift,
                    &kp,
                    i,
                    j,
                    &points,
                    Marked::Infinity,
                    &knobs.stencil,
                )?;
                suite.push(
                    format!("generator commutator {} pair ({},{})", pat, i + 1, j + 1),
                    r,
                    setup.tol,
                );
            }
        }
    }
    let points = default_points(2);
    let lrep = commutator_residual_l(
        &commutator_test_function,
        &kp,
        0,
        1,
        &points,
        &knobs.stencil,
    )?;
    suite.push(
        format!("null-vector commutator rational form n=2 kappa={}", setup.kappa),
        lrep.rational,
        setup.tol,
    );
    suite.push(
        format!(
            "null-vector commutator trigonometric form n=2 kappa={} (reported, ungated)",
            setup.kappa
        ),
        lrep.trig,
        f64::MAX,
    );
    suite.wall_time_s = t0.elapsed().as_secs_f64();
    Ok(suite)
}

/// Inputs for the capacity suite.
pub struct CapacitySetup {
    pub x: f64,
    pub y: f64,
    pub eps: f64,
    pub c: f64,
    pub kappa: f64,
    pub radius: f64,
    pub dt: f64,
    pub n_sub: usize,
}

impl Default for CapacitySetup {
    fn default() -> Self {
        Self { x: 0.0, y: 1.0, eps: 1e-3, c: 1.0, kappa: 4.0, radius: 50.0, dt: 1e-4, n_sub: 240 }
    }
}

/// Capacity transformation under hull erasure and the coordinate-change
/// drift law on affine and Mobius maps.
pub fn capacity_suite(setup: &CapacitySetup) -> Result<SuiteSummary> {
    let t0 = Instant::now();
    let mut suite = SuiteSummary::new("capacity");
    let rep = check_capacity_corollary(setup.x, setup.y, setup.eps, setup.c)?;
    suite.push(
        format!("capacity defect at eps={:e} (bound 50 eps^2)", setup.eps),
        rep.defect.abs(),
        50.0 * setup.eps * setup.eps,
    );
    suite.push(
        "capacity Richardson ratio distance from 4",
        (rep.richardson - 4.0).abs(),
        RICHARDSON_HALF_WIDTH,
    );
    let kp = KappaParams::new(setup.kappa)?;
    let aff = ConformalMap::Affine { a: 1.7, b: -0.3 };
    let r = coordinate_change_check(&kp, &aff, 0.4, setup.dt, setup.n_sub)?;
    suite.push("affine drift correction (exactly zero)", r.drift_measured.abs(), AFFINE_TOL);
    suite.push(
        "affine capacity density vs scale squared",
        (r.time_density_measured - 1.7 * 1.7).abs(),
        AFFINE_TOL,
    );
    let mob = ConformalMap::Mobius { radius: setup.radius };
    let r = coordinate_change_check(&kp, &mob, 0.0, setup.dt, setup.n_sub)?;
    suite.push(
        format!("mobius drift-law residual at radius {}", setup.radius),
        r.residual,
        MOBIUS_TOL,
    );
    suite.push(
        "mobius capacity density ratio distance from 1",
        (r.time_density_measured / r.time_density_predicted - 1.0).abs(),
        1e-3,
    );
    suite.wall_time_s = t0.elapsed().as_secs_f64();
    Ok(suite)
}

/// Short deterministic flow checks: reproducibility, ordering, and the
/// additivity of half-plane capacity along the committed records.
pub fn simulation_suite(knobs: &Knobs) -> Result<SuiteSummary> {
    let t0 = Instant::now();
    let mut suite = SuiteSummary::new("simulation");
    let cfg = SimulationConfig {
        kappa: 8.0 / 3.0,
        pattern: LinkPattern::from_arcs(2, &[(1, 2)])?,
        x0: vec![0.0, 1.0],
        u0: None,
        t_end: 0.02,
        dt: 1e-3,
        seed: knobs.seed,
        resolution: 5,
        with_drift: false,
    };
    let a = run_simulation(&cfg)?;
    let b = run_simulation(&cfg)?;
    let max_diff = a
        .final_driving
        .iter()
        .zip(&b.final_driving)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    suite.push("same-seed reruns agree exactly", max_diff, 0.0);
    let ordered = a.final_driving.windows(2).all(|w| w[0] < w[1]);
    suite.push("driving points stay ordered", if ordered { 0.0 } else { 1.0 }, 0.5);

    let kp = KappaParams::new(cfg.kappa)?;
    let drift = DriftField::zero();
    let mut state = LoewnerState::new(cfg.x0.clone(), Marked::Infinity, cfg.seed)?;
    for s in 0..20 {
        sle_lab::loewner::step_multiple_sle(&mut state, s % 2, cfg.dt, &kp, &drift)?;
    }
    let total_t: f64 = state.records().iter().map(|r| r.dt).sum();
    let z0 = cplx(0.0, 1e4);
    let mut z = z0;
    for rec in state.records() {
        z = erase_slit(z, rec.center, rec.dt);
    }
    let measured = ((z - z0) * z0).re;
    suite.push(
        "composed maps account the capacity (hcap = 2t)",
        (measured / (2.0 * total_t) - 1.0).abs(),
        1e-3,
    );
    suite.wall_time_s = t0.elapsed().as_secs_f64();
    Ok(suite)
}

/// The fixed battery behind `report`, in a stable order.
pub fn report_battery(knobs: &Knobs, only: Option<&str>) -> Result<Vec<SuiteSummary>> {
    let mut suites = Vec::new();
    let wanted = |name: &str| only.is_none_or(|f| name.contains(f));
    if wanted("charges") {
        suites.push(charge_suite()?);
    }
    if wanted("patterns") {
        suites.push(pattern_suite()?);
    }
    if wanted("null-vector") {
        suites.push(nullvec_suite(
            &NullvecSetup {
                kind: PsiKind::Ground,
                kappa: 8.0 / 3.0,
                n: 2,
                m: 1,
                arcs: Some(vec![(1, 2)]),
                points: None,
                u: Marked::Infinity,
                tol: NULLVEC_TOL,
            },
            knobs,
        )?);
    }
    if wanted("ward") {
        suites.push(ward_suite(
            &WardSetup {
                kind: PsiKind::Excited,
                kappa: 4.0,
                n: 2,
                m: 1,
                arcs: Some(vec![(1, 2)]),
                points: None,
                u: 3.0,
                tol: WARD_TOL,
            },
            knobs,
        )?);
    }
    if wanted("calogero-moser") {
        suites.push(cm_suite(
            &CmSetup { n: 3, kappas: vec![4.0, 6.0], trials: 4, points: None, tol: CM_TOL },
            knobs,
        )?);
    }
    if wanted("commutators") {
        suites.push(commutator_suite(
            &CommutatorSetup { cases: vec![(2, 1), (4, 2)], kappa: 4.0, tol: COMMUTATOR_TOL },
            knobs,
        )?);
    }
    if wanted("capacity") {
        suites.push(capacity_suite(&CapacitySetup::default())?);
    }
    if wanted("simulation") {
        suites.push(simulation_suite(knobs)?);
    }
    Ok(suites)
}
