//! Chordal Loewner flow: slit maps and their capacities, a tilted-slit
//! zipper for measuring the capacity of discretized curves, capacity and
//! coordinate-change checks, and Euler-Maruyama simulation of the
//! multiple-SLE system with partition-function drift.
//!
//! Conventions: time is normalized so that hcap = 2t.  A vertical slit of
//! height h has hcap h^2/2, hence t = h^2/4 and the slit grown over a
//! micro-step of duration dt reaches height 2 sqrt(dt).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::Marked;
use crate::error::{Result, SleError};
use crate::operators::DriftField;
use crate::params::KappaParams;
use crate::pattern::LinkPattern;
use crate::Cplx;

/// A straight slit attached to the real line.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum SlitShape {
    /// Vertical segment of the given height.
    Vertical { height: f64 },
    /// Straight slit at angle alpha·pi with scale parameter s; its tip is
    /// s (1-alpha)^(1-alpha) alpha^alpha e^{i alpha pi}.
    Tilted { alpha: f64, scale: f64 },
}

/// One hull: a slit shape attached at a base point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HullSpec {
    pub base: f64,
    pub shape: SlitShape,
}

/// Half-plane capacity of a slit (hcap units, i.e. twice the t-units).
pub fn hcap_of_slit(shape: &SlitShape) -> f64 {
    match *shape {
        SlitShape::Vertical { height } => height * height / 2.0,
        SlitShape::Tilted { alpha, scale } => alpha * (1.0 - alpha) * scale * scale / 2.0,
    }
}

impl HullSpec {
    /// Capacity in t-units: hcap / 2.
    pub fn capacity(&self) -> f64 {
        hcap_of_slit(&self.shape) / 2.0
    }
}

/// Parameters of the conformal map f(z) = (z + p)^(1-alpha) (z - q)^alpha
/// taking the upper half-plane onto the half-plane minus a straight slit
/// at angle alpha·pi from the origin.
#[derive(Debug, Clone, Copy)]
pub struct SlitParams {
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub scale: f64,
}

/// Slit map parameters for the slit whose tip is at w (Im w > 0).
pub fn slit_params(w: Cplx) -> Result<SlitParams> {
    if !(w.im > 0.0) {
        return Err(SleError::BadConformalMap(format!(
            "slit tip {w} is not in the upper half-plane"
        )));
    }
    let alpha = w.arg() / std::f64::consts::PI;
    let scale = w.norm() / ((1.0 - alpha).powf(1.0 - alpha) * alpha.powf(alpha));
    Ok(SlitParams { p: alpha * scale, q: (1.0 - alpha) * scale, alpha, scale })
}

/// Forward slit map, principal branches (valid on the closed upper
/// half-plane).
pub fn f_slit(sp: &SlitParams, z: Cplx) -> Cplx {
    ((z + sp.p).ln() * (1.0 - sp.alpha) + (z - sp.q).ln() * sp.alpha).exp()
}

fn f_slit_d1(sp: &SlitParams, z: Cplx) -> Cplx {
    f_slit(sp, z) * ((1.0 - sp.alpha) / (z + sp.p) + sp.alpha / (z - sp.q))
}

/// Preimage of the slit tip (the critical point of the map).
fn tip_preimage(sp: &SlitParams) -> f64 {
    (1.0 - 2.0 * sp.alpha) * sp.scale
}

/// Inverse slit map by damped Newton iteration from the given seed.
pub fn g_slit(sp: &SlitParams, w: Cplx, seed: Cplx) -> Result<Cplx> {
    let scale = sp.scale + w.norm();
    let mut z = seed;
    let mut r = f_slit(sp, z) - w;
    for _ in 0..80 {
        if r.norm() <= 1e-14 * scale {
            return Ok(z);
        }
        let d = f_slit_d1(sp, z);
        if d.norm() == 0.0 {
            break;
        }
        let full = r / d;
        let mut lambda = 1.0;
        loop {
            let zn = z - full * lambda;
            if zn.im > 0.0 {
                let rn = f_slit(sp, zn) - w;
                if rn.norm() < r.norm() || lambda < 1e-3 {
                    z = zn;
                    r = rn;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-6 {
                z += Cplx::new(0.0, 1e-9 * scale);
                r = f_slit(sp, z) - w;
                break;
            }
        }
    }
    if r.norm() <= 1e-9 * scale {
        Ok(z)
    } else {
        Err(SleError::BadConformalMap(format!(
            "slit inverse did not converge at {w} (residual {:.3e})",
            r.norm()
        )))
    }
}

/// Seed for the inverse map near the just-erased tip, from the local
/// quadratic model f(z) ~ w_tip + f''(z0)/2 (z - z0)^2.
fn near_tip_seed(sp: &SlitParams, w: Cplx) -> Cplx {
    let z0 = Cplx::new(tip_preimage(sp), 0.0);
    let w_tip = f_slit(sp, z0);
    let c = -f_slit(sp, z0)
        * ((1.0 - sp.alpha) / (z0 + sp.p).powi(2) + sp.alpha / (z0 - sp.q).powi(2));
    let root = ((w - w_tip) * 2.0 / c).sqrt();
    let cand = z0 + root;
    if cand.im > 0.0 {
        cand
    } else {
        z0 - root
    }
}

/// Outcome of zipping a discretized curve down to the real line.
#[derive(Debug, Clone, Copy)]
pub struct ZipResult {
    /// Accumulated half-plane capacity (hcap units).
    pub hcap: f64,
    /// Final base point: the driving value after the curve is erased.
    pub base: f64,
}

/// Unzips a curve given by points in the upper half-plane, starting from
/// the real base point, one tilted-slit increment per sample.
pub fn zip_curve(base0: f64, points: &[Cplx]) -> Result<ZipResult> {
    let mut base = base0;
    let mut pts = points.to_vec();
    let mut hcap = 0.0;
    for k in 0..pts.len() {
        let w = pts[k] - base;
        if !(w.im > 0.0) {
            return Err(SleError::BadConformalMap(format!(
                "curve sample {} is not above the real line",
                pts[k]
            )));
        }
        let sp = slit_params(w)?;
        hcap += sp.alpha * (1.0 - sp.alpha) * sp.scale * sp.scale / 2.0;
        let mut prev: Option<Cplx> = None;
        for l in (k + 1)..pts.len() {
            let target = pts[l] - base;
            let seed = prev.unwrap_or_else(|| near_tip_seed(&sp, target));
            let z = g_slit(&sp, target, seed)?;
            prev = Some(z);
            pts[l] = z + base;
        }
        base += tip_preimage(&sp);
    }
    Ok(ZipResult { hcap, base })
}

/// Map erasing a vertical slit of capacity eps (t-units) at x:
/// h(z) = x + sqrt((z - x)^2 + 4 eps), branch cut on the slit, h(z) ~ z
/// at infinity (so the left of the slit maps left, the right maps right).
pub fn erase_slit(z: Cplx, x: f64, eps: f64) -> Cplx {
    let d = z - Cplx::new(x, 0.0);
    let mut s = (d * d + 4.0 * eps).sqrt();
    if (s * d.conj()).re < 0.0 {
        s = -s;
    }
    x + s
}

/// Capacity transformation under erasing a neighbor hull.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CapacityReport {
    /// Capacity of the image of the hull at y, over its own capacity.
    pub measured_ratio: f64,
    /// First-order prediction 1 - 4 eps / (x - y)^2.
    pub predicted_ratio: f64,
    /// measured - predicted at eps.
    pub defect: f64,
    /// measured - predicted at eps/2.
    pub defect_half: f64,
    /// defect / defect_half; near 4 when the defect is O(eps^2).
    pub richardson: f64,
}

/// Grows a slit of capacity eps at x and one of capacity c·eps at y,
/// erases the first, and measures the capacity of the image of the
/// second with the zipper.  The first-order prediction has an O(eps^2)
/// defect, exhibited by the Richardson ratio between eps and eps/2.
pub fn check_capacity_corollary(x: f64, y: f64, eps: f64, c: f64) -> Result<CapacityReport> {
    if x == y {
        return Err(SleError::InvalidParameter("hull bases coincide".into()));
    }
    if !(eps > 0.0) || !(c > 0.0) {
        return Err(SleError::InvalidParameter(
            "capacities must be positive".into(),
        ));
    }
    let sep = (x - y).abs();
    if 4.0 * (eps.max(c * eps)).sqrt() >= sep {
        return Err(SleError::InvalidParameter(format!(
            "hulls of capacity {eps} and {} are not small against the separation {sep}",
            c * eps
        )));
    }
    let n = 300usize;
    let measure = |e: f64| -> Result<f64> {
        let height = 2.0 * (c * e).sqrt();
        let pts: Vec<Cplx> = (1..=n)
            .map(|k| erase_slit(Cplx::new(y, height * k as f64 / n as f64), x, e))
            .collect();
        let base0 = erase_slit(Cplx::new(y, 0.0), x, e).re;
        let zr = zip_curve(base0, &pts)?;
        Ok((zr.hcap / 2.0) / (c * e))
    };
    let predicted = |e: f64| 1.0 - 4.0 * e / (sep * sep);
    let measured_ratio = measure(eps)?;
    let measured_half = measure(eps / 2.0)?;
    let defect = measured_ratio - predicted(eps);
    let defect_half = measured_half - predicted(eps / 2.0);
    Ok(CapacityReport {
        measured_ratio,
        predicted_ratio: predicted(eps),
        defect,
        defect_half,
        richardson: defect / defect_half,
    })
}

/// Conformal change of coordinates, real on the real line.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum ConformalMap {
    Affine { a: f64, b: f64 },
    /// z -> R z / (R - z); half-plane preserving, curvature 2/R at 0.
    Mobius { radius: f64 },
}

impl ConformalMap {
    pub fn eval(&self, z: Cplx) -> Cplx {
        match *self {
            ConformalMap::Affine { a, b } => z * a + b,
            ConformalMap::Mobius { radius } => z * radius / (radius - z),
        }
    }

    pub fn d1(&self, x: f64) -> f64 {
        match *self {
            ConformalMap::Affine { a, .. } => a,
            ConformalMap::Mobius { radius } => {
                let d = radius - x;
                radius * radius / (d * d)
            }
        }
    }

    pub fn d2(&self, x: f64) -> f64 {
        match *self {
            ConformalMap::Affine { .. } => 0.0,
            ConformalMap::Mobius { radius } => {
                let d = radius - x;
                2.0 * radius * radius / (d * d * d)
            }
        }
    }
}

/// Measured against predicted transformation of the driving function
/// under a coordinate change.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoordChangeReport {
    /// (final image base - psi(w0)) / dt from the zipped image hull.
    pub geometric_measured: f64,
    /// -3 psi''(w0).
    pub geometric_predicted: f64,
    /// geometric_measured + (kappa/2) psi''(w0).
    pub drift_measured: f64,
    /// ((kappa - 6)/2) psi''(w0).
    pub drift_predicted: f64,
    /// |drift_measured - drift_predicted| / (1 + |drift_predicted|).
    pub residual: f64,
    /// Image capacity rate (hcap/2)/dt against psi'(w0)^2.
    pub time_density_measured: f64,
    pub time_density_predicted: f64,
}

/// Grows a vertical slit of duration dt at w0, pushes it through the map,
/// and zips the image arc.  The final base point of the zipper is the
/// image-side driving value; its shift per unit time measures the
/// inhomogeneous drift term of the coordinate-change law
/// dW~ = psi' dW + ((kappa - 6)/2) psi'' dt.
pub fn coordinate_change_check(
    kappa: &KappaParams,
    map: &ConformalMap,
    w0: f64,
    dt: f64,
    n_sub: usize,
) -> Result<CoordChangeReport> {
    if !(dt > 0.0) {
        return Err(SleError::InvalidParameter("dt must be positive".into()));
    }
    if n_sub < 8 {
        return Err(SleError::InvalidParameter(
            "need at least 8 subdivision points".into(),
        ));
    }
    let height = 2.0 * dt.sqrt();
    if let ConformalMap::Mobius { radius } = *map {
        if w0.abs() + height >= 0.5 * radius.abs() {
            return Err(SleError::BadConformalMap(
                "hull is not well inside the map's domain".into(),
            ));
        }
    }
    let base0 = map.eval(Cplx::new(w0, 0.0));
    if base0.im.abs() > 1e-12 * (1.0 + base0.re.abs()) {
        return Err(SleError::BadConformalMap(
            "map is not real on the real line".into(),
        ));
    }
    let pts: Vec<Cplx> = (1..=n_sub)
        .map(|k| map.eval(Cplx::new(w0, height * k as f64 / n_sub as f64)))
        .collect();
    let zr = zip_curve(base0.re, &pts)?;
    let d1 = map.d1(w0);
    let d2 = map.d2(w0);
    let geometric_measured = (zr.base - base0.re) / dt;
    let geometric_predicted = -3.0 * d2;
    let drift_measured = geometric_measured + kappa.kappa / 2.0 * d2;
    let drift_predicted = (kappa.kappa - 6.0) / 2.0 * d2;
    Ok(CoordChangeReport {
        geometric_measured,
        geometric_predicted,
        drift_measured,
        drift_predicted,
        residual: (drift_measured - drift_predicted).abs() / (1.0 + drift_predicted.abs()),
        time_density_measured: (zr.hcap / 2.0) / dt,
        time_density_predicted: d1 * d1,
    })
}

/// One committed micro-step of the flow: a vertical slit at `center`
/// grown for `dt` (t-units) by curve `curve`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SlitRecord {
    pub curve: usize,
    pub center: f64,
    pub dt: f64,
}

/// State of the multiple-SLE Loewner chain.
#[derive(Debug)]
pub struct LoewnerState {
    pub time: f64,
    pub driving: Vec<f64>,
    pub marked: Marked,
    pub seed: u64,
    /// Cumulative count of adaptive halvings.
    pub halvings: u64,
    initial_driving: Vec<f64>,
    records: Vec<SlitRecord>,
    rng: ChaCha8Rng,
}

impl LoewnerState {
    pub fn new(driving: Vec<f64>, marked: Marked, seed: u64) -> Result<Self> {
        if driving.is_empty() {
            return Err(SleError::BadConfiguration("no growth points".into()));
        }
        if !driving.windows(2).all(|w| w[0] < w[1]) {
            return Err(SleError::BadConfiguration(
                "driving values must be strictly increasing".into(),
            ));
        }
        if let Some(u) = marked.finite() {
            if driving.contains(&u) {
                return Err(SleError::BadConfiguration(
                    "marked point collides with a driving value".into(),
                ));
            }
        }
        Ok(Self {
            time: 0.0,
            initial_driving: driving.clone(),
            driving,
            marked,
            seed,
            halvings: 0,
            records: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn records(&self) -> &[SlitRecord] {
        &self.records
    }

    pub fn initial_driving(&self) -> &[f64] {
        &self.initial_driving
    }

    fn gaussian(&mut self) -> f64 {
        // Marsaglia polar method; one variate per call.
        loop {
            let u = 2.0 * self.rng.gen::<f64>() - 1.0;
            let v = 2.0 * self.rng.gen::<f64>() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                return u * (-2.0 * s.ln() / s).sqrt();
            }
        }
    }
}

fn ordering_ok(driving: &[f64], marked_old: Marked, marked_new: Marked, old: &[f64]) -> bool {
    if !driving.windows(2).all(|w| w[0] < w[1]) {
        return false;
    }
    if let (Some(u_old), Some(u_new)) = (marked_old.finite(), marked_new.finite()) {
        for (&x_old, &x_new) in old.iter().zip(driving) {
            if (u_old - x_old).signum() != (u_new - x_new).signum() || u_new == x_new {
                return false;
            }
        }
    }
    true
}

/// Advances curve `active` by `dt` (t-units) with Euler-Maruyama:
/// dW_j = sqrt(kappa) dB + b_j dt for the active driving value,
/// dx_k = 2 dt / (x_k - W_j) for the passive ones and the marked point.
/// Sub-steps halve (up to 24 times below the requested dt) whenever a
/// step would break the ordering.
pub fn step_multiple_sle(
    state: &mut LoewnerState,
    active: usize,
    dt: f64,
    kappa: &KappaParams,
    drift: &DriftField,
) -> Result<()> {
    if active >= state.driving.len() {
        return Err(SleError::InvalidParameter(format!(
            "active index {active} out of range"
        )));
    }
    if !(dt > 0.0) {
        return Err(SleError::InvalidParameter("dt must be positive".into()));
    }
    let min_h = dt / 2f64.powi(24);
    let mut remaining = dt;
    let mut h = dt;
    while remaining > 0.0 {
        h = h.min(remaining);
        if h < min_h {
            return Err(SleError::OrderingViolation {
                halvings: 24,
            });
        }
        let b = drift.values(kappa, &state.driving, state.marked)?;
        let xi = state.gaussian();
        let w = state.driving[active];
        let mut next = state.driving.clone();
        next[active] = w + (kappa.kappa * h).sqrt() * xi + b[active] * h;
        for k in 0..next.len() {
            if k != active {
                next[k] += 2.0 * h / (state.driving[k] - w);
            }
        }
        let marked_next = match state.marked.finite() {
            Some(u) => Marked::Finite(u + 2.0 * h / (u - w)),
            None => Marked::Infinity,
        };
        if ordering_ok(&next, state.marked, marked_next, &state.driving) {
            state.records.push(SlitRecord { curve: active, center: next[active], dt: h });
            state.driving = next;
            state.marked = marked_next;
            state.time += h;
            remaining -= h;
        } else {
            h /= 2.0;
            state.halvings += 1;
        }
    }
    Ok(())
}

/// Reconstructs the traces from the map stack: the tip grown at record k
/// is pulled back through all earlier micro-slit maps
/// f(w) = c + (w - c) sqrt(1 - 4 dt / (w - c)^2).
pub fn sample_traces(state: &LoewnerState, resolution: usize) -> Vec<Vec<Cplx>> {
    let recs = state.records();
    let n = state.driving.len();
    let inverse_step = |rec: &SlitRecord, w: Cplx| -> Cplx {
        let d = w - rec.center;
        rec.center + d * (Complex64::new(1.0, 0.0) - 4.0 * rec.dt / (d * d)).sqrt()
    };
    let mut traces: Vec<Vec<Cplx>> = (0..n)
        .map(|i| vec![Cplx::new(state.initial_driving[i], 0.0)])
        .collect();
    for i in 0..n {
        let mine: Vec<usize> = (0..recs.len()).filter(|&k| recs[k].curve == i).collect();
        if mine.is_empty() {
            continue;
        }
        let stride = (mine.len() / resolution.max(1)).max(1);
        let mut chosen: Vec<usize> = mine.iter().copied().step_by(stride).collect();
        if *chosen.last().unwrap() != *mine.last().unwrap() {
            chosen.push(*mine.last().unwrap());
        }
        for &k in &chosen {
            let mut z = Cplx::new(recs[k].center, 2.0 * recs[k].dt.sqrt());
            for l in (0..k).rev() {
                z = inverse_step(&recs[l], z);
            }
            traces[i].push(z);
        }
    }
    traces
}

/// Input for one simulation run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub kappa: f64,
    pub pattern: LinkPattern,
    pub x0: Vec<f64>,
    pub u0: Option<f64>,
    pub t_end: f64,
    pub dt: f64,
    pub seed: u64,
    pub resolution: usize,
    /// Drive with the ground partition-function drift (true) or zero
    /// drift (false).
    pub with_drift: bool,
}

#[derive(Debug)]
pub struct SimulationOutcome {
    pub time: f64,
    pub final_driving: Vec<f64>,
    pub final_marked: Marked,
    pub halvings: u64,
    pub steps: usize,
    pub traces: Vec<Vec<Cplx>>,
}

/// Runs the flow to t_end, cycling through the curves one macro-step of
/// duration dt each.
pub fn run_simulation(cfg: &SimulationConfig) -> Result<SimulationOutcome> {
    let kappa = KappaParams::new(cfg.kappa)?;
    if cfg.pattern.n != cfg.x0.len() {
        return Err(SleError::BadConfiguration(format!(
            "pattern n = {} but {} starting points given",
            cfg.pattern.n,
            cfg.x0.len()
        )));
    }
    let marked = Marked::from_option(cfg.u0);
    let mut state = LoewnerState::new(cfg.x0.clone(), marked, cfg.seed)?;
    let drift = if cfg.with_drift {
        DriftField::from_partition(
            crate::coulomb::PsiKind::Ground,
            cfg.pattern.clone(),
            1e-6,
            1e-3,
        )
    } else {
        DriftField::zero()
    };
    let n = cfg.x0.len();
    if !(cfg.dt > 0.0 && cfg.t_end > 0.0) {
        return Err(SleError::InvalidParameter(
            "t_end and dt must be positive".into(),
        ));
    }
    let steps = (cfg.t_end / cfg.dt).ceil() as usize;
    for s in 0..steps {
        step_multiple_sle(&mut state, s % n, cfg.dt, &kappa, &drift)?;
    }
    let traces = sample_traces(&state, cfg.resolution);
    Ok(SimulationOutcome {
        time: state.time,
        final_driving: state.driving.clone(),
        final_marked: state.marked,
        halvings: state.halvings,
        steps,
        traces,
    })
}
