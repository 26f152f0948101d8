//! Finite-difference laboratory for the differential operators acting on
//! partition functions: null-vector operators, Ward identities, the
//! commutator algebra of the Loewner generators, and the conjugation to
//! the Calogero-Moser Hamiltonian.
//!
//! All operators act through the `SampleFn` abstraction, so they apply
//! equally to closed-form test functions and to cached partition-function
//! evaluations.  Steps scale with the local gap between singularities;
//! nested operator applications widen the outer step fourfold to keep the
//! inner truncation error subdominant.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::config::{BoundaryConfig, Marked};
use crate::coulomb::{log_gradient_on, PsiEvaluator, PsiKind};
use crate::error::{Result, SleError};
use crate::params::KappaParams;
use crate::pattern::LinkPattern;
use crate::Cplx;

/// A complex-valued function of the growth points and the marked point.
pub trait SampleFn: Sync {
    fn sample(&self, points: &[f64], marked: Marked) -> Result<Cplx>;
}

impl<F> SampleFn for F
where
    F: Fn(&[f64], Marked) -> Result<Cplx> + Sync,
{
    fn sample(&self, points: &[f64], marked: Marked) -> Result<Cplx> {
        self(points, marked)
    }
}

/// Memoizing adapter around a frozen partition-function evaluator.
/// Stencil applications revisit shifted configurations many times; the
/// cache keys coordinates quantized at 1e-12.
pub struct PsiCache<'a> {
    ev: &'a PsiEvaluator,
    cache: Mutex<HashMap<Vec<i64>, Cplx>>,
}

impl<'a> PsiCache<'a> {
    pub fn new(ev: &'a PsiEvaluator) -> Self {
        Self { ev, cache: Mutex::new(HashMap::new()) }
    }

    fn key(points: &[f64], marked: Marked) -> Vec<i64> {
        let quant = |x: f64| (x * 1e12).round() as i64;
        let mut k: Vec<i64> = points.iter().map(|&x| quant(x)).collect();
        match marked.finite() {
            Some(u) => {
                k.push(1);
                k.push(quant(u));
            }
            None => k.push(0),
        }
        k
    }

    pub fn len(&self) -> usize {
        self.cache.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl SampleFn for PsiCache<'_> {
    fn sample(&self, points: &[f64], marked: Marked) -> Result<Cplx> {
        let key = Self::key(points, marked);
        if let Some(&v) = self.cache.lock().unwrap().get(&key) {
            return Ok(v);
        }
        let v = self.ev.eval_at(points, marked)?.value;
        self.cache.lock().unwrap().insert(key, v);
        Ok(v)
    }
}

/// Order and step control for the difference stencils.
#[derive(Debug, Clone, Copy)]
pub struct StencilSpec {
    /// Truncation order of the centered stencils: 2, 4, or 6.
    pub order: usize,
    /// Step as a fraction of the local gap.
    pub step_scale: f64,
    /// Highest derivative order taken in one nested application.
    pub max_mixed_order: usize,
}

impl Default for StencilSpec {
    fn default() -> Self {
        Self { order: 4, step_scale: 1e-3, max_mixed_order: 2 }
    }
}

impl StencilSpec {
    pub fn validated(self) -> Result<Self> {
        if !matches!(self.order, 2 | 4 | 6) {
            return Err(SleError::InvalidParameter(format!(
                "stencil order {} is not one of 2, 4, 6",
                self.order
            )));
        }
        if !(self.step_scale > 0.0 && self.step_scale <= 0.05) {
            return Err(SleError::InvalidParameter(format!(
                "step scale {} must lie in (0, 0.05]",
                self.step_scale
            )));
        }
        if !matches!(self.max_mixed_order, 1 | 2) {
            return Err(SleError::InvalidParameter(format!(
                "mixed order {} must be 1 or 2",
                self.max_mixed_order
            )));
        }
        Ok(self)
    }
}

const D1_O2: &[(i32, f64)] = &[(-1, -0.5), (1, 0.5)];
const D2_O2: &[(i32, f64)] = &[(-1, 1.0), (0, -2.0), (1, 1.0)];
const D1_O4: &[(i32, f64)] = &[
    (-2, 1.0 / 12.0),
    (-1, -8.0 / 12.0),
    (1, 8.0 / 12.0),
    (2, -1.0 / 12.0),
];
const D2_O4: &[(i32, f64)] = &[
    (-2, -1.0 / 12.0),
    (-1, 16.0 / 12.0),
    (0, -30.0 / 12.0),
    (1, 16.0 / 12.0),
    (2, -1.0 / 12.0),
];
const D1_O6: &[(i32, f64)] = &[
    (-3, -1.0 / 60.0),
    (-2, 9.0 / 60.0),
    (-1, -45.0 / 60.0),
    (1, 45.0 / 60.0),
    (2, -9.0 / 60.0),
    (3, 1.0 / 60.0),
];
const D2_O6: &[(i32, f64)] = &[
    (-3, 2.0 / 180.0),
    (-2, -27.0 / 180.0),
    (-1, 270.0 / 180.0),
    (0, -490.0 / 180.0),
    (1, 270.0 / 180.0),
    (2, -27.0 / 180.0),
    (3, 2.0 / 180.0),
];

fn stencil_table(order: usize, deriv: usize) -> Result<&'static [(i32, f64)]> {
    match (order, deriv) {
        (2, 1) => Ok(D1_O2),
        (2, 2) => Ok(D2_O2),
        (4, 1) => Ok(D1_O4),
        (4, 2) => Ok(D2_O4),
        (6, 1) => Ok(D1_O6),
        (6, 2) => Ok(D2_O6),
        _ => Err(SleError::InvalidParameter(format!(
            "no stencil for order {order}, derivative {deriv}"
        ))),
    }
}

/// Differentiation variable: one growth point or the marked point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    Growth(usize),
    MarkedPoint,
}

/// Distance from one coordinate to its nearest other singularity.
pub fn local_gap(points: &[f64], marked: Marked, var: Var) -> f64 {
    let at = match var {
        Var::Growth(j) => points[j],
        Var::MarkedPoint => marked.finite().expect("marked point at infinity has no gap"),
    };
    let mut gap = f64::INFINITY;
    for (k, &x) in points.iter().enumerate() {
        if var != Var::Growth(k) {
            gap = gap.min((x - at).abs());
        }
    }
    if var != Var::MarkedPoint {
        if let Some(u) = marked.finite() {
            gap = gap.min((u - at).abs());
        }
    }
    gap
}

pub fn min_gap(points: &[f64], marked: Marked) -> f64 {
    let mut gap = f64::INFINITY;
    for j in 0..points.len() {
        gap = gap.min(local_gap(points, marked, Var::Growth(j)));
    }
    gap
}

/// Centered finite-difference partial derivative.
pub fn partial<F: SampleFn + ?Sized>(
    f: &F,
    points: &[f64],
    marked: Marked,
    var: Var,
    deriv: usize,
    order: usize,
    h: f64,
) -> Result<Cplx> {
    if matches!(var, Var::MarkedPoint) && !marked.is_finite() {
        return Err(SleError::InvalidParameter(
            "cannot differentiate in the marked point at infinity".into(),
        ));
    }
    let table = stencil_table(order, deriv)?;
    let mut acc = Cplx::new(0.0, 0.0);
    let mut shifted = points.to_vec();
    for &(off, w) in table {
        if w == 0.0 {
            continue;
        }
        let delta = off as f64 * h;
        let v = match var {
            Var::Growth(i) => {
                shifted[i] = points[i] + delta;
                let v = f.sample(&shifted, marked)?;
                shifted[i] = points[i];
                v
            }
            Var::MarkedPoint => {
                let u = marked.finite().unwrap() + delta;
                f.sample(points, Marked::Finite(u))?
            }
        };
        acc += v * w;
    }
    Ok(acc / h.powi(deriv as i32))
}

fn step_for(st: &StencilSpec, points: &[f64], marked: Marked, var: Var, mult: f64) -> f64 {
    st.step_scale * local_gap(points, marked, var) * mult
}

/// Decomposition of one null-vector operator application, keeping the
/// potential terms separate so their coefficients can be back-solved.
struct LParts {
    /// (kappa/2) d^2_j + sum 2/(x_k - x_j) d_k (+ marked-point drift term).
    derivative: Cplx,
    /// f0 · sum_{k != j} 1/(x_k - x_j)^2 (coefficient of -2h).
    growth_pot: Cplx,
    /// f0 / (u - x_j)^2 (coefficient of -2 lambda_u), zero at infinity.
    marked_pot: Cplx,
}

fn apply_l_parts<F: SampleFn + ?Sized>(
    f: &F,
    kappa: &KappaParams,
    j: usize,
    points: &[f64],
    marked: Marked,
    st: &StencilSpec,
    h_mult: f64,
) -> Result<LParts> {
    let f0 = f.sample(points, marked)?;
    let hj = step_for(st, points, marked, Var::Growth(j), h_mult);
    let mut derivative =
        partial(f, points, marked, Var::Growth(j), 2, st.order, hj)? * (kappa.kappa / 2.0);
    let mut growth_pot = Cplx::new(0.0, 0.0);
    for k in 0..points.len() {
        if k == j {
            continue;
        }
        let dx = points[k] - points[j];
        let hk = step_for(st, points, marked, Var::Growth(k), h_mult);
        derivative += partial(f, points, marked, Var::Growth(k), 1, st.order, hk)? * (2.0 / dx);
        growth_pot += f0 / (dx * dx);
    }
    let mut marked_pot = Cplx::new(0.0, 0.0);
    if let Some(u) = marked.finite() {
        let du = u - points[j];
        let hu = step_for(st, points, marked, Var::MarkedPoint, h_mult);
        derivative += partial(f, points, marked, Var::MarkedPoint, 1, st.order, hu)? * (2.0 / du);
        marked_pot = f0 / (du * du);
    }
    Ok(LParts { derivative, growth_pot, marked_pot })
}

/// Applies the null-vector operator at growth point `j`:
/// (kappa/2) d^2_j + sum_{k != j} [2/(x_k - x_j) d_k - 2h/(x_k - x_j)^2]
/// plus, for a finite marked point, 2/(u - x_j) d_u - 2 lambda_u/(u - x_j)^2.
pub fn apply_l<F: SampleFn + ?Sized>(
    f: &F,
    kappa: &KappaParams,
    j: usize,
    points: &[f64],
    marked: Marked,
    lambda_u: f64,
    st: &StencilSpec,
) -> Result<Cplx> {
    let parts = apply_l_parts(f, kappa, j, points, marked, st, 1.0)?;
    Ok(parts.derivative
        - parts.growth_pot * (2.0 * kappa.h())
        - parts.marked_pot * (2.0 * lambda_u))
}

/// Null-vector residuals at every growth point, scaled by |psi| times the
/// squared inverse gap, plus the weight h back-solved from each row.
#[derive(Debug, Clone)]
pub struct NullVectorReport {
    pub residuals: Vec<f64>,
    pub back_solved_h: Vec<f64>,
    pub scale: f64,
}

pub fn nullvec_residuals<F: SampleFn + ?Sized>(
    f: &F,
    kappa: &KappaParams,
    points: &[f64],
    marked: Marked,
    lambda_u: f64,
    st: &StencilSpec,
) -> Result<NullVectorReport> {
    let f0 = f.sample(points, marked)?;
    let freq = 1.0 / min_gap(points, marked);
    let scale = f0.norm() * freq * freq;
    let mut residuals = Vec::with_capacity(points.len());
    let mut back_solved = Vec::with_capacity(points.len());
    for j in 0..points.len() {
        let parts = apply_l_parts(f, kappa, j, points, marked, st, 1.0)?;
        let value = parts.derivative
            - parts.growth_pot * (2.0 * kappa.h())
            - parts.marked_pot * (2.0 * lambda_u);
        residuals.push(value.norm() / scale);
        let numer = parts.derivative - parts.marked_pot * (2.0 * lambda_u);
        let h_solved = (numer / (parts.growth_pot * 2.0)).re;
        back_solved.push(h_solved);
    }
    Ok(NullVectorReport { residuals, back_solved_h: back_solved, scale })
}

/// Residuals of the three Ward identities at a finite marked point.
#[derive(Debug, Clone, Copy)]
pub struct WardReport {
    /// Translation: sum_i d_i psi + d_u psi, over |psi| / gap.
    pub translation: f64,
    /// Dilatation: sum_i x_i d_i psi + n h psi + u d_u psi + lambda_u psi,
    /// over |psi|.
    pub dilatation: f64,
    /// Special conformal: sum_i (x_i^2 d_i + 2 h x_i) psi + u^2 d_u psi
    /// + 2 lambda_u u psi, over |psi| times the largest coordinate.
    pub special: f64,
}

pub fn ward_residuals<F: SampleFn + ?Sized>(
    f: &F,
    points: &[f64],
    marked: Marked,
    weight_h: f64,
    lambda_u: f64,
    st: &StencilSpec,
) -> Result<WardReport> {
    let u = marked.finite().ok_or_else(|| {
        SleError::InvalidParameter("Ward residuals need a finite marked point".into())
    })?;
    let f0 = f.sample(points, marked)?;
    let n = points.len() as f64;
    let mut d: Vec<Cplx> = Vec::with_capacity(points.len());
    for j in 0..points.len() {
        let h = step_for(st, points, marked, Var::Growth(j), 1.0);
        d.push(partial(f, points, marked, Var::Growth(j), 1, st.order, h)?);
    }
    let hu = step_for(st, points, marked, Var::MarkedPoint, 1.0);
    let du = partial(f, points, marked, Var::MarkedPoint, 1, st.order, hu)?;

    let freq = 1.0 / min_gap(points, marked);
    let span = points
        .iter()
        .map(|x| x.abs())
        .fold(u.abs(), f64::max)
        .max(1e-300);

    let w_m1: Cplx = d.iter().sum::<Cplx>() + du;
    let w_0: Cplx = points.iter().zip(&d).map(|(&x, &dj)| dj * x).sum::<Cplx>()
        + f0 * (n * weight_h)
        + du * u
        + f0 * lambda_u;
    let w_p1: Cplx = points
        .iter()
        .zip(&d)
        .map(|(&x, &dj)| dj * (x * x) + f0 * (2.0 * weight_h * x))
        .sum::<Cplx>()
        + du * (u * u)
        + f0 * (2.0 * lambda_u * u);

    let base = f0.norm();
    Ok(WardReport {
        translation: w_m1.norm() / (base * freq),
        dilatation: w_0.norm() / base,
        special: w_p1.norm() / (base * span),
    })
}

/// Drift supplier for the Loewner generators: either zero or
/// kappa times the log-gradient of a partition function, rebuilt (and
/// memoized) per configuration.
pub struct DriftField {
    kind: DriftKind,
    cache: Mutex<HashMap<Vec<i64>, Vec<f64>>>,
}

enum DriftKind {
    Zero,
    Partition { kind: PsiKind, pattern: LinkPattern, tol: f64, step_scale: f64 },
}

impl DriftField {
    pub fn zero() -> Self {
        Self { kind: DriftKind::Zero, cache: Mutex::new(HashMap::new()) }
    }

    pub fn from_partition(kind: PsiKind, pattern: LinkPattern, tol: f64, step_scale: f64) -> Self {
        Self {
            kind: DriftKind::Partition { kind, pattern, tol, step_scale },
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn values(
        &self,
        kappa: &KappaParams,
        points: &[f64],
        marked: Marked,
    ) -> Result<Vec<f64>> {
        match &self.kind {
            DriftKind::Zero => Ok(vec![0.0; points.len()]),
            DriftKind::Partition { kind, pattern, tol, step_scale } => {
                let key = PsiCache::key(points, marked);
                if let Some(v) = self.cache.lock().unwrap().get(&key) {
                    return Ok(v.clone());
                }
                let config = BoundaryConfig::new(points.to_vec(), marked)?;
                let ev = PsiEvaluator::new(*kind, kappa, pattern, &config, *tol)?;
                let grad = log_gradient_on(&ev, *step_scale)?;
                let b: Vec<f64> = grad.iter().map(|g| kappa.kappa * g).collect();
                self.cache.lock().unwrap().insert(key, b.clone());
                Ok(b)
            }
        }
    }
}

/// Applies the Loewner generator at growth point `i`:
/// (kappa/2) d^2_i + b_i d_i + sum_{k != i} 2/(x_k - x_i) d_k.
pub fn apply_m<F: SampleFn + ?Sized>(
    f: &F,
    drift: &DriftField,
    kappa: &KappaParams,
    i: usize,
    points: &[f64],
    marked: Marked,
    st: &StencilSpec,
) -> Result<Cplx> {
    apply_m_scaled(f, drift, kappa, i, points, marked, st, 1.0)
}

#[allow(clippy::too_many_arguments)]
fn apply_m_scaled<F: SampleFn + ?Sized>(
    f: &F,
    drift: &DriftField,
    kappa: &KappaParams,
    i: usize,
    points: &[f64],
    marked: Marked,
    st: &StencilSpec,
    h_mult: f64,
) -> Result<Cplx> {
    let b = drift.values(kappa, points, marked)?;
    let hi = step_for(st, points, marked, Var::Growth(i), h_mult);
    let mut acc = partial(f, points, marked, Var::Growth(i), 2, st.order, hi)?
        * (kappa.kappa / 2.0)
        + partial(f, points, marked, Var::Growth(i), 1, st.order, hi)? * b[i];
    for k in 0..points.len() {
        if k == i {
            continue;
        }
        let hk = step_for(st, points, marked, Var::Growth(k), h_mult);
        acc += partial(f, points, marked, Var::Growth(k), 1, st.order, hk)?
            * (2.0 / (points[k] - points[i]));
    }
    Ok(acc)
}

/// Residual of [M_i, M_j] g = 4/(x_i - x_j)^2 (M_j - M_i) g, with the
/// outer application on a fourfold-widened step.
#[allow(clippy::too_many_arguments)]
pub fn commutator_residual_m<F: SampleFn + ?Sized>(
    g: &F,
    drift: &DriftField,
    kappa: &KappaParams,
    i: usize,
    j: usize,
    points: &[f64],
    marked: Marked,
    st: &StencilSpec,
) -> Result<f64> {
    if i == j {
        return Ok(0.0);
    }
    let inner_j =
        |p: &[f64], mk: Marked| apply_m_scaled(g, drift, kappa, j, p, mk, st, 1.0);
    let inner_i =
        |p: &[f64], mk: Marked| apply_m_scaled(g, drift, kappa, i, p, mk, st, 1.0);
    let mij = apply_m_scaled(&inner_j, drift, kappa, i, points, marked, st, 4.0)?;
    let mji = apply_m_scaled(&inner_i, drift, kappa, j, points, marked, st, 4.0)?;
    let mj = apply_m_scaled(g, drift, kappa, j, points, marked, st, 1.0)?;
    let mi = apply_m_scaled(g, drift, kappa, i, points, marked, st, 1.0)?;
    let dx = points[i] - points[j];
    let rhs = (mj - mi) * (4.0 / (dx * dx));
    let scale = 1.0 + mij.norm() + mji.norm();
    Ok(((mij - mji) - rhs).norm() / scale)
}

/// Residuals of the null-vector commutator relation, for the rational
/// generators (gated) and their trigonometric analogue (reported only).
#[derive(Debug, Clone, Copy)]
pub struct LCommutatorReport {
    pub rational: f64,
    pub trig: f64,
}

fn apply_l_scaled<F: SampleFn + ?Sized>(
    f: &F,
    kappa: &KappaParams,
    j: usize,
    points: &[f64],
    st: &StencilSpec,
    h_mult: f64,
) -> Result<Cplx> {
    let parts = apply_l_parts(f, kappa, j, points, Marked::Infinity, st, h_mult)?;
    Ok(parts.derivative - parts.growth_pot * (2.0 * kappa.h()))
}

fn apply_l_trig<F: SampleFn + ?Sized>(
    f: &F,
    kappa: &KappaParams,
    j: usize,
    points: &[f64],
    st: &StencilSpec,
    h_mult: f64,
) -> Result<Cplx> {
    let f0 = f.sample(points, Marked::Infinity)?;
    let hj = step_for(st, points, Marked::Infinity, Var::Growth(j), h_mult);
    let mut acc = partial(f, points, Marked::Infinity, Var::Growth(j), 2, st.order, hj)?
        * (kappa.kappa / 2.0);
    for k in 0..points.len() {
        if k == j {
            continue;
        }
        let half = (points[k] - points[j]) / 2.0;
        let hk = step_for(st, points, Marked::Infinity, Var::Growth(k), h_mult);
        acc += partial(f, points, Marked::Infinity, Var::Growth(k), 1, st.order, hk)?
            * (half.cos() / half.sin());
        acc -= f0 * (kappa.h() / 2.0) / (half.sin() * half.sin());
    }
    Ok(acc)
}

pub fn commutator_residual_l<F: SampleFn + ?Sized>(
    g: &F,
    kappa: &KappaParams,
    i: usize,
    j: usize,
    points: &[f64],
    st: &StencilSpec,
) -> Result<LCommutatorReport> {
    if i == j {
        return Ok(LCommutatorReport { rational: 0.0, trig: 0.0 });
    }
    let dx = points[i] - points[j];

    let inner_j = |p: &[f64], _mk: Marked| apply_l_scaled(g, kappa, j, p, st, 1.0);
    let inner_i = |p: &[f64], _mk: Marked| apply_l_scaled(g, kappa, i, p, st, 1.0);
    let lij = apply_l_scaled(&inner_j, kappa, i, points, st, 4.0)?;
    let lji = apply_l_scaled(&inner_i, kappa, j, points, st, 4.0)?;
    let lj = apply_l_scaled(g, kappa, j, points, st, 1.0)?;
    let li = apply_l_scaled(g, kappa, i, points, st, 1.0)?;
    let rhs = (lj - li) * (4.0 / (dx * dx));
    let rational = ((lij - lji) - rhs).norm() / (1.0 + lij.norm() + lji.norm());

    let tinner_j = |p: &[f64], _mk: Marked| apply_l_trig(g, kappa, j, p, st, 1.0);
    let tinner_i = |p: &[f64], _mk: Marked| apply_l_trig(g, kappa, i, p, st, 1.0);
    let tij = apply_l_trig(&tinner_j, kappa, i, points, st, 4.0)?;
    let tji = apply_l_trig(&tinner_i, kappa, j, points, st, 4.0)?;
    let tj = apply_l_trig(g, kappa, j, points, st, 1.0)?;
    let ti = apply_l_trig(g, kappa, i, points, st, 1.0)?;
    let half = dx / 2.0;
    let trhs = (tj - ti) * (1.0 / (half.sin() * half.sin()));
    let trig = ((tij - tji) - trhs).norm() / (1.0 + tij.norm() + tji.norm());

    Ok(LCommutatorReport { rational, trig })
}

/// Residual of the conjugation of the summed null-vector operators to the
/// Calogero-Moser Hamiltonian:
/// Phi^{-1} (sum_j L_j)(Phi g)
///     = (kappa/2) sum_j d^2_j g + (4 - 16/kappa) sum_{j<k} (x_j - x_k)^{-2} g,
/// with Phi = prod_{j<k} |x_j - x_k|^{-2/kappa}.
pub fn cm_conjugation_residual<F: SampleFn + ?Sized>(
    g: &F,
    kappa: &KappaParams,
    points: &[f64],
    st: &StencilSpec,
) -> Result<f64> {
    let exponent = -2.0 / kappa.kappa;
    let ln_phi = |p: &[f64]| -> f64 {
        let mut s = 0.0;
        for j in 0..p.len() {
            for k in (j + 1)..p.len() {
                s += exponent * (p[j] - p[k]).abs().ln();
            }
        }
        s
    };
    let ln_phi0 = ln_phi(points);
    let conj = |p: &[f64], mk: Marked| -> Result<Cplx> {
        // Relative weight keeps the conjugated samples near unit size.
        Ok(g.sample(p, mk)? * (ln_phi(p) - ln_phi0).exp())
    };
    let mut lhs = Cplx::new(0.0, 0.0);
    for j in 0..points.len() {
        lhs += apply_l_scaled(&conj, kappa, j, points, st, 1.0)?;
    }
    let mut rhs = Cplx::new(0.0, 0.0);
    for j in 0..points.len() {
        let h = step_for(st, points, Marked::Infinity, Var::Growth(j), 1.0);
        rhs += partial(g, points, Marked::Infinity, Var::Growth(j), 2, st.order, h)?
            * (kappa.kappa / 2.0);
    }
    let g0 = g.sample(points, Marked::Infinity)?;
    let coupling = 4.0 - 16.0 / kappa.kappa;
    for j in 0..points.len() {
        for k in (j + 1)..points.len() {
            let dx = points[j] - points[k];
            rhs += g0 * (coupling / (dx * dx));
        }
    }
    Ok((lhs - rhs).norm() / (1.0 + rhs.norm()))
}
