//! Branch-tracked contour quadrature for multivalued integrands.
//!
//! Integrands are products of power factors (z − s)^e with real exponents.
//! Each factor's argument is seeded with the principal branch at the
//! contour's start node and continued node to node by unwinding, so the
//! product is single-valued along the whole plan.  Quadrature uses
//! Gauss-Kronrod 15-7 panels; the embedded Gauss value provides the error
//! estimate, and panels double until the tolerance is met.
//!
//! Three plan shapes cover the screening-variable cycles that appear:
//! - Pochhammer double loops (commutator loops around two anchors),
//! - closed circles (residue cycles and the marked-point circle),
//! - kidney chains (a loop around one anchor with tails to +i∞, used
//!   where the Pochhammer cycle is null).

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Result, SleError};
use crate::Cplx;

/// One power-law singularity (z − base_point)^exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchedFactor {
    pub base_point: Cplx,
    pub exponent: f64,
}

/// Gauss-Kronrod 15-7 nodes on [-1, 1]: (abscissa, Kronrod weight,
/// embedded Gauss weight; 0 where the node is Kronrod-only).
#[allow(clippy::excessive_precision)] // published table digits kept verbatim
const GK15: [(f64, f64, f64); 15] = [
    (-0.991455371120812639206854697526329, 0.022935322010529224963732008058970, 0.0),
    (-0.949107912342758524526189684047851, 0.063092092629978553290700663189204, 0.129484966168869693270611432679082),
    (-0.864864423359769072789712788640926, 0.104790010322250183839876322541518, 0.0),
    (-0.741531185599394439863864773280788, 0.140653259715525918745189590510238, 0.279705391489276667901467771423780),
    (-0.586087235467691130294144838258730, 0.169004726639267902826583426598550, 0.0),
    (-0.405845151377397166906606412076961, 0.190350578064785409913256402421014, 0.381830050505118944950369775488975),
    (-0.207784955007898467600689403773245, 0.204432940075298892414161999234649, 0.0),
    (0.0, 0.209482141084727828012999174891714, 0.417959183673469387755102040816327),
    (0.207784955007898467600689403773245, 0.204432940075298892414161999234649, 0.0),
    (0.405845151377397166906606412076961, 0.190350578064785409913256402421014, 0.381830050505118944950369775488975),
    (0.586087235467691130294144838258730, 0.169004726639267902826583426598550, 0.0),
    (0.741531185599394439863864773280788, 0.140653259715525918745189590510238, 0.279705391489276667901467771423780),
    (0.864864423359769072789712788640926, 0.104790010322250183839876322541518, 0.0),
    (0.949107912342758524526189684047851, 0.063092092629978553290700663189204, 0.129484966168869693270611432679082),
    (0.991455371120812639206854697526329, 0.022935322010529224963732008058970, 0.0),
];

/// A smooth parametrized path segment.
#[derive(Debug, Clone, Copy)]
pub enum Piece {
    Line { a: Cplx, b: Cplx },
    Arc { center: Cplx, radius: f64, th0: f64, th1: f64 },
}

impl Piece {
    pub fn point(&self, t: f64) -> Cplx {
        match *self {
            Piece::Line { a, b } => a + (b - a) * t,
            Piece::Arc { center, radius, th0, th1 } => {
                let th = th0 + (th1 - th0) * t;
                center + radius * Cplx::new(th.cos(), th.sin())
            }
        }
    }

    pub fn derivative(&self, t: f64) -> Cplx {
        match *self {
            Piece::Line { a, b } => b - a,
            Piece::Arc { center: _, radius, th0, th1 } => {
                let th = th0 + (th1 - th0) * t;
                Cplx::new(0.0, th1 - th0) * radius * Cplx::new(th.cos(), th.sin())
            }
        }
    }
}

/// Shape tag of a plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlanKind {
    Pochhammer { left: Cplx, right: Cplx },
    Circle { center: Cplx, radius: f64 },
    Kidney { anchor: Cplx },
}

/// A discretized contour: pieces plus a base panel count per piece.
/// Refinement depth d samples each piece with base_panels << d panels.
#[derive(Debug, Clone)]
pub struct ContourPlan {
    pub kind: PlanKind,
    pieces: Vec<Piece>,
    base_panels: Vec<usize>,
    pub refinement_depth: u32,
    closed: bool,
}

/// Flattened quadrature nodes of a plan at one refinement depth.
#[derive(Debug, Clone)]
pub struct PlanNodes {
    /// Sample points, ordered along the contour.
    pub z: Vec<Cplx>,
    /// Kronrod weights (including the parametrization derivative).
    pub w_kronrod: Vec<Cplx>,
    /// Embedded Gauss weights (zero on Kronrod-only nodes).
    pub w_gauss: Vec<Cplx>,
}

impl ContourPlan {
    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Start point of the contour (branch seeds are principal here).
    pub fn start(&self) -> Cplx {
        self.pieces[0].point(0.0)
    }

    pub fn nodes(&self, extra_depth: u32) -> PlanNodes {
        let depth = self.refinement_depth + extra_depth;
        let mut z = Vec::new();
        let mut wk = Vec::new();
        let mut wg = Vec::new();
        for (piece, &base) in self.pieces.iter().zip(&self.base_panels) {
            let panels = base << depth;
            let dt = 1.0 / panels as f64;
            for p in 0..panels {
                let mid = (p as f64 + 0.5) * dt;
                let half = 0.5 * dt;
                for &(t, wkk, wgg) in &GK15 {
                    let tt = mid + half * t;
                    z.push(piece.point(tt));
                    let dz = piece.derivative(tt) * half;
                    wk.push(dz * wkk);
                    wg.push(dz * wgg);
                }
            }
        }
        PlanNodes { z, w_kronrod: wk, w_gauss: wg }
    }

    /// A Pochhammer double loop: counterclockwise around `left`, then
    /// `right`, then clockwise around each, connected through a corridor
    /// at height `h` and based at left + i·h.
    pub fn pochhammer(left: Cplx, right: Cplx, r: f64, h: f64) -> Self {
        let i = Cplx::new(0.0, 1.0);
        let (lt, rt) = (left + i * r, right + i * r);
        let (lh, rh) = (left + i * h, right + i * h);
        let ccw = std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI;
        let cw = std::f64::consts::FRAC_PI_2 - 2.0 * std::f64::consts::PI;
        let top = std::f64::consts::FRAC_PI_2;
        let pieces = vec![
            Piece::Line { a: lh, b: lt },
            Piece::Arc { center: left, radius: r, th0: top, th1: ccw },
            Piece::Line { a: lt, b: lh },
            Piece::Line { a: lh, b: rh },
            Piece::Line { a: rh, b: rt },
            Piece::Arc { center: right, radius: r, th0: top, th1: ccw },
            Piece::Line { a: rt, b: rh },
            Piece::Line { a: rh, b: lh },
            Piece::Line { a: lh, b: lt },
            Piece::Arc { center: left, radius: r, th0: top, th1: cw },
            Piece::Line { a: lt, b: lh },
            Piece::Line { a: lh, b: rh },
            Piece::Line { a: rh, b: rt },
            Piece::Arc { center: right, radius: r, th0: top, th1: cw },
            Piece::Line { a: rt, b: rh },
            Piece::Line { a: rh, b: lh },
        ];
        let base_panels = pieces
            .iter()
            .map(|p| match p {
                Piece::Arc { .. } => 10,
                Piece::Line { .. } => 3,
            })
            .collect();
        Self {
            kind: PlanKind::Pochhammer { left, right },
            pieces,
            base_panels,
            refinement_depth: 0,
            closed: true,
        }
    }

    /// A counterclockwise circle, starting and closing at the top.
    pub fn circle(center: Cplx, radius: f64) -> Self {
        let top = std::f64::consts::FRAC_PI_2;
        Self {
            kind: PlanKind::Circle { center, radius },
            pieces: vec![Piece::Arc {
                center,
                radius,
                th0: top,
                th1: top + 2.0 * std::f64::consts::PI,
            }],
            base_panels: vec![12],
            refinement_depth: 0,
            closed: true,
        }
    }

    /// A kidney chain: tail from +i∞ down to the anchor, one
    /// counterclockwise loop, tail back to +i∞.  Open cycle; valid when
    /// the integrand decays at +i∞.
    pub fn kidney(anchor: Cplx, r: f64, h_tail: f64) -> Self {
        let i = Cplx::new(0.0, 1.0);
        let decades = 10usize;
        let per_decade = 3usize;
        let segs = decades * per_decade;
        let height = |k: usize| h_tail * 10f64.powf(k as f64 / per_decade as f64);
        let mut pieces = Vec::new();
        let mut base_panels = Vec::new();
        for k in (1..=segs).rev() {
            pieces.push(Piece::Line { a: anchor + i * height(k), b: anchor + i * height(k - 1) });
            base_panels.push(1);
        }
        pieces.push(Piece::Line { a: anchor + i * h_tail, b: anchor + i * r });
        base_panels.push(2);
        let top = std::f64::consts::FRAC_PI_2;
        pieces.push(Piece::Arc {
            center: anchor,
            radius: r,
            th0: top,
            th1: top + 2.0 * std::f64::consts::PI,
        });
        base_panels.push(12);
        pieces.push(Piece::Line { a: anchor + i * r, b: anchor + i * h_tail });
        base_panels.push(2);
        for k in 1..=segs {
            pieces.push(Piece::Line { a: anchor + i * height(k - 1), b: anchor + i * height(k) });
            base_panels.push(1);
        }
        Self {
            kind: PlanKind::Kidney { anchor },
            pieces,
            base_panels,
            refinement_depth: 0,
            closed: false,
        }
    }
}

/// Builds a Pochhammer plan that keeps a `clearance` margin from both
/// anchors and from every singularity in `avoid`.
pub fn build_pochhammer(
    left: Cplx,
    right: Cplx,
    clearance: f64,
    avoid: &[Cplx],
) -> Result<ContourPlan> {
    let sep = (right - left).norm();
    if sep == 0.0 {
        return Err(SleError::Geometry("anchors coincide".into()));
    }
    if !(clearance > 0.0) || clearance >= sep / 4.0 {
        return Err(SleError::Geometry(format!(
            "clearance {clearance} must lie in (0, |left-right|/4 = {})",
            sep / 4.0
        )));
    }
    let h = (1.5 * clearance).max(0.45 * sep);
    let plan = ContourPlan::pochhammer(left, right, clearance, h);
    let nodes = plan.nodes(0);
    for &s in avoid {
        let d = nodes.z.iter().map(|&z| (z - s).norm()).fold(f64::INFINITY, f64::min);
        if d < 0.98 * clearance {
            return Err(SleError::Geometry(format!(
                "singularity at {s} is within clearance {clearance} of the contour (distance {d:.3e})"
            )));
        }
    }
    Ok(plan)
}

/// Continuously unwound complex logarithms of (z_k − base) along a node
/// sequence.  The first node takes the principal branch unless `seed_arg`
/// overrides it; consecutive nodes must subtend less than π.
pub fn branch_logs(
    z: &[Cplx],
    factor: &BranchedFactor,
    seed_arg: Option<f64>,
) -> Result<Vec<Cplx>> {
    let mut out = Vec::with_capacity(z.len());
    let mut prev = z[0] - factor.base_point;
    if prev == Complex64::new(0.0, 0.0) {
        return Err(SleError::SingularInput(
            "contour passes through a singularity".into(),
        ));
    }
    let mut arg = seed_arg.unwrap_or_else(|| prev.arg());
    out.push(Cplx::new(0.5 * prev.norm_sqr().ln(), arg));
    for &zk in &z[1..] {
        let w = zk - factor.base_point;
        if w == Complex64::new(0.0, 0.0) {
            return Err(SleError::SingularInput(
                "contour passes through a singularity".into(),
            ));
        }
        let step = (w * prev.conj()).arg();
        if step.abs() > 3.1 {
            return Err(SleError::Geometry(
                "node spacing too coarse for branch continuity".into(),
            ));
        }
        arg += step;
        out.push(Cplx::new(0.5 * w.norm_sqr().ln(), arg));
        prev = w;
    }
    Ok(out)
}

/// Net winding (in turns) of a closed node loop around a point,
/// including the wrap-around step.
pub fn winding_turns(z: &[Cplx], point: Cplx) -> Result<f64> {
    let turns = cumulative_turns(z, point)?;
    let last = *turns.last().unwrap();
    let wrap = ((z[0] - point) * (z[z.len() - 1] - point).conj()).arg();
    Ok(last + wrap / (2.0 * std::f64::consts::PI))
}

/// Cumulative winding profile (in turns) of a node sequence around a
/// point, starting at 0.
pub fn cumulative_turns(z: &[Cplx], point: Cplx) -> Result<Vec<f64>> {
    let logs = branch_logs(z, &BranchedFactor { base_point: point, exponent: 1.0 }, None)?;
    let a0 = logs[0].im;
    Ok(logs
        .iter()
        .map(|l| (l.im - a0) / (2.0 * std::f64::consts::PI))
        .collect())
}

/// Quadrature outcome.
#[derive(Debug, Clone, Copy)]
pub struct IntegralResult {
    pub value: Cplx,
    pub abs_error_estimate: f64,
    pub nodes_used: usize,
}

const MAX_EXTRA_DEPTH: u32 = 4;

/// Integrates smooth(z) · Π (z − sₖ)^{eₖ} along the plan.
///
/// Branches are seeded principal at the start node and continued along
/// the contour.  Panels double until the embedded Gauss-Kronrod error
/// estimate drops below `tol`; exhausting refinement returns a
/// non-convergence error carrying the best estimate.
pub fn integrate<F>(
    plan: &ContourPlan,
    factors: &[BranchedFactor],
    smooth: F,
    tol: f64,
) -> Result<IntegralResult>
where
    F: Fn(Cplx) -> Cplx + Sync,
{
    let mut best: Option<IntegralResult> = None;
    for extra in 0..=MAX_EXTRA_DEPTH {
        let nodes = plan.nodes(extra);
        let mut logs = vec![Cplx::new(0.0, 0.0); nodes.z.len()];
        for fac in factors {
            let fl = branch_logs(&nodes.z, fac, None)?;
            for (acc, l) in logs.iter_mut().zip(&fl) {
                *acc += l * fac.exponent;
            }
        }
        let vals: Vec<Cplx> = nodes
            .z
            .par_iter()
            .zip(logs.par_iter())
            .map(|(&z, &l)| l.exp() * smooth(z))
            .collect();
        let mut vk = Cplx::new(0.0, 0.0);
        let mut vg = Cplx::new(0.0, 0.0);
        for ((v, wk), wg) in vals.iter().zip(&nodes.w_kronrod).zip(&nodes.w_gauss) {
            vk += v * wk;
            vg += v * wg;
        }
        let err = (vk - vg).norm();
        let res = IntegralResult { value: vk, abs_error_estimate: err, nodes_used: nodes.z.len() };
        if err <= tol {
            return Ok(res);
        }
        if best.is_none_or(|b| err < b.abs_error_estimate) {
            best = Some(res);
        }
    }
    Err(SleError::NonConvergence {
        tol,
        best: best.map(|b| b.abs_error_estimate).unwrap_or(f64::INFINITY),
    })
}

/// Phase factor (1 − e^{2πip})(1 − e^{2πiq}) relating the Pochhammer
/// integral of z^p (1−z)^q to the principal-branch integral over the
/// real slit between the anchors.  Requires p, q > −1 so that the real
/// integral converges.
pub fn reduce_to_slit(p: f64, q: f64) -> Result<Cplx> {
    if p <= -1.0 || q <= -1.0 {
        return Err(SleError::ReductionUnavailable { p, q });
    }
    let e = |t: f64| Cplx::new(0.0, 2.0 * std::f64::consts::PI * t).exp();
    Ok((Cplx::new(1.0, 0.0) - e(p)) * (Cplx::new(1.0, 0.0) - e(q)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Cplx {
        Cplx::new(re, im)
    }

    #[test]
    fn pochhammer_windings_cancel() {
        let plan = build_pochhammer(c(0.0, 0.0), c(1.0, 0.0), 0.1, &[]).unwrap();
        let nodes = plan.nodes(0);
        for anchor in [c(0.0, 0.0), c(1.0, 0.0)] {
            let w = winding_turns(&nodes.z, anchor).unwrap();
            assert!(w.abs() < 1e-9, "net winding {w}");
            let profile = cumulative_turns(&nodes.z, anchor).unwrap();
            let max = profile.iter().cloned().fold(f64::MIN, f64::max);
            let min = profile.iter().cloned().fold(f64::MAX, f64::min);
            assert!(max > 0.9, "profile never loops positively: max {max}");
            assert!(min < -0.05, "profile never returns below start: min {min}");
        }
    }

    #[test]
    fn closed_contour_of_entire_function_vanishes() {
        let plan = build_pochhammer(c(0.0, 0.0), c(1.0, 0.0), 0.1, &[]).unwrap();
        let r = integrate(&plan, &[], |_| Cplx::new(1.0, 0.0), 1e-10).unwrap();
        assert!(r.value.norm() < 1e-10, "got {}", r.value);

        let r = integrate(
            &plan,
            &[
                BranchedFactor { base_point: c(0.0, 0.0), exponent: 0.0 },
                BranchedFactor { base_point: c(1.0, 0.0), exponent: 0.0 },
            ],
            |z| z * z + Cplx::new(3.0, 1.0),
            1e-10,
        )
        .unwrap();
        assert!(r.value.norm() < 1e-9);
    }

    #[test]
    fn beta_half_half_modulus() {
        // Pochhammer integral of z^{-1/2}(1-z)^{-1/2}; the slit reduction
        // gives |(1-e^{-iπ})^2 · B(1/2,1/2)| = 4π.
        let plan = build_pochhammer(c(0.0, 0.0), c(1.0, 0.0), 0.12, &[]).unwrap();
        let r = integrate(
            &plan,
            &[
                BranchedFactor { base_point: c(0.0, 0.0), exponent: -0.5 },
                BranchedFactor { base_point: c(1.0, 0.0), exponent: -0.5 },
            ],
            |_| Cplx::new(1.0, 0.0),
            1e-9,
        )
        .unwrap();
        let target = 4.0 * std::f64::consts::PI;
        assert!(
            (r.value.norm() - target).abs() < 1e-8,
            "|I| = {}, want {target}",
            r.value.norm()
        );
    }

    #[test]
    fn circle_residue() {
        let plan = ContourPlan::circle(c(0.3, 0.0), 0.05);
        let r = integrate(
            &plan,
            &[BranchedFactor { base_point: c(0.3, 0.0), exponent: -1.0 }],
            |_| Cplx::new(1.0, 0.0),
            1e-10,
        )
        .unwrap();
        let expect = c(0.0, 2.0 * std::f64::consts::PI);
        assert!((r.value - expect).norm() < 1e-10, "got {}", r.value);
    }

    #[test]
    fn reduce_to_slit_values() {
        let v = reduce_to_slit(-0.5, -0.5).unwrap();
        assert!((v - c(4.0, 0.0)).norm() < 1e-12);
        let v = reduce_to_slit(0.0, 0.0).unwrap();
        assert!(v.norm() < 1e-12);
        let v = reduce_to_slit(1.0 / 3.0, 0.0).unwrap();
        assert!(v.norm() < 1e-12);
        assert!(reduce_to_slit(-1.0, 0.5).is_err());
        assert!(reduce_to_slit(0.5, -1.5).is_err());
    }

    #[test]
    fn clearance_validation() {
        assert!(build_pochhammer(c(0.0, 0.0), c(1.0, 0.0), 0.3, &[]).is_err());
        assert!(build_pochhammer(c(0.0, 0.0), c(1.0, 0.0), 0.1, &[c(0.5, 0.0)]).is_ok());
        // A singularity hugging an anchor forces a geometry error.
        assert!(build_pochhammer(c(0.0, 0.0), c(1.0, 0.0), 0.1, &[c(0.05, 0.0)]).is_err());
    }
}
