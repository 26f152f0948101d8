//! κ-derived Coulomb-gas constants and conformal dimensions.
//!
//! Conventions: the boundary charge is a = √(2/κ) (so that a pair of
//! boundary points carries the exponent a² = 2/κ and a screening charge
//! −2a against a boundary point carries −2a·a = −4/κ), the background
//! charge is b = a(κ−4)/4, the Calogero-Moser coupling is β = 8/κ, and the
//! central charge is c(κ) = (3κ−8)(6−κ)/(2κ).  A charge σ placed at a
//! boundary point has conformal dimension λ(σ) = σ²/2 − σb.

use serde::Serialize;

use crate::error::{Result, SleError};

/// κ together with the derived Coulomb-gas constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KappaParams {
    pub kappa: f64,
    /// Boundary charge a = √(2/κ).
    pub a: f64,
    /// Background charge b = a(κ−4)/4.
    pub b: f64,
    /// Calogero-Moser coupling β = 8/κ.
    pub beta: f64,
    /// Central charge c(κ) = (3κ−8)(6−κ)/(2κ).
    pub central_charge: f64,
}

/// Builds the derived constants for a given κ.
pub fn make_kappa_params(kappa: f64) -> Result<KappaParams> {
    KappaParams::new(kappa)
}

impl KappaParams {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(SleError::NonPositiveKappa(kappa));
        }
        let a = (2.0 / kappa).sqrt();
        Ok(Self {
            kappa,
            a,
            b: a * (kappa - 4.0) / 4.0,
            beta: 8.0 / kappa,
            central_charge: (3.0 * kappa - 8.0) * (6.0 - kappa) / (2.0 * kappa),
        })
    }

    /// Boundary dimension h = (6−κ)/(2κ) of each growth point.
    pub fn h(&self) -> f64 {
        (6.0 - self.kappa) / (2.0 * self.kappa)
    }

    /// Dimension λ(σ) = σ²/2 − σb of a charge σ.
    pub fn lambda_of_sigma(&self, sigma: f64) -> f64 {
        sigma * sigma / 2.0 - sigma * self.b
    }

    /// Charge at the marked point for the ground solution with n points
    /// and m screening charges: σ_u = 2b − (n−2m)a (neutrality).
    pub fn sigma_u_ground(&self, n: usize, m: usize) -> f64 {
        2.0 * self.b - (n as f64 - 2.0 * m as f64) * self.a
    }

    /// Charge at the marked point for the excited solution (one extra
    /// screening charge 2(a+b)): σ_u = 2b − (n−2m)a − 2(a+b).
    pub fn sigma_u_excited(&self, n: usize, m: usize) -> f64 {
        self.sigma_u_ground(n, m) - 2.0 * (self.a + self.b)
    }

    /// Closed form for the ground-state dimension at the marked point:
    /// λ = (2m−n)²/κ − 2(2m−n)/κ + (2m−n)/2.
    pub fn lambda_ground_closed(&self, n: usize, m: usize) -> f64 {
        let s = 2.0 * m as f64 - n as f64;
        s * s / self.kappa - 2.0 * s / self.kappa + s / 2.0
    }

    /// Closed form for the excited dimension at the marked point:
    /// λ = (2m−n)(2m−n−2)/κ − (2m−n−2)/2.
    pub fn lambda_excited_closed(&self, n: usize, m: usize) -> f64 {
        let s = 2.0 * m as f64 - n as f64;
        s * (s - 2.0) / self.kappa - (s - 2.0) / 2.0
    }

    /// Dilatation constant d = n(κ−6)/(2κ) − λ = −n·h − λ for a solution
    /// whose marked-point dimension is λ.
    pub fn dilatation_constant(&self, n: usize, lambda_u: f64) -> f64 {
        -(n as f64) * self.h() - lambda_u
    }

    /// True when the per-variable slit-reduction phase 1 − e^{−2πi·4/κ}
    /// vanishes, i.e. 4/κ is an integer (κ = 4, 2, 4/3, ...).  At these κ
    /// a Pochhammer cycle collapses and the screening variable is realized
    /// as a residue circle instead.
    pub fn is_degenerate(&self) -> bool {
        let t = 4.0 / self.kappa;
        (t - t.round()).abs() < 1e-9
    }

    /// True when 8/κ is an integer but 4/κ is not (κ = 8, 8/3, 8/5, ...).
    /// The Pochhammer cycle of the ground integrand is then null for some
    /// link patterns and the screening variable is realized as a chain to
    /// +i∞ instead.
    pub fn is_resonant(&self) -> bool {
        let t = 8.0 / self.kappa;
        (t - t.round()).abs() < 1e-9 && !self.is_degenerate()
    }
}

/// Charges and dimensions at the marked point for one (n, m) sector.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChargeReport {
    pub n: usize,
    pub m: usize,
    pub sigma_u_ground: f64,
    pub lambda_ground: f64,
    pub sigma_u_excited: f64,
    pub lambda_excited: f64,
}

/// Computes σ_u and λ(σ_u) for both sectors and checks them against the
/// independent closed forms; a mismatch beyond 1e−12 signals a wrong
/// charge convention.
pub fn verify_charge_conventions(params: &KappaParams, n: usize, m: usize) -> Result<ChargeReport> {
    if m < 1 || 2 * m > n {
        return Err(SleError::BadPatternShape { n, m });
    }
    let sigma_g = params.sigma_u_ground(n, m);
    let sigma_e = params.sigma_u_excited(n, m);
    let lambda_g = params.lambda_of_sigma(sigma_g);
    let lambda_e = params.lambda_of_sigma(sigma_e);
    let closed_g = params.lambda_ground_closed(n, m);
    let closed_e = params.lambda_excited_closed(n, m);
    let tol = 1e-12;
    let err_g = (lambda_g - closed_g).abs();
    let err_e = (lambda_e - closed_e).abs();
    if err_g > tol * closed_g.abs().max(1.0) {
        return Err(SleError::ConventionMismatch {
            n,
            m,
            detail: format!(
                "ground: lambda(sigma)={lambda_g:.15e} vs closed form {closed_g:.15e}"
            ),
        });
    }
    if err_e > tol * closed_e.abs().max(1.0) {
        return Err(SleError::ConventionMismatch {
            n,
            m,
            detail: format!(
                "excited: lambda(sigma)={lambda_e:.15e} vs closed form {closed_e:.15e}"
            ),
        });
    }
    Ok(ChargeReport {
        n,
        m,
        sigma_u_ground: sigma_g,
        lambda_ground: lambda_g,
        sigma_u_excited: sigma_e,
        lambda_excited: lambda_e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonpositive_kappa() {
        assert!(make_kappa_params(0.0).is_err());
        assert!(make_kappa_params(-1.0).is_err());
        assert!(make_kappa_params(f64::NAN).is_err());
    }

    #[test]
    fn frozen_constant_table() {
        // Values fixed by solving a^2 = 2/kappa and matching both closed
        // dimension formulas.
        let p4 = make_kappa_params(4.0).unwrap();
        assert!((p4.a - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(p4.b.abs() < 1e-15);
        assert!((p4.beta - 2.0).abs() < 1e-15);
        assert!((p4.central_charge - 1.0).abs() < 1e-15);

        let p2 = make_kappa_params(2.0).unwrap();
        assert!((p2.a - 1.0).abs() < 1e-15);
        assert!((p2.b + 0.5).abs() < 1e-15);
        assert!((p2.beta - 4.0).abs() < 1e-15);
        assert!((p2.central_charge + 2.0).abs() < 1e-15);

        let p83 = make_kappa_params(8.0 / 3.0).unwrap();
        assert!((p83.a - 0.8660254037844386).abs() < 1e-15);
        assert!((p83.b + 0.2886751345948129).abs() < 1e-15);
        assert!((p83.beta - 3.0).abs() < 1e-15);
        assert!(p83.central_charge.abs() < 1e-14);

        assert!(make_kappa_params(6.0).unwrap().central_charge.abs() < 1e-15);
        assert!((make_kappa_params(8.0).unwrap().central_charge + 2.0).abs() < 1e-15);
    }

    #[test]
    fn exponent_relations() {
        for kappa in [2.0, 8.0 / 3.0, 3.0, 4.0, 6.0, 8.0] {
            let p = make_kappa_params(kappa).unwrap();
            assert!((p.a * p.a * kappa - 2.0).abs() < 1e-14);
            assert!(((-2.0 * p.a) * p.a + 4.0 / kappa).abs() < 1e-14);
        }
    }

    #[test]
    fn charge_conventions_examples() {
        let p4 = make_kappa_params(4.0).unwrap();
        let r = verify_charge_conventions(&p4, 2, 1).unwrap();
        assert!(r.lambda_ground.abs() < 1e-14);
        let r = verify_charge_conventions(&p4, 3, 1).unwrap();
        assert!((r.lambda_ground - 0.25).abs() < 1e-14);
        let p6 = make_kappa_params(6.0).unwrap();
        let r = verify_charge_conventions(&p6, 4, 1).unwrap();
        assert!((r.lambda_excited - 10.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn degeneracy_classification() {
        assert!(make_kappa_params(4.0).unwrap().is_degenerate());
        assert!(make_kappa_params(2.0).unwrap().is_degenerate());
        assert!(!make_kappa_params(6.0).unwrap().is_degenerate());
        let p83 = make_kappa_params(8.0 / 3.0).unwrap();
        assert!(p83.is_resonant() && !p83.is_degenerate());
        assert!(make_kappa_params(8.0).unwrap().is_resonant());
        assert!(!make_kappa_params(4.0).unwrap().is_resonant());
        assert!(!make_kappa_params(6.0).unwrap().is_resonant());
    }
}
