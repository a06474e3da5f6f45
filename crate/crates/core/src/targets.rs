//! Target densities `pi_beta ∝ V^{-beta}` and their potentials.
//!
//! The built-in Student families use `V(x) = 1 + |x|²` (isotropic) or
//! `V(x) = 1 + xᵀΣx` with SPD `Σ` (anisotropic); both admit closed-form
//! normalization constants and an exact sampler through the classical
//! normal/chi-square representation. Custom potentials supply their own
//! evaluation callbacks and must declare the smoothness parameters
//! `(alpha, lipschitz, cv)` explicitly — the library never estimates them,
//! because every constant in [`crate::theory`] consumes them and a silent
//! estimate would corrupt bound checks.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::linalg::SpdMatrix;
use crate::rng::Rng;
use crate::special::ln_gamma;
use crate::{Error, Result};

/// Evaluation callback for a custom potential.
pub type PotentialFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
/// Gradient callback for a custom potential (writes into the output slice).
pub type GradientFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// The potential family behind a target density.
#[derive(Clone)]
pub enum PotentialFamily {
    /// `V(x) = 1 + |x|²`.
    IsotropicStudent,
    /// `V(x) = 1 + xᵀΣx` with SPD `Σ` stored with its Cholesky factor.
    AnisotropicStudent(SpdMatrix),
    /// Externally supplied `V` and `∇V`.
    Custom { potential: PotentialFn, gradient: GradientFn },
}

impl std::fmt::Debug for PotentialFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::IsotropicStudent => write!(f, "IsotropicStudent"),
            Self::AnisotropicStudent(m) => write!(f, "AnisotropicStudent(d={})", m.dim()),
            Self::Custom { .. } => write!(f, "Custom"),
        }
    }
}

/// Provenance of a reported quantity: exact value or upper bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Exact,
    UpperBound,
}

/// A heavy-tailed target `pi_beta ∝ V^{-beta}` with its declared smoothness
/// parameters. Immutable after construction and safe to share across chains.
#[derive(Clone, Debug)]
pub struct TargetDensity {
    family: PotentialFamily,
    d: usize,
    beta: f64,
    alpha: f64,
    lipschitz: f64,
    cv: f64,
}

impl TargetDensity {
    /// Isotropic Student target: `V(x) = 1 + |x|²`, `alpha = L = 2`, `cv = 2`.
    pub fn isotropic_student(d: usize, beta: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter { name: "d", value: 0.0, requirement: "d >= 1" });
        }
        if !(beta > 1.0) {
            return Err(Error::InvalidParameter { name: "beta", value: beta, requirement: "beta > 1" });
        }
        Ok(Self {
            family: PotentialFamily::IsotropicStudent,
            d,
            beta,
            alpha: 2.0,
            lipschitz: 2.0,
            cv: 2.0,
        })
    }

    /// Anisotropic Student target: `V(x) = 1 + xᵀΣx`.
    ///
    /// Auto-fills `alpha = 2 λ_min(Σ)`, `L = 2 λ_max(Σ)` and
    /// `cv = 2 λ_max(Σ)/λ_min(Σ)` (the smallest constant with
    /// `|∇V|²/V <= alpha·cv` for this family).
    pub fn anisotropic_student(d: usize, beta: f64, sigma: SpdMatrix) -> Result<Self> {
        if sigma.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: sigma.dim() });
        }
        if !(beta > 1.0) {
            return Err(Error::InvalidParameter { name: "beta", value: beta, requirement: "beta > 1" });
        }
        let (lo, hi) = sigma.eigen_extremes();
        Ok(Self {
            family: PotentialFamily::AnisotropicStudent(sigma),
            d,
            beta,
            alpha: 2.0 * lo,
            lipschitz: 2.0 * hi,
            cv: 2.0 * hi / lo,
        })
    }

    /// Custom potential with explicitly declared `(alpha, lipschitz, cv)`.
    pub fn custom(
        d: usize,
        beta: f64,
        potential: PotentialFn,
        gradient: GradientFn,
        alpha: f64,
        lipschitz: f64,
        cv: f64,
    ) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("lipschitz", lipschitz), ("cv", cv)] {
            if !(v > 0.0) {
                return Err(Error::InvalidParameter { name, value: v, requirement: "> 0" });
            }
        }
        if !(beta > 1.0) {
            return Err(Error::InvalidParameter { name: "beta", value: beta, requirement: "beta > 1" });
        }
        Ok(Self {
            family: PotentialFamily::Custom { potential, gradient },
            d,
            beta,
            alpha,
            lipschitz,
            cv,
        })
    }

    pub fn family(&self) -> &PotentialFamily {
        &self.family
    }
    pub fn dim(&self) -> usize {
        self.d
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
    pub fn cv(&self) -> f64 {
        self.cv
    }

    pub fn is_student(&self) -> bool {
        !matches!(self.family, PotentialFamily::Custom { .. })
    }

    /// Student families integrate iff `beta > d/2`.
    pub fn is_normalizable(&self) -> bool {
        self.beta > self.d as f64 / 2.0
    }

    /// `E[V]` (and `E[|∇V|²]`) are finite iff `beta > d/2 + 1`.
    pub fn has_finite_v_moment(&self) -> bool {
        self.beta > self.d as f64 / 2.0 + 1.0
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: x.len() });
        }
        Ok(())
    }

    /// Evaluate `V(x)`.
    pub fn potential(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        let v = match &self.family {
            PotentialFamily::IsotropicStudent => {
                1.0 + x.iter().map(|v| v * v).sum::<f64>()
            }
            PotentialFamily::AnisotropicStudent(sigma) => 1.0 + sigma.quadratic_form(x),
            PotentialFamily::Custom { potential, .. } => potential(x),
        };
        if !(v > 0.0) {
            return Err(Error::NonPositivePotential { value: v });
        }
        Ok(v)
    }

    /// Evaluate `∇V(x)` into `out`: `2x` (isotropic), `2Σx` (anisotropic), or
    /// the custom callback.
    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_dim(x)?;
        if out.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: out.len() });
        }
        match &self.family {
            PotentialFamily::IsotropicStudent => {
                for (o, v) in out.iter_mut().zip(x) {
                    *o = 2.0 * v;
                }
            }
            PotentialFamily::AnisotropicStudent(sigma) => {
                sigma.mul_vec(x, out);
                for o in out.iter_mut() {
                    *o *= 2.0;
                }
            }
            PotentialFamily::Custom { gradient, .. } => gradient(x, out),
        }
        Ok(())
    }

    /// Allocating convenience wrapper around [`Self::gradient_into`].
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.d];
        self.gradient_into(x, &mut out)?;
        Ok(out)
    }

    /// Unnormalized log density `-beta · ln V(x)`.
    pub fn log_density_unnormalized(&self, x: &[f64]) -> Result<f64> {
        Ok(-self.beta * self.potential(x)?.ln())
    }

    /// Closed-form normalization constant for Student families.
    pub fn normalization(&self) -> Result<f64> {
        match &self.family {
            PotentialFamily::IsotropicStudent => normalization_isotropic(self.d, self.beta),
            PotentialFamily::AnisotropicStudent(sigma) => {
                normalization_anisotropic(self.d, self.beta, sigma)
            }
            PotentialFamily::Custom { .. } => Err(Error::UnsupportedOracle),
        }
    }

    /// Draw `n` exact samples from a Student-family target.
    ///
    /// Uses the classical representation `X = L⁻ᵀ g / sqrt(w)` with
    /// `g ~ N(0, I_d)`, `w ~ χ²_ν`, `ν = 2 beta - d` and `Σ = L Lᵀ`; then
    /// `xᵀΣx = |g|²/w`, so the radial statistic
    /// `u = xᵀΣx / (1 + xᵀΣx) = |g|²/(|g|² + w)` follows `Beta(d/2, beta - d/2)`
    /// exactly — the property [`crate::metrics::radial_beta_ks`] verifies.
    pub fn reference_sample<R: Rng>(&self, n: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
        if !self.is_student() {
            return Err(Error::UnsupportedOracle);
        }
        if !self.is_normalizable() {
            return Err(Error::NotNormalizable { beta: self.beta, limit: self.d as f64 / 2.0 });
        }
        let nu = 2.0 * self.beta - self.d as f64;
        let mut out = Vec::with_capacity(n);
        let mut g = vec![0.0; self.d];
        for _ in 0..n {
            rng.fill_standard_normal(&mut g);
            let w = rng.chi_square(nu);
            let scale = 1.0 / w.sqrt();
            let y: Vec<f64> = g.iter().map(|v| v * scale).collect();
            let x = match &self.family {
                PotentialFamily::IsotropicStudent => y,
                PotentialFamily::AnisotropicStudent(sigma) => sigma.solve_lt(&y),
                PotentialFamily::Custom { .. } => unreachable!(),
            };
            out.push(x);
        }
        Ok(out)
    }
}

/// `Z_beta = ∫ (1+|x|²)^{-beta} dx = π^{d/2} B(d/2, beta - d/2) / Γ(d/2)`,
/// evaluated in log space.
pub fn normalization_isotropic(d: usize, beta: f64) -> Result<f64> {
    let half_d = d as f64 / 2.0;
    if !(beta > half_d) {
        return Err(Error::NotNormalizable { beta, limit: half_d });
    }
    let ln_z = half_d * PI.ln() + ln_gamma(beta - half_d) - ln_gamma(beta);
    Ok(ln_z.exp())
}

/// `Z_beta = ∫ (1 + xᵀΣx)^{-beta} dx = π^{d/2} Γ(beta - d/2) / (Γ(beta) √det Σ)`.
///
/// The `1/√det Σ` convention was validated against a two-dimensional
/// quadrature oracle: substituting `y = Σ^{1/2} x` maps the integral onto the
/// isotropic one at the cost of `det(Σ)^{-1/2}`, so a wider density (small
/// eigenvalues of `Σ`) has the larger constant.
pub fn normalization_anisotropic(d: usize, beta: f64, sigma: &SpdMatrix) -> Result<f64> {
    if sigma.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: sigma.dim() });
    }
    let half_d = d as f64 / 2.0;
    if !(beta > half_d) {
        return Err(Error::NotNormalizable { beta, limit: half_d });
    }
    let ln_z = half_d * PI.ln() + ln_gamma(beta - half_d) - ln_gamma(beta) - 0.5 * sigma.ln_det();
    Ok(ln_z.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn diag(entries: &[f64]) -> SpdMatrix {
        SpdMatrix::diagonal(entries).unwrap()
    }

    #[test]
    fn potential_closed_forms() {
        let t = TargetDensity::isotropic_student(3, 4.0).unwrap();
        assert_eq!(t.potential(&[0.0, 0.0, 0.0]).unwrap(), 1.0);
        let t2 = TargetDensity::isotropic_student(2, 4.0).unwrap();
        assert_eq!(t2.potential(&[1.0, 1.0]).unwrap(), 3.0);
        let a = TargetDensity::anisotropic_student(2, 2.0, diag(&[1.0, 4.0])).unwrap();
        assert_eq!(a.potential(&[1.0, 1.0]).unwrap(), 6.0);
    }

    #[test]
    fn gradient_closed_forms() {
        let t = TargetDensity::isotropic_student(2, 4.0).unwrap();
        assert_eq!(t.gradient(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(t.gradient(&[3.0, -1.0]).unwrap(), vec![6.0, -2.0]);
        let a = TargetDensity::anisotropic_student(2, 2.0, diag(&[1.0, 4.0])).unwrap();
        assert_eq!(a.gradient(&[1.0, 1.0]).unwrap(), vec![2.0, 8.0]);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let t = TargetDensity::isotropic_student(3, 4.0).unwrap();
        assert!(matches!(
            t.potential(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 3, got: 2 })
        ));
        assert!(t.gradient(&[1.0]).is_err());
    }

    #[test]
    fn log_density_values() {
        let t = TargetDensity::isotropic_student(2, 3.0).unwrap();
        assert_eq!(t.log_density_unnormalized(&[0.0, 0.0]).unwrap(), 0.0);
        let got = t.log_density_unnormalized(&[1.0, 0.0]).unwrap();
        assert!((got - (-3.0 * 2.0f64.ln())).abs() < 1e-14);
        let a = TargetDensity::anisotropic_student(2, 2.0, diag(&[1.0, 4.0])).unwrap();
        let got = a.log_density_unnormalized(&[1.0, 1.0]).unwrap();
        assert!((got - (-2.0 * 6.0f64.ln())).abs() < 1e-14);
    }

    #[test]
    fn custom_potential_positivity_guard() {
        let t = TargetDensity::custom(
            1,
            2.0,
            Arc::new(|x: &[f64]| x[0]),
            Arc::new(|_x: &[f64], out: &mut [f64]| out[0] = 1.0),
            1.0,
            1.0,
            1.0,
        )
        .unwrap();
        assert!(t.potential(&[2.0]).is_ok());
        assert!(matches!(t.potential(&[-1.0]), Err(Error::NonPositivePotential { .. })));
    }

    #[test]
    fn anisotropic_autofill_parameters() {
        let a = TargetDensity::anisotropic_student(2, 3.0, diag(&[1.0, 4.0])).unwrap();
        assert!((a.alpha() - 2.0).abs() < 1e-10);
        assert!((a.lipschitz() - 8.0).abs() < 1e-10);
        assert!((a.cv() - 8.0).abs() < 1e-10);
        let iso = TargetDensity::isotropic_student(5, 6.0).unwrap();
        assert_eq!((iso.alpha(), iso.lipschitz(), iso.cv()), (2.0, 2.0, 2.0));
    }

    #[test]
    fn normalization_known_values() {
        // d = 1, beta = 1: ∫ (1+x²)^{-1} dx = π.
        assert!((normalization_isotropic(1, 1.0).unwrap() - PI).abs() < 1e-12);
        // d = 2, beta = 2: π^1 B(1,1)/Γ(1) = π.
        assert!((normalization_isotropic(2, 2.0).unwrap() - PI).abs() < 1e-12);
        assert!(normalization_isotropic(4, 2.0).is_err());
    }

    #[test]
    fn anisotropic_normalization_matches_isotropic_at_identity() {
        for (d, beta) in [(1usize, 1.0), (2, 2.0), (3, 4.5), (10, 11.0)] {
            let iso = normalization_isotropic(d, beta).unwrap();
            let ani = normalization_anisotropic(d, beta, &SpdMatrix::identity(d)).unwrap();
            assert!((iso - ani).abs() < 1e-12 * iso);
        }
    }

    #[test]
    fn reference_sample_requires_student_and_integrability() {
        let t = TargetDensity::custom(
            1,
            2.0,
            Arc::new(|x: &[f64]| 1.0 + x[0] * x[0]),
            Arc::new(|x: &[f64], out: &mut [f64]| out[0] = 2.0 * x[0]),
            2.0,
            2.0,
            2.0,
        )
        .unwrap();
        let mut r = rng::stream(1, 0);
        assert!(matches!(t.reference_sample(10, &mut r), Err(Error::UnsupportedOracle)));
        let bad = TargetDensity::isotropic_student(10, 4.0).unwrap();
        assert!(bad.reference_sample(10, &mut r).is_err());
    }

    #[test]
    fn gradient_matches_central_differences() {
        // 100 random points per family, relative error <= 1e-6.
        let mut r = rng::stream(99, 0);
        let targets = vec![
            TargetDensity::isotropic_student(4, 5.0).unwrap(),
            TargetDensity::anisotropic_student(
                3,
                4.0,
                SpdMatrix::from_row_major(3, vec![2.0, 0.3, 0.1, 0.3, 1.5, 0.2, 0.1, 0.2, 3.0])
                    .unwrap(),
            )
            .unwrap(),
        ];
        for t in targets {
            let d = t.dim();
            for _ in 0..100 {
                let x: Vec<f64> = (0..d).map(|_| 4.0 * r.uniform() - 2.0).collect();
                let grad = t.gradient(&x).unwrap();
                let h = 1e-5;
                for i in 0..d {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[i] += h;
                    xm[i] -= h;
                    let fd =
                        (t.potential(&xp).unwrap() - t.potential(&xm).unwrap()) / (2.0 * h);
                    let denom = grad[i].abs().max(1.0);
                    assert!(
                        (fd - grad[i]).abs() / denom <= 1e-6,
                        "component {i}: fd {fd} vs grad {}",
                        grad[i]
                    );
                }
            }
        }
    }

    #[test]
    fn rotation_equivariance_isotropic() {
        // Rotation by angle θ in a random pair of coordinates.
        let t = TargetDensity::isotropic_student(3, 4.0).unwrap();
        let x = [0.7, -1.2, 0.4];
        let theta = 0.83f64;
        let (c, s) = (theta.cos(), theta.sin());
        let rot = |v: &[f64]| -> Vec<f64> {
            vec![c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]]
        };
        let rx = rot(&x);
        assert!((t.potential(&rx).unwrap() - t.potential(&x).unwrap()).abs() < 1e-12);
        let g = t.gradient(&x).unwrap();
        let grx = t.gradient(&rx).unwrap();
        let rg = rot(&g);
        for i in 0..3 {
            assert!((grx[i] - rg[i]).abs() < 1e-12);
        }
    }
}
