//! Closed-form constants for the weighted-diffusion samplers.
//!
//! Everything here is pure arithmetic on the target parameters
//! `(d, beta, alpha, L, cv)` and the stationary moments `E[V]`, `E[|∇V|²]`:
//! step-size stability limits, the per-step contraction triple `(A, B, C)` of
//! the first-order chain and `(A', B', C')` of the zeroth-order chain, the
//! accuracy-driven step-size and iteration-count rules, weighted Poincaré
//! constants with their chi-square decay rates, dissipativity constants, and
//! moment bounds for targets without closed-form moments. When a hypothesis
//! fails the functions return errors (and [`TheoryReport`] marks the quantity
//! absent) rather than extrapolating.

use crate::linalg::SpdMatrix;
use crate::special::ln_gamma;
use crate::targets::Provenance;
use crate::{Error, Result};

/// Contraction margin `delta = (beta - 1 - cv·d/4) / (cv·d/4)`.
///
/// Positivity is the sufficient condition under which the weighted diffusion
/// is uniformly dissipative and the mean-square contraction below applies.
pub fn delta(beta: f64, d: usize, cv: f64) -> Result<f64> {
    if !(cv > 0.0) {
        return Err(Error::InvalidParameter { name: "cv", value: cv, requirement: "cv > 0" });
    }
    if d == 0 {
        return Err(Error::InvalidParameter { name: "d", value: 0.0, requirement: "d >= 1" });
    }
    let quarter = cv * d as f64 / 4.0;
    let value = (beta - 1.0 - quarter) / quarter;
    if value <= 0.0 {
        return Err(Error::Inapplicable {
            what: "contraction margin delta",
            detail: "requires beta > 1 + cv*d/4",
            value,
        });
    }
    Ok(value)
}

/// Step-size stability limit for the first-order chain:
/// `h < min( 1/(4(beta-1)L), 2·delta/(3(1+delta)·alpha·(beta-1)) )`.
pub fn first_order_step_bound(alpha: f64, lipschitz: f64, beta: f64, delta: f64) -> Result<f64> {
    require_positive_delta(delta)?;
    let b1 = beta - 1.0;
    Ok((1.0 / (4.0 * b1 * lipschitz)).min(2.0 * delta / (3.0 * (1.0 + delta) * alpha * b1)))
}

fn require_positive_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0) {
        return Err(Error::Inapplicable {
            what: "contraction margin delta",
            detail: "requires delta > 0",
            value: delta,
        });
    }
    Ok(())
}

/// Per-step contraction parameters of the first-order chain.
///
/// `A` is the dimensionless per-step contraction; `B` collects the stochastic
/// (half-order) bias and `C` the drift (first-order) bias, both in length
/// units. The Wasserstein-2 recursion they satisfy is
/// `W2_k <= (1-A)^k W2_0 + C/A + B/sqrt(A(2-A))`.
#[derive(Clone, Copy, Debug)]
pub struct ContractionParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub h: f64,
}

impl ContractionParams {
    /// Asymptotic bias floor `C/A + B/sqrt(A(2-A))`.
    pub fn bias_floor(&self) -> f64 {
        self.c / self.a + self.b / (self.a * (2.0 - self.a)).sqrt()
    }

    /// The full bound after `k` steps from an initial distance `w2_init`.
    pub fn w2_bound(&self, k: u64, w2_init: f64) -> f64 {
        (1.0 - self.a).powi(k as i32) * w2_init + self.bias_floor()
    }
}

/// Compute `(A, B, C)` at step size `h` given the stationary moments
/// `ev = E[V]` and `egrad2 = E[|∇V|²]` (exact values or upper bounds):
///
/// ```text
/// A = alpha (beta-1) delta h / (3 (1+delta))
/// B = 4 sqrt(alpha (beta-1) (3+delta) / ((1+delta) delta)) · h
///       · ( sqrt(d·ev) + (beta-1) sqrt(h) sqrt(egrad2) )
/// C = 3 sqrt(d) (beta-1) L h^{3/2} sqrt(ev) + 2 (beta-1)² L h² sqrt(egrad2)
/// ```
#[allow(clippy::too_many_arguments)]
pub fn contraction_params(
    h: f64,
    alpha: f64,
    lipschitz: f64,
    beta: f64,
    delta: f64,
    d: usize,
    ev: f64,
    egrad2: f64,
) -> Result<ContractionParams> {
    let bound = first_order_step_bound(alpha, lipschitz, beta, delta)?;
    if !(h > 0.0 && h <= bound) {
        return Err(Error::InvalidParameter {
            name: "h",
            value: h,
            requirement: "0 < h <= first_order_step_bound",
        });
    }
    let b1 = beta - 1.0;
    let df = d as f64;
    let a = alpha * b1 * delta * h / (3.0 * (1.0 + delta));
    let b = 4.0 * (alpha * b1 * (3.0 + delta) / ((1.0 + delta) * delta)).sqrt()
        * h
        * ((df * ev).sqrt() + b1 * h.sqrt() * egrad2.sqrt());
    let c = 3.0 * df.sqrt() * b1 * lipschitz * h.powf(1.5) * ev.sqrt()
        + 2.0 * b1 * b1 * lipschitz * h * h * egrad2.sqrt();
    Ok(ContractionParams { a, b, c, h })
}

/// Explicit Wasserstein-2 bound `(1-A)^k · w2_init + C/A + B/sqrt(A(2-A))`.
pub fn w2_bound(k: u64, w2_init: f64, params: &ContractionParams) -> f64 {
    params.w2_bound(k, w2_init)
}

/// Step size sufficient for the bias floor to sit below `eps/2`:
///
/// ```text
/// h* = min( delta² eps² / (81 d (delta+3)² (1+L/alpha)² ev),
///           delta eps / (81 (beta-1) (delta+3) (1+L/alpha) sqrt(egrad2)) )
/// ```
///
/// clipped to [`first_order_step_bound`].
#[allow(clippy::too_many_arguments)]
pub fn step_size_for_accuracy(
    eps: f64,
    d: usize,
    beta: f64,
    alpha: f64,
    lipschitz: f64,
    delta: f64,
    ev: f64,
    egrad2: f64,
) -> Result<f64> {
    require_positive_delta(delta)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter { name: "eps", value: eps, requirement: "eps > 0" });
    }
    let b1 = beta - 1.0;
    let ratio = 1.0 + lipschitz / alpha;
    let first = delta * delta * eps * eps
        / (81.0 * d as f64 * (delta + 3.0) * (delta + 3.0) * ratio * ratio * ev);
    let second = delta * eps / (81.0 * b1 * (delta + 3.0) * ratio * egrad2.sqrt());
    let stability = first_order_step_bound(alpha, lipschitz, beta, delta)?;
    Ok(first.min(second).min(stability))
}

/// Iterations needed for the transient `(1-A)^k · w2_init` to fall below
/// `eps/2` at step size `h_star`:
/// `K = ceil( 3(1+delta) / (alpha (beta-1) delta h*) · ln(2 w2_init / eps) )`,
/// zero when already converged. Returned as `f64` because `K` can be
/// astronomically large in sweeps.
pub fn iteration_complexity(
    eps: f64,
    w2_init: f64,
    alpha: f64,
    beta: f64,
    delta: f64,
    h_star: f64,
) -> f64 {
    let log_term = (2.0 * w2_init / eps).ln();
    if log_term <= 0.0 {
        return 0.0;
    }
    let k = 3.0 * (1.0 + delta) / (alpha * (beta - 1.0) * delta * h_star) * log_term;
    k.ceil()
}

/// The explicit pre-constant form of the same count, without the ceiling:
/// `3(1+delta)/(alpha (beta-1) delta h*) · K_eps`.
pub fn iteration_complexity_real(
    eps: f64,
    w2_init: f64,
    alpha: f64,
    beta: f64,
    delta: f64,
    h_star: f64,
) -> f64 {
    let log_term = (2.0 * w2_init / eps).ln();
    if log_term <= 0.0 {
        return 0.0;
    }
    3.0 * (1.0 + delta) / (alpha * (beta - 1.0) * delta * h_star) * log_term
}

/// Closed-form upper bound on the iteration count,
/// `273 · max( (delta+3)³ (1+L/alpha)² d ev / (alpha delta³ (beta-1) eps²),
///             (delta+3)² (1+L/alpha) sqrt(egrad2) / (alpha delta² eps) ) · K_eps`.
///
/// It dominates [`iteration_complexity`] whenever the accuracy branch (not
/// the stability clip) determines `h*`; tests compare the two.
#[allow(clippy::too_many_arguments)]
pub fn iteration_complexity_273_bound(
    eps: f64,
    w2_init: f64,
    d: usize,
    beta: f64,
    alpha: f64,
    lipschitz: f64,
    delta: f64,
    ev: f64,
    egrad2: f64,
) -> f64 {
    let log_term = (2.0 * w2_init / eps).ln().max(0.0);
    let ratio = 1.0 + lipschitz / alpha;
    let d3 = delta + 3.0;
    let first = d3.powi(3) * ratio * ratio * d as f64 * ev
        / (alpha * delta.powi(3) * (beta - 1.0) * eps * eps);
    let second = d3 * d3 * ratio * egrad2.sqrt() / (alpha * delta * delta * eps);
    273.0 * first.max(second) * log_term
}

/// Step-size stability limit for the zeroth-order chain with batch size `m`:
/// `h < min( 2 delta/(3(1+delta) alpha (beta-1)),
///           alpha m delta/(24 (1+delta)(beta-1)(d+5) L²),
///           1/(4 (beta-1) L) )`.
pub fn zeroth_order_step_bound(
    alpha: f64,
    lipschitz: f64,
    beta: f64,
    delta: f64,
    d: usize,
    m: u64,
) -> Result<f64> {
    require_positive_delta(delta)?;
    if m == 0 {
        return Err(Error::InvalidParameter { name: "m", value: 0.0, requirement: "m >= 1" });
    }
    let b1 = beta - 1.0;
    let first = 2.0 * delta / (3.0 * (1.0 + delta) * alpha * b1);
    let middle = alpha * m as f64 * delta
        / (24.0 * (1.0 + delta) * b1 * (d as f64 + 5.0) * lipschitz * lipschitz);
    let last = 1.0 / (4.0 * b1 * lipschitz);
    Ok(first.min(middle).min(last))
}

/// Per-step contraction parameters of the zeroth-order chain. `A'` is half of
/// the first-order `A` at the same step size; `B'`/`C'` pick up the smoothing
/// radius `sigma` and batch size `m`.
#[derive(Clone, Copy, Debug)]
pub struct ZeroOrderContractionParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub h: f64,
    pub sigma: f64,
    pub m: u64,
}

impl ZeroOrderContractionParams {
    pub fn bias_floor(&self) -> f64 {
        self.c / self.a + self.b / (self.a * (2.0 - self.a)).sqrt()
    }

    pub fn w2_bound(&self, k: u64, w2_init: f64) -> f64 {
        (1.0 - self.a).powi(k as i32) * w2_init + self.bias_floor()
    }
}

/// Compute `(A', B', C')`:
///
/// ```text
/// A' = alpha (beta-1) delta h / (6 (1+delta))
/// B' = [ 4 sqrt(alpha) (beta-1)^{3/2} sqrt(3+delta) h^{3/2} / sqrt((1+delta) delta)
///        + 2 (beta-1) sqrt(d+5) h / sqrt(m) ] sqrt(egrad2)
///      + 4 sqrt(alpha (beta-1) d (3+delta) / ((1+delta) delta)) h sqrt(ev)
///      + sigma L (beta-1) (d+3)^{3/2} h / sqrt(m)
/// C' = 3 L (beta-1) sqrt(d) h^{3/2} sqrt(ev) + 2 L (beta-1)² h² sqrt(egrad2)
///      + sigma L (beta-1) sqrt(d) h
/// ```
#[allow(clippy::too_many_arguments)]
pub fn zeroth_order_params(
    h: f64,
    sigma: f64,
    m: u64,
    alpha: f64,
    lipschitz: f64,
    beta: f64,
    delta: f64,
    d: usize,
    ev: f64,
    egrad2: f64,
) -> Result<ZeroOrderContractionParams> {
    let bound = zeroth_order_step_bound(alpha, lipschitz, beta, delta, d, m)?;
    if !(h > 0.0 && h <= bound) {
        return Err(Error::InvalidParameter {
            name: "h",
            value: h,
            requirement: "0 < h <= zeroth_order_step_bound",
        });
    }
    if sigma < 0.0 {
        return Err(Error::InvalidParameter { name: "sigma", value: sigma, requirement: ">= 0" });
    }
    let b1 = beta - 1.0;
    let df = d as f64;
    let mf = m as f64;
    let a = alpha * b1 * delta * h / (6.0 * (1.0 + delta));
    let shape = ((3.0 + delta) / ((1.0 + delta) * delta)).sqrt();
    let b = (4.0 * alpha.sqrt() * b1.powf(1.5) * shape * h.powf(1.5)
        + 2.0 * b1 * (df + 5.0).sqrt() * h / mf.sqrt())
        * egrad2.sqrt()
        + 4.0 * alpha.sqrt() * b1.sqrt() * df.sqrt() * shape * h * ev.sqrt()
        + sigma * lipschitz * b1 * (df + 3.0).powf(1.5) * h / mf.sqrt();
    let c = 3.0 * lipschitz * b1 * df.sqrt() * h.powf(1.5) * ev.sqrt()
        + 2.0 * lipschitz * b1 * b1 * h * h * egrad2.sqrt()
        + sigma * lipschitz * b1 * df.sqrt() * h;
    Ok(ZeroOrderContractionParams { a, b, c, h, sigma, m })
}

/// Smoothing radius rule `sigma = eps · delta / sqrt(d)`.
pub fn recommended_sigma(eps: f64, delta: f64, d: usize) -> f64 {
    eps * delta / (d as f64).sqrt()
}

/// Order-level accuracy step-size rule for the zeroth-order chain:
/// `h = min( (eps·delta)²/(d·ev), eps·delta/(d·sqrt(egrad2)),
///           eps²·delta·m/(d²·egrad2) )`, clipped to
/// [`zeroth_order_step_bound`]. The three branches correspond to the
/// stochastic bias, the drift bias and the estimator-variance bias.
#[allow(clippy::too_many_arguments)]
pub fn zeroth_order_step_for_accuracy(
    eps: f64,
    d: usize,
    beta: f64,
    alpha: f64,
    lipschitz: f64,
    delta: f64,
    m: u64,
    ev: f64,
    egrad2: f64,
) -> Result<f64> {
    require_positive_delta(delta)?;
    let df = d as f64;
    let first = (eps * delta) * (eps * delta) / (df * ev);
    let second = eps * delta / (df * egrad2.sqrt());
    let third = eps * eps * delta * m as f64 / (df * df * egrad2);
    let stability = zeroth_order_step_bound(alpha, lipschitz, beta, delta, d, m)?;
    Ok(first.min(second).min(third).min(stability))
}

/// Zeroth-order iteration count at step size `h`: the contraction is `A'=A/2`,
/// and the transient must fall below `eps/3`, so
/// `K = ceil( 6(1+delta)/(alpha (beta-1) delta h) · ln(3 w2_init / eps) )`.
pub fn zeroth_order_iteration_complexity(
    eps: f64,
    w2_init: f64,
    alpha: f64,
    beta: f64,
    delta: f64,
    h: f64,
) -> f64 {
    let log_term = (3.0 * w2_init / eps).ln();
    if log_term <= 0.0 {
        return 0.0;
    }
    (6.0 * (1.0 + delta) / (alpha * (beta - 1.0) * delta * h) * log_term).ceil()
}

/// Weighted Poincaré constant in the strongly convex regime:
/// `C = 1 / (alpha (sqrt(beta+1) - sqrt(cv))²)`, valid for `cv ∈ (0, beta+1)`.
pub fn wpi_constant_strongly_convex(alpha: f64, beta: f64, cv: f64) -> Result<f64> {
    check_cv_window(beta, cv)?;
    let gap = (beta + 1.0).sqrt() - cv.sqrt();
    Ok(1.0 / (alpha * gap * gap))
}

/// Chi-square decay rate in the strongly convex regime:
/// `2 alpha (sqrt(beta+1) - sqrt(cv))²` — exactly `2 /` the constant above.
///
/// Note the continuous-time result also needs `beta > d`; that flag is
/// recorded separately on [`TheoryReport`] rather than enforced here.
pub fn chi2_rate_strongly_convex(alpha: f64, beta: f64, cv: f64) -> Result<f64> {
    check_cv_window(beta, cv)?;
    let gap = (beta + 1.0).sqrt() - cv.sqrt();
    Ok(2.0 * alpha * gap * gap)
}

fn check_cv_window(beta: f64, cv: f64) -> Result<()> {
    if !(cv > 0.0 && cv < beta + 1.0) {
        return Err(Error::Inapplicable {
            what: "weighted Poincare constant",
            detail: "requires 0 < cv < beta + 1",
            value: cv,
        });
    }
    Ok(())
}

/// Weighted Poincaré constant in the small-beta regime:
/// `C_WPI = cv_gamma / (beta/gamma - 1)` for `gamma ∈ (0, beta/(d+2)]`.
pub fn wpi_constant_small_beta(beta: f64, d: usize, gamma: f64, cv_gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma <= beta / (d as f64 + 2.0)) {
        return Err(Error::InvalidParameter {
            name: "gamma",
            value: gamma,
            requirement: "0 < gamma <= beta/(d+2)",
        });
    }
    Ok(cv_gamma / (beta / gamma - 1.0))
}

/// Chi-square decay rate in the small-beta regime — the reciprocal of
/// [`wpi_constant_small_beta`].
pub fn chi2_rate_small_beta(beta: f64, d: usize, gamma: f64, cv_gamma: f64) -> Result<f64> {
    Ok(1.0 / wpi_constant_small_beta(beta, d, gamma, cv_gamma)?)
}

/// `C_V(gamma) = (d+2)² / (2 beta (2 beta - d - 2))` for the Student family
/// with `beta ∈ ((d+2)/2, d]` and `gamma = beta/(d+2)`.
pub fn student_cv_gamma(d: usize, beta: f64) -> Result<f64> {
    let df = d as f64;
    if !(beta > (df + 2.0) / 2.0 && beta <= df) {
        return Err(Error::Inapplicable {
            what: "student small-beta constant",
            detail: "requires (d+2)/2 < beta <= d",
            value: beta,
        });
    }
    Ok((df + 2.0) * (df + 2.0) / (2.0 * beta * (2.0 * beta - df - 2.0)))
}

/// Closed-form weighted Poincaré constant of the Student family with
/// `nu = 2 beta - d ∈ (2, d]` degrees of freedom:
/// `C_WPI = (d+2)² / (nu (d+1) (d+nu))`.
pub fn student_wpi_constant(d: usize, nu: f64) -> Result<f64> {
    let df = d as f64;
    if !(nu > 2.0 && nu <= df) {
        return Err(Error::Inapplicable {
            what: "student weighted Poincare constant",
            detail: "requires 2 < nu <= d",
            value: nu,
        });
    }
    Ok((df + 2.0) * (df + 2.0) / (nu * (df + 1.0) * (df + nu)))
}

/// Chi-square decay rate paired with [`student_wpi_constant`] (its reciprocal).
pub fn student_chi2_rate(d: usize, nu: f64) -> Result<f64> {
    Ok(1.0 / student_wpi_constant(d, nu)?)
}

/// Bridge from strong convexity to the small-beta assumption: when
/// `beta > L² d/(2 alpha²) + 1`, the pair `gamma = beta/(d+2)` and
/// `C_V(gamma) = alpha (d+2)² / (2 L² beta) · ( beta - (1 - alpha²/(2L²))(d+2) )⁻¹`
/// witnesses the small-beta hypothesis. Returns `None` when the condition
/// fails.
pub fn bridge_small_beta(alpha: f64, lipschitz: f64, beta: f64, d: usize) -> Option<(f64, f64)> {
    let df = d as f64;
    let l2 = lipschitz * lipschitz;
    if beta <= l2 * df / (2.0 * alpha * alpha) + 1.0 {
        return None;
    }
    let gamma = beta / (df + 2.0);
    let tail = beta - (1.0 - alpha * alpha / (2.0 * l2)) * (df + 2.0);
    let cv_gamma = alpha * (df + 2.0) * (df + 2.0) / (2.0 * l2 * beta) / tail;
    Some((gamma, cv_gamma))
}

/// Predicate: `beta <= d` and `cv < (d+2)/(d+2-beta)` — the alternative route
/// into the small-beta hypothesis.
pub fn small_beta_bridge_predicate(beta: f64, d: usize, cv: f64) -> bool {
    let df = d as f64;
    beta <= df && cv < (df + 2.0) / (df + 2.0 - beta)
}

/// Stationary moments of the Student families, for `beta > d/2 + 1`:
/// `E[V] = (beta-1)/(beta-1-d/2)` exactly for both families;
/// `E[|∇V|²] = 2d/(beta-1-d/2)` exactly in the isotropic case and bounded by
/// `trace(Σ)/(beta-1-d/2)` in the anisotropic case.
#[derive(Clone, Copy, Debug)]
pub struct StudentMoments {
    pub ev: f64,
    pub egrad2: f64,
    pub egrad2_provenance: Provenance,
}

pub fn analytic_moments_student(
    d: usize,
    beta: f64,
    sigma: Option<&SpdMatrix>,
) -> Result<StudentMoments> {
    let half_d = d as f64 / 2.0;
    if !(beta > half_d + 1.0) {
        return Err(Error::MomentsInfinite { beta, limit: half_d + 1.0 });
    }
    let gap = beta - 1.0 - half_d;
    let ev = (beta - 1.0) / gap;
    match sigma {
        None => Ok(StudentMoments {
            ev,
            egrad2: 2.0 * d as f64 / gap,
            egrad2_provenance: Provenance::Exact,
        }),
        Some(s) => {
            if s.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: s.dim() });
            }
            Ok(StudentMoments {
                ev,
                egrad2: s.trace() / gap,
                egrad2_provenance: Provenance::UpperBound,
            })
        }
    }
}

/// Moment bounds when `V` is quadratic-like outside a ball (the caller
/// asserts the Lyapunov drift condition with constants `eps_lyap` and the
/// ball radius behind `max_v_on_ball`):
/// `E[V] <= (dL + eps) max V`, `E[|∇V|²] <= dL (dL + eps) max V / (beta-1)`.
pub fn moment_bound_lyapunov(
    lipschitz: f64,
    eps_lyap: f64,
    max_v_on_ball: f64,
    beta: f64,
    d: usize,
) -> Result<(f64, f64)> {
    if !(beta > 1.0) {
        return Err(Error::InvalidParameter { name: "beta", value: beta, requirement: "beta > 1" });
    }
    let dl = d as f64 * lipschitz;
    let ev = (dl + eps_lyap) * max_v_on_ball;
    Ok((ev, dl * ev / (beta - 1.0)))
}

/// Moment bounds under two-sided curvature `alpha I ⪯ ∇²V ⪯ L I`, for any
/// `r ∈ (0, beta - d/2 - 1)`:
///
/// ```text
/// E[V]      <= (L/alpha)^{(d/2)/(beta-d/2-r)} V(0)
///              · ( Γ(beta) Γ(r) / (Γ(d/2+r) Γ(beta-d/2)) )^{1/(beta-d/2-r)}
/// E[|∇V|²]  <= d L / (beta-1) · E[V] bound
/// ```
///
/// evaluated in log space.
pub fn moment_bound_general(
    alpha: f64,
    lipschitz: f64,
    v0: f64,
    beta: f64,
    d: usize,
    r: f64,
) -> Result<(f64, f64)> {
    let half_d = d as f64 / 2.0;
    if !(r > 0.0 && r < beta - half_d - 1.0) {
        return Err(Error::InvalidParameter {
            name: "r",
            value: r,
            requirement: "0 < r < beta - d/2 - 1",
        });
    }
    if alpha > lipschitz {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            requirement: "alpha <= lipschitz",
        });
    }
    let exponent = 1.0 / (beta - half_d - r);
    let ln_ratio = ln_gamma(beta) + ln_gamma(r) - ln_gamma(half_d + r) - ln_gamma(beta - half_d);
    let ln_ev = half_d * exponent * (lipschitz / alpha).ln() + v0.ln() + exponent * ln_ratio;
    let ev = ln_ev.exp();
    Ok((ev, d as f64 * lipschitz / (beta - 1.0) * ev))
}

/// Minimize the [`moment_bound_general`] `E[V]` bound over a uniform grid of
/// `r` values in `(0, beta - d/2 - 1)`. Grid search only; no optimality claim.
pub fn moment_bound_general_min_over_r(
    alpha: f64,
    lipschitz: f64,
    v0: f64,
    beta: f64,
    d: usize,
    grid_points: usize,
) -> Result<(f64, f64, f64)> {
    let span = beta - d as f64 / 2.0 - 1.0;
    if !(span > 0.0) {
        return Err(Error::MomentsInfinite { beta, limit: d as f64 / 2.0 + 1.0 });
    }
    let n = grid_points.max(1);
    let mut best: Option<(f64, f64, f64)> = None;
    for j in 1..=n {
        let r = span * j as f64 / (n + 1) as f64;
        let (ev, eg) = moment_bound_general(alpha, lipschitz, v0, beta, d, r)?;
        if best.map_or(true, |(bev, _, _)| ev < bev) {
            best = Some((ev, eg, r));
        }
    }
    Ok(best.expect("grid is non-empty"))
}

/// Exact Gamma ratio `Γ(beta)Γ(r) / (Γ(d/2+r)Γ(beta-d/2))` together with its
/// parity-dependent closed-form bound:
/// `((beta-d/2)/r)^{d/2}` for even `d`, times `sqrt((1+r)/r)` for odd `d`.
///
/// The inequality `ratio <= bound` holds on all of `0 < r < beta - d/2`, the
/// natural domain of the ratio (with equality throughout `d = 2`);
/// comparisons should allow 1e-12 relative rounding slack since the ratio is
/// produced from four log-gamma evaluations.
pub fn gamma_ratio_and_bound(beta: f64, d: usize, r: f64) -> Result<(f64, f64)> {
    let half_d = d as f64 / 2.0;
    if !(r > 0.0 && r < beta - half_d) {
        return Err(Error::InvalidParameter {
            name: "r",
            value: r,
            requirement: "0 < r < beta - d/2",
        });
    }
    let ratio =
        (ln_gamma(beta) + ln_gamma(r) - ln_gamma(half_d + r) - ln_gamma(beta - half_d)).exp();
    let base = ((beta - half_d) / r).powf(half_d);
    let bound = if d % 2 == 0 { base } else { ((1.0 + r) / r).sqrt() * base };
    Ok((ratio, bound))
}

/// Uniform dissipativity constant of the Student diffusion:
/// `alpha' = 2 (beta - 1 - d/2)`. Non-positive values mean no contraction is
/// guaranteed; callers should treat them as flags, not rates.
pub fn dissipativity_constant_student(beta: f64, d: usize) -> f64 {
    2.0 * (beta - 1.0 - d as f64 / 2.0)
}

/// Sufficient condition for the weighted diffusion to be `kappa`-uniformly
/// dissipative under the declared `(alpha, cv)`: `kappa <= alpha (beta - 1 - d cv/4)`.
pub fn uniform_dissipativity_holds(alpha: f64, beta: f64, d: usize, cv: f64, kappa: f64) -> bool {
    kappa <= alpha * (beta - 1.0 - d as f64 * cv / 4.0)
}

/// Mean-square displacement bound for the continuous diffusion started from
/// moments `(ev0, egrad2_0)`:
///
/// ```text
/// E|X_t - X_0|² <= 4 [ (beta-1)² t² egrad2_0 + t d ev0 ]
///                  · exp( 4(beta-1)² L² t² + d (beta-1) L² t² + 2 d L t )
/// ```
pub fn moment_difference_bound(
    t: f64,
    beta: f64,
    lipschitz: f64,
    d: usize,
    ev0: f64,
    egrad2_0: f64,
) -> f64 {
    debug_assert!(t >= 0.0);
    let b1 = beta - 1.0;
    let df = d as f64;
    let l2 = lipschitz * lipschitz;
    let front = 4.0 * (b1 * b1 * t * t * egrad2_0 + t * df * ev0);
    front * (4.0 * b1 * b1 * l2 * t * t + df * b1 * l2 * t * t + 2.0 * df * lipschitz * t).exp()
}

/// Grid check of the radial sufficient condition
/// `phi'(r) <= min( phi''(r) r, cv phi(r)/r )` for radially symmetric
/// potentials `V(x) = phi(|x|)`. A report over the supplied grid, not a proof.
pub struct RadialCheck {
    pub holds: bool,
    /// Grid points where the inequality failed, with the two right-hand sides.
    pub violations: Vec<(f64, f64, f64)>,
}

pub fn check_radial_condition(
    phi: &dyn Fn(f64) -> f64,
    phi_prime: &dyn Fn(f64) -> f64,
    phi_double_prime: &dyn Fn(f64) -> f64,
    cv: f64,
    r_grid: &[f64],
) -> RadialCheck {
    let mut violations = Vec::new();
    for &r in r_grid {
        if r <= 0.0 {
            continue;
        }
        let lhs = phi_prime(r);
        let curvature = phi_double_prime(r) * r;
        let weight = cv * phi(r) / r;
        if !(lhs <= curvature && lhs <= weight) {
            violations.push((r, curvature, weight));
        }
    }
    RadialCheck { holds: violations.is_empty(), violations }
}

/// A quantity that either applies (with provenance) or is absent with the
/// failed hypothesis spelled out.
#[derive(Clone, Debug)]
pub enum Reported<T> {
    Value { value: T, provenance: Provenance },
    Absent { reason: String },
}

impl<T: Copy> Reported<T> {
    pub fn value(&self) -> Option<T> {
        match self {
            Reported::Value { value, .. } => Some(*value),
            Reported::Absent { .. } => None,
        }
    }

    pub fn exact(value: T) -> Self {
        Reported::Value { value, provenance: Provenance::Exact }
    }
}

fn reported<T: Copy>(r: Result<T>) -> Reported<T> {
    match r {
        Ok(value) => Reported::Value { value, provenance: Provenance::Exact },
        Err(e) => Reported::Absent { reason: e.to_string() },
    }
}

/// Every derived constant for one target + accuracy request, with hypotheses
/// that fail marked absent instead of zero.
#[derive(Clone, Debug)]
pub struct TheoryReport {
    pub d: usize,
    pub beta: f64,
    pub alpha: f64,
    pub lipschitz: f64,
    pub cv: f64,
    pub eps: f64,
    pub w2_init: f64,
    pub delta: Reported<f64>,
    pub ev: Reported<f64>,
    pub egrad2: Reported<f64>,
    pub h_max_first: Reported<f64>,
    pub h_star_first: Reported<f64>,
    pub k_first: Reported<f64>,
    pub contraction: Option<ContractionParams>,
    pub sigma_smoothing: Reported<f64>,
    pub m: u64,
    pub h_max_zeroth: Reported<f64>,
    pub h_star_zeroth: Reported<f64>,
    pub k_zeroth: Reported<f64>,
    pub zeroth_contraction: Option<ZeroOrderContractionParams>,
    pub wpi_strongly_convex: Reported<f64>,
    pub chi2_rate_strongly_convex: Reported<f64>,
    /// The continuous-time chi-square result additionally needs `beta > d`.
    pub strongly_convex_chi2_applicable: bool,
    pub wpi_small_beta: Reported<f64>,
    pub chi2_rate_small_beta: Reported<f64>,
    pub dissipativity: f64,
    pub dissipativity_guaranteed: bool,
}

impl TheoryReport {
    /// Assemble the report for a Student-family target. Moments come from the
    /// closed forms; anisotropic `egrad2` is an upper bound and is used as
    /// such in the contraction formulas.
    pub fn for_student(
        d: usize,
        beta: f64,
        alpha: f64,
        lipschitz: f64,
        cv: f64,
        sigma: Option<&SpdMatrix>,
        eps: f64,
        w2_init: f64,
        m: u64,
    ) -> Self {
        let delta_r = delta(beta, d, cv);
        let moments = analytic_moments_student(d, beta, sigma);
        let (ev_r, egrad2_r) = match &moments {
            Ok(m) => (
                Reported::Value { value: m.ev, provenance: Provenance::Exact },
                Reported::Value { value: m.egrad2, provenance: m.egrad2_provenance },
            ),
            Err(e) => (
                Reported::Absent { reason: e.to_string() },
                Reported::Absent { reason: e.to_string() },
            ),
        };
        Self::assemble(d, beta, alpha, lipschitz, cv, eps, w2_init, m, delta_r, ev_r, egrad2_r)
    }

    /// Assemble the report from externally supplied moments (exact values or
    /// bounds), as needed for custom potentials.
    #[allow(clippy::too_many_arguments)]
    pub fn with_moments(
        d: usize,
        beta: f64,
        alpha: f64,
        lipschitz: f64,
        cv: f64,
        eps: f64,
        w2_init: f64,
        m: u64,
        ev: Reported<f64>,
        egrad2: Reported<f64>,
    ) -> Self {
        let delta_r = delta(beta, d, cv);
        Self::assemble(d, beta, alpha, lipschitz, cv, eps, w2_init, m, delta_r, ev, egrad2)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        d: usize,
        beta: f64,
        alpha: f64,
        lipschitz: f64,
        cv: f64,
        eps: f64,
        w2_init: f64,
        m: u64,
        delta_r: Result<f64>,
        ev_r: Reported<f64>,
        egrad2_r: Reported<f64>,
    ) -> Self {
        let dv = delta_r.as_ref().ok().copied();
        let ev = ev_r.value();
        let egrad2 = egrad2_r.value();

        let h_max_first = match dv {
            Some(dl) => reported(first_order_step_bound(alpha, lipschitz, beta, dl)),
            None => absent_delta(),
        };
        let (h_star_first, k_first, contraction) = match (dv, ev, egrad2) {
            (Some(dl), Some(ev), Some(eg)) => {
                match step_size_for_accuracy(eps, d, beta, alpha, lipschitz, dl, ev, eg) {
                    Ok(h) => {
                        let k = iteration_complexity(eps, w2_init, alpha, beta, dl, h);
                        let params =
                            contraction_params(h, alpha, lipschitz, beta, dl, d, ev, eg).ok();
                        (Reported::exact(h), Reported::exact(k), params)
                    }
                    Err(e) => {
                        let reason = e.to_string();
                        (
                            Reported::Absent { reason: reason.clone() },
                            Reported::Absent { reason },
                            None,
                        )
                    }
                }
            }
            _ => (absent_moments(), absent_moments(), None),
        };

        let sigma_sm = match dv {
            Some(dl) => Reported::exact(recommended_sigma(eps, dl, d)),
            None => absent_delta(),
        };
        let h_max_zeroth = match dv {
            Some(dl) => reported(zeroth_order_step_bound(alpha, lipschitz, beta, dl, d, m)),
            None => absent_delta(),
        };
        let (h_star_zeroth, k_zeroth, zeroth_contraction) = match (dv, ev, egrad2) {
            (Some(dl), Some(ev), Some(eg)) => {
                match zeroth_order_step_for_accuracy(eps, d, beta, alpha, lipschitz, dl, m, ev, eg)
                {
                    Ok(h) => {
                        let k = zeroth_order_iteration_complexity(eps, w2_init, alpha, beta, dl, h);
                        let sigma = recommended_sigma(eps, dl, d);
                        let params = zeroth_order_params(
                            h, sigma, m, alpha, lipschitz, beta, dl, d, ev, eg,
                        )
                        .ok();
                        (Reported::exact(h), Reported::exact(k), params)
                    }
                    Err(e) => {
                        let reason = e.to_string();
                        (
                            Reported::Absent { reason: reason.clone() },
                            Reported::Absent { reason },
                            None,
                        )
                    }
                }
            }
            _ => (absent_moments(), absent_moments(), None),
        };

        let wpi_sc = reported(wpi_constant_strongly_convex(alpha, beta, cv));
        let chi2_sc = reported(chi2_rate_strongly_convex(alpha, beta, cv));
        let (wpi_sb, chi2_sb) = match bridge_small_beta(alpha, lipschitz, beta, d) {
            Some((gamma, cv_gamma)) => (
                reported(wpi_constant_small_beta(beta, d, gamma, cv_gamma)),
                reported(chi2_rate_small_beta(beta, d, gamma, cv_gamma)),
            ),
            None => {
                let reason = "small-beta bridge requires beta > L^2 d/(2 alpha^2) + 1".to_string();
                (
                    Reported::Absent { reason: reason.clone() },
                    Reported::Absent { reason },
                )
            }
        };

        let dissipativity = dissipativity_constant_student(beta, d);
        TheoryReport {
            d,
            beta,
            alpha,
            lipschitz,
            cv,
            eps,
            w2_init,
            delta: reported(delta_r),
            ev: ev_r,
            egrad2: egrad2_r,
            h_max_first,
            h_star_first,
            k_first,
            contraction,
            sigma_smoothing: sigma_sm,
            m,
            h_max_zeroth,
            h_star_zeroth,
            k_zeroth,
            zeroth_contraction,
            wpi_strongly_convex: wpi_sc,
            chi2_rate_strongly_convex: chi2_sc,
            strongly_convex_chi2_applicable: beta > d as f64,
            wpi_small_beta: wpi_sb,
            chi2_rate_small_beta: chi2_sb,
            dissipativity,
            dissipativity_guaranteed: dissipativity > 0.0,
        }
    }
}

fn absent_delta<T>() -> Reported<T> {
    Reported::Absent { reason: "delta <= 0".to_string() }
}

fn absent_moments<T>() -> Reported<T> {
    Reported::Absent { reason: "stationary moments unavailable".to_string() }
}
