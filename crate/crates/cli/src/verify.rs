//! The release gate: every acceptance criterion as an executable check.
//!
//! Each criterion returns a [`CriterionResult`] with the measured numbers in
//! its detail string; `run_all` executes the suite in order and
//! [`results_csv`] renders the machine-readable report. All randomness uses
//! fixed seeds, so a given build either passes or fails reproducibly.

use heavytail::metrics::{
    grad_norm_sq_values, ks_critical_1pct, potential_values, radial_beta_ks, robust_moment,
    sliced_w2,
};
use heavytail::rng::{self, Rng};
use heavytail::samplers::{
    em_step, run_ensemble, zo_gradient, Algorithm, DivergencePolicy, EvalCounts,
    InitDistribution, SamplerConfig,
};
use heavytail::targets::TargetDensity;
use heavytail::theory;

use crate::csvio::Csv;
use crate::runner;
use crate::scenario;
use crate::Result;

#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} {} — {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

fn result(id: usize, name: &'static str, passed: bool, detail: String) -> CriterionResult {
    CriterionResult { id, name, passed, detail }
}

/// Run a timed check against its stated wall-clock budget; exceeding the
/// budget fails the criterion.
fn timed<F>(id: usize, name: &'static str, budget_secs: f64, run: F) -> CriterionResult
where
    F: FnOnce() -> Result<(bool, String)>,
{
    let start = std::time::Instant::now();
    match run() {
        Ok((passed, detail)) => {
            let elapsed = start.elapsed().as_secs_f64();
            let within = elapsed < budget_secs;
            result(
                id,
                name,
                passed && within,
                format!("{detail}; elapsed {elapsed:.1}s (budget {budget_secs:.0}s)"),
            )
        }
        Err(e) => result(id, name, false, e.to_string()),
    }
}

/// Criterion 1: Monte Carlo moments from the reference oracle match the closed forms.
pub fn criterion_1_analytic_moments() -> CriterionResult {
    let name = "analytic-moments";
    let run = || -> Result<(bool, String)> {
        // d = 10, beta = 11: plain means within 3 standard errors.
        let t = TargetDensity::isotropic_student(10, 11.0)?;
        let mut r = rng::stream(0xACCE0001, 0);
        let samples = t.reference_sample(200_000, &mut r)?;
        let ev = robust_moment(&potential_values(&t, &samples)?, 1)?;
        let eg = robust_moment(&grad_norm_sq_values(&t, &samples)?, 1)?;
        let large_ok =
            (ev.estimate - 2.0).abs() <= 3.0 * ev.se && (eg.estimate - 4.0).abs() <= 3.0 * eg.se;

        // d = 10, beta = 6.5: median-of-means over 200 blocks within 10%.
        let t2 = TargetDensity::isotropic_student(10, 6.5)?;
        let mut r2 = rng::stream(0xACCE0002, 0);
        let samples2 = t2.reference_sample(200_000, &mut r2)?;
        let ev2 = robust_moment(&potential_values(&t2, &samples2)?, 200)?;
        let eg2 = robust_moment(&grad_norm_sq_values(&t2, &samples2)?, 200)?;
        let small_ok =
            (ev2.estimate - 11.0).abs() <= 1.1 && (eg2.estimate - 40.0).abs() <= 4.0;

        Ok((
            large_ok && small_ok,
            format!(
                "d10b11: E[V]={:.4}±{:.4} (2), E[|∇V|²]={:.4}±{:.4} (4); \
                 d10b6.5: E[V]={:.3} (11±10%), E[|∇V|²]={:.2} (40±10%)",
                ev.estimate, ev.se, eg.estimate, eg.se, ev2.estimate, eg2.estimate
            ),
        ))
    };
    timed(1, name, 30.0, run)
}

/// Criterion 2: The contraction margin is exactly 1 for beta = d+1 and exactly 1/d for
/// beta = (d+3)/2.
pub fn criterion_2_delta_exactness() -> CriterionResult {
    let name = "delta-exactness";
    let mut ok = true;
    let mut notes = Vec::new();
    for d in [5usize, 10, 20, 40] {
        let large = theory::delta(d as f64 + 1.0, d, 2.0).unwrap_or(f64::NAN);
        let small = theory::delta((d as f64 + 3.0) / 2.0, d, 2.0).unwrap_or(f64::NAN);
        if large != 1.0 || small != 1.0 / d as f64 {
            ok = false;
            notes.push(format!("d={d}: {large} / {small}"));
        }
    }
    let detail = if ok {
        "delta(beta=d+1)=1 and delta(beta=(d+3)/2)=1/d bit-exactly for d in {5,10,20,40}".into()
    } else {
        notes.join("; ")
    };
    result(2, name, ok, detail)
}

struct BiasStats {
    raw_bias_sq: f64,
    /// Mahalanobis statistic `n (ḡ-∇V)' C⁻¹ (ḡ-∇V)`; chi-square with d
    /// degrees of freedom when the estimator is unbiased.
    mahalanobis: f64,
}

/// Chi-square(5) upper quantile at the 3-sigma level (0.99865) with a
/// Bonferroni correction for the 40-cell sweep (per-cell level 0.00135/40):
/// testing a point null across a family at per-cell 3-sigma would reject a
/// correct estimator ~5% of the time, so the family is controlled instead.
const CHI2_5_3SIGMA_BONFERRONI_40: f64 = 28.168;

/// Squared-norm bias statistics of the smoothing estimator over `reps`
/// replications.
///
/// The estimator's coordinates are strongly correlated (each replication uses
/// one direction vector) and the squared norm of the mean error is a skewed
/// mixture of chi-squares, so "indistinguishable from zero" is tested on the
/// Mahalanobis form, whitened by the full empirical covariance `C`:
/// `n e' C⁻¹ e ~ chi²_d` under unbiasedness.
fn bias_statistics(
    t: &TargetDensity,
    x: &[f64],
    sigma: f64,
    reps: usize,
    rng: &mut impl Rng,
) -> heavytail::Result<BiasStats> {
    let d = t.dim();
    let grad = t.gradient(x)?;
    let mut counts = EvalCounts::default();
    let mut sum = vec![0.0; d];
    let mut outer = vec![0.0; d * d];
    for _ in 0..reps {
        let g = zo_gradient(t, x, sigma, 1, rng, &mut counts)?;
        for i in 0..d {
            sum[i] += g.value[i];
            for j in 0..=i {
                outer[i * d + j] += g.value[i] * g.value[j];
            }
        }
    }
    let n = reps as f64;
    let mut cov = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let c = outer[i * d + j] / n - (sum[i] / n) * (sum[j] / n);
            cov[i * d + j] = c;
            cov[j * d + i] = c;
        }
    }
    let e: Vec<f64> = (0..d).map(|i| sum[i] / n - grad[i]).collect();
    let raw: f64 = e.iter().map(|v| v * v).sum();
    let mahalanobis = n * quad_form_inverse(d, &cov, &e);
    Ok(BiasStats { raw_bias_sq: raw, mahalanobis })
}

/// `e' C⁻¹ e` by Gaussian elimination on the (tiny, SPD) system `C w = e`.
fn quad_form_inverse(d: usize, c: &[f64], e: &[f64]) -> f64 {
    let mut a = c.to_vec();
    let mut w = e.to_vec();
    for col in 0..d {
        let mut pivot = col;
        for row in (col + 1)..d {
            if a[row * d + col].abs() > a[pivot * d + col].abs() {
                pivot = row;
            }
        }
        if pivot != col {
            for k in 0..d {
                a.swap(col * d + k, pivot * d + k);
            }
            w.swap(col, pivot);
        }
        let diag = a[col * d + col];
        for row in (col + 1)..d {
            let f = a[row * d + col] / diag;
            for k in col..d {
                a[row * d + k] -= f * a[col * d + k];
            }
            w[row] -= f * w[col];
        }
    }
    for row in (0..d).rev() {
        let mut acc = w[row];
        for k in (row + 1)..d {
            acc -= a[row * d + k] * w[k];
        }
        w[row] = acc / a[row * d + row];
    }
    w.iter().zip(e).map(|(a, b)| a * b).sum::<f64>().max(0.0)
}

/// Criterion 3: Smoothing-estimator bias: `||E g - ∇V||² <= L² sigma² d` at every probe
/// point, and (quadratic potential) statistically indistinguishable from
/// zero: the covariance-whitened Mahalanobis statistic stays below the
/// chi-square(d) quantile at the 3-sigma level.
pub fn criterion_3_zo_bias() -> CriterionResult {
    let name = "zo-bias-bound";
    let run = || -> Result<(bool, String)> {
        let d = 5;
        let t = TargetDensity::isotropic_student(d, 6.0)?;
        let reps = 100_000;
        let mut point_rng = rng::stream(0xACCE0003, 0);
        let mut worst_budget: f64 = 0.0;
        let mut worst_t: f64 = 0.0;
        let mut ok = true;
        for p in 0..20usize {
            let x: Vec<f64> = (0..d).map(|_| point_rng.uniform() - 0.5).collect();
            for (si, sigma) in [0.01, 0.1].into_iter().enumerate() {
                let mut r = rng::stream(0xACCE0003, 100 + (p * 2 + si) as u64);
                let stats = bias_statistics(&t, &x, sigma, reps, &mut r)?;
                let budget = t.lipschitz() * t.lipschitz() * sigma * sigma * d as f64;
                if stats.raw_bias_sq > budget {
                    ok = false;
                }
                if stats.mahalanobis > CHI2_5_3SIGMA_BONFERRONI_40 {
                    ok = false;
                }
                worst_budget = worst_budget.max(stats.raw_bias_sq / budget);
                worst_t = worst_t.max(stats.mahalanobis);
            }
        }
        Ok((
            ok,
            format!(
                "20 points x sigma in {{0.01,0.1}} at 1e5 reps: worst bias²/budget = {:.3}, \
                 worst Mahalanobis T = {:.2} (chi²_5 family-3-sigma limit {:.2})",
                worst_budget, worst_t, CHI2_5_3SIGMA_BONFERRONI_40
            ),
        ))
    };
    timed(3, name, 60.0, run)
}

/// Criterion 4: Smoothing-estimator variance:
/// `E|ζ - E[ζ|x]|² <= sigma² L² (d+3)³/(2m) + 2(d+5)|∇V(x)|²/m`, zero
/// violations beyond 3 standard errors across the sweep.
pub fn criterion_4_zo_variance() -> CriterionResult {
    let name = "zo-variance-bound";
    let run = || -> Result<(bool, String)> {
        let d = 5;
        let t = TargetDensity::isotropic_student(d, 6.0)?;
        let reps = 100_000;
        let mut point_rng = rng::stream(0xACCE0004, 0);
        let points: Vec<Vec<f64>> =
            (0..20).map(|_| (0..d).map(|_| point_rng.uniform() - 0.5).collect()).collect();
        let mut violations = 0usize;
        let mut worst: f64 = 0.0;
        let mut stream_idx = 1u64;
        for x in &points {
            let grad = t.gradient(x)?;
            let grad_sq: f64 = grad.iter().map(|g| g * g).sum();
            for sigma in [0.01, 0.1] {
                for m in [1u64, 4, 16] {
                    let mut r = rng::stream(0xACCE0004, stream_idx);
                    stream_idx += 1;
                    let mut counts = EvalCounts::default();
                    let mut sum = 0.0;
                    let mut sumsq = 0.0;
                    for _ in 0..reps {
                        let g = zo_gradient(&t, x, sigma, m, &mut r, &mut counts)?;
                        let dsq: f64 = g
                            .value
                            .iter()
                            .zip(&grad)
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum();
                        sum += dsq;
                        sumsq += dsq * dsq;
                    }
                    let n = reps as f64;
                    let mean = sum / n;
                    let sd = ((sumsq / n - mean * mean).max(0.0) / n).sqrt();
                    let l2 = t.lipschitz() * t.lipschitz();
                    let bound = sigma * sigma * l2 * ((d + 3) as f64).powi(3) / (2.0 * m as f64)
                        + 2.0 * (d + 5) as f64 * grad_sq / m as f64;
                    if mean > bound + 3.0 * sd {
                        violations += 1;
                    }
                    worst = worst.max(mean / bound);
                }
            }
        }
        Ok((
            violations == 0,
            format!(
                "120 sweep cells (20 points x 2 sigma x 3 m) at 1e5 reps: {} violations, \
                 worst variance/bound = {:.3}",
                violations, worst
            ),
        ))
    };
    match run() {
        Ok((passed, detail)) => result(4, name, passed, detail),
        Err(e) => result(4, name, false, e.to_string()),
    }
}

/// Criterion 5: Short-time mean-square displacement of the discretized chain stays
/// under the continuous-time bound at t in {h, 2h, 4h}, h half the stability
/// limit, within 2 Monte Carlo standard errors.
pub fn criterion_5_moment_difference() -> CriterionResult {
    let name = "moment-difference-bound";
    let run = || -> Result<(bool, String)> {
        let d = 10;
        let beta = 11.0;
        let t = TargetDensity::isotropic_student(d, beta)?;
        let dl = theory::delta(beta, d, t.cv())?;
        let h = theory::first_order_step_bound(t.alpha(), t.lipschitz(), beta, dl)? / 2.0;
        let m = theory::analytic_moments_student(d, beta, None)?;
        let n = 10_000;
        let mut r = rng::stream(0xACCE0005, 0);
        let starts = t.reference_sample(n, &mut r)?;
        let mut sums = [0.0f64; 3];
        let mut sumsqs = [0.0f64; 3];
        let mut counts = EvalCounts::default();
        let mut xi = vec![0.0; d];
        for x0 in &starts {
            let mut x = x0.clone();
            let mut step_total = 0u64;
            for (slot, extra) in [(0usize, 1u64), (1, 1), (2, 2)] {
                for _ in 0..extra {
                    r.fill_standard_normal(&mut xi);
                    x = em_step(&t, &x, h, &xi, &mut counts)?;
                    step_total += 1;
                }
                debug_assert!(step_total == [1, 2, 4][slot]);
                let dsq: f64 = x.iter().zip(x0).map(|(a, b)| (a - b) * (a - b)).sum();
                sums[slot] += dsq;
                sumsqs[slot] += dsq * dsq;
            }
        }
        let mut ok = true;
        let mut details = Vec::new();
        for (slot, mult) in [(0usize, 1.0), (1, 2.0), (2, 4.0)] {
            let nf = n as f64;
            let mean = sums[slot] / nf;
            let sd = ((sumsqs[slot] / nf - mean * mean).max(0.0) / nf).sqrt();
            let bound = theory::moment_difference_bound(mult * h, beta, t.lipschitz(), d, m.ev, m.egrad2);
            if mean > bound + 2.0 * sd {
                ok = false;
            }
            details.push(format!("t={mult}h: {:.4}<= {:.4}", mean, bound));
        }
        Ok((ok, details.join(", ")))
    };
    timed(5, name, 120.0, run)
}

/// Sliced-W2 excess of `ens` over the finite-sample noise floor, measured in
/// squared distance where independent sampling noise and true bias add: the
/// mean over shared projections of `w2(ens,ref)² - w2(ind,ref)²`, rooted.
/// Sharing the reference cloud and the directions cancels most of the floor
/// fluctuation, which is what lets the smallest biases resolve at n = 4096.
fn sliced_excess_over_floor(
    ens: &[Vec<f64>],
    reference: &[Vec<f64>],
    independent: &[Vec<f64>],
    n_proj: usize,
    seed: u64,
) -> heavytail::Result<f64> {
    let d = reference[0].len();
    let mut rng = rng::stream(seed, u64::MAX - 4);
    let mut theta = vec![0.0; d];
    let project = |samples: &[Vec<f64>], theta: &[f64]| -> Vec<f64> {
        let mut out: Vec<f64> = samples
            .iter()
            .map(|s| s.iter().zip(theta).map(|(a, b)| a * b).sum())
            .collect();
        out.sort_unstable_by(f64::total_cmp);
        out
    };
    let mut acc = 0.0;
    for _ in 0..n_proj {
        loop {
            rng.fill_standard_normal(&mut theta);
            let norm: f64 = theta.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-12 {
                for t in &mut theta {
                    *t /= norm;
                }
                break;
            }
        }
        let pr = project(reference, &theta);
        let w_er = heavytail::metrics::w2_1d(&project(ens, &theta), &pr)?;
        let w_fr = heavytail::metrics::w2_1d(&project(independent, &theta), &pr)?;
        acc += w_er * w_er - w_fr * w_fr;
    }
    Ok((acc / n_proj as f64).max(0.0).sqrt())
}

/// Criterion 6: The sliced-W2 plateau above the sampling noise floor shrinks as the
/// step size shrinks: non-increasing in h, by a factor >= 1.5 per 4x step
/// reduction (the half-order bias term predicts = 2).
pub fn criterion_6_bias_floor_scaling(threads: usize) -> CriterionResult {
    let name = "bias-floor-scaling";
    let run = || -> Result<(bool, String)> {
        let d = 10;
        let beta = 11.0;
        let t = TargetDensity::isotropic_student(d, beta)?;
        let dl = theory::delta(beta, d, t.cv())?;
        let h0 = theory::first_order_step_bound(t.alpha(), t.lipschitz(), beta, dl)? / 2.0;
        let n = 4096usize;
        let n_proj = 512;
        let seed = 0xACCE0006u64;

        let mut ref_rng = rng::stream(seed, u64::MAX - 2);
        let reference = t.reference_sample(n, &mut ref_rng)?;
        let mut floor_rng = rng::stream(seed, u64::MAX - 3);
        let independent = t.reference_sample(n, &mut floor_rng)?;
        let floor = sliced_w2(&reference, &independent, 128, &mut rng::stream(seed, u64::MAX - 4))?;

        let mut excesses = Vec::new();
        for i in 0..3 {
            let h = h0 / 4f64.powi(i);
            let params =
                theory::contraction_params(h, t.alpha(), t.lipschitz(), beta, dl, d, 2.0, 4.0)?;
            let k = ((0.01f64).ln() / (1.0 - params.a).ln()).ceil() as u64;
            let config = SamplerConfig {
                algorithm: Algorithm::FirstOrder,
                h,
                iterations: k,
                chains: n,
                sigma: 0.0,
                m: 1,
                seed: seed + i as u64,
                init: InitDistribution::Point(vec![0.0; d]),
                divergence_policy: DivergencePolicy::Abort,
            };
            // Average the plateau over three late snapshots (the transient is
            // below 1% of the initial distance from 3K/4 onward).
            let schedule = vec![k * 3 / 4, k * 7 / 8, k];
            let out = run_ensemble(&t, &config, &schedule, threads)?;
            let mut acc = 0.0;
            for snap in &out.snapshots {
                acc += sliced_excess_over_floor(&snap.states, &reference, &independent, n_proj, seed)?;
            }
            excesses.push(acc / out.snapshots.len() as f64);
        }
        let non_increasing = excesses[0] >= excesses[1] && excesses[1] >= excesses[2];
        let ratio_ok = excesses[0] > 0.0
            && excesses[0] >= 1.5 * excesses[1]
            && (excesses[1] <= 0.0 || excesses[1] >= 1.5 * excesses[2]);
        Ok((
            non_increasing && ratio_ok,
            format!(
                "noise floor {:.4}; bias excesses over floor [{:.4}, {:.4}, {:.4}] for h in \
                 {{h0, h0/4, h0/16}}; ratios [{:.2}, {:.2}] (need >= 1.5, theory ~2)",
                floor.value,
                excesses[0],
                excesses[1],
                excesses[2],
                excesses[0] / excesses[1],
                excesses[1] / excesses[2]
            ),
        ))
    };
    timed(6, name, 600.0, run)
}

/// Criterion 7: Complexity-table orders: first-order K exactly dimension-free for
/// beta = d+1 and ~d^4 for beta = (d+3)/2; zeroth-order oracle counts
/// reproduce the batch-size trade-offs of the two regimes.
pub fn criterion_7_complexity_orders() -> CriterionResult {
    let name = "complexity-orders";
    let run = || -> Result<(bool, String)> {
        let (alpha, lipschitz, cv) = (2.0, 2.0, 2.0);
        let eps = 0.25;
        let w2 = 10.0;
        let mut ok = true;
        let mut notes = Vec::new();

        // First-order, beta = d + 1: K exactly constant in d.
        let mut ks = Vec::new();
        for d in [5usize, 10, 20, 40] {
            let beta = d as f64 + 1.0;
            let dl = theory::delta(beta, d, cv)?;
            let m = theory::analytic_moments_student(d, beta, None)?;
            let h = theory::step_size_for_accuracy(eps, d, beta, alpha, lipschitz, dl, m.ev, m.egrad2)?;
            ks.push(theory::iteration_complexity(eps, w2, alpha, beta, dl, h));
        }
        if !ks.windows(2).all(|w| w[0] == w[1]) {
            ok = false;
            notes.push(format!("large-dof K not constant: {ks:?}"));
        } else {
            notes.push(format!("large-dof K = {} for all d", ks[0]));
        }

        // First-order, beta = (d+3)/2: K(20)/K(10) in [8, 32].
        let k_real = |d: usize| -> Result<f64> {
            let beta = (d as f64 + 3.0) / 2.0;
            let dl = theory::delta(beta, d, cv)?;
            let m = theory::analytic_moments_student(d, beta, None)?;
            let h = theory::step_size_for_accuracy(eps, d, beta, alpha, lipschitz, dl, m.ev, m.egrad2)?;
            Ok(theory::iteration_complexity_real(eps, w2, alpha, beta, dl, h))
        };
        let ratio = k_real(20)? / k_real(10)?;
        if !(8.0..=32.0).contains(&ratio) {
            ok = false;
        }
        notes.push(format!("small-dof K(20)/K(10) = {ratio:.2} (target 16, window [8,32])"));

        // Zeroth-order, beta = d + 1: oracle cost mK comparable for m = 1 and m = d.
        let zo = |d: usize, beta: f64, m: u64| -> Result<(f64, f64)> {
            let dl = theory::delta(beta, d, cv)?;
            let mm = theory::analytic_moments_student(d, beta, None)?;
            let h = theory::zeroth_order_step_for_accuracy(
                eps, d, beta, alpha, lipschitz, dl, m, mm.ev, mm.egrad2,
            )?;
            let k = theory::zeroth_order_iteration_complexity(eps, w2, alpha, beta, dl, h);
            Ok((k, m as f64 * k))
        };
        for d in [10usize, 20] {
            let beta = d as f64 + 1.0;
            let (_, cost1) = zo(d, beta, 1)?;
            let (kd, costd) = zo(d, beta, d as u64)?;
            let (k1, _) = zo(d, beta, 1)?;
            let cost_ratio = cost1 / costd;
            if !(0.5..=2.0).contains(&cost_ratio) {
                ok = false;
            }
            notes.push(format!(
                "large-dof d={d}: mK(1)/mK(d) = {cost_ratio:.2}, K(1)/K(d) = {:.1}",
                k1 / kd
            ));
        }

        // Zeroth-order, beta = (d+3)/2: K essentially independent of m (the
        // binding error is the discretization, so batch size 1 is optimal in
        // oracle cost).
        for d in [10usize, 20] {
            let beta = (d as f64 + 3.0) / 2.0;
            let mut k_by_m = Vec::new();
            let mut cost_by_m = Vec::new();
            for m in [1u64, 4, 16] {
                let (k, cost) = zo(d, beta, m)?;
                k_by_m.push(k);
                cost_by_m.push(cost);
            }
            let spread = k_by_m.iter().cloned().fold(f64::MIN, f64::max)
                / k_by_m.iter().cloned().fold(f64::MAX, f64::min);
            if spread > 4.0 + 1e-9 {
                ok = false;
            }
            if !(cost_by_m[0] <= cost_by_m[1] && cost_by_m[1] <= cost_by_m[2]) {
                ok = false;
            }
            notes.push(format!("small-dof d={d}: K spread over m = {spread:.2} (<= 4), cost minimized at m=1"));
        }

        Ok((ok, notes.join("; ")))
    };
    match run() {
        Ok((passed, detail)) => result(7, name, passed, detail),
        Err(e) => result(7, name, false, e.to_string()),
    }
}

/// Criterion 8: The Gamma-ratio inequality admits no counterexample on the grid
/// d <= 20, beta in {d/2 + 1.5, ..., 2d} (step 1/2), r on a 10-point grid.
pub fn criterion_8_gamma_ratio_grid() -> CriterionResult {
    let name = "gamma-ratio-inequality";
    let mut checked = 0usize;
    let mut violations = 0usize;
    let mut worst: f64 = 0.0;
    for d in 1usize..=20 {
        let mut beta = d as f64 / 2.0 + 1.5;
        while beta <= 2.0 * d as f64 + 1e-9 {
            let span = beta - d as f64 / 2.0 - 1.0;
            for j in 1..=10 {
                let r = span * j as f64 / 11.0;
                match theory::gamma_ratio_and_bound(beta, d, r) {
                    Ok((ratio, bound)) => {
                        checked += 1;
                        worst = worst.max(ratio / bound);
                        if ratio > bound * (1.0 + 1e-12) {
                            violations += 1;
                        }
                    }
                    Err(_) => violations += 1,
                }
            }
            beta += 0.5;
        }
    }
    result(
        8,
        name,
        violations == 0,
        format!("{checked} grid points, {violations} counterexamples, worst ratio/bound = {worst:.12}"),
    )
}

/// Criterion 9: Weighted Poincaré constants: the Student closed form at (d=10, nu=3)
/// equals 144/429 to 1e-12 relative, and both rate-constant reciprocal
/// identities hold to 1e-12.
pub fn criterion_9_wpi_constants() -> CriterionResult {
    let name = "wpi-constants";
    let run = || -> Result<(bool, String)> {
        let tol = 1e-12;
        let mut ok = true;
        let c = theory::student_wpi_constant(10, 3.0)?;
        let expect = 144.0 / 429.0;
        if ((c - expect) / expect).abs() > tol {
            ok = false;
        }
        // Strongly convex identity: rate * constant = 2.
        let mut worst_sc: f64 = 0.0;
        for (alpha, beta, cv) in [(2.0, 11.0, 2.0), (0.5, 6.5, 2.0), (3.0, 25.0, 1.5)] {
            let rate = theory::chi2_rate_strongly_convex(alpha, beta, cv)?;
            let wpi = theory::wpi_constant_strongly_convex(alpha, beta, cv)?;
            worst_sc = worst_sc.max((rate * wpi - 2.0).abs());
        }
        if worst_sc > tol {
            ok = false;
        }
        // Small-beta identities: rate * constant = 1 (closed form and generic).
        let mut worst_sb = (theory::student_chi2_rate(10, 3.0)? * c - 1.0).abs();
        for (d, beta) in [(10usize, 6.5), (20usize, 11.5), (6usize, 4.5)] {
            let cvg = theory::student_cv_gamma(d, beta)?;
            let gamma = beta / (d as f64 + 2.0);
            let wpi = theory::wpi_constant_small_beta(beta, d, gamma, cvg)?;
            let rate = theory::chi2_rate_small_beta(beta, d, gamma, cvg)?;
            worst_sb = worst_sb.max((rate * wpi - 1.0).abs());
        }
        if worst_sb > tol {
            ok = false;
        }
        Ok((
            ok,
            format!(
                "C_WPI(d=10,nu=3) = {c:.15} vs 144/429 = {expect:.15}; \
                 worst |rate*C - 2| = {worst_sc:.2e}, worst |rate*C - 1| = {worst_sb:.2e}"
            ),
        ))
    };
    match run() {
        Ok((passed, detail)) => result(9, name, passed, detail),
        Err(e) => result(9, name, false, e.to_string()),
    }
}

/// Criterion 10: Oracle validity: the radial Beta KS test passes at the 1% level for
/// reference samples, and a ULA baseline run fails it harder than the
/// weighted chain on the heavy-tailed target (KS_ULA > KS_weighted).
pub fn criterion_10_oracle_and_ula_control(threads: usize) -> CriterionResult {
    let name = "oracle-validity";
    let run = || -> Result<(bool, String)> {
        let mut ok = true;
        let mut notes = Vec::new();
        for (d, beta) in [(2usize, 3.0), (10usize, 11.0), (10usize, 6.5)] {
            let t = TargetDensity::isotropic_student(d, beta)?;
            let mut r = rng::stream(0xACCE000A, d as u64);
            let samples = t.reference_sample(100_000, &mut r)?;
            let ks = radial_beta_ks(&samples, &t)?;
            let crit = ks_critical_1pct(100_000);
            if ks >= crit {
                ok = false;
            }
            notes.push(format!("oracle ({d},{beta}): KS {ks:.5} < {crit:.5}"));
        }

        // Negative control on the heavy-tailed target: both chains get the
        // same 2000-step budget at a quarter of their curvature-limited step
        // (1/(4(beta-1)L_V) for the weighted chain, 1/(4 L_score) with
        // L_score = 2 beta for ULA).
        let d = 10;
        let beta = 6.5;
        let t = TargetDensity::isotropic_student(d, beta)?;
        let dl = theory::delta(beta, d, t.cv())?;
        let h_weighted = theory::first_order_step_bound(t.alpha(), t.lipschitz(), beta, dl)? / 2.0;
        let h_ula = 1.0 / (4.0 * 2.0 * beta);
        let n = 4096;
        let k = 2000;
        let base = SamplerConfig {
            algorithm: Algorithm::FirstOrder,
            h: h_weighted,
            iterations: k,
            chains: n,
            sigma: 0.0,
            m: 1,
            seed: 0xACCE000B,
            init: InitDistribution::Point(vec![0.0; d]),
            divergence_policy: DivergencePolicy::Abort,
        };
        let weighted = run_ensemble(&t, &base, &[k], threads)?;
        let ula_config = SamplerConfig { algorithm: Algorithm::Ula, h: h_ula, ..base };
        let ula = run_ensemble(&t, &ula_config, &[k], threads)?;
        let ks_weighted = radial_beta_ks(&weighted.snapshots[0].states, &t)?;
        let ks_ula = radial_beta_ks(&ula.snapshots[0].states, &t)?;
        if ks_ula <= ks_weighted {
            ok = false;
        }
        let crit_chain = ks_critical_1pct(n);
        notes.push(format!(
            "negative control (10,6.5) after {k} steps: KS_ULA {ks_ula:.4} > KS_weighted {ks_weighted:.4} \
             (1% critical at n={n}: {crit_chain:.4}; ULA {})",
            if ks_ula > crit_chain { "rejected" } else { "not rejected" }
        ));
        Ok((ok, notes.join("; ")))
    };
    match run() {
        Ok((passed, detail)) => result(10, name, passed, detail),
        Err(e) => result(10, name, false, e.to_string()),
    }
}

/// Criterion 11: Rerunning a verify sub-experiment with the same seed and different
/// thread counts produces byte-identical CSVs.
pub fn criterion_11_determinism() -> CriterionResult {
    let name = "thread-determinism";
    let run = || -> Result<(bool, String)> {
        let mut spec = scenario::preset("smoke-small").expect("preset exists");
        spec.experiment.reference_n = 4096;
        let base = std::env::temp_dir().join(format!("heavytail-verify-{}", std::process::id()));
        let mut artifacts = Vec::new();
        for threads in [1usize, 4] {
            let mut s = spec.clone();
            s.experiment.out = base.join(format!("t{threads}")).display().to_string();
            artifacts.push(runner::run(&s, threads)?);
        }
        let mut identical = true;
        for get in [
            |a: &runner::RunArtifacts| a.snapshots_csv.clone(),
            |a: &runner::RunArtifacts| a.metrics_csv.clone(),
            |a: &runner::RunArtifacts| a.theory_csv.clone(),
        ] {
            let x = runner::read_bytes(&get(&artifacts[0]))?;
            let y = runner::read_bytes(&get(&artifacts[1]))?;
            if x != y {
                identical = false;
            }
        }
        let _ = std::fs::remove_dir_all(&base);
        Ok((identical, "snapshots/metrics/theory CSVs byte-identical for 1 vs 4 threads".into()))
    };
    match run() {
        Ok((passed, detail)) => result(11, name, passed, detail),
        Err(e) => result(11, name, false, e.to_string()),
    }
}

/// Run the full gate in order.
pub fn run_all(threads: usize) -> Vec<CriterionResult> {
    vec![
        criterion_1_analytic_moments(),
        criterion_2_delta_exactness(),
        criterion_3_zo_bias(),
        criterion_4_zo_variance(),
        criterion_5_moment_difference(),
        criterion_6_bias_floor_scaling(threads),
        criterion_7_complexity_orders(),
        criterion_8_gamma_ratio_grid(),
        criterion_9_wpi_constants(),
        criterion_10_oracle_and_ula_control(threads),
        criterion_11_determinism(),
    ]
}

/// Machine-readable results table.
pub fn results_csv(results: &[CriterionResult]) -> Csv {
    let mut csv = Csv::new(&["criterion", "name", "passed", "detail"]);
    for r in results {
        csv.row(&[
            r.id.to_string(),
            r.name.to_string(),
            r.passed.to_string(),
            format!("\"{}\"", r.detail.replace('"', "'")),
        ]);
    }
    csv
}
