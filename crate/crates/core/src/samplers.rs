//! The discretized chains and the multi-chain ensemble runner.
//!
//! Three single-step kernels operate on a [`TargetDensity`]:
//!
//! * [`em_step`] — the first-order chain
//!   `x' = x - h (beta-1) ∇V(x) + sqrt(2 h V(x)) ξ`,
//! * [`zo_step`] — the same drift with `∇V` replaced by the Gaussian-smoothing
//!   estimator [`zo_gradient`] built from `m + 1` potential evaluations,
//! * [`ula_step`] — the plain unadjusted Langevin baseline
//!   `x' = x - h beta ∇V(x)/V(x) + sqrt(2h) ξ`.
//!
//! [`run_ensemble`] advances `N` independent chains with per-chain RNG streams
//! derived from `(seed, chain index)` by [`crate::rng::stream`]; output is
//! bit-identical for a given `(seed, config)` regardless of the thread count.
//! Per step, a chain consumes its randomness in a fixed order: the `m`
//! smoothing directions first (zeroth-order only), then the `d`-dimensional
//! Gaussian increment.

use crate::rng::{self, Rng, Xoshiro256PlusPlus};
use crate::targets::TargetDensity;
use crate::{Error, Result};

/// A state is declared diverged when its norm exceeds this or any coordinate
/// is non-finite.
pub const DIVERGENCE_RADIUS: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    FirstOrder,
    ZerothOrder,
    Ula,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::FirstOrder => "first-order",
            Algorithm::ZerothOrder => "zeroth-order",
            Algorithm::Ula => "ula",
        }
    }
}

/// Initial distribution of every chain.
#[derive(Clone, Debug)]
pub enum InitDistribution {
    /// Point mass; the default is the potential minimizer (the origin for
    /// Student families), which keeps the initial transport distance finite.
    Point(Vec<f64>),
    /// Isotropic Gaussian around `mean` with standard deviation `scale`.
    Gaussian { mean: Vec<f64>, scale: f64 },
}

/// What to do when a chain diverges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DivergencePolicy {
    /// Fail the whole run, reporting chain id and iteration.
    Abort,
    /// Freeze and exclude the chain, recording the event.
    DropAndFlag,
}

#[derive(Clone, Debug)]
pub struct SamplerConfig {
    pub algorithm: Algorithm,
    pub h: f64,
    /// Iteration count K.
    pub iterations: u64,
    /// Chain count N.
    pub chains: usize,
    /// Smoothing radius (zeroth-order only).
    pub sigma: f64,
    /// Batch size (zeroth-order only).
    pub m: u64,
    pub seed: u64,
    pub init: InitDistribution,
    pub divergence_policy: DivergencePolicy,
}

impl SamplerConfig {
    pub fn validate(&self, d: usize) -> Result<()> {
        if !(self.h > 0.0) {
            return Err(Error::InvalidParameter { name: "h", value: self.h, requirement: "h > 0" });
        }
        if self.chains == 0 {
            return Err(Error::InvalidParameter { name: "chains", value: 0.0, requirement: "N >= 1" });
        }
        if self.algorithm == Algorithm::ZerothOrder {
            if !(self.sigma > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "sigma",
                    value: self.sigma,
                    requirement: "sigma > 0 for the zeroth-order chain",
                });
            }
            if self.m == 0 {
                return Err(Error::InvalidParameter {
                    name: "m",
                    value: 0.0,
                    requirement: "m >= 1 for the zeroth-order chain",
                });
            }
        }
        let init_dim = match &self.init {
            InitDistribution::Point(x) => x.len(),
            InitDistribution::Gaussian { mean, .. } => mean.len(),
        };
        if init_dim != d {
            return Err(Error::DimensionMismatch { expected: d, got: init_dim });
        }
        Ok(())
    }
}

/// Exact evaluation counters, incremented at every call into the target.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EvalCounts {
    pub potential: u64,
    pub gradient: u64,
}

impl EvalCounts {
    fn add(&mut self, other: EvalCounts) {
        self.potential += other.potential;
        self.gradient += other.gradient;
    }
}

/// Snapshot of the ensemble at one iteration.
#[derive(Clone, Debug)]
pub struct SampleEnsemble {
    /// Iteration index of the snapshot.
    pub iteration: u64,
    /// Live chain states, ordered by chain id.
    pub states: Vec<Vec<f64>>,
    /// Chain ids of the rows in `states`.
    pub chain_ids: Vec<usize>,
    /// Derived stream seeds, one per chain in the full ensemble.
    pub chain_seeds: Vec<u64>,
    /// Evaluation counters accumulated so far, per chain.
    pub counts: Vec<EvalCounts>,
}

/// Result of a full ensemble run.
#[derive(Clone, Debug)]
pub struct EnsembleRun {
    pub snapshots: Vec<SampleEnsemble>,
    /// Chains that diverged (id, iteration), under the drop-and-flag policy.
    pub diverged: Vec<(usize, u64)>,
}

/// A zeroth-order gradient estimate, optionally retaining the smoothing
/// directions for diagnostics.
#[derive(Clone, Debug)]
pub struct GradientEstimate {
    pub value: Vec<f64>,
    pub directions: Option<Vec<Vec<f64>>>,
}

/// One first-order step `x' = x - h (beta-1) ∇V(x) + sqrt(2 h V(x)) ξ`,
/// using a single evaluation of `V` and of `∇V`.
pub fn em_step(
    target: &TargetDensity,
    x: &[f64],
    h: f64,
    xi: &[f64],
    counts: &mut EvalCounts,
) -> Result<Vec<f64>> {
    let mut out = x.to_vec();
    let mut grad = vec![0.0; target.dim()];
    em_step_in_place(target, &mut out, h, xi, &mut grad, counts)?;
    Ok(out)
}

fn em_step_in_place(
    target: &TargetDensity,
    x: &mut [f64],
    h: f64,
    xi: &[f64],
    grad: &mut [f64],
    counts: &mut EvalCounts,
) -> Result<()> {
    let v = target.potential(x)?;
    counts.potential += 1;
    target.gradient_into(x, grad)?;
    counts.gradient += 1;
    let drift = h * (target.beta() - 1.0);
    let noise = (2.0 * h * v).sqrt();
    for i in 0..x.len() {
        x[i] = x[i] - drift * grad[i] + noise * xi[i];
    }
    Ok(())
}

/// Gaussian-smoothing gradient estimator
/// `g = (1/m) Σ_i (V(x + sigma u_i) - V(x)) / sigma · u_i` with
/// `u_i ~ N(0, I_d)` i.i.d.; exactly `m + 1` potential evaluations.
pub fn zo_gradient<R: Rng>(
    target: &TargetDensity,
    x: &[f64],
    sigma: f64,
    m: u64,
    rng: &mut R,
    counts: &mut EvalCounts,
) -> Result<GradientEstimate> {
    let v = target.potential(x)?;
    counts.potential += 1;
    zo_gradient_with_base(target, x, v, sigma, m, rng, counts, false)
}

/// As [`zo_gradient`], retaining the directions.
pub fn zo_gradient_with_directions<R: Rng>(
    target: &TargetDensity,
    x: &[f64],
    sigma: f64,
    m: u64,
    rng: &mut R,
    counts: &mut EvalCounts,
) -> Result<GradientEstimate> {
    let v = target.potential(x)?;
    counts.potential += 1;
    zo_gradient_with_base(target, x, v, sigma, m, rng, counts, true)
}

#[allow(clippy::too_many_arguments)]
fn zo_gradient_with_base<R: Rng>(
    target: &TargetDensity,
    x: &[f64],
    v_at_x: f64,
    sigma: f64,
    m: u64,
    rng: &mut R,
    counts: &mut EvalCounts,
    retain: bool,
) -> Result<GradientEstimate> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter { name: "sigma", value: sigma, requirement: "sigma > 0" });
    }
    if m == 0 {
        return Err(Error::InvalidParameter { name: "m", value: 0.0, requirement: "m >= 1" });
    }
    let d = target.dim();
    let mut value = vec![0.0; d];
    let mut u = vec![0.0; d];
    let mut perturbed = vec![0.0; d];
    let mut retained = retain.then(Vec::new);
    for _ in 0..m {
        rng.fill_standard_normal(&mut u);
        for i in 0..d {
            perturbed[i] = x[i] + sigma * u[i];
        }
        let vp = target.potential(&perturbed)?;
        counts.potential += 1;
        let scale = (vp - v_at_x) / sigma;
        for i in 0..d {
            value[i] += scale * u[i];
        }
        if let Some(list) = retained.as_mut() {
            list.push(u.clone());
        }
    }
    let inv_m = 1.0 / m as f64;
    for g in &mut value {
        *g *= inv_m;
        if !g.is_finite() {
            return Err(Error::NonPositivePotential { value: *g });
        }
    }
    Ok(GradientEstimate { value, directions: retained })
}

/// One zeroth-order step
/// `x' = x - h (beta-1) g_{sigma,m}(x) + sqrt(2 h V(x)) ξ`.
///
/// The noise amplitude carries the same `sqrt(2 h V)` scaling as [`em_step`]
/// (dimensional consistency with the diffusion), and the base evaluation
/// `V(x)` is shared with the estimator, so a step costs exactly `m + 1`
/// potential evaluations.
#[allow(clippy::too_many_arguments)]
pub fn zo_step<R: Rng>(
    target: &TargetDensity,
    x: &[f64],
    h: f64,
    sigma: f64,
    m: u64,
    xi: &[f64],
    rng: &mut R,
    counts: &mut EvalCounts,
) -> Result<Vec<f64>> {
    let v = target.potential(x)?;
    counts.potential += 1;
    let g = zo_gradient_with_base(target, x, v, sigma, m, rng, counts, false)?;
    let drift = h * (target.beta() - 1.0);
    let noise = (2.0 * h * v).sqrt();
    Ok(x.iter()
        .zip(g.value.iter().zip(xi))
        .map(|(&xv, (&gv, &xiv))| xv - drift * gv + noise * xiv)
        .collect())
}

/// One unadjusted-Langevin step on `log pi = -beta ln V`:
/// `x' = x - h beta ∇V(x)/V(x) + sqrt(2h) ξ`.
pub fn ula_step(
    target: &TargetDensity,
    x: &[f64],
    h: f64,
    xi: &[f64],
    counts: &mut EvalCounts,
) -> Result<Vec<f64>> {
    let v = target.potential(x)?;
    counts.potential += 1;
    let grad = target.gradient(x)?;
    counts.gradient += 1;
    let drift = h * target.beta() / v;
    let noise = (2.0 * h).sqrt();
    Ok(x.iter()
        .zip(grad.iter().zip(xi))
        .map(|(&xv, (&gv, &xiv))| xv - drift * gv + noise * xiv)
        .collect())
}

fn is_diverged(x: &[f64]) -> bool {
    let mut norm_sq = 0.0;
    for &v in x {
        if !v.is_finite() {
            return true;
        }
        norm_sq += v * v;
    }
    norm_sq > DIVERGENCE_RADIUS * DIVERGENCE_RADIUS
}

struct ChainOutput {
    snapshots: Vec<(u64, Vec<f64>, EvalCounts)>,
    diverged_at: Option<u64>,
    stream_seed: u64,
}

/// Advance one chain through all K iterations, copying the state at each
/// scheduled iteration. Randomness order per step: zeroth-order smoothing
/// directions first (when applicable), then the Gaussian increment.
fn run_chain(
    target: &TargetDensity,
    config: &SamplerConfig,
    schedule: &[u64],
    chain: usize,
) -> Result<ChainOutput> {
    let d = target.dim();
    let stream_seed = rng::mix64(config.seed) ^ rng::mix64(chain as u64 + 1);
    let mut rng: Xoshiro256PlusPlus = rng::stream(config.seed, chain as u64);
    let mut counts = EvalCounts::default();

    let mut x = match &config.init {
        InitDistribution::Point(x0) => x0.clone(),
        InitDistribution::Gaussian { mean, scale } => {
            let mut xi = vec![0.0; d];
            rng.fill_standard_normal(&mut xi);
            mean.iter().zip(&xi).map(|(&m, &z)| m + scale * z).collect()
        }
    };

    let mut snapshots = Vec::with_capacity(schedule.len());
    let mut next_snap = 0;
    if schedule.get(next_snap) == Some(&0) {
        snapshots.push((0, x.clone(), counts));
        next_snap += 1;
    }

    let mut xi = vec![0.0; d];
    let mut grad = vec![0.0; d];
    for k in 1..=config.iterations {
        let step_result: Result<()> = match config.algorithm {
            Algorithm::FirstOrder => {
                rng.fill_standard_normal(&mut xi);
                em_step_in_place(target, &mut x, config.h, &xi, &mut grad, &mut counts)
            }
            Algorithm::ZerothOrder => (|| {
                let v = target.potential(&x)?;
                counts.potential += 1;
                let g = zo_gradient_with_base(
                    target, &x, v, config.sigma, config.m, &mut rng, &mut counts, false,
                )?;
                rng.fill_standard_normal(&mut xi);
                let drift = config.h * (target.beta() - 1.0);
                let noise = (2.0 * config.h * v).sqrt();
                for i in 0..d {
                    x[i] = x[i] - drift * g.value[i] + noise * xi[i];
                }
                Ok(())
            })(),
            Algorithm::Ula => (|| {
                rng.fill_standard_normal(&mut xi);
                let v = target.potential(&x)?;
                counts.potential += 1;
                target.gradient_into(&x, &mut grad)?;
                counts.gradient += 1;
                let drift = config.h * target.beta() / v;
                let noise = (2.0 * config.h).sqrt();
                for i in 0..d {
                    x[i] = x[i] - drift * grad[i] + noise * xi[i];
                }
                Ok(())
            })(),
        };
        let blown = step_result.is_err() || is_diverged(&x);
        if blown {
            match config.divergence_policy {
                DivergencePolicy::Abort => {
                    return Err(Error::ChainDiverged { chain, iteration: k })
                }
                DivergencePolicy::DropAndFlag => {
                    return Ok(ChainOutput { snapshots, diverged_at: Some(k), stream_seed });
                }
            }
        }
        if schedule.get(next_snap) == Some(&k) {
            snapshots.push((k, x.clone(), counts));
            next_snap += 1;
        }
    }
    Ok(ChainOutput { snapshots, diverged_at: None, stream_seed })
}

/// Run `config.chains` independent chains for `config.iterations` steps,
/// snapshotting at the (sorted, deduplicated) iterations in `record_schedule`.
///
/// `threads` controls only how chains are partitioned across worker threads;
/// for a fixed `(seed, config)` the output is bit-identical for every thread
/// count, because each chain owns the stream `rng::stream(seed, chain)` and
/// snapshots are assembled in chain order.
pub fn run_ensemble(
    target: &TargetDensity,
    config: &SamplerConfig,
    record_schedule: &[u64],
    threads: usize,
) -> Result<EnsembleRun> {
    config.validate(target.dim())?;
    let mut schedule: Vec<u64> = record_schedule
        .iter()
        .copied()
        .filter(|&k| k <= config.iterations)
        .collect();
    schedule.sort_unstable();
    schedule.dedup();

    let n = config.chains;
    let threads = threads.max(1).min(n);
    let mut results: Vec<Option<Result<ChainOutput>>> = Vec::new();
    results.resize_with(n, || None);

    if threads == 1 {
        for (chain, slot) in results.iter_mut().enumerate() {
            *slot = Some(run_chain(target, config, &schedule, chain));
        }
    } else {
        let chunk = n.div_ceil(threads);
        std::thread::scope(|scope| {
            for (t, slots) in results.chunks_mut(chunk).enumerate() {
                let schedule = &schedule;
                scope.spawn(move || {
                    for (offset, slot) in slots.iter_mut().enumerate() {
                        let chain = t * chunk + offset;
                        *slot = Some(run_chain(target, config, schedule, chain));
                    }
                });
            }
        });
    }

    let mut outputs = Vec::with_capacity(n);
    for slot in results {
        outputs.push(slot.expect("chain executed")?);
    }

    let mut diverged = Vec::new();
    for (chain, out) in outputs.iter().enumerate() {
        if let Some(k) = out.diverged_at {
            diverged.push((chain, k));
        }
    }

    let chain_seeds: Vec<u64> = outputs.iter().map(|o| o.stream_seed).collect();
    let mut snapshots = Vec::with_capacity(schedule.len());
    for (idx, &k) in schedule.iter().enumerate() {
        let mut states = Vec::new();
        let mut chain_ids = Vec::new();
        let mut counts = Vec::new();
        for (chain, out) in outputs.iter().enumerate() {
            if let Some((snap_k, state, c)) = out.snapshots.get(idx) {
                debug_assert_eq!(*snap_k, k);
                states.push(state.clone());
                chain_ids.push(chain);
                counts.push(*c);
            }
        }
        snapshots.push(SampleEnsemble {
            iteration: k,
            states,
            chain_ids,
            chain_seeds: chain_seeds.clone(),
            counts,
        });
    }
    Ok(EnsembleRun { snapshots, diverged })
}

/// Total evaluation counts across chains in the final snapshot.
pub fn total_counts(run: &EnsembleRun) -> EvalCounts {
    let mut total = EvalCounts::default();
    if let Some(last) = run.snapshots.last() {
        for c in &last.counts {
            total.add(*c);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn iso(d: usize, beta: f64) -> TargetDensity {
        TargetDensity::isotropic_student(d, beta).unwrap()
    }

    #[test]
    fn em_step_hand_arithmetic() {
        let t = iso(1, 2.0);
        let mut c = EvalCounts::default();
        // Fixed point at the minimizer with zero noise.
        let x = em_step(&iso(3, 5.0), &[0.0, 0.0, 0.0], 0.1, &[0.0, 0.0, 0.0], &mut c).unwrap();
        assert_eq!(x, vec![0.0, 0.0, 0.0]);
        // x' = 1 - 0.1 * 1 * 2 = 0.8
        let x = em_step(&t, &[1.0], 0.1, &[0.0], &mut c).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-15);
        // With xi = 1: 0.8 + sqrt(2 * 0.1 * 2) = 0.8 + sqrt(0.4)
        let x = em_step(&t, &[1.0], 0.1, &[1.0], &mut c).unwrap();
        assert!((x[0] - (0.8 + 0.4f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn em_step_rotation_equivariance() {
        let t = iso(2, 4.0);
        let theta = 0.37f64;
        let (cs, sn) = (theta.cos(), theta.sin());
        let rot = |v: &[f64]| vec![cs * v[0] - sn * v[1], sn * v[0] + cs * v[1]];
        let x = [0.8, -0.3];
        let xi = [0.25, 1.1];
        let mut c = EvalCounts::default();
        let lhs = em_step(&t, &rot(&x), 0.01, &rot(&xi), &mut c).unwrap();
        let rhs = rot(&em_step(&t, &x, 0.01, &xi, &mut c).unwrap());
        for i in 0..2 {
            assert!((lhs[i] - rhs[i]).abs() < 1e-14);
        }
        // Same for the ULA kernel.
        let lhs = ula_step(&t, &rot(&x), 0.01, &rot(&xi), &mut c).unwrap();
        let rhs = rot(&ula_step(&t, &x, 0.01, &xi, &mut c).unwrap());
        for i in 0..2 {
            assert!((lhs[i] - rhs[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn ula_step_hand_arithmetic_and_score_check() {
        let t = iso(1, 2.0);
        let mut c = EvalCounts::default();
        let x = ula_step(&t, &[0.0], 0.1, &[0.0], &mut c).unwrap();
        assert_eq!(x, vec![0.0]);
        // 1 - 0.1 * 2 * (2/2) = 0.8
        let x = ula_step(&t, &[1.0], 0.1, &[0.0], &mut c).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-15);
        // -beta ∇V/V matches finite differences of the log density.
        let t = iso(3, 4.5);
        let mut r = stream(12, 0);
        for _ in 0..20 {
            let x: Vec<f64> = (0..3).map(|_| 2.0 * r.uniform() - 1.0).collect();
            let v = t.potential(&x).unwrap();
            let grad = t.gradient(&x).unwrap();
            let h = 1e-6;
            for i in 0..3 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fd = (t.log_density_unnormalized(&xp).unwrap()
                    - t.log_density_unnormalized(&xm).unwrap())
                    / (2.0 * h);
                let score = -t.beta() * grad[i] / v;
                assert!((fd - score).abs() / score.abs().max(1.0) < 1e-6);
            }
        }
    }

    #[test]
    fn zo_gradient_closed_form_on_fixed_directions() {
        // For the quadratic potential, (V(x+su)-V(x))/s = 2<x,u> + s|u|^2, so
        // with one direction g = (2<x,u> + s|u|^2) u. Clone the stream to
        // recover the exact directions the estimator consumed.
        let t = iso(4, 6.0);
        let x = [0.3, -0.7, 1.1, 0.05];
        let sigma = 0.2;
        let mut r_est = stream(5, 1);
        let mut r_probe = r_est.clone();
        let mut c = EvalCounts::default();
        let est = zo_gradient_with_directions(&t, &x, sigma, 1, &mut r_est, &mut c).unwrap();
        let mut u = vec![0.0; 4];
        r_probe.fill_standard_normal(&mut u);
        assert_eq!(est.directions.as_ref().unwrap()[0], u);
        let dot: f64 = x.iter().zip(&u).map(|(a, b)| a * b).sum();
        let usq: f64 = u.iter().map(|v| v * v).sum();
        let coeff = 2.0 * dot + sigma * usq;
        for i in 0..4 {
            assert!((est.value[i] - coeff * u[i]).abs() < 1e-12);
        }
        assert_eq!(c, EvalCounts { potential: 2, gradient: 0 });
    }

    #[test]
    fn zo_gradient_unbiased_at_minimizer() {
        // At x = 0 the estimator has mean zero by symmetry.
        let t = iso(3, 5.0);
        let mut r = stream(21, 0);
        let mut c = EvalCounts::default();
        let n = 200_000;
        let mut mean = [0.0; 3];
        for _ in 0..n {
            let g = zo_gradient(&t, &[0.0, 0.0, 0.0], 0.1, 1, &mut r, &mut c).unwrap();
            for i in 0..3 {
                mean[i] += g.value[i];
            }
        }
        // Var of each coordinate of g is O(sigma^2 d): SE ~ sqrt(var/n).
        for m in mean {
            assert!((m / n as f64).abs() < 0.01);
        }
    }

    #[test]
    fn zo_step_approaches_em_step() {
        // sigma -> 0, m large: the zeroth-order step converges to the exact
        // one at matched noise.
        let t = iso(4, 6.0);
        let x = [0.5, -0.25, 0.8, -1.0];
        let xi = [0.3, -0.6, 0.9, 0.1];
        let h = 0.01;
        let mut c = EvalCounts::default();
        let exact = em_step(&t, &x, h, &xi, &mut c).unwrap();
        let mut r = stream(77, 0);
        let approx = zo_step(&t, &x, h, 1e-4, 10_000, &xi, &mut r, &mut c).unwrap();
        for i in 0..4 {
            assert!(
                (approx[i] - exact[i]).abs() < 1e-2,
                "coordinate {i}: {} vs {}",
                approx[i],
                exact[i]
            );
        }
    }

    #[test]
    fn zo_step_closed_form_at_origin() {
        // At x = 0 with xi = 0: x' = -h (beta-1) (sigma/m) Σ |u_i|² u_i.
        let t = iso(3, 4.0);
        let h = 0.05;
        let sigma = 0.3;
        let m = 4u64;
        let mut r_est = stream(8, 2);
        let mut r_probe = r_est.clone();
        let mut c = EvalCounts::default();
        let x = zo_step(&t, &[0.0; 3], h, sigma, m, &[0.0; 3], &mut r_est, &mut c).unwrap();
        let mut expect = [0.0f64; 3];
        let mut u = vec![0.0; 3];
        for _ in 0..m {
            r_probe.fill_standard_normal(&mut u);
            let usq: f64 = u.iter().map(|v| v * v).sum();
            for i in 0..3 {
                expect[i] += sigma * usq * u[i];
            }
        }
        let scale = -h * (t.beta() - 1.0) / m as f64;
        for i in 0..3 {
            assert!((x[i] - scale * expect[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn ensemble_counters_are_exact() {
        let t = iso(2, 3.0);
        let base = SamplerConfig {
            algorithm: Algorithm::FirstOrder,
            h: 0.01,
            iterations: 25,
            chains: 3,
            sigma: 0.1,
            m: 5,
            seed: 9,
            init: InitDistribution::Point(vec![0.0, 0.0]),
            divergence_policy: DivergencePolicy::Abort,
        };
        let run = run_ensemble(&t, &base, &[25], 1).unwrap();
        for c in &run.snapshots[0].counts {
            assert_eq!(c.gradient, 25);
            assert_eq!(c.potential, 25);
        }
        let zo = SamplerConfig { algorithm: Algorithm::ZerothOrder, ..base.clone() };
        let run = run_ensemble(&t, &zo, &[25], 1).unwrap();
        for c in &run.snapshots[0].counts {
            assert_eq!(c.gradient, 0);
            assert_eq!(c.potential, 25 * (5 + 1));
        }
    }

    #[test]
    fn ensemble_deterministic_across_thread_counts() {
        let t = iso(3, 4.0);
        let config = SamplerConfig {
            algorithm: Algorithm::FirstOrder,
            h: 0.01,
            iterations: 50,
            chains: 17,
            sigma: 0.0,
            m: 1,
            seed: 1234,
            init: InitDistribution::Gaussian { mean: vec![0.0; 3], scale: 0.5 },
            divergence_policy: DivergencePolicy::Abort,
        };
        let a = run_ensemble(&t, &config, &[0, 10, 50], 1).unwrap();
        let b = run_ensemble(&t, &config, &[0, 10, 50], 4).unwrap();
        let c = run_ensemble(&t, &config, &[0, 10, 50], 16).unwrap();
        for (s1, s2) in a.snapshots.iter().zip(&b.snapshots) {
            assert_eq!(s1.states, s2.states);
        }
        for (s1, s2) in a.snapshots.iter().zip(&c.snapshots) {
            assert_eq!(s1.states, s2.states);
        }
    }

    #[test]
    fn ensemble_k0_snapshot_is_init() {
        let t = iso(2, 3.0);
        let config = SamplerConfig {
            algorithm: Algorithm::Ula,
            h: 0.01,
            iterations: 0,
            chains: 4,
            sigma: 0.0,
            m: 1,
            seed: 3,
            init: InitDistribution::Point(vec![0.25, -0.5]),
            divergence_policy: DivergencePolicy::Abort,
        };
        let run = run_ensemble(&t, &config, &[0], 2).unwrap();
        assert_eq!(run.snapshots.len(), 1);
        for s in &run.snapshots[0].states {
            assert_eq!(s, &vec![0.25, -0.5]);
        }
    }

    #[test]
    fn divergence_policies() {
        // A huge step size on a strongly drifting target blows up quickly.
        let t = iso(1, 50.0);
        let config = SamplerConfig {
            algorithm: Algorithm::FirstOrder,
            h: 10.0,
            iterations: 400,
            chains: 2,
            sigma: 0.0,
            m: 1,
            seed: 7,
            init: InitDistribution::Point(vec![5.0]),
            divergence_policy: DivergencePolicy::Abort,
        };
        match run_ensemble(&t, &config, &[400], 1) {
            Err(Error::ChainDiverged { iteration, .. }) => assert!(iteration >= 1),
            other => panic!("expected divergence, got {other:?}"),
        }
        let drop = SamplerConfig {
            divergence_policy: DivergencePolicy::DropAndFlag,
            ..config
        };
        let run = run_ensemble(&t, &drop, &[400], 1).unwrap();
        assert_eq!(run.diverged.len(), 2);
        assert!(run.snapshots[0].states.is_empty());
    }
}
