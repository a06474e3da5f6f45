//! Empirical diagnostics: sliced Wasserstein-2, robust moments, radial fit.
//!
//! The theory bounds speak about true distributions; at desk scale we compare
//! finite ensembles against the exact reference sampler, so every convergence
//! number should be read next to the independent-sample noise floor
//! (`sliced_w2` between two reference sets of the same size).

use crate::rng::Rng;
use crate::special::regularized_incomplete_beta;
use crate::targets::{PotentialFamily, TargetDensity};
use crate::{Error, Result};

/// Quantile-coupling Wasserstein-2 between two equal-size one-dimensional
/// samples, both sorted ascending: `sqrt( (1/n) Σ (a_(i) - b_(i))² )`.
pub fn w2_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch { left: a.len(), right: b.len() });
    }
    debug_assert!(a.windows(2).all(|w| w[0] <= w[1]), "w2_1d expects sorted input");
    debug_assert!(b.windows(2).all(|w| w[0] <= w[1]), "w2_1d expects sorted input");
    if a.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok((sum / a.len() as f64).sqrt())
}

/// A sliced Wasserstein-2 estimate with its bootstrap standard error.
#[derive(Clone, Copy, Debug)]
pub struct SlicedW2 {
    pub value: f64,
    pub se: f64,
    pub n_projections: usize,
}

/// Monte Carlo sliced Wasserstein-2: the average of [`w2_1d`] over `n_proj`
/// uniform random unit directions, with a bootstrap standard error over
/// projections (200 resamples). Deterministic given the generator state, and
/// symmetric in its two arguments for the same projection stream.
pub fn sliced_w2<R: Rng>(
    a: &[Vec<f64>],
    b: &[Vec<f64>],
    n_proj: usize,
    rng: &mut R,
) -> Result<SlicedW2> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch { left: a.len(), right: b.len() });
    }
    if n_proj == 0 {
        return Err(Error::InvalidParameter { name: "n_proj", value: 0.0, requirement: ">= 1" });
    }
    if a.is_empty() {
        return Ok(SlicedW2 { value: 0.0, se: 0.0, n_projections: n_proj });
    }
    let d = a[0].len();
    let mut theta = vec![0.0; d];
    let mut pa = vec![0.0; a.len()];
    let mut pb = vec![0.0; b.len()];
    let mut per_projection = Vec::with_capacity(n_proj);
    for _ in 0..n_proj {
        // Gaussian direction normalized to the sphere.
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
        project(a, &theta, &mut pa);
        project(b, &theta, &mut pb);
        pa.sort_unstable_by(f64::total_cmp);
        pb.sort_unstable_by(f64::total_cmp);
        per_projection.push(w2_1d(&pa, &pb)?);
    }
    let value = per_projection.iter().sum::<f64>() / n_proj as f64;
    // Bootstrap over projections.
    let mut se = 0.0;
    if n_proj > 1 {
        const RESAMPLES: usize = 200;
        let mut boot_means = Vec::with_capacity(RESAMPLES);
        for _ in 0..RESAMPLES {
            let mut acc = 0.0;
            for _ in 0..n_proj {
                let idx = (rng.next_u64() % n_proj as u64) as usize;
                acc += per_projection[idx];
            }
            boot_means.push(acc / n_proj as f64);
        }
        let mean = boot_means.iter().sum::<f64>() / RESAMPLES as f64;
        let var = boot_means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>()
            / (RESAMPLES - 1) as f64;
        se = var.sqrt();
    }
    Ok(SlicedW2 { value, se, n_projections: n_proj })
}

fn project(samples: &[Vec<f64>], theta: &[f64], out: &mut [f64]) {
    for (o, s) in out.iter_mut().zip(samples) {
        *o = s.iter().zip(theta).map(|(a, b)| a * b).sum();
    }
}

/// A (possibly robust) moment estimate.
#[derive(Clone, Copy, Debug)]
pub struct MomentEstimate {
    pub estimate: f64,
    /// Standard error: `sd/sqrt(n)` for the plain mean; for median-of-means,
    /// the asymptotic-normal `1.2533 · sd(block means)/sqrt(blocks)`.
    pub se: f64,
    pub blocks: usize,
}

/// Median-of-means over `blocks` equal blocks (`blocks = 1` is the plain
/// mean). The robust route is for integrands with infinite variance under
/// heavy-tailed targets, where the CLT fails for the plain mean.
pub fn robust_moment(values: &[f64], blocks: usize) -> Result<MomentEstimate> {
    let n = values.len();
    if blocks == 0 || blocks > n {
        return Err(Error::InvalidParameter {
            name: "blocks",
            value: blocks as f64,
            requirement: "1 <= blocks <= n",
        });
    }
    if blocks == 1 {
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / (n.saturating_sub(1).max(1)) as f64;
        return Ok(MomentEstimate { estimate: mean, se: (var / n as f64).sqrt(), blocks: 1 });
    }
    let block_len = n / blocks;
    let mut means: Vec<f64> = (0..blocks)
        .map(|b| {
            let slice = &values[b * block_len..(b + 1) * block_len];
            slice.iter().sum::<f64>() / block_len as f64
        })
        .collect();
    means.sort_unstable_by(f64::total_cmp);
    let median = if blocks % 2 == 1 {
        means[blocks / 2]
    } else {
        0.5 * (means[blocks / 2 - 1] + means[blocks / 2])
    };
    let grand = means.iter().sum::<f64>() / blocks as f64;
    let var = means.iter().map(|m| (m - grand) * (m - grand)).sum::<f64>() / (blocks - 1) as f64;
    let se = 1.2533 * (var / blocks as f64).sqrt();
    Ok(MomentEstimate { estimate: median, se, blocks })
}

/// Default block count for heavy-tail moment estimation of `E[V]`: 200 blocks
/// when `Var(V)` is infinite (`beta <= d/2 + 2`), otherwise the plain mean.
pub fn default_blocks(d: usize, beta: f64) -> usize {
    if beta <= d as f64 / 2.0 + 2.0 {
        200
    } else {
        1
    }
}

/// Per-sample `V` values.
pub fn potential_values(target: &TargetDensity, samples: &[Vec<f64>]) -> Result<Vec<f64>> {
    samples.iter().map(|x| target.potential(x)).collect()
}

/// Per-sample `|∇V|²` values.
pub fn grad_norm_sq_values(target: &TargetDensity, samples: &[Vec<f64>]) -> Result<Vec<f64>> {
    samples
        .iter()
        .map(|x| Ok(target.gradient(x)?.iter().map(|g| g * g).sum()))
        .collect()
}

/// Kolmogorov–Smirnov statistic of the radial law: under `pi_beta` the
/// statistic `u = xᵀΣx/(1 + xᵀΣx)` follows `Beta(d/2, beta - d/2)` exactly,
/// so `D_n = sup |F_n(u) - I_u(d/2, beta - d/2)|` measures distributional fit.
pub fn radial_beta_ks(samples: &[Vec<f64>], target: &TargetDensity) -> Result<f64> {
    if !target.is_student() {
        return Err(Error::UnsupportedOracle);
    }
    if samples.is_empty() {
        return Err(Error::InvalidParameter { name: "n", value: 0.0, requirement: "n >= 1" });
    }
    let d = target.dim();
    let a = d as f64 / 2.0;
    let b = target.beta() - a;
    if !(b > 0.0) {
        return Err(Error::NotNormalizable { beta: target.beta(), limit: a });
    }
    let mut u: Vec<f64> = samples
        .iter()
        .map(|x| {
            let q = match target.family() {
                PotentialFamily::IsotropicStudent => x.iter().map(|v| v * v).sum::<f64>(),
                PotentialFamily::AnisotropicStudent(sigma) => sigma.quadratic_form(x),
                PotentialFamily::Custom { .. } => unreachable!("student checked above"),
            };
            q / (1.0 + q)
        })
        .collect();
    u.sort_unstable_by(f64::total_cmp);
    let n = u.len() as f64;
    let mut d_stat: f64 = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        let cdf = regularized_incomplete_beta(a, b, ui)?;
        let upper = (i + 1) as f64 / n - cdf;
        let lower = cdf - i as f64 / n;
        d_stat = d_stat.max(upper).max(lower);
    }
    Ok(d_stat)
}

/// Asymptotic one-sample KS critical value at the 1% level: `1.6276/sqrt(n)`.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

/// One metrics row of an experiment.
#[derive(Clone, Copy, Debug)]
pub struct MetricReport {
    pub iteration: u64,
    pub sliced_w2: f64,
    pub sliced_w2_se: f64,
    pub ev_hat: f64,
    pub ev_se: f64,
    pub egrad2_hat: f64,
    pub egrad2_se: f64,
    pub ks: f64,
    pub n_samples: usize,
    pub n_projections: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::targets::TargetDensity;

    #[test]
    fn w2_1d_hand_values() {
        assert_eq!(w2_1d(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(w2_1d(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        let got = w2_1d(&[0.0, 1.0], &[0.0, 2.0]).unwrap();
        assert!((got - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(w2_1d(&[0.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn w2_1d_translation_identity() {
        let mut r = stream(4, 0);
        for _ in 0..20 {
            let mut a: Vec<f64> = (0..64).map(|_| r.standard_normal()).collect();
            a.sort_unstable_by(f64::total_cmp);
            let c = 3.0 * r.uniform() - 1.5;
            let b: Vec<f64> = a.iter().map(|v| v + c).collect();
            let got = w2_1d(&a, &b).unwrap();
            assert!((got - c.abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn sliced_w2_identical_sets_and_symmetry() {
        let t = TargetDensity::isotropic_student(3, 4.0).unwrap();
        let mut r = stream(10, 0);
        let a = t.reference_sample(256, &mut r).unwrap();
        let b = t.reference_sample(256, &mut r).unwrap();
        let zero = sliced_w2(&a, &a, 16, &mut stream(1, 0)).unwrap();
        assert_eq!(zero.value, 0.0);
        let ab = sliced_w2(&a, &b, 32, &mut stream(2, 0)).unwrap();
        let ba = sliced_w2(&b, &a, 32, &mut stream(2, 0)).unwrap();
        assert_eq!(ab.value, ba.value);
        assert!(ab.value > 0.0);
        assert!(ab.se > 0.0);
    }

    #[test]
    fn sliced_w2_shift_in_one_dimension() {
        // In d = 1 the estimate reduces to |c| for a pure shift.
        let a: Vec<Vec<f64>> = (0..128).map(|i| vec![i as f64 / 128.0]).collect();
        let b: Vec<Vec<f64>> = a.iter().map(|x| vec![x[0] + 0.75]).collect();
        let got = sliced_w2(&a, &b, 8, &mut stream(3, 0)).unwrap();
        assert!((got.value - 0.75).abs() < 1e-12);
    }

    #[test]
    fn sliced_w2_metric_along_shared_projections() {
        // With a common projection stream the sliced distance is a metric:
        // check the triangle inequality on random triples.
        let t = TargetDensity::isotropic_student(2, 3.0).unwrap();
        let mut r = stream(17, 0);
        for trial in 0..5 {
            let a = t.reference_sample(128, &mut r).unwrap();
            let b = t.reference_sample(128, &mut r).unwrap();
            let c = t.reference_sample(128, &mut r).unwrap();
            let seed = 100 + trial;
            let ab = sliced_w2(&a, &b, 32, &mut stream(seed, 0)).unwrap().value;
            let bc = sliced_w2(&b, &c, 32, &mut stream(seed, 0)).unwrap().value;
            let ac = sliced_w2(&a, &c, 32, &mut stream(seed, 0)).unwrap().value;
            assert!(ac <= ab + bc + 1e-12, "triangle violated: {ac} > {ab} + {bc}");
        }
    }

    #[test]
    fn noise_floor_shrinks_with_sample_size() {
        let t = TargetDensity::isotropic_student(3, 4.0).unwrap();
        let mut r = stream(23, 0);
        let mut floors = Vec::new();
        for n in [1024usize, 4096, 16384] {
            let a = t.reference_sample(n, &mut r).unwrap();
            let b = t.reference_sample(n, &mut r).unwrap();
            floors.push(sliced_w2(&a, &b, 32, &mut stream(5, 0)).unwrap().value);
        }
        assert!(floors[0] > floors[1] && floors[1] > floors[2], "{floors:?}");
    }

    #[test]
    fn robust_moment_constant_and_blocks() {
        let values = vec![2.5; 1000];
        for blocks in [1usize, 10, 200] {
            let est = robust_moment(&values, blocks).unwrap();
            assert_eq!(est.estimate, 2.5);
            assert_eq!(est.se, 0.0);
        }
        assert!(robust_moment(&values, 0).is_err());
        assert!(robust_moment(&values, 1001).is_err());
    }

    #[test]
    fn default_blocks_rule() {
        assert_eq!(default_blocks(10, 6.5), 200); // infinite Var(V)
        assert_eq!(default_blocks(10, 11.0), 1);
        assert_eq!(default_blocks(10, 7.0), 200); // boundary included
    }

    #[test]
    fn radial_ks_accepts_oracle_and_rejects_gaussian() {
        let t = TargetDensity::isotropic_student(10, 11.0).unwrap();
        let mut r = stream(31, 0);
        let good = t.reference_sample(20_000, &mut r).unwrap();
        let ks = radial_beta_ks(&good, &t).unwrap();
        assert!(ks < ks_critical_1pct(20_000), "ks {ks}");
        // Standard Gaussian samples are far from the radial Beta law.
        let bad: Vec<Vec<f64>> = (0..20_000)
            .map(|_| {
                let mut x = vec![0.0; 10];
                r.fill_standard_normal(&mut x);
                x
            })
            .collect();
        let ks_bad = radial_beta_ks(&bad, &t).unwrap();
        assert!(ks_bad > ks_critical_1pct(20_000), "ks_bad {ks_bad}");
    }

    #[test]
    fn radial_ks_degenerate_single_point() {
        let t = TargetDensity::isotropic_student(2, 3.0).unwrap();
        let ks = radial_beta_ks(&[vec![1.0, 0.0]], &t).unwrap();
        // u = 1/2, F = I_{1/2}(1, 2) = 1 - (1/2)^2 = 3/4; D = max(3/4, 1/4).
        assert!((ks - 0.75).abs() < 1e-12);
        // Non-student families are rejected.
        let custom = TargetDensity::custom(
            1,
            2.0,
            std::sync::Arc::new(|x: &[f64]| 1.0 + x[0] * x[0]),
            std::sync::Arc::new(|x: &[f64], out: &mut [f64]| out[0] = 2.0 * x[0]),
            2.0,
            2.0,
            2.0,
        )
        .unwrap();
        assert!(radial_beta_ks(&[vec![1.0]], &custom).is_err());
    }
}
