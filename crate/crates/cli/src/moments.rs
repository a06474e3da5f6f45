//! The `moments` subcommand: analytic moments, Monte Carlo estimates from the
//! reference sampler, and the curvature-based upper bound, side by side.

use heavytail::metrics::{default_blocks, grad_norm_sq_values, potential_values, robust_moment};
use heavytail::rng;
use heavytail::targets::{PotentialFamily, Provenance};
use heavytail::theory;

use crate::config::ExperimentSpec;
use crate::csvio::{fmt_f64, Csv};
use crate::Result;

const STREAM_MOMENTS: u64 = u64::MAX - 5;

pub fn render(spec: &ExperimentSpec) -> Result<Csv> {
    let validated = spec.validate_run()?;
    let target = validated.target;
    let d = target.dim();
    let beta = target.beta();

    let mut csv = Csv::new(&["source", "ev", "ev_se", "egrad2", "egrad2_se", "provenance", "blocks"]);

    let sigma = match target.family() {
        PotentialFamily::AnisotropicStudent(s) => Some(s),
        _ => None,
    };
    let analytic = theory::analytic_moments_student(d, beta, sigma)?;
    csv.row(&[
        "analytic".into(),
        fmt_f64(analytic.ev),
        "0".into(),
        fmt_f64(analytic.egrad2),
        "0".into(),
        match analytic.egrad2_provenance {
            Provenance::Exact => "exact".into(),
            Provenance::UpperBound => "upper-bound".into(),
        },
        "0".into(),
    ]);

    let mut rng = rng::stream(spec.sampler.seed, STREAM_MOMENTS);
    let samples = target.reference_sample(spec.experiment.reference_n, &mut rng)?;
    let blocks = default_blocks(d, beta).min(samples.len());
    let v = potential_values(&target, &samples)?;
    let ev = robust_moment(&v, blocks)?;
    let g2 = grad_norm_sq_values(&target, &samples)?;
    let eg = robust_moment(&g2, blocks)?;
    csv.row(&[
        "monte-carlo".into(),
        fmt_f64(ev.estimate),
        fmt_f64(ev.se),
        fmt_f64(eg.estimate),
        fmt_f64(eg.se),
        "estimate".into(),
        blocks.to_string(),
    ]);

    // Curvature bound, minimized over a grid of r (valid whenever the
    // moments are finite; V(0) = 1 for Student families).
    if let Ok((ev_b, eg_b, _r)) =
        theory::moment_bound_general_min_over_r(target.alpha(), target.lipschitz(), 1.0, beta, d, 64)
    {
        csv.row(&[
            "curvature-bound".into(),
            fmt_f64(ev_b),
            "0".into(),
            fmt_f64(eg_b),
            "0".into(),
            "upper-bound".into(),
            "0".into(),
        ]);
    }
    Ok(csv)
}
