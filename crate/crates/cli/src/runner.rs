//! The `run` subcommand: advance the ensemble, measure it against the exact
//! reference sampler at every scheduled iteration, and write the artifacts
//! (`snapshots.csv`, `metrics.csv`, `theory.csv`, `run.manifest`).

use std::path::{Path, PathBuf};

use heavytail::metrics::{
    default_blocks, grad_norm_sq_values, potential_values, radial_beta_ks, robust_moment,
    sliced_w2,
};
use heavytail::rng;
use heavytail::samplers::{run_ensemble, total_counts, SampleEnsemble};
use heavytail::targets::{Provenance, TargetDensity};
use heavytail::theory::{Reported, TheoryReport};

use crate::config::ExperimentSpec;
use crate::csvio::{fmt_f64, fmt_opt, Csv};
use crate::{HarnessError, Result};

/// Stream indices reserved for non-chain randomness (chain i uses index i).
const STREAM_REFERENCE: u64 = u64::MAX - 2;
const STREAM_NOISE_FLOOR: u64 = u64::MAX - 3;
const STREAM_PROJECTIONS: u64 = u64::MAX - 4;

pub struct RunArtifacts {
    pub out_dir: PathBuf,
    pub snapshots_csv: PathBuf,
    pub metrics_csv: PathBuf,
    pub theory_csv: PathBuf,
    pub manifest: PathBuf,
    pub noise_floor: f64,
    pub final_sliced_w2: f64,
}

/// Crude upper bound for the initial transport distance:
/// `sqrt(E|x_0|²) + sqrt(E_pi|X|²)`, with `E_pi|X|² = (E[V]-1)` isotropic and
/// `<= (E[V]-1)/lambda_min(Σ)` anisotropic. Only a log factor of the
/// iteration count depends on it.
pub fn crude_w2_init(target: &TargetDensity, spec: &ExperimentSpec, ev: f64) -> f64 {
    let init_sq = match spec.sampler.init.as_str() {
        "gaussian" => spec.target.d as f64 * spec.sampler.init_scale * spec.sampler.init_scale,
        _ => 0.0,
    };
    // lambda_min = alpha / 2 for Student families (identity in the isotropic case).
    let stationary_sq = (ev - 1.0).max(0.0) / (target.alpha() / 2.0);
    init_sq.sqrt() + stationary_sq.sqrt()
}

fn auto_schedule(iterations: u64) -> Vec<u64> {
    let mut ks = vec![0u64];
    if iterations == 0 {
        return ks;
    }
    let points = 12u32;
    for j in 1..=points {
        let k = (iterations as f64).powf(j as f64 / points as f64).round() as u64;
        ks.push(k.clamp(1, iterations));
    }
    ks.sort_unstable();
    ks.dedup();
    ks
}

pub fn run(spec: &ExperimentSpec, threads: usize) -> Result<RunArtifacts> {
    let validated = spec.validate_run()?;
    let target = validated.target;
    let config = validated.config;
    let d = target.dim();

    let schedule = match &spec.experiment.record {
        Some(ks) => {
            let mut ks = ks.clone();
            ks.sort_unstable();
            ks.dedup();
            ks
        }
        None => auto_schedule(config.iterations),
    };

    let run = run_ensemble(&target, &config, &schedule, threads).map_err(|e| match e {
        heavytail::Error::ChainDiverged { chain, iteration } => {
            HarnessError::Diverged { chain, iteration }
        }
        other => HarnessError::Core(other),
    })?;

    // Reference draws: one comparison set and one independent set for the
    // noise floor, both on reserved streams.
    let n_ref = spec.experiment.reference_n;
    let mut ref_rng = rng::stream(config.seed, STREAM_REFERENCE);
    let reference = target.reference_sample(n_ref, &mut ref_rng)?;
    let mut floor_rng = rng::stream(config.seed, STREAM_NOISE_FLOOR);
    let floor_set = target.reference_sample(config.chains.min(n_ref), &mut floor_rng)?;

    let n_proj = spec.experiment.projections;
    let floor = sliced_w2(
        &reference[..floor_set.len()],
        &floor_set,
        n_proj,
        &mut rng::stream(config.seed, STREAM_PROJECTIONS),
    )?;

    // Metrics per snapshot.
    let blocks = default_blocks(d, target.beta());
    let mut metrics = Csv::new(&["k", "sliced_w2", "sw2_se", "ev_hat", "egrad2_hat", "ks"]);
    let mut final_sw2 = 0.0;
    let mut w2_init_surrogate = None;
    for snap in &run.snapshots {
        let n = snap.states.len();
        if n == 0 {
            metrics.row(&[
                snap.iteration.to_string(),
                "na".into(),
                "na".into(),
                "na".into(),
                "na".into(),
                "na".into(),
            ]);
            continue;
        }
        let sw2 = sliced_w2(
            &snap.states,
            &reference[..n],
            n_proj,
            &mut rng::stream(config.seed, STREAM_PROJECTIONS),
        )?;
        let v = potential_values(&target, &snap.states)?;
        let ev = robust_moment(&v, blocks.min(n))?;
        let g2 = grad_norm_sq_values(&target, &snap.states)?;
        let eg = robust_moment(&g2, blocks.min(n))?;
        let ks = radial_beta_ks(&snap.states, &target)?;
        metrics.row(&[
            snap.iteration.to_string(),
            fmt_f64(sw2.value),
            fmt_f64(sw2.se),
            fmt_f64(ev.estimate),
            fmt_f64(eg.estimate),
            fmt_f64(ks),
        ]);
        if snap.iteration == 0 {
            w2_init_surrogate = Some(sw2.value);
        }
        final_sw2 = sw2.value;
    }

    // Theory report for this target and accuracy request.
    let moments = heavytail::theory::analytic_moments_student(
        d,
        target.beta(),
        match target.family() {
            heavytail::targets::PotentialFamily::AnisotropicStudent(s) => Some(s),
            _ => None,
        },
    )?;
    let w2_init = spec
        .experiment
        .w2_init
        .unwrap_or_else(|| crude_w2_init(&target, spec, moments.ev));
    let report = TheoryReport::for_student(
        d,
        target.beta(),
        target.alpha(),
        target.lipschitz(),
        target.cv(),
        match target.family() {
            heavytail::targets::PotentialFamily::AnisotropicStudent(s) => Some(s),
            _ => None,
        },
        spec.experiment.epsilon,
        w2_init,
        config.m.max(1),
    );
    let theory_csv = theory_report_csv(&spec.scenario, &report);

    // Snapshot matrix.
    let mut header: Vec<String> = vec!["chain".into(), "k".into()];
    for i in 1..=d {
        header.push(format!("x_{i}"));
    }
    let mut snapshots = Csv::new(&header.iter().map(|s| s.as_str()).collect::<Vec<_>>());
    for snap in &run.snapshots {
        write_snapshot_rows(&mut snapshots, snap);
    }

    // Manifest: the spec echo plus a [run] block (ignored on re-parse).
    let totals = total_counts(&run);
    let mut manifest = spec.to_config_text();
    manifest.push_str("\n[run]\n");
    manifest.push_str(&format!("version = {}\n", env!("CARGO_PKG_VERSION")));
    manifest.push_str(&format!("noise_floor = {}\n", fmt_f64(floor.value)));
    manifest.push_str(&format!("noise_floor_se = {}\n", fmt_f64(floor.se)));
    manifest.push_str(&format!("w2_init_used = {}\n", fmt_f64(w2_init)));
    // Finite-sample surrogate for the initial transport distance; biased by
    // the sampling noise floor above.
    manifest.push_str(&format!(
        "w2_init_sliced_surrogate = {}\n",
        fmt_opt(w2_init_surrogate)
    ));
    manifest.push_str(&format!("potential_evaluations = {}\n", totals.potential));
    manifest.push_str(&format!("gradient_evaluations = {}\n", totals.gradient));
    manifest.push_str(&format!("diverged_chains = {}\n", run.diverged.len()));
    for (chain, k) in &run.diverged {
        manifest.push_str(&format!("diverged = {chain}:{k}\n"));
    }

    let out_dir = PathBuf::from(&spec.experiment.out);
    std::fs::create_dir_all(&out_dir).map_err(|e| HarnessError::io(&out_dir, e))?;
    let paths = RunArtifacts {
        snapshots_csv: out_dir.join("snapshots.csv"),
        metrics_csv: out_dir.join("metrics.csv"),
        theory_csv: out_dir.join("theory.csv"),
        manifest: out_dir.join("run.manifest"),
        out_dir,
        noise_floor: floor.value,
        final_sliced_w2: final_sw2,
    };
    snapshots.write_to(&paths.snapshots_csv)?;
    metrics.write_to(&paths.metrics_csv)?;
    theory_csv.write_to(&paths.theory_csv)?;
    std::fs::write(&paths.manifest, manifest).map_err(|e| HarnessError::io(&paths.manifest, e))?;
    Ok(paths)
}

fn write_snapshot_rows(csv: &mut Csv, snap: &SampleEnsemble) {
    for (row, chain) in snap.chain_ids.iter().enumerate() {
        let mut fields = Vec::with_capacity(snap.states[row].len() + 2);
        fields.push(chain.to_string());
        fields.push(snap.iteration.to_string());
        for v in &snap.states[row] {
            fields.push(fmt_f64(*v));
        }
        csv.row(&fields);
    }
}

fn fmt_reported(r: &Reported<f64>) -> String {
    fmt_opt(r.value())
}

/// One-row CSV rendering of a [`TheoryReport`]; absent quantities print `na`.
pub fn theory_report_csv(scenario: &str, r: &TheoryReport) -> Csv {
    let mut csv = Csv::new(&[
        "scenario",
        "d",
        "beta",
        "alpha",
        "lipschitz",
        "cv",
        "epsilon",
        "w2_init",
        "delta",
        "ev",
        "egrad2",
        "egrad2_provenance",
        "h_max_first",
        "h_star_first",
        "k_first",
        "contraction_a",
        "contraction_b",
        "contraction_c",
        "bias_floor_first",
        "sigma_smoothing",
        "m",
        "h_max_zeroth",
        "h_star_zeroth",
        "k_zeroth",
        "contraction_a_zeroth",
        "contraction_b_zeroth",
        "contraction_c_zeroth",
        "bias_floor_zeroth",
        "wpi_strongly_convex",
        "chi2_rate_strongly_convex",
        "chi2_strongly_convex_applicable",
        "wpi_small_beta",
        "chi2_rate_small_beta",
        "dissipativity",
        "dissipativity_guaranteed",
    ]);
    let egrad2_prov = match &r.egrad2 {
        Reported::Value { provenance: Provenance::Exact, .. } => "exact".to_string(),
        Reported::Value { provenance: Provenance::UpperBound, .. } => "upper-bound".to_string(),
        Reported::Absent { .. } => "na".to_string(),
    };
    csv.row(&[
        scenario.to_string(),
        r.d.to_string(),
        fmt_f64(r.beta),
        fmt_f64(r.alpha),
        fmt_f64(r.lipschitz),
        fmt_f64(r.cv),
        fmt_f64(r.eps),
        fmt_f64(r.w2_init),
        fmt_reported(&r.delta),
        fmt_reported(&r.ev),
        fmt_reported(&r.egrad2),
        egrad2_prov,
        fmt_reported(&r.h_max_first),
        fmt_reported(&r.h_star_first),
        fmt_reported(&r.k_first),
        fmt_opt(r.contraction.map(|p| p.a)),
        fmt_opt(r.contraction.map(|p| p.b)),
        fmt_opt(r.contraction.map(|p| p.c)),
        fmt_opt(r.contraction.map(|p| p.bias_floor())),
        fmt_reported(&r.sigma_smoothing),
        r.m.to_string(),
        fmt_reported(&r.h_max_zeroth),
        fmt_reported(&r.h_star_zeroth),
        fmt_reported(&r.k_zeroth),
        fmt_opt(r.zeroth_contraction.map(|p| p.a)),
        fmt_opt(r.zeroth_contraction.map(|p| p.b)),
        fmt_opt(r.zeroth_contraction.map(|p| p.c)),
        fmt_opt(r.zeroth_contraction.map(|p| p.bias_floor())),
        fmt_reported(&r.wpi_strongly_convex),
        fmt_reported(&r.chi2_rate_strongly_convex),
        r.strongly_convex_chi2_applicable.to_string(),
        fmt_reported(&r.wpi_small_beta),
        fmt_reported(&r.chi2_rate_small_beta),
        fmt_f64(r.dissipativity),
        r.dissipativity_guaranteed.to_string(),
    ]);
    csv
}

/// Read a file as bytes (helper for determinism checks).
pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| HarnessError::io(path, e))
}
