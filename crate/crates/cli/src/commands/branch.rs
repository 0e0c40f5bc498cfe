use std::path::PathBuf;

use anyhow::Result;
use nonlocal_bifurcation::continuation::{self, ContinuationError};
use nonlocal_bifurcation::kernel::{self, BifurcationCandidate};
use nonlocal_bifurcation::{Branch, KernelSpectrum, LatticePoint, SolveConfig};
use serde::Serialize;
use serde_json::json;

use super::{check_diffusion, check_modes, check_tol, usage, Status};
use crate::kernel_file;
use crate::output::{self, real, Format, OutputDir, Table, Timer};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Kernel file (JSON, schema nlbif-kernel/1); must be one-dimensional.
    #[arg(long)]
    kernel: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Bifurcating mode; may be omitted when the kernel has one candidate.
    #[arg(long)]
    k0: Option<i64>,
    /// Largest amplitude |s| = |V_k0|.
    #[arg(long, default_value_t = 1.0)]
    s_max: f64,
    /// Continuation steps per sign.
    #[arg(long, default_value_t = 20)]
    steps: usize,
    /// Truncation order M.
    #[arg(long, default_value_t = 32)]
    modes: usize,
    /// Newton tolerance on the residual ℓ² norm.
    #[arg(long, default_value_t = 1e-11)]
    tol: f64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

/// Branch parameters after validation, shared with cross-validate.
#[derive(Debug, Clone, Copy)]
pub struct TraceParams {
    pub a: f64,
    pub s_max: f64,
    pub steps: usize,
    pub config: SolveConfig,
}

impl TraceParams {
    pub fn new(a: f64, s_max: f64, steps: usize, modes: usize, tol: f64) -> Result<Self> {
        check_diffusion(a)?;
        check_modes(modes)?;
        check_tol(tol)?;
        if steps == 0 {
            return Err(usage("--steps must be at least 1"));
        }
        if !(s_max.is_finite() && s_max > 0.0) {
            return Err(usage(format!(
                "--s-max must be positive and finite, got {s_max}"
            )));
        }
        let config = SolveConfig {
            newton_tol: tol,
            ..SolveConfig::default().with_truncation(modes)
        };
        Ok(Self {
            a,
            s_max,
            steps,
            config,
        })
    }

    pub fn trace(
        &self,
        kernel: &KernelSpectrum,
        candidate: &BifurcationCandidate,
    ) -> Result<Branch> {
        continuation::trace_branch(
            self.a,
            kernel,
            candidate,
            self.s_max,
            self.steps,
            &self.config,
        )
        .map_err(|err| match err {
            ContinuationError::NoBranchFound { .. } | ContinuationError::Spectral(_) => err.into(),
            other => usage(other.to_string()),
        })
    }

    pub fn inputs(&self) -> serde_json::Value {
        json!({
            "a": self.a,
            "s_max": self.s_max,
            "steps": self.steps,
            "config": self.config,
        })
    }
}

/// Picks the candidate for `k0`, refusing modes where `Φ̂(k0) = 0`.
pub fn select_candidate(
    a: f64,
    kernel: &KernelSpectrum,
    k0: Option<i64>,
) -> Result<BifurcationCandidate> {
    if kernel.dim() != 1 {
        return Err(usage(format!(
            "branch tracing needs a one-dimensional kernel, got dimension {}",
            kernel.dim()
        )));
    }
    let mut candidates = kernel::detect_bifurcations(a, kernel)?.candidates;
    match k0 {
        Some(0) => Err(usage("--k0 must be nonzero")),
        Some(k) => {
            let point = LatticePoint::one_dim(k).canonical();
            if kernel.coefficient(&point) == 0.0 {
                return Err(usage(format!(
                    "refusing k0 = {k}: Φ̂({k}) = 0, but hypothesis (H) requires Φ̂(k0) ≠ 0"
                )));
            }
            let idx = candidates
                .iter()
                .position(|c| c.k0 == point)
                .ok_or_else(|| usage(format!("no bifurcation candidate at k0 = {k}")))?;
            Ok(candidates.swap_remove(idx))
        }
        None if candidates.len() == 1 => Ok(candidates.remove(0)),
        None => {
            let modes: Vec<_> = candidates.iter().map(|c| c.k0.to_string()).collect();
            Err(usage(format!(
                "the kernel has {} candidates ({}); choose one with --k0",
                candidates.len(),
                modes.join(", ")
            )))
        }
    }
}

#[derive(Debug, Serialize)]
pub struct BranchSummary {
    pub k0: usize,
    pub c0: f64,
    pub hypothesis_holds: bool,
    pub points: usize,
    pub converged_points: usize,
    pub all_converged: bool,
    /// Largest `|s|` reached with a converged point.
    pub max_converged_amplitude: f64,
    pub extrapolated_c0: f64,
    pub min_pivot_ratio: f64,
    pub max_enlarged_residual_l2: f64,
    pub warnings: Vec<String>,
}

impl BranchSummary {
    pub fn new(branch: &Branch) -> Self {
        let converged: Vec<_> = branch.points.iter().filter(|p| p.converged).collect();
        Self {
            k0: branch.k0,
            c0: branch.provenance.c0,
            hypothesis_holds: branch.provenance.hypothesis_holds,
            points: branch.points.len(),
            converged_points: converged.len(),
            all_converged: branch.all_converged(),
            max_converged_amplitude: converged
                .iter()
                .map(|p| p.amplitude.abs())
                .fold(0.0, f64::max),
            extrapolated_c0: branch.extrapolated_c0,
            min_pivot_ratio: branch.min_pivot_ratio,
            max_enlarged_residual_l2: converged
                .iter()
                .map(|p| p.enlarged_residual_l2)
                .fold(0.0, f64::max),
            warnings: branch.warnings.clone(),
        }
    }
}

/// `s,c,residual_l2,newton_iters,V_1..V_M`, one row per point in amplitude order.
pub fn branch_csv(branch: &Branch) -> String {
    let order = branch.provenance.config.truncation;
    let mut header: Vec<String> = ["s", "c", "residual_l2", "newton_iters"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((1..=order).map(|m| format!("V_{m}")));
    let mut table = Table::new(header);
    for p in &branch.points {
        let mut row = vec![
            real(p.amplitude),
            real(p.c),
            real(p.residual_l2),
            p.newton_iters.to_string(),
        ];
        row.extend(p.solution.coeffs().iter().map(|&v| real(v)));
        table.row(row);
    }
    table.into_string()
}

pub fn report_warnings(branch: &Branch) {
    for w in &branch.warnings {
        eprintln!("warning: {w}");
    }
}

pub fn run(args: Args) -> Result<Status> {
    let params = TraceParams::new(args.a, args.s_max, args.steps, args.modes, args.tol)?;
    let mut timer = Timer::default();
    let loaded = timer.time("load", || kernel_file::load(&args.kernel))?;
    let candidate = select_candidate(args.a, &loaded.spectrum, args.k0)?;
    let branch = timer.time("trace", || params.trace(&loaded.spectrum, &candidate))?;
    report_warnings(&branch);

    let summary = BranchSummary::new(&branch);
    let csv = branch_csv(&branch);
    let mut dir = OutputDir::create(&args.out)?;
    dir.write("branch.csv", &csv)?;
    let mut inputs = params.inputs();
    inputs["k0"] = json!(branch.k0);
    inputs["kernel"] = kernel_file::canonical_json(&loaded.spectrum);
    inputs["kernel_path"] = json!(args.kernel.display().to_string());
    let results = json!({ "summary": summary, "provenance": branch.provenance });
    dir.finish("trace-branch", inputs, timer, results)?;

    output::emit(args.format, &summary, || csv.clone())?;
    Ok(Status::from_pass(branch.all_converged()))
}
