use std::path::PathBuf;

use anyhow::Result;
use nonlocal_bifurcation::explicit;
use nonlocal_bifurcation::KernelSpectrum;
use serde::Serialize;
use serde_json::json;

use super::branch::{branch_csv, report_warnings, select_candidate, BranchSummary, TraceParams};
use super::explicit::{check_parameter, classify, BESSEL_TOL};
use super::Status;
use crate::kernel_file;
use crate::output::{self, real, Format, OutputDir, Table, Timer};

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Largest family parameter; the branch is traced to |s| = a·z_max.
    #[arg(long = "z-max", alias = "z", default_value_t = 1.0)]
    z_max: f64,
    /// Continuation steps per sign.
    #[arg(long, default_value_t = 20)]
    steps: usize,
    /// Truncation order M, used by both constructions.
    #[arg(long, default_value_t = 32)]
    modes: usize,
    /// Agreement required in c and in the coefficient ℓ² distance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Directory for comparison.csv, branch.csv, report.json and manifest.json.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Clone, Serialize)]
struct Comparison {
    s: f64,
    z: f64,
    c_branch: f64,
    c_family: f64,
    dc: f64,
    coeff_l2: f64,
}

#[derive(Debug, Serialize)]
struct Report {
    a: f64,
    z_max: f64,
    steps: usize,
    #[serde(rename = "M")]
    order: usize,
    tol: f64,
    compared_points: usize,
    all_converged: bool,
    max_dc: f64,
    max_coeff_l2: f64,
    /// `|c(s→0) - c0|` from the branch's extrapolation.
    extrapolation_defect: f64,
    pass: bool,
    branch: BranchSummary,
    comparisons: Vec<Comparison>,
}

pub fn run(args: Args) -> Result<Status> {
    check_parameter(args.z_max)?;
    let s_max = args.a * args.z_max.abs();
    let params = TraceParams::new(args.a, s_max, args.steps, args.modes, args.tol)?;
    let kernel = KernelSpectrum::two_cosine();
    let candidate = select_candidate(args.a, &kernel, Some(1))?;

    let mut timer = Timer::default();
    let branch = timer.time("trace", || params.trace(&kernel, &candidate))?;
    report_warnings(&branch);

    // s = -az links the two parameterizations.
    let comparisons = timer.time("family", || {
        branch
            .points
            .iter()
            .filter(|p| p.converged)
            .map(|p| {
                let z = -p.amplitude / args.a;
                let member =
                    explicit::construct(args.a, z, args.modes, BESSEL_TOL).map_err(classify)?;
                Ok(Comparison {
                    s: p.amplitude,
                    z,
                    c_branch: p.c,
                    c_family: member.c,
                    dc: (p.c - member.c).abs(),
                    coeff_l2: p.solution.combine(1.0, &member.coeffs, -1.0).l2(),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let max_dc = comparisons.iter().map(|c| c.dc).fold(0.0, f64::max);
    let max_coeff_l2 = comparisons.iter().map(|c| c.coeff_l2).fold(0.0, f64::max);
    let all_converged = branch.all_converged();
    let pass = all_converged && max_dc <= args.tol && max_coeff_l2 <= args.tol;
    let report = Report {
        a: args.a,
        z_max: args.z_max.abs(),
        steps: args.steps,
        order: args.modes,
        tol: args.tol,
        compared_points: comparisons.len(),
        all_converged,
        max_dc,
        max_coeff_l2,
        extrapolation_defect: (branch.extrapolated_c0 - candidate.c0).abs(),
        pass,
        branch: BranchSummary::new(&branch),
        comparisons,
    };
    if !pass {
        eprintln!(
            "cross-validation failed: max|Δc| = {max_dc:.3e}, max coefficient ℓ² distance = \
             {max_coeff_l2:.3e}, tolerance {:.1e}, all converged: {all_converged}",
            args.tol
        );
    }

    let csv = comparison_csv(&report.comparisons);
    if let Some(out) = &args.out {
        let mut dir = OutputDir::create(out)?;
        dir.write("comparison.csv", &csv)?;
        dir.write("branch.csv", &branch_csv(&branch))?;
        dir.write("report.json", &output::to_json(&report)?)?;
        let mut inputs = params.inputs();
        inputs["z_max"] = json!(report.z_max);
        inputs["k0"] = json!(1);
        inputs["kernel"] = kernel_file::canonical_json(&kernel);
        inputs["bessel_tol"] = json!(BESSEL_TOL);
        let results = json!({ "pass": pass, "max_dc": max_dc, "max_coeff_l2": max_coeff_l2 });
        dir.finish("cross-validate", inputs, timer, results)?;
    }
    output::emit(args.format, &report, || csv)?;
    Ok(Status::from_pass(pass))
}

fn comparison_csv(rows: &[Comparison]) -> String {
    let mut table = Table::new(["s", "z", "c_branch", "c_family", "dc", "coeff_l2"]);
    for r in rows {
        table.row([r.s, r.z, r.c_branch, r.c_family, r.dc, r.coeff_l2].map(real));
    }
    table.into_string()
}
