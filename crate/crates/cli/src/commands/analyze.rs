use std::path::PathBuf;

use anyhow::Result;
use nonlocal_bifurcation::kernel::{
    self, BifurcationCandidate, TransversalityReport, UniquenessCertificate,
    CONSTANT_KERNEL_DIAGNOSTIC,
};
use serde::Serialize;
use serde_json::json;

use super::{check_diffusion, lattice_cell, usage, Status};
use crate::kernel_file::{self, KernelSource};
use crate::output::{self, real, Format, OutputDir, Table, Timer};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Kernel file (JSON, schema nlbif-kernel/1).
    #[arg(long)]
    kernel: PathBuf,
    /// Diffusion coefficient.
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Interaction strength for the linear problem; repeat or comma-separate
    /// for several values.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    b: Vec<f64>,
    /// Directory for report.json and manifest.json.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Serialize)]
struct KernelSummary {
    dim: usize,
    lattice_radius: u32,
    l2_norm: f64,
    stored_modes: usize,
    has_negative_coefficient: bool,
    source: KernelSource,
}

#[derive(Debug, Serialize)]
struct CandidateReport {
    #[serde(flatten)]
    candidate: BifurcationCandidate,
    hypothesis_holds: bool,
    /// Absent for kernels of dimension above one.
    transversality: Option<TransversalityReport>,
}

#[derive(Debug, Serialize)]
struct LinearReport {
    b: f64,
    certificate: UniquenessCertificate,
}

#[derive(Debug, Serialize)]
struct Report {
    a: f64,
    kernel: KernelSummary,
    candidates: Vec<CandidateReport>,
    diagnostics: Vec<String>,
    linear: Vec<LinearReport>,
}

pub fn run(args: Args) -> Result<Status> {
    check_diffusion(args.a)?;
    if let Some(b) = args.b.iter().find(|b| !b.is_finite()) {
        return Err(usage(format!("--b must be finite, got {b}")));
    }
    let mut timer = Timer::default();
    let loaded = timer.time("load", || kernel_file::load(&args.kernel))?;
    let spectrum = &loaded.spectrum;
    if spectrum.is_constant() {
        return Err(usage(format!(
            "{}: {CONSTANT_KERNEL_DIAGNOSTIC}",
            args.kernel.display()
        )));
    }

    let report = timer.time("analyze", || -> Result<Report> {
        let detection = kernel::detect_bifurcations(args.a, spectrum)?;
        let candidates = detection
            .candidates
            .into_iter()
            .map(|candidate| {
                let transversality = if spectrum.dim() == 1 {
                    Some(kernel::transversality_check(&candidate, args.a, spectrum)?)
                } else {
                    None
                };
                Ok(CandidateReport {
                    hypothesis_holds: candidate.hypothesis.holds(),
                    candidate,
                    transversality,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let linear = args
            .b
            .iter()
            .map(|&b| {
                Ok(LinearReport {
                    b,
                    certificate: kernel::linear_uniqueness_certificate(args.a, b, spectrum)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Report {
            a: args.a,
            kernel: KernelSummary {
                dim: spectrum.dim(),
                lattice_radius: spectrum.lattice_radius(),
                l2_norm: spectrum.l2_norm(),
                stored_modes: spectrum.len(),
                has_negative_coefficient: spectrum.has_negative_coefficient(),
                source: loaded.source.clone(),
            },
            candidates,
            diagnostics: detection.diagnostics,
            linear,
        })
    })?;

    let pass = report
        .candidates
        .iter()
        .all(|c| c.transversality.as_ref().is_none_or(|t| t.holds));

    if let Some(out) = &args.out {
        let mut dir = OutputDir::create(out)?;
        dir.write("report.json", &output::to_json(&report)?)?;
        let inputs = json!({
            "a": args.a,
            "b": args.b,
            "kernel": kernel_file::canonical_json(spectrum),
            "kernel_path": args.kernel.display().to_string(),
        });
        dir.finish("analyze-kernel", inputs, timer, json!({ "pass": pass }))?;
    }
    output::emit(args.format, &report, || candidates_csv(&report))?;
    Ok(Status::from_pass(pass))
}

fn candidates_csv(report: &Report) -> String {
    let mut table = Table::new([
        "k0",
        "c0",
        "phi_k0",
        "hypothesis",
        "kernel_dim",
        "violating_modes",
        "transversality_prefactor",
        "transversality_defect",
    ]);
    for c in &report.candidates {
        let violating = c
            .candidate
            .hypothesis
            .violating_modes
            .iter()
            .map(|g| lattice_cell(&g.k))
            .collect::<Vec<_>>()
            .join(";");
        let (prefactor, defect) = match &c.transversality {
            Some(t) => (real(t.prefactor), real(t.defect)),
            None => (String::new(), String::new()),
        };
        table.row([
            lattice_cell(&c.candidate.k0),
            real(c.candidate.c0),
            real(c.candidate.phi_k0),
            if c.hypothesis_holds { "pass" } else { "fail" }.to_owned(),
            c.candidate.kernel_dim.to_string(),
            violating,
            prefactor,
            defect,
        ]);
    }
    table.into_string()
}
