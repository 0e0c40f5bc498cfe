use std::path::PathBuf;

use anyhow::{Context, Result};
use nonlocal_bifurcation::continuation::ENLARGED_MODES;
use nonlocal_bifurcation::ExplicitFamilyMember;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::explicit::classify;
use super::{check_tol, usage, Status};
use crate::output::{self, real, Format, OutputDir, Timer};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// A member.json written by construct-explicit.
    #[arg(long)]
    solution: PathBuf,
    /// Number of modes the residual is evaluated on (default M + 8).
    #[arg(long)]
    modes: Option<usize>,
    #[arg(long, default_value_t = 1e-11)]
    tol: f64,
    /// Directory for report.json and manifest.json.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Deserialize)]
struct Saved {
    #[serde(flatten)]
    member: ExplicitFamilyMember,
    residual_l2: Option<f64>,
}

#[derive(Debug, Serialize)]
struct Report {
    solution: String,
    a: f64,
    z: f64,
    #[serde(rename = "M")]
    order: usize,
    m_check: usize,
    residual_l2: f64,
    stored_residual_l2: Option<f64>,
    /// The recomputed residual equals the stored one exactly.
    matches_stored: Option<bool>,
    max_recurrence_defect: f64,
    tol: f64,
    pass: bool,
}

pub fn run(args: Args) -> Result<Status> {
    check_tol(args.tol)?;
    let path = args.solution.display().to_string();
    let text = std::fs::read_to_string(&args.solution)
        .with_context(|| format!("cannot read solution file {path}"))?;
    let saved: Saved = serde_json::from_str(&text).map_err(|e| {
        usage(format!(
            "{path}:{}:{}: {}",
            e.line(),
            e.column(),
            e.to_string().split(" at line ").next().unwrap_or_default()
        ))
    })?;
    let member = saved.member;
    if member.coeffs.order() != member.order {
        return Err(usage(format!(
            "{path}: M is {} but {} coefficients are stored",
            member.order,
            member.coeffs.order()
        )));
    }
    if !(member.a.is_finite() && member.a > 0.0) {
        return Err(usage(format!(
            "{path}: a must be positive, got {}",
            member.a
        )));
    }

    let m_check = args.modes.unwrap_or(member.order + ENLARGED_MODES);
    let mut timer = Timer::default();
    let residual = timer
        .time("residual", || member.full_equation_residual(m_check))
        .map_err(classify)?;
    let defects = member.recurrence_defect();
    let pass = residual.l2 <= args.tol;
    let report = Report {
        solution: path,
        a: member.a,
        z: member.z,
        order: member.order,
        m_check,
        residual_l2: residual.l2,
        stored_residual_l2: saved.residual_l2,
        matches_stored: saved.residual_l2.map(|r| r == residual.l2),
        max_recurrence_defect: defects.iter().copied().fold(0.0, f64::max),
        tol: args.tol,
        pass,
    };

    if let Some(out) = &args.out {
        let mut dir = OutputDir::create(out)?;
        dir.write("report.json", &output::to_json(&report)?)?;
        let inputs = json!({
            "solution": report.solution,
            "m_check": m_check,
            "tol": args.tol,
        });
        dir.finish("verify", inputs, timer, json!({ "pass": pass }))?;
    }
    output::emit(args.format, &report, || {
        output::key_values([
            ("M", report.order.to_string()),
            ("m_check", m_check.to_string()),
            ("residual_l2", real(report.residual_l2)),
            (
                "stored_residual_l2",
                report.stored_residual_l2.map(real).unwrap_or_default(),
            ),
            ("pass", pass.to_string()),
        ])
    })?;
    Ok(Status::from_pass(pass))
}
