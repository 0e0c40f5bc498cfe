use std::path::PathBuf;

use anyhow::Result;
use nonlocal_bifurcation::continuation::ENLARGED_MODES;
use nonlocal_bifurcation::explicit::{self, ExplicitError, ResidualReport};
use nonlocal_bifurcation::ExplicitFamilyMember;
use serde::Serialize;
use serde_json::json;

use super::{check_diffusion, check_modes, check_tol, usage, Status};
use crate::output::{self, real, Format, OutputDir, Table, Timer};

/// Bessel tolerance used for every family member the CLI builds.
pub const BESSEL_TOL: f64 = 1e-15;

/// Points in the plot-ready profile.
pub const PROFILE_POINTS: usize = 1024;

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Family parameter; any nonzero real.
    #[arg(long, allow_negative_numbers = true)]
    z: f64,
    /// Truncation order M.
    #[arg(long, default_value_t = 32)]
    modes: usize,
    /// The residual certificate passes when residual_l2 is at most this.
    #[arg(long, default_value_t = 1e-11)]
    tol: f64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

/// The member as written to `member.json`.
#[derive(Debug, Serialize)]
pub struct MemberRecord<'a> {
    #[serde(flatten)]
    pub member: &'a ExplicitFamilyMember,
    pub residual_l2: f64,
}

#[derive(Debug, Serialize)]
struct ResidualRecord {
    m_check: usize,
    tol: f64,
    pass: bool,
    /// `|V_2 - 2(a + c)|`.
    v2_defect: f64,
    max_recurrence_defect: f64,
    #[serde(flatten)]
    residual: ResidualReport,
}

#[derive(Debug, Serialize)]
struct Summary {
    a: f64,
    z: f64,
    #[serde(rename = "M")]
    order: usize,
    c: f64,
    amplitude: f64,
    residual_l2: f64,
    tol: f64,
    pass: bool,
    files: Vec<String>,
}

pub fn check_parameter(z: f64) -> Result<()> {
    if z == 0.0 {
        return Err(usage(
            "--z must be nonzero: the family parameter ranges over z ∈ ℝ∖{0} \
             (z = 0 is the constant solution, not a family member)",
        ));
    }
    if !z.is_finite() {
        return Err(usage(format!("--z must be finite, got {z}")));
    }
    Ok(())
}

/// Sorts library errors into bad input and numerical failure.
pub fn classify(err: ExplicitError) -> anyhow::Error {
    match err {
        ExplicitError::ZeroParameter
        | ExplicitError::NonFiniteParameter(_)
        | ExplicitError::InvalidDiffusion(_)
        | ExplicitError::Order { .. }
        | ExplicitError::InvalidTolerance(_)
        | ExplicitError::CheckOrder { .. }
        | ExplicitError::Bessel(_) => usage(err.to_string()),
        other => other.into(),
    }
}

pub fn run(args: Args) -> Result<Status> {
    check_diffusion(args.a)?;
    check_parameter(args.z)?;
    check_modes(args.modes)?;
    check_tol(args.tol)?;

    let mut timer = Timer::default();
    let member = timer
        .time("construct", || {
            explicit::construct(args.a, args.z, args.modes, BESSEL_TOL)
        })
        .map_err(classify)?;
    let m_check = args.modes + ENLARGED_MODES;
    let residual = timer
        .time("residual", || member.full_equation_residual(m_check))
        .map_err(classify)?;
    let defects = member.recurrence_defect();
    let pass = residual.l2 <= args.tol;

    let residual_l2 = residual.l2;
    let record = ResidualRecord {
        m_check,
        tol: args.tol,
        pass,
        v2_defect: defects[0],
        max_recurrence_defect: defects.iter().copied().fold(0.0, f64::max),
        residual,
    };

    let mut dir = OutputDir::create(&args.out)?;
    dir.write(
        "member.json",
        &output::to_json(&MemberRecord {
            member: &member,
            residual_l2,
        })?,
    )?;
    dir.write("profile.csv", &profile_csv(&member))?;
    dir.write("residual.json", &output::to_json(&record)?)?;
    let inputs = json!({
        "a": args.a,
        "z": args.z,
        "modes": args.modes,
        "tol": args.tol,
        "bessel_tol": BESSEL_TOL,
        "m_check": m_check,
    });
    let results = json!({ "c": member.c, "residual_l2": residual_l2, "pass": pass });
    let files = dir.finish("construct-explicit", inputs, timer, results)?;

    let summary = Summary {
        a: member.a,
        z: member.z,
        order: member.order,
        c: member.c,
        amplitude: member.amplitude,
        residual_l2,
        tol: args.tol,
        pass,
        files: files.iter().map(|p| p.display().to_string()).collect(),
    };
    output::emit(args.format, &summary, || {
        output::key_values([
            ("a", real(summary.a)),
            ("z", real(summary.z)),
            ("M", summary.order.to_string()),
            ("c", real(summary.c)),
            ("amplitude", real(summary.amplitude)),
            ("residual_l2", real(summary.residual_l2)),
            ("pass", summary.pass.to_string()),
        ])
    })?;
    Ok(Status::from_pass(pass))
}

/// `u(x)` on `x_j = j/N`, `j = 0..N`.
fn profile_csv(member: &ExplicitFamilyMember) -> String {
    let mut table = Table::new(["x", "u"]);
    for j in 0..PROFILE_POINTS {
        let x = j as f64 / PROFILE_POINTS as f64;
        table.row([real(x), real(member.evaluate(x))]);
    }
    table.into_string()
}
