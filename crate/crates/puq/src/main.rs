//! Command-line interface: classification, structure construction,
//! simulation, verification and beta scans. Every number printed here is
//! produced by a library call; the binary only formats and routes output.
//!
//! Exit codes: 0 success, 1 usage error, 2 invalid parameters,
//! 3 inadmissible beta, 4 audit failure.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use puq::audit::{audit_report, AuditStatus};
use puq::darboux::{darboux_map, verify_canonicity};
use puq::dynamics::{cross_check, integrate};
use puq::error::PuError;
use puq::invariants::{hamiltonian_value, integrals_of_motion, rational_ratio, BetaAngle};
use puq::poisson::{bracket_determinant, bracket_matrix, sector_of, verify_mode_brackets};
use puq::regime::{classify_regime, mode_frequencies, JetState, ModeData, Parameters, Regime};
use puq::scenario::{fmt_float, write_beta_scan_csv, write_drift_json, write_trajectory_csv, Scenario};

#[derive(Parser)]
#[command(
    name = "puq",
    about = "Alternative Hamiltonian structures of the fourth-order oscillator \
             lambda q'''' + q'' + omega^2 q = 0",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ParamArgs {
    /// Mass m > 0.
    #[arg(long, allow_hyphen_values = true)]
    m: f64,
    /// Frequency squared omega^2 > 0.
    #[arg(long = "omega2", allow_hyphen_values = true)]
    omega_sq: f64,
    /// Higher-derivative coupling lambda.
    #[arg(long, allow_hyphen_values = true)]
    lambda: f64,
}

impl ParamArgs {
    fn build(&self) -> Result<Parameters, PuError> {
        Parameters::new(self.m, self.omega_sq, self.lambda)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Classify the parameter regime and report mode frequencies.
    Classify(ParamArgs),
    /// Run a scenario file: integrate and write trajectory CSV plus a
    /// drift-report JSON.
    Simulate {
        /// Scenario JSON file.
        #[arg(long)]
        scenario: PathBuf,
        /// Directory for output files.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Run the full verification and audit suite for the given parameters.
    Verify(ParamArgs),
    /// Tabulate bracket entries, chart data and Hamiltonian signature over
    /// a beta grid.
    ScanBeta {
        #[command(flatten)]
        params: ParamArgs,
        /// Number of grid points over [-pi, pi).
        #[arg(long, default_value_t = 100)]
        points: usize,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the integrals of motion (and H when beta is given) on a
    /// jet state.
    Integrals {
        #[command(flatten)]
        params: ParamArgs,
        /// Jet state as four comma-separated numbers q,dq,d2q,d3q.
        #[arg(long, allow_hyphen_values = true)]
        state: String,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<f64>,
    },
    /// Print the Poisson bracket matrix and its determinant comparison.
    Brackets {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
    },
    /// Print the Darboux chart at beta and optionally map a jet state.
    Darboux {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        /// Jet state as four comma-separated numbers q,dq,d2q,d3q.
        #[arg(long, allow_hyphen_values = true)]
        state: Option<String>,
    },
}

fn error_exit(e: &PuError) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        PuError::SingularBeta { .. } => ExitCode::from(3),
        _ => ExitCode::from(2),
    }
}

fn parse_state(text: &str) -> Result<JetState, String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 4 {
        return Err(format!("expected 4 comma-separated numbers, got {}", parts.len()));
    }
    let mut vals = [0.0f64; 4];
    for (v, p) in vals.iter_mut().zip(&parts) {
        *v = p.trim().parse::<f64>().map_err(|e| format!("bad number {p:?}: {e}"))?;
    }
    Ok(JetState::from_array(vals))
}

fn cmd_classify(args: &ParamArgs) -> Result<(), PuError> {
    let params = args.build()?;
    let regime = classify_regime(&params);
    println!("regime: {regime}");
    println!("discriminant: {}", fmt_float(params.discriminant()));
    match mode_frequencies(&params) {
        ModeData::OscillatoryDistinct { w1_sq, w2_sq } => {
            println!("w1^2: {}", fmt_float(w1_sq));
            println!("w2^2: {}", fmt_float(w2_sq));
            let sum = params.lambda * (w1_sq + w2_sq) - 1.0;
            let prod = params.lambda * w1_sq * w2_sq - params.omega_sq;
            println!("sum-identity residual: {}", fmt_float(sum));
            println!("product-identity residual: {}", fmt_float(prod));
            if let Some(r) = rational_ratio(&params, 32)? {
                println!("rational frequency ratio: {}:{}", r.k, r.l);
            }
        }
        ModeData::Harmonic { w_sq } => println!("w^2: {}", fmt_float(w_sq)),
        ModeData::Hyperbolic { w1_abs_sq, w2_sq } => {
            println!("|w1|^2: {}", fmt_float(w1_abs_sq));
            println!("w2^2: {}", fmt_float(w2_sq));
        }
        ModeData::Degenerate { w_sq_repeated } => {
            println!("repeated w^2: {}", fmt_float(w_sq_repeated));
        }
        ModeData::ComplexPair { w0_sq_re, w0_sq_im } => {
            println!("Re w0^2: {}", fmt_float(w0_sq_re));
            println!("Im w0^2: {}", fmt_float(w0_sq_im));
        }
    }
    if params.near_degenerate() {
        println!("warning: nearly repeated roots; chart formulas are ill-conditioned");
    }
    Ok(())
}

fn cmd_simulate(path: &Path, out_dir: &Path) -> Result<(), PuError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PuError::InvalidParameters(format!("cannot read scenario: {e}")))?;
    let scenario = Scenario::from_json(&text)?;
    let params = scenario.parameters()?;
    let beta = scenario.beta_angle()?;
    if let Some(b) = beta {
        // Surface inadmissible angles with sector diagnostics up front.
        sector_of(b, classify_regime(&params))?;
    }
    let steps = scenario.steps()?;
    let traj = integrate(&params, beta, &scenario.initial_jet(), scenario.dt, steps, scenario.method)?;

    let csv_path = out_dir.join(scenario.trajectory_csv.as_deref().unwrap_or("trajectory.csv"));
    let json_path = out_dir.join(scenario.drift_json.as_deref().unwrap_or("drift.json"));
    let mut csv = Vec::new();
    write_trajectory_csv(&mut csv, &params, beta, &traj)?;
    std::fs::write(&csv_path, csv)
        .map_err(|e| PuError::InvalidIntegration(format!("cannot write CSV: {e}")))?;
    let mut json = Vec::new();
    let report = write_drift_json(&mut json, &params, beta, &traj)?;
    std::fs::write(&json_path, json)
        .map_err(|e| PuError::InvalidIntegration(format!("cannot write JSON: {e}")))?;

    println!("trajectory: {}", csv_path.display());
    println!("drift report: {}", json_path.display());
    println!("integral drift: {} {}", fmt_float(report.integral_drift[0]), fmt_float(report.integral_drift[1]));
    if let Some(h) = report.energy_drift {
        println!("energy drift: {}", fmt_float(h));
    }
    if let Some(b) = beta {
        let sup = cross_check(&params, b, &scenario.initial_jet(), scenario.dt, steps, scenario.method)?;
        println!("cross-check sup-norm: {}", fmt_float(sup));
    }
    Ok(())
}

fn cmd_verify(args: &ParamArgs) -> Result<bool, PuError> {
    let params = args.build()?;
    let regime = classify_regime(&params);
    println!("regime: {regime}");
    let mut all_ok = true;

    // Bracket identities and chart canonicity across admissible angles.
    let mut mode_brackets_max = 0.0f64;
    let mut canon_max = 0.0f64;
    let mut det_rel_max = 0.0f64;
    for k in 0..48 {
        let b = -std::f64::consts::PI + (k as f64 + 0.31) * std::f64::consts::TAU / 48.0;
        let beta = match BetaAngle::new(b) {
            Ok(v) => v,
            Err(_) => continue,
        };
        if sector_of(beta, regime).is_err() {
            continue;
        }
        if matches!(regime, Regime::OscillatoryDistinct | Regime::Hyperbolic) {
            for v in verify_mode_brackets(&params, beta)? {
                mode_brackets_max = mode_brackets_max.max(v.abs());
            }
        }
        let map = darboux_map(&params, beta)?;
        canon_max = canon_max.max(verify_canonicity(&params, &map)?);
        let cmp = bracket_determinant(&bracket_matrix(&params, beta)?);
        det_rel_max = det_rel_max
            .max((cmp.numeric - cmp.closed_form).abs() / cmp.numeric.abs().max(1e-300));
    }
    let check = |name: &str, value: f64, tol: f64, all_ok: &mut bool| {
        let ok = value < tol;
        *all_ok &= ok;
        println!("{name}: {} ({})", if ok { "pass" } else { "FAIL" }, fmt_float(value));
    };
    if matches!(regime, Regime::OscillatoryDistinct | Regime::Hyperbolic) {
        check("mode-projection brackets", mode_brackets_max, 1e-13, &mut all_ok);
    }
    check("chart canonicity", canon_max, 1e-11, &mut all_ok);
    check("determinant vs squared Pfaffian", det_rel_max, 1e-9, &mut all_ok);

    let report = audit_report(&params)?;
    for entry in &report.entries {
        let tag = match entry.status {
            AuditStatus::Verified => "verified",
            AuditStatus::CorrectedCoefficients => "corrected-coefficients",
            AuditStatus::Failed => "FAILED",
        };
        println!("audit {}: {} (residual {})", entry.name, tag, fmt_float(entry.residual));
        println!("  {}", entry.details);
    }
    Ok(all_ok && report.all_passed())
}

fn cmd_scan_beta(
    args: &ParamArgs,
    points: usize,
    out: &Option<PathBuf>,
) -> Result<(), PuError> {
    let params = args.build()?;
    let betas: Vec<f64> = (0..points)
        .map(|k| -std::f64::consts::PI + k as f64 * std::f64::consts::TAU / points as f64)
        .collect();
    let mut buf = Vec::new();
    write_beta_scan_csv(&mut buf, &params, &betas)?;
    match out {
        Some(path) => std::fs::write(path, buf)
            .map_err(|e| PuError::InvalidIntegration(format!("cannot write CSV: {e}")))?,
        None => std::io::stdout()
            .write_all(&buf)
            .map_err(|e| PuError::InvalidIntegration(format!("cannot write CSV: {e}")))?,
    }
    Ok(())
}

fn cmd_integrals(args: &ParamArgs, state: &JetState, beta: Option<f64>) -> Result<(), PuError> {
    let params = args.build()?;
    let pair = integrals_of_motion(&params, state)?;
    println!("k1: {}", fmt_float(pair.k1));
    println!("k2: {}", fmt_float(pair.k2));
    if let Some(b) = beta {
        let beta = BetaAngle::new(b)?;
        println!("h: {}", fmt_float(hamiltonian_value(&params, beta, state)?));
    }
    Ok(())
}

fn cmd_brackets(args: &ParamArgs, beta: f64) -> Result<(), PuError> {
    let params = args.build()?;
    let bm = bracket_matrix(&params, BetaAngle::new(beta)?)?;
    println!("{{q, dq}}: {}", fmt_float(bm.pi[(0, 1)]));
    println!("{{q, d3q}}: {}", fmt_float(bm.pi[(0, 3)]));
    println!("{{dq, d2q}}: {}", fmt_float(bm.pi[(1, 2)]));
    println!("{{d2q, d3q}}: {}", fmt_float(bm.pi[(2, 3)]));
    let cmp = bracket_determinant(&bm);
    println!("determinant: {}", fmt_float(cmp.numeric));
    println!("squared-pfaffian: {}", fmt_float(cmp.closed_form));
    if let Some(p) = cmp.printed {
        println!("quoted closed form: {}", fmt_float(p));
        println!("quoted form matches: {}", !cmp.printed_discrepancy);
    }
    Ok(())
}

fn cmd_darboux(args: &ParamArgs, beta: f64, state: Option<&JetState>) -> Result<(), PuError> {
    let params = args.build()?;
    let map = darboux_map(&params, BetaAngle::new(beta)?)?;
    println!("sector: {}", map.sector);
    if let Some(d) = map.delta {
        println!("delta: {}", fmt_float(d));
    }
    for (label, r) in ["q1", "p1", "q2", "p2"].iter().zip(0..4) {
        let row: Vec<String> = (0..4).map(|c| fmt_float(map.forward[(r, c)])).collect();
        println!("{label}: {}", row.join(" "));
    }
    println!("canonicity residual: {}", fmt_float(verify_canonicity(&params, &map)?));
    if let Some(jet) = state {
        let z = map.to_canonical(jet);
        println!("canonical state: {} {} {} {}", fmt_float(z.q1), fmt_float(z.p1), fmt_float(z.q2), fmt_float(z.p2));
        println!("h: {}", fmt_float(map.canonical_hamiltonian(&z)));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, PuError> {
    match &cli.command {
        Command::Classify(args) => cmd_classify(args).map(|_| ExitCode::SUCCESS),
        Command::Simulate { scenario, out_dir } => {
            cmd_simulate(scenario, out_dir).map(|_| ExitCode::SUCCESS)
        }
        Command::Verify(args) => {
            let ok = cmd_verify(args)?;
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(4) })
        }
        Command::ScanBeta { params, points, out } => {
            if *points == 0 {
                eprintln!("error: empty beta grid");
                return Ok(ExitCode::from(1));
            }
            cmd_scan_beta(params, *points, out).map(|_| ExitCode::SUCCESS)
        }
        Command::Integrals { params, state, beta } => {
            let jet = match parse_state(state) {
                Ok(j) => j,
                Err(msg) => {
                    eprintln!("error: {msg}");
                    return Ok(ExitCode::from(1));
                }
            };
            cmd_integrals(params, &jet, *beta).map(|_| ExitCode::SUCCESS)
        }
        Command::Brackets { params, beta } => {
            cmd_brackets(params, *beta).map(|_| ExitCode::SUCCESS)
        }
        Command::Darboux { params, beta, state } => {
            let jet = match state.as_deref().map(parse_state).transpose() {
                Ok(j) => j,
                Err(msg) => {
                    eprintln!("error: {msg}");
                    return Ok(ExitCode::from(1));
                }
            };
            cmd_darboux(params, *beta, jet.as_ref()).map(|_| ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => error_exit(&e),
    }
}
