//! Scenario configuration (JSON) and deterministic CSV/JSON report
//! writers shared by the command-line interface.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dynamics::{drift_report, DriftReport, Method, Trajectory};
use crate::error::{PuError, Result};
use crate::invariants::{
    hamiltonian_value, integrals_of_motion, rational_ratio, third_integral, BetaAngle,
    RationalRatio,
};
use crate::regime::{classify_regime, JetState, Parameters, Regime};

fn default_dt() -> f64 {
    1e-3
}

fn default_method() -> Method {
    Method::Rk4
}

/// One reproducible run: parameters, chart angle, initial state, grid and
/// output locations. Unset optional fields fall back to defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub m: f64,
    pub omega_sq: f64,
    pub lambda: f64,
    /// Chart angle; when present, integration runs in the Darboux chart.
    #[serde(default)]
    pub beta: Option<f64>,
    /// Initial jet state (q, q', q'', q''').
    pub initial: [f64; 4],
    pub t_end: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_method")]
    pub method: Method,
    /// Trajectory CSV path, relative to the output directory.
    #[serde(default)]
    pub trajectory_csv: Option<String>,
    /// Drift report JSON path, relative to the output directory.
    #[serde(default)]
    pub drift_json: Option<String>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| PuError::InvalidParameters(format!("malformed scenario: {e}")))
    }

    pub fn parameters(&self) -> Result<Parameters> {
        Parameters::new(self.m, self.omega_sq, self.lambda)
    }

    pub fn beta_angle(&self) -> Result<Option<BetaAngle>> {
        self.beta.map(BetaAngle::new).transpose()
    }

    pub fn steps(&self) -> Result<usize> {
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(PuError::InvalidIntegration(format!(
                "t_end = {} must be positive",
                self.t_end
            )));
        }
        Ok((self.t_end / self.dt).round().max(1.0) as usize)
    }

    pub fn initial_jet(&self) -> JetState {
        JetState::from_array(self.initial)
    }
}

/// Fixed-width scientific float formatting: 17 significant digits, so
/// every f64 round-trips and repeated runs are byte-identical.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write the trajectory table: t, jet components, both integrals, the
/// Hamiltonian when a chart angle is given and the third integral when the
/// frequency ratio is rational.
pub fn write_trajectory_csv<W: Write>(
    out: &mut W,
    params: &Parameters,
    beta: Option<BetaAngle>,
    traj: &Trajectory,
) -> Result<()> {
    let ratio: Option<RationalRatio> = match classify_regime(params) {
        Regime::OscillatoryDistinct => rational_ratio(params, 32)?,
        _ => None,
    };
    let mut header = String::from("t,q,dq,d2q,d3q,k1,k2");
    if beta.is_some() {
        header.push_str(",h");
    }
    if ratio.is_some() {
        header.push_str(",c");
    }
    writeln!(out, "{header}").map_err(io_err)?;
    for (t, state) in traj.times.iter().zip(&traj.states) {
        let pair = integrals_of_motion(params, state)?;
        let mut row = vec![
            fmt_float(*t),
            fmt_float(state.q),
            fmt_float(state.dq),
            fmt_float(state.d2q),
            fmt_float(state.d3q),
            fmt_float(pair.k1),
            fmt_float(pair.k2),
        ];
        if let Some(b) = beta {
            row.push(fmt_float(hamiltonian_value(params, b, state)?));
        }
        if let Some(r) = ratio {
            row.push(fmt_float(third_integral(params, r, state)?));
        }
        writeln!(out, "{}", row.join(",")).map_err(io_err)?;
    }
    Ok(())
}

/// Serialize the drift report; wall time is excluded by construction.
pub fn write_drift_json<W: Write>(
    out: &mut W,
    params: &Parameters,
    beta: Option<BetaAngle>,
    traj: &Trajectory,
) -> Result<DriftReport> {
    let report = drift_report(params, beta, traj)?;
    serde_json::to_writer_pretty(&mut *out, &report)
        .map_err(|e| PuError::InvalidIntegration(format!("serialization failed: {e}")))?;
    writeln!(out).map_err(io_err)?;
    Ok(report)
}

/// One row of the beta scan: bracket entries, chart scale, extra-mode
/// frequency and the signature of the canonical Hamiltonian. Excluded
/// angles produce a marker row with empty value fields.
pub fn write_beta_scan_csv<W: Write>(
    out: &mut W,
    params: &Parameters,
    betas: &[f64],
) -> Result<()> {
    writeln!(out, "beta,status,sector,p12,p14,p34,delta,extra_mode,signature").map_err(io_err)?;
    let regime = classify_regime(params);
    for &b in betas {
        let beta = BetaAngle::new(b)?;
        match crate::poisson::sector_of(beta, regime) {
            Err(PuError::SingularBeta { .. }) => {
                writeln!(out, "{},excluded,,,,,,,", fmt_float(b)).map_err(io_err)?;
                continue;
            }
            Err(e) => return Err(e),
            Ok(sector) => {
                let bm = crate::poisson::bracket_matrix(params, beta)?;
                let map = crate::darboux::darboux_map(params, beta)?;
                let extra = match regime {
                    Regime::OscillatoryDistinct | Regime::Hyperbolic => {
                        if beta.value().cos() > 0.0 {
                            crate::audit::extra_mode_frequency(params, beta)?
                        } else {
                            None
                        }
                    }
                    _ => None,
                };
                let eig = map.hamiltonian_form.symmetric_eigenvalues();
                let mut signs: Vec<char> =
                    eig.iter().map(|&e| if e >= 0.0 { '+' } else { '-' }).collect();
                signs.sort_unstable();
                signs.reverse();
                let signature: String = signs.into_iter().collect();
                writeln!(
                    out,
                    "{},ok,{},{},{},{},{},{},{}",
                    fmt_float(b),
                    sector,
                    fmt_float(bm.pi[(0, 1)]),
                    fmt_float(bm.pi[(0, 3)]),
                    fmt_float(bm.pi[(2, 3)]),
                    map.delta.map(fmt_float).unwrap_or_default(),
                    extra.map(fmt_float).unwrap_or_default(),
                    signature,
                )
                .map_err(io_err)?;
            }
        }
    }
    Ok(())
}

fn io_err(e: std::io::Error) -> PuError {
    PuError::InvalidIntegration(format!("write failed: {e}"))
}
