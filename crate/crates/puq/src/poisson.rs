//! The beta-family of constant Poisson bracket matrices on jet space:
//! construction per regime, sector admissibility, brackets of observables
//! and the structural identities.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PuError, Result};
use crate::invariants::{hamiltonian_form_jet, BetaAngle};
use crate::regime::{classify_regime, mode_frequencies, JetState, ModeData, Parameters, Regime};

/// Absolute tolerance on sin/cos zeros below which beta is rejected:
/// the bracket entries diverge like 1/sin(beta) at the excluded points.
pub const SINGULAR_BETA_TOL: f64 = 1e-12;

/// Maximal open beta-interval on which the bracket family is nonsingular.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sector {
    /// (0, pi/2) — regimes (i)/(iii)
    Q1,
    /// (pi/2, pi)
    Q2,
    /// (-pi, -pi/2)
    Q3,
    /// (-pi/2, 0)
    Q4,
    /// (0, pi) — regime (iv)
    UpperHalf,
    /// (-pi, 0)
    LowerHalf,
    /// all of [-pi, pi) — regime (v)
    FullCircle,
}

impl std::fmt::Display for Sector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Sector::Q1 => "(0, pi/2)",
            Sector::Q2 => "(pi/2, pi)",
            Sector::Q3 => "(-pi, -pi/2)",
            Sector::Q4 => "(-pi/2, 0)",
            Sector::UpperHalf => "(0, pi)",
            Sector::LowerHalf => "(-pi, 0)",
            Sector::FullCircle => "[-pi, pi)",
        };
        f.write_str(s)
    }
}

/// 4x4 antisymmetric Poisson tensor over the ordered basis (q, q', q'', q''').
#[derive(Debug, Clone, PartialEq)]
pub struct BracketMatrix {
    pub pi: Matrix4<f64>,
    /// Normalization constant actually used: gamma for (i)/(iii); the real
    /// number g with gamma = -i g for the realified regime (v); 1/(2m) for
    /// regime (iv), whose printed family carries no single gamma.
    pub gamma: f64,
    pub beta: BetaAngle,
    /// The quoted closed-form determinant for regimes (i)/(iii), recorded
    /// for comparison (it drops gamma-dependent constant factors).
    pub printed_det: Option<f64>,
}

/// Determinant of the bracket matrix, its self-consistent closed form, and
/// the quoted closed-form value where one exists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeterminantComparison {
    pub numeric: f64,
    /// (a d - b^2)^2 with a = {q,q'}, b = -{q,q'''}, d = {q'',q'''}.
    pub closed_form: f64,
    pub printed: Option<f64>,
    /// Set when numeric and printed disagree beyond 1e-10 relative.
    pub printed_discrepancy: bool,
}

/// Quadratic observable f(x) = x^T A x + b^T x + c on jet space.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObservable {
    pub a: Matrix4<f64>,
    pub b: Vector4<f64>,
    pub c: f64,
}

impl QuadraticObservable {
    pub fn quadratic(a: Matrix4<f64>) -> Self {
        Self { a, b: Vector4::zeros(), c: 0.0 }
    }

    pub fn linear(b: Vector4<f64>) -> Self {
        Self { a: Matrix4::zeros(), b, c: 0.0 }
    }

    /// The i-th jet coordinate (0 = q, ..., 3 = q''').
    pub fn coordinate(i: usize) -> Self {
        let mut b = Vector4::zeros();
        b[i] = 1.0;
        Self::linear(b)
    }

    pub fn eval(&self, jet: &JetState) -> f64 {
        let x = jet.as_vector();
        (x.transpose() * self.a * x)[(0, 0)] + self.b.dot(&x) + self.c
    }

    pub fn gradient(&self, jet: &JetState) -> Vector4<f64> {
        2.0 * self.a * jet.as_vector() + self.b
    }
}

/// Containing sector of beta for the given regime; errors when beta sits on
/// an excluded point (within 1e-12 of a sin/cos zero).
pub fn sector_of(beta: BetaAngle, regime: Regime) -> Result<Sector> {
    let b = beta.value();
    let singular = |tol_hit: bool| -> Result<()> {
        if tol_hit {
            Err(PuError::SingularBeta { beta: b, tol: SINGULAR_BETA_TOL })
        } else {
            Ok(())
        }
    };
    match regime {
        Regime::Harmonic => Err(PuError::HarmonicUnsupported),
        Regime::ComplexPair => Ok(Sector::FullCircle),
        Regime::Degenerate => {
            singular(b.sin().abs() < SINGULAR_BETA_TOL)?;
            Ok(if b > 0.0 { Sector::UpperHalf } else { Sector::LowerHalf })
        }
        Regime::OscillatoryDistinct | Regime::Hyperbolic => {
            singular(b.sin().abs() < SINGULAR_BETA_TOL || b.cos().abs() < SINGULAR_BETA_TOL)?;
            Ok(match (b.cos() > 0.0, b.sin() > 0.0) {
                (true, true) => Sector::Q1,
                (false, true) => Sector::Q2,
                (false, false) => Sector::Q3,
                (true, false) => Sector::Q4,
            })
        }
    }
}

fn antisymmetric(p12: f64, p14: f64, p34: f64) -> Matrix4<f64> {
    // Entries (1,3) and (2,4) vanish in every regime, and {q',q''} = -{q,q'''}.
    Matrix4::new(
        0.0, p12, 0.0, p14,
        -p12, 0.0, -p14, 0.0,
        0.0, p14, 0.0, p34,
        -p14, 0.0, -p34, 0.0,
    )
}

/// Bracket matrix for the regime of `params` at the given beta.
pub fn bracket_matrix(params: &Parameters, beta: BetaAngle) -> Result<BracketMatrix> {
    let regime = classify_regime(params);
    sector_of(beta, regime)?;
    let b = beta.value();
    let (cb, sb) = (b.cos(), b.sin());
    let m = params.m;
    match mode_frequencies(params) {
        ModeData::Harmonic { .. } => Err(PuError::HarmonicUnsupported),
        md @ (ModeData::OscillatoryDistinct { .. } | ModeData::Hyperbolic { .. }) => {
            let (w1s, w2s) = md.signed_pair().unwrap();
            let gamma = 1.0 / (std::f64::consts::SQRT_2 * m * params.lambda * (w1s - w2s));
            let p12 = gamma * (1.0 / cb + 1.0 / sb);
            let p14 = -gamma * (w2s / cb + w1s / sb);
            let p34 = gamma * (w2s * w2s / cb + w1s * w1s / sb);
            let printed = ((w1s - w2s) / (cb * sb)).powi(2);
            Ok(BracketMatrix {
                pi: antisymmetric(p12, p14, p34),
                gamma,
                beta,
                printed_det: Some(printed),
            })
        }
        ModeData::Degenerate { w_sq_repeated } => {
            let wsq = w_sq_repeated / 2.0;
            let s2 = sb * sb;
            let p12 = -cb / (2.0 * m * s2);
            let p14 = (2.0 * cb + sb) * wsq / (2.0 * m * s2);
            let p34 = -2.0 * (cb + sb) * wsq * wsq / (m * s2);
            Ok(BracketMatrix {
                pi: antisymmetric(p12, p14, p34),
                gamma: 1.0 / (2.0 * m),
                beta,
                printed_det: None,
            })
        }
        md @ ModeData::ComplexPair { .. } => {
            let w0 = md.w0_sq().unwrap();
            // gamma = 1/(sqrt(2) m lambda (w0^2 - conj(w0^2))) = -i g, g real.
            let g = 1.0 / (2.0 * std::f64::consts::SQRT_2 * m * params.lambda * w0.im);
            let eib = Complex64::new(0.0, b).exp();
            let p12 = -2.0 * g * cb;
            let p14 = 2.0 * g * (w0 * eib).re;
            let p34 = -2.0 * g * (w0 * w0 * eib).re;
            Ok(BracketMatrix {
                pi: antisymmetric(p12, p14, p34),
                gamma: g,
                beta,
                printed_det: None,
            })
        }
    }
}

/// Numeric determinant, the closed form (ad - b^2)^2, and the printed value.
pub fn bracket_determinant(matrix: &BracketMatrix) -> DeterminantComparison {
    let numeric = matrix.pi.determinant();
    let a = matrix.pi[(0, 1)];
    let b = -matrix.pi[(0, 3)];
    let d = matrix.pi[(2, 3)];
    let closed_form = (a * d - b * b).powi(2);
    let printed_discrepancy = matrix
        .printed_det
        .map(|p| (numeric - p).abs() > 1e-10 * numeric.abs().max(p.abs()))
        .unwrap_or(false);
    DeterminantComparison {
        numeric,
        closed_form,
        printed: matrix.printed_det,
        printed_discrepancy,
    }
}

/// Gradient-form bracket {f, g}(x) = grad f(x)^T Pi grad g(x).
pub fn poisson_bracket(
    matrix: &BracketMatrix,
    f: &QuadraticObservable,
    g: &QuadraticObservable,
    at: &JetState,
) -> f64 {
    (f.gradient(at).transpose() * matrix.pi * g.gradient(at))[(0, 0)]
}

/// The four brackets of (q'' + w_i^2 q, q''' + w_j^2 q') combinations that
/// vanish for every admissible beta in regime (i) (and (iii) with the
/// signed root).
pub fn verify_mode_brackets(params: &Parameters, beta: BetaAngle) -> Result<[f64; 4]> {
    let md = mode_frequencies(params);
    let (w1s, w2s) = md.signed_pair().ok_or_else(|| {
        PuError::RegimeMismatch("bracket identities need two real roots".into())
    })?;
    let bm = bracket_matrix(params, beta)?;
    let u = |wsq: f64| QuadraticObservable::linear(Vector4::new(wsq, 0.0, 1.0, 0.0));
    let v = |wsq: f64| QuadraticObservable::linear(Vector4::new(0.0, wsq, 0.0, 1.0));
    let at = JetState::zero();
    Ok([
        poisson_bracket(&bm, &u(w1s), &u(w2s), &at),
        poisson_bracket(&bm, &v(w1s), &v(w2s), &at),
        poisson_bracket(&bm, &u(w1s), &v(w2s), &at),
        poisson_bracket(&bm, &u(w2s), &v(w1s), &at),
    ])
}

/// Pi grad H at the state. Independent of beta: every member of the family
/// generates the same fourth-order flow (q', q'', q''', -(q'' + w^2 q)/lambda).
pub fn hamiltonian_flow_field(
    params: &Parameters,
    beta: BetaAngle,
    jet: &JetState,
) -> Result<Vector4<f64>> {
    let bm = bracket_matrix(params, beta)?;
    let h = QuadraticObservable::quadratic(hamiltonian_form_jet(params, beta)?);
    Ok(bm.pi * h.gradient(jet))
}

/// The beta-independent companion flow field of the equation of motion.
pub fn companion_flow_field(params: &Parameters, jet: &JetState) -> Vector4<f64> {
    Vector4::new(
        jet.dq,
        jet.d2q,
        jet.d3q,
        -(jet.d2q + params.omega_sq * jet.q) / params.lambda,
    )
}
