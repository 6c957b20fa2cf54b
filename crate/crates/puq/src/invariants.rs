//! Quadratic integrals of motion, the beta-parametrized Hamiltonian on jet
//! states, the superintegrable third integral and the Noether variation.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PuError, Result};
use crate::regime::{
    classify_regime, fit_mode_coefficients, jet_derivatives, mode_frequencies, JetState,
    ModeCoeffs, ModeData, Parameters, Regime, AMPLITUDE_TOL,
};

/// The two global quadratic integrals. For regime (v) these are
/// (Re J1, Im J1), the unique real linear basis given conj(J2) = -J1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralPair {
    pub k1: f64,
    pub k2: f64,
}

/// Angle parametrizing the Hamiltonian ansatz, normalized to [-pi, pi).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaAngle(f64);

impl BetaAngle {
    pub fn new(beta: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(PuError::InvalidParameters("beta must be finite".into()));
        }
        let two_pi = std::f64::consts::TAU;
        let mut b = (beta + std::f64::consts::PI).rem_euclid(two_pi) - std::f64::consts::PI;
        if b >= std::f64::consts::PI {
            b -= two_pi;
        }
        Ok(Self(b))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Reduced frequency ratio w1/w2 = k/l for superintegrable regime-(i)
/// parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalRatio {
    pub k: u64,
    pub l: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn outer(v: &Vector4<f64>) -> Matrix4<f64> {
    v * v.transpose()
}

/// Symmetric 4x4 forms of the two integrals on jet space, as real matrices.
/// For regime (v) the pair is (form of Re J1, form of Im J1).
pub fn integral_forms(params: &Parameters) -> Result<(Matrix4<f64>, Matrix4<f64>)> {
    let m = params.m;
    match mode_frequencies(params) {
        ModeData::Harmonic { .. } => Err(PuError::HarmonicUnsupported),
        md @ (ModeData::OscillatoryDistinct { .. } | ModeData::Hyperbolic { .. }) => {
            let (w1s, w2s) = md.signed_pair().unwrap();
            let nu = m / (std::f64::consts::SQRT_2 * (w1s * w1s - w2s * w2s));
            let b1v = Vector4::new(0.0, w1s, 0.0, 1.0);
            let b1u = Vector4::new(w1s, 0.0, 1.0, 0.0);
            let b2v = Vector4::new(0.0, w2s, 0.0, 1.0);
            let b2u = Vector4::new(w2s, 0.0, 1.0, 0.0);
            let j1 = (outer(&b1v) + w2s * outer(&b1u)) * nu;
            let j2 = (outer(&b2v) + w1s * outer(&b2u)) * nu;
            Ok((j1, j2))
        }
        ModeData::Degenerate { w_sq_repeated } => {
            let wsq = w_sq_repeated / 2.0; // omega^2
            let vv = Vector4::new(0.0, w_sq_repeated, 0.0, 1.0);
            let vu = Vector4::new(w_sq_repeated, 0.0, 1.0, 0.0);
            let i1 = (outer(&vv) + w_sq_repeated * outer(&vu)) * (m / (wsq * wsq));
            // I2 = (m/omega^2)(2(q''' + 2 omega^2 q') q' - q''^2 + 4 omega^4 q^2)
            let mut i2 = Matrix4::zeros();
            i2[(1, 3)] = 1.0;
            i2[(3, 1)] = 1.0;
            i2[(1, 1)] = 2.0 * w_sq_repeated;
            i2[(2, 2)] = -1.0;
            i2[(0, 0)] = w_sq_repeated * w_sq_repeated;
            Ok((i1, i2 * (m / wsq)))
        }
        md @ ModeData::ComplexPair { .. } => {
            let w0 = md.w0_sq().unwrap();
            let w0b = w0.conj();
            let nu = m / (std::f64::consts::SQRT_2 * (w0 * w0 - w0b * w0b));
            // Complex symmetric form of J1, split into real and imaginary parts.
            let mut re = Matrix4::zeros();
            let mut im = Matrix4::zeros();
            let bv = [Complex64::new(0.0, 0.0), w0, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
            let bu = [w0, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
            for r in 0..4 {
                for c in 0..4 {
                    let entry = nu * (bv[r] * bv[c] + w0b * bu[r] * bu[c]);
                    re[(r, c)] = entry.re;
                    im[(r, c)] = entry.im;
                }
            }
            Ok((re, im))
        }
    }
}

fn quad(form: &Matrix4<f64>, jet: &JetState) -> f64 {
    let x = jet.as_vector();
    (x.transpose() * form * x)[(0, 0)]
}

/// Evaluate the two integrals on a jet state.
pub fn integrals_of_motion(params: &Parameters, jet: &JetState) -> Result<IntegralPair> {
    let (f1, f2) = integral_forms(params)?;
    Ok(IntegralPair { k1: quad(&f1, jet), k2: quad(&f2, jet) })
}

/// Symmetric form of H(beta) on jet space. Regimes (i),(iii),(iv):
/// cos(beta) K1 + sin(beta) K2; regime (v): -2 Im(e^{i beta} J1) realified.
pub fn hamiltonian_form_jet(params: &Parameters, beta: BetaAngle) -> Result<Matrix4<f64>> {
    let (f1, f2) = integral_forms(params)?;
    let b = beta.value();
    Ok(match classify_regime(params) {
        Regime::ComplexPair => -2.0 * (b.sin() * f1 + b.cos() * f2),
        _ => b.cos() * f1 + b.sin() * f2,
    })
}

/// H(beta) evaluated on a jet state. Errors on inadmissible beta.
pub fn hamiltonian_value(params: &Parameters, beta: BetaAngle, jet: &JetState) -> Result<f64> {
    crate::poisson::sector_of(beta, classify_regime(params))?;
    Ok(quad(&hamiltonian_form_jet(params, beta)?, jet))
}

/// Detect a rational frequency ratio w1/w2 = k/l with l <= max_denominator
/// (relative tolerance 1e-9). Regime (i) only.
pub fn rational_ratio(params: &Parameters, max_denominator: u64) -> Result<Option<RationalRatio>> {
    match mode_frequencies(params) {
        ModeData::OscillatoryDistinct { w1_sq, w2_sq } => {
            let r = (w1_sq / w2_sq).sqrt();
            for l in 1..=max_denominator {
                let k = (r * l as f64).round() as u64;
                if k == 0 || gcd(k, l) != 1 {
                    continue;
                }
                if (r - k as f64 / l as f64).abs() <= 1e-9 * r {
                    return Ok(Some(RationalRatio { k, l }));
                }
            }
            Ok(None)
        }
        other => Err(PuError::RegimeMismatch(format!(
            "rational ratio defined only in regime (i), got {:?}",
            other.regime()
        ))),
    }
}

/// Third integral sin(l phi1 - k phi2) from the instantaneous mode phases.
/// Returns 0 by convention when either amplitude is below 1e-13.
pub fn third_integral(params: &Parameters, ratio: RationalRatio, jet: &JetState) -> Result<f64> {
    match fit_mode_coefficients(params, jet)? {
        ModeCoeffs::Oscillatory { a1, alpha1, a2, alpha2 } => {
            if a1 < AMPLITUDE_TOL || a2 < AMPLITUDE_TOL {
                return Ok(0.0);
            }
            Ok((ratio.l as f64 * alpha1 - ratio.k as f64 * alpha2).sin())
        }
        other => Err(PuError::RegimeMismatch(format!(
            "third integral defined only in regime (i), got {:?}",
            other.regime()
        ))),
    }
}

/// Jet of the Noether-transformed solution
/// q -> q + eps (q''' +- (w1^2 - w2^2) q'), regime (i).
pub fn noether_variation(
    params: &Parameters,
    jet: &JetState,
    sign: i8,
    epsilon: f64,
) -> Result<JetState> {
    let (w1_sq, w2_sq) = match mode_frequencies(params) {
        ModeData::OscillatoryDistinct { w1_sq, w2_sq } => (w1_sq, w2_sq),
        other => {
            return Err(PuError::RegimeMismatch(format!(
                "Noether variation defined only in regime (i), got {:?}",
                other.regime()
            )))
        }
    };
    let s = if sign >= 0 { 1.0 } else { -1.0 };
    let dw = w1_sq - w2_sq;
    let d = jet_derivatives(params, jet);
    let comp = |n: usize| d[n] + epsilon * (d[n + 3] + s * dw * d[n + 1]);
    Ok(JetState::new(comp(0), comp(1), comp(2), comp(3)))
}
