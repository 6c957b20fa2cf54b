//! Parameter validation, regime classification, mode frequencies and the
//! closed-form solutions of the fourth-order oscillator
//! `lambda q'''' + q'' + omega^2 q = 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PuError, Result};

/// Relative tolerance on |4*lambda*omega^2 - 1| below which parameters are
/// classified as the degenerate regime (iv).
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Threshold under which regimes (i)/(v) are accepted but flagged as
/// ill-conditioned: 1/(w1^2 - w2^2) appears throughout.
pub const NEAR_DEGENERACY_WARN: f64 = 1e-9;

/// Amplitude below which a mode phase is undefined and canonicalized to 0.
pub const AMPLITUDE_TOL: f64 = 1e-13;

/// Physical constants of the oscillator: mass, frequency squared and the
/// higher-derivative coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub m: f64,
    pub omega_sq: f64,
    pub lambda: f64,
}

impl Parameters {
    pub fn new(m: f64, omega_sq: f64, lambda: f64) -> Result<Self> {
        if !(m.is_finite() && omega_sq.is_finite() && lambda.is_finite()) {
            return Err(PuError::InvalidParameters("non-finite input".into()));
        }
        if m <= 0.0 {
            return Err(PuError::InvalidParameters(format!("m = {m} must be positive")));
        }
        if omega_sq <= 0.0 {
            return Err(PuError::InvalidParameters(format!(
                "omega^2 = {omega_sq} must be positive"
            )));
        }
        Ok(Self { m, omega_sq, lambda })
    }

    /// Discriminant 1 - 4*lambda*omega^2 of the frequency quadratic.
    pub fn discriminant(&self) -> f64 {
        1.0 - 4.0 * self.lambda * self.omega_sq
    }

    /// True when 0 < |4*lambda*omega^2 - 1| < 1e-9: accepted, but formulas
    /// containing 1/(w1^2 - w2^2) are poorly conditioned.
    pub fn near_degenerate(&self) -> bool {
        let d = self.discriminant().abs();
        d > DEGENERACY_TOL && d < NEAR_DEGENERACY_WARN
    }
}

/// The five spectral cases of the frequency quadratic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// (i): 0 < lambda < 1/(4 omega^2), two distinct positive roots.
    OscillatoryDistinct,
    /// (ii): lambda = 0, plain harmonic oscillator.
    Harmonic,
    /// (iii): lambda < 0, one negative and one positive root.
    Hyperbolic,
    /// (iv): lambda = 1/(4 omega^2), repeated root 2 omega^2.
    Degenerate,
    /// (v): lambda > 1/(4 omega^2), complex-conjugate roots.
    ComplexPair,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::OscillatoryDistinct => "oscillatory-distinct (i)",
            Regime::Harmonic => "harmonic (ii)",
            Regime::Hyperbolic => "hyperbolic (iii)",
            Regime::Degenerate => "degenerate (iv)",
            Regime::ComplexPair => "complex-pair (v)",
        };
        f.write_str(s)
    }
}

/// Regime tag plus the regime-specific frequency payload.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ModeData {
    /// w1_sq > w2_sq > 0.
    OscillatoryDistinct { w1_sq: f64, w2_sq: f64 },
    Harmonic { w_sq: f64 },
    /// w1_abs_sq = -w1^2 > 0 (the "+" root is negative for lambda < 0).
    Hyperbolic { w1_abs_sq: f64, w2_sq: f64 },
    /// Repeated root 2 omega^2.
    Degenerate { w_sq_repeated: f64 },
    /// w0_sq with Im > 0 by convention; the conjugate root is implied.
    ComplexPair { w0_sq_re: f64, w0_sq_im: f64 },
}

impl ModeData {
    pub fn regime(&self) -> Regime {
        match self {
            ModeData::OscillatoryDistinct { .. } => Regime::OscillatoryDistinct,
            ModeData::Harmonic { .. } => Regime::Harmonic,
            ModeData::Hyperbolic { .. } => Regime::Hyperbolic,
            ModeData::Degenerate { .. } => Regime::Degenerate,
            ModeData::ComplexPair { .. } => Regime::ComplexPair,
        }
    }

    /// Signed root pair (w1^2, w2^2) for the regimes where both roots are
    /// real. For (iii) w1^2 = -|w1|^2; for (iv) both equal 2 omega^2.
    pub fn signed_pair(&self) -> Option<(f64, f64)> {
        match *self {
            ModeData::OscillatoryDistinct { w1_sq, w2_sq } => Some((w1_sq, w2_sq)),
            ModeData::Hyperbolic { w1_abs_sq, w2_sq } => Some((-w1_abs_sq, w2_sq)),
            ModeData::Degenerate { w_sq_repeated } => Some((w_sq_repeated, w_sq_repeated)),
            _ => None,
        }
    }

    pub fn w0_sq(&self) -> Option<Complex64> {
        match *self {
            ModeData::ComplexPair { w0_sq_re, w0_sq_im } => {
                Some(Complex64::new(w0_sq_re, w0_sq_im))
            }
            _ => None,
        }
    }
}

/// The 4-vector (q, q', q'', q''') treated as phase-space coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JetState {
    pub q: f64,
    pub dq: f64,
    pub d2q: f64,
    pub d3q: f64,
}

impl JetState {
    pub fn new(q: f64, dq: f64, d2q: f64, d3q: f64) -> Self {
        Self { q, dq, d2q, d3q }
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.q, self.dq, self.d2q, self.d3q]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn as_vector(&self) -> nalgebra::Vector4<f64> {
        nalgebra::Vector4::new(self.q, self.dq, self.d2q, self.d3q)
    }

    pub fn from_vector(v: &nalgebra::Vector4<f64>) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|x| x.is_finite())
    }
}

/// Mode amplitudes and phases for the closed-form solution of each regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ModeCoeffs {
    /// q = A1 cos(w1 t + a1) + A2 cos(w2 t + a2)
    Oscillatory { a1: f64, alpha1: f64, a2: f64, alpha2: f64 },
    /// q = A cos(w t + a)
    Harmonic { a: f64, alpha: f64 },
    /// q = A e^{|w1| t} + A' e^{-|w1| t} + B cos(w2 t + phase)
    Hyperbolic { a_grow: f64, a_decay: f64, b: f64, phase: f64 },
    /// q = A1 cos(W t + a1) + A2 t cos(W t + a2), W = sqrt(2) omega
    Degenerate { a1: f64, alpha1: f64, a2: f64, alpha2: f64 },
    /// q = 2 Re(d+ e^{i w0 t} + d- e^{-i w0 t}), w0 = principal sqrt(w0^2)
    ComplexPair { d_plus_re: f64, d_plus_im: f64, d_minus_re: f64, d_minus_im: f64 },
}

impl ModeCoeffs {
    pub fn regime(&self) -> Regime {
        match self {
            ModeCoeffs::Oscillatory { .. } => Regime::OscillatoryDistinct,
            ModeCoeffs::Harmonic { .. } => Regime::Harmonic,
            ModeCoeffs::Hyperbolic { .. } => Regime::Hyperbolic,
            ModeCoeffs::Degenerate { .. } => Regime::Degenerate,
            ModeCoeffs::ComplexPair { .. } => Regime::ComplexPair,
        }
    }

    pub fn zero_for(regime: Regime) -> Self {
        match regime {
            Regime::OscillatoryDistinct => {
                ModeCoeffs::Oscillatory { a1: 0.0, alpha1: 0.0, a2: 0.0, alpha2: 0.0 }
            }
            Regime::Harmonic => ModeCoeffs::Harmonic { a: 0.0, alpha: 0.0 },
            Regime::Hyperbolic => {
                ModeCoeffs::Hyperbolic { a_grow: 0.0, a_decay: 0.0, b: 0.0, phase: 0.0 }
            }
            Regime::Degenerate => {
                ModeCoeffs::Degenerate { a1: 0.0, alpha1: 0.0, a2: 0.0, alpha2: 0.0 }
            }
            Regime::ComplexPair => ModeCoeffs::ComplexPair {
                d_plus_re: 0.0,
                d_plus_im: 0.0,
                d_minus_re: 0.0,
                d_minus_im: 0.0,
            },
        }
    }
}

/// Classify parameters into one of the five regimes.
pub fn classify_regime(params: &Parameters) -> Regime {
    if params.lambda == 0.0 {
        return Regime::Harmonic;
    }
    if params.lambda < 0.0 {
        return Regime::Hyperbolic;
    }
    let d = params.discriminant();
    if d.abs() < DEGENERACY_TOL {
        Regime::Degenerate
    } else if d > 0.0 {
        Regime::OscillatoryDistinct
    } else {
        Regime::ComplexPair
    }
}

/// Mode frequencies per regime. The two real roots are computed in the
/// cancellation-free form w2^2 = 2 omega^2 / (1 + sqrt(disc)).
pub fn mode_frequencies(params: &Parameters) -> ModeData {
    match classify_regime(params) {
        Regime::Harmonic => ModeData::Harmonic { w_sq: params.omega_sq },
        Regime::Degenerate => ModeData::Degenerate { w_sq_repeated: 2.0 * params.omega_sq },
        Regime::OscillatoryDistinct => {
            let s = params.discriminant().sqrt();
            ModeData::OscillatoryDistinct {
                w1_sq: (1.0 + s) / (2.0 * params.lambda),
                w2_sq: 2.0 * params.omega_sq / (1.0 + s),
            }
        }
        Regime::Hyperbolic => {
            let s = params.discriminant().sqrt();
            ModeData::Hyperbolic {
                w1_abs_sq: -(1.0 + s) / (2.0 * params.lambda),
                w2_sq: 2.0 * params.omega_sq / (1.0 + s),
            }
        }
        Regime::ComplexPair => {
            let s = (-params.discriminant()).sqrt();
            ModeData::ComplexPair {
                w0_sq_re: 1.0 / (2.0 * params.lambda),
                w0_sq_im: s / (2.0 * params.lambda),
            }
        }
    }
}

fn wrap_phase(a: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut x = (a + std::f64::consts::PI).rem_euclid(two_pi) - std::f64::consts::PI;
    if x >= std::f64::consts::PI {
        x -= two_pi;
    }
    x
}

/// n-th derivative of A cos(w t + alpha).
fn cos_mode_deriv(a: f64, w: f64, alpha: f64, t: f64, n: u32) -> f64 {
    a * w.powi(n as i32) * (w * t + alpha + n as f64 * std::f64::consts::FRAC_PI_2).cos()
}

/// n-th derivative of the closed-form solution at time t.
pub fn solution_derivative(params: &Parameters, coeffs: &ModeCoeffs, t: f64, n: u32) -> Result<f64> {
    let modes = mode_frequencies(params);
    if coeffs.regime() != modes.regime() {
        return Err(PuError::RegimeMismatch(format!(
            "coefficients tagged {:?} but parameters are in regime {:?}",
            coeffs.regime(),
            modes.regime()
        )));
    }
    Ok(match (*coeffs, modes) {
        (ModeCoeffs::Oscillatory { a1, alpha1, a2, alpha2 }, ModeData::OscillatoryDistinct { w1_sq, w2_sq }) => {
            cos_mode_deriv(a1, w1_sq.sqrt(), alpha1, t, n) + cos_mode_deriv(a2, w2_sq.sqrt(), alpha2, t, n)
        }
        (ModeCoeffs::Harmonic { a, alpha }, ModeData::Harmonic { w_sq }) => {
            cos_mode_deriv(a, w_sq.sqrt(), alpha, t, n)
        }
        (ModeCoeffs::Hyperbolic { a_grow, a_decay, b, phase }, ModeData::Hyperbolic { w1_abs_sq, w2_sq }) => {
            let nu = w1_abs_sq.sqrt();
            a_grow * nu.powi(n as i32) * (nu * t).exp()
                + a_decay * (-nu).powi(n as i32) * (-nu * t).exp()
                + cos_mode_deriv(b, w2_sq.sqrt(), phase, t, n)
        }
        (ModeCoeffs::Degenerate { a1, alpha1, a2, alpha2 }, ModeData::Degenerate { w_sq_repeated }) => {
            let w = w_sq_repeated.sqrt();
            // d^n/dt^n [t cos(w t + a)] = t (cos)^(n) + n (cos)^(n-1)
            let secular = t * cos_mode_deriv(a2, w, alpha2, t, n)
                + if n > 0 { n as f64 * cos_mode_deriv(a2, w, alpha2, t, n - 1) } else { 0.0 };
            cos_mode_deriv(a1, w, alpha1, t, n) + secular
        }
        (ModeCoeffs::ComplexPair { d_plus_re, d_plus_im, d_minus_re, d_minus_im }, md @ ModeData::ComplexPair { .. }) => {
            let w0 = md.w0_sq().unwrap().sqrt();
            let dp = Complex64::new(d_plus_re, d_plus_im);
            let dm = Complex64::new(d_minus_re, d_minus_im);
            let iw = Complex64::i() * w0;
            2.0 * (dp * iw.powu(n) * (iw * t).exp() + dm * (-iw).powu(n) * (-iw * t).exp()).re
        }
        _ => unreachable!("regime tags already checked"),
    })
}

/// Jet (q, q', q'', q''') of the closed-form solution at time t.
pub fn exact_solution(params: &Parameters, coeffs: &ModeCoeffs, t: f64) -> Result<JetState> {
    Ok(JetState::new(
        solution_derivative(params, coeffs, t, 0)?,
        solution_derivative(params, coeffs, t, 1)?,
        solution_derivative(params, coeffs, t, 2)?,
        solution_derivative(params, coeffs, t, 3)?,
    ))
}

/// Euler-Lagrange residual lambda q'''' + q'' + omega^2 q.
pub fn el_residual(params: &Parameters, jet: &JetState, d4q: f64) -> f64 {
    params.lambda * d4q + jet.d2q + params.omega_sq * jet.q
}

/// Derivatives q^(n) for n = 0..=6, closing the jet under the equation of
/// motion (q'''' = -(q'' + omega^2 q)/lambda, or q'' = -omega^2 q for
/// lambda = 0).
pub fn jet_derivatives(params: &Parameters, jet: &JetState) -> [f64; 7] {
    let mut d = [jet.q, jet.dq, jet.d2q, jet.d3q, 0.0, 0.0, 0.0];
    if params.lambda == 0.0 {
        for n in 4..7 {
            d[n] = -params.omega_sq * d[n - 2];
        }
    } else {
        for n in 4..7 {
            d[n] = -(d[n - 2] + params.omega_sq * d[n - 4]) / params.lambda;
        }
    }
    d
}

fn amp_phase(c: f64, s: f64) -> (f64, f64) {
    let a = c.hypot(s);
    if a < AMPLITUDE_TOL {
        (0.0, 0.0)
    } else {
        (a, wrap_phase(f64::atan2(s, c)))
    }
}

/// Invert the linear mode map: coefficients whose solution reproduces the
/// given jet at t = 0.
pub fn fit_mode_coefficients(params: &Parameters, jet: &JetState) -> Result<ModeCoeffs> {
    let modes = mode_frequencies(params);
    match modes {
        ModeData::OscillatoryDistinct { w1_sq, w2_sq } => {
            let dw = w1_sq - w2_sq;
            let (w1, w2) = (w1_sq.sqrt(), w2_sq.sqrt());
            // u_i = q'' + w_j^2 q projects onto mode i (j = the other mode).
            let u1 = jet.d2q + w2_sq * jet.q;
            let v1 = jet.d3q + w2_sq * jet.dq;
            let u2 = jet.d2q + w1_sq * jet.q;
            let v2 = jet.d3q + w1_sq * jet.dq;
            let (a1, alpha1) = amp_phase(-u1 / dw, v1 / (w1 * dw));
            let (a2, alpha2) = amp_phase(u2 / dw, -v2 / (w2 * dw));
            Ok(ModeCoeffs::Oscillatory { a1, alpha1, a2, alpha2 })
        }
        ModeData::Harmonic { w_sq } => {
            let w = w_sq.sqrt();
            let (a, alpha) = amp_phase(jet.q, -jet.dq / w);
            Ok(ModeCoeffs::Harmonic { a, alpha })
        }
        ModeData::Hyperbolic { w1_abs_sq, w2_sq } => {
            let sum = w1_abs_sq + w2_sq;
            let nu = w1_abs_sq.sqrt();
            let u1 = jet.d2q + w2_sq * jet.q;
            let v1 = jet.d3q + w2_sq * jet.dq;
            let u2 = jet.d2q - w1_abs_sq * jet.q;
            let v2 = jet.d3q - w1_abs_sq * jet.dq;
            let a_grow = (u1 + v1 / nu) / (2.0 * sum);
            let a_decay = (u1 - v1 / nu) / (2.0 * sum);
            let (b, phase) = amp_phase(-u2 / sum, v2 / (w2_sq.sqrt() * sum));
            Ok(ModeCoeffs::Hyperbolic { a_grow, a_decay, b, phase })
        }
        ModeData::Degenerate { w_sq_repeated } => {
            let w = w_sq_repeated.sqrt();
            // Basis (cos, sin, t cos, t sin) evaluated in the jet at t = 0.
            let basis = nalgebra::Matrix4::new(
                1.0, 0.0, 0.0, 0.0,
                0.0, w, 1.0, 0.0,
                -w * w, 0.0, 0.0, 2.0 * w,
                0.0, -w * w * w, -3.0 * w * w, 0.0,
            );
            let inv = basis
                .try_inverse()
                .ok_or_else(|| PuError::RegimeMismatch("singular degenerate mode map".into()))?;
            let c = inv * jet.as_vector();
            let (a1, alpha1) = amp_phase(c[0], -c[1]);
            let (a2, alpha2) = amp_phase(c[2], -c[3]);
            Ok(ModeCoeffs::Degenerate { a1, alpha1, a2, alpha2 })
        }
        md @ ModeData::ComplexPair { .. } => {
            let w0_sq = md.w0_sq().unwrap();
            let w0 = w0_sq.sqrt();
            let w0_sq_bar = w0_sq.conj();
            // u1 = q'' + conj(w0^2) q isolates the e^{+-i w0 t} pair.
            let u1 = Complex64::new(jet.d2q, 0.0) + w0_sq_bar * jet.q;
            let v1 = Complex64::new(jet.d3q, 0.0) + w0_sq_bar * jet.dq;
            let denom = 2.0 * (w0_sq_bar - w0_sq);
            let iw = Complex64::i() * w0;
            let d_plus = (u1 + v1 / iw) / denom;
            let d_minus = (u1 - v1 / iw) / denom;
            Ok(ModeCoeffs::ComplexPair {
                d_plus_re: d_plus.re,
                d_plus_im: d_plus.im,
                d_minus_re: d_minus.re,
                d_minus_im: d_minus.im,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_abs_diff_eq;

    #[test]
    fn classification_of_fixtures() {
        assert_eq!(classify_regime(&fixtures::fix_a()), Regime::OscillatoryDistinct);
        assert_eq!(classify_regime(&Parameters::new(1.0, 1.0, 0.0).unwrap()), Regime::Harmonic);
        assert_eq!(classify_regime(&fixtures::fix_d()), Regime::Hyperbolic);
        assert_eq!(classify_regime(&fixtures::fix_b()), Regime::Degenerate);
        assert_eq!(classify_regime(&fixtures::fix_c()), Regime::ComplexPair);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(Parameters::new(-1.0, 1.0, 0.1).is_err());
        assert!(Parameters::new(1.0, 0.0, 0.1).is_err());
        assert!(Parameters::new(1.0, f64::NAN, 0.1).is_err());
    }

    #[test]
    fn fix_a_frequencies_exact() {
        match mode_frequencies(&fixtures::fix_a()) {
            ModeData::OscillatoryDistinct { w1_sq, w2_sq } => {
                assert_abs_diff_eq!(w1_sq, 4.0, epsilon = 1e-14);
                assert_abs_diff_eq!(w2_sq, 1.0, epsilon = 1e-14);
            }
            other => panic!("wrong payload: {other:?}"),
        }
    }

    #[test]
    fn fix_b_repeated_root() {
        match mode_frequencies(&fixtures::fix_b()) {
            ModeData::Degenerate { w_sq_repeated } => {
                assert_abs_diff_eq!(w_sq_repeated, 2.0, epsilon = 1e-14)
            }
            other => panic!("wrong payload: {other:?}"),
        }
    }

    #[test]
    fn fix_c_complex_root() {
        match mode_frequencies(&fixtures::fix_c()) {
            ModeData::ComplexPair { w0_sq_re, w0_sq_im } => {
                assert_abs_diff_eq!(w0_sq_re, 1.0, epsilon = 1e-14);
                assert_abs_diff_eq!(w0_sq_im, 1.0, epsilon = 1e-14);
            }
            other => panic!("wrong payload: {other:?}"),
        }
    }

    #[test]
    fn fix_d_hyperbolic_roots() {
        match mode_frequencies(&fixtures::fix_d()) {
            ModeData::Hyperbolic { w1_abs_sq, w2_sq } => {
                assert_abs_diff_eq!(w1_abs_sq, 1.0 + 3f64.sqrt(), epsilon = 1e-14);
                assert_abs_diff_eq!(w2_sq, 3f64.sqrt() - 1.0, epsilon = 1e-14);
            }
            other => panic!("wrong payload: {other:?}"),
        }
    }

    #[test]
    fn exact_solution_pure_mode_one() {
        let p = fixtures::fix_a();
        let c = ModeCoeffs::Oscillatory { a1: 1.0, alpha1: 0.0, a2: 0.0, alpha2: 0.0 };
        let jet = exact_solution(&p, &c, 0.0).unwrap();
        assert_abs_diff_eq!(jet.q, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(jet.dq, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(jet.d2q, -4.0, epsilon = 1e-14);
        assert_abs_diff_eq!(jet.d3q, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn exact_solution_zero_coeffs() {
        for p in fixtures::all() {
            let regime = classify_regime(&p);
            let c = ModeCoeffs::zero_for(regime);
            let jet = exact_solution(&p, &c, 1.7).unwrap();
            assert_eq!(jet, JetState::zero());
        }
    }

    #[test]
    fn degenerate_secular_jet() {
        // q = t cos(sqrt(2) t): third derivative at 0 is -3*2.
        let p = fixtures::fix_b();
        let c = ModeCoeffs::Degenerate { a1: 0.0, alpha1: 0.0, a2: 1.0, alpha2: 0.0 };
        let jet = exact_solution(&p, &c, 0.0).unwrap();
        assert_abs_diff_eq!(jet.q, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(jet.dq, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(jet.d2q, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(jet.d3q, -6.0, epsilon = 1e-14);
    }

    #[test]
    fn solutions_satisfy_eom() {
        for p in fixtures::all() {
            let jet0 = JetState::new(0.3, -0.4, 1.1, 0.2);
            let c = fit_mode_coefficients(&p, &jet0).unwrap();
            for k in 0..20 {
                // FIX-D grows like e^{1.65 t}; keep |t| moderate there.
                let t = -10.0 + 20.0 * (k as f64) / 19.0;
                let jet = exact_solution(&p, &c, t).unwrap();
                let d4 = solution_derivative(&p, &c, t, 4).unwrap();
                let scale = jet.as_array().iter().fold(1.0f64, |a, x| a.max(x.abs()));
                assert!(el_residual(&p, &jet, d4).abs() / scale < 1e-10, "{p:?} t={t}");
            }
        }
    }

    #[test]
    fn fit_round_trip_all_regimes() {
        for p in fixtures::all() {
            let harmonic = matches!(classify_regime(&p), Regime::Harmonic);
            for seed in 0..50u64 {
                let x = ((seed * 2654435761) % 1000) as f64 / 500.0 - 1.0;
                let jet0 = if harmonic {
                    // Only jets on the constrained manifold q'' = -w^2 q,
                    // q''' = -w^2 q' admit a mode fit here.
                    let w_sq = p.omega_sq;
                    JetState::new(x, 0.7 - x, -w_sq * x, -w_sq * (0.7 - x))
                } else {
                    JetState::new(x, 0.7 - x, x * x, -0.3 + 0.2 * x)
                };
                let c = fit_mode_coefficients(&p, &jet0).unwrap();
                let jet1 = exact_solution(&p, &c, 0.0).unwrap();
                for (a, b) in jet0.as_array().iter().zip(jet1.as_array()) {
                    assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn fit_mode_one_example() {
        let p = fixtures::fix_a();
        let c = fit_mode_coefficients(&p, &JetState::new(1.0, 0.0, -4.0, 0.0)).unwrap();
        match c {
            ModeCoeffs::Oscillatory { a1, alpha1, a2, alpha2 } => {
                assert_abs_diff_eq!(a1, 1.0, epsilon = 1e-13);
                assert_abs_diff_eq!(alpha1, 0.0, epsilon = 1e-13);
                assert_abs_diff_eq!(a2, 0.0, epsilon = 1e-13);
                assert_abs_diff_eq!(alpha2, 0.0, epsilon = 1e-13);
            }
            other => panic!("wrong tag: {other:?}"),
        }
    }

    #[test]
    fn fit_zero_jet() {
        for p in fixtures::all() {
            let c = fit_mode_coefficients(&p, &JetState::zero()).unwrap();
            assert_eq!(c, ModeCoeffs::zero_for(classify_regime(&p)));
        }
    }

    #[test]
    fn el_residual_examples() {
        let p = fixtures::fix_a();
        let jet = JetState::new(1.0, 0.0, 0.0, 0.0);
        assert_abs_diff_eq!(el_residual(&p, &jet, -4.0), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(el_residual(&p, &jet, 0.0), 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(el_residual(&p, &JetState::zero(), 0.0), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn regime_coeff_mismatch_rejected() {
        let p = fixtures::fix_a();
        let c = ModeCoeffs::Harmonic { a: 1.0, alpha: 0.0 };
        assert!(exact_solution(&p, &c, 0.0).is_err());
    }
}
