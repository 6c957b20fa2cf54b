//! Sector-wise linear Darboux maps: canonical coordinates (q1, p1, q2, p2)
//! in which the bracket matrix becomes the standard symplectic form and
//! H(beta) separates into quadratic blocks.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PuError, Result};
use crate::invariants::{hamiltonian_form_jet, BetaAngle};
use crate::poisson::{bracket_matrix, sector_of, Sector};
use crate::regime::{classify_regime, mode_frequencies, JetState, ModeData, Parameters};

/// Canonical coordinates, ordered (q1, p1, q2, p2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalState {
    pub q1: f64,
    pub p1: f64,
    pub q2: f64,
    pub p2: f64,
}

impl CanonicalState {
    pub fn new(q1: f64, p1: f64, q2: f64, p2: f64) -> Self {
        Self { q1, p1, q2, p2 }
    }

    pub fn as_vector(&self) -> Vector4<f64> {
        Vector4::new(self.q1, self.p1, self.q2, self.p2)
    }

    pub fn from_vector(v: &Vector4<f64>) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }
}

/// The standard symplectic form on (q1, p1, q2, p2).
pub fn standard_symplectic() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 1.0, 0.0, 0.0,
        -1.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
        0.0, 0.0, -1.0, 0.0,
    )
}

/// Exchange of q_i and p_i in each canonical pair; conjugating the bracket
/// by it flips the sign of the symplectic form, which compensates
/// Pi(beta + pi) = -Pi(beta) when extending a map across sectors.
fn pair_swap() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 1.0, 0.0, 0.0,
        1.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
        0.0, 0.0, 1.0, 0.0,
    )
}

/// Linear Darboux chart at a fixed beta: `forward` maps jet coordinates to
/// canonical coordinates; `hamiltonian_form` is the symmetric matrix of
/// H(beta) in the canonical chart.
#[derive(Debug, Clone, PartialEq)]
pub struct DarbouxMap {
    pub forward: Matrix4<f64>,
    pub inverse: Matrix4<f64>,
    pub hamiltonian_form: Matrix4<f64>,
    pub sector: Sector,
    pub beta: BetaAngle,
    /// Overall scale sqrt(sqrt(2) lambda / (w1^2 - w2^2)) of the chart in
    /// the two-real-roots regimes; absent otherwise.
    pub delta: Option<f64>,
}

impl DarbouxMap {
    pub fn to_canonical(&self, jet: &JetState) -> CanonicalState {
        CanonicalState::from_vector(&(self.forward * jet.as_vector()))
    }

    pub fn from_canonical(&self, z: &CanonicalState) -> JetState {
        JetState::from_vector(&(self.inverse * z.as_vector()))
    }

    pub fn canonical_hamiltonian(&self, z: &CanonicalState) -> f64 {
        let v = z.as_vector();
        (v.transpose() * self.hamiltonian_form * v)[(0, 0)]
    }
}

fn row_major(rows: [[f64; 4]; 4]) -> Matrix4<f64> {
    Matrix4::from_fn(|r, c| rows[r][c])
}

/// Chart for regimes (i)/(iii) on the sectors with cos(beta) > 0; the other
/// two quadrants are reached through the pair swap.
fn osc_base(m: f64, lambda: f64, w1s: f64, w2s: f64, c: f64, s: f64) -> (Matrix4<f64>, f64) {
    let delta = (std::f64::consts::SQRT_2 * lambda / (w1s - w2s)).sqrt();
    let rc = delta * c.sqrt();
    let (rs, p2_sign) = if s > 0.0 {
        (delta * s.sqrt(), 1.0)
    } else {
        (delta * (-s).sqrt(), -1.0)
    };
    let fwd = row_major([
        [rc * w1s, 0.0, rc, 0.0],
        [0.0, m * rc * w1s, 0.0, m * rc],
        [rs * w2s, 0.0, rs, 0.0],
        [0.0, p2_sign * m * rs * w2s, 0.0, p2_sign * m * rs],
    ]);
    (fwd, delta)
}

/// Chart for regime (iv) on (0, pi); (-pi, 0) is reached through the swap.
fn degenerate_base(m: f64, wsq: f64, c: f64, s: f64) -> Matrix4<f64> {
    let rs = s.sqrt();
    row_major([
        [2.0 * rs, 0.0, rs / wsq, 0.0],
        [0.0, 2.0 * m * (c + s) / rs, 0.0, m * c / (rs * wsq)],
        [2.0 * (c + s) / rs, 0.0, c / (rs * wsq), 0.0],
        [0.0, 2.0 * m * rs, 0.0, m * rs / wsq],
    ])
}

/// Chart for regime (v), valid for every beta.
fn complex_base(m: f64, lambda: f64, w0_sq: Complex64, beta: f64) -> Matrix4<f64> {
    let eps_sq = std::f64::consts::SQRT_2 * w0_sq.im * Complex64::new(0.0, -beta).exp() / lambda;
    let inv_eps = 1.0 / eps_sq.sqrt();
    let a = w0_sq * inv_eps;
    let r2 = std::f64::consts::SQRT_2;
    row_major([
        [r2 * a.re, 0.0, r2 * inv_eps.re, 0.0],
        [0.0, r2 * m * a.re, 0.0, r2 * m * inv_eps.re],
        [r2 * a.im, 0.0, r2 * inv_eps.im, 0.0],
        [0.0, -r2 * m * a.im, 0.0, -r2 * m * inv_eps.im],
    ])
}

/// Build the Darboux chart for the regime of `params` at beta.
pub fn darboux_map(params: &Parameters, beta: BetaAngle) -> Result<DarbouxMap> {
    let regime = classify_regime(params);
    let sector = sector_of(beta, regime)?;
    let b = beta.value();
    let (cb, sb) = (b.cos(), b.sin());
    let m = params.m;

    let (forward, delta) = match mode_frequencies(params) {
        ModeData::Harmonic { .. } => return Err(PuError::HarmonicUnsupported),
        md @ (ModeData::OscillatoryDistinct { .. } | ModeData::Hyperbolic { .. }) => {
            let (w1s, w2s) = md.signed_pair().unwrap();
            if cb > 0.0 {
                let (fwd, d) = osc_base(m, params.lambda, w1s, w2s, cb, sb);
                (fwd, Some(d))
            } else {
                // beta0 = beta -+ pi lies in the opposite quadrant with
                // cos > 0; H and Pi both flip sign there, so swapping the
                // canonical pairs restores both structures.
                let (fwd, d) = osc_base(m, params.lambda, w1s, w2s, -cb, -sb);
                (pair_swap() * fwd, Some(d))
            }
        }
        ModeData::Degenerate { w_sq_repeated } => {
            let wsq = w_sq_repeated / 2.0;
            if sb > 0.0 {
                (degenerate_base(m, wsq, cb, sb), None)
            } else {
                (pair_swap() * degenerate_base(m, wsq, -cb, -sb), None)
            }
        }
        md @ ModeData::ComplexPair { .. } => {
            (complex_base(m, params.lambda, md.w0_sq().unwrap(), b), None)
        }
    };

    let inverse = forward.try_inverse().ok_or_else(|| {
        PuError::InvalidParameters("Darboux chart is singular at these parameters".into())
    })?;
    let s_jet = hamiltonian_form_jet(params, beta)?;
    let hamiltonian_form = inverse.transpose() * s_jet * inverse;
    Ok(DarbouxMap { forward, inverse, hamiltonian_form, sector, beta, delta })
}

/// Maximum absolute entry of M Pi M^T - J: zero exactly when the chart is
/// canonical for the bracket at its beta.
pub fn verify_canonicity(params: &Parameters, map: &DarbouxMap) -> Result<f64> {
    let bm = bracket_matrix(params, map.beta)?;
    let resid = map.forward * bm.pi * map.forward.transpose() - standard_symplectic();
    Ok(resid.iter().fold(0.0f64, |a, x| a.max(x.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::invariants::hamiltonian_value;
    use approx::assert_abs_diff_eq;

    fn beta(b: f64) -> BetaAngle {
        BetaAngle::new(b).unwrap()
    }

    fn admissible_betas(p: &Parameters) -> Vec<f64> {
        let mut out = Vec::new();
        for k in 0..24 {
            let b = -std::f64::consts::PI + (k as f64 + 0.37) * std::f64::consts::TAU / 24.0;
            if sector_of(beta(b), classify_regime(p)).is_ok() {
                out.push(b);
            }
        }
        out
    }

    #[test]
    fn fix_a_chart_example() {
        let map = darboux_map(&fixtures::fix_a(), beta(std::f64::consts::FRAC_PI_4)).unwrap();
        let z = map.to_canonical(&JetState::new(1.0, 0.0, 0.0, 0.0));
        let r15 = 15f64.sqrt();
        assert_abs_diff_eq!(z.q1, 4.0 / r15, epsilon = 1e-13);
        assert_abs_diff_eq!(z.p1, 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(z.q2, 1.0 / r15, epsilon = 1e-13);
        assert_abs_diff_eq!(z.p2, 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(map.canonical_hamiltonian(&z), 2.0 / 3.0, epsilon = 1e-13);
    }

    #[test]
    fn fix_a_block_structure_first_quadrant() {
        // In (0, pi/2) the canonical Hamiltonian is two oscillator blocks
        // with the mode frequencies exchanged between them.
        let map = darboux_map(&fixtures::fix_a(), beta(0.9)).unwrap();
        let s = map.hamiltonian_form;
        let m = fixtures::fix_a().m;
        let expect = Matrix4::from_diagonal(&nalgebra::Vector4::new(
            m * 1.0 / 2.0,
            1.0 / (2.0 * m),
            m * 4.0 / 2.0,
            1.0 / (2.0 * m),
        ));
        for r in 0..4 {
            for c in 0..4 {
                assert_abs_diff_eq!(s[(r, c)], expect[(r, c)], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn fix_a_indefinite_block_structure_fourth_quadrant() {
        // In (-pi/2, 0) the second block enters with a minus sign.
        let map = darboux_map(&fixtures::fix_a(), beta(-0.9)).unwrap();
        let s = map.hamiltonian_form;
        assert!(s[(0, 0)] > 0.0 && s[(1, 1)] > 0.0);
        assert!(s[(2, 2)] < 0.0 && s[(3, 3)] < 0.0);
        assert_abs_diff_eq!(s[(0, 2)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn fix_b_chart_example() {
        let map = darboux_map(&fixtures::fix_b(), beta(std::f64::consts::FRAC_PI_2)).unwrap();
        let z = map.to_canonical(&JetState::new(1.0, 0.0, 0.0, 0.0));
        assert_abs_diff_eq!(z.q1, 2.0, epsilon = 1e-13);
        assert_abs_diff_eq!(z.p1, 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(z.q2, 2.0, epsilon = 1e-13);
        assert_abs_diff_eq!(z.p2, 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(map.canonical_hamiltonian(&z), 4.0, epsilon = 1e-13);
    }

    #[test]
    fn fix_b_hamiltonian_structure() {
        // H = p1 p2 / m + m omega^2 (2 q1 q2 - q1^2) for every admissible beta.
        let p = fixtures::fix_b();
        for &b in &[0.4, 2.0, std::f64::consts::FRAC_PI_2] {
            let s = darboux_map(&p, beta(b)).unwrap().hamiltonian_form;
            assert_abs_diff_eq!(s[(0, 0)], -p.m * p.omega_sq, epsilon = 1e-11);
            assert_abs_diff_eq!(s[(0, 2)], p.m * p.omega_sq, epsilon = 1e-11);
            assert_abs_diff_eq!(s[(1, 3)], 1.0 / (2.0 * p.m), epsilon = 1e-12);
            assert_abs_diff_eq!(s[(1, 1)], 0.0, epsilon = 1e-11);
            assert_abs_diff_eq!(s[(2, 2)], 0.0, epsilon = 1e-11);
            assert_abs_diff_eq!(s[(3, 3)], 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn fix_c_chart_is_real_and_structured() {
        let p = fixtures::fix_c();
        let map = darboux_map(&p, beta(0.0)).unwrap();
        assert!(map.forward.iter().all(|x| x.is_finite()));
        // H = (P1^2 + Q1^2 - P2^2 - Q2^2)/2 + Q1 Q2 at these parameters.
        let s = map.hamiltonian_form;
        assert_abs_diff_eq!(s[(0, 0)], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s[(1, 1)], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s[(2, 2)], -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s[(3, 3)], -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s[(0, 2)], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s[(0, 1)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn canonicity_all_regimes_all_sectors() {
        for p in fixtures::all_nonharmonic() {
            for b in admissible_betas(&p) {
                let map = darboux_map(&p, beta(b)).unwrap();
                let r = verify_canonicity(&p, &map).unwrap();
                assert!(r < 1e-11, "{p:?} beta={b}: residual {r}");
            }
        }
    }

    #[test]
    fn round_trip_and_energy_match() {
        let jet = JetState::new(0.7, -0.4, 0.1, 1.3);
        for p in fixtures::all_nonharmonic() {
            for b in admissible_betas(&p) {
                let map = darboux_map(&p, beta(b)).unwrap();
                let z = map.to_canonical(&jet);
                let back = map.from_canonical(&z);
                for (a, x) in jet.as_array().iter().zip(back.as_array()) {
                    assert_abs_diff_eq!(*a, x, epsilon = 1e-10);
                }
                let h_jet = hamiltonian_value(&p, beta(b), &jet).unwrap();
                assert_abs_diff_eq!(map.canonical_hamiltonian(&z), h_jet, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn swap_sector_relation() {
        // The chart at beta in (pi/2, pi) is the pair swap of the chart at
        // beta - pi.
        let p = fixtures::fix_a();
        let b0 = -0.9;
        let m_low = darboux_map(&p, beta(b0)).unwrap();
        let m_high = darboux_map(&p, beta(b0 + std::f64::consts::PI)).unwrap();
        let swapped = pair_swap() * m_low.forward;
        for r in 0..4 {
            for c in 0..4 {
                assert_abs_diff_eq!(m_high.forward[(r, c)], swapped[(r, c)], epsilon = 1e-13);
            }
        }
        assert_eq!(m_high.sector, Sector::Q2);
        assert_eq!(m_low.sector, Sector::Q4);
    }

    #[test]
    fn singular_beta_rejected() {
        assert!(matches!(
            darboux_map(&fixtures::fix_a(), beta(0.0)),
            Err(PuError::SingularBeta { .. })
        ));
        assert!(darboux_map(&fixtures::fix_b(), beta(0.0)).is_err());
        assert!(darboux_map(&fixtures::fix_c(), beta(0.0)).is_ok());
    }
}
