//! Alternative Hamiltonian structures of the fourth-order oscillator
//! `lambda q'''' + q'' + omega^2 q = 0`.
//!
//! The crate classifies parameter regimes, evaluates the quadratic
//! integrals of motion, builds the one-parameter family of Poisson bracket
//! matrices H(beta) generates the dynamics with, constructs Darboux
//! (canonical) coordinates per sector, integrates trajectories with exact
//! and numerical methods, and audits the structural identities connecting
//! these objects.

pub mod audit;
pub mod darboux;
pub mod dynamics;
pub mod error;
pub mod invariants;
pub mod poisson;
pub mod regime;
pub mod scenario;

pub use error::{PuError, Result};

/// Named parameter sets used throughout the test suite, one per nontrivial
/// regime, chosen so the mode frequencies are simple closed forms.
pub mod fixtures {
    use crate::regime::Parameters;

    /// Regime (i): frequencies squared 4 and 1.
    pub fn fix_a() -> Parameters {
        Parameters::new(1.0, 4.0 / 5.0, 1.0 / 5.0).unwrap()
    }

    /// Regime (iv): repeated frequency squared 2.
    pub fn fix_b() -> Parameters {
        Parameters::new(1.0, 1.0, 1.0 / 4.0).unwrap()
    }

    /// Regime (v): complex frequency squared 1 + i.
    pub fn fix_c() -> Parameters {
        Parameters::new(1.0, 1.0, 1.0 / 2.0).unwrap()
    }

    /// Regime (iii): frequencies squared -(1 + sqrt 3) and sqrt 3 - 1.
    pub fn fix_d() -> Parameters {
        Parameters::new(1.0, 1.0, -1.0 / 2.0).unwrap()
    }

    /// Harmonic limit, regime (ii).
    pub fn harmonic() -> Parameters {
        Parameters::new(1.0, 1.0, 0.0).unwrap()
    }

    /// All five fixtures including the harmonic limit.
    pub fn all() -> [Parameters; 5] {
        [fix_a(), fix_b(), fix_c(), fix_d(), harmonic()]
    }

    /// The four fixtures with a genuine fourth-order term.
    pub fn all_nonharmonic() -> [Parameters; 4] {
        [fix_a(), fix_b(), fix_c(), fix_d()]
    }
}
