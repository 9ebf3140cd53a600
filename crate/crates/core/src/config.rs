//! Global tolerance ladder. Every operation that compares against one of
//! these also has a variant taking an explicit tolerance.

use serde::{Deserialize, Serialize};

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const RECONSTRUCTION_TOL: f64 = 1e-10;
pub const EFFECT_TOL: f64 = 1e-9;
pub const ORDER_TOL: f64 = 1e-9;
pub const STRATUM_TOL: f64 = 1e-7;
pub const CERT_TOL: f64 = 1e-6;
/// `||AB - BA||_F` at or below this counts as commuting.
pub const COMMUTE_TOL: f64 = 1e-9;
/// Margin away from 0 and 1 for randomly drawn interior eigenvalues.
pub const GENERATION_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub hermiticity: f64,
    pub reconstruction: f64,
    pub effect: f64,
    pub order: f64,
    pub stratum: f64,
    pub certificate: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermiticity: HERMITICITY_TOL,
            reconstruction: RECONSTRUCTION_TOL,
            effect: EFFECT_TOL,
            order: ORDER_TOL,
            stratum: STRATUM_TOL,
            certificate: CERT_TOL,
        }
    }
}
