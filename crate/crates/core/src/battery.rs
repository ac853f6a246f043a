//! A small fixed set of symbols used by the oracle comparisons and the suites.
//! Each has constant `ψ1`, a monotone `ψ2` and crossing radius 0 or 1.

use crate::error::Result;
use crate::padic_core::PrimeDim;
use crate::symbol_algebra::BesselSymbol;

/// `(ψ1, ψ2, α)` in spec-string form.
pub const BATTERY_SPECS: [(&str, &str, f64); 4] = [
    ("const:1", "power:a=1,b=2", 1.0),
    ("const:2", "power:a=1,b=1", 0.5),
    ("const:3", "tower:j=1;terms=1*y^1", 1.0),
    ("const:1", "power:a=0.5,b=3", 2.0),
];

pub fn standard_battery(dims: PrimeDim) -> Result<Vec<BesselSymbol>> {
    BATTERY_SPECS.iter().map(|&(a, b, alpha)| BesselSymbol::parse(a, b, alpha, dims)).collect()
}
