//! Fixed number formatting shared by every text output.

use crate::point::ComplexPoint;

/// Nine significant digits in scientific notation; `inf`/`-inf`/`nan` spelled out.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.8e}")
    }
}

/// Space-separated real coordinates `re₁ im₁ re₂ im₂ …`.
pub fn point(p: &ComplexPoint) -> String {
    p.to_reals().iter().map(|&x| num(x)).collect::<Vec<_>>().join(" ")
}
