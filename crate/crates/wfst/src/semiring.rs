//! Weight semirings.
//!
//! Every algorithm in this crate is parameterized by a semiring
//! `(K, ⊕, ⊗, 0̄, 1̄)`: `⊕` combines alternative paths, `⊗` sequences path
//! segments. Three instances ship:
//!
//! - **Tropical**: `(min, +)` over negative-log costs; `0̄ = +inf`, `1̄ = 0.0`.
//!   Idempotent, the semiring of Viterbi search.
//! - **Log**: `(-ln(e^-a + e^-b), +)` over negative-log costs; sums full
//!   probability mass instead of taking the best path.
//! - **Probability**: `(+, ×)` over probabilities; `0̄ = 0.0`, `1̄ = 1.0`.
//!
//! The semiring is chosen per automaton at construction time and recorded in
//! the text-format header; mixing semirings across operands is an error.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Relative tolerance for approximate weight comparison.
pub const REL_TOL: f64 = 1e-9;
/// Absolute tolerance floor for approximate weight comparison.
pub const ABS_TOL: f64 = 1e-12;

/// A weight value. Its interpretation (cost or probability) depends on the
/// semiring it is used with.
#[derive(Clone, Copy, Debug)]
pub struct Weight(f64);

impl Weight {
    pub const fn new(value: f64) -> Self {
        // Canonicalize -0.0 so that total-order equality and hashing treat
        // it as 0.0 (e.g. `-ln 1` must equal the tropical one).
        if value == 0.0 {
            Weight(0.0)
        } else {
            Weight(value)
        }
    }

    pub const fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

impl PartialEq for Weight {
    fn eq(&self, other: &Self) -> bool {
        self.0.total_cmp(&other.0) == Ordering::Equal
    }
}

impl Eq for Weight {}

impl PartialOrd for Weight {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Weight {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl std::hash::Hash for Weight {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state);
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_weight(*self))
    }
}

/// The three shipped semirings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Semiring {
    Tropical,
    Log,
    Probability,
}

impl fmt::Display for Semiring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Semiring {
    pub fn name(self) -> &'static str {
        match self {
            Semiring::Tropical => "tropical",
            Semiring::Log => "log",
            Semiring::Probability => "prob",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "tropical" => Some(Semiring::Tropical),
            "log" => Some(Semiring::Log),
            "prob" | "probability" => Some(Semiring::Probability),
            _ => None,
        }
    }

    /// The ⊕-identity and ⊗-annihilator.
    pub fn zero(self) -> Weight {
        match self {
            Semiring::Tropical | Semiring::Log => Weight(f64::INFINITY),
            Semiring::Probability => Weight(0.0),
        }
    }

    /// The ⊗-identity.
    pub fn one(self) -> Weight {
        match self {
            Semiring::Tropical | Semiring::Log => Weight(0.0),
            Semiring::Probability => Weight(1.0),
        }
    }

    pub fn is_zero(self, w: Weight) -> bool {
        w == self.zero()
    }

    pub fn is_one(self, w: Weight) -> bool {
        w == self.one()
    }

    /// Semiring addition `a ⊕ b`: combines alternative paths.
    pub fn plus(self, a: Weight, b: Weight) -> Weight {
        match self {
            Semiring::Tropical => Weight::new(a.0.min(b.0)),
            Semiring::Log => Weight::new(log_plus(a.0, b.0)),
            Semiring::Probability => Weight::new(a.0 + b.0),
        }
    }

    /// Semiring multiplication `a ⊗ b`: sequences path segments.
    pub fn times(self, a: Weight, b: Weight) -> Weight {
        match self {
            Semiring::Tropical | Semiring::Log => {
                // inf + x = inf; zero annihilates without producing NaN.
                if a.0.is_infinite() || b.0.is_infinite() {
                    Weight(f64::INFINITY)
                } else {
                    Weight::new(a.0 + b.0)
                }
            }
            Semiring::Probability => Weight::new(a.0 * b.0),
        }
    }

    /// Left division: the `x` with `b ⊗ x = a`. Errors when `b` is zero.
    pub fn divide(self, a: Weight, b: Weight) -> Result<Weight> {
        if self.is_zero(b) {
            return Err(Error::DivisionByZero);
        }
        match self {
            Semiring::Tropical | Semiring::Log => {
                if a.0.is_infinite() {
                    Ok(Weight(f64::INFINITY))
                } else {
                    Ok(Weight::new(a.0 - b.0))
                }
            }
            Semiring::Probability => Ok(Weight::new(a.0 / b.0)),
        }
    }

    /// Tolerance-based equality (relative 1e-9, absolute floor 1e-12).
    /// Floating-point ⊕ in the log semiring is not exactly associative, so
    /// all cross-route comparisons go through this.
    pub fn approx_eq(self, a: Weight, b: Weight) -> bool {
        if self.is_zero(a) || self.is_zero(b) {
            return self.is_zero(a) && self.is_zero(b);
        }
        let (x, y) = (a.0, b.0);
        let diff = (x - y).abs();
        diff <= ABS_TOL || diff <= REL_TOL * x.abs().max(y.abs())
    }
}

/// `-ln(e^-a + e^-b)`, stable for any mix of magnitudes.
fn log_plus(a: f64, b: f64) -> f64 {
    if a.is_infinite() {
        return b;
    }
    if b.is_infinite() {
        return a;
    }
    let m = a.min(b);
    let d = (a - b).abs();
    m - (-d).exp().ln_1p()
}

/// Renders a weight for the text format: `inf` for the infinite zero of the
/// tropical/log semirings, otherwise the shortest decimal that parses back to
/// the same value.
pub fn format_weight(w: Weight) -> String {
    if w.0.is_infinite() {
        "inf".to_string()
    } else {
        format!("{}", w.0)
    }
}

/// Parses a weight token. `inf` denotes the infinite zero; NaN and negative
/// infinity are rejected so arithmetic never sees them.
pub fn parse_weight(s: &str) -> std::result::Result<Weight, String> {
    if s == "inf" {
        return Ok(Weight(f64::INFINITY));
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Weight::new(v)),
        Ok(_) => Err(format!("weight `{s}` is not a finite number or `inf`")),
        Err(_) => Err(format!("malformed weight `{s}`")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALL: [Semiring; 3] = [Semiring::Tropical, Semiring::Log, Semiring::Probability];

    #[test]
    fn tropical_plus_is_min() {
        let s = Semiring::Tropical;
        assert_eq!(s.plus(Weight::new(3.0), Weight::new(5.0)), Weight::new(3.0));
    }

    #[test]
    fn tropical_times_is_addition() {
        let s = Semiring::Tropical;
        assert_eq!(s.times(Weight::new(3.0), Weight::new(5.0)), Weight::new(8.0));
    }

    #[test]
    fn zero_is_plus_identity_everywhere() {
        for s in ALL {
            let w = Weight::new(0.375);
            assert!(s.approx_eq(s.plus(w, s.zero()), w));
            assert!(s.approx_eq(s.plus(s.zero(), w), w));
        }
    }

    #[test]
    fn one_is_times_identity_everywhere() {
        for s in ALL {
            let w = Weight::new(0.375);
            assert!(s.approx_eq(s.times(w, s.one()), w));
            assert!(s.approx_eq(s.times(s.one(), w), w));
        }
    }

    #[test]
    fn zero_annihilates() {
        for s in ALL {
            let w = Weight::new(2.5);
            assert!(s.is_zero(s.times(w, s.zero())));
            assert!(s.is_zero(s.times(s.zero(), w)));
        }
    }

    #[test]
    fn log_plus_of_equal_zero_costs() {
        // -ln(e^0 + e^0) = -ln 2
        let s = Semiring::Log;
        let r = s.plus(Weight::new(0.0), Weight::new(0.0));
        assert!((r.value() - (-(2.0f64.ln()))).abs() < 1e-12);
    }

    #[test]
    fn probability_times_and_divide() {
        let s = Semiring::Probability;
        assert!(s.approx_eq(s.times(Weight::new(0.5), Weight::new(0.4)), Weight::new(0.2)));
        let d = s.divide(Weight::new(0.2), Weight::new(0.5)).unwrap();
        assert!(s.approx_eq(d, Weight::new(0.4)));
    }

    #[test]
    fn tropical_divide_is_subtraction() {
        let s = Semiring::Tropical;
        assert_eq!(s.divide(Weight::new(5.0), Weight::new(2.0)).unwrap(), Weight::new(3.0));
        assert_eq!(s.divide(Weight::new(7.0), s.one()).unwrap(), Weight::new(7.0));
    }

    #[test]
    fn divide_by_zero_is_an_error() {
        for s in ALL {
            assert!(matches!(
                s.divide(s.one(), s.zero()),
                Err(Error::DivisionByZero)
            ));
        }
    }

    #[test]
    fn times_divide_round_trip() {
        for s in ALL {
            let a = Weight::new(0.75);
            let b = Weight::new(0.5);
            let q = s.divide(a, b).unwrap();
            assert!(s.approx_eq(s.times(b, q), a));
        }
    }

    #[test]
    fn tropical_plus_is_idempotent_exactly() {
        let s = Semiring::Tropical;
        for v in [0.0, 1.5, -3.25, f64::INFINITY] {
            let w = Weight::new(v);
            assert_eq!(s.plus(w, w), w);
        }
    }

    #[test]
    fn weight_rendering() {
        assert_eq!(format_weight(Semiring::Tropical.zero()), "inf");
        assert_eq!(format_weight(Weight::new(1.5)), "1.5");
        assert_eq!(parse_weight("inf").unwrap(), Weight::new(f64::INFINITY));
        assert!(parse_weight("nan").is_err());
        assert!(parse_weight("-inf").is_err());
    }
}
