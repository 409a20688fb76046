//! Equilibrium-preserving value shifts.
//!
//! A shift map `T` sends each value on one side of the market to a new value.
//! For a reference price `p*` and margins `ε⁻, ε⁺ > 0` the open ball
//! `(p* - ε⁻, p* + ε⁺)` is held fixed. A downward shift (demand contraction
//! or supply expansion) must satisfy, for every value `v`:
//!
//! * (a) `v <= p* - ε⁻`  ⇒  `T(v) <= v`
//! * (b) `v` inside the ball  ⇒  `T(v) = v`
//! * (c) `v >= p* + ε⁺`  ⇒  `p* + ε⁺ <= T(v) <= v`
//!
//! The upward mirror reverses the inequalities: (a) `v <= T(v) <= p* - ε⁻`,
//! (c) `T(v) >= v`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{GridError, ShiftError};
use crate::money::Money;
use crate::rng::SimRng;
use crate::values::{ce_set, ValueProfile};
use crate::Side;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Down,
    Up,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Down => "down",
            Direction::Up => "up",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftSpec {
    pub side: Side,
    pub direction: Direction,
    pub p_star: Money,
    pub eps_minus: Money,
    pub eps_plus: Money,
    pub map: BTreeMap<Money, Money>,
}

impl ShiftSpec {
    pub fn identity(side: Side, p_star: Money, eps: Money, values: &[Money]) -> Self {
        ShiftSpec {
            side,
            direction: Direction::Down,
            p_star,
            eps_minus: eps,
            eps_plus: eps,
            map: values.iter().map(|v| (*v, *v)).collect(),
        }
    }

    fn lower_edge(&self) -> i64 {
        self.p_star.0 as i64 - self.eps_minus.0 as i64
    }

    fn upper_edge(&self) -> i64 {
        (self.p_star.0 + self.eps_plus.0) as i64
    }

    fn image(&self, v: Money) -> Result<Money, ShiftError> {
        self.map.get(&v).copied().ok_or(ShiftError::MissingValue(v))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Clause {
    /// Values at or below `p* - ε⁻`.
    Low,
    /// Values inside the open ball.
    Ball,
    /// Values at or above `p* + ε⁺`.
    High,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Clause::Low => "(a)",
            Clause::Ball => "(b)",
            Clause::High => "(c)",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub value: Money,
    pub image: Money,
    pub clause: Clause,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ShiftReport {
    pub violations: Vec<Violation>,
}

impl ShiftReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ShiftReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(f, "valid");
        }
        write!(f, "invalid:")?;
        for v in &self.violations {
            write!(f, " {}->{} violates {};", v.value, v.image, v.clause)?;
        }
        Ok(())
    }
}

/// Checks every distinct value against the clauses and lists all violations.
pub fn validate_shift(spec: &ShiftSpec, values: &[Money]) -> Result<ShiftReport, ShiftError> {
    if spec.eps_minus.0 == 0 || spec.eps_plus.0 == 0 {
        return Err(ShiftError::NonPositiveEpsilon);
    }
    let (a, b) = (spec.lower_edge(), spec.upper_edge());
    let mut distinct: Vec<Money> = values.to_vec();
    distinct.sort_unstable();
    distinct.dedup();

    let mut report = ShiftReport::default();
    for v in distinct {
        let t = spec.image(v)?;
        let (vi, ti) = (v.0 as i64, t.0 as i64);
        let (clause, ok) = if vi <= a {
            let ok = match spec.direction {
                Direction::Down => ti <= vi,
                Direction::Up => vi <= ti && ti <= a,
            };
            (Clause::Low, ok)
        } else if vi < b {
            (Clause::Ball, ti == vi)
        } else {
            let ok = match spec.direction {
                Direction::Down => b <= ti && ti <= vi,
                Direction::Up => ti >= vi,
            };
            (Clause::High, ok)
        };
        if !ok {
            report.violations.push(Violation {
                value: v,
                image: t,
                clause,
            });
        }
    }
    Ok(report)
}

fn map_side(spec: &ShiftSpec, values: &[Money]) -> Result<Vec<Money>, ShiftError> {
    let report = validate_shift(spec, values)?;
    if !report.is_valid() {
        return Err(ShiftError::Invalid(report.violations.len()));
    }
    values.iter().map(|v| spec.image(*v)).collect()
}

/// Applies a buyer map and a seller map; both must validate.
pub fn apply_shift(
    profile: &ValueProfile,
    buyer_spec: &ShiftSpec,
    seller_spec: &ShiftSpec,
) -> Result<ValueProfile, ShiftError> {
    if buyer_spec.side != Side::Buyer {
        return Err(ShiftError::WrongSide { expected: "buyer" });
    }
    if seller_spec.side != Side::Seller {
        return Err(ShiftError::WrongSide { expected: "seller" });
    }
    let buyers = map_side(buyer_spec, profile.buyers())?;
    let sellers = map_side(seller_spec, profile.sellers())?;
    Ok(profile.with_values(buyers, sellers))
}

/// True when both profiles have the same weak interval and strict set.
pub fn check_preservation(before: &ValueProfile, after: &ValueProfile) -> Result<bool, GridError> {
    before.check_grid(after)?;
    let (x, y) = (ce_set(before), ce_set(after));
    Ok(x.weak == y.weak && x.strict == y.strict)
}

/// Draws a random valid buyer map and seller map.
///
/// On a finite grid the clauses alone do not pin the equilibrium set: a
/// boundary trader at a weak-equilibrium price can sit outside the open
/// ball and be moved. The generator therefore also holds fixed every value in
/// the guard band `[lo - 1, hi + 1]` around the weak interval `[lo, hi]`,
/// and keeps moved values outside that band. Counts at every guard-band
/// price are then unchanged, so the weak interval and the strict set are
/// preserved. The maps still satisfy the clauses for the given margins.
pub fn random_shift(
    profile: &ValueProfile,
    p_star: Money,
    eps_minus: Money,
    eps_plus: Money,
    direction: Direction,
    rng: &mut SimRng,
) -> Result<(ShiftSpec, ShiftSpec), ShiftError> {
    if eps_minus.0 == 0 || eps_plus.0 == 0 {
        return Err(ShiftError::NonPositiveEpsilon);
    }
    let ce = ce_set(profile);
    let a = p_star.0 as i64 - eps_minus.0 as i64;
    let b = (p_star.0 + eps_plus.0) as i64;
    let (lo, hi) = (ce.weak.lo.0 as i64, ce.weak.hi.0 as i64);
    if (a + 1).max(lo) > (b - 1).min(hi) {
        return Err(ShiftError::Infeasible(format!(
            "ball ({a}, {b}) misses the weak equilibrium interval [{lo}, {hi}]"
        )));
    }
    let guard = (lo - 1, hi + 1);
    let cap = profile.max_value().0.max(1) as i64;

    let mut draw_map = |side: Side, values: &[Money]| {
        let mut map = BTreeMap::new();
        for v in values {
            if map.contains_key(v) {
                continue;
            }
            let vi = v.0 as i64;
            let held = (a < vi && vi < b) || (guard.0 <= vi && vi <= guard.1);
            let (from, to) = if held {
                (vi, vi)
            } else if vi <= a {
                match direction {
                    Direction::Down => (0, vi),
                    Direction::Up => (vi, a.min(guard.0 - 1)),
                }
            } else {
                match direction {
                    Direction::Down => (b.max(guard.1 + 1), vi),
                    Direction::Up => (vi, vi + cap),
                }
            };
            let t = rng.inclusive(from as u64, to as u64);
            map.insert(*v, Money(t));
        }
        ShiftSpec {
            side,
            direction,
            p_star,
            eps_minus,
            eps_plus,
            map,
        }
    };
    let buyer = draw_map(Side::Buyer, profile.buyers());
    let seller = draw_map(Side::Seller, profile.sellers());
    Ok((buyer, seller))
}
