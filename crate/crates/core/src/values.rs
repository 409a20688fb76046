//! Value profiles, demand and supply, and competitive-equilibrium solvers.
//!
//! Discrete profiles use exact integer counting on the tick grid. A price `p`
//! is a *weak* equilibrium when some quantity `q` can clear the market with
//! indifferent traders free to trade or abstain:
//!
//! ```text
//! #{v > p} <= q <= #{v >= p}   and   #{c < p} <= q <= #{c <= p}
//! ```
//!
//! It is *strict* when demand equals supply and no trader's value equals `p`.
//! Continuous economies (CDF pairs) are solved by bisection on excess demand.

use std::fmt;
use std::sync::Arc;

use crate::error::{EconomyError, GridError, ProfileError};
use crate::money::{Money, TickSize};
use crate::rng::SimRng;

/// Unit-demand buyer valuations and unit-supply seller costs on one grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueProfile {
    buyers: Vec<Money>,
    sellers: Vec<Money>,
    tick: TickSize,
}

impl ValueProfile {
    pub fn new(
        buyers: Vec<Money>,
        sellers: Vec<Money>,
        tick: TickSize,
    ) -> Result<Self, ProfileError> {
        if buyers.is_empty() || sellers.is_empty() {
            return Err(ProfileError::EmptySide);
        }
        Ok(ValueProfile {
            buyers,
            sellers,
            tick,
        })
    }

    /// Convenience constructor from raw tick counts.
    pub fn from_ticks(buyers: &[u64], sellers: &[u64], tick: TickSize) -> Result<Self, ProfileError> {
        Self::new(
            buyers.iter().copied().map(Money).collect(),
            sellers.iter().copied().map(Money).collect(),
            tick,
        )
    }

    pub fn buyers(&self) -> &[Money] {
        &self.buyers
    }

    pub fn sellers(&self) -> &[Money] {
        &self.sellers
    }

    pub fn tick(&self) -> TickSize {
        self.tick
    }

    /// Largest value or cost in the profile.
    pub fn max_value(&self) -> Money {
        self.buyers
            .iter()
            .chain(self.sellers.iter())
            .copied()
            .max()
            .unwrap_or(Money::ZERO)
    }

    /// The same profile on another tick grid.
    pub fn regrid(&self, to: TickSize) -> Result<Self, GridError> {
        let conv = |v: &Money| self.tick.convert(*v, to);
        Ok(ValueProfile {
            buyers: self.buyers.iter().map(conv).collect::<Result<_, _>>()?,
            sellers: self.sellers.iter().map(conv).collect::<Result<_, _>>()?,
            tick: to,
        })
    }

    pub(crate) fn check_grid(&self, other: &ValueProfile) -> Result<(), GridError> {
        if self.tick != other.tick {
            return Err(GridError::Mismatch {
                left: self.tick.pence(),
                right: other.tick.pence(),
            });
        }
        Ok(())
    }

    pub(crate) fn with_values(&self, buyers: Vec<Money>, sellers: Vec<Money>) -> Self {
        ValueProfile {
            buyers,
            sellers,
            tick: self.tick,
        }
    }
}

/// Number of buyers with value at least `p`.
pub fn demand(profile: &ValueProfile, p: Money) -> usize {
    profile.buyers.iter().filter(|v| **v >= p).count()
}

/// Number of sellers with cost at most `p`.
pub fn supply(profile: &ValueProfile, p: Money) -> usize {
    profile.sellers.iter().filter(|c| **c <= p).count()
}

pub fn excess_demand(profile: &ValueProfile, p: Money) -> i64 {
    demand(profile, p) as i64 - supply(profile, p) as i64
}

/// Inclusive run of tick prices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PriceRange {
    pub lo: Money,
    pub hi: Money,
}

impl PriceRange {
    pub fn new(lo: Money, hi: Money) -> Self {
        debug_assert!(lo <= hi);
        PriceRange { lo, hi }
    }

    pub fn point(p: Money) -> Self {
        PriceRange { lo: p, hi: p }
    }

    pub fn contains(&self, p: Money) -> bool {
        self.lo <= p && p <= self.hi
    }

    /// Distance from `x` (in ticks) to the nearest point of the range.
    pub fn clamp_f64(&self, x: f64) -> f64 {
        x.clamp(self.lo.as_f64(), self.hi.as_f64())
    }

    pub fn prices(&self) -> impl Iterator<Item = Money> {
        (self.lo.0..=self.hi.0).map(Money)
    }
}

impl fmt::Display for PriceRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "{}-{}", self.lo, self.hi)
        }
    }
}

/// Competitive-equilibrium prices of a discrete profile.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CeResult {
    /// All weak equilibrium prices; always a nonempty contiguous run.
    pub weak: PriceRange,
    /// Strict equilibrium prices as sorted, disjoint runs (possibly empty).
    pub strict: Vec<PriceRange>,
    /// Largest quantity that clears at some equilibrium price.
    pub quantity: usize,
}

impl CeResult {
    pub fn is_strict(&self, p: Money) -> bool {
        self.strict.iter().any(|r| r.contains(p))
    }

    pub fn strict_prices(&self) -> Vec<Money> {
        self.strict.iter().flat_map(|r| r.prices()).collect()
    }
}

impl fmt::Display for CeResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "weak {}, strict ", self.weak)?;
        if self.strict.is_empty() {
            write!(f, "none")?;
        } else {
            let parts: Vec<String> = self.strict.iter().map(|r| r.to_string()).collect();
            write!(f, "{}", parts.join(","))?;
        }
        write!(f, ", q={}", self.quantity)
    }
}

/// Counts at one price, from sorted buyer and seller arrays.
#[derive(Clone, Copy, Debug)]
struct Counts {
    v_gt: usize,
    v_ge: usize,
    c_lt: usize,
    c_le: usize,
}

impl Counts {
    fn at(buyers: &[Money], sellers: &[Money], p: Money) -> Self {
        let nb = buyers.len();
        Counts {
            v_gt: nb - buyers.partition_point(|v| *v <= p),
            v_ge: nb - buyers.partition_point(|v| *v < p),
            c_lt: sellers.partition_point(|c| *c < p),
            c_le: sellers.partition_point(|c| *c <= p),
        }
    }

    fn max_clearing(&self) -> Option<usize> {
        let lo = self.v_gt.max(self.c_lt);
        let hi = self.v_ge.min(self.c_le);
        (lo <= hi).then_some(hi)
    }

    fn strict(&self) -> bool {
        self.v_gt == self.v_ge && self.c_lt == self.c_le && self.v_ge == self.c_le
    }
}

/// Weak and strict equilibrium sets of a profile.
///
/// Counts are constant between consecutive distinct values, so the grid
/// `0..=max_value` is walked segment by segment: each value is a point
/// segment and each open gap between values is one segment.
pub fn ce_set(profile: &ValueProfile) -> CeResult {
    let mut buyers = profile.buyers.clone();
    let mut sellers = profile.sellers.clone();
    buyers.sort_unstable();
    sellers.sort_unstable();

    let mut points: Vec<Money> = buyers.iter().chain(sellers.iter()).copied().collect();
    points.sort_unstable();
    points.dedup();

    let mut segments: Vec<PriceRange> = Vec::with_capacity(points.len() * 2 + 1);
    let mut next = Money::ZERO;
    for &p in &points {
        if next < p {
            segments.push(PriceRange::new(next, Money(p.0 - 1)));
        }
        segments.push(PriceRange::point(p));
        next = p.up();
    }

    let mut weak: Option<PriceRange> = None;
    let mut strict: Vec<PriceRange> = Vec::new();
    let mut quantity = 0usize;
    for seg in segments {
        let counts = Counts::at(&buyers, &sellers, seg.lo);
        let Some(q) = counts.max_clearing() else {
            continue;
        };
        quantity = quantity.max(q);
        weak = Some(match weak {
            None => seg,
            Some(w) => PriceRange::new(w.lo, seg.hi),
        });
        let is_value_point = seg.lo == seg.hi && points.binary_search(&seg.lo).is_ok();
        if counts.strict() && !is_value_point {
            match strict.last_mut() {
                Some(last) if last.hi.up() == seg.lo => last.hi = seg.hi,
                _ => strict.push(seg),
            }
        }
    }

    // Unit demand always admits an equilibrium; the fallback is unreachable
    // for valid profiles but keeps the result total.
    let weak = weak.unwrap_or_else(|| PriceRange::point(Money::ZERO));
    CeResult {
        weak,
        strict,
        quantity,
    }
}

/// A continuous cumulative distribution on a bounded support.
pub trait Cdf: Send + Sync + fmt::Debug {
    /// `F(x)`, clamped to 0 below and 1 above the support.
    fn cdf(&self, x: f64) -> f64;

    /// `(lower, upper)` of the support.
    fn support(&self) -> (f64, f64);

    /// Inverse CDF on `[0, 1]`. The default bisects `cdf`.
    fn quantile(&self, u: f64) -> f64 {
        let (mut lo, mut hi) = self.support();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// CDF interpolated linearly between knots `(x, F(x))`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinearCdf {
    knots: Vec<(f64, f64)>,
}

impl PiecewiseLinearCdf {
    /// Knots must have strictly increasing `x` and `F`, starting at `F = 0`
    /// and ending at `F = 1`.
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self, EconomyError> {
        let ok = knots.len() >= 2
            && knots.first().map(|k| k.1) == Some(0.0)
            && knots.last().map(|k| k.1) == Some(1.0)
            && knots[0].0 >= 0.0
            && knots.iter().all(|(x, f)| x.is_finite() && f.is_finite())
            && knots.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 > w[0].1);
        if !ok {
            return Err(EconomyError::BadKnots);
        }
        Ok(PiecewiseLinearCdf { knots })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self, EconomyError> {
        Self::new(vec![(lo, 0.0), (hi, 1.0)])
    }

    /// Random full-support CDF on `[lower, upper]` with `pieces` linear pieces:
    /// interior breakpoints and masses are drawn uniformly, each piece keeping
    /// at least a small share of mass so densities stay bounded away from 0.
    pub fn random(rng: &mut SimRng, lower: f64, upper: f64, pieces: usize) -> Self {
        let pieces = pieces.max(1);
        let mut xs: Vec<f64> = (0..pieces - 1).map(|_| rng.uniform(lower, upper)).collect();
        xs.sort_by(f64::total_cmp);
        let mut cuts = vec![lower];
        cuts.extend(xs);
        cuts.push(upper);
        // Nudge coincident breakpoints apart.
        let min_gap = (upper - lower) * 1e-6;
        for i in 1..cuts.len() {
            if cuts[i] <= cuts[i - 1] + min_gap {
                cuts[i] = cuts[i - 1] + min_gap;
            }
        }
        let last = cuts.len() - 1;
        cuts[last] = cuts[last].max(upper);
        let weights: Vec<f64> = (0..pieces).map(|_| 0.1 + rng.unit()).collect();
        let total: f64 = weights.iter().sum();
        let mut knots = Vec::with_capacity(pieces + 1);
        let mut acc = 0.0;
        knots.push((cuts[0], 0.0));
        for (i, w) in weights.iter().enumerate() {
            acc += w / total;
            let f = if i + 1 == pieces { 1.0 } else { acc };
            knots.push((cuts[i + 1], f));
        }
        PiecewiseLinearCdf { knots }
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }
}

impl Cdf for PiecewiseLinearCdf {
    fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        let i = self.knots.partition_point(|k| k.0 <= x);
        let (x0, f0) = self.knots[i - 1];
        let (x1, f1) = self.knots[i];
        f0 + (f1 - f0) * (x - x0) / (x1 - x0)
    }

    fn support(&self) -> (f64, f64) {
        (self.knots[0].0, self.knots[self.knots.len() - 1].0)
    }

    fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let i = self.knots.partition_point(|k| k.1 < u).max(1);
        let (x0, f0) = self.knots[i - 1];
        let (x1, f1) = self.knots[i];
        x0 + (x1 - x0) * (u - f0) / (f1 - f0)
    }
}

/// Buyer valuation distribution `F` and seller cost distribution `G`.
#[derive(Clone, Debug)]
pub struct ContinuousEconomy {
    buyers: Arc<dyn Cdf>,
    sellers: Arc<dyn Cdf>,
}

const PROBE_POINTS: usize = 1024;

impl ContinuousEconomy {
    /// Checks endpoint values and probes strict monotonicity on a grid.
    pub fn new(buyers: Arc<dyn Cdf>, sellers: Arc<dyn Cdf>) -> Result<Self, EconomyError> {
        probe("buyer", buyers.as_ref())?;
        probe("seller", sellers.as_ref())?;
        Ok(ContinuousEconomy { buyers, sellers })
    }

    pub fn buyers(&self) -> &dyn Cdf {
        self.buyers.as_ref()
    }

    pub fn sellers(&self) -> &dyn Cdf {
        self.sellers.as_ref()
    }

    /// `1 - F(p)`.
    pub fn demand(&self, p: f64) -> f64 {
        1.0 - self.buyers.cdf(p)
    }

    /// `G(p)`.
    pub fn supply(&self, p: f64) -> f64 {
        self.sellers.cdf(p)
    }

    pub fn excess_demand(&self, p: f64) -> f64 {
        self.demand(p) - self.supply(p)
    }

    /// Upper end of the price bracket, `max(v̄_b, v̄_s)`.
    pub fn price_ceiling(&self) -> f64 {
        self.buyers.support().1.max(self.sellers.support().1)
    }
}

fn probe(side: &'static str, cdf: &dyn Cdf) -> Result<(), EconomyError> {
    let (lower, upper) = cdf.support();
    if !(lower >= 0.0 && upper > lower)
        || cdf.cdf(lower).abs() > 1e-12
        || (cdf.cdf(upper) - 1.0).abs() > 1e-12
    {
        return Err(EconomyError::Endpoints { side, lower, upper });
    }
    let mut prev = cdf.cdf(lower);
    for i in 1..=PROBE_POINTS {
        let x = lower + (upper - lower) * i as f64 / PROBE_POINTS as f64;
        let f = cdf.cdf(x);
        if f <= prev {
            return Err(EconomyError::NotIncreasing { side, at: x });
        }
        prev = f;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bisection {
    /// Bracket width at which to stop, relative to the initial bracket.
    pub rel_tol: f64,
    pub max_iter: u32,
}

impl Default for Bisection {
    fn default() -> Self {
        Bisection {
            rel_tol: 1e-6,
            max_iter: 200,
        }
    }
}

impl Bisection {
    /// Absolute price tolerance on `economy`.
    pub fn abs_tol(&self, economy: &ContinuousEconomy) -> f64 {
        self.rel_tol * economy.price_ceiling()
    }
}

/// The equilibrium price of a continuous economy: the root of
/// `1 - F(p) - G(p)` on `[0, max(v̄_b, v̄_s)]`.
pub fn ce_continuous(economy: &ContinuousEconomy, opts: Bisection) -> Result<f64, EconomyError> {
    let (mut lo, mut hi) = (0.0_f64, economy.price_ceiling());
    if economy.excess_demand(lo) <= 0.0 || economy.excess_demand(hi) > 0.0 {
        return Err(EconomyError::NoSignChange {
            lower: lo,
            upper: hi,
        });
    }
    let tol = opts.rel_tol * (hi - lo);
    let mut iter = 0;
    while hi - lo > tol && iter < opts.max_iter {
        let mid = 0.5 * (lo + hi);
        if economy.excess_demand(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iter += 1;
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pounds(b: &[u64], s: &[u64]) -> ValueProfile {
        ValueProfile::from_ticks(b, s, TickSize::POUND).unwrap()
    }

    fn symmetric() -> ValueProfile {
        pounds(&[12, 32, 52, 72, 92], &[8, 28, 48, 68, 88])
    }

    fn low_values() -> ValueProfile {
        pounds(&[0, 0, 52, 52, 52], &[0, 0, 48, 52, 52])
    }

    /// Brute force over every tick price, straight from the definitions.
    fn ce_oracle(profile: &ValueProfile) -> (Vec<u64>, Vec<u64>, usize) {
        let max = profile.max_value().0;
        let mut weak = Vec::new();
        let mut strict = Vec::new();
        let mut quantity = 0;
        for p in 0..=max {
            let v_gt = profile.buyers().iter().filter(|v| v.0 > p).count();
            let v_ge = profile.buyers().iter().filter(|v| v.0 >= p).count();
            let c_lt = profile.sellers().iter().filter(|c| c.0 < p).count();
            let c_le = profile.sellers().iter().filter(|c| c.0 <= p).count();
            let feasible: Vec<usize> = (0..=profile.buyers().len())
                .filter(|q| v_gt <= *q && *q <= v_ge && c_lt <= *q && *q <= c_le)
                .collect();
            if let Some(q) = feasible.last() {
                weak.push(p);
                quantity = quantity.max(*q);
                let indifferent = profile.buyers().iter().any(|v| v.0 == p)
                    || profile.sellers().iter().any(|c| c.0 == p);
                if v_ge == c_le && !indifferent {
                    strict.push(p);
                }
            }
        }
        (weak, strict, quantity)
    }

    #[test]
    fn symmetric_counts() {
        let p = symmetric();
        assert_eq!(demand(&p, Money(50)), 3);
        assert_eq!(supply(&p, Money(50)), 3);
        assert_eq!(excess_demand(&p, Money(50)), 0);
        assert_eq!(demand(&p, Money(0)), 5);
        assert_eq!(supply(&p, Money(88)), 5);
        assert_eq!(excess_demand(&p, Money(0)), 5);
    }

    #[test]
    fn symmetric_and_low_values_share_the_band() {
        let sym = ce_set(&symmetric());
        assert_eq!(sym.weak, PriceRange::new(Money(48), Money(52)));
        assert_eq!(sym.strict_prices(), vec![Money(49), Money(50), Money(51)]);
        assert_eq!(sym.quantity, 3);

        let low = ce_set(&low_values());
        assert_eq!(low.weak, PriceRange::new(Money(48), Money(52)));
        assert_eq!(low.strict_prices(), vec![Money(49), Money(50), Money(51)]);
        assert_eq!(low.quantity, 3);
        assert_eq!(sym.to_string(), "weak 48-52, strict 49-51, q=3");
    }

    #[test]
    fn intro_penny_profile() {
        let buyers: Vec<u64> = (1..=99).map(|k| k * 100 + 1).collect();
        let sellers: Vec<u64> = (1..=99).map(|k| k * 100 - 1).collect();
        let p = ValueProfile::from_ticks(&buyers, &sellers, TickSize::PENNY).unwrap();
        let ce = ce_set(&p);
        assert_eq!(ce.weak, PriceRange::new(Money(4999), Money(5001)));
        assert_eq!(ce.strict_prices(), vec![Money(5000)]);
        assert_eq!(ce.quantity, 50);
    }

    #[test]
    fn single_tied_pair() {
        let ce = ce_set(&pounds(&[10], &[10]));
        assert_eq!(ce.weak, PriceRange::point(Money(10)));
        assert!(ce.strict.is_empty());
        assert_eq!(ce.quantity, 1);
    }

    #[test]
    fn no_gains_from_trade_gives_a_zero_quantity_band() {
        let ce = ce_set(&pounds(&[10], &[20]));
        assert_eq!(ce.weak, PriceRange::new(Money(10), Money(20)));
        assert_eq!(ce.quantity, 0);
        // Prices strictly between the two values clear with nobody indifferent.
        assert_eq!(ce.strict, vec![PriceRange::new(Money(11), Money(19))]);
    }

    #[test]
    fn empty_side_is_rejected() {
        assert_eq!(
            ValueProfile::from_ticks(&[], &[1], TickSize::PENNY),
            Err(ProfileError::EmptySide)
        );
    }

    #[test]
    fn regrid_round_trips_and_rejects_off_grid() {
        let pennies = symmetric().regrid(TickSize::PENNY).unwrap();
        assert_eq!(pennies.buyers()[0], Money(1200));
        assert_eq!(pennies.regrid(TickSize::POUND).unwrap(), symmetric());
        let odd = ValueProfile::from_ticks(&[101], &[99], TickSize::PENNY).unwrap();
        assert!(odd.regrid(TickSize::POUND).is_err());
    }

    fn small_profile() -> impl Strategy<Value = ValueProfile> {
        (
            prop::collection::vec(0u64..40, 1..7),
            prop::collection::vec(0u64..40, 1..7),
        )
            .prop_map(|(b, s)| ValueProfile::from_ticks(&b, &s, TickSize::POUND).unwrap())
    }

    proptest! {
        #[test]
        fn counts_match_brute_force_and_are_monotone(profile in small_profile()) {
            let mut prev: Option<(usize, usize)> = None;
            for p in 0..=45u64 {
                let d = demand(&profile, Money(p));
                let s = supply(&profile, Money(p));
                prop_assert_eq!(d, profile.buyers().iter().filter(|v| v.0 >= p).count());
                prop_assert_eq!(s, profile.sellers().iter().filter(|c| c.0 <= p).count());
                prop_assert_eq!(excess_demand(&profile, Money(p)), d as i64 - s as i64);
                if let Some((pd, ps)) = prev {
                    prop_assert!(d <= pd && s >= ps);
                }
                prev = Some((d, s));
            }
        }

        #[test]
        fn ce_set_matches_brute_force(profile in small_profile()) {
            let ce = ce_set(&profile);
            let (weak, strict, quantity) = ce_oracle(&profile);
            prop_assert!(!weak.is_empty());
            // Contiguity of the brute-force set.
            prop_assert_eq!(weak.len() as u64, weak[weak.len() - 1] - weak[0] + 1);
            prop_assert_eq!(ce.weak, PriceRange::new(Money(weak[0]), Money(*weak.last().unwrap())));
            prop_assert_eq!(ce.strict_prices(), strict.iter().copied().map(Money).collect::<Vec<_>>());
            prop_assert_eq!(ce.quantity, quantity);
            for p in ce.strict_prices() {
                prop_assert!(ce.weak.contains(p));
                prop_assert_eq!(excess_demand(&profile, p), 0);
                prop_assert!(!profile.buyers().contains(&p) && !profile.sellers().contains(&p));
            }
        }
    }

    fn uniform_economy(b: f64, s: f64) -> ContinuousEconomy {
        ContinuousEconomy::new(
            Arc::new(PiecewiseLinearCdf::uniform(0.0, b).unwrap()),
            Arc::new(PiecewiseLinearCdf::uniform(0.0, s).unwrap()),
        )
        .unwrap()
    }

    #[test]
    fn continuous_uniform_cases() {
        let opts = Bisection::default();
        let e = uniform_economy(100.0, 100.0);
        let p = ce_continuous(&e, opts).unwrap();
        assert!((p - 50.0).abs() <= opts.abs_tol(&e));

        // 1 - p/100 = p/50  =>  p = 100/3.
        let e = uniform_economy(100.0, 50.0);
        let p = ce_continuous(&e, opts).unwrap();
        assert!((p - 100.0 / 3.0).abs() <= opts.abs_tol(&e));
    }

    #[test]
    fn random_piecewise_economies_match_dense_grid() {
        let mut rng = SimRng::new(11);
        let opts = Bisection::default();
        for _ in 0..20 {
            let f = PiecewiseLinearCdf::random(&mut rng, 0.0, 100.0, 4);
            let g = PiecewiseLinearCdf::random(&mut rng, 0.0, 80.0, 3);
            let e = ContinuousEconomy::new(Arc::new(f), Arc::new(g)).unwrap();
            let p = ce_continuous(&e, opts).unwrap();
            // Dense-grid argmin |e(p)| at spacing 1e-4.
            let n = 1_000_000;
            let step = 100.0 / n as f64;
            let best = (0..=n)
                .map(|i| i as f64 * step)
                .min_by(|a, b| e.excess_demand(*a).abs().total_cmp(&e.excess_demand(*b).abs()))
                .unwrap();
            assert!((p - best).abs() <= step + opts.abs_tol(&e), "{p} vs {best}");
        }
    }

    #[test]
    fn doubling_the_iteration_budget_moves_less_than_two_tolerances() {
        let mut rng = SimRng::new(5);
        for _ in 0..20 {
            let e = ContinuousEconomy::new(
                Arc::new(PiecewiseLinearCdf::random(&mut rng, 0.0, 100.0, 5)),
                Arc::new(PiecewiseLinearCdf::random(&mut rng, 0.0, 100.0, 5)),
            )
            .unwrap();
            let base = Bisection { rel_tol: 1e-6, max_iter: 30 };
            let doubled = Bisection { max_iter: 60, ..base };
            let a = ce_continuous(&e, base).unwrap();
            let b = ce_continuous(&e, doubled).unwrap();
            assert!((a - b).abs() <= 2.0 * base.abs_tol(&e));
        }
    }

    #[derive(Debug)]
    struct Flat;

    impl Cdf for Flat {
        fn cdf(&self, x: f64) -> f64 {
            if x < 10.0 {
                x / 20.0
            } else if x < 20.0 {
                0.5
            } else {
                (0.5 + (x - 20.0) / 20.0).min(1.0)
            }
        }
        fn support(&self) -> (f64, f64) {
            (0.0, 30.0)
        }
    }

    #[test]
    fn flat_cdf_is_rejected() {
        let err = ContinuousEconomy::new(
            Arc::new(Flat),
            Arc::new(PiecewiseLinearCdf::uniform(0.0, 30.0).unwrap()),
        )
        .unwrap_err();
        assert!(matches!(err, EconomyError::NotIncreasing { side: "buyer", .. }));
    }

    #[test]
    fn piecewise_quantile_inverts_cdf() {
        let mut rng = SimRng::new(3);
        let f = PiecewiseLinearCdf::random(&mut rng, 0.0, 100.0, 6);
        for i in 0..=100 {
            let u = i as f64 / 100.0;
            assert!((f.cdf(f.quantile(u)) - u).abs() < 1e-12);
        }
        assert!(PiecewiseLinearCdf::new(vec![(0.0, 0.0), (1.0, 0.5)]).is_err());
    }
}
