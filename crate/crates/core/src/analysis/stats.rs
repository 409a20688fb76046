//! Student t tests with p-values from the regularized incomplete beta.
//!
//! Two-sided p for statistic `t` on `df` degrees of freedom is
//! `I_{df/(df+t^2)}(df/2, 1/2)`.

use std::fmt;

use statrs::function::beta::beta_reg;

use crate::error::StatsError;
use crate::values::PriceRange;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TestKind {
    Welch,
    Pooled,
    OneSample,
    StochasticCe,
    Trend,
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestKind::Welch => "welch",
            TestKind::Pooled => "pooled",
            TestKind::OneSample => "one_sample",
            TestKind::StochasticCe => "stochastic_ce",
            TestKind::Trend => "trend",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub df: f64,
    pub p_value: f64,
    pub kind: TestKind,
    /// Hypothesised mean for one-sample tests.
    pub reference: Option<f64>,
}

impl fmt::Display for TestResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "kind={} statistic={:.6} df={:.3} p={:.3e}",
            self.kind, self.statistic, self.df, self.p_value
        )?;
        if let Some(r) = self.reference {
            write!(f, " mu0={r}")?;
        }
        Ok(())
    }
}

/// Variance assumption for the unpaired test.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Variance {
    #[default]
    Unequal,
    Pooled,
}

/// Two-sided p-value of a t statistic.
pub fn t_two_sided_p(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    let x = df / (df + t * t);
    beta_reg(df / 2.0, 0.5, x).clamp(0.0, 1.0)
}

fn check(xs: &[f64], need: usize) -> Result<(), StatsError> {
    if xs.len() < need {
        return Err(StatsError::TooSmall {
            need,
            got: xs.len(),
        });
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    Ok(())
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance by the two-pass formula.
fn variance(xs: &[f64], m: f64) -> f64 {
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

fn degenerate(diff: f64, df: f64, kind: TestKind, reference: Option<f64>) -> Result<TestResult, StatsError> {
    if diff == 0.0 {
        Ok(TestResult {
            statistic: 0.0,
            df,
            p_value: 1.0,
            kind,
            reference,
        })
    } else {
        Err(StatsError::ZeroVariance {
            mean_difference: diff,
        })
    }
}

/// Unpaired two-sample t test of equal means. Welch by default; the pooled
/// form assumes equal variances.
pub fn t_test_unpaired(a: &[f64], b: &[f64], variance_kind: Variance) -> Result<TestResult, StatsError> {
    check(a, 2)?;
    check(b, 2)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (variance(a, ma), variance(b, mb));
    let diff = ma - mb;
    let (se2, df, kind) = match variance_kind {
        Variance::Unequal => {
            let (qa, qb) = (va / na, vb / nb);
            let se2 = qa + qb;
            let df = if se2 > 0.0 {
                se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0))
            } else {
                na + nb - 2.0
            };
            (se2, df, TestKind::Welch)
        }
        Variance::Pooled => {
            let df = na + nb - 2.0;
            let sp2 = ((na - 1.0) * va + (nb - 1.0) * vb) / df;
            (sp2 * (1.0 / na + 1.0 / nb), df, TestKind::Pooled)
        }
    };
    if se2 == 0.0 {
        return degenerate(diff, df, kind, None);
    }
    let statistic = diff / se2.sqrt();
    Ok(TestResult {
        statistic,
        df,
        p_value: t_two_sided_p(statistic, df),
        kind,
        reference: None,
    })
}

pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TestResult, StatsError> {
    t_test_unpaired(a, b, Variance::Unequal)
}

/// One-sample t test of `mean = mu0`.
pub fn one_sample_t_test(xs: &[f64], mu0: f64) -> Result<TestResult, StatsError> {
    one_sample(xs, mu0, TestKind::OneSample)
}

fn one_sample(xs: &[f64], mu0: f64, kind: TestKind) -> Result<TestResult, StatsError> {
    check(xs, 2)?;
    let n = xs.len() as f64;
    let m = mean(xs);
    let v = variance(xs, m);
    let df = n - 1.0;
    if v == 0.0 {
        return degenerate(m - mu0, df, kind, Some(mu0));
    }
    let statistic = (m - mu0) / (v / n).sqrt();
    Ok(TestResult {
        statistic,
        df,
        p_value: t_two_sided_p(statistic, df),
        kind,
        reference: Some(mu0),
    })
}

/// Tests prices against the nearest equilibrium price: the hypothesised mean
/// is the sample mean clamped into the weak equilibrium interval, so a mean
/// inside the interval is never rejected.
pub fn stochastic_ce_test(prices: &[f64], weak: PriceRange) -> Result<TestResult, StatsError> {
    check(prices, 2)?;
    let mu0 = weak.clamp_f64(mean(prices));
    one_sample(prices, mu0, TestKind::StochasticCe)
}

/// One-sample t test of the mean first difference against zero. An exact
/// linear trend has zero variance and is reported as `ZeroVariance`.
pub fn trend_test(prices: &[f64]) -> Result<TestResult, StatsError> {
    check(prices, 3)?;
    let diffs: Vec<f64> = prices.windows(2).map(|w| w[1] - w[0]).collect();
    one_sample(&diffs, 0.0, TestKind::Trend)
}
