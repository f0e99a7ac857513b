//! Paired t-test and t-based confidence intervals.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedTTest {
    pub n: usize,
    pub mean_diff: f64,
    /// Sample standard deviation of the differences (n - 1 denominator).
    pub sd_diff: f64,
    pub t: f64,
    pub df: f64,
    /// Two-sided p value.
    pub p: f64,
    /// Set when all differences are equal. Then t is 0 (p = 1) for a zero
    /// mean and +/- infinity (p = 0) otherwise.
    pub zero_variance: bool,
}

fn students_t(df: f64) -> StudentsT {
    StudentsT::new(0.0, 1.0, df).expect("df > 0")
}

/// Two-sided paired t-test on the differences `a[i] - b[i]`.
pub fn paired_ttest(a: &[f64], b: &[f64]) -> Result<PairedTTest> {
    if a.len() != b.len() {
        return Err(Error::InvalidParameter(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    one_sample_ttest(&diffs)
}

/// Two-sided one-sample t-test of `H0: mean = 0`.
pub fn one_sample_ttest(diffs: &[f64]) -> Result<PairedTTest> {
    let n = diffs.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "t-test needs at least 2 observations, got {n}"
        )));
    }
    let nf = n as f64;
    let mean = diffs.iter().sum::<f64>() / nf;
    let ss = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>();
    let sd = (ss / (nf - 1.0)).sqrt();
    let df = nf - 1.0;

    // Differences that are equal up to rounding count as zero variance.
    let scale = diffs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    if sd <= 1e-14 * scale.max(f64::MIN_POSITIVE) || sd == 0.0 {
        let (t, p) = if mean == 0.0 || mean.abs() <= 1e-14 * scale {
            (0.0, 1.0)
        } else {
            (f64::INFINITY.copysign(mean), 0.0)
        };
        return Ok(PairedTTest {
            n,
            mean_diff: mean,
            sd_diff: 0.0,
            t,
            df,
            p,
            zero_variance: true,
        });
    }

    let se = sd / nf.sqrt();
    let t = mean / se;
    let p = 2.0 * students_t(df).cdf(-t.abs());
    Ok(PairedTTest {
        n,
        mean_diff: mean,
        sd_diff: sd,
        t,
        df,
        p: p.min(1.0),
        zero_variance: false,
    })
}

/// Upper `1 - (1 - level) / 2` quantile of Student's t with `df` degrees of
/// freedom.
pub fn t_critical(level: f64, df: f64) -> f64 {
    students_t(df).inverse_cdf(1.0 - (1.0 - level) / 2.0)
}

/// Confidence interval for the mean of `values` using the t distribution
/// with n - 1 degrees of freedom.
pub fn mean_confidence_interval(values: &[f64], level: f64) -> Result<(f64, f64)> {
    let test = one_sample_ttest(values)?;
    if test.zero_variance {
        return Ok((test.mean_diff, test.mean_diff));
    }
    let half = t_critical(level, test.df) * test.sd_diff / (test.n as f64).sqrt();
    Ok((test.mean_diff - half, test.mean_diff + half))
}
