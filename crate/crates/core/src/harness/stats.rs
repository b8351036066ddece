use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::StatsError;

pub const DEFAULT_Z: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub low: f64,
    pub high: f64,
    pub z: f64,
}

/// Wilson score interval for `successes` out of `n`.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> Result<ConfidenceInterval, StatsError> {
    if n == 0 {
        return Err(StatsError::NoTrials);
    }
    if successes > n {
        return Err(StatsError::TooManySuccesses { successes, n });
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    Ok(ConfidenceInterval {
        low: (center - half).max(0.0),
        high: (center + half).min(1.0),
        z,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProportionTest {
    /// Always "two-proportion z-test (pooled)".
    pub test: String,
    pub z_statistic: f64,
    pub p_value: f64,
}

/// Two-sided pooled two-proportion z-test. A zero standard error (both
/// samples all successes or all failures) gives z = 0 and p = 1.
pub fn two_proportion_test(s1: u64, n1: u64, s2: u64, n2: u64) -> Result<ProportionTest, StatsError> {
    for (s, n) in [(s1, n1), (s2, n2)] {
        if n == 0 {
            return Err(StatsError::NoTrials);
        }
        if s > n {
            return Err(StatsError::TooManySuccesses { successes: s, n });
        }
    }
    let (p1, p2) = (s1 as f64 / n1 as f64, s2 as f64 / n2 as f64);
    let pooled = (s1 + s2) as f64 / (n1 + n2) as f64;
    let se = (pooled * (1.0 - pooled) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    let (z, p) = if se == 0.0 {
        (0.0, 1.0)
    } else {
        let z = (p1 - p2) / se;
        (z, erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0))
    };
    Ok(ProportionTest {
        test: "two-proportion z-test (pooled)".into(),
        z_statistic: z,
        p_value: p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_of_twenty() {
        let ci = wilson_interval(0, 20, 1.96).unwrap();
        assert_eq!(ci.low, 0.0);
        assert!((ci.high - 0.1611).abs() < 1e-3);
        let ci = wilson_interval(20, 20, 1.96).unwrap();
        assert!((ci.low - 0.8389).abs() < 1e-3);
        assert_eq!(ci.high, 1.0);
    }

    #[test]
    fn symmetric_at_half() {
        let ci = wilson_interval(10, 20, 1.96).unwrap();
        assert!(((ci.low + ci.high) / 2.0 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn domain_errors() {
        assert_eq!(wilson_interval(0, 0, 1.96), Err(StatsError::NoTrials));
        assert!(wilson_interval(3, 2, 1.96).is_err());
    }

    #[test]
    fn identical_samples_have_p_one() {
        assert_eq!(two_proportion_test(7, 20, 7, 20).unwrap().p_value, 1.0);
        assert_eq!(two_proportion_test(0, 20, 0, 20).unwrap().p_value, 1.0);
        assert!(two_proportion_test(0, 20, 10, 20).unwrap().p_value < 0.05);
    }
}
