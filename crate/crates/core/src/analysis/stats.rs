use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZTest {
    pub z: f64,
    /// Two-sided.
    pub p_value: f64,
}

/// Pooled two-proportion z-test of `x1/n1` against `x2/n2`; `z > 0` when the
/// first proportion is larger. With no variance in the pooled sample the
/// statistic is reported as 0 with p = 1.
pub fn two_proportion_z(x1: usize, n1: usize, x2: usize, n2: usize) -> ZTest {
    assert!(n1 > 0 && n2 > 0, "both samples must be non-empty");
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let p1 = x1 as f64 / n1f;
    let p2 = x2 as f64 / n2f;
    let pooled = (x1 + x2) as f64 / (n1f + n2f);
    let se = (pooled * (1.0 - pooled) * (1.0 / n1f + 1.0 / n2f)).sqrt();
    if se == 0.0 {
        return ZTest {
            z: 0.0,
            p_value: 1.0,
        };
    }
    let z = (p1 - p2) / se;
    let p_value = (2.0 * normal_cdf(-z.abs())).min(1.0);
    ZTest { z, p_value }
}
