//! Power-law exponent of a degree distribution, `P(k) ~ k^-gamma`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DegreeDistribution;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaMethod {
    /// Least squares on `ln P(k) = c - gamma ln k` over the observed degrees.
    #[default]
    LoglogOls,
    /// Discrete power-law MLE in its continuous approximation with `k_min = 1`.
    Mle,
}

impl GammaMethod {
    pub const BOTH: [GammaMethod; 2] = [GammaMethod::LoglogOls, GammaMethod::Mle];
}

impl FromStr for GammaMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "loglog_ols" | "loglog-ols" | "ols" => Ok(GammaMethod::LoglogOls),
            "mle" => Ok(GammaMethod::Mle),
            other => Err(Error::InvalidArgument(format!("unknown gamma method {other:?}"))),
        }
    }
}

impl fmt::Display for GammaMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GammaMethod::LoglogOls => "loglog_ols",
            GammaMethod::Mle => "mle",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaEstimate {
    pub gamma: f64,
    pub method: GammaMethod,
    /// `(k, P(k))` pairs the fit used.
    pub points_used: Vec<(usize, f64)>,
    /// Coefficient of determination of the log-log fit; absent for MLE.
    pub r_squared: Option<f64>,
}

const K_MIN: f64 = 1.0;

pub fn estimate_gamma(dist: &DegreeDistribution, method: GammaMethod) -> Result<GammaEstimate> {
    let points: Vec<(usize, f64)> = dist
        .entries
        .iter()
        .filter(|e| e.count > 0 && e.k >= 1)
        .map(|e| (e.k, e.pk))
        .collect();
    if points.len() < 2 {
        return Err(Error::DegenerateDistribution(points.len()));
    }
    match method {
        GammaMethod::LoglogOls => {
            let xs: Vec<f64> = points.iter().map(|&(k, _)| (k as f64).ln()).collect();
            let ys: Vec<f64> = points.iter().map(|&(_, p)| p.ln()).collect();
            let n = xs.len() as f64;
            let mx = xs.iter().sum::<f64>() / n;
            let my = ys.iter().sum::<f64>() / n;
            let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
            let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
            let slope = sxy / sxx;
            let r_squared = if syy == 0.0 {
                1.0
            } else {
                (sxy * sxy) / (sxx * syy)
            };
            Ok(GammaEstimate {
                gamma: -slope,
                method,
                points_used: points,
                r_squared: Some(r_squared),
            })
        }
        GammaMethod::Mle => {
            let (m, log_sum) = dist
                .entries
                .iter()
                .filter(|e| e.k as f64 >= K_MIN)
                .fold((0usize, 0.0f64), |(m, s), e| {
                    (
                        m + e.count,
                        s + e.count as f64 * (e.k as f64 / (K_MIN - 0.5)).ln(),
                    )
                });
            Ok(GammaEstimate {
                gamma: 1.0 + m as f64 / log_sum,
                method,
                points_used: points,
                r_squared: None,
            })
        }
    }
}
