//! Shannon entropy of a message distribution and the gaussian
//! productivity profile over entropy.

use crate::error::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct MessageDistribution {
    probabilities: Vec<f64>,
}

impl MessageDistribution {
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::InvalidDistribution("no messages".into()));
        }
        if let Some(p) = probabilities
            .iter()
            .find(|p| !(0.0..=1.0).contains(*p))
        {
            return Err(Error::InvalidDistribution(format!("probability {p} outside [0, 1]")));
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {sum}")));
        }
        Ok(Self { probabilities })
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidDistribution("no messages".into()));
        }
        Self::new(vec![1.0 / k as f64; k])
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }
}

/// Average message length in bits; zero-probability messages contribute nothing.
pub fn shannon_entropy(d: &MessageDistribution) -> f64 {
    let s: f64 = d
        .probabilities
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    s.max(0.0)
}

/// `tau(s) = a * exp(-(s - s0)^2 / (2 c^2))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TauProfile {
    a: f64,
    s0: f64,
    c: f64,
}

impl TauProfile {
    pub fn new(a: f64, s0: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidProfile(format!("peak a={a} must be positive")));
        }
        if !(s0.is_finite() && s0 >= 0.0) {
            return Err(Error::InvalidProfile(format!("optimum s0={s0} must be non-negative")));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidProfile(format!("deviation c={c} must be positive")));
        }
        Ok(Self { a, s0, c })
    }

    pub fn peak(&self) -> f64 {
        self.a
    }

    pub fn optimum(&self) -> f64 {
        self.s0
    }

    pub fn deviation(&self) -> f64 {
        self.c
    }

    pub fn tau(&self, s: f64) -> f64 {
        let d = s - self.s0;
        self.a * (-(d * d) / (2.0 * self.c * self.c)).exp()
    }
}

pub fn tau(profile: &TauProfile, s: f64) -> f64 {
    profile.tau(s)
}
