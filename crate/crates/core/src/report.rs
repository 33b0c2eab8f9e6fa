//! JSON summaries of experiments.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::mc::Estimate;

/// Tolerance, in standard errors, for an inequality checked on estimates.
pub const SIGMA_MULTIPLIER: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantity {
    pub name: String,
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Zero for exact values.
    pub n_samples: u64,
    pub sigma: f64,
}

impl Quantity {
    pub fn from_estimate(name: impl Into<String>, e: &Estimate) -> Self {
        Quantity {
            name: name.into(),
            estimate: e.p_hat,
            ci_lo: e.ci_lo,
            ci_hi: e.ci_hi,
            n_samples: e.n_samples,
            sigma: e.sigma(),
        }
    }

    pub fn exact(name: impl Into<String>, value: f64) -> Self {
        Quantity { name: name.into(), estimate: value, ci_lo: value, ci_hi: value, n_samples: 0, sigma: 0.0 }
    }

    /// A derived value with a propagated standard error and no interval of its own.
    pub fn derived(name: impl Into<String>, value: f64, sigma: f64, n_samples: u64) -> Self {
        Quantity {
            name: name.into(),
            estimate: value,
            ci_lo: value - SIGMA_MULTIPLIER * sigma,
            ci_hi: value + SIGMA_MULTIPLIER * sigma,
            n_samples,
            sigma,
        }
    }
}

/// `smaller <= larger`, checked as `larger - smaller >= -3σ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Margin {
    pub name: String,
    pub smaller: f64,
    pub larger: f64,
    pub margin: f64,
    pub sigma: f64,
    pub holds: bool,
}

impl Margin {
    pub fn new(name: impl Into<String>, smaller: f64, larger: f64, sigma: f64) -> Self {
        let margin = larger - smaller;
        let holds = if sigma == 0.0 {
            // exact values: allow rounding in the last bits only
            margin >= -1e-12
        } else {
            margin >= -SIGMA_MULTIPLIER * sigma
        };
        Margin { name: name.into(), smaller, larger, margin, sigma, holds }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub experiment: String,
    pub parameters: BTreeMap<String, Value>,
    pub quantities: Vec<Quantity>,
    pub margins: Vec<Margin>,
    /// Hypothesis violations and other caveats.
    pub flags: Vec<String>,
}

impl Report {
    pub fn new(experiment: impl Into<String>) -> Self {
        Report {
            experiment: experiment.into(),
            parameters: BTreeMap::new(),
            quantities: Vec::new(),
            margins: Vec::new(),
            flags: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    pub fn quantity(&self, name: &str) -> Option<&Quantity> {
        self.quantities.iter().find(|q| q.name == name)
    }

    pub fn margin(&self, name: &str) -> Option<&Margin> {
        self.margins.iter().find(|m| m.name == name)
    }

    pub fn all_hold(&self) -> bool {
        self.margins.iter().all(|m| m.holds)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report values serialize")
    }
}
