use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::scalar::Real;

/// How a reported norm was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Closed-form integration over the cells of constant counting function.
    ExactCell,
    MonteCarlo,
    Parseval,
    Warnock,
    ProxySupP,
    Bisection,
    /// Exhaustive evaluation at the critical grid of the point set.
    CriticalGrid,
    /// Maximum over an explicit family of candidate regions.
    DyadicCandidates,
    /// Restricted coefficient sum over empty dyadic boxes.
    EmptyBox,
}

impl Method {
    pub fn is_stochastic(self) -> bool {
        matches!(self, Method::MonteCarlo | Method::Bisection)
    }
}

/// A computed norm with its method, optional error bound and parameters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormReport<F: Real> {
    pub value: F,
    pub method: Method,
    pub error_bound: Option<F>,
    pub params: BTreeMap<String, Value>,
}

impl<F: Real> NormReport<F> {
    pub fn new(value: F, method: Method) -> Self {
        NormReport {
            value,
            method,
            error_bound: None,
            params: BTreeMap::new(),
        }
    }

    pub fn with_error(mut self, bound: F) -> Self {
        self.error_bound = Some(bound);
        self
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("reports serialise")
    }
}
