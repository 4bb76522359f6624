//! JSON documents for instances and fixture expectations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::constructions::{Expectation, Fixture};
use crate::error::Result;
use crate::graph::{GameConfig, Objective, OwnershipGraph, Vertex};
use crate::rational::Rational;

/// `{"n", "arcs", "alpha", "objective"}` plus optional metadata.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub n: usize,
    pub arcs: Vec<(Vertex, Vertex)>,
    #[serde(with = "crate::rational::fraction")]
    pub alpha: Rational,
    pub objective: Objective,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expectations: Vec<Expectation>,
}

impl InstanceFile {
    pub fn new(g: &OwnershipGraph, cfg: &GameConfig) -> Self {
        InstanceFile {
            n: g.n(),
            arcs: g.arcs().to_vec(),
            alpha: cfg.alpha,
            objective: cfg.objective,
            name: None,
            expectations: Vec::new(),
        }
    }

    pub fn from_fixture(f: &Fixture) -> Self {
        InstanceFile {
            name: Some(f.name.clone()),
            expectations: f.expectations.clone(),
            ..InstanceFile::new(&f.graph, &f.config())
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        file.graph()?;
        file.config()?;
        Ok(file)
    }

    pub fn graph(&self) -> Result<OwnershipGraph> {
        OwnershipGraph::new(self.n, self.arcs.iter().copied())
    }

    pub fn config(&self) -> Result<GameConfig> {
        GameConfig::new(self.alpha, self.objective)
    }

    /// The canonical form: arcs sorted, fraction reduced.
    pub fn canonical(&self) -> Result<Self> {
        Ok(InstanceFile {
            arcs: self.graph()?.arcs().to_vec(),
            ..self.clone()
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance files serialize");
        s.push('\n');
        s
    }
}

/// Sidecar describing what a generated instance is expected to satisfy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectationFile {
    pub name: String,
    pub expectations: Vec<Expectation>,
    #[serde(with = "crate::rational::fraction_opt", default, skip_serializing_if = "Option::is_none")]
    pub expected_ratio: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_agent: Option<Vertex>,
    pub labels: BTreeMap<String, Vertex>,
    pub unverified_figure: bool,
}

impl ExpectationFile {
    pub fn from_fixture(f: &Fixture) -> Self {
        ExpectationFile {
            name: f.name.clone(),
            expectations: f.expectations.clone(),
            expected_ratio: f.expected_ratio,
            ratio_agent: f.ratio_agent,
            labels: f.labels.clone(),
            unverified_figure: f.unverified_figure,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("expectation files serialize");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{cheap_star, sum_lower_bound};
    use crate::rational::frac;

    #[test]
    fn instance_round_trip() {
        let f = sum_lower_bound(3).unwrap();
        let file = InstanceFile::from_fixture(&f);
        let back = InstanceFile::parse(&file.to_json()).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.graph().unwrap(), f.graph);
        assert!(file.to_json().contains("\"alpha\": \"4/1\""));
    }

    #[test]
    fn rejects_bad_documents() {
        let anti = r#"{"n": 3, "arcs": [[0, 1], [1, 0]], "alpha": "1/2", "objective": "sum"}"#;
        assert!(InstanceFile::parse(anti).is_err());
        let zero = r#"{"n": 2, "arcs": [[0, 1]], "alpha": "0/1", "objective": "max"}"#;
        assert!(InstanceFile::parse(zero).is_err());
        let float = r#"{"n": 2, "arcs": [[0, 1]], "alpha": 0.5, "objective": "max"}"#;
        assert!(InstanceFile::parse(float).is_err());
        let ok = r#"{"n": 2, "arcs": [[0, 1]], "alpha": "2/4", "objective": "max"}"#;
        assert_eq!(InstanceFile::parse(ok).unwrap().alpha, frac(1, 2));
    }

    #[test]
    fn canonical_form_sorts_arcs() {
        let text = r#"{"n": 3, "arcs": [[2, 1], [0, 1]], "alpha": "1", "objective": "sum"}"#;
        let c = InstanceFile::parse(text).unwrap().canonical().unwrap();
        assert_eq!(c.arcs, vec![(0, 1), (2, 1)]);
        assert_eq!(InstanceFile::parse(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn sidecar_carries_ratio() {
        let f = cheap_star(6, frac(1, 100), true).unwrap();
        let s = ExpectationFile::from_fixture(&f).to_json();
        assert!(s.contains("\"expected_ratio\": \"25/13\""));
    }
}
