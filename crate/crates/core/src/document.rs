//! Tagged JSON envelope: every file carries a top-level `"kind"`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cpp::{CppInstance, PathPartition};
use crate::finite_horizon::{FiniteHorizonInstance, RoutePlan};
use crate::periodic::{AbsolutelyPeriodicSolution, PeriodicInstance};
use crate::reductions::TwoCommodityInstance;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Document {
    Periodic(PeriodicInstance),
    PeriodicSolution(AbsolutelyPeriodicSolution),
    Cpp(CppInstance),
    PathPartition(PathPartition),
    FiniteHorizon(FiniteHorizonInstance),
    RoutePlan(RoutePlan),
    TwoCommodity(TwoCommodityInstance),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{column}: {message}")]
pub struct DocumentError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    /// The text is well-formed JSON but its content was rejected.
    pub data: bool,
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Periodic(_) => "periodic",
            Document::PeriodicSolution(_) => "periodic_solution",
            Document::Cpp(_) => "cpp",
            Document::PathPartition(_) => "path_partition",
            Document::FiniteHorizon(_) => "finite_horizon",
            Document::RoutePlan(_) => "route_plan",
            Document::TwoCommodity(_) => "two_commodity",
        }
    }

    pub fn from_json(text: &str) -> Result<Document, DocumentError> {
        serde_json::from_str(text).map_err(|e| DocumentError {
            line: e.line(),
            column: e.column(),
            message: e.to_string().split(" at line ").next().unwrap_or_default().to_string(),
            data: e.is_data(),
        })
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents always serialize");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_errors() {
        let text = r#"{"kind":"periodic","graph":{"vertices":[0,1],"arcs":[[0,0,1],[1,1,0]]},"bases":[0],"gamma":2}"#;
        let doc = Document::from_json(text).unwrap();
        assert_eq!(doc.kind(), "periodic");
        assert_eq!(Document::from_json(&doc.to_json()).unwrap(), doc);

        let e = Document::from_json("{\n  \"kind\": \"nope\"\n}").unwrap_err();
        assert_eq!(e.line, 2, "{e}");
        assert!(e.message.contains("unknown variant"), "{e}");
        assert!(e.data);
        assert!(!Document::from_json("{").unwrap_err().data);
        assert!(Document::from_json(r#"{"graph":{}}"#).unwrap_err().message.contains("kind"));
    }
}
