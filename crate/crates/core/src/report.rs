//! Machine-readable reports shared by the command-line tools.
//!
//! Every report has the same top-level keys; for a fixed seed the serialized
//! form is identical between runs apart from `elapsed_ms`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::approx::MonoReport;
use crate::fourval::values_to_string;
use crate::minifm::EquivReport;
use crate::netlist::WfReport;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub trial: u64,
    pub kind: String,
    pub module: String,
    pub position: String,
    pub witness: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub seed: u64,
    pub trials: u64,
    pub pass: bool,
    pub violations: Vec<Violation>,
    pub elapsed_ms: u128,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl From<&MonoReport> for Report {
    fn from(r: &MonoReport) -> Self {
        let violations = r
            .violations
            .iter()
            .map(|v| {
                let witness = BTreeMap::from([
                    ("weak_inputs".to_string(), values_to_string(&v.weak_inputs)),
                    ("strong_inputs".to_string(), values_to_string(&v.strong_inputs)),
                    ("weak_state".to_string(), v.weak_state.to_string()),
                    ("strong_state".to_string(), v.strong_state.to_string()),
                    ("weak_result".to_string(), v.weak_result.clone()),
                    ("strong_result".to_string(), v.strong_result.clone()),
                ]);
                Violation {
                    trial: v.trial,
                    kind: v.kind.name().to_string(),
                    module: r.module.clone(),
                    position: v.position.clone(),
                    witness,
                }
            })
            .collect();
        Report {
            command: "mono".into(),
            seed: r.seed,
            trials: r.trials,
            pass: r.pass(),
            violations,
            elapsed_ms: r.elapsed_ms,
        }
    }
}

impl From<&EquivReport> for Report {
    fn from(r: &EquivReport) -> Self {
        let violations = r
            .mismatches
            .iter()
            .map(|m| Violation {
                trial: m.program,
                kind: "equiv".into(),
                module: crate::minifm::TOP.into(),
                position: format!("step:{}/{}", m.step, m.field),
                witness: BTreeMap::from([
                    ("expected".to_string(), m.expected.clone()),
                    ("actual".to_string(), m.actual.clone()),
                    ("initial_state".to_string(), m.initial.clone()),
                ]),
            })
            .collect();
        Report {
            command: "cpu-equiv".into(),
            seed: r.seed,
            trials: r.programs,
            pass: r.pass(),
            violations,
            elapsed_ms: r.elapsed_ms,
        }
    }
}

impl From<&WfReport> for Report {
    fn from(r: &WfReport) -> Self {
        let violations = r
            .violations
            .iter()
            .map(|v| Violation {
                trial: 0,
                kind: v.class.name().to_string(),
                module: v.module.clone(),
                position: v.occurrence.clone().unwrap_or_default(),
                witness: BTreeMap::from([("detail".to_string(), v.detail.clone())]),
            })
            .collect();
        Report {
            command: "check".into(),
            seed: 0,
            trials: 0,
            pass: r.is_ok(),
            violations,
            elapsed_ms: 0,
        }
    }
}
