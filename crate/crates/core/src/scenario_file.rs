//! JSON scenario files.
//!
//! Node numbers are 1-based on disk. A line carries either `"b"`
//! (susceptance) or `"reactance"`, never both. `message_interval` is a number
//! of seconds, or `"continuous"` / `null` / absent for continuous messaging.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_model::{
    CommFailure, CommGraph, DisturbanceEvent, Line, MessageInterval, NodeParams, PowerGrid,
    Scenario, Scheme,
};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    nodes: Vec<NodeEntry>,
    lines: Vec<LineEntry>,
    #[serde(default)]
    comm_links: Vec<[usize; 2]>,
    #[serde(default)]
    comm_failures: Vec<FailureEntry>,
    #[serde(default)]
    message_interval: IntervalEntry,
    #[serde(default)]
    disturbances: Vec<DisturbanceEntry>,
    scheme: Scheme,
    horizon: f64,
    dt: f64,
    #[serde(default = "default_stride")]
    record_stride: usize,
}

fn default_stride() -> usize {
    1
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeEntry {
    id: usize,
    inertia: f64,
    droop: f64,
    cost: f64,
    fixed_power: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LineEntry {
    from: usize,
    to: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reactance: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FailureEntry {
    link: [usize; 2],
    time: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DisturbanceEntry {
    time: f64,
    node: usize,
    delta_p: f64,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(untagged)]
enum IntervalEntry {
    #[default]
    Null,
    Seconds(f64),
    Named(String),
}

fn to_index(id: usize, what: &str) -> Result<usize> {
    id.checked_sub(1)
        .ok_or_else(|| Error::Parse(format!("{what}: node numbers start at 1, got 0")))
}

pub fn from_json(text: &str) -> Result<Scenario> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.try_into()
}

pub fn from_path(path: &std::path::Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    from_json(&text)
}

pub fn to_json(scenario: &Scenario) -> String {
    let file = ScenarioFile::from(scenario);
    serde_json::to_string_pretty(&file).expect("scenario serializes")
}

impl TryFrom<ScenarioFile> for Scenario {
    type Error = Error;

    fn try_from(file: ScenarioFile) -> Result<Scenario> {
        let n = file.nodes.len();
        let mut slots: Vec<Option<NodeParams>> = vec![None; n];
        for node in &file.nodes {
            let idx = to_index(node.id, "nodes")?;
            if idx >= n {
                return Err(Error::Parse(format!(
                    "nodes: id {} outside 1..={n}; ids must be a permutation of 1..=N",
                    node.id
                )));
            }
            if slots[idx].is_some() {
                return Err(Error::Parse(format!("nodes: duplicate id {}", node.id)));
            }
            slots[idx] = Some(NodeParams {
                inertia: node.inertia,
                droop: node.droop,
                cost: node.cost,
                fixed_power: node.fixed_power,
            });
        }
        let nodes = slots.into_iter().map(|s| s.expect("filled")).collect();

        let mut lines = Vec::with_capacity(file.lines.len());
        for (k, line) in file.lines.iter().enumerate() {
            let what = format!("lines[{k}]");
            let susceptance = match (line.b, line.reactance) {
                (Some(b), None) => b,
                (None, Some(x)) => {
                    if x == 0.0 {
                        return Err(Error::Parse(format!("{what}: reactance must be nonzero")));
                    }
                    1.0 / x
                }
                (Some(_), Some(_)) => {
                    return Err(Error::Parse(format!(
                        "{what}: give either \"b\" or \"reactance\", not both"
                    )))
                }
                (None, None) => {
                    return Err(Error::Parse(format!(
                        "{what}: missing \"b\" or \"reactance\""
                    )))
                }
            };
            lines.push(Line {
                from: to_index(line.from, &what)?,
                to: to_index(line.to, &what)?,
                susceptance,
            });
        }

        let links = file
            .comm_links
            .iter()
            .map(|[a, b]| Ok((to_index(*a, "comm_links")?, to_index(*b, "comm_links")?)))
            .collect::<Result<Vec<_>>>()?;
        let failures = file
            .comm_failures
            .iter()
            .map(|f| {
                Ok(CommFailure {
                    link: (
                        to_index(f.link[0], "comm_failures")?,
                        to_index(f.link[1], "comm_failures")?,
                    ),
                    time: f.time,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let message_interval = match file.message_interval {
            IntervalEntry::Null => MessageInterval::Continuous,
            IntervalEntry::Seconds(t) => MessageInterval::Every(t),
            IntervalEntry::Named(s) if s.eq_ignore_ascii_case("continuous") => {
                MessageInterval::Continuous
            }
            IntervalEntry::Named(s) => {
                return Err(Error::Parse(format!(
                    "message_interval: expected seconds or \"continuous\", got \"{s}\""
                )))
            }
        };
        let disturbances = file
            .disturbances
            .iter()
            .map(|d| {
                Ok(DisturbanceEvent {
                    time: d.time,
                    node: to_index(d.node, "disturbances")?,
                    delta_p: d.delta_p,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(Scenario {
            grid: PowerGrid::new(nodes, lines),
            comm: CommGraph {
                links,
                failures,
                message_interval,
            },
            disturbances,
            scheme: file.scheme,
            horizon: file.horizon,
            dt: file.dt,
            record_stride: file.record_stride,
        })
    }
}

impl From<&Scenario> for ScenarioFile {
    fn from(s: &Scenario) -> Self {
        ScenarioFile {
            nodes: s
                .grid
                .nodes
                .iter()
                .enumerate()
                .map(|(i, n)| NodeEntry {
                    id: i + 1,
                    inertia: n.inertia,
                    droop: n.droop,
                    cost: n.cost,
                    fixed_power: n.fixed_power,
                })
                .collect(),
            lines: s
                .grid
                .lines
                .iter()
                .map(|l| LineEntry {
                    from: l.from + 1,
                    to: l.to + 1,
                    b: Some(l.susceptance),
                    reactance: None,
                })
                .collect(),
            comm_links: s.comm.links.iter().map(|&(a, b)| [a + 1, b + 1]).collect(),
            comm_failures: s
                .comm
                .failures
                .iter()
                .map(|f| FailureEntry {
                    link: [f.link.0 + 1, f.link.1 + 1],
                    time: f.time,
                })
                .collect(),
            message_interval: match s.comm.message_interval {
                MessageInterval::Continuous => IntervalEntry::Named("continuous".into()),
                MessageInterval::Every(t) => IntervalEntry::Seconds(t),
            },
            disturbances: s
                .disturbances
                .iter()
                .map(|d| DisturbanceEntry {
                    time: d.time,
                    node: d.node + 1,
                    delta_p: d.delta_p,
                })
                .collect(),
            scheme: s.scheme,
            horizon: s.horizon,
            dt: s.dt,
            record_stride: s.record_stride,
        }
    }
}
