//! Physical grid, communication overlay and scenario description.
//!
//! Node and line indices are 0-based in this module. Scenario files and all
//! user-facing output use 1-based indices (see [`crate::scenario_file`]).

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Per-node swing-equation and cost parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeParams {
    /// Inertia `M_j` (p.u. s^2), must be positive.
    pub inertia: f64,
    /// Droop coefficient `D_j` (p.u./Hz), nonnegative.
    pub droop: f64,
    /// Cost coefficient `C_j` of the adjustable power, must be positive.
    pub cost: f64,
    /// Unadjustable power `p_j` (generation positive, load negative).
    pub fixed_power: f64,
}

/// A power line oriented `from -> to` with `from < to`. Flow on the line is
/// signed relative to this orientation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Line {
    pub from: usize,
    pub to: usize,
    pub susceptance: f64,
}

impl Line {
    pub fn other(&self, node: usize) -> Option<usize> {
        if node == self.from {
            Some(self.to)
        } else if node == self.to {
            Some(self.from)
        } else {
            None
        }
    }

    /// +1 if `node` is the tail of the line, -1 if the head, 0 otherwise.
    pub fn orientation(&self, node: usize) -> f64 {
        if node == self.from {
            1.0
        } else if node == self.to {
            -1.0
        } else {
            0.0
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerGrid {
    pub nodes: Vec<NodeParams>,
    pub lines: Vec<Line>,
}

impl PowerGrid {
    pub fn new(nodes: Vec<NodeParams>, lines: Vec<Line>) -> Self {
        Self { nodes, lines }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn line_count(&self) -> usize {
        self.lines.len()
    }

    pub fn costs(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.cost).collect()
    }

    pub fn fixed_powers(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.fixed_power).collect()
    }

    /// Index of the line joining `a` and `b`, in either orientation.
    pub fn line_between(&self, a: usize, b: usize) -> Option<usize> {
        self.lines
            .iter()
            .position(|l| (l.from == a && l.to == b) || (l.from == b && l.to == a))
    }

    /// Node-edge incidence matrix `A_p` (N x E): +1 at the tail, -1 at the head.
    pub fn incidence(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.node_count(), self.line_count());
        for (e, line) in self.lines.iter().enumerate() {
            a[(line.from, e)] = 1.0;
            a[(line.to, e)] = -1.0;
        }
        a
    }

    /// Susceptance-weighted Laplacian `L_p^B = A_p B A_p^T`.
    pub fn weighted_laplacian(&self) -> DMatrix<f64> {
        let n = self.node_count();
        let mut l = DMatrix::zeros(n, n);
        for line in &self.lines {
            let b = line.susceptance;
            l[(line.from, line.from)] += b;
            l[(line.to, line.to)] += b;
            l[(line.from, line.to)] -= b;
            l[(line.to, line.from)] -= b;
        }
        l
    }

    pub fn is_connected(&self) -> bool {
        let pairs: Vec<(usize, usize)> = self.lines.iter().map(|l| (l.from, l.to)).collect();
        is_connected(self.node_count(), &pairs)
    }
}

/// Spacing of communication messages.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum MessageInterval {
    #[default]
    Continuous,
    /// Messages are exchanged at instants `K * T`, `K >= 0`.
    Every(f64),
}

impl MessageInterval {
    pub fn period(&self) -> Option<f64> {
        match *self {
            MessageInterval::Continuous => None,
            MessageInterval::Every(t) => Some(t),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CommFailure {
    pub link: (usize, usize),
    /// Failure instant `t0` (s).
    pub time: f64,
}

/// Communication overlay: undirected links, scheduled failures and the
/// message interval.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct CommGraph {
    pub links: Vec<(usize, usize)>,
    pub failures: Vec<CommFailure>,
    pub message_interval: MessageInterval,
}

impl CommGraph {
    /// Index of the link joining `a` and `b`, in either orientation.
    pub fn link_index(&self, a: usize, b: usize) -> Option<usize> {
        self.links
            .iter()
            .position(|&(x, y)| (x == a && y == b) || (x == b && y == a))
    }

    /// Whether the link with index `idx` has failed at or before `t`.
    pub fn is_failed_at(&self, idx: usize, t: f64) -> bool {
        let (a, b) = self.links[idx];
        self.failures
            .iter()
            .any(|f| f.time <= t && same_pair(f.link, (a, b)))
    }

    /// Indices of links that are still up at time `t`.
    pub fn live_at(&self, t: f64) -> Vec<usize> {
        (0..self.links.len())
            .filter(|&i| !self.is_failed_at(i, t))
            .collect()
    }

    /// Unweighted Laplacian over the given subset of links.
    pub fn laplacian(&self, n: usize, live: &[usize]) -> DMatrix<f64> {
        let mut l = DMatrix::zeros(n, n);
        for &idx in live {
            let (a, b) = self.links[idx];
            l[(a, a)] += 1.0;
            l[(b, b)] += 1.0;
            l[(a, b)] -= 1.0;
            l[(b, a)] -= 1.0;
        }
        l
    }

    /// Communication graph identical to the power topology.
    pub fn mirror_of(grid: &PowerGrid) -> Self {
        Self {
            links: grid.lines.iter().map(|l| (l.from, l.to)).collect(),
            failures: Vec::new(),
            message_interval: MessageInterval::Continuous,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DisturbanceEvent {
    pub time: f64,
    pub node: usize,
    /// Step change added to the node's fixed power.
    pub delta_p: f64,
}

/// Control law selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Scheme {
    /// Consensus on marginal costs with instantaneous neighbor values.
    Consensus,
    /// Consensus with zero-order-held neighbor values refreshed every `T`.
    ConsensusSampled,
    /// Every power line couples its endpoints through flow-driven artificial
    /// variables; no messages are used.
    PairFlow,
    /// Consensus, switching the endpoints of a single failed link to the
    /// flow-driven law.
    HybridSingle,
    /// Consensus, switching every node that lost a link to a power neighbor to
    /// the flow-driven law.
    MultiFailure,
    /// Sampled consensus with one shared power/communication link per interval
    /// run on the flow-driven law, rotating round-robin.
    Sequential,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::Consensus,
        Scheme::ConsensusSampled,
        Scheme::PairFlow,
        Scheme::HybridSingle,
        Scheme::MultiFailure,
        Scheme::Sequential,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Scheme::Consensus => "CONSENSUS",
            Scheme::ConsensusSampled => "CONSENSUS_SAMPLED",
            Scheme::PairFlow => "PAIR_FLOW",
            Scheme::HybridSingle => "HYBRID_SINGLE",
            Scheme::MultiFailure => "MULTI_FAILURE",
            Scheme::Sequential => "SEQUENTIAL",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Scheme> {
        Scheme::ALL.into_iter().find(|s| s.tag() == tag)
    }

    pub fn needs_sampling(&self) -> bool {
        matches!(self, Scheme::ConsensusSampled | Scheme::Sequential)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub grid: PowerGrid,
    pub comm: CommGraph,
    pub disturbances: Vec<DisturbanceEvent>,
    pub scheme: Scheme,
    /// Simulated time span (s).
    pub horizon: f64,
    /// Integration step (s).
    pub dt: f64,
    /// Steps between recorded samples.
    pub record_stride: usize,
}

impl Scenario {
    /// Fixed powers once every disturbance has been applied.
    pub fn steady_fixed_powers(&self) -> Vec<f64> {
        let mut p = self.grid.fixed_powers();
        for d in &self.disturbances {
            if d.node < p.len() {
                p[d.node] += d.delta_p;
            }
        }
        p
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_message_interval(mut self, interval: MessageInterval) -> Self {
        self.comm.message_interval = interval;
        self
    }

    /// Adds a failure of the link `a`-`b` (0-based) at time `t`.
    pub fn with_failure(mut self, a: usize, b: usize, t: f64) -> Self {
        self.comm.failures.push(CommFailure {
            link: (a, b),
            time: t,
        });
        self
    }

    pub fn without_comm(mut self) -> Self {
        self.comm.links.clear();
        self.comm.failures.clear();
        self
    }
}

pub(crate) fn same_pair(a: (usize, usize), b: (usize, usize)) -> bool {
    (a.0 == b.0 && a.1 == b.1) || (a.0 == b.1 && a.1 == b.0)
}

fn is_connected(n: usize, pairs: &[(usize, usize)]) -> bool {
    if n == 0 {
        return false;
    }
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in pairs {
        if a < n && b < n {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Every invariant violation of `scenario`, as human-readable messages with
/// 1-based node numbers. An empty list means the scenario is valid.
pub fn validate(scenario: &Scenario) -> Vec<String> {
    let mut out = Vec::new();
    let grid = &scenario.grid;
    let n = grid.node_count();

    if n == 0 {
        out.push("grid has no nodes".to_string());
    }
    for (i, node) in grid.nodes.iter().enumerate() {
        let id = i + 1;
        if !(node.inertia > 0.0 && node.inertia.is_finite()) {
            out.push(format!(
                "node {id}: inertia must be positive, got {}",
                node.inertia
            ));
        }
        if !(node.droop >= 0.0 && node.droop.is_finite()) {
            out.push(format!(
                "node {id}: droop must be nonnegative, got {}",
                node.droop
            ));
        }
        if !(node.cost > 0.0 && node.cost.is_finite()) {
            out.push(format!(
                "node {id}: cost must be positive, got {}",
                node.cost
            ));
        }
        if !node.fixed_power.is_finite() {
            out.push(format!("node {id}: fixed power is not finite"));
        }
    }

    let mut seen_lines = BTreeSet::new();
    let mut lines_ok = true;
    for (e, line) in grid.lines.iter().enumerate() {
        let tag = format!("line {} ({}-{})", e + 1, line.from + 1, line.to + 1);
        if line.from >= n || line.to >= n {
            out.push(format!("{tag}: endpoint outside the node range 1..={n}"));
            lines_ok = false;
            continue;
        }
        if line.from == line.to {
            out.push(format!("{tag}: self-loop"));
            lines_ok = false;
        } else if line.from > line.to {
            out.push(format!("{tag}: orientation must have from < to"));
        }
        if !seen_lines.insert((line.from.min(line.to), line.from.max(line.to))) {
            out.push(format!("{tag}: duplicate line"));
        }
        if !(line.susceptance > 0.0 && line.susceptance.is_finite()) {
            out.push(format!(
                "{tag}: susceptance must be positive, got {}",
                line.susceptance
            ));
        }
    }
    if n > 0 && lines_ok && !grid.is_connected() {
        out.push("power grid is not connected".to_string());
    }

    let comm = &scenario.comm;
    let mut seen_links = BTreeSet::new();
    for &(a, b) in &comm.links {
        let tag = format!("comm link {}-{}", a + 1, b + 1);
        if a >= n || b >= n {
            out.push(format!("{tag}: endpoint outside the node range 1..={n}"));
        } else if a == b {
            out.push(format!("{tag}: self-loop"));
        } else if !seen_links.insert((a.min(b), a.max(b))) {
            out.push(format!("{tag}: duplicate link"));
        }
    }
    for f in &comm.failures {
        let (a, b) = f.link;
        if comm.link_index(a, b).is_none() {
            out.push(format!(
                "comm failure {}-{}: link is not part of the communication graph",
                a + 1,
                b + 1
            ));
        }
        if !(f.time >= 0.0 && f.time.is_finite()) {
            out.push(format!(
                "comm failure {}-{}: time must be >= 0",
                a + 1,
                b + 1
            ));
        }
    }
    if let MessageInterval::Every(t) = comm.message_interval {
        if !(t > 0.0 && t.is_finite()) {
            out.push(format!("message interval must be positive, got {t}"));
        } else if scenario.dt > 0.0 {
            let ratio = t / scenario.dt;
            if ratio < 1.0 - 1e-9 || (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
                out.push(format!(
                    "message interval {t} is not an integer multiple of dt {}",
                    scenario.dt
                ));
            }
        }
    }

    for d in &scenario.disturbances {
        if d.node >= n {
            out.push(format!("disturbance at node {}: no such node", d.node + 1));
        }
        if !(d.time >= 0.0 && d.time.is_finite()) {
            out.push(format!(
                "disturbance at node {}: time must be >= 0",
                d.node + 1
            ));
        }
        if !d.delta_p.is_finite() {
            out.push(format!(
                "disturbance at node {}: delta_p is not finite",
                d.node + 1
            ));
        }
    }

    if !(scenario.dt > 0.0 && scenario.dt.is_finite()) {
        out.push(format!("dt must be positive, got {}", scenario.dt));
    }
    if !(scenario.horizon >= scenario.dt && scenario.horizon.is_finite()) {
        out.push(format!(
            "horizon {} must be finite and at least dt {}",
            scenario.horizon, scenario.dt
        ));
    }
    if scenario.record_stride == 0 {
        out.push("record_stride must be at least 1".to_string());
    }

    out.extend(scheme_violations(scenario));
    out
}

fn scheme_violations(scenario: &Scenario) -> Vec<String> {
    let mut out = Vec::new();
    let scheme = scenario.scheme;
    if scheme.needs_sampling() && scenario.comm.message_interval == MessageInterval::Continuous {
        out.push(format!(
            "scheme {scheme} requires a finite message interval"
        ));
    }
    if scheme == Scheme::HybridSingle {
        let failures = &scenario.comm.failures;
        if failures.len() != 1 {
            out.push(format!(
                "scheme {scheme} requires exactly one comm failure, got {}",
                failures.len()
            ));
        } else {
            let (a, b) = failures[0].link;
            if scenario.grid.line_between(a, b).is_none() {
                out.push(format!(
                    "scheme {scheme}: failed link {}-{} has no parallel power line; use CONSENSUS on the surviving graph",
                    a + 1,
                    b + 1
                ));
            }
        }
    }
    if scheme == Scheme::PairFlow && scenario.grid.lines.is_empty() {
        out.push(format!("scheme {scheme} requires at least one power line"));
    }
    if scheme == Scheme::Sequential {
        let shared = scenario
            .comm
            .links
            .iter()
            .filter(|&&(a, b)| scenario.grid.line_between(a, b).is_some())
            .count();
        if shared == 0 {
            out.push(format!(
                "scheme {scheme} requires at least one link shared by the power and communication graphs"
            ));
        }
    }
    out
}

const TOY_GRID_JSON: &str = include_str!("../data/toy_grid.json");

/// The bundled ten-node example: its node data, line reactances and the
/// reconstructed line topology live in `data/toy_grid.json`. Communication
/// mirrors the power topology and node 3 takes a 5 p.u. load step at t = 1 s.
pub fn toy_grid() -> Scenario {
    crate::scenario_file::from_json(TOY_GRID_JSON).expect("bundled toy grid must parse")
}
