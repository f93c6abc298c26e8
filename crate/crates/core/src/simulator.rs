//! Fixed-step integration of the closed loop.
//!
//! The plant is the linearized swing equation at each node and the DC flow
//! dynamics on each line:
//!
//! ```text
//! M_j dw_j/dt  = -D_j w_j + p_j(t) + u_j - sum_k f_jk
//! df_ij/dt     = B_ij (w_i - w_j)
//! ```
//!
//! Events are applied only at step boundaries. At a boundary they run in the
//! order: continuous-message refresh, disturbances, communication failures
//! (with artificial-variable initialization), sampled-message refresh,
//! sequential link rotation (with re-initialization of the active pair).

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use serde::{Serialize, Serializer};

use crate::controllers::{
    self, control_rates_into, init_artificial, shared_links, ControlContext, LiveLinks,
    NeighborValues,
};
use crate::dispatch::{cost_paper_unchecked, optimal_dispatch};
use crate::error::{Error, Result};
use crate::grid_model::{validate, CommGraph, MessageInterval, PowerGrid, Scenario, Scheme};
use crate::state::{StateDerivative, StateView, SystemState};

/// Band around the optimal cost used by the convergence-time metric.
pub const CONVERGENCE_BAND: f64 = 0.01;

/// Everything the derivative needs besides the state itself. Frozen between
/// step boundaries.
#[derive(Clone, Copy, Debug)]
pub struct ClosedLoop<'a> {
    pub grid: &'a PowerGrid,
    pub links: &'a LiveLinks,
    pub ctx: &'a ControlContext,
    /// Current unadjustable power per node.
    pub injections: &'a [f64],
    pub values: NeighborValues,
}

/// Time derivative of the full closed-loop state.
pub fn derivative(state: &SystemState, model: &ClosedLoop<'_>) -> Result<StateDerivative> {
    let n = model.grid.node_count();
    let e = model.grid.line_count();
    if state.node_count() != n {
        return Err(Error::dim("state nodes", n, state.node_count()));
    }
    if state.line_count() != e {
        return Err(Error::dim("state lines", e, state.line_count()));
    }
    if model.injections.len() != n {
        return Err(Error::dim("injections", n, model.injections.len()));
    }
    let mut out = vec![0.0; 3 * n + e];
    derivative_into(state.view(), &state.last_rx, model, &mut out)?;
    let view = StateView::from_flat(&out, n, e);
    Ok(StateDerivative {
        omega: view.omega.to_vec(),
        flow: view.flow.to_vec(),
        u: view.u.to_vec(),
        q: view.q.to_vec(),
    })
}

pub(crate) fn derivative_into(
    x: StateView<'_>,
    last_rx: &[Option<f64>],
    model: &ClosedLoop<'_>,
    out: &mut [f64],
) -> Result<()> {
    let grid = model.grid;
    let n = grid.node_count();
    let e = grid.line_count();
    let (d_omega, rest) = out.split_at_mut(n);
    let (d_flow, rest) = rest.split_at_mut(e);
    let (d_u, d_q) = rest.split_at_mut(n);

    for (j, node) in grid.nodes.iter().enumerate() {
        d_omega[j] = -node.droop * x.omega[j] + model.injections[j] + x.u[j];
    }
    for (k, line) in grid.lines.iter().enumerate() {
        d_omega[line.from] -= x.flow[k];
        d_omega[line.to] += x.flow[k];
        d_flow[k] = line.susceptance * (x.omega[line.from] - x.omega[line.to]);
    }
    for (j, node) in grid.nodes.iter().enumerate() {
        d_omega[j] /= node.inertia;
    }
    control_rates_into(
        x,
        last_rx,
        grid,
        model.links,
        model.ctx,
        model.values,
        d_u,
        d_q,
    )
}

/// Kind of a logged event.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Disturbance,
    CommFailure,
    ArtificialInit,
    Schedule,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SystemState>,
    pub cost_series: Vec<f64>,
    pub events: Vec<Event>,
    /// `max_t max_j |w_j(t)|` over every integration step, not only the
    /// recorded samples.
    pub max_freq_excursion: f64,
}

impl Trajectory {
    pub fn last(&self) -> &SystemState {
        self.states
            .last()
            .expect("trajectory holds at least the initial state")
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(|e| e.kind == EventKind::Warning)
    }

    /// Time of the last disturbance, or 0 when there is none.
    pub fn last_disturbance(&self) -> f64 {
        self.events
            .iter()
            .filter(|e| e.kind == EventKind::Disturbance)
            .map(|e| e.time)
            .fold(0.0, f64::max)
    }

    /// CSV with header `t,omega_1..N,u_1..N,q_1..N,f_1..E,cost_paper`,
    /// 9 significant digits, LF line endings.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let first = &self.states[0];
        let n = first.node_count();
        let e = first.line_count();
        let mut header = vec!["t".to_string()];
        for prefix in ["omega", "u", "q"] {
            header.extend((1..=n).map(|i| format!("{prefix}_{i}")));
        }
        header.extend((1..=e).map(|k| format!("f_{k}")));
        header.push("cost_paper".into());
        w.write_all(header.join(",").as_bytes())?;
        w.write_all(b"\n")?;

        let mut line = String::new();
        for ((t, s), cost) in self.times.iter().zip(&self.states).zip(&self.cost_series) {
            line.clear();
            line.push_str(&format_sig9(*t));
            for v in s.omega.iter().chain(&s.u).chain(&s.q).chain(&s.flow) {
                line.push(',');
                line.push_str(&format_sig9(*v));
            }
            line.push(',');
            line.push_str(&format_sig9(*cost));
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
        Ok(())
    }
}

/// Formats like C's `%.9g`.
pub fn format_sig9(x: f64) -> String {
    const DIGITS: i32 = 9;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Convergence time, or the marker for a run that never settled.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConvergenceTime {
    At(f64),
    NotConverged,
}

impl ConvergenceTime {
    pub fn seconds(&self) -> Option<f64> {
        match *self {
            ConvergenceTime::At(t) => Some(t),
            ConvergenceTime::NotConverged => None,
        }
    }

    /// Seconds, with `NotConverged` ordered after every finite time.
    pub fn or_infinity(&self) -> f64 {
        self.seconds().unwrap_or(f64::INFINITY)
    }

    pub fn is_converged(&self) -> bool {
        self.seconds().is_some()
    }
}

impl Serialize for ConvergenceTime {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            ConvergenceTime::At(t) => s.serialize_f64(t),
            ConvergenceTime::NotConverged => s.serialize_str("NOT_CONVERGED"),
        }
    }
}

impl std::fmt::Display for ConvergenceTime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConvergenceTime::At(t) => write!(f, "{t}"),
            ConvergenceTime::NotConverged => f.write_str("NOT_CONVERGED"),
        }
    }
}

/// First recorded time at or after the last disturbance from which the cost
/// stays within [`CONVERGENCE_BAND`] of `cost_star` for the rest of the run.
pub fn convergence_time(traj: &Trajectory, cost_star: f64) -> ConvergenceTime {
    let start = traj.last_disturbance();
    let mut settled = None;
    for (&t, &c) in traj.times.iter().zip(&traj.cost_series) {
        if t < start {
            continue;
        }
        if (c - cost_star).abs() < CONVERGENCE_BAND {
            settled.get_or_insert(t);
        } else {
            settled = None;
        }
    }
    settled.map_or(ConvergenceTime::NotConverged, ConvergenceTime::At)
}

/// Raw first entry into the band after the last disturbance.
pub fn first_crossing(traj: &Trajectory, cost_star: f64) -> ConvergenceTime {
    let start = traj.last_disturbance();
    traj.times
        .iter()
        .zip(&traj.cost_series)
        .find(|(&t, &c)| t >= start && (c - cost_star).abs() < CONVERGENCE_BAND)
        .map_or(ConvergenceTime::NotConverged, |(&t, _)| {
            ConvergenceTime::At(t)
        })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub scheme: Scheme,
    pub steady_u: Vec<f64>,
    pub steady_cost_paper: f64,
    /// Optimal cost for the post-disturbance fixed powers.
    pub cost_star: f64,
    pub convergence_time: ConvergenceTime,
    pub first_crossing: ConvergenceTime,
    pub max_freq_excursion: f64,
    /// `max_j |w_j|` at the final sample.
    pub final_max_abs_omega: f64,
    pub warnings: Vec<String>,
}

/// Initial operating point: `w = 0`, `u = 0`, `q = 0` and the minimum-norm
/// line flows that balance the initial injections.
pub fn initial_state(scenario: &Scenario) -> SystemState {
    let grid = &scenario.grid;
    let n = grid.node_count();
    let e = grid.line_count();
    let mut state = SystemState::zeros(n, e, scenario.comm.links.len());
    if e > 0 {
        let a: DMatrix<f64> = grid.incidence();
        let p = DVector::from_vec(grid.fixed_powers());
        let flows = a
            .svd(true, true)
            .solve(&p, 1e-12)
            .expect("SVD with both factors computed");
        state.flow = flows.iter().copied().collect();
    }
    state
}

pub fn integrate(scenario: &Scenario) -> Result<Trajectory> {
    integrate_from(scenario, initial_state(scenario))
}

/// Integrates starting from a caller-supplied state (its `t` is ignored; runs
/// always start at 0).
pub fn integrate_from(scenario: &Scenario, initial: SystemState) -> Result<Trajectory> {
    let violations = validate(scenario);
    if !violations.is_empty() {
        return Err(Error::InvalidScenario(violations));
    }
    let n = scenario.grid.node_count();
    let e = scenario.grid.line_count();
    if initial.node_count() != n || initial.line_count() != e {
        return Err(Error::dim(
            "initial state size",
            3 * n + e,
            3 * initial.node_count() + initial.line_count(),
        ));
    }
    if initial.last_rx.len() != 2 * scenario.comm.links.len() {
        return Err(Error::dim(
            "initial last_rx",
            2 * scenario.comm.links.len(),
            initial.last_rx.len(),
        ));
    }
    Runner::new(scenario, initial).run()
}

pub fn run_scenario(scenario: &Scenario) -> Result<(Trajectory, RunSummary)> {
    let traj = integrate(scenario)?;
    let summary = summarize(scenario, &traj)?;
    Ok((traj, summary))
}

pub fn summarize(scenario: &Scenario, traj: &Trajectory) -> Result<RunSummary> {
    let optimum = optimal_dispatch(&scenario.grid, &scenario.steady_fixed_powers())?;
    let last = traj.last();
    Ok(RunSummary {
        scheme: scenario.scheme,
        steady_u: last.u.clone(),
        steady_cost_paper: *traj.cost_series.last().expect("nonempty"),
        cost_star: optimum.cost_paper,
        convergence_time: convergence_time(traj, optimum.cost_paper),
        first_crossing: first_crossing(traj, optimum.cost_paper),
        max_freq_excursion: traj.max_freq_excursion,
        final_max_abs_omega: last.omega.iter().fold(0.0, |m, w| m.max(w.abs())),
        warnings: traj.warnings().map(|w| w.detail.clone()).collect(),
    })
}

fn step_of(time: f64, dt: f64) -> usize {
    (time / dt - 1e-9).ceil().max(0.0) as usize
}

struct Runner<'a> {
    scenario: &'a Scenario,
    state: SystemState,
    injections: Vec<f64>,
    failed: Vec<bool>,
    links: LiveLinks,
    ctx: ControlContext,
    values: NeighborValues,
    sample_every: Option<usize>,
    disturbance_steps: Vec<(usize, usize)>,
    failure_steps: Vec<(usize, usize)>,
    events: Vec<Event>,
}

impl<'a> Runner<'a> {
    fn new(scenario: &'a Scenario, mut initial: SystemState) -> Self {
        let n = scenario.grid.node_count();
        let dt = scenario.dt;
        initial.t = 0.0;
        let sample_every = match scenario.comm.message_interval {
            MessageInterval::Continuous => None,
            MessageInterval::Every(t) => Some(((t / dt).round() as usize).max(1)),
        };
        let values = match (scenario.scheme, sample_every) {
            (Scheme::Consensus, _) | (_, None) => NeighborValues::Instantaneous,
            (_, Some(_)) => NeighborValues::Held,
        };
        let mut disturbance_steps: Vec<(usize, usize)> = scenario
            .disturbances
            .iter()
            .enumerate()
            .map(|(k, d)| (step_of(d.time, dt), k))
            .collect();
        disturbance_steps.sort();
        let mut failure_steps: Vec<(usize, usize)> = scenario
            .comm
            .failures
            .iter()
            .enumerate()
            .map(|(k, f)| (step_of(f.time, dt), k))
            .collect();
        failure_steps.sort();
        let ctx = ControlContext::consensus(scenario.scheme, n);
        Self {
            scenario,
            state: initial,
            injections: scenario.grid.fixed_powers(),
            failed: vec![false; scenario.comm.links.len()],
            links: LiveLinks::all(n, &scenario.comm),
            ctx,
            values,
            sample_every,
            disturbance_steps,
            failure_steps,
            events: Vec::new(),
        }
    }

    fn comm(&self) -> &'a CommGraph {
        &self.scenario.comm
    }

    fn log(&mut self, kind: EventKind, detail: String) {
        self.events.push(Event {
            time: self.state.t,
            kind,
            detail,
        });
    }

    fn live(&self) -> Vec<usize> {
        (0..self.failed.len())
            .filter(|&k| !self.failed[k])
            .collect()
    }

    fn refresh_messages(&mut self) {
        let comm = self.comm();
        let grid = &self.scenario.grid;
        for k in 0..comm.links.len() {
            if self.failed[k] {
                continue;
            }
            let (a, b) = comm.links[k];
            self.state.last_rx[2 * k] = Some(grid.nodes[a].cost * self.state.u[a]);
            self.state.last_rx[2 * k + 1] = Some(grid.nodes[b].cost * self.state.u[b]);
        }
    }

    fn process_instant(&mut self, step: usize) -> Result<()> {
        let grid = &self.scenario.grid;
        let scheme = self.scenario.scheme;
        if self.sample_every.is_none() {
            self.refresh_messages();
        }

        while let Some(&(s, k)) = self.disturbance_steps.first() {
            if s != step {
                break;
            }
            self.disturbance_steps.remove(0);
            let d = self.scenario.disturbances[k];
            self.injections[d.node] += d.delta_p;
            self.log(
                EventKind::Disturbance,
                format!("node {}: fixed power {:+}", d.node + 1, d.delta_p),
            );
        }

        let mut newly_failed = Vec::new();
        while let Some(&(s, k)) = self.failure_steps.first() {
            if s != step {
                break;
            }
            self.failure_steps.remove(0);
            let (a, b) = self.comm().failures[k].link;
            if let Some(idx) = self.comm().link_index(a, b) {
                if !self.failed[idx] {
                    self.failed[idx] = true;
                    newly_failed.push((a, b));
                    self.log(EventKind::CommFailure, format!("link {}-{}", a + 1, b + 1));
                }
            }
        }
        if !newly_failed.is_empty() {
            self.links = LiveLinks::new(grid.node_count(), self.comm(), &self.live());
            if matches!(scheme, Scheme::HybridSingle | Scheme::MultiFailure) {
                self.switch_failed_nodes(&newly_failed);
            }
        }

        let at_sample = self
            .sample_every
            .is_some_and(|every| step.is_multiple_of(every));
        if at_sample {
            self.refresh_messages();
        }

        if step == 0 && scheme == Scheme::PairFlow {
            self.ctx = ControlContext::all_lines(scheme, grid);
            let init = init_artificial(&self.state, grid, self.comm(), &self.ctx);
            self.state.q = init.q;
            self.log_init(init.warnings);
        }

        if scheme == Scheme::Sequential && at_sample {
            let every = self.sample_every.expect("sampled");
            let k = step / every;
            let shared = shared_links(grid, self.comm(), &self.live());
            if step == 0 {
                let listing: Vec<String> = shared
                    .iter()
                    .map(|(a, b)| format!("{}-{}", a + 1, b + 1))
                    .collect();
                self.log(
                    EventKind::Schedule,
                    format!("shared links: {}", listing.join(", ")),
                );
            }
            let link = controllers::sequential_active_link(k, &shared)?;
            self.ctx = ControlContext::sequential(grid, link)?;
            let init = init_artificial(&self.state, grid, self.comm(), &self.ctx);
            self.state.q = init.q;
            self.log_init_quiet(init.warnings);
        }
        Ok(())
    }

    fn switch_failed_nodes(&mut self, newly_failed: &[(usize, usize)]) {
        let grid = &self.scenario.grid;
        let comm = self.comm();
        let failed_pairs: Vec<(usize, usize)> = (0..comm.links.len())
            .filter(|&k| self.failed[k])
            .map(|k| comm.links[k])
            .collect();
        let old = std::mem::replace(
            &mut self.ctx,
            ControlContext::from_failed_links(self.scenario.scheme, grid, &failed_pairs),
        );
        let mut warnings = Vec::new();
        let mut q = self.state.q.clone();
        for &i in self.ctx.flow_nodes() {
            if old.is_flow_node(i) {
                for &j in self.ctx.pair_neighbors(i) {
                    if !old.pair_neighbors(i).contains(&j) {
                        q[i] +=
                            controllers::pair_term(i, j, &self.state, grid, comm, &mut warnings);
                    }
                }
            } else {
                q[i] = controllers::artificial_for(
                    i,
                    &self.state,
                    grid,
                    comm,
                    &self.ctx,
                    &mut warnings,
                );
            }
        }
        self.state.q = q;
        let switched: Vec<String> = newly_failed
            .iter()
            .filter(|&&(a, b)| grid.line_between(a, b).is_some())
            .map(|(a, b)| format!("{}-{}", a + 1, b + 1))
            .collect();
        if !switched.is_empty() {
            let detail = format!(
                "flow control on {}; q = [{}]",
                switched.join(", "),
                self.ctx
                    .flow_nodes()
                    .iter()
                    .map(|&i| format!("{}: {:.6}", i + 1, self.state.q[i]))
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            self.log(EventKind::ArtificialInit, detail);
        }
        for w in warnings {
            self.log(EventKind::Warning, w);
        }
    }

    fn log_init(&mut self, warnings: Vec<String>) {
        let detail = format!(
            "q = [{}]",
            self.ctx
                .flow_nodes()
                .iter()
                .map(|&i| format!("{}: {:.6}", i + 1, self.state.q[i]))
                .collect::<Vec<_>>()
                .join(", ")
        );
        self.log(EventKind::ArtificialInit, detail);
        for w in warnings {
            self.log(EventKind::Warning, w);
        }
    }

    fn log_init_quiet(&mut self, warnings: Vec<String>) {
        for w in warnings {
            self.log(EventKind::Warning, w);
        }
    }

    fn run(mut self) -> Result<Trajectory> {
        let scenario = self.scenario;
        let grid = &scenario.grid;
        let n = grid.node_count();
        let e = grid.line_count();
        let dt = scenario.dt;
        let steps = ((scenario.horizon / dt).round() as usize).max(1);
        let dim = 3 * n + e;

        let mut times = Vec::new();
        let mut states = Vec::new();
        let mut cost_series = Vec::new();
        let mut max_excursion = 0.0f64;

        self.process_instant(0)?;
        let record = |s: &SystemState,
                      times: &mut Vec<f64>,
                      states: &mut Vec<SystemState>,
                      costs: &mut Vec<f64>| {
            times.push(s.t);
            costs.push(cost_paper_unchecked(grid, &s.u));
            states.push(s.clone());
        };
        record(&self.state, &mut times, &mut states, &mut cost_series);
        max_excursion = self
            .state
            .omega
            .iter()
            .fold(max_excursion, |m, w| m.max(w.abs()));

        let mut x = self.state.to_vector();
        let mut k1 = vec![0.0; dim];
        let mut k2 = vec![0.0; dim];
        let mut k3 = vec![0.0; dim];
        let mut k4 = vec![0.0; dim];
        let mut probe = vec![0.0; dim];

        for step in 1..=steps {
            {
                let model = ClosedLoop {
                    grid,
                    links: &self.links,
                    ctx: &self.ctx,
                    injections: &self.injections,
                    values: self.values,
                };
                let rx = &self.state.last_rx;
                derivative_into(StateView::from_flat(&x, n, e), rx, &model, &mut k1)?;
                for i in 0..dim {
                    probe[i] = x[i] + 0.5 * dt * k1[i];
                }
                derivative_into(StateView::from_flat(&probe, n, e), rx, &model, &mut k2)?;
                for i in 0..dim {
                    probe[i] = x[i] + 0.5 * dt * k2[i];
                }
                derivative_into(StateView::from_flat(&probe, n, e), rx, &model, &mut k3)?;
                for i in 0..dim {
                    probe[i] = x[i] + dt * k3[i];
                }
                derivative_into(StateView::from_flat(&probe, n, e), rx, &model, &mut k4)?;
                for i in 0..dim {
                    probe[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
            if !probe.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite {
                    step,
                    time: step as f64 * dt,
                    last_finite: Box::new(self.state.clone()),
                });
            }
            std::mem::swap(&mut x, &mut probe);
            self.state.load_vector(&x);
            self.state.t = step as f64 * dt;
            max_excursion = self
                .state
                .omega
                .iter()
                .fold(max_excursion, |m, w| m.max(w.abs()));

            // events may overwrite q, so push the state back afterwards
            self.process_instant(step)?;
            x.copy_from_slice(&self.state.to_vector());

            if step % scenario.record_stride == 0 || step == steps {
                record(&self.state, &mut times, &mut states, &mut cost_series);
            }
        }

        Ok(Trajectory {
            times,
            states,
            cost_series,
            events: self.events,
            max_freq_excursion: max_excursion,
        })
    }
}
