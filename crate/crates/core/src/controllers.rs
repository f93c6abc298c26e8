//! Control laws for the adjustable power.
//!
//! Every law is a pure rate function of the current state. Nodes outside the
//! flow-controlled set `F` run the marginal-cost consensus
//!
//! ```text
//! C_i du_i/dt = -w_i - C_i * sum_{(i,l) live} (C_i u_i - C_l u_l)
//! ```
//!
//! with either instantaneous or zero-order-held neighbor values. Nodes in `F`
//! ignore messages and use a local artificial variable driven by the
//! frequency difference across their flow-coupled power lines:
//!
//! ```text
//! C_i du_i/dt = -w_i - q_i
//! dq_i/dt     = -sum_{j in F, (i,j) line} (w_i - w_j) - 2 q_i
//! ```
//!
//! The frequency difference stands in for `df_ij/dt / B_ij`, which the node
//! can observe on its own line.

use crate::error::{Error, Result};
use crate::grid_model::{CommGraph, PowerGrid, Scheme};
use crate::state::{StateView, SystemState};

/// Live communication links seen from each node.
#[derive(Clone, Debug, PartialEq)]
pub struct LiveLinks {
    /// Per node: `(neighbor, last_rx slot of the value heard from it)`.
    neighbors: Vec<Vec<(usize, usize)>>,
}

impl LiveLinks {
    pub fn new(nodes: usize, comm: &CommGraph, live: &[usize]) -> Self {
        let mut neighbors = vec![Vec::new(); nodes];
        for &k in live {
            let (a, b) = comm.links[k];
            neighbors[a].push((b, 2 * k + 1));
            neighbors[b].push((a, 2 * k));
        }
        Self { neighbors }
    }

    /// Links that are up at time `t`.
    pub fn at(nodes: usize, comm: &CommGraph, t: f64) -> Self {
        Self::new(nodes, comm, &comm.live_at(t))
    }

    pub fn all(nodes: usize, comm: &CommGraph) -> Self {
        let every: Vec<usize> = (0..comm.links.len()).collect();
        Self::new(nodes, comm, &every)
    }

    pub fn none(nodes: usize) -> Self {
        Self {
            neighbors: vec![Vec::new(); nodes],
        }
    }

    pub fn neighbors(&self, node: usize) -> &[(usize, usize)] {
        &self.neighbors[node]
    }
}

/// `last_rx` slot holding what `receiver` heard from the other end of link `k`.
pub fn rx_slot(comm: &CommGraph, link: usize, receiver: usize) -> usize {
    if comm.links[link].0 == receiver {
        2 * link + 1
    } else {
        2 * link
    }
}

/// Which control law each node runs.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlContext {
    pub scheme: Scheme,
    flow_nodes: Vec<usize>,
    flow_mask: Vec<bool>,
    pair_edges: Vec<usize>,
    /// Per node: other endpoints of its flow-coupled lines.
    pair_neighbors: Vec<Vec<usize>>,
    active_link: Option<(usize, usize)>,
}

impl ControlContext {
    /// Every node runs consensus (`F` empty).
    pub fn consensus(scheme: Scheme, nodes: usize) -> Self {
        Self {
            scheme,
            flow_nodes: Vec::new(),
            flow_mask: vec![false; nodes],
            pair_edges: Vec::new(),
            pair_neighbors: vec![Vec::new(); nodes],
            active_link: None,
        }
    }

    /// Flow coupling over explicitly listed node pairs; each pair must be
    /// joined by a power line.
    pub fn with_pairs(scheme: Scheme, grid: &PowerGrid, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut lines = Vec::with_capacity(pairs.len());
        for &(a, b) in pairs {
            let line = grid.line_between(a, b).ok_or_else(|| {
                Error::Precondition(format!(
                    "nodes {} and {} are not adjacent in the power grid",
                    a + 1,
                    b + 1
                ))
            })?;
            lines.push(line);
        }
        Ok(Self::from_lines(scheme, grid, lines))
    }

    fn from_lines(scheme: Scheme, grid: &PowerGrid, mut lines: Vec<usize>) -> Self {
        let n = grid.node_count();
        lines.sort_unstable();
        lines.dedup();
        let mut flow_mask = vec![false; n];
        let mut pair_neighbors = vec![Vec::new(); n];
        for &e in &lines {
            let l = grid.lines[e];
            flow_mask[l.from] = true;
            flow_mask[l.to] = true;
            pair_neighbors[l.from].push(l.to);
            pair_neighbors[l.to].push(l.from);
        }
        let flow_nodes = (0..n).filter(|&i| flow_mask[i]).collect();
        Self {
            scheme,
            flow_nodes,
            flow_mask,
            pair_edges: lines,
            pair_neighbors,
            active_link: None,
        }
    }

    /// `F` = nodes that lost a communication link to a power neighbor; the
    /// coupled lines are all power lines with both endpoints in `F`.
    pub fn from_failed_links(scheme: Scheme, grid: &PowerGrid, failed: &[(usize, usize)]) -> Self {
        let n = grid.node_count();
        let mut in_f = vec![false; n];
        for &(a, b) in failed {
            if grid.line_between(a, b).is_some() {
                in_f[a] = true;
                in_f[b] = true;
            }
        }
        let lines = grid
            .lines
            .iter()
            .enumerate()
            .filter(|(_, l)| in_f[l.from] && in_f[l.to])
            .map(|(e, _)| e)
            .collect();
        Self::from_lines(scheme, grid, lines)
    }

    /// Every power line couples its endpoints.
    pub fn all_lines(scheme: Scheme, grid: &PowerGrid) -> Self {
        Self::from_lines(scheme, grid, (0..grid.line_count()).collect())
    }

    /// Sequential scheme with `link` as the active shared link.
    pub fn sequential(grid: &PowerGrid, link: (usize, usize)) -> Result<Self> {
        let mut ctx = Self::with_pairs(Scheme::Sequential, grid, &[link])?;
        ctx.active_link = Some(link);
        Ok(ctx)
    }

    pub fn flow_nodes(&self) -> &[usize] {
        &self.flow_nodes
    }

    pub fn pair_edges(&self) -> &[usize] {
        &self.pair_edges
    }

    pub fn active_link(&self) -> Option<(usize, usize)> {
        self.active_link
    }

    pub fn is_flow_node(&self, node: usize) -> bool {
        self.flow_mask[node]
    }

    pub fn pair_neighbors(&self, node: usize) -> &[usize] {
        &self.pair_neighbors[node]
    }
}

/// `du/dt` and `dq/dt` for every node.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlRates {
    pub du: Vec<f64>,
    pub dq: Vec<f64>,
}

/// Source of neighbor values in the consensus term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NeighborValues {
    Instantaneous,
    /// Zero-order hold on `last_rx`.
    Held,
}

/// Shared kernel behind every control law.
#[allow(clippy::too_many_arguments)]
pub(crate) fn control_rates_into(
    x: StateView<'_>,
    last_rx: &[Option<f64>],
    grid: &PowerGrid,
    links: &LiveLinks,
    ctx: &ControlContext,
    values: NeighborValues,
    du: &mut [f64],
    dq: &mut [f64],
) -> Result<()> {
    for (i, node) in grid.nodes.iter().enumerate() {
        let c = node.cost;
        if ctx.flow_mask[i] {
            du[i] = (-x.omega[i] - x.q[i]) / c;
            let mut coupling = 0.0;
            for &j in &ctx.pair_neighbors[i] {
                coupling += x.omega[i] - x.omega[j];
            }
            dq[i] = -coupling - 2.0 * x.q[i];
        } else {
            let own = c * x.u[i];
            let mut disagreement = 0.0;
            for &(l, slot) in links.neighbors(i) {
                let theirs = match values {
                    NeighborValues::Instantaneous => grid.nodes[l].cost * x.u[l],
                    NeighborValues::Held => last_rx[slot].ok_or_else(|| {
                        Error::Precondition(format!(
                            "node {} has no received value from node {}",
                            i + 1,
                            l + 1
                        ))
                    })?,
                };
                disagreement += own - theirs;
            }
            du[i] = -x.omega[i] / c - disagreement;
            dq[i] = 0.0;
        }
    }
    Ok(())
}

fn rates(
    state: &SystemState,
    grid: &PowerGrid,
    links: &LiveLinks,
    ctx: &ControlContext,
    values: NeighborValues,
) -> Result<ControlRates> {
    let n = grid.node_count();
    if state.node_count() != n {
        return Err(Error::dim("state nodes", n, state.node_count()));
    }
    let mut du = vec![0.0; n];
    let mut dq = vec![0.0; n];
    control_rates_into(
        state.view(),
        &state.last_rx,
        grid,
        links,
        ctx,
        values,
        &mut du,
        &mut dq,
    )?;
    Ok(ControlRates { du, dq })
}

/// Consensus with instantaneous neighbor values over `links`.
pub fn consensus_rate(state: &SystemState, grid: &PowerGrid, links: &LiveLinks) -> Vec<f64> {
    let ctx = ControlContext::consensus(Scheme::Consensus, grid.node_count());
    rates(state, grid, links, &ctx, NeighborValues::Instantaneous)
        .expect("instantaneous consensus has no failure modes")
        .du
}

/// Consensus where neighbor terms use the held samples in `state.last_rx`
/// while the node's own value stays continuous.
pub fn consensus_sampled_rate(
    state: &SystemState,
    grid: &PowerGrid,
    links: &LiveLinks,
) -> Result<Vec<f64>> {
    let ctx = ControlContext::consensus(Scheme::ConsensusSampled, grid.node_count());
    Ok(rates(state, grid, links, &ctx, NeighborValues::Held)?.du)
}

/// Flow-driven law for the nodes in `ctx`'s flow set; other entries are zero.
pub fn pair_flow_rate(
    state: &SystemState,
    grid: &PowerGrid,
    ctx: &ControlContext,
) -> Result<ControlRates> {
    if ctx.pair_edges.is_empty() {
        return Err(Error::Precondition(
            "pair flow control needs at least one coupled line".into(),
        ));
    }
    let all = rates(
        state,
        grid,
        &LiveLinks::none(grid.node_count()),
        ctx,
        NeighborValues::Instantaneous,
    )?;
    let keep = |v: Vec<f64>| {
        v.into_iter()
            .enumerate()
            .map(|(i, r)| if ctx.flow_mask[i] { r } else { 0.0 })
            .collect()
    };
    Ok(ControlRates {
        du: keep(all.du),
        dq: keep(all.dq),
    })
}

/// One failed link `(i, j)` with a parallel power line: `i` and `j` run the
/// flow-driven law, every other node keeps consensus over the surviving links
/// (including those to `i` and `j`).
pub fn hybrid_single_failure_rate(
    state: &SystemState,
    grid: &PowerGrid,
    links: &LiveLinks,
    ctx: &ControlContext,
) -> Result<ControlRates> {
    if ctx.flow_nodes.len() != 2 || ctx.pair_edges.len() != 1 {
        return Err(Error::Precondition(format!(
            "single-failure control needs exactly one coupled pair, got {} nodes on {} lines",
            ctx.flow_nodes.len(),
            ctx.pair_edges.len()
        )));
    }
    rates(state, grid, links, ctx, NeighborValues::Instantaneous)
}

/// Generalization to any flow set `F`. With `F` empty this is exactly
/// [`consensus_rate`].
pub fn multi_failure_rate(
    state: &SystemState,
    grid: &PowerGrid,
    links: &LiveLinks,
    ctx: &ControlContext,
) -> Result<ControlRates> {
    rates(state, grid, links, ctx, NeighborValues::Instantaneous)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArtificialInit {
    pub q: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Initial artificial variables at a switching instant:
/// `q_i = sum_{j coupled to i} (C_i u_i - C_j u_j)`, zero outside `F`.
///
/// Node `i` uses its own current value and the last value it received from
/// `j` over their communication link. If that link never delivered a message
/// the term is dropped and a warning is returned. Pairs with no communication
/// link at all use the shared operating point in `state`.
pub fn init_artificial(
    state: &SystemState,
    grid: &PowerGrid,
    comm: &CommGraph,
    ctx: &ControlContext,
) -> ArtificialInit {
    let n = grid.node_count();
    let mut q = vec![0.0; n];
    let mut warnings = Vec::new();
    for &i in &ctx.flow_nodes {
        q[i] = artificial_for(i, state, grid, comm, ctx, &mut warnings);
    }
    ArtificialInit { q, warnings }
}

pub(crate) fn artificial_for(
    i: usize,
    state: &SystemState,
    grid: &PowerGrid,
    comm: &CommGraph,
    ctx: &ControlContext,
    warnings: &mut Vec<String>,
) -> f64 {
    ctx.pair_neighbors[i]
        .iter()
        .map(|&j| pair_term(i, j, state, grid, comm, warnings))
        .sum()
}

pub(crate) fn pair_term(
    i: usize,
    j: usize,
    state: &SystemState,
    grid: &PowerGrid,
    comm: &CommGraph,
    warnings: &mut Vec<String>,
) -> f64 {
    let own = grid.nodes[i].cost * state.u[i];
    let theirs = match comm.link_index(i, j) {
        Some(k) => state.last_rx.get(rx_slot(comm, k, i)).copied().flatten(),
        None => Some(grid.nodes[j].cost * state.u[j]),
    };
    match theirs {
        Some(v) => own - v,
        None => {
            warnings.push(format!(
                "t = {}: node {} has no value from node {} (link failed before any exchange); its term of q starts at 0",
                state.t,
                i + 1,
                j + 1
            ));
            0.0
        }
    }
}

/// Links shared by the power and communication graphs among `live`, in
/// ascending lexicographic order of their (smaller, larger) node pair.
pub fn shared_links(grid: &PowerGrid, comm: &CommGraph, live: &[usize]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = live
        .iter()
        .map(|&k| {
            let (a, b) = comm.links[k];
            (a.min(b), a.max(b))
        })
        .filter(|&(a, b)| grid.line_between(a, b).is_some())
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Round-robin choice of the active shared link for sampling interval `k`.
pub fn sequential_active_link(k: usize, shared: &[(usize, usize)]) -> Result<(usize, usize)> {
    if shared.is_empty() {
        return Err(Error::Precondition(
            "no shared power/communication links".into(),
        ));
    }
    Ok(shared[k % shared.len()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_model::{toy_grid, Line, NodeParams};

    fn grid(costs: &[f64], lines: &[(usize, usize)]) -> PowerGrid {
        PowerGrid::new(
            costs
                .iter()
                .map(|&cost| NodeParams {
                    inertia: 0.1,
                    droop: 1.0,
                    cost,
                    fixed_power: 0.0,
                })
                .collect(),
            lines
                .iter()
                .map(|&(from, to)| Line {
                    from,
                    to,
                    susceptance: 1.0,
                })
                .collect(),
        )
    }

    fn comm(links: &[(usize, usize)]) -> CommGraph {
        CommGraph {
            links: links.to_vec(),
            ..CommGraph::default()
        }
    }

    fn state(omega: &[f64], u: &[f64], q: &[f64], comm_links: usize) -> SystemState {
        let mut s = SystemState::zeros(omega.len(), 0, comm_links);
        s.omega = omega.to_vec();
        s.u = u.to_vec();
        s.q = q.to_vec();
        s
    }

    #[test]
    fn consensus_two_nodes() {
        let g = grid(&[1.0, 2.0], &[(0, 1)]);
        let c = comm(&[(0, 1)]);
        let s = state(&[0.1, -0.1], &[0.0, 0.0], &[0.0, 0.0], 1);
        let du = consensus_rate(&s, &g, &LiveLinks::all(2, &c));
        assert!(
            (du[0] + 0.1).abs() < 1e-15 && (du[1] - 0.05).abs() < 1e-15,
            "{du:?}"
        );
    }

    #[test]
    fn consensus_equilibrium_on_manifold() {
        let g = grid(&[1.0, 2.0, 4.0], &[(0, 1), (1, 2)]);
        let c = comm(&[(0, 1), (1, 2), (0, 2)]);
        let s = state(&[0.0; 3], &[4.0, 2.0, 1.0], &[0.0; 3], 3);
        let du = consensus_rate(&s, &g, &LiveLinks::all(3, &c));
        assert!(du.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn consensus_is_laplacian_action() {
        let g = grid(&[1.0, 1.0, 1.0], &[(0, 1), (1, 2)]);
        let c = comm(&[(0, 1), (1, 2)]);
        let s = state(&[0.0; 3], &[1.0, 0.0, 0.0], &[0.0; 3], 2);
        assert_eq!(
            consensus_rate(&s, &g, &LiveLinks::all(3, &c)),
            vec![-1.0, 1.0, 0.0]
        );
    }

    #[test]
    fn sampled_uses_held_neighbor_values() {
        let g = grid(&[1.0, 1.0], &[(0, 1)]);
        let c = comm(&[(0, 1)]);
        let links = LiveLinks::all(2, &c);
        let mut s = state(&[0.3, 0.0], &[0.5, 0.0], &[0.0, 0.0], 1);
        s.last_rx = vec![Some(0.5), Some(0.2)];
        let du = consensus_sampled_rate(&s, &g, &links).unwrap();
        assert!((du[0] - (-0.3 - (0.5 - 0.2))).abs() < 1e-15);

        // fresh samples reproduce the instantaneous law
        s.last_rx = vec![Some(0.5), Some(0.0)];
        assert_eq!(
            consensus_sampled_rate(&s, &g, &links).unwrap(),
            consensus_rate(&s, &g, &links)
        );

        s.last_rx = vec![None, Some(0.0)];
        assert!(consensus_sampled_rate(&s, &g, &links).is_err());
    }

    #[test]
    fn pair_flow_direct_values() {
        let g = grid(&[1.0, 1.0], &[(0, 1)]);
        let ctx = ControlContext::all_lines(Scheme::PairFlow, &g);
        let s = state(&[0.0, 0.0], &[0.0, 0.0], &[0.5, -0.5], 0);
        let r = pair_flow_rate(&s, &g, &ctx).unwrap();
        assert_eq!(r.du[0], -0.5);
        assert_eq!(r.dq[0], -1.0);

        let s = state(&[0.2, 0.2], &[0.0, 0.0], &[0.0, 0.0], 0);
        let r = pair_flow_rate(&s, &g, &ctx).unwrap();
        assert_eq!(r.dq, vec![0.0, 0.0]);
    }

    #[test]
    fn pair_requires_power_adjacency() {
        let g = grid(&[1.0, 1.0, 1.0], &[(0, 1), (1, 2)]);
        assert!(ControlContext::with_pairs(Scheme::PairFlow, &g, &[(0, 2)]).is_err());
        let empty = ControlContext::consensus(Scheme::PairFlow, 3);
        let s = state(&[0.0; 3], &[0.0; 3], &[0.0; 3], 0);
        assert!(pair_flow_rate(&s, &g, &empty).is_err());
    }

    #[test]
    fn hybrid_structure_on_toy_grid() {
        let s = toy_grid();
        let g = &s.grid;
        let ctx = ControlContext::from_failed_links(Scheme::HybridSingle, g, &[(1, 6)]);
        assert_eq!(ctx.flow_nodes(), &[1, 6]);
        let failed = s.comm.link_index(1, 6).unwrap();
        let live: Vec<usize> = (0..s.comm.links.len()).filter(|&k| k != failed).collect();
        let links = LiveLinks::new(10, &s.comm, &live);

        let mut st = SystemState::zeros(10, 10, 10);
        st.omega[1] = 0.3;
        st.q[1] = 0.2;
        st.u[0] = 0.4;
        st.u[6] = -1.0;
        let r = hybrid_single_failure_rate(&st, g, &links, &ctx).unwrap();
        // node 2 ignores messages: only w_2 and q_2 matter
        assert!((r.du[1] - (-0.3 - 0.2) / g.nodes[1].cost).abs() < 1e-15);
        // node 1 still hears node 2 and its other neighbors
        let degree = links.neighbors(0).len() as f64;
        assert_eq!(degree, 3.0);
        let expected = -degree * g.nodes[0].cost * 0.4;
        assert!((r.du[0] - expected).abs() < 1e-15);

        let mut eq = SystemState::zeros(10, 10, 10);
        for (i, n) in g.nodes.iter().enumerate() {
            eq.u[i] = 3.0 / n.cost;
        }
        let r = hybrid_single_failure_rate(&eq, g, &links, &ctx).unwrap();
        assert!(r.du.iter().chain(&r.dq).all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn multi_failure_with_empty_set_is_consensus() {
        let s = toy_grid();
        let links = LiveLinks::all(10, &s.comm);
        let ctx = ControlContext::from_failed_links(Scheme::MultiFailure, &s.grid, &[]);
        let mut st = SystemState::zeros(10, 10, 10);
        for i in 0..10 {
            st.omega[i] = 0.01 * i as f64 - 0.03;
            st.u[i] = (i as f64).sin();
        }
        let a = multi_failure_rate(&st, &s.grid, &links, &ctx).unwrap().du;
        let b = consensus_rate(&st, &s.grid, &links);
        assert_eq!(a, b);
    }

    #[test]
    fn multi_failure_coupling_term() {
        let g = grid(&[1.0, 2.0, 3.0], &[(0, 1), (1, 2)]);
        let ctx = ControlContext::from_failed_links(Scheme::MultiFailure, &g, &[(0, 1)]);
        let s = state(&[0.5, 0.1, 0.0], &[0.0; 3], &[0.2, 0.0, 0.0], 0);
        let r = multi_failure_rate(&s, &g, &LiveLinks::none(3), &ctx).unwrap();
        assert!((r.dq[0] - (-(0.5 - 0.1) - 0.4)).abs() < 1e-15);
    }

    #[test]
    fn pair_initialization_matches_cost_gap() {
        let g = grid(&[1.0, 1.0], &[(0, 1)]);
        let c = comm(&[(0, 1)]);
        let ctx = ControlContext::from_failed_links(Scheme::HybridSingle, &g, &[(0, 1)]);
        let mut s = state(&[0.0; 2], &[3.0, 1.0], &[0.0; 2], 1);
        s.last_rx = vec![Some(3.0), Some(1.0)];
        let init = init_artificial(&s, &g, &c, &ctx);
        assert_eq!(init.q, vec![2.0, -2.0]);
        assert!(init.warnings.is_empty());

        s.u = vec![1.0, 1.0];
        s.last_rx = vec![Some(1.0), Some(1.0)];
        assert_eq!(init_artificial(&s, &g, &c, &ctx).q, vec![0.0, 0.0]);

        s.last_rx = vec![None, None];
        let init = init_artificial(&s, &g, &c, &ctx);
        assert_eq!(init.q, vec![0.0, 0.0]);
        assert_eq!(init.warnings.len(), 2);
    }

    #[test]
    fn summed_initialization_for_three_flow_nodes() {
        let g = grid(
            &[1.0, 2.0, 1.0, 1.0, 4.0],
            &[(0, 1), (1, 4), (1, 2), (2, 3)],
        );
        let c = comm(&[(0, 1), (1, 4), (2, 3)]);
        let ctx = ControlContext::from_failed_links(Scheme::MultiFailure, &g, &[(0, 1), (1, 4)]);
        assert_eq!(ctx.flow_nodes(), &[0, 1, 4]);
        let mut s = SystemState::zeros(5, 4, 3);
        s.u = vec![1.0, 2.0, 0.0, 0.0, 0.25];
        let z: Vec<f64> = s.u.iter().zip(g.costs()).map(|(u, c)| u * c).collect();
        s.last_rx = vec![Some(z[0]), Some(z[1]), Some(z[1]), Some(z[4]), None, None];
        let q = init_artificial(&s, &g, &c, &ctx).q;
        assert_eq!(q[1], (z[1] - z[0]) + (z[1] - z[4]));
        assert_eq!(q[0], z[0] - z[1]);
        assert_eq!(q[2], 0.0);
    }

    #[test]
    fn round_robin_link_choice() {
        let es = [(1, 2), (2, 3), (2, 4), (4, 5)];
        assert_eq!(sequential_active_link(0, &es).unwrap(), (1, 2));
        assert_eq!(sequential_active_link(5, &es).unwrap(), (2, 3));
        assert_eq!(sequential_active_link(7, &es[..1]).unwrap(), (1, 2));
        assert!(sequential_active_link(0, &[]).is_err());
    }

    #[test]
    fn shared_links_sorted() {
        let g = grid(&[1.0; 4], &[(0, 1), (1, 2), (2, 3)]);
        let c = comm(&[(3, 2), (0, 1), (0, 3)]);
        assert_eq!(shared_links(&g, &c, &[0, 1, 2]), vec![(0, 1), (2, 3)]);
    }
}
