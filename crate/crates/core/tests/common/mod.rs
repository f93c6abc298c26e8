#![allow(dead_code)]

use freqctl::grid_model::{
    CommGraph, DisturbanceEvent, Line, MessageInterval, NodeParams, PowerGrid,
};
use freqctl::stability::{check_sufficient_two_node, two_node_laplacian};
use freqctl::{toy_grid, Scenario, Scheme};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 20_240_611;

/// Seeded generator; `FREQCTL_SEED` overrides the default seed.
pub fn rng() -> ChaCha8Rng {
    let seed = std::env::var("FREQCTL_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_SEED);
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug)]
pub struct TwoNode {
    pub m: [f64; 2],
    pub d: [f64; 2],
    pub c: [f64; 2],
    pub b: f64,
}

impl TwoNode {
    pub fn draw(rng: &mut impl Rng) -> Self {
        TwoNode {
            m: [rng.random_range(0.01..0.5), rng.random_range(0.01..0.5)],
            d: [rng.random_range(0.2..3.0), rng.random_range(0.2..3.0)],
            c: [rng.random_range(0.05..5.0), rng.random_range(0.05..5.0)],
            b: rng.random_range(0.2..5.0),
        }
    }

    /// Draws until every sufficient condition holds.
    pub fn draw_satisfying(rng: &mut impl Rng) -> Self {
        loop {
            let p = Self::draw(rng);
            if p.conditions_hold() {
                return p;
            }
        }
    }

    pub fn conditions_hold(&self) -> bool {
        check_sufficient_two_node(&self.m, &self.d, &self.c, self.b, &two_node_laplacian())
            .unwrap()
            .all_hold()
    }

    pub fn grid(&self, fixed: [f64; 2]) -> PowerGrid {
        PowerGrid::new(
            (0..2)
                .map(|i| NodeParams {
                    inertia: self.m[i],
                    droop: self.d[i],
                    cost: self.c[i],
                    fixed_power: fixed[i],
                })
                .collect(),
            vec![Line {
                from: 0,
                to: 1,
                susceptance: self.b,
            }],
        )
    }

    /// Flow-driven pair with no communication link.
    pub fn pair_flow(
        &self,
        fixed: [f64; 2],
        disturbances: Vec<DisturbanceEvent>,
        horizon: f64,
    ) -> Scenario {
        Scenario {
            grid: self.grid(fixed),
            comm: CommGraph::default(),
            disturbances,
            scheme: Scheme::PairFlow,
            horizon,
            dt: 1e-3,
            record_stride: 10,
        }
    }
}

/// Points with `0.5 <= |z| <= 5` and uniformly random argument.
pub fn annulus_samples(rng: &mut impl Rng, count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|_| {
            Complex64::from_polar(
                rng.random_range(0.5..5.0),
                rng.random_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect()
}

/// Ten-node grid with the example's node data, a random spanning tree plus
/// up to three extra lines, reactances drawn from the example's list and
/// communication mirroring the power lines.
pub fn random_connected_grid(rng: &mut impl Rng) -> Scenario {
    const REACTANCES: [f64; 10] = [1.0, 2.0, 3.0, 1.0, 5.0, 4.0, 6.0, 1.0, 9.0, 1.0];
    let base = toy_grid();
    let n = base.grid.node_count();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for k in 1..n {
        let parent = rng.random_range(0..k);
        pairs.push((parent, k));
    }
    let extra = rng.random_range(0..=3);
    while pairs.len() < n - 1 + extra {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        let (a, b) = (a.min(b), a.max(b));
        if a != b && !pairs.contains(&(a, b)) {
            pairs.push((a, b));
        }
    }
    // relabel so the tree is not always rooted at node 1
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let lines = pairs
        .into_iter()
        .map(|(a, b)| {
            let (a, b) = (perm[a], perm[b]);
            Line {
                from: a.min(b),
                to: a.max(b),
                susceptance: 1.0 / REACTANCES[rng.random_range(0..REACTANCES.len())],
            }
        })
        .collect();
    let grid = PowerGrid::new(base.grid.nodes.clone(), lines);
    let comm = CommGraph {
        message_interval: MessageInterval::Continuous,
        ..CommGraph::mirror_of(&grid)
    };
    Scenario { grid, comm, ..base }
}
