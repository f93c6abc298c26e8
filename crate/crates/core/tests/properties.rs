mod common;

use freqctl::controllers::{
    consensus_rate, multi_failure_rate, ControlContext, LiveLinks, NeighborValues,
};
use freqctl::dispatch::{cost_of, optimal_dispatch};
use freqctl::simulator::{derivative, ClosedLoop};
use freqctl::stability::{assemble_state_matrix, routh_hurwitz_cubic, steady_configuration};
use freqctl::{toy_grid, Scenario, Scheme, SystemState};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn configured(scheme: Scheme, failures: &[(usize, usize)]) -> Scenario {
    let mut s = toy_grid().with_scheme(scheme);
    for &(a, b) in failures {
        s = s.with_failure(a, b, 0.0);
    }
    s
}

fn linear_configurations() -> Vec<Scenario> {
    vec![
        configured(Scheme::Consensus, &[]),
        configured(Scheme::Consensus, &[(1, 6)]),
        configured(Scheme::PairFlow, &[]),
        configured(Scheme::HybridSingle, &[(1, 6)]),
        configured(Scheme::MultiFailure, &[(0, 1), (1, 4)]),
    ]
}

/// Roots of `a0 + a1 x + a2 x^2 + a3 x^3` from the companion matrix.
fn cubic_roots_max_re(a: [f64; 4]) -> f64 {
    let [a0, a1, a2, a3] = a;
    let companion = DMatrix::from_row_slice(
        3,
        3,
        &[0.0, 0.0, -a0 / a3, 1.0, 0.0, -a1 / a3, 0.0, 1.0, -a2 / a3],
    );
    companion
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn state_matrix_reproduces_the_derivative(seed in prop::collection::vec(-1.0f64..1.0, 64)) {
        for s in linear_configurations() {
            let (links, ctx) = steady_configuration(&s).unwrap();
            let sm = assemble_state_matrix(&s.grid, &links, &ctx).unwrap();
            let x: Vec<f64> = (0..sm.dim()).map(|i| seed[i % seed.len()] * (1.0 + i as f64 / 7.0)).collect();
            let mut state = SystemState::zeros(sm.nodes, sm.lines, s.comm.links.len());
            state.load_vector(&sm.expand(&x));
            let injections = vec![0.0; sm.nodes];
            let model = ClosedLoop {
                grid: &s.grid,
                links: &links,
                ctx: &ctx,
                injections: &injections,
                values: NeighborValues::Instantaneous,
            };
            let d = derivative(&state, &model).unwrap();
            let mut ds = state.clone();
            ds.omega = d.omega;
            ds.flow = d.flow;
            ds.u = d.u;
            ds.q = d.q;
            let err = (&sm.a * DVector::from_vec(x) - sm.reduce(&ds)).amax();
            prop_assert!(err <= 1e-12, "{:?}: {err:e}", s.scheme);
        }
    }

    #[test]
    fn routh_hurwitz_agrees_with_roots(
        a0 in 0.01f64..10.0, a1 in 0.01f64..10.0, a2 in 0.01f64..10.0, a3 in 0.01f64..10.0,
    ) {
        let a = [a0, a1, a2, a3];
        // skip the boundary where the verdict is decided by rounding
        prop_assume!((a0 * a3 - a1 * a2).abs() > 1e-6 * (a0 * a3).max(a1 * a2));
        let stable = cubic_roots_max_re(a) < 0.0;
        prop_assert_eq!(routh_hurwitz_cubic(a), stable);
    }

    #[test]
    fn dispatch_is_feasible_and_minimal(
        costs in prop::collection::vec(0.1f64..10.0, 10),
        p in prop::collection::vec(-3.0f64..3.0, 10),
        perturbation in prop::collection::vec(-1.0f64..1.0, 10),
    ) {
        let mut grid = toy_grid().grid;
        for (node, c) in grid.nodes.iter_mut().zip(&costs) {
            node.cost = *c;
        }
        let r = optimal_dispatch(&grid, &p).unwrap();
        let total: f64 = r.u_star.iter().sum::<f64>() + p.iter().sum::<f64>();
        prop_assert!(total.abs() < 1e-9);
        for (u, c) in r.u_star.iter().zip(&costs) {
            prop_assert!((c * u - r.lambda).abs() < 1e-9);
        }
        // any other balancing control costs at least as much
        let mean = perturbation.iter().sum::<f64>() / perturbation.len() as f64;
        let other: Vec<f64> = r.u_star.iter().zip(&perturbation).map(|(u, d)| u + d - mean).collect();
        prop_assert!(cost_of(&grid, &other).unwrap().paper >= r.cost_paper - 1e-9);
        prop_assert!((r.cost_paper - 2.0 * r.cost_quadratic).abs() < 1e-9);
    }

    #[test]
    fn multi_failure_without_pairs_is_consensus(seed in prop::collection::vec(-2.0f64..2.0, 30)) {
        let s = toy_grid();
        let n = s.grid.node_count();
        let links = LiveLinks::all(n, &s.comm);
        let ctx = ControlContext::from_failed_links(Scheme::MultiFailure, &s.grid, &[]);
        let mut state = SystemState::zeros(n, s.grid.line_count(), s.comm.links.len());
        state.omega.copy_from_slice(&seed[..n]);
        state.flow.copy_from_slice(&seed[n..n + s.grid.line_count()]);
        state.u.copy_from_slice(&seed[2 * n..3 * n]);
        let multi = multi_failure_rate(&state, &s.grid, &links, &ctx).unwrap();
        prop_assert_eq!(multi.du, consensus_rate(&state, &s.grid, &links));
        prop_assert!(multi.dq.iter().all(|&v| v == 0.0));
    }
}
