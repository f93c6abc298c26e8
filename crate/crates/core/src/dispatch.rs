//! Optimal steady-state dispatch of the adjustable power.
//!
//! Minimizing `sum_j C_j u_j^2 / 2` subject to power balance has the closed
//! form `C_j u_j = lambda` for every node, with `lambda` fixed by
//! `sum_j u_j = -sum_j p_j`. Line limits are not modelled, so the result does
//! not depend on the topology.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid_model::PowerGrid;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DispatchResult {
    pub u_star: Vec<f64>,
    /// Common marginal cost `C_j u_j*`.
    pub lambda: f64,
    /// `sum_j C_j u_j*^2`, the figure reported for the bundled example.
    pub cost_paper: f64,
    /// `sum_j C_j u_j*^2 / 2`, the optimization objective.
    pub cost_quadratic: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Cost {
    pub paper: f64,
    pub quadratic: f64,
}

pub fn optimal_dispatch(grid: &PowerGrid, p_star: &[f64]) -> Result<DispatchResult> {
    let n = grid.node_count();
    if n == 0 {
        return Err(Error::InvalidInput(
            "optimal dispatch needs at least one node".into(),
        ));
    }
    if p_star.len() != n {
        return Err(Error::dim("p_star", n, p_star.len()));
    }
    if let Some(i) = grid.nodes.iter().position(|node| !(node.cost > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "node {} has nonpositive cost",
            i + 1
        )));
    }
    let imbalance: f64 = p_star.iter().sum();
    let inverse_cost_sum: f64 = grid.nodes.iter().map(|node| 1.0 / node.cost).sum();
    let lambda = -imbalance / inverse_cost_sum;
    let u_star: Vec<f64> = grid.nodes.iter().map(|node| lambda / node.cost).collect();
    let cost = cost_of(grid, &u_star)?;
    Ok(DispatchResult {
        u_star,
        lambda,
        cost_paper: cost.paper,
        cost_quadratic: cost.quadratic,
    })
}

pub fn cost_of(grid: &PowerGrid, u: &[f64]) -> Result<Cost> {
    if u.len() != grid.node_count() {
        return Err(Error::dim("control vector", grid.node_count(), u.len()));
    }
    let paper = cost_paper_unchecked(grid, u);
    Ok(Cost {
        paper,
        quadratic: 0.5 * paper,
    })
}

pub(crate) fn cost_paper_unchecked(grid: &PowerGrid, u: &[f64]) -> f64 {
    grid.nodes
        .iter()
        .zip(u)
        .map(|(node, &x)| node.cost * x * x)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_model::{toy_grid, NodeParams};
    use proptest::prelude::*;

    fn grid_with_costs(costs: &[f64]) -> PowerGrid {
        PowerGrid::new(
            costs
                .iter()
                .map(|&cost| NodeParams {
                    inertia: 1.0,
                    droop: 1.0,
                    cost,
                    fixed_power: 0.0,
                })
                .collect(),
            Vec::new(),
        )
    }

    #[test]
    fn toy_grid_optimum_after_disturbance() {
        let s = toy_grid();
        let r = optimal_dispatch(&s.grid, &s.steady_fixed_powers()).unwrap();
        assert!((r.cost_paper - 23.278).abs() < 0.01, "{}", r.cost_paper);
        assert!((r.cost_quadratic - 11.639).abs() < 0.01);
        let c = cost_of(&s.grid, &r.u_star).unwrap();
        assert!((c.paper - 23.278).abs() < 1e-3);
    }

    #[test]
    fn balanced_system_needs_no_control() {
        let g = grid_with_costs(&[1.0, 5.0, 3.0]);
        let r = optimal_dispatch(&g, &[1.0, -2.0, 1.0]).unwrap();
        assert!(r.u_star.iter().all(|&u| u == 0.0));
        assert_eq!(r.cost_paper, 0.0);
        assert_eq!(r.cost_quadratic, 0.0);
    }

    #[test]
    fn equal_costs_split_equally() {
        let g = grid_with_costs(&[1.0, 1.0]);
        let r = optimal_dispatch(&g, &[-1.0, -1.0]).unwrap();
        assert_eq!(r.u_star, vec![1.0, 1.0]);
        assert_eq!(r.cost_paper, 2.0);
    }

    #[test]
    fn cost_of_direct_values() {
        let g = grid_with_costs(&[10.0]);
        assert_eq!(
            cost_of(&g, &[0.0]).unwrap(),
            Cost {
                paper: 0.0,
                quadratic: 0.0
            }
        );
        assert_eq!(
            cost_of(&g, &[2.0]).unwrap(),
            Cost {
                paper: 40.0,
                quadratic: 20.0
            }
        );
        assert!(matches!(
            cost_of(&g, &[1.0, 2.0]),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn empty_grid_is_an_error() {
        let g = grid_with_costs(&[]);
        assert!(optimal_dispatch(&g, &[]).is_err());
    }

    /// Projected gradient descent on the balance hyperplane: an independent
    /// route to the minimizer of `sum C_j u_j^2 / 2` with `sum u_j = target`.
    fn projected_gradient(costs: &[f64], target: f64) -> Vec<f64> {
        let n = costs.len() as f64;
        let mut u = vec![target / n; costs.len()];
        let step = 1.0 / costs.iter().cloned().fold(0.0, f64::max);
        for _ in 0..200_000 {
            let g: Vec<f64> = costs.iter().zip(&u).map(|(c, x)| c * x).collect();
            let mean = g.iter().sum::<f64>() / n;
            let mut moved = 0.0f64;
            for (x, gi) in u.iter_mut().zip(&g) {
                let delta = step * (gi - mean);
                *x -= delta;
                moved = moved.max(delta.abs());
            }
            if moved < 1e-14 {
                break;
            }
        }
        u
    }

    proptest! {
        #[test]
        fn closed_form_matches_projected_gradient(
            costs in prop::collection::vec(0.5f64..20.0, 2..8),
            imbalance in -10.0f64..10.0,
        ) {
            let g = grid_with_costs(&costs);
            let mut p = vec![0.0; costs.len()];
            p[0] = imbalance;
            let r = optimal_dispatch(&g, &p).unwrap();
            let oracle = projected_gradient(&costs, -imbalance);
            for (a, b) in r.u_star.iter().zip(&oracle) {
                prop_assert!((a - b).abs() < 1e-6, "{a} vs {b}");
            }
            let sum: f64 = r.u_star.iter().sum();
            prop_assert!((sum + imbalance).abs() <= 1e-12 * imbalance.abs().max(1.0));
            for (node, u) in g.nodes.iter().zip(&r.u_star) {
                prop_assert!((node.cost * u - r.lambda).abs() <= 1e-12 * r.lambda.abs().max(1.0));
            }
            // any other balanced control costs at least as much
            let mut other = r.u_star.clone();
            other[0] += 0.1;
            other[1] -= 0.1;
            prop_assert!(cost_of(&g, &other).unwrap().quadratic >= r.cost_quadratic);
        }

        #[test]
        fn common_cost_scaling_keeps_the_argmin(
            costs in prop::collection::vec(0.5f64..20.0, 1..8),
            imbalance in -10.0f64..10.0,
            factor in 0.1f64..10.0,
        ) {
            let g = grid_with_costs(&costs);
            let scaled: Vec<f64> = costs.iter().map(|c| c * factor).collect();
            let gs = grid_with_costs(&scaled);
            let mut p = vec![0.0; costs.len()];
            p[0] = imbalance;
            let a = optimal_dispatch(&g, &p).unwrap();
            let b = optimal_dispatch(&gs, &p).unwrap();
            for (x, y) in a.u_star.iter().zip(&b.u_star) {
                prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
            }
            prop_assert!((b.cost_paper - factor * a.cost_paper).abs() <= 1e-9 * b.cost_paper.max(1.0));
        }
    }
}
