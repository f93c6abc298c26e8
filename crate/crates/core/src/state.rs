use serde::Serialize;

/// Closed-loop state at one instant.
///
/// `q` is carried for every node and stays zero where no flow-driven law is
/// active. `last_rx` holds, per directed communication link, the most recent
/// received value `C_l u_l`; slot `2k` is what the second endpoint of link
/// `k` heard from the first, slot `2k + 1` the reverse.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SystemState {
    pub t: f64,
    pub omega: Vec<f64>,
    pub flow: Vec<f64>,
    pub u: Vec<f64>,
    pub q: Vec<f64>,
    pub last_rx: Vec<Option<f64>>,
}

impl SystemState {
    pub fn zeros(nodes: usize, lines: usize, comm_links: usize) -> Self {
        Self {
            t: 0.0,
            omega: vec![0.0; nodes],
            flow: vec![0.0; lines],
            u: vec![0.0; nodes],
            q: vec![0.0; nodes],
            last_rx: vec![None; 2 * comm_links],
        }
    }

    pub fn node_count(&self) -> usize {
        self.omega.len()
    }

    pub fn line_count(&self) -> usize {
        self.flow.len()
    }

    /// Integrated coordinates flattened as `[omega, flow, u, q]`.
    pub fn to_vector(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(3 * self.omega.len() + self.flow.len());
        x.extend_from_slice(&self.omega);
        x.extend_from_slice(&self.flow);
        x.extend_from_slice(&self.u);
        x.extend_from_slice(&self.q);
        x
    }

    pub fn load_vector(&mut self, x: &[f64]) {
        let view = StateView::from_flat(x, self.omega.len(), self.flow.len());
        self.omega.copy_from_slice(view.omega);
        self.flow.copy_from_slice(view.flow);
        self.u.copy_from_slice(view.u);
        self.q.copy_from_slice(view.q);
    }

    pub fn view(&self) -> StateView<'_> {
        StateView {
            omega: &self.omega,
            flow: &self.flow,
            u: &self.u,
            q: &self.q,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.omega
            .iter()
            .chain(&self.flow)
            .chain(&self.u)
            .chain(&self.q)
            .all(|v| v.is_finite())
    }
}

/// Borrowed integrated coordinates.
#[derive(Clone, Copy, Debug)]
pub struct StateView<'a> {
    pub omega: &'a [f64],
    pub flow: &'a [f64],
    pub u: &'a [f64],
    pub q: &'a [f64],
}

impl<'a> StateView<'a> {
    pub fn from_flat(x: &'a [f64], nodes: usize, lines: usize) -> Self {
        let (omega, rest) = x.split_at(nodes);
        let (flow, rest) = rest.split_at(lines);
        let (u, q) = rest.split_at(nodes);
        Self { omega, flow, u, q }
    }
}

/// Time derivative of the integrated coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct StateDerivative {
    pub omega: Vec<f64>,
    pub flow: Vec<f64>,
    pub u: Vec<f64>,
    pub q: Vec<f64>,
}

impl StateDerivative {
    pub fn to_vector(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(3 * self.omega.len() + self.flow.len());
        x.extend_from_slice(&self.omega);
        x.extend_from_slice(&self.flow);
        x.extend_from_slice(&self.u);
        x.extend_from_slice(&self.q);
        x
    }

    pub fn max_abs(&self) -> f64 {
        self.omega
            .iter()
            .chain(&self.flow)
            .chain(&self.u)
            .chain(&self.q)
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}
