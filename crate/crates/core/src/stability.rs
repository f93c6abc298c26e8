//! Small-signal analysis of the closed loop.
//!
//! The closed loop is linear, so its state matrix is read off the derivative
//! column by column. On top of the spectrum this module evaluates the
//! sufficient stability conditions for the two-node flow controller and for
//! the single-failure hybrid controller, and checks the factorization of the
//! characteristic polynomial through `det H(lambda)` numerically.
//!
//! State ordering is `[w (N), f (E), u (N), q (|F|)]`, where `q` only covers
//! nodes that run the flow-driven law, in ascending node order.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::controllers::{ControlContext, LiveLinks, NeighborValues};
use crate::error::{Error, Result};
use crate::grid_model::{CommGraph, PowerGrid, Scenario, Scheme};
use crate::simulator::{derivative_into, ClosedLoop};
use crate::state::{StateView, SystemState};

/// Eigenvalues with modulus at or below this are counted as structural zeros.
pub const STRUCTURAL_ZERO_TOL: f64 = 1e-8;
/// Margin on the smallest symmetric eigenvalue for positive definiteness.
pub const DEFINITE_TOL: f64 = 1e-9;
/// Relative margin for the strict product inequalities.
pub const STRICT_MARGIN: f64 = 1e-9;
/// Minimum distance of an identity sample point from excluded singularities.
pub const SINGULARITY_GUARD: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct StateMatrix {
    pub a: DMatrix<f64>,
    pub labels: Vec<String>,
    pub nodes: usize,
    pub lines: usize,
    /// Nodes whose artificial variable is part of the state.
    pub flow_nodes: Vec<usize>,
}

impl StateMatrix {
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// Reduced coordinates of a full simulator state.
    pub fn reduce(&self, state: &SystemState) -> DVector<f64> {
        let mut v = Vec::with_capacity(self.dim());
        v.extend_from_slice(&state.omega);
        v.extend_from_slice(&state.flow);
        v.extend_from_slice(&state.u);
        v.extend(self.flow_nodes.iter().map(|&i| state.q[i]));
        DVector::from_vec(v)
    }

    /// Full flat state `[w, f, u, q (all nodes)]` from reduced coordinates.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        let n = self.nodes;
        let e = self.lines;
        let mut full = vec![0.0; 3 * n + e];
        full[..2 * n + e].copy_from_slice(&x[..2 * n + e]);
        for (r, &i) in self.flow_nodes.iter().enumerate() {
            full[2 * n + e + i] = x[2 * n + e + r];
        }
        full
    }
}

/// State matrix of the closed loop with instantaneous neighbor values, built
/// by evaluating the derivative at unit basis states with zero injections.
pub fn assemble_state_matrix(
    grid: &PowerGrid,
    links: &LiveLinks,
    ctx: &ControlContext,
) -> Result<StateMatrix> {
    let n = grid.node_count();
    let e = grid.line_count();
    let flow_nodes = ctx.flow_nodes().to_vec();
    let dim = 2 * n + e + flow_nodes.len();
    let zeros = vec![0.0; n];
    let model = ClosedLoop {
        grid,
        links,
        ctx,
        injections: &zeros,
        values: NeighborValues::Instantaneous,
    };
    let mut labels = Vec::with_capacity(dim);
    labels.extend((1..=n).map(|i| format!("omega_{i}")));
    labels.extend((1..=e).map(|k| format!("f_{k}")));
    labels.extend((1..=n).map(|i| format!("u_{i}")));
    labels.extend(flow_nodes.iter().map(|i| format!("q_{}", i + 1)));

    let mut sm = StateMatrix {
        a: DMatrix::zeros(dim, dim),
        labels,
        nodes: n,
        lines: e,
        flow_nodes,
    };
    let mut basis = vec![0.0; dim];
    let mut out = vec![0.0; 3 * n + e];
    for col in 0..dim {
        basis[col] = 1.0;
        let full = sm.expand(&basis);
        derivative_into(StateView::from_flat(&full, n, e), &[], &model, &mut out)?;
        for row in 0..2 * n + e {
            sm.a[(row, col)] = out[row];
        }
        for (r, &i) in sm.flow_nodes.iter().enumerate() {
            sm.a[(2 * n + e + r, col)] = out[2 * n + e + i];
        }
        basis[col] = 0.0;
    }
    Ok(sm)
}

/// Post-failure closed-loop configuration of a scenario: links that are up
/// once every scheduled failure has happened and the matching control
/// context.
pub fn steady_configuration(scenario: &Scenario) -> Result<(LiveLinks, ControlContext)> {
    let grid = &scenario.grid;
    let comm = &scenario.comm;
    let n = grid.node_count();
    let links = LiveLinks::at(n, comm, f64::INFINITY);
    let failed: Vec<(usize, usize)> = comm.failures.iter().map(|f| f.link).collect();
    let ctx = match scenario.scheme {
        Scheme::Consensus | Scheme::ConsensusSampled => {
            ControlContext::consensus(scenario.scheme, n)
        }
        Scheme::PairFlow => ControlContext::all_lines(Scheme::PairFlow, grid),
        Scheme::HybridSingle | Scheme::MultiFailure => {
            ControlContext::from_failed_links(scenario.scheme, grid, &failed)
        }
        Scheme::Sequential => {
            return Err(Error::Precondition(
                "the sequential scheme is time-varying and has no single state matrix".into(),
            ))
        }
    };
    Ok((links, ctx))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub structural_zero_count: usize,
    /// Largest real part over the eigenvalues that are not structural zeros
    /// (`-inf` when every eigenvalue is a structural zero).
    pub spectral_abscissa_excl_zeros: f64,
}

pub fn spectrum(a: &DMatrix<f64>) -> Result<Spectrum> {
    if !a.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidInput(
            "state matrix has non-finite entries".into(),
        ));
    }
    let dim = a.nrows();
    let schur = Schur::try_new(a.clone(), f64::EPSILON, 10_000).ok_or(Error::EigenSolver(dim))?;
    let mut eigenvalues: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(|x, y| y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im)));
    let structural_zero_count = eigenvalues
        .iter()
        .filter(|l| l.norm() <= STRUCTURAL_ZERO_TOL)
        .count();
    let spectral_abscissa_excl_zeros = eigenvalues
        .iter()
        .filter(|l| l.norm() > STRUCTURAL_ZERO_TOL)
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(Spectrum {
        eigenvalues,
        structural_zero_count,
        spectral_abscissa_excl_zeros,
    })
}

fn sym_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// (min, max) eigenvalue of the symmetric part of `m`.
pub fn sym_eig_range(m: &DMatrix<f64>) -> (f64, f64) {
    let eig = SymmetricEigen::new(sym_part(m));
    let min = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let max = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}

/// (min, max) real part over the eigenvalues of `m` itself.
fn raw_eig_range(m: &DMatrix<f64>) -> Result<(f64, f64)> {
    let s = spectrum(m)?;
    let re = s.eigenvalues.iter().map(|l| l.re);
    let min = re.clone().fold(f64::INFINITY, f64::min);
    let max = re.fold(f64::NEG_INFINITY, f64::max);
    Ok((min, max))
}

fn is_pd(m: &DMatrix<f64>) -> (bool, f64) {
    let (min, _) = sym_eig_range(m);
    (min > DEFINITE_TOL, min)
}

fn strictly_greater(lhs: f64, rhs: f64) -> bool {
    lhs - rhs > STRICT_MARGIN * lhs.abs().max(rhs.abs())
}

/// Verdicts on the four sufficient conditions (definiteness of three
/// matrices and a product inequality), with the numbers behind them.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SufficientReport {
    pub labels: [&'static str; 4],
    pub verdicts: [bool; 4],
    /// Smallest symmetric eigenvalue of the matrices in the first three
    /// conditions.
    pub min_eigenvalues: [f64; 3],
    pub product_lhs: f64,
    pub product_rhs: f64,
    /// Product inequality evaluated on the raw (non-symmetrized) matrices;
    /// only meaningful for the multi-node conditions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raw_product: Option<RawProduct>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RawProduct {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl SufficientReport {
    pub fn all_hold(&self) -> bool {
        self.verdicts.iter().all(|&v| v)
    }
}

fn diag(v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_column_slice(v))
}

fn diag_inv(v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_iterator(v.len(), v.iter().map(|x| 1.0 / x)))
}

/// Laplacian of a single link between two nodes.
pub fn two_node_laplacian() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0])
}

/// Sufficient conditions for the two-node flow controller:
///
/// ```text
/// (8a) M > 0
/// (8b) (Lc M + M Lc)/2 + D > 0
/// (8c) (Lc D + D Lc)/2 + Lp + C^-1 > 0
/// (8d) lmin[Lp + (Lc D + D Lc)/2 + C^-1] * lmin[(Lc M + M Lc)/2 + D] > 4 B max(M)
/// ```
///
/// with `Lp = B [[1, -1], [-1, 1]]`.
pub fn check_sufficient_two_node(
    m: &[f64],
    d: &[f64],
    c: &[f64],
    b: f64,
    lc: &DMatrix<f64>,
) -> Result<SufficientReport> {
    for (what, v) in [("inertia", m), ("droop", d), ("cost", c)] {
        if v.len() != 2 {
            return Err(Error::dim(what, 2, v.len()));
        }
    }
    if lc.shape() != (2, 2) {
        return Err(Error::dim("communication Laplacian rows", 2, lc.nrows()));
    }
    let mm = diag(m);
    let dm = diag(d);
    let lp = two_node_laplacian() * b;
    let c_inv = diag_inv(c);

    let (a_ok, a_min) = is_pd(&mm);
    let second = sym_part(&(lc * &mm)) + &dm;
    let (b_ok, b_min) = is_pd(&second);
    let third = sym_part(&(lc * &dm)) + &lp + &c_inv;
    let (c_ok, c_min) = is_pd(&third);
    let lhs = c_min * b_min;
    let rhs = 4.0 * b * m[0].max(m[1]);
    Ok(SufficientReport {
        labels: ["8a", "8b", "8c", "8d"],
        verdicts: [a_ok, b_ok, c_ok, strictly_greater(lhs, rhs)],
        min_eigenvalues: [a_min, b_min, c_min],
        product_lhs: lhs,
        product_rhs: rhs,
        raw_product: None,
    })
}

/// Sufficient conditions for the multi-node hybrid controller:
///
/// ```text
/// (13a) M > 0
/// (13b) (L* C M + M C L*^T)/2 + D > 0
/// (13c) Lp + (L* C D + D C L*^T)/2 + C^-1 > 0
/// (13d) lmin(Lp + L* C D + C^-1) * lmin(L* C M + D) > lmax(L* C Lp) * lmax(M)
/// ```
///
/// The extreme eigenvalues in (13d) are taken on symmetric parts; the same
/// product on the raw matrices (extreme real parts) is reported alongside.
pub fn check_sufficient_multi_node(
    m: &[f64],
    d: &[f64],
    c: &[f64],
    lc_star: &DMatrix<f64>,
    lp: &DMatrix<f64>,
) -> Result<SufficientReport> {
    let n = m.len();
    for (what, v) in [("droop", d), ("cost", c)] {
        if v.len() != n {
            return Err(Error::dim(what, n, v.len()));
        }
    }
    if lc_star.shape() != (n, n) {
        return Err(Error::dim("L_c* rows", n, lc_star.nrows()));
    }
    if lp.shape() != (n, n) {
        return Err(Error::dim("power Laplacian rows", n, lp.nrows()));
    }
    let mm = diag(m);
    let dm = diag(d);
    let cm = diag(c);
    let c_inv = diag_inv(c);
    let lsc = lc_star * &cm;

    let (a_ok, a_min) = is_pd(&mm);
    let second = sym_part(&(&lsc * &mm)) + &dm;
    let (b_ok, b_min) = is_pd(&second);
    let third = lp + sym_part(&(&lsc * &dm)) + &c_inv;
    let (c_ok, c_min) = is_pd(&third);

    let first_factor = lp + &lsc * &dm + &c_inv;
    let second_factor = &lsc * &mm + &dm;
    let coupling = &lsc * lp;
    let m_max = m.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let lhs = sym_eig_range(&first_factor).0 * sym_eig_range(&second_factor).0;
    let rhs = sym_eig_range(&coupling).1 * m_max;

    let raw_lhs = raw_eig_range(&first_factor)?.0 * raw_eig_range(&second_factor)?.0;
    let raw_rhs = raw_eig_range(&coupling)?.1 * m_max;

    Ok(SufficientReport {
        labels: ["13a", "13b", "13c", "13d"],
        verdicts: [a_ok, b_ok, c_ok, strictly_greater(lhs, rhs)],
        min_eigenvalues: [a_min, b_min, c_min],
        product_lhs: lhs,
        product_rhs: rhs,
        raw_product: Some(RawProduct {
            lhs: raw_lhs,
            rhs: raw_rhs,
            holds: strictly_greater(raw_lhs, raw_rhs),
        }),
    })
}

/// How the two rows of the failed pair are scaled in `L_c*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairBlock {
    /// `L_c2 C_2^-1`: column `c` divided by `C_c`.
    ColumnScaled,
    /// `C_2^-1 L_c2`: row `r` divided by `C_r`.
    RowScaled,
}

/// Modified communication Laplacian for a single failed pair `(i, j)`.
///
/// Rows of the other nodes are the rows of `lc` (the post-failure
/// communication Laplacian) over all columns; rows `i` and `j` are zero except
/// for the 2x2 pair block. The pair keeps its own labels, which is a
/// simultaneous permutation of the variant where it is moved to the last two
/// positions, so every determinant and spectrum is unchanged.
pub fn build_lc_star(
    grid: &PowerGrid,
    lc: &DMatrix<f64>,
    c: &[f64],
    pair: (usize, usize),
    block: PairBlock,
) -> Result<DMatrix<f64>> {
    let n = grid.node_count();
    if lc.shape() != (n, n) {
        return Err(Error::dim("communication Laplacian rows", n, lc.nrows()));
    }
    if c.len() != n {
        return Err(Error::dim("cost", n, c.len()));
    }
    let (i, j) = pair;
    if grid.line_between(i, j).is_none() {
        return Err(Error::Precondition(format!(
            "failed pair {}-{} is not power-adjacent",
            i + 1,
            j + 1
        )));
    }
    let mut star = lc.clone();
    for r in [i, j] {
        star.row_mut(r).fill(0.0);
    }
    let scale = |row: usize, col: usize| match block {
        PairBlock::ColumnScaled => 1.0 / c[col],
        PairBlock::RowScaled => 1.0 / c[row],
    };
    star[(i, i)] = scale(i, i);
    star[(i, j)] = -scale(i, j);
    star[(j, i)] = -scale(j, i);
    star[(j, j)] = scale(j, j);
    Ok(star)
}

/// Which closed form the characteristic polynomial is compared against.
#[derive(Clone, Debug, PartialEq)]
pub enum Factorization {
    /// `s(l) = (l + 2) det(M^-1) det(H(l))` with
    /// `H = l^2 D + l^3 M + l C^-1 + l Lc D + l^2 Lc M + (2 + l) Lp`.
    TwoNode,
    /// `s(l) = (-1)^N l^(1+E-N) (l + 2) det(M^-1) det(H(l))` with
    /// `H = l^2 D + l^3 M + l C^-1 + l L*C D + l^2 L*C M + (L*C + l) Lp`.
    MultiNode { lc_star: DMatrix<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityCheck {
    #[serde(serialize_with = "complex_pairs")]
    pub samples: Vec<Complex64>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    /// Global sign calibrated at the first sample.
    pub sign: f64,
}

/// Both sides of the factorization at `lambda`: `det(A - lambda I)` and the
/// unsigned closed form.
pub fn characteristic_sides(
    sm: &StateMatrix,
    grid: &PowerGrid,
    form: &Factorization,
    lambda: Complex64,
) -> (Complex64, Complex64) {
    let n = grid.node_count();
    let e = grid.line_count();
    let dim = sm.dim();
    let shifted = DMatrix::from_fn(dim, dim, |r, c| {
        let v = Complex64::new(sm.a[(r, c)], 0.0);
        if r == c {
            v - lambda
        } else {
            v
        }
    });
    let lhs = shifted.determinant();

    let to_c = |m: &DMatrix<f64>| m.map(|v| Complex64::new(v, 0.0));
    let mm = to_c(&diag(
        &grid.nodes.iter().map(|x| x.inertia).collect::<Vec<_>>(),
    ));
    let dm = to_c(&diag(
        &grid.nodes.iter().map(|x| x.droop).collect::<Vec<_>>(),
    ));
    let costs = grid.costs();
    let c_inv = to_c(&diag_inv(&costs));
    let lp = to_c(&grid.weighted_laplacian());
    let det_m_inv: f64 = grid.nodes.iter().map(|x| 1.0 / x.inertia).product();
    let eye = DMatrix::<Complex64>::identity(n, n);
    let l = lambda;

    let base = &dm * (l * l) + &mm * (l * l * l) + &c_inv * l;
    let rhs = match form {
        Factorization::TwoNode => {
            let lc = to_c(&two_node_laplacian());
            let h = base + (&lc * &dm) * l + (&lc * &mm) * (l * l) + &lp * (l + 2.0);
            (l + 2.0) * det_m_inv * h.determinant()
        }
        Factorization::MultiNode { lc_star } => {
            let lsc = to_c(&(lc_star * diag(&costs)));
            let h = base + (&lsc * &dm) * l + (&lsc * &mm) * (l * l) + (&lsc + &eye * l) * &lp;
            let power = 1 + e as i32 - n as i32;
            let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * l.powi(power) * (l + 2.0) * det_m_inv * h.determinant()
        }
    };
    (lhs, rhs)
}

/// Maximum relative residual of the characteristic-polynomial factorization
/// over `samples`, with one global sign calibrated at the first sample.
pub fn characteristic_identity_check(
    sm: &StateMatrix,
    grid: &PowerGrid,
    form: &Factorization,
    samples: &[Complex64],
) -> Result<IdentityCheck> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("no sample points".into()));
    }
    let mut excluded = vec![Complex64::new(0.0, 0.0), Complex64::new(-2.0, 0.0)];
    if let Factorization::MultiNode { lc_star } = form {
        let lsc = lc_star * diag(&grid.costs());
        excluded.extend(spectrum(&(-lsc))?.eigenvalues);
    }
    for &s in samples {
        if excluded.iter().any(|x| (s - x).norm() < SINGULARITY_GUARD) {
            return Err(Error::SingularSample(s));
        }
    }
    let mut sign = 1.0;
    let mut residuals = Vec::with_capacity(samples.len());
    for (k, &s) in samples.iter().enumerate() {
        let (lhs, rhs) = characteristic_sides(sm, grid, form, s);
        if k == 0 {
            sign = if (lhs / rhs).re < 0.0 { -1.0 } else { 1.0 };
        }
        let scale = lhs.norm().max(rhs.norm()).max(f64::MIN_POSITIVE);
        residuals.push((lhs - rhs * sign).norm() / scale);
    }
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(IdentityCheck {
        samples: samples.to_vec(),
        residuals,
        max_residual,
        sign,
    })
}

/// Cubic `a0 + a1 l + a2 l^2 + a3 l^3` from the quadratic forms of the two
/// node `H` matrix along a unit vector `x`.
pub fn two_node_cubic(
    x: &[f64; 2],
    m: &[f64],
    d: &[f64],
    c: &[f64],
    b: f64,
    lc: &DMatrix<f64>,
) -> [f64; 4] {
    let xv = DVector::from_column_slice(x);
    let quad = |mat: &DMatrix<f64>| (xv.transpose() * mat * &xv)[(0, 0)];
    let lp = two_node_laplacian() * b;
    let mm = diag(m);
    let dm = diag(d);
    [
        quad(&(&lp * 2.0)),
        quad(&(&lp + sym_part(&(lc * &dm)) + diag_inv(c))),
        quad(&(sym_part(&(lc * &mm)) + &dm)),
        quad(&mm),
    ]
}

/// Routh-Hurwitz certificate for `a0 + a1 l + a2 l^2 + a3 l^3`: true when
/// every root is guaranteed to have nonpositive real part, either with
/// `a0 = 0` and `a1, a2, a3 > 0` (one root at the origin), or with all
/// `a_i > 0` and `a0 a3 < a1 a2`.
pub fn routh_hurwitz_cubic(a: [f64; 4]) -> bool {
    let [a0, a1, a2, a3] = a;
    if a1 <= 0.0 || a2 <= 0.0 || a3 <= 0.0 {
        return false;
    }
    if a0 == 0.0 {
        return true;
    }
    a0 > 0.0 && a0 * a3 < a1 * a2
}

/// Everything the `stability` command reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    pub scheme: Scheme,
    pub state_labels: Vec<String>,
    #[serde(serialize_with = "complex_pairs")]
    pub eigenvalues: Vec<Complex64>,
    pub structural_zero_count: usize,
    pub spectral_abscissa_excl_zeros: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sufficient_ok: Option<SufficientReport>,
    /// Residual of the factorization check, when one applies to the scheme.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identity_residual: Option<f64>,
    /// Residual with the row-scaled pair block in `L_c*` (single-failure
    /// scheme only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identity_residual_row_scaled: Option<f64>,
    /// False when the column-scaled `L_c*` fails the factorization check.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lc_star_consistent: Option<bool>,
}

fn complex_pairs<S: Serializer>(v: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

/// Tolerance for the factorization check to count as consistent.
pub const IDENTITY_TOL: f64 = 1e-8;

/// Full analysis of a scenario's post-failure configuration. `samples` are
/// used for the factorization check when the scheme has one.
pub fn analyze(scenario: &Scenario, samples: &[Complex64]) -> Result<StabilityReport> {
    let grid = &scenario.grid;
    let (links, ctx) = steady_configuration(scenario)?;
    let sm = assemble_state_matrix(grid, &links, &ctx)?;
    let sp = spectrum(&sm.a)?;
    let mut report = StabilityReport {
        scheme: scenario.scheme,
        state_labels: sm.labels.clone(),
        eigenvalues: sp.eigenvalues,
        structural_zero_count: sp.structural_zero_count,
        spectral_abscissa_excl_zeros: sp.spectral_abscissa_excl_zeros,
        sufficient_ok: None,
        identity_residual: None,
        identity_residual_row_scaled: None,
        lc_star_consistent: None,
    };
    let m: Vec<f64> = grid.nodes.iter().map(|x| x.inertia).collect();
    let d: Vec<f64> = grid.nodes.iter().map(|x| x.droop).collect();
    let c = grid.costs();

    match scenario.scheme {
        Scheme::PairFlow if grid.node_count() == 2 && grid.line_count() == 1 => {
            let b = grid.lines[0].susceptance;
            report.sufficient_ok = Some(check_sufficient_two_node(
                &m,
                &d,
                &c,
                b,
                &two_node_laplacian(),
            )?);
            let check = characteristic_identity_check(&sm, grid, &Factorization::TwoNode, samples)?;
            report.identity_residual = Some(check.max_residual);
        }
        Scheme::HybridSingle => {
            let (a, b) = scenario.comm.failures[0].link;
            let lc = post_failure_laplacian(&scenario.comm, grid.node_count());
            let printed = build_lc_star(grid, &lc, &c, (a, b), PairBlock::ColumnScaled)?;
            let row_scaled = build_lc_star(grid, &lc, &c, (a, b), PairBlock::RowScaled)?;
            report.sufficient_ok = Some(check_sufficient_multi_node(
                &m,
                &d,
                &c,
                &printed,
                &grid.weighted_laplacian(),
            )?);
            let first = characteristic_identity_check(
                &sm,
                grid,
                &Factorization::MultiNode { lc_star: printed },
                samples,
            )?;
            let second = characteristic_identity_check(
                &sm,
                grid,
                &Factorization::MultiNode {
                    lc_star: row_scaled,
                },
                samples,
            )?;
            report.identity_residual = Some(first.max_residual);
            report.identity_residual_row_scaled = Some(second.max_residual);
            report.lc_star_consistent = Some(first.max_residual <= IDENTITY_TOL);
        }
        _ => {}
    }
    Ok(report)
}

/// Communication Laplacian once every scheduled failure has happened.
pub fn post_failure_laplacian(comm: &CommGraph, n: usize) -> DMatrix<f64> {
    comm.laplacian(n, &comm.live_at(f64::INFINITY))
}
