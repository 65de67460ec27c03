//! The alternating-minimization solver.
//!
//! The objective minimized is
//!
//! ```text
//! ‖XᵀW + 1bᵀ − F‖² + α‖XᵀW − QP‖² + β(‖MF − F‖² + ‖MQ − Q‖²) + γ(‖W‖₂,₁ + ‖M‖₁)
//! s.t. 0 ≤ F ≤ 1, F_labeled = Y_labeled, QᵀQ = I, M symmetric, nonnegative, zero diagonal
//! ```
//!
//! with `P = QᵀXᵀW` substituted in closed form. Each iteration refreshes the
//! ℓ2,1 reweighting `D`, then updates `Q`, `W`, `b`, `F` and `M` in turn.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, SemiSplit};
use crate::error::{Error, Result};
use crate::graph::{self, Bandwidth, GraphInit, SparseGraph};
use crate::linalg;
use crate::subspace;

/// Standard deviation of the random `W` initialization (variance 0.01).
const W_INIT_STD: f64 = 0.1;

/// Which `C` matrix drives the subspace update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CMatrixForm {
    /// `α·XᵀWWᵀX − β(M−I)ᵀ(M−I)`: the exact `Q` block of the objective.
    #[default]
    AlphaScaled,
    /// `XᵀWWᵀX − β(M−I)ᵀ(M−I)` regardless of `α`.
    Unscaled,
}

/// Which iterates feed the `W` and `b` updates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateOrder {
    /// `W` uses the freshly computed `Q`, `b` uses the fresh `W`.
    #[default]
    Fresh,
    /// `W` uses the previous iteration's `Q` and `b` uses the previous `W`.
    Literal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SgmfsConfig {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Label subspace dimension; `None` means `⌈c/2⌉`.
    pub lsd: Option<usize>,
    pub max_iters: usize,
    /// Stop once the relative objective change drops below this.
    pub tol: f64,
    /// Smoothing inside the ℓ2,1 reweighting.
    pub epsilon_d: f64,
    pub seed: u64,
    pub sigma: Bandwidth,
    pub graph_init: GraphInit,
    pub c_form: CMatrixForm,
    pub update_order: UpdateOrder,
    /// Multiplicative graph updates per iteration, all with the same `F` and `Q`.
    /// A single step per iteration converges very slowly once `M` turns sparse.
    pub graph_steps: usize,
}

impl Default for SgmfsConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
            lsd: None,
            max_iters: 100,
            tol: 1e-5,
            epsilon_d: 1e-12,
            seed: 0,
            sigma: Bandwidth::Auto,
            graph_init: GraphInit::Full,
            c_form: CMatrixForm::AlphaScaled,
            update_order: UpdateOrder::Fresh,
            graph_steps: 10,
        }
    }
}

impl SgmfsConfig {
    pub fn validate(&self, n_samples: usize, n_labels: usize) -> Result<()> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("tol", self.tol),
            ("epsilon_d", self.epsilon_d),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("{v} must be positive")));
            }
        }
        if self.max_iters == 0 {
            return Err(Error::param("max_iters", "must be at least 1"));
        }
        if self.graph_steps == 0 {
            return Err(Error::param("graph_steps", "must be at least 1"));
        }
        let lsd = self.resolved_lsd(n_labels);
        let bound = n_samples.min(n_labels);
        if lsd == 0 || lsd > bound {
            return Err(Error::param(
                "lsd",
                format!("{lsd} must be in 1..={bound} (min of samples and labels)"),
            ));
        }
        Ok(())
    }

    pub fn resolved_lsd(&self, n_labels: usize) -> usize {
        self.lsd.unwrap_or_else(|| subspace::default_lsd(n_labels))
    }

    fn c_alpha(&self) -> f64 {
        match self.c_form {
            CMatrixForm::AlphaScaled => self.alpha,
            CMatrixForm::Unscaled => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    /// `d × c` feature weights.
    pub w: DMatrix<f64>,
    /// Length-`c` bias.
    pub b: DVector<f64>,
    /// `n × c` soft labels.
    pub f: DMatrix<f64>,
    pub m: SparseGraph,
    /// `n × lsd` orthonormal shared-label embedding.
    pub q: DMatrix<f64>,
    pub iteration: usize,
    pub objective_trace: Vec<f64>,
    pub converged: bool,
}

/// Features ranked by the row norms of `W`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanking {
    pub scores: Vec<f64>,
    /// Feature indices, highest score first; ties go to the lower index.
    pub order: Vec<usize>,
}

impl FeatureRanking {
    pub fn from_weights(w: &DMatrix<f64>) -> Self {
        let scores: Vec<f64> = w.row_iter().map(|r| r.norm()).collect();
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        Self { scores, order }
    }

    /// 1-based rank of every feature.
    pub fn ranks(&self) -> Vec<usize> {
        let mut ranks = vec![0; self.order.len()];
        for (r, &i) in self.order.iter().enumerate() {
            ranks[i] = r + 1;
        }
        ranks
    }
}

/// Top `⌈proportion·d⌉` features in ranking order.
pub fn select_features(ranking: &FeatureRanking, proportion: f64) -> Result<Vec<usize>> {
    if !(proportion > 0.0 && proportion <= 1.0) {
        return Err(Error::param(
            "proportion",
            format!("{proportion} is outside (0, 1]"),
        ));
    }
    let d = ranking.order.len();
    let count = ((proportion * d as f64 - 1e-9).ceil() as usize).clamp(1, d);
    Ok(ranking.order[..count].to_vec())
}

/// `d_i = 1 / (2·sqrt(‖W_i‖² + ε))`, the diagonal of the ℓ2,1 reweighting matrix.
pub fn compute_d(w: &DMatrix<f64>, epsilon_d: f64) -> DVector<f64> {
    DVector::from_iterator(
        w.nrows(),
        w.row_iter()
            .map(|r| 1.0 / (2.0 * (r.norm_squared() + epsilon_d).sqrt())),
    )
}

/// `X` with each feature's sample mean removed, i.e. `XH` for the centering matrix `H`.
pub fn center_columns(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.ncols() as f64;
    let mut xc = x.clone();
    for mut row in xc.row_iter_mut() {
        let mean = row.sum() / n;
        row.add_scalar_mut(-mean);
    }
    xc
}

/// Solves `(XHXᵀ + γD + αX(I − QQᵀ)Xᵀ) W = XHF`.
///
/// Uses a `d × d` Cholesky solve when `n ≥ d` and the `n × n` Woodbury form otherwise.
pub fn update_w(
    x: &DMatrix<f64>,
    f: &DMatrix<f64>,
    q: &DMatrix<f64>,
    d_vec: &DVector<f64>,
    alpha: f64,
    gamma: f64,
) -> Result<DMatrix<f64>> {
    check_w_shapes(x, f, q, d_vec)?;
    if x.ncols() >= x.nrows() {
        solve_w_direct(x, f, q, d_vec, alpha, gamma)
    } else {
        solve_w_woodbury(x, f, q, d_vec, alpha, gamma)
    }
}

fn check_w_shapes(x: &DMatrix<f64>, f: &DMatrix<f64>, q: &DMatrix<f64>, d_vec: &DVector<f64>) -> Result<()> {
    if f.nrows() != x.ncols() || q.nrows() != x.ncols() || d_vec.len() != x.nrows() {
        return Err(Error::Shape(format!(
            "X {}×{}, F {}×{}, Q {}×{}, D {}",
            x.nrows(),
            x.ncols(),
            f.nrows(),
            f.ncols(),
            q.nrows(),
            q.ncols(),
            d_vec.len()
        )));
    }
    Ok(())
}

/// Direct route: assemble the `d × d` system and factor it.
pub fn solve_w_direct(
    x: &DMatrix<f64>,
    f: &DMatrix<f64>,
    q: &DMatrix<f64>,
    d_vec: &DVector<f64>,
    alpha: f64,
    gamma: f64,
) -> Result<DMatrix<f64>> {
    check_w_shapes(x, f, q, d_vec)?;
    let xc = center_columns(x);
    let xq = x * q;
    let mut system = &xc * xc.transpose() + (x * x.transpose() - &xq * xq.transpose()) * alpha;
    for i in 0..system.nrows() {
        system[(i, i)] += gamma * d_vec[i];
    }
    let rhs = &xc * f;
    linalg::spd_solve(&system, &rhs).ok_or(Error::IllConditioned)
}

/// Woodbury route for `n < d`.
///
/// With `Γ = γD` and `N = H + α(I − QQᵀ)` the system matrix is `Γ + XNXᵀ`, and
/// `(Γ + XNXᵀ)⁻¹ = Γ⁻¹ − Γ⁻¹XN(I + XᵀΓ⁻¹XN)⁻¹XᵀΓ⁻¹`, which only needs an
/// `n × n` solve and never inverts `N` (singular when `1 ∈ span(Q)`).
pub fn solve_w_woodbury(
    x: &DMatrix<f64>,
    f: &DMatrix<f64>,
    q: &DMatrix<f64>,
    d_vec: &DVector<f64>,
    alpha: f64,
    gamma: f64,
) -> Result<DMatrix<f64>> {
    check_w_shapes(x, f, q, d_vec)?;
    let n = x.ncols();
    let gamma_inv = d_vec.map(|d| 1.0 / (gamma * d));
    if gamma_inv.iter().any(|v| !v.is_finite()) {
        return Err(Error::IllConditioned);
    }
    let scale_rows = |m: &DMatrix<f64>, s: &DVector<f64>| {
        let mut out = m.clone();
        for (i, mut row) in out.row_iter_mut().enumerate() {
            row *= s[i];
        }
        out
    };

    let xc = center_columns(x);
    let y = scale_rows(&(&xc * f), &gamma_inv);
    let k = x.tr_mul(&scale_rows(x, &gamma_inv));

    let mut nmat = q * q.transpose() * (-alpha);
    nmat.add_scalar_mut(-1.0 / n as f64);
    for i in 0..n {
        nmat[(i, i)] += 1.0 + alpha;
    }
    let mut inner = &k * &nmat;
    for i in 0..n {
        inner[(i, i)] += 1.0;
    }
    let z = linalg::lu_solve(&inner, &x.tr_mul(&y)).ok_or(Error::IllConditioned)?;
    let correction = scale_rows(&(x * (&nmat * z)), &gamma_inv);
    Ok(y - correction)
}

/// `b = (Fᵀ1 − WᵀX1) / n`.
pub fn update_b(f: &DMatrix<f64>, x: &DMatrix<f64>, w: &DMatrix<f64>) -> DVector<f64> {
    let n = x.ncols() as f64;
    let f_sum = DVector::from_iterator(f.ncols(), f.column_iter().map(|c| c.sum()));
    let x_sum = DVector::from_iterator(x.nrows(), x.row_iter().map(|r| r.sum()));
    (f_sum - w.tr_mul(&x_sum)) / n
}

/// `F̃ = K⁻¹(XᵀW + 1bᵀ)` with `K = I + β(M − I)ᵀ(M − I)`, then unlabeled
/// entries clamped into `[0, 1]` and labeled rows overwritten with their labels.
pub fn update_f(
    x: &DMatrix<f64>,
    w: &DMatrix<f64>,
    b: &DVector<f64>,
    m: &SparseGraph,
    beta: f64,
    labels: &DMatrix<f64>,
    split: &SemiSplit,
) -> Result<DMatrix<f64>> {
    let gram = subspace::residual_gram(m);
    update_f_with_gram(x, w, b, &gram, beta, labels, split)
}

pub(crate) fn update_f_with_gram(
    x: &DMatrix<f64>,
    w: &DMatrix<f64>,
    b: &DVector<f64>,
    gram: &DMatrix<f64>,
    beta: f64,
    labels: &DMatrix<f64>,
    split: &SemiSplit,
) -> Result<DMatrix<f64>> {
    let n = x.ncols();
    if labels.nrows() != n || split.n_samples() != n {
        return Err(Error::Shape("labels or split do not match X".into()));
    }
    let k = DMatrix::<f64>::identity(n, n) + gram * beta;
    let rhs = raw_prediction(x, w, b);
    let f_tilde = linalg::spd_solve(&k, &rhs)
        .ok_or_else(|| Error::InvalidInput("K is not positive definite".into()))?;
    Ok(project_soft_labels(f_tilde, labels, split))
}

/// Guards the clamped F step against raising the objective.
///
/// Clamping the unconstrained minimizer is not the box-constrained minimizer,
/// and occasionally lands higher than the current `F`. In that case take the
/// best point on the segment from `prev` to `candidate`; both ends are
/// feasible, so every point between them is too.
pub(crate) fn safeguard_f(
    prev: &DMatrix<f64>,
    candidate: DMatrix<f64>,
    x: &DMatrix<f64>,
    w: &DMatrix<f64>,
    b: &DVector<f64>,
    gram: &DMatrix<f64>,
    beta: f64,
) -> DMatrix<f64> {
    // φ(F) = tr(FᵀKF) − 2tr(FᵀG) up to a constant, K = I + β·gram, G = XᵀW + 1bᵀ.
    let g = raw_prediction(x, w, b);
    let k_mul = |f: &DMatrix<f64>| f + gram * f * beta;
    let delta = &candidate - prev;
    let k_delta = k_mul(&delta);
    let curvature = delta.dot(&k_delta);
    if curvature <= 0.0 {
        return candidate;
    }
    let slope = delta.dot(&(k_mul(prev) - &g));
    // φ(prev + τΔ) − φ(prev) = τ²·curvature + 2τ·slope
    if curvature + 2.0 * slope <= 0.0 {
        return candidate;
    }
    let tau = (-slope / curvature).clamp(0.0, 1.0);
    prev + delta * tau
}

/// `XᵀW + 1bᵀ`.
fn raw_prediction(x: &DMatrix<f64>, w: &DMatrix<f64>, b: &DVector<f64>) -> DMatrix<f64> {
    let mut r = x.tr_mul(w);
    for mut row in r.row_iter_mut() {
        row += b.transpose();
    }
    r
}

/// Clamps unlabeled rows into `[0, 1]` and writes the ground truth into labeled rows.
pub fn project_soft_labels(mut f: DMatrix<f64>, labels: &DMatrix<f64>, split: &SemiSplit) -> DMatrix<f64> {
    f.apply(|v| *v = v.clamp(0.0, 1.0));
    for &i in split.labeled_indices() {
        f.set_row(i, &labels.row(i));
    }
    f
}

/// Individual terms of the objective.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ObjectiveTerms {
    /// `‖XᵀW + 1bᵀ − F‖²`
    pub fit: f64,
    /// `α‖XᵀW − QQᵀXᵀW‖²`
    pub subspace: f64,
    /// `β(‖MF − F‖² + ‖MQ − Q‖²)`
    pub graph: f64,
    /// `γ‖W‖₂,₁`
    pub row_sparsity: f64,
    /// `γ‖M‖₁`
    pub graph_sparsity: f64,
}

impl ObjectiveTerms {
    pub fn total(&self) -> f64 {
        self.fit + self.subspace + self.graph + self.row_sparsity + self.graph_sparsity
    }
}

/// Objective terms with the true (unsmoothed) `‖W‖₂,₁`.
pub fn objective_terms(state: &SolverState, x: &DMatrix<f64>, config: &SgmfsConfig) -> ObjectiveTerms {
    terms_with_row_penalty(state, x, config, state.w.row_iter().map(|r| r.norm()).sum())
}

/// The objective value of a state.
pub fn objective(state: &SolverState, x: &DMatrix<f64>, config: &SgmfsConfig) -> f64 {
    objective_terms(state, x, config).total()
}

/// The objective with `‖W‖₂,₁` replaced by `tr(WᵀDW)` for a fixed reweighting `D`.
pub fn surrogate_objective(
    state: &SolverState,
    x: &DMatrix<f64>,
    config: &SgmfsConfig,
    d_vec: &DVector<f64>,
) -> f64 {
    let penalty = state
        .w
        .row_iter()
        .zip(d_vec.iter())
        .map(|(r, d)| d * r.norm_squared())
        .sum();
    terms_with_row_penalty(state, x, config, penalty).total()
}

fn terms_with_row_penalty(
    state: &SolverState,
    x: &DMatrix<f64>,
    config: &SgmfsConfig,
    row_penalty: f64,
) -> ObjectiveTerms {
    let xtw = x.tr_mul(&state.w);
    let fit = (raw_prediction(x, &state.w, &state.b) - &state.f).norm_squared();
    let proj = &state.q * state.q.tr_mul(&xtw);
    let subspace = config.alpha * (&xtw - proj).norm_squared();
    let m = state.m.weights();
    let graph =
        config.beta * ((m * &state.f - &state.f).norm_squared() + (m * &state.q - &state.q).norm_squared());
    ObjectiveTerms {
        fit,
        subspace,
        graph,
        row_sparsity: config.gamma * row_penalty,
        graph_sparsity: config.gamma * state.m.l1_norm(),
    }
}

/// A block of variables updated within one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Block {
    Q,
    /// `W` and `b` together: `b` is eliminated in closed form inside the `W` solve.
    WB,
    F,
    M,
}

/// Surrogate objective (at the iteration's `D`) before and after one block update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockDescent {
    pub block: Block,
    pub before: f64,
    pub after: f64,
}

/// What an observer sees after each completed iteration.
#[derive(Debug)]
pub struct IterationRecord<'a> {
    pub state: &'a SolverState,
    pub objective: f64,
    pub blocks: &'a [BlockDescent],
}

/// Runs the solver to convergence and ranks features.
pub fn fit(
    dataset: &Dataset,
    split: &SemiSplit,
    config: &SgmfsConfig,
) -> Result<(SolverState, FeatureRanking)> {
    fit_inner(dataset, split, config, None)
}

/// As [`fit`], calling `observer` after every iteration.
///
/// Per-block surrogate values are only computed when an observer is present.
pub fn fit_with_observer(
    dataset: &Dataset,
    split: &SemiSplit,
    config: &SgmfsConfig,
    observer: &mut dyn FnMut(&IterationRecord<'_>),
) -> Result<(SolverState, FeatureRanking)> {
    fit_inner(dataset, split, config, Some(observer))
}

fn fit_inner(
    dataset: &Dataset,
    split: &SemiSplit,
    config: &SgmfsConfig,
    mut observer: Option<&mut dyn FnMut(&IterationRecord<'_>)>,
) -> Result<(SolverState, FeatureRanking)> {
    let x = dataset.features();
    let labels = dataset.labels();
    let (d, n) = x.shape();
    let c = dataset.n_labels();
    if split.n_samples() != n {
        return Err(Error::Shape(format!(
            "split covers {} samples, dataset has {n}",
            split.n_samples()
        )));
    }
    config.validate(n, c)?;
    let lsd = config.resolved_lsd(c);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let normal = Normal::new(0.0, W_INIT_STD).expect("valid normal");
    let w0 = DMatrix::from_fn(d, c, |_, _| normal.sample(&mut rng));
    let m0 = graph::init_graph(x, config.sigma, config.graph_init)?;
    let mut f0 = DMatrix::zeros(n, c);
    for &i in split.labeled_indices() {
        f0.set_row(i, &labels.row(i));
    }

    let mut state = SolverState {
        w: w0,
        b: DVector::zeros(c),
        f: f0,
        m: m0,
        q: DMatrix::zeros(n, lsd),
        iteration: 0,
        objective_trace: Vec::new(),
        converged: false,
    };
    let observing = observer.is_some();
    let mut blocks = Vec::with_capacity(4);

    while state.iteration < config.max_iters {
        blocks.clear();
        let d_vec = compute_d(&state.w, config.epsilon_d);
        let gram = subspace::residual_gram(&state.m);
        let first = state.iteration == 0;
        let record = |blocks: &mut Vec<BlockDescent>, block, before: f64, st: &SolverState| {
            if observing && !first {
                blocks.push(BlockDescent {
                    block,
                    before,
                    after: surrogate_objective(st, x, config, &d_vec),
                });
            }
        };
        let mut before = if observing && !first {
            surrogate_objective(&state, x, config, &d_vec)
        } else {
            0.0
        };

        let c_matrix = subspace::c_from_parts(&x.tr_mul(&state.w), &gram, config.c_alpha(), config.beta);
        let q_new = subspace::update_q(&c_matrix, lsd)?;
        let q_prev = std::mem::replace(&mut state.q, q_new);
        record(&mut blocks, Block::Q, before, &state);
        before = blocks.last().map_or(before, |b| b.after);

        let q_for_w = match config.update_order {
            UpdateOrder::Literal if !first => &q_prev,
            _ => &state.q,
        };
        let w_new = update_w(x, &state.f, q_for_w, &d_vec, config.alpha, config.gamma)?;
        let w_prev = std::mem::replace(&mut state.w, w_new);
        state.b = match config.update_order {
            UpdateOrder::Fresh => update_b(&state.f, x, &state.w),
            UpdateOrder::Literal => update_b(&state.f, x, &w_prev),
        };
        record(&mut blocks, Block::WB, before, &state);
        before = blocks.last().map_or(before, |b| b.after);

        let candidate = update_f_with_gram(x, &state.w, &state.b, &gram, config.beta, labels, split)?;
        state.f = safeguard_f(&state.f, candidate, x, &state.w, &state.b, &gram, config.beta);
        record(&mut blocks, Block::F, before, &state);
        before = blocks.last().map_or(before, |b| b.after);

        let splits = graph::build_splits(&state.f, &state.q, config.gamma, config.beta)?;
        for _ in 0..config.graph_steps {
            state.m = graph::update_graph(&state.m, &splits);
        }
        record(&mut blocks, Block::M, before, &state);

        state.iteration += 1;
        let value = objective(&state, x, config);
        if !value.is_finite() {
            return Err(Error::InvalidInput(format!(
                "objective became non-finite at iteration {}",
                state.iteration
            )));
        }
        let prev = state.objective_trace.last().copied();
        state.objective_trace.push(value);
        if let Some(obs) = observer.as_mut() {
            obs(&IterationRecord {
                state: &state,
                objective: value,
                blocks: &blocks,
            });
        }
        if let Some(prev) = prev {
            if (prev - value).abs() / prev.max(1e-12) < config.tol {
                state.converged = true;
                break;
            }
        }
    }

    let ranking = FeatureRanking::from_weights(&state.w);
    Ok((state, ranking))
}
