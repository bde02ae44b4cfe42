//! The convolutional model and its exact multiplicative updates.
//!
//! The model approximates V by U = Σ_m W_m · rshift(H, m), a sum over M
//! lagged dictionary slices. `update_w` and `update_h` are the closed-form
//! multiplicative updates for all slices and for the activations under the
//! β-divergence; `step_proposed` alternates them, rebuilding the
//! reconstruction with the fresh dictionary before the activation update.

use alloc::vec::Vec;

use crate::betadiv::{divergence, Beta};
use crate::error::{Error, Result};
use crate::nnmat::NonnegMatrix;
use crate::rng::Rng;

/// Ordered list of M nonnegative K x I dictionary slices, one per lag.
/// M = 1 degenerates to plain NMF.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvDictionary {
    slices: Vec<NonnegMatrix>,
}

impl ConvDictionary {
    pub fn new(slices: Vec<NonnegMatrix>) -> Result<Self> {
        if slices.is_empty() {
            return Err(Error::InvalidMatrix("dictionary needs at least one lag"));
        }
        let shape = slices[0].shape();
        if slices.iter().any(|s| s.shape() != shape) {
            return Err(Error::InvalidMatrix("dictionary slices differ in shape"));
        }
        Ok(ConvDictionary { slices })
    }

    /// Number of lags M.
    pub fn num_lags(&self) -> usize {
        self.slices.len()
    }

    /// Number of visible variables K.
    pub fn rows(&self) -> usize {
        self.slices[0].rows()
    }

    /// Factorization rank I.
    pub fn cols(&self) -> usize {
        self.slices[0].cols()
    }

    pub fn slice(&self, m: usize) -> &NonnegMatrix {
        &self.slices[m]
    }

    pub fn slices(&self) -> &[NonnegMatrix] {
        &self.slices
    }

    pub fn slices_mut(&mut self) -> &mut [NonnegMatrix] {
        &mut self.slices
    }
}

/// U = Σ_m W_m · rshift(H, m).
pub fn reconstruct(w: &ConvDictionary, h: &NonnegMatrix) -> Result<NonnegMatrix> {
    if w.cols() != h.rows() {
        return Err(Error::DimMismatch {
            op: "reconstruct",
            lhs: (w.rows(), w.cols()),
            rhs: h.shape(),
        });
    }
    let mut u = w.slice(0).matmul(h)?;
    for m in 1..w.num_lags() {
        u.add_assign(&w.slice(m).matmul(&h.right_shift(m))?)?;
    }
    Ok(u)
}

/// Multiplicative update of every dictionary slice, all computed from the
/// same input reconstruction U (Jacobi-style):
///
///   W_m ← W_m ∘ ([V ∘ U^{◦(β−2)}] · rshift(H,m)ᵀ) ⨸ (U^{◦(β−1)} · rshift(H,m)ᵀ)
pub fn update_w(
    w: &ConvDictionary,
    h: &NonnegMatrix,
    v: &NonnegMatrix,
    u: &NonnegMatrix,
    beta: Beta,
    eps: f64,
) -> Result<ConvDictionary> {
    let b = beta.value();
    let va = v.hadamard(&u.entrywise_pow(b - 2.0, eps))?;
    let ub1 = u.entrywise_pow(b - 1.0, eps);
    let mut slices = Vec::with_capacity(w.num_lags());
    for m in 0..w.num_lags() {
        let hs = h.right_shift(m);
        let num = va.matmul_bt(&hs)?;
        let den = ub1.matmul_bt(&hs)?;
        slices.push(w.slice(m).hadamard(&num.safe_divide(&den, eps)?)?);
    }
    ConvDictionary::new(slices)
}

/// Multiplicative update of the activations:
///
///   H ← H ∘ (Σ_m W_mᵀ · lshift(V ∘ U^{◦(β−2)}, m)) ⨸ (Σ_m W_mᵀ · lshift(U^{◦(β−1)}, m))
///
/// Exponentiation happens before shifting, so columns shifted in from past
/// the right edge contribute exactly zero to both sums.
pub fn update_h(
    w: &ConvDictionary,
    h: &NonnegMatrix,
    v: &NonnegMatrix,
    u: &NonnegMatrix,
    beta: Beta,
    eps: f64,
) -> Result<NonnegMatrix> {
    let b = beta.value();
    let va = v.hadamard(&u.entrywise_pow(b - 2.0, eps))?;
    let ub1 = u.entrywise_pow(b - 1.0, eps);
    let mut num = w.slice(0).matmul_at(&va)?;
    let mut den = w.slice(0).matmul_at(&ub1)?;
    for m in 1..w.num_lags() {
        num.add_assign(&w.slice(m).matmul_at(&va.left_shift(m))?)?;
        den.add_assign(&w.slice(m).matmul_at(&ub1.left_shift(m))?)?;
    }
    h.hadamard(&num.safe_divide(&den, eps)?)
}

/// Cheap reconstruction refresh after replacing a single dictionary slice:
///
///   U ← U + (W_m^new − W_m^old) · rshift(H, m)
///
/// Rounding can leave tiny negative entries; those are clamped to zero.
pub fn refresh_u_incremental(
    u: &NonnegMatrix,
    w_old_m: &NonnegMatrix,
    w_new_m: &NonnegMatrix,
    h: &NonnegMatrix,
    m: usize,
) -> Result<NonnegMatrix> {
    w_old_m.check_same_shape("refresh_u_incremental", w_new_m)?;
    if w_old_m.cols() != h.rows() || u.rows() != w_old_m.rows() || u.cols() != h.cols() {
        return Err(Error::DimMismatch {
            op: "refresh_u_incremental",
            lhs: u.shape(),
            rhs: h.shape(),
        });
    }
    let hs = h.right_shift(m);
    let (rank, n) = hs.shape();
    let mut out = u.clone();
    let data = out.data_mut();
    for k in 0..w_old_m.rows() {
        for i in 0..rank {
            let delta = w_new_m.get(k, i) - w_old_m.get(k, i);
            if delta == 0.0 {
                continue;
            }
            let src = hs.row(i);
            let dst = &mut data[k * n..(k + 1) * n];
            for (d, &x) in dst.iter_mut().zip(src) {
                *d += delta * x;
            }
        }
    }
    for x in out.data_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    Ok(out)
}

/// Which dictionary the activation update reads: the freshly updated
/// W^{t+1} (default, matching the reconstruction it is paired with) or the
/// pre-update W^t.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HUpdateWeights {
    #[default]
    New,
    Old,
}

/// One optimizer's mutable state: dictionary, activations, cached
/// reconstruction, loss parameters, and the iteration counter.
#[derive(Debug, Clone)]
pub struct FactorizationState {
    pub w: ConvDictionary,
    pub h: NonnegMatrix,
    pub u: NonnegMatrix,
    pub beta: Beta,
    pub eps: f64,
    pub t: usize,
}

impl FactorizationState {
    pub fn new(w: ConvDictionary, h: NonnegMatrix, beta: Beta, eps: f64) -> Result<Self> {
        let u = reconstruct(&w, &h)?;
        Ok(FactorizationState {
            w,
            h,
            u,
            beta,
            eps,
            t: 0,
        })
    }

    /// Current loss D_β(V ‖ U).
    pub fn loss(&self, v: &NonnegMatrix) -> Result<f64> {
        divergence(v, &self.u, self.beta, self.eps)
    }
}

/// One alternating iteration of the exact updates; returns the loss after
/// both updates.
pub fn step_proposed(state: &mut FactorizationState, v: &NonnegMatrix) -> Result<f64> {
    step_proposed_with(state, v, HUpdateWeights::New)
}

/// `step_proposed` with an explicit choice of dictionary for the
/// activation update.
///
/// The intermediate reconstruction Ũ is maintained incrementally slice by
/// slice; this agrees with a full recomputation to rounding error.
pub fn step_proposed_with(
    state: &mut FactorizationState,
    v: &NonnegMatrix,
    h_weights: HUpdateWeights,
) -> Result<f64> {
    let w_new = update_w(&state.w, &state.h, v, &state.u, state.beta, state.eps)?;
    let mut u_tilde = state.u.clone();
    for m in 0..w_new.num_lags() {
        u_tilde = refresh_u_incremental(&u_tilde, state.w.slice(m), w_new.slice(m), &state.h, m)?;
    }
    let w_for_h = match h_weights {
        HUpdateWeights::New => &w_new,
        HUpdateWeights::Old => &state.w,
    };
    let h_new = update_h(w_for_h, &state.h, v, &u_tilde, state.beta, state.eps)?;
    state.w = w_new;
    state.h = h_new;
    state.u = reconstruct(&state.w, &state.h)?;
    state.t += 1;
    state.loss(v)
}

/// Fit driver options. The benchmark-style run is a fixed iteration budget;
/// `rel_tol` adds an optional relative loss-change stop on top of it.
#[derive(Debug, Clone)]
pub struct FitOptions {
    pub max_iters: usize,
    pub rel_tol: Option<f64>,
    pub record_trace: bool,
    pub h_update_weights: HUpdateWeights,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iters: 1000,
            rel_tol: None,
            record_trace: true,
            h_update_weights: HUpdateWeights::New,
        }
    }
}

/// Alternate the exact updates until the iteration budget is exhausted or
/// the relative loss change drops below `rel_tol`.
///
/// The trace holds one loss per iteration including iteration 0 (the loss
/// of the initialization). The init must be strictly positive;
/// multiplicative updates cannot move an exactly-zero entry.
pub fn fit(
    v: &NonnegMatrix,
    init_w: ConvDictionary,
    init_h: NonnegMatrix,
    beta: Beta,
    eps: f64,
    opts: &FitOptions,
) -> Result<(FactorizationState, Vec<f64>)> {
    check_strictly_positive(&init_w, &init_h)?;
    let mut state = FactorizationState::new(init_w, init_h, beta, eps)?;
    let mut trace = Vec::new();
    let mut prev = state.loss(v)?;
    if opts.record_trace {
        trace.push(prev);
    }
    for t in 1..=opts.max_iters {
        let loss = step_proposed_with(&mut state, v, opts.h_update_weights)?;
        if !loss.is_finite() {
            return Err(Error::NumericalFailure { iteration: t });
        }
        if opts.record_trace {
            trace.push(loss);
        }
        if let Some(tol) = opts.rel_tol {
            let change = (prev - loss).abs() / prev.abs().max(eps);
            if change < tol {
                break;
            }
        }
        prev = loss;
    }
    Ok((state, trace))
}

pub(crate) fn check_strictly_positive(w: &ConvDictionary, h: &NonnegMatrix) -> Result<()> {
    let all_positive = w
        .slices()
        .iter()
        .all(|s| s.as_slice().iter().all(|&x| x > 0.0))
        && h.as_slice().iter().all(|&x| x > 0.0);
    if all_positive {
        Ok(())
    } else {
        Err(Error::NonPositiveInit)
    }
}

/// Random strictly positive init with entries uniform on (0.1, 1.1).
pub fn random_init(
    k: usize,
    rank: usize,
    n: usize,
    lags: usize,
    rng: &mut Rng,
) -> (ConvDictionary, NonnegMatrix) {
    let mut slices = Vec::with_capacity(lags);
    for _ in 0..lags {
        slices.push(NonnegMatrix::from_fn(k, rank, |_, _| rng.uniform(0.1, 1.1)));
    }
    let h = NonnegMatrix::from_fn(rank, n, |_, _| rng.uniform(0.1, 1.1));
    (ConvDictionary::new(slices).expect("lags >= 1"), h)
}
