//! The four prior-art convolutional update schemes the exact updates are
//! compared against, generalized to runtime β.
//!
//! The generalization replaces each scheme's native KL (β = 1) or
//! Euclidean (β = 2) exponents with β−1 / β−2 while keeping its structural
//! signature: per-lag sequential updates vs one summed update, shifted vs
//! unshifted activation denominator, and incremental vs full refresh of
//! the reconstruction. All schemes are scored under the same D_β.

use core::fmt;
use core::str::FromStr;

use crate::betadiv::Beta;
use crate::cnmf::{
    reconstruct, refresh_u_incremental, step_proposed, update_w, FactorizationState,
};
use crate::error::Result;
use crate::nnmat::NonnegMatrix;

/// Update scheme selector. The string forms are the CLI-facing tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Proposed,
    SmaragdisBiased,
    SmaragdisAverage,
    Schmidt,
    Wang,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Proposed,
        Method::SmaragdisBiased,
        Method::SmaragdisAverage,
        Method::Schmidt,
        Method::Wang,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::SmaragdisBiased => "smaragdis_biased",
            Method::SmaragdisAverage => "smaragdis_average",
            Method::Schmidt => "schmidt",
            Method::Wang => "wang",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Error carrying the rejected tag, for CLI messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownMethod(pub alloc::string::String);

impl fmt::Display for UnknownMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown method '{}'; valid tags are: ", self.0)?;
        for (i, m) in Method::ALL.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(m.tag())?;
        }
        Ok(())
    }
}

impl FromStr for Method {
    type Err = UnknownMethod;

    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.tag() == s)
            .ok_or_else(|| UnknownMethod(alloc::string::String::from(s)))
    }
}

/// One iteration of the given method; returns the loss after the iteration.
pub fn step(method: Method, state: &mut FactorizationState, v: &NonnegMatrix) -> Result<f64> {
    match method {
        Method::Proposed => step_proposed(state, v),
        Method::SmaragdisBiased => step_smaragdis_biased(state, v),
        Method::SmaragdisAverage => step_smaragdis_average(state, v),
        Method::Schmidt => step_schmidt(state, v),
        Method::Wang => step_wang(state, v),
    }
}

/// Per-lag multiplicative factor for W_m from the current reconstruction.
fn w_slice_factors(
    h: &NonnegMatrix,
    v: &NonnegMatrix,
    u: &NonnegMatrix,
    beta: Beta,
    eps: f64,
    m: usize,
) -> Result<(NonnegMatrix, NonnegMatrix)> {
    let b = beta.value();
    let va = v.hadamard(&u.entrywise_pow(b - 2.0, eps))?;
    let ub1 = u.entrywise_pow(b - 1.0, eps);
    let hs = h.right_shift(m);
    Ok((va.matmul_bt(&hs)?, ub1.matmul_bt(&hs)?))
}

/// Per-lag activation multiplier with the numerator aligned via the left
/// shift but the denominator left unshifted — the generalization of the
/// 1-matrix that is "not aligned with the U-matrix" in the Smaragdis and
/// Wang schemes.
fn h_factors_unshifted_denominator(
    w_m: &NonnegMatrix,
    v: &NonnegMatrix,
    u: &NonnegMatrix,
    beta: Beta,
    eps: f64,
    m: usize,
) -> Result<(NonnegMatrix, NonnegMatrix)> {
    let b = beta.value();
    let va = v.hadamard(&u.entrywise_pow(b - 2.0, eps))?;
    let num = w_m.matmul_at(&va.left_shift(m))?;
    let den = w_m.matmul_at(&u.entrywise_pow(b - 1.0, eps))?;
    Ok((num, den))
}

/// Smaragdis' original scheme: for each lag in order, update W_m, rebuild
/// U in full, update H from that lag alone (unshifted denominator), and
/// rebuild U again. The repeated per-lag H updates bias H toward the last
/// lag.
pub fn step_smaragdis_biased(state: &mut FactorizationState, v: &NonnegMatrix) -> Result<f64> {
    let lags = state.w.num_lags();
    for m in 0..lags {
        let (num, den) = w_slice_factors(&state.h, v, &state.u, state.beta, state.eps, m)?;
        let updated = state
            .w
            .slice(m)
            .hadamard(&num.safe_divide(&den, state.eps)?)?;
        state.w.slices_mut()[m] = updated;
        state.u = reconstruct(&state.w, &state.h)?;

        let (num_h, den_h) =
            h_factors_unshifted_denominator(state.w.slice(m), v, &state.u, state.beta, state.eps, m)?;
        state.h = state.h.hadamard(&num_h.safe_divide(&den_h, state.eps)?)?;
        state.u = reconstruct(&state.w, &state.h)?;
    }
    state.t += 1;
    state.loss(v)
}

/// Smaragdis' averaged scheme: update all W_m from Hᵗ at once, rebuild the
/// reconstruction, then set H to the arithmetic mean of the M per-lag
/// multiplicative updates (each with the unshifted denominator).
pub fn step_smaragdis_average(state: &mut FactorizationState, v: &NonnegMatrix) -> Result<f64> {
    let w_new = update_w(&state.w, &state.h, v, &state.u, state.beta, state.eps)?;
    let u_tilde = reconstruct(&w_new, &state.h)?;
    let lags = w_new.num_lags();
    let mut acc: Option<NonnegMatrix> = None;
    for m in 0..lags {
        let (num, den) =
            h_factors_unshifted_denominator(w_new.slice(m), v, &u_tilde, state.beta, state.eps, m)?;
        let term = state.h.hadamard(&num.safe_divide(&den, state.eps)?)?;
        match &mut acc {
            Some(a) => a.add_assign(&term)?,
            None => acc = Some(term),
        }
    }
    let mut h_new = acc.expect("M >= 1");
    h_new.scale(1.0 / lags as f64);
    state.w = w_new;
    state.h = h_new;
    state.u = reconstruct(&state.w, &state.h)?;
    state.t += 1;
    state.loss(v)
}

/// Schmidt's time-dimension updates: identical to the proposed step for
/// β ≠ 1; at β = 1 the activation denominator is the unshifted
/// Σ_m W_mᵀ · 1 instead of the shifted sum.
pub fn step_schmidt(state: &mut FactorizationState, v: &NonnegMatrix) -> Result<f64> {
    if state.beta.value() != 1.0 {
        return step_proposed(state, v);
    }
    let w_new = update_w(&state.w, &state.h, v, &state.u, state.beta, state.eps)?;
    let mut u_tilde = state.u.clone();
    for m in 0..w_new.num_lags() {
        u_tilde = refresh_u_incremental(&u_tilde, state.w.slice(m), w_new.slice(m), &state.h, m)?;
    }
    let ratio = v.safe_divide(&u_tilde, state.eps)?;
    let ones = NonnegMatrix::filled(v.rows(), v.cols(), 1.0);
    let mut num = w_new.slice(0).matmul_at(&ratio)?;
    let mut den = w_new.slice(0).matmul_at(&ones)?;
    for m in 1..w_new.num_lags() {
        num.add_assign(&w_new.slice(m).matmul_at(&ratio.left_shift(m))?)?;
        den.add_assign(&w_new.slice(m).matmul_at(&ones)?)?;
    }
    state.h = state.h.hadamard(&num.safe_divide(&den, state.eps)?)?;
    state.w = w_new;
    state.u = reconstruct(&state.w, &state.h)?;
    state.t += 1;
    state.loss(v)
}

/// Wang's scheme: the same per-lag sequence as the biased scheme, but the
/// reconstruction is refreshed incrementally between the updates of W_m
/// and W_{m+1} instead of recomputed in full after each slice.
pub fn step_wang(state: &mut FactorizationState, v: &NonnegMatrix) -> Result<f64> {
    let lags = state.w.num_lags();
    for m in 0..lags {
        let (num, den) = w_slice_factors(&state.h, v, &state.u, state.beta, state.eps, m)?;
        let updated = state
            .w
            .slice(m)
            .hadamard(&num.safe_divide(&den, state.eps)?)?;
        state.u = refresh_u_incremental(&state.u, state.w.slice(m), &updated, &state.h, m)?;
        state.w.slices_mut()[m] = updated;

        let (num_h, den_h) =
            h_factors_unshifted_denominator(state.w.slice(m), v, &state.u, state.beta, state.eps, m)?;
        state.h = state.h.hadamard(&num_h.safe_divide(&den_h, state.eps)?)?;
        state.u = reconstruct(&state.w, &state.h)?;
    }
    state.t += 1;
    state.loss(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnmf::random_init;
    use crate::rng::Rng;
    use crate::DEFAULT_EPS;

    const EPS: f64 = DEFAULT_EPS;

    fn instance(
        k: usize,
        rank: usize,
        n: usize,
        lags: usize,
        seed: u64,
    ) -> (FactorizationState, NonnegMatrix) {
        let mut rng = Rng::from_seed(seed);
        let (wt, ht) = random_init(k, rank, n, lags, &mut rng);
        let v = reconstruct(&wt, &ht).unwrap();
        let (w0, h0) = random_init(k, rank, n, lags, &mut rng);
        (
            FactorizationState::new(w0, h0, Beta::new(1.0), EPS).unwrap(),
            v,
        )
    }

    #[test]
    fn method_tags_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.tag().parse::<Method>().unwrap(), m);
        }
        let err = "bogus".parse::<Method>().unwrap_err();
        let msg = alloc::format!("{err}");
        assert!(msg.contains("proposed") && msg.contains("wang"));
    }

    #[test]
    fn all_methods_identical_at_m1() {
        for &b in &[0.0, 1.0, 2.0] {
            let (proto, v) = instance(5, 3, 10, 1, 61);
            let mut states: alloc::vec::Vec<FactorizationState> = Method::ALL
                .iter()
                .map(|_| {
                    let mut s = proto.clone();
                    s.beta = Beta::new(b);
                    s
                })
                .collect();
            for _ in 0..20 {
                let losses: alloc::vec::Vec<f64> = Method::ALL
                    .iter()
                    .zip(states.iter_mut())
                    .map(|(&m, s)| step(m, s, &v).unwrap())
                    .collect();
                for (i, &l) in losses.iter().enumerate() {
                    let rel = (l - losses[0]).abs() / losses[0].abs().max(1e-30);
                    assert!(rel < 1e-12, "beta={b} method {} loss diverged", Method::ALL[i]);
                }
            }
        }
    }

    #[test]
    fn schmidt_equals_proposed_away_from_beta_one() {
        for &b in &[0.0, 2.0] {
            let (proto, v) = instance(4, 2, 8, 3, 67);
            let mut a = proto.clone();
            let mut s = proto.clone();
            a.beta = Beta::new(b);
            s.beta = Beta::new(b);
            for _ in 0..30 {
                let la = step_proposed(&mut a, &v).unwrap();
                let ls = step_schmidt(&mut s, &v).unwrap();
                assert_eq!(la, ls, "beta={b}");
            }
        }
    }

    #[test]
    fn schmidt_differs_from_proposed_at_beta_one() {
        let (proto, v) = instance(4, 2, 8, 3, 71);
        let mut a = proto.clone();
        let mut s = proto;
        let la = step_proposed(&mut a, &v).unwrap();
        let ls = step_schmidt(&mut s, &v).unwrap();
        assert_ne!(la, ls);
        // the denominators differ only in the last M-1 columns at the
        // first step, so H agrees on columns 0..N-M+1
        for i in 0..2 {
            for n in 0..6 {
                let rel = (a.h.get(i, n) - s.h.get(i, n)).abs() / a.h.get(i, n);
                assert!(rel < 1e-12, "column {n} should agree");
            }
        }
        assert!(a.h.max_rel_diff(&s.h) > 1e-9);
    }

    #[test]
    fn biased_h_update_matches_scalar_transcription() {
        // transcription of the per-lag H multiplier with unshifted denominator
        let (state, v) = instance(4, 2, 7, 3, 73);
        let (k, n) = v.shape();
        let m = 2usize;
        let b = 1.0;
        let u = state.u.clone();
        let w_m = state.w.slice(m).clone();
        let (num, den) = h_factors_unshifted_denominator(&w_m, &v, &u, Beta::new(b), EPS, m).unwrap();
        let h_new = state
            .h
            .hadamard(&num.safe_divide(&den, EPS).unwrap())
            .unwrap();
        for i in 0..2 {
            for q in 0..n {
                let mut sn = 0.0;
                let mut sd = 0.0;
                for kk in 0..k {
                    if q + m < n {
                        sn += w_m.get(kk, i) * v.get(kk, q + m) / u.get(kk, q + m).max(EPS);
                    }
                    sd += w_m.get(kk, i) * 1.0; // beta = 1: U^0 unshifted
                }
                let expected = state.h.get(i, q) * sn / sd.max(EPS);
                let rel = (h_new.get(i, q) - expected).abs() / expected.abs().max(1e-30);
                assert!(rel < 1e-10, "i={i} q={q}");
            }
        }
    }

    #[test]
    fn average_is_arithmetic_mean_of_per_lag_updates() {
        let (mut state, v) = instance(4, 2, 7, 3, 79);
        state.beta = Beta::new(1.5);
        let w_new = update_w(&state.w, &state.h, &v, &state.u, state.beta, EPS).unwrap();
        let u_tilde = reconstruct(&w_new, &state.h).unwrap();
        let mut expected = NonnegMatrix::zeros(2, 7);
        for m in 0..3 {
            let (num, den) =
                h_factors_unshifted_denominator(w_new.slice(m), &v, &u_tilde, state.beta, EPS, m)
                    .unwrap();
            let term = state
                .h
                .hadamard(&num.safe_divide(&den, EPS).unwrap())
                .unwrap();
            expected.add_assign(&term).unwrap();
        }
        expected.scale(1.0 / 3.0);
        step_smaragdis_average(&mut state, &v).unwrap();
        assert!(state.h.max_rel_diff(&expected) < 1e-14);
    }

    #[test]
    fn wang_m1_beta2_is_lee_seung_euclidean() {
        let (proto, v) = instance(5, 3, 9, 1, 83);
        let mut s = proto;
        s.beta = Beta::new(2.0);
        // one Lee-Seung Euclidean W-then-H iteration by hand
        let w0 = s.w.slice(0).clone();
        let h0 = s.h.clone();
        let u0 = s.u.clone();
        let w1 = w0
            .hadamard(
                &v.matmul_bt(&h0)
                    .unwrap()
                    .safe_divide(&u0.matmul_bt(&h0).unwrap(), EPS)
                    .unwrap(),
            )
            .unwrap();
        let u1 = w1.matmul(&h0).unwrap();
        let h1 = h0
            .hadamard(
                &w1.matmul_at(&v)
                    .unwrap()
                    .safe_divide(&w1.matmul_at(&u1).unwrap(), EPS)
                    .unwrap(),
            )
            .unwrap();
        step_wang(&mut s, &v).unwrap();
        assert!(s.w.slice(0).max_rel_diff(&w1) < 1e-12);
        assert!(s.h.max_rel_diff(&h1) < 1e-12);
    }

    #[test]
    fn all_methods_preserve_nonnegativity_and_zeros() {
        for &method in &Method::ALL {
            let (mut state, v) = instance(4, 2, 8, 2, 89);
            state.h.set(1, 2, 0.0);
            state.w.slices_mut()[1].set(0, 1, 0.0);
            state.u = reconstruct(&state.w, &state.h).unwrap();
            for _ in 0..5 {
                step(method, &mut state, &v).unwrap();
            }
            assert_eq!(state.h.get(1, 2), 0.0, "{method}");
            assert_eq!(state.w.slice(1).get(0, 1), 0.0, "{method}");
            assert!(state.h.as_slice().iter().all(|&x| x >= 0.0));
        }
    }
}
