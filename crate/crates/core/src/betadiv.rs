//! The β-divergence, pointwise and entrywise.
//!
//! Three analytic branches, selected by exact comparison with 0 and 1:
//! Itakura-Saito (β = 0), generalized Kullback-Leibler (β = 1), and the
//! general case covering squared Euclidean at β = 2. β is a runtime
//! parameter so the benchmark sweeps β ∈ {0, 1, 2} through one code path.

use crate::error::Result;
use crate::nnmat::NonnegMatrix;

/// The divergence parameter. Must be finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beta(f64);

impl Beta {
    pub fn new(value: f64) -> Self {
        assert!(value.is_finite(), "beta must be finite");
        Beta(value)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<f64> for Beta {
    fn from(value: f64) -> Self {
        Beta::new(value)
    }
}

/// Pointwise β-divergence d_β(p, q).
///
/// `q` is clamped to `max(q, eps)` in every branch. `p` is clamped only
/// where a log of `p` appears: the β = 0 branch, and inside `log(p/q)`
/// of the β = 1 branch, where the factor `p` in front makes the term
/// vanish as p → 0, so d_1(0, q) = q exactly.
pub fn d_beta(p: f64, q: f64, beta: Beta, eps: f64) -> f64 {
    let b = beta.value();
    let q = q.max(eps);
    if b == 1.0 {
        p * (libm::log(p.max(eps)) - libm::log(q)) - p + q
    } else if b == 0.0 {
        let p = p.max(eps);
        p / q - libm::log(p / q) - 1.0
    } else {
        (libm::pow(p, b) + (b - 1.0) * libm::pow(q, b) - b * p * libm::pow(q, b - 1.0))
            / (b * (b - 1.0))
    }
}

/// Entrywise β-divergence D_β(V ‖ U): the sum of d_β over all entries.
pub fn divergence(v: &NonnegMatrix, u: &NonnegMatrix, beta: Beta, eps: f64) -> Result<f64> {
    v.check_same_shape("divergence", u)?;
    let mut acc = 0.0;
    for (&p, &q) in v.as_slice().iter().zip(u.as_slice()) {
        acc += d_beta(p, q, beta, eps);
    }
    Ok(acc)
}
