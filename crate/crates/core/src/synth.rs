//! Synthetic data generators for the benchmark: χ²₂-distributed
//! dictionaries and uniformly distributed activations.

use alloc::vec::Vec;

use crate::cnmf::ConvDictionary;
use crate::nnmat::NonnegMatrix;
use crate::rng::Rng;

/// One χ²₂ draw: the sum of two squared standard normals (mean 2, variance 4).
pub fn chi2_2(rng: &mut Rng) -> f64 {
    let g1 = rng.next_normal();
    let g2 = rng.next_normal();
    g1 * g1 + g2 * g2
}

/// Ground-truth dictionary with every entry drawn χ²₂.
pub fn gen_dictionary(k: usize, rank: usize, lags: usize, rng: &mut Rng) -> ConvDictionary {
    let slices: Vec<NonnegMatrix> = (0..lags)
        .map(|_| NonnegMatrix::from_fn(k, rank, |_, _| chi2_2(rng)))
        .collect();
    ConvDictionary::new(slices).expect("lags >= 1")
}

/// Ground-truth activations with entries uniform on [0, 1).
pub fn gen_activations(rank: usize, n: usize, rng: &mut Rng) -> NonnegMatrix {
    NonnegMatrix::from_fn(rank, n, |_, _| rng.next_f64())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi2_moments() {
        let mut rng = Rng::from_seed(3);
        let n = 100_000;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..n {
            let x = chi2_2(&mut rng);
            assert!(x >= 0.0);
            sum += x;
            sum2 += x * x;
        }
        let mean = sum / n as f64;
        let var = sum2 / n as f64 - mean * mean;
        assert!((mean - 2.0).abs() < 0.05, "mean {mean}");
        assert!((var - 4.0).abs() < 0.2, "var {var}");
    }

    #[test]
    fn uniform_activation_stats() {
        let mut rng = Rng::from_seed(5);
        let h = gen_activations(100, 1000, &mut rng);
        assert!(h.as_slice().iter().all(|&x| (0.0..1.0).contains(&x)));
        let mean = h.sum() / (100.0 * 1000.0);
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn generators_deterministic_under_seed() {
        let a = gen_dictionary(4, 3, 2, &mut Rng::derive(7, "dict", 0));
        let b = gen_dictionary(4, 3, 2, &mut Rng::derive(7, "dict", 0));
        assert_eq!(a.slices(), b.slices());
        let ha = gen_activations(3, 5, &mut Rng::derive(7, "act", 1));
        let hb = gen_activations(3, 5, &mut Rng::derive(7, "act", 1));
        assert_eq!(ha, hb);
    }
}
