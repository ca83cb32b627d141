//! Least-squares fit of a table indexed by bit patterns to a quadratic
//! pseudo-Boolean function of those bits.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

/// Coefficients of `c + sum_k l_k b_k + sum_{k<l} q_kl b_k b_l`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct QuadraticFit {
    pub constant: f64,
    pub linear: Vec<f64>,
    pub pairs: Vec<((usize, usize), f64)>,
    /// Root-mean-square error over all patterns.
    pub rms: f64,
}

struct Basis {
    bits: usize,
    pairs: Vec<(usize, usize)>,
    design: DMatrix<f64>,
    /// `(X^T X)^-1 X^T`
    projector: DMatrix<f64>,
}

impl Basis {
    fn new(bits: usize) -> Self {
        let pairs: Vec<(usize, usize)> = (0..bits)
            .flat_map(|k| (k + 1..bits).map(move |l| (k, l)))
            .collect();
        let rows = 1usize << bits;
        let cols = 1 + bits + pairs.len();
        let design = DMatrix::from_fn(rows, cols, |p, f| {
            let bit = |k: usize| ((p >> k) & 1) as f64;
            if f == 0 {
                1.0
            } else if f <= bits {
                bit(f - 1)
            } else {
                let (k, l) = pairs[f - 1 - bits];
                bit(k) * bit(l)
            }
        });
        let xt = design.transpose();
        // Monomials of degree <= 2 are linearly independent on the full cube,
        // so the normal matrix is positive definite.
        let projector = (&xt * &design)
            .cholesky()
            .expect("normal matrix of the quadratic basis is positive definite")
            .solve(&xt);
        Self {
            bits,
            pairs,
            design,
            projector,
        }
    }
}

/// Caches the projector for each bit count.
#[derive(Default)]
pub(crate) struct QuadraticFitter {
    bases: HashMap<usize, Basis>,
}

impl QuadraticFitter {
    /// `targets[p]` is the value for the pattern whose bit `k` is `(p >> k) & 1`.
    pub fn fit(&mut self, bits: usize, targets: &[f64]) -> QuadraticFit {
        assert_eq!(targets.len(), 1usize << bits, "one target per bit pattern");
        let basis = self.bases.entry(bits).or_insert_with(|| Basis::new(bits));
        let y = DVector::from_column_slice(targets);
        let coef = &basis.projector * &y;
        let residual = &basis.design * &coef - &y;
        let rms = (residual.norm_squared() / targets.len() as f64).sqrt();
        QuadraticFit {
            constant: coef[0],
            linear: coef.rows(1, basis.bits).iter().copied().collect(),
            pairs: basis
                .pairs
                .iter()
                .copied()
                .zip(coef.rows(1 + basis.bits, basis.pairs.len()).iter().copied())
                .collect(),
            rms,
        }
    }
}
