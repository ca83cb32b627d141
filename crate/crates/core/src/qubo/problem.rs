use std::collections::BTreeMap;

/// `offset + sum_i linear_i b_i + sum_{i<j} quadratic_ij b_i b_j` over bits `b`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QuboProblem {
    linear: Vec<f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
    constant_offset: f64,
}

impl QuboProblem {
    pub fn new(bit_count: usize) -> Self {
        Self {
            linear: vec![0.0; bit_count],
            quadratic: BTreeMap::new(),
            constant_offset: 0.0,
        }
    }

    pub fn bit_count(&self) -> usize {
        self.linear.len()
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    /// Coupling coefficients keyed `(i, j)` with `i < j`.
    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.quadratic
    }

    pub fn constant_offset(&self) -> f64 {
        self.constant_offset
    }

    pub fn add_constant(&mut self, v: f64) {
        self.constant_offset += v;
    }

    pub fn add_linear(&mut self, bit: usize, v: f64) {
        self.linear[bit] += v;
    }

    /// Add `v * b_i * b_j`; `i == j` folds into the linear term since `b^2 = b`.
    pub fn add_quadratic(&mut self, i: usize, j: usize, v: f64) {
        if i == j {
            self.linear[i] += v;
        } else {
            *self.quadratic.entry((i.min(j), i.max(j))).or_insert(0.0) += v;
        }
    }

    /// Drop couplings that cancelled to exactly zero.
    pub fn prune(&mut self) {
        self.quadratic.retain(|_, v| *v != 0.0);
    }

    pub fn energy(&self, bits: &[bool]) -> f64 {
        qubo_energy(self, bits)
    }

    /// Couplings of each bit, in both directions.
    pub fn neighbours(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.bit_count()];
        for (&(i, j), &v) in &self.quadratic {
            adj[i].push((j, v));
            adj[j].push((i, v));
        }
        adj
    }
}

pub fn qubo_energy(q: &QuboProblem, bits: &[bool]) -> f64 {
    assert_eq!(bits.len(), q.bit_count(), "bit vector length mismatch");
    let mut e = q.constant_offset;
    for (&b, &l) in bits.iter().zip(&q.linear) {
        if b {
            e += l;
        }
    }
    for (&(i, j), &v) in &q.quadratic {
        if bits[i] && bits[j] {
            e += v;
        }
    }
    e
}

pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_bits_give_offset() {
        let mut q = QuboProblem::new(3);
        q.add_constant(2.5);
        q.add_linear(1, 4.0);
        q.add_quadratic(0, 2, -1.0);
        assert_eq!(q.energy(&[false; 3]), 2.5);
    }

    #[test]
    fn single_linear_term() {
        let mut q = QuboProblem::new(1);
        q.add_constant(1.0);
        q.add_linear(0, 5.0);
        assert_eq!(q.energy(&[true]), 6.0);
    }

    #[test]
    fn diagonal_folds_to_linear() {
        let mut q = QuboProblem::new(2);
        q.add_quadratic(1, 1, 3.0);
        q.add_quadratic(1, 0, 2.0);
        assert_eq!(q.linear(), &[0.0, 3.0]);
        assert_eq!(q.quadratic().get(&(0, 1)), Some(&2.0));
        assert_eq!(bits_to_string(&[true, false]), "10");
    }
}
