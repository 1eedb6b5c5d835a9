use nalgebra::DMatrix;

/// Reconstruction of a degree-`k` edge trace from its DoFs
/// `[v(0), v(1), ∫₀¹ v (t-½)^j dt for j < k-1]`.
#[derive(Debug, Clone)]
pub struct EdgeTrace {
    k: usize,
    /// Columns map DoFs to coefficients in powers of `(t - ½)`.
    inv: DMatrix<f64>,
}

/// `∫₀¹ (t - ½)^n dt`.
pub fn centered_moment(n: usize) -> f64 {
    if n % 2 == 1 {
        0.0
    } else {
        0.5f64.powi(n as i32) / (n + 1) as f64
    }
}

impl EdgeTrace {
    pub fn new(k: usize) -> Self {
        assert!(k >= 1);
        let n = k + 1;
        let mut m = DMatrix::zeros(n, n);
        for c in 0..n {
            m[(0, c)] = (-0.5f64).powi(c as i32);
            m[(1, c)] = 0.5f64.powi(c as i32);
            for j in 0..k - 1 {
                m[(2 + j, c)] = centered_moment(c + j);
            }
        }
        let inv = m.try_inverse().expect("edge trace system is unisolvent");
        Self { k, inv }
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    /// Values at `t` of the trace basis functions dual to the edge DoFs.
    pub fn basis_values(&self, t: f64) -> Vec<f64> {
        let n = self.k + 1;
        let s = t - 0.5;
        let mut pow = vec![1.0; n];
        for i in 1..n {
            pow[i] = pow[i - 1] * s;
        }
        (0..n)
            .map(|d| (0..n).map(|c| pow[c] * self.inv[(c, d)]).sum())
            .collect()
    }

    /// Coefficients in powers of `(t - ½)` of the trace with the given DoFs.
    pub fn coefficients(&self, dofs: &[f64]) -> Vec<f64> {
        let n = self.k + 1;
        (0..n)
            .map(|c| (0..n).map(|d| self.inv[(c, d)] * dofs[d]).sum())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_polynomial_traces() {
        for k in 1..=4 {
            let tr = EdgeTrace::new(k);
            let p = |t: f64| (0..=k).map(|i| (i as f64 + 1.0) * t.powi(i as i32)).sum::<f64>();
            let rule = crate::geometry::GaussRule1D::new(k + 2).unit_interval();
            let mut dofs = vec![p(0.0), p(1.0)];
            for j in 0..k - 1 {
                dofs.push(rule.iter().map(|&(t, w)| w * p(t) * (t - 0.5).powi(j as i32)).sum());
            }
            for t in [0.0, 0.2, 0.77, 1.0] {
                let b = tr.basis_values(t);
                let v: f64 = b.iter().zip(&dofs).map(|(a, d)| a * d).sum();
                assert!((v - p(t)).abs() < 1e-12, "k={k} t={t}");
            }
        }
    }

    #[test]
    fn linear_trace_is_hat_pair() {
        let b = EdgeTrace::new(1).basis_values(0.25);
        assert!((b[0] - 0.75).abs() < 1e-15 && (b[1] - 0.25).abs() < 1e-15);
    }
}
