//! The kernel mean matching quadratic program.

use ndarray::{Array1, Array2, ArrayView2};

use super::kernel::RbfKernel;
use crate::error::{Error, Result};

/// Jitter added to the Gram diagonal; makes the QP strictly convex.
pub const GRAM_JITTER: f64 = 1e-8;

/// `argmin_beta 1/2 beta' K beta - kappa' beta` subject to
/// `0 <= beta_i <= box_bound` and `|sum(beta) - n| <= n * epsilon`.
#[derive(Debug, Clone)]
pub struct KmmProblem {
    /// Train-set Gram matrix with diagonal jitter.
    pub gram: Array2<f64>,
    /// Scaled train-to-test kernel sums.
    pub kappa: Array1<f64>,
    /// Upper box bound B.
    pub box_bound: f64,
    /// Sum-band half-width (relative).
    pub epsilon: f64,
}

impl KmmProblem {
    pub fn n_train(&self) -> usize {
        self.kappa.len()
    }

    /// Inclusive bounds on `sum(beta)`.
    pub fn sum_band(&self) -> (f64, f64) {
        let n = self.n_train() as f64;
        (n * (1.0 - self.epsilon), n * (1.0 + self.epsilon))
    }

    pub fn objective(&self, beta: &Array1<f64>) -> f64 {
        0.5 * beta.dot(&self.gram.dot(beta)) - self.kappa.dot(beta)
    }

    pub fn gradient(&self, beta: &Array1<f64>) -> Array1<f64> {
        self.gram.dot(beta) - &self.kappa
    }

    /// Both constraints, checked as written.
    pub fn is_feasible(&self, beta: &Array1<f64>) -> bool {
        let (lo, hi) = self.sum_band();
        let s = beta.sum();
        beta.iter().all(|&b| (0.0..=self.box_bound).contains(&b)) && s >= lo && s <= hi
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_train();
        if n == 0 {
            return Err(Error::EmptyInput("KMM problem with no training points"));
        }
        if self.gram.nrows() != n || self.gram.ncols() != n {
            return Err(Error::ShapeMismatch {
                expected: format!("{n}x{n} gram"),
                got: format!("{}x{}", self.gram.nrows(), self.gram.ncols()),
            });
        }
        if !(self.box_bound > 0.0) {
            return Err(Error::InvalidConfig(format!("B must be > 0, got {}", self.box_bound)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        // Max attainable sum must reach the lower band edge.
        if self.box_bound < 1.0 - self.epsilon {
            return Err(Error::Infeasible(format!(
                "B = {} cannot reach sum >= n * (1 - {})",
                self.box_bound, self.epsilon
            )));
        }
        Ok(())
    }
}

/// Assembles the Gram matrix and kappa vector from feature rows.
pub fn build_problem(
    train: ArrayView2<'_, f64>,
    test: ArrayView2<'_, f64>,
    gamma: f64,
    box_bound: f64,
    epsilon: f64,
) -> Result<KmmProblem> {
    if train.nrows() == 0 {
        return Err(Error::EmptyInput("KMM train set"));
    }
    if test.nrows() == 0 {
        return Err(Error::EmptyInput("KMM test set"));
    }
    if train.ncols() != test.ncols() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} feature columns", train.ncols()),
            got: format!("{}", test.ncols()),
        });
    }
    let kernel = RbfKernel::new(gamma)?;
    let n_tr = train.nrows();
    let n_te = test.nrows();

    let mut gram = Array2::zeros((n_tr, n_tr));
    for i in 0..n_tr {
        let ri = train.row(i);
        let ri = ri.as_slice().expect("contiguous rows");
        for j in i..n_tr {
            let rj = train.row(j);
            let v = kernel.eval(ri, rj.as_slice().expect("contiguous rows"));
            gram[[i, j]] = v;
            gram[[j, i]] = v;
        }
        gram[[i, i]] += GRAM_JITTER;
    }

    let scale = n_tr as f64 / n_te as f64;
    let mut kappa = Array1::zeros(n_tr);
    for i in 0..n_tr {
        let ri = train.row(i);
        let ri = ri.as_slice().expect("contiguous rows");
        let mut sum = 0.0;
        for j in 0..n_te {
            let rj = test.row(j);
            sum += kernel.eval(ri, rj.as_slice().expect("contiguous rows"));
        }
        kappa[i] = scale * sum;
    }

    let problem = KmmProblem { gram, kappa, box_bound, epsilon };
    problem.validate()?;
    Ok(problem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn single_train_point_gram_is_one_plus_jitter() {
        let train = array![[0.0, 0.0]];
        let test = array![[3.0, 4.0]];
        let p = build_problem(train.view(), test.view(), 1.0, 10.0, 0.5).unwrap();
        assert_eq!(p.gram[[0, 0]], 1.0 + GRAM_JITTER);
    }

    #[test]
    fn matched_sets_make_kappa_the_row_sums() {
        let pts = array![[0.0], [1.0], [2.5]];
        let p = build_problem(pts.view(), pts.view(), 1.3, 10.0, 0.5).unwrap();
        for i in 0..3 {
            let row_sum: f64 = (0..3).map(|j| p.gram[[i, j]]).sum::<f64>() - GRAM_JITTER;
            assert!((p.kappa[i] - row_sum).abs() < 1e-12);
        }
    }

    #[test]
    fn huge_bandwidth_saturates_kernel() {
        let train = array![[0.0], [5.0]];
        let test = array![[-3.0], [9.0], [1.0]];
        let p = build_problem(train.view(), test.view(), 1e9, 10.0, 0.5).unwrap();
        assert!((p.gram[[0, 1]] - 1.0).abs() < 1e-12);
        for i in 0..2 {
            assert!((p.kappa[i] - 2.0).abs() < 1e-12, "kappa -> n_tr");
        }
    }

    #[test]
    fn empty_sets_rejected() {
        let empty = Array2::<f64>::zeros((0, 2));
        let pts = array![[0.0, 1.0]];
        assert!(build_problem(empty.view(), pts.view(), 1.0, 10.0, 0.5).is_err());
        assert!(build_problem(pts.view(), empty.view(), 1.0, 10.0, 0.5).is_err());
    }

    #[test]
    fn infeasible_band_rejected() {
        let pts = array![[0.0], [1.0]];
        // B = 0.2 cannot reach sum >= n * (1 - 0.5) = 1 per-point average.
        let p = build_problem(pts.view(), pts.view(), 1.0, 0.2, 0.5);
        assert!(matches!(p, Err(Error::Infeasible(_))));
    }

    use ndarray::Array2;
}
