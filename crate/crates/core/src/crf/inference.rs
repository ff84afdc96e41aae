//! Exact linear-chain inference: forward/backward recursions in log
//! space, Viterbi decoding, sequence NLL and its gradients.
//!
//! Potentials are additive in log space,
//! `phi_t(x_t, y_t, y_{t-1}) = u(x_t, y_t) + log tau~(y_{t-1}, y_t)`,
//! with a uniform (zero) initial factor, so for T = 1 the partition
//! function is just the log-sum-exp of the emissions.

use ndarray::{Array2, ArrayView2};

use super::model::{gate_open, NEG_INF};
use crate::error::{Error, Result};

/// Where a label sequence came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelSource {
    Walkthrough,
    Pseudo,
    Decoded,
}

/// A length-T room-label sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelSequence {
    pub y: Vec<usize>,
    pub source: LabelSource,
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Checks the shared preconditions of every recursion.
fn check_shapes(emissions: ArrayView2<'_, f64>, alphas: &[f64], classes: usize) -> Result<usize> {
    let t = emissions.nrows();
    if t == 0 {
        return Err(Error::EmptyInput("CRF sequence"));
    }
    if emissions.ncols() != classes {
        return Err(Error::ShapeMismatch {
            expected: format!("{classes} emission columns"),
            got: format!("{}", emissions.ncols()),
        });
    }
    if alphas.len() != t {
        return Err(Error::ShapeMismatch {
            expected: format!("{t} activity levels"),
            got: format!("{}", alphas.len()),
        });
    }
    Ok(t)
}

/// Effective transition score for the step arriving at time `t`.
#[inline]
fn trans(log_tau: &Array2<f64>, alphas: &[f64], eps_prime: f64, t: usize, i: usize, j: usize) -> f64 {
    if gate_open(alphas[t], eps_prime) {
        log_tau[[i, j]]
    } else if i == j {
        0.0
    } else {
        NEG_INF
    }
}

/// Log partition function via the forward recursion.
pub fn log_forward(
    emissions: ArrayView2<'_, f64>,
    alphas: &[f64],
    log_tau: &Array2<f64>,
    eps_prime: f64,
) -> Result<f64> {
    let c = log_tau.nrows();
    let t_len = check_shapes(emissions, alphas, c)?;
    let mut fwd: Vec<f64> = (0..c).map(|j| emissions[[0, j]]).collect();
    let mut scratch = vec![0.0; c];
    for t in 1..t_len {
        let mut next = vec![0.0; c];
        for (j, slot) in next.iter_mut().enumerate() {
            for (i, s) in scratch.iter_mut().enumerate() {
                *s = fwd[i] + trans(log_tau, alphas, eps_prime, t, i, j);
            }
            *slot = emissions[[t, j]] + log_sum_exp(&scratch);
        }
        fwd = next;
    }
    Ok(log_sum_exp(&fwd))
}

/// Joint log-score of one path (emissions plus gated transitions).
pub fn path_score(
    emissions: ArrayView2<'_, f64>,
    alphas: &[f64],
    log_tau: &Array2<f64>,
    eps_prime: f64,
    path: &[usize],
) -> Result<f64> {
    let c = log_tau.nrows();
    let t_len = check_shapes(emissions, alphas, c)?;
    if path.len() != t_len {
        return Err(Error::ShapeMismatch {
            expected: format!("path of length {t_len}"),
            got: format!("{}", path.len()),
        });
    }
    for &y in path {
        if y >= c {
            return Err(Error::LabelOutOfRange { label: y, classes: c });
        }
    }
    let mut score = emissions[[0, path[0]]];
    for t in 1..t_len {
        score += emissions[[t, path[t]]]
            + trans(log_tau, alphas, eps_prime, t, path[t - 1], path[t]);
    }
    Ok(score)
}

/// Negative log-likelihood of `path`: `log Z - score(path)`; non-negative
/// up to round-off.
pub fn sequence_nll(
    emissions: ArrayView2<'_, f64>,
    alphas: &[f64],
    log_tau: &Array2<f64>,
    eps_prime: f64,
    path: &[usize],
) -> Result<f64> {
    let z = log_forward(emissions, alphas, log_tau, eps_prime)?;
    let s = path_score(emissions, alphas, log_tau, eps_prime, path)?;
    Ok(z - s)
}

/// Exact MAP decoding. Ties break toward the lower label index, both in
/// the backpointers and at the final argmax, so decoding is deterministic.
pub fn viterbi(
    emissions: ArrayView2<'_, f64>,
    alphas: &[f64],
    log_tau: &Array2<f64>,
    eps_prime: f64,
) -> Result<LabelSequence> {
    let c = log_tau.nrows();
    let t_len = check_shapes(emissions, alphas, c)?;
    let mut score: Vec<f64> = (0..c).map(|j| emissions[[0, j]]).collect();
    let mut back: Vec<Vec<usize>> = Vec::with_capacity(t_len.saturating_sub(1));
    for t in 1..t_len {
        let mut next = vec![f64::NEG_INFINITY; c];
        let mut ptr = vec![0usize; c];
        for j in 0..c {
            let mut best = f64::NEG_INFINITY;
            let mut best_i = 0;
            for (i, &s) in score.iter().enumerate() {
                let v = s + trans(log_tau, alphas, eps_prime, t, i, j);
                if v > best {
                    best = v;
                    best_i = i;
                }
            }
            next[j] = emissions[[t, j]] + best;
            ptr[j] = best_i;
        }
        score = next;
        back.push(ptr);
    }
    let mut best = f64::NEG_INFINITY;
    let mut cur = 0;
    for (j, &s) in score.iter().enumerate() {
        if s > best {
            best = s;
            cur = j;
        }
    }
    let mut path = vec![cur; t_len];
    for t in (1..t_len).rev() {
        cur = back[t - 1][cur];
        path[t - 1] = cur;
    }
    Ok(LabelSequence { y: path, source: LabelSource::Decoded })
}

/// Posterior node marginals `P(y_t = j | X)` via forward-backward.
pub fn marginals(
    emissions: ArrayView2<'_, f64>,
    alphas: &[f64],
    log_tau: &Array2<f64>,
    eps_prime: f64,
) -> Result<Array2<f64>> {
    let (log_a, log_b, log_z) = forward_backward(emissions, alphas, log_tau, eps_prime)?;
    let mut out = Array2::zeros((emissions.nrows(), log_tau.nrows()));
    for t in 0..emissions.nrows() {
        for j in 0..log_tau.nrows() {
            out[[t, j]] = (log_a[[t, j]] + log_b[[t, j]] - log_z).exp();
        }
    }
    Ok(out)
}

/// Gradients of the sequence NLL with respect to the emissions and the
/// transition log-potentials, plus the NLL itself.
///
/// Steps where the activity gate is closed use the constant stay matrix,
/// so they contribute nothing to the `log_tau` gradient.
#[derive(Debug, Clone)]
pub struct SequenceGrads {
    pub nll: f64,
    pub emissions: Array2<f64>,
    pub log_tau: Array2<f64>,
}

pub fn sequence_nll_grads(
    emissions: ArrayView2<'_, f64>,
    alphas: &[f64],
    log_tau: &Array2<f64>,
    eps_prime: f64,
    path: &[usize],
) -> Result<SequenceGrads> {
    let c = log_tau.nrows();
    let t_len = check_shapes(emissions, alphas, c)?;
    let score = path_score(emissions, alphas, log_tau, eps_prime, path)?;
    let (log_a, log_b, log_z) = forward_backward(emissions, alphas, log_tau, eps_prime)?;

    let mut d_emissions = Array2::zeros((t_len, c));
    for t in 0..t_len {
        for j in 0..c {
            let marg = (log_a[[t, j]] + log_b[[t, j]] - log_z).exp();
            d_emissions[[t, j]] = marg - f64::from(path[t] == j);
        }
    }

    let mut d_tau = Array2::zeros((c, c));
    for t in 1..t_len {
        if !gate_open(alphas[t], eps_prime) {
            continue;
        }
        for i in 0..c {
            for j in 0..c {
                let pair = (log_a[[t - 1, i]]
                    + log_tau[[i, j]]
                    + emissions[[t, j]]
                    + log_b[[t, j]]
                    - log_z)
                    .exp();
                let observed = f64::from(path[t - 1] == i && path[t] == j);
                d_tau[[i, j]] += pair - observed;
            }
        }
    }

    Ok(SequenceGrads { nll: log_z - score, emissions: d_emissions, log_tau: d_tau })
}

/// Log-space forward and backward tables plus `log Z`.
fn forward_backward(
    emissions: ArrayView2<'_, f64>,
    alphas: &[f64],
    log_tau: &Array2<f64>,
    eps_prime: f64,
) -> Result<(Array2<f64>, Array2<f64>, f64)> {
    let c = log_tau.nrows();
    let t_len = check_shapes(emissions, alphas, c)?;
    let mut log_a = Array2::zeros((t_len, c));
    for j in 0..c {
        log_a[[0, j]] = emissions[[0, j]];
    }
    let mut scratch = vec![0.0; c];
    for t in 1..t_len {
        for j in 0..c {
            for (i, s) in scratch.iter_mut().enumerate() {
                *s = log_a[[t - 1, i]] + trans(log_tau, alphas, eps_prime, t, i, j);
            }
            log_a[[t, j]] = emissions[[t, j]] + log_sum_exp(&scratch);
        }
    }
    let mut log_b = Array2::zeros((t_len, c));
    for t in (0..t_len.saturating_sub(1)).rev() {
        for i in 0..c {
            for (j, s) in scratch.iter_mut().enumerate() {
                *s = trans(log_tau, alphas, eps_prime, t + 1, i, j)
                    + emissions[[t + 1, j]]
                    + log_b[[t + 1, j]];
            }
            log_b[[t, i]] = log_sum_exp(&scratch);
        }
    }
    let last: Vec<f64> = (0..c).map(|j| log_a[[t_len - 1, j]]).collect();
    let log_z = log_sum_exp(&last);
    Ok((log_a, log_b, log_z))
}

/// All `c^T` label sequences of length `t_len`; the exhaustive-path oracle
/// used throughout the tests (exported for the acceptance suite).
pub fn enumerate_paths(classes: usize, t_len: usize) -> Vec<Vec<usize>> {
    let total = classes.pow(t_len as u32);
    let mut out = Vec::with_capacity(total);
    for mut idx in 0..total {
        let mut path = vec![0usize; t_len];
        for slot in path.iter_mut().rev() {
            *slot = idx % classes;
            idx /= classes;
        }
        out.push(path);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};
    use ndarray::array;
    use rand::Rng;

    /// Brute-force log Z by summing exp(score) over all paths.
    fn oracle_log_z(
        emissions: ArrayView2<'_, f64>,
        alphas: &[f64],
        log_tau: &Array2<f64>,
        eps: f64,
    ) -> f64 {
        let scores: Vec<f64> = enumerate_paths(log_tau.nrows(), emissions.nrows())
            .iter()
            .map(|p| path_score(emissions, alphas, log_tau, eps, p).unwrap())
            .collect();
        let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln()
    }

    fn random_instance(
        seed: u64,
        t_len: usize,
        c: usize,
    ) -> (Array2<f64>, Vec<f64>, Array2<f64>, f64) {
        let mut rng = stream_rng(seed, Stream::Test);
        let emissions = Array2::from_shape_fn((t_len, c), |_| rng.gen_range(-2.0..2.0));
        let log_tau = Array2::from_shape_fn((c, c), |_| rng.gen_range(-1.5..1.5));
        let eps = rng.gen_range(0.0..0.6);
        let alphas: Vec<f64> = (0..t_len).map(|_| rng.gen_range(0.0..1.0)).collect();
        (emissions, alphas, log_tau, eps)
    }

    #[test]
    fn single_step_partition_is_logsumexp() {
        let emissions = array![[0.3, -1.0, 2.0]];
        let tau = Array2::zeros((3, 3));
        let z = log_forward(emissions.view(), &[0.0], &tau, 0.0).unwrap();
        let expect = log_sum_exp(&[0.3, -1.0, 2.0]);
        assert!((z - expect).abs() < 1e-12);
    }

    #[test]
    fn uniform_model_partition_is_t_log_c() {
        let t_len = 5;
        let c = 4;
        let emissions = Array2::zeros((t_len, c));
        let tau = Array2::zeros((c, c));
        let alphas = vec![1.0; t_len];
        let z = log_forward(emissions.view(), &alphas, &tau, 0.0).unwrap();
        assert!((z - (t_len as f64) * (c as f64).ln()).abs() < 1e-10);
    }

    #[test]
    fn forward_matches_exhaustive_enumeration() {
        for seed in 0..30 {
            let mut rng = stream_rng(1000 + seed, Stream::Test);
            let t_len = rng.gen_range(1..=6);
            let c = rng.gen_range(1..=4);
            let (emissions, alphas, tau, eps) = random_instance(seed, t_len, c);
            let z = log_forward(emissions.view(), &alphas, &tau, eps).unwrap();
            let oracle = oracle_log_z(emissions.view(), &alphas, &tau, eps);
            assert!((z - oracle).abs() < 1e-8, "seed {seed}: {z} vs {oracle}");
        }
    }

    #[test]
    fn path_probabilities_normalise() {
        for seed in 0..10 {
            let (emissions, alphas, tau, eps) = random_instance(100 + seed, 5, 3);
            let mut total = 0.0;
            for path in enumerate_paths(3, 5) {
                let nll = sequence_nll(emissions.view(), &alphas, &tau, eps, &path).unwrap();
                assert!(nll >= -1e-10, "negative NLL {nll}");
                total += (-nll).exp();
            }
            assert!((total - 1.0).abs() < 1e-8, "sum {total}");
        }
    }

    #[test]
    fn viterbi_matches_exhaustive_argmax() {
        for seed in 0..30 {
            let mut rng = stream_rng(2000 + seed, Stream::Test);
            let t_len = rng.gen_range(1..=6);
            let c = rng.gen_range(2..=4);
            let (emissions, alphas, tau, eps) = random_instance(300 + seed, t_len, c);
            let decoded = viterbi(emissions.view(), &alphas, &tau, eps).unwrap();
            let mut best = f64::NEG_INFINITY;
            let mut best_path = Vec::new();
            for path in enumerate_paths(c, t_len) {
                let s = path_score(emissions.view(), &alphas, &tau, eps, &path).unwrap();
                if s > best {
                    best = s;
                    best_path = path;
                }
            }
            let got = path_score(emissions.view(), &alphas, &tau, eps, &decoded.y).unwrap();
            assert!((got - best).abs() < 1e-10, "seed {seed}: {got} vs {best}");
            // With distinct random scores the argmax is unique.
            assert_eq!(decoded.y, best_path, "seed {seed}");
            assert_eq!(decoded.source, LabelSource::Decoded);
        }
    }

    #[test]
    fn viterbi_nll_is_minimal() {
        let (emissions, alphas, tau, eps) = random_instance(77, 5, 3);
        let star = viterbi(emissions.view(), &alphas, &tau, eps).unwrap();
        let star_nll = sequence_nll(emissions.view(), &alphas, &tau, eps, &star.y).unwrap();
        for path in enumerate_paths(3, 5) {
            let nll = sequence_nll(emissions.view(), &alphas, &tau, eps, &path).unwrap();
            assert!(star_nll <= nll + 1e-12);
        }
    }

    #[test]
    fn uniform_transitions_decode_framewise_argmax() {
        let (emissions, alphas, _, _) = random_instance(88, 6, 4);
        let tau = Array2::zeros((4, 4));
        let decoded = viterbi(emissions.view(), &alphas, &tau, 0.0).unwrap();
        for (t, &y) in decoded.y.iter().enumerate() {
            let row = emissions.row(t);
            let mut best = 0;
            for j in 1..4 {
                if row[j] > row[best] {
                    best = j;
                }
            }
            assert_eq!(y, best, "frame {t}");
        }
    }

    #[test]
    fn closed_gate_forces_constant_path() {
        for seed in 0..20 {
            let (emissions, _, tau, _) = random_instance(500 + seed, 6, 4);
            let alphas = vec![0.0; 6];
            let decoded = viterbi(emissions.view(), &alphas, &tau, 0.5).unwrap();
            assert!(decoded.y.windows(2).all(|w| w[0] == w[1]), "path {:?}", decoded.y);
            // The constant path chosen maximises summed emissions.
            let sums: Vec<f64> = (0..4)
                .map(|j| (0..6).map(|t| emissions[[t, j]]).sum::<f64>())
                .collect();
            let best = (0..4).max_by(|&a, &b| sums[a].partial_cmp(&sums[b]).unwrap()).unwrap();
            assert_eq!(decoded.y[0], best);
        }
    }

    #[test]
    fn single_class_sequences_are_certain() {
        let emissions = array![[0.7], [1.2], [-0.3]];
        let tau = Array2::zeros((1, 1));
        let alphas = vec![0.5; 3];
        let nll = sequence_nll(emissions.view(), &alphas, &tau, 0.0, &[0, 0, 0]).unwrap();
        assert!(nll.abs() < 1e-12);
    }

    #[test]
    fn emission_column_shift_leaves_decoding_unchanged() {
        let (emissions, alphas, tau, eps) = random_instance(91, 6, 3);
        let base = viterbi(emissions.view(), &alphas, &tau, eps).unwrap();
        // Add a constant per frame (row) across all labels.
        let mut shifted = emissions.clone();
        for (t, mut row) in shifted.rows_mut().into_iter().enumerate() {
            row += 3.7 * (t as f64 + 1.0);
        }
        let again = viterbi(shifted.view(), &alphas, &tau, eps).unwrap();
        assert_eq!(base.y, again.y);
    }

    #[test]
    fn label_out_of_range_is_an_error() {
        let emissions = array![[0.0, 0.0], [0.0, 0.0]];
        let tau = Array2::zeros((2, 2));
        let err = sequence_nll(emissions.view(), &[0.0, 0.0], &tau, 0.0, &[0, 5]);
        assert!(matches!(err, Err(Error::LabelOutOfRange { .. })));
    }

    #[test]
    fn empty_sequence_is_an_error() {
        let emissions = Array2::<f64>::zeros((0, 2));
        let tau = Array2::zeros((2, 2));
        assert!(log_forward(emissions.view(), &[], &tau, 0.0).is_err());
    }

    #[test]
    fn nll_gradients_match_finite_differences() {
        for seed in 0..6 {
            // Arbitrary paths are only finite-difference-friendly when every
            // gate is open; with gates in play, check at the decoded path
            // (gate-feasible, finite score), which is where training
            // evaluates these gradients.
            let (emissions, alphas, tau, eps) = random_instance(700 + seed, 5, 3);
            let (eps, path) = if seed % 2 == 0 {
                (0.0, vec![0, 2, 1, 1, 0])
            } else {
                (eps, viterbi(emissions.view(), &alphas, &tau, eps).unwrap().y)
            };
            let grads =
                sequence_nll_grads(emissions.view(), &alphas, &tau, eps, &path).unwrap();
            let h = 1e-6;

            let mut e = emissions.clone();
            for t in 0..5 {
                for j in 0..3 {
                    e[[t, j]] += h;
                    let fp = sequence_nll(e.view(), &alphas, &tau, eps, &path).unwrap();
                    e[[t, j]] -= 2.0 * h;
                    let fm = sequence_nll(e.view(), &alphas, &tau, eps, &path).unwrap();
                    e[[t, j]] += h;
                    let numeric = (fp - fm) / (2.0 * h);
                    let analytic = grads.emissions[[t, j]];
                    assert!(
                        (analytic - numeric).abs() <= 1e-4 * analytic.abs().max(numeric.abs()) + 1e-7,
                        "emission ({t},{j}): {analytic} vs {numeric}"
                    );
                }
            }

            let mut tt = tau.clone();
            for i in 0..3 {
                for j in 0..3 {
                    tt[[i, j]] += h;
                    let fp = sequence_nll(emissions.view(), &alphas, &tt, eps, &path).unwrap();
                    tt[[i, j]] -= 2.0 * h;
                    let fm = sequence_nll(emissions.view(), &alphas, &tt, eps, &path).unwrap();
                    tt[[i, j]] += h;
                    let numeric = (fp - fm) / (2.0 * h);
                    let analytic = grads.log_tau[[i, j]];
                    assert!(
                        (analytic - numeric).abs() <= 1e-4 * analytic.abs().max(numeric.abs()) + 1e-7,
                        "tau ({i},{j}): {analytic} vs {numeric}"
                    );
                }
            }
        }
    }

    #[test]
    fn marginals_are_distributions() {
        let (emissions, alphas, tau, eps) = random_instance(43, 6, 3);
        let m = marginals(emissions.view(), &alphas, &tau, eps).unwrap();
        for t in 0..6 {
            let row_sum: f64 = m.row(t).sum();
            assert!((row_sum - 1.0).abs() < 1e-10);
            assert!(m.row(t).iter().all(|&p| (0.0..=1.0 + 1e-12).contains(&p)));
        }
    }
}
