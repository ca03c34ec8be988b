//! Lowest eigenpairs of real symmetric operators.
//!
//! [`low_spectrum`] runs thick-restart Lanczos with full
//! reorthogonalization and locks converged pairs one at a time, so
//! degenerate levels are returned as a block. [`dense_spectrum`] is the
//! dense reference used for verification.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseOperator;

pub const DEFAULT_SEED: u64 = 0x5EED_F1A7;
pub const DEFAULT_DENSE_CAP: usize = 4000;

const CHECK_EVERY: usize = 10;
const BREAKDOWN: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Number of lowest eigenpairs; clamped to the dimension.
    pub k: usize,
    /// Residual bound `‖Hx − θx‖ ≤ tol · max(1, |θ|)`.
    pub tol: f64,
    /// Budget of operator applications over the whole run.
    pub max_iter: usize,
    pub seed: u64,
    /// Krylov vectors kept between restarts.
    pub krylov_dim: usize,
    pub dense_cap: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            k: 4,
            tol: 1e-10,
            max_iter: 5000,
            seed: DEFAULT_SEED,
            krylov_dim: 60,
            dense_cap: DEFAULT_DENSE_CAP,
        }
    }
}

impl SolverOptions {
    pub fn with_k(self, k: usize) -> Self {
        Self { k, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if self.k == 0 {
            bad.push("k must be at least 1".to_string());
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            bad.push(format!("tol must be positive, got {}", self.tol));
        }
        if self.max_iter == 0 {
            bad.push("max_iter must be at least 1".to_string());
        }
        if self.krylov_dim < 2 {
            bad.push("krylov_dim must be at least 2".to_string());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(bad.join("; ")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Unit norm, largest-magnitude entry positive.
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl EigenResult {
    pub fn ground_energy(&self) -> Option<f64> {
        self.eigenvalues.first().copied()
    }

    pub fn ground_state(&self) -> Option<&[f64]> {
        self.eigenvectors.first().map(Vec::as_slice)
    }

    /// Error unless every requested pair converged.
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                iterations: self.iterations,
                residual: self.residuals.iter().fold(0.0, |m: f64, r| m.max(*r)),
            })
        }
    }
}

/// `y = H x`.
pub fn matvec(h: &SparseOperator, x: &[f64]) -> Result<Vec<f64>> {
    h.matvec(x)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += alpha * x);
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for v in basis {
            let c = dot(v, w);
            axpy(-c, v, w);
        }
    }
}

fn fix_sign(x: &mut [f64]) {
    let pivot = x
        .iter()
        .copied()
        .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
    if pivot < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
}

/// Eigenpairs of the projected matrix, ascending.
fn ritz(t: &[Vec<f64>], m: usize) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(DMatrix::from_fn(m, m, |i, j| t[i][j]));
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

fn combine(basis: &[Vec<f64>], coeffs: impl Iterator<Item = f64>, dim: usize) -> Vec<f64> {
    let mut y = vec![0.0; dim];
    for (v, c) in basis.iter().zip(coeffs) {
        axpy(c, v, &mut y);
    }
    let n = norm(&y);
    y.iter_mut().for_each(|v| *v /= n);
    y
}

fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

/// A random unit vector orthogonal to `against`, if the complement is
/// not exhausted.
fn fresh_direction(rng: &mut ChaCha8Rng, dim: usize, against: &[&[Vec<f64>]]) -> Option<Vec<f64>> {
    if against.iter().map(|b| b.len()).sum::<usize>() >= dim {
        return None;
    }
    for _ in 0..8 {
        let mut x = random_vector(rng, dim);
        for b in against {
            orthogonalize(&mut x, b);
        }
        let n = norm(&x);
        if n > 1e-8 {
            x.iter_mut().for_each(|v| *v /= n);
            return Some(x);
        }
    }
    None
}

/// The `k` lowest eigenpairs of the symmetric operator `h`.
///
/// Thick-restart Lanczos: the basis is expanded with full
/// reorthogonalization up to `krylov_dim` vectors, then shrunk to the
/// lowest half of its Ritz vectors plus the residual direction. The lowest
/// Ritz pair is locked once its true residual meets the tolerance and the
/// search continues in its orthogonal complement.
///
/// Once `k` pairs are locked, the search restarts from a fresh random
/// vector orthogonal to them and keeps any pair below the `k`-th, which
/// recovers degenerate copies. A budget exhausted during that check also
/// counts as not converged.
///
/// Running out of `max_iter` returns the pairs found so far plus the best
/// current estimate with `converged = false`.
pub fn low_spectrum(h: &SparseOperator, opts: &SolverOptions) -> Result<EigenResult> {
    opts.validate()?;
    let dim = h.dim();
    if dim == 0 {
        return Err(Error::EmptyBasis);
    }
    let k = opts.k.min(dim);
    let mut run = Search {
        h,
        opts,
        rng: ChaCha8Rng::seed_from_u64(opts.seed),
        locked: Vec::with_capacity(k),
        values: Vec::with_capacity(k),
        residuals: Vec::with_capacity(k),
        matvecs: 0,
    };
    let mut converged = run.lock_until(k)?;

    // A Krylov space grown from one vector holds one direction per
    // eigenspace, so degenerate copies can be missed. Restart from a fresh
    // vector in the complement until nothing below the k-th level appears.
    while converged && run.locked.len() < dim {
        let mut sorted = run.values.clone();
        sorted.sort_by(f64::total_cmp);
        let kth = sorted[k - 1];
        converged = run.lock_until(run.locked.len() + 1)?;
        let found = *run.values.last().expect("one more pair");
        if !converged || found >= kth - opts.tol * kth.abs().max(1.0) {
            run.values.pop();
            run.residuals.pop();
            run.locked.pop();
            break;
        }
    }

    let mut order: Vec<usize> = (0..run.values.len()).collect();
    order.sort_by(|&a, &b| run.values[a].total_cmp(&run.values[b]));
    order.truncate(k);
    let eigenvectors = order
        .iter()
        .map(|&i| {
            let mut v = run.locked[i].clone();
            fix_sign(&mut v);
            v
        })
        .collect();
    Ok(EigenResult {
        eigenvalues: order.iter().map(|&i| run.values[i]).collect(),
        eigenvectors,
        residuals: order.iter().map(|&i| run.residuals[i]).collect(),
        iterations: run.matvecs,
        converged,
    })
}

struct Search<'a> {
    h: &'a SparseOperator,
    opts: &'a SolverOptions,
    rng: ChaCha8Rng,
    locked: Vec<Vec<f64>>,
    values: Vec<f64>,
    residuals: Vec<f64>,
    matvecs: usize,
}

impl Search<'_> {
    /// Locks the lowest pairs of the complement of `locked`, starting from a
    /// fresh random vector, until `target` pairs are held. Returns false if
    /// the budget ran out; the last pair is then an unconverged estimate.
    fn lock_until(&mut self, target: usize) -> Result<bool> {
        let (h, opts) = (self.h, self.opts);
        let dim = h.dim();
        let Some(start) = fresh_direction(&mut self.rng, dim, &[&self.locked]) else {
            return Ok(true);
        };
        let mut basis = vec![start];
        let mut t: Vec<Vec<f64>> = Vec::new();
        let mut expanded = 0;
        let mut scale = 0.0f64;
        let mut w = vec![0.0; dim];

        loop {
            let cap = opts.krylov_dim.min(dim - self.locked.len());
            let mut next: Option<Vec<f64>> = None;
            // expansion
            while expanded < basis.len() {
                let j = expanded;
                h.matvec_into(&basis[j], &mut w)?;
                self.matvecs += 1;
                let mut col = vec![0.0; j + 1];
                for _ in 0..2 {
                    for (c, v) in col.iter_mut().zip(&basis) {
                        let d = dot(v, &w);
                        axpy(-d, v, &mut w);
                        *c += d;
                    }
                    orthogonalize(&mut w, &self.locked);
                }
                t.push(vec![0.0; j + 1]);
                for (i, c) in col.into_iter().enumerate() {
                    t[j][i] = c;
                    if i < j {
                        t[i].push(c);
                    }
                }
                for row in t.iter_mut().take(j) {
                    row.resize(j + 1, 0.0);
                }
                expanded += 1;
                let b = norm(&w);
                scale = scale.max(t[j][j].abs()).max(b);
                let breakdown = b <= BREAKDOWN * scale.max(f64::MIN_POSITIVE);
                let full = expanded >= cap;
                let spent = self.matvecs >= opts.max_iter;
                if breakdown || full || spent || expanded % CHECK_EVERY == 0 {
                    let (theta, s) = ritz(&t, expanded);
                    let estimate = (b * s[(expanded - 1, 0)]).abs();
                    if breakdown || full || spent {
                        if !breakdown {
                            next = Some(w.iter().map(|v| v / b).collect());
                        }
                        break;
                    }
                    if estimate <= 0.1 * opts.tol * theta[0].abs().max(1.0) {
                        next = Some(w.iter().map(|v| v / b).collect());
                        break;
                    }
                }
                basis.push(w.iter().map(|v| v / b).collect());
            }

            // lowest Ritz pair, checked against the true residual
            let m = expanded;
            let (theta, s) = ritz(&t, m);
            let y = combine(&basis, s.column(0).iter().copied(), dim);
            h.matvec_into(&y, &mut w)?;
            self.matvecs += 1;
            let rq = dot(&y, &w);
            axpy(-rq, &y, &mut w);
            let residual = norm(&w);
            let ok = residual <= opts.tol * rq.abs().max(1.0);
            let mut first_kept = 0;
            if ok || self.matvecs >= opts.max_iter {
                self.values.push(rq);
                self.residuals.push(residual);
                self.locked.push(y);
                if !ok {
                    return Ok(false);
                }
                if self.locked.len() >= target {
                    return Ok(true);
                }
                first_kept = 1;
            }

            // thick restart
            let room = dim - self.locked.len();
            let keep = (opts.krylov_dim / 2).max(1).min(m - first_kept).min(room);
            let kept: Vec<Vec<f64>> = (first_kept..first_kept + keep)
                .map(|c| {
                    let mut v = combine(&basis, s.column(c).iter().copied(), dim);
                    orthogonalize(&mut v, &self.locked);
                    let n = norm(&v);
                    v.iter_mut().for_each(|x| *x /= n);
                    v
                })
                .collect();
            t = (0..keep)
                .map(|i| {
                    let mut row = vec![0.0; keep];
                    row[i] = theta[first_kept + i];
                    row
                })
                .collect();
            basis = kept;
            expanded = keep;
            if keep < room {
                let locked = &self.locked;
                let direction = next
                    .map(|mut v| {
                        orthogonalize(&mut v, locked);
                        orthogonalize(&mut v, &basis);
                        v
                    })
                    .filter(|v| norm(v) > 1e-8)
                    .map(|mut v| {
                        let n = norm(&v);
                        v.iter_mut().for_each(|x| *x /= n);
                        v
                    })
                    .or_else(|| fresh_direction(&mut self.rng, dim, &[locked, &basis]));
                if let Some(v) = direction {
                    basis.push(v);
                }
            }
        }
    }
}

fn check_dense(h: &SparseOperator, cap: usize) -> Result<()> {
    if h.dim() == 0 {
        return Err(Error::EmptyBasis);
    }
    if h.dim() > cap {
        return Err(Error::DenseCap { dim: h.dim(), cap });
    }
    Ok(())
}

/// Full spectrum by dense symmetric diagonalization.
pub fn dense_spectrum(h: &SparseOperator, cap: usize) -> Result<EigenResult> {
    check_dense(h, cap)?;
    let eig = SymmetricEigen::new(h.to_dense());
    let mut order: Vec<usize> = (0..h.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut eigenvalues = Vec::with_capacity(h.dim());
    let mut eigenvectors = Vec::with_capacity(h.dim());
    let mut residuals = Vec::with_capacity(h.dim());
    for i in order {
        let theta = eig.eigenvalues[i];
        let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
        fix_sign(&mut v);
        let mut r = h.matvec(&v)?;
        axpy(-theta, &v, &mut r);
        eigenvalues.push(theta);
        residuals.push(norm(&r));
        eigenvectors.push(v);
    }
    Ok(EigenResult {
        eigenvalues,
        eigenvectors,
        residuals,
        iterations: 0,
        converged: true,
    })
}

/// Eigenvalues only, ascending.
pub fn dense_eigenvalues(h: &SparseOperator, cap: usize) -> Result<Vec<f64>> {
    check_dense(h, cap)?;
    let mut values: Vec<f64> = h.to_dense().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-10 * b.abs().max(1.0)
    }

    #[test]
    fn diagonal_ground_state() {
        let h = SparseOperator::from_diagonal(&[3.0, 1.0, 2.0]);
        let r = low_spectrum(&h, &SolverOptions::default().with_k(1)).unwrap();
        assert!(r.converged);
        assert!(close(r.eigenvalues[0], 1.0));
        let v = &r.eigenvectors[0];
        assert!((v[1] - 1.0).abs() < 1e-10 && v[0].abs() < 1e-10 && v[2].abs() < 1e-10);
    }

    #[test]
    fn two_by_two() {
        let a = 0.7;
        let h = SparseOperator::from_rows(2, |i, out| out.push((1 - i, -a)));
        let r = low_spectrum(&h, &SolverOptions::default().with_k(2)).unwrap();
        assert!(close(r.eigenvalues[0], -a) && close(r.eigenvalues[1], a));
        let overlap = dot(&r.eigenvectors[0], &r.eigenvectors[1]);
        assert!(overlap.abs() < 1e-10);
    }

    #[test]
    fn degenerate_levels_form_a_block() {
        let diag: Vec<f64> = (0..200).map(|i| [0.0, 0.0, 0.0, 1.0][i % 4] + (i / 4) as f64).collect();
        let h = SparseOperator::from_rows(200, |i, out| {
            out.push((i, diag[i]));
        });
        let r = low_spectrum(&h, &SolverOptions::default().with_k(4)).unwrap();
        assert!(r.converged);
        assert_eq!(r.eigenvalues.len(), 4);
        for (v, want) in r.eigenvalues.iter().zip([0.0, 0.0, 0.0, 1.0]) {
            assert!(close(*v, want), "{v}");
        }
    }

    #[test]
    fn copies_of_one_block_are_all_found() {
        // two identical uncoupled chains: every level is exactly doubled
        let half = 150;
        let h = SparseOperator::from_rows(2 * half, |i, out| {
            let (base, j) = (i / half * half, i % half);
            out.push((i, (j % 7) as f64 * 0.2));
            if j + 1 < half {
                out.push((base + j + 1, -1.0));
            }
            if j > 0 {
                out.push((base + j - 1, -1.0));
            }
        });
        let dense = dense_eigenvalues(&h, 4000).unwrap();
        let r = low_spectrum(&h, &SolverOptions::default().with_k(4)).unwrap();
        assert!(r.converged);
        for (a, b) in r.eigenvalues.iter().zip(&dense) {
            assert!(close(*a, *b), "{a} vs {b}");
        }
        assert!(close(r.eigenvalues[0], r.eigenvalues[1]));
    }

    #[test]
    fn matches_dense_on_a_chain() {
        let n = 300;
        let h = SparseOperator::from_rows(n, |i, out| {
            out.push((i, (i % 13) as f64 * 0.3));
            if i + 1 < n {
                out.push((i + 1, -1.0));
            }
            if i > 0 {
                out.push((i - 1, -1.0));
            }
        });
        let dense = dense_eigenvalues(&h, 4000).unwrap();
        let r = low_spectrum(&h, &SolverOptions::default().with_k(5)).unwrap();
        assert!(r.converged);
        for (a, b) in r.eigenvalues.iter().zip(&dense) {
            assert!(close(*a, *b), "{a} vs {b}");
        }
        for (v, (theta, res)) in r.eigenvectors.iter().zip(r.eigenvalues.iter().zip(&r.residuals)) {
            assert!((norm(v) - 1.0).abs() < 1e-12);
            assert!(*res <= 1e-10 * theta.abs().max(1.0));
        }
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let n = 400;
        let h = SparseOperator::from_rows(n, |i, out| {
            out.push((i, 1.0 / (1.0 + i as f64)));
            if i + 1 < n {
                out.push((i + 1, 0.5));
            }
            if i > 0 {
                out.push((i - 1, 0.5));
            }
        });
        let opts = SolverOptions {
            max_iter: 5,
            ..SolverOptions::default()
        };
        let r = low_spectrum(&h, &opts).unwrap();
        assert!(!r.converged);
        assert!(r.iterations <= 6);
        assert!(matches!(r.require_converged(), Err(Error::NotConverged { .. })));
    }

    #[test]
    fn dense_reference() {
        let h = SparseOperator::from_diagonal(&[2.5]);
        assert_eq!(dense_spectrum(&h, 10).unwrap().eigenvalues, [2.5]);
        let h = SparseOperator::from_rows(3, |i, out| {
            out.push((i, 10.0 * (i as f64 - 1.0).abs()));
            if i + 1 < 3 {
                out.push((i + 1, -0.05));
            }
            if i > 0 {
                out.push((i - 1, -0.05));
            }
        });
        let base = dense_eigenvalues(&h, 10).unwrap();
        assert!((base[0] + 5.0e-4).abs() < 1e-6);
        let shifted = dense_eigenvalues(&h.shifted(3.0), 10).unwrap();
        for (a, b) in base.iter().zip(&shifted) {
            assert!((a + 3.0 - b).abs() < 1e-12);
        }
        assert!(matches!(dense_spectrum(&h, 2), Err(Error::DenseCap { dim: 3, cap: 2 })));
        assert!(matches!(
            low_spectrum(&SparseOperator::zeros(0), &SolverOptions::default()),
            Err(Error::EmptyBasis)
        ));
    }

    #[test]
    fn runs_are_bit_identical() {
        let n = 500;
        let h = SparseOperator::from_rows(n, |i, out| {
            out.push((i, ((i * 7) % 11) as f64));
            out.push(((i + 17) % n, -0.3));
            out.push(((i + n - 17) % n, -0.3));
        });
        let a = low_spectrum(&h, &SolverOptions::default()).unwrap();
        let b = low_spectrum(&h, &SolverOptions::default()).unwrap();
        assert_eq!(a, b);
    }
}
