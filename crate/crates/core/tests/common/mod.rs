//! Brute-force oracles and input generators for the integration tests.
//!
//! The oracles evaluate the metric definitions directly: explicit Gram
//! matrices, plain nested-loop accumulation, no shared code with the
//! implementation under test.

use ndarray::Array2;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use repsim_core::DataMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(n: usize, p: usize, rng: &mut ChaCha8Rng) -> DataMatrix {
    let values = Array2::from_shape_simple_fn((n, p), || rng.gen_range(-1.0..1.0));
    DataMatrix::new(values).unwrap()
}

pub fn random_normal_matrix(n: usize, p: usize, rng: &mut ChaCha8Rng) -> DataMatrix {
    // Box-Muller keeps the oracle free of distribution crates.
    let values = Array2::from_shape_simple_fn((n, p), || {
        let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    });
    DataMatrix::new(values).unwrap()
}

/// Explicit n x n Gram matrix via nested loops.
pub fn gram(m: &DataMatrix) -> Vec<Vec<f64>> {
    let v = m.values();
    let (n, p) = (m.n_obs(), m.n_feat());
    let mut g = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..p {
                acc += v[[i, k]] * v[[j, k]];
            }
            g[i][j] = acc;
        }
    }
    g
}

/// Direct RV evaluation: tr(XX'YY') / sqrt(tr[(XX')^2] tr[(YY')^2]).
pub fn oracle_rv(x: &DataMatrix, y: &DataMatrix) -> f64 {
    let gx = gram(x);
    let gy = gram(y);
    let n = gx.len();
    let mut num = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        for j in 0..n {
            num += gx[i][j] * gy[i][j];
            sxx += gx[i][j] * gx[i][j];
            syy += gy[i][j] * gy[i][j];
        }
    }
    num / (sxx * syy).sqrt()
}

/// Direct RV2 evaluation with the Gram diagonals skipped.
pub fn oracle_rv2(x: &DataMatrix, y: &DataMatrix) -> f64 {
    let gx = gram(x);
    let gy = gram(y);
    let n = gx.len();
    let mut num = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            num += gx[i][j] * gy[i][j];
            sxx += gx[i][j] * gx[i][j];
            syy += gy[i][j] * gy[i][j];
        }
    }
    num / (sxx * syy).sqrt()
}

/// Column centering by plain loops, then the RV oracle.
pub fn oracle_linear_cka(x: &DataMatrix, y: &DataMatrix) -> f64 {
    oracle_rv(&center(x), &center(y))
}

fn center(m: &DataMatrix) -> DataMatrix {
    let v = m.values();
    let (n, p) = (m.n_obs(), m.n_feat());
    let mut out = v.clone();
    for j in 0..p {
        let mut mean = 0.0;
        for i in 0..n {
            mean += v[[i, j]];
        }
        mean /= n as f64;
        for i in 0..n {
            out[[i, j]] -= mean;
        }
    }
    DataMatrix::new(out).unwrap()
}

/// Apply a random orthogonal column transform: a product of Householder
/// reflections and a diagonal sign flip, each orthogonal to machine
/// precision. Never materializes Q.
pub fn apply_random_orthogonal(m: &DataMatrix, seed: u64) -> DataMatrix {
    let mut rng = rng(seed);
    let p = m.n_feat();
    let n = m.n_obs();
    let mut v = m.values().clone();
    let reflections = p.min(8).max(2);
    for _ in 0..reflections {
        // unit vector u
        let mut u: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..1.0f64)).collect();
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-12 {
            continue;
        }
        u.iter_mut().for_each(|x| *x /= norm);
        // X <- X - 2 (X u) u'
        for i in 0..n {
            let mut proj = 0.0;
            for j in 0..p {
                proj += v[[i, j]] * u[j];
            }
            for j in 0..p {
                v[[i, j]] -= 2.0 * proj * u[j];
            }
        }
    }
    for j in 0..p {
        if rng.gen_bool(0.5) {
            for i in 0..n {
                v[[i, j]] = -v[[i, j]];
            }
        }
    }
    DataMatrix::new(v).unwrap()
}

pub fn scale(m: &DataMatrix, alpha: f64) -> DataMatrix {
    DataMatrix::new(m.values() * alpha).unwrap()
}

pub fn permute_rows(m: &DataMatrix, perm: &[usize]) -> DataMatrix {
    DataMatrix::new(m.values().select(ndarray::Axis(0), perm)).unwrap()
}

pub fn random_permutation(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        p.swap(i, j);
    }
    p
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    let denom = a.abs().max(b.abs()).max(1e-300);
    (a - b).abs() / denom
}
