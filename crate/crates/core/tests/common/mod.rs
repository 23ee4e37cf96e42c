//! Reference computations that share no code paths with the library:
//! a cyclic Jacobi eigensolver, index-loop tensor operations, and
//! brute-force expansion of Kraus products.

#![allow(dead_code, clippy::needless_range_loop)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use seqdisc_core::{CMatrix, Complex64, Ensemble, Protocol};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Eigenvalues of a Hermitian matrix via Jacobi rotations on the real
/// symmetric embedding `[[A, -B], [B, A]]`; each eigenvalue appears twice
/// there, so every other sorted value is returned.
pub fn jacobi_eigenvalues(h: &CMatrix) -> Vec<f64> {
    let n = h.nrows();
    let m = 2 * n;
    let mut a = vec![vec![0.0; m]; m];
    for i in 0..n {
        for j in 0..n {
            let z = h.get(i, j);
            a[i][j] = z.re;
            a[i + n][j + n] = z.re;
            a[i][j + n] = -z.im;
            a[i + n][j] = z.im;
        }
    }
    for i in 0..m {
        for j in 0..i {
            let s = 0.5 * (a[i][j] + a[j][i]);
            a[i][j] = s;
            a[j][i] = s;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..m).flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..m).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| y.partial_cmp(x).unwrap());
    ev.into_iter().step_by(2).collect()
}

pub fn trace_norm_oracle(h: &CMatrix) -> f64 {
    jacobi_eigenvalues(h).iter().map(|x| x.abs()).sum()
}

pub fn kron_oracle(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    CMatrix::from_fn(ar * br, ac * bc, |i, j| a.get(i / br, j / bc) * b.get(i % br, j % bc))
}

/// `tr₂` over the second tensor factor of dimension `d2`, by index loops.
pub fn partial_trace_oracle(m: &CMatrix, d2: usize) -> CMatrix {
    let d1 = m.nrows() / d2;
    CMatrix::from_fn(d1, d1, |i, j| {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..d2 {
            acc += m.get(i * d2 + k, j * d2 + k);
        }
        acc
    })
}

/// `Σ_j q_j Σ_paths tr{A ρ_j A†}` where each path `A` is an explicit product
/// of one Kraus operator per channel and per receiver, all receivers
/// reporting outcome `j`.
pub fn brute_force_success(p: &Protocol, e: &Ensemble) -> f64 {
    let mut total = 0.0;
    for (j, (rho, q)) in e.states().iter().zip(e.priors()).enumerate() {
        let mut stages: Vec<&[CMatrix]> = Vec::new();
        for (n, m) in p.receivers().iter().enumerate() {
            if let Some(ch) = p.channels() {
                stages.push(ch[n].kraus());
            }
            stages.push(m.kraus(j));
        }
        let mut idx = vec![0usize; stages.len()];
        loop {
            let mut a = CMatrix::identity(e.dim());
            for (s, &k) in stages.iter().zip(&idx) {
                a = &s[k] * &a;
            }
            let out = &(&a * rho.matrix()) * &a.adjoint();
            total += q * out.trace().re;
            let mut pos = 0;
            loop {
                if pos == idx.len() {
                    break;
                }
                idx[pos] += 1;
                if idx[pos] < stages[pos].len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == idx.len() {
                break;
            }
        }
    }
    total
}

/// Qubit Helstrom bound from Bloch vectors: `‖q₁ρ₁ − q₂ρ₂‖₁ = max{|q₁ − q₂|, ‖q₁r₁ − q₂r₂‖}`.
pub fn qubit_helstrom_oracle(r1: [f64; 3], r2: [f64; 3], q1: f64, q2: f64) -> f64 {
    let v: f64 = (0..3).map(|k| (q1 * r1[k] - q2 * r2[k]).powi(2)).sum::<f64>().sqrt();
    0.5 * (1.0 + (q1 - q2).abs().max(v))
}
