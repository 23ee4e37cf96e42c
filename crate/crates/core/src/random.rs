//! Seeded random generators for states, unitaries, instruments, channels and protocols.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channels::Channel;
use crate::discrimination::Protocol;
use crate::error::Result;
use crate::instruments::Instrument;
use crate::linalg::CMatrix;
use crate::states::{Bloch, DensityOperator, Ensemble};

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) / 2f64.sqrt()
    })
}

/// Haar-distributed unitary from the phase-corrected QR decomposition of a Ginibre matrix.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let qr = ginibre(rng, d, d).into_inner().qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = CMatrix::from_fn(d, d, |i, j| {
        if i == j && r[(i, i)].norm() > 0.0 {
            r[(i, i)] / r[(i, i)].norm()
        } else if i == j {
            Complex64::ONE
        } else {
            Complex64::ZERO
        }
    });
    &CMatrix::checked(q).expect("finite QR factor") * &phases
}

/// Density operator `G G† / tr` with `G` a `d × rank` Ginibre matrix.
pub fn density<R: Rng + ?Sized>(rng: &mut R, d: usize, rank: usize) -> DensityOperator {
    let g = ginibre(rng, d, rank.clamp(1, d));
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    DensityOperator::from_unnormalized(m, tr)
}

/// Density operator of random rank in `1..=d`.
pub fn any_density<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityOperator {
    let rank = rng.random_range(1..=d);
    density(rng, d, rank)
}

pub fn pure_state<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityOperator {
    density(rng, d, 1)
}

/// Uniform unit vector in three dimensions.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R) -> Bloch {
    loop {
        let v: Bloch = [0; 3].map(|_| rng.sample(StandardNormal));
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-9 {
            return v.map(|x| x / n);
        }
    }
}

/// Uniform point of the Bloch ball.
pub fn bloch_in_ball<R: Rng + ?Sized>(rng: &mut R) -> Bloch {
    let radius = rng.random::<f64>().cbrt();
    unit_vector(rng).map(|x| x * radius)
}

/// Strictly positive priors summing to one (flat Dirichlet).
pub fn priors<R: Rng + ?Sized>(rng: &mut R, r: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..r).map(|_| -(1.0 - rng.random::<f64>()).ln() + 1e-9).collect();
    let total: f64 = w.iter().sum();
    let mut q: Vec<f64> = w.iter().map(|x| x / total).collect();
    // absorb rounding so the sum is exactly representable as one
    let rest: f64 = q[1..].iter().sum();
    q[0] = 1.0 - rest;
    q
}

/// `r` states of random rank in dimension `d` with random priors.
pub fn ensemble<R: Rng + ?Sized>(rng: &mut R, d: usize, r: usize) -> Ensemble {
    let states = (0..r).map(|_| any_density(rng, d)).collect();
    Ensemble::new(states, priors(rng, r)).expect("generated ensemble is valid")
}

/// Two qubit states drawn uniformly from the Bloch ball with random priors.
pub fn qubit_pair<R: Rng + ?Sized>(rng: &mut R) -> Ensemble {
    let (r1, r2) = (bloch_in_ball(rng), bloch_in_ball(rng));
    Ensemble::from_bloch(&[r1, r2], priors(rng, 2)).expect("generated ensemble is valid")
}

/// Columns of a random isometry `d → d·blocks`, cut into `blocks` square Kraus operators.
fn isometry_blocks<R: Rng + ?Sized>(rng: &mut R, d: usize, blocks: usize) -> Vec<CMatrix> {
    let v = unitary(rng, d * blocks).columns(0, d);
    (0..blocks).map(|b| v.block(b * d, 0, d, d)).collect()
}

/// Instrument with `outcomes` outcomes and `kraus_per_outcome` Kraus operators each.
pub fn instrument<R: Rng + ?Sized>(rng: &mut R, d: usize, outcomes: usize, kraus_per_outcome: usize) -> Instrument {
    let mut blocks = isometry_blocks(rng, d, outcomes * kraus_per_outcome).into_iter();
    let kraus = (0..outcomes).map(|_| blocks.by_ref().take(kraus_per_outcome).collect()).collect();
    Instrument::new(kraus).expect("isometry blocks form an instrument")
}

/// Instrument with a random number (1 to 3) of Kraus operators per outcome.
pub fn any_instrument<R: Rng + ?Sized>(rng: &mut R, d: usize, outcomes: usize) -> Instrument {
    let l = rng.random_range(1..=3);
    instrument(rng, d, outcomes, l)
}

pub fn channel<R: Rng + ?Sized>(rng: &mut R, d: usize, kraus_count: usize) -> Channel {
    Channel::new(isometry_blocks(rng, d, kraus_count)).expect("isometry blocks form a channel")
}

/// `{P, I − P}` with `P` a projector of random rank in `0..=d` onto a Haar-random subspace.
pub fn projector_pair<R: Rng + ?Sized>(rng: &mut R, d: usize) -> [CMatrix; 2] {
    let rank = rng.random_range(0..=d);
    let u = unitary(rng, d);
    let diag: Vec<f64> = (0..d).map(|i| if i < rank { 1.0 } else { 0.0 }).collect();
    let p = (&(&u * &CMatrix::from_real_diagonal(&diag)) * &u.adjoint()).hermitian_part();
    let q = &CMatrix::identity(d) - &p;
    [p, q]
}

/// Chain of `n` random `r`-outcome receivers, with random channels if requested.
pub fn protocol<R: Rng + ?Sized>(rng: &mut R, d: usize, r: usize, n: usize, noisy: bool) -> Result<Protocol> {
    let receivers = (0..n).map(|_| any_instrument(rng, d, r)).collect();
    if noisy {
        let channels = (0..n)
            .map(|_| {
                let l = rng.random_range(1..=3);
                channel(rng, d, l)
            })
            .collect();
        Protocol::with_channels(receivers, channels)
    } else {
        Protocol::new(receivers)
    }
}
