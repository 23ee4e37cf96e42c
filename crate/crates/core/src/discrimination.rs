//! Success probabilities of sequential conclusive discrimination, the
//! general upper bounds, and constructors for the optimal protocols.
//!
//! A [`Protocol`] is a chain of `N` receivers, each an `r`-outcome
//! instrument, optionally preceded by a channel per receiver (channel `n`
//! carries the system from receiver `n-1`, or the sender, to receiver `n`).
//! The chain succeeds on state `ρ_j` only if every receiver answers `j`.
//!
//! Three evaluations of the success probability are provided and agree to
//! rounding:
//!
//! * [`success_direct`] nests the whole chain on each `ρ_j`;
//! * [`success_chain`] multiplies per-stage outcome probabilities computed
//!   on the normalized conditional posteriors;
//! * [`success_product`] multiplies the per-receiver success probabilities
//!   on ensembles of posteriors with updated priors.

use num_complex::Complex64;

use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::instruments::{
    check_projective_resolution, compose_sequential, Instrument, SequentialInstrument,
    StatisticalRealization, PROB_FLOOR,
};
use crate::linalg::{eig_hermitian, trace_norm, CMatrix};
use crate::states::{DensityOperator, Ensemble};

/// Ordered chain of receivers with optional per-receiver input channels.
#[derive(Clone, Debug)]
pub struct Protocol {
    receivers: Vec<Instrument>,
    channels: Option<Vec<Channel>>,
}

impl Protocol {
    /// Noiseless chain; all receivers share dimension and outcome count.
    pub fn new(receivers: Vec<Instrument>) -> Result<Self> {
        let Some(first) = receivers.first() else {
            return Err(Error::InvalidParameter("a protocol needs at least one receiver".into()));
        };
        let (d, r) = (first.dim(), first.outcome_count());
        if receivers.iter().any(|m| m.dim() != d || m.outcome_count() != r) {
            return Err(Error::DimensionError("receivers differ in dimension or outcome count".into()));
        }
        Ok(Protocol { receivers, channels: None })
    }

    /// Noisy chain: `channels[n]` acts just before `receivers[n]`.
    pub fn with_channels(receivers: Vec<Instrument>, channels: Vec<Channel>) -> Result<Self> {
        let mut p = Self::new(receivers)?;
        if channels.len() != p.receivers.len() {
            return Err(Error::DimensionError(format!(
                "{} channels for {} receivers",
                channels.len(),
                p.receivers.len()
            )));
        }
        if channels.iter().any(|c| c.dim() != p.dim()) {
            return Err(Error::DimensionError("channel dimension differs from receivers".into()));
        }
        p.channels = Some(channels);
        Ok(p)
    }

    pub fn receivers(&self) -> &[Instrument] {
        &self.receivers
    }

    pub fn channels(&self) -> Option<&[Channel]> {
        self.channels.as_deref()
    }

    /// Number of receivers `N`.
    pub fn len(&self) -> usize {
        self.receivers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.receivers.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.receivers[0].dim()
    }

    pub fn outcome_count(&self) -> usize {
        self.receivers[0].outcome_count()
    }

    /// The noiseless consecutive measurement of all receivers.
    pub fn sequential_instrument(&self) -> SequentialInstrument {
        compose_sequential(self.receivers.clone()).expect("receivers validated at construction")
    }

    fn check_against(&self, e: &Ensemble) -> Result<()> {
        if e.dim() != self.dim() {
            return Err(Error::DimensionError(format!(
                "ensemble dimension {} but protocol dimension {}",
                e.dim(),
                self.dim()
            )));
        }
        if e.len() != self.outcome_count() {
            return Err(Error::WrongArity { expected: self.outcome_count(), got: e.len() });
        }
        Ok(())
    }

    /// `Λ_n[T]`, or `T` for a noiseless protocol.
    pub fn transmit(&self, n: usize, t: &CMatrix) -> CMatrix {
        match &self.channels {
            Some(chs) => chs[n].apply(t),
            None => t.clone(),
        }
    }

    /// `M_n(j)[Λ_n[T]]`.
    pub fn stage(&self, n: usize, outcome: usize, t: &CMatrix) -> CMatrix {
        self.receivers[n].apply(outcome, &self.transmit(n, t))
    }
}

/// Per-receiver breakdown of the product representation.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscriminationResult {
    pub success_probability: f64,
    /// Success probability of receiver `n` on the ensemble it actually faces.
    pub per_receiver_factors: Vec<f64>,
    /// Row `n` holds the priors faced by receiver `n`; row 0 is the original prior.
    pub updated_priors: Vec<Vec<f64>>,
}

/// Success probability by nesting the full chain on every state.
pub fn success_direct(p: &Protocol, e: &Ensemble) -> Result<f64> {
    p.check_against(e)?;
    let mut total = 0.0;
    for (j, (rho, q)) in e.states().iter().zip(e.priors()).enumerate() {
        let mut t = rho.matrix().clone();
        for n in 0..p.len() {
            t = p.stage(n, j, &t);
        }
        total += q * t.trace().re;
    }
    Ok(total)
}

/// Success probability as products of stage probabilities on normalized
/// conditional posteriors. A branch whose intermediate probability falls to
/// [`PROB_FLOOR`] contributes zero.
pub fn success_chain(p: &Protocol, e: &Ensemble) -> Result<f64> {
    p.check_against(e)?;
    let mut total = 0.0;
    for (j, (rho, q)) in e.states().iter().zip(e.priors()).enumerate() {
        let mut tau = rho.matrix().clone();
        let mut prod = 1.0;
        for n in 0..p.len() {
            let arriving = p.transmit(n, &tau);
            let mu = p.receivers[n].probability_unchecked(j, &arriving);
            prod *= mu;
            if n + 1 < p.len() {
                if mu <= PROB_FLOOR {
                    prod = 0.0;
                    break;
                }
                tau = p.receivers[n].apply(j, &arriving).scale(1.0 / mu);
            }
        }
        total += q * prod;
    }
    Ok(total)
}

/// Success probability of one receiver facing `states` with weights `priors`.
pub fn single_receiver_success(m: &Instrument, states: &[CMatrix], priors: &[f64]) -> f64 {
    states
        .iter()
        .zip(priors)
        .enumerate()
        .map(|(j, (s, q))| q * m.probability_unchecked(j, s))
        .sum()
}

/// Success probability as the product of per-receiver success probabilities,
/// with priors updated after every receiver.
pub fn success_product(p: &Protocol, e: &Ensemble) -> Result<DiscriminationResult> {
    p.check_against(e)?;
    let r = e.len();
    let mut priors = e.priors().to_vec();
    let mut states: Vec<CMatrix> = e.states().iter().map(|s| s.matrix().clone()).collect();
    let mut factors = Vec::with_capacity(p.len());
    let mut rows = vec![priors.clone()];

    for n in 0..p.len() {
        let arriving: Vec<CMatrix> = states.iter().map(|s| p.transmit(n, s)).collect();
        let m = &p.receivers[n];
        let mus: Vec<f64> = (0..r).map(|j| m.probability_unchecked(j, &arriving[j])).collect();
        let factor: f64 = priors.iter().zip(&mus).map(|(q, mu)| q * mu).sum();
        factors.push(factor);
        if n + 1 == p.len() {
            break;
        }
        if factor <= PROB_FLOOR {
            factors.resize(p.len(), 0.0);
            break;
        }
        priors = priors.iter().zip(&mus).map(|(q, mu)| q * mu / factor).collect();
        states = (0..r)
            .map(|j| {
                if mus[j] > PROB_FLOOR {
                    m.apply(j, &arriving[j]).scale(1.0 / mus[j])
                } else {
                    arriving[j].clone()
                }
            })
            .collect();
        rows.push(priors.clone());
    }

    Ok(DiscriminationResult {
        success_probability: factors.iter().product(),
        per_receiver_factors: factors,
        updated_priors: rows,
    })
}

/// Helstrom bound `(1 + ‖q₁ρ₁ − q₂ρ₂‖₁)/2` for two states.
pub fn helstrom_bound(e: &Ensemble) -> Result<f64> {
    if e.len() != 2 {
        return Err(Error::WrongArity { expected: 2, got: e.len() });
    }
    Ok(0.5 * (1.0 + trace_norm(&e.weighted_difference(0, 1))?))
}

/// Upper bound `(1/r)(1 + Σ_{i<j} ‖q_iρ_i − q_jρ_j‖₁)` valid for any number of receivers.
pub fn multi_state_upper_bound(e: &Ensemble) -> Result<f64> {
    let r = e.len();
    let mut sum = 0.0;
    for i in 0..r {
        for j in (i + 1)..r {
            sum += trace_norm(&e.weighted_difference(i, j))?;
        }
    }
    Ok((1.0 + sum) / r as f64)
}

/// Optimal projective measurement `{P₀(1), P₀(2)}` for two states: `P₀(1)`
/// projects onto the strictly positive eigenspaces of `q₁ρ₁ − q₂ρ₂`
/// (eigenvalues within the zero cutoff count as non-positive).
pub fn optimal_projectors(e: &Ensemble) -> Result<[CMatrix; 2]> {
    if e.len() != 2 {
        return Err(Error::WrongArity { expected: 2, got: e.len() });
    }
    let eig = eig_hermitian(&e.weighted_difference(0, 1))?;
    let cutoff = eig.zero_cutoff();
    let p1 = eig.spectral_projector(|l| l > cutoff);
    let p2 = &CMatrix::identity(e.dim()) - &p1;
    Ok([p1, p2])
}

/// Orthonormal bases defining the rotated first receiver `K̃(j) = Σ_i |φ_i(j)⟩⟨v_i(j)|`.
///
/// `v[j]` holds (as columns) an orthonormal basis of the range of `P₀(j)`;
/// `phi[0]` and `phi[1]` together form an orthonormal basis of the whole space
/// with the same block sizes.
#[derive(Clone, Debug)]
pub struct RotatedBases {
    pub v: [CMatrix; 2],
    pub phi: [CMatrix; 2],
}

impl RotatedBases {
    /// Eigenbases of `q₁ρ₁ − q₂ρ₂` for both `v` and `phi`; the rotated
    /// protocol then coincides with the projective one.
    pub fn eigenbases(e: &Ensemble) -> Result<Self> {
        let (v1, v2) = split_eigenbasis(e)?;
        Ok(RotatedBases { phi: [v1.clone(), v2.clone()], v: [v1, v2] })
    }

    /// `v` from the eigenbasis and `phi = W v` for a unitary `W`.
    pub fn rotated(e: &Ensemble, w: &CMatrix) -> Result<Self> {
        if !w.is_unitary() || w.nrows() != e.dim() {
            return Err(Error::InvalidParameter("rotation is not a unitary of the system dimension".into()));
        }
        let (v1, v2) = split_eigenbasis(e)?;
        Ok(RotatedBases { phi: [w * &v1, w * &v2], v: [v1, v2] })
    }

    /// `K̃(j) = Φ_j V_j†`.
    pub fn kraus(&self) -> [CMatrix; 2] {
        [0, 1].map(|j| &self.phi[j] * &self.v[j].adjoint())
    }

    /// `P̃(j) = Φ_j Φ_j†`.
    pub fn projectors(&self) -> [CMatrix; 2] {
        [0, 1].map(|j| &self.phi[j] * &self.phi[j].adjoint())
    }

    fn validate(&self, p0: &[CMatrix; 2]) -> Result<()> {
        let d = p0[0].nrows();
        for (j, p) in p0.iter().enumerate() {
            let (v, phi) = (&self.v[j], &self.phi[j]);
            if v.nrows() != d || phi.nrows() != d || v.ncols() != phi.ncols() {
                return Err(Error::InvalidParameter(format!("basis block {j} has inconsistent shape")));
            }
            let k = v.ncols();
            if (&v.adjoint() * v).max_abs_diff(&CMatrix::identity(k)) > 1e-10 {
                return Err(Error::InvalidParameter(format!("v({}) is not orthonormal", j + 1)));
            }
            if (v * &v.adjoint()).max_abs_diff(p) > 1e-10 {
                return Err(Error::InvalidParameter(format!("v({}) does not span P0({})", j + 1, j + 1)));
            }
        }
        let full = CMatrix::hstack(&[&self.phi[0], &self.phi[1]])?;
        if !full.is_square() || !full.is_unitary() {
            return Err(Error::InvalidParameter("phi is not an orthonormal basis".into()));
        }
        Ok(())
    }
}

fn split_eigenbasis(e: &Ensemble) -> Result<(CMatrix, CMatrix)> {
    if e.len() != 2 {
        return Err(Error::WrongArity { expected: 2, got: e.len() });
    }
    let eig = eig_hermitian(&e.weighted_difference(0, 1))?;
    let (pos, rest) = eig.split_basis(eig.zero_cutoff());
    if pos.ncols() == 0 || rest.ncols() == 0 {
        return Err(Error::DegenerateSpectrum(format!(
            "P0({}) = 0, the rotated protocol needs both projections nonzero",
            if pos.ncols() == 0 { 1 } else { 2 }
        )));
    }
    Ok((pos, rest))
}

/// Which optimal first receiver to use.
#[derive(Clone, Debug)]
pub enum Variant {
    /// Lüders measurement of `{P₀(1), P₀(2)}` by every receiver.
    Projective,
    /// First receiver `K̃(j)`, later receivers Lüders on `{P̃(1), P̃(2)}`.
    Rotated(RotatedBases),
}

/// Optimal `N`-receiver protocol for two states; its success probability is
/// the Helstrom bound for every `N ≥ 1`.
pub fn optimal_two_state_protocol(e: &Ensemble, receivers: usize, variant: &Variant) -> Result<Protocol> {
    if receivers == 0 {
        return Err(Error::InvalidParameter("need at least one receiver".into()));
    }
    let p0 = optimal_projectors(e)?;
    match variant {
        Variant::Projective => {
            let m = Instrument::luders(&p0)?;
            Protocol::new(vec![m; receivers])
        }
        Variant::Rotated(bases) => {
            if p0.iter().any(|p| p.trace().re < 0.5) {
                return Err(Error::DegenerateSpectrum(
                    "the rotated protocol needs P0(1) and P0(2) both nonzero".into(),
                ));
            }
            bases.validate(&p0)?;
            kraus_projector_protocol(bases.kraus().to_vec(), bases.projectors().to_vec(), receivers)
        }
    }
}

/// Protocol whose first receiver has pure Kraus operators `kraus[j]` and whose
/// later receivers measure Lüders on `projectors`, provided
/// `K†(j) P(j) K(j) = K†(j) K(j)` for every outcome. Under that condition the
/// success probability does not depend on the number of receivers.
pub fn kraus_projector_protocol(kraus: Vec<CMatrix>, projectors: Vec<CMatrix>, receivers: usize) -> Result<Protocol> {
    if receivers == 0 {
        return Err(Error::InvalidParameter("need at least one receiver".into()));
    }
    if kraus.len() != projectors.len() {
        return Err(Error::WrongArity { expected: kraus.len(), got: projectors.len() });
    }
    check_projective_resolution(&projectors).map_err(Error::IncompleteProjectors)?;
    for (j, (k, p)) in kraus.iter().zip(&projectors).enumerate() {
        if k.nrows() != p.nrows() || k.ncols() != p.ncols() {
            return Err(Error::DimensionError(format!("Kraus operator {j} and projector {j} differ in shape")));
        }
        let kd = k.adjoint();
        let deviation = (&(&kd * p) * k).max_abs_diff(&(&kd * k));
        if deviation > 1e-10 {
            return Err(Error::ConditionNotSatisfied { outcome: j, deviation });
        }
    }
    let first = Instrument::pure(kraus)?;
    let later = Instrument::luders(&projectors)?;
    let mut chain = Vec::with_capacity(receivers);
    chain.push(first);
    chain.extend(std::iter::repeat_n(later, receivers - 1));
    Protocol::new(chain)
}

/// CNOT-like indirect measurement realizing Lüders `{P₀(1), P₀(2)}` with a
/// qubit ancilla prepared in `|0⟩`.
pub fn indirect_realization_for_optimal(p0: &[CMatrix; 2]) -> Result<StatisticalRealization> {
    indirect_realization_with_ancilla(p0, [Complex64::ONE, Complex64::ZERO])
}

/// `U = P₀(1)⊗I + P₀(2)⊗(|b⊥⟩⟨b| + |b⟩⟨b⊥|)`, ancilla `|b⟩⟨b|`, ancilla
/// measurement `{|b⟩⟨b|, |b⊥⟩⟨b⊥|}`.
pub fn indirect_realization_with_ancilla(p0: &[CMatrix; 2], b: [Complex64; 2]) -> Result<StatisticalRealization> {
    let d = check_projective_resolution(p0).map_err(Error::InvalidOperator)?;
    let norm = (b[0].norm_sqr() + b[1].norm_sqr()).sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::InvalidParameter("ancilla vector is zero".into()));
    }
    let b = [b[0] / norm, b[1] / norm];
    let b_vec = CMatrix::column(&b);
    let bp_vec = CMatrix::column(&[-b[1].conj(), b[0].conj()]);
    let flip = &CMatrix::outer(&bp_vec, &b_vec) + &CMatrix::outer(&b_vec, &bp_vec);
    let u = &p0[0].kron(&CMatrix::identity(2)) + &p0[1].kron(&flip);
    let pb = CMatrix::outer(&b_vec, &b_vec);
    let pbp = CMatrix::outer(&bp_vec, &bp_vec);
    debug_assert_eq!(u.nrows(), 2 * d);
    StatisticalRealization::new(DensityOperator::pure(&b)?, vec![pb, pbp], u)
}
