//! Quantum instruments in Kraus form.
//!
//! Outcomes are indexed from zero: outcome `j` of an `r`-outcome instrument
//! is the decision "the state was ρ_{j+1}".

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, partial_trace_second, CMatrix, MAX_DIM};
use crate::states::DensityOperator;

/// Outcomes with probability at or below this value have no posterior state.
pub const PROB_FLOOR: f64 = 1e-12;

const COMPLETENESS_TOL: f64 = 1e-10;

/// Checks that `projs` are square projectors of a common dimension, pairwise
/// orthogonal and summing to the identity. Returns a description of the first
/// violation.
pub(crate) fn check_projective_resolution(projs: &[CMatrix]) -> std::result::Result<usize, String> {
    let Some(first) = projs.first() else {
        return Err("empty projector list".into());
    };
    let d = first.nrows();
    for (k, p) in projs.iter().enumerate() {
        if p.nrows() != d || p.ncols() != d {
            return Err(format!("projector {k} is {}x{}, expected {d}x{d}", p.nrows(), p.ncols()));
        }
        if !p.is_projector() {
            return Err(format!("element {k} is not an orthogonal projector"));
        }
    }
    for i in 0..projs.len() {
        for j in (i + 1)..projs.len() {
            let overlap = (&projs[i] * &projs[j]).max_abs_diff(&CMatrix::zeros(d, d));
            if overlap > 1e-10 {
                return Err(format!("projectors {i} and {j} overlap ({overlap:e})"));
            }
        }
    }
    let total: CMatrix = projs.iter().cloned().sum();
    let dev = total.max_abs_diff(&CMatrix::identity(d));
    if dev > 1e-10 {
        return Err(format!("projectors sum to identity only within {dev:e}"));
    }
    Ok(d)
}

fn operator_norm(k: &CMatrix) -> f64 {
    eig_hermitian(&(&k.adjoint() * k))
        .map(|e| e.eigenvalues[0].max(0.0).sqrt())
        .unwrap_or(f64::INFINITY)
}

/// A finite-outcome quantum instrument `M(ω)[T] = Σ_l K_l(ω) T K_l(ω)†`.
#[derive(Clone, Debug, PartialEq)]
pub struct Instrument {
    dim: usize,
    kraus: Vec<Vec<CMatrix>>,
}

impl Instrument {
    /// Validates shapes, the operator-norm bound `‖K‖ ≤ 1` and completeness
    /// `Σ_{ω,l} K†K = I`, each within `1e-10`.
    pub fn new(kraus: Vec<Vec<CMatrix>>) -> Result<Self> {
        let dim = kraus
            .first()
            .and_then(|ks| ks.first())
            .map(CMatrix::nrows)
            .ok_or_else(|| Error::InvalidInstrument("no outcomes".into()))?;
        if dim > MAX_DIM {
            return Err(Error::DimensionError(format!("dimension {dim} exceeds cap {MAX_DIM}")));
        }
        let mut total = CMatrix::zeros(dim, dim);
        for (w, ks) in kraus.iter().enumerate() {
            if ks.is_empty() {
                return Err(Error::InvalidInstrument(format!("outcome {w} has no Kraus operators")));
            }
            for k in ks {
                if k.nrows() != dim || k.ncols() != dim {
                    return Err(Error::DimensionError(format!(
                        "Kraus operator of outcome {w} is {}x{}, expected {dim}x{dim}",
                        k.nrows(),
                        k.ncols()
                    )));
                }
                let n = operator_norm(k);
                if n > 1.0 + COMPLETENESS_TOL {
                    return Err(Error::InvalidInstrument(format!(
                        "Kraus operator of outcome {w} has norm {n}"
                    )));
                }
                total = &total + &(&k.adjoint() * k);
            }
        }
        let dev = total.max_abs_diff(&CMatrix::identity(dim));
        if dev > COMPLETENESS_TOL {
            return Err(Error::InvalidInstrument(format!("completeness violated by {dev:e}")));
        }
        Ok(Instrument { dim, kraus })
    }

    /// Pure instrument with a single Kraus operator per outcome.
    pub fn pure(kraus: Vec<CMatrix>) -> Result<Self> {
        Self::new(kraus.into_iter().map(|k| vec![k]).collect())
    }

    /// Lüders instrument `M(j)[·] = P(j)·P(j)` of a projective resolution of the identity.
    pub fn luders(projs: &[CMatrix]) -> Result<Self> {
        check_projective_resolution(projs).map_err(Error::IncompleteProjectors)?;
        Self::pure(projs.to_vec())
    }

    pub(crate) fn from_trusted(kraus: Vec<Vec<CMatrix>>) -> Self {
        let dim = kraus[0][0].nrows();
        Instrument { dim, kraus }
    }

    /// Single-outcome instrument that leaves every state untouched.
    pub fn identity(dim: usize) -> Self {
        Instrument { dim, kraus: vec![vec![CMatrix::identity(dim)]] }
    }

    /// Instrument with `outcomes` outcomes that always reports `outcome` and
    /// leaves the state untouched.
    pub fn trivial(dim: usize, outcomes: usize, outcome: usize) -> Self {
        assert!(outcome < outcomes, "trivial outcome out of range");
        let kraus = (0..outcomes)
            .map(|w| {
                if w == outcome {
                    vec![CMatrix::identity(dim)]
                } else {
                    vec![CMatrix::zeros(dim, dim)]
                }
            })
            .collect();
        Instrument { dim, kraus }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcome_count(&self) -> usize {
        self.kraus.len()
    }

    pub fn kraus(&self, outcome: usize) -> &[CMatrix] {
        &self.kraus[outcome]
    }

    pub fn kraus_families(&self) -> &[Vec<CMatrix>] {
        &self.kraus
    }

    fn check_outcome(&self, outcome: usize) -> Result<()> {
        if outcome >= self.kraus.len() {
            return Err(Error::DimensionError(format!(
                "outcome {outcome} out of range for {} outcomes",
                self.kraus.len()
            )));
        }
        Ok(())
    }

    fn check_operand(&self, t: &CMatrix) -> Result<()> {
        if t.nrows() != self.dim || t.ncols() != self.dim {
            return Err(Error::DimensionError(format!(
                "operator is {}x{}, instrument acts on dimension {}",
                t.nrows(),
                t.ncols(),
                self.dim
            )));
        }
        Ok(())
    }

    /// Unnormalized `M(ω)[T]`. Panics on shape mismatch; see [`Instrument::try_apply`].
    pub fn apply(&self, outcome: usize, t: &CMatrix) -> CMatrix {
        self.kraus[outcome].iter().map(|k| t.conjugate_by(k)).sum()
    }

    pub fn try_apply(&self, outcome: usize, t: &CMatrix) -> Result<CMatrix> {
        self.check_outcome(outcome)?;
        self.check_operand(t)?;
        Ok(self.apply(outcome, t))
    }

    /// Heisenberg-picture map `N(ω)[Y] = Σ K† Y K`.
    pub fn dual_apply(&self, outcome: usize, y: &CMatrix) -> CMatrix {
        self.kraus[outcome].iter().map(|k| &(&k.adjoint() * y) * k).sum()
    }

    /// POVM element `M(ω) = Σ_l K_l†(ω) K_l(ω)`.
    pub fn povm_element(&self, outcome: usize) -> CMatrix {
        self.kraus[outcome].iter().map(|k| &k.adjoint() * k).sum::<CMatrix>().hermitian_part()
    }

    pub fn povm(&self) -> Povm {
        Povm {
            dim: self.dim,
            elements: (0..self.outcome_count()).map(|w| self.povm_element(w)).collect(),
        }
    }

    /// `μ(ω|ρ) = Σ_l tr{ρ K_l† K_l}`.
    pub fn outcome_probability(&self, outcome: usize, rho: &DensityOperator) -> Result<f64> {
        self.check_outcome(outcome)?;
        self.check_operand(rho.matrix())?;
        Ok(self.probability_unchecked(outcome, rho.matrix()))
    }

    /// `tr{M(ω)[T]}` for any operator of matching shape.
    pub(crate) fn probability_unchecked(&self, outcome: usize, t: &CMatrix) -> f64 {
        self.kraus[outcome]
            .iter()
            .map(|k| t.trace_product(&(&k.adjoint() * k)).re)
            .sum()
    }

    /// Conditional posterior `M(ω)[ρ] / μ(ω|ρ)`.
    pub fn posterior(&self, outcome: usize, rho: &DensityOperator) -> Result<DensityOperator> {
        let p = self.outcome_probability(outcome, rho)?;
        if p <= PROB_FLOOR {
            return Err(Error::ZeroProbabilityOutcome { outcome, probability: p });
        }
        Ok(DensityOperator::from_unnormalized(self.apply(outcome, rho.matrix()), p))
    }
}

/// Positive operator-valued measure with finitely many outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    dim: usize,
    elements: Vec<CMatrix>,
}

impl Povm {
    /// Each element positive semidefinite and the elements summing to the identity, within `1e-10`.
    pub fn new(elements: Vec<CMatrix>) -> Result<Self> {
        let dim = elements
            .first()
            .map(CMatrix::nrows)
            .ok_or_else(|| Error::InvalidInstrument("empty POVM".into()))?;
        for (w, m) in elements.iter().enumerate() {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionError(format!("POVM element {w} has the wrong shape")));
            }
            let eig = eig_hermitian(m)?;
            if eig.eigenvalues[dim - 1] < -1e-10 {
                return Err(Error::InvalidInstrument(format!("POVM element {w} is not positive")));
            }
        }
        let total: CMatrix = elements.iter().cloned().sum();
        if total.max_abs_diff(&CMatrix::identity(dim)) > 1e-10 {
            return Err(Error::InvalidInstrument("POVM does not sum to the identity".into()));
        }
        Ok(Povm { dim, elements })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn probability(&self, outcome: usize, rho: &DensityOperator) -> f64 {
        rho.matrix().trace_product(&self.elements[outcome]).re
    }
}

pub fn povm_of(m: &Instrument) -> Povm {
    m.povm()
}

pub fn outcome_probability(m: &Instrument, outcome: usize, rho: &DensityOperator) -> Result<f64> {
    m.outcome_probability(outcome, rho)
}

pub fn posterior(m: &Instrument, outcome: usize, rho: &DensityOperator) -> Result<DensityOperator> {
    m.posterior(outcome, rho)
}

pub fn luders_from_projectors(projs: &[CMatrix]) -> Result<Instrument> {
    Instrument::luders(projs)
}

/// Consecutive measurement by a chain of instruments, evaluated lazily per
/// outcome tuple. Stage `k` of the chain acts after stages `0..k`.
#[derive(Clone, Debug)]
pub struct SequentialInstrument {
    stages: Vec<Instrument>,
}

/// Composes instruments in receiver order; all must share dimension and outcome count.
pub fn compose_sequential(ms: Vec<Instrument>) -> Result<SequentialInstrument> {
    let Some(first) = ms.first() else {
        return Err(Error::InvalidInstrument("empty chain".into()));
    };
    let (d, r) = (first.dim(), first.outcome_count());
    if ms.iter().any(|m| m.dim() != d) {
        return Err(Error::DimensionError("instruments in the chain differ in dimension".into()));
    }
    if ms.iter().any(|m| m.outcome_count() != r) {
        return Err(Error::DimensionError("instruments in the chain differ in outcome count".into()));
    }
    Ok(SequentialInstrument { stages: ms })
}

impl SequentialInstrument {
    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn stages(&self) -> &[Instrument] {
        &self.stages
    }

    pub fn dim(&self) -> usize {
        self.stages[0].dim()
    }

    pub fn outcome_count(&self) -> usize {
        self.stages[0].outcome_count()
    }

    /// `M_k(j_k)[ ... M_1(j_1)[T] ... ]`.
    pub fn apply(&self, tuple: &[usize], t: &CMatrix) -> Result<CMatrix> {
        if tuple.len() != self.stages.len() {
            return Err(Error::DimensionError(format!(
                "tuple of length {} for a chain of {} instruments",
                tuple.len(),
                self.stages.len()
            )));
        }
        let mut acc = t.clone();
        for (m, &j) in self.stages.iter().zip(tuple) {
            acc = m.try_apply(j, &acc)?;
        }
        Ok(acc)
    }

    pub fn probability(&self, tuple: &[usize], rho: &DensityOperator) -> Result<f64> {
        Ok(self.apply(tuple, rho.matrix())?.trace().re)
    }

    /// All `r^k` outcome tuples in lexicographic order.
    pub fn tuples(&self) -> Vec<Vec<usize>> {
        let r = self.outcome_count();
        let k = self.len();
        let total = r.pow(k as u32);
        (0..total)
            .map(|mut idx| {
                let mut t = vec![0; k];
                for slot in t.iter_mut().rev() {
                    *slot = idx % r;
                    idx /= r;
                }
                t
            })
            .collect()
    }

    /// Probabilities of every outcome tuple, in the order of [`SequentialInstrument::tuples`].
    pub fn probabilities(&self, rho: &DensityOperator) -> Result<Vec<f64>> {
        self.tuples().par_iter().map(|t| self.probability(t, rho)).collect()
    }
}

/// Indirect measurement `{H̃, σ, P, U}`: the system interacts with an ancilla
/// prepared in `σ` through `U` on `H ⊗ H̃`, then the ancilla is measured with `P`.
#[derive(Clone, Debug)]
pub struct StatisticalRealization {
    ancilla_state: DensityOperator,
    projections: Vec<CMatrix>,
    unitary: CMatrix,
}

impl StatisticalRealization {
    pub fn new(ancilla_state: DensityOperator, projections: Vec<CMatrix>, unitary: CMatrix) -> Result<Self> {
        let a = ancilla_state.dim();
        if !unitary.is_square() || !unitary.nrows().is_multiple_of(a) {
            return Err(Error::InvalidRealization(format!(
                "unitary of size {}x{} does not act on H ⊗ C^{a}",
                unitary.nrows(),
                unitary.ncols()
            )));
        }
        if !unitary.is_unitary() {
            return Err(Error::InvalidRealization("coupling is not unitary".into()));
        }
        let pd = check_projective_resolution(&projections).map_err(Error::InvalidRealization)?;
        if pd != a {
            return Err(Error::InvalidRealization(format!(
                "ancilla projections act on dimension {pd}, ancilla state on {a}"
            )));
        }
        Ok(StatisticalRealization { ancilla_state, projections, unitary })
    }

    pub fn ancilla_dim(&self) -> usize {
        self.ancilla_state.dim()
    }

    pub fn system_dim(&self) -> usize {
        self.unitary.nrows() / self.ancilla_dim()
    }

    pub fn ancilla_state(&self) -> &DensityOperator {
        &self.ancilla_state
    }

    pub fn projections(&self) -> &[CMatrix] {
        &self.projections
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    pub fn outcome_count(&self) -> usize {
        self.projections.len()
    }

    /// `tr_H̃{(I⊗P(ω)) U (T⊗σ) U† (I⊗P(ω))}` evaluated literally.
    pub fn apply(&self, outcome: usize, t: &CMatrix) -> Result<CMatrix> {
        let d = self.system_dim();
        if t.nrows() != d || t.ncols() != d {
            return Err(Error::DimensionError(format!("operator is not {d}x{d}")));
        }
        if outcome >= self.projections.len() {
            return Err(Error::DimensionError(format!("outcome {outcome} out of range")));
        }
        let joint = t.kron(self.ancilla_state.matrix()).conjugate_by(&self.unitary);
        let meas = CMatrix::identity(d).kron(&self.projections[outcome]);
        partial_trace_second(&joint.conjugate_by(&meas), self.ancilla_dim())
    }

    /// Block `(I⊗⟨f|) U (I⊗|e⟩)` for ancilla vectors `f`, `e`.
    fn ancilla_block(&self, f: &CMatrix, e: &CMatrix) -> CMatrix {
        let id = CMatrix::identity(self.system_dim());
        &(&id.kron(&f.adjoint()) * &self.unitary) * &id.kron(e)
    }
}

/// Kraus form of the instrument realized by `xi`.
///
/// Kraus operators are `√s_k (I⊗⟨f_m|) U (I⊗|e_k⟩)` over the eigenvectors
/// `e_k` of `σ` and an orthonormal basis `f_m` of each `P(ω)`; the result is
/// checked against the literal partial-trace evaluation on all matrix units.
pub fn instrument_from_realization(xi: &StatisticalRealization) -> Result<Instrument> {
    let d = xi.system_dim();
    let sigma = eig_hermitian(xi.ancilla_state.matrix())?;
    let cutoff = sigma.zero_cutoff();
    let mut kraus = Vec::with_capacity(xi.outcome_count());
    for p in &xi.projections {
        let pe = eig_hermitian(p)?;
        let mut ks = Vec::new();
        for (m, &pl) in pe.eigenvalues.iter().enumerate() {
            if pl < 0.5 {
                continue;
            }
            let f = pe.eigenvectors.column_at(m);
            for (k, &s) in sigma.eigenvalues.iter().enumerate() {
                if s > cutoff {
                    let e = sigma.eigenvectors.column_at(k);
                    ks.push(xi.ancilla_block(&f, &e).scale(s.sqrt()));
                }
            }
        }
        if ks.is_empty() {
            ks.push(CMatrix::zeros(d, d));
        }
        kraus.push(ks);
    }
    let inst = Instrument::new(kraus).map_err(|e| Error::InvalidRealization(e.to_string()))?;

    for a in 0..d {
        for b in 0..d {
            let mut unit = CMatrix::zeros(d, d);
            unit.set(a, b, Complex64::ONE);
            for w in 0..xi.outcome_count() {
                let dev = inst.apply(w, &unit).max_abs_diff(&xi.apply(w, &unit)?);
                if dev > 1e-10 {
                    return Err(Error::InvalidRealization(format!(
                        "Kraus form deviates from the dilation by {dev:e}"
                    )));
                }
            }
        }
    }
    Ok(inst)
}

/// `K(ω) = ⟨ξ_ω| U |b⟩` for a realization with pure `σ = |b⟩⟨b|` and rank-one `P(ω) = |ξ_ω⟩⟨ξ_ω|`.
pub fn kraus_from_dilation(xi: &StatisticalRealization) -> Result<Vec<CMatrix>> {
    let sigma = eig_hermitian(xi.ancilla_state.matrix())?;
    if (sigma.eigenvalues[0] - 1.0).abs() > 1e-10 {
        return Err(Error::NotPureDilation(format!(
            "ancilla state has largest eigenvalue {}",
            sigma.eigenvalues[0]
        )));
    }
    let b = sigma.eigenvectors.column_at(0);
    xi.projections
        .iter()
        .enumerate()
        .map(|(w, p)| {
            let rank = p.trace().re;
            if (rank - 1.0).abs() > 1e-10 {
                return Err(Error::NotPureDilation(format!("projection {w} has rank {rank:.3}")));
            }
            let pe = eig_hermitian(p)?;
            Ok(xi.ancilla_block(&pe.eigenvectors.column_at(0), &b))
        })
        .collect()
}
