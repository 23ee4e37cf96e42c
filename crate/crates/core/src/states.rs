//! Density operators, qubit Bloch coordinates and discrimination ensembles.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, pauli, pauli_dot, CMatrix, MAX_DIM};

/// Bloch vector of a qubit state.
pub type Bloch = [f64; 3];

const STATE_TOL: f64 = 1e-10;
const PRIOR_TOL: f64 = 1e-12;

/// A positive, unit-trace Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator(CMatrix);

impl DensityOperator {
    /// Validates Hermiticity, positivity (smallest eigenvalue `≥ -1e-10`) and unit trace.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidState(format!(
                "{}x{} is not square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let d = matrix.nrows();
        if d > MAX_DIM {
            return Err(Error::DimensionError(format!("dimension {d} exceeds cap {MAX_DIM}")));
        }
        let eig = eig_hermitian(&matrix).map_err(|e| Error::InvalidState(e.to_string()))?;
        let min = eig.eigenvalues.last().copied().unwrap_or(0.0);
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        Ok(DensityOperator(matrix.hermitian_part()))
    }

    /// `|ψ><ψ|` for a (not necessarily normalized) nonzero vector.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let v = CMatrix::column(psi);
        let n = v.frobenius_norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v = v.scale(1.0 / n);
        Self::new(CMatrix::outer(&v, &v))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        DensityOperator(CMatrix::identity(d).scale(1.0 / d as f64))
    }

    /// Renormalizes a positive operator with nonzero trace. Used for posteriors,
    /// where the input is positive by construction.
    pub(crate) fn from_unnormalized(m: CMatrix, trace: f64) -> Self {
        DensityOperator(m.scale(1.0 / trace).hermitian_part())
    }

    pub(crate) fn from_trusted(m: CMatrix) -> Self {
        DensityOperator(m.hermitian_part())
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// `tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.0.trace_product(&self.0).re
    }
}

/// `(I + r·σ)/2`.
pub fn qubit_from_bloch(r: Bloch) -> Result<DensityOperator> {
    let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !norm.is_finite() || norm > 1.0 + 1e-12 {
        return Err(Error::InvalidBlochVector(norm));
    }
    let m = (&CMatrix::identity(2) + &pauli_dot(r)).scale(0.5);
    Ok(DensityOperator(m))
}

/// `r = tr{ρ σ}` for a qubit state.
pub fn bloch_from_qubit(rho: &DensityOperator) -> Result<Bloch> {
    bloch_of_matrix(rho.matrix())
}

/// Pauli coordinates `tr{T σ}` of any 2x2 operator (real parts).
pub fn bloch_of_matrix(t: &CMatrix) -> Result<Bloch> {
    if t.nrows() != 2 || t.ncols() != 2 {
        return Err(Error::DimensionError(format!(
            "Bloch coordinates need a qubit, got dimension {}",
            t.nrows()
        )));
    }
    let s = pauli();
    Ok([0, 1, 2].map(|k| t.trace_product(&s[k]).re))
}

/// States to be discriminated together with their prior probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    states: Vec<DensityOperator>,
    priors: Vec<f64>,
}

impl Ensemble {
    /// At least two states of equal dimension; priors strictly positive and summing to one.
    pub fn new(states: Vec<DensityOperator>, priors: Vec<f64>) -> Result<Self> {
        if states.len() < 2 {
            return Err(Error::InvalidEnsemble(format!("need r >= 2 states, got {}", states.len())));
        }
        if states.len() != priors.len() {
            return Err(Error::InvalidEnsemble(format!(
                "{} states but {} priors",
                states.len(),
                priors.len()
            )));
        }
        let d = states[0].dim();
        if states.iter().any(|s| s.dim() != d) {
            return Err(Error::DimensionError("ensemble states differ in dimension".into()));
        }
        if let Some(q) = priors.iter().find(|q| q.is_nan() || **q <= 0.0 || q.is_infinite()) {
            return Err(Error::InvalidEnsemble(format!("prior {q} is not strictly positive")));
        }
        let total: f64 = priors.iter().sum();
        if (total - 1.0).abs() > PRIOR_TOL {
            return Err(Error::InvalidEnsemble(format!("priors sum to {total}")));
        }
        Ok(Ensemble { states, priors })
    }

    /// Qubit ensemble from Bloch vectors.
    pub fn from_bloch(vectors: &[Bloch], priors: Vec<f64>) -> Result<Self> {
        let states = vectors.iter().map(|r| qubit_from_bloch(*r)).collect::<Result<_>>()?;
        Self::new(states, priors)
    }

    /// Two-state ensemble.
    pub fn pair(rho1: DensityOperator, rho2: DensityOperator, q1: f64) -> Result<Self> {
        Self::new(vec![rho1, rho2], vec![q1, 1.0 - q1])
    }

    pub fn states(&self) -> &[DensityOperator] {
        &self.states
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    /// Number of states `r`.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn max_prior(&self) -> f64 {
        self.priors.iter().copied().fold(f64::MIN, f64::max)
    }

    /// `q_i ρ_i − q_j ρ_j`.
    pub fn weighted_difference(&self, i: usize, j: usize) -> CMatrix {
        &self.states[i].matrix().scale(self.priors[i]) - &self.states[j].matrix().scale(self.priors[j])
    }

    /// Bloch vectors of a qubit ensemble.
    pub fn bloch_vectors(&self) -> Result<Vec<Bloch>> {
        self.states.iter().map(bloch_from_qubit).collect()
    }

    /// `Σ q_j ρ_j`.
    pub fn mixture(&self) -> DensityOperator {
        let m: CMatrix = self
            .states
            .iter()
            .zip(&self.priors)
            .map(|(s, q)| s.matrix().scale(*q))
            .sum();
        DensityOperator::from_trusted(m)
    }

    /// Applies `f` to every state, keeping the priors.
    pub fn map_states(&self, f: impl FnMut(&DensityOperator) -> DensityOperator) -> Ensemble {
        Ensemble { states: self.states.iter().map(f).collect(), priors: self.priors.clone() }
    }
}

/// `Σ q_j ρ_j`.
pub fn mixture(e: &Ensemble) -> DensityOperator {
    e.mixture()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, re};

    #[test]
    fn bloch_examples() {
        let mm = qubit_from_bloch([0.0; 3]).unwrap();
        assert!(mm.matrix().max_abs_diff(&CMatrix::identity(2).scale(0.5)) < 1e-15);
        let up = qubit_from_bloch([0.0, 0.0, 1.0]).unwrap();
        assert!(up.matrix().max_abs_diff(&CMatrix::from_real_diagonal(&[1.0, 0.0])) < 1e-15);
        let mixed = qubit_from_bloch([0.3, 0.3, 0.3]).unwrap();
        assert!((mixed.purity() - (1.0 + 0.27) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn bloch_round_trip() {
        let r = [0.2, 0.3, -0.4];
        let back = bloch_from_qubit(&qubit_from_bloch(r).unwrap()).unwrap();
        for k in 0..3 {
            assert!((back[k] - r[k]).abs() < 1e-12);
        }
        let h = 1.0 / 2f64.sqrt();
        let plus = DensityOperator::pure(&[re(h), re(h)]).unwrap();
        let b = bloch_from_qubit(&plus).unwrap();
        assert!((b[0] - 1.0).abs() < 1e-12 && b[1].abs() < 1e-12 && b[2].abs() < 1e-12);
        assert_eq!(bloch_from_qubit(&DensityOperator::maximally_mixed(2)).unwrap(), [0.0; 3]);
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(qubit_from_bloch([1.0, 1.0, 0.0]), Err(Error::InvalidBlochVector(_))));
        assert!(matches!(
            bloch_from_qubit(&DensityOperator::maximally_mixed(3)),
            Err(Error::DimensionError(_))
        ));
        let not_psd = CMatrix::from_real_diagonal(&[1.5, -0.5]);
        assert!(matches!(DensityOperator::new(not_psd), Err(Error::InvalidState(_))));
        let bad_trace = CMatrix::from_real_diagonal(&[0.5, 0.4]);
        assert!(DensityOperator::new(bad_trace).is_err());
        let nonherm = CMatrix::from_row_slice(2, 2, &[re(0.5), c(0.0, 0.1), c(0.0, 0.1), re(0.5)]).unwrap();
        assert!(DensityOperator::new(nonherm).is_err());
    }

    #[test]
    fn ensemble_validation() {
        let a = qubit_from_bloch([0.0, 0.0, 1.0]).unwrap();
        assert!(Ensemble::new(vec![a.clone()], vec![1.0]).is_err());
        assert!(Ensemble::new(vec![a.clone(), a.clone()], vec![1.0, 0.0]).is_err());
        assert!(Ensemble::new(vec![a.clone(), a.clone()], vec![0.6, 0.5]).is_err());
        let q3 = DensityOperator::maximally_mixed(3);
        assert!(matches!(Ensemble::new(vec![a, q3], vec![0.5, 0.5]), Err(Error::DimensionError(_))));
    }

    #[test]
    fn mixture_examples() {
        let rho = qubit_from_bloch([0.1, -0.2, 0.3]).unwrap();
        let e = Ensemble::new(vec![rho.clone(), rho.clone()], vec![0.5, 0.5]).unwrap();
        assert!(e.mixture().matrix().max_abs_diff(rho.matrix()) < 1e-15);

        let mirrored = Ensemble::from_bloch(&[[0.3, 0.3, 0.3], [0.3, 0.3, -0.3]], vec![0.5, 0.5]).unwrap();
        let avg = qubit_from_bloch([0.3, 0.3, 0.0]).unwrap();
        assert!(mirrored.mixture().matrix().max_abs_diff(avg.matrix()) < 1e-15);

        let orth = Ensemble::from_bloch(&[[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]], vec![0.5, 0.5]).unwrap();
        assert!(orth.mixture().matrix().max_abs_diff(&CMatrix::identity(2).scale(0.5)) < 1e-15);
    }
}
