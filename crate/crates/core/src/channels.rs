//! Trace-preserving channels in Kraus form.

use crate::error::{Error, Result};
use crate::linalg::{pauli, CMatrix, MAX_DIM};
use crate::states::DensityOperator;

/// CPTP map `Λ[T] = Σ_l K_l T K_l†`.
///
/// Channels act on arbitrary operators, not only states, so they can be
/// applied to Hermitian differences such as `q₁ρ₁ − q₂ρ₂`.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    dim: usize,
    kraus: Vec<CMatrix>,
}

impl Channel {
    /// Validates `Σ K†K = I` within `1e-10`.
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let dim = kraus
            .first()
            .map(CMatrix::nrows)
            .ok_or_else(|| Error::InvalidChannel("no Kraus operators".into()))?;
        if dim > MAX_DIM {
            return Err(Error::DimensionError(format!("dimension {dim} exceeds cap {MAX_DIM}")));
        }
        if kraus.iter().any(|k| k.nrows() != dim || k.ncols() != dim) {
            return Err(Error::DimensionError("Kraus operators differ in shape".into()));
        }
        let total: CMatrix = kraus.iter().map(|k| &k.adjoint() * k).sum();
        let dev = total.max_abs_diff(&CMatrix::identity(dim));
        if dev > 1e-10 {
            return Err(Error::InvalidChannel(format!("not trace preserving (deviation {dev:e})")));
        }
        Ok(Channel { dim, kraus })
    }

    pub fn identity(dim: usize) -> Self {
        Channel { dim, kraus: vec![CMatrix::identity(dim)] }
    }

    /// Qubit depolarizing channel `Λ[T] = (1−γ)T + γ tr{T} I/2`, realized by
    /// `{√(1−3γ/4) I, (√γ/2) σx, (√γ/2) σy, (√γ/2) σz}`.
    pub fn depolarizing(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidParameter(format!("depolarizing strength {gamma} outside [0, 1]")));
        }
        let [x, y, z] = pauli();
        let a = gamma.sqrt() / 2.0;
        Ok(Channel {
            dim: 2,
            kraus: vec![
                CMatrix::identity(2).scale((1.0 - 0.75 * gamma).sqrt()),
                x.scale(a),
                y.scale(a),
                z.scale(a),
            ],
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// `Λ[T]`. Panics if `t` is not `dim × dim`; see [`Channel::try_apply`].
    pub fn apply(&self, t: &CMatrix) -> CMatrix {
        self.kraus.iter().map(|k| t.conjugate_by(k)).sum()
    }

    pub fn try_apply(&self, t: &CMatrix) -> Result<CMatrix> {
        if t.nrows() != self.dim || t.ncols() != self.dim {
            return Err(Error::DimensionError(format!(
                "operator is {}x{}, channel acts on dimension {}",
                t.nrows(),
                t.ncols(),
                self.dim
            )));
        }
        Ok(self.apply(t))
    }

    pub fn apply_state(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        Ok(DensityOperator::from_trusted(self.try_apply(rho.matrix())?))
    }
}

pub fn depolarizing(gamma: f64) -> Result<Channel> {
    Channel::depolarizing(gamma)
}

pub fn apply_channel(c: &Channel, rho: &DensityOperator) -> Result<DensityOperator> {
    c.apply_state(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{bloch_from_qubit, bloch_of_matrix, qubit_from_bloch};

    fn direct_depolarizing(gamma: f64, t: &CMatrix) -> CMatrix {
        &t.scale(1.0 - gamma) + &CMatrix::identity(2).scale_c(t.trace() * gamma / 2.0)
    }

    #[test]
    fn zero_strength_is_identity() {
        let ch = depolarizing(0.0).unwrap();
        let rho = qubit_from_bloch([0.3, -0.2, 0.5]).unwrap();
        assert!(apply_channel(&ch, &rho).unwrap().matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn full_strength_gives_maximally_mixed() {
        let ch = depolarizing(1.0).unwrap();
        let rho = qubit_from_bloch([0.0, 0.6, 0.8]).unwrap();
        let out = apply_channel(&ch, &rho).unwrap();
        assert!(out.matrix().max_abs_diff(&CMatrix::identity(2).scale(0.5)) < 1e-15);
    }

    #[test]
    fn bloch_contraction() {
        let ch = depolarizing(0.4).unwrap();
        let out = apply_channel(&ch, &qubit_from_bloch([0.0, 0.0, 1.0]).unwrap()).unwrap();
        let b = bloch_from_qubit(&out).unwrap();
        assert!(b[0].abs() < 1e-15 && b[1].abs() < 1e-15 && (b[2] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn matches_convex_combination_formula() {
        for &g in &[0.0, 0.13, 0.5, 0.92, 1.0] {
            let ch = depolarizing(g).unwrap();
            let rho = qubit_from_bloch([0.1, 0.7, -0.4]).unwrap();
            let lhs = ch.apply(rho.matrix());
            assert!(lhs.max_abs_diff(&direct_depolarizing(g, rho.matrix())) < 1e-12);
        }
    }

    #[test]
    fn acts_linearly_on_differences() {
        let g = 0.35;
        let ch = depolarizing(g).unwrap();
        let (r1, r2) = ([0.3, 0.3, 0.3], [0.3, 0.3, -0.3]);
        let diff = &qubit_from_bloch(r1).unwrap().matrix().scale(0.55)
            - &qubit_from_bloch(r2).unwrap().matrix().scale(0.45);
        let out = ch.apply(&diff);
        let b = bloch_of_matrix(&out).unwrap();
        for k in 0..3 {
            let expect = (1.0 - g) * (0.55 * r1[k] - 0.45 * r2[k]);
            assert!((b[k] - expect).abs() < 1e-14);
        }
        // trace is preserved on traceful operators too
        assert!((out.trace() - diff.trace()).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(depolarizing(1.5), Err(Error::InvalidParameter(_))));
        assert!(matches!(depolarizing(-0.1), Err(Error::InvalidParameter(_))));
        assert!(matches!(Channel::new(vec![CMatrix::identity(2).scale(0.9)]), Err(Error::InvalidChannel(_))));
        let ch = Channel::identity(2);
        assert!(matches!(ch.try_apply(&CMatrix::identity(3)), Err(Error::DimensionError(_))));
    }
}
