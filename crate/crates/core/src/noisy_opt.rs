//! Discrimination through noisy channels.
//!
//! General part: success probability of a noisy chain, the single-stage
//! bound on `Λ₁`-transmitted states, and the two-receiver bound expression
//! for a given first receiver.
//!
//! Qubit part: two states sent through depolarizing channels `Λ₁` (sender to
//! receiver 1) and `Λ₂` (receiver 1 to receiver 2). The optimum over first
//! receivers is attained on extreme instruments (spin measurements along a
//! unit direction, or trivial instruments that always answer `j`) and has the
//! closed form
//!
//! ```text
//! max{ (1 − γ₂/2)(½ + ½(1 − γ₁)‖q₁r₁ − q₂r₂‖), max{q₁, q₂} }.
//! ```
//!
//! [`two_seq_depolarizing_closed`] evaluates it; [`two_seq_depolarizing_numeric`]
//! maximizes the bound expression over a sphere grid of spin instruments by
//! explicit matrix evaluation.

use rayon::prelude::*;

use crate::channels::Channel;
use crate::discrimination::{success_chain, success_direct, success_product, Protocol};
use crate::error::{Error, Result};
use crate::instruments::Instrument;
use crate::linalg::{pauli_dot, trace_norm, CMatrix};
use crate::states::{Bloch, Ensemble};

/// Tolerance of the regime test between the spin and trivial branches.
pub const REGIME_TOL: f64 = 1e-12;

/// Default number of Fibonacci-sphere directions for the numeric maximizer.
pub const DEFAULT_GRID: usize = 2048;

/// Success probability of a protocol with channels, by nested evaluation.
pub fn noisy_success(p: &Protocol, e: &Ensemble) -> Result<f64> {
    if p.channels().is_none() {
        return Err(Error::InvalidParameter("protocol has no channels".into()));
    }
    success_direct(p, e)
}

/// The three evaluations of a (noisy or noiseless) protocol's success probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Representations {
    pub direct: f64,
    pub chain: f64,
    pub product: f64,
}

impl Representations {
    pub fn evaluate(p: &Protocol, e: &Ensemble) -> Result<Self> {
        Ok(Representations {
            direct: success_direct(p, e)?,
            chain: success_chain(p, e)?,
            product: success_product(p, e)?.success_probability,
        })
    }

    pub fn max_deviation(&self) -> f64 {
        let [a, b, c] = [self.direct, self.chain, self.product];
        (a - b).abs().max((a - c).abs()).max((b - c).abs())
    }
}

/// `(1/r)(1 + Σ_{i<j} ‖Λ₁[q_iρ_i − q_jρ_j]‖₁)`, an upper bound for any chain whose first channel is `Λ₁`.
pub fn noisy_multi_state_upper_bound(e: &Ensemble, first: &Channel) -> Result<f64> {
    let r = e.len();
    let mut sum = 0.0;
    for i in 0..r {
        for j in (i + 1)..r {
            sum += trace_norm(&first.try_apply(&e.weighted_difference(i, j))?)?;
        }
    }
    Ok((1.0 + sum) / r as f64)
}

/// Two-receiver bound expression for a fixed first receiver, with the
/// channel-transmitted states precomputed.
struct TwoStageObjective<'a> {
    priors: &'a [f64],
    arriving: Vec<CMatrix>,
    second: &'a Channel,
}

impl<'a> TwoStageObjective<'a> {
    fn new(e: &'a Ensemble, first: &Channel, second: &'a Channel) -> Result<Self> {
        if first.dim() != e.dim() || second.dim() != e.dim() {
            return Err(Error::DimensionError("channel and ensemble dimensions differ".into()));
        }
        let arriving = e.states().iter().map(|s| first.apply(s.matrix())).collect();
        Ok(TwoStageObjective { priors: e.priors(), arriving, second })
    }

    fn check(&self, m1: &Instrument) -> Result<()> {
        if m1.outcome_count() != self.priors.len() {
            return Err(Error::WrongArity { expected: self.priors.len(), got: m1.outcome_count() });
        }
        if m1.dim() != self.arriving[0].nrows() {
            return Err(Error::DimensionError("instrument dimension differs from ensemble".into()));
        }
        Ok(())
    }

    fn first_stage_success(&self, m1: &Instrument) -> f64 {
        self.priors
            .iter()
            .zip(&self.arriving)
            .enumerate()
            .map(|(j, (q, s))| q * m1.probability_unchecked(j, s))
            .sum()
    }

    fn posterior_trace_norms(&self, m1: &Instrument) -> Result<f64> {
        let r = self.priors.len();
        let weighted: Vec<CMatrix> =
            (0..r).map(|j| m1.apply(j, &self.arriving[j]).scale(self.priors[j])).collect();
        let mut sum = 0.0;
        for i in 0..r {
            for j in (i + 1)..r {
                sum += trace_norm(&self.second.apply(&(&weighted[i] - &weighted[j])))?;
            }
        }
        Ok(sum)
    }

    fn value(&self, m1: &Instrument) -> Result<f64> {
        let r = self.priors.len() as f64;
        Ok((self.first_stage_success(m1) + self.posterior_trace_norms(m1)?) / r)
    }
}

/// Success probability of the first receiver on `Λ₁`-transmitted states.
pub fn first_stage_success(e: &Ensemble, first: &Channel, m1: &Instrument) -> Result<f64> {
    let obj = TwoStageObjective::new(e, first, first)?;
    obj.check(m1)?;
    Ok(obj.first_stage_success(m1))
}

/// `Σ_{i<j} ‖Λ₂[q_i M₁(i)[Λ₁ρ_i] − q_j M₁(j)[Λ₁ρ_j]]‖₁`, which never exceeds
/// `(r − 1)` times the first-stage success.
pub fn posterior_trace_norm_sum(e: &Ensemble, first: &Channel, second: &Channel, m1: &Instrument) -> Result<f64> {
    let obj = TwoStageObjective::new(e, first, second)?;
    obj.check(m1)?;
    obj.posterior_trace_norms(m1)
}

/// `(1/r)(P₁ + Σ_{i<j} ‖Λ₂[q_i M₁(i)[Λ₁ρ_i] − q_j M₁(j)[Λ₁ρ_j]]‖₁)` for the
/// first receiver `m1`. Its maximum over `m1` bounds every two-receiver
/// protocol and, for two states, equals the optimum.
pub fn noisy_two_seq_upper_bound(e: &Ensemble, first: &Channel, second: &Channel, m1: &Instrument) -> Result<f64> {
    let obj = TwoStageObjective::new(e, first, second)?;
    obj.check(m1)?;
    obj.value(m1)
}

/// Sign of a spin measurement: `Plus` answers outcome 1 on the `+1` eigenspace of `n·σ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Extreme points of the two-outcome qubit instrument set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtremeInstrument {
    /// Lüders measurement `{E^±(n), E^∓(n)}` with `E^±(n) = (I ± n·σ)/2`.
    Spin { n: Bloch, sign: Sign },
    /// Always reports `outcome` and leaves the state untouched.
    Trivial { outcome: usize },
}

impl ExtremeInstrument {
    pub fn spin(n: Bloch, sign: Sign) -> Result<Self> {
        let norm = n.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("spin direction has norm {norm}")));
        }
        Ok(ExtremeInstrument::Spin { n, sign })
    }

    pub fn to_instrument(&self) -> Instrument {
        match *self {
            ExtremeInstrument::Spin { n, sign } => {
                let s = match sign {
                    Sign::Plus => 1.0,
                    Sign::Minus => -1.0,
                };
                let half_spin = pauli_dot(n).scale(0.5 * s);
                let half_id = CMatrix::identity(2).scale(0.5);
                Instrument::from_trusted(vec![vec![&half_id + &half_spin], vec![&half_id - &half_spin]])
            }
            ExtremeInstrument::Trivial { outcome } => Instrument::trivial(2, 2, outcome),
        }
    }
}

/// Which branch of the closed form is active.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// The optimal spin measurement followed by an optimal second receiver.
    HelstromLike,
    /// Guessing the likelier state is at least as good.
    Trivial,
}

/// Optimum of the two-receiver depolarizing problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoisyOptimum {
    pub value: f64,
    pub maximizer: ExtremeInstrument,
    pub regime: Regime,
    /// For fixed `γ₁`, the spin branch satisfies its own consistency
    /// condition exactly when `γ₂ ≤ gamma2_upper`.
    pub gamma2_upper: f64,
    /// For fixed `γ₁`, the spin branch beats guessing exactly when `γ₂ ≤ gamma2_lower`.
    pub gamma2_lower: f64,
}

struct QubitPair {
    r: [Bloch; 2],
    q: [f64; 2],
}

impl QubitPair {
    fn from_ensemble(e: &Ensemble) -> Result<Self> {
        if e.len() != 2 {
            return Err(Error::WrongArity { expected: 2, got: e.len() });
        }
        if e.dim() != 2 {
            return Err(Error::DimensionError(format!("qubit states required, got dimension {}", e.dim())));
        }
        let r = e.bloch_vectors()?;
        Ok(QubitPair { r: [r[0], r[1]], q: [e.priors()[0], e.priors()[1]] })
    }

    /// `q₁r₁ − q₂r₂`.
    fn difference(&self) -> Bloch {
        [0, 1, 2].map(|k| self.q[0] * self.r[0][k] - self.q[1] * self.r[1][k])
    }

    fn max_prior(&self) -> f64 {
        self.q[0].max(self.q[1])
    }

    fn likelier(&self) -> usize {
        if self.q[1] > self.q[0] {
            1
        } else {
            0
        }
    }
}

fn norm3(v: Bloch) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot3(a: Bloch, b: Bloch) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn check_gamma(name: &str, g: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&g) {
        return Err(Error::InvalidParameter(format!("{name} = {g} outside [0, 1]")));
    }
    Ok(())
}

/// Unit direction of `q₁r₁ − q₂r₂`, or `(0, 0, 1)` when the difference vanishes.
pub fn optimal_direction(e: &Ensemble) -> Result<Bloch> {
    let pair = QubitPair::from_ensemble(e)?;
    Ok(direction_of(pair.difference()))
}

fn direction_of(v: Bloch) -> Bloch {
    let n = norm3(v);
    if n == 0.0 {
        [0.0, 0.0, 1.0]
    } else {
        v.map(|x| x / n)
    }
}

/// Optimal single-receiver success through a depolarizing channel:
/// `max{½ + ½(1 − γ₁)‖q₁r₁ − q₂r₂‖, max{q₁, q₂}}`.
pub fn one_receiver_depolarizing_optimum(e: &Ensemble, gamma1: f64) -> Result<f64> {
    check_gamma("gamma1", gamma1)?;
    let pair = QubitPair::from_ensemble(e)?;
    let shrunk = 0.5 + 0.5 * (1.0 - gamma1) * norm3(pair.difference());
    Ok(shrunk.max(pair.max_prior()))
}

/// Closed-form optimum of two receivers behind depolarizing channels.
pub fn two_seq_depolarizing_closed(e: &Ensemble, gamma1: f64, gamma2: f64) -> Result<NoisyOptimum> {
    check_gamma("gamma1", gamma1)?;
    check_gamma("gamma2", gamma2)?;
    let pair = QubitPair::from_ensemble(e)?;
    let diff = pair.difference();
    let n_plus = direction_of(diff);
    let shrink = 1.0 - gamma1;

    let first_success = 0.5 + 0.5 * shrink * norm3(diff);
    let spin_branch = (1.0 - gamma2 / 2.0) * first_success;
    let max_q = pair.max_prior();

    // joint probabilities of a correct first answer on each state along n₊
    let a = pair.q[0] * (0.5 + 0.5 * shrink * dot3(pair.r[0], n_plus));
    let b = pair.q[1] * (0.5 - 0.5 * shrink * dot3(pair.r[1], n_plus));
    let gamma2_upper = 2.0 * (1.0 - a.max(b) / first_success);
    let gamma2_lower = 2.0 * (1.0 - max_q / first_success);

    let (value, maximizer, regime) = if spin_branch > max_q + REGIME_TOL {
        (spin_branch, ExtremeInstrument::Spin { n: n_plus, sign: Sign::Plus }, Regime::HelstromLike)
    } else {
        (max_q, ExtremeInstrument::Trivial { outcome: pair.likelier() }, Regime::Trivial)
    };
    Ok(NoisyOptimum { value, maximizer, regime, gamma2_upper, gamma2_lower })
}

/// Candidate set of the numeric maximizer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Candidates {
    /// Trivial instruments and spin instruments on the sphere grid only.
    GridOnly,
    /// Additionally the spin instruments along `±n₊`.
    WithAnalytic,
}

/// `n` quasi-uniform unit vectors on a Fibonacci spiral.
pub fn fibonacci_sphere(n: usize) -> Vec<Bloch> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            [rho * phi.cos(), rho * phi.sin(), z]
        })
        .collect()
}

/// Maximizes the two-receiver bound expression over extreme first receivers
/// by explicit matrix evaluation: both trivial instruments, both signs of a
/// spin measurement along every grid direction, and (optionally) `±n₊`.
pub fn two_seq_depolarizing_numeric(
    e: &Ensemble,
    gamma1: f64,
    gamma2: f64,
    grid: usize,
    candidates: Candidates,
) -> Result<NoisyOptimum> {
    if grid < 2 {
        return Err(Error::InvalidParameter(format!("grid of {grid} points is too small")));
    }
    let first = Channel::depolarizing(gamma1)?;
    let second = Channel::depolarizing(gamma2)?;
    let pair = QubitPair::from_ensemble(e)?;
    let objective = TwoStageObjective::new(e, &first, &second)?;

    let mut pool = vec![ExtremeInstrument::Trivial { outcome: 0 }, ExtremeInstrument::Trivial { outcome: 1 }];
    let n_plus = direction_of(pair.difference());
    if candidates == Candidates::WithAnalytic {
        let n_minus = n_plus.map(|x| -x);
        for n in [n_plus, n_minus] {
            pool.push(ExtremeInstrument::Spin { n, sign: Sign::Plus });
            pool.push(ExtremeInstrument::Spin { n, sign: Sign::Minus });
        }
    }
    for n in fibonacci_sphere(grid) {
        pool.push(ExtremeInstrument::Spin { n, sign: Sign::Plus });
        pool.push(ExtremeInstrument::Spin { n, sign: Sign::Minus });
    }

    let values: Vec<f64> = pool
        .par_iter()
        .map(|c| objective.value(&c.to_instrument()))
        .collect::<Result<_>>()?;

    let mut best = 0;
    for (k, &v) in values.iter().enumerate() {
        if v > values[best] + REGIME_TOL {
            best = k;
        }
    }
    let maximizer = pool[best];
    let regime = match maximizer {
        ExtremeInstrument::Trivial { .. } => Regime::Trivial,
        ExtremeInstrument::Spin { .. } => Regime::HelstromLike,
    };

    // thresholds from matrix traces along n₊
    let plus = ExtremeInstrument::Spin { n: n_plus, sign: Sign::Plus }.to_instrument();
    let a = pair.q[0] * plus.probability_unchecked(0, &objective.arriving[0]);
    let b = pair.q[1] * plus.probability_unchecked(1, &objective.arriving[1]);
    let p_plus = a + b;

    Ok(NoisyOptimum {
        value: values[best],
        maximizer,
        regime,
        gamma2_upper: 2.0 * (1.0 - a.max(b) / p_plus),
        gamma2_lower: 2.0 * (1.0 - pair.max_prior() / p_plus),
    })
}

/// One row of a depolarizing sweep with `γ₁ = γ₂ = γ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub gamma: f64,
    /// Noiseless Helstrom bound of the ensemble.
    pub helstrom: f64,
    pub one_receiver: f64,
    pub two_closed: f64,
    pub two_numeric: f64,
}

/// `steps` equally spaced values from `start` to `end` inclusive (`steps ≥ 2`).
pub fn gamma_grid(start: f64, end: f64, steps: usize) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 steps, got {steps}")));
    }
    check_gamma("gamma start", start)?;
    check_gamma("gamma end", end)?;
    let h = (end - start) / (steps - 1) as f64;
    Ok((0..steps).map(|k| if k == steps - 1 { end } else { start + h * k as f64 }).collect())
}

/// Evaluates the one- and two-receiver optima at every `γ`, in input order.
pub fn depolarizing_sweep(e: &Ensemble, gammas: &[f64], grid: usize) -> Result<Vec<SweepPoint>> {
    let helstrom = crate::discrimination::helstrom_bound(e)?;
    gammas
        .par_iter()
        .map(|&g| {
            Ok(SweepPoint {
                gamma: g,
                helstrom,
                one_receiver: one_receiver_depolarizing_optimum(e, g)?,
                two_closed: two_seq_depolarizing_closed(e, g, g)?.value,
                two_numeric: two_seq_depolarizing_numeric(e, g, g, grid, Candidates::WithAnalytic)?.value,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrimination::{helstrom_bound, optimal_two_state_protocol, Variant};
    use crate::linalg::re;
    use crate::states::DensityOperator;

    fn mirrored_pair(q1: f64) -> Ensemble {
        Ensemble::from_bloch(&[[0.3, 0.3, 0.3], [0.3, 0.3, -0.3]], vec![q1, 1.0 - q1]).unwrap()
    }

    fn tilted_pair(q1: f64) -> Ensemble {
        Ensemble::from_bloch(&[[0.2, 0.3, -0.4], [-0.2, -0.3, 0.35]], vec![q1, 1.0 - q1]).unwrap()
    }

    #[test]
    fn one_receiver_examples() {
        assert!((one_receiver_depolarizing_optimum(&mirrored_pair(0.5), 0.0).unwrap() - 0.65).abs() < 1e-15);
        assert!((one_receiver_depolarizing_optimum(&mirrored_pair(0.55), 1.0).unwrap() - 0.55).abs() < 1e-15);
    }

    #[test]
    fn one_receiver_pure_states_match_overlap_formula() {
        let psi1 = [re(1.0), re(0.0)];
        let (t, ph) = (0.7f64, 0.3f64);
        let psi2 = [re(t.cos()), num_complex::Complex64::from_polar(t.sin(), ph)];
        let e = Ensemble::new(
            vec![DensityOperator::pure(&psi1).unwrap(), DensityOperator::pure(&psi2).unwrap()],
            vec![0.55, 0.45],
        )
        .unwrap();
        let overlap2 = t.cos().powi(2);
        for &g in &[0.0, 0.2, 0.6, 1.0] {
            let expect = (0.5 + 0.5 * (1.0 - g) * (1.0 - 4.0 * 0.55 * 0.45 * overlap2).sqrt()).max(0.55);
            assert!((one_receiver_depolarizing_optimum(&e, g).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_examples() {
        let o = two_seq_depolarizing_closed(&mirrored_pair(0.5), 0.0, 0.0).unwrap();
        assert!((o.value - 0.65).abs() < 1e-15);
        assert_eq!(o.regime, Regime::HelstromLike);
        let expect = 0.5 + 0.5 * 0.270625f64.sqrt();
        let o = two_seq_depolarizing_closed(&tilted_pair(0.5), 0.0, 0.0).unwrap();
        assert!((o.value - expect).abs() < 1e-15);
        assert!((o.value - 0.760108).abs() < 1e-6);
        for &g in &[0.0, 0.3, 0.8] {
            let c = two_seq_depolarizing_closed(&tilted_pair(0.55), g, 0.0).unwrap().value;
            assert!((c - one_receiver_depolarizing_optimum(&tilted_pair(0.55), g).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn thresholds_are_ordered() {
        for &(g1, g2) in &[(0.0, 0.0), (0.2, 0.5), (0.9, 0.1)] {
            let o = two_seq_depolarizing_closed(&mirrored_pair(0.55), g1, g2).unwrap();
            assert!(o.gamma2_upper >= o.gamma2_lower - 1e-10);
        }
    }

    #[test]
    fn degenerate_difference_uses_z_direction() {
        let e = Ensemble::from_bloch(&[[0.2, 0.0, 0.0], [0.2, 0.0, 0.0]], vec![0.5, 0.5]).unwrap();
        assert_eq!(optimal_direction(&e).unwrap(), [0.0, 0.0, 1.0]);
        let o = two_seq_depolarizing_closed(&e, 0.1, 0.3).unwrap();
        assert!((o.value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn numeric_matches_closed_on_reference_pairs() {
        for e in [mirrored_pair(0.5), mirrored_pair(0.55), tilted_pair(0.5), tilted_pair(0.55)] {
            for &(g1, g2) in &[(0.0, 0.0), (0.2, 0.2), (0.5, 0.7), (1.0, 1.0)] {
                let c = two_seq_depolarizing_closed(&e, g1, g2).unwrap();
                let n = two_seq_depolarizing_numeric(&e, g1, g2, 256, Candidates::WithAnalytic).unwrap();
                assert!((c.value - n.value).abs() < 1e-9, "{g1} {g2}: {} vs {}", c.value, n.value);
                assert!((c.gamma2_upper - n.gamma2_upper).abs() < 1e-9);
                assert!((c.gamma2_lower - n.gamma2_lower).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn sweep_endpoints() {
        let gs = gamma_grid(0.0, 1.0, 3).unwrap();
        assert_eq!(gs, vec![0.0, 0.5, 1.0]);
        let rows = depolarizing_sweep(&mirrored_pair(0.5), &gs, 128).unwrap();
        for v in [rows[0].helstrom, rows[0].one_receiver, rows[0].two_closed, rows[0].two_numeric] {
            assert!((v - 0.65).abs() < 1e-9);
        }
        assert!((rows[2].one_receiver - 0.5).abs() < 1e-12 && (rows[2].two_closed - 0.5).abs() < 1e-12);
        assert!(gamma_grid(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn numeric_rejects_tiny_grid() {
        assert!(matches!(
            two_seq_depolarizing_numeric(&mirrored_pair(0.5), 0.1, 0.1, 1, Candidates::GridOnly),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn identical_states_give_max_prior_everywhere() {
        let rho = DensityOperator::pure(&[re(0.6), re(0.8)]).unwrap();
        let e = Ensemble::new(vec![rho.clone(), rho], vec![0.6, 0.4]).unwrap();
        for &(g1, g2) in &[(0.0, 0.0), (0.4, 0.1), (1.0, 0.5)] {
            let n = two_seq_depolarizing_numeric(&e, g1, g2, 64, Candidates::WithAnalytic).unwrap();
            assert!((n.value - 0.6).abs() < 1e-12);
            assert_eq!(n.maximizer, ExtremeInstrument::Trivial { outcome: 0 });
        }
    }

    #[test]
    fn total_depolarization_before_first_receiver() {
        let e = tilted_pair(0.5);
        let m = optimal_two_state_protocol(&e, 2, &Variant::Projective).unwrap();
        let chans = vec![Channel::depolarizing(1.0).unwrap(), Channel::depolarizing(0.3).unwrap()];
        let p = Protocol::with_channels(m.receivers().to_vec(), chans).unwrap();
        // first answer is a coin flip; the rank-one posterior survives the second channel with 1 − γ₂/2
        assert!((noisy_success(&p, &e).unwrap() - 0.5 * (1.0 - 0.3 / 2.0)).abs() < 1e-12);
        let n = two_seq_depolarizing_numeric(&e, 1.0, 0.3, 128, Candidates::WithAnalytic).unwrap();
        assert!((n.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn identity_channels_reduce_to_noiseless() {
        let e = mirrored_pair(0.55);
        let p = optimal_two_state_protocol(&e, 2, &Variant::Projective).unwrap();
        let noisy = Protocol::with_channels(p.receivers().to_vec(), vec![Channel::identity(2); 2]).unwrap();
        assert!((noisy_success(&noisy, &e).unwrap() - success_direct(&p, &e).unwrap()).abs() < 1e-15);
        assert!(matches!(noisy_success(&p, &e), Err(Error::InvalidParameter(_))));
        let bound = noisy_two_seq_upper_bound(&e, &Channel::identity(2), &Channel::identity(2), &p.receivers()[0]).unwrap();
        assert!((bound - helstrom_bound(&e).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn optimal_protocol_under_noise() {
        let e = mirrored_pair(0.5);
        let g = 0.2;
        let p = optimal_two_state_protocol(&e, 2, &Variant::Projective).unwrap();
        let chans = vec![Channel::depolarizing(g).unwrap(), Channel::depolarizing(g).unwrap()];
        let noisy = Protocol::with_channels(p.receivers().to_vec(), chans).unwrap();
        let expect = (1.0 - g / 2.0) * (0.5 + 0.5 * (1.0 - g) * 0.3);
        assert!((noisy_success(&noisy, &e).unwrap() - expect).abs() < 1e-12);
        assert!((two_seq_depolarizing_closed(&e, g, g).unwrap().value - expect).abs() < 1e-12);
    }
}
