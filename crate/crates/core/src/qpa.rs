//! Quantum privacy amplification.
//!
//! Two routes are provided. The ideal protocol on Bell-diagonal pairs is a
//! closed recurrence on the Bell weights ([`ideal_step`]). The noisy protocol
//! simulates the full four-qubit circuit ([`noisy_step`]): two copies of the
//! current pair on wires `(alice-ctl, bob-ctl, alice-tgt, bob-tgt)`, local
//! `R_x(pi/2)` on Alice's wires and `R_x(-pi/2)` on Bob's, a noise channel on
//! one wire, bilateral CNOTs, and postselection on coinciding target outcomes.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::channels::{make_channel, ChannelKind, NoiseChannel};
use crate::eavesdrop::{initial_pair, BellCoeffs};
use crate::gates::{cnot, embed, rx, Unitary};
use crate::qstate::{self, fidelity_phi_plus, postselect_coincide, tensor, DensityMatrix, ABORT_TOL};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Wire {
    #[default]
    AliceControl,
    BobControl,
    AliceTarget,
    BobTarget,
}

impl Wire {
    pub const ALL: [Wire; 4] = [Wire::AliceControl, Wire::BobControl, Wire::AliceTarget, Wire::BobTarget];

    /// Qubit index in the four-qubit register.
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Wire {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Wire::AliceControl => "alice-ctl",
            Wire::BobControl => "bob-ctl",
            Wire::AliceTarget => "alice-tgt",
            Wire::BobTarget => "bob-tgt",
        })
    }
}

impl FromStr for Wire {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "alice-ctl" | "alice-control" => Ok(Wire::AliceControl),
            "bob-ctl" | "bob-control" => Ok(Wire::BobControl),
            "alice-tgt" | "alice-target" => Ok(Wire::AliceTarget),
            "bob-tgt" | "bob-target" => Ok(Wire::BobTarget),
            _ => Err(Error::UnknownWire(s.to_string())),
        }
    }
}

/// Where in the circuit the noise channel acts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Stage {
    BeforeRotations,
    /// After the local rotations, before the CNOTs.
    #[default]
    BeforeCnots,
    AfterCnots,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct NoiseLocation {
    pub wire: Wire,
    pub stage: Stage,
}

impl NoiseLocation {
    pub fn on(wire: Wire) -> Self {
        Self {
            wire,
            stage: Stage::default(),
        }
    }
}

/// Noise inserted into every purification round.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NoiseConfig {
    pub channel: Option<NoiseChannel>,
    pub location: NoiseLocation,
}

impl NoiseConfig {
    pub fn noiseless() -> Self {
        Self::default()
    }

    /// `kind` at strength `theta` on Alice's control wire, before the CNOTs.
    pub fn new(kind: ChannelKind, theta: f64) -> Result<Self> {
        Ok(Self {
            channel: Some(make_channel(kind, theta)?),
            location: NoiseLocation::default(),
        })
    }

    pub fn at(mut self, location: NoiseLocation) -> Self {
        self.location = location;
        self
    }
}

/// Figures of merit after `n` purification rounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub n: usize,
    /// `<phi+| rho |phi+>`.
    pub fidelity: f64,
    /// Coincidence probability of this round (1 for `n = 0`).
    pub step_probability: f64,
    /// Product of all step probabilities so far.
    pub survival: f64,
    /// `survival / 2^n`.
    pub efficiency: f64,
}

impl StepRecord {
    pub fn infidelity(&self) -> f64 {
        1.0 - self.fidelity
    }
}

/// Record of a run; entry 0 is the starting pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolTrace {
    pub records: Vec<StepRecord>,
    pub states: Vec<DensityMatrix>,
}

impl ProtocolTrace {
    fn start(state: DensityMatrix) -> Result<Self> {
        let fidelity = fidelity_phi_plus(&state)?;
        let record = StepRecord {
            n: 0,
            fidelity,
            step_probability: 1.0,
            survival: 1.0,
            efficiency: 1.0,
        };
        Ok(Self {
            records: vec![record],
            states: vec![state],
        })
    }

    fn push(&mut self, state: DensityMatrix, p: f64) -> Result<()> {
        let last = self.records.last().expect("trace starts non-empty");
        let n = last.n + 1;
        let survival = last.survival * p;
        self.records.push(StepRecord {
            n,
            fidelity: fidelity_phi_plus(&state)?,
            step_probability: p,
            survival,
            efficiency: survival / 2f64.powi(n as i32),
        });
        self.states.push(state);
        Ok(())
    }

    /// Record after `n` rounds.
    pub fn at(&self, n: usize) -> Option<&StepRecord> {
        self.records.get(n)
    }

    pub fn last(&self) -> &StepRecord {
        self.records.last().expect("trace starts non-empty")
    }

    pub fn steps(&self) -> usize {
        self.records.len() - 1
    }

    pub fn infidelities(&self) -> Vec<f64> {
        self.records.iter().map(StepRecord::infidelity).collect()
    }
}

/// One round of the Bell-diagonal recurrence:
/// `A' = (A^2 + D^2)/N`, `B' = 2AD/N`, `C' = (B^2 + C^2)/N`, `D' = 2BC/N`,
/// with coincidence probability `N = (A + D)^2 + (B + C)^2`.
pub fn ideal_step(c: &BellCoeffs) -> Result<(BellCoeffs, f64)> {
    let BellCoeffs { a, b, c, d } = *c;
    let n = (a + d).powi(2) + (b + c).powi(2);
    if n.is_nan() || n <= ABORT_TOL {
        return Err(Error::Aborted { probability: n });
    }
    let next = BellCoeffs {
        a: (a * a + d * d) / n,
        b: 2.0 * a * d / n,
        c: (b * b + c * c) / n,
        d: 2.0 * b * c / n,
    };
    Ok((next, n))
}

/// Iterates [`ideal_step`] `n` times from arbitrary Bell weights.
pub fn run_ideal_from(start: BellCoeffs, n: usize) -> Result<ProtocolTrace> {
    if n == 0 {
        return Err(Error::NoSteps);
    }
    let mut trace = ProtocolTrace::start(start.to_density())?;
    let mut coeffs = start;
    for _ in 0..n {
        let (next, p) = ideal_step(&coeffs)?;
        trace.push(next.to_density(), p)?;
        coeffs = next;
    }
    Ok(trace)
}

/// Ideal protocol on pairs attacked at intrusion level `f`.
pub fn run_ideal(f: f64, n: usize) -> Result<ProtocolTrace> {
    let (_, coeffs) = initial_pair(f)?;
    run_ideal_from(coeffs, n)
}

/// Alice's and Bob's target wires; the control pair is qubits 0 and 1.
const TARGETS: (usize, usize) = (2, 3);

fn local_rotations() -> &'static Unitary {
    static LAYER: OnceLock<Unitary> = OnceLock::new();
    LAYER.get_or_init(|| {
        let u = rx(FRAC_PI_2);
        let v = rx(-FRAC_PI_2);
        let layer = [
            (Wire::AliceControl, &u),
            (Wire::BobControl, &v),
            (Wire::AliceTarget, &u),
            (Wire::BobTarget, &v),
        ]
        .iter()
        .map(|(w, g)| embed(g, &[w.index()], 4).expect("four-qubit embedding"))
        .collect::<Vec<_>>();
        Unitary::from_circuit(&layer).expect("same dimension")
    })
}

fn bilateral_cnot() -> &'static Unitary {
    static LAYER: OnceLock<Unitary> = OnceLock::new();
    LAYER.get_or_init(|| {
        let alice = embed(&cnot(), &[Wire::AliceControl.index(), Wire::AliceTarget.index()], 4).expect("embedding");
        let bob = embed(&cnot(), &[Wire::BobControl.index(), Wire::BobTarget.index()], 4).expect("embedding");
        bob.after(&alice).expect("same dimension")
    })
}

fn apply_layer(rho: &DensityMatrix, layer: &Unitary) -> DensityMatrix {
    qstate::conjugate(rho, layer.matrix())
}

/// One noisy purification round on two copies of `pair`. Returns the kept
/// control pair and the coincidence probability.
pub fn noisy_step(pair: &DensityMatrix, noise: &NoiseConfig) -> Result<(DensityMatrix, f64)> {
    if pair.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: pair.dim(),
        });
    }
    let add_noise = |rho: DensityMatrix, stage: Stage| -> Result<DensityMatrix> {
        match &noise.channel {
            Some(ch) if noise.location.stage == stage => ch.apply(&rho, noise.location.wire.index()),
            _ => Ok(rho),
        }
    };
    let mut rho = tensor(pair, pair)?;
    rho = add_noise(rho, Stage::BeforeRotations)?;
    rho = apply_layer(&rho, local_rotations());
    rho = add_noise(rho, Stage::BeforeCnots)?;
    rho = apply_layer(&rho, bilateral_cnot());
    rho = add_noise(rho, Stage::AfterCnots)?;
    let kept = postselect_coincide(&rho, TARGETS)?;
    Ok((kept.state, kept.probability))
}

/// Iterates [`noisy_step`] `n` times from an arbitrary two-qubit state.
pub fn run_noisy_from(start: DensityMatrix, noise: &NoiseConfig, n: usize) -> Result<ProtocolTrace> {
    if n == 0 {
        return Err(Error::NoSteps);
    }
    let mut trace = ProtocolTrace::start(start)?;
    for _ in 0..n {
        let current = trace.states.last().expect("non-empty");
        let (next, p) = noisy_step(current, noise)?;
        trace.push(next, p)?;
    }
    Ok(trace)
}

/// Noisy protocol on pairs attacked at intrusion level `f`.
pub fn run_noisy(f: f64, noise: &NoiseConfig, n: usize) -> Result<ProtocolTrace> {
    let (pair, _) = initial_pair(f)?;
    run_noisy_from(pair, noise, n)
}

/// Number of points in the bracket-validation pre-pass.
pub const THRESHOLD_GRID: usize = 32;
/// Required relative accuracy of `1-F` at the returned threshold.
pub const THRESHOLD_REL_TOL: f64 = 1e-3;

/// `1-F` after `n` rounds with `kind` at strength `theta` on Alice's control wire.
pub fn infidelity_after(kind: ChannelKind, theta: f64, f: f64, n: usize) -> Result<f64> {
    let noise = NoiseConfig::new(kind, theta)?;
    Ok(run_noisy(f, &noise, n)?.last().infidelity())
}

/// Noise strength at which `1-F` after `n` rounds reaches `target`.
///
/// A 32-point grid (zero plus a log-spaced sweep up to the channel's
/// `theta_max`) locates the first crossing and checks that `1-F` rises
/// monotonically up to it; bisection then refines inside that cell.
pub fn threshold_theta(kind: ChannelKind, f: f64, n: usize, target: f64) -> Result<f64> {
    let eval = |theta: f64| infidelity_after(kind, theta, f, n);
    let noiseless = eval(0.0)?;
    if noiseless >= target {
        return Err(Error::TargetUnreachable { noiseless, target });
    }
    let theta_max = kind.theta_max();
    let at_max = eval(theta_max)?;
    if at_max < target {
        return Err(Error::NotBracketed {
            at_max,
            theta_max,
            target,
        });
    }

    let ratio = 1e-4f64.powf(1.0 / (THRESHOLD_GRID - 2) as f64);
    let mut grid = vec![0.0];
    grid.extend((0..THRESHOLD_GRID - 1).map(|k| theta_max * 1e-4 / ratio.powi(k as i32)));
    // last point must be exactly theta_max
    *grid.last_mut().expect("non-empty") = theta_max;

    let mut lo = (0.0, noiseless);
    let mut hi = None;
    for &theta in &grid[1..] {
        let v = eval(theta)?;
        if v < lo.1 {
            return Err(Error::NonMonotone { theta });
        }
        if v >= target {
            hi = Some((theta, v));
            break;
        }
        lo = (theta, v);
    }
    let (mut a, mut b) = (lo.0, hi.expect("theta_max is above target").0);

    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if eval(mid)? < target {
            a = mid;
        } else {
            b = mid;
        }
        if (b - a) <= 1e-14 * b {
            break;
        }
    }
    let theta = 0.5 * (a + b);
    let v = eval(theta)?;
    if (v - target).abs() > THRESHOLD_REL_TOL * target {
        return Err(Error::NonMonotone { theta });
    }
    Ok(theta)
}
