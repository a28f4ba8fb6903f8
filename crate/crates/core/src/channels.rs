//! The nine single-qubit noise channels: three rotations, three flips
//! (ellipsoidal deformations) and three displacements of the Bloch ball.
//!
//! Each [`NoiseChannel`] carries three representations that are built
//! independently and must agree:
//!
//! * a Kraus set `{F_k}` with `rho' = sum_k F_k rho F_k^dag`,
//! * an affine map `r' = M r + t` on Bloch vectors,
//! * a unitary dilation: an ancilla preparation plus a two-qubit unitary on
//!   `(system, ancilla)`, after which the ancilla is discarded.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::gates::{axis_rotation, cnot, controlled, embed, embed_operator, pauli, Axis, Unitary};
use crate::qstate::{
    self, bloch_of, max_abs_diff, partial_trace, state_matrix, tensor, BlochVector, CMatrix, DensityMatrix, PureState,
};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Tolerance for Kraus completeness.
pub const COMPLETENESS_TOL: f64 = 1e-12;
/// Tolerance for agreement between the three representations.
pub const AGREEMENT_TOL: f64 = 1e-10;

/// Largest admissible displacement strength; the admissible range is open at pi/2.
const DISPLACEMENT_THETA_MAX: f64 = FRAC_PI_2 - 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelKind {
    /// Rotation about an axis; the sign multiplies the angle.
    Rotation(Axis, Sign),
    /// Bit flip (x), bit-phase flip (y) or phase flip (z).
    Flip(Axis),
    /// Displacement of the ball centre along `±axis`. `Displacement(Z, Plus)`
    /// is amplitude damping, `Displacement(Z, Minus)` the thermal channel.
    Displacement(Axis, Sign),
}

impl ChannelKind {
    pub const BIT_FLIP: Self = ChannelKind::Flip(Axis::X);
    pub const BIT_PHASE_FLIP: Self = ChannelKind::Flip(Axis::Y);
    pub const PHASE_FLIP: Self = ChannelKind::Flip(Axis::Z);
    pub const AMPLITUDE_DAMPING: Self = ChannelKind::Displacement(Axis::Z, Sign::Plus);
    pub const THERMAL: Self = ChannelKind::Displacement(Axis::Z, Sign::Minus);

    /// The nine channels in noise-threshold table order.
    pub const NINE: [ChannelKind; 9] = [
        ChannelKind::Rotation(Axis::X, Sign::Plus),
        ChannelKind::Rotation(Axis::Y, Sign::Plus),
        ChannelKind::Rotation(Axis::Z, Sign::Plus),
        ChannelKind::Flip(Axis::X),
        ChannelKind::Flip(Axis::Y),
        ChannelKind::Flip(Axis::Z),
        ChannelKind::Displacement(Axis::X, Sign::Plus),
        ChannelKind::Displacement(Axis::Y, Sign::Plus),
        ChannelKind::Displacement(Axis::Z, Sign::Plus),
    ];

    /// Every kind including both signs of rotations and displacements.
    pub fn all() -> Vec<ChannelKind> {
        let mut kinds = Vec::with_capacity(15);
        for axis in Axis::ALL {
            kinds.push(ChannelKind::Rotation(axis, Sign::Plus));
            kinds.push(ChannelKind::Rotation(axis, Sign::Minus));
        }
        kinds.extend(Axis::ALL.map(ChannelKind::Flip));
        for axis in Axis::ALL {
            kinds.push(ChannelKind::Displacement(axis, Sign::Plus));
            kinds.push(ChannelKind::Displacement(axis, Sign::Minus));
        }
        kinds
    }

    pub fn is_admissible(self, theta: f64) -> bool {
        if !theta.is_finite() {
            return false;
        }
        match self {
            ChannelKind::Rotation(..) => true,
            ChannelKind::Flip(_) => (0.0..=PI).contains(&theta),
            ChannelKind::Displacement(..) => (0.0..FRAC_PI_2).contains(&theta),
        }
    }

    fn range_label(self) -> &'static str {
        match self {
            ChannelKind::Rotation(..) => "(-inf, inf)",
            ChannelKind::Flip(_) => "[0, pi]",
            ChannelKind::Displacement(..) => "[0, pi/2)",
        }
    }

    /// Upper end of the bracket used when searching for a noise threshold.
    pub fn theta_max(self) -> f64 {
        match self {
            ChannelKind::Rotation(..) | ChannelKind::Flip(_) => PI,
            ChannelKind::Displacement(..) => DISPLACEMENT_THETA_MAX,
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ChannelKind::Rotation(axis, Sign::Plus) => write!(f, "rot-{}", axis.name()),
            ChannelKind::Rotation(axis, Sign::Minus) => write!(f, "rot-{}-", axis.name()),
            ChannelKind::Flip(Axis::X) => f.write_str("bit-flip"),
            ChannelKind::Flip(Axis::Y) => f.write_str("bit-phase-flip"),
            ChannelKind::Flip(Axis::Z) => f.write_str("phase-flip"),
            ChannelKind::Displacement(Axis::Z, Sign::Plus) => f.write_str("disp-z+"),
            ChannelKind::Displacement(Axis::Z, Sign::Minus) => f.write_str("disp-z\u{2212}"),
            ChannelKind::Displacement(axis, Sign::Plus) => write!(f, "disp-{}", axis.name()),
            ChannelKind::Displacement(axis, Sign::Minus) => write!(f, "disp-{}-", axis.name()),
        }
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    /// Accepts the canonical names, an explicit `+`/`-` suffix on rotations and
    /// displacements, and U+2212 as a minus sign.
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('\u{2212}', "-");
        let axis_of = |c: &str| match c {
            "x" => Some(Axis::X),
            "y" => Some(Axis::Y),
            "z" => Some(Axis::Z),
            _ => None,
        };
        let split_sign = |rest: &str| -> Option<(Axis, Option<Sign>)> {
            let (axis, sign) = match rest.strip_suffix('+') {
                Some(a) => (a, Some(Sign::Plus)),
                None => match rest.strip_suffix('-') {
                    Some(a) => (a, Some(Sign::Minus)),
                    None => (rest, None),
                },
            };
            axis_of(axis).map(|a| (a, sign))
        };
        let kind = match norm.as_str() {
            "bit-flip" => Some(ChannelKind::BIT_FLIP),
            "bit-phase-flip" => Some(ChannelKind::BIT_PHASE_FLIP),
            "phase-flip" => Some(ChannelKind::PHASE_FLIP),
            "amplitude-damping" => Some(ChannelKind::AMPLITUDE_DAMPING),
            "thermal" => Some(ChannelKind::THERMAL),
            other => {
                if let Some(rest) = other.strip_prefix("rot-") {
                    split_sign(rest).map(|(a, s)| ChannelKind::Rotation(a, s.unwrap_or(Sign::Plus)))
                } else if let Some(rest) = other.strip_prefix("disp-") {
                    match split_sign(rest) {
                        // the z displacement has no default direction
                        Some((Axis::Z, None)) => None,
                        Some((a, s)) => Some(ChannelKind::Displacement(a, s.unwrap_or(Sign::Plus))),
                        None => None,
                    }
                } else {
                    None
                }
            }
        };
        kind.ok_or_else(|| Error::UnknownChannel(s.to_string()))
    }
}

/// Bloch-ball action `r -> matrix * r + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub matrix: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Affine {
    pub fn identity() -> Self {
        Self {
            matrix: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn apply(&self, r: &BlochVector) -> BlochVector {
        let v = self.matrix * Vector3::new(r.x, r.y, r.z) + self.translation;
        BlochVector::new(v.x, v.y, v.z)
    }

    pub fn max_abs_diff(&self, other: &Affine) -> f64 {
        let dm = (self.matrix - other.matrix).abs().max();
        let dt = (self.translation - other.translation).abs().max();
        dm.max(dt)
    }

    /// Reads the affine map off any linear single-qubit map by probing the
    /// maximally mixed state and the three `+axis` poles.
    pub fn from_map(map: impl Fn(&CMatrix) -> CMatrix) -> Self {
        let bloch = |m: CMatrix| {
            let off = m[(0, 1)];
            Vector3::new(2.0 * off.re, -2.0 * off.im, (m[(0, 0)] - m[(1, 1)]).re)
        };
        let translation = bloch(map(&state_matrix(&BlochVector::default())));
        let mut matrix = Matrix3::zeros();
        for axis in Axis::ALL {
            let r = BlochVector::from_array(axis.unit_vector());
            matrix.set_column(axis.index(), &(bloch(map(&state_matrix(&r))) - translation));
        }
        Self { matrix, translation }
    }
}

/// Unitary realization of a channel on `(system, ancilla)`; the system is
/// the more significant qubit of `joint`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dilation {
    pub ancilla: PureState,
    pub joint: Unitary,
}

impl Dilation {
    /// Evolves a single-qubit state through the circuit and discards the ancilla.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: rho.dim(),
            });
        }
        let env = DensityMatrix::from_pure(&self.ancilla);
        let joint = qstate::apply_unitary(&tensor(rho, &env)?, &self.joint, &[0, 1])?;
        partial_trace(&joint, &[0])
    }

    /// Kraus operators `F_k = <k|_anc J |anc>` in the computational ancilla basis.
    pub fn kraus(&self) -> Vec<CMatrix> {
        let j = self.joint.matrix();
        let a = self.ancilla.amplitudes();
        (0..2)
            .map(|k| {
                CMatrix::from_fn(2, 2, |i, s| {
                    (0..2)
                        .map(|e| j[((i << 1) | k, (s << 1) | e)] * a[e])
                        .sum::<Complex64>()
                })
            })
            .collect()
    }
}

/// A single-qubit noise channel with all three representations populated.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseChannel {
    kind: ChannelKind,
    theta: f64,
    kraus: Vec<CMatrix>,
    affine: Affine,
    dilation: Dilation,
}

fn mat2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[a, b, c, d])
}

fn re(x: f64) -> Complex64 {
    Complex64::from(x)
}

/// Kraus operators written out per channel.
fn kraus_set(kind: ChannelKind, theta: f64) -> Vec<CMatrix> {
    let (s, c) = theta.sin_cos();
    let mut ops = match kind {
        ChannelKind::Rotation(axis, sign) => vec![axis_rotation(axis, sign.value() * theta).matrix().clone()],
        ChannelKind::Flip(axis) => {
            let (sh, ch) = (theta / 2.0).sin_cos();
            vec![CMatrix::identity(2, 2) * re(ch), pauli(axis) * re(sh)]
        }
        ChannelKind::Displacement(Axis::Z, Sign::Plus) => {
            vec![mat2(re(1.0), ZERO, ZERO, re(c)), mat2(ZERO, re(s), ZERO, ZERO)]
        }
        ChannelKind::Displacement(Axis::Z, Sign::Minus) => {
            vec![mat2(re(c), ZERO, ZERO, re(1.0)), mat2(ZERO, ZERO, re(s), ZERO)]
        }
        ChannelKind::Displacement(Axis::X, sign) => {
            let p = sign.value();
            vec![
                mat2(re(1.0 + c), re(p * (1.0 - c)), re(p * (1.0 - c)), re(1.0 + c)) * re(0.5),
                mat2(re(-p * s), re(s), re(-s), re(p * s)) * re(0.5),
            ]
        }
        ChannelKind::Displacement(Axis::Y, sign) => {
            // The printed operators with the upper sign push toward -y under
            // rho = (I + r.sigma)/2, so the printed sign is the opposite of ours.
            let p = -sign.value();
            vec![
                mat2(re(1.0 + c), I * (p * (1.0 - c)), -I * (p * (1.0 - c)), re(1.0 + c)) * re(0.5),
                mat2(I * (p * s), re(s), re(s), -I * (p * s)) * re(0.5),
            ]
        }
    };
    ops.retain(|m| m.iter().any(|v| *v != ZERO));
    ops
}

fn affine_map(kind: ChannelKind, theta: f64) -> Affine {
    let (s, c) = theta.sin_cos();
    match kind {
        ChannelKind::Rotation(axis, sign) => {
            let n = Vector3::from(axis.unit_vector());
            let (sp, cp) = (sign.value() * theta).sin_cos();
            let cross = n.cross_matrix();
            let matrix = Matrix3::identity() * cp + cross * sp + n * n.transpose() * (1.0 - cp);
            Affine {
                matrix,
                translation: Vector3::zeros(),
            }
        }
        ChannelKind::Flip(axis) => {
            let mut d = Vector3::repeat(c);
            d[axis.index()] = 1.0;
            Affine {
                matrix: Matrix3::from_diagonal(&d),
                translation: Vector3::zeros(),
            }
        }
        ChannelKind::Displacement(axis, sign) => {
            let mut d = Vector3::repeat(c);
            d[axis.index()] = c * c;
            let mut t = Vector3::zeros();
            t[axis.index()] = sign.value() * s * s;
            Affine {
                matrix: Matrix3::from_diagonal(&d),
                translation: t,
            }
        }
    }
}

/// Amplitude-damping block on `(system, ancilla)` with the ancilla in `|0>`:
/// a controlled `R_y(2 theta)` from system to ancilla, then a CNOT back.
fn damping_block(theta: f64) -> Unitary {
    let cry = controlled(&axis_rotation(Axis::Y, 2.0 * theta));
    let back = embed(&cnot(), &[1, 0], 2).expect("two-qubit embedding");
    back.after(&cry).expect("same dimension")
}

/// Single-qubit frame change that maps `±axis` onto `+z` for the displacement circuits.
fn displacement_frame(axis: Axis, sign: Sign) -> Unitary {
    let h = re(FRAC_1_SQRT_2);
    let p = sign.value();
    let m = match axis {
        Axis::X => mat2(h, h * p, -h * p, h),
        Axis::Y => mat2(h, I * h * (-p), I * h * (-p), h),
        Axis::Z => return Unitary::pauli(Axis::X),
    };
    Unitary::from_matrix_unchecked(m)
}

fn dilation_for(kind: ChannelKind, theta: f64) -> Dilation {
    let zero = PureState::basis(1, 0).expect("one qubit");
    let on_system = |u: &Unitary| embed(u, &[0], 2).expect("two-qubit embedding");
    match kind {
        ChannelKind::Rotation(axis, sign) => Dilation {
            ancilla: zero,
            joint: on_system(&axis_rotation(axis, sign.value() * theta)),
        },
        ChannelKind::Flip(axis) => {
            let (sh, ch) = (theta / 2.0).sin_cos();
            Dilation {
                ancilla: PureState::from_real(&[ch, sh]).expect("normalized"),
                joint: embed(&controlled(&Unitary::pauli(axis)), &[1, 0], 2).expect("two-qubit embedding"),
            }
        }
        ChannelKind::Displacement(Axis::Z, Sign::Plus) => Dilation {
            ancilla: zero,
            joint: damping_block(theta),
        },
        ChannelKind::Displacement(axis, sign) => {
            let u = on_system(&displacement_frame(axis, sign));
            let joint = Unitary::from_circuit([&u, &damping_block(theta), &u.dagger()]).expect("same dimension");
            Dilation { ancilla: zero, joint }
        }
    }
}

/// Builds a channel of `kind` at noise strength `theta`.
///
/// Flip channels accept `theta` in `[0, pi]`, displacements `[0, pi/2)`,
/// rotations any finite angle.
pub fn make_channel(kind: ChannelKind, theta: f64) -> Result<NoiseChannel> {
    if !kind.is_admissible(theta) {
        return Err(Error::ThetaOutOfRange {
            channel: kind.to_string(),
            theta,
            range: kind.range_label(),
        });
    }
    Ok(NoiseChannel {
        kind,
        theta,
        kraus: kraus_set(kind, theta),
        affine: affine_map(kind, theta),
        dilation: dilation_for(kind, theta),
    })
}

impl NoiseChannel {
    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn affine(&self) -> &Affine {
        &self.affine
    }

    pub fn dilation(&self) -> &Dilation {
        &self.dilation
    }

    /// Kraus sum on one qubit of a register.
    pub fn apply(&self, rho: &DensityMatrix, qubit: usize) -> Result<DensityMatrix> {
        let n = rho.n_qubits();
        let mut out = CMatrix::zeros(rho.dim(), rho.dim());
        for f in &self.kraus {
            let e = embed_operator(f, &[qubit], n)?;
            out += &e * rho.matrix() * e.adjoint();
        }
        DensityMatrix::from_matrix_unchecked(out)
    }

    /// Kraus sum on a bare 2x2 operator (no validity checks).
    pub fn apply_operator(&self, m: &CMatrix) -> CMatrix {
        self.kraus
            .iter()
            .fold(CMatrix::zeros(2, 2), |acc, f| acc + f * m * f.adjoint())
    }

    /// Largest entry of `|sum_k F_k^dag F_k - I|`.
    pub fn completeness_error(&self) -> f64 {
        let sum = self
            .kraus
            .iter()
            .fold(CMatrix::zeros(2, 2), |acc, f| acc + f.adjoint() * f);
        max_abs_diff(&sum, &CMatrix::identity(2, 2))
    }

    /// Largest pairwise entrywise disagreement between the Kraus, affine and
    /// dilation routes over `points`.
    pub fn representation_error(&self, points: &[BlochVector]) -> Result<f64> {
        let mut worst = 0.0f64;
        for r in points {
            let rho = qstate::state_of(r)?;
            let by_kraus = self.apply(&rho, 0)?;
            let by_affine = state_matrix(&self.affine.apply(r));
            let by_dilation = self.dilation.apply(&rho)?;
            worst = worst
                .max(max_abs_diff(by_kraus.matrix(), &by_affine))
                .max(max_abs_diff(by_kraus.matrix(), by_dilation.matrix()))
                .max(max_abs_diff(&by_affine, by_dilation.matrix()));
        }
        Ok(worst)
    }

    /// Scales the first Kraus operator; only for exercising failure reports.
    pub(crate) fn corrupt_kraus(&mut self, factor: f64) {
        if let Some(f) = self.kraus.first_mut() {
            *f *= re(factor);
        }
    }
}

/// Ancilla state and joint unitary realizing `ch`.
pub fn dilate(ch: &NoiseChannel) -> Dilation {
    ch.dilation.clone()
}

/// `(M, t)` with `bloch_of(apply(ch, state_of(r))) = M r + t`.
pub fn bloch_affine(ch: &NoiseChannel) -> Affine {
    ch.affine
}

/// Applies `ch` to a single-qubit state and returns the output Bloch vector.
pub fn bloch_image(ch: &NoiseChannel, r: &BlochVector) -> Result<BlochVector> {
    bloch_of(&ch.apply(&qstate::state_of(r)?, 0)?)
}

/// Test points covering the Bloch ball: the six poles, an equatorial ring,
/// a Fibonacci lattice on the sphere and on the half-radius shell, and the
/// centre (119 points).
pub fn bloch_test_grid() -> Vec<BlochVector> {
    let mut pts = Vec::with_capacity(119);
    for axis in Axis::ALL {
        let v = BlochVector::from_array(axis.unit_vector());
        pts.push(v);
        pts.push(v.scale(-1.0));
    }
    for k in 0..12 {
        let phi = 2.0 * PI * (k as f64 + 0.5) / 12.0;
        pts.push(BlochVector::new(phi.cos(), phi.sin(), 0.0));
    }
    let golden = PI * (3.0 - 5f64.sqrt());
    for (count, radius) in [(80usize, 1.0), (20, 0.5)] {
        for k in 0..count {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
            let rho = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            pts.push(BlochVector::new(rho * phi.cos(), rho * phi.sin(), z).scale(radius));
        }
    }
    pts.push(BlochVector::default());
    pts
}
