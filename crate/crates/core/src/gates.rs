//! Unitary building blocks: Pauli matrices, axis rotations, CNOT and
//! embedding of a k-qubit gate into an n-qubit register.

use num_complex::Complex64;

use crate::qstate::{max_abs_diff, CMatrix, MAX_DIM};
use crate::{Error, Result};

pub const UNITARY_TOL: f64 = 1e-12;
const AXIS_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn unit_vector(self) -> [f64; 3] {
        match self {
            Axis::X => [1.0, 0.0, 0.0],
            Axis::Y => [0.0, 1.0, 0.0],
            Axis::Z => [0.0, 0.0, 1.0],
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

/// Pauli matrix for `axis`.
pub fn pauli(axis: Axis) -> CMatrix {
    let entries = match axis {
        Axis::X => [ZERO, ONE, ONE, ZERO],
        Axis::Y => [ZERO, -I, I, ZERO],
        Axis::Z => [ONE, ZERO, ZERO, -ONE],
    };
    CMatrix::from_row_slice(2, 2, &entries)
}

/// A unitary matrix on 1 to 4 qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    m: CMatrix,
}

impl Unitary {
    /// Validating constructor; requires `U^dag U = I` within 1e-12.
    pub fn new(m: CMatrix) -> Result<Self> {
        let dim = m.nrows();
        if m.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: m.ncols(),
            });
        }
        if dim > MAX_DIM {
            return Err(Error::DimensionOverflow { dim });
        }
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::InvalidState(format!(
                "unitary dimension {dim} is not a power of two"
            )));
        }
        let deviation = unitarity_error(&m);
        if deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { m })
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self { m }
    }

    pub fn identity(n_qubits: usize) -> Result<Self> {
        let dim = 1usize.checked_shl(n_qubits as u32).unwrap_or(usize::MAX);
        if dim > MAX_DIM {
            return Err(Error::DimensionOverflow { dim });
        }
        Ok(Self {
            m: CMatrix::identity(dim, dim),
        })
    }

    pub fn pauli(axis: Axis) -> Self {
        Self { m: pauli(axis) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn dagger(&self) -> Self {
        Self { m: self.m.adjoint() }
    }

    /// Matrix product `self · other` (apply `other` first).
    pub fn after(&self, other: &Unitary) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(Self { m: &self.m * &other.m })
    }

    /// Product of a circuit given in time order (first gate first).
    pub fn from_circuit<'a>(gates: impl IntoIterator<Item = &'a Unitary>) -> Result<Self> {
        let mut it = gates.into_iter();
        let first = it
            .next()
            .ok_or_else(|| Error::InvalidQubits("empty circuit".into()))?
            .clone();
        it.try_fold(first, |acc, g| g.after(&acc))
    }

    pub fn unitarity_error(&self) -> f64 {
        unitarity_error(&self.m)
    }
}

fn unitarity_error(m: &CMatrix) -> f64 {
    let id = CMatrix::identity(m.nrows(), m.ncols());
    max_abs_diff(&(m.adjoint() * m), &id)
}

/// `R_n(theta) = cos(theta/2) I - i sin(theta/2) n·sigma`.
pub fn rotation(axis: [f64; 3], theta: f64) -> Result<Unitary> {
    let norm = axis.iter().map(|a| a * a).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > AXIS_TOL {
        return Err(Error::NonUnitAxis { norm });
    }
    let (s, c) = (theta / 2.0).sin_cos();
    let n_sigma = Axis::ALL.iter().zip(axis).fold(CMatrix::zeros(2, 2), |acc, (&ax, n)| {
        acc + pauli(ax) * Complex64::from(n)
    });
    Ok(Unitary {
        m: CMatrix::identity(2, 2) * Complex64::from(c) - n_sigma * (I * s),
    })
}

pub fn axis_rotation(axis: Axis, theta: f64) -> Unitary {
    rotation(axis.unit_vector(), theta).expect("coordinate axes are unit vectors")
}

pub fn rx(theta: f64) -> Unitary {
    axis_rotation(Axis::X, theta)
}

/// `CNOT|x>|y> = |x>|y xor x>`, control on the first (more significant) qubit.
pub fn cnot() -> Unitary {
    let mut m = CMatrix::zeros(4, 4);
    for x in 0..2usize {
        for y in 0..2usize {
            m[((x << 1) | (y ^ x), (x << 1) | y)] = ONE;
        }
    }
    Unitary { m }
}

/// Lifts `u` to an `n_qubits` register acting on `targets`, in listed order:
/// `targets[0]` plays the role of `u`'s most significant qubit.
pub fn embed(u: &Unitary, targets: &[usize], n_qubits: usize) -> Result<Unitary> {
    embed_operator(&u.m, targets, n_qubits).map(|m| Unitary { m })
}

/// [`embed`] for an arbitrary (not necessarily unitary) operator, e.g. a
/// Kraus operator.
pub fn embed_operator(op: &CMatrix, targets: &[usize], n_qubits: usize) -> Result<CMatrix> {
    let k = targets.len();
    let dim = 1usize.checked_shl(n_qubits as u32).unwrap_or(usize::MAX);
    if dim > MAX_DIM {
        return Err(Error::DimensionOverflow { dim });
    }
    for (i, &q) in targets.iter().enumerate() {
        if q >= n_qubits {
            return Err(Error::InvalidQubits(format!(
                "target {q} out of range for {n_qubits} qubits"
            )));
        }
        if targets[..i].contains(&q) {
            return Err(Error::InvalidQubits(format!("target {q} listed twice")));
        }
    }
    let sub_dim = 1usize << k;
    if op.nrows() != sub_dim || op.ncols() != sub_dim {
        return Err(Error::DimensionMismatch {
            expected: sub_dim,
            found: op.nrows(),
        });
    }
    let masks: Vec<usize> = targets.iter().map(|&q| 1usize << (n_qubits - 1 - q)).collect();
    let target_mask: usize = masks.iter().sum();
    let sub_index = |full: usize| -> usize {
        masks
            .iter()
            .fold(0usize, |acc, &m| (acc << 1) | usize::from(full & m != 0))
    };
    let with_sub = |rest: usize, sub: usize| -> usize {
        masks.iter().enumerate().fold(
            rest,
            |acc, (i, &m)| if (sub >> (k - 1 - i)) & 1 == 1 { acc | m } else { acc },
        )
    };
    let mut out = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let rest = col & !target_mask;
        let s = sub_index(col);
        for r in 0..sub_dim {
            let v = op[(r, s)];
            if v != ZERO {
                out[(with_sub(rest, r), col)] = v;
            }
        }
    }
    Ok(out)
}

/// `|0><0| ⊗ I + |1><1| ⊗ u`, control on the more significant qubit.
pub fn controlled(u: &Unitary) -> Unitary {
    let d = u.dim();
    let mut m = CMatrix::identity(2 * d, 2 * d);
    m.view_mut((d, d), (d, d)).copy_from(&u.m);
    Unitary { m }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn basis_column(u: &Unitary, col: usize) -> Vec<Complex64> {
        u.matrix().column(col).iter().copied().collect()
    }

    #[test]
    fn rx_half_pi_matches_closed_form() {
        let u = rx(FRAC_PI_2);
        let h = Complex64::from(FRAC_1_SQRT_2);
        let expected = CMatrix::from_row_slice(2, 2, &[h, -I * h, -I * h, h]);
        assert!(max_abs_diff(u.matrix(), &expected) < 1e-15);
        let v = rx(-FRAC_PI_2);
        let expected = CMatrix::from_row_slice(2, 2, &[h, I * h, I * h, h]);
        assert!(max_abs_diff(v.matrix(), &expected) < 1e-15);
    }

    #[test]
    fn zero_angle_is_identity() {
        let u = rotation([0.0, 0.6, 0.8], 0.0).unwrap();
        assert!(max_abs_diff(u.matrix(), &CMatrix::identity(2, 2)) < 1e-15);
    }

    #[test]
    fn full_turn_is_minus_identity() {
        let u = rotation([0.48, 0.6, 0.64], 2.0 * PI).unwrap();
        assert!(max_abs_diff(u.matrix(), &(-CMatrix::identity(2, 2))) < 1e-15);
    }

    #[test]
    fn rotation_rejects_non_unit_axis() {
        assert!(matches!(rotation([1.0, 1.0, 0.0], 0.3), Err(Error::NonUnitAxis { .. })));
    }

    #[test]
    fn cnot_truth_table() {
        let c = cnot();
        let expect = [0b00, 0b01, 0b11, 0b10];
        for (input, out) in expect.into_iter().enumerate() {
            let col = basis_column(&c, input);
            assert_eq!(col[out], ONE);
        }
        let sq = c.after(&c).unwrap();
        assert!(max_abs_diff(sq.matrix(), &CMatrix::identity(4, 4)) < 1e-15);
    }

    #[test]
    fn embed_single_qubit() {
        let e = embed(&Unitary::pauli(Axis::X), &[1], 2).unwrap();
        // |00> -> |01>
        assert_eq!(basis_column(&e, 0b00)[0b01], ONE);
    }

    #[test]
    fn embed_cnot_identity_placement() {
        let e = embed(&cnot(), &[0, 1], 2).unwrap();
        assert_eq!(e, cnot());
    }

    #[test]
    fn embed_reversed_cnot_brute_force() {
        // control = qubit 2, target = qubit 0, on 3 qubits
        let e = embed(&cnot(), &[2, 0], 3).unwrap();
        for input in 0..8usize {
            let (q0, q1, q2) = ((input >> 2) & 1, (input >> 1) & 1, input & 1);
            let out = ((q0 ^ q2) << 2) | (q1 << 1) | q2;
            let col = basis_column(&e, input);
            for (row, v) in col.iter().enumerate() {
                let want = if row == out { ONE } else { ZERO };
                assert_eq!(*v, want, "input {input:03b} row {row:03b}");
            }
        }
        assert_eq!(basis_column(&e, 0b100)[0b101], ZERO);
        assert_eq!(basis_column(&e, 0b101)[0b001], ONE);
    }

    #[test]
    fn controlled_x_is_cnot() {
        assert_eq!(controlled(&Unitary::pauli(Axis::X)), cnot());
    }

    #[test]
    fn embed_rejects_collisions_and_range() {
        assert!(embed(&cnot(), &[1, 1], 3).is_err());
        assert!(embed(&cnot(), &[0, 3], 3).is_err());
        assert!(embed(&cnot(), &[0], 3).is_err());
        assert!(embed(&rx(0.1), &[0], 5).is_err());
    }

    #[test]
    fn unitary_validation() {
        assert!(Unitary::new(CMatrix::identity(2, 2) * Complex64::from(1.1)).is_err());
        assert!(Unitary::new(rx(0.3).matrix().clone()).is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn axis() -> impl Strategy<Value = [f64; 3]> {
            (0.0..PI, 0.0..2.0 * PI).prop_map(|(t, p)| [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()])
        }

        proptest! {
            #[test]
            fn rotation_inverse(n in axis(), theta in -10.0..10.0f64) {
                let u = rotation(n, theta).unwrap();
                let v = rotation(n, -theta).unwrap();
                let p = u.after(&v).unwrap();
                prop_assert!(max_abs_diff(p.matrix(), &CMatrix::identity(2, 2)) < 1e-12);
            }

            #[test]
            fn embed_preserves_unitarity(n in axis(), theta in -4.0..4.0f64, q in 0usize..4, r in 0usize..4) {
                prop_assume!(q != r);
                let u = rotation(n, theta).unwrap();
                let e = embed(&u, &[q], 4).unwrap();
                prop_assert!(e.unitarity_error() < 1e-12);
                let ec = embed(&cnot(), &[q, r], 4).unwrap();
                prop_assert!(ec.unitarity_error() < 1e-12);
            }
        }
    }
}
