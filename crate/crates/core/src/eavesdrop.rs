//! Isotropic Bužek-Hillery copying machine used by the eavesdropper.
//!
//! The machine acts on three qubits ordered `(bob, eve, ancilla)`: Bob's
//! incoming qubit plus Eve's two qubits prepared in
//! `|Phi> = alpha|00> + beta|01> + gamma|10> + delta|11>`. The unitary `W`
//! permutes the computational basis; afterwards qubit 1 is Eve's copy and
//! qubit 2 is discarded.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::gates::{cnot, embed, Unitary};
use crate::qstate::{self, partial_trace, tensor, CMatrix, DensityMatrix, PureState};
use crate::{Error, Result};

/// `alpha` at no intrusion.
pub const ALPHA_MIN: f64 = FRAC_1_SQRT_2;
/// `alpha` at maximum intrusion, `2/sqrt 6`.
pub const ALPHA_MAX: f64 = 0.816_496_580_927_726_1;

const NORM_TOL: f64 = 1e-12;

/// Amplitudes of Eve's prepared state and the resulting shrinking factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BHParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    /// Intrusion parameter in `[0, 1]`.
    pub f_alpha: f64,
    /// Bob's Bloch-vector shrinking factor, `2 alpha delta`.
    pub r_b: f64,
    /// Eve's Bloch-vector shrinking factor, `2 alpha beta`.
    pub r_e: f64,
}

impl BHParams {
    /// Eve's two-qubit preparation `|Phi>`.
    pub fn eve_state(&self) -> PureState {
        PureState::from_real(&[self.alpha, self.beta, self.gamma, self.delta]).expect("amplitudes are normalized")
    }
}

pub fn alpha_from_intrusion(f: f64) -> f64 {
    ALPHA_MIN + f * (ALPHA_MAX - ALPHA_MIN)
}

pub fn intrusion_from_alpha(alpha: f64) -> f64 {
    (alpha - ALPHA_MIN) / (ALPHA_MAX - ALPHA_MIN)
}

/// Machine parameters for intrusion level `f` in `[0, 1]`.
///
/// `beta = alpha/2 - sqrt(1/2 - 3 alpha^2/4)`, `gamma = 0`,
/// `delta = alpha/2 + sqrt(1/2 - 3 alpha^2/4)`.
pub fn params_from_intrusion(f: f64) -> Result<BHParams> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::IntrusionOutOfRange(f));
    }
    let alpha = alpha_from_intrusion(f);
    // 1/2 - 3 alpha^2/4 = (3/4)(alpha_max - alpha)(alpha_max + alpha); the
    // factored form avoids cancellation, which sqrt would amplify near f = 1
    let root = (0.75 * (1.0 - f) * (ALPHA_MAX - ALPHA_MIN) * (ALPHA_MAX + alpha)).sqrt();
    let beta = alpha / 2.0 - root;
    let delta = alpha / 2.0 + root;
    Ok(BHParams {
        alpha,
        beta,
        gamma: 0.0,
        delta,
        f_alpha: f,
        r_b: 2.0 * alpha * delta,
        r_e: 2.0 * alpha * beta,
    })
}

/// Weights of a Bell-diagonal two-qubit state on
/// `(|phi+>, |phi->, |psi+>, |psi->)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl BellCoeffs {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let coeffs = Self { a, b, c, d };
        let all = coeffs.to_array();
        if all.iter().any(|v| v.is_nan() || *v < 0.0) {
            return Err(Error::InvalidBellCoeffs(format!("negative entry in {all:?}")));
        }
        let sum: f64 = all.iter().sum();
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidBellCoeffs(format!("sum is {sum}")));
        }
        Ok(coeffs)
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// Bell-diagonal density matrix with these weights.
    pub fn to_density(self) -> DensityMatrix {
        let [a, b, c, d] = self.to_array();
        let h = 0.5;
        let m = CMatrix::from_row_slice(
            4,
            4,
            &[
                h * (a + b),
                0.0,
                0.0,
                h * (a - b),
                0.0,
                h * (c + d),
                h * (c - d),
                0.0,
                0.0,
                h * (c - d),
                h * (c + d),
                0.0,
                h * (a - b),
                0.0,
                0.0,
                h * (a + b),
            ]
            .map(Complex64::from),
        );
        DensityMatrix::from_matrix_unchecked(m).expect("4x4")
    }

    /// Diagonal of `rho` in the Bell basis. Off-diagonal Bell elements are
    /// ignored, so this is exact only for Bell-diagonal input.
    pub fn from_density(rho: &DensityMatrix) -> Result<Self> {
        if rho.dim() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: rho.dim(),
            });
        }
        let e = |i, j| rho.entry(i, j).re;
        Ok(Self {
            a: 0.5 * (e(0, 0) + e(3, 3) + e(0, 3) + e(3, 0)),
            b: 0.5 * (e(0, 0) + e(3, 3) - e(0, 3) - e(3, 0)),
            c: 0.5 * (e(1, 1) + e(2, 2) + e(1, 2) + e(2, 1)),
            d: 0.5 * (e(1, 1) + e(2, 2) - e(1, 2) - e(2, 1)),
        })
    }

    pub fn max_abs_diff(&self, other: &BellCoeffs) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

/// Image of `|bob, e1, e2>` under `W`, read off the machine's action on
/// `|psi>|Phi>`.
fn w_image(input: usize) -> usize {
    const TABLE: [usize; 8] = [0b000, 0b101, 0b110, 0b011, 0b111, 0b010, 0b001, 0b100];
    TABLE[input]
}

/// The copying-machine unitary on `(bob, eve, ancilla)`.
pub fn bh_unitary() -> Unitary {
    let mut m = CMatrix::zeros(8, 8);
    for input in 0..8 {
        m[(w_image(input), input)] = Complex64::from(1.0);
    }
    Unitary::from_matrix_unchecked(m)
}

/// The four CNOTs, in time order, that compose to [`bh_unitary`]: the system
/// qubit controls both of Eve's qubits, then each of them controls the system.
pub fn cnot_decomposition() -> Vec<Unitary> {
    [[0, 1], [0, 2], [1, 0], [2, 0]]
        .iter()
        .map(|t| embed(&cnot(), t, 3).expect("three-qubit embedding"))
        .collect()
}

/// Output of the copying machine on one qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct CloneOutput {
    /// State of `(bob, eve, ancilla)` after the machine.
    pub joint: DensityMatrix,
    pub rho_b: DensityMatrix,
    pub rho_e: DensityMatrix,
}

/// Runs the machine on a (possibly mixed) single-qubit input.
pub fn clone(input: &DensityMatrix, params: &BHParams) -> Result<CloneOutput> {
    if input.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: input.dim(),
        });
    }
    let eve = DensityMatrix::from_pure(&params.eve_state());
    let joint = qstate::apply_unitary(&tensor(input, &eve)?, &bh_unitary(), &[0, 1, 2])?;
    let rho_b = partial_trace(&joint, &[0])?;
    let rho_e = partial_trace(&joint, &[1])?;
    Ok(CloneOutput { joint, rho_b, rho_e })
}

/// Bell coefficients of the attacked pair:
/// `A = (alpha+delta)^2/2`, `B = (alpha-delta)^2/2`,
/// `C = (beta+gamma)^2/2`, `D = (beta-gamma)^2/2`.
pub fn bell_coeffs(p: &BHParams) -> BellCoeffs {
    BellCoeffs {
        a: 0.5 * (p.alpha + p.delta).powi(2),
        b: 0.5 * (p.alpha - p.delta).powi(2),
        c: 0.5 * (p.beta + p.gamma).powi(2),
        d: 0.5 * (p.beta - p.gamma).powi(2),
    }
}

/// The pair Alice and Bob share after Eve attacks Bob's half of `|phi+>`,
/// written out in the computational basis, together with its Bell weights.
pub fn initial_pair(f: f64) -> Result<(DensityMatrix, BellCoeffs)> {
    let p = params_from_intrusion(f)?;
    let (a, b, g, d) = (p.alpha, p.beta, p.gamma, p.delta);
    let diag = 0.5 * (a * a + d * d);
    let corner = a * d;
    let inner = 0.5 * (b * b + g * g);
    let cross = b * g;
    let m = CMatrix::from_row_slice(
        4,
        4,
        &[
            diag, 0.0, 0.0, corner, 0.0, inner, cross, 0.0, 0.0, cross, inner, 0.0, corner, 0.0, 0.0, diag,
        ]
        .map(Complex64::from),
    );
    Ok((DensityMatrix::from_matrix_unchecked(m)?, bell_coeffs(&p)))
}

/// [`initial_pair`] rebuilt by simulation: `|phi+>` on `(alice, bob)`, Eve's
/// state on two more qubits, `W` on Bob and Eve, then Eve's qubits traced out.
pub fn initial_pair_from_circuit(f: f64) -> Result<DensityMatrix> {
    let p = params_from_intrusion(f)?;
    let phi_plus = PureState::from_real(&[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2])?;
    let start = tensor(
        &DensityMatrix::from_pure(&phi_plus),
        &DensityMatrix::from_pure(&p.eve_state()),
    )?;
    let attacked = qstate::apply_unitary(&start, &bh_unitary(), &[1, 2, 3])?;
    partial_trace(&attacked, &[0, 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{bloch_of, fidelity_phi_plus, max_abs_diff, state_of, BlochVector};

    #[test]
    fn no_intrusion() {
        let p = params_from_intrusion(0.0).unwrap();
        assert!((p.alpha - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((p.delta - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(p.beta.abs() < 1e-15);
        assert!((p.r_b - 1.0).abs() < 1e-15 && p.r_e.abs() < 1e-15);
    }

    #[test]
    fn maximum_intrusion() {
        let p = params_from_intrusion(1.0).unwrap();
        let inv6 = 1.0 / 6f64.sqrt();
        assert!((p.alpha - 2.0 * inv6).abs() < 1e-15);
        assert!((p.beta - inv6).abs() < 1e-15 && (p.delta - inv6).abs() < 1e-15);
        assert!((p.r_b - 2.0 / 3.0).abs() < 1e-15 && (p.r_e - 2.0 / 3.0).abs() < 1e-15);
        assert!((ALPHA_MAX - 2.0 / 6f64.sqrt()).abs() < 1e-16);
    }

    #[test]
    fn intrusion_out_of_range() {
        assert_eq!(params_from_intrusion(1.01), Err(Error::IntrusionOutOfRange(1.01)));
        assert!(params_from_intrusion(-0.2).is_err());
        assert!(params_from_intrusion(f64::NAN).is_err());
    }

    #[test]
    fn intrusion_round_trips() {
        for k in 0..=20 {
            let f = k as f64 / 20.0;
            let p = params_from_intrusion(f).unwrap();
            assert!((intrusion_from_alpha(p.alpha) - f).abs() < 1e-12);
            assert!((ALPHA_MIN..=ALPHA_MAX + 1e-15).contains(&p.alpha));
            assert!((p.alpha.powi(2) + p.beta.powi(2) + p.delta.powi(2) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn w_on_basis_inputs() {
        let w = bh_unitary();
        // |0>|01> -> |101>, |1>|00> -> |111>
        assert_eq!(w.matrix()[(0b101, 0b001)], Complex64::from(1.0));
        assert_eq!(w.matrix()[(0b111, 0b100)], Complex64::from(1.0));
        assert!(w.unitarity_error() < 1e-15);
    }

    #[test]
    fn cnot_decomposition_reproduces_w() {
        let product = Unitary::from_circuit(&cnot_decomposition()).unwrap();
        assert!(max_abs_diff(product.matrix(), bh_unitary().matrix()) < 1e-15);
    }

    #[test]
    fn w_matches_machine_action_on_superpositions() {
        // mu|0> + nu|1> with complex amplitudes
        let mu = Complex64::new(0.6, 0.0);
        let nu = Complex64::new(0.0, 0.8);
        let p = params_from_intrusion(0.37).unwrap();
        let (a, b, g, d) = (p.alpha, p.beta, p.gamma, p.delta);
        let input: Vec<Complex64> = [mu, nu].iter().flat_map(|&s| [a, b, g, d].map(|e| s * e)).collect();
        let out = bh_unitary().matrix() * nalgebra::DVector::from_vec(input);
        let mut expected = vec![Complex64::from(0.0); 8];
        for (idx, amp) in [(0b000, mu * a), (0b101, mu * b), (0b110, mu * g), (0b011, mu * d)] {
            expected[idx] += amp;
        }
        for (idx, amp) in [(0b111, nu * a), (0b010, nu * b), (0b001, nu * g), (0b100, nu * d)] {
            expected[idx] += amp;
        }
        for (x, y) in out.iter().zip(&expected) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn clone_shrinks_bloch_vectors() {
        let p = params_from_intrusion(1.0).unwrap();
        let up = DensityMatrix::basis(1, 0).unwrap();
        let out = clone(&up, &p).unwrap();
        let rb = bloch_of(&out.rho_b).unwrap();
        assert!(rb.max_abs_diff(&BlochVector::new(0.0, 0.0, 2.0 / 3.0)) < 1e-12);

        let mixed = DensityMatrix::maximally_mixed(1).unwrap();
        let out = clone(&mixed, &p).unwrap();
        assert!(out.rho_b.max_abs_diff(&mixed) < 1e-15);
        assert!(out.rho_e.max_abs_diff(&mixed) < 1e-15);
    }

    #[test]
    fn clone_of_mixture_is_isotropic() {
        let p = params_from_intrusion(0.6).unwrap();
        let r = BlochVector::new(0.5, 0.0, 0.5);
        let out = clone(&state_of(&r).unwrap(), &p).unwrap();
        assert!(bloch_of(&out.rho_b).unwrap().max_abs_diff(&r.scale(p.r_b)) < 1e-12);
        assert!(bloch_of(&out.rho_e).unwrap().max_abs_diff(&r.scale(p.r_e)) < 1e-12);
    }

    #[test]
    fn clone_of_pure_state_matches_reduced_matrix() {
        // rho_B written out for |psi> = mu|0> + nu|1>
        let p = params_from_intrusion(0.8).unwrap();
        let (mu, nu) = (Complex64::new(0.28, 0.0), Complex64::new(0.0, 0.96));
        let psi = PureState::new(vec![mu, nu]).unwrap();
        let out = clone(&DensityMatrix::from_pure(&psi), &p).unwrap();
        let (a, b, g, d) = (p.alpha, p.beta, p.gamma, p.delta);
        let (m2, n2) = (mu.norm_sqr(), nu.norm_sqr());
        let off = mu * nu.conj() * (2.0 * a * d) + mu.conj() * nu * (2.0 * b * g);
        let expected = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::from(m2 * (a * a + d * d) + n2 * (b * b + g * g)),
                off,
                off.conj(),
                Complex64::from(m2 * (b * b + g * g) + n2 * (a * a + d * d)),
            ],
        );
        assert!(max_abs_diff(out.rho_b.matrix(), &expected) < 1e-15);
    }

    #[test]
    fn initial_pair_examples() {
        let (rho, c) = initial_pair(0.0).unwrap();
        assert!(c.max_abs_diff(&BellCoeffs::new(1.0, 0.0, 0.0, 0.0).unwrap()) < 1e-15);
        assert!((fidelity_phi_plus(&rho).unwrap() - 1.0).abs() < 1e-15);

        let (_, c) = initial_pair(1.0).unwrap();
        let twelfth = 1.0 / 12.0;
        assert!(
            c.max_abs_diff(&BellCoeffs {
                a: 0.75,
                b: twelfth,
                c: twelfth,
                d: twelfth
            }) < 1e-15
        );

        let (rho, c) = initial_pair(0.95).unwrap();
        assert!((fidelity_phi_plus(&rho).unwrap() - c.a).abs() < 1e-15);
        let rel = ((1.0 - c.a) - 1.57e-1).abs() / 1.57e-1;
        assert!(rel < 0.01, "1-A = {}", 1.0 - c.a);
    }

    #[test]
    fn bell_coefficients_and_matrix_agree() {
        for k in 0..=10 {
            let (rho, c) = initial_pair(k as f64 / 10.0).unwrap();
            assert!(rho.max_abs_diff(&c.to_density()) < 1e-15);
            assert!(BellCoeffs::from_density(&rho).unwrap().max_abs_diff(&c) < 1e-15);
            assert!(BellCoeffs::new(c.a, c.b, c.c, c.d).is_ok());
        }
    }

    #[test]
    fn circuit_pair_matches_formula() {
        for k in 0..=10 {
            let f = k as f64 / 10.0;
            let (rho, _) = initial_pair(f).unwrap();
            let sim = initial_pair_from_circuit(f).unwrap();
            assert!(sim.max_abs_diff(&rho) < 1e-12, "f = {f}");
        }
    }

    #[test]
    fn bell_coeff_validation() {
        assert!(BellCoeffs::new(0.5, 0.5, 0.1, -0.1).is_err());
        assert!(BellCoeffs::new(0.5, 0.4, 0.0, 0.0).is_err());
    }
}
