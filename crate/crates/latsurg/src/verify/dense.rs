//! Small dense state-vector simulator for the non-Clifford checks. Wire 0
//! is the least-significant index bit; capacity is capped at 8 wires, far
//! above what the gadget checks need.

use num_complex::Complex64;

use crate::surgery::{Basis, Pauli};

use super::tableau::PauliOp;
use super::{Gate, Replay, VerifyError};

const MAX_WIRES: usize = 8;

#[derive(Debug, Clone)]
pub struct DenseState {
    n: usize,
    amps: Vec<Complex64>,
}

impl DenseState {
    /// |0...0> on `n` wires.
    pub fn new_zero(n: usize) -> DenseState {
        assert!(n > 0 && n <= MAX_WIRES);
        let mut amps = vec![Complex64::ZERO; 1 << n];
        amps[0] = Complex64::ONE;
        DenseState { n, amps }
    }

    pub fn wires(&self) -> usize {
        self.n
    }

    fn apply_1q(&mut self, wire: usize, m: [[Complex64; 2]; 2]) {
        let bit = 1usize << wire;
        for i in 0..self.amps.len() {
            if i & bit != 0 {
                continue;
            }
            let a0 = self.amps[i];
            let a1 = self.amps[i | bit];
            self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
            self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
        }
    }

    pub fn h(&mut self, wire: usize) {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        self.apply_1q(wire, [[s, s], [s, -s]]);
    }

    pub fn s(&mut self, wire: usize) {
        self.apply_1q(
            wire,
            [
                [Complex64::ONE, Complex64::ZERO],
                [Complex64::ZERO, Complex64::I],
            ],
        );
    }

    pub fn sdg(&mut self, wire: usize) {
        self.apply_1q(
            wire,
            [
                [Complex64::ONE, Complex64::ZERO],
                [Complex64::ZERO, -Complex64::I],
            ],
        );
    }

    pub fn t(&mut self, wire: usize) {
        let w = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        self.apply_1q(
            wire,
            [[Complex64::ONE, Complex64::ZERO], [Complex64::ZERO, w]],
        );
    }

    pub fn tdg(&mut self, wire: usize) {
        let w = Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4);
        self.apply_1q(
            wire,
            [[Complex64::ONE, Complex64::ZERO], [Complex64::ZERO, w]],
        );
    }

    pub fn cnot(&mut self, c: usize, t: usize) {
        assert_ne!(c, t);
        let cb = 1usize << c;
        let tb = 1usize << t;
        for i in 0..self.amps.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amps.swap(i, i | tb);
            }
        }
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        let ab = (1usize << a) | (1usize << b);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & ab == ab {
                *amp = -*amp;
            }
        }
    }

    /// P|i> = (-1)^neg * i^{#Y} * (-1)^{popcount(z&i)} |i ^ x>.
    pub fn apply_pauli_op(&mut self, p: &PauliOp) {
        let mut phase = Complex64::ONE;
        if p.neg {
            phase = -phase;
        }
        phase *= Complex64::I.powu((p.x & p.z).count_ones());
        let x = p.x as usize;
        let mut out = vec![Complex64::ZERO; self.amps.len()];
        for (i, amp) in self.amps.iter().enumerate() {
            let sign = if (p.z as usize & i).count_ones() % 2 == 1 {
                -Complex64::ONE
            } else {
                Complex64::ONE
            };
            out[i ^ x] = phase * sign * amp;
        }
        self.amps = out;
    }

    /// Project onto outcome `want` of the +1/-1 measurement of `p`; returns
    /// the outcome probability and renormalizes (no-op on zero probability).
    pub fn measure_pauli(&mut self, p: &PauliOp, want: bool) -> f64 {
        let mut shifted = self.clone();
        shifted.apply_pauli_op(p);
        let sign = if want { -1.0 } else { 1.0 };
        for (a, b) in self.amps.iter_mut().zip(&shifted.amps) {
            *a = 0.5 * (*a + sign * b);
        }
        let prob = self.norm_sq();
        if prob > 1e-300 {
            let scale = prob.sqrt().recip();
            for a in &mut self.amps {
                *a *= scale;
            }
        }
        prob
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn overlap(&self, other: &DenseState) -> Complex64 {
        assert_eq!(self.n, other.n);
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

impl Replay for DenseState {
    fn init_wire(&mut self, wire: usize, basis: Basis) {
        if basis == Basis::X {
            self.h(wire);
        }
    }

    fn gate(&mut self, gate: Gate, wire: usize) -> Result<(), VerifyError> {
        match gate {
            Gate::H => self.h(wire),
            Gate::S => self.s(wire),
            Gate::Sdg => self.sdg(wire),
        }
        Ok(())
    }

    fn pauli(&mut self, wire: usize, pauli: Pauli) {
        let p = PauliOp::from_pairs(&[(wire, pauli)]);
        self.apply_pauli_op(&p);
    }

    fn measure(&mut self, paulis: &[(usize, Pauli)], want: bool) -> f64 {
        self.measure_pauli(&PauliOp::from_pairs(paulis), want)
    }
}
