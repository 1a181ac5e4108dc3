//! Stabilizer tableau with destabilizers, supporting measurement of
//! arbitrary Pauli products and exact expectation values.
//!
//! Rows use the (x|z|r) encoding: bit pair (1,0) is X, (0,1) is Z, (1,1) is
//! Y, with `r` the minus sign. Phase bookkeeping during row multiplication
//! follows the usual mod-4 exponent-of-i accounting.

use crate::surgery::{Basis, Pauli};

use super::{Gate, Replay, VerifyError};

/// A Hermitian Pauli product: `(-1)^neg * prod_q sigma(x_q, z_q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PauliOp {
    pub x: u32,
    pub z: u32,
    pub neg: bool,
}

impl PauliOp {
    pub fn from_pairs(pairs: &[(usize, Pauli)]) -> PauliOp {
        let mut op = PauliOp {
            x: 0,
            z: 0,
            neg: false,
        };
        for (wire, pauli) in pairs {
            let m = 1u32 << wire;
            match pauli {
                Pauli::X => op.x |= m,
                Pauli::Z => op.z |= m,
                Pauli::Y => {
                    op.x |= m;
                    op.z |= m;
                }
            }
        }
        op
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct Row {
    x: u32,
    z: u32,
    r: bool,
}

impl Row {
    fn anticommutes(&self, p: &PauliOp) -> bool {
        let overlap =
            (self.x & p.z).count_ones() + (self.z & p.x).count_ones();
        overlap % 2 == 1
    }
}

/// Exponent of i picked up when multiplying single-qubit Paulis
/// sigma(x1,z1) * sigma(x2,z2), in {-1, 0, 1}.
fn g(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => i32::from(z2) - i32::from(x2),
        (true, false) => {
            if z2 {
                2 * i32::from(x2) - 1
            } else {
                0
            }
        }
        (false, true) => {
            if x2 {
                1 - 2 * i32::from(z2)
            } else {
                0
            }
        }
    }
}

/// `h := other * h`, with exact sign.
fn rowsum(h: &mut Row, other: &Row, n: usize) {
    let mut phase = 2 * i32::from(h.r) + 2 * i32::from(other.r);
    for q in 0..n {
        let m = 1u32 << q;
        phase += g(
            other.x & m != 0,
            other.z & m != 0,
            h.x & m != 0,
            h.z & m != 0,
        );
    }
    let phase = phase.rem_euclid(4);
    debug_assert!(phase == 0 || phase == 2, "non-Hermitian row product");
    h.r = phase == 2;
    h.x ^= other.x;
    h.z ^= other.z;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    destab: Vec<Row>,
    stab: Vec<Row>,
}

impl Tableau {
    /// |0...0> on `n` wires.
    pub fn new(n: usize) -> Tableau {
        assert!(n > 0 && n <= 32);
        Tableau {
            n,
            destab: (0..n)
                .map(|q| Row {
                    x: 1 << q,
                    z: 0,
                    r: false,
                })
                .collect(),
            stab: (0..n)
                .map(|q| Row {
                    x: 0,
                    z: 1 << q,
                    r: false,
                })
                .collect(),
        }
    }

    pub fn wires(&self) -> usize {
        self.n
    }

    fn rows_mut(&mut self) -> impl Iterator<Item = &mut Row> {
        self.destab.iter_mut().chain(self.stab.iter_mut())
    }

    pub fn h(&mut self, q: usize) {
        let m = 1u32 << q;
        for row in self.rows_mut() {
            let xq = row.x & m != 0;
            let zq = row.z & m != 0;
            if xq && zq {
                row.r = !row.r;
            }
            if xq != zq {
                row.x ^= m;
                row.z ^= m;
            }
        }
    }

    pub fn s(&mut self, q: usize) {
        let m = 1u32 << q;
        for row in self.rows_mut() {
            let xq = row.x & m != 0;
            let zq = row.z & m != 0;
            if xq && zq {
                row.r = !row.r;
            }
            if xq {
                row.z ^= m;
            }
        }
    }

    pub fn sdg(&mut self, q: usize) {
        let m = 1u32 << q;
        for row in self.rows_mut() {
            let xq = row.x & m != 0;
            let zq = row.z & m != 0;
            if xq && !zq {
                row.r = !row.r;
            }
            if xq {
                row.z ^= m;
            }
        }
    }

    pub fn x(&mut self, q: usize) {
        let m = 1u32 << q;
        for row in self.rows_mut() {
            if row.z & m != 0 {
                row.r = !row.r;
            }
        }
    }

    pub fn y(&mut self, q: usize) {
        let m = 1u32 << q;
        for row in self.rows_mut() {
            if (row.x & m != 0) != (row.z & m != 0) {
                row.r = !row.r;
            }
        }
    }

    pub fn z(&mut self, q: usize) {
        let m = 1u32 << q;
        for row in self.rows_mut() {
            if row.x & m != 0 {
                row.r = !row.r;
            }
        }
    }

    pub fn cnot(&mut self, c: usize, t: usize) {
        assert_ne!(c, t);
        let mc = 1u32 << c;
        let mt = 1u32 << t;
        for row in self.rows_mut() {
            let xc = row.x & mc != 0;
            let zc = row.z & mc != 0;
            let xt = row.x & mt != 0;
            let zt = row.z & mt != 0;
            if xc && zt && (xt == zc) {
                row.r = !row.r;
            }
            if xc {
                row.x ^= mt;
            }
            if zt {
                row.z ^= mc;
            }
        }
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        self.h(b);
        self.cnot(a, b);
        self.h(b);
    }

    pub fn swap(&mut self, a: usize, b: usize) {
        self.cnot(a, b);
        self.cnot(b, a);
        self.cnot(a, b);
    }

    /// Project onto outcome `want` of measuring `p`; returns the outcome
    /// probability (0, 1/2, or 1).
    pub fn measure(&mut self, p: &PauliOp, want: bool) -> f64 {
        match (0..self.n).find(|i| self.stab[*i].anticommutes(p)) {
            Some(pivot) => {
                let pivot_row = self.stab[pivot];
                for i in 0..self.n {
                    if i != pivot && self.stab[i].anticommutes(p) {
                        rowsum(&mut self.stab[i], &pivot_row, self.n);
                    }
                    if self.destab[i].anticommutes(p) {
                        rowsum(&mut self.destab[i], &pivot_row, self.n);
                    }
                }
                self.destab[pivot] = pivot_row;
                self.stab[pivot] = Row {
                    x: p.x,
                    z: p.z,
                    r: want ^ p.neg,
                };
                0.5
            }
            None => {
                let outcome = self.determined_sign(p);
                if outcome == want {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Sign of `p` when it commutes with the whole stabilizer group:
    /// multiply out the stabilizers flagged by anticommuting destabilizers.
    fn determined_sign(&self, p: &PauliOp) -> bool {
        let mut scratch = Row::default();
        for i in 0..self.n {
            if self.destab[i].anticommutes(p) {
                rowsum(&mut scratch, &self.stab[i], self.n);
            }
        }
        assert_eq!(
            (scratch.x, scratch.z),
            (p.x, p.z),
            "operator is not in the +/- stabilizer group"
        );
        scratch.r ^ p.neg
    }

    /// <p> is +1, -1, or 0 (`None`) on the current state.
    pub fn expectation(&self, p: &PauliOp) -> Option<i8> {
        if (0..self.n).any(|i| self.stab[i].anticommutes(p)) {
            return None;
        }
        Some(if self.determined_sign(p) { -1 } else { 1 })
    }

    pub fn stabilizer_rows(&self) -> Vec<PauliOp> {
        self.stab
            .iter()
            .map(|row| PauliOp {
                x: row.x,
                z: row.z,
                neg: row.r,
            })
            .collect()
    }

    /// True when both tableaus stabilize the same state.
    pub fn agrees_with(&self, other: &Tableau) -> bool {
        other
            .stabilizer_rows()
            .iter()
            .all(|row| self.expectation(row) == Some(1))
    }
}

impl Replay for Tableau {
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
        match pauli {
            Pauli::X => self.x(wire),
            Pauli::Y => self.y(wire),
            Pauli::Z => self.z(wire),
        }
    }

    fn measure(&mut self, paulis: &[(usize, Pauli)], want: bool) -> f64 {
        Tableau::measure(self, &PauliOp::from_pairs(paulis), want)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op(pairs: &[(usize, Pauli)]) -> PauliOp {
        PauliOp::from_pairs(pairs)
    }

    #[test]
    fn zero_state_expectations() {
        let t = Tableau::new(2);
        assert_eq!(t.expectation(&op(&[(0, Pauli::Z)])), Some(1));
        assert_eq!(t.expectation(&op(&[(1, Pauli::Z)])), Some(1));
        assert_eq!(t.expectation(&op(&[(0, Pauli::X)])), None);
        assert_eq!(
            t.expectation(&op(&[(0, Pauli::Z), (1, Pauli::Z)])),
            Some(1)
        );
    }

    #[test]
    fn bell_pair_correlations() {
        let mut t = Tableau::new(2);
        t.h(0);
        t.cnot(0, 1);
        assert_eq!(t.expectation(&op(&[(0, Pauli::X), (1, Pauli::X)])), Some(1));
        assert_eq!(t.expectation(&op(&[(0, Pauli::Z), (1, Pauli::Z)])), Some(1));
        assert_eq!(
            t.expectation(&op(&[(0, Pauli::Y), (1, Pauli::Y)])),
            Some(-1)
        );
        assert_eq!(t.expectation(&op(&[(0, Pauli::Z)])), None);
    }

    #[test]
    fn s_gate_turns_plus_into_y_eigenstate() {
        let mut t = Tableau::new(1);
        t.h(0);
        t.s(0);
        assert_eq!(t.expectation(&op(&[(0, Pauli::Y)])), Some(1));
        t.sdg(0);
        assert_eq!(t.expectation(&op(&[(0, Pauli::X)])), Some(1));
    }

    #[test]
    fn sdg_is_s_cubed() {
        let mut a = Tableau::new(1);
        a.h(0);
        a.sdg(0);
        let mut b = Tableau::new(1);
        b.h(0);
        b.s(0);
        b.s(0);
        b.s(0);
        assert_eq!(a, b);
    }

    #[test]
    fn hzh_is_x() {
        let mut t = Tableau::new(1);
        t.h(0);
        t.z(0);
        t.h(0);
        assert_eq!(t.expectation(&op(&[(0, Pauli::Z)])), Some(-1));
    }

    #[test]
    fn ghz_stabilizers() {
        let mut t = Tableau::new(3);
        t.h(0);
        t.cnot(0, 1);
        t.cnot(1, 2);
        assert_eq!(
            t.expectation(&op(&[(0, Pauli::X), (1, Pauli::X), (2, Pauli::X)])),
            Some(1)
        );
        assert_eq!(t.expectation(&op(&[(0, Pauli::Z), (1, Pauli::Z)])), Some(1));
        assert_eq!(t.expectation(&op(&[(1, Pauli::Z), (2, Pauli::Z)])), Some(1));
        assert_eq!(t.expectation(&op(&[(0, Pauli::X)])), None);
    }

    #[test]
    fn random_measurement_collapses_then_repeats() {
        let mut t = Tableau::new(1);
        let x = op(&[(0, Pauli::X)]);
        assert_eq!(t.measure(&x, false), 0.5);
        assert_eq!(t.expectation(&x), Some(1));
        assert_eq!(t.measure(&x, false), 1.0);
        assert_eq!(t.measure(&x, true), 0.0);
    }

    #[test]
    fn joint_zz_measurement_on_plus_plus() {
        // |++>: ZZ outcome is random; afterwards ZZ is a stabilizer and XX
        // still is (they commute)
        let mut t = Tableau::new(2);
        t.h(0);
        t.h(1);
        let zz = op(&[(0, Pauli::Z), (1, Pauli::Z)]);
        assert_eq!(t.measure(&zz, true), 0.5);
        assert_eq!(t.expectation(&zz), Some(-1));
        assert_eq!(t.expectation(&op(&[(0, Pauli::X), (1, Pauli::X)])), Some(1));
    }

    #[test]
    fn swap_moves_the_excitation() {
        let mut t = Tableau::new(2);
        t.x(1);
        t.swap(0, 1);
        assert_eq!(t.expectation(&op(&[(0, Pauli::Z)])), Some(-1));
        assert_eq!(t.expectation(&op(&[(1, Pauli::Z)])), Some(1));
    }

    #[test]
    fn cz_equals_hadamard_conjugated_cnot() {
        let mut a = Tableau::new(2);
        a.h(0);
        a.h(1);
        a.cz(0, 1);
        // CZ |++> is the graph state stabilized by X1 Z2 and Z1 X2
        assert_eq!(a.expectation(&op(&[(0, Pauli::X), (1, Pauli::Z)])), Some(1));
        assert_eq!(a.expectation(&op(&[(0, Pauli::Z), (1, Pauli::X)])), Some(1));
    }

    #[test]
    fn agreement_is_state_equality_not_row_equality() {
        // same state, different generator presentations
        let mut a = Tableau::new(2);
        a.h(0);
        a.cnot(0, 1);
        let mut b = Tableau::new(2);
        b.h(1);
        b.cnot(1, 0);
        assert!(a.agrees_with(&b));
        assert!(b.agrees_with(&a));
        b.x(0);
        assert!(!a.agrees_with(&b));
    }

    #[test]
    fn negative_operator_expectation() {
        let t = Tableau::new(1);
        let minus_z = PauliOp {
            x: 0,
            z: 1,
            neg: true,
        };
        assert_eq!(t.expectation(&minus_z), Some(-1));
    }
}
