//! Exact symbolic algebra of n-qubit Pauli strings and real Hermitian
//! combinations of them, plus realization as dense complex matrices.
//!
//! A string is stored as an (x, z) bitmask pair so that multiplication and
//! phase tracking are bitwise. Site `i` (1-based, site 1 leftmost) occupies
//! bit `n - i`, which lines up with the computational-basis index convention
//! `|q1 q2 .. qn> = sum_i q_i 2^(n-i)`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Coefficients with magnitude below this are dropped from operators.
pub const DROP_TOL: f64 = 1e-12;

/// Dense realization refuses above this many qubits (dim 2^10 = 1024).
pub const DENSE_QUBIT_LIMIT: u32 = 10;

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub fn from_char(c: char) -> Result<Self> {
        match c {
            'I' => Ok(Letter::I),
            'X' => Ok(Letter::X),
            'Y' => Ok(Letter::Y),
            'Z' => Ok(Letter::Z),
            _ => Err(Error::Invalid(format!("not a Pauli letter: {c}"))),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }

    fn bits(self) -> (u64, u64) {
        match self {
            Letter::I => (0, 0),
            Letter::X => (1, 0),
            Letter::Y => (1, 1),
            Letter::Z => (0, 1),
        }
    }
}

/// Fourth root of unity picked up by Pauli multiplication, i^k.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    PlusOne,
    PlusI,
    MinusOne,
    MinusI,
}

impl Phase {
    pub fn from_exponent(k: u32) -> Self {
        match k % 4 {
            0 => Phase::PlusOne,
            1 => Phase::PlusI,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    /// Exponent k with this phase equal to i^k.
    pub fn exponent(self) -> u32 {
        match self {
            Phase::PlusOne => 0,
            Phase::PlusI => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    pub fn as_c64(self) -> C64 {
        match self {
            Phase::PlusOne => C64::new(1.0, 0.0),
            Phase::PlusI => C64::new(0.0, 1.0),
            Phase::MinusOne => C64::new(-1.0, 0.0),
            Phase::MinusI => C64::new(0.0, -1.0),
        }
    }
}

impl Mul for Phase {
    type Output = Phase;
    // phases multiply by adding exponents of i
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: Phase) -> Phase {
        Phase::from_exponent(self.exponent() + rhs.exponent())
    }
}

/// Tensor product of n Pauli letters, e.g. `XIZ`.
///
/// The all-I string is the multiplicative identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    n: u32,
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity(n: u32) -> Self {
        assert!((1..=64).contains(&n), "qubit count out of range");
        PauliString { n, x: 0, z: 0 }
    }

    /// Single-letter string: `letter` at 1-based `site`, identity elsewhere.
    pub fn single(n: u32, site: u32, letter: Letter) -> Result<Self> {
        if site < 1 || site > n {
            return Err(Error::SiteOutOfRange { site, n });
        }
        let (x, z) = letter.bits();
        let pos = n - site;
        Ok(PauliString { n, x: x << pos, z: z << pos })
    }

    pub fn from_letters(letters: &[Letter]) -> Self {
        let n = letters.len() as u32;
        assert!((1..=64).contains(&n), "qubit count out of range");
        let mut s = PauliString::identity(n);
        for (i, &l) in letters.iter().enumerate() {
            let (x, z) = l.bits();
            let pos = n - 1 - i as u32;
            s.x |= x << pos;
            s.z |= z << pos;
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let letters: Result<Vec<Letter>> = text.chars().map(Letter::from_char).collect();
        let letters = letters?;
        if letters.is_empty() || letters.len() > 64 {
            return Err(Error::Invalid(format!("bad string length {}", letters.len())));
        }
        Ok(PauliString::from_letters(&letters))
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn letter(&self, site: u32) -> Letter {
        let pos = self.n - site;
        match ((self.x >> pos) & 1, (self.z >> pos) & 1) {
            (0, 0) => Letter::I,
            (1, 0) => Letter::X,
            (1, 1) => Letter::Y,
            _ => Letter::Z,
        }
    }

    pub fn letters(&self) -> Vec<Letter> {
        (1..=self.n).map(|i| self.letter(i)).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Number of non-identity sites.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// Strings commute iff the symplectic form vanishes mod 2.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    /// Flat index in `0..4^n`, usable as a coordinate in operator space.
    pub fn index(&self) -> usize {
        ((self.x as usize) << self.n) | self.z as usize
    }

    pub fn from_index(n: u32, idx: usize) -> Self {
        debug_assert!(idx < 1usize << (2 * n));
        let z = (idx & ((1 << n) - 1)) as u64;
        let x = (idx >> n) as u64;
        PauliString { n, x, z }
    }

    pub(crate) fn masks(&self) -> (u64, u64) {
        (self.x, self.z)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 1..=self.n {
            write!(f, "{}", self.letter(i).as_char())?;
        }
        Ok(())
    }
}

/// Exact product of two Pauli strings: `p * q = phase * r`.
///
/// Each letter is i^(y-count) X^x Z^z, so the phase exponent is
/// `y(p) + y(q) - y(pq) + 2*|z_p & x_q|` mod 4.
pub fn pauli_mul(p: &PauliString, q: &PauliString) -> Result<(Phase, PauliString)> {
    if p.n != q.n {
        return Err(Error::LengthMismatch { left: p.n, right: q.n });
    }
    let x = p.x ^ q.x;
    let z = p.z ^ q.z;
    let k = (p.x & p.z).count_ones() + (q.x & q.z).count_ones() + 2 * (p.z & q.x).count_ones();
    // subtract y-count of the product (mod 4)
    let k = k + 4 - (x & z).count_ones() % 4;
    Ok((Phase::from_exponent(k), PauliString { n: p.n, x, z }))
}

/// Real linear combination of Pauli strings; Hermitian by construction.
///
/// Coefficients below [`DROP_TOL`] are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOp {
    n: u32,
    terms: BTreeMap<PauliString, f64>,
}

impl HermitianOp {
    pub fn zero(n: u32) -> Self {
        HermitianOp { n, terms: BTreeMap::new() }
    }

    pub fn identity(n: u32) -> Self {
        HermitianOp::single(1.0, PauliString::identity(n))
    }

    pub fn single(coeff: f64, string: PauliString) -> Self {
        let mut op = HermitianOp::zero(string.n());
        op.add_term(coeff, string);
        op
    }

    pub fn from_terms<I>(n: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, PauliString)>,
    {
        let mut op = HermitianOp::zero(n);
        for (c, s) in terms {
            if s.n() != n {
                return Err(Error::LengthMismatch { left: n, right: s.n() });
            }
            op.add_term(c, s);
        }
        Ok(op)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &f64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, s: &PauliString) -> f64 {
        self.terms.get(s).copied().unwrap_or(0.0)
    }

    pub fn add_term(&mut self, coeff: f64, string: PauliString) {
        assert_eq!(string.n(), self.n, "term length must match the operator");
        let entry = self.terms.entry(string).or_insert(0.0);
        *entry += coeff;
        if entry.abs() < DROP_TOL {
            self.terms.remove(&string);
        }
    }

    /// self += c * other
    pub fn add_scaled(&mut self, c: f64, other: &HermitianOp) {
        debug_assert_eq!(self.n, other.n);
        for (&s, &v) in &other.terms {
            self.add_term(c * v, s);
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = HermitianOp::zero(self.n);
        for (&s, &v) in &self.terms {
            out.add_term(c * v, s);
        }
        out
    }

    /// Normalized Hilbert-Schmidt inner product `tr(a b)/2^n`, which is
    /// diagonal in the Pauli basis: a sum over shared strings.
    pub fn hs_inner(&self, other: &HermitianOp) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::LengthMismatch { left: self.n, right: other.n });
        }
        // merge-join over the sorted term maps, iterating the smaller one
        let (small, big) = if self.terms.len() <= other.terms.len() {
            (&self.terms, &other.terms)
        } else {
            (&other.terms, &self.terms)
        };
        let mut acc = 0.0;
        for (s, &v) in small {
            if let Some(&w) = big.get(s) {
                acc += v * w;
            }
        }
        Ok(acc)
    }

    pub fn hs_norm(&self) -> f64 {
        self.terms.values().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Commutator composed with i: `bracket(a, b) = i[a, b]`, again Hermitian.
    ///
    /// Structure constants of anticommuting strings are +-2, so integer
    /// coefficient inputs stay exact.
    pub fn bracket(&self, other: &HermitianOp) -> Result<HermitianOp> {
        if self.n != other.n {
            return Err(Error::LengthMismatch { left: self.n, right: other.n });
        }
        let mut out = HermitianOp::zero(self.n);
        for (p, &cp) in &self.terms {
            for (q, &cq) in &other.terms {
                if p.commutes_with(q) {
                    continue;
                }
                // i[P,Q] = 2 i (i^k) R with PQ = i^k R and k odd
                let (phase, r) = pauli_mul(p, q)?;
                let sign = match Phase::from_exponent(phase.exponent() + 1) {
                    Phase::PlusOne => 1.0,
                    Phase::MinusOne => -1.0,
                    _ => unreachable!("anticommuting product phase must be odd"),
                };
                out.add_term(2.0 * sign * cp * cq, r);
            }
        }
        Ok(out)
    }

    /// Dense 2^n x 2^n matrix of the operator.
    pub fn to_matrix(&self) -> Result<DMatrix<C64>> {
        if self.n > DENSE_QUBIT_LIMIT {
            return Err(Error::DenseLimit { n: self.n, limit: DENSE_QUBIT_LIMIT });
        }
        let dim = 1usize << self.n;
        let mut m = DMatrix::<C64>::zeros(dim, dim);
        for (p, &c) in &self.terms {
            let (x, z) = p.masks();
            let y_phase = Phase::from_exponent((x & z).count_ones()).as_c64();
            for col in 0..dim {
                // P|b> = i^y (-1)^{|z & b|} |b ^ x>
                let sign = if ((z as usize & col).count_ones()).is_multiple_of(2) { 1.0 } else { -1.0 };
                let row = col ^ x as usize;
                m[(row, col)] += y_phase * C64::new(sign * c, 0.0);
            }
        }
        Ok(m)
    }
}

impl Add for &HermitianOp {
    type Output = HermitianOp;
    fn add(self, rhs: &HermitianOp) -> HermitianOp {
        let mut out = self.clone();
        out.add_scaled(1.0, rhs);
        out
    }
}

impl Sub for &HermitianOp {
    type Output = HermitianOp;
    fn sub(self, rhs: &HermitianOp) -> HermitianOp {
        let mut out = self.clone();
        out.add_scaled(-1.0, rhs);
        out
    }
}

impl Neg for &HermitianOp {
    type Output = HermitianOp;
    fn neg(self) -> HermitianOp {
        self.scaled(-1.0)
    }
}

impl Mul<f64> for &HermitianOp {
    type Output = HermitianOp;
    fn mul(self, rhs: f64) -> HermitianOp {
        self.scaled(rhs)
    }
}

impl fmt::Display for HermitianOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (s, v)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{v:+.6}*{s}")?;
        }
        Ok(())
    }
}

/// Dense unitary gate, validated to `U^dag U = I` within tolerance on entry.
#[derive(Debug, Clone)]
pub struct UnitaryMatrix {
    mat: DMatrix<C64>,
}

impl UnitaryMatrix {
    pub const UNITARITY_TOL: f64 = 1e-9;

    pub fn new(mat: DMatrix<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimMismatch { left: mat.nrows(), right: mat.ncols() });
        }
        let defect = (mat.adjoint() * &mat - DMatrix::<C64>::identity(mat.nrows(), mat.ncols()))
            .norm();
        if defect > Self::UNITARITY_TOL {
            return Err(Error::Invalid(format!("matrix is not unitary (defect {defect:.3e})")));
        }
        Ok(UnitaryMatrix { mat })
    }

    /// For products of already-validated unitaries.
    pub(crate) fn new_unchecked(mat: DMatrix<C64>) -> Self {
        UnitaryMatrix { mat }
    }

    pub fn identity(dim: usize) -> Self {
        UnitaryMatrix { mat: DMatrix::identity(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn adjoint(&self) -> UnitaryMatrix {
        UnitaryMatrix { mat: self.mat.adjoint() }
    }

    pub fn mul(&self, rhs: &UnitaryMatrix) -> UnitaryMatrix {
        UnitaryMatrix { mat: &self.mat * &rhs.mat }
    }

    pub fn unitarity_residual(&self) -> f64 {
        let n = self.mat.nrows();
        (self.mat.adjoint() * &self.mat - DMatrix::<C64>::identity(n, n)).norm()
    }
}

/// Free-function form of [`HermitianOp::bracket`].
pub fn bracket(a: &HermitianOp, b: &HermitianOp) -> Result<HermitianOp> {
    a.bracket(b)
}

/// Free-function form of [`HermitianOp::hs_inner`].
pub fn hs_inner(a: &HermitianOp, b: &HermitianOp) -> Result<f64> {
    a.hs_inner(b)
}

/// Complex linear combination of Pauli strings, closed under operator
/// products. Used for associative-algebra closures; Hamiltonians themselves
/// stay in [`HermitianOp`].
#[derive(Debug, Clone)]
pub struct ComplexOp {
    n: u32,
    terms: BTreeMap<PauliString, C64>,
}

impl ComplexOp {
    pub fn zero(n: u32) -> Self {
        ComplexOp { n, terms: BTreeMap::new() }
    }

    pub fn identity(n: u32) -> Self {
        let mut op = ComplexOp::zero(n);
        op.add_term(C64::new(1.0, 0.0), PauliString::identity(n));
        op
    }

    pub fn from_hermitian(h: &HermitianOp) -> Self {
        let mut op = ComplexOp::zero(h.n());
        for (&s, &c) in &h.terms {
            op.add_term(C64::new(c, 0.0), s);
        }
        op
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &C64)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, coeff: C64, string: PauliString) {
        assert_eq!(string.n(), self.n, "term length must match the operator");
        let entry = self.terms.entry(string).or_insert(C64::new(0.0, 0.0));
        *entry += coeff;
        if entry.norm() < DROP_TOL {
            self.terms.remove(&string);
        }
    }

    pub fn add_scaled(&mut self, c: C64, other: &ComplexOp) {
        for (&s, &v) in &other.terms {
            self.add_term(c * v, s);
        }
    }

    pub fn scaled(&self, c: C64) -> Self {
        let mut out = ComplexOp::zero(self.n);
        for (&s, &v) in &self.terms {
            out.add_term(c * v, s);
        }
        out
    }

    /// Operator product, exact through the Pauli multiplication table.
    pub fn mul(&self, other: &ComplexOp) -> Result<ComplexOp> {
        if self.n != other.n {
            return Err(Error::LengthMismatch { left: self.n, right: other.n });
        }
        let mut out = ComplexOp::zero(self.n);
        for (p, &cp) in &self.terms {
            for (q, &cq) in &other.terms {
                let (phase, r) = pauli_mul(p, q)?;
                out.add_term(cp * cq * phase.as_c64(), r);
            }
        }
        Ok(out)
    }

    /// Normalized complex Hilbert-Schmidt inner product `tr(a^dag b)/2^n`.
    pub fn inner(&self, other: &ComplexOp) -> Result<C64> {
        if self.n != other.n {
            return Err(Error::LengthMismatch { left: self.n, right: other.n });
        }
        let (small, big, conj_small) = if self.terms.len() <= other.terms.len() {
            (&self.terms, &other.terms, true)
        } else {
            (&other.terms, &self.terms, false)
        };
        let mut acc = C64::new(0.0, 0.0);
        for (s, &v) in small {
            if let Some(&w) = big.get(s) {
                acc += if conj_small { v.conj() * w } else { w.conj() * v };
            }
        }
        Ok(acc)
    }

    pub fn norm(&self) -> f64 {
        self.terms.values().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}
