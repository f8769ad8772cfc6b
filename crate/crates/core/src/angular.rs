//! Clebsch-Gordan coefficients and sequentially coupled total-spin bases of
//! qubit registers, with product-state decomposition across two registers.
//!
//! Computational convention throughout: bit 0 is spin up (m = +1/2), bit 1
//! spin down, and site 1 occupies the most significant bit of the state
//! index.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::CVec;

/// Largest register the coupled-basis builder accepts.
pub const COUPLED_BASIS_LIMIT: u32 = 8;

/// Half-integer stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Half(i32);

impl Half {
    pub const ZERO: Half = Half(0);
    pub const HALF: Half = Half(1);
    pub const ONE: Half = Half(2);

    pub fn from_twice(twice: i32) -> Self {
        Half(twice)
    }

    pub fn from_int(v: i32) -> Self {
        Half(2 * v)
    }

    pub fn twice(self) -> i32 {
        self.0
    }

    pub fn abs(self) -> Half {
        Half(self.0.abs())
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    /// J(J+1) as a float.
    pub fn casimir(self) -> f64 {
        let j = self.0 as f64 / 2.0;
        j * (j + 1.0)
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl Add for Half {
    type Output = Half;
    fn add(self, rhs: Half) -> Half {
        Half(self.0 + rhs.0)
    }
}

impl Sub for Half {
    type Output = Half;
    fn sub(self, rhs: Half) -> Half {
        Half(self.0 - rhs.0)
    }
}

impl Neg for Half {
    type Output = Half;
    fn neg(self) -> Half {
        Half(-self.0)
    }
}

impl fmt::Display for Half {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

fn factorial(k: i32) -> f64 {
    // exact through 18!; beyond that the usual gradual f64 rounding, which
    // is all these coefficient formulas can carry anyway
    (1..=k as i64).map(|v| v as f64).product()
}

/// Condon-Shortley Clebsch-Gordan coefficient `<j1 m1; j2 m2 | j m>`.
///
/// Inadmissible quantum numbers (wrong parity, violated triangle rule,
/// mismatched projection) give 0 by contract.
pub fn clebsch_gordan(j1: Half, m1: Half, j2: Half, m2: Half, j: Half, m: Half) -> f64 {
    if m1 + m2 != m {
        return 0.0;
    }
    // projections must match their spins in parity and bound
    for (jj, mm) in [(j1, m1), (j2, m2), (j, m)] {
        if jj.is_negative() || mm.abs() > jj || (jj.twice() - mm.twice()) % 2 != 0 {
            return 0.0;
        }
    }
    if j < (j1 - j2).abs() || j > j1 + j2 || (j1 + j2 - j).twice() % 2 != 0 {
        return 0.0;
    }

    // all of these are integers once admissibility holds
    let int = |h: Half| -> i32 {
        debug_assert_eq!(h.twice() % 2, 0);
        h.twice() / 2
    };
    let a = int(j1 + j2 - j);
    let b = int(j1 - j2 + j);
    let c = int(-j1 + j2 + j);
    let d = int(j1 + j2 + j) + 1;
    let prefactor = ((j.twice() + 1) as f64) * factorial(a) * factorial(b) * factorial(c)
        / factorial(d);

    let weights = factorial(int(j1 + m1))
        * factorial(int(j1 - m1))
        * factorial(int(j2 + m2))
        * factorial(int(j2 - m2))
        * factorial(int(j + m))
        * factorial(int(j - m));

    let k_min = 0
        .max(-int(j - j2 + m1))
        .max(-int(j - j1 - m2));
    let k_max = a.min(int(j1 - m1)).min(int(j2 + m2));
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let denom = factorial(k)
            * factorial(a - k)
            * factorial(int(j1 - m1) - k)
            * factorial(int(j2 + m2) - k)
            * factorial(int(j - j2 + m1) + k)
            * factorial(int(j - j1 - m2) + k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign / denom;
    }
    (prefactor * weights).sqrt() * sum
}

/// A total-angular-momentum basis vector of an N-qubit register.
///
/// `path` records the intermediate total spins of the sequential
/// left-to-right coupling; states produced by [`decompose_product`] instead
/// carry the concatenated paths of the two joined registers, and only
/// sequentially built states satisfy the step-by-half admissibility rule.
#[derive(Debug, Clone)]
pub struct CoupledSpinState {
    n_spins: u32,
    path: Vec<Half>,
    j: Half,
    jz: Half,
    amplitudes: CVec,
}

impl CoupledSpinState {
    pub fn n_spins(&self) -> u32 {
        self.n_spins
    }

    pub fn path(&self) -> &[Half] {
        &self.path
    }

    pub fn j(&self) -> Half {
        self.j
    }

    pub fn jz(&self) -> Half {
        self.jz
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }
}

/// Enumerate admissible coupling paths of length `n`, sorted descending
/// lexicographically; the position in this list is the state's principal
/// index.
fn coupling_paths(n: u32) -> Vec<Vec<Half>> {
    let mut paths: Vec<Vec<Half>> = vec![vec![Half::HALF]];
    for _ in 1..n {
        let mut next = Vec::new();
        for p in &paths {
            let last = *p.last().unwrap();
            for step in [Half::HALF, -Half::HALF] {
                let j = last + step;
                if !j.is_negative() {
                    let mut q = p.clone();
                    q.push(j);
                    next.push(q);
                }
            }
        }
        paths = next;
    }
    paths.sort_by(|a, b| b.cmp(a));
    paths
}

/// Real amplitude vector of the sequentially coupled state `|path, m>`,
/// with raw Condon-Shortley phases (no sign normalization).
fn raw_state(path: &[Half], m: Half, cache: &mut HashMap<(Vec<i32>, i32), Vec<f64>>) -> Vec<f64> {
    let key = (path.iter().map(|h| h.twice()).collect::<Vec<_>>(), m.twice());
    if let Some(v) = cache.get(&key) {
        return v.clone();
    }
    let n = path.len();
    let j = *path.last().unwrap();
    let out = if n == 1 {
        let mut v = vec![0.0; 2];
        if m == Half::HALF {
            v[0] = 1.0;
        } else {
            v[1] = 1.0;
        }
        v
    } else {
        let prev_j = path[n - 2];
        let mut v = vec![0.0; 1 << n];
        for (mu, bit) in [(Half::HALF, 0usize), (-Half::HALF, 1usize)] {
            let m_prev = m - mu;
            if m_prev.abs() > prev_j {
                continue;
            }
            let cg = clebsch_gordan(prev_j, m_prev, Half::HALF, mu, j, m);
            if cg == 0.0 {
                continue;
            }
            let sub = raw_state(&path[..n - 1], m_prev, cache);
            for (idx, &amp) in sub.iter().enumerate() {
                v[(idx << 1) | bit] += cg * amp;
            }
        }
        v
    };
    cache.insert(key, out.clone());
    out
}

/// Raw multiplet of one coupling path: the 2J+1 states ordered by m
/// descending (highest weight first), phases left as the recursion gives.
pub(crate) fn raw_multiplet(path: &[Half]) -> Vec<(Half, Vec<f64>)> {
    let j = *path.last().unwrap();
    let mut cache = HashMap::new();
    let mut out = Vec::new();
    let mut m = j;
    loop {
        out.push((m, raw_state(path, m, &mut cache)));
        if m == -j {
            break;
        }
        m = m - Half::ONE;
    }
    out
}

pub(crate) fn to_cvec(v: &[f64]) -> CVec {
    CVec::from_iterator(v.len(), v.iter().map(|&x| C64::new(x, 0.0)))
}

fn sign_fix(mut v: CVec) -> CVec {
    if let Some(first) = v.iter().find(|a| a.norm() > 1e-12) {
        if first.re < 0.0 {
            v = -v;
        }
    }
    v
}

/// Complete orthonormal total-spin basis of an `n`-qubit register, grouped
/// by coupling path and ordered by (path rank, m descending). Every state is
/// rephased so its first nonzero amplitude is real positive.
pub fn coupled_basis(n: u32) -> Result<Vec<CoupledSpinState>> {
    if !(1..=COUPLED_BASIS_LIMIT).contains(&n) {
        return Err(Error::DenseLimit { n, limit: COUPLED_BASIS_LIMIT });
    }
    let mut out = Vec::new();
    for path in coupling_paths(n) {
        let j = *path.last().unwrap();
        for (m, amps) in raw_multiplet(&path) {
            out.push(CoupledSpinState {
                n_spins: n,
                path: path.clone(),
                j,
                jz: m,
                amplitudes: sign_fix(to_cvec(&amps)),
            });
        }
    }
    Ok(out)
}

/// Number of coupling paths reaching total spin `j` on `n` qubits
/// (ballot-number count); a counting oracle for tests and reports.
pub fn path_multiplicity(n: u32, j: Half) -> usize {
    let binom = |n: i64, k: i64| -> i64 {
        if k < 0 || k > n {
            return 0;
        }
        let mut acc = 1i64;
        for i in 0..k {
            acc = acc * (n - i) / (i + 1);
        }
        acc
    };
    let down = (n as i64 - j.twice() as i64) / 2;
    (binom(n as i64, down) - binom(n as i64, down - 1)).max(0) as usize
}

/// Expand the product of two coupled states over total-spin states of the
/// joined register. Coefficients are Clebsch-Gordan values up to the global
/// sign convention each state carries; they are returned as exact overlaps.
pub fn decompose_product(
    left: &CoupledSpinState,
    right: &CoupledSpinState,
) -> Result<Vec<(f64, CoupledSpinState)>> {
    let n = left.n_spins + right.n_spins;
    if n > COUPLED_BASIS_LIMIT {
        return Err(Error::DenseLimit { n, limit: COUPLED_BASIS_LIMIT });
    }
    let (jl, jr) = (left.j, right.j);
    let m = left.jz + right.jz;
    let left_multiplet = raw_multiplet(&left.path);
    let right_multiplet = raw_multiplet(&right.path);
    let product = kron_real(
        &left_multiplet
            .iter()
            .find(|(mm, _)| *mm == left.jz)
            .expect("projection present")
            .1,
        &right_multiplet
            .iter()
            .find(|(mm, _)| *mm == right.jz)
            .expect("projection present")
            .1,
    );
    // undo the sign normalization of the inputs so overlaps match them
    let mut product = to_cvec(&product);
    let left_sign = state_sign(&left_multiplet, left.jz, &left.amplitudes);
    let right_sign = state_sign(&right_multiplet, right.jz, &right.amplitudes);
    product *= C64::new(left_sign * right_sign, 0.0);

    let mut out = Vec::new();
    let mut j = jl + jr;
    loop {
        if !(m.abs() > j) {
            // joined total-spin state of the two registers at (j, m)
            let mut amps = vec![0.0; 1 << n];
            for (ml, vl) in &left_multiplet {
                let mr = m - *ml;
                if mr.abs() > jr {
                    continue;
                }
                let cg = clebsch_gordan(jl, *ml, jr, mr, j, m);
                if cg == 0.0 {
                    continue;
                }
                let vr = &right_multiplet.iter().find(|(mm, _)| *mm == mr).unwrap().1;
                let prod = kron_real(vl, vr);
                for (idx, &a) in prod.iter().enumerate() {
                    amps[idx] += cg * a;
                }
            }
            let joined = sign_fix(to_cvec(&amps));
            let coeff = joined.dotc(&product).re;
            if coeff.abs() > 1e-12 {
                let mut path = left.path.clone();
                path.extend_from_slice(&right.path);
                out.push((
                    coeff,
                    CoupledSpinState {
                        n_spins: n,
                        path,
                        j,
                        jz: m,
                        amplitudes: joined,
                    },
                ));
            }
        }
        if j == (jl - jr).abs() {
            break;
        }
        j = j - Half::ONE;
    }
    Ok(out)
}

fn state_sign(multiplet: &[(Half, Vec<f64>)], m: Half, fixed: &CVec) -> f64 {
    let raw = &multiplet.iter().find(|(mm, _)| *mm == m).unwrap().1;
    let raw = to_cvec(raw);
    if (&raw - fixed).norm() < 1e-9 {
        1.0
    } else {
        -1.0
    }
}

fn kron_real(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() * b.len()];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}
