//! Decomposition of a closed Lie algebra into isotypic sectors, commutant
//! computation, su(n) tests on multiplicity spaces, and encoded-code
//! extraction.
//!
//! The commutant is handled in Pauli coordinates, where the adjoint action
//! of a generator is sparse and real. Random commutant elements are drawn by
//! projecting a random vector onto the kernel of the stacked adjoint action
//! with conjugate gradients, which scales far beyond the point where a dense
//! nullspace is affordable.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lie::LieBasis;
use crate::linalg::{self, CMat, CVec};
use crate::pauli::{pauli_mul, HermitianOp, PauliString, Phase};

/// Dense-matrix ceiling for decomposition work (state dimension 2^8 = 256).
pub const DECOMP_QUBIT_LIMIT: u32 = 8;

/// Ceiling for the explicit commutant basis (operator dimension 4^5 = 1024).
pub const COMMUTANT_BASIS_QUBIT_LIMIT: u32 = 5;

/// Eigenvalue grid used when grouping commutant spectra into cells.
pub const EIGENVALUE_GRID: f64 = 1e-8;

// ---------------------------------------------------------------------------
// logical codes

/// Interaction family a code is tailored to; used when conjoining blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeFamily {
    Exchange,
    Xy,
    Generic,
}

/// An encoded qudit: `dim_L` orthonormal codewords over the computational
/// basis of `n` physical qubits.
#[derive(Debug, Clone)]
pub struct LogicalCode {
    n: u32,
    family: CodeFamily,
    label: String,
    codewords: Vec<CVec>,
}

impl LogicalCode {
    pub fn new(
        n: u32,
        family: CodeFamily,
        label: impl Into<String>,
        codewords: Vec<CVec>,
    ) -> Result<Self> {
        let dim = 1usize << n;
        if codewords.is_empty() {
            return Err(Error::Invalid("code needs at least one codeword".into()));
        }
        for w in &codewords {
            if w.len() != dim {
                return Err(Error::DimMismatch { left: w.len(), right: dim });
            }
        }
        for i in 0..codewords.len() {
            for j in 0..=i {
                let g = codewords[i].dotc(&codewords[j]);
                let expect = if i == j { 1.0 } else { 0.0 };
                if (g - C64::new(expect, 0.0)).norm() > 1e-9 {
                    return Err(Error::Invalid(format!(
                        "codewords not orthonormal: <{i}|{j}> = {g}"
                    )));
                }
            }
        }
        Ok(LogicalCode { n, family, label: label.into(), codewords })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn dim_l(&self) -> usize {
        self.codewords.len()
    }

    pub fn family(&self) -> CodeFamily {
        self.family
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn codeword(&self, i: usize) -> &CVec {
        &self.codewords[i]
    }

    pub fn codewords(&self) -> &[CVec] {
        &self.codewords
    }

    /// 2^n x dim_L isometry whose columns are the codewords.
    pub fn isometry(&self) -> CMat {
        let mut p = CMat::zeros(1 << self.n, self.dim_l());
        for (k, w) in self.codewords.iter().enumerate() {
            p.set_column(k, w);
        }
        p
    }
}

/// Compression of `op` onto a code: returns `P^dag op P` together with the
/// leakage norm `||(1 - P P^dag) op P||`. Leakage is reported, not an error.
pub fn restrict(op: &HermitianOp, code: &LogicalCode) -> Result<(CMat, f64)> {
    if op.n() != code.n() {
        return Err(Error::LengthMismatch { left: op.n(), right: code.n() });
    }
    let m = op.to_matrix()?;
    let p = code.isometry();
    let mp = &m * &p;
    let restricted = p.adjoint() * &mp;
    let leaked = &mp - &p * &restricted;
    Ok((restricted, leaked.norm()))
}

// ---------------------------------------------------------------------------
// adjoint action in Pauli coordinates

/// out += A_g x, where A_g is the matrix of X -> i[g, X] over the real
/// coefficient space indexed by `PauliString::index`.
fn apply_adjoint(g: &HermitianOp, n: u32, x: &[f64], out: &mut [f64]) {
    for (q_idx, &xq) in x.iter().enumerate() {
        if xq == 0.0 {
            continue;
        }
        let q = PauliString::from_index(n, q_idx);
        for (p, &cp) in g.terms() {
            if p.commutes_with(&q) {
                continue;
            }
            let (phase, r) = pauli_mul(p, &q).expect("lengths match");
            let sign = match Phase::from_exponent(phase.exponent() + 1) {
                Phase::PlusOne => 1.0,
                Phase::MinusOne => -1.0,
                _ => unreachable!(),
            };
            out[r.index()] += 2.0 * sign * cp * xq;
        }
    }
}

/// out += A_g^T z.
fn apply_adjoint_transpose(g: &HermitianOp, n: u32, z: &[f64], out: &mut [f64]) {
    let dim = out.len();
    for q_idx in 0..dim {
        let q = PauliString::from_index(n, q_idx);
        let mut acc = 0.0;
        for (p, &cp) in g.terms() {
            if p.commutes_with(&q) {
                continue;
            }
            let (phase, r) = pauli_mul(p, &q).expect("lengths match");
            let sign = match Phase::from_exponent(phase.exponent() + 1) {
                Phase::PlusOne => 1.0,
                Phase::MinusOne => -1.0,
                _ => unreachable!(),
            };
            acc += 2.0 * sign * cp * z[r.index()];
        }
        out[q_idx] += acc;
    }
}

fn normalized_generators(generators: &[HermitianOp]) -> Result<(u32, Vec<HermitianOp>)> {
    if generators.is_empty() {
        return Err(Error::EmptyGenerators);
    }
    let n = generators[0].n();
    let mut gens = Vec::new();
    for g in generators {
        if g.n() != n {
            return Err(Error::LengthMismatch { left: n, right: g.n() });
        }
        let norm = g.hs_norm();
        if norm > 0.0 {
            gens.push(g.scaled(1.0 / norm));
        }
    }
    Ok((n, gens))
}

/// Gram operator x -> sum_g A_g^T A_g x over the Pauli coefficient space.
fn apply_gram(gens: &[HermitianOp], n: u32, x: &[f64], scratch: &mut [f64], out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for g in gens {
        scratch.iter_mut().for_each(|v| *v = 0.0);
        apply_adjoint(g, n, x, scratch);
        apply_adjoint_transpose(g, n, scratch, out);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthonormal basis of all Hermitian operators commuting with every
/// generator: the nullspace of the stacked adjoint action, obtained from a
/// dense eigensolve of its Gram matrix.
pub fn commutant(generators: &[HermitianOp]) -> Result<Vec<HermitianOp>> {
    let (n, gens) = normalized_generators(generators)?;
    if n > COMMUTANT_BASIS_QUBIT_LIMIT {
        return Err(Error::DenseLimit { n, limit: COMMUTANT_BASIS_QUBIT_LIMIT });
    }
    let dim = 1usize << (2 * n);
    let mut gram = DMatrix::<f64>::zeros(dim, dim);
    // scatter columns into row lists, then accumulate row outer products
    for g in &gens {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
        for q_idx in 0..dim {
            let q = PauliString::from_index(n, q_idx);
            for (p, &cp) in g.terms() {
                if p.commutes_with(&q) {
                    continue;
                }
                let (phase, r) = pauli_mul(p, &q)?;
                let sign = match Phase::from_exponent(phase.exponent() + 1) {
                    Phase::PlusOne => 1.0,
                    Phase::MinusOne => -1.0,
                    _ => unreachable!(),
                };
                rows[r.index()].push((q_idx, 2.0 * sign * cp));
            }
        }
        for entries in &rows {
            for &(q1, w1) in entries {
                for &(q2, w2) in entries {
                    gram[(q1, q2)] += w1 * w2;
                }
            }
        }
    }
    let (vals, vecs) = linalg::eigh_real(&gram);
    let mut basis = Vec::new();
    for (k, &lambda) in vals.iter().enumerate() {
        if lambda > 1e-8 {
            break;
        }
        let col = vecs.column(k);
        let mut op = HermitianOp::zero(n);
        // orient deterministically: first meaningful coefficient positive
        let flip = col.iter().find(|v| v.abs() > 1e-9).map_or(1.0, |v| v.signum());
        for (idx, &v) in col.iter().enumerate() {
            if v.abs() >= 1e-12 {
                op.add_term(flip * v, PauliString::from_index(n, idx));
            }
        }
        basis.push(op);
    }
    Ok(basis)
}

/// Random Hermitian element of the commutant of `generators`, drawn by
/// projecting a random Gaussian coefficient vector onto the kernel of the
/// stacked adjoint action (conjugate gradients on its Gram operator).
pub fn commutant_sample(generators: &[HermitianOp], rng: &mut ChaCha8Rng) -> Result<HermitianOp> {
    let (n, gens) = normalized_generators(generators)?;
    if n > DECOMP_QUBIT_LIMIT {
        return Err(Error::DenseLimit { n, limit: DECOMP_QUBIT_LIMIT });
    }
    let dim = 1usize << (2 * n);
    let mut x0 = vec![0.0; dim];
    for v in x0.iter_mut() {
        *v = rng.gen_range(-1.0..1.0);
    }

    let mut scratch = vec![0.0; dim];
    let mut kernel = x0;
    // two projection sweeps wash out the range component left by CG rounding
    for _ in 0..2 {
        let mut b = vec![0.0; dim];
        apply_gram(&gens, n, &kernel, &mut scratch, &mut b);
        let z = cg_solve(&gens, n, &b, 1e-14, 20 * dim.max(100))?;
        for i in 0..dim {
            kernel[i] -= z[i];
        }
    }
    let norm = dot(&kernel, &kernel).sqrt();
    if norm < 1e-8 {
        return Err(Error::Convergence("kernel projection collapsed to zero".into()));
    }
    let mut check = vec![0.0; dim];
    apply_gram(&gens, n, &kernel, &mut scratch, &mut check);
    let resid = dot(&kernel, &check).max(0.0).sqrt() / norm;
    if resid > 1e-9 {
        return Err(Error::Convergence(format!(
            "commutant projection residual {resid:.3e}"
        )));
    }
    let mut op = HermitianOp::zero(n);
    for (idx, &v) in kernel.iter().enumerate() {
        let c = v / norm;
        if c.abs() >= 1e-12 {
            op.add_term(c, PauliString::from_index(n, idx));
        }
    }
    Ok(op)
}

/// Conjugate gradients for the consistent singular system `M z = b` with
/// `b` in the range of the PSD Gram operator `M`.
fn cg_solve(
    gens: &[HermitianOp],
    n: u32,
    b: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let dim = b.len();
    let b_norm = dot(b, b).sqrt();
    let mut z = vec![0.0; dim];
    if b_norm == 0.0 {
        return Ok(z);
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut scratch = vec![0.0; dim];
    let mut mp = vec![0.0; dim];
    let mut rs = dot(&r, &r);
    for _ in 0..max_iter {
        apply_gram(gens, n, &p, &mut scratch, &mut mp);
        let denom = dot(&p, &mp);
        if denom <= 0.0 {
            break;
        }
        let alpha = rs / denom;
        for i in 0..dim {
            z[i] += alpha * p[i];
            r[i] -= alpha * mp[i];
        }
        let rs_new = dot(&r, &r);
        if rs_new.sqrt() <= rel_tol * b_norm {
            return Ok(z);
        }
        let beta = rs_new / rs;
        rs = rs_new;
        for i in 0..dim {
            p[i] = r[i] + beta * p[i];
        }
    }
    // accept whatever residual is left; the caller re-verifies the kernel
    Ok(z)
}

/// Orthonormal basis of the associative algebra generated by `seeds` under
/// complex linear combination and operator products. Every word in the
/// seeds is a right-extension of a shorter word, so the worklist only
/// multiplies basis elements by seeds.
pub fn associative_closure(
    seeds: &[crate::pauli::ComplexOp],
    max_dim: usize,
) -> Result<Vec<crate::pauli::ComplexOp>> {
    use crate::pauli::ComplexOp;
    if seeds.is_empty() {
        return Err(Error::EmptyGenerators);
    }
    let n = seeds[0].n();
    for s in seeds {
        if s.n() != n {
            return Err(Error::LengthMismatch { left: n, right: s.n() });
        }
    }
    let orthogonalize = |mut op: ComplexOp, basis: &[ComplexOp]| -> Result<(ComplexOp, f64)> {
        for _ in 0..2 {
            for b in basis {
                let c = b.inner(&op)?;
                if c.norm() > 0.0 {
                    op.add_scaled(-c, b);
                }
            }
        }
        let norm = op.norm();
        Ok((op, norm))
    };
    let mut basis: Vec<ComplexOp> = Vec::new();
    for s in seeds {
        let (res, norm) = orthogonalize(s.clone(), &basis)?;
        if norm > 1e-9 && basis.len() < max_dim {
            basis.push(res.scaled(C64::new(1.0 / norm, 0.0)));
        }
    }
    let mut next = 0usize;
    while next < basis.len() {
        let element = basis[next].clone();
        for s in seeds {
            if basis.len() >= max_dim {
                return Err(Error::Invalid(format!(
                    "associative closure exceeded the {max_dim} cap"
                )));
            }
            let candidate = element.mul(s)?;
            let (res, norm) = orthogonalize(candidate, &basis)?;
            if norm > 1e-9 {
                basis.push(res.scaled(C64::new(1.0 / norm, 0.0)));
            }
        }
        next += 1;
    }
    Ok(basis)
}

// ---------------------------------------------------------------------------
// isotypic decomposition

/// One isotypic block of a decomposition: the restricted algebra acts
/// irreducibly on an `n_j`-dimensional multiplicity index and trivially on a
/// `d_j`-fold degeneracy index.
#[derive(Debug, Clone)]
pub struct IsotypicSector {
    n_j: usize,
    d_j: usize,
    /// 2^n x (n_j * d_j); column `j * n_j + i` holds grid vector (i, j).
    grid: CMat,
    su: bool,
    max_leakage: f64,
    factor_residual: f64,
}

impl IsotypicSector {
    pub fn n_j(&self) -> usize {
        self.n_j
    }

    pub fn d_j(&self) -> usize {
        self.d_j
    }

    pub fn dim(&self) -> usize {
        self.n_j * self.d_j
    }

    /// Whether the restricted algebra contains su(n_j) on the multiplicity
    /// space. Vacuously true for n_j = 1.
    pub fn su_verdict(&self) -> bool {
        self.su
    }

    pub fn subspace(&self) -> &CMat {
        &self.grid
    }

    /// Grid vector at multiplicity index `i`, degeneracy index `j`.
    pub fn basis_vector(&self, i: usize, j: usize) -> CVec {
        CVec::from(self.grid.column(j * self.n_j + i))
    }

    /// Largest generator leakage out of the sector subspace.
    pub fn max_leakage(&self) -> f64 {
        self.max_leakage
    }

    /// Largest deviation of a restricted generator from the
    /// (multiplicity operator) x (identity) tensor form.
    pub fn factor_residual(&self) -> f64 {
        self.factor_residual
    }
}

/// Codewords are the multiplicity-basis vectors at one fixed degeneracy
/// index; each is rephased so its first nonzero amplitude is real positive.
pub fn extract_encoding(sector: &IsotypicSector, degeneracy_index: usize) -> Result<LogicalCode> {
    if degeneracy_index >= sector.d_j {
        return Err(Error::IndexOutOfRange { index: degeneracy_index, limit: sector.d_j });
    }
    let dim = sector.grid.nrows();
    let n = dim.trailing_zeros();
    let mut codewords = Vec::new();
    for i in 0..sector.n_j {
        let mut v = sector.basis_vector(i, degeneracy_index);
        linalg::fix_vector_phase(&mut v, 1e-9);
        codewords.push(v);
    }
    LogicalCode::new(
        n,
        CodeFamily::Generic,
        format!("sector[{}x{}]:deg{}", sector.n_j, sector.d_j, degeneracy_index),
        codewords,
    )
}

/// Split the state space into isotypic sectors of the closed algebra.
///
/// Two independent random commutant elements are drawn from `seed`; their
/// eigenspace partitions are intersected (cells overlap exactly when they sit
/// in the same sector, since sectors are commutant-invariant) and the cells
/// of each sector are aligned into a multiplicity x degeneracy grid through
/// unitary intertwiners.
pub fn isotypic_decompose(basis: &LieBasis, seed: u64) -> Result<Vec<IsotypicSector>> {
    let n = basis.n();
    if n > DECOMP_QUBIT_LIMIT {
        return Err(Error::DenseLimit { n, limit: DECOMP_QUBIT_LIMIT });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c1 = commutant_sample(basis.generators(), &mut rng)?;
    let c2 = commutant_sample(basis.generators(), &mut rng)?;

    let dim = 1usize << n;
    let m1 = c1.to_matrix()?;
    let m2 = c2.to_matrix()?;
    let (_, vecs1, cells1) = linalg::eigh_clustered(&m1, EIGENVALUE_GRID);
    let (_, vecs2, cells2) = linalg::eigh_clustered(&m2, EIGENVALUE_GRID);

    let cell_matrix = |vecs: &CMat, cell: &[usize]| {
        let mut m = CMat::zeros(dim, cell.len());
        for (k, &i) in cell.iter().enumerate() {
            m.set_column(k, &vecs.column(i));
        }
        m
    };

    // union-find over first-draw cells, joined through second-draw overlaps
    let mut parent: Vec<usize> = (0..cells1.len()).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut i = i;
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let u1: Vec<CMat> = cells1.iter().map(|c| cell_matrix(&vecs1, c)).collect();
    for cell2 in &cells2 {
        let w = cell_matrix(&vecs2, cell2);
        let mut touched: Option<usize> = None;
        for (a, ua) in u1.iter().enumerate() {
            let overlap = (ua.adjoint() * &w).norm();
            if overlap > 1e-6 {
                match touched {
                    None => touched = Some(find(&mut parent, a)),
                    Some(root) => {
                        let ra = find(&mut parent, a);
                        parent[ra] = root;
                    }
                }
            }
        }
    }

    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut roots: Vec<usize> = Vec::new();
    for a in 0..cells1.len() {
        let r = find(&mut parent, a);
        match roots.iter().position(|&x| x == r) {
            Some(k) => components[k].push(a),
            None => {
                roots.push(r);
                components.push(vec![a]);
            }
        }
    }

    let gen_mats: Vec<CMat> = basis
        .generators()
        .iter()
        .map(|g| g.to_matrix())
        .collect::<Result<_>>()?;

    // when the collective Z operator commutes with every generator, use it
    // to pin the degeneracy basis inside each sector; sectors then slice
    // along its spectrum instead of an arbitrary commutant direction
    let canonical = {
        let mut cz = HermitianOp::zero(n);
        for site in 1..=n {
            cz.add_term(1.0, PauliString::single(n, site, crate::pauli::Letter::Z)?);
        }
        let in_commutant = basis
            .generators()
            .iter()
            .filter(|g| !g.is_zero())
            .map(|g| cz.bracket(g).map(|b| b.hs_norm() / g.hs_norm()))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .all(|r| r < 1e-12);
        if in_commutant {
            Some(cz.to_matrix()?)
        } else {
            None
        }
    };

    let mut sectors = Vec::new();
    for comp in &components {
        let n_j = cells1[comp[0]].len();
        for &a in comp {
            if cells1[a].len() != n_j {
                return Err(Error::EigenGrouping(format!(
                    "cells of unequal dimension {} vs {} grouped together; \
                     eigenvalue gap near the {} grid is degenerate",
                    cells1[a].len(),
                    n_j,
                    EIGENVALUE_GRID
                )));
            }
        }
        let d_j = comp.len();
        let copies: Vec<&CMat> = comp.iter().map(|&a| &u1[a]).collect();

        // restrict generators to each copy; copies are commutant-invariant
        let restricted: Vec<Vec<CMat>> = copies
            .iter()
            .map(|u| gen_mats.iter().map(|g| u.adjoint() * g * *u).collect())
            .collect();

        // intertwiner from copy 0 to copy k, unique up to a complex scalar
        let mut grid = CMat::zeros(dim, n_j * d_j);
        for i in 0..n_j {
            grid.set_column(i, &copies[0].column(i));
        }
        for k in 1..d_j {
            let t = solve_intertwiner(&restricted[0], &restricted[k])?;
            let aligned = copies[k] * &t;
            for i in 0..n_j {
                grid.set_column(k * n_j + i, &aligned.column(i));
            }
        }

        // invariance checks on the assembled sector
        let sector_basis = {
            let mut m = CMat::zeros(dim, n_j * d_j);
            m.copy_from(&grid);
            m
        };
        let mut max_leakage: f64 = 0.0;
        let mut factor_residual: f64 = 0.0;
        let m0: Vec<CMat> = restricted[0].clone();
        for (gi, g) in gen_mats.iter().enumerate() {
            let gv = g * &sector_basis;
            let inside = sector_basis.adjoint() * &gv;
            let leak = (&gv - &sector_basis * &inside).norm();
            max_leakage = max_leakage.max(leak);
            // expected block-diagonal form: M_g on every aligned copy
            for k in 0..d_j {
                let block = inside.view((k * n_j, k * n_j), (n_j, n_j)).clone_owned();
                factor_residual = factor_residual.max((block - &m0[gi]).norm());
                for l in 0..d_j {
                    if l != k {
                        let off = inside.view((k * n_j, l * n_j), (n_j, n_j)).norm();
                        factor_residual = factor_residual.max(off);
                    }
                }
            }
        }
        if max_leakage > 1e-6 || factor_residual > 1e-6 {
            return Err(Error::EigenGrouping(format!(
                "sector validation failed: leakage {max_leakage:.3e}, \
                 tensor-form residual {factor_residual:.3e}"
            )));
        }

        if let Some(cz) = canonical.as_ref() {
            align_degeneracy_basis(&mut grid, n_j, d_j, cz);
        }

        let mut sector = IsotypicSector {
            n_j,
            d_j,
            grid,
            su: false,
            max_leakage,
            factor_residual,
        };
        sector.su = su_verdict(&sector, basis)?;
        sectors.push(sector);
    }

    let total: usize = sectors.iter().map(|s| s.dim()).sum();
    if total != dim {
        return Err(Error::EigenGrouping(format!(
            "sectors cover dimension {total} of {dim}"
        )));
    }
    sectors.sort_by_key(|s| (s.d_j, s.n_j));
    Ok(sectors)
}

/// Rotate the degeneracy index of a sector grid so the slices diagonalize
/// the restriction of a canonical commutant element (eigenvalues
/// descending). Commutant elements act on the degeneracy factor alone, so
/// this preserves the (multiplicity operator) x (identity) structure.
fn align_degeneracy_basis(grid: &mut CMat, n_j: usize, d_j: usize, canonical: &CMat) {
    if d_j < 2 {
        return;
    }
    let mut k = CMat::zeros(d_j, d_j);
    for a in 0..d_j {
        for b in 0..d_j {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..n_j {
                let va = grid.column(a * n_j + i);
                let vb = grid.column(b * n_j + i);
                acc += va.dotc(&(canonical * vb));
            }
            k[(a, b)] = acc / C64::new(n_j as f64, 0.0);
        }
    }
    let (vals, mut vecs) = linalg::eigh(&k);
    let _ = vals;
    // descending order, deterministic column phases
    let order: Vec<usize> = (0..d_j).rev().collect();
    for c in 0..d_j {
        let mut col = CVec::from(vecs.column(c));
        linalg::fix_vector_phase(&mut col, 1e-9);
        vecs.set_column(c, &col);
    }
    let mut out = CMat::zeros(grid.nrows(), grid.ncols());
    for (new_k, &old_pos) in order.iter().enumerate() {
        for i in 0..n_j {
            let mut acc = CVec::zeros(grid.nrows());
            for a in 0..d_j {
                acc += CVec::from(grid.column(a * n_j + i)) * vecs[(a, old_pos)];
            }
            out.set_column(new_k * n_j + i, &acc);
        }
    }
    grid.copy_from(&out);
}

/// Solve `M_k T = T M_0` across all restricted generators and rescale the
/// kernel element to a unitary with a deterministic phase.
fn solve_intertwiner(m0: &[CMat], mk: &[CMat]) -> Result<CMat> {
    let n = m0[0].nrows();
    let unknowns = 2 * n * n;
    // real basis of candidate T: E_ab and i E_ab
    let embed = |idx: usize| -> CMat {
        let mut t = CMat::zeros(n, n);
        let (ab, im) = (idx / 2, idx % 2 == 1);
        let (a, b) = (ab / n, ab % n);
        t[(a, b)] = if im { C64::new(0.0, 1.0) } else { C64::new(1.0, 0.0) };
        t
    };
    let apply = |t: &CMat| -> Vec<CMat> {
        m0.iter().zip(mk).map(|(a0, ak)| ak * t - t * a0).collect()
    };
    let images: Vec<Vec<CMat>> = (0..unknowns).map(|i| apply(&embed(i))).collect();
    let mut gram = DMatrix::<f64>::zeros(unknowns, unknowns);
    for i in 0..unknowns {
        for j in 0..=i {
            let mut acc = 0.0;
            for (mi, mj) in images[i].iter().zip(&images[j]) {
                acc += mi.iter().zip(mj.iter()).map(|(x, y)| (x.conj() * y).re).sum::<f64>();
            }
            gram[(i, j)] = acc;
            gram[(j, i)] = acc;
        }
    }
    let (vals, vecs) = linalg::eigh_real(&gram);
    if vals[0] > 1e-8 {
        return Err(Error::EigenGrouping(format!(
            "no intertwiner between grouped copies (smallest residual {:.3e})",
            vals[0]
        )));
    }
    let mut t = CMat::zeros(n, n);
    for (i, &c) in vecs.column(0).iter().enumerate() {
        t += embed(i) * C64::new(c, 0.0);
    }
    let scale = (t.adjoint() * &t).trace().re / n as f64;
    if scale < 1e-12 {
        return Err(Error::EigenGrouping("intertwiner collapsed to zero".into()));
    }
    t /= C64::new(scale.sqrt(), 0.0);
    let defect = (t.adjoint() * &t - CMat::identity(n, n)).norm();
    if defect > 1e-6 {
        return Err(Error::EigenGrouping(format!(
            "intertwiner is not unitary (defect {defect:.3e})"
        )));
    }
    // deterministic phase: first nonzero entry real positive
    'outer: for a in 0..n {
        for b in 0..n {
            let v = t[(a, b)];
            if v.norm() > 1e-9 {
                let phase = (v / C64::new(v.norm(), 0.0)).conj();
                t *= phase;
                break 'outer;
            }
        }
    }
    Ok(t)
}

/// True iff the restricted algebra on the sector's multiplicity space has
/// real dimension at least n_j^2 - 1 after removing traces and acts
/// irreducibly (its matrix commutant is the scalars).
pub fn su_verdict(sector: &IsotypicSector, basis: &LieBasis) -> Result<bool> {
    let n_j = sector.n_j;
    let dim = sector.grid.nrows();
    let mut copy0 = CMat::zeros(dim, n_j);
    for i in 0..n_j {
        copy0.set_column(i, &sector.grid.column(i));
    }
    let restricted: Vec<CMat> = basis
        .elements()
        .iter()
        .map(|e| e.to_matrix().map(|m| copy0.adjoint() * m * &copy0))
        .collect::<Result<_>>()?;

    // span dimension of the traceless restrictions
    let traceless: Vec<CMat> = restricted
        .iter()
        .map(|r| {
            let tr = r.trace() / C64::new(n_j as f64, 0.0);
            r - CMat::identity(n_j, n_j) * tr
        })
        .collect();
    let m = traceless.len();
    let span_dim = if m == 0 {
        0
    } else {
        let mut gram = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            for j in 0..=i {
                let v = (&traceless[i] * &traceless[j]).trace().re;
                gram[(i, j)] = v;
                gram[(j, i)] = v;
            }
        }
        let (vals, _) = linalg::eigh_real(&gram);
        let max = vals.last().copied().unwrap_or(0.0).max(1e-30);
        vals.iter().filter(|&&v| v > 1e-9 * max).count()
    };
    if span_dim < n_j * n_j - 1 {
        return Ok(false);
    }

    // irreducibility: matrix commutant of the restrictions is 1-dimensional
    let unknowns = 2 * n_j * n_j;
    let embed = |idx: usize| -> CMat {
        let mut t = CMat::zeros(n_j, n_j);
        let (ab, im) = (idx / 2, idx % 2 == 1);
        let (a, b) = (ab / n_j, ab % n_j);
        t[(a, b)] = if im { C64::new(0.0, 1.0) } else { C64::new(1.0, 0.0) };
        t
    };
    let mut gram2 = DMatrix::<f64>::zeros(unknowns, unknowns);
    let images: Vec<Vec<CMat>> = (0..unknowns)
        .map(|i| {
            let t = embed(i);
            restricted.iter().map(|r| r * &t - &t * r).collect()
        })
        .collect();
    for i in 0..unknowns {
        for j in 0..=i {
            let mut acc = 0.0;
            for (mi, mj) in images[i].iter().zip(&images[j]) {
                acc += mi.iter().zip(mj.iter()).map(|(x, y)| (x.conj() * y).re).sum::<f64>();
            }
            gram2[(i, j)] = acc;
            gram2[(j, i)] = acc;
        }
    }
    let (vals2, _) = linalg::eigh_real(&gram2);
    let kernel_dim = vals2.iter().filter(|&&v| v < 1e-8).count();
    Ok(kernel_dim == 2)
}
