//! Constructors for the interaction families and encoded codes under study,
//! conjoining of encoded blocks, and the entangling-coupling witness search.

use num_complex::Complex64 as C64;

use crate::angular::{coupled_basis, Half};
pub use crate::decomp::{CodeFamily, LogicalCode};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::pauli::{HermitianOp, Letter, PauliString};

/// Which qubit pairs a two-body family couples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Topology {
    AllPairs,
    Chain,
    Pairs(Vec<(u32, u32)>),
}

impl Topology {
    /// Parse `all`, `chain`, or `pairs=1-2,2-3`.
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "all" => Ok(Topology::AllPairs),
            "chain" => Ok(Topology::Chain),
            _ => {
                let body = text
                    .strip_prefix("pairs=")
                    .ok_or_else(|| Error::InvalidTopology(text.into()))?;
                let mut pairs = Vec::new();
                for part in body.split(',') {
                    let (a, b) = part
                        .split_once('-')
                        .ok_or_else(|| Error::InvalidTopology(text.into()))?;
                    let i: u32 =
                        a.parse().map_err(|_| Error::InvalidTopology(text.into()))?;
                    let j: u32 =
                        b.parse().map_err(|_| Error::InvalidTopology(text.into()))?;
                    pairs.push((i, j));
                }
                Ok(Topology::Pairs(pairs))
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            Topology::AllPairs => "all".into(),
            Topology::Chain => "chain".into(),
            Topology::Pairs(p) => format!(
                "pairs={}",
                p.iter().map(|(i, j)| format!("{i}-{j}")).collect::<Vec<_>>().join(",")
            ),
        }
    }

    /// Ordered (i, j) site pairs with i < j, validated against `n`.
    pub fn pair_list(&self, n: u32) -> Result<Vec<(u32, u32)>> {
        let pairs: Vec<(u32, u32)> = match self {
            Topology::AllPairs => {
                (1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))).collect()
            }
            Topology::Chain => (1..n).map(|i| (i, i + 1)).collect(),
            Topology::Pairs(p) => p.clone(),
        };
        for &(i, j) in &pairs {
            if i < 1 || j <= i || j > n {
                return Err(Error::InvalidTopology(format!("pair {i}-{j} on {n} qubits")));
            }
        }
        if pairs.is_empty() {
            return Err(Error::InvalidTopology("no pairs".into()));
        }
        Ok(pairs)
    }
}

fn two_site(n: u32, i: u32, j: u32, a: Letter, b: Letter) -> Result<PauliString> {
    let mut letters = vec![Letter::I; n as usize];
    letters[(i - 1) as usize] = a;
    letters[(j - 1) as usize] = b;
    if i < 1 || j > n || i == j {
        return Err(Error::SiteOutOfRange { site: j, n });
    }
    Ok(PauliString::from_letters(&letters))
}

/// Isotropic exchange coupling on one pair, normalized as the SWAP operator:
/// `E_ij = (I + X_i X_j + Y_i Y_j + Z_i Z_j) / 2`.
pub fn exchange_coupling(n: u32, i: u32, j: u32) -> Result<HermitianOp> {
    HermitianOp::from_terms(
        n,
        [
            (0.5, PauliString::identity(n)),
            (0.5, two_site(n, i, j, Letter::X, Letter::X)?),
            (0.5, two_site(n, i, j, Letter::Y, Letter::Y)?),
            (0.5, two_site(n, i, j, Letter::Z, Letter::Z)?),
        ],
    )
}

/// Planar coupling on one pair: `A_ij = (X_i X_j + Y_i Y_j) / 2`.
pub fn xy_coupling(n: u32, i: u32, j: u32) -> Result<HermitianOp> {
    HermitianOp::from_terms(
        n,
        [
            (0.5, two_site(n, i, j, Letter::X, Letter::X)?),
            (0.5, two_site(n, i, j, Letter::Y, Letter::Y)?),
        ],
    )
}

/// One exchange operator per pair in the topology.
pub fn heisenberg_family(n: u32, topology: Topology) -> Result<Vec<HermitianOp>> {
    if n < 2 {
        return Err(Error::Invalid("exchange family needs n >= 2".into()));
    }
    topology.pair_list(n)?.iter().map(|&(i, j)| exchange_coupling(n, i, j)).collect()
}

/// One planar coupling per pair in the topology.
pub fn xy_family(n: u32, topology: Topology) -> Result<Vec<HermitianOp>> {
    if n < 2 {
        return Err(Error::Invalid("xy family needs n >= 2".into()));
    }
    topology.pair_list(n)?.iter().map(|&(i, j)| xy_coupling(n, i, j)).collect()
}

/// Single-site Z on every site plus an XX coupling on every chain bond; the
/// canonical polynomially-growing generator set.
pub fn oprime_family(n: u32) -> Result<Vec<HermitianOp>> {
    if n < 2 {
        return Err(Error::Invalid("oprime family needs n >= 2".into()));
    }
    let mut out = Vec::new();
    for i in 1..=n {
        out.push(HermitianOp::single(1.0, PauliString::single(n, i, Letter::Z)?));
    }
    for i in 1..n {
        out.push(HermitianOp::single(
            1.0,
            two_site(n, i, i + 1, Letter::X, Letter::X)?,
        ));
    }
    Ok(out)
}

/// Collective spin operators `C_a = sum_i sigma_a^i` for a = x, y, z.
pub fn collective_family(n: u32) -> Vec<HermitianOp> {
    assert!(n >= 1);
    [Letter::X, Letter::Y, Letter::Z]
        .into_iter()
        .map(|l| {
            let mut op = HermitianOp::zero(n);
            for i in 1..=n {
                op.add_term(1.0, PauliString::single(n, i, l).unwrap());
            }
            op
        })
        .collect()
}

/// The two symmetry operators whose associative algebra fills out the
/// planar-coupling commutant: the collective Z and the global spin flip.
pub fn xy_commutant_seeds(n: u32) -> (HermitianOp, HermitianOp) {
    assert!(n >= 1);
    let sz = collective_family(n).pop().unwrap();
    let flip = HermitianOp::single(1.0, PauliString::from_letters(&vec![Letter::X; n as usize]));
    (sz, flip)
}

fn basis_vector(n: u32, idx: usize) -> CVec {
    let mut v = CVec::zeros(1 << n);
    v[idx] = C64::new(1.0, 0.0);
    v
}

/// Index of the computational basis state with the given bits, site 1 first.
fn bits_index(bits: &[u8]) -> usize {
    bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize)
}

/// The three-qubit exchange qubit: the two total-spin-1/2, z-projection +1/2
/// states singled out by the intermediate coupling of the first two spins.
pub fn trio_code() -> LogicalCode {
    let s = 0.5f64.sqrt();
    let mut zero = CVec::zeros(8);
    zero[bits_index(&[0, 1, 0])] = C64::new(s, 0.0);
    zero[bits_index(&[1, 0, 0])] = C64::new(-s, 0.0);
    let mut one = CVec::zeros(8);
    one[bits_index(&[0, 0, 1])] = C64::new((2f64 / 3.0).sqrt(), 0.0);
    one[bits_index(&[0, 1, 0])] = C64::new(-(1f64 / 6.0).sqrt(), 0.0);
    one[bits_index(&[1, 0, 0])] = C64::new(-(1f64 / 6.0).sqrt(), 0.0);
    LogicalCode::new(3, CodeFamily::Exchange, "trio", vec![zero, one]).unwrap()
}

/// The three-qubit planar-coupling qutrit `{|100>, |010>, |001>}`.
pub fn xy_qutrit_code() -> LogicalCode {
    let words = vec![
        basis_vector(3, bits_index(&[1, 0, 0])),
        basis_vector(3, bits_index(&[0, 1, 0])),
        basis_vector(3, bits_index(&[0, 0, 1])),
    ];
    LogicalCode::new(3, CodeFamily::Xy, "xy-qutrit", words).unwrap()
}

/// Exchange basis adapted to the three-qubit block: `H_0` is central and
/// `H_1, H_2, H_3` close an su(2) whose restriction to [`trio_code`] is
/// exactly `sigma_1/2, sigma_2/2, sigma_3/2`.
///
/// With SWAP-normalized couplings the right scale is `H_1 = (E_23 - E_13) /
/// (2 sqrt 3)` and `H_3 = (-2 E_12 + E_23 + E_13) / 6`; `H_2` is their
/// bracket, so `bracket(H_a, H_b) = -eps_abc H_c` throughout.
pub fn trio_su2_basis() -> [HermitianOp; 4] {
    let e12 = exchange_coupling(3, 1, 2).unwrap();
    let e13 = exchange_coupling(3, 1, 3).unwrap();
    let e23 = exchange_coupling(3, 2, 3).unwrap();
    let h0 = &(&e12 + &e23) + &e13;
    let h1 = (&(&e23 - &e13) * (1.0 / (2.0 * 3f64.sqrt()))).clone();
    let h3 = (&(&(&e12 * -2.0) + &e23) + &e13).scaled(1.0 / 6.0);
    let h2 = h1.bracket(&h3).unwrap();
    [h0, h1, h2, h3]
}

/// A fixed-excitation-number subspace, or the two half-spaces it splits into
/// at the balanced point on an even qubit count.
#[derive(Debug, Clone)]
pub enum SnjSpace {
    Single(LogicalCode),
    /// `plus` is spanned by `|s> + X|s>`, `minus` by `|s> - X|s>`.
    Doubled { plus: LogicalCode, minus: LogicalCode },
}

impl SnjSpace {
    pub fn dims(&self) -> Vec<usize> {
        match self {
            SnjSpace::Single(c) => vec![c.dim_l()],
            SnjSpace::Doubled { plus, minus } => vec![plus.dim_l(), minus.dim_l()],
        }
    }

    pub fn primary(&self) -> &LogicalCode {
        match self {
            SnjSpace::Single(c) => c,
            SnjSpace::Doubled { plus, .. } => plus,
        }
    }
}

/// Excitation-number code: all weight-`j` bit-strings (which automatically
/// have at least as many zeros as ones for `j <= n/2`). At `j = n/2` on even
/// `n` the space splits into the two `|s> +- X|s>` halves, both returned.
pub fn s_n_j_space(n: u32, j: u32) -> Result<SnjSpace> {
    if j > n / 2 {
        return Err(Error::JOutOfRange { j: j.to_string(), n });
    }
    let dim = 1usize << n;
    let full_mask = dim - 1;
    let weight_j: Vec<usize> =
        (0..dim).filter(|s| s.count_ones() == j).collect();
    if n.is_multiple_of(2) && j == n / 2 {
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        let s = 0.5f64.sqrt();
        for &idx in &weight_j {
            let partner = (!idx) & full_mask;
            if idx < partner {
                let mut vp = CVec::zeros(dim);
                vp[idx] = C64::new(s, 0.0);
                vp[partner] = C64::new(s, 0.0);
                plus.push(vp);
                let mut vm = CVec::zeros(dim);
                vm[idx] = C64::new(s, 0.0);
                vm[partner] = C64::new(-s, 0.0);
                minus.push(vm);
            }
        }
        Ok(SnjSpace::Doubled {
            plus: LogicalCode::new(n, CodeFamily::Xy, format!("snj:n={n},J={j}+"), plus)?,
            minus: LogicalCode::new(n, CodeFamily::Xy, format!("snj:n={n},J={j}-"), minus)?,
        })
    } else {
        let words = weight_j.iter().map(|&idx| basis_vector(n, idx)).collect();
        Ok(SnjSpace::Single(LogicalCode::new(
            n,
            CodeFamily::Xy,
            format!("snj:n={n},J={j}"),
            words,
        )?))
    }
}

/// Largest multiplicity available to the planar coupling on `n` qubits,
/// by direct count: max over j of C(n, j), halved at the balanced point.
pub fn xy_max_multiplicity(n: u32) -> usize {
    let binom = |n: u32, k: u32| -> usize {
        let mut acc = 1usize;
        for i in 0..k {
            acc = acc * (n - i) as usize / (i + 1) as usize;
        }
        acc
    };
    (0..=n / 2)
        .map(|j| {
            let c = binom(n, j);
            if n.is_multiple_of(2) && j == n / 2 {
                c / 2
            } else {
                c
            }
        })
        .max()
        .unwrap_or(1)
}

// ---------------------------------------------------------------------------
// conjoining

/// The ambient invariant subspace a conjoined pair of codes embeds into.
#[derive(Debug, Clone)]
pub struct AmbientSpace {
    pub label: String,
    /// Orthonormal columns spanning the ambient subspace of 2^n.
    pub basis: CMat,
}

/// Two encoded blocks with the induced tensor-product basis, embedded in the
/// joint physical space.
#[derive(Debug, Clone)]
pub struct ConjoinedSpace {
    left: LogicalCode,
    right: LogicalCode,
    product_basis: Vec<CVec>,
    ambient: AmbientSpace,
    embedding_residual: f64,
}

impl ConjoinedSpace {
    pub fn left(&self) -> &LogicalCode {
        &self.left
    }

    pub fn right(&self) -> &LogicalCode {
        &self.right
    }

    pub fn n(&self) -> u32 {
        self.left.n() + self.right.n()
    }

    pub fn dim(&self) -> usize {
        self.product_basis.len()
    }

    /// Product vector for (left index i, right index j), at j fastest.
    pub fn product_basis(&self) -> &[CVec] {
        &self.product_basis
    }

    pub fn ambient(&self) -> &AmbientSpace {
        &self.ambient
    }

    /// Largest distance of a product vector from the ambient subspace.
    pub fn embedding_residual(&self) -> f64 {
        self.embedding_residual
    }

    pub fn isometry(&self) -> CMat {
        let mut p = CMat::zeros(1 << self.n(), self.dim());
        for (k, v) in self.product_basis.iter().enumerate() {
            p.set_column(k, v);
        }
        p
    }
}

fn kron_vec(a: &CVec, b: &CVec) -> CVec {
    let mut out = CVec::zeros(a.len() * b.len());
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

/// Common excitation weight of a code's support, if one exists.
fn code_weight(code: &LogicalCode) -> Option<u32> {
    let mut weight = None;
    for w in code.codewords() {
        for (idx, amp) in w.iter().enumerate() {
            if amp.norm() > 1e-9 {
                let k = (idx as u64).count_ones();
                match weight {
                    None => weight = Some(k),
                    Some(prev) if prev != k => return None,
                    _ => {}
                }
            }
        }
    }
    weight
}

/// Total-spin label of a code whose words are all J^2 eigenstates.
fn code_total_spin(code: &LogicalCode) -> Result<Half> {
    let n = code.n();
    let cs = collective_family(n);
    let mats: Vec<CMat> = cs.iter().map(|c| c.to_matrix()).collect::<Result<_>>()?;
    let dim = 1usize << n;
    let mut jsq = CMat::zeros(dim, dim);
    for m in &mats {
        jsq += m * m;
    }
    jsq /= C64::new(4.0, 0.0);
    let mut value = None;
    for w in code.codewords() {
        let jw = &jsq * w;
        let lambda = w.dotc(&jw).re;
        if (&jw - w * C64::new(lambda, 0.0)).norm() > 1e-9 {
            return Err(Error::IncompatibleCodes(
                "codewords are not total-spin eigenstates".into(),
            ));
        }
        // lambda = J(J+1), so 2J = -1 + sqrt(1 + 4 lambda)
        let two_j = ((-1.0 + (1.0 + 4.0 * lambda).sqrt()).max(0.0)).round() as i32;
        let got = Half::from_twice(two_j);
        match value {
            None => value = Some(got),
            Some(prev) if prev != got => {
                return Err(Error::IncompatibleCodes(
                    "codewords carry different total spins".into(),
                ))
            }
            _ => {}
        }
    }
    value.ok_or_else(|| Error::IncompatibleCodes("empty code".into()))
}

/// Impose a tensor-product structure between two encoded blocks: embed every
/// pairwise product of codewords into the joint space and identify the
/// invariant ambient subspace the products fall into.
pub fn conjoin(left: &LogicalCode, right: &LogicalCode) -> Result<ConjoinedSpace> {
    if left.family() != right.family() {
        return Err(Error::IncompatibleCodes(format!(
            "{:?} vs {:?}",
            left.family(),
            right.family()
        )));
    }
    let n = left.n() + right.n();
    let mut product_basis = Vec::new();
    for i in 0..left.dim_l() {
        for j in 0..right.dim_l() {
            product_basis.push(kron_vec(left.codeword(i), right.codeword(j)));
        }
    }

    let ambient = match left.family() {
        CodeFamily::Xy => {
            let (wl, wr) = (code_weight(left), code_weight(right));
            let (wl, wr) = match (wl, wr) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    return Err(Error::IncompatibleCodes(
                        "xy-type codes must have fixed excitation weight".into(),
                    ))
                }
            };
            let w = wl + wr;
            let dim = 1usize << n;
            let idxs: Vec<usize> =
                (0..dim).filter(|s| s.count_ones() == w).collect();
            let mut basis = CMat::zeros(dim, idxs.len());
            for (k, &idx) in idxs.iter().enumerate() {
                basis[(idx, k)] = C64::new(1.0, 0.0);
            }
            AmbientSpace { label: format!("weight-{w} subspace of {n} qubits"), basis }
        }
        CodeFamily::Exchange => {
            let jl = code_total_spin(left)?;
            let jr = code_total_spin(right)?;
            let lo = (jl - jr).abs();
            let hi = jl + jr;
            let states = coupled_basis(n)?;
            let members: Vec<&CVec> = states
                .iter()
                .filter(|s| s.j() >= lo && s.j() <= hi)
                .map(|s| s.amplitudes())
                .collect();
            let mut basis = CMat::zeros(1 << n, members.len());
            for (k, v) in members.iter().enumerate() {
                basis.set_column(k, v);
            }
            AmbientSpace {
                label: format!("total-spin J in [{lo}, {hi}] subspace of {n} qubits"),
                basis,
            }
        }
        CodeFamily::Generic => {
            return Err(Error::IncompatibleCodes(
                "conjoining needs family-tagged codes".into(),
            ))
        }
    };

    let mut residual: f64 = 0.0;
    for v in &product_basis {
        let coeffs = ambient.basis.adjoint() * v;
        let back = &ambient.basis * coeffs;
        residual = residual.max((v - back).norm());
    }
    if residual > 1e-9 {
        return Err(Error::IncompatibleCodes(format!(
            "products leave the ambient sector (residual {residual:.3e})"
        )));
    }

    Ok(ConjoinedSpace {
        left: left.clone(),
        right: right.clone(),
        product_basis,
        ambient,
        embedding_residual: residual,
    })
}

// ---------------------------------------------------------------------------
// coupling witness

/// Outcome of the entangling-coupling search over nested brackets.
#[derive(Debug, Clone)]
pub struct WitnessResult {
    pub op: HermitianOp,
    /// Bracket expression the witness came from, in generator indices.
    pub description: String,
    pub leakage: f64,
    /// Distance of the restricted action from the span of single-block
    /// operators; entangling means this exceeds the threshold.
    pub entangling_residual: f64,
}

/// Threshold separating genuinely coupling restrictions from single-block
/// combinations.
pub const ENTANGLING_TOL: f64 = 1e-6;

fn local_operator_basis(dl: usize, dr: usize) -> Vec<CVec> {
    // Hermitian matrix basis on each factor, tensored with identity
    let herm_basis = |d: usize| -> Vec<CMat> {
        let mut out = Vec::new();
        for a in 0..d {
            for b in 0..=a {
                let mut m = CMat::zeros(d, d);
                if a == b {
                    m[(a, a)] = C64::new(1.0, 0.0);
                    out.push(m);
                } else {
                    m[(a, b)] = C64::new(1.0, 0.0);
                    m[(b, a)] = C64::new(1.0, 0.0);
                    out.push(m.clone());
                    let mut im = CMat::zeros(d, d);
                    im[(a, b)] = C64::new(0.0, 1.0);
                    im[(b, a)] = C64::new(0.0, -1.0);
                    out.push(im);
                }
            }
        }
        out
    };
    let eye = |d: usize| CMat::identity(d, d);
    let mut mats: Vec<CMat> = Vec::new();
    for a in herm_basis(dl) {
        mats.push(a.kronecker(&eye(dr)));
    }
    for b in herm_basis(dr) {
        mats.push(eye(dl).kronecker(&b));
    }
    let vecs: Vec<CVec> = mats
        .iter()
        .map(|m| CVec::from_iterator(m.len(), m.iter().copied()))
        .collect();
    linalg::orthonormalize(&vecs, 1e-9)
}

fn entangling_residual(restricted: &CMat, local: &[CVec]) -> f64 {
    let v = CVec::from_iterator(restricted.len(), restricted.iter().copied());
    linalg::projection_residual(&v, local)
}

/// Search the nested brackets of `generators` (paper-style candidate first
/// when the blocks are two 3-qubit xy codes, then breadth-first up to
/// `max_depth`) for an element that preserves the conjoined product space
/// and acts on it outside the span of single-block operators.
pub fn coupling_witness(
    space: &ConjoinedSpace,
    generators: &[HermitianOp],
    max_depth: usize,
) -> Result<WitnessResult> {
    let n = space.n();
    for g in generators {
        if g.n() != n {
            return Err(Error::LengthMismatch { left: n, right: g.n() });
        }
    }
    let p = space.isometry();
    let local = local_operator_basis(space.left.dim_l(), space.right.dim_l());

    let test = |op: &HermitianOp, desc: &str| -> Result<Option<WitnessResult>> {
        if op.is_zero() {
            return Ok(None);
        }
        let m = op.to_matrix()?;
        let mp = &m * &p;
        let inside = p.adjoint() * &mp;
        let leakage = (&mp - &p * &inside).norm();
        if leakage > 1e-9 {
            return Ok(None);
        }
        let resid = entangling_residual(&inside, &local);
        if resid > ENTANGLING_TOL {
            return Ok(Some(WitnessResult {
                op: op.clone(),
                description: desc.to_string(),
                leakage,
                entangling_residual: resid,
            }));
        }
        Ok(None)
    };

    // preferred candidate for a pair of 3-qubit xy blocks: [[A_16, A_15], A_12]
    if space.left.family() == CodeFamily::Xy
        && space.left.n() == 3
        && space.right.n() == 3
    {
        let a16 = xy_coupling(6, 1, 6)?;
        let a15 = xy_coupling(6, 1, 5)?;
        let a12 = xy_coupling(6, 1, 2)?;
        let candidate = a16.bracket(&a15)?.bracket(&a12)?;
        if let Some(hit) = test(&candidate, "bracket(bracket(A_16, A_15), A_12)")? {
            return Ok(hit);
        }
    }

    // breadth-first nested brackets: depth d elements are left-nested
    // brackets of d generators
    let mut layer: Vec<(HermitianOp, String)> = generators
        .iter()
        .enumerate()
        .map(|(i, g)| (g.clone(), format!("g{i}")))
        .collect();
    for (op, desc) in &layer {
        if let Some(hit) = test(op, desc)? {
            return Ok(hit);
        }
    }
    for _depth in 2..=max_depth {
        let mut next = Vec::new();
        for (op, desc) in &layer {
            for (i, g) in generators.iter().enumerate() {
                let b = op.bracket(g)?;
                if b.is_zero() {
                    continue;
                }
                let label = format!("bracket({desc}, g{i})");
                if let Some(hit) = test(&b, &label)? {
                    return Ok(hit);
                }
                next.push((b, label));
            }
        }
        layer = next;
    }
    Err(Error::NoWitness { depth: max_depth })
}

// ---------------------------------------------------------------------------
// family identifiers

/// A named two-body family together with its topology; the string grammar is
/// `heisenberg:<topo>`, `xy:<topo>`, `oprime`, `collective`.
#[derive(Debug, Clone)]
pub struct InteractionFamily {
    kind: FamilyKind,
    topology: Topology,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    Heisenberg,
    Xy,
    OPrime,
    Collective,
}

impl InteractionFamily {
    pub fn parse(id: &str) -> Result<Self> {
        let (name, topo) = match id.split_once(':') {
            Some((n, t)) => (n, Some(t)),
            None => (id, None),
        };
        let kind = match name {
            "heisenberg" => FamilyKind::Heisenberg,
            "xy" => FamilyKind::Xy,
            "oprime" => FamilyKind::OPrime,
            "collective" => FamilyKind::Collective,
            _ => return Err(Error::UnknownFamily(id.into())),
        };
        let topology = match (kind, topo) {
            (FamilyKind::OPrime | FamilyKind::Collective, None) => Topology::AllPairs,
            (FamilyKind::OPrime | FamilyKind::Collective, Some(_)) => {
                return Err(Error::UnknownFamily(format!("{id}: family takes no topology")))
            }
            (_, Some(t)) => Topology::parse(t)?,
            (_, None) => Topology::AllPairs,
        };
        Ok(InteractionFamily { kind, topology })
    }

    pub fn name(&self) -> String {
        match self.kind {
            FamilyKind::Heisenberg => format!("heisenberg:{}", self.topology.label()),
            FamilyKind::Xy => format!("xy:{}", self.topology.label()),
            FamilyKind::OPrime => "oprime".into(),
            FamilyKind::Collective => "collective".into(),
        }
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn build(&self, n: u32) -> Result<Vec<HermitianOp>> {
        match self.kind {
            FamilyKind::Heisenberg => heisenberg_family(n, self.topology.clone()),
            FamilyKind::Xy => xy_family(n, self.topology.clone()),
            FamilyKind::OPrime => oprime_family(n),
            FamilyKind::Collective => Ok(collective_family(n)),
        }
    }
}

/// Resolve a code identifier: `code:trio`, `code:xy-qutrit`, or
/// `code:snj:n=5,J=2` (suffix `+` or `-` picks a doubled half).
pub fn parse_code(id: &str) -> Result<LogicalCode> {
    let body = id.strip_prefix("code:").unwrap_or(id);
    if body == "trio" {
        return Ok(trio_code());
    }
    if body == "xy-qutrit" {
        return Ok(xy_qutrit_code());
    }
    if let Some(args) = body.strip_prefix("snj:") {
        let mut n = None;
        let mut j = None;
        let mut sign = '+';
        for part in args.split(',') {
            if let Some(v) = part.strip_prefix("n=") {
                n = v.parse::<u32>().ok();
            } else if let Some(v) = part.strip_prefix("J=") {
                let v = v.trim();
                let (v, s) = match v.chars().last() {
                    Some(c @ ('+' | '-')) => (&v[..v.len() - 1], c),
                    _ => (v, '+'),
                };
                sign = s;
                j = v.parse::<u32>().ok();
            }
        }
        let (n, j) = match (n, j) {
            (Some(n), Some(j)) => (n, j),
            _ => return Err(Error::UnknownCode(id.into())),
        };
        return match s_n_j_space(n, j)? {
            SnjSpace::Single(c) => Ok(c),
            SnjSpace::Doubled { plus, minus } => {
                Ok(if sign == '-' { minus } else { plus })
            }
        };
    }
    Err(Error::UnknownCode(id.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{close_lie_algebra, RANK_TOL};
    use crate::pauli::{bracket, hs_inner};

    #[test]
    fn exchange_squares_to_identity() {
        let e = exchange_coupling(2, 1, 2).unwrap();
        let m = e.to_matrix().unwrap();
        assert!((&m * &m - CMat::identity(4, 4)).norm() < 1e-12);
        // and it is exactly the SWAP permutation matrix
        let mut swap = CMat::zeros(4, 4);
        for (r, c) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            swap[(r, c)] = C64::new(1.0, 0.0);
        }
        assert!((m - swap).norm() < 1e-12);
    }

    #[test]
    fn family_builders_are_hermitian_and_counted() {
        let hs = heisenberg_family(6, Topology::AllPairs).unwrap();
        assert_eq!(hs.len(), 15);
        let xs = xy_family(4, Topology::Chain).unwrap();
        assert_eq!(xs.len(), 3);
        let os = oprime_family(3).unwrap();
        assert_eq!(os.len(), 5);
        for op in hs.iter().chain(&xs).chain(&os) {
            let m = op.to_matrix().unwrap();
            assert!((&m - &m.adjoint()).norm() < 1e-12);
        }
    }

    #[test]
    fn xy_annihilates_the_vacuum() {
        for op in xy_family(4, Topology::AllPairs).unwrap() {
            let m = op.to_matrix().unwrap();
            let vac = basis_vector(4, 0);
            assert!((m * &vac).norm() < 1e-12);
        }
    }

    #[test]
    fn collective_on_one_qubit_is_the_pauli_triple() {
        let cs = collective_family(1);
        assert_eq!(cs.len(), 3);
        for (op, letter) in cs.iter().zip(["X", "Y", "Z"]) {
            assert_eq!(op.num_terms(), 1);
            let s = PauliString::parse(letter).unwrap();
            assert!((op.coeff(&s) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn collective_closure_is_three_dimensional_for_any_size() {
        for n in 1..=5u32 {
            let basis = close_lie_algebra(&collective_family(n), 64, RANK_TOL).unwrap();
            assert_eq!(basis.dim(), 3, "n = {n}");
        }
    }

    #[test]
    fn trio_code_is_a_spin_half_plus_half_doublet() {
        let code = trio_code();
        let cz = &collective_family(3)[2];
        let jsq_mats: Vec<CMat> = collective_family(3)
            .iter()
            .map(|c| c.to_matrix().unwrap())
            .collect();
        let mut jsq = CMat::zeros(8, 8);
        for m in &jsq_mats {
            jsq += m * m;
        }
        jsq /= C64::new(4.0, 0.0);
        let czm = cz.to_matrix().unwrap();
        for w in code.codewords() {
            // J^2 = 3/4 and C_z/2 = +1/2
            assert!((&jsq * w - w * C64::new(0.75, 0.0)).norm() < 1e-12);
            assert!((&czm * w * C64::new(0.5, 0.0) - w * C64::new(0.5, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn trio_su2_basis_relations_and_restrictions() {
        let [h0, h1, h2, h3] = trio_su2_basis();
        for h in [&h1, &h2, &h3] {
            assert!(bracket(&h0, h).unwrap().hs_norm() < 1e-12);
        }
        // bracket(H_a, H_b) = -eps_abc H_c
        let triples = [(&h1, &h2, &h3), (&h2, &h3, &h1), (&h3, &h1, &h2)];
        for (a, b, c) in triples {
            let lhs = bracket(a, b).unwrap();
            let diff = &lhs + c;
            assert!(diff.hs_norm() < 1e-12, "residual {}", diff.hs_norm());
        }
        // restrictions are the halved Pauli matrices on the trio code
        let code = trio_code();
        let sigma = |k: usize| -> CMat {
            let mut m = CMat::zeros(2, 2);
            match k {
                1 => {
                    m[(0, 1)] = C64::new(1.0, 0.0);
                    m[(1, 0)] = C64::new(1.0, 0.0);
                }
                2 => {
                    m[(0, 1)] = C64::new(0.0, -1.0);
                    m[(1, 0)] = C64::new(0.0, 1.0);
                }
                _ => {
                    m[(0, 0)] = C64::new(1.0, 0.0);
                    m[(1, 1)] = C64::new(-1.0, 0.0);
                }
            }
            m
        };
        for (k, h) in [(1usize, &h1), (2, &h2), (3, &h3)] {
            let (r, leak) = crate::decomp::restrict(h, &code).unwrap();
            assert!(leak < 1e-12);
            assert!((r - sigma(k) * C64::new(0.5, 0.0)).norm() < 1e-9, "H_{k}");
        }
    }

    #[test]
    fn snj_dimensions_match_binomials() {
        match s_n_j_space(5, 2).unwrap() {
            SnjSpace::Single(c) => assert_eq!(c.dim_l(), 10),
            _ => panic!("odd count must not double"),
        }
        match s_n_j_space(4, 2).unwrap() {
            SnjSpace::Doubled { plus, minus } => {
                assert_eq!(plus.dim_l(), 3);
                assert_eq!(minus.dim_l(), 3);
            }
            _ => panic!("balanced even count must double"),
        }
        match s_n_j_space(3, 1).unwrap() {
            SnjSpace::Single(c) => {
                assert_eq!(c.dim_l(), 3);
                // spans the same space as the qutrit code
                let q = xy_qutrit_code();
                for w in c.codewords() {
                    let mut proj = CVec::zeros(8);
                    for v in q.codewords() {
                        proj += v * v.dotc(w);
                    }
                    assert!((w - proj).norm() < 1e-12);
                }
            }
            _ => panic!(),
        }
        assert!(s_n_j_space(4, 3).is_err());
    }

    #[test]
    fn snj_spaces_are_preserved_by_the_family() {
        for n in 2..=5u32 {
            let gens = xy_family(n, Topology::AllPairs).unwrap();
            for j in 0..=n / 2 {
                let space = s_n_j_space(n, j).unwrap();
                let codes: Vec<&LogicalCode> = match &space {
                    SnjSpace::Single(c) => vec![c],
                    SnjSpace::Doubled { plus, minus } => vec![plus, minus],
                };
                for code in codes {
                    for g in &gens {
                        let (_, leak) = crate::decomp::restrict(g, code).unwrap();
                        assert!(leak < 1e-9, "n={n} j={j}");
                    }
                }
            }
        }
    }

    #[test]
    fn snj_account_covers_the_full_space_with_pairing() {
        // sum over j of 2 * dim equals 2^n once the balanced point is paired
        for n in [3u32, 4, 5, 6] {
            let mut total = 0usize;
            for j in 0..=n / 2 {
                let dims: usize = s_n_j_space(n, j).unwrap().dims().iter().sum();
                let doubled = if n % 2 == 0 && j == n / 2 { 1 } else { 2 };
                total += dims * doubled;
            }
            assert_eq!(total, 1 << n);
        }
    }

    #[test]
    fn xy_multiplicity_table() {
        let expect = [1usize, 1, 3, 4, 10, 15, 35, 56];
        for (n, &e) in (1..=8u32).zip(&expect) {
            assert_eq!(xy_max_multiplicity(n), e, "n = {n}");
        }
        // coding rate approaches one; it climbs within each parity class
        // (odd sizes sit above their even neighbors throughout this range)
        let rate = |n: u32| (xy_max_multiplicity(n) as f64).log2() / n as f64;
        for n in [3u32, 4, 5, 6] {
            assert!(rate(n + 2) > rate(n), "n = {n}");
        }
        assert!(rate(8) > 0.7);
    }

    #[test]
    fn conjoined_qutrits_span_nine_of_fifteen() {
        let q = xy_qutrit_code();
        let joined = conjoin(&q, &q).unwrap();
        assert_eq!(joined.dim(), 9);
        assert_eq!(joined.ambient().basis.ncols(), 15);
        assert!(joined.embedding_residual() < 1e-12);
    }

    #[test]
    fn conjoined_trio_pair_sits_in_the_low_spin_sectors() {
        let t = trio_code();
        let joined = conjoin(&t, &t).unwrap();
        assert_eq!(joined.dim(), 4);
        assert!(joined.embedding_residual() < 1e-9);
    }

    #[test]
    fn conjoining_with_a_scalar_code_keeps_the_dimension() {
        let q = xy_qutrit_code();
        let one = match s_n_j_space(3, 0).unwrap() {
            SnjSpace::Single(c) => c,
            _ => panic!(),
        };
        let joined = conjoin(&q, &one).unwrap();
        assert_eq!(joined.dim(), 3);
    }

    #[test]
    fn incompatible_families_do_not_conjoin() {
        assert!(conjoin(&trio_code(), &xy_qutrit_code()).is_err());
    }

    #[test]
    fn witness_for_conjoined_qutrits_is_the_preferred_candidate() {
        let q = xy_qutrit_code();
        let joined = conjoin(&q, &q).unwrap();
        let gens = xy_family(6, Topology::AllPairs).unwrap();
        let w = coupling_witness(&joined, &gens, 3).unwrap();
        assert!(w.description.contains("A_16"));
        assert!(w.leakage < 1e-9);
        assert!(w.entangling_residual > ENTANGLING_TOL);
    }

    #[test]
    fn trio_pair_witness_search_reports_its_bound() {
        // entangling preserving elements exist in the exchange closure as
        // combinations, but no pure nested bracket up to the default depth
        // preserves the conjoined product space; the search must say so
        let t = trio_code();
        let joined = conjoin(&t, &t).unwrap();
        let gens = heisenberg_family(6, Topology::AllPairs).unwrap();
        assert!(matches!(
            coupling_witness(&joined, &gens, 3),
            Err(Error::NoWitness { depth: 3 })
        ));
    }

    #[test]
    fn no_witness_exists_for_a_single_block() {
        let q = xy_qutrit_code();
        let one = match s_n_j_space(3, 0).unwrap() {
            SnjSpace::Single(c) => c,
            _ => panic!(),
        };
        let joined = conjoin(&q, &one).unwrap();
        let gens = xy_family(6, Topology::AllPairs).unwrap();
        assert!(matches!(
            coupling_witness(&joined, &gens, 2),
            Err(Error::NoWitness { .. })
        ));
    }

    #[test]
    fn family_identifier_grammar() {
        assert_eq!(InteractionFamily::parse("heisenberg:all").unwrap().name(), "heisenberg:all");
        assert_eq!(InteractionFamily::parse("xy:chain").unwrap().name(), "xy:chain");
        assert_eq!(InteractionFamily::parse("oprime").unwrap().name(), "oprime");
        let custom = InteractionFamily::parse("xy:pairs=1-2,2-3").unwrap();
        assert_eq!(custom.build(3).unwrap().len(), 2);
        assert!(InteractionFamily::parse("nope").is_err());
        assert!(InteractionFamily::parse("xy:ring").is_err());
        assert!(InteractionFamily::parse("oprime:all").is_err());
    }

    #[test]
    fn code_identifier_grammar() {
        assert_eq!(parse_code("code:trio").unwrap().dim_l(), 2);
        assert_eq!(parse_code("code:xy-qutrit").unwrap().dim_l(), 3);
        assert_eq!(parse_code("code:snj:n=5,J=2").unwrap().dim_l(), 10);
        assert_eq!(parse_code("code:snj:n=4,J=2-").unwrap().dim_l(), 3);
        assert!(parse_code("code:unknown").is_err());
    }

    #[test]
    fn oprime_elements_are_orthogonal_single_strings() {
        let gens = oprime_family(4).unwrap();
        for (i, a) in gens.iter().enumerate() {
            assert_eq!(a.num_terms(), 1);
            for (j, b) in gens.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((hs_inner(a, b).unwrap() - expect).abs() < 1e-15);
            }
        }
    }
}
