//! Numerical unitary machinery: exact pulse exponentials, gate distance
//! metrics, product-formula composition, and a derivative-free search for
//! short pulse sequences realizing encoded gates.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::decomp::LogicalCode;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::pauli::{HermitianOp, UnitaryMatrix};

/// `exp(i t H)` of a dense Hermitian matrix, by eigendecomposition with
/// degeneracy-aware eigenvector cleanup (coupling spectra are typically
/// highly degenerate).
fn expm_i_t(mat: &CMat, t: f64) -> CMat {
    let (vals, vecs, _) = linalg::eigh_clustered(mat, 1e-9);
    let phases = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&l| C64::new(0.0, l * t).exp()),
    ));
    &vecs * phases * vecs.adjoint()
}

/// Gate realized by switching on Hamiltonian `h` for time `t`: `exp(i t h)`.
pub fn expm_pulse(h: &HermitianOp, t: f64) -> Result<UnitaryMatrix> {
    let mat = h.to_matrix()?;
    Ok(UnitaryMatrix::new_unchecked(expm_i_t(&mat, t)))
}

/// Gate distance metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// `sqrt(1 - Re tr(U^dag V) / N)`; sensitive to the global phase.
    Trace,
    /// Largest singular value of `U - V`.
    Operator,
    /// `sqrt(1 - |tr(U^dag V)| / N)`; zero iff equal up to a global phase.
    PhaseInvariant,
}

impl Metric {
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "trace" => Ok(Metric::Trace),
            "operator" => Ok(Metric::Operator),
            "phase-invariant" => Ok(Metric::PhaseInvariant),
            _ => Err(Error::Invalid(format!("unknown metric `{text}`"))),
        }
    }
}

/// Distance between two equal-dimension unitaries in the chosen metric.
pub fn distance(u: &UnitaryMatrix, v: &UnitaryMatrix, metric: Metric) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::DimMismatch { left: u.dim(), right: v.dim() });
    }
    Ok(matrix_distance(u.as_matrix(), v.as_matrix(), metric))
}

fn matrix_distance(u: &CMat, v: &CMat, metric: Metric) -> f64 {
    let n = u.nrows() as f64;
    match metric {
        Metric::Trace => {
            let overlap = (u.adjoint() * v).trace().re / n;
            (1.0 - overlap).max(0.0).sqrt()
        }
        Metric::PhaseInvariant => {
            let overlap = (u.adjoint() * v).trace().norm() / n;
            (1.0 - overlap).max(0.0).sqrt()
        }
        Metric::Operator => {
            let d = u - v;
            let gram = d.adjoint() * &d;
            let (vals, _) = linalg::eigh(&gram);
            vals.last().copied().unwrap_or(0.0).max(0.0).sqrt()
        }
    }
}

/// First-order split composition `(exp(i a alpha/p) exp(i b beta/p))^p`,
/// which approaches `exp(i (alpha a + beta b))` for large `p`.
pub fn trotter_sum(
    a: &HermitianOp,
    b: &HermitianOp,
    alpha: f64,
    beta: f64,
    p: u64,
) -> Result<UnitaryMatrix> {
    if p < 1 {
        return Err(Error::Invalid("p must be at least 1".into()));
    }
    if a.n() != b.n() {
        return Err(Error::LengthMismatch { left: a.n(), right: b.n() });
    }
    let ma = a.to_matrix()?;
    let mb = b.to_matrix()?;
    let step = expm_i_t(&ma, alpha / p as f64) * expm_i_t(&mb, beta / p as f64);
    Ok(UnitaryMatrix::new_unchecked(linalg::matrix_power(&step, p)))
}

/// Group-commutator composition
/// `(exp(-i a/sqrt p) exp(i b/sqrt p) exp(i a/sqrt p) exp(-i b/sqrt p))^p`.
///
/// Its large-p limit is `exp([a, b]) = exp(i bracket(b, a))`: the pulse whose
/// effective Hamiltonian is `-i[a, b]`.
pub fn trotter_commutator(a: &HermitianOp, b: &HermitianOp, p: u64) -> Result<UnitaryMatrix> {
    if p < 1 {
        return Err(Error::Invalid("p must be at least 1".into()));
    }
    if a.n() != b.n() {
        return Err(Error::LengthMismatch { left: a.n(), right: b.n() });
    }
    let ma = a.to_matrix()?;
    let mb = b.to_matrix()?;
    let s = 1.0 / (p as f64).sqrt();
    let step = expm_i_t(&ma, -s) * expm_i_t(&mb, s) * expm_i_t(&ma, s) * expm_i_t(&mb, -s);
    Ok(UnitaryMatrix::new_unchecked(linalg::matrix_power(&step, p)))
}

/// An ordered pulse program over a fixed generator set: pulse k switches on
/// generator `pulses[k].0` for duration `pulses[k].1`. Earlier pulses act
/// first, so the realized unitary multiplies them on from the left.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    pub pulses: Vec<(usize, f64)>,
}

impl PulseSequence {
    pub fn empty() -> Self {
        PulseSequence { pulses: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    /// Realize the program on the full physical space.
    pub fn realize(&self, generators: &[HermitianOp]) -> Result<UnitaryMatrix> {
        if generators.is_empty() {
            return Err(Error::EmptyGenerators);
        }
        let dim = 1usize << generators[0].n();
        let mut u = CMat::identity(dim, dim);
        for &(k, t) in &self.pulses {
            if k >= generators.len() {
                return Err(Error::IndexOutOfRange { index: k, limit: generators.len() });
            }
            if !t.is_finite() {
                return Err(Error::Invalid("pulse duration must be finite".into()));
            }
            u = expm_i_t(&generators[k].to_matrix()?, t) * u;
        }
        Ok(UnitaryMatrix::new_unchecked(u))
    }
}

/// Outcome of a synthesis run. `distance` is always the best value found;
/// `success` records whether it met the requested tolerance.
#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub sequence: PulseSequence,
    pub distance: f64,
    pub target_label: String,
    pub seed: u64,
    pub evaluations: u64,
    pub success: bool,
}

/// Search for a pulse sequence whose action restricted to `code` matches
/// `target` up to a global phase.
///
/// Generators must preserve the code; the objective is then evaluated
/// entirely in the logical dimension. Orderings of generators are enumerated
/// up to `max_pulses` (adjacent repeats skipped, since consecutive pulses of
/// one generator merge), and each ordering runs a multi-start Nelder-Mead
/// over the durations, boxed to one period of each generator's restricted
/// spectrum. Deterministic for a fixed seed.
pub fn synthesize_sequence(
    target: &UnitaryMatrix,
    code: &LogicalCode,
    generators: &[HermitianOp],
    max_pulses: usize,
    tol: f64,
    seed: u64,
) -> Result<SynthesisResult> {
    synthesize_with_label(target, "target", code, generators, max_pulses, tol, seed)
}

pub fn synthesize_with_label(
    target: &UnitaryMatrix,
    target_label: &str,
    code: &LogicalCode,
    generators: &[HermitianOp],
    max_pulses: usize,
    tol: f64,
    seed: u64,
) -> Result<SynthesisResult> {
    if generators.is_empty() {
        return Err(Error::EmptyGenerators);
    }
    let d_l = code.dim_l();
    if target.dim() != d_l {
        return Err(Error::DimMismatch { left: target.dim(), right: d_l });
    }
    // restrict generators; any leakage makes the restriction ill-defined
    let mut restricted = Vec::new();
    let mut worst_leak: f64 = 0.0;
    for g in generators {
        let (r, leak) = crate::decomp::restrict(g, code)?;
        worst_leak = worst_leak.max(leak);
        restricted.push(r);
    }
    if worst_leak > 1e-9 {
        return Err(Error::LeakyGenerators { leakage: worst_leak });
    }
    let boxes: Vec<(f64, Option<f64>)> = restricted.iter().map(duration_box).collect();

    let target_mat = target.as_matrix().clone();
    let evaluations = std::cell::Cell::new(0u64);
    let objective = |ordering: &[usize], durations: &[f64]| -> f64 {
        let mut u = CMat::identity(d_l, d_l);
        for (&k, &t) in ordering.iter().zip(durations) {
            u = expm_i_t(&restricted[k], t) * u;
        }
        evaluations.set(evaluations.get() + 1);
        matrix_distance(&u, &target_mat, Metric::PhaseInvariant)
    };

    let identity = CMat::identity(d_l, d_l);
    let mut best = SynthesisResult {
        sequence: PulseSequence::empty(),
        distance: matrix_distance(&identity, &target_mat, Metric::PhaseInvariant),
        target_label: target_label.to_string(),
        seed,
        evaluations: 0,
        success: false,
    };
    evaluations.set(evaluations.get() + 1);
    if best.distance < tol {
        best.success = true;
        best.evaluations = evaluations.get();
        return Ok(best);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts_per_ordering = 8;
    'search: for length in 1..=max_pulses {
        for ordering in orderings(generators.len(), length) {
            for _ in 0..starts_per_ordering {
                let init: Vec<f64> = ordering
                    .iter()
                    .map(|&k| rng.gen_range(0.0..boxes[k].0))
                    .collect();
                let (durations, value) =
                    nelder_mead(|x| objective(&ordering, x), &init, 0.35, 400, 1e-12);
                if value < best.distance {
                    best.distance = value;
                    best.sequence = PulseSequence {
                        pulses: ordering
                            .iter()
                            .zip(&durations)
                            .map(|(&k, &t)| match boxes[k].1 {
                                Some(period) => (k, t.rem_euclid(period)),
                                None => (k, t),
                            })
                            .collect(),
                    };
                    if value < tol {
                        best.success = true;
                        break 'search;
                    }
                }
            }
        }
    }
    best.evaluations = evaluations.get();
    if best.distance < tol {
        best.success = true;
    }
    Ok(best)
}

/// Search box and, when it exists, the true period of `t -> exp(i t H)` up
/// to global phase. The period is 2 pi over the gcd of the eigenvalue
/// differences when they are commensurate; otherwise there is no period and
/// durations must not be wrapped, so only the box (one cycle of the
/// smallest gap) is returned.
fn duration_box(h: &CMat) -> (f64, Option<f64>) {
    let (vals, _) = linalg::eigh(h);
    let mut diffs = Vec::new();
    for i in 0..vals.len() {
        for j in 0..i {
            let d = (vals[i] - vals[j]).abs();
            if d > 1e-9 {
                diffs.push(d);
            }
        }
    }
    if diffs.is_empty() {
        return (2.0 * std::f64::consts::PI, Some(2.0 * std::f64::consts::PI));
    }
    let g = diffs.iter().cloned().fold(f64::INFINITY, f64::min);
    let commensurate = diffs.iter().all(|&d| {
        let r = d / g;
        (r - r.round()).abs() < 1e-9 * r.max(1.0)
    });
    let cycle = 2.0 * std::f64::consts::PI / g;
    (cycle, commensurate.then_some(cycle))
}

/// Index sequences of the given length with no adjacent repeats.
fn orderings(num_generators: usize, length: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..length {
        let mut next = Vec::new();
        for seq in &out {
            for k in 0..num_generators {
                if seq.last() == Some(&k) {
                    continue;
                }
                let mut s = seq.clone();
                s.push(k);
                next.push(s);
            }
        }
        out = next;
    }
    out
}

/// Plain Nelder-Mead simplex minimization.
fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    init: &[f64],
    spread: f64,
    max_iter: usize,
    f_tol: f64,
) -> (Vec<f64>, f64) {
    let n = init.len();
    let mut simplex: Vec<Vec<f64>> = vec![init.to_vec()];
    for i in 0..n {
        let mut p = init.to_vec();
        p[i] += spread;
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();

    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..simplex.len()).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        if values[n] - values[0] < f_tol {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|p| p[d]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let blend = |a: f64| -> Vec<f64> {
            (0..n).map(|d| centroid[d] + a * (centroid[d] - worst[d])).collect()
        };
        let reflected = blend(1.0);
        let fr = f(&reflected);
        if fr < values[0] {
            let expanded = blend(2.0);
            let fe = f(&expanded);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
        } else {
            let contracted = blend(-0.5);
            let fc = f(&contracted);
            if fc < values[n] {
                simplex[n] = contracted;
                values[n] = fc;
            } else {
                for i in 1..=n {
                    simplex[i] = (0..n)
                        .map(|d| simplex[0][d] + 0.5 * (simplex[i][d] - simplex[0][d]))
                        .collect();
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }
    let mut best = 0;
    for i in 1..values.len() {
        if values[i] < values[best] {
            best = i;
        }
    }
    (simplex[best].clone(), values[best])
}
