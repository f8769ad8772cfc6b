//! Lie-algebra closure of a generator set, growth of the closure dimension
//! across system sizes, and the polynomial-growth non-universality verdict.

use crate::error::{Error, Result};
use crate::pauli::HermitianOp;

/// Default residual threshold for accepting a new basis direction.
pub const RANK_TOL: f64 = 1e-9;

/// Orthonormal basis of a (possibly partial) Lie closure.
///
/// Elements are pairwise orthonormal under the normalized Hilbert-Schmidt
/// inner product. `closed` is false only when the dimension cap was hit
/// before the worklist drained.
#[derive(Debug, Clone)]
pub struct LieBasis {
    n: u32,
    generators: Vec<HermitianOp>,
    elements: Vec<HermitianOp>,
    closed: bool,
    tol: f64,
    smallest_accepted: Option<f64>,
    largest_rejected: Option<f64>,
}

impl LieBasis {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[HermitianOp] {
        &self.elements
    }

    /// The generator set the closure was grown from.
    pub fn generators(&self) -> &[HermitianOp] {
        &self.generators
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Smallest residual norm that was accepted as a new direction; borderline
    /// closures are auditable through this together with `largest_rejected`.
    pub fn smallest_accepted(&self) -> Option<f64> {
        self.smallest_accepted
    }

    pub fn largest_rejected(&self) -> Option<f64> {
        self.largest_rejected
    }

    /// Residual of `op` after projection onto the closure span.
    pub fn residual(&self, op: &HermitianOp) -> Result<f64> {
        let mut w = op.clone();
        for b in &self.elements {
            let c = b.hs_inner(&w)?;
            w.add_scaled(-c, b);
        }
        Ok(w.hs_norm())
    }
}

/// Orthogonalize `op` against `basis` (two-pass modified Gram-Schmidt) and
/// return it with its residual norm.
fn orthogonalize(mut op: HermitianOp, basis: &[HermitianOp]) -> Result<(HermitianOp, f64)> {
    for _ in 0..2 {
        for b in basis {
            let c = b.hs_inner(&op)?;
            if c != 0.0 {
                op.add_scaled(-c, b);
            }
        }
    }
    Ok((op.clone(), op.hs_norm()))
}

/// Close `generators` under the bracket `i[.,.]` and real linear combination.
///
/// New directions are found by bracketing basis elements against the
/// generators only; left-nested brackets span the generated subalgebra, so
/// this reaches the same span as bracketing all pairs. The worklist order is
/// fixed, making the result deterministic for a fixed input order.
pub fn close_lie_algebra(
    generators: &[HermitianOp],
    max_dim: usize,
    tol: f64,
) -> Result<LieBasis> {
    if generators.is_empty() {
        return Err(Error::EmptyGenerators);
    }
    if max_dim < 1 {
        return Err(Error::Invalid("max_dim must be at least 1".into()));
    }
    let n = generators[0].n();
    for g in generators {
        if g.n() != n {
            return Err(Error::LengthMismatch { left: n, right: g.n() });
        }
    }

    let mut basis: Vec<HermitianOp> = Vec::new();
    let mut smallest_accepted: Option<f64> = None;
    let mut largest_rejected: Option<f64> = None;
    let mut closed = true;

    let accept = |op: HermitianOp,
                      basis: &mut Vec<HermitianOp>,
                      smallest: &mut Option<f64>,
                      largest: &mut Option<f64>|
     -> Result<bool> {
        let (res, norm) = orthogonalize(op, basis)?;
        if norm > tol {
            *smallest = Some(smallest.map_or(norm, |s: f64| s.min(norm)));
            basis.push(res.scaled(1.0 / norm));
            Ok(true)
        } else {
            if norm > 0.0 {
                *largest = Some(largest.map_or(norm, |l: f64| l.max(norm)));
            }
            Ok(false)
        }
    };

    for g in generators {
        if basis.len() >= max_dim {
            // cap reached: only a genuinely new direction makes this partial
            let (_, norm) = orthogonalize(g.clone(), &basis)?;
            if norm > tol {
                closed = false;
                break;
            }
            continue;
        }
        accept(g.clone(), &mut basis, &mut smallest_accepted, &mut largest_rejected)?;
    }

    // worklist: bracket every basis element against every generator
    let mut next = 0usize;
    'outer: while next < basis.len() {
        let elem = basis[next].clone();
        for g in generators {
            let candidate = g.bracket(&elem)?;
            if candidate.is_zero() {
                continue;
            }
            if basis.len() >= max_dim {
                // a direction may still be pending; probe before giving up
                let (_, norm) = orthogonalize(candidate, &basis)?;
                if norm > tol {
                    closed = false;
                    break 'outer;
                }
                continue;
            }
            accept(candidate, &mut basis, &mut smallest_accepted, &mut largest_rejected)?;
        }
        next += 1;
    }

    Ok(LieBasis {
        n,
        generators: generators.to_vec(),
        elements: basis,
        closed,
        tol,
        smallest_accepted,
        largest_rejected,
    })
}

/// Closure dimension g(n) sampled over a range of system sizes.
#[derive(Debug, Clone)]
pub struct GrowthRecord {
    pub family: String,
    /// (n, closure dimension), in the order requested.
    pub samples: Vec<(u32, usize)>,
    /// Sizes whose closure failed, with the failure message.
    pub failures: Vec<(u32, String)>,
}

/// Sample the closure dimension of `family(n)` over `n_range`.
pub fn growth_function<F>(
    name: &str,
    family: F,
    n_range: &[u32],
    max_dim: usize,
    tol: f64,
) -> GrowthRecord
where
    F: Fn(u32) -> Result<Vec<HermitianOp>>,
{
    let mut samples = Vec::new();
    let mut failures = Vec::new();
    for &n in n_range {
        let outcome = family(n).and_then(|gens| close_lie_algebra(&gens, max_dim, tol));
        match outcome {
            Ok(basis) if basis.is_closed() => samples.push((n, basis.dim())),
            Ok(basis) => failures.push((n, format!("dimension cap {} hit", basis.dim()))),
            Err(e) => failures.push((n, e.to_string())),
        }
    }
    GrowthRecord { family: name.to_string(), samples, failures }
}

/// Finite-sample growth classification. The verdict is a heuristic: it
/// reports what the sampled dimensions are consistent with, not a proof.
#[derive(Debug, Clone, PartialEq)]
pub enum VerdictKind {
    /// A degree-k polynomial interpolated on the first k+1 samples reproduces
    /// every remaining sample exactly.
    NonUniversal { degree: usize },
    /// Every admissible polynomial extrapolation is strictly dominated by the
    /// tail of the samples.
    SuperPolynomial,
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub kind: VerdictKind,
    /// The samples the verdict was computed from.
    pub samples: Vec<(u32, usize)>,
    /// Per-degree residuals (actual - predicted) at the held-out samples.
    pub fit_residuals: Vec<(usize, Vec<i128>)>,
}

/// Exact rational evaluated with i128 arithmetic; sample magnitudes stay far
/// below overflow for the sizes the closure engine can reach.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Ratio {
    num: i128,
    den: i128,
}

impl Ratio {
    fn new(num: i128, den: i128) -> Self {
        assert!(den != 0);
        let g = gcd(num.abs(), den.abs()).max(1);
        let sign = if den < 0 { -1 } else { 1 };
        Ratio { num: sign * num / g, den: sign * den / g }
    }

    fn from_int(v: i128) -> Self {
        Ratio { num: v, den: 1 }
    }

    fn add(self, other: Ratio) -> Ratio {
        Ratio::new(self.num * other.den + other.num * self.den, self.den * other.den)
    }

    fn mul(self, other: Ratio) -> Ratio {
        Ratio::new(self.num * other.num, self.den * other.den)
    }

    fn as_integer(self) -> Option<i128> {
        (self.den == 1).then_some(self.num)
    }
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Exact Lagrange interpolation through `nodes`, evaluated at integer `x`.
fn interpolate_at(nodes: &[(i128, i128)], x: i128) -> Ratio {
    let mut acc = Ratio::from_int(0);
    for (i, &(xi, yi)) in nodes.iter().enumerate() {
        let mut term = Ratio::from_int(yi);
        for (j, &(xj, _)) in nodes.iter().enumerate() {
            if i != j {
                term = term.mul(Ratio::new(x - xj, xi - xj));
            }
        }
        acc = acc.add(term);
    }
    acc
}

/// Classify a growth record.
///
/// `NonUniversal(k)` requires the degree-k interpolant through the first k+1
/// samples to reproduce all remaining samples exactly as integers, with k at
/// most half the sample count. `SuperPolynomial` requires the tail to strictly
/// dominate every such interpolant. Anything else is `Inconclusive`.
pub fn universality_verdict(record: &GrowthRecord) -> Result<Verdict> {
    let m = record.samples.len();
    if m < 4 {
        return Err(Error::TooFewSamples { need: 4, got: m });
    }
    let pts: Vec<(i128, i128)> = record
        .samples
        .iter()
        .map(|&(n, g)| (n as i128, g as i128))
        .collect();
    let max_degree = m / 2;

    let mut fit_residuals = Vec::new();
    let mut verdict = None;
    let mut all_dominated = true;

    for k in 0..=max_degree {
        let nodes = &pts[..k + 1];
        let rest = &pts[k + 1..];
        let mut residuals = Vec::new();
        let mut exact = true;
        let mut dominated = !rest.is_empty();
        let mut strict = false;
        for &(x, y) in rest {
            let predicted = interpolate_at(nodes, x);
            // residual as an exact integer when the prediction is integral;
            // a fractional prediction cannot match integer data
            let r = match predicted.as_integer() {
                Some(p) => y - p,
                None => {
                    exact = false;
                    // round toward the sign of the true difference
                    
                    y - predicted.num / predicted.den
                }
            };
            residuals.push(r);
            if r != 0 {
                exact = false;
            }
            if r < 0 {
                dominated = false;
            }
            if r > 0 {
                strict = true;
            }
        }
        fit_residuals.push((k, residuals));
        if exact && verdict.is_none() {
            verdict = Some(VerdictKind::NonUniversal { degree: k });
        }
        if !(dominated && strict) {
            all_dominated = false;
        }
    }

    let kind = match verdict {
        Some(v) => v,
        None if all_dominated => VerdictKind::SuperPolynomial,
        None => VerdictKind::Inconclusive,
    };
    Ok(Verdict { kind, samples: record.samples.clone(), fit_residuals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{heisenberg_family, oprime_family, xy_family, Topology};
    use crate::pauli::hs_inner;

    fn close(gens: &[HermitianOp]) -> LieBasis {
        close_lie_algebra(gens, 4096, RANK_TOL).unwrap()
    }

    #[test]
    fn oprime_two_qubit_closure_has_dimension_six() {
        let gens = oprime_family(2).unwrap();
        assert_eq!(gens.len(), 3);
        let basis = close(&gens);
        assert!(basis.is_closed());
        assert_eq!(basis.dim(), 6);
    }

    #[test]
    fn exchange_three_qubit_closure_has_dimension_four() {
        let gens = heisenberg_family(3, Topology::AllPairs).unwrap();
        let basis = close(&gens);
        assert!(basis.is_closed());
        assert_eq!(basis.dim(), 4);
    }

    #[test]
    fn xy_three_qubit_closure_has_dimension_eight() {
        let gens = xy_family(3, Topology::AllPairs).unwrap();
        let basis = close(&gens);
        assert!(basis.is_closed());
        assert_eq!(basis.dim(), 8);
    }

    #[test]
    fn closure_is_idempotent() {
        let gens = xy_family(3, Topology::AllPairs).unwrap();
        let basis = close(&gens);
        let again = close(basis.elements());
        assert_eq!(again.dim(), basis.dim());
    }

    #[test]
    fn generators_are_contained_in_the_closure() {
        let gens = heisenberg_family(4, Topology::AllPairs).unwrap();
        let basis = close(&gens);
        for g in &gens {
            assert!(basis.residual(g).unwrap() < 1e-9);
        }
    }

    #[test]
    fn closure_dimension_is_order_invariant() {
        let mut gens = oprime_family(3).unwrap();
        let dim = close(&gens).dim();
        gens.reverse();
        assert_eq!(close(&gens).dim(), dim);
        gens.swap(0, 2);
        assert_eq!(close(&gens).dim(), dim);
    }

    #[test]
    fn closure_dimension_respects_the_ambient_bound() {
        for n in 2..=3u32 {
            let gens = heisenberg_family(n, Topology::AllPairs).unwrap();
            let basis = close(&gens);
            assert!(basis.dim() <= 1 << (2 * n));
        }
    }

    #[test]
    fn closure_basis_is_orthonormal_and_bracket_closed() {
        let gens = heisenberg_family(3, Topology::AllPairs).unwrap();
        let basis = close(&gens);
        let els = basis.elements();
        for (i, a) in els.iter().enumerate() {
            for (j, b) in els.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((hs_inner(a, b).unwrap() - expect).abs() < 1e-9);
                // full pairwise bracket closure, not only against generators
                assert!(basis.residual(&a.bracket(b).unwrap()).unwrap() < 1e-9);
            }
        }
    }

    #[test]
    fn max_dim_cap_flags_partial_closure() {
        let gens = xy_family(3, Topology::AllPairs).unwrap();
        let basis = close_lie_algebra(&gens, 5, RANK_TOL).unwrap();
        assert!(!basis.is_closed());
        assert_eq!(basis.dim(), 5);
    }

    #[test]
    fn empty_generator_list_is_an_error() {
        assert!(matches!(
            close_lie_algebra(&[], 10, RANK_TOL),
            Err(Error::EmptyGenerators)
        ));
    }

    #[test]
    fn oprime_growth_matches_the_quadratic_count() {
        let record = growth_function(
            "oprime",
            oprime_family,
            &[2, 3, 4, 5, 6],
            4096,
            RANK_TOL,
        );
        let expect: Vec<(u32, usize)> =
            (2..=6).map(|n| (n, (2 * n * n - n) as usize)).collect();
        assert_eq!(record.samples, expect);
        assert!(record.failures.is_empty());
    }

    #[test]
    fn verdict_on_quadratic_growth() {
        let record = GrowthRecord {
            family: "oprime".into(),
            samples: vec![(2, 6), (3, 15), (4, 28), (5, 45), (6, 66)],
            failures: vec![],
        };
        let v = universality_verdict(&record).unwrap();
        assert_eq!(v.kind, VerdictKind::NonUniversal { degree: 2 });
    }

    #[test]
    fn verdict_on_constant_growth() {
        let record = GrowthRecord {
            family: "collective".into(),
            samples: vec![(2, 3), (3, 3), (4, 3), (5, 3)],
            failures: vec![],
        };
        let v = universality_verdict(&record).unwrap();
        assert_eq!(v.kind, VerdictKind::NonUniversal { degree: 0 });
    }

    #[test]
    fn verdict_on_exponential_growth() {
        let record = GrowthRecord {
            family: "synthetic".into(),
            samples: vec![(2, 4), (3, 16), (4, 64), (5, 256), (6, 1024)],
            failures: vec![],
        };
        let v = universality_verdict(&record).unwrap();
        assert_eq!(v.kind, VerdictKind::SuperPolynomial);
    }

    #[test]
    fn verdict_requires_four_samples() {
        let record = GrowthRecord {
            family: "short".into(),
            samples: vec![(2, 4), (3, 9), (4, 16)],
            failures: vec![],
        };
        assert!(matches!(
            universality_verdict(&record),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn verdict_on_oscillating_data_is_inconclusive() {
        let record = GrowthRecord {
            family: "odd".into(),
            samples: vec![(2, 10), (3, 5), (4, 20), (5, 7), (6, 30)],
            failures: vec![],
        };
        let v = universality_verdict(&record).unwrap();
        assert_eq!(v.kind, VerdictKind::Inconclusive);
    }
}
