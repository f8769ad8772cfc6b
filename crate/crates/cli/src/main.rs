//! Command-line front end: every analysis is a subcommand that emits one
//! versioned JSON report on stdout (optionally to a file), with a nonzero
//! exit code exactly when the report carries an error entry.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use encuniv_core::decomp::{extract_encoding, isotypic_decompose, LogicalCode};
use encuniv_core::lie::{close_lie_algebra, growth_function, universality_verdict, VerdictKind};
use encuniv_core::models::{conjoin, coupling_witness, parse_code, CodeFamily, InteractionFamily};
use encuniv_core::pauli::{HermitianOp, Letter, PauliString, UnitaryMatrix};
use encuniv_core::sil::{build_sil, verify_sil, SilSpec};
use encuniv_core::synth::{
    distance, expm_pulse, synthesize_with_label, trotter_commutator, trotter_sum, Metric,
};

mod report;
use report::Report;

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "encuniv",
    about = "Lie-algebra analysis of qubit interaction sets: closures, growth \
             verdicts, isotypic decompositions, encoded codes, leakage repair, \
             and pulse synthesis",
    after_help = "FAMILY IDS: heisenberg:<topo>, xy:<topo>, oprime, collective \
                  where <topo> is all | chain | pairs=1-2,2-3,...\n\
                  CODE IDS:   code:trio, code:xy-qutrit, code:snj:n=<n>,J=<j>[+|-]\n\
                  Custom Hamiltonians: --file <json> with\n\
                  {\"n\": int, \"terms\": [{\"coeff\": real, \"paulis\": \
                  [{\"site\": int, \"op\": \"X|Y|Z\"}]}]} (one operator per entry)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the JSON report to this path as well as stdout.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// Pretty-print the report.
    #[arg(long, global = true)]
    pretty: bool,
    /// Seed for every randomized step; echoed in the report.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
}

#[derive(Args)]
struct GeneratorSource {
    /// Family identifier, e.g. `heisenberg:all` or `oprime`.
    #[arg(long)]
    family: Option<String>,
    /// Pair topology (`all`, `chain`, `pairs=1-2,...`) for a bare family
    /// name; equivalent to the `family:topology` form.
    #[arg(long)]
    topology: Option<String>,
    /// JSON file with custom Hamiltonians (see --help for the schema).
    #[arg(long)]
    file: Option<PathBuf>,
    /// Qubit count.
    #[arg(long)]
    n: Option<u32>,
}

fn family_id(name: &str, topology: &Option<String>) -> String {
    match topology {
        Some(t) if !name.contains(':') => format!("{name}:{t}"),
        _ => name.to_string(),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Close a generator set as a Lie algebra and report its dimension.
    Closure {
        #[command(flatten)]
        source: GeneratorSource,
        /// Residual threshold for accepting new directions.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Dimension cap; hitting it flags the basis as not closed.
        #[arg(long, default_value_t = 4096)]
        max_dim: usize,
    },
    /// Decompose the state space into isotypic sectors of the closure.
    Decompose {
        #[command(flatten)]
        source: GeneratorSource,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Sample the closure dimension over a size range and classify growth.
    Verdict {
        /// Family identifier (custom files fix one size, so no growth).
        #[arg(long)]
        family: String,
        /// Pair topology for a bare family name.
        #[arg(long)]
        topology: Option<String>,
        #[arg(long)]
        n_min: u32,
        #[arg(long)]
        n_max: u32,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 4096)]
        max_dim: usize,
    },
    /// Build a library code, or extract one from a sector decomposition.
    Encode {
        /// Code identifier, e.g. `code:trio`.
        #[arg(long)]
        code: Option<String>,
        #[command(flatten)]
        source: GeneratorSource,
        /// Sector index (sorted by degeneracy then multiplicity).
        #[arg(long)]
        sector: Option<usize>,
        /// Degeneracy slice to take codewords from.
        #[arg(long, default_value_t = 0)]
        degeneracy: usize,
    },
    /// Conjoin two codes and optionally search for a coupling witness.
    Conjoin {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        /// Run the entangling-witness search over nested brackets.
        #[arg(long)]
        witness: bool,
        /// Bracket depth bound for the search.
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// Product-formula error against the exact exponential oracle.
    Trotter {
        /// `sum` or `commutator`.
        #[arg(long, default_value = "sum")]
        mode: String,
        /// Step counts to evaluate, e.g. `16,32,64`.
        #[arg(long, default_value = "16,32,64")]
        p: String,
        /// Two-operator JSON file; defaults to single-qubit X and Z.
        #[arg(long)]
        file: Option<PathBuf>,
        /// Distance metric: trace, operator, or phase-invariant.
        #[arg(long, default_value = "trace")]
        metric: String,
    },
    /// Search for a short pulse sequence realizing an encoded gate.
    Synthesize {
        /// Code identifier the target acts on.
        #[arg(long)]
        code: String,
        /// Target gate: `identity`, or `rz:<angle>` / `rx:<angle>` /
        /// `ry:<angle>` on a two-dimensional code (angle may use `pi`).
        #[arg(long)]
        target: String,
        /// Generator family; defaults to the code's native family.
        #[arg(long)]
        family: Option<String>,
        #[arg(long, default_value_t = 4)]
        max_pulses: usize,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
    },
    /// Build the two-block leakage-repair unitary and verify it.
    Sil {
        /// Multiply in a random collective-symmetric error of this size
        /// before verification, as a sanity path.
        #[arg(long)]
        perturb: Option<f64>,
    },
}

fn main() {
    let cli = Cli::parse();
    let t0 = Instant::now();
    let mut report = Report::new(SCHEMA_VERSION, cli.seed);
    report.set_command(&command_echo());
    let outcome = run(&cli, &mut report);
    if let Err(e) = outcome {
        report.set_error(&e.to_string());
    }
    report.set_timing(t0.elapsed().as_millis() as u64);
    let rendered = report.render(cli.pretty);
    if let Some(path) = &cli.json {
        if let Err(e) = std::fs::write(path, &rendered) {
            eprintln!("cannot write {}: {e}", path.display());
            std::process::exit(1);
        }
    }
    println!("{rendered}");
    if report.has_error() {
        std::process::exit(1);
    }
}

fn run(cli: &Cli, report: &mut Report) -> encuniv_core::Result<()> {
    match &cli.command {
        Command::Closure { source, tol, max_dim } => {
            let (label, n, gens) = load_generators(source)?;
            let basis = close_lie_algebra(&gens, *max_dim, *tol)?;
            report.results(json!({
                "family": label,
                "n": n,
                "num_generators": gens.len(),
                "dimension": basis.dim(),
                "closed": basis.is_closed(),
            }));
            report.residuals(json!({
                "rank_tol": tol,
                "smallest_accepted": basis.smallest_accepted(),
                "largest_rejected": basis.largest_rejected(),
            }));
        }
        Command::Decompose { source, tol } => {
            let (label, n, gens) = load_generators(source)?;
            let basis = close_lie_algebra(&gens, 4096, *tol)?;
            let sectors = isotypic_decompose(&basis, cli.seed)?;
            let table: Vec<Value> = sectors
                .iter()
                .map(|s| {
                    json!({
                        "n_j": s.n_j(),
                        "d_j": s.d_j(),
                        "su_verdict": if s.n_j() == 1 {
                            Value::from("n/a")
                        } else {
                            Value::from(s.su_verdict())
                        },
                    })
                })
                .collect();
            let covered: usize = sectors.iter().map(|s| s.dim()).sum();
            report.results(json!({
                "family": label,
                "n": n,
                "closure_dimension": basis.dim(),
                "sectors": table,
                "state_dimension": covered,
            }));
            let leak = sectors.iter().map(|s| s.max_leakage()).fold(0.0, f64::max);
            let fact = sectors.iter().map(|s| s.factor_residual()).fold(0.0, f64::max);
            report.residuals(json!({
                "max_leakage": leak,
                "max_factor_residual": fact,
            }));
        }
        Command::Verdict { family, topology, n_min, n_max, tol, max_dim } => {
            let fam = InteractionFamily::parse(&family_id(family, topology))?;
            let sizes: Vec<u32> = (*n_min..=*n_max).collect();
            let record = growth_function(&fam.name(), |n| fam.build(n), &sizes, *max_dim, *tol);
            let verdict = universality_verdict(&record)?;
            let (kind, degree) = match verdict.kind {
                VerdictKind::NonUniversal { degree } => ("non-universal", Some(degree)),
                VerdictKind::SuperPolynomial => ("super-polynomial", None),
                VerdictKind::Inconclusive => ("inconclusive", None),
            };
            report.results(json!({
                "family": record.family,
                "samples": record.samples,
                "failures": record.failures,
                "verdict": kind,
                "polynomial_degree": degree,
                "note": "finite-sample heuristic, not a proof",
            }));
            report.residuals(json!({
                "fit_residuals": verdict
                    .fit_residuals
                    .iter()
                    .map(|(k, r)| json!({
                        "degree": k,
                        "residuals": r.iter().map(|v| *v as i64).collect::<Vec<i64>>(),
                    }))
                    .collect::<Vec<Value>>(),
            }));
        }
        Command::Encode { code, source, sector, degeneracy } => {
            let built = match (code, sector) {
                (Some(id), _) => parse_code(id)?,
                (None, Some(k)) => {
                    let (_, _, gens) = load_generators(source)?;
                    let basis = close_lie_algebra(&gens, 4096, 1e-9)?;
                    let sectors = isotypic_decompose(&basis, cli.seed)?;
                    let sector = sectors.get(*k).ok_or(encuniv_core::Error::IndexOutOfRange {
                        index: *k,
                        limit: sectors.len(),
                    })?;
                    extract_encoding(sector, *degeneracy)?
                }
                _ => {
                    return Err(encuniv_core::Error::Invalid(
                        "need either --code or --family with --sector".into(),
                    ))
                }
            };
            report.results(json!({
                "label": built.label(),
                "n": built.n(),
                "dim_l": built.dim_l(),
                "codewords": code_json(&built),
            }));
        }
        Command::Conjoin { left, right, witness, depth } => {
            let lc = parse_code(left)?;
            let rc = parse_code(right)?;
            let joined = conjoin(&lc, &rc)?;
            let mut results = Map::new();
            results.insert("left".into(), json!(lc.label()));
            results.insert("right".into(), json!(rc.label()));
            results.insert("n".into(), json!(joined.n()));
            results.insert("product_dimension".into(), json!(joined.dim()));
            results.insert(
                "ambient".into(),
                json!({
                    "label": joined.ambient().label,
                    "dimension": joined.ambient().basis.ncols(),
                }),
            );
            let mut residuals = Map::new();
            residuals.insert("embedding".into(), json!(joined.embedding_residual()));
            if *witness {
                let family = match lc.family() {
                    CodeFamily::Xy => InteractionFamily::parse("xy:all")?,
                    CodeFamily::Exchange => InteractionFamily::parse("heisenberg:all")?,
                    CodeFamily::Generic => {
                        return Err(encuniv_core::Error::IncompatibleCodes(
                            "witness search needs a family-tagged code".into(),
                        ))
                    }
                };
                let gens = family.build(joined.n())?;
                match coupling_witness(&joined, &gens, *depth) {
                    Ok(w) => {
                        results.insert("witness".into(), json!(w.description));
                        residuals.insert("witness_leakage".into(), json!(w.leakage));
                        residuals.insert("witness_entangling".into(), json!(w.entangling_residual));
                    }
                    Err(e) => {
                        results.insert("witness".into(), Value::Null);
                        results.insert("witness_note".into(), json!(e.to_string()));
                    }
                }
            }
            report.results(Value::Object(results));
            report.residuals(Value::Object(residuals));
        }
        Command::Trotter { mode, p, file, metric } => {
            let metric = Metric::parse(metric)?;
            let (label, a, b) = match file {
                Some(path) => {
                    let (label, _, ops) = load_file(path)?;
                    if ops.len() < 2 {
                        return Err(encuniv_core::Error::Invalid(
                            "trotter needs two operators".into(),
                        ));
                    }
                    (label, ops[0].clone(), ops[1].clone())
                }
                None => (
                    "builtin:x-and-z".to_string(),
                    HermitianOp::single(1.0, PauliString::single(1, 1, Letter::X)?),
                    HermitianOp::single(1.0, PauliString::single(1, 1, Letter::Z)?),
                ),
            };
            let steps: Vec<u64> = p
                .split(',')
                .map(|s| s.trim().parse::<u64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| encuniv_core::Error::Invalid(format!("bad step list `{p}`")))?;
            let (target, mode_label) = match mode.as_str() {
                "sum" => (expm_pulse(&(&a + &b), 1.0)?, "sum"),
                "commutator" => (expm_pulse(&b.bracket(&a)?, 1.0)?, "commutator"),
                _ => return Err(encuniv_core::Error::Invalid(format!("unknown mode `{mode}`"))),
            };
            let mut table = Vec::new();
            for &steps_p in &steps {
                let approx = match mode_label {
                    "sum" => trotter_sum(&a, &b, 1.0, 1.0, steps_p)?,
                    _ => trotter_commutator(&a, &b, steps_p)?,
                };
                table.push(json!({
                    "p": steps_p,
                    "distance": distance(&approx, &target, metric)?,
                }));
            }
            report.results(json!({
                "operators": label,
                "mode": mode_label,
                "errors": table,
            }));
        }
        Command::Synthesize { code, target, family, max_pulses, tol } => {
            let built = parse_code(code)?;
            let fam = match family {
                Some(f) => InteractionFamily::parse(f)?,
                None => match built.family() {
                    CodeFamily::Exchange => InteractionFamily::parse("heisenberg:all")?,
                    CodeFamily::Xy => InteractionFamily::parse("xy:all")?,
                    CodeFamily::Generic => {
                        return Err(encuniv_core::Error::Invalid(
                            "generic codes need an explicit --family".into(),
                        ))
                    }
                },
            };
            let gens = fam.build(built.n())?;
            let target_u = parse_target(target, built.dim_l())?;
            let result = synthesize_with_label(
                &target_u,
                target,
                &built,
                &gens,
                *max_pulses,
                *tol,
                cli.seed,
            )?;
            let pair_labels = generator_labels(&fam, built.n())?;
            report.results(json!({
                "code": built.label(),
                "target": target,
                "generators": fam.name(),
                "success": result.success,
                "pulses": result
                    .sequence
                    .pulses
                    .iter()
                    .map(|&(k, t)| json!({"generator": pair_labels[k], "duration": t}))
                    .collect::<Vec<Value>>(),
                "evaluations": result.evaluations,
            }));
            report.residuals(json!({
                "distance": result.distance,
                "tol": tol,
            }));
            if !result.success {
                report.set_error(&format!(
                    "tolerance {tol} not met; best distance {:.3e}",
                    result.distance
                ));
            }
        }
        Command::Sil { perturb } => {
            let built = build_sil(&SilSpec::standard())?;
            let checked: UnitaryMatrix = match perturb {
                Some(eps) => perturb_unitary(&built, *eps, cli.seed)?,
                None => built,
            };
            let rep = verify_sil(&checked)?;
            report.results(json!({
                "dimension": 64,
                "perturbation": perturb,
                "passes_truth_table": rep.passes_truth_table(),
                "passes_symmetry": rep.passes_symmetry(),
                "passes": rep.passes(),
            }));
            report.residuals(json!({
                "cases": rep.case_residuals,
                "collective_commutators": rep.symmetry_residuals,
                "unitarity": rep.unitarity_residual,
                "tol": rep.tol,
            }));
        }
    }
    Ok(())
}

fn command_echo() -> String {
    std::env::args().skip(1).collect::<Vec<_>>().join(" ")
}

fn load_generators(
    source: &GeneratorSource,
) -> encuniv_core::Result<(String, u32, Vec<HermitianOp>)> {
    match (&source.family, &source.file) {
        (Some(id), None) => {
            let n = source.n.ok_or_else(|| {
                encuniv_core::Error::Invalid("--n is required with --family".into())
            })?;
            let fam = InteractionFamily::parse(&family_id(id, &source.topology))?;
            Ok((fam.name(), n, fam.build(n)?))
        }
        (None, Some(path)) => load_file(path),
        _ => Err(encuniv_core::Error::Invalid(
            "provide exactly one of --family or --file".into(),
        )),
    }
}

#[derive(serde::Deserialize)]
struct HamiltonianFile {
    n: u32,
    terms: Vec<FileTerm>,
}

#[derive(serde::Deserialize)]
struct FileTerm {
    coeff: f64,
    paulis: Vec<FilePauli>,
}

#[derive(serde::Deserialize)]
struct FilePauli {
    site: u32,
    op: String,
}

/// Read the custom-Hamiltonian JSON schema: one operator per `terms` entry.
fn load_file(path: &PathBuf) -> encuniv_core::Result<(String, u32, Vec<HermitianOp>)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| encuniv_core::Error::Invalid(format!("{}: {e}", path.display())))?;
    let parsed: HamiltonianFile = serde_json::from_str(&text)
        .map_err(|e| encuniv_core::Error::Invalid(format!("{}: {e}", path.display())))?;
    let mut ops = Vec::new();
    for term in &parsed.terms {
        let mut letters = vec![Letter::I; parsed.n as usize];
        for p in &term.paulis {
            if p.site < 1 || p.site > parsed.n {
                return Err(encuniv_core::Error::SiteOutOfRange { site: p.site, n: parsed.n });
            }
            letters[(p.site - 1) as usize] = match p.op.as_str() {
                "X" => Letter::X,
                "Y" => Letter::Y,
                "Z" => Letter::Z,
                other => {
                    return Err(encuniv_core::Error::Invalid(format!(
                        "bad pauli `{other}` (want X|Y|Z)"
                    )))
                }
            };
        }
        ops.push(HermitianOp::single(term.coeff, PauliString::from_letters(&letters)));
    }
    if ops.is_empty() {
        return Err(encuniv_core::Error::EmptyGenerators);
    }
    Ok((format!("file:{}", path.display()), parsed.n, ops))
}

fn code_json(code: &LogicalCode) -> Value {
    let words: Vec<Value> = code
        .codewords()
        .iter()
        .map(|w| {
            let entries: Vec<Value> = w
                .iter()
                .enumerate()
                .filter(|(_, a)| a.norm() > 1e-12)
                .map(|(idx, a)| json!({"basis_index": idx, "re": a.re, "im": a.im}))
                .collect();
            Value::Array(entries)
        })
        .collect();
    Value::Array(words)
}

fn parse_angle(text: &str) -> encuniv_core::Result<f64> {
    let bad = || encuniv_core::Error::Invalid(format!("bad angle `{text}`"));
    let t = text.trim().to_lowercase();
    let leading = |s: &str| -> Option<f64> {
        let s = s.trim();
        if s.is_empty() {
            Some(1.0)
        } else {
            s.parse::<f64>().ok()
        }
    };
    let numerator = |s: &str| -> Option<f64> {
        match s.trim().strip_suffix("pi") {
            Some(head) => Some(leading(head)? * std::f64::consts::PI),
            None => s.trim().parse::<f64>().ok(),
        }
    };
    if let Some((num, den)) = t.split_once('/') {
        let num = numerator(num).ok_or_else(bad)?;
        let den = den.trim().parse::<f64>().map_err(|_| bad())?;
        return Ok(num / den);
    }
    numerator(&t).ok_or_else(bad)
}

fn parse_target(spec: &str, dim_l: usize) -> encuniv_core::Result<UnitaryMatrix> {
    use nalgebra::DMatrix;
    use num_complex::Complex64 as C64;
    if spec == "identity" {
        return Ok(UnitaryMatrix::identity(dim_l));
    }
    let (axis, angle) = spec.split_once(':').ok_or_else(|| {
        encuniv_core::Error::Invalid(format!("bad target `{spec}` (want identity or rz:<angle>)"))
    })?;
    if dim_l != 2 {
        return Err(encuniv_core::Error::Invalid(format!(
            "rotation targets need a two-dimensional code, got dim {dim_l}"
        )));
    }
    let theta = parse_angle(angle)?;
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let mut m = DMatrix::<C64>::zeros(2, 2);
    match axis {
        "rz" => {
            m[(0, 0)] = C64::new(c, -s);
            m[(1, 1)] = C64::new(c, s);
        }
        "rx" => {
            m[(0, 0)] = C64::new(c, 0.0);
            m[(1, 1)] = C64::new(c, 0.0);
            m[(0, 1)] = C64::new(0.0, -s);
            m[(1, 0)] = C64::new(0.0, -s);
        }
        "ry" => {
            m[(0, 0)] = C64::new(c, 0.0);
            m[(1, 1)] = C64::new(c, 0.0);
            m[(0, 1)] = C64::new(-s, 0.0);
            m[(1, 0)] = C64::new(s, 0.0);
        }
        other => {
            return Err(encuniv_core::Error::Invalid(format!("unknown target axis `{other}`")))
        }
    }
    UnitaryMatrix::new(m)
}

/// Human-readable pair labels in builder order, e.g. `E(1,2)` or `A(2,3)`.
fn generator_labels(fam: &InteractionFamily, n: u32) -> encuniv_core::Result<Vec<String>> {
    use encuniv_core::models::FamilyKind;
    let gens = fam.build(n)?;
    Ok(match fam.kind() {
        FamilyKind::Heisenberg | FamilyKind::Xy => {
            let prefix = if fam.kind() == FamilyKind::Heisenberg { "E" } else { "A" };
            gens.iter()
                .map(|g| {
                    let mut sites: Vec<u32> = Vec::new();
                    for (s, _) in g.terms() {
                        for site in 1..=n {
                            if s.letter(site) != Letter::I && !sites.contains(&site) {
                                sites.push(site);
                            }
                        }
                    }
                    sites.sort();
                    format!("{prefix}({},{})", sites[0], sites[1])
                })
                .collect()
        }
        _ => (0..gens.len()).map(|k| format!("g{k}")).collect(),
    })
}

/// `U exp(i eps K)` for a random unit-strength Hermitian `K`; the sanity
/// path uses it to confirm the verifier reports an error of the same size.
fn perturb_unitary(u: &UnitaryMatrix, eps: f64, seed: u64) -> encuniv_core::Result<UnitaryMatrix> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut k = HermitianOp::zero(6);
    for _ in 0..12 {
        let letters: Vec<Letter> = (0..6)
            .map(|_| match rng.gen_range(0..4) {
                0 => Letter::I,
                1 => Letter::X,
                2 => Letter::Y,
                _ => Letter::Z,
            })
            .collect();
        k.add_term(rng.gen_range(-1.0..1.0), PauliString::from_letters(&letters));
    }
    let norm = k.hs_norm();
    if norm > 0.0 {
        k = k.scaled(1.0 / norm);
    }
    let error = expm_pulse(&k, eps)?;
    UnitaryMatrix::new(u.as_matrix() * error.as_matrix())
}
