//! Command-line front end.
//!
//! Exit codes: 0 supported or clean, 2 refuted, 3 inconclusive, 1 usage or
//! validation error. Reports are JSON on standard output or `--out FILE`;
//! tabular results also come as TSV with `--format tsv`.
//!
//! Lattice literals are JSON: a row-major matrix whose columns generate the
//! lattice (`[[2,1],[0,3]]` is spanned by `(2,0)` and `(1,3)`), or the
//! serialized `{"dim": d, "basis": [...]}` form. Integers may be quoted
//! strings when they exceed 64 bits. `--spec` and `--odometer` take a JSON
//! file or `gallery:<case>`.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::analysis::{
    best_residue_set, conjugacy_check, conjugate_to_some_odometer_check, deviation_table, finite_factor_check,
    forced_at, forced_closure, free_odometer_factor_check, odometer_factor_check, some_infinite_odometer_check,
    subaction_congruence_check, ConjugateSomeOptions, CriterionVerdict,
};
use crate::construction::{
    default_threshold, folner_report, measure_ledger, unit_vectors, validate, ConstructionSpec, ShapeSpec,
};
use crate::descendants::{cardinality, compose_exact, compose_hist, pair_fraction, DEFAULT_CAP};
use crate::error::Error;
use crate::gallery;
use crate::lattice::{enumerate_sublattices, shape_coset_histogram, Lattice};
use crate::odometer::{
    conjugate_at_depth, coordinate_measure, ff_contains, generate_from_family, is_free_at_depth, is_infinite_at_depth,
    tower_shapes, OdometerPoint, OdometerSpec,
};
use crate::report::{write_atomic, Report};
use crate::verdict::StatusKind;
use crate::zvec::{fmt_ratio, parse_ratio, ZVec};

#[derive(Debug, Parser)]
#[command(name = "rankone", version, about = "Finite-depth checks for rank-one Z^d constructions and odometers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Tsv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sublattice algebra.
    #[command(subcommand)]
    Lattice(LatticeCmd),
    /// Odometers given by chains of lattices.
    #[command(subcommand)]
    Odometer(OdometerCmd),
    /// Construction diagnostics.
    #[command(subcommand)]
    Construct(ConstructCmd),
    /// Descendant sets I_{m,n}.
    #[command(subcommand)]
    Descendants(DescendantsCmd),
    /// Factor and conjugacy criteria.
    #[command(subcommand)]
    Check(CheckCmd),
    /// Built-in constructions and odometers.
    #[command(subcommand)]
    Gallery(GalleryCmd),
}

#[derive(Debug, Subcommand)]
pub enum LatticeCmd {
    /// Canonical form of the subgroup generated by a list of vectors.
    Canonicalize {
        #[arg(long)]
        generators: String,
        #[arg(long)]
        dim: Option<usize>,
    },
    Index {
        #[arg(long, value_parser = lattice_arg)]
        lattice: Lattice,
    },
    Contains {
        #[arg(long, value_parser = lattice_arg)]
        lattice: Lattice,
        #[arg(long, value_parser = vector_arg)]
        vector: ZVec,
    },
    Reduce {
        #[arg(long, value_parser = lattice_arg)]
        lattice: Lattice,
        #[arg(long, value_parser = vector_arg)]
        vector: ZVec,
    },
    Intersect {
        #[arg(long, value_parser = lattice_arg)]
        lattice: Lattice,
        #[arg(long, value_parser = lattice_arg)]
        other: Lattice,
    },
    Join {
        #[arg(long, value_parser = lattice_arg)]
        lattice: Lattice,
        #[arg(long, value_parser = lattice_arg)]
        other: Lattice,
    },
    /// Whether `--lattice` is contained in `--other`.
    Sublattice {
        #[arg(long, value_parser = lattice_arg)]
        lattice: Lattice,
        #[arg(long, value_parser = lattice_arg)]
        other: Lattice,
    },
    /// All sublattices of Z^d with index at most `--max-index`.
    Enumerate {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        max_index: u64,
    },
    /// Coset counts of a shape given as JSON (`{"rect": [...]}` or `{"points": [...]}`).
    Histogram {
        #[arg(long, value_parser = lattice_arg)]
        lattice: Lattice,
        #[arg(long)]
        shape: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum OdometerCmd {
    /// Chain, indices, coordinate measures and tower shapes.
    Show {
        #[arg(long)]
        odometer: PathBuf,
    },
    Free {
        #[arg(long)]
        odometer: PathBuf,
    },
    Infinite {
        #[arg(long)]
        odometer: PathBuf,
    },
    /// Whether a lattice contains some group of the chain.
    FfContains {
        #[arg(long)]
        odometer: PathBuf,
        #[arg(long, value_parser = lattice_arg)]
        lattice: Lattice,
    },
    Conjugate {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// The odometer generated by a JSON list of lattice literals.
    Generate {
        #[arg(long)]
        family: String,
    },
    /// Translates the point with coordinates `point + G_j` by `vector`.
    Act {
        #[arg(long)]
        odometer: PathBuf,
        #[arg(long, value_parser = vector_arg)]
        point: ZVec,
        #[arg(long, value_parser = vector_arg)]
        vector: ZVec,
    },
}

#[derive(Debug, Subcommand)]
pub enum ConstructCmd {
    Validate {
        #[arg(long)]
        spec: String,
    },
    Folner {
        #[arg(long)]
        spec: String,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// JSON list of test vectors; defaults to the unit vectors.
        #[arg(long)]
        vectors: Option<String>,
        #[arg(long, value_parser = ratio_arg)]
        threshold: Option<BigRational>,
    },
    Ledger {
        #[arg(long)]
        spec: String,
        #[arg(long, value_parser = ratio_arg, default_value = "1")]
        base_mass: BigRational,
    },
}

#[derive(Debug, Subcommand)]
pub enum DescendantsCmd {
    Exact {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    Hist {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = lattice_arg)]
        lattice: Lattice,
    },
    Count {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
    },
    PairFraction {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = vector_arg)]
        vector: ZVec,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub spec: String,
    #[arg(long, value_parser = ratio_arg, default_value = "1/6")]
    pub epsilon: BigRational,
    #[arg(long, default_value_t = 6)]
    pub depth: usize,
}

#[derive(Debug, Subcommand)]
pub enum CheckCmd {
    FiniteFactor {
        #[command(flatten)]
        args: CheckArgs,
        #[arg(long, value_parser = lattice_arg)]
        lattice: Lattice,
    },
    OdometerFactor {
        #[command(flatten)]
        args: CheckArgs,
        #[arg(long)]
        odometer: PathBuf,
    },
    Conjugacy {
        #[command(flatten)]
        args: CheckArgs,
        #[arg(long)]
        odometer: PathBuf,
    },
    SomeInfinite {
        #[command(flatten)]
        args: CheckArgs,
        #[arg(long, default_value_t = 16)]
        max_index: u64,
    },
    FreeFactor {
        #[command(flatten)]
        args: CheckArgs,
        #[arg(long, default_value_t = 16)]
        max_index: u64,
    },
    /// Grid search; `--epsilon` and `--eta` may repeat.
    ConjugateSome {
        #[arg(long)]
        spec: String,
        #[arg(long, default_value_t = 16)]
        max_index: u64,
        #[arg(long, default_value_t = 2)]
        l_max: usize,
        #[arg(long = "epsilon", value_parser = ratio_arg)]
        eps_grid: Vec<BigRational>,
        #[arg(long = "eta", value_parser = ratio_arg)]
        eta_grid: Vec<BigRational>,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// Axis numbering starts at 1.
    Subaction {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        axis: usize,
        #[arg(long)]
        modulus: BigInt,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// The table `dev_{m,n}(G)` and the least `N` that works for `--epsilon`.
    Deviation {
        #[arg(long)]
        spec: String,
        #[arg(long, value_parser = lattice_arg)]
        lattice: Lattice,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, value_parser = ratio_arg, default_value = "1/6")]
        epsilon: BigRational,
    },
    /// Forced vectors at level `m` and the closure windows up to `--depth`.
    Forced {
        #[command(flatten)]
        args: CheckArgs,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, value_parser = vector_arg)]
        probe: Vec<ZVec>,
    },
    ResidueSet {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, value_parser = lattice_arg)]
        lattice: Lattice,
    },
}

#[derive(Debug, Subcommand)]
pub enum GalleryCmd {
    List,
    /// Prints the spec of a case as JSON.
    Build {
        name: String,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// Runs a case's expectations; exits 1 on any mismatch.
    Run {
        name: String,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn json_int(v: &Value) -> Option<BigInt> {
    match v {
        Value::Number(n) => n.as_i64().map(BigInt::from).or_else(|| n.as_u64().map(BigInt::from)),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

fn json_vector(v: &Value) -> Result<ZVec, String> {
    let xs = v.as_array().ok_or_else(|| format!("expected a list of integers, got {v}"))?;
    xs.iter()
        .map(|x| json_int(x).ok_or_else(|| format!("not an integer: {x}")))
        .collect::<Result<Vec<_>, _>>()
        .map(ZVec)
}

fn json_lattice(v: &Value) -> Result<Lattice, String> {
    if v.is_object() {
        return serde_json::from_value(v.clone()).map_err(|e| e.to_string());
    }
    let rows = v.as_array().ok_or("a lattice is a matrix or an object")?;
    let rows: Vec<ZVec> = rows.iter().map(json_vector).collect::<Result<_, _>>()?;
    let d = rows.len();
    let k = rows.first().map(|r| r.dim()).unwrap_or(0);
    if d == 0 || rows.iter().any(|r| r.dim() != k) {
        return Err("matrix rows must be nonempty and of equal length".into());
    }
    let cols: Vec<ZVec> = (0..k).map(|j| rows.iter().map(|r| r[j].clone()).collect()).collect();
    Lattice::canonicalize(d, &cols).map_err(|e| e.to_string())
}

pub fn lattice_arg(s: &str) -> Result<Lattice, String> {
    let v: Value = serde_json::from_str(s).map_err(|e| format!("bad lattice JSON: {e}"))?;
    json_lattice(&v)
}

pub fn vector_arg(s: &str) -> Result<ZVec, String> {
    let v: Value = serde_json::from_str(s).map_err(|e| format!("bad vector JSON: {e}"))?;
    json_vector(&v)
}

pub fn ratio_arg(s: &str) -> Result<BigRational, String> {
    parse_ratio(s).ok_or_else(|| format!("expected p/q, got {s:?}"))
}

/// What a command produced.
struct Outcome {
    report: Report,
    /// Printed instead of the report in JSON mode.
    raw: Option<Value>,
    tsv: Option<String>,
    code: i32,
}

#[derive(Debug)]
struct Failure(String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.to_string())
    }
}

impl From<&str> for Failure {
    fn from(e: &str) -> Self {
        Failure(e.into())
    }
}

impl From<String> for Failure {
    fn from(e: String) -> Self {
        Failure(e)
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn status_code(r: &Report) -> i32 {
    match r.status().and_then(|s| s.parse::<StatusKind>().ok()) {
        Some(StatusKind::Supported) | None => 0,
        Some(StatusKind::Refuted) => 2,
        Some(StatusKind::Inconclusive) => 3,
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Res<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn load_spec(src: &str, depth: usize) -> Res<ConstructionSpec> {
    if let Some(name) = src.strip_prefix("gallery:") {
        return gallery::build(name, depth)?
            .construction()
            .cloned()
            .ok_or_else(|| Failure(format!("{name} is an odometer, not a construction")));
    }
    read_json(Path::new(src))
}

fn load_odometer(src: &Path) -> Res<OdometerSpec> {
    if let Some(name) = src.to_str().and_then(|s| s.strip_prefix("gallery:")) {
        return gallery::build(name, crate::analysis::DEFAULT_DEPTH)?
            .odometer()
            .cloned()
            .ok_or_else(|| Failure(format!("{name} is a construction, not an odometer")));
    }
    read_json(src)
}

fn params(pairs: &[(&str, Value)]) -> Map<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn val(x: impl Serialize) -> Value {
    serde_json::to_value(x).expect("serializable")
}

struct Ctx {
    argv: Vec<String>,
}

impl Ctx {
    fn plain(&self, result: impl Serialize, p: Map<String, Value>) -> Outcome {
        let report = Report::new(self.argv.clone(), result, p);
        Outcome { code: status_code(&report), report, raw: None, tsv: None }
    }

    fn verdict(&self, v: &CriterionVerdict, spec_src: &str, spec: &ConstructionSpec) -> Outcome {
        let mut o = self.plain(v, params(&[("spec_source", val(spec_src)), ("spec", val(spec))]));
        o.tsv = Some(v.tables_tsv());
        o
    }
}

fn run(cli: Cli, ctx: &Ctx) -> Res<Outcome> {
    Ok(match cli.command {
        Command::Lattice(c) => lattice_cmd(c, ctx)?,
        Command::Odometer(c) => odometer_cmd(c, ctx)?,
        Command::Construct(c) => construct_cmd(c, ctx)?,
        Command::Descendants(c) => descendants_cmd(c, ctx)?,
        Command::Check(c) => check_cmd(c, ctx)?,
        Command::Gallery(c) => gallery_cmd(c, ctx)?,
    })
}

fn lattice_cmd(c: LatticeCmd, ctx: &Ctx) -> Res<Outcome> {
    let none = Map::new;
    Ok(match c {
        LatticeCmd::Canonicalize { generators, dim } => {
            let v: Value =
                serde_json::from_str(&generators).map_err(|e| Failure(format!("bad generators JSON: {e}")))?;
            let gens: Vec<ZVec> =
                v.as_array().ok_or("generators must be a list")?.iter().map(json_vector).collect::<Result<_, _>>()?;
            let d = dim.or_else(|| gens.first().map(|g| g.dim())).ok_or("no generators and no --dim")?;
            let l = Lattice::canonicalize(d, &gens)?;
            ctx.plain(json!({ "lattice": l, "index": l.index().to_string() }), params(&[("generators", v)]))
        }
        LatticeCmd::Index { lattice } => {
            ctx.plain(json!({ "lattice": lattice, "index": lattice.index().to_string() }), none())
        }
        LatticeCmd::Contains { lattice, vector } => {
            check_dim(&lattice, &vector)?;
            ctx.plain(json!({ "lattice": lattice, "vector": vector, "contains": lattice.contains(&vector) }), none())
        }
        LatticeCmd::Reduce { lattice, vector } => {
            let r = lattice.try_reduce(&vector)?;
            ctx.plain(
                json!({ "residue": r, "order": lattice.order_of(&vector).to_string() }),
                params(&[("lattice", val(&lattice)), ("vector", val(&vector))]),
            )
        }
        LatticeCmd::Intersect { lattice, other } => {
            let l = lattice.intersect(&other)?;
            ctx.plain(
                json!({ "lattice": l, "index": l.index().to_string() }),
                params(&[("a", val(&lattice)), ("b", val(&other))]),
            )
        }
        LatticeCmd::Join { lattice, other } => {
            let l = lattice.join(&other)?;
            ctx.plain(
                json!({ "lattice": l, "index": l.index().to_string() }),
                params(&[("a", val(&lattice)), ("b", val(&other))]),
            )
        }
        LatticeCmd::Sublattice { lattice, other } => {
            if lattice.dim() != other.dim() {
                return Err(Error::DimensionMismatch { expected: lattice.dim(), got: other.dim() }.into());
            }
            ctx.plain(
                json!({ "sublattice": lattice.is_sublattice_of(&other) }),
                params(&[("a", val(&lattice)), ("b", val(&other))]),
            )
        }
        LatticeCmd::Enumerate { dim, max_index } => {
            if dim == 0 || max_index == 0 {
                return Err(Failure("--dim and --max-index must be positive".into()));
            }
            let ls = enumerate_sublattices(dim, max_index);
            let mut tsv = String::from("index\tbasis\n");
            for l in &ls {
                tsv.push_str(&format!("{}\t{}\n", l.index(), val(l.basis())));
            }
            let mut o = ctx.plain(
                json!({ "count": ls.len(), "lattices": ls }),
                params(&[("dim", val(dim)), ("max_index", val(max_index))]),
            );
            o.tsv = Some(tsv);
            o
        }
        LatticeCmd::Histogram { lattice, shape } => {
            let shape: ShapeSpec = serde_json::from_str(&shape).map_err(|e| Failure(format!("bad shape JSON: {e}")))?;
            let h = shape_coset_histogram(&shape, &lattice)?;
            let mut o =
                ctx.plain(json!({ "histogram": h }), params(&[("lattice", val(&lattice)), ("shape", val(&shape))]));
            o.tsv = Some(h.to_tsv());
            o
        }
    })
}

fn check_dim(l: &Lattice, v: &ZVec) -> Res<()> {
    if l.dim() != v.dim() {
        return Err(Error::DimensionMismatch { expected: l.dim(), got: v.dim() }.into());
    }
    Ok(())
}

fn odometer_cmd(c: OdometerCmd, ctx: &Ctx) -> Res<Outcome> {
    Ok(match c {
        OdometerCmd::Show { odometer } => {
            let o = load_odometer(&odometer)?;
            let groups: Vec<Value> = (1..=o.depth())
                .map(|j| {
                    let g = &o.chain()[j - 1];
                    Ok(json!({
                        "j": j,
                        "lattice": g,
                        "index": g.index().to_string(),
                        "measure": fmt_ratio(&coordinate_measure(&o, j)?),
                    }))
                })
                .collect::<Result<_, Error>>()?;
            ctx.plain(
                json!({
                    "groups": groups,
                    "towers": tower_shapes(&o),
                    "free": is_free_at_depth(&o),
                    "infinite": is_infinite_at_depth(&o),
                }),
                params(&[("odometer", val(&o))]),
            )
        }
        OdometerCmd::Free { odometer } => {
            let o = load_odometer(&odometer)?;
            ctx.plain(is_free_at_depth(&o), params(&[("odometer", val(&o))]))
        }
        OdometerCmd::Infinite { odometer } => {
            let o = load_odometer(&odometer)?;
            ctx.plain(is_infinite_at_depth(&o), params(&[("odometer", val(&o))]))
        }
        OdometerCmd::FfContains { odometer, lattice } => {
            let o = load_odometer(&odometer)?;
            ctx.plain(ff_contains(&o, &lattice)?, params(&[("odometer", val(&o)), ("lattice", val(&lattice))]))
        }
        OdometerCmd::Conjugate { a, b, depth } => {
            let oa = load_odometer(&a)?;
            let ob = load_odometer(&b)?;
            ctx.plain(
                conjugate_at_depth(&oa, &ob, depth)?,
                params(&[("a", val(&oa)), ("b", val(&ob)), ("depth", val(depth))]),
            )
        }
        OdometerCmd::Generate { family } => {
            let v: Value = serde_json::from_str(&family).map_err(|e| Failure(format!("bad family JSON: {e}")))?;
            let fam: Vec<Lattice> =
                v.as_array().ok_or("family must be a list")?.iter().map(json_lattice).collect::<Result<_, _>>()?;
            ctx.plain(json!({ "odometer": generate_from_family(&fam)? }), params(&[("family", val(&fam))]))
        }
        OdometerCmd::Act { odometer, point, vector } => {
            let o = load_odometer(&odometer)?;
            let p = OdometerPoint::from_vector(&o, &point)?.act(&vector)?;
            ctx.plain(
                json!({ "coords": p.coords() }),
                params(&[("odometer", val(&o)), ("point", val(&point)), ("vector", val(&vector))]),
            )
        }
    })
}

fn construct_cmd(c: ConstructCmd, ctx: &Ctx) -> Res<Outcome> {
    Ok(match c {
        ConstructCmd::Validate { spec } => {
            let s = load_spec(&spec, 1)?;
            let v = validate(&s);
            let mut o = ctx.plain(
                json!({ "valid": v.is_empty(), "violations": v }),
                params(&[("spec_source", val(&spec)), ("spec", val(&s))]),
            );
            o.code = if v.is_empty() { 0 } else { 1 };
            o
        }
        ConstructCmd::Folner { spec, depth, vectors, threshold } => {
            let s = load_spec(&spec, depth)?;
            let vs = match vectors {
                Some(js) => {
                    let v: Value = serde_json::from_str(&js).map_err(|e| Failure(format!("bad vectors JSON: {e}")))?;
                    v.as_array().ok_or("vectors must be a list")?.iter().map(json_vector).collect::<Result<_, _>>()?
                }
                None => unit_vectors(s.dim()),
            };
            let t = threshold.unwrap_or_else(default_threshold);
            let r = folner_report(&s, &vs, depth, &t)?;
            let mut o = ctx.plain(
                &r,
                params(&[
                    ("spec_source", val(&spec)),
                    ("spec", val(&s)),
                    ("depth", val(depth)),
                    ("vectors", val(&vs)),
                    ("threshold", val(fmt_ratio(&t))),
                ]),
            );
            o.code = if r.flag { 3 } else { 0 };
            o.tsv = Some(r.to_tsv());
            o
        }
        ConstructCmd::Ledger { spec, base_mass } => {
            let s = load_spec(&spec, 1)?;
            let l = measure_ledger(&s, &base_mass)?;
            ctx.plain(
                &l,
                params(&[("spec_source", val(&spec)), ("spec", val(&s)), ("base_mass", val(fmt_ratio(&base_mass)))]),
            )
        }
    })
}

fn descendants_cmd(c: DescendantsCmd, ctx: &Ctx) -> Res<Outcome> {
    Ok(match c {
        DescendantsCmd::Exact { spec, m, n, cap } => {
            let s = load_spec(&spec, n)?;
            let pts = compose_exact(&s, m, n, cap)?;
            let mut tsv = String::new();
            for p in &pts {
                let row: Vec<String> = p.iter().map(|x| x.to_string()).collect();
                tsv.push_str(&row.join("\t"));
                tsv.push('\n');
            }
            let mut o = ctx.plain(
                json!({ "m": m, "n": n, "count": pts.len(), "points": pts }),
                params(&[
                    ("spec_source", val(&spec)),
                    ("spec", val(&s)),
                    ("m", val(m)),
                    ("n", val(n)),
                    ("cap", val(cap)),
                ]),
            );
            o.tsv = Some(tsv);
            o
        }
        DescendantsCmd::Hist { spec, m, n, lattice } => {
            let s = load_spec(&spec, n)?;
            let h = compose_hist(&s, m, n, &lattice)?;
            let mut o = ctx.plain(
                json!({ "m": m, "n": n, "histogram": h }),
                params(&[
                    ("spec_source", val(&spec)),
                    ("spec", val(&s)),
                    ("m", val(m)),
                    ("n", val(n)),
                    ("lattice", val(&lattice)),
                ]),
            );
            o.tsv = Some(h.to_tsv());
            o
        }
        DescendantsCmd::Count { spec, m, n } => {
            let s = load_spec(&spec, n)?;
            let c: BigUint = cardinality(&s, m, n)?;
            ctx.plain(
                json!({ "m": m, "n": n, "count": c.to_string() }),
                params(&[("spec_source", val(&spec)), ("spec", val(&s)), ("m", val(m)), ("n", val(n))]),
            )
        }
        DescendantsCmd::PairFraction { spec, m, n, vector, cap } => {
            let s = load_spec(&spec, n)?;
            let pf = pair_fraction(&s, m, n, &vector, cap)?;
            ctx.plain(
                json!({ "m": m, "n": n, "vector": vector, "pair_fraction": fmt_ratio(&pf) }),
                params(&[
                    ("spec_source", val(&spec)),
                    ("spec", val(&s)),
                    ("m", val(m)),
                    ("n", val(n)),
                    ("vector", val(&vector)),
                    ("cap", val(cap)),
                ]),
            )
        }
    })
}

fn check_cmd(c: CheckCmd, ctx: &Ctx) -> Res<Outcome> {
    Ok(match c {
        CheckCmd::FiniteFactor { args, lattice } => {
            let s = load_spec(&args.spec, args.depth)?;
            let v = finite_factor_check(&s, &lattice, &args.epsilon, args.depth)?;
            ctx.verdict(&v, &args.spec, &s)
        }
        CheckCmd::OdometerFactor { args, odometer } => {
            let s = load_spec(&args.spec, args.depth)?;
            let o = load_odometer(&odometer)?;
            let v = odometer_factor_check(&s, &o, &args.epsilon, args.depth)?;
            ctx.verdict(&v, &args.spec, &s)
        }
        CheckCmd::Conjugacy { args, odometer } => {
            let s = load_spec(&args.spec, args.depth)?;
            let o = load_odometer(&odometer)?;
            let v = conjugacy_check(&s, &o, &args.epsilon, args.depth)?;
            ctx.verdict(&v, &args.spec, &s)
        }
        CheckCmd::SomeInfinite { args, max_index } => {
            let s = load_spec(&args.spec, args.depth)?;
            let (v, set) = some_infinite_odometer_check(&s, max_index, &args.epsilon, args.depth)?;
            let mut o = ctx.verdict(&v, &args.spec, &s);
            o.report.body.insert("candidates".into(), val(&set));
            o
        }
        CheckCmd::FreeFactor { args, max_index } => {
            let s = load_spec(&args.spec, args.depth)?;
            let v = free_odometer_factor_check(&s, max_index, &args.epsilon, args.depth)?;
            ctx.verdict(&v, &args.spec, &s)
        }
        CheckCmd::ConjugateSome { spec, max_index, l_max, eps_grid, eta_grid, depth } => {
            let s = load_spec(&spec, depth)?;
            let mut opts = ConjugateSomeOptions::new(max_index, l_max, depth);
            if !eps_grid.is_empty() {
                opts.eps_grid = eps_grid;
            }
            if !eta_grid.is_empty() {
                opts.eta_grid = eta_grid;
            }
            let (v, cells, odo) = conjugate_to_some_odometer_check(&s, &opts)?;
            let mut o = ctx.verdict(&v, &spec, &s);
            o.report.body.insert("cells".into(), val(&cells));
            o.report.body.insert("odometer".into(), val(&odo));
            o
        }
        CheckCmd::Subaction { spec, axis, modulus, depth } => {
            if axis == 0 {
                return Err(Failure("--axis counts from 1".into()));
            }
            let s = load_spec(&spec, depth)?;
            let v = subaction_congruence_check(&s, axis - 1, &modulus, depth)?;
            ctx.verdict(&v, &spec, &s)
        }
        CheckCmd::Deviation { spec, lattice, depth, epsilon } => {
            let s = load_spec(&spec, depth)?;
            let t = deviation_table(&s, &lattice, depth)?;
            let mut o = ctx.plain(
                json!({ "criterion": "deviation", "least_n": t.least_n(&epsilon), "table": t }),
                params(&[
                    ("spec_source", val(&spec)),
                    ("spec", val(&s)),
                    ("lattice", val(&lattice)),
                    ("depth", val(depth)),
                    ("epsilon", val(fmt_ratio(&epsilon))),
                ]),
            );
            o.tsv = Some(t.to_tsv());
            o
        }
        CheckCmd::Forced { args, m, probe } => {
            let s = load_spec(&args.spec, args.depth)?;
            let threshold = &args.epsilon * BigRational::from_integer(2.into());
            let levels: Vec<usize> = match m {
                Some(m) => vec![m],
                None => (1..args.depth).collect(),
            };
            let mut forced = Vec::new();
            for m in levels {
                forced.push(json!({ "m": m, "vectors": forced_at(&s, m, &threshold, &probe)? }));
            }
            let closure = forced_closure(&s, args.depth, &args.epsilon)?;
            ctx.plain(
                json!({ "forced": forced, "closure": closure }),
                params(&[
                    ("spec_source", val(&args.spec)),
                    ("spec", val(&s)),
                    ("probe", val(&probe)),
                    ("epsilon", val(fmt_ratio(&args.epsilon))),
                    ("threshold", val(fmt_ratio(&threshold))),
                    ("depth", val(args.depth)),
                ]),
            )
        }
        CheckCmd::ResidueSet { spec, l, m, lattice } => {
            let s = load_spec(&spec, m)?;
            let b = best_residue_set(&s, l, m, &lattice)?;
            ctx.plain(&b, params(&[("spec_source", val(&spec)), ("spec", val(&s)), ("lattice", val(&lattice))]))
        }
    })
}

fn gallery_cmd(c: GalleryCmd, ctx: &Ctx) -> Res<Outcome> {
    Ok(match c {
        GalleryCmd::List => {
            let cases = gallery::list();
            let mut tsv = String::from("name\tkind\tdefault_depth\tchecks\n");
            for c in &cases {
                tsv.push_str(&format!("{}\t{}\t{}\t{}\n", c.name, c.kind, c.default_depth, c.expected.len()));
            }
            let mut o = ctx.plain(json!({ "cases": cases }), Map::new());
            o.tsv = Some(tsv);
            o
        }
        GalleryCmd::Build { name, depth } => {
            let spec = gallery::build(&name, depth)?;
            let raw = match &spec {
                gallery::GallerySpec::Construction(c) => val(c),
                gallery::GallerySpec::Odometer(o) => val(o),
            };
            let mut o = ctx.plain(&spec, params(&[("name", val(&name)), ("depth", val(depth))]));
            o.raw = Some(raw);
            o
        }
        GalleryCmd::Run { name, depth, report } => {
            let r = gallery::run_expected(&name, depth)?;
            let mut o = ctx.plain(&r, params(&[("name", val(&name)), ("depth", val(r.depth))]));
            o.code = if r.mismatches == 0 { 0 } else { 1 };
            if let Some(path) = report {
                write_atomic(&path, &o.report.to_json()).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
            }
            o
        }
    })
}

/// Parses `argv` (program name first), runs the command and writes the
/// report. Returns the process exit code.
pub fn dispatch<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    let ctx = Ctx { argv: argv.iter().skip(1).map(|s| s.to_string_lossy().into_owned()).collect() };
    let (out, format) = (cli.out.clone(), cli.format);
    let outcome = match run(cli, &ctx) {
        Ok(o) => o,
        Err(Failure(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            return 1;
        }
    };
    let text = match format {
        Format::Json => match &outcome.raw {
            Some(v) => serde_json::to_string_pretty(v).expect("json") + "\n",
            None => outcome.report.to_json(),
        },
        Format::Tsv => match outcome.tsv {
            Some(t) => t,
            None => {
                let _ = writeln!(stderr, "error: this command has no tabular output; use --format json");
                return 1;
            }
        },
    };
    let written = match out {
        Some(path) => write_atomic(&path, &text).map_err(|e| format!("{}: {e}", path.display())),
        None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return 1;
    }
    outcome.code
}
