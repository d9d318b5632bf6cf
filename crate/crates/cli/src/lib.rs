//! Command-line front end: one JSON job in, one JSON document out.
//!
//! Every document carries `"schema": "toric-fliplab/1"` and the command name.
//! Exit status 0 means success, 2 a domain error, 3 a malformed job or payload
//! and 4 a violated internal invariant.

pub mod wire;

use std::ffi::OsString;
use std::io::{Read, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};

use clap::{Parser, Subcommand};
use fliplab_core::cone::{dual_cone, intersect, Cone};
use fliplab_core::criteria::{
    check_graph_closure_normal, diagnose, fiber_product_reducedness, reduced_oracle_3d, spade_oracle,
    NormalityVerdict, ReducedWitness, Reducedness, ReducednessDecision, Verdict, NOTE_NORMAL, NOTE_REDUCED_SMOOTH,
};
use fliplab_core::fan::{coarsest_common_refinement, fan_fiber_product, validate_fan, Fan, FanViolation};
use fliplab_core::fixtures::{fixture_coefficients, FIXTURE_NAMES};
use fliplab_core::flip::{
    classify_smooth_flop, classify_terminal_3d, flip_fans, is_flop, wall_relation, SmoothFlopClass,
    TerminalClass, WallRelation,
};
use fliplab_core::semigroup::{cone_hilbert_basis, hilbert_basis};
use fliplab_core::torus::{lattice_fiber_product, torus_fp_decomposition};
use fliplab_core::Error;
use serde_json::{json, Map, Value};

use wire::{SchemaError, WallInput};

/// Version tag of every input and output document.
pub const SCHEMA: &str = "toric-fliplab/1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_SCHEMA: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

const NOTE_TERMINAL: &str = "terminal classification: three-dimensional terminal flips are of type A or B, or the basic flop";
const NOTE_SMOOTH_FLOP: &str = "smooth flops: a flop between smooth cones is ordinary, with rank |J-| - 1";

#[derive(Parser, Debug)]
#[command(name = "toric-fliplab", version, about = "Exact toric flip and fan computations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON payload file, `-` for stdin (the default).
    #[arg(long, global = true, value_name = "FILE|-")]
    pub input: Option<String>,
    /// Destination of the result document, `-` for stdout (the default).
    #[arg(long, global = true, value_name = "FILE|-")]
    pub output: Option<String>,
    /// Use a named example wall relation as the payload.
    #[arg(long, global = true, value_name = "NAME")]
    pub fixture: Option<String>,
    /// Search bound for the brute-force oracles; enables the cross-check.
    #[arg(long, global = true, value_name = "N")]
    pub bound: Option<i64>,
    /// Also check pairs of maximal cones on the same side of the wall.
    #[arg(long, global = true)]
    pub all_pairs: bool,
    /// Do not echo errors to stderr.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Eq)]
pub enum Command {
    /// Dual cone of `{"rank", "rays"}`.
    DualCone,
    /// Hilbert basis of the dual cone's lattice points, or of the cone's with `"of": "cone"`.
    HilbertBasis,
    /// Intersection of `{"first", "second"}` cones.
    Intersect,
    /// Coarsest common refinement of `{"first", "second", "base"}` fans.
    Ccr,
    /// Fan axioms for `{"rank", "rays", "cones"}`.
    ValidateFan,
    /// Normalized relation among the rays around a wall.
    WallRelation,
    /// Both sides of the flip and their common refinement.
    FlipFans,
    /// Terminal and smooth flop classification.
    Classify,
    /// Normality of the graph closure.
    CheckNormal,
    /// Reducedness of the fiber product.
    CheckReduced,
    /// Full report for one flip.
    Diagnose,
    /// Torus and finite group of a lattice fiber product `{"phi1", "phi2"}`.
    TorusFp,
    /// Fiber product of fans `{"first", "second", "base", "phi1", "phi2"}`.
    FanFp,
    /// Print the payload of a named example.
    Fixture {
        /// One of the fixture names; `--fixture` works too.
        name: Option<String>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::DualCone => "dual-cone",
            Command::HilbertBasis => "hilbert-basis",
            Command::Intersect => "intersect",
            Command::Ccr => "ccr",
            Command::ValidateFan => "validate-fan",
            Command::WallRelation => "wall-relation",
            Command::FlipFans => "flip-fans",
            Command::Classify => "classify",
            Command::CheckNormal => "check-normal",
            Command::CheckReduced => "check-reduced",
            Command::Diagnose => "diagnose",
            Command::TorusFp => "torus-fp",
            Command::FanFp => "fan-fp",
            Command::Fixture { .. } => "fixture",
        }
    }
}

/// Knobs shared by the commands.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Options {
    pub bound: Option<i64>,
    pub all_pairs: bool,
}

/// Why a job failed.
#[derive(Clone, Debug)]
pub enum Failure {
    Schema(SchemaError),
    Domain { error: Error, location: String },
    Internal(String),
}

impl From<SchemaError> for Failure {
    fn from(e: SchemaError) -> Self {
        Failure::Schema(e)
    }
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Schema(_) => EXIT_SCHEMA,
            Failure::Domain { .. } => EXIT_DOMAIN,
            Failure::Internal(_) => EXIT_INTERNAL,
        }
    }

    fn to_json(&self) -> Value {
        let (code, message, location) = match self {
            Failure::Schema(e) => ("SchemaError", e.message.clone(), e.location.clone()),
            Failure::Domain { error, location } => (error.code(), error.to_string(), location.clone()),
            Failure::Internal(m) => ("InternalInvariantViolation", m.clone(), "$".to_string()),
        };
        json!({"code": code, "message": message, "location": location})
    }
}

/// Domain failures at `location`, except internal invariants.
fn domain(location: &str) -> impl Fn(Error) -> Failure + '_ {
    move |error| match error {
        Error::InternalInvariant(m) => Failure::Internal(m),
        error => Failure::Domain {
            error,
            location: location.to_string(),
        },
    }
}

/// Exit status and the document to print.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    pub document: Value,
}

impl Outcome {
    /// Pretty-printed document with a trailing newline.
    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.document).expect("values always serialize");
        s.push('\n');
        s
    }
}

fn envelope(command: &Command, body: Map<String, Value>) -> Value {
    let mut doc = body;
    doc.insert("schema".into(), json!(SCHEMA));
    doc.insert("command".into(), json!(command.name()));
    Value::Object(doc)
}

fn failure_outcome(command: &Command, failure: &Failure) -> Outcome {
    let mut body = Map::new();
    body.insert("error".into(), failure.to_json());
    Outcome {
        exit_code: failure.exit_code(),
        document: envelope(command, body),
    }
}

/// Runs one job on a JSON payload; `payload` is ignored by `fixture`.
pub fn run(command: &Command, options: &Options, payload: &str) -> Outcome {
    let result = catch_unwind(AssertUnwindSafe(|| execute(command, options, payload)))
        .unwrap_or_else(|_| Err(Failure::Internal("computation panicked".into())));
    match result {
        Ok(body) => Outcome {
            exit_code: EXIT_OK,
            document: envelope(command, body),
        },
        Err(f) => failure_outcome(command, &f),
    }
}

/// Canonical payload of a named example wall relation.
pub fn fixture_payload(name: &str) -> Result<Value, Error> {
    let w = WallRelation::from_i64(fixture_coefficients(name)?)?;
    Ok(json!({
        "schema": SCHEMA,
        "fixture": name,
        "rank": w.n(),
        "rays": wire::vecs_json(w.rays()),
        "coefficients": wire::ints_json(w.coefficients()),
    }))
}

fn object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("result bodies are objects"),
    }
}

fn execute(command: &Command, options: &Options, payload: &str) -> Result<Map<String, Value>, Failure> {
    if let Command::Fixture { name } = command {
        let name = name.as_deref().unwrap_or_default();
        let mut doc = object(fixture_payload(name).map_err(domain("name"))?);
        doc.remove("schema");
        return Ok(doc);
    }
    let v: Value = serde_json::from_str(payload).map_err(|e| SchemaError {
        message: format!("invalid JSON: {e}"),
        location: format!("line {} column {}", e.line(), e.column()),
    })?;
    let body = match command {
        Command::DualCone => {
            let c = cone(&v, "$")?;
            json!({"cone": wire::cone_json(&dual_cone(&c))})
        }
        Command::HilbertBasis => hilbert_basis_cmd(&v)?,
        Command::Intersect => {
            let obj = wire::object(&v, "$", &["first", "second"])?;
            let a = cone(wire::field(obj, "first", "$")?, "$.first")?;
            let b = cone(wire::field(obj, "second", "$")?, "$.second")?;
            json!({"cone": wire::cone_json(&intersect(&a, &b).map_err(domain("$"))?)})
        }
        Command::Ccr => {
            let obj = wire::object(&v, "$", &["first", "second", "base"])?;
            let [a, b, base] = fans(obj, ["first", "second", "base"])?;
            let f = coarsest_common_refinement(&a, &b, &base).map_err(domain("$"))?;
            json!({"fan": wire::fan_json(&f)})
        }
        Command::ValidateFan => {
            let f = fan(&v, "$")?;
            let check = validate_fan(&f);
            json!({"valid": check.valid, "violation": check.violation.as_ref().map(violation_json)})
        }
        Command::WallRelation => json!({"wall": wire::wall_json(&wall(&v)?)}),
        Command::FlipFans => {
            let w = wall(&v)?;
            let fans = flip_fans(&w).map_err(domain("$"))?;
            let base = Fan::from_cone(&fans.sigma0);
            let refinement =
                coarsest_common_refinement(&fans.sigma, &fans.sigma_prime, &base).map_err(domain("$"))?;
            json!({
                "wall": wire::wall_json(&w),
                "sigma": wire::fan_json(&fans.sigma),
                "sigma_prime": wire::fan_json(&fans.sigma_prime),
                "base": wire::fan_json(&base),
                "refinement": wire::fan_json(&refinement),
                "exceptional_ray": wire::vec_json(&w.exceptional_ray()),
            })
        }
        Command::Classify => classify(&wall(&v)?)?,
        Command::CheckNormal => {
            let w = wall(&v)?;
            let verdict = check_graph_closure_normal(&w, options.all_pairs).map_err(domain("$"))?;
            let mut body = object(normality_json(&verdict));
            body.insert("notes".into(), json!([NOTE_NORMAL]));
            Value::Object(body)
        }
        Command::CheckReduced => check_reduced(&wall(&v)?, options.bound)?,
        Command::Diagnose => {
            let w = wall(&v)?;
            let report = diagnose(&w, options.all_pairs).map_err(domain("$"))?;
            json!({
                "wall": wire::wall_json(&w),
                "irreducible": verdict_str(report.irreducible),
                "graph_closure_normal": normality_json(&report.graph_closure_normal),
                "fiber_product_reduced": reducedness_json(&report.fiber_product_reduced),
                "x_equals_x_tilde": verdict_str(report.x_equals_x_tilde),
                "notes": report.notes,
            })
        }
        Command::TorusFp => {
            let obj = wire::object(&v, "$", &["phi1", "phi2"])?;
            let phi1 = wire::matrix(wire::field(obj, "phi1", "$")?, "$.phi1")?;
            let phi2 = wire::matrix(wire::field(obj, "phi2", "$")?, "$.phi2")?;
            let d = torus_fp_decomposition(&phi1, &phi2).map_err(domain("$"))?;
            let basis = lattice_fiber_product(&phi1, &phi2).map_err(domain("$"))?;
            json!({
                "torus_dim": d.torus_dim,
                "finite_part": wire::ints_json(&d.finite_part),
                "rank": d.rank_r,
                "lattice_basis": wire::vecs_json(&basis),
            })
        }
        Command::FanFp => {
            let obj = wire::object(&v, "$", &["first", "second", "base", "phi1", "phi2"])?;
            let [a, b, base] = fans(obj, ["first", "second", "base"])?;
            let phi1 = wire::matrix(wire::field(obj, "phi1", "$")?, "$.phi1")?;
            let phi2 = wire::matrix(wire::field(obj, "phi2", "$")?, "$.phi2")?;
            let fp = fan_fiber_product(&a, &b, &base, &phi1, &phi2).map_err(domain("$"))?;
            json!({"fan": wire::fan_json(&fp.fan), "lattice_basis": wire::vecs_json(&fp.lattice_basis)})
        }
        Command::Fixture { .. } => unreachable!("handled above"),
    };
    Ok(object(body))
}

fn cone(v: &Value, location: &str) -> Result<Cone, Failure> {
    let (rank, rays) = wire::cone_input(v, location)?;
    Cone::new(rank, rays).map_err(domain(location))
}

fn fan(v: &Value, location: &str) -> Result<Fan, Failure> {
    let (rank, rays, cones) = wire::fan_input(v, location)?;
    Fan::new(rank, rays, cones).map_err(domain(location))
}

fn fans(obj: &Map<String, Value>, keys: [&str; 3]) -> Result<[Fan; 3], Failure> {
    let get = |k: &str| fan(wire::field(obj, k, "$")?, &format!("$.{k}"));
    Ok([get(keys[0])?, get(keys[1])?, get(keys[2])?])
}

fn wall(v: &Value) -> Result<WallRelation, Failure> {
    let built = match wire::wall_input(v, "$")? {
        WallInput::Cones(rank, a, b) => {
            let a = Cone::new(rank, a).map_err(domain("$.cones[0]"))?;
            let b = Cone::new(rank, b).map_err(domain("$.cones[1]"))?;
            wall_relation(&a, &b)
        }
        WallInput::Rays(rays, Some(b)) => WallRelation::new(rays, b),
        WallInput::Rays(rays, None) => WallRelation::from_rays(rays),
        WallInput::Coefficients(b) => WallRelation::from_coefficients(&b),
    };
    built.map_err(domain("$"))
}

fn hilbert_basis_cmd(v: &Value) -> Result<Value, Failure> {
    let mut stripped = v.clone();
    let of = match stripped.as_object_mut().and_then(|m| m.remove("of")) {
        None => "dual".to_string(),
        Some(Value::String(s)) if s == "dual" || s == "cone" => s,
        Some(_) => {
            return Err(Failure::Schema(SchemaError {
                message: "expected \"dual\" or \"cone\"".into(),
                location: "$.of".into(),
            }))
        }
    };
    let c = cone(&stripped, "$")?;
    let basis = if of == "dual" {
        hilbert_basis(&c).map_err(domain("$"))?.generators().to_vec()
    } else {
        cone_hilbert_basis(&c).map_err(domain("$"))?
    };
    Ok(json!({"of": of, "hilbert_basis": wire::vecs_json(&basis)}))
}

fn violation_json(v: &FanViolation) -> Value {
    match v {
        FanViolation::NotStronglyConvex { cone } => json!({"kind": "not_strongly_convex", "cone": cone}),
        FanViolation::RedundantRay { cone, ray } => json!({"kind": "redundant_ray", "cone": cone, "ray": ray}),
        FanViolation::BadIntersection { first, second } => {
            json!({"kind": "bad_intersection", "cones": [first, second]})
        }
    }
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Yes => "yes",
        Verdict::No => "no",
        Verdict::Undetermined => "undetermined",
    }
}

fn normality_json(v: &NormalityVerdict) -> Value {
    json!({
        "normal": v.normal,
        "witness": v.witness.as_ref().map(wire::vec_json),
        "failing_pair": v.failing_pair.map(|(j, i)| [j + 1, i + 1]),
        "pairs_checked": v.pairs_checked,
        "same_side_pairs_hold": v.same_side_pairs_hold,
    })
}

fn reducedness_json(r: &Reducedness) -> Value {
    let reduced = match r {
        Reducedness::Yes => json!(true),
        Reducedness::No(_) => json!(false),
        Reducedness::Undetermined(_) => Value::Null,
    };
    let (lambda, pair, reason) = match r {
        Reducedness::No(ReducedWitness::FailingLambda(l)) => (json!(l), Value::Null, Value::Null),
        Reducedness::No(ReducedWitness::IndivisiblePair { indices, values }) => (
            Value::Null,
            json!({
                "indices": [indices.0 + 1, indices.1 + 1],
                "values": [wire::int_json(&values.0), wire::int_json(&values.1)],
            }),
            Value::Null,
        ),
        Reducedness::Undetermined(why) => (Value::Null, Value::Null, json!(why)),
        Reducedness::Yes => (Value::Null, Value::Null, Value::Null),
    };
    json!({
        "reduced": reduced,
        "verdict": verdict_str(r.verdict()),
        "failing_lambda": lambda,
        "indivisible_pair": pair,
        "reason": reason,
    })
}

fn check_reduced(w: &WallRelation, bound: Option<i64>) -> Result<Value, Failure> {
    let decision: ReducednessDecision = fiber_product_reducedness(w).map_err(domain("$"))?;
    let mut body = object(reducedness_json(&decision.verdict));
    let oracle = match (bound, decision.remainder_input) {
        (None, _) => Value::Null,
        (Some(bound), Some((b1, b2, b3))) => {
            let o = reduced_oracle_3d(b1, b2, b3, bound).map_err(domain("--bound"))?;
            json!({
                "kind": "remainder_scan",
                "bound": bound,
                "reduced": o.reduced,
                "witness": o.witness,
                "agrees": decision.verdict.verdict() == if o.reduced { Verdict::Yes } else { Verdict::No },
            })
        }
        (Some(bound), None) if decision.note == NOTE_REDUCED_SMOOTH => {
            let o = spade_oracle(w, bound).map_err(domain("--bound"))?;
            json!({
                "kind": "decomposition_scan",
                "bound": bound,
                "reduced": o.holds,
                "witness": o.witness.map(|(i, j, z)| json!({"pair": [i + 1, j + 1], "point": z})),
                "agrees": decision.verdict.verdict() == if o.holds { Verdict::Yes } else { Verdict::No },
            })
        }
        (Some(_), None) => Value::Null,
    };
    body.insert("oracle".into(), oracle);
    body.insert("notes".into(), json!([decision.note]));
    Ok(Value::Object(body))
}

fn classify(w: &WallRelation) -> Result<Value, Failure> {
    let terminal = match classify_terminal_3d(w) {
        Ok(TerminalClass::TypeA { a, r }) => json!({"class": "type_a", "a": a, "r": r}),
        Ok(TerminalClass::TypeB { a, r }) => json!({"class": "type_b", "a": a, "r": r}),
        Ok(TerminalClass::Flop) => json!({"class": "flop"}),
        Ok(TerminalClass::Unclassified) => json!({"class": "unclassified"}),
        Err(Error::PreconditionFailed(why)) => json!({"class": "not_applicable", "reason": why}),
        Err(e) => return Err(domain("$")(e)),
    };
    let smooth = match classify_smooth_flop(w) {
        SmoothFlopClass::Ordinary { rank } => json!({"class": "ordinary", "rank": rank}),
        SmoothFlopClass::NotSmoothFlop => json!({"class": "not_smooth_flop"}),
    };
    Ok(json!({
        "wall": wire::wall_json(w),
        "is_flop": is_flop(w),
        "terminal": terminal,
        "smooth_flop": smooth,
        "notes": [NOTE_TERMINAL, NOTE_SMOOTH_FLOP],
    }))
}

fn read_payload(cli: &Cli) -> Result<String, Failure> {
    let schema = |message: String, location: &str| {
        Failure::Schema(SchemaError {
            message,
            location: location.to_string(),
        })
    };
    if let Command::Fixture { .. } = cli.command {
        return Ok(String::new());
    }
    match (&cli.fixture, cli.input.as_deref()) {
        (Some(_), Some(_)) => Err(schema("--fixture and --input are exclusive".into(), "--input")),
        (Some(name), None) => {
            let payload = fixture_payload(name).map_err(domain("--fixture"))?;
            Ok(payload.to_string())
        }
        (None, None) | (None, Some("-")) => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| schema(format!("cannot read stdin: {e}"), "--input"))?;
            Ok(s)
        }
        (None, Some(path)) => {
            std::fs::read_to_string(path).map_err(|e| schema(format!("cannot read {path}: {e}"), "--input"))
        }
    }
}

fn write_output(target: Option<&str>, text: &str) -> std::io::Result<()> {
    match target {
        None | Some("-") => std::io::stdout().write_all(text.as_bytes()),
        Some(path) => std::fs::write(path, text),
    }
}

/// Entry point of the binary; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_SCHEMA } else { EXIT_OK };
        }
    };
    if let Command::Fixture { name } = &mut cli.command {
        if name.is_none() {
            *name = cli.fixture.clone();
        }
    }
    let options = Options {
        bound: cli.bound,
        all_pairs: cli.all_pairs,
    };
    let outcome = match read_payload(&cli) {
        Ok(payload) => run(&cli.command, &options, &payload),
        Err(f) => failure_outcome(&cli.command, &f),
    };
    if outcome.exit_code != EXIT_OK && !cli.quiet {
        if let Some(err) = outcome.document.get("error") {
            eprintln!("toric-fliplab {}: {} at {}", cli.command.name(), err["message"], err["location"]);
        }
    }
    if let Err(e) = write_output(cli.output.as_deref(), &outcome.render()) {
        if !cli.quiet {
            eprintln!("toric-fliplab: cannot write output: {e}");
        }
        return EXIT_INTERNAL;
    }
    outcome.exit_code
}

/// Names accepted by `fixture` and `--fixture`.
pub fn fixture_names() -> &'static [&'static str] {
    &FIXTURE_NAMES
}
