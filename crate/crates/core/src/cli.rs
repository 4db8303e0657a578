//! Command-line driver: argument parsing, commands and reports.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::cardinality::ExactCardinality;
use crate::cohomology::h1_classes;
use crate::covering::GammaCover;
use crate::descent::{descent_group, enumerate_htorsors, forward, invariant_sections, verify_equivalence, DescentError};
use crate::gbundle::{enumerate_bundles, BundleClass, BundleError, EquivBundle, LocalTypeProfile, DEFAULT_BUDGET};
use crate::group::{Elem, FiniteGroup};
use crate::instance::{bundle_to_spec, load_instance, BundleSpec, Instance, InstanceSpec, SchemaError};

/// The embedded two-branch-point instance with `G = S4`.
pub const S4_INSTANCE: &str = include_str!("../data/s4.json");

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "gammag", version, about = "Equivariant bundles on graph covers and their descent")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Emit::Text, global = true)]
    pub emit: Emit,
    /// Cap on enumeration steps.
    #[arg(long, default_value_t = DEFAULT_BUDGET, global = true)]
    pub budget: u64,
    /// Accepted for compatibility; every algorithm is deterministic.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// H^1 classes per stabilizer.
    Classify(InputArgs),
    /// Isomorphism classes of bundles and of torsors, per sector.
    Enumerate(SectorArgs),
    /// Check the equivalence between the two sides, per sector.
    Verify(SectorArgs),
    /// Run the embedded S4 instance.
    ExampleS4(S4Args),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct SectorArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// `anchor`, `all`, or the index of a local-type profile.
    #[arg(long, default_value = "anchor")]
    pub sector: String,
}

#[derive(Debug, Args)]
pub struct S4Args {
    /// Replace the action by the trivial one, keeping the bundle data.
    #[arg(long)]
    pub trivial_action: bool,
    /// Compare the trivial bundle with itself instead of the odd one.
    #[arg(long)]
    pub replace_with_trivial: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{file}: {source}")]
    Schema { file: String, source: SchemaError },
    #[error("{file}: {what}")]
    Missing { file: String, what: &'static str },
    #[error("{file}: at `sector`: {message}")]
    Sector { file: String, message: String },
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Budget(_) => EXIT_BUDGET,
            CliError::Internal(_) => EXIT_FAIL,
            _ => EXIT_INPUT,
        }
    }
}

impl From<BundleError> for CliError {
    fn from(e: BundleError) -> Self {
        match e {
            BundleError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<DescentError> for CliError {
    fn from(e: DescentError) -> Self {
        match e {
            DescentError::Bundle(b) => b.into(),
            DescentError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            other => CliError::Internal(other.to_string()),
        }
    }
}

/// Output of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

#[derive(Debug, Serialize)]
struct Report<T: Serialize> {
    command: &'static str,
    version: &'static str,
    instance_digest: String,
    result: T,
    verdict: &'static str,
}

/// Parses arguments and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { stdout: String::new(), stderr: text, code }
            } else {
                Outcome { stdout: text, stderr: String::new(), code }
            };
        }
    };
    match execute(&cli) {
        Ok((stdout, passed)) => Outcome { stdout, stderr: String::new(), code: if passed { EXIT_PASS } else { EXIT_FAIL } },
        Err(e) => Outcome { stdout: String::new(), stderr: format!("error: {e}\n"), code: e.exit_code() },
    }
}

fn execute(cli: &Cli) -> Result<(String, bool), CliError> {
    match &cli.command {
        Command::Classify(a) => {
            let (file, spec, inst) = read_instance(&a.input)?;
            let (result, text) = classify(&inst, &file)?;
            Ok(render(cli.emit, "classify", &spec, result, text, true))
        }
        Command::Enumerate(a) => {
            let (file, spec, inst) = read_instance(&a.input)?;
            let (result, text) = enumerate(&inst, &file, &a.sector, cli.budget)?;
            Ok(render(cli.emit, "enumerate", &spec, result, text, true))
        }
        Command::Verify(a) => {
            let (file, spec, inst) = read_instance(&a.input)?;
            let (result, text, passed) = verify(&inst, &file, &a.sector, cli.budget)?;
            Ok(render(cli.emit, "verify", &spec, result, text, passed))
        }
        Command::ExampleS4(a) => {
            let (spec, result, text, passed) = example_s4(a.trivial_action, a.replace_with_trivial)?;
            Ok(render(cli.emit, "example-s4", &spec, result, text, passed))
        }
    }
}

fn read_instance(path: &PathBuf) -> Result<(String, InstanceSpec, Instance), CliError> {
    let file = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: file.clone(), message: e.to_string() })?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let spec: InstanceSpec = serde_path_to_error::deserialize(de).map_err(|e| CliError::Schema {
        file: file.clone(),
        source: SchemaError::Parse { path: e.path().to_string(), message: e.inner().to_string() },
    })?;
    let inst = load_instance(&spec).map_err(|source| CliError::Schema { file: file.clone(), source })?;
    Ok((file, spec, inst))
}

/// SHA-256 of the canonical JSON form of the instance.
pub fn instance_digest(spec: &InstanceSpec) -> String {
    let bytes = serde_json::to_vec(spec).expect("instance serializes");
    hex::encode(Sha256::digest(bytes))
}

fn render<T: Serialize>(emit: Emit, command: &'static str, spec: &InstanceSpec, result: T, text: String, passed: bool) -> (String, bool) {
    let digest = instance_digest(spec);
    let verdict = if passed { "pass" } else { "fail" };
    let out = match emit {
        Emit::Json => {
            let report = Report { command, version: env!("CARGO_PKG_VERSION"), instance_digest: digest, result, verdict };
            let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
            s.push('\n');
            s
        }
        Emit::Text => {
            let mut s = format!("{command} (gammag {}) instance {}\n", env!("CARGO_PKG_VERSION"), &digest[..16]);
            s.push_str(&text);
            let _ = writeln!(s, "verdict: {verdict}");
            s
        }
    };
    (out, passed)
}

fn labels(g: &FiniteGroup, xs: &[Elem]) -> Vec<String> {
    xs.iter().map(|&x| g.label(x)).collect()
}

#[derive(Debug, Serialize)]
struct ClassRow {
    stabilizer: Vec<String>,
    vertices: Vec<usize>,
    representative: Vec<String>,
    orbit_size: usize,
    centralizer_order: usize,
}

fn classify(inst: &Instance, file: &str) -> Result<(Vec<ClassRow>, String), CliError> {
    if inst.stabilizers.is_empty() {
        return Err(CliError::Missing { file: file.to_string(), what: "classify needs `stabilizers` or a `cover`" });
    }
    let mut groups: Vec<(Vec<Elem>, Vec<usize>)> = Vec::new();
    for (i, s) in inst.stabilizers.iter().enumerate() {
        match groups.iter_mut().find(|(m, _)| m == s.members()) {
            Some((_, vs)) => vs.push(i),
            None => groups.push((s.members().to_vec(), vec![i])),
        }
    }
    let mut rows = Vec::new();
    let mut text = String::new();
    let _ = writeln!(text, "{:<24} {:<10} {:<32} {:>6} {:>12}", "stabilizer", "vertices", "representative", "orbit", "centralizer");
    for (members, vertices) in groups {
        let sub = inst.stabilizers[vertices[0]].clone();
        let classes = h1_classes(&sub, &inst.action).map_err(|e| CliError::Internal(e.to_string()))?;
        for class in classes {
            let row = ClassRow {
                stabilizer: labels(&inst.gamma, &members),
                vertices: vertices.clone(),
                representative: labels(&inst.g, class.representative.values()),
                orbit_size: class.orbit_size,
                centralizer_order: class.centralizer_order,
            };
            let _ = writeln!(
                text,
                "{:<24} {:<10} {:<32} {:>6} {:>12}",
                format!("{{{}}}", row.stabilizer.join(",")),
                format!("{:?}", row.vertices),
                row.representative.join(" "),
                row.orbit_size,
                row.centralizer_order
            );
            rows.push(row);
        }
    }
    Ok((rows, text))
}

#[derive(Debug, Clone, Serialize)]
struct ProfileEntry {
    vertex: usize,
    class: Vec<String>,
    orbit_size: usize,
}

fn profile_entries(p: &LocalTypeProfile, g: &FiniteGroup) -> Vec<ProfileEntry> {
    p.entries
        .iter()
        .map(|(x, c)| ProfileEntry { vertex: *x, class: labels(g, c.representative.values()), orbit_size: c.orbit_size })
        .collect()
}

fn profile_text(p: &[ProfileEntry]) -> String {
    if p.is_empty() {
        return "(no branch points)".to_string();
    }
    p.iter().map(|e| format!("x{}:[{}]", e.vertex, e.class.join(" "))).collect::<Vec<_>>().join(" ")
}

/// Anchors per requested sector, each the instance anchor or the least
/// class representative of its profile.
fn sector_anchors(inst: &Instance, file: &str, sector: &str, budget: u64) -> Result<Vec<EquivBundle>, CliError> {
    let cover: &Arc<GammaCover> =
        inst.cover.as_ref().ok_or(CliError::Missing { file: file.to_string(), what: "this command needs a `cover`" })?;
    let default_anchor = || match &inst.anchor {
        Some(a) => Ok(a.clone()),
        None => EquivBundle::trivial(cover.clone(), inst.action.clone()).map_err(CliError::from),
    };
    if sector == "anchor" {
        return Ok(vec![default_anchor()?]);
    }
    let classes = enumerate_bundles(cover, &inst.action, None, budget)?;
    let mut anchors: Vec<EquivBundle> = Vec::new();
    let mut profiles: Vec<LocalTypeProfile> = Vec::new();
    for c in &classes {
        let p = c.representative.local_type();
        if !profiles.contains(&p) {
            profiles.push(p);
            anchors.push(c.representative.clone());
        }
    }
    if sector == "all" {
        return Ok(anchors);
    }
    let id: usize = sector.parse().map_err(|_| CliError::Sector {
        file: file.to_string(),
        message: format!("expected `anchor`, `all` or a profile index, got `{sector}`"),
    })?;
    anchors.into_iter().nth(id).map(|a| vec![a]).ok_or_else(|| CliError::Sector {
        file: file.to_string(),
        message: format!("profile index {id} out of range ({} profiles)", profiles.len()),
    })
}

#[derive(Debug, Serialize)]
struct BundleRow {
    bundle: BundleSpec,
    automorphisms: usize,
}

#[derive(Debug, Serialize)]
struct TorsorRow {
    edges: Vec<String>,
    automorphisms: usize,
}

#[derive(Debug, Serialize)]
struct SectorListing {
    profile: Vec<ProfileEntry>,
    vertex_group_orders: Vec<usize>,
    bundles: Vec<BundleRow>,
    torsors: Vec<TorsorRow>,
    bundle_cardinality: String,
    torsor_cardinality: String,
}

fn cardinality(rows: impl Iterator<Item = usize>) -> ExactCardinality {
    crate::cardinality::groupoid_cardinality(rows)
}

fn enumerate(inst: &Instance, file: &str, sector: &str, budget: u64) -> Result<(Vec<SectorListing>, String), CliError> {
    let anchors = sector_anchors(inst, file, sector, budget)?;
    let mut out = Vec::new();
    let mut text = String::new();
    for anchor in anchors {
        let profile = anchor.local_type();
        let classes: Vec<BundleClass> = enumerate_bundles(anchor.cover(), anchor.action(), Some(&profile), budget)?;
        let scheme = Arc::new(descent_group(&anchor)?);
        let torsors = enumerate_htorsors(&scheme, budget)?;
        let listing = SectorListing {
            profile: profile_entries(&profile, &inst.g),
            vertex_group_orders: scheme.vertex_groups().iter().map(|h| h.order()).collect(),
            bundles: classes
                .iter()
                .map(|c| BundleRow { bundle: bundle_to_spec(&c.representative), automorphisms: c.automorphisms })
                .collect(),
            torsors: torsors
                .iter()
                .map(|t| TorsorRow { edges: labels(&inst.g, &t.representative.pair_values()), automorphisms: t.automorphisms })
                .collect(),
            bundle_cardinality: cardinality(classes.iter().map(|c| c.automorphisms)).to_string(),
            torsor_cardinality: cardinality(torsors.iter().map(|c| c.automorphisms)).to_string(),
        };
        let _ = writeln!(text, "sector {}", profile_text(&listing.profile));
        let _ = writeln!(text, "  vertex groups: {:?}", listing.vertex_group_orders);
        let _ = writeln!(text, "  bundle classes: {}  (cardinality {})", listing.bundles.len(), listing.bundle_cardinality);
        for (i, row) in listing.bundles.iter().enumerate() {
            let trans: Vec<String> = row.bundle.trans.iter().map(|(k, v)| format!("{}={}", k.parse::<usize>().unwrap_or_default(), elem_text(v))).collect();
            let lift: Vec<String> = row.bundle.lift.iter().map(|(k, v)| format!("{k}={}", elem_text(v))).collect();
            let _ = writeln!(text, "    [{i}] |Aut|={:<4} trans {{{}}} lift {{{}}}", row.automorphisms, trans.join(" "), lift.join(" "));
        }
        let _ = writeln!(text, "  torsor classes: {}  (cardinality {})", listing.torsors.len(), listing.torsor_cardinality);
        for (i, row) in listing.torsors.iter().enumerate() {
            let _ = writeln!(text, "    [{i}] |Aut|={:<4} edges [{}]", row.automorphisms, row.edges.join(" "));
        }
        out.push(listing);
    }
    Ok((out, text))
}

fn elem_text(r: &crate::instance::ElemRef) -> String {
    match r {
        crate::instance::ElemRef::Index(i) => i.to_string(),
        crate::instance::ElemRef::Label(l) => l.clone(),
    }
}

#[derive(Debug, Serialize)]
struct SectorVerdict {
    profile: Vec<ProfileEntry>,
    domain_checked: usize,
    bundle_classes: usize,
    torsor_classes: usize,
    matching: Vec<(usize, usize)>,
    automorphisms: Vec<(usize, usize)>,
    bundle_cardinality: String,
    torsor_cardinality: String,
    domain: bool,
    bijection: bool,
    automorphism_orders: bool,
    round_trips: bool,
    cardinality: bool,
    failure: Option<String>,
}

fn verify(inst: &Instance, file: &str, sector: &str, budget: u64) -> Result<(Vec<SectorVerdict>, String, bool), CliError> {
    let anchors = sector_anchors(inst, file, sector, budget)?;
    let mut out = Vec::new();
    let mut text = String::new();
    let mut all_pass = true;
    for anchor in anchors {
        let r = verify_equivalence(&anchor, budget)?;
        all_pass &= r.passed();
        let v = SectorVerdict {
            profile: profile_entries(&r.profile, &inst.g),
            domain_checked: r.domain_checked,
            bundle_classes: r.bundle_classes.len(),
            torsor_classes: r.torsor_classes.len(),
            matching: r.matching.clone(),
            automorphisms: r
                .matching
                .iter()
                .map(|&(i, j)| (r.bundle_classes[i].automorphisms, r.torsor_classes[j].automorphisms))
                .collect(),
            bundle_cardinality: r.bundle_cardinality.to_string(),
            torsor_cardinality: r.torsor_cardinality.to_string(),
            domain: r.domain_ok,
            bijection: r.bijection_ok,
            automorphism_orders: r.automorphisms_ok,
            round_trips: r.round_trips_ok,
            cardinality: r.cardinality_ok,
            failure: r.failure.clone(),
        };
        let mark = |b: bool| if b { "ok" } else { "FAIL" };
        let _ = writeln!(text, "sector {}", profile_text(&v.profile));
        let _ = writeln!(text, "  domain of forward ({} data)  {}", v.domain_checked, mark(v.domain));
        let _ = writeln!(text, "  bijection {} <-> {}  {}", v.bundle_classes, v.torsor_classes, mark(v.bijection));
        let _ = writeln!(text, "  |Aut| per matched pair {:?}  {}", v.automorphisms, mark(v.automorphism_orders));
        let _ = writeln!(text, "  round trips  {}", mark(v.round_trips));
        let _ = writeln!(text, "  cardinality {} = {}  {}", v.bundle_cardinality, v.torsor_cardinality, mark(v.cardinality));
        if let Some(f) = &v.failure {
            let _ = writeln!(text, "  first failure: {f}");
        }
        out.push(v);
    }
    Ok((out, text, all_pass))
}

#[derive(Debug, Serialize)]
struct Check {
    name: &'static str,
    observed: bool,
    expected: bool,
}

#[derive(Debug, Serialize)]
struct S4Result {
    variant: &'static str,
    local_types: Vec<Vec<ProfileEntry>>,
    checks: Vec<Check>,
}

/// The embedded S4 instance, optionally patched.
pub fn s4_spec(trivial_action: bool, replace_with_trivial: bool) -> InstanceSpec {
    let mut spec: InstanceSpec = serde_json::from_str(S4_INSTANCE).expect("embedded instance parses");
    if trivial_action {
        spec.action = None;
    }
    if replace_with_trivial {
        spec.bundles = Some(vec![BundleSpec::default()]);
    }
    spec
}

fn example_s4(trivial_action: bool, replace_with_trivial: bool) -> Result<(InstanceSpec, S4Result, String, bool), CliError> {
    let spec = s4_spec(trivial_action, replace_with_trivial);
    let file = "<embedded s4>";
    let loaded = load_instance(&spec);
    let p_valid = loaded.is_ok();
    let inst = loaded.map_err(|source| CliError::Schema { file: file.to_string(), source })?;
    let anchor = inst.anchor.clone().ok_or(CliError::Missing { file: file.to_string(), what: "anchor" })?;
    let other = inst.bundles.first().cloned().ok_or(CliError::Missing { file: file.to_string(), what: "bundles[0]" })?;
    let cover = anchor.cover().clone();
    let branch: Vec<usize> = cover.branch_locus().iter().map(|b| b.vertex).collect();
    let e = inst.g.identity();
    let mut identity_in = true;
    let mut cross_empty = true;
    for &x in &branch {
        identity_in &= invariant_sections(&anchor, &anchor, x)?.contains(&vec![e; cover.fiber(x).len()]);
        cross_empty &= invariant_sections(&anchor, &other, x)?.is_empty();
    }
    let scheme = Arc::new(descent_group(&anchor)?);
    let mismatch = match forward(&scheme, &other) {
        Err(DescentError::LocalTypeMismatch(_)) => true,
        Ok(_) => false,
        Err(err) => return Err(err.into()),
    };
    let cmp = anchor.same_local_type(&other)?;
    let distinct_everywhere = !branch.is_empty() && cmp.witnesses.iter().all(|(_, w)| w.is_none());
    let differ = !replace_with_trivial;
    let checks = vec![
        Check { name: "second bundle is valid", observed: p_valid, expected: true },
        Check { name: "identity is an invariant section of Iso(P, P)", observed: identity_in, expected: true },
        Check { name: "no invariant section of Iso(P, P') at any branch point", observed: cross_empty, expected: differ },
        Check { name: "forward(P, P') reports a local type mismatch", observed: mismatch, expected: differ },
        Check { name: "local types differ at every branch point", observed: distinct_everywhere, expected: differ },
    ];
    let passed = checks.iter().all(|c| c.observed == c.expected);
    let variant = match (trivial_action, replace_with_trivial) {
        (false, false) => "standard",
        (true, false) => "trivial-action",
        (false, true) => "replace-with-trivial",
        (true, true) => "trivial-action,replace-with-trivial",
    };
    let result = S4Result {
        variant,
        local_types: vec![profile_entries(&anchor.local_type(), &inst.g), profile_entries(&other.local_type(), &inst.g)],
        checks,
    };
    let mut text = format!("variant: {variant}\n");
    let _ = writeln!(text, "local type of P : {}", profile_text(&result.local_types[0]));
    let _ = writeln!(text, "local type of P': {}", profile_text(&result.local_types[1]));
    for c in &result.checks {
        let status = if c.observed == c.expected { "ok" } else { "FAIL" };
        let _ = writeln!(text, "  {:<56} {:<5} (expected {:<5}) {status}", c.name, c.observed, c.expected);
    }
    Ok((spec, result, text, passed))
}

