//! `burnside` — batch front end for the groupoid calculator.
//!
//! Every subcommand reads plain-text input files (`%GRPD 1`, `%GSET 1`,
//! `%BISET 1`, `%SPAN 1`, `%FUNC 1`), validates them fully before
//! computing, and writes a deterministic report to standard output:
//! identical inputs and flags produce byte-identical reports.
//!
//! Exit codes: 0 — success, or the checked property holds; 1 — the
//! computation ran but the verdict is negative (not isomorphic, a law
//! fails, the two models disagree); 2 — an input could not be parsed or
//! validated, or the inputs do not fit together.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use burnside_core::biset::{compose_bisets, find_isomorphism, module_of_functor, BiSet};
use burnside_core::burnside::{burnside_group, classes_of, indecomposable_code, indecomposables};
use burnside_core::comparison::{module_of_span, span_of_biset};
use burnside_core::format::{
    self, load_biset, load_functor, load_groupoid, load_gset, load_span, Format, NamedGroupoid,
};
use burnside_core::gset::Variance;
use burnside_core::laws::{self, Suite};
use burnside_core::span::{compose_spans, forward_span, transfer_span};

#[derive(Parser)]
#[command(
    name = "burnside",
    version,
    about = "Finite groupoid calculator: equivariant sets, correspondences, and their hom groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a file of any supported format.
    Validate {
        /// File to check; the format is recognised from its first line.
        file: PathBuf,
    },
    /// Compose two bi-sets or two correspondences: OUTER after INNER.
    Compose {
        /// Applied second; its right base must match INNER's left base.
        outer: PathBuf,
        /// Applied first.
        inner: PathBuf,
        /// Directory to write the composite into (as a self-contained
        /// file set); without it only the report is printed.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether two bi-sets are isomorphic; print a bijection if so.
    Iso {
        x: PathBuf,
        y: PathBuf,
    },
    /// List the basis classes of the hom group over two base groupoids.
    Hom {
        /// Groupoid file for the left (contravariant) base.
        #[arg(long)]
        left: PathBuf,
        /// Groupoid file for the right (covariant) base.
        #[arg(long)]
        right: PathBuf,
        /// Keep only classes with at most this many elements.
        #[arg(long)]
        bound: usize,
    },
    /// Split a bi-set into indecomposable pieces, or an equivariant set
    /// into orbits.
    Decompose {
        file: PathBuf,
    },
    /// Convert a bi-set into its correspondence; writes a groupoid file
    /// per base, the apex, and the span file into --out.
    ToSpan {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert a correspondence into its bi-set; writes the base groupoid
    /// files and the bi-set file into --out.
    FromSpan {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the seeded law suites (pentagon, triangle, unit, pullback,
    /// round-trip) and report each case.
    Laws {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Cases per suite.
        #[arg(long, default_value_t = 25)]
        cases: u64,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        report: ReportFormat,
        /// Run a single suite by name instead of all five.
        #[arg(long)]
        suite: Option<String>,
    },
    /// Count double cosets two ways — components of the composite
    /// correspondence of two functors into a common target, and
    /// indecomposable pieces of the matching bi-set composite — and check
    /// that they agree.
    DoubleCoset {
        /// Functor file; its image is the subgroup acting on the right.
        p: PathBuf,
        /// Functor file into the same target; acts on the left.
        q: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Tsv,
}

/// How a subcommand ends: a report with exit 0, a report with exit 1
/// (negative verdict), or an input diagnostic with exit 2.
enum Outcome {
    Holds(String),
    Fails(String),
    BadInput(String),
}

impl From<format::ParseError> for Outcome {
    fn from(e: format::ParseError) -> Outcome {
        Outcome::BadInput(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Validate { file } => validate(&file),
        Command::Compose { outer, inner, out } => compose(&outer, &inner, out.as_deref()),
        Command::Iso { x, y } => iso(&x, &y),
        Command::Hom { left, right, bound } => hom(&left, &right, bound),
        Command::Decompose { file } => decompose(&file),
        Command::ToSpan { file, out } => to_span(&file, &out),
        Command::FromSpan { file, out } => from_span(&file, &out),
        Command::Laws { seed, cases, report, suite } => run_laws(seed, cases, report, suite),
        Command::DoubleCoset { p, q } => double_coset(&p, &q),
    };
    match outcome {
        Outcome::Holds(report) => {
            print!("{report}");
            ExitCode::from(0)
        }
        Outcome::Fails(report) => {
            print!("{report}");
            ExitCode::from(1)
        }
        Outcome::BadInput(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

// ---------------------------------------------------------------------
// Shared report helpers
// ---------------------------------------------------------------------

fn read_text(path: &Path) -> Result<String, Outcome> {
    fs::read_to_string(path)
        .map_err(|e| Outcome::BadInput(format!("{}: cannot read: {e}", path.display())))
}

fn kind_of(path: &Path) -> Result<Format, Outcome> {
    format::sniff(&read_text(path)?).ok_or_else(|| {
        Outcome::BadInput(format!(
            "{}: unrecognised format (expected a `%GRPD 1`, `%GSET 1`, `%BISET 1`, `%SPAN 1`, or `%FUNC 1` file)",
            path.display()
        ))
    })
}

/// Row-major fiber sizes, the per-base-object shape of a bi-set.
fn size_vector(x: &BiSet) -> String {
    let mut sizes = Vec::new();
    for eta in 0..x.left().object_count() {
        for gamma in 0..x.right().object_count() {
            sizes.push(x.fiber(eta, gamma).to_string());
        }
    }
    sizes.join(",")
}

/// `class <hash> size <vector>` — one basis class, identified by the
/// hash of its canonical code.
fn class_line(piece: &BiSet) -> String {
    format!("class {} size {}", indecomposable_code(piece).hash_hex(), size_vector(piece))
}

/// A signed integer combination of classes, `2*[ab..] + 1*[cd..]`.
fn combination(terms: &[(i64, String)]) -> String {
    if terms.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (n, hash)) in terms.iter().enumerate() {
        if i == 0 {
            if *n < 0 {
                out.push_str("- ");
            }
        } else {
            out.push_str(if *n < 0 { " - " } else { " + " });
        }
        let _ = write!(out, "{}*[{hash}]", n.abs());
    }
    out
}

fn write_file(dir: &Path, name: &str, contents: &str, report: &mut String) -> Result<(), Outcome> {
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| Outcome::BadInput(format!("{}: cannot write: {e}", path.display())))?;
    let _ = writeln!(report, "wrote {}", path.display());
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<(), Outcome> {
    fs::create_dir_all(dir)
        .map_err(|e| Outcome::BadInput(format!("{}: cannot create: {e}", dir.display())))
}

// ---------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------

fn validate(file: &Path) -> Outcome {
    match validate_inner(file) {
        Ok(report) => Outcome::Holds(report),
        Err(o) => o,
    }
}

fn validate_inner(file: &Path) -> Result<String, Outcome> {
    let line = match kind_of(file)? {
        Format::Groupoid => {
            let g = load_groupoid(file)?.groupoid;
            format!(
                "ok: groupoid with {} objects, {} morphisms, {} components",
                g.object_count(),
                g.morphism_count(),
                g.components().class_count()
            )
        }
        Format::GSet => {
            let t = load_gset(file)?;
            format!(
                "ok: {} action with {} elements over {} objects, {} orbits",
                match t.variance() {
                    Variance::Covariant => "covariant",
                    Variance::Contravariant => "contravariant",
                },
                t.element_count(),
                t.base().object_count(),
                t.orbits().class_count()
            )
        }
        Format::BiSet => {
            let x = load_biset(file)?;
            format!(
                "ok: admissible bi-set with {} elements over bases of {} and {} objects",
                x.element_count(),
                x.left().object_count(),
                x.right().object_count()
            )
        }
        Format::Span => {
            let s = load_span(file)?;
            format!(
                "ok: correspondence with an apex of {} objects and {} morphisms",
                s.apex().object_count(),
                s.apex().morphism_count()
            )
        }
        Format::Functor => {
            let f = load_functor(file)?;
            format!(
                "ok: functor from {} objects to {} objects",
                f.source().object_count(),
                f.target().object_count()
            )
        }
    };
    Ok(format!("{line}\n"))
}

// ---------------------------------------------------------------------
// compose
// ---------------------------------------------------------------------

fn compose(outer: &Path, inner: &Path, out: Option<&Path>) -> Outcome {
    match compose_inner(outer, inner, out) {
        Ok(report) => Outcome::Holds(report),
        Err(o) => o,
    }
}

fn compose_inner(outer: &Path, inner: &Path, out: Option<&Path>) -> Result<String, Outcome> {
    match (kind_of(outer)?, kind_of(inner)?) {
        (Format::BiSet, Format::BiSet) => {
            let x = load_biset(outer)?;
            let y = load_biset(inner)?;
            let composite = compose_bisets(&x, &y)
                .map_err(|e| Outcome::BadInput(format!("cannot compose: {e}")))?;
            let mut report = format!(
                "composite bi-set: {} elements, size {}\n",
                composite.element_count(),
                size_vector(&composite)
            );
            let terms: Vec<(i64, String)> = classes_of(&composite)
                .iter()
                .map(|(class, (n, _))| (*n as i64, class.hash_hex()))
                .collect();
            let _ = writeln!(report, "element = {}", combination(&terms));
            if let Some(dir) = out {
                ensure_dir(dir)?;
                let h = NamedGroupoid::canonical(composite.left());
                let g = NamedGroupoid::canonical(composite.right());
                write_file(dir, "h.grpd", &format::write_groupoid(composite.left()), &mut report)?;
                write_file(dir, "g.grpd", &format::write_groupoid(composite.right()), &mut report)?;
                write_file(
                    dir,
                    "composite.biset",
                    &format::write_biset(&composite, "h.grpd", &h, "g.grpd", &g),
                    &mut report,
                )?;
            }
            Ok(report)
        }
        (Format::Span, Format::Span) => {
            let a = load_span(outer)?;
            let b = load_span(inner)?;
            let composed = compose_spans(&a, &b)
                .map_err(|e| Outcome::BadInput(format!("cannot compose: {e}")))?;
            let apex = composed.span.apex();
            let mut report = format!(
                "composite correspondence: apex with {} objects, {} morphisms, {} components\n",
                apex.object_count(),
                apex.morphism_count(),
                apex.components().class_count()
            );
            if let Some(dir) = out {
                ensure_dir(dir)?;
                let span = &composed.span;
                let h = NamedGroupoid::canonical(span.left_base());
                let l = NamedGroupoid::canonical(span.apex());
                let g = NamedGroupoid::canonical(span.right_base());
                write_file(dir, "h.grpd", &format::write_groupoid(span.left_base()), &mut report)?;
                write_file(dir, "l.grpd", &format::write_groupoid(span.apex()), &mut report)?;
                write_file(dir, "g.grpd", &format::write_groupoid(span.right_base()), &mut report)?;
                write_file(
                    dir,
                    "composite.span",
                    &format::write_span(span, "h.grpd", &h, "l.grpd", &l, "g.grpd", &g),
                    &mut report,
                )?;
            }
            Ok(report)
        }
        (a, b) => Err(Outcome::BadInput(format!(
            "compose expects two bi-set files or two correspondence files, found `{} 1` and `{} 1`",
            a.magic(),
            b.magic()
        ))),
    }
}

// ---------------------------------------------------------------------
// iso
// ---------------------------------------------------------------------

fn iso(x_path: &Path, y_path: &Path) -> Outcome {
    match iso_inner(x_path, y_path) {
        Ok(o) => o,
        Err(o) => o,
    }
}

fn iso_inner(x_path: &Path, y_path: &Path) -> Result<Outcome, Outcome> {
    let x = load_biset(x_path)?;
    let y = load_biset(y_path)?;
    if x.left() != y.left() || x.right() != y.right() {
        return Err(Outcome::BadInput(
            "the two bi-sets live over different base groupoids".to_string(),
        ));
    }
    match find_isomorphism(&x, &y) {
        Some(found) => {
            let mut report = String::from("isomorphic\n");
            for eta in 0..x.left().object_count() {
                for gamma in 0..x.right().object_count() {
                    if x.fiber(eta, gamma) == 0 {
                        continue;
                    }
                    let pairs: Vec<String> = (0..x.fiber(eta, gamma))
                        .map(|e| format!("{e} -> {}", found.map().apply(eta, gamma, e)))
                        .collect();
                    let _ = writeln!(report, "fiber {eta} {gamma}: {}", pairs.join(", "));
                }
            }
            Ok(Outcome::Holds(report))
        }
        None => Ok(Outcome::Fails("not isomorphic\n".to_string())),
    }
}

// ---------------------------------------------------------------------
// hom
// ---------------------------------------------------------------------

fn hom(left: &Path, right: &Path, bound: usize) -> Outcome {
    match hom_inner(left, right, bound) {
        Ok(report) => Outcome::Holds(report),
        Err(o) => o,
    }
}

fn hom_inner(left: &Path, right: &Path, bound: usize) -> Result<String, Outcome> {
    let h = load_groupoid(left)?.groupoid;
    let g = load_groupoid(right)?.groupoid;
    let basis = burnside_group(&h, &g, bound);
    let mut report = String::new();
    for piece in &basis {
        let _ = writeln!(report, "{}", class_line(piece));
    }
    let _ = writeln!(report, "basis: {} classes within size bound {bound}", basis.len());
    Ok(report)
}

// ---------------------------------------------------------------------
// decompose
// ---------------------------------------------------------------------

fn decompose(file: &Path) -> Outcome {
    match decompose_inner(file) {
        Ok(report) => Outcome::Holds(report),
        Err(o) => o,
    }
}

fn decompose_inner(file: &Path) -> Result<String, Outcome> {
    match kind_of(file)? {
        Format::BiSet => {
            let x = load_biset(file)?;
            let pieces = indecomposables(&x);
            let classes = classes_of(&x);
            let mut report = format!("pieces: {} in {} classes\n", pieces.len(), classes.len());
            let mut terms = Vec::new();
            for (class, (n, rep)) in &classes {
                let _ = writeln!(report, "{n} * {}", class_line(rep));
                terms.push((*n as i64, class.hash_hex()));
            }
            let _ = writeln!(report, "element = {}", combination(&terms));
            Ok(report)
        }
        Format::GSet => {
            let t = load_gset(file)?;
            let orbits = t.orbits();
            let mut report = format!("orbits: {}\n", orbits.class_count());
            if t.variance() == Variance::Covariant {
                if t.is_free() {
                    let dec = t
                        .decompose_free()
                        .map_err(|e| Outcome::BadInput(format!("free splitting failed: {e}")))?;
                    let objects: Vec<String> =
                        dec.summand_objects.iter().map(|o| o.to_string()).collect();
                    let _ = writeln!(
                        report,
                        "free: yes, one summand per orbit at objects {}",
                        objects.join(",")
                    );
                } else {
                    let _ = writeln!(report, "free: no");
                }
            }
            Ok(report)
        }
        other => Err(Outcome::BadInput(format!(
            "decompose expects a bi-set or equivariant-set file, found `{} 1`",
            other.magic()
        ))),
    }
}

// ---------------------------------------------------------------------
// to-span / from-span
// ---------------------------------------------------------------------

fn to_span(file: &Path, out: &Path) -> Outcome {
    match to_span_inner(file, out) {
        Ok(report) => Outcome::Holds(report),
        Err(o) => o,
    }
}

fn to_span_inner(file: &Path, out: &Path) -> Result<String, Outcome> {
    let x = load_biset(file)?;
    let (span, _) = span_of_biset(&x)
        .map_err(|e| Outcome::BadInput(format!("cannot build the correspondence: {e}")))?;
    ensure_dir(out)?;
    let mut report = format!(
        "correspondence: apex with {} objects, {} morphisms, {} components\n",
        span.apex().object_count(),
        span.apex().morphism_count(),
        span.apex().components().class_count()
    );
    let h = NamedGroupoid::canonical(span.left_base());
    let l = NamedGroupoid::canonical(span.apex());
    let g = NamedGroupoid::canonical(span.right_base());
    write_file(out, "h.grpd", &format::write_groupoid(span.left_base()), &mut report)?;
    write_file(out, "l.grpd", &format::write_groupoid(span.apex()), &mut report)?;
    write_file(out, "g.grpd", &format::write_groupoid(span.right_base()), &mut report)?;
    write_file(
        out,
        "converted.span",
        &format::write_span(&span, "h.grpd", &h, "l.grpd", &l, "g.grpd", &g),
        &mut report,
    )?;
    Ok(report)
}

fn from_span(file: &Path, out: &Path) -> Outcome {
    match from_span_inner(file, out) {
        Ok(report) => Outcome::Holds(report),
        Err(o) => o,
    }
}

fn from_span_inner(file: &Path, out: &Path) -> Result<String, Outcome> {
    let s = load_span(file)?;
    let x = module_of_span(&s)
        .map_err(|e| Outcome::BadInput(format!("cannot build the bi-set: {e}")))?;
    ensure_dir(out)?;
    let mut report =
        format!("bi-set: {} elements, size {}\n", x.element_count(), size_vector(&x));
    let h = NamedGroupoid::canonical(x.left());
    let g = NamedGroupoid::canonical(x.right());
    write_file(out, "h.grpd", &format::write_groupoid(x.left()), &mut report)?;
    write_file(out, "g.grpd", &format::write_groupoid(x.right()), &mut report)?;
    write_file(
        out,
        "converted.biset",
        &format::write_biset(&x, "h.grpd", &h, "g.grpd", &g),
        &mut report,
    )?;
    Ok(report)
}

// ---------------------------------------------------------------------
// laws
// ---------------------------------------------------------------------

fn run_laws(seed: u64, cases: u64, shape: ReportFormat, suite: Option<String>) -> Outcome {
    let outcomes = match suite {
        Some(name) => match Suite::from_name(&name) {
            Some(s) => laws::run_suite(s, seed, cases),
            None => {
                let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
                return Outcome::BadInput(format!(
                    "unknown suite `{name}` (one of: {})",
                    names.join(", ")
                ));
            }
        },
        None => laws::run_all(seed, cases),
    };
    let mut report = String::new();
    match shape {
        ReportFormat::Text => {
            let _ = writeln!(report, "seed {seed}, {cases} cases per suite");
            for o in &outcomes {
                let verdict = if o.passed { "pass" } else { "FAIL" };
                let _ =
                    writeln!(report, "{}[{}]: {verdict} - {}", o.suite.name(), o.index, o.detail);
            }
            let passed = outcomes.iter().filter(|o| o.passed).count();
            let _ = writeln!(report, "laws: {passed}/{} passed", outcomes.len());
        }
        ReportFormat::Tsv => {
            let _ = writeln!(report, "suite\tindex\tresult\tdetail");
            for o in &outcomes {
                let verdict = if o.passed { "pass" } else { "fail" };
                let _ = writeln!(
                    report,
                    "{}\t{}\t{verdict}\t{}",
                    o.suite.name(),
                    o.index,
                    o.detail
                );
            }
        }
    }
    if outcomes.iter().all(|o| o.passed) {
        Outcome::Holds(report)
    } else {
        Outcome::Fails(report)
    }
}

// ---------------------------------------------------------------------
// double-coset
// ---------------------------------------------------------------------

fn double_coset(p_path: &Path, q_path: &Path) -> Outcome {
    match double_coset_inner(p_path, q_path) {
        Ok(o) => o,
        Err(o) => o,
    }
}

fn double_coset_inner(p_path: &Path, q_path: &Path) -> Result<Outcome, Outcome> {
    let p = load_functor(p_path)?;
    let q = load_functor(q_path)?;
    if p.target() != q.target() {
        return Err(Outcome::BadInput(
            "the two functors must land in the same target groupoid".to_string(),
        ));
    }
    let along_q = transfer_span(&q)
        .map_err(|e| Outcome::BadInput(format!("{}: cannot transfer along it: {e}", q_path.display())))?;
    let composed = compose_spans(&along_q, &forward_span(&p))
        .map_err(|e| Outcome::BadInput(format!("cannot compose the correspondences: {e}")))?;
    let components = composed.span.apex().components();
    let mut sizes: Vec<usize> = components.members.iter().map(Vec::len).collect();
    sizes.sort_unstable();
    let sizes: Vec<String> = sizes.into_iter().map(|n| n.to_string()).collect();

    let x = module_of_span(&along_q)
        .map_err(|e| Outcome::BadInput(format!("{}: no transfer bi-set: {e}", q_path.display())))?;
    let composite = compose_bisets(&x, &module_of_functor(&p))
        .map_err(|e| Outcome::BadInput(format!("cannot compose the bi-sets: {e}")))?;
    let pieces = indecomposables(&composite).len();

    let mut report = format!(
        "double cosets via correspondence components: {} (sizes {})\n",
        components.class_count(),
        sizes.join(",")
    );
    let _ = writeln!(report, "pieces via bi-set composition: {pieces}");
    if components.class_count() == pieces {
        let _ = writeln!(report, "agreement: yes");
        Ok(Outcome::Holds(report))
    } else {
        let _ = writeln!(report, "agreement: NO");
        Ok(Outcome::Fails(report))
    }
}

