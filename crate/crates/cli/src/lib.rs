//! Command-line front end. [`run`] does everything `main` does, against arbitrary streams.

pub mod cache;
pub mod chain;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use enriq_core::chern::{
    admissible_chern_orbits, enumerate_admissible_chern, moduli_dim, orbits_of, raw_window, required_c1_dot_h,
    wild_family, window_depth, write_chern_csv,
};
use enriq_core::lattice::MAX_INPUT_COORD;
use enriq_core::stability::{stability_scan, verify_cotangent_ulrich_classes};
use enriq_core::toric::{
    fixed_points, invariant_monomials, sextic_image, sextic_label, singular_scan_fq, to_sextic_form,
    TriPolynomial,
};
use enriq_core::ulrich::{
    conjecture_check, construct_ulrich_pair, enumerate_ulrich_lines, is_ulrich_line, sort_canonical,
    ConjectureOutcome, UlrichReport, UlrichSolution,
};
use enriq_core::{format_divisor, parse_divisor, DivisorClass, Error};

use crate::cache::Cache;
use crate::chain::build_stable_chain;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "enriq", version, about = "Ulrich line bundles and related lattice computations on Enriques surfaces")]
pub struct RunConfig {
    /// Size of the worker pool (default: one per CPU).
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub workers: Option<u32>,

    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,

    /// Directory for cached enumerations. ENRIQ_CACHE takes precedence.
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// All Ulrich line bundles for a polarization H with H² > 0.
    #[command(after_help = "CSV columns: D,D1,D2,orbit")]
    UlrichLines {
        #[arg(long = "h")]
        h: String,
    },
    /// Search for (-2)-classes D1, D2 with D1 - D2 = H.
    Conjecture {
        #[arg(long = "h")]
        h: String,
        /// Coordinate bound for the box search used when H² ≤ 0.
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(i64).range(0..))]
        bound: i64,
    },
    /// The explicit pair with D1 - D2 = kΔ.
    #[command(after_help = "CSV columns: k,D1,D2")]
    ConstructPair {
        #[arg(long, allow_hyphen_values = true)]
        k: i64,
    },
    /// Admissible first Chern classes of rank r Ulrich bundles.
    #[command(after_help = "CSV columns: r,c1_orbit_form,c2,dim,count")]
    ChernAdmissible {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        r: u32,
        #[arg(long = "h", default_value = "Delta")]
        h: String,
        /// Also list every class, not only orbit counts.
        #[arg(long)]
        list: bool,
        /// Keep every class allowed by the slope and Hodge index bounds, even c2 > 0 in rank 1.
        #[arg(long)]
        raw_window: bool,
    },
    /// c1² - 19r² + 1.
    ModuliDim {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        r: u32,
        #[arg(long = "d")]
        d: String,
    },
    /// The rank r family of Ulrich bundles with c1 = 3kΔ + ε(E7+E8+E9+2E10).
    #[command(after_help = "CSV columns: r,k,epsilon,c1,dim")]
    Wild {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        r: u32,
    },
    /// Iterated extensions of Ulrich line bundles for Δ up to rank r.
    #[command(after_help = "CSV columns: rank,D,c1,c1_square,ext1,modular_dim,ext_locus_dim")]
    Chain {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        r: u32,
        /// Line classes to use first, in order (repeatable).
        #[arg(long = "d")]
        d: Vec<String>,
    },
    /// Exhaustive check of the destabilizer combinatorics over [-B, B]^10.
    StabilityScan {
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(i64).range(1..))]
        bound: i64,
        /// Include elapsed time (makes output non-reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// Squares of the twists in the cotangent bundle resolution.
    #[command(after_help = "CSV columns: class,square,mirror_square")]
    CotangentCheck,
    /// Invariant (2,2,2) divisors on (P1)^3.
    Toric {
        #[command(subcommand)]
        command: ToricCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum ToricCommand {
    /// The 14 invariant monomials and their sextic images.
    #[command(after_help = "CSV columns: i,j,k,monomial,sextic")]
    Monomials,
    /// The 8 fixed points of the involution.
    #[command(after_help = "CSV columns: point,vertex_monomial")]
    FixedPoints,
    /// Rewrite a polynomial as a sextic in x, y, z, w.
    Sextic {
        /// JSON map {"i,j,k": coefficient}.
        #[arg(long)]
        poly: String,
    },
    /// Singular points over F_q. Without --poly a seeded random polynomial is used.
    Scan {
        #[arg(long, default_value_t = 5)]
        q: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        poly: Option<String>,
    },
}

/// Raised for invalid flag values; reported with exit code 2.
#[derive(Debug)]
struct Usage(String);

enum Failure {
    Usage(Usage),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

impl From<Usage> for Failure {
    fn from(u: Usage) -> Self {
        Failure::Usage(u)
    }
}

type Outcome = std::result::Result<Rendered, Failure>;

/// One command's output in every supported format.
struct Rendered {
    json: Value,
    csv: Option<String>,
    text: String,
}

impl Rendered {
    fn new<T: Serialize>(value: &T, text: String) -> Self {
        Rendered { json: serde_json::to_value(value).expect("serializable"), csv: None, text }
    }

    fn with_csv(mut self, rows: Vec<Vec<String>>) -> Self {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.write_record(&r).expect("in-memory csv");
        }
        self.csv = Some(String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8"));
        self
    }
}

fn divisor_arg(flag: &str, text: &str) -> std::result::Result<DivisorClass, Usage> {
    let d = parse_divisor(text).map_err(|e| Usage(format!("invalid value for --{flag}: {e}")))?;
    if d.max_abs_coord() > 3 * MAX_INPUT_COORD {
        return Err(Usage(format!(
            "invalid value for --{flag}: coefficients exceed {MAX_INPUT_COORD} in magnitude"
        )));
    }
    Ok(d)
}

fn poly_arg(text: &str) -> std::result::Result<TriPolynomial, Usage> {
    let body = match text.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| Usage(format!("invalid value for --poly: cannot read {path}: {e}")))?,
        None => text.to_string(),
    };
    serde_json::from_str(&body).map_err(|e| Usage(format!("invalid value for --poly: {e}")))
}

fn cache_dir(config: &RunConfig) -> Option<PathBuf> {
    match std::env::var_os("ENRIQ_CACHE") {
        Some(v) if !v.is_empty() => Some(PathBuf::from(v)),
        _ => config.cache_dir.clone(),
    }
}

fn ulrich_lines(h: DivisorClass, cache: Option<Cache>) -> Outcome {
    let norm = -8 - h.self_pairing();
    let cached = cache.as_ref().and_then(|c| c.load(&h, norm));
    let solutions: Vec<UlrichSolution> = match cached {
        Some(ds) if ds.iter().all(|d| is_ulrich_line(d, &h)) => {
            let mut s: Vec<UlrichSolution> = ds
                .iter()
                .map(|d| UlrichSolution { d: *d, d1: *d - h, d2: *d - 2 * h, h })
                .collect();
            sort_canonical(&mut s);
            s
        }
        _ => {
            let s = enumerate_ulrich_lines(&h)?;
            if let Some(c) = &cache {
                let ds: Vec<DivisorClass> = s.iter().map(|x| x.d).collect();
                // a failed write only costs the next run some time
                let _ = c.store(&h, norm, &ds);
            }
            s
        }
    };
    let report = UlrichReport::new(h, solutions);
    let mut text = format!("H = {h}, H^2 = {}\n{} solutions\n", h.self_pairing(), report.solutions.len());
    for o in &report.orbits {
        text.push_str(&format!("  {:>6}  {}\n", o.count, o.form));
    }
    let rows = std::iter::once(vec!["D".into(), "D1".into(), "D2".into(), "orbit".into()])
        .chain(report.solutions.iter().map(|s| {
            vec![
                s.d.to_string(),
                s.d1.to_string(),
                s.d2.to_string(),
                enriq_core::canonical_orbit_form(&s.d).to_string(),
            ]
        }))
        .collect();
    Ok(Rendered::new(&report, text).with_csv(rows))
}

fn conjecture(h: DivisorClass, bound: i64) -> Outcome {
    let r = conjecture_check(&h, bound)?;
    let text = match &r.outcome {
        ConjectureOutcome::Witness { d1, d2, .. } => format!("H = {h}\nD1 = {d1}\nD2 = {d2}\n"),
        ConjectureOutcome::NoneExists => format!("H = {h}\nno solution exists\n"),
        ConjectureOutcome::NotFoundWithinBound { bound } => {
            format!("H = {h}\nno solution with complement coordinates in [-{bound}, {bound}]\n")
        }
    };
    Ok(Rendered::new(&r, text))
}

fn construct_pair(k: i64) -> Outcome {
    let (d1, d2) = construct_ulrich_pair(k)?;
    let v = json!({ "k": k, "D1": d1, "D2": d2 });
    let text = format!("D1 = {d1}\nD2 = {d2}\n");
    let rows = vec![
        vec!["k".into(), "D1".into(), "D2".into()],
        vec![k.to_string(), d1.to_string(), d2.to_string()],
    ];
    Ok(Rendered::new(&v, text).with_csv(rows))
}

fn chern_admissible(r: u32, h: DivisorClass, list: bool, raw: bool) -> Outcome {
    let h2 = h.self_pairing();
    if h2 <= 0 {
        return Err(Error::NonpositiveSquare { square: h2 }.into());
    }
    let classes = match (list, raw) {
        (_, true) => Some(raw_window(r, &h)?),
        (true, false) => Some(enumerate_admissible_chern(r, &h)?),
        _ => None,
    };
    let orbits = match &classes {
        Some(cs) => orbits_of(cs, &h),
        None => admissible_chern_orbits(r, &h)?,
    };
    let mut v = json!({
        "rank": r,
        "H": h,
        "c1_dot_H": required_c1_dot_h(r, &h),
        "window": { "min_norm": -window_depth(r, &h), "max_norm": 0 },
        "raw_window": raw,
        "complete": true,
        "orbits": orbits,
    });
    if let (Some(cs), true) = (&classes, list) {
        v["classes"] = serde_json::to_value(cs).expect("serializable");
    }
    let mut text = format!("rank {r}, H = {h}\n");
    for o in &orbits {
        text.push_str(&format!("  {:>8}  c2={:<4} dim={:<5} {}\n", o.count, o.c2, o.dim, o.form));
    }
    let mut buf = Vec::new();
    write_chern_csv(&orbits, &mut buf)?;
    let mut out = Rendered::new(&v, text);
    out.csv = Some(String::from_utf8(buf).expect("utf8"));
    Ok(out)
}

fn chain(r: u32, partners: &[String]) -> Outcome {
    let ds = partners
        .iter()
        .map(|p| divisor_arg("d", p))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let c = build_stable_chain(r, &ds)?;
    let mut text = String::new();
    let mut rows = vec![["rank", "D", "c1", "c1_square", "ext1", "modular_dim", "ext_locus_dim"]
        .map(String::from)
        .to_vec()];
    for s in &c.steps {
        let (ext1, md, el) = match &s.induction {
            Some(i) => (i.ext1.to_string(), i.modular_dim.to_string(), i.ext_locus_dim.to_string()),
            None => (String::new(), moduli_dim(1, &s.c1).to_string(), String::new()),
        };
        text.push_str(&format!("rank {}: D = {}, c1^2 = {}, ext1 = {}\n", s.rank, s.d, s.c1_square, ext1));
        rows.push(vec![
            s.rank.to_string(),
            s.d.to_string(),
            s.c1.to_string(),
            s.c1_square.to_string(),
            ext1,
            md,
            el,
        ]);
    }
    text.push_str(&format!("c1 = {}, moduli dimension {}\n", c.c1, c.moduli_dim));
    Ok(Rendered::new(&c, text).with_csv(rows))
}

fn toric(cmd: &ToricCommand) -> Outcome {
    match cmd {
        ToricCommand::Monomials => {
            let mut rows = vec![["i", "j", "k", "monomial", "sextic"].map(String::from).to_vec()];
            let mut items = Vec::new();
            let mut text = String::new();
            for m in invariant_monomials() {
                let e = sextic_image(&m)?;
                let label = sextic_label(&e);
                text.push_str(&format!("{m}  ->  {label}\n"));
                rows.push(vec![m.i.to_string(), m.j.to_string(), m.k.to_string(), m.to_string(), label.clone()]);
                items.push(json!({ "ijk": [m.i, m.j, m.k], "monomial": m.to_string(), "sextic": e, "label": label }));
            }
            Ok(Rendered::new(&items, text).with_csv(rows))
        }
        ToricCommand::FixedPoints => {
            let mut rows = vec![["point", "vertex_monomial"].map(String::from).to_vec()];
            let mut items = Vec::new();
            let mut text = String::new();
            for f in fixed_points() {
                let m = f.vertex_monomial();
                text.push_str(&format!("{f}  {m}\n"));
                rows.push(vec![f.to_string(), m.to_string()]);
                items.push(json!({ "eps": f.eps, "point": f.to_string(), "vertex_monomial": m.to_string() }));
            }
            Ok(Rendered::new(&items, text).with_csv(rows))
        }
        ToricCommand::Sextic { poly } => {
            let p = poly_arg(poly)?;
            let s = to_sextic_form(&p);
            let text = serde_json::to_string_pretty(&s).expect("serializable") + "\n";
            Ok(Rendered::new(&s, text))
        }
        ToricCommand::Scan { q, seed, poly } => {
            let p = match poly {
                Some(text) => poly_arg(text)?,
                None => TriPolynomial::random(*seed, *q as i64),
            };
            let s = singular_scan_fq(&p, *q)?;
            let v = json!({ "polynomial": p, "scan": s });
            let text = format!(
                "q = {}: {} points, {} on the divisor, {} singular, avoids fixed points: {}\n",
                s.q,
                s.points_checked,
                s.zeros,
                s.singular_points.len(),
                s.avoids_fixed_points
            );
            Ok(Rendered::new(&v, text))
        }
    }
}

fn dispatch(config: &RunConfig) -> Outcome {
    let cache = cache_dir(config).map(Cache::new);
    match &config.command {
        Command::UlrichLines { h } => ulrich_lines(divisor_arg("h", h)?, cache),
        Command::Conjecture { h, bound } => conjecture(divisor_arg("h", h)?, *bound),
        Command::ConstructPair { k } => {
            if k.abs() > MAX_INPUT_COORD {
                return Err(Usage(format!("invalid value for --k: |k| exceeds {MAX_INPUT_COORD}")).into());
            }
            construct_pair(*k)
        }
        Command::ChernAdmissible { r, h, list, raw_window } => {
            chern_admissible(*r, divisor_arg("h", h)?, *list, *raw_window)
        }
        Command::ModuliDim { r, d } => {
            let c1 = divisor_arg("d", d)?;
            let dim = moduli_dim(*r, &c1);
            let v = json!({ "rank": r, "c1": c1, "c1_square": c1.self_pairing(), "dim": dim });
            Ok(Rendered::new(&v, format!("{dim}\n")))
        }
        Command::Wild { r } => {
            let w = wild_family(*r)?;
            let text = format!("r = {}: c1 = {}, dim = {}\n", w.rank, w.c1, w.dim);
            let rows = vec![
                ["r", "k", "epsilon", "c1", "dim"].map(String::from).to_vec(),
                vec![w.rank.to_string(), w.k.to_string(), w.epsilon.to_string(), w.c1.to_string(), w.dim.to_string()],
            ];
            Ok(Rendered::new(&w, text).with_csv(rows))
        }
        Command::Chain { r, d } => chain(*r, d),
        Command::StabilityScan { bound, timings } => {
            let s = stability_scan(*bound);
            let mut v = serde_json::to_value(&s).expect("serializable");
            if !timings {
                v.as_object_mut().expect("object").remove("elapsed_ms");
            }
            let text = format!(
                "bound {}: {} vectors, {} with a bad index, {} violations\n",
                s.bound,
                s.checked,
                s.with_bad_set,
                s.violations.len()
            );
            Ok(Rendered { json: v, csv: None, text })
        }
        Command::CotangentCheck => {
            let r = verify_cotangent_ulrich_classes();
            let mut rows = vec![["class", "square", "mirror_square"].map(String::from).to_vec()];
            let mut text = String::new();
            for e in &r.entries {
                text.push_str(&format!("({})^2 = {}\n", format_divisor(&e.class), e.square));
                rows.push(vec![e.label.clone(), e.square.to_string(), e.mirror_square.to_string()]);
            }
            Ok(Rendered::new(&r, text).with_csv(rows))
        }
        Command::Toric { command } => toric(command),
    }
}

fn error_json(kind: &str, message: &str) -> String {
    json!({ "error": { "kind": kind, "message": message } }).to_string()
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    run_config(&config, out, err)
}

pub fn run_config(config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = config.workers {
        pool = pool.num_threads(w as usize);
    }
    let result = match pool.build() {
        Ok(p) => p.install(|| dispatch(config)),
        Err(e) => Err(Failure::Domain(Error::Internal(format!("worker pool: {e}")))),
    };
    let rendered = match result {
        Ok(r) => r,
        Err(Failure::Usage(Usage(msg))) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_USAGE;
        }
        Err(Failure::Domain(e)) => {
            let _ = writeln!(err, "{}", error_json(e.kind(), &e.to_string()));
            return EXIT_DOMAIN;
        }
    };
    let body = match config.format {
        Format::Json => serde_json::to_string_pretty(&rendered.json).expect("serializable") + "\n",
        Format::Text => rendered.text,
        Format::Csv => match rendered.csv {
            Some(c) => c,
            None => {
                let _ = writeln!(err, "error: invalid value for --format: csv is not available for this command");
                return EXIT_USAGE;
            }
        },
    };
    match out.write_all(body.as_bytes()) {
        Ok(()) => EXIT_OK,
        // Reader went away, as with `| head`.
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "{}", error_json("io", &e.to_string()));
            EXIT_DOMAIN
        }
    }
}
