//! Command implementations for the `fibcalc` batch front-end.
//!
//! Exit codes: 0 success, 2 parse error, 3 validation failure, 4
//! identity/lemma-audit failure, 5 out-of-scope parameters.

pub mod file;

use clap::{Parser, Subcommand};
use fibcalc_core::blowup::BlowupError;
use fibcalc_core::{
    aggregate, analyze, audit_lemmas, bound_audit, canonical_form, chain_sequences,
    compute_params, enumerate_diagrams, enumerate_germs, extremal_germ, local_invariants,
    mu_threshold, slope_equality_check, validate_germ, CoreError, DeriveOptions, EnumCaps,
    ExtremalFamily, GermSpec, IndexRecord, KodairaKind, LocalInvariants, Rat,
};
use file::{GermFile, ParamsSpec};
use std::fmt::Write as _;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_AUDIT: i32 = 4;
pub const EXIT_SCOPE: i32 = 5;

#[derive(Parser)]
#[command(
    name = "fibcalc",
    about = "Exact germ invariants and slope bounds for primitive cyclic covering fibrations",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, clap::Args)]
struct CapsArg {
    /// Enumeration caps, e.g. --caps node=3,mult=7,mp=2,alpha0=1
    #[arg(long, value_parser = parse_caps)]
    caps: Option<EnumCapsArg>,
}

#[derive(Clone, Debug)]
struct EnumCapsArg(EnumCaps);

fn parse_caps(s: &str) -> Result<EnumCapsArg, String> {
    let mut caps = EnumCaps::default();
    for part in s.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got {part:?}"))?;
        let v: i64 = value.parse().map_err(|_| format!("bad number {value:?}"))?;
        match key {
            "node" | "nodes" => caps.max_nodes = v as usize,
            "mult" => caps.max_mult = v,
            "mp" => caps.max_fiber_multiplicity = v,
            "alpha0" => caps.alpha0_extra = v,
            "germs" => caps.max_germs = v as usize,
            _ => return Err(format!("unknown cap {key:?}")),
        }
    }
    Ok(EnumCapsArg(caps))
}

#[derive(Subcommand)]
enum Command {
    /// Check a germ file against every structural constraint.
    Validate {
        file: String,
        #[arg(long)]
        json: bool,
    },
    /// Derive all singularity indices and exact invariants per germ.
    Invariants {
        file: String,
        /// Report invalid germs instead of aborting.
        #[arg(long)]
        lenient: bool,
        #[arg(long)]
        json: bool,
        /// Count odd points on whole towers for j'_{0,2,odd}.
        #[arg(long)]
        j02_full_tower: bool,
    },
    /// Run the lemma audits and the defect bound per germ.
    Audit {
        file: String,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        j02_full_tower: bool,
    },
    /// Enumerate singularity diagrams for a contracted curve or component.
    EnumerateDiagrams {
        #[arg(long)]
        n: i64,
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
        dtype: u8,
        #[arg(long)]
        t: i64,
        /// Cap on the total number of blow-ups per diagram.
        #[arg(long, default_value_t = 4)]
        depth: i64,
        #[arg(long, default_value_t = 12)]
        max_mult: i64,
        /// Also chain the diagrams into sequences up to this length.
        #[arg(long)]
        chain: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Enumerate every valid germ within the caps and audit the bound.
    EnumerateGerms {
        #[arg(long)]
        g: i64,
        #[arg(long)]
        h: i64,
        #[arg(long)]
        n: i64,
        /// Fiber kinds (default: a standard set for the base genus).
        #[arg(long, value_delimiter = ',')]
        kinds: Option<Vec<String>>,
        #[command(flatten)]
        caps: CapsArg,
        #[arg(long)]
        json: bool,
    },
    /// Emit one of the extremal germ families as a germ file.
    Extremal {
        #[arg(long)]
        g: i64,
        #[arg(long)]
        h: i64,
        #[arg(long)]
        n: i64,
        /// I, II, III or 403.
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 1)]
        l: i64,
    },
}

/// Runs the CLI against explicit arguments, writing reports to `out`.
/// Returns the process exit code.
pub fn run<I, S>(args: I, out: &mut String) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(out, "{e}");
            return if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Validate { file, json } => cmd_validate(&file, json, out),
        Command::Invariants {
            file,
            lenient,
            json,
            j02_full_tower,
        } => cmd_invariants(&file, lenient, json, j02_full_tower, out),
        Command::Audit {
            file,
            json,
            j02_full_tower,
        } => cmd_audit(&file, json, j02_full_tower, out),
        Command::EnumerateDiagrams {
            n,
            dtype,
            t,
            depth,
            max_mult,
            chain,
            json,
        } => cmd_enumerate_diagrams(n, dtype, t, depth, max_mult, chain, json, out),
        Command::EnumerateGerms {
            g,
            h,
            n,
            kinds,
            caps,
            json,
        } => cmd_enumerate_germs(g, h, n, kinds, caps.caps.map(|c| c.0), json, out),
        Command::Extremal { g, h, n, family, l } => cmd_extremal(g, h, n, &family, l, out),
    }
}

fn load(path: &str, out: &mut String) -> Result<Vec<(String, GermSpec)>, i32> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(out, "error: cannot read {path}: {e}");
            return Err(EXIT_PARSE);
        }
    };
    let parsed = match GermFile::parse(&text) {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(out, "error: parse failure in {path}: {e}");
            return Err(EXIT_PARSE);
        }
    };
    match parsed.to_germs() {
        Ok(g) => Ok(g),
        Err(e) => {
            let _ = writeln!(out, "error: {e}");
            Err(match e {
                CoreError::OutOfScope(_) => EXIT_SCOPE,
                _ => EXIT_PARSE,
            })
        }
    }
}

fn cmd_validate(path: &str, json: bool, out: &mut String) -> i32 {
    let germs = match load(path, out) {
        Ok(g) => g,
        Err(code) => return code,
    };
    let mut all_valid = true;
    let mut rows = Vec::new();
    for (label, germ) in &germs {
        let report = validate_germ(germ);
        if !report.is_valid() {
            all_valid = false;
        }
        if json {
            rows.push(serde_json::json!({ "label": label, "violations": report.violations }));
        } else if report.is_valid() {
            let _ = writeln!(out, "germ {label}: valid");
        } else {
            let _ = writeln!(out, "germ {label}: {} violation(s)", report.violations.len());
            for v in &report.violations {
                let _ = writeln!(out, "  {v}");
            }
        }
    }
    if json {
        let _ = writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&serde_json::json!({ "germs": rows })).unwrap()
        );
    }
    if all_valid {
        EXIT_OK
    } else {
        EXIT_VALIDATION
    }
}

fn alpha_summary(idx: &IndexRecord) -> String {
    let parts: Vec<String> = idx
        .alpha
        .iter()
        .filter(|(_, a)| a.total() > 0)
        .map(|(k, a)| format!("{k}:{}", a.total()))
        .collect();
    format!("[{}]", parts.join(","))
}

fn j_summary(idx: &IndexRecord) -> String {
    let mut parts = Vec::new();
    for (&(b, a), &c) in &idx.j_prime {
        if c > 0 {
            parts.push(format!("'{b},{a}:{c}"));
        }
    }
    for (&(b, a), &c) in &idx.j_doubleprime {
        if c > 0 {
            parts.push(format!("''{b},{a}:{c}"));
        }
    }
    format!("[{}]", parts.join(","))
}

fn rat_or_dash(r: &Option<Rat>) -> String {
    r.as_ref().map(|x| x.to_string()).unwrap_or_else(|| "-".into())
}

fn invariants_line(label: &str, idx: &IndexRecord, inv: &LocalInvariants) -> String {
    format!(
        "germ {label}: alpha={} alpha0={} eps={} j={} K2={} chi={} e={} Ind={} sigma={} lambda={}",
        alpha_summary(idx),
        idx.alpha0(),
        idx.epsilon,
        j_summary(idx),
        inv.k2,
        inv.chi,
        inv.e,
        rat_or_dash(&inv.ind),
        inv.sigma,
        rat_or_dash(&inv.lambda_local),
    )
}

fn cmd_invariants(
    path: &str,
    lenient: bool,
    json: bool,
    j02_full_tower: bool,
    out: &mut String,
) -> i32 {
    let germs = match load(path, out) {
        Ok(g) => g,
        Err(code) => return code,
    };
    let opts = DeriveOptions { j02_odd_full_tower: j02_full_tower };
    let mut locals = Vec::new();
    let mut rows = Vec::new();
    let mut params = None;
    for (label, germ) in &germs {
        params = Some(germ.params);
        match analyze(germ, opts) {
            Ok(analysis) => {
                let inv = match local_invariants(&analysis.indices, &germ.fiber, &germ.params) {
                    Ok(i) => i,
                    Err(e) => {
                        let _ = writeln!(out, "error [{label}]: {e}");
                        return EXIT_SCOPE;
                    }
                };
                if json {
                    rows.push(serde_json::json!({
                        "label": label,
                        "indices": analysis.indices,
                        "invariants": inv,
                    }));
                } else {
                    let _ = writeln!(out, "{}", invariants_line(label, &analysis.indices, &inv));
                }
                locals.push(inv);
            }
            Err(BlowupError::InvalidGerm(report)) => {
                if lenient {
                    let _ = writeln!(
                        out,
                        "germ {label}: invalid ({} violation(s))",
                        report.violations.len()
                    );
                    continue;
                }
                let _ = writeln!(out, "germ {label}: validation failed\n{report}");
                return EXIT_VALIDATION;
            }
            Err(BlowupError::InconsistentForest { identity, detail }) => {
                let _ = writeln!(out, "germ {label}: identity {identity} failed: {detail}");
                return EXIT_AUDIT;
            }
        }
    }
    let Some(params) = params else {
        let _ = writeln!(out, "no germs in file");
        return EXIT_OK;
    };
    match aggregate(&locals, &params) {
        Ok(global) => {
            let residual = if params.h() == 1 {
                slope_equality_check(&global, &params).ok()
            } else {
                None
            };
            if json {
                let _ = writeln!(
                    out,
                    "{}",
                    serde_json::to_string_pretty(&serde_json::json!({
                        "germs": rows,
                        "global": global,
                        "residual": residual,
                    }))
                    .unwrap()
                );
            } else {
                let _ = writeln!(
                    out,
                    "global: K2={} chi={} e={} lambda={} ind_sum={} sigma={} residual={}",
                    global.k2,
                    global.chi,
                    global.e,
                    global.lambda,
                    rat_or_dash(&global.ind_sum),
                    global.sigma,
                    rat_or_dash(&residual),
                );
            }
            EXIT_OK
        }
        Err(CoreError::LocallyTrivial) => {
            if json {
                let _ = writeln!(
                    out,
                    "{}",
                    serde_json::to_string_pretty(&serde_json::json!({
                        "germs": rows,
                        "global": null,
                        "note": "chi = 0: locally trivial, slope undefined",
                    }))
                    .unwrap()
                );
            } else {
                let _ = writeln!(out, "global: chi = 0 (locally trivial, slope undefined)");
            }
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(out, "error: {e}");
            EXIT_SCOPE
        }
    }
}

fn cmd_audit(path: &str, json: bool, j02_full_tower: bool, out: &mut String) -> i32 {
    let germs = match load(path, out) {
        Ok(g) => g,
        Err(code) => return code,
    };
    let opts = DeriveOptions { j02_odd_full_tower: j02_full_tower };
    let mut all_pass = true;
    let mut rows = Vec::new();
    for (label, germ) in &germs {
        let analysis = match analyze(germ, opts) {
            Ok(a) => a,
            Err(BlowupError::InvalidGerm(report)) => {
                let _ = writeln!(out, "germ {label}: validation failed\n{report}");
                return EXIT_VALIDATION;
            }
            Err(BlowupError::InconsistentForest { identity, detail }) => {
                let _ = writeln!(out, "germ {label}: identity {identity} failed: {detail}");
                return EXIT_AUDIT;
            }
        };
        let report = audit_lemmas(&analysis.indices, &germ.fiber, &germ.params);
        let slack = match bound_audit(&analysis.indices, &germ.fiber, &germ.params) {
            Ok(s) => s,
            Err(e) => {
                let _ = writeln!(out, "error [{label}]: {e}");
                return EXIT_SCOPE;
            }
        };
        let mu = mu_threshold(&germ.params, analysis.indices.triple_fiber).expect("in scope");
        if !report.all_pass() || slack.is_negative() {
            all_pass = false;
        }
        if json {
            rows.push(serde_json::json!({
                "label": label,
                "bound_slack": slack,
                "mu": mu,
                "entries": report.entries,
            }));
        } else {
            let _ = writeln!(out, "germ {label}: bound-audit slack={slack} (mu={mu})");
            for e in &report.entries {
                let rel = match e.relation {
                    fibcalc_core::bounds::Relation::Eq => "=",
                    fibcalc_core::bounds::Relation::Le => "<=",
                    fibcalc_core::bounds::Relation::Ge => ">=",
                };
                let _ = writeln!(
                    out,
                    "  {} {} lhs={} {} rhs={} slack={}",
                    if e.pass { "PASS" } else { "FAIL" },
                    e.name,
                    e.lhs,
                    rel,
                    e.rhs,
                    e.slack
                );
                if !e.pass {
                    let _ = writeln!(out, "       {}", e.detail);
                }
            }
        }
    }
    if json {
        let _ = writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&serde_json::json!({ "germs": rows })).unwrap()
        );
    }
    if all_pass {
        EXIT_OK
    } else {
        EXIT_AUDIT
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_enumerate_diagrams(
    n: i64,
    dtype: u8,
    t: i64,
    depth: i64,
    max_mult: i64,
    chain: Option<usize>,
    json: bool,
    out: &mut String,
) -> i32 {
    let diagrams = match enumerate_diagrams(n, dtype, t, depth, max_mult) {
        Ok(d) => d,
        Err(e) => {
            let _ = writeln!(out, "error: {e}");
            return EXIT_SCOPE;
        }
    };
    if let Some(max_len) = chain {
        let seqs = match chain_sequences(&diagrams, n, max_len, depth, max_mult) {
            Ok(s) => s,
            Err(e) => {
                let _ = writeln!(out, "error: {e}");
                return EXIT_SCOPE;
            }
        };
        if json {
            let _ = writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&serde_json::json!({
                    "diagrams": diagrams,
                    "sequences": seqs,
                }))
                .unwrap()
            );
        } else {
            for (i, s) in seqs.iter().enumerate() {
                let _ = writeln!(out, "sequence {i} (length {}):", s.len());
                for d in &s.diagrams {
                    let _ = write!(out, "{}", d.render());
                }
            }
            let _ = writeln!(out, "{} sequence(s)", seqs.len());
        }
        return EXIT_OK;
    }
    if json {
        let _ = writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&serde_json::json!({ "diagrams": diagrams })).unwrap()
        );
    } else {
        for d in &diagrams {
            let _ = write!(out, "{}", d.render());
            let _ = writeln!(out);
        }
        let _ = writeln!(out, "{} diagram(s)", diagrams.len());
    }
    EXIT_OK
}

fn default_kinds(h: i64) -> Vec<KodairaKind> {
    if h == 0 {
        vec![KodairaKind::RuledLine]
    } else {
        vec![
            KodairaKind::Smooth,
            KodairaKind::I(1),
            KodairaKind::I(2),
            KodairaKind::I(3),
            KodairaKind::II,
            KodairaKind::III,
            KodairaKind::IV,
            KodairaKind::IStar(0),
            KodairaKind::IStar(1),
            KodairaKind::IIStar,
            KodairaKind::IIIStar,
            KodairaKind::IVStar,
        ]
    }
}

fn cmd_enumerate_germs(
    g: i64,
    h: i64,
    n: i64,
    kinds: Option<Vec<String>>,
    caps: Option<EnumCaps>,
    json: bool,
    out: &mut String,
) -> i32 {
    let params = match compute_params(g, h, n) {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(out, "error: {e}");
            return EXIT_SCOPE;
        }
    };
    let kinds: Vec<KodairaKind> = match kinds {
        None => default_kinds(h),
        Some(ks) => {
            let mut parsed = Vec::new();
            for k in ks {
                match k.parse() {
                    Ok(kind) => parsed.push(kind),
                    Err(e) => {
                        let _ = writeln!(out, "error: {e}");
                        return EXIT_PARSE;
                    }
                }
            }
            parsed
        }
    };
    let caps = caps.unwrap_or_default();
    let germs = match enumerate_germs(&params, &kinds, &caps) {
        Ok(g) => g,
        Err(e) => {
            let _ = writeln!(out, "error: {e}");
            return EXIT_SCOPE;
        }
    };
    let mut min_slack: Option<Rat> = None;
    let mut counterexamples = Vec::new();
    let mut labeled = Vec::new();
    for (i, germ) in germs.iter().enumerate() {
        let label = format!("e{i:05}");
        let analysis = analyze(germ, DeriveOptions::default()).expect("enumerated germs derive");
        let slack = bound_audit(&analysis.indices, &germ.fiber, &germ.params)
            .expect("enumerated germs in scope");
        if slack.is_negative() {
            counterexamples.push(label.clone());
        }
        min_slack = Some(match min_slack {
            None => slack.clone(),
            Some(m) => m.min(slack.clone()),
        });
        if !json {
            let _ = writeln!(out, "germ {label}: slack={slack}");
        }
        labeled.push((label, germ));
    }
    let summary = serde_json::json!({
        "count": germs.len(),
        "min_slack": min_slack,
        "counterexamples": counterexamples,
    });
    if json {
        let doc =
            GermFile::from_germs(&ParamsSpec { g, h, n }, labeled.iter().map(|(l, g)| (l.clone(), *g)));
        let _ = writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&serde_json::json!({
                "params": doc.params,
                "germs": doc.germs,
                "summary": summary,
            }))
            .unwrap()
        );
    } else {
        let _ = writeln!(
            out,
            "{} germ(s), min slack {}, {} counterexample(s)",
            germs.len(),
            min_slack.map(|m| m.to_string()).unwrap_or_else(|| "-".into()),
            counterexamples.len()
        );
    }
    if counterexamples.is_empty() {
        EXIT_OK
    } else {
        EXIT_AUDIT
    }
}

fn cmd_extremal(g: i64, h: i64, n: i64, family: &str, l: i64, out: &mut String) -> i32 {
    let params = match compute_params(g, h, n) {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(out, "error: {e}");
            return EXIT_SCOPE;
        }
    };
    let family: ExtremalFamily = match family.parse() {
        Ok(f) => f,
        Err(e) => {
            let _ = writeln!(out, "error: {e}");
            return EXIT_PARSE;
        }
    };
    let germ = match extremal_germ(&params, family, l) {
        Ok(g) => canonical_form(&g),
        Err(e) => {
            let _ = writeln!(out, "error: {e}");
            return EXIT_SCOPE;
        }
    };
    let doc = GermFile::from_germs(
        &ParamsSpec { g, h, n },
        std::iter::once(("extremal".to_string(), &germ)),
    );
    let _ = write!(out, "{}", doc.render());
    EXIT_OK
}
