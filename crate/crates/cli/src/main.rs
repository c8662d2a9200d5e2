use std::collections::BTreeMap;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use weilrep_core::borcherds::{self, InputForm};
use weilrep_core::lnn_catalog::{relations_np, selfdual_list_np};
use weilrep_core::qseries::{EtaFactor, EtaQuotient};
use weilrep_core::rational::{int, parse_rational};
use weilrep_core::subgroups::{
    enumerate_isotropic_bounded, enumerate_self_dual_isotropic_bounded, enumerate_subgroups_bounded, max_order_bound,
};
use weilrep_core::weilrep::invariant_space;
use weilrep_core::{Error, FqModule};

const EXIT_USAGE: u8 = 1;
const EXIT_MISMATCH: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

#[derive(Parser)]
#[command(name = "weilrep", version, about = "Exact Weil-representation invariants and eta-quotient Borcherds products")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,

    /// Bound on |D| for subgroup enumeration (defaults to WEILREP_MAX_D or 10000).
    #[arg(long, global = true)]
    max_d: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    All,
    Isotropic,
    SelfDual,
}

#[derive(Subcommand)]
enum Command {
    /// Invariants of the discriminant form D_{N,N'}.
    Discform {
        #[arg(long = "N")]
        n: u64,
        #[arg(long = "Nprime", default_value_t = 1)]
        n_prime: u64,
    },
    /// Enumerate subgroups of D_{N,N'}, one JSON object per line.
    Subgroups {
        #[arg(long = "N")]
        n: u64,
        #[arg(long = "Nprime", default_value_t = 1)]
        n_prime: u64,
        #[arg(long, value_enum, default_value_t = Kind::SelfDual)]
        kind: Kind,
    },
    /// Dimension (and optionally a basis) of the invariant space.
    Invariants {
        #[arg(long = "N")]
        n: u64,
        #[arg(long = "Nprime", default_value_t = 1)]
        n_prime: u64,
        #[arg(long)]
        basis: bool,
    },
    /// Self-dual isotropic subgroups of D_{N,p} and their relations.
    Lnn {
        #[command(subcommand)]
        action: LnnAction,
    },
    /// Borcherds lift of an invariant vector.
    Lift {
        #[arg(long = "N")]
        n: u64,
        #[arg(long = "Nprime", default_value_t = 1)]
        n_prime: u64,
        /// JSON object mapping "a,b,c,d" to integer coefficients.
        #[arg(long, conflicts_with = "divisors")]
        coeffs: Option<String>,
        /// JSON object mapping divisors d of N to α_d (N' = 1 only).
        #[arg(long)]
        divisors: Option<String>,
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
        prec: u64,
    },
    /// Verify the eta identity for a prime p.
    VerifyEta {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
        prec: u64,
    },
    /// q-expansions of eta quotients.
    Eta {
        #[command(subcommand)]
        action: EtaAction,
    },
    /// Run the reproduction suite and print a result table.
    Repro {
        /// Run a single criterion (1-9).
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=9))]
        criterion: Option<u8>,
    },
}

#[derive(Subcommand)]
enum LnnAction {
    Selfdual {
        #[arg(long = "N")]
        n: u64,
        #[arg(long)]
        p: u64,
    },
    Relations {
        #[arg(long = "N")]
        n: u64,
        #[arg(long)]
        p: u64,
    },
}

#[derive(Subcommand)]
enum EtaAction {
    /// Expand ∏ η(dτ + r)^e given as "d:r:e" factors.
    Expand {
        #[arg(required = true)]
        factors: Vec<String>,
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
        prec: u64,
    },
}

enum Failure {
    Usage(String),
    Mismatch(Value),
    Resource(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ResourceLimit { .. } => Failure::Resource(e.to_string()),
            Error::Violation(_) => Failure::Mismatch(json!({ "error": e.to_string() })),
            other => Failure::Usage(other.to_string()),
        }
    }
}

type Outcome = std::result::Result<Vec<Value>, Failure>;

fn module(n: u64, np: u64) -> std::result::Result<Arc<FqModule>, Failure> {
    if n == 0 || np == 0 || n % np != 0 {
        return Err(Failure::Usage(format!("need positive N' dividing N, got N = {n}, N' = {np}")));
    }
    Ok(Arc::new(FqModule::lnn(n as i64, np as i64)?))
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn discform(n: u64, np: u64) -> Outcome {
    let m = module(n, np)?;
    Ok(vec![json!({
        "N": n,
        "Nprime": np,
        "order": m.order(),
        "level": m.level(),
        "signature_mod8": m.signature_mod8()?,
        "module": to_value(&*m),
    })])
}

fn subgroups(n: u64, np: u64, kind: Kind, bound: usize) -> Outcome {
    let m = module(n, np)?;
    let list = match kind {
        Kind::All => enumerate_subgroups_bounded(&m, bound)?,
        Kind::Isotropic => enumerate_isotropic_bounded(&m, bound)?,
        Kind::SelfDual => enumerate_self_dual_isotropic_bounded(&m, bound)?,
    };
    Ok(list.iter().map(to_value).collect())
}

fn invariants(n: u64, np: u64, basis: bool, bound: usize) -> Outcome {
    let m = module(n, np)?;
    if m.order() > bound {
        return Err(Failure::Resource(format!("|D| = {} exceeds the bound {bound}", m.order())));
    }
    let inv = invariant_space(&m);
    let mut out = json!({ "dimension": inv.dimension });
    if basis {
        let v = to_value(&inv);
        out["basis"] = v["basis"].clone();
        out["method"] = v["method"].clone();
    }
    Ok(vec![out])
}

fn parse_coeffs(n: u64, np: u64, raw: &str) -> std::result::Result<InputForm, Failure> {
    let map: BTreeMap<String, i64> =
        serde_json::from_str(raw).map_err(|e| Failure::Usage(format!("--coeffs: {e}")))?;
    let mut entries = BTreeMap::new();
    for (k, v) in map {
        let parts: Vec<u64> = k
            .split(',')
            .map(|s| s.trim().parse::<u64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Failure::Usage(format!("bad element key {k:?}")))?;
        let coords: [u64; 4] =
            parts.try_into().map_err(|_| Failure::Usage(format!("element {k:?} needs four coordinates")))?;
        *entries.entry(coords).or_insert(0) += v;
    }
    Ok(InputForm::from_coords(n, np, &entries)?)
}

fn lift(n: u64, np: u64, coeffs: Option<String>, divisors: Option<String>, prec: u64) -> Outcome {
    module(n, np)?;
    let form = match (coeffs, divisors) {
        (Some(c), None) => parse_coeffs(n, np, &c)?,
        (None, Some(d)) => {
            if np != 1 {
                return Err(Failure::Usage("--divisors needs N' = 1".into()));
            }
            let raw: BTreeMap<String, i64> =
                serde_json::from_str(&d).map_err(|e| Failure::Usage(format!("--divisors: {e}")))?;
            let mut alpha = BTreeMap::new();
            for (k, v) in raw {
                let d: u64 = k.parse().map_err(|_| Failure::Usage(format!("bad divisor {k:?}")))?;
                alpha.insert(d, v);
            }
            InputForm::from_divisor_exponents(n, &alpha)?
        }
        _ => return Err(Failure::Usage("give exactly one of --coeffs or --divisors".into())),
    };
    let r = borcherds::lift(&form, prec)?;
    let show = |q: &Option<EtaQuotient>| q.as_ref().map_or(Value::Null, |q| Value::from(q.to_string()));
    Ok(vec![json!({
        "weight": to_value(&r)["weight"],
        "weyl": [to_value(&r.weyl)["rho_kappa_prime"], to_value(&r.weyl)["rho_kappa"]],
        "psi1": to_value(&r.psi1),
        "psi2": to_value(&r.psi2),
        "eta1": show(&r.eta1),
        "eta2": show(&r.eta2),
        "constant": r.constant,
    })])
}

fn verify_eta(p: u64, prec: u64) -> Outcome {
    let r = borcherds::verify_prime_eta(p, prec)?;
    let out = json!({
        "p": p,
        "prec": prec,
        "identity": r.identity,
        "passed": r.passed(),
        "constant": r.expected_constant.to_string(),
        "relation_constant": r.relation_constant.to_string(),
        "first_mismatch": r.report.first_mismatch,
    });
    if r.passed() {
        Ok(vec![out])
    } else {
        Err(Failure::Mismatch(out))
    }
}

fn parse_factor(s: &str) -> std::result::Result<EtaFactor, Failure> {
    let bad = || Failure::Usage(format!("factor {s:?} must look like d:r:e, e.g. 1:1/2:3"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let d = parse_rational(parts[0]).map_err(|_| bad())?;
    let r = parse_rational(parts[1]).map_err(|_| bad())?;
    let e: i64 = parts[2].parse().map_err(|_| bad())?;
    if d <= int(0) {
        return Err(Failure::Usage(format!("scale in {s:?} must be positive")));
    }
    Ok(EtaFactor::new(d, r, e))
}

fn eta_expand(factors: &[String], prec: u64) -> Outcome {
    let factors = factors.iter().map(|s| parse_factor(s)).collect::<std::result::Result<Vec<_>, _>>()?;
    let q = EtaQuotient::new(weilrep_core::CycNumber::from_int(1), factors);
    let t = q.leading_exponent() + int(prec as i64);
    let s = q.expand(&t)?;
    Ok(vec![json!({ "quotient": q.to_string(), "series": to_value(&s) })])
}

fn repro(criterion: Option<u8>) -> Outcome {
    let results = match criterion {
        Some(id) => vec![weilrep_core::repro::run(id)],
        None => weilrep_core::repro::run_all(),
    };
    let failed = results.iter().any(|r| !r.passed);
    let rows: Vec<Value> = results.iter().map(to_value).collect();
    if failed {
        Err(Failure::Mismatch(Value::Array(rows)))
    } else {
        Ok(rows)
    }
}

fn render_text(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                match x {
                    Value::Object(_) | Value::Array(_) if !is_flat(x) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render_text(x, indent + 1, out);
                    }
                    _ => out.push_str(&format!("{pad}{k}: {}\n", scalar(x))),
                }
            }
        }
        Value::Array(items) => {
            for x in items {
                if is_flat(x) {
                    out.push_str(&format!("{pad}- {}\n", scalar(x)));
                } else {
                    out.push_str(&format!("{pad}-\n"));
                    render_text(x, indent + 1, out);
                }
            }
        }
        _ => out.push_str(&format!("{pad}{}\n", scalar(v))),
    }
}

fn is_flat(v: &Value) -> bool {
    match v {
        Value::Array(items) => items.iter().all(|x| !x.is_object() && !x.is_array()) || items.is_empty(),
        Value::Object(map) => map.is_empty(),
        _ => true,
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        _ => v.to_string(),
    }
}

fn emit(values: &[Value], format: Format) {
    for v in values {
        match format {
            Format::Json => println!("{v}"),
            Format::Text => {
                let mut s = String::new();
                render_text(v, 0, &mut s);
                print!("{s}");
            }
        }
    }
}

fn repro_table(values: &[Value]) {
    for v in values {
        println!(
            "[{}] criterion {}: {} ({:.1}s) {}",
            if v["passed"].as_bool() == Some(true) { "PASS" } else { "FAIL" },
            v["id"],
            scalar(&v["title"]),
            v["seconds"].as_f64().unwrap_or(0.0),
            scalar(&v["detail"])
        );
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let bound = cli.max_d.unwrap_or_else(max_order_bound);
    let is_repro = matches!(cli.command, Command::Repro { .. });
    let outcome = match cli.command {
        Command::Discform { n, n_prime } => discform(n, n_prime),
        Command::Subgroups { n, n_prime, kind } => subgroups(n, n_prime, kind, bound),
        Command::Invariants { n, n_prime, basis } => invariants(n, n_prime, basis, bound),
        Command::Lnn { action: LnnAction::Selfdual { n, p } } => selfdual_list_np(n, p)
            .map(|l| l.iter().map(|s| json!({ "subgroup": s.to_string(), "spec": to_value(s) })).collect())
            .map_err(Failure::from),
        Command::Lnn { action: LnnAction::Relations { n, p } } => {
            relations_np(n, p).map(|r| vec![json!({ "relations": r })]).map_err(Failure::from)
        }
        Command::Lift { n, n_prime, coeffs, divisors, prec } => lift(n, n_prime, coeffs, divisors, prec),
        Command::VerifyEta { p, prec } => verify_eta(p, prec),
        Command::Eta { action: EtaAction::Expand { factors, prec } } => eta_expand(&factors, prec),
        Command::Repro { criterion } => repro(criterion),
    };
    let print = |values: &[Value]| {
        if is_repro && cli.format == Format::Text {
            repro_table(values);
        } else {
            emit(values, cli.format);
        }
    };
    match outcome {
        Ok(values) => {
            print(&values);
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Resource(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_RESOURCE)
        }
        Err(Failure::Mismatch(v)) => {
            match v {
                Value::Array(items) => print(&items),
                other => print(&[other]),
            }
            ExitCode::from(EXIT_MISMATCH)
        }
    }
}
