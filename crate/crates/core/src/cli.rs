//! Command-line front end. Every command prints one JSON document on stdout.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::complexity::{classify, normalize, ComplexityClass};
use crate::forge::{self, Representation};
use crate::formula::{encode, parse, parse_declared, parse_list, Formula, Var};
use crate::hfs::HSet;
use crate::level::{self, Level};
use crate::srm::{self, Budget, Configuration, OrdinalClock, Outcome};
use crate::truth::Prepared;

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Directory for cached level dumps.
pub const LEVEL_CACHE_ENV: &str = "SETLAB_LEVEL_CACHE";

#[derive(Parser, Debug)]
#[command(name = "setlab", version, about = "Finite levels of L, Δ_0 truth and set register machines")]
struct Cli {
    /// Also write a run manifest (command, arguments, version, level digest) here.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

/// Formula text, or `@path` to read it from a file.
#[derive(Args, Debug, Serialize)]
struct FormulaArg {
    formula: String,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Parse and print canonically.
    Parse {
        #[command(flatten)]
        src: FormulaArg,
        /// Comma-separated variables allowed to occur free.
        #[arg(long, value_delimiter = ',')]
        declare: Option<Vec<String>>,
    },
    Classify {
        #[command(flatten)]
        src: FormulaArg,
    },
    /// Prenex normal form of a formula in an underlined class.
    Normalize {
        #[command(flatten)]
        src: FormulaArg,
        /// Highest Σ_n-Collection instance allowed (default: unrestricted).
        #[arg(long)]
        collection: Option<u32>,
    },
    Relativize {
        #[command(flatten)]
        src: FormulaArg,
        #[arg(long)]
        bound: String,
        /// Rename binders that clash with the bound instead of failing.
        #[arg(long)]
        rename: bool,
    },
    /// Dump L_n as JSON (n ≤ 4).
    BuildLevel {
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Model-check a formula over L_n.
    Eval {
        #[arg(long, default_value_t = 3)]
        level: usize,
        /// Formula text or file.
        #[arg(long)]
        formula: String,
        /// `v=SET`, repeatable.
        #[arg(long)]
        assign: Vec<String>,
        #[arg(long)]
        no_memo: bool,
    },
    /// Run an SRM program; inputs fill registers 0, 1, ...
    RunSrm {
        program: PathBuf,
        #[arg(long, default_value_t = 4)]
        level: usize,
        #[arg(long)]
        input: Vec<String>,
        #[arg(long, default_value_t = Budget::default().max_steps)]
        max_steps: u64,
        #[arg(long, default_value_t = Budget::default().max_limits)]
        max_limits: u64,
        /// Write every configuration as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Compile a Δ_0 formula to an SRM decision program.
    CompileD0 {
        #[command(flatten)]
        src: FormulaArg,
        /// Write the assembly here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    #[command(subcommand)]
    Forge(ForgeCommand),
    /// Least level satisfying a list of closed Σ_1 sentences.
    Analyze {
        #[arg(long)]
        sentences: PathBuf,
        #[arg(long, default_value_t = 4)]
        max_level: usize,
    },
    /// Least b with the program halting on every input from L_b.
    Height {
        program: PathBuf,
        #[arg(long, default_value_t = 4)]
        level: usize,
        #[arg(long, default_value_t = Budget::default().max_steps)]
        max_steps: u64,
        #[arg(long, default_value_t = Budget::default().max_limits)]
        max_limits: u64,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ForgeCommand {
    /// Representation of the least level holding a witness of `∃x A`.
    Kleene {
        #[arg(long)]
        matrix: String,
        #[arg(long, default_value = "x")]
        var: String,
    },
    Succ {
        #[arg(long)]
        rep: PathBuf,
    },
    Comp {
        #[arg(long)]
        gamma: PathBuf,
        #[arg(long)]
        delta: PathBuf,
    },
    Exists {
        #[arg(long)]
        rep: PathBuf,
    },
    Rfn {
        #[arg(long)]
        theory: String,
        #[arg(long, default_value = "alpha")]
        level_var: String,
    },
    Phit {
        #[arg(long)]
        theory: String,
    },
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct RunManifest {
    command: String,
    arguments: Value,
    engine_version: &'static str,
    level_digest: Option<String>,
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Failure {
        Failure(e.to_string())
    }
}

type Res<T> = Result<T, Failure>;

/// Runs one command. Returns the process exit code: 0 on success, 1 on a
/// domain error, 2 on a usage error.
pub fn dispatch<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut digest = None;
    let result = execute(&cli.command, &mut digest);
    let manifest = cli.manifest.as_deref().map(|path| {
        let arguments = serde_json::to_value(&cli.command).unwrap_or(Value::Null);
        let command = match &arguments {
            Value::Object(m) => m.keys().next().cloned().unwrap_or_default(),
            Value::String(s) => s.clone(),
            _ => String::new(),
        };
        let m = RunManifest { command, arguments, engine_version: ENGINE_VERSION, level_digest: digest.clone() };
        write_atomic(path, pretty(&serde_json::to_value(m).expect("plain data")).as_bytes())
    });
    let code = match result {
        Ok(v) => {
            let _ = writeln!(out, "{}", pretty(&v));
            0
        }
        Err(Failure(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    };
    match manifest {
        Some(Err(Failure(msg))) => {
            let _ = writeln!(err, "error: manifest: {msg}");
            1
        }
        _ => code,
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("plain data")
}

/// Write to a sibling temporary file and rename it over `path`.
fn write_atomic(path: &Path, bytes: &[u8]) -> Res<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn read_text(src: &str) -> Res<String> {
    match src.strip_prefix('@') {
        Some(path) => Ok(std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?),
        None if Path::new(src).is_file() => Ok(std::fs::read_to_string(src)?),
        None => Ok(src.to_string()),
    }
}

fn formula(src: &str) -> Res<Formula> {
    Ok(parse(read_text(src)?.trim())?)
}

fn class_json(c: ComplexityClass) -> Value {
    json!({ "class": c.kind_name(), "n": c.level() })
}

fn config_json(c: &Configuration) -> Value {
    json!({ "line": c.line, "registers": c.registers.iter().map(HSet::shorthand).collect::<Vec<_>>() })
}

fn outcome_json(o: &Outcome) -> Value {
    let (kind, config, clock, extra) = match o {
        Outcome::Halted { config, clock } => ("halted", config, clock, None),
        Outcome::BudgetExhausted { config, clock } => ("budget_exhausted", config, clock, None),
        Outcome::LimitUndetermined { config, clock, cycle_length } => {
            ("limit_undetermined", config, clock, Some(*cycle_length))
        }
    };
    json!({
        "outcome": kind,
        "clock": clock_json(clock),
        "config": config_json(config),
        "cycleLength": extra,
    })
}

fn clock_json(c: &OrdinalClock) -> Value {
    json!({ "text": c.to_string(), "limits": c.limits, "steps": c.steps })
}

fn level_for(n: usize, digest: &mut Option<String>) -> Res<&'static Level> {
    let lv = level::standard_level(n)?;
    *digest = Some(lv.digest());
    Ok(lv)
}

fn program(path: &Path) -> Res<srm::SrmProgram> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(srm::assemble(&text)?)
}

fn rep_json(r: &Representation) -> Value {
    json!({
        "var": r.var.as_str(),
        "label": r.label,
        "sigmaForm": r.sigma_form.to_string(),
        "piDual": r.pi_dual.to_string(),
    })
}

fn read_rep(path: &Path) -> Res<Representation> {
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let field = |k: &str| v.get(k).and_then(Value::as_str).ok_or_else(|| Failure(format!("{}: missing {k}", path.display())));
    let var = Var::new(field("var")?);
    Ok(Representation::from_sigma(var, parse(field("sigmaForm")?)?, field("label")?.to_string())?)
}

fn build_level_json(n: usize) -> Res<String> {
    let cache = std::env::var_os(LEVEL_CACHE_ENV).map(PathBuf::from);
    let file = cache.as_ref().map(|d| d.join(format!("level-{n}-v{ENGINE_VERSION}.json")));
    if let Some(f) = &file {
        if let Ok(text) = std::fs::read_to_string(f) {
            return Ok(text);
        }
    }
    let text = level::standard_level(n)?.to_json();
    if let (Some(dir), Some(f)) = (&cache, &file) {
        std::fs::create_dir_all(dir)?;
        write_atomic(f, text.as_bytes())?;
    }
    Ok(text)
}

fn execute(cmd: &Command, digest: &mut Option<String>) -> Res<Value> {
    Ok(match cmd {
        Command::Parse { src, declare } => {
            let text = read_text(&src.formula)?;
            let f = match declare {
                Some(names) => parse_declared(text.trim(), &names.iter().map(|n| Var::new(n)).collect::<Vec<_>>())?,
                None => parse(text.trim())?,
            };
            json!({
                "formula": f.to_string(),
                "canonical": f.canonical_text(),
                "code": encode(&f).to_string(),
                "freeVars": f.free_vars().iter().map(|x| x.as_str().to_string()).collect::<Vec<_>>(),
            })
        }
        Command::Classify { src } => class_json(classify(&formula(&src.formula)?)),
        Command::Normalize { src, collection } => {
            let n = normalize(&formula(&src.formula)?, *collection)?;
            let mut v = class_json(classify(&n));
            v["formula"] = json!(n.to_string());
            v
        }
        Command::Relativize { src, bound, rename } => {
            let r = formula(&src.formula)?.relativize(&Var::new(bound), *rename)?;
            json!({ "formula": r.to_string() })
        }
        Command::BuildLevel { n, out } => {
            let text = build_level_json(*n)?;
            *digest = Some(hex::encode(Sha256::digest(text.as_bytes())));
            if let Some(path) = out {
                write_atomic(path, text.as_bytes())?;
            }
            serde_json::from_str(&text)?
        }
        Command::Eval { level, formula: src, assign, no_memo } => {
            let lv = level_for(*level, digest)?;
            let phi = formula(src)?;
            let mut env = BTreeMap::new();
            for a in assign {
                let (k, val) = a.split_once('=').ok_or_else(|| Failure(format!("bad assignment {a:?}, want v=SET")))?;
                env.insert(Var::new(k.trim()), val.trim().parse::<HSet>()?);
            }
            let inputs = phi.free_vars();
            let values = inputs
                .iter()
                .map(|x| env.get(x).cloned().ok_or_else(|| Failure(format!("no value for free variable {x}"))))
                .collect::<Res<Vec<_>>>()?;
            let (value, stats) = Prepared::new(&phi, &inputs)?.eval_with_stats(lv.domain(), &values, !no_memo)?;
            json!({ "value": value, "stats": { "nodes": stats.nodes, "memoHits": stats.memo_hits } })
        }
        Command::RunSrm { program: path, level, input, max_steps, max_limits, trace } => {
            let lv = level_for(*level, digest)?;
            let p = program(path)?;
            let inputs = input.iter().map(|s| s.parse::<HSet>()).collect::<Result<Vec<_>, _>>()?;
            let budget = Budget { max_steps: *max_steps, max_limits: *max_limits };
            let r = srm::run(&p, &inputs, lv, budget, trace.is_some())?;
            if let (Some(path), Some(steps)) = (trace, &r.trace) {
                let mut text = String::new();
                for (clock, c) in steps {
                    let mut line = config_json(c);
                    line["clock"] = clock_json(clock);
                    text.push_str(&serde_json::to_string(&line)?);
                    text.push('\n');
                }
                write_atomic(path, text.as_bytes())?;
            }
            outcome_json(&r.outcome)
        }
        Command::CompileD0 { src, out } => {
            let phi = formula(&src.formula)?;
            let p = srm::compile_delta0(&phi)?;
            let asm = srm::disassemble(&p);
            if let Some(path) = out {
                write_atomic(path, asm.as_bytes())?;
            }
            json!({
                "inputs": phi.free_vars().iter().map(|x| x.as_str().to_string()).collect::<Vec<_>>(),
                "lines": p.len(),
                "registers": p.register_count(),
                "assembly": asm,
            })
        }
        Command::Forge(f) => forge_cmd(f)?,
        Command::Analyze { sentences, max_level } => {
            let text = std::fs::read_to_string(sentences).map_err(|e| format!("{}: {e}", sentences.display()))?;
            serde_json::to_value(forge::spectrum(&parse_list(&text)?, *max_level)?)?
        }
        Command::Height { program: path, level, max_steps, max_limits } => {
            let lv = level_for(*level, digest)?;
            let budget = Budget { max_steps: *max_steps, max_limits: *max_limits };
            json!({ "height": srm::height(&program(path)?, lv, budget)? })
        }
    })
}

fn forge_cmd(cmd: &ForgeCommand) -> Res<Value> {
    Ok(match cmd {
        ForgeCommand::Kleene { matrix, var } => rep_json(&forge::kleene_representation(&formula(matrix)?, &Var::new(var))?),
        ForgeCommand::Succ { rep } => rep_json(&forge::successor_representation(&read_rep(rep)?)),
        ForgeCommand::Comp { gamma, delta } => {
            let c = forge::comp_sentence(&read_rep(gamma)?, &read_rep(delta)?);
            let mut v = class_json(classify(&normalize(&c, None)?));
            v["formula"] = json!(c.to_string());
            v
        }
        ForgeCommand::Exists { rep } => json!({ "formula": forge::exists_sentence(&read_rep(rep)?).to_string() }),
        ForgeCommand::Rfn { theory, level_var } => {
            json!({ "formula": forge::rfn_template(&formula(theory)?, &Var::new(level_var))?.to_string() })
        }
        ForgeCommand::Phit { theory } => json!({ "formula": forge::phit_template(&formula(theory)?)?.to_string() }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let argv = std::iter::once("setlab").chain(args.iter().copied());
        let code = dispatch(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn classify_json() {
        let (code, out, _) = call(&["classify", "exists x. x = x"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v, json!({"class": "Sigma", "n": 1}));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(call(&["frobnicate"]).0, 2);
        assert_eq!(call(&["classify", "x in"]).0, 1);
        assert_eq!(call(&["--help"]).0, 0);
    }

    #[test]
    fn build_level_four() {
        let (code, out, _) = call(&["build-level", "4"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["elements"].as_array().unwrap().len(), 16);
        assert_eq!(call(&["build-level", "5"]).0, 1);
    }

    #[test]
    fn manifest_and_trace() {
        let dir = tempfile::tempdir().unwrap();
        let prog = dir.path().join("p.srm");
        std::fs::write(&prog, "ADD 0 1\nJEMPTY 1 1\n").unwrap();
        let trace = dir.path().join("t.jsonl");
        let man = dir.path().join("m.json");
        let args = [
            "run-srm",
            prog.to_str().unwrap(),
            "--level",
            "3",
            "--trace",
            trace.to_str().unwrap(),
            "--manifest",
            man.to_str().unwrap(),
        ];
        let (code, out, _) = call(&args);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["outcome"], "halted");
        assert!(std::fs::read_to_string(&trace).unwrap().lines().count() >= 3);
        let m: Value = serde_json::from_str(&std::fs::read_to_string(&man).unwrap()).unwrap();
        assert_eq!(m["command"], "run-srm");
        assert_eq!(m["levelDigest"], json!(level::standard_level(3).unwrap().digest()));
        let first = std::fs::read(&man).unwrap();
        assert_eq!(call(&args).1, out);
        assert_eq!(std::fs::read(&man).unwrap(), first);
    }

    #[test]
    fn forge_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let one = dir.path().join("one.json");
        let (code, out, _) = call(&["forge", "kleene", "--matrix", "Empty(x)"]);
        assert_eq!(code, 0);
        std::fs::write(&one, &out).unwrap();
        let (code, out, _) = call(&["forge", "succ", "--rep", one.to_str().unwrap()]);
        assert_eq!(code, 0);
        let two = dir.path().join("two.json");
        std::fs::write(&two, &out).unwrap();
        let (code, out, _) = call(&["forge", "comp", "--gamma", one.to_str().unwrap(), "--delta", two.to_str().unwrap()]);
        assert_eq!(code, 0, "{out}");
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!((v["class"].as_str(), v["n"].as_u64()), (Some("Pi"), Some(1)));
    }

    #[test]
    fn analyze_list() {
        let dir = tempfile::tempdir().unwrap();
        let list = dir.path().join("s.txt");
        std::fs::write(&list, "# sentences\nexists x. Empty(x)\nexists x. exists e in x. Empty(e)\n").unwrap();
        let (code, out, _) = call(&["analyze", "--sentences", list.to_str().unwrap(), "--max-level", "4"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["value"], 2);
    }
}
