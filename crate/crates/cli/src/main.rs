//! `hmmon`: verify and learn runtime monitors for risk-labelled HMMs.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hmmon_core::learner::{learn_monitor, ConformanceConfig};
use hmmon_core::model::{Dfa, Hmm, Thresholds, Trace};
use hmmon_core::oracle::{cnf_gadget, enumerate_trace_risks_with_budget, CnfFormula, DEFAULT_ENUM_BUDGET};
use hmmon_core::rational::Rat;
use hmmon_core::transform::{build_colored_mdp, product, unroll_with_risk, AlarmMode, Variant};
use hmmon_core::verifier::check_monitor;
use hmmon_core::inference::trace_risk;

#[derive(Parser)]
#[command(name = "hmmon", version, about = "Monitor verification and learning for hidden Markov models")]
struct Cli {
    /// Worker count (1 = reference single-threaded behavior; higher values
    /// currently behave identically).
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the exact risk of a trace.
    Risk {
        /// HMM model (JSON).
        hmm: PathBuf,
        /// Comma-separated observations, or @path to a trace file.
        trace: String,
    },
    /// Check a monitor for missed and false alarms up to a horizon.
    Verify {
        hmm: PathBuf,
        monitor: PathBuf,
        /// Safe threshold ("p/q"): accepted traces must have risk >= this.
        #[arg(long)]
        ls: String,
        /// Unsafe threshold ("p/q"): traces with higher risk must be accepted.
        #[arg(long)]
        lu: String,
        #[arg(long)]
        horizon: usize,
    },
    /// Learn a correct monitor and write it as JSON and DOT.
    Learn {
        hmm: PathBuf,
        #[arg(long)]
        ls: String,
        /// Learning threshold ("p/q") used by membership queries.
        #[arg(long)]
        ll: String,
        #[arg(long)]
        lu: String,
        #[arg(long)]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Conformance samples per equivalence query at the safe threshold.
        #[arg(long, default_value_t = 100)]
        safe_samples: usize,
        /// Conformance samples per equivalence query at the unsafe threshold.
        #[arg(long, default_value_t = 100)]
        unsafe_samples: usize,
        /// Output prefix; writes <prefix>.dfa.json and <prefix>.dot.
        #[arg(long, default_value = "learned")]
        out: String,
    },
    /// Enumerate all traces up to a horizon as CSV (trace;prob;risk).
    Enumerate {
        hmm: PathBuf,
        #[arg(long)]
        horizon: usize,
        /// Path enumeration budget.
        #[arg(long, default_value_t = DEFAULT_ENUM_BUDGET)]
        budget: u64,
        #[command(flatten)]
        out: OutFile,
    },
    /// Build the CNF hardness gadget HMM from a DIMACS file.
    Gadget {
        cnf: PathBuf,
        #[command(flatten)]
        out: OutFile,
    },
    /// Export a model as DOT, or the constructed colored MDP as JSON/DOT.
    Export {
        /// HMM or DFA model (JSON; kind is read from the file).
        model: PathBuf,
        /// Monitor DFA: export the colored MDP built from the product.
        #[arg(long)]
        monitor: Option<PathBuf>,
        /// Alarm mode for the MDP: ma (missed alarms) or fa (false alarms).
        #[arg(long, default_value = "ma")]
        mode: String,
        #[arg(long, default_value_t = 3)]
        horizon: usize,
        /// Horizon variant for the MDP: exact or leq.
        #[arg(long, default_value = "leq")]
        variant: String,
        /// Output format: dot, or json (colored MDP only).
        #[arg(long, default_value = "dot")]
        format: String,
        #[command(flatten)]
        out: OutFile,
    },
}

#[derive(Args)]
struct OutFile {
    /// Output path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl OutFile {
    fn write(&self, content: &str) -> Result<(), String> {
        match &self.out {
            Some(p) => std::fs::write(p, content).map_err(|e| format!("{}: {e}", p.display())),
            None => {
                print!("{content}");
                Ok(())
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let msg = e.to_string();
            eprintln!("error: {}", msg.lines().next().unwrap_or("invalid usage"));
            return ExitCode::from(1);
        }
        Err(e) => {
            // --help / --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    if cli.jobs == 0 {
        return Err("--jobs must be at least 1".into());
    }
    match cli.command {
        Command::Risk { hmm, trace } => {
            let hmm = Hmm::load(hmm).map_err(|e| e.to_string())?;
            let trace = parse_trace_arg(&trace)?;
            let risk = trace_risk(&hmm, &trace).map_err(|e| e.to_string())?;
            println!("{risk}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { hmm, monitor, ls, lu, horizon } => {
            let hmm = Hmm::load(hmm).map_err(|e| e.to_string())?;
            let monitor = Dfa::load(monitor).map_err(|e| e.to_string())?;
            let ls: Rat = ls.parse().map_err(|e: hmmon_core::Error| e.to_string())?;
            let lu: Rat = lu.parse().map_err(|e: hmmon_core::Error| e.to_string())?;
            let th = Thresholds::new(ls, lu.clone(), lu, horizon).map_err(|e| e.to_string())?;
            let verdict = check_monitor(&hmm, &monitor, &th).map_err(|e| e.to_string())?;
            print!("{}", verdict.to_json_string());
            Ok(if verdict.is_correct() { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::Learn { hmm, ls, ll, lu, horizon, seed, safe_samples, unsafe_samples, out } => {
            let hmm = Hmm::load(hmm).map_err(|e| e.to_string())?;
            let parse = |s: &str| s.parse::<Rat>().map_err(|e| e.to_string());
            let th = Thresholds::new(parse(&ls)?, parse(&ll)?, parse(&lu)?, horizon)
                .map_err(|e| e.to_string())?;
            let conf = ConformanceConfig { safe_samples, unsafe_samples };
            let report = learn_monitor(&hmm, &th, &conf, seed).map_err(|e| e.to_string())?;
            let json_path = format!("{out}.dfa.json");
            let dot_path = format!("{out}.dot");
            report.monitor.save(&json_path).map_err(|e| e.to_string())?;
            std::fs::write(&dot_path, report.monitor.to_dot()).map_err(|e| e.to_string())?;
            print!("{}", report.to_json_string());
            Ok(ExitCode::SUCCESS)
        }
        Command::Enumerate { hmm, horizon, budget, out } => {
            let hmm = Hmm::load(hmm).map_err(|e| e.to_string())?;
            let table = enumerate_trace_risks_with_budget(&hmm, horizon, budget)
                .map_err(|e| e.to_string())?;
            out.write(&table.to_csv())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Gadget { cnf, out } => {
            let text = std::fs::read_to_string(&cnf)
                .map_err(|e| format!("{}: {e}", cnf.display()))?;
            let formula = CnfFormula::parse_dimacs(&text).map_err(|e| e.to_string())?;
            out.write(&cnf_gadget(&formula).to_json_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Export { model, monitor, mode, horizon, variant, format, out } => {
            let text = std::fs::read_to_string(&model)
                .map_err(|e| format!("{}: {e}", model.display()))?;
            let kind: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| e.to_string())?;
            match monitor {
                None => {
                    if format != "dot" {
                        return Err(format!("format {format} requires --monitor"));
                    }
                    let dot = match kind["kind"].as_str() {
                        Some("hmm") => Hmm::from_json_str(&text).map_err(|e| e.to_string())?.to_dot(),
                        Some("dfa") => Dfa::from_json_str(&text).map_err(|e| e.to_string())?.to_dot(),
                        other => return Err(format!("unknown model kind {other:?}")),
                    };
                    out.write(&dot)?;
                }
                Some(mon) => {
                    let hmm = Hmm::from_json_str(&text).map_err(|e| e.to_string())?;
                    let mon = Dfa::load(mon).map_err(|e| e.to_string())?;
                    let mode = match mode.as_str() {
                        "ma" => AlarmMode::MissedAlarm,
                        "fa" => AlarmMode::FalseAlarm,
                        other => return Err(format!("unknown mode {other:?}, expected ma or fa")),
                    };
                    let variant = match variant.as_str() {
                        "exact" => Variant::ExactH,
                        "leq" => Variant::LeqH,
                        other => return Err(format!("unknown variant {other:?}, expected exact or leq")),
                    };
                    let prod = product(&hmm, &mon, mode).map_err(|e| e.to_string())?;
                    let unrolled = unroll_with_risk(&prod, horizon).map_err(|e| e.to_string())?;
                    let mdp = build_colored_mdp(&unrolled, variant);
                    let content = match format.as_str() {
                        "json" => mdp.to_json_string(),
                        "dot" => mdp.to_dot(),
                        other => return Err(format!("unknown format {other:?}, expected json or dot")),
                    };
                    out.write(&content)?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Parses a trace argument: comma-separated observations, or `@path` to a
/// file whose commas/whitespace both separate observations.
fn parse_trace_arg(arg: &str) -> Result<Trace, String> {
    if let Some(path) = arg.strip_prefix('@') {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
        let symbols: Vec<String> = text
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect();
        Ok(Trace::new(symbols))
    } else {
        Ok(Trace::parse_csv(arg))
    }
}
