//! `smachine`: build, run and compile S-machines, and run the verification
//! harness.
//!
//! Exit codes: 0 success, 1 usage, 2 verification failure, 3 I/O.

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use smachine::compute::{enumerate_computations, run_history, HistoryFilter};
use smachine::constructors::*;
use smachine::format::{parse_machine, print_machine, Manifest};
use smachine::harness::{self, HarnessConfig, Report};
use smachine::machine::{parse_letters, SMachine};
use smachine::presentation::{self, ExportFormat, Presentation};
use smachine::trapezia::{disk_diagram_cells, is_disk_word, DiskVerdict, TrapeziumBuilder};

#[derive(Parser)]
#[command(name = "smachine", version, about = "S-machine workbench")]
struct Cli {
    /// Worker threads for the harness; output does not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Replay a recorded experiment: rebuild the main machine from the
    /// manifest's parameters and check its hash.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a machine and write its description (and a manifest).
    Build {
        #[command(flatten)]
        machine: MachineArgs,
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Manifest path; defaults to `<out>.manifest.json` when --out is given.
        #[arg(long)]
        manifest_out: Option<PathBuf>,
    },
    /// Run a history on a word and print the trace.
    Simulate {
        #[command(flatten)]
        machine: MachineArgs,
        #[arg(long)]
        word: String,
        #[arg(long, default_value = "")]
        history: String,
        /// Print only the final word.
        #[arg(long)]
        quiet: bool,
    },
    /// Stream every computation from a word up to a depth.
    Enumerate {
        #[command(flatten)]
        machine: MachineArgs,
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value = "reduced")]
        filter: HistoryFilter,
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Compile a group presentation from the main machine.
    Compile {
        #[command(flatten)]
        machine: MachineArgs,
        #[arg(long, value_enum, default_value_t = Group::G)]
        group: Group,
        /// k for G_k.
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        k: i64,
        #[arg(long, default_value = "plain")]
        format: ExportFormat,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Convert a plain presentation file to another format.
    Export {
        input: PathBuf,
        #[arg(long, default_value = "gap-style")]
        format: ExportFormat,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run harness suites; exits 2 if any check fails.
    Verify {
        #[command(flatten)]
        machine: MachineArgs,
        /// A suite name or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        max_tape: Option<usize>,
        /// Depth for the wi-bound, chi and norep suites.
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        words: Option<usize>,
        #[arg(long)]
        trapezia: Option<usize>,
        /// Write the reports as JSON.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Decide whether a word is a disk word and count diagram cells.
    Disk {
        #[command(flatten)]
        machine: MachineArgs,
        /// A word over the machine letters.
        #[arg(long, conflicts_with = "kk")]
        word: Option<String>,
        /// Use W(k,k).
        #[arg(long, allow_hyphen_values = true)]
        kk: Option<i64>,
        /// Raise the word to the L-th power before testing.
        #[arg(long)]
        power: bool,
        #[arg(long, default_value_t = smachine::search::DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Render saved harness reports.
    Report {
        input: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Group {
    #[value(name = "G")]
    G,
    #[value(name = "M")]
    M,
    #[value(name = "Mbar")]
    MBar,
    #[value(name = "Gbar")]
    GBar,
    #[value(name = "Gk")]
    Gk,
    #[value(name = "Gbar-HNN")]
    GBarHnn,
}

#[derive(Args, Clone)]
#[group(id = "kind", multiple = false)]
struct KindArgs {
    /// The main machine M (default).
    #[arg(long)]
    main: bool,
    /// The trimmed machine M̄.
    #[arg(long)]
    trimmed: bool,
    /// The toy recognizer M₁.
    #[arg(long)]
    toy: bool,
    #[arg(long)]
    lr: bool,
    #[arg(long)]
    rl: bool,
    #[arg(long)]
    lr_m: bool,
    #[arg(long)]
    m3: bool,
    #[arg(long)]
    m5: bool,
    /// A machine description file.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct MachineArgs {
    #[command(flatten)]
    kind: KindArgs,
    #[arg(long, default_value_t = DEFAULT_M)]
    m: usize,
    #[arg(long = "L", default_value_t = DEFAULT_L)]
    l: u32,
    /// Use the even-length toy recognizer (the only shipped one).
    #[arg(long, default_value_t = true)]
    toy_even: bool,
    /// Tape letters for LR / RL / LR_m.
    #[arg(long, value_delimiter = ',', default_value = "a,b")]
    letters: Vec<String>,
}

enum Failure {
    Usage(String),
    Verify(String),
    Io(PathBuf, std::io::Error),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Verify(m) => write!(f, "{m}"),
            Failure::Io(p, e) => write!(f, "{}: {e}", p.display()),
        }
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Verify(_) => 2,
            Failure::Io(..) => 3,
        }
    }
}

impl From<smachine::Error> for Failure {
    fn from(e: smachine::Error) -> Self {
        use smachine::Error as E;
        match e {
            E::NotApplicable { .. }
            | E::NotApplicableAt { .. }
            | E::WitnessInvalid(_)
            | E::IneligibleHistory(_)
            | E::SuperscriptMismatch(_) => Failure::Verify(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn write(path: &Path, text: &str) -> Res<()> {
    std::fs::write(path, text).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn emit(out: Option<&Path>, text: &str) -> Res<()> {
    match out {
        Some(p) => write(p, text),
        None => {
            use std::io::Write;
            // A closed pipe (e.g. `| head`) is not an error.
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            Ok(())
        }
    }
}

struct Ctx {
    jobs: usize,
    manifest: Option<Manifest>,
}

impl Ctx {
    /// The main-machine bundle, from the manifest when one is given.
    fn bundle(&self, a: &MachineArgs) -> Res<MainMachineBundle> {
        if !a.toy_even {
            return Err(Failure::Usage("only the even-length toy recognizer is shipped".into()));
        }
        let toy = ToyRecognizer::even();
        let Some(man) = &self.manifest else {
            return Ok(build_main_machine(&toy, a.m, a.l)?);
        };
        if man.m0 != toy.id {
            return Err(Failure::Usage(format!("manifest records M0 `{}`, only `{}` is shipped", man.m0, toy.id)));
        }
        let b = build_main_machine(&toy, man.params.m, man.params.l)?;
        let rebuilt = Manifest::for_bundle(&b);
        if rebuilt.machine_sha256 != man.machine_sha256 {
            return Err(Failure::Verify(format!(
                "manifest hash {} does not match the rebuilt machine {}",
                man.machine_sha256, rebuilt.machine_sha256
            )));
        }
        Ok(b)
    }

    fn machine(&self, a: &MachineArgs) -> Res<(SMachine, Option<MainMachineBundle>)> {
        let k = &a.kind;
        let letters: Vec<&str> = a.letters.iter().map(String::as_str).collect();
        Ok(if let Some(path) = &k.file {
            (parse_machine(&read(path)?)?, None)
        } else if k.toy {
            (ToyRecognizer::even().machine()?, None)
        } else if k.lr {
            (build_lr(&letters)?, None)
        } else if k.rl {
            (build_rl(&letters)?, None)
        } else if k.lr_m {
            (build_lr_m(&letters, a.m)?, None)
        } else if k.m3 {
            (build_m3(&ToyRecognizer::even(), a.m)?.blueprint.build()?, None)
        } else if k.m5 {
            (build_m5(&build_m3(&ToyRecognizer::even(), a.m)?)?, None)
        } else {
            let b = self.bundle(a)?;
            let m = if k.trimmed { build_trimmed_machine(&b)? } else { b.machine.clone() };
            (m, Some(b))
        })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> Res<()> {
    let manifest = match &cli.manifest {
        Some(p) => Some(Manifest::from_json(&read(p)?)?),
        None => None,
    };
    let ctx = Ctx { jobs: cli.jobs.max(1), manifest };
    match cli.command {
        Command::Build { machine, out, manifest_out } => {
            let (m, b) = ctx.machine(&machine)?;
            emit(out.as_deref(), &print_machine(&m))?;
            let man_path = manifest_out.or_else(|| out.as_ref().map(|o| PathBuf::from(format!("{}.manifest.json", o.display()))));
            if let (Some(p), Some(b)) = (man_path, b) {
                let mut man = Manifest::for_bundle(&b);
                man.machine = m.name.clone();
                man.machine_sha256 = smachine::format::machine_hash(&m);
                man.rules = m.num_positive_rules();
                write(&p, &(man.to_json() + "\n"))?;
            }
            Ok(())
        }
        Command::Simulate { machine, word, history, quiet } => {
            let (m, _) = ctx.machine(&machine)?;
            let w = m.parse_word(&word)?;
            let h = m.history_from_str(&history)?;
            let c = run_history(&m, &w, &h)?;
            if quiet {
                println!("{}", m.format_word(c.end()));
            } else {
                println!("{}", m.format_word(c.start()));
                for (r, v) in c.history.0.iter().zip(&c.trace[1..]) {
                    println!("  {} -> {}", m.rule_name(*r), m.format_word(v));
                }
            }
            Ok(())
        }
        Command::Enumerate { machine, word, depth, filter, limit } => {
            let (m, _) = ctx.machine(&machine)?;
            let w = m.parse_word(&word)?;
            let mut out = std::io::stdout().lock();
            for c in enumerate_computations(&m, &w, depth, filter).take(limit.unwrap_or(usize::MAX)) {
                use std::io::Write;
                let h = if c.history.is_empty() { "-".to_string() } else { m.history_to_string(&c.history) };
                if writeln!(out, "{h} : {}", m.format_word(c.end())).is_err() {
                    break;
                }
            }
            Ok(())
        }
        Command::Compile { machine, group, k, format, out } => {
            let b = ctx.bundle(&machine)?;
            let p = compile(&b, group, k)?;
            emit(out.as_deref(), &presentation::export(&p, format))
        }
        Command::Export { input, format, out } => {
            let p = presentation::parse_plain(&read(&input)?)?;
            emit(out.as_deref(), &presentation::export(&p, format))
        }
        Command::Verify { machine, suite, max_tape, depth, budget, seed, words, trapezia, out } => {
            let b = ctx.bundle(&machine)?;
            let mut cfg = HarnessConfig { jobs: ctx.jobs, ..HarnessConfig::default() };
            if let Some(t) = max_tape {
                cfg.lr_max_tape = t;
            }
            if let Some(d) = depth {
                cfg.wi_depth = d;
                cfg.chi_depth = d;
                cfg.norep_depth = d;
            }
            if let Some(x) = budget {
                cfg.search_budget = x;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(n) = words {
                cfg.round_trip_words = n;
            }
            if let Some(n) = trapezia {
                cfg.trapezia = n;
            }
            let reports: Vec<Report> = if suite == "all" {
                harness::run_all(&b, &cfg)?
            } else if harness::SUITES.contains(&suite.as_str()) {
                harness::run_suite(&suite, &b, &cfg)?
            } else {
                return Err(Failure::Usage(format!("unknown suite `{suite}` (one of {} or all)", harness::SUITES.join(", "))));
            };
            for r in &reports {
                print!("{}", r.render());
            }
            if let Some(p) = out {
                write(&p, &(harness::reports_to_json(&reports) + "\n"))?;
            }
            let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.suite.as_str()).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Failure::Verify(format!("failed suites: {}", failed.join(", "))))
            }
        }
        Command::Disk { machine, word, kk, power, budget } => {
            let b = ctx.bundle(&machine)?;
            let m = &b.machine;
            let mut v = match (word, kk) {
                (Some(w), None) => parse_letters(m.alphabet(), &w)?,
                (None, Some(k)) => b.w_kk(k, k).letters().to_vec(),
                _ => return Err(Failure::Usage("give --word or --kk".into())),
            };
            if power {
                v = (0..b.l()).flat_map(|_| v.iter().copied()).collect();
            }
            match is_disk_word(&v, &b, budget) {
                DiskVerdict::Yes { w, history, from_s1 } => {
                    let s1 = b.s1();
                    let c = run_history(m, if from_s1 { &s1 } else { &w }, &history)?;
                    let g = presentation::compile_group_g(&b)?;
                    let cells = disk_diagram_cells(&TrapeziumBuilder::new(m, &g), &b, &w, &c)?;
                    println!("disk word: yes");
                    println!("root: {}", m.format_word(&w));
                    println!("witness ({}): {}", if from_s1 { "s1 -> W" } else { "W -> W_ac" }, m.history_to_string(&history));
                    println!("cells: {cells}");
                    Ok(())
                }
                DiskVerdict::No(why) => {
                    println!("disk word: no ({why})");
                    Ok(())
                }
                DiskVerdict::Unknown => {
                    println!("disk word: unknown (budget {budget} exhausted)");
                    Ok(())
                }
            }
        }
        Command::Report { input, json } => {
            let reports = harness::reports_from_json(&read(&input)?)?;
            if json {
                println!("{}", harness::reports_to_json(&reports));
            } else {
                for r in &reports {
                    print!("{}", r.render());
                }
                let passed = reports.iter().filter(|r| r.passed).count();
                println!("{passed}/{} suites passed", reports.len());
            }
            Ok(())
        }
    }
}

fn compile(b: &MainMachineBundle, group: Group, k: i64) -> Res<Presentation> {
    Ok(match group {
        Group::M => presentation::compile_group_m(b),
        Group::G => presentation::compile_group_g(b)?,
        Group::MBar | Group::GBar | Group::GBarHnn => {
            let trimmed = build_trimmed_machine(b)?;
            let (mbar, gbar) = presentation::compile_trimmed(b, &trimmed)?;
            match group {
                Group::MBar => mbar,
                Group::GBar => gbar,
                _ => presentation::hnn_gbar(&gbar, &trimmed)?,
            }
        }
        Group::Gk => presentation::hnn_gk(&presentation::compile_group_g(b)?, b, k)?,
    })
}
