//! `irsmith`: generate, check, run, optimize and fuzz programs.
//!
//! Exit status: 0 on success, 1 on usage, configuration or input errors (and
//! on `verify` findings), 2 when a fuzz campaign found at least one bug group.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use irsmith::exec::{
    differential_check, input_vectors, interpret, run_pass, run_pipeline, BugInjection, PassId, TypedInt, DEFAULT_FUEL,
    DEFAULT_PIPELINE, ESCALATION_FACTOR,
};
use irsmith::fuzz::{program_file_name, run_campaign, Budget, Campaign};
use irsmith::genkit::rng::derive_seed;
use irsmith::ir::function_arg_types;
use irsmith::stats::{measure_op_frequencies, monte_carlo_while, while_success_probability, DEFAULT_TAIL_TOLERANCE};
use irsmith::{generate_module, parse_module, print_module, verify_module, FreqModel, GenConfig, Module};

#[derive(Parser, Debug)]
#[command(
    name = "irsmith",
    version,
    about = "Random program generation and differential testing"
)]
struct Cli {
    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Generator config file (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the resolved config to this path (`-` for standard output) and exit.
    #[arg(long, global = true)]
    dump_config: Option<PathBuf>,
    /// Output file, or directory when several programs are generated.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Number of programs.
    #[arg(short = 'n', long = "count", global = true)]
    count: Option<u64>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate programs.
    Generate,
    /// Parse and verify a program.
    Verify { file: PathBuf },
    /// Interpret a program's entry function.
    Run {
        file: PathBuf,
        /// Comma-separated entry arguments.
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        args: String,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u64,
    },
    /// Optimize a program.
    Opt {
        file: PathBuf,
        /// Comma-separated passes run once in order; default is the full
        /// pipeline repeated to a fixpoint.
        #[arg(long)]
        passes: Option<String>,
        #[command(flatten)]
        inject: InjectArg,
    },
    /// Differentially check one program against its optimized form.
    Diff {
        file: PathBuf,
        #[command(flatten)]
        inject: InjectArg,
        #[command(flatten)]
        check: CheckArgs,
    },
    /// Run a differential fuzzing campaign.
    Fuzz {
        #[arg(long)]
        output_dir: PathBuf,
        #[command(flatten)]
        inject: InjectArg,
        #[command(flatten)]
        check: CheckArgs,
        /// Wall-clock budget; without it the campaign runs `--count` programs.
        #[arg(long)]
        seconds: Option<f64>,
        /// Worker threads (0 = one per core).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Frequency model: analytic, Monte-Carlo and measured.
    Stats {
        /// Monte-Carlo trials.
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
}

#[derive(Args, Debug)]
struct InjectArg {
    /// Injected optimizer bugs: b1, b2, b1,b2 or none.
    #[arg(long, default_value = "none")]
    inject: String,
}

impl InjectArg {
    fn parse(&self) -> Result<BugInjection> {
        BugInjection::parse_list(&self.inject).context("--inject")
    }
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// Input vectors per program.
    #[arg(long, default_value_t = 4)]
    inputs: usize,
    #[arg(long, default_value_t = DEFAULT_FUEL)]
    fuel: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Defaults, then the config file, then flags.
fn resolve_config(cli: &Cli) -> Result<GenConfig> {
    let mut config = match &cli.config {
        Some(path) => GenConfig::load(path)?,
        None => GenConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) if path != Path::new("-") => {
            fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
        }
        _ => io::stdout()
            .write_all(text.as_bytes())
            .context("cannot write to standard output"),
    }
}

fn read_module(path: &Path) -> Result<Module> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_module(&text).with_context(|| format!("{}", path.display()))
}

fn checked_module(path: &Path) -> Result<Module> {
    let module = read_module(path)?;
    if let Some(v) = verify_module(&module).first() {
        bail!("{}: {v}", path.display());
    }
    Ok(module)
}

/// A seed in a campaign file name (`<index>_<seed>.rir`).
fn seed_in_name(path: &Path) -> Option<u64> {
    path.file_stem()?.to_str()?.split_once('_')?.1.parse().ok()
}

fn run(cli: Cli) -> Result<u8> {
    let config = resolve_config(&cli)?;
    if let Some(path) = &cli.dump_config {
        emit(Some(path), &config.to_text())?;
        return Ok(0);
    }
    let Some(command) = &cli.command else {
        bail!("no subcommand given; see --help");
    };
    let output = cli.output.as_deref();
    match command {
        Command::Generate => generate(&config, cli.count.unwrap_or(1), output),
        Command::Verify { file } => {
            let module = read_module(file)?;
            let violations = verify_module(&module);
            for v in &violations {
                println!("{v}");
            }
            if violations.is_empty() {
                println!("ok");
                Ok(0)
            } else {
                Ok(1)
            }
        }
        Command::Run { file, args, fuel } => {
            let module = checked_module(file)?;
            let args = parse_args(&module, args)?;
            let outcome = interpret(&module, &module.entry, &args, *fuel)?;
            emit(output, &format!("{outcome}\n"))?;
            Ok(0)
        }
        Command::Opt { file, passes, inject } => {
            let module = checked_module(file)?;
            let inject = inject.parse()?;
            let optimized = match passes {
                Some(list) => PassId::parse_list(list)
                    .context("--passes")?
                    .into_iter()
                    .fold(module, |m, p| run_pass(&m, p, inject)),
                None => run_pipeline(&module, &DEFAULT_PIPELINE, inject).module,
            };
            emit(output, &print_module(&optimized))?;
            Ok(0)
        }
        Command::Diff { file, inject, check } => {
            let module = checked_module(file)?;
            let seed = cli.seed.or_else(|| seed_in_name(file)).unwrap_or(config.seed);
            let inputs = input_vectors(&module, seed, check.inputs);
            let verdicts = differential_check(
                &module,
                &DEFAULT_PIPELINE,
                inject.parse()?,
                &inputs,
                check.fuel,
                ESCALATION_FACTOR,
            )?;
            let mut text = String::new();
            for (args, v) in inputs.iter().zip(&verdicts) {
                let args: Vec<String> = args.iter().map(|a| a.value.to_string()).collect();
                text.push_str(&format!("({})\t{v}\n", args.join(", ")));
            }
            emit(output, &text)?;
            Ok(0)
        }
        Command::Fuzz {
            output_dir,
            inject,
            check,
            seconds,
            jobs,
        } => {
            let budget = match seconds {
                Some(s) => Budget::Seconds(*s),
                None => Budget::Programs(cli.count.unwrap_or(1000)),
            };
            let mut campaign = Campaign::new(config, inject.parse()?, budget);
            campaign.inputs_per_program = check.inputs;
            campaign.fuel = check.fuel;
            campaign.jobs = *jobs;
            let report = run_campaign(&campaign, output_dir)?;
            print!("{}", report.report_text());
            Ok(if report.groups.is_empty() { 0 } else { 2 })
        }
        Command::Stats { trials } => stats(&config, cli.count.unwrap_or(10_000), *trials, output),
    }
}

fn generate(config: &GenConfig, count: u64, output: Option<&Path>) -> Result<u8> {
    if count <= 1 {
        let module = generate_module(config)?;
        emit(output, &print_module(&module))?;
        return Ok(0);
    }
    let Some(dir) = output else {
        bail!("generating {count} programs needs --output <directory>");
    };
    fs::create_dir_all(dir.join("programs")).with_context(|| format!("cannot create {}", dir.display()))?;
    for index in 0..count {
        let seed = derive_seed(config.seed, index);
        let module = generate_module(&GenConfig { seed, ..config.clone() })?;
        let path = dir.join(program_file_name(index, seed));
        fs::write(&path, print_module(&module)).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(0)
}

fn parse_args(module: &Module, text: &str) -> Result<Vec<TypedInt>> {
    let Some(entry) = module.entry_function() else {
        bail!("no @{} function", module.entry);
    };
    let types = function_arg_types(entry);
    let values: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if values.len() != types.len() {
        bail!(
            "@{} takes {} argument(s), got {}",
            module.entry,
            types.len(),
            values.len()
        );
    }
    types
        .iter()
        .zip(values)
        .map(|(&ty, v)| {
            let value = match v {
                "true" => 1,
                "false" => 0,
                _ => v.parse().with_context(|| format!("bad argument `{v}`"))?,
            };
            if !ty.fits(value) {
                bail!("argument {value} does not fit {ty}");
            }
            Ok(TypedInt::new(ty, value))
        })
        .collect()
}

fn stats(config: &GenConfig, programs: u64, trials: u64, output: Option<&Path>) -> Result<u8> {
    let report = measure_op_frequencies(config, programs)?;
    let p_bool = report.bool_producer_fraction();
    let reference = FreqModel::new(0.2, 1.0 / 90.0)?;
    let measured_model = FreqModel::new(config.p_stop, p_bool)?;
    let mc = monte_carlo_while(&reference, trials, config.seed);
    let mut text = report.to_tsv();
    text.push('\n');
    text.push_str(&format!(
        "analytic\tp_g=0.2\tp_bool=1/90\t{:.6}\n",
        while_success_probability(&reference, DEFAULT_TAIL_TOLERANCE)
    ));
    text.push_str(&format!(
        "monte_carlo\tp_g=0.2\tp_bool=1/90\t{:.6}\tse={:.6}\ttrials={trials}\n",
        mc.value, mc.standard_error
    ));
    let analytic = while_success_probability(&measured_model, DEFAULT_TAIL_TOLERANCE);
    text.push_str(&format!(
        "analytic\tp_g={}\tp_bool={p_bool:.6}\t{analytic:.6}\n",
        config.p_stop
    ));
    if let Some(f) = report.ops.get("scf.while") {
        let measured = f.success_fraction();
        text.push_str(&format!(
            "measured\tscf.while\t{measured:.6}\tdiff_pp={:+.2}\tprograms={programs}\n",
            (measured - analytic) * 100.0
        ));
    }
    emit(output, &text)?;
    Ok(0)
}
