//! Command-line entry point: instance generation, classification,
//! regularity verification, the unfold reduction, unfold-property checks,
//! and protocol simulation with CSV statistics.
//!
//! Exit codes: 0 on success, 1 when a verification subcommand found a
//! violation (a machine-readable `WITNESS:` line accompanies it), 2 on
//! usage errors such as malformed files or cap violations. Randomized
//! subcommands take `--seed`, falling back to the `COLCOMM_SEED`
//! environment variable and then to 0; the effective seed is always echoed.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::gadgets::{
    check_regular, ver_gadget, ver_group, xor_gadget, xor_group, Gadget, Regularity,
    SymmetryGroup,
};
use crate::instances::{classify, concat, gen_promise, split, BipartitePair, Instance, PromiseClass};
use crate::protocols::{
    decision_from_search, run_deterministic_bicol, run_randomized_bicol, InstanceRecipe,
    OracleStrategy, PhpOracle, ProtocolOutcome, SuccessStats,
};
use crate::rng;
use crate::unfold::{
    reduce_to_bicol, verify_claim, ClaimMode, ComposedInput, RegularGadget,
    DEFAULT_EXHAUSTIVE_CAP,
};

/// Environment variable supplying the default seed.
pub const SEED_ENV: &str = "COLCOMM_SEED";
/// Default instance-length cap for `gen`, `simulate`, and `bench`.
pub const GEN_CAP: usize = 1 << 16;
/// Default block-count cap for `reduce` (the output grows as `N^4`).
pub const REDUCE_CAP: usize = 64;

#[derive(Parser)]
#[command(name = "colcomm", version, about = "Bipartite collision toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a promise instance as JSON.
    Gen(GenArgs),
    /// Print the promise class of an instance file.
    Classify(ClassifyArgs),
    /// Check that a gadget is regular under a group.
    VerifyRegular(VerifyRegularArgs),
    /// Reduce a composed input to a bipartite collision instance.
    Reduce(ReduceArgs),
    /// Check the unfold set properties exhaustively or on samples.
    VerifyClaim(VerifyClaimArgs),
    /// Run a protocol repeatedly on one instance; emit CSV statistics.
    Simulate(SimulateArgs),
    /// Monte-Carlo campaign over fresh instances; emit CSV statistics.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Instance kind: `bicol` (bipartite form) or `col` (full form).
    #[arg(long, default_value = "bicol")]
    kind: String,
    /// Promise class: `1to1` or `2to1`.
    #[arg(long)]
    class: String,
    /// Instance length; a power of two (a power of four for `bicol`).
    #[arg(long = "N")]
    len: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Write to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the size cap.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(Args)]
struct VerifyRegularArgs {
    /// `ver`, `xor`, or a gadget JSON file.
    #[arg(long)]
    gadget: String,
    /// `ver`, `xor`, or a group JSON file.
    #[arg(long)]
    group: String,
}

#[derive(Args)]
struct ReduceArgs {
    /// `ver`, `xor`, or a gadget JSON file.
    #[arg(long)]
    gadget: String,
    /// Group for file gadgets; defaults to the builtin gadget's group.
    #[arg(long)]
    group: Option<String>,
    /// Expected block length; checked against the input file.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the block-count cap.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct VerifyClaimArgs {
    #[arg(long, default_value = "ver")]
    gadget: String,
    #[arg(long)]
    group: Option<String>,
    /// Block length to check.
    #[arg(long)]
    n: usize,
    /// `exhaustive` or `sampled`.
    #[arg(long, default_value = "exhaustive")]
    mode: String,
    /// Sampled pairs to draw in `sampled` mode.
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Cap on the single-input space for exhaustive mode.
    #[arg(long)]
    cap: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    /// `det`, `rand`, or `dec2search`.
    #[arg(long)]
    protocol: String,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Rounds per decision-to-search run.
    #[arg(long = "t", default_value_t = 3)]
    rounds: usize,
    /// Oracle strategy: `lex`, `rand`, or `adv`.
    #[arg(long, default_value = "lex")]
    oracle: String,
    /// Symbolic communication cost charged per oracle call.
    #[arg(long = "oracle-cost", default_value_t = 0)]
    oracle_cost: u64,
    /// Sampling constant of the randomized protocol.
    #[arg(long = "c", default_value_t = 2.0)]
    sampling: f64,
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// `det`, `rand`, or `dec2search`.
    #[arg(long)]
    protocol: String,
    /// Promise class of the generated instances: `1to1` or `2to1`.
    #[arg(long)]
    class: String,
    /// Instance length; a power of four.
    #[arg(long = "N")]
    len: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long = "t", default_value_t = 3)]
    rounds: usize,
    /// Oracle strategy: `lex`, `rand`, `adv`, or `all` for one CSV row per
    /// strategy.
    #[arg(long, default_value = "lex")]
    oracle: String,
    #[arg(long = "oracle-cost", default_value_t = 0)]
    oracle_cost: u64,
    #[arg(long = "c", default_value_t = 2.0)]
    sampling: f64,
    #[arg(long)]
    force: bool,
}

/// Parse and dispatch; returns the process exit code. All output goes to
/// the supplied writers so tests can drive the binary surface in-process.
pub fn run<I>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = String>,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            return if err.use_stderr() {
                let _ = write!(stderr, "{err}");
                let _ = writeln!(stderr, "WITNESS: {}", witness_json(&err.to_string()));
                2
            } else {
                // --help / --version
                let _ = write!(stdout, "{err}");
                0
            };
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(err) => {
            let _ = writeln!(stderr, "error: {err}");
            let _ = writeln!(stderr, "WITNESS: {}", witness_json(&err.to_string()));
            2
        }
    }
}

fn witness_json(message: &str) -> String {
    serde_json::json!({ "error": message }).to_string()
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Gen(a) => cmd_gen(a, out, err),
        Command::Classify(a) => cmd_classify(a, out),
        Command::VerifyRegular(a) => cmd_verify_regular(a, out),
        Command::Reduce(a) => cmd_reduce(a, out),
        Command::VerifyClaim(a) => cmd_verify_claim(a, out, err),
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Bench(a) => cmd_bench(a, out),
    }
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(text) => text
            .parse()
            .map_err(|_| Error::Malformed(format!("{SEED_ENV}={text} is not a u64"))),
        Err(_) => Ok(0),
    }
}

fn emit(text: &str, path: Option<&PathBuf>, stdout: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, format!("{text}\n"))?,
        None => writeln!(stdout, "{text}")?,
    }
    Ok(())
}

fn read_instance(path: &PathBuf) -> Result<Instance> {
    Instance::from_json(&fs::read_to_string(path)?)
}

fn load_gadget(name: &str) -> Result<Gadget> {
    match name {
        "ver" => Ok(ver_gadget()),
        "xor" => Ok(xor_gadget()),
        path => Gadget::from_json(&fs::read_to_string(path)?),
    }
}

fn load_group(name: &str) -> Result<SymmetryGroup> {
    match name {
        "ver" => Ok(ver_group()),
        "xor" => Ok(xor_group()),
        path => SymmetryGroup::from_json(&fs::read_to_string(path)?),
    }
}

fn load_regular(gadget_name: &str, group_name: Option<&str>) -> Result<RegularGadget> {
    let gadget = load_gadget(gadget_name)?;
    let group = match (group_name, gadget_name) {
        (Some(g), _) => load_group(g)?,
        (None, "ver") => ver_group(),
        (None, "xor") => xor_group(),
        (None, _) => {
            return Err(Error::Malformed("--group is required for file gadgets".into()))
        }
    };
    RegularGadget::new(gadget, group)
}

fn parse_class(token: &str) -> Result<PromiseClass> {
    let class = PromiseClass::from_str(token)?;
    if class == PromiseClass::Neither {
        return Err(Error::UngenerableClass { class: "neither" });
    }
    Ok(class)
}

fn cmd_gen(a: GenArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    if a.len > GEN_CAP && !a.force {
        return Err(Error::Malformed(format!(
            "N={} exceeds the cap {GEN_CAP}; pass --force to override",
            a.len
        )));
    }
    let class = parse_class(&a.class)?;
    let seed = resolve_seed(a.seed)?;
    writeln!(err, "seed={seed}")?;
    let z = gen_promise(a.len, class, seed)?;
    let instance = match a.kind.as_str() {
        "col" => Instance::Full(z),
        "bicol" => Instance::Bipartite(split(&z)?),
        other => return Err(Error::Malformed(format!("unknown kind `{other}`"))),
    };
    emit(&instance.to_json(), a.out.as_ref(), out)?;
    Ok(0)
}

fn cmd_classify(a: ClassifyArgs, out: &mut dyn Write) -> Result<i32> {
    let instance = read_instance(&a.input)?;
    writeln!(out, "{}", classify(&instance.number_list()))?;
    Ok(0)
}

fn cmd_verify_regular(a: VerifyRegularArgs, out: &mut dyn Write) -> Result<i32> {
    let gadget = load_gadget(&a.gadget)?;
    let group = load_group(&a.group)?;
    match check_regular(&gadget, &group)? {
        Regularity::Pass(cert) => {
            writeln!(out, "PASS, |S|={}", cert.group_order)?;
            Ok(0)
        }
        Regularity::Fail(violation) => {
            writeln!(out, "FAIL: {violation}")?;
            writeln!(out, "WITNESS: {}", serde_json::to_string(&violation)?)?;
            Ok(1)
        }
    }
}

fn cmd_reduce(a: ReduceArgs, out: &mut dyn Write) -> Result<i32> {
    let rg = load_regular(&a.gadget, a.group.as_deref())?;
    let composed = ComposedInput::from_json(&fs::read_to_string(&a.input)?)?;
    if let Some(n) = a.n {
        if n != composed.block_len() {
            return Err(Error::Malformed(format!(
                "--n {} disagrees with the input's block length {}",
                n,
                composed.block_len()
            )));
        }
    }
    if composed.block_count() > REDUCE_CAP && !a.force {
        return Err(Error::Malformed(format!(
            "N={} exceeds the reduce cap {REDUCE_CAP}; pass --force to override",
            composed.block_count()
        )));
    }
    let reduced = reduce_to_bicol(&rg, &composed)?;
    emit(&Instance::Bipartite(reduced).to_json(), a.out.as_ref(), out)?;
    Ok(0)
}

fn cmd_verify_claim(a: VerifyClaimArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let rg = load_regular(&a.gadget, a.group.as_deref())?;
    let seed = resolve_seed(a.seed)?;
    let mode = match a.mode.as_str() {
        "exhaustive" => ClaimMode::Exhaustive,
        "sampled" => {
            writeln!(err, "seed={seed}")?;
            ClaimMode::Sampled { trials: a.trials }
        }
        other => return Err(Error::Malformed(format!("unknown mode `{other}`"))),
    };
    let report = verify_claim(&rg, a.n, mode, seed, a.cap.unwrap_or(DEFAULT_EXHAUSTIVE_CAP))?;
    if report.passed() {
        writeln!(out, "PASS, checked {} input pairs", report.pairs_checked)?;
        Ok(0)
    } else {
        writeln!(out, "FAIL, {} violations", report.violations.len())?;
        for violation in &report.violations {
            writeln!(out, "WITNESS: {}", serde_json::to_string(violation)?)?;
        }
        Ok(1)
    }
}

#[derive(Clone, Copy)]
enum Protocol {
    Deterministic,
    Randomized,
    DecisionFromSearch,
}

impl Protocol {
    fn parse(token: &str) -> Result<Self> {
        match token {
            "det" => Ok(Protocol::Deterministic),
            "rand" => Ok(Protocol::Randomized),
            "dec2search" => Ok(Protocol::DecisionFromSearch),
            other => Err(Error::Malformed(format!("unknown protocol `{other}`"))),
        }
    }

    fn token(&self) -> &'static str {
        match self {
            Protocol::Deterministic => "det",
            Protocol::Randomized => "rand",
            Protocol::DecisionFromSearch => "dec2search",
        }
    }
}

struct RunConfig {
    protocol: Protocol,
    oracle: PhpOracle,
    rounds: usize,
    sampling: f64,
}

impl RunConfig {
    fn execute(&self, pair: &BipartitePair, seed: u64) -> Result<ProtocolOutcome> {
        match self.protocol {
            Protocol::Deterministic => run_deterministic_bicol(pair),
            Protocol::Randomized => run_randomized_bicol(pair, self.sampling, seed),
            Protocol::DecisionFromSearch => {
                decision_from_search(pair, &self.oracle, self.rounds, seed)
            }
        }
    }
}

const CSV_HEADER: &str = "protocol,N,trials,correct_rate,ci_low,ci_high,mean_cost";

fn write_csv_row(
    out: &mut dyn Write,
    protocol: &str,
    len: usize,
    stats: &SuccessStats,
) -> Result<()> {
    writeln!(
        out,
        "{protocol},{len},{trials},{rate:.6},{lo:.6},{hi:.6},{cost:.6}",
        trials = stats.trials,
        rate = stats.correct_rate,
        lo = stats.wilson_low,
        hi = stats.wilson_high,
        cost = stats.mean_cost,
    )?;
    Ok(())
}

fn cmd_simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<i32> {
    let config = RunConfig {
        protocol: Protocol::parse(&a.protocol)?,
        oracle: PhpOracle::new(OracleStrategy::from_str(&a.oracle)?, a.oracle_cost),
        rounds: a.rounds,
        sampling: a.sampling,
    };
    let pair = read_instance(&a.input)?.bipartite()?;
    if pair.len() > GEN_CAP && !a.force {
        return Err(Error::Malformed(format!(
            "N={} exceeds the cap {GEN_CAP}; pass --force to override",
            pair.len()
        )));
    }
    let expected = classify(&concat(&pair));
    if expected == PromiseClass::Neither {
        return Err(Error::Malformed("instance violates the promise".into()));
    }
    if a.trials == 0 {
        return Err(Error::ZeroTrials);
    }
    let seed = resolve_seed(a.seed)?;
    let mut correct = 0usize;
    let mut total_cost = 0u64;
    for trial in 0..a.trials as u64 {
        let outcome = config.execute(&pair, rng::derive(seed, trial))?;
        total_cost += outcome.transcript.cost();
        if outcome.decision() == Some(expected) {
            correct += 1;
        }
    }
    let stats = SuccessStats::from_counts(correct, a.trials, total_cost);
    writeln!(out, "# seed={seed}")?;
    writeln!(out, "{CSV_HEADER}")?;
    write_csv_row(out, config.protocol.token(), pair.len(), &stats)?;
    Ok(0)
}

fn cmd_bench(a: BenchArgs, out: &mut dyn Write) -> Result<i32> {
    if a.len > GEN_CAP && !a.force {
        return Err(Error::Malformed(format!(
            "N={} exceeds the cap {GEN_CAP}; pass --force to override",
            a.len
        )));
    }
    if !a.len.is_power_of_two() || a.len < 2 {
        return Err(Error::NotPowerOfTwo { len: a.len });
    }
    if a.trials == 0 {
        return Err(Error::ZeroTrials);
    }
    let protocol = Protocol::parse(&a.protocol)?;
    let strategies: Vec<OracleStrategy> = if a.oracle == "all" {
        if !matches!(protocol, Protocol::DecisionFromSearch) {
            return Err(Error::Malformed(
                "--oracle all only applies to --protocol dec2search".into(),
            ));
        }
        OracleStrategy::ALL.to_vec()
    } else {
        vec![OracleStrategy::from_str(&a.oracle)?]
    };
    let class = parse_class(&a.class)?;
    let recipe = InstanceRecipe::new(a.len.trailing_zeros(), class)?;
    let seed = resolve_seed(a.seed)?;
    writeln!(out, "# seed={seed}")?;
    writeln!(out, "{CSV_HEADER}")?;
    for strategy in strategies {
        let config = RunConfig {
            protocol,
            oracle: PhpOracle::new(strategy, a.oracle_cost),
            rounds: a.rounds,
            sampling: a.sampling,
        };
        let mut correct = 0usize;
        let mut total_cost = 0u64;
        for trial in 0..a.trials as u64 {
            let pair = recipe.generate(rng::derive(seed, 2 * trial))?;
            let outcome = config.execute(&pair, rng::derive(seed, 2 * trial + 1))?;
            total_cost += outcome.transcript.cost();
            if outcome.decision() == Some(class) {
                correct += 1;
            }
        }
        let stats = SuccessStats::from_counts(correct, a.trials, total_cost);
        if matches!(protocol, Protocol::DecisionFromSearch) {
            writeln!(out, "# oracle={}", config.oracle.strategy.token())?;
        }
        write_csv_row(out, config.protocol.token(), a.len, &stats)?;
    }
    Ok(0)
}
