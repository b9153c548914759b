use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use sst_core::bwt_builder::{build_bwt_naive, build_bwt_with_tau, invert_bwt, BwtResult};
use sst_core::inversions::{count_inversions_via_bwt, default_small_k, BwtBackend, Variant};
use sst_core::lce_index::{build_lce, default_tau};
use sst_core::reference_oracles::{naive_bwt, naive_inversions, naive_lce};
use sst_core::sync_set::{
    compute_q_and_b, construct_deterministic, construct_packed_fast, construct_randomized,
    validate_sync_set, SyncSet,
};
use sst_core::PackedText;

#[derive(Parser)]
#[command(
    name = "sst",
    version,
    about = "String synchronizing sets: BWT, LCE, inversions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Burrows-Wheeler transform of a byte file.
    Bwt(BwtArgs),
    /// Inverts a BWT file using its metadata sidecar.
    Unbwt(UnbwtArgs),
    /// Build, validate or summarize synchronizing sets.
    #[command(subcommand)]
    Sync(SyncCommand),
    /// Answers LCE queries, one "i j" pair (1-based) per line.
    Lce(LceArgs),
    /// Counts inversions of whitespace-separated integers.
    Inversions(InvArgs),
    /// Wall-clock timings on random binary texts.
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
struct TextArgs {
    #[arg(long)]
    input: PathBuf,
    /// Alphabet size; defaults to the largest byte plus one.
    #[arg(long)]
    sigma: Option<u32>,
}

#[derive(Args, Clone, Copy)]
#[group(multiple = false)]
struct TauArgs {
    #[arg(long)]
    tau: Option<usize>,
    /// Sets τ = max(1, ⌊ε·log₂ n / ⌈log₂ σ⌉⌋).
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Args)]
struct BwtArgs {
    #[command(flatten)]
    text: TextArgs,
    #[command(flatten)]
    tau: TauArgs,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    meta: PathBuf,
    /// Build from a suffix array instead of the synchronizing-set pipeline.
    #[arg(long)]
    naive: bool,
    /// Compare against the brute-force oracle; exit 1 on mismatch.
    #[arg(long)]
    verify: bool,
}

#[derive(Args)]
struct UnbwtArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    meta: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args, Clone, Copy)]
#[group(multiple = false)]
struct ModeArgs {
    /// Deterministic construction.
    #[arg(long)]
    det: bool,
    /// Packed construction (default).
    #[arg(long)]
    fast: bool,
    /// Randomized construction, seeded by --seed.
    #[arg(long)]
    random: bool,
}

#[derive(Subcommand)]
enum SyncCommand {
    Build {
        #[command(flatten)]
        text: TextArgs,
        #[command(flatten)]
        tau: TauArgs,
        #[command(flatten)]
        mode: ModeArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
    Validate {
        #[command(flatten)]
        text: TextArgs,
        /// Set file from `sync build`.
        #[arg(long)]
        set: PathBuf,
    },
    Stats {
        #[command(flatten)]
        text: TextArgs,
        #[command(flatten)]
        tau: TauArgs,
        #[command(flatten)]
        mode: ModeArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct LceArgs {
    #[command(flatten)]
    text: TextArgs,
    #[command(flatten)]
    tau: TauArgs,
    #[arg(long)]
    queries: PathBuf,
    /// Answer by direct comparison.
    #[arg(long)]
    naive: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Small,
    General,
    Naive,
}

#[derive(Args)]
struct InvArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "general")]
    variant: VariantArg,
    /// Value width for the small variant.
    #[arg(long)]
    k: Option<usize>,
    /// Use the suffix-array BWT inside the reduction.
    #[arg(long)]
    naive: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// log₂ of the text lengths.
    #[arg(long, value_delimiter = ',', default_values_t = [20u32, 22, 24])]
    sizes: Vec<u32>,
    #[arg(long, default_value_t = 1)]
    repeat: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

fn read_text(args: &TextArgs) -> Result<PackedText> {
    let bytes =
        fs::read(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let needed = bytes.iter().max().map_or(1, |&b| b as u32 + 1);
    let sigma = args.sigma.unwrap_or(needed.max(2));
    if sigma < needed {
        bail!("--sigma {sigma} is below the largest byte value plus one ({needed})");
    }
    Ok(PackedText::from_bytes(&bytes, sigma)?)
}

fn resolve_tau(args: TauArgs, pt: &PackedText) -> Option<usize> {
    match (args.tau, args.epsilon) {
        (Some(t), _) => Some(t),
        (None, Some(eps)) => {
            let lg_sigma = (pt.sigma().max(2) as f64).log2().ceil();
            let lg_n = (pt.len().max(1) as f64).log2();
            Some(((eps * lg_n / lg_sigma).floor() as usize).max(1))
        }
        (None, None) => None,
    }
}

fn construct(pt: &PackedText, tau: usize, mode: ModeArgs, seed: u64) -> Result<SyncSet> {
    Ok(if mode.det {
        construct_deterministic(pt, tau)?
    } else if mode.random {
        construct_randomized(pt, tau, seed)?
    } else {
        construct_packed_fast(pt, tau)?
    })
}

fn cmd_bwt(a: BwtArgs) -> Result<bool> {
    let pt = read_text(&a.text)?;
    let tau = resolve_tau(a.tau, &pt);
    let res = if a.naive {
        build_bwt_naive(
            &pt,
            tau.unwrap_or_else(|| default_tau(pt.len(), pt.sigma())),
        )
    } else {
        build_bwt_with_tau(&pt, tau)?
    };
    let bytes: Vec<u8> = res.bwt.iter().map(|&c| c as u8).collect();
    fs::write(&a.output, bytes).with_context(|| format!("writing {}", a.output.display()))?;
    fs::write(&a.meta, res.sidecar_string())
        .with_context(|| format!("writing {}", a.meta.display()))?;
    if a.verify && !pt.is_empty() {
        let (want, primary) = naive_bwt(&pt.to_vec());
        if want != res.bwt || primary != res.primary_index {
            eprintln!("verify: BWT differs from the oracle");
            return Ok(false);
        }
        eprintln!("verify: ok");
    }
    Ok(true)
}

fn cmd_unbwt(a: UnbwtArgs) -> Result<bool> {
    let bytes = fs::read(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let meta =
        fs::read_to_string(&a.meta).with_context(|| format!("reading {}", a.meta.display()))?;
    let res = BwtResult::from_sidecar(bytes.iter().map(|&b| b as u32).collect(), &meta)?;
    let text = invert_bwt(&res)?;
    let out: Vec<u8> = text.iter().map(|&c| c as u8).collect();
    fs::write(&a.output, out).with_context(|| format!("writing {}", a.output.display()))?;
    Ok(true)
}

fn pick_tau(args: TauArgs, pt: &PackedText) -> usize {
    resolve_tau(args, pt).unwrap_or_else(|| default_tau(pt.len(), pt.sigma()))
}

fn cmd_sync(c: SyncCommand) -> Result<bool> {
    match c {
        SyncCommand::Build {
            text,
            tau,
            mode,
            seed,
            output,
        } => {
            let pt = read_text(&text)?;
            let s = construct(&pt, pick_tau(tau, &pt), mode, seed)?;
            fs::write(&output, s.to_file_string())
                .with_context(|| format!("writing {}", output.display()))?;
            Ok(true)
        }
        SyncCommand::Validate { text, set } => {
            let pt = read_text(&text)?;
            let raw =
                fs::read_to_string(&set).with_context(|| format!("reading {}", set.display()))?;
            let s = SyncSet::parse_file(&raw)?;
            if s.text_len() != pt.len() {
                bail!(
                    "set file is for n={}, text has n={}",
                    s.text_len(),
                    pt.len()
                );
            }
            let report = validate_sync_set(&pt, s.tau(), &s);
            println!("{report}");
            Ok(report.is_valid())
        }
        SyncCommand::Stats {
            text,
            tau,
            mode,
            seed,
        } => {
            let pt = read_text(&text)?;
            let tau = pick_tau(tau, &pt);
            let s = construct(&pt, tau, mode, seed)?;
            let ps = compute_q_and_b(&pt, tau)?;
            println!("n={}", pt.len());
            println!("tau={tau}");
            println!("size={}", s.len());
            println!("bound_30n_over_tau={}", 30 * pt.len() / tau);
            println!("q_size={}", ps.q_count());
            println!("b_size={}", ps.b_count());
            Ok(true)
        }
    }
}

fn parse_pair(line: &str, no: usize) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace().map(|t| t.parse::<usize>());
    match (it.next(), it.next(), it.next()) {
        (Some(Ok(i)), Some(Ok(j)), None) if i >= 1 && j >= 1 => Ok((i - 1, j - 1)),
        _ => bail!("line {no}: expected two positive integers \"i j\""),
    }
}

fn cmd_lce(a: LceArgs) -> Result<bool> {
    let pt = read_text(&a.text)?;
    let raw = fs::read_to_string(&a.queries)
        .with_context(|| format!("reading {}", a.queries.display()))?;
    let t = pt.to_vec();
    let idx = if a.naive {
        None
    } else {
        Some(build_lce(&pt, resolve_tau(a.tau, &pt))?)
    };
    let mut out = String::new();
    for (no, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (i, j) = parse_pair(line, no + 1)?;
        let v = match &idx {
            Some(idx) => idx.query(i, j),
            None => naive_lce(&t, i, j),
        }
        .map_err(|e| anyhow!("line {}: {e}", no + 1))?;
        out.push_str(&format!("{v}\n"));
    }
    print!("{out}");
    Ok(true)
}

fn cmd_inversions(a: InvArgs) -> Result<bool> {
    let raw =
        fs::read_to_string(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let values = raw
        .split_whitespace()
        .map(|t| {
            t.parse::<u64>()
                .map_err(|_| anyhow!("not a non-negative integer: {t:?}"))
        })
        .collect::<Result<Vec<u64>>>()?;
    let backend = if a.naive {
        BwtBackend::Naive
    } else {
        BwtBackend::Sync
    };
    let count = match a.variant {
        VariantArg::Naive => naive_inversions(&values),
        VariantArg::General => count_inversions_via_bwt(&values, Variant::General, backend)?,
        VariantArg::Small => {
            let k = a.k.unwrap_or_else(|| default_small_k(values.len()));
            count_inversions_via_bwt(&values, Variant::Small { k }, backend)?
        }
    };
    println!("{count}");
    Ok(true)
}

fn time<T>(repeat: usize, mut f: impl FnMut() -> T) -> f64 {
    let mut best = f64::INFINITY;
    for _ in 0..repeat.max(1) {
        let start = Instant::now();
        std::hint::black_box(f());
        best = best.min(start.elapsed().as_secs_f64());
    }
    best
}

fn cmd_bench(a: BenchArgs) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut rows = Vec::new();
    for &lg in &a.sizes {
        let n = 1usize << lg;
        let t: Vec<u32> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        let pt = PackedText::pack(&t, 2)?;
        let tau = default_tau(n, 2);
        let mut row = |name: &str, secs: f64| {
            rows.push(json!({ "n": n, "tau": tau, "op": name, "seconds": secs }));
            if !a.json {
                println!("{:>10} {:>3} {:<22} {:>10.3}s", n, tau, name, secs);
            }
        };
        let sync = time(a.repeat, || build_bwt_with_tau(&pt, Some(tau)));
        row("bwt_sync", sync);
        let naive = time(a.repeat, || build_bwt_naive(&pt, tau));
        row("bwt_naive", naive);
        row("lce_build", time(a.repeat, || build_lce(&pt, Some(tau))));
        row(
            "sync_fast",
            time(a.repeat, || construct_packed_fast(&pt, tau)),
        );
        row(
            "sync_random",
            time(a.repeat, || construct_randomized(&pt, tau, a.seed)),
        );
        row(
            "sync_det",
            time(a.repeat, || construct_deterministic(&pt, tau)),
        );
        let speedup = naive / sync;
        if a.json {
            rows.push(json!({ "n": n, "op": "bwt_speedup", "ratio": speedup, "meets_1_5x": speedup >= 1.5 }));
        } else {
            let flag = if speedup >= 1.5 { "" } else { "  [below 1.5x]" };
            println!(
                "{:>10} {:>3} {:<22} {:>10.2}x{flag}",
                n, tau, "bwt_speedup", speedup
            );
        }
    }
    if a.json {
        println!("{}", serde_json::to_string_pretty(&rows)?);
    }
    Ok(true)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Bwt(a) => cmd_bwt(a),
        Command::Unbwt(a) => cmd_unbwt(a),
        Command::Sync(c) => cmd_sync(c),
        Command::Lce(a) => cmd_lce(a),
        Command::Inversions(a) => cmd_inversions(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
