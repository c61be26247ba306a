use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hiddensum::attack::{
    mount_attack, verify_global_deduction, AttackReport, OracleInterface, Variant,
};
use hiddensum::classify::{classify_all, ClassTable};
use hiddensum::enumerate::{enumerate_all_iter, CountRecord, DEFAULT_CAP};
use hiddensum::tbcipher::{calibrate_encoding, is_affine_wrt, toy_hidden_sum, ToyCipherSpec};
use hiddensum::{EmbeddedHiddenSum, StandardHiddenSum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod expectations;
mod verify;

use expectations::Expectations;

#[derive(Parser)]
#[command(
    name = "hiddensum",
    version,
    about = "Hidden sums on F2^N: enumeration, classification, attack demo"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count or list the hidden sums with a given dim U.
    Enumerate(EnumerateArgs),
    /// Split the hidden sums of dimension N into conjugacy classes.
    Classify(ClassifyArgs),
    /// Break the toy cipher through its hidden sum.
    AttackDemo(AttackArgs),
    /// Run a property suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long = "N")]
    dim: usize,
    /// Dimension of U; every admissible value when omitted.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, conflicts_with = "emit")]
    count_only: bool,
    /// Stream every group as a TOML document.
    #[arg(long)]
    emit: bool,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: u64,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long = "N")]
    dim: usize,
    #[arg(long)]
    allow_slow: bool,
    /// Directory for `classes_N{N}.csv` and its TOML sidecar.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Cpa,
    CpaCca,
}

#[derive(Clone, Copy, ValueEnum)]
enum WrongSum {
    Trivial,
}

#[derive(Args)]
struct AttackArgs {
    /// Cipher spec file; the built-in toy cipher when omitted.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Key as hex, or `random`.
    #[arg(long, default_value = "random")]
    key: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "cpa")]
    variant: VariantArg,
    /// Attack with the wrong operation instead.
    #[arg(long, value_enum)]
    wrong_sum: Option<WrongSum>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Rings,
    Counts,
    Dim7,
    Appendix,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    suite: Suite,
    #[arg(long = "N")]
    dim: Option<usize>,
}

type CmdResult = Result<bool, Box<dyn std::error::Error>>;

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Enumerate(args) => cmd_enumerate(args),
        Command::Classify(args) => cmd_classify(args),
        Command::AttackDemo(args) => cmd_attack(args),
        Command::Verify(args) => verify::run(args.suite, args.dim),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(feature = "parallel")]
fn init_threads() {
    if let Some(n) = std::env::var("HIDDENSUM_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

#[cfg(not(feature = "parallel"))]
fn init_threads() {}

fn cmd_enumerate(args: EnumerateArgs) -> CmdResult {
    let ds: Vec<usize> = match args.d {
        Some(d) => vec![d],
        None => (1..=args.dim.saturating_sub(2)).collect(),
    };
    for d in ds {
        let record = CountRecord::compute(args.dim, d)?;
        if !args.emit {
            println!("{record}");
            continue;
        }
        let total = u64::try_from(&record.total).unwrap_or(u64::MAX);
        if total > args.cap {
            return Err(format!(
                "N={} d={d}: {total} groups exceed the cap of {}",
                args.dim, args.cap
            )
            .into());
        }
        let mut out = BufWriter::new(io::stdout().lock());
        for (i, group) in enumerate_all_iter(args.dim, d)?.enumerate() {
            let written = writeln!(out, "# N={} d={d} group {i}\n{}", args.dim, group.to_toml());
            if let Err(e) = written {
                return if e.kind() == io::ErrorKind::BrokenPipe {
                    Ok(true)
                } else {
                    Err(e.into())
                };
            }
        }
        match out.flush() {
            Err(e) if e.kind() != io::ErrorKind::BrokenPipe => return Err(e.into()),
            _ => {}
        }
    }
    Ok(true)
}

fn cmd_classify(args: ClassifyArgs) -> CmdResult {
    let table = classify_all(args.dim, args.allow_slow)?;
    for (i, c) in table.classes.iter().enumerate() {
        println!("N={} class={i} size={} dim_u={}", args.dim, c.size, c.dim_u);
    }
    println!(
        "N={} classes={} total={}",
        args.dim,
        table.classes.len(),
        table.total()
    );
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
        table.export(dir, &format!("classes_N{}", args.dim))?;
    }
    let expectations = Expectations::embedded()?;
    Ok(match expectations.check_classes(args.dim, &table) {
        Ok(()) => true,
        Err(msg) => {
            eprintln!("disagreement with reference table: {msg}");
            false
        }
    })
}

fn parse_key(text: &str, seed: u64, dim: usize) -> Result<u64, String> {
    let key = if text == "random" {
        ChaCha8Rng::seed_from_u64(seed).random::<u64>()
    } else {
        u64::from_str_radix(text.trim_start_matches("0x"), 16)
            .map_err(|e| format!("bad key {text:?}: {e}"))?
    };
    let mask = hiddensum::gf2::mask(dim);
    if text != "random" && key & !mask != 0 {
        return Err(format!("key {text} does not fit in {dim} bits"));
    }
    Ok(key & mask)
}

fn cmd_attack(args: AttackArgs) -> CmdResult {
    let spec = match &args.spec {
        Some(path) => ToyCipherSpec::from_toml(&fs::read_to_string(path)?)?,
        None => ToyCipherSpec::default(),
    };
    let encoding = calibrate_encoding()?;
    let sum = match args.wrong_sum {
        None => {
            let sum = toy_hidden_sum();
            if is_affine_wrt(&spec.gamma_lambda_table()?, &sum).is_none() {
                return Err(hiddensum::tbcipher::CipherError::NoEncodingVerifies.into());
            }
            sum
        }
        Some(WrongSum::Trivial) => EmbeddedHiddenSum::standard(StandardHiddenSum::translations(6)),
    };
    let cipher = spec.build()?;
    let key = parse_key(&args.key, args.seed, cipher.dim())?;
    let variant = match args.variant {
        VariantArg::Cpa => Variant::Cpa,
        VariantArg::CpaCca => Variant::CpaCca,
    };

    let mut oracle = OracleInterface::new(cipher.dim(), |x| cipher.encrypt_bits(key, x))
        .with_decrypt(|y| cipher.decrypt_bits(key, y));
    let r = mount_attack(&mut oracle, &sum, variant)?;
    let v = verify_global_deduction(&mut oracle, &r);

    let expectations = Expectations::embedded()?;
    let (enc_budget, dec_budget) = match variant {
        Variant::Cpa => (expectations.attack.toy_queries_cpa, 0),
        Variant::CpaCca => (
            expectations.attack.toy_queries_cpa_cca,
            expectations.attack.toy_queries_cpa_cca,
        ),
    };
    println!("encoding = {:?}", encoding.0);
    println!("key = \"{key:02x}\"");
    print!("{}", AttackReport::new(&r, &v).to_toml());
    let within_budget = r.enc_queries <= enc_budget && r.dec_queries <= dec_budget;
    if !within_budget {
        eprintln!(
            "query budget exceeded: enc {} dec {} (budget {enc_budget}/{dec_budget})",
            r.enc_queries, r.dec_queries
        );
    }
    if v.mismatches > 0 {
        eprintln!(
            "{} of {} predictions disagree with the cipher",
            v.mismatches, v.points
        );
    }
    Ok(within_budget && v.mismatches == 0)
}

pub(crate) fn report(ok: bool, name: &str, detail: impl std::fmt::Display) -> bool {
    println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

pub(crate) fn table_sizes(table: &ClassTable) -> Vec<(usize, u64)> {
    table.classes.iter().map(|c| (c.dim_u, c.size)).collect()
}
