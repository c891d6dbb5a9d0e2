mod ndj;

use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use naxbench::metrics::hypervolume;
use naxbench::moea::{nsga2_run, population_size, random_search_run, Nsga2Config, RunResult};
use naxbench::rpc::{Server, DEFAULT_PORT};
use naxbench::store::{write_synthetic, SyntheticProfile};
use naxbench::suite::{self, true_pareto_front, Suite, DATA_ENV};
use naxbench::{evaluate_batch, instantiate, spaces, BenchmarkInstance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Parser)]
#[command(
    name = "naxbench",
    version,
    about = "Multi-objective NAS benchmark suites"
)]
struct Cli {
    /// Data root holding one directory per search space.
    #[arg(long, global = true, env = DATA_ENV)]
    data: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve instances over newline-delimited JSON on TCP.
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = DEFAULT_PORT)]
        port: u16,
    },
    /// Inspect the suites.
    Suite {
        #[command(subcommand)]
        command: SuiteCommand,
    },
    /// Evaluate the genotypes of a file, one objective row per input row.
    Eval {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate synthetic data for a space (or `all`).
    Synth {
        #[arg(long)]
        space: String,
        /// JSON object overriding fields of the default profile.
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a baseline optimizer once per seed.
    Run {
        #[arg(long, value_enum)]
        algo: Algo,
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 10_000)]
        evals: usize,
        /// `A..B` (inclusive), a single seed, or a comma list.
        #[arg(long, default_value = "1..31", value_parser = parse_seeds)]
        seeds: Seeds,
        /// NSGA-II population size; defaults to the size for the instance's objective count.
        #[arg(long)]
        pop_size: Option<usize>,
        /// Record only the final hypervolume.
        #[arg(long)]
        no_trace: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Hypervolume of a front file.
    Hv {
        #[arg(long)]
        front: PathBuf,
        #[command(flatten)]
        reference: RefArgs,
    },
    /// Write the true Pareto front of an instance.
    Pf {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Flatten run results into a CSV for scatter and parallel-coordinate plots.
    Plotdata {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Min-max scale every objective to [0, 1] across all rows.
        #[arg(long)]
        normalize: bool,
    },
}

#[derive(Subcommand)]
enum SuiteCommand {
    List,
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long)]
    suite: Suite,
    #[arg(long)]
    index: usize,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct RefArgs {
    /// Use the reference point of a suite instance, given as `SUITE:INDEX`.
    #[arg(long, value_parser = parse_instance)]
    ref_from_suite: Option<(Suite, usize)>,
    /// Comma-separated reference point.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    r#ref: Option<Vec<f64>>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Nsga2,
    Random,
}

#[derive(Clone, Debug)]
struct Seeds(Vec<u64>);

fn parse_seeds(s: &str) -> Result<Seeds, String> {
    let range = |a: &str, b: &str| -> Result<RangeInclusive<u64>, String> {
        let lo = a.trim().parse::<u64>().map_err(|e| e.to_string())?;
        let hi = b
            .trim()
            .trim_start_matches('=')
            .parse::<u64>()
            .map_err(|e| e.to_string())?;
        if lo > hi {
            return Err(format!("empty seed range {s}"));
        }
        Ok(lo..=hi)
    };
    let seeds: Vec<u64> = match s.split_once("..") {
        Some((a, b)) => range(a, b)?.collect(),
        None => s
            .split(',')
            .map(|t| t.trim().parse::<u64>().map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?,
    };
    Ok(Seeds(seeds))
}

fn parse_instance(s: &str) -> Result<(Suite, usize), String> {
    let (suite, index) = s
        .rsplit_once([':', '/'])
        .ok_or_else(|| format!("expected SUITE:INDEX, got `{s}`"))?;
    let suite: Suite = suite.parse().map_err(|e: naxbench::Error| e.to_string())?;
    let index = index
        .parse()
        .map_err(|e: std::num::ParseIntError| e.to_string())?;
    Ok((suite, index))
}

fn load(data: &Path, args: &InstanceArgs) -> Result<BenchmarkInstance> {
    instantiate(args.suite, args.index, data)
        .with_context(|| format!("cannot load {}{}", args.suite.title(), args.index))
}

fn suite_list() -> String {
    let mut out = String::new();
    for e in suite::all_entries() {
        let reference: Vec<String> = e.reference_point.iter().map(|v| v.to_string()).collect();
        writeln!(
            out,
            "{:<12} {:<12} D={:<3} M={} [{}] ref=[{}]",
            e.label(),
            e.space,
            e.dim,
            e.n_obj(),
            e.objectives.join(", "),
            reference.join(", ")
        )
        .unwrap();
    }
    out
}

fn synth(space: &str, profile: Option<&Path>, seed: u64, out: &Path) -> Result<()> {
    let overrides = match profile {
        Some(p) => ndj::read_json(p)?,
        None => serde_json::json!({}),
    };
    let names: Vec<&str> = if space == "all" {
        spaces::SPACE_NAMES.to_vec()
    } else {
        vec![space]
    };
    for name in names {
        let profile = SyntheticProfile::for_space_with(name, overrides.clone())?;
        for path in write_synthetic(out, name, &profile, seed)? {
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn result_name(algo: &str, instance: &InstanceArgs, seed: u64) -> String {
    format!(
        "{algo}-{}{}-seed{seed:03}.json",
        instance.suite.key(),
        instance.index
    )
}

#[allow(clippy::too_many_arguments)]
fn run(
    data: &Path,
    algo: Algo,
    args: &InstanceArgs,
    evals: usize,
    seeds: &Seeds,
    pop_size: Option<usize>,
    trace: bool,
    out: &Path,
) -> Result<()> {
    let instance = load(data, args)?;
    std::fs::create_dir_all(out)?;
    let pop_size = match pop_size {
        Some(n) => n,
        None => population_size(instance.objectives().len())?.2,
    };
    let config = Nsga2Config {
        trace,
        ..Nsga2Config::new(pop_size, evals)
    };
    let results: Vec<(u64, RunResult)> = seeds
        .0
        .par_iter()
        .map(|&seed| {
            let result = match algo {
                Algo::Nsga2 => nsga2_run(&instance, &config, seed)?,
                Algo::Random => random_search_run(&instance, evals, seed)?,
            };
            Ok((seed, result))
        })
        .collect::<Result<_>>()?;
    for (seed, result) in results {
        let path = out.join(result_name(&result.config.algo, args, seed));
        std::fs::write(&path, serde_json::to_string(&result)? + "\n")?;
        println!("{seed}\t{}\t{}", result.final_hv(), path.display());
    }
    Ok(())
}

fn hv(data: &Path, front: &Path, reference: &RefArgs) -> Result<f64> {
    let rows: Vec<Vec<f64>> = ndj::read_rows(front)?;
    let r = match (&reference.ref_from_suite, &reference.r#ref) {
        (Some((suite, index)), _) => instantiate(*suite, *index, data)?
            .reference_point()
            .to_vec(),
        (None, Some(r)) => r.clone(),
        (None, None) => unreachable!("clap requires one reference"),
    };
    Ok(hypervolume(&rows, &r)?)
}

fn objective_names(instance_label: &str, m: usize) -> Vec<String> {
    suite::all_entries()
        .find(|e| e.label() == instance_label && e.n_obj() == m)
        .map(|e| e.objectives.iter().map(|s| s.to_string()).collect())
        .unwrap_or_else(|| (1..=m).map(|k| format!("f{k}")).collect())
}

fn plotdata(dir: &Path, out: &Path, normalize: bool) -> Result<()> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("cannot read {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    files.retain(|p| p.extension().is_some_and(|e| e == "json"));
    files.sort();
    if files.is_empty() {
        bail!("no run results in {}", dir.display());
    }
    let mut runs = Vec::new();
    for path in &files {
        let result: RunResult = serde_json::from_value(ndj::read_json(path)?)
            .with_context(|| format!("{} is not a run result", path.display()))?;
        runs.push(result);
    }
    let m = runs[0].f.first().map_or(0, Vec::len);
    if runs
        .iter()
        .any(|r| r.config.instance != runs[0].config.instance)
    {
        bail!("run results belong to different instances");
    }
    let mut lo = vec![f64::INFINITY; m];
    let mut hi = vec![f64::NEG_INFINITY; m];
    for f in runs.iter().flat_map(|r| &r.f) {
        for k in 0..m {
            lo[k] = lo[k].min(f[k]);
            hi[k] = hi[k].max(f[k]);
        }
    }
    let mut csv = String::from("algo,seed,point,");
    csv += &objective_names(&runs[0].config.instance, m).join(",");
    csv.push('\n');
    for r in &runs {
        for (i, f) in r.f.iter().enumerate() {
            write!(csv, "{},{},{}", r.config.algo, r.seed, i).unwrap();
            for k in 0..m {
                let v = if normalize && hi[k] > lo[k] {
                    (f[k] - lo[k]) / (hi[k] - lo[k])
                } else {
                    f[k]
                };
                write!(csv, ",{v}").unwrap();
            }
            csv.push('\n');
        }
    }
    std::fs::write(out, csv).with_context(|| format!("cannot write {}", out.display()))?;
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    let data = suite::data_root(cli.data.as_deref());
    match cli.command {
        Command::Serve { host, port } => {
            let server = Server::bind((host.as_str(), port), &data)?;
            eprintln!("serving {} on {}", data.display(), server.local_addr()?);
            server.run()?;
        }
        Command::Suite {
            command: SuiteCommand::List,
        } => print!("{}", suite_list()),
        Command::Eval {
            instance,
            input,
            out,
            seed,
        } => {
            let instance = load(&data, &instance)?;
            let xs: Vec<Vec<u32>> = ndj::read_rows(&input)?;
            let fs = evaluate_batch(&instance, &xs, &mut ChaCha8Rng::seed_from_u64(seed))?;
            ndj::write_rows(&out, &fs)?;
        }
        Command::Synth {
            space,
            profile,
            seed,
            out,
        } => synth(&space, profile.as_deref(), seed, &out)?,
        Command::Run {
            algo,
            instance,
            evals,
            seeds,
            pop_size,
            no_trace,
            out,
        } => run(
            &data, algo, &instance, evals, &seeds, pop_size, !no_trace, &out,
        )?,
        Command::Hv { front, reference } => println!("{}", hv(&data, &front, &reference)?),
        Command::Pf { instance, out } => {
            let instance = load(&data, &instance)?;
            ndj::write_rows(&out, &true_pareto_front(&instance)?)?;
        }
        Command::Plotdata {
            run,
            out,
            normalize,
        } => plotdata(&run, &out, normalize)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
