//! `snnd`: train, export, run, verify, stress and benchmark TTFS deployment
//! artifacts.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use snnd_core::accel::{pack_events, run_accelerator, AccelConfig, CycleMode};
use snnd_core::artifact::{digest_hex, read_artifact, write_artifact, DeploymentArtifact};
use snnd_core::harness::{
    self, load_mnist_idx, Dataset, EvalConfig, RobustnessReport, Tensor, TrainConfig, DEFAULT_DROP_RATIOS,
};
use snnd_core::model::{build_sequential, encode_ttfs, EncoderConfig, LayerSpec, NeuronConfig};
use snnd_core::reference::{run_dense_baseline, run_ttfs_reference, DenseMode};
use snnd_core::Error;

const EXIT_RUNTIME: u8 = 1;
const EXIT_MISMATCH: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "snnd", version, about = "Single-artifact TTFS deployment toolkit")]
struct Cli {
    /// Seed for every random choice (training, spike drop).
    #[arg(long, global = true, default_value_t = harness::DEFAULT_SEED)]
    seed: u64,
    /// Worker threads; 0 uses every available core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct DataArgs {
    /// IDX image file (e.g. t10k-images-idx3-ubyte).
    #[arg(long)]
    images: PathBuf,
    /// IDX label file matching --images.
    #[arg(long)]
    labels: PathBuf,
    /// Use only the first N images.
    #[arg(long)]
    limit: Option<usize>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Backend {
    Reference,
    Accel,
    DenseFp32,
    DenseInt8,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum CycleArg {
    Deployed,
    Measured,
}

impl From<CycleArg> for CycleMode {
    fn from(c: CycleArg) -> Self {
        match c {
            CycleArg::Deployed => CycleMode::Deployed,
            CycleArg::Measured => CycleMode::Measured,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a linear TTFS classifier and write WTS1 weight and threshold files.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 6)]
        epochs: usize,
        #[arg(long, default_value_t = 150)]
        out_dim: usize,
        #[arg(long, default_value_t = 10)]
        classes: usize,
    },
    /// Quantize WTS1 weights and thresholds into a .snna artifact.
    Export {
        /// out_dim x in_dim weight tensor.
        #[arg(long)]
        weights: PathBuf,
        /// out_dim x 1 threshold tensor.
        #[arg(long)]
        thresholds: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        classes: u32,
        #[arg(long, default_value_t = 64)]
        time_window: u32,
        #[arg(long, default_value_t = 1)]
        leak_num: u32,
        #[arg(long, default_value_t = 1)]
        leak_den: u32,
    },
    /// Classify a dataset with one backend and write per-image predictions.
    Run {
        #[arg(long)]
        artifact: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_enum, default_value_t = Backend::Accel)]
        backend: Backend,
        /// CSV of index,label,no_spike.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare accelerator and reference predictions image by image.
    Verify {
        #[arg(long)]
        artifact: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        /// Repeat the accelerator pass and count image-run mismatches.
        #[arg(long, default_value_t = 1)]
        runs: usize,
    },
    /// Accuracy under seeded spike drop.
    Robustness {
        #[arg(long)]
        artifact: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_DROP_RATIOS.to_vec())]
        ratios: Vec<f64>,
        /// Sweeps with seeds seed, seed+1, ...; the report holds the per-ratio median.
        #[arg(long, default_value_t = 1)]
        repeats: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-platform accuracy, latency, throughput and energy report.
    Bench {
        #[arg(long)]
        artifact: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_enum, default_value_t = CycleArg::Deployed)]
        cycle_mode: CycleArg,
        #[arg(long)]
        out: PathBuf,
        /// Also write the host wall-clock phase breakdown here.
        #[arg(long)]
        profile_out: Option<PathBuf>,
    },
}

fn require_file(p: &Path) -> anyhow::Result<()> {
    if !p.is_file() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("{} does not exist", p.display()),
        ))
        .into());
    }
    Ok(())
}

fn load_data(d: &DataArgs) -> anyhow::Result<Dataset> {
    require_file(&d.images)?;
    require_file(&d.labels)?;
    let ds = load_mnist_idx(&d.images, &d.labels)?;
    Ok(match d.limit {
        Some(n) => ds.head(n),
        None => ds,
    })
}

fn load_artifact(p: &Path) -> anyhow::Result<DeploymentArtifact> {
    require_file(p)?;
    Ok(read_artifact(std::io::BufReader::new(File::open(p)?))?)
}

fn create(p: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?))
}

fn eval_config(cli: &Cli, mode: CycleMode) -> EvalConfig {
    EvalConfig { jobs: cli.jobs, accel: AccelConfig::with_mode(mode), seed: cli.seed }
}

fn execute(cli: &Cli) -> anyhow::Result<u8> {
    match &cli.command {
        Command::Train { data, out_dir, epochs, out_dim, classes } => {
            let ds = load_data(data)?;
            let cfg = TrainConfig { epochs: *epochs, out_dim: *out_dim, num_classes: *classes, seed: cli.seed, ..Default::default() };
            let net = harness::train_linear_ttfs::<f32>(&ds, &cfg)?;
            fs::create_dir_all(out_dir)?;
            let lin = net.linear();
            Tensor::new(lin.out_dim, lin.in_dim, lin.weights.clone())?.save(out_dir.join("weights.wts"))?;
            let th = &net.neuron_config.thresholds;
            Tensor::new(th.len(), 1, th.clone())?.save(out_dir.join("thresholds.wts"))?;
            println!("trained {}x{} on {} images -> {}", lin.out_dim, lin.in_dim, ds.len(), out_dir.display());
        }
        Command::Export { weights, thresholds, out, classes, time_window, leak_num, leak_den } => {
            require_file(weights)?;
            require_file(thresholds)?;
            let w = Tensor::<f32>::load(weights)?;
            let th = Tensor::<f32>::load(thresholds)?;
            if th.rows != w.rows || th.cols != 1 {
                bail!(Error::Construction(format!(
                    "thresholds are {}x{}, expected {}x1",
                    th.rows, th.cols, w.rows
                )));
            }
            let net = build_sequential(
                vec![LayerSpec::linear(w.cols, w.rows, w.data), LayerSpec::lif(w.rows)],
                NeuronConfig::ttfs(th.data).with_leak(*leak_num, *leak_den),
                EncoderConfig::with_time_window(*time_window),
            )?
            .with_num_classes(*classes);
            let artifact = snnd_core::model::export(&net)?;
            let mut f = create(out)?;
            let bytes = write_artifact(&artifact, &mut f)?;
            f.flush()?;
            println!("wrote {} ({bytes} bytes) digest={}", out.display(), digest_hex(&artifact.digest));
        }
        Command::Run { artifact, data, backend, out } => {
            let a = load_artifact(artifact)?;
            let ds = load_data(data)?;
            let cfg = AccelConfig::default();
            let enc = EncoderConfig::with_time_window(a.time_window());
            let mut rows = Vec::with_capacity(ds.len());
            for i in 0..ds.len() {
                let img = ds.image(i);
                let r = match backend {
                    Backend::Reference => run_ttfs_reference(&a, &encode_ttfs(img, &enc)?)?,
                    Backend::Accel => run_accelerator(&a, &pack_events(&encode_ttfs(img, &enc)?)?, &cfg)?,
                    Backend::DenseFp32 => run_dense_baseline(&a, img, DenseMode::Fp32)?,
                    Backend::DenseInt8 => run_dense_baseline(&a, img, DenseMode::Int8)?,
                };
                rows.push((r.label, r.no_spike));
            }
            let correct = rows.iter().enumerate().filter(|(i, r)| r.0 == ds.label(*i)).count();
            println!("accuracy={:.2}% n={}", correct as f64 * 100.0 / ds.len() as f64, ds.len());
            if let Some(p) = out {
                let mut f = create(p)?;
                writeln!(f, "index,label,no_spike")?;
                for (i, (l, ns)) in rows.iter().enumerate() {
                    writeln!(f, "{i},{l},{}", *ns as u8)?;
                }
                f.flush()?;
            }
        }
        Command::Verify { artifact, data, runs } => {
            let a = load_artifact(artifact)?;
            let ds = load_data(data)?;
            let cfg = eval_config(cli, CycleMode::Deployed);
            let eq = harness::verify_equivalence(&a, &ds, &cfg)?;
            println!("matches={}/{}", eq.matches, eq.n);
            for m in &eq.mismatches {
                println!(
                    "mismatch index={} reference={}/{} accel={}/{}",
                    m.index, m.reference.0, m.reference.1, m.accel.0, m.accel.1
                );
            }
            if !eq.timing_mismatches.is_empty() {
                println!("first_spike_mismatches={}", eq.timing_mismatches.len());
            }
            let mut failed = !eq.all_match();
            if *runs > 1 {
                let rep = harness::repeatability(&a, &ds, *runs, &cfg)?;
                println!("repeat_mismatches={}/{}", rep.mismatches, rep.runs * rep.n);
                failed |= rep.mismatches > 0;
            }
            if failed {
                return Ok(EXIT_MISMATCH);
            }
        }
        Command::Robustness { artifact, data, ratios, repeats, out } => {
            let a = load_artifact(artifact)?;
            let ds = load_data(data)?;
            let cfg = eval_config(cli, CycleMode::Deployed);
            let sweeps = (0..(*repeats).max(1))
                .map(|r| harness::robustness_sweep(&a, &ds, ratios, cli.seed.wrapping_add(r), &cfg))
                .collect::<Result<Vec<_>, _>>()?;
            let report = RobustnessReport::median_of(&sweeps)?;
            harness::write_robustness_csv(&report, create(out)?)?;
            for (p, acc) in report.drop_ratios.iter().zip(&report.accuracies) {
                println!("ratio={p:.2} accuracy={acc:.2}%");
            }
        }
        Command::Bench { artifact, data, cycle_mode, out, profile_out } => {
            let a = load_artifact(artifact)?;
            let ds = load_data(data)?;
            let cfg = eval_config(cli, (*cycle_mode).into());
            let report = harness::evaluate(&a, &ds, &cfg)?;
            harness::write_eval_csv(&report, create(out)?)?;
            for r in &report.rows {
                println!("{} accuracy={:.2}%", r.platform, r.accuracy_pct);
            }
            println!(
                "latency_us={:.4} throughput_img_s={:.4e} energy_nj={:.2}",
                report.latency_us, report.throughput_img_s, report.energy_nj
            );
            if let Some(p) = profile_out {
                let scope = harness::scope_profile(&a, &ds, &cfg)?;
                harness::write_scope_csv(&scope, create(p)?)?;
            }
        }
    }
    Ok(0)
}

fn error_line(e: &anyhow::Error) -> String {
    let kind = e.downcast_ref::<Error>().map(Error::kind).unwrap_or("runtime");
    let msg = format!("{e:#}").replace('"', "'");
    format!("error kind={kind} msg=\"{msg}\"")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{}", error_line(&e));
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
