//! Thin command-line front end: run config-file experiments, reproduce
//! validation figures, or query the optimizers directly.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use misolab::channel::Correlation;
use misolab::optimize::{
    alpha_star, alpha_star_search, default_alpha_bracket, distortion_for_rate_offset,
    feedback_bits, joint_training_user_opt, optimal_load_iid, optimal_training_length,
    optimal_user_count, RateGapSpec, Scheme, TddConfig, TddScheme,
};
use misolab::sim::{reproduce_figure, run_config, FigureName, Scale};

#[derive(Parser)]
#[command(
    name = "simlab",
    about = "MISO broadcast precoding lab: deterministic equivalents vs Monte-Carlo",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the experiment described by a TOML config file.
    Run {
        /// Path to the config file.
        config: PathBuf,
    },
    /// Reproduce one of the validation figures (fig1..fig9).
    Figure {
        /// Figure name, fig1 through fig9.
        name: String,
        /// Trial budget: desk (1000 trials) or paper (10000).
        #[arg(long, default_value = "desk")]
        scale: String,
        /// Master seed for every Monte-Carlo substream.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output directory for CSVs and the plot script.
        #[arg(long, default_value = "figures")]
        out: PathBuf,
    },
    /// Evaluate one of the optimizers and print a key=value table.
    Solve {
        #[command(subcommand)]
        what: SolveCommand,
    },
}

#[derive(Subcommand)]
enum SolveCommand {
    /// Sum-rate maximizing RZF ridge.
    Alpha(AlphaArgs),
    /// Sum-rate maximizing load beta* = M/K* and the user count it implies.
    Beta(BetaArgs),
    /// Feedback bits per user holding a target rate offset.
    Bits(BitsArgs),
    /// Optimal TDD training length, plus the joint (T_t, K) optimum.
    Tdd(TddArgs),
}

#[derive(Args)]
struct AlphaArgs {
    /// Downlink SNR in dB.
    #[arg(long)]
    rho_db: f64,
    /// CSIT distortion tau^2 in [0, 1).
    #[arg(long, default_value_t = 0.0)]
    tau2: f64,
    /// Aspect ratio M/K.
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Verify the closed form against the line search on M antennas.
    #[arg(long)]
    check_m: Option<usize>,
}

#[derive(Args)]
struct BetaArgs {
    #[arg(long)]
    rho_db: f64,
    #[arg(long, default_value_t = 0.0)]
    tau2: f64,
    /// Antennas; when set, also prints the implied integer user count.
    #[arg(long)]
    m: Option<usize>,
}

#[derive(Args)]
struct BitsArgs {
    /// Antennas.
    #[arg(long)]
    m: usize,
    /// Rate-offset parameter b (> 1): the target per-user gap is log2(b).
    #[arg(long, default_value_t = 2.0)]
    b: f64,
    #[arg(long)]
    rho_db: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Scheme: orzf, rzf_cdu or zf.
    #[arg(long, default_value = "orzf")]
    scheme: String,
}

#[derive(Args)]
struct TddArgs {
    /// Coherence block length in channel uses.
    #[arg(long)]
    t: f64,
    /// Users (minimum training length).
    #[arg(long)]
    k: usize,
    /// Antennas.
    #[arg(long)]
    m: usize,
    /// Downlink SNR in dB.
    #[arg(long)]
    rho_dl_db: f64,
    /// Uplink/downlink SNR ratio.
    #[arg(long, default_value_t = 0.1)]
    ul_ratio: f64,
    /// Scheme: zf or orzf.
    #[arg(long, default_value = "zf")]
    scheme: String,
    /// Also run the alternating joint (T_t, K) optimization.
    #[arg(long)]
    joint: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> misolab::Result<()> {
    match cli.command {
        Command::Run { config } => {
            run_config(&config)?;
            Ok(())
        }
        Command::Figure {
            name,
            scale,
            seed,
            out,
        } => {
            let name: FigureName = name.parse()?;
            let scale: Scale = scale.parse()?;
            let written = reproduce_figure(name, scale, seed, &out)?;
            for path in written {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Solve { what } => match what {
            SolveCommand::Alpha(args) => solve_alpha(args),
            SolveCommand::Beta(args) => solve_beta(args),
            SolveCommand::Bits(args) => solve_bits(args),
            SolveCommand::Tdd(args) => solve_tdd(args),
        },
    }
}

fn solve_alpha(args: AlphaArgs) -> misolab::Result<()> {
    let rho = 10f64.powf(args.rho_db / 10.0);
    let closed = alpha_star(rho, args.tau2, args.beta)?;
    println!("rho={rho}");
    println!("beta={}", args.beta);
    println!("tau2={}", args.tau2);
    println!("alpha_star={closed}");
    if let Some(m) = args.check_m {
        let k = ((m as f64 / args.beta).round() as usize).max(1);
        let tau = vec![args.tau2.sqrt(); k];
        let search = alpha_star_search(
            &Correlation::identity(m),
            &vec![1.0; k],
            &tau,
            rho,
            args.beta,
            default_alpha_bracket(rho, args.beta),
            1e-8,
        )?;
        println!("alpha_line_search={}", search.alpha);
        println!("de_sum_rate={}", search.de_sum_rate);
        println!("grid_fallback={}", search.used_grid_fallback);
    }
    Ok(())
}

fn solve_beta(args: BetaArgs) -> misolab::Result<()> {
    let rho = 10f64.powf(args.rho_db / 10.0);
    let beta = optimal_load_iid(rho, args.tau2)?;
    println!("rho={rho}");
    println!("tau2={}", args.tau2);
    println!("beta_star={beta}");
    if let Some(m) = args.m {
        println!("k_star_continuous={}", m as f64 / beta);
        let k = optimal_user_count(m, rho, args.tau2, &Correlation::identity(m), &[1.0])?;
        println!("k_star={k}");
    }
    Ok(())
}

fn solve_bits(args: BitsArgs) -> misolab::Result<()> {
    let scheme = match args.scheme.as_str() {
        "orzf" => Scheme::Orzf,
        "rzf_cdu" => Scheme::RzfCdu,
        "zf" => Scheme::Zf,
        other => {
            return Err(misolab::Error::InvalidInput(format!(
                "unknown scheme `{other}` (expected orzf, rzf_cdu or zf)"
            )))
        }
    };
    let rho = 10f64.powf(args.rho_db / 10.0);
    let spec = RateGapSpec::new(args.b, rho, args.beta, scheme)?;
    let fb = feedback_bits(&spec, args.m)?;
    println!("scheme={}", args.scheme);
    println!("rho={rho}");
    println!("b={}", args.b);
    println!("rate_offset_bits={}", args.b.log2());
    println!("bits_real={}", fb.real);
    println!("bits={}", fb.bits);
    match distortion_for_rate_offset(&spec) {
        Ok(tau2) => println!("tau2={tau2}"),
        Err(_) => println!("tau2=unreachable"),
    }
    Ok(())
}

fn solve_tdd(args: TddArgs) -> misolab::Result<()> {
    let scheme = match args.scheme.as_str() {
        "zf" => TddScheme::Zf,
        "orzf" => TddScheme::Orzf,
        other => {
            return Err(misolab::Error::InvalidInput(format!(
                "unknown scheme `{other}` (expected zf or orzf)"
            )))
        }
    };
    let rho_dl = 10f64.powf(args.rho_dl_db / 10.0);
    let cfg = TddConfig::new(args.t, args.k, args.m, args.ul_ratio, 1.0, scheme)?;
    let opt = optimal_training_length(&cfg, rho_dl)?;
    println!("scheme={}", args.scheme);
    println!("rho_dl={rho_dl}");
    println!("rho_ul={}", cfg.rho_ul_at(rho_dl));
    println!("t_t_star={}", opt.t_t);
    println!("t_t_star_over_t={}", opt.t_t / args.t);
    println!("normalized_rate={}", opt.rate);
    if args.joint {
        let joint = joint_training_user_opt(&cfg, rho_dl)?;
        println!("joint_t_t={}", joint.t_t);
        println!("joint_k={}", joint.k);
        println!("joint_rate={}", joint.rate);
        println!("joint_converged={}", joint.converged);
    }
    Ok(())
}
