// Copyright 2026 The qsynth Authors
// SPDX-License-Identifier: Apache-2.0

//! `qsynth`: unitary and subspace-map synthesis from the command line.
//!
//! Exit status is 0 on success, 2 for invalid input and 1 for anything
//! else. Set `QSYNTH_THREADS` to cap the worker pool.

mod commands;
mod error;
mod inputs;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qsynth::ec::{Averaging, LandeSign, MapMode};
use qsynth::gates::SConvention;

use crate::commands::{EcArgs, UnitaryArgs, WignerArgs};
use crate::error::{CliError, CliResult};
use crate::inputs::{SearchArgs, SystemArgs};
use crate::output::Run;

pub const THREADS_ENV: &str = "QSYNTH_THREADS";

#[derive(Parser)]
#[command(
    name = "qsynth",
    version,
    about = "Unitary and subspace-map synthesis for controllable qudits"
)]
struct Cli {
    /// Also write a run manifest (config, inputs, outputs, timing) to this path.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect the control model.
    Model {
        #[command(subcommand)]
        command: ModelCommand,
    },
    /// Search a waveform mapping one state onto another.
    OptimizeState {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// `basis:<i>`, `fx:<m>`, `haar:<seed>` or a JSON file with `amplitudes`.
        #[arg(long)]
        initial: String,
        #[arg(long)]
        target: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Synthesize a full unitary through its eigendecomposition.
    BuildUnitary {
        /// X, Z, H, S or G:<a>.
        #[arg(long)]
        gate: Option<String>,
        /// JSON file with `rows` of `[re, im]` pairs.
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long, default_value_t = 7)]
        d: usize,
        /// Use exact Householder mappers instead of searched waveforms.
        #[arg(long)]
        exact_mappers: bool,
        #[arg(long, value_enum, default_value_t = SConv::LevelParity)]
        s_convention: SConv,
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Synthesize a map between two orthonormal sets.
    BuildSubspaceMap {
        #[arg(long)]
        spec: PathBuf,
        /// Assemble the ideal π-rotations without searching.
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Error-correction fidelity sweep.
    EcSweep {
        #[arg(long, value_enum, default_value_t = Maps::Ideal)]
        preset: Maps,
        /// JSON file overriding sweep configuration fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated error angles.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        epsilon: Option<Vec<f64>>,
        #[arg(long, value_enum)]
        averaging: Option<Avg>,
        #[arg(long, value_enum)]
        lande_sign: Option<Lande>,
        /// Search configuration for synthesized maps.
        #[arg(long)]
        search_config: Option<PathBuf>,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long, default_value = qsynth::cesium::DEFAULT_PRESET)]
        params_preset: String,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Wigner function of a spin state on a θ × φ grid.
    Wigner {
        /// JSON file with `amplitudes` or `density` and optional `block_start`, `block_len`.
        #[arg(long)]
        state: Option<PathBuf>,
        /// Basis level of the F=3 block instead of a state file.
        #[arg(long)]
        level: Option<usize>,
        /// With --level, use the Fourier-transformed level.
        #[arg(long, requires = "level")]
        fourier: bool,
        #[arg(long, default_value_t = 61)]
        n_theta: usize,
        #[arg(long, default_value_t = 140)]
        n_phi: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the Clifford conjugation relations.
    VerifyClifford {
        #[arg(long)]
        d: usize,
        #[arg(long, value_enum, default_value_t = SConv::LevelParity)]
        s_convention: SConv,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ModelCommand {
    /// Describe a preset.
    Info {
        #[arg(default_value = qsynth::cesium::DEFAULT_PRESET)]
        preset: String,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value = "+4", allow_hyphen_values = true)]
        aux: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SConv {
    LevelParity,
    DimensionParity,
}

impl From<SConv> for SConvention {
    fn from(s: SConv) -> Self {
        match s {
            SConv::LevelParity => SConvention::LevelParity,
            SConv::DimensionParity => SConvention::DimensionParity,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Maps {
    Ideal,
    Synthesized,
}

#[derive(Clone, Copy, ValueEnum)]
enum Avg {
    MonteCarlo,
    AxisStates,
}

#[derive(Clone, Copy, ValueEnum)]
enum Lande {
    Opposite,
    Same,
}

fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::field(THREADS_ENV, format!("expected a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Internal(e.to_string()))
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    let manifest = cli.manifest;
    match cli.command {
        Command::Model {
            command:
                ModelCommand::Info {
                    preset,
                    params,
                    aux,
                    out,
                },
        } => {
            let mut run = Run::new("model info", manifest);
            let system = SystemArgs { preset, params, aux };
            commands::model_info(&system, out, &mut run)?;
            run.finish()
        }
        Command::OptimizeState {
            system,
            search,
            initial,
            target,
            out_dir,
        } => {
            let mut run = Run::new("optimize-state", manifest);
            commands::optimize_state(&system, &search, &initial, &target, &out_dir, &mut run)?;
            run.finish()
        }
        Command::BuildUnitary {
            gate,
            matrix,
            d,
            exact_mappers,
            s_convention,
            system,
            search,
            out_dir,
        } => {
            let mut run = Run::new("build-unitary", manifest);
            let args = UnitaryArgs {
                gate: gate.as_deref(),
                matrix: matrix.as_deref(),
                d,
                exact: exact_mappers,
                s_convention: s_convention.into(),
            };
            commands::build_unitary(&args, &system, &search, &out_dir, &mut run)?;
            run.finish()
        }
        Command::BuildSubspaceMap {
            spec,
            exact,
            system,
            search,
            out_dir,
        } => {
            let mut run = Run::new("build-subspace-map", manifest);
            commands::build_subspace_map(&spec, exact, &system, &search, &out_dir, &mut run)?;
            run.finish()
        }
        Command::EcSweep {
            preset,
            config,
            samples,
            seed,
            epsilon,
            averaging,
            lande_sign,
            search_config,
            restarts,
            params_preset,
            params,
            out_dir,
        } => {
            let mut run = Run::new("ec-sweep", manifest);
            let system = SystemArgs {
                preset: params_preset,
                params,
                aux: "+4".into(),
            };
            let cesium = system.params(&mut run)?;
            let args = EcArgs {
                preset: match preset {
                    Maps::Ideal => MapMode::Ideal,
                    Maps::Synthesized => MapMode::Synthesized,
                },
                config,
                samples,
                seed,
                epsilon,
                averaging: averaging.map(|a| match a {
                    Avg::MonteCarlo => Averaging::MonteCarlo,
                    Avg::AxisStates => Averaging::AxisStates,
                }),
                lande_sign: lande_sign.map(|l| match l {
                    Lande::Opposite => LandeSign::Opposite,
                    Lande::Same => LandeSign::Same,
                }),
                search_config,
                restarts,
            };
            commands::ec_sweep_cmd(&args, &cesium, &out_dir, &mut run)?;
            run.finish()
        }
        Command::Wigner {
            state,
            level,
            fourier,
            n_theta,
            n_phi,
            out,
        } => {
            let mut run = Run::new("wigner", manifest);
            let args = WignerArgs {
                state,
                level,
                fourier,
                n_theta,
                n_phi,
            };
            commands::wigner_cmd(&args, &out, &mut run)?;
            run.finish()
        }
        Command::VerifyClifford { d, s_convention, out } => {
            let mut run = Run::new("verify-clifford", manifest);
            commands::verify_clifford(d, s_convention.into(), out, &mut run)?;
            run.finish()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qsynth: {e}");
            e.exit_code()
        }
    }
}
