//! `cocycle`: signatures, p-variation, extension and dominated-path calculus on sampled paths.
//!
//! Exit codes: 0 success, 2 malformed input, 3 certificate failure, 4 non-finite output.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cocycle::json::to_canonical_string;
use cocycle::Error;
use serde_json::json;

mod commands;
mod input;

#[derive(Parser)]
#[command(
    name = "cocycle",
    version,
    about = "Sewing integrals of cocyclic one-forms along sampled paths"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
pub struct Common {
    /// Sampled path: CSV with header `t,x1,...,xd`, or a path JSON file.
    pub input: PathBuf,
    /// Group for CSV input.
    #[arg(long, default_value = "nilpotent", value_parser = ["nilpotent", "butcher"])]
    pub system: String,
    /// Truncation level used to lift CSV input.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Relative tolerance for grouplike checks on JSON input.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Args, Clone)]
pub struct Sewing {
    /// Roughness exponent of the path.
    #[arg(long)]
    pub p: f64,
    /// Sewing exponent; defaults to (levels + 1) / p.
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long, default_value = "omega", value_parser = ["omega", "dyadic", "ltr"])]
    pub schedule: String,
    /// Control: cumulative length to the power p, or the exact p-variation (small grids).
    #[arg(long, default_value = "length", value_parser = ["length", "pvar"])]
    pub control: String,
}

#[derive(Subcommand)]
enum Cmd {
    /// Signature of the piecewise-linear interpolation.
    Signature {
        #[command(flatten)]
        common: Common,
    },
    /// p-variation under the homogeneous norm.
    Pvar {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        p: f64,
    },
    /// Extend a path to a higher truncation level.
    Extend {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sewing: Sewing,
        /// Target truncation level.
        #[arg(long)]
        to_level: usize,
        /// How finest cells enter the next level.
        #[arg(long, default_value = "group", value_parser = ["group", "pad"])]
        cell: String,
    },
    /// Rough integral of a polynomial one-form.
    Integrate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sewing: Sewing,
        /// Polynomial one-form JSON.
        #[arg(long)]
        form: PathBuf,
    },
    /// Iterated integral of two dominated paths (the path itself when no form is given).
    Iterate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sewing: Sewing,
        /// Up to two polynomial one-forms.
        #[arg(long)]
        form: Vec<PathBuf>,
    },
    /// Pointwise tensor product of two dominated paths.
    Product {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sewing: Sewing,
        #[arg(long)]
        form: Vec<PathBuf>,
    },
    /// Composition of a polynomial map with a dominated path.
    Compose {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sewing: Sewing,
        #[arg(long)]
        form: Option<PathBuf>,
        /// Polynomial map JSON.
        #[arg(long)]
        map: PathBuf,
    },
    /// Group enhancement of a dominated path.
    Enhance {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sewing: Sewing,
        #[arg(long)]
        form: Option<PathBuf>,
        /// Depth of the enhancement; defaults to [p].
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Slowly-varying and integrable-condition certificates of a rough one-form.
    Certify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sewing: Sewing,
        #[arg(long)]
        form: PathBuf,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Certificate(_) => 3,
        Error::Overflow(_) => 4,
        _ => 2,
    }
}

fn kind_name(e: &Error) -> &'static str {
    match e {
        Error::Mismatch(_) => "mismatch",
        Error::Domain(_) => "domain",
        Error::Unsupported(_) => "unsupported",
        Error::Certificate(_) => "certificate",
        Error::Parse(_) => "parse",
        Error::Overflow(_) => "overflow",
    }
}

fn main() -> ExitCode {
    cocycle::init_threads();
    let cli = Cli::parse();
    let out = match cli.cmd {
        Cmd::Signature { common } => commands::signature(&common),
        Cmd::Pvar { common, p } => commands::pvar(&common, p),
        Cmd::Extend {
            common,
            sewing,
            to_level,
            cell,
        } => commands::extend(&common, &sewing, to_level, &cell),
        Cmd::Integrate {
            common,
            sewing,
            form,
        } => commands::integrate(&common, &sewing, &form),
        Cmd::Iterate {
            common,
            sewing,
            form,
        } => commands::binary(&common, &sewing, &form, false),
        Cmd::Product {
            common,
            sewing,
            form,
        } => commands::binary(&common, &sewing, &form, true),
        Cmd::Compose {
            common,
            sewing,
            form,
            map,
        } => commands::compose(&common, &sewing, form.as_deref(), &map),
        Cmd::Enhance {
            common,
            sewing,
            form,
            levels,
        } => commands::enhance(&common, &sewing, form.as_deref(), levels),
        Cmd::Certify {
            common,
            sewing,
            form,
        } => commands::certify(&common, &sewing, &form),
    }
    .and_then(|v| to_canonical_string(&v));
    match out {
        Ok(s) => {
            // a closed pipe downstream is not our failure
            let _ = writeln!(std::io::stdout().lock(), "{s}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let diag = json!({ "error": kind_name(&e), "message": e.to_string() });
            eprintln!("{diag}");
            ExitCode::from(exit_code(&e))
        }
    }
}
