//! Command-line front end. Every command returns its full output as a string
//! so that runs are byte-for-byte reproducible.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use rayon::prelude::*;

use crate::bundle_data::{euler_splitting_system, parse_bundle, tangent_bundle, BundleInput};
use crate::error::{Error, Result};
use crate::fan::Fan;
use crate::intersection::{augmented_matrix, AugmentedIntersectionMatrix};
use crate::solver::{find_splitting_types, ClassReducer, SplittingType, Strictness};
use crate::splitting::{splitting_system, SplittingSystem};
use crate::surface_graph::{enumerate_levels, graph_to_fan, WeightedCircularGraph};

/// Largest number of blowups any command accepts.
pub const K_HARD_CAP: usize = 12;

#[derive(Parser, Debug)]
#[command(
    name = "toric-splitting",
    version,
    about = "Splitting types of equivariant bundles on toric manifolds"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Require every line bundle to be positive, trivial or negative on all walls.
    #[arg(long, global = true)]
    pub strict_signs: bool,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Tsv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Surfaces obtained from CP² by exactly k equivariant blowups.
    Surfaces {
        #[arg(long, default_value_t = 9)]
        k: usize,
    },
    /// Augmented intersection matrix of a fan.
    QMatrix(SpaceArgs),
    /// Splitting numbers and splitting types of the tangent bundle.
    TangentSplit(SpaceArgs),
    /// Splitting numbers and splitting types of a bundle file.
    BundleSplit {
        #[arg(long)]
        bundle: PathBuf,
        #[command(flatten)]
        space: SpaceArgs,
    },
    /// Every blowup of CP² with at most k points whose tangent bundle has a splitting type.
    Table41 {
        #[arg(long, default_value_t = 9)]
        k: usize,
    },
}

#[derive(Args, Debug)]
pub struct SpaceArgs {
    /// Fan file (`dim`, `ray`, `cone` lines).
    #[arg(long, conflicts_with = "graph")]
    pub fan: Option<PathBuf>,
    /// Comma-separated weights of a circular graph, e.g. `1,1,1`.
    #[arg(long, allow_hyphen_values = true)]
    pub graph: Option<String>,
}

impl SpaceArgs {
    fn load(&self) -> Result<Fan> {
        match (&self.fan, &self.graph) {
            (Some(path), _) => Fan::parse(&read(path)?).map_err(|e| in_file(path, e)),
            (None, Some(g)) => graph_to_fan(&g.parse::<WeightedCircularGraph>()?),
            (None, None) => Err(Error::Usage("one of --fan or --graph is required".into())),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))
}

fn in_file(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    }
}

fn check_k(k: usize) -> Result<()> {
    if k > K_HARD_CAP {
        return Err(Error::Usage(format!(
            "k = {k} exceeds the hard cap of {K_HARD_CAP}"
        )));
    }
    Ok(())
}

fn csv(v: &[BigInt]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Parses arguments and runs one command. Help and version requests are
/// returned as ordinary output.
pub fn run<I, T>(args: I) -> Result<String>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            return Ok(e.to_string())
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            return Err(Error::Usage(
                first.trim_start_matches("error: ").to_string(),
            ));
        }
    };
    execute(&cfg)
}

pub fn execute(cfg: &RunConfig) -> Result<String> {
    let strict = if cfg.strict_signs {
        Strictness::Strict
    } else {
        Strictness::Default
    };
    match &cfg.command {
        Command::Surfaces { k } => cmd_surfaces(*k, cfg.format),
        Command::QMatrix(space) => Ok(render_q(&augmented_matrix(&space.load()?), cfg.format)),
        Command::TangentSplit(space) => {
            let fan = space.load()?;
            let xi = splitting_system(&tangent_bundle(&fan))?;
            report(&fan, &xi, strict, cfg.format)
        }
        Command::BundleSplit { bundle, space } => {
            let fan = space.load()?;
            let input = parse_bundle(&read(bundle)?, &fan).map_err(|e| in_file(bundle, e))?;
            let xi = match input {
                BundleInput::Kaneyama(data) => {
                    data.validate()?;
                    splitting_system(&data)?
                }
                BundleInput::Euler(spec) => {
                    euler_splitting_system(&spec, &augmented_matrix(&fan).q)?
                }
            };
            report(&fan, &xi, strict, cfg.format)
        }
        Command::Table41 { k } => cmd_table41(*k, strict, cfg.format),
    }
}

pub fn cmd_surfaces(k: usize, format: Format) -> Result<String> {
    check_k(k)?;
    let graphs = enumerate_levels(k).pop().unwrap();
    let mut s = String::new();
    if format == Format::Text {
        let _ = writeln!(s, "# {} surfaces with {k} blowups", graphs.len());
    }
    for g in &graphs {
        match format {
            Format::Text => {
                let _ = writeln!(s, "{g}");
            }
            Format::Tsv => {
                let _ = writeln!(s, "{k}\t{g}");
            }
        }
    }
    Ok(s)
}

fn render_q(q: &AugmentedIntersectionMatrix, format: Format) -> String {
    match format {
        Format::Text => q.to_string(),
        Format::Tsv => {
            let mut s = String::new();
            for (i, tau) in q.row_walls.iter().enumerate() {
                let names: Vec<String> = tau.iter().map(|j| (j + 1).to_string()).collect();
                let _ = writeln!(s, "q\t{}\t{}\t{}", i + 1, names.join(","), csv(q.q.row(i)));
            }
            s
        }
    }
}

fn report(fan: &Fan, xi: &SplittingSystem, strict: Strictness, format: Format) -> Result<String> {
    let q = augmented_matrix(fan);
    let types = find_splitting_types(fan, &q.q, xi, strict)?;
    let mut s = String::new();
    match format {
        Format::Text => {
            let _ = writeln!(s, "splitting numbers");
            s.push_str(&xi.to_string());
            let _ = writeln!(s, "\naugmented intersection matrix");
            s.push_str(&q.to_string());
            let _ = writeln!(s);
            if types.is_empty() {
                let _ = writeln!(s, "no splitting type");
            } else {
                let _ = writeln!(s, "splitting types: {}", types.len());
            }
            for (id, t) in types.iter().enumerate() {
                let rows: Vec<String> = t.r_prime.iter().map(|r| format!("({})", csv(r))).collect();
                let _ = writeln!(s, "type {}", id + 1);
                let _ = writeln!(s, "  R' = {}", rows.join(" "));
                for c in 0..t.canonical.len() {
                    let _ = writeln!(
                        s,
                        "  L{}: X = ({})  class = ({})  {}",
                        c + 1,
                        csv(&t.x.col(c)),
                        csv(&t.canonical[c]),
                        t.signs[c]
                    );
                }
            }
        }
        Format::Tsv => {
            for (i, t) in xi.tuples().iter().enumerate() {
                let _ = writeln!(s, "xi\t{}\t{}", i + 1, csv(t));
            }
            s.push_str(&render_q(&q, Format::Tsv));
            if types.is_empty() {
                let _ = writeln!(s, "type\tnone");
            }
            for (id, t) in types.iter().enumerate() {
                for c in 0..t.canonical.len() {
                    let _ = writeln!(
                        s,
                        "type\t{}\t{}\t{}\t{}\t{}",
                        id + 1,
                        c + 1,
                        csv(&t.x.col(c)),
                        csv(&t.canonical[c]),
                        t.signs[c]
                    );
                }
            }
        }
    }
    Ok(s)
}

/// One surface whose tangent bundle admits a splitting type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableRow {
    pub k: usize,
    pub graph: WeightedCircularGraph,
    /// Each type as columns in the basis of the first `s − 2` divisors.
    pub types: Vec<Vec<Vec<BigInt>>>,
}

/// Searches every blowup of `CP²` by `1..=k` points.
pub fn table41_rows(k: usize, strict: Strictness) -> Result<Vec<TableRow>> {
    check_k(k)?;
    let levels = enumerate_levels(k);
    let mut rows = Vec::new();
    for (level, graphs) in levels.iter().enumerate().skip(1) {
        let graphs: Vec<&WeightedCircularGraph> = graphs.iter().collect();
        let found = graphs
            .par_iter()
            .map(|g| -> Result<Option<TableRow>> {
                let fan = graph_to_fan(g)?;
                let xi = splitting_system(&tangent_bundle(&fan))?;
                let q = augmented_matrix(&fan).q;
                let types = find_splitting_types(&fan, &q, &xi, strict)?;
                if types.is_empty() {
                    return Ok(None);
                }
                Ok(Some(TableRow {
                    k: level,
                    graph: (*g).clone(),
                    types: table_basis(&fan, &types),
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.extend(found.into_iter().flatten());
    }
    Ok(rows)
}

fn table_basis(fan: &Fan, types: &[SplittingType]) -> Vec<Vec<Vec<BigInt>>> {
    let reducer = ClassReducer::new(fan);
    let keep = fan.num_rays() - fan.dim();
    debug_assert_eq!(
        reducer.zeroed(),
        &(keep..fan.num_rays()).collect::<Vec<_>>()[..]
    );
    types
        .iter()
        .map(|t| t.canonical.iter().map(|c| c[..keep].to_vec()).collect())
        .collect()
}

pub fn cmd_table41(k: usize, strict: Strictness, format: Format) -> Result<String> {
    let rows = table41_rows(k, strict)?;
    let mut s = String::new();
    if format == Format::Text {
        let _ = writeln!(
            s,
            "# {} surfaces with a split tangent bundle, up to {k} blowups",
            rows.len()
        );
    }
    for row in &rows {
        for t in &row.types {
            let cols: Vec<String> = t.iter().map(|c| format!("({})", csv(c))).collect();
            match format {
                Format::Text => {
                    let _ = writeln!(
                        s,
                        "k={}  w=({})  type=({})",
                        row.k,
                        row.graph,
                        cols.join(",")
                    );
                }
                Format::Tsv => {
                    let _ = writeln!(s, "{}\t{}\t{}", row.k, row.graph, cols.join(";"));
                }
            }
        }
    }
    Ok(s)
}
