//! Command-line front end: manifold validation, exact invariants, double
//! covers, obstruction certificates, and faithful-representation building.
//!
//! Exit codes follow one contract everywhere: `0` when the command succeeds
//! and the property it tests holds, `1` when the property fails (a block is
//! not strictly dominant, a cover falls apart, a certificate or
//! representation does not replay), and `2` when the input itself is
//! unusable (unreadable file, syntax error, invalid manifold, bad flags).

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use seifert_core::certificate::{check_certificate, CertificateDoc, CheckError};
use seifert_core::covers::{cover_invariants_preserved, double_cover_cut, DoubleCover};
use seifert_core::format::{
    manifold_to_text, parse_manifold, rational_from_string, rational_to_string,
};
use seifert_core::manifold::{BlockId, EdgeKey, GraphManifold};
use seifert_core::motion::Tolerances;
use seifert_core::obstruction::{certify_no_vertex_faithful, CertifyOptions, ObstructionError};
use seifert_core::rep::{
    extend_along_tree, verify_rep, RepDocError, RepError, RepresentationDoc, SeedParams,
};

#[derive(Parser)]
#[command(name = "seifert-obstruct", version)]
#[command(
    about = "Graph-manifold invariants, covers, obstruction certificates, and representations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a manifold file and run the normal-form validation report
    Validate {
        /// Manifold file (`block <id> genus <g> free <n>` / `edge <v> <w> glue <a> <b> <c> <d>`)
        manifold: PathBuf,
    },
    /// Print exact charges, reciprocal sums, and intersection indices
    Invariants { manifold: PathBuf },
    /// Report whether every block is strictly diagonally dominant
    Sdd { manifold: PathBuf },
    /// Build the double cover cut along the given edges and re-check the
    /// lifted invariants against the base
    Cover {
        manifold: PathBuf,
        /// Edges to cut, as comma-separated `<id>-<id>` pairs (may be empty)
        #[arg(long, value_delimiter = ',', num_args = 0.., default_value = "")]
        cut: Vec<String>,
        /// Write the covering manifold here in the input format
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full obstruction argument and emit a re-checkable certificate
    Certify {
        manifold: PathBuf,
        /// Largest candidate vertex-set size enumerated
        #[arg(long, default_value_t = CertifyOptions::default().size_bound)]
        size_bound: usize,
        /// Largest internal-edge count for which ignored-edge subsets are enumerated
        #[arg(long, default_value_t = CertifyOptions::default().cut_bound)]
        cut_bound: usize,
        /// Write the certificate document here as JSON
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a certificate from nothing but its own contents and compare
    /// every recorded field bit-exactly
    Check { certificate: PathBuf },
    /// Build a representation faithful at `--root` and extended over the
    /// dual tree, verify it, and optionally store it
    BuildRep {
        manifold: PathBuf,
        /// Block carrying the faithful ping-pong seed
        #[arg(long)]
        root: String,
        /// Diagonal stretch of the seed generators; defaults to a value
        /// derived from the generator count
        #[arg(long)]
        spread: Option<f64>,
        /// Exact central coordinate of the root fiber image, as `p` or `p/q`
        #[arg(long, default_value = "1")]
        fiber_central: String,
        /// Verification tolerance
        #[arg(long, default_value_t = 1e-9)]
        eps: f64,
        /// Write the representation document here as JSON
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run the five verification checks on a stored representation
    VerifyRep {
        representation: PathBuf,
        /// Verification tolerance
        #[arg(long, default_value_t = 1e-9)]
        eps: f64,
    },
}

/// A failure with its contractual exit code; the message goes to stderr.
struct Failure {
    code: u8,
    message: String,
}

fn input_error(message: impl Display) -> Failure {
    Failure {
        code: 2,
        message: message.to_string(),
    }
}

fn main() -> ExitCode {
    if let Err(message) = configure_threads() {
        eprintln!("error: {message}");
        return ExitCode::from(2);
    }
    match run(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Honors `SEIFERT_OBSTRUCT_THREADS` as a cap on the rayon pool; unset means
/// rayon's own default.
fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("SEIFERT_OBSTRUCT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        format!("SEIFERT_OBSTRUCT_THREADS must be a positive integer, got `{raw}`")
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

/// `Ok(true)` — success, exit 0; `Ok(false)` — the tested property fails and
/// the report already went to stdout, exit 1; `Err` — input error, exit 2.
fn run(command: Command) -> Result<bool, Failure> {
    match command {
        Command::Validate { manifold } => {
            let m = parse_file(&manifold)?;
            let report = m.validate();
            if report.is_valid() {
                println!(
                    "ok: {}, {}",
                    counted(m.blocks().len(), "block"),
                    counted(m.edges().len(), "edge")
                );
                Ok(true)
            } else {
                println!("invalid: {report}");
                Ok(false)
            }
        }
        Command::Invariants { manifold } => {
            let m = load(&manifold)?;
            for (id, block) in m.blocks() {
                let dominant = if m.is_sdd_block(id).map_err(input_error)? {
                    "strictly dominant"
                } else {
                    "not strictly dominant"
                };
                println!(
                    "block {id}: genus {}, free boundaries {}, charge {}, reciprocal sum {}, {dominant}",
                    block.genus,
                    block.free_boundaries,
                    rational_to_string(&m.charge(id).map_err(input_error)?),
                    rational_to_string(&m.reciprocal_sum(id).map_err(input_error)?),
                );
            }
            for edge in m.edges() {
                println!(
                    "edge {}: intersection index {}",
                    edge.key(),
                    m.intersection_index(&edge.v, &edge.w)
                        .map_err(input_error)?
                );
            }
            println!("SDD: {}", yes_no(m.is_sdd().map_err(input_error)?));
            Ok(true)
        }
        Command::Sdd { manifold } => {
            let m = load(&manifold)?;
            let sdd = m.is_sdd().map_err(input_error)?;
            println!("SDD: {}", yes_no(sdd));
            Ok(sdd)
        }
        Command::Cover { manifold, cut, out } => {
            let m = load(&manifold)?;
            let cut = cut
                .iter()
                .filter(|s| !s.is_empty())
                .map(|s| resolve_edge(&m, s))
                .collect::<Result<_, _>>()?;
            match double_cover_cut(&m, &cut).map_err(input_error)? {
                DoubleCover::Connected(cover) => {
                    println!(
                        "cover: connected ({}, {})",
                        counted(cover.total.blocks().len(), "block"),
                        counted(cover.total.edges().len(), "edge")
                    );
                    let preserved = cover_invariants_preserved(&m, &cover).map_err(input_error)?;
                    println!("invariants preserved: {}", yes_no(preserved));
                    if let Some(path) = out {
                        write_out(&path, &manifold_to_text(&cover.total), "cover manifold")?;
                    }
                    Ok(preserved)
                }
                DoubleCover::Disconnected { voltage, .. } => {
                    println!("cover: disconnected — the cut crosses every cycle evenly");
                    for (key, odd) in &voltage.cycle_parities {
                        println!("cycle through {key}: {}", if *odd { "odd" } else { "even" });
                    }
                    Ok(false)
                }
            }
        }
        Command::Certify {
            manifold,
            size_bound,
            cut_bound,
            out,
        } => {
            let m = load(&manifold)?;
            let options = CertifyOptions {
                size_bound,
                cut_bound,
            };
            let cert = match certify_no_vertex_faithful(&m, &options) {
                Ok(cert) => cert,
                Err(e @ ObstructionError::NotSdd(_)) => {
                    println!("refused: {e}");
                    return Ok(false);
                }
                Err(e) => return Err(input_error(e)),
            };
            let components: usize = cert.vertices.iter().map(|v| v.components.len()).sum();
            let doc = CertificateDoc::from_certificate(&cert);
            println!(
                "certificate: {} vertices, {} candidate components, {}",
                cert.vertices.len(),
                components,
                if cert.exhaustive() {
                    "exhaustive"
                } else {
                    "enumeration bounds hit"
                }
            );
            println!("conclusion: {}", doc.conclusion);
            if let Some(path) = out {
                write_out(&path, &doc.to_json(), "certificate")?;
            }
            Ok(true)
        }
        Command::Check { certificate } => {
            let text = read_file(&certificate)?;
            let verdict = CertificateDoc::from_json(&text).and_then(|doc| check_certificate(&doc));
            match verdict {
                Ok(report) => {
                    println!("check passed:");
                    for step in &report.steps {
                        println!("- {step}");
                    }
                    Ok(true)
                }
                Err(
                    e @ (CheckError::Json(_)
                    | CheckError::SchemaVersion(_)
                    | CheckError::Kind(_)
                    | CheckError::BadManifold(_)),
                ) => Err(input_error(e)),
                Err(e) => {
                    println!("check failed: {e}");
                    Ok(false)
                }
            }
        }
        Command::BuildRep {
            manifold,
            root,
            spread,
            fiber_central,
            eps,
            out,
        } => {
            let m = load(&manifold)?;
            let root = BlockId::new(root);
            m.block(&root).map_err(input_error)?;
            let params = SeedParams {
                fiber_central: rational_from_string(&fiber_central).map_err(input_error)?,
                spread,
            };
            let rep = match extend_along_tree(&m, &root, &params, &Tolerances::default()) {
                Ok(rep) => rep,
                Err(e @ RepError::MarginTooSmall { .. }) => {
                    println!("refused: {e}");
                    return Ok(false);
                }
                Err(e) => return Err(input_error(e)),
            };
            println!(
                "built: root `{root}`, {} blocks, ping-pong margin {:.3e}",
                rep.blocks.len(),
                rep.certificate.margin
            );
            let report = verify_rep(&m, &rep, eps);
            print!("{report}");
            if !report.all_pass() {
                return Ok(false);
            }
            if let Some(path) = out {
                let doc = RepresentationDoc::from_representation(&m, &rep);
                write_out(&path, &doc.to_json(), "representation")?;
            }
            Ok(true)
        }
        Command::VerifyRep {
            representation,
            eps,
        } => {
            let text = read_file(&representation)?;
            let outcome = RepresentationDoc::from_json(&text).and_then(|doc| doc.reconstruct());
            match outcome {
                Ok((m, rep)) => {
                    let report = verify_rep(&m, &rep, eps);
                    print!("{report}");
                    Ok(report.all_pass())
                }
                Err(
                    e @ (RepDocError::Json(_)
                    | RepDocError::SchemaVersion(_)
                    | RepDocError::Kind(_)
                    | RepDocError::BadManifold(_)),
                ) => Err(input_error(e)),
                Err(e) => {
                    println!("verify failed: {e}");
                    Ok(false)
                }
            }
        }
    }
}

fn counted(n: usize, noun: &str) -> String {
    let s = if n == 1 { "" } else { "s" };
    format!("{n} {noun}{s}")
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| input_error(format!("cannot read `{}`: {e}", path.display())))
}

fn parse_file(path: &Path) -> Result<GraphManifold, Failure> {
    parse_manifold(&read_file(path)?).map_err(input_error)
}

/// Parses and validates; commands past `validate` need a well-formed manifold.
fn load(path: &Path) -> Result<GraphManifold, Failure> {
    let m = parse_file(path)?;
    let report = m.validate();
    if !report.is_valid() {
        return Err(input_error(format!("manifold fails validation: {report}")));
    }
    Ok(m)
}

fn write_out(path: &Path, contents: &str, what: &str) -> Result<(), Failure> {
    fs::write(path, contents)
        .map_err(|e| input_error(format!("cannot write `{}`: {e}", path.display())))?;
    println!("wrote {what} to {}", path.display());
    Ok(())
}

/// Resolves `<id>-<id>` against the manifold's edge set; ids may themselves
/// contain dashes, so every split position is tried.
fn resolve_edge(m: &GraphManifold, name: &str) -> Result<EdgeKey, Failure> {
    for (i, _) in name.match_indices('-') {
        let v = BlockId::from(&name[..i]);
        let w = BlockId::from(&name[i + 1..]);
        if m.edge_between(&v, &w).is_some() {
            return Ok(EdgeKey::new(v, w));
        }
    }
    Err(input_error(format!(
        "`{name}` does not name an edge of the manifold (expected `<id>-<id>`)"
    )))
}
