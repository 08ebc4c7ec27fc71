use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use usfp_core::classify::{self, ClassifyOptions, CorpusEntry};
use usfp_core::ewald::{self, EwaldOutcome};
use usfp_core::par;
use usfp_core::tumatrix::{is_totally_unimodular, standard_form};
use usfp_core::{Execution, IntMatrix, LatticePolytope};

/// Verification and classification of unimodular smooth Fano polytopes.
///
/// Exit status: 0 when the command succeeds and every checked condition
/// holds, 1 when a checked condition fails or a counterexample is found,
/// 2 on bad input or usage.
#[derive(Parser)]
#[command(name = "usfp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a corpus and print the count table.
    Classify {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Md)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; 1 runs sequentially.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        max_dim: Option<usize>,
        /// Also write one JSON record per polytope to this file.
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Full flag report with witnesses for one entry.
    Verify {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        id: String,
    },
    /// Check one Ewald condition.
    Ewald {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        id: String,
        #[arg(long, value_enum)]
        condition: Condition,
        /// Print the certificates as JSON.
        #[arg(long)]
        witness: bool,
    },
    /// Print the dual polytope as a corpus line.
    Dual {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        id: String,
    },
    /// Print the standard form of the vertex matrix at a facet.
    StandardForm {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        id: String,
        #[arg(long)]
        facet: usize,
    },
    /// Generate all smooth Fano polygons up to unimodular equivalence.
    Gen2 {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify a corpus and check the class inclusions.
    CheckInclusions {
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Convert a polyDB JSON export to corpus lines.
    ImportPolydb {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Md,
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Condition {
    Weak,
    Strong,
    Star,
}

/// A finished command: whether its checks held.
type Verdict = bool;

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<Vec<CorpusEntry>> {
    classify::load_corpus(path).with_context(|| format!("loading corpus {}", path.display()))
}

fn find(path: &Path, id: &str) -> Result<(CorpusEntry, LatticePolytope)> {
    let entry = load(path)?
        .into_iter()
        .find(|e| e.id == id)
        .ok_or_else(|| anyhow!("no entry with id `{id}` in {}", path.display()))?;
    let p = entry.polytope()?;
    Ok((entry, p))
}

fn rows_json(m: &IntMatrix) -> serde_json::Value {
    match m.to_i64_rows() {
        Some(r) => json!(r),
        None => json!(m
            .to_rows()
            .iter()
            .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>())
            .collect::<Vec<_>>()),
    }
}

fn run(cli: Cli) -> Result<Verdict> {
    match cli.command {
        Command::Classify {
            corpus,
            format,
            out,
            jobs,
            max_dim,
            records,
        } => {
            let entries = load(&corpus)?;
            let execution = if jobs == Some(1) {
                Execution::Sequential
            } else {
                Execution::Parallel
            };
            let opts = ClassifyOptions { execution, max_dim };
            let c = par::with_jobs(jobs, || classify::classify_corpus(&entries, opts));
            let table = match format {
                Format::Md => c.table.to_markdown(),
                Format::Csv => c.table.to_csv(),
                Format::Json => c.table.to_json() + "\n",
            };
            emit(out.as_deref(), &table)?;
            if let Some(r) = records {
                emit(Some(&r), &c.records_jsonl())?;
            }
            Ok(true)
        }
        Command::Verify { corpus, id } => {
            let (entry, _) = find(&corpus, &id)?;
            let rec = classify::classify_polytope(&entry);
            println!("{}", serde_json::to_string_pretty(&rec)?);
            let rep = classify::check_inclusions(std::slice::from_ref(&rec));
            Ok(rec.flags.smooth_fano == Some(true) && rep.violations.is_empty())
        }
        Command::Ewald {
            corpus,
            id,
            condition,
            witness,
        } => {
            let (_, p) = find(&corpus, &id)?;
            let (holds, detail) = match condition {
                Condition::Weak => {
                    let w = ewald::weak_ewald(&p)?;
                    (w.is_some(), serde_json::to_value(&w)?)
                }
                Condition::Strong => outcome(ewald::strong_ewald(&p)?)?,
                Condition::Star => outcome(ewald::star_ewald(&p)?)?,
            };
            println!(
                "{id}: {} Ewald condition {}",
                condition_name(condition),
                if holds { "holds" } else { "fails" }
            );
            if witness {
                println!("{}", serde_json::to_string_pretty(&detail)?);
            }
            Ok(holds)
        }
        Command::Dual { corpus, id } => {
            let (_, p) = find(&corpus, &id)?;
            if !p.is_reflexive()? {
                eprintln!("{id}: not reflexive, the dual is not a lattice polytope");
                return Ok(false);
            }
            let q = p.dual()?;
            println!(
                "{}",
                json!({"id": format!("{id}-dual"), "dim": q.dim(), "vertices": rows_json(q.vertices())})
            );
            Ok(true)
        }
        Command::StandardForm { corpus, id, facet } => {
            let (_, p) = find(&corpus, &id)?;
            let nf = p.facets()?.len();
            if facet >= nf {
                bail!("facet {facet} out of range, {id} has {nf} facets");
            }
            let m = match standard_form(&p, facet) {
                Ok(m) => m,
                Err(e) => {
                    eprintln!("{id}: {e}");
                    return Ok(false);
                }
            };
            let tu = is_totally_unimodular(&m);
            println!(
                "{}",
                json!({"id": id, "facet": facet, "rows": rows_json(&m), "totally_unimodular": tu.is_tu})
            );
            Ok(tu.is_tu)
        }
        Command::Gen2 { out } => {
            emit(
                out.as_deref(),
                &classify::write_corpus(&classify::generate_dim2_corpus()),
            )?;
            Ok(true)
        }
        Command::CheckInclusions { corpus } => {
            let c = classify::classify_corpus(&load(&corpus)?, ClassifyOptions::default());
            let rep = classify::check_inclusions(&c.records);
            print!("{}", rep.to_text());
            Ok(rep.passes())
        }
        Command::ImportPolydb { file, out } => {
            let entries = classify::import_polydb(&file)
                .with_context(|| format!("importing {}", file.display()))?;
            emit(out.as_deref(), &classify::write_corpus(&entries))?;
            Ok(true)
        }
    }
}

fn condition_name(c: Condition) -> &'static str {
    match c {
        Condition::Weak => "weak",
        Condition::Strong => "strong",
        Condition::Star => "star",
    }
}

fn outcome(o: EwaldOutcome) -> Result<(bool, serde_json::Value)> {
    Ok((o.holds(), serde_json::to_value(&o)?))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
