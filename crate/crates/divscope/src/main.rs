use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use divscope::formats::{self, FormatError};
use divscope::pipeline::{default_threads, run_pipeline, PipelineConfig};
use divscope_core::align::{sw_align, ScoringScheme};
use divscope_core::assign::{classify, ReferenceDb};
use divscope_core::density::{default_radius, hexbin, parallel_coords};
use divscope_core::distmat::{pairwise_cross, pairwise_self};
use divscope_core::mds::{embed, embedding_spectrum, gram_from_distances};
use divscope_core::rsvd::{stable_rank, SolverOptions};
use divscope_core::seqio::subsample;

#[derive(Parser)]
#[command(name = "divscope", version, about = "Alignment-distance MDS maps of amplicon read sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw k reads without replacement, keeping file order.
    Subsample {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Align two sequences and print score, distance and spans.
    Align {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long = "match", default_value_t = 1, allow_hyphen_values = true)]
        match_score: i32,
        #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
        mismatch: i32,
        #[arg(long, default_value_t = -2, allow_hyphen_values = true)]
        gap: i32,
    },
    /// Pairwise alignment distances of a FASTA file (or against --ref).
    Dist {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "ref")]
        reference: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Also write a tab-separated copy with id headers.
        #[arg(long)]
        tsv: Option<PathBuf>,
        #[command(flatten)]
        threads: Threads,
    },
    /// Classical MDS of a distance matrix.
    Mds {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long, default_value_t = 50)]
        rank: usize,
        #[command(flatten)]
        solver: Solver,
        /// FASTA the matrix was built from; row indices are used otherwise.
        #[arg(long)]
        ids: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print leading Gram eigenvalues and the stable rank.
    Spectrum {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long, default_value_t = 10)]
        rank: usize,
        #[command(flatten)]
        solver: Solver,
    },
    /// Assign queries to species through the homology gap.
    Assign {
        #[arg(long)]
        queries: PathBuf,
        #[arg(long)]
        refs: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        /// Precomputed queries × refs matrix; computed when absent.
        #[arg(long)]
        cross: Option<PathBuf>,
        #[arg(long, default_value_t = 0.97)]
        gap: f64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        threads: Threads,
    },
    /// Hexagonal density grid over two embedding axes.
    Hexbin {
        #[arg(long)]
        embed: PathBuf,
        /// 1-based axis pair, e.g. `1,2`.
        #[arg(long, default_value = "1,2")]
        axes: String,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        threads: Threads,
    },
    /// Parallel-coordinates table of the leading embedding axes.
    Pcoords {
        #[arg(long)]
        embed: PathBuf,
        #[arg(long, default_value_t = 6)]
        k: usize,
        /// Assignment table or `id<TAB>label` pairs.
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Keep only rows carrying this label.
        #[arg(long)]
        species: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every stage and write a manifest.
    Pipeline {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        refs: Option<PathBuf>,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long, default_value_t = 50)]
        rank: usize,
        #[arg(long, default_value_t = 0.97)]
        gap: f64,
        #[arg(long)]
        radius: Option<f64>,
        #[command(flatten)]
        solver: Solver,
        #[arg(long)]
        outdir: PathBuf,
    },
}

#[derive(Args)]
struct Threads {
    #[arg(long, default_value_t = default_threads())]
    threads: usize,
}

#[derive(Args)]
struct Solver {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = SolverOptions::DEFAULT_OVERSAMPLING)]
    oversample: usize,
    #[arg(long, default_value_t = SolverOptions::DEFAULT_POWER_ITERS)]
    power_iters: usize,
    #[arg(long, default_value_t = default_threads())]
    threads: usize,
}

impl Solver {
    fn options(&self, rank: usize) -> SolverOptions {
        SolverOptions::new(rank)
            .oversampling(self.oversample)
            .power_iters(self.power_iters)
            .seed(self.seed)
            .threads(self.threads)
    }
}

/// Exit 3 for unreadable input, 4 for computation errors, 5 for output.
struct Failure {
    code: u8,
    msg: String,
}

fn input(e: FormatError) -> Failure {
    Failure {
        code: 3,
        msg: e.to_string(),
    }
}

fn compute(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: 4,
        msg: e.to_string(),
    }
}

fn output(e: FormatError) -> Failure {
    Failure {
        code: 5,
        msg: e.to_string(),
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        msg: msg.into(),
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    formats::write_atomic(path, text.as_bytes()).map_err(output)
}

fn parse_axes(s: &str) -> Result<(usize, usize), Failure> {
    let bad = || usage(format!("--axes expects two 1-based indices like 1,2, got {s:?}"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a == 0 || b == 0 {
        return Err(bad());
    }
    Ok((a - 1, b - 1))
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Subsample { input: path, k, seed, out } => {
            let rs = formats::read_fasta(&path).map_err(input)?;
            let sub = subsample(&rs, k, seed).map_err(compute)?;
            formats::save_fasta(&out, &sub).map_err(output)
        }
        Command::Align {
            a,
            b,
            match_score,
            mismatch,
            gap,
        } => {
            let scheme = ScoringScheme::new(match_score, mismatch, gap).map_err(|e| usage(e.to_string()))?;
            let norm = |s: &str| s.to_ascii_uppercase().replace('U', "T");
            let r = sw_align(norm(&a).as_bytes(), norm(&b).as_bytes(), &scheme).map_err(compute)?;
            println!("score\t{}", r.score);
            println!("distance\t{}", r.distance);
            println!("span_a\t{}..{}", r.span_a.start, r.span_a.end);
            println!("span_b\t{}..{}", r.span_b.start, r.span_b.end);
            Ok(())
        }
        Command::Dist {
            input: path,
            reference,
            out,
            tsv,
            threads,
        } => {
            let reads = formats::read_fasta(&path).map_err(input)?;
            let scheme = ScoringScheme::DEFAULT;
            let (d, col_ids) = match reference {
                Some(rp) => {
                    let refs = formats::read_fasta(&rp).map_err(input)?;
                    let d = pairwise_cross(&reads, &refs, &scheme, threads.threads).map_err(compute)?;
                    (d, refs.ids())
                }
                None => (pairwise_self(&reads, &scheme, threads.threads).map_err(compute)?, reads.ids()),
            };
            formats::write_matrix(&out, &d).map_err(output)?;
            if let Some(t) = tsv {
                write_text(&t, &formats::matrix_tsv(&d, &reads.ids(), &col_ids))?;
            }
            Ok(())
        }
        Command::Mds {
            dist,
            rank,
            solver,
            ids,
            out,
        } => {
            let d = formats::read_matrix(&dist).map_err(input)?;
            let names = match ids {
                Some(p) => formats::read_fasta(&p).map_err(input)?.ids(),
                None => (0..d.rows()).map(|i| i.to_string()).collect(),
            };
            if names.len() != d.rows() {
                return Err(usage(format!("{} ids for a {}-row matrix", names.len(), d.rows())));
            }
            let g = gram_from_distances(&d, solver.threads).map_err(compute)?;
            let e = embed(&g, rank, &solver.options(rank)).map_err(compute)?;
            if e.is_truncated() {
                eprintln!(
                    "warning: only {} positive eigenvalues of {} requested",
                    e.rank(),
                    e.requested_rank
                );
            }
            formats::write_embedding(&out, &e, &names).map_err(output)?;
            Ok(())
        }
        Command::Spectrum { dist, rank, solver } => {
            let d = formats::read_matrix(&dist).map_err(input)?;
            let g = gram_from_distances(&d, solver.threads).map_err(compute)?;
            let s = embedding_spectrum(&g, rank, &solver.options(rank)).map_err(compute)?;
            for (k, l) in s.eigenvalues.iter().enumerate() {
                println!("lambda{}\t{l}", k + 1);
            }
            println!("resid\t{}", s.resid);
            println!("stable_rank\t{}", stable_rank(g.as_matrix()).map_err(compute)?);
            Ok(())
        }
        Command::Assign {
            queries,
            refs,
            labels,
            cross,
            gap,
            out,
            threads,
        } => {
            let qs = formats::read_fasta(&queries).map_err(input)?;
            let rs = formats::read_fasta(&refs).map_err(input)?;
            let labels = formats::read_labels(&labels).map_err(input)?;
            let db = ReferenceDb::new(rs, labels).map_err(compute)?;
            let cross = match cross {
                Some(p) => formats::read_matrix(&p).map_err(input)?,
                None => pairwise_cross(&qs, db.reads(), &ScoringScheme::DEFAULT, threads.threads).map_err(compute)?,
            };
            let asg = classify(&qs, &db, &cross, gap).map_err(compute)?;
            write_text(&out, &formats::assignments_tsv(&asg))
        }
        Command::Hexbin {
            embed,
            axes,
            radius,
            out,
            threads,
        } => {
            let (i, j) = parse_axes(&axes)?;
            let (_, e) = formats::read_embedding(&embed).map_err(input)?;
            let radius = match radius {
                Some(r) => r,
                None if i < e.rank() && j < e.rank() => default_radius(&e.coords.column(i), &e.coords.column(j)),
                None => 1.0,
            };
            let g = hexbin(&e, (i, j), radius, threads.threads).map_err(compute)?;
            write_text(&out, &formats::hexbin_tsv(&g))
        }
        Command::Pcoords {
            embed,
            k,
            labels,
            species,
            out,
        } => {
            let (ids, e) = formats::read_embedding(&embed).map_err(input)?;
            let labels: Option<Vec<String>> = match labels {
                Some(p) => {
                    let map = formats::read_point_labels(&p).map_err(input)?;
                    Some(ids.iter().map(|id| map.get(id).cloned().unwrap_or_default()).collect())
                }
                None => None,
            };
            let t = parallel_coords(&e, &ids, k, labels.as_deref(), species.as_deref()).map_err(compute)?;
            write_text(&out, &formats::pcoords_tsv(&t))
        }
        Command::Pipeline {
            input: path,
            refs,
            labels,
            rank,
            gap,
            radius,
            solver,
            outdir,
        } => {
            let cfg = PipelineConfig {
                refs,
                labels,
                rank,
                gap,
                seed: solver.seed,
                threads: solver.threads,
                oversampling: solver.oversample,
                power_iters: solver.power_iters,
                radius,
                ..PipelineConfig::new(path, outdir)
            };
            let manifest = run_pipeline(&cfg).map_err(|e| Failure {
                code: e.exit_code() as u8,
                msg: e.to_string(),
            })?;
            for a in &manifest.artifacts {
                println!("{}\t{}\t{:.3}", a.stage.name(), a.path, a.wall_time);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("divscope: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
