use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use super::{group_digest, normalize_message, BugGroup};
use crate::exec::{
    classify, input_vectors, run_pipeline, BugInjection, InterpError, PassId, Verdict, VerdictKind, DEFAULT_FUEL,
    DEFAULT_PIPELINE, ESCALATION_FACTOR,
};
use crate::genkit::rng::derive_seed;
use crate::genkit::{generate_module, GenConfig, GenError};
use crate::ir::Module;
use crate::textio::{parse_module, print_module, ParseError, EXTENSION};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Budget {
    /// Deterministic: programs `0..n` of the master seed.
    Programs(u64),
    /// Runs whole batches until the wall-clock budget is spent.
    Seconds(f64),
}

/// Everything that determines a campaign's verdicts. The master seed is
/// `config.seed`.
#[derive(Clone, Debug)]
pub struct Campaign {
    pub config: GenConfig,
    pub inject: BugInjection,
    pub budget: Budget,
    pub inputs_per_program: usize,
    pub pipeline: Vec<PassId>,
    pub fuel: u64,
    pub escalation: u64,
    /// Worker threads; 0 picks one per core.
    pub jobs: usize,
}

impl Campaign {
    pub fn new(config: GenConfig, inject: BugInjection, budget: Budget) -> Self {
        Campaign {
            config,
            inject,
            budget,
            inputs_per_program: 4,
            pipeline: DEFAULT_PIPELINE.to_vec(),
            fuel: DEFAULT_FUEL,
            escalation: ESCALATION_FACTOR,
            jobs: 0,
        }
    }

    pub fn program_seed(&self, index: u64) -> u64 {
        derive_seed(self.config.seed, index)
    }

    fn program_config(&self, seed: u64) -> GenConfig {
        GenConfig {
            seed,
            ..self.config.clone()
        }
    }

    fn check(&self, module: &Module, seed: u64) -> Result<(Vec<Verdict>, bool), InterpError> {
        let report = run_pipeline(module, &self.pipeline, self.inject);
        let verdicts = input_vectors(module, seed, self.inputs_per_program)
            .iter()
            .map(|args| classify(module, &report.module, args, self.fuel, self.escalation))
            .collect::<Result<_, _>>()?;
        Ok((verdicts, report.fixpoint))
    }
}

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("{}", .path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Generation(#[from] GenError),
    #[error("program {seed}")]
    Interp { seed: u64, source: InterpError },
    #[error("{}", .path.display())]
    Parse { path: PathBuf, source: ParseError },
    #[error("{}: file name carries no seed; expected <index>_<seed>.{EXTENSION}", .path.display())]
    NoSeed { path: PathBuf },
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> CampaignError + '_ {
    move |source| CampaignError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TimingSummary {
    pub median: Duration,
    pub p95: Duration,
}

impl TimingSummary {
    /// Nearest-rank percentiles.
    pub fn of(samples: &[Duration]) -> Self {
        if samples.is_empty() {
            return Self::default();
        }
        let mut sorted = samples.to_vec();
        sorted.sort();
        let rank = |q: f64| sorted[((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1];
        TimingSummary {
            median: rank(0.5),
            p95: rank(0.95),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CampaignReport {
    pub programs_generated: u64,
    pub inputs_per_program: usize,
    pub inject: BugInjection,
    pub verdict_counts: BTreeMap<VerdictKind, u64>,
    /// Count-descending; ties keep first-seen order.
    pub groups: Vec<BugGroup>,
    pub generation_time: TimingSummary,
    pub check_time: TimingSummary,
    /// Programs whose pipeline hit the iteration cap without a fixpoint.
    pub non_fixpoint_pipelines: u64,
    /// Cumulative `(elapsed seconds, group count)` after each program.
    pub series: Vec<(f64, usize)>,
}

impl CampaignReport {
    pub fn count(&self, kind: VerdictKind) -> u64 {
        self.verdict_counts.get(&kind).copied().unwrap_or(0)
    }

    pub fn groups_tsv(&self) -> String {
        let mut out = String::from("digest\tcount\tfirst_seed\tnormalized_message\n");
        for g in &self.groups {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}",
                g.digest,
                g.count,
                g.first_seed,
                tsv_field(&g.normalized_message)
            );
        }
        out
    }

    pub fn series_tsv(&self) -> String {
        let mut out = String::from("elapsed_seconds\tgroup_count\n");
        for (t, n) in &self.series {
            let _ = writeln!(out, "{t:.6}\t{n}");
        }
        out
    }

    pub fn report_text(&self) -> String {
        let ms = |d: Duration| d.as_secs_f64() * 1e3;
        let mut out = String::new();
        let _ = writeln!(out, "programs_generated: {}", self.programs_generated);
        let _ = writeln!(out, "inputs_per_program: {}", self.inputs_per_program);
        let _ = writeln!(out, "injection: {}", self.inject);
        for kind in VerdictKind::ALL {
            let _ = writeln!(out, "verdict.{kind}: {}", self.count(kind));
        }
        let _ = writeln!(out, "non_fixpoint_pipelines: {}", self.non_fixpoint_pipelines);
        let _ = writeln!(out, "generation_ms.median: {:.3}", ms(self.generation_time.median));
        let _ = writeln!(out, "generation_ms.p95: {:.3}", ms(self.generation_time.p95));
        let _ = writeln!(out, "check_ms.median: {:.3}", ms(self.check_time.median));
        let _ = writeln!(out, "check_ms.p95: {:.3}", ms(self.check_time.p95));
        let _ = writeln!(out, "bug_groups: {}", self.groups.len());
        for g in &self.groups {
            let _ = writeln!(
                out,
                "group {} count={} kind={} first_seed={} input={} program={}",
                g.digest,
                g.count,
                g.kind,
                g.first_seed,
                g.first_input,
                g.representative_path.display()
            );
        }
        out
    }

    fn write(&self, dir: &Path) -> Result<(), CampaignError> {
        for (name, text) in [
            ("report.txt", self.report_text()),
            ("groups.tsv", self.groups_tsv()),
            ("series.tsv", self.series_tsv()),
        ] {
            let path = dir.join(name);
            fs::write(&path, text).map_err(io_error(&path))?;
        }
        Ok(())
    }
}

/// Tabs and newlines would break the row structure.
fn tsv_field(s: &str) -> String {
    s.replace(['\t', '\n'], " ")
}

/// `programs/<index>_<seed>.rir`, relative to the output directory.
pub fn program_file_name(index: u64, seed: u64) -> PathBuf {
    Path::new("programs").join(format!("{index:06}_{seed}.{EXTENSION}"))
}

struct ProgramResult {
    index: u64,
    seed: u64,
    path: PathBuf,
    verdicts: Vec<Verdict>,
    fixpoint: bool,
    generation: Duration,
    check: Duration,
    finished: Duration,
}

fn run_one(c: &Campaign, dir: &Path, index: u64, start: Instant) -> Result<ProgramResult, CampaignError> {
    let seed = c.program_seed(index);
    let t0 = Instant::now();
    let module = generate_module(&c.program_config(seed))?;
    let generation = t0.elapsed();
    let rel = program_file_name(index, seed);
    let path = dir.join(&rel);
    fs::write(&path, print_module(&module)).map_err(io_error(&path))?;
    let t1 = Instant::now();
    let (verdicts, fixpoint) = c
        .check(&module, seed)
        .map_err(|source| CampaignError::Interp { seed, source })?;
    Ok(ProgramResult {
        index,
        seed,
        path: rel,
        verdicts,
        fixpoint,
        generation,
        check: t1.elapsed(),
        finished: start.elapsed(),
    })
}

#[derive(Default)]
struct Aggregate {
    programs: u64,
    verdict_counts: BTreeMap<VerdictKind, u64>,
    groups: Vec<BugGroup>,
    by_digest: HashMap<String, usize>,
    generation: Vec<Duration>,
    check: Vec<Duration>,
    non_fixpoint: u64,
    series: Vec<(f64, usize)>,
}

impl Aggregate {
    fn add(&mut self, r: ProgramResult) {
        self.programs += 1;
        self.generation.push(r.generation);
        self.check.push(r.check);
        self.non_fixpoint += u64::from(!r.fixpoint);
        for (input, v) in r.verdicts.iter().enumerate() {
            *self.verdict_counts.entry(v.kind()).or_default() += 1;
            if v.is_agree() {
                continue;
            }
            let normalized = normalize_message(&v.message());
            let digest = group_digest(&normalized);
            match self.by_digest.get(&digest) {
                Some(&i) => self.groups[i].count += 1,
                None => {
                    self.by_digest.insert(digest.clone(), self.groups.len());
                    self.groups.push(BugGroup {
                        digest,
                        normalized_message: normalized,
                        kind: v.kind(),
                        count: 1,
                        first_seed: r.seed,
                        first_index: r.index,
                        first_input: input,
                        representative_path: r.path.clone(),
                    });
                }
            }
        }
        // Workers finish out of order; the series follows index order.
        let t = self
            .series
            .last()
            .map_or(0.0, |&(t, _)| t)
            .max(r.finished.as_secs_f64());
        self.series.push((t, self.groups.len()));
    }

    fn report(&self, c: &Campaign) -> CampaignReport {
        let mut groups = self.groups.clone();
        groups.sort_by(|a, b| b.count.cmp(&a.count).then(a.first_index.cmp(&b.first_index)));
        let mut verdict_counts = self.verdict_counts.clone();
        for kind in VerdictKind::ALL {
            verdict_counts.entry(kind).or_default();
        }
        CampaignReport {
            programs_generated: self.programs,
            inputs_per_program: c.inputs_per_program,
            inject: c.inject,
            verdict_counts,
            groups,
            generation_time: TimingSummary::of(&self.generation),
            check_time: TimingSummary::of(&self.check),
            non_fixpoint_pipelines: self.non_fixpoint,
            series: self.series.clone(),
        }
    }
}

/// Generates, persists and differentially checks programs until the budget
/// is spent, then writes `report.txt`, `groups.tsv` and `series.tsv` into
/// `output_dir`. On an I/O failure the report of the programs finished so
/// far is still written.
pub fn run_campaign(c: &Campaign, output_dir: &Path) -> Result<CampaignReport, CampaignError> {
    let programs_dir = output_dir.join("programs");
    fs::create_dir_all(&programs_dir).map_err(io_error(&programs_dir))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(c.jobs)
        .build()
        .expect("thread pool");
    let batch = (pool.current_num_threads() as u64 * 4).max(1);
    let start = Instant::now();
    let mut agg = Aggregate::default();
    let mut next = 0u64;
    let mut failure = None;
    loop {
        let end = match c.budget {
            Budget::Programs(n) if next >= n => break,
            Budget::Programs(n) => n.min(next + batch),
            Budget::Seconds(s) if start.elapsed().as_secs_f64() >= s => break,
            Budget::Seconds(_) => next + batch,
        };
        let results: Vec<_> = pool.install(|| {
            (next..end)
                .into_par_iter()
                .map(|i| run_one(c, output_dir, i, start))
                .collect()
        });
        for r in results {
            match r {
                Ok(r) if failure.is_none() => agg.add(r),
                Ok(_) => {}
                Err(e) => {
                    failure.get_or_insert(e);
                }
            }
        }
        if failure.is_some() {
            break;
        }
        next = end;
    }
    let report = agg.report(c);
    report.write(output_dir)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(report),
    }
}

/// A program to re-check: regenerated from its seed, or read back from a
/// campaign file whose input vectors derive from `seed` or, when absent, the
/// seed in its file name.
#[derive(Clone, Debug)]
pub enum Replay<'a> {
    Seed(u64),
    File { path: &'a Path, seed: Option<u64> },
}

fn seed_from_file_name(path: &Path) -> Option<u64> {
    let stem = path.file_stem()?.to_str()?;
    stem.split_once('_')?.1.parse().ok()
}

/// Re-derives the verdicts the campaign recorded for one program.
pub fn replay(source: Replay<'_>, c: &Campaign) -> Result<Vec<Verdict>, CampaignError> {
    let (module, seed) = match source {
        Replay::Seed(seed) => (generate_module(&c.program_config(seed))?, seed),
        Replay::File { path, seed } => {
            let seed = seed
                .or_else(|| seed_from_file_name(path))
                .ok_or_else(|| CampaignError::NoSeed {
                    path: path.to_path_buf(),
                })?;
            let text = fs::read_to_string(path).map_err(io_error(path))?;
            let module = parse_module(&text).map_err(|source| CampaignError::Parse {
                path: path.to_path_buf(),
                source,
            })?;
            (module, seed)
        }
    };
    c.check(&module, seed)
        .map(|(v, _)| v)
        .map_err(|source| CampaignError::Interp { seed, source })
}
