//! Benchmark suites over movingai maps, CSV run records and cactus data.
//!
//! Instance `i` of a suite is scenario file `i`; an agent count `k` takes
//! the first `k` entries of that file.

use std::collections::BTreeMap;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use nrfmapf_core::{ModelKind, ReportOutcome};
use serde::{Deserialize, Serialize};

use crate::movingai::{self, GridMap, ScenarioEntry};
use crate::{Error, Result, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    Solved,
    Timeout,
    Error,
}

/// One CSV row. Counters are empty for `Error` rows and `cost` is empty
/// unless `Solved`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub map: String,
    pub agents: usize,
    pub instance: usize,
    #[serde(with = "kind_name")]
    pub model: ModelKind,
    pub outcome: Outcome,
    pub cost: Option<u64>,
    pub wall_time_s: f64,
    pub initial_clauses: Option<usize>,
    pub total_clauses: Option<usize>,
    pub refinements: Option<usize>,
    pub sat_calls: Option<usize>,
}

mod kind_name {
    use nrfmapf_core::ModelKind;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(kind: &ModelKind, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(kind.name())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ModelKind, D::Error> {
        let name = String::deserialize(d)?;
        ModelKind::from_name(&name).ok_or_else(|| D::Error::custom(format!("unknown model {name:?}")))
    }
}

/// Columns that depend on the machine rather than the computation.
pub const TIME_COLUMNS: &[&str] = &["wall_time_s"];

#[derive(Debug, Clone)]
pub struct Suite {
    pub map: PathBuf,
    pub scenarios: Vec<PathBuf>,
    pub agents: RangeInclusive<usize>,
    pub kinds: Vec<ModelKind>,
    pub config: RunConfig,
    /// Worker threads; rows are still written in suite order.
    pub jobs: usize,
}

struct Task {
    agents: usize,
    instance: usize,
    kind: ModelKind,
}

fn map_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

/// Runs one solve and turns it into a record. Never fails: solver errors
/// become `Error` rows.
pub fn run_one(
    map: &GridMap,
    map_name: &str,
    entries: &[ScenarioEntry],
    agents: usize,
    instance: usize,
    kind: ModelKind,
    config: &RunConfig,
) -> RunRecord {
    let mut record = RunRecord {
        map: map_name.to_string(),
        agents,
        instance,
        model: kind,
        outcome: Outcome::Error,
        cost: None,
        wall_time_s: 0.0,
        initial_clauses: None,
        total_clauses: None,
        refinements: None,
        sat_calls: None,
    };
    let started = std::time::Instant::now();
    let report = movingai::build_instance(map, entries, agents).and_then(|inst| crate::solve(&inst, kind, config));
    record.wall_time_s = started.elapsed().as_secs_f64();
    match report {
        Err(e) => log::warn!("{map_name} agents={agents} instance={instance} {kind}: {e}"),
        Ok(r) => {
            record.outcome = match r.outcome {
                ReportOutcome::Solved(_) => {
                    record.cost = Some(r.soc);
                    Outcome::Solved
                }
                ReportOutcome::Timeout | ReportOutcome::SocLimit => Outcome::Timeout,
            };
            record.initial_clauses = Some(r.initial_clauses);
            record.total_clauses = Some(r.total_clauses);
            record.refinements = Some(r.refinements);
            record.sat_calls = Some(r.sat_calls);
        }
    }
    record
}

/// Runs every agent count × scenario × model of `suite`, appending each row
/// to `out` (if given) as soon as it and all earlier rows are done.
pub fn run_suite(suite: &Suite, out: Option<&Path>) -> Result<Vec<RunRecord>> {
    let map = movingai::load_map(&suite.map)?;
    let name = map_name(&suite.map);
    let scens: Vec<Vec<ScenarioEntry>> = suite.scenarios.iter().map(movingai::load_scen).collect::<Result<_>>()?;
    for (path, entries) in suite.scenarios.iter().zip(&scens) {
        if *suite.agents.end() > entries.len() {
            return Err(Error::Config(format!(
                "{} has {} entries, fewer than {} agents",
                path.display(),
                entries.len(),
                suite.agents.end()
            )));
        }
    }
    let mut tasks = Vec::new();
    for agents in suite.agents.clone() {
        for instance in 0..scens.len() {
            for &kind in &suite.kinds {
                tasks.push(Task { agents, instance, kind });
            }
        }
    }

    let mut writer = match out {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
            Some(csv::Writer::from_writer(file))
        }
        None => None,
    };
    let mut records = Vec::with_capacity(tasks.len());
    let mut emit = |r: RunRecord| -> Result<()> {
        if let Some(w) = writer.as_mut() {
            w.serialize(&r)?;
            w.flush().map_err(|e| Error::io(out.unwrap(), e))?;
        }
        records.push(r);
        Ok(())
    };
    let run = |t: &Task| run_one(&map, &name, &scens[t.instance], t.agents, t.instance, t.kind, &suite.config);

    if suite.jobs <= 1 {
        for t in &tasks {
            emit(run(t))?;
        }
    } else {
        let next = AtomicUsize::new(0);
        std::thread::scope(|scope| -> Result<()> {
            let (tx, rx) = mpsc::channel();
            for _ in 0..suite.jobs {
                let tx = tx.clone();
                let (next, tasks, run) = (&next, &tasks, &run);
                scope.spawn(move || loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= tasks.len() || tx.send((i, run(&tasks[i]))).is_err() {
                        break;
                    }
                });
            }
            drop(tx);
            let mut pending = BTreeMap::new();
            let mut written = 0;
            for (i, r) in rx {
                pending.insert(i, r);
                while let Some(r) = pending.remove(&written) {
                    emit(r)?;
                    written += 1;
                }
            }
            Ok(())
        })?;
    }
    if let Some(w) = writer.as_mut() {
        w.flush().map_err(|e| Error::io(out.unwrap(), e))?;
    }
    Ok(records)
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<RunRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    Ok(reader.deserialize().collect::<std::result::Result<_, _>>()?)
}

pub fn write_records(mut out: impl Write, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(&mut out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(())
}

/// `(rank, runtime)` of the solved runs of `kind`, fastest first, rank from 1.
pub fn emit_cactus(records: &[RunRecord], kind: ModelKind) -> Vec<(usize, f64)> {
    let mut times: Vec<f64> = records
        .iter()
        .filter(|r| r.model == kind && r.outcome == Outcome::Solved)
        .map(|r| r.wall_time_s)
        .collect();
    times.sort_by(f64::total_cmp);
    times.into_iter().enumerate().map(|(i, t)| (i + 1, t)).collect()
}

pub fn write_cactus(out: impl Write, rows: &[(usize, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rank", "runtime"])?;
    for (rank, t) in rows {
        w.write_record([rank.to_string(), t.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(())
}

/// Per model and agent count totals over a set of records.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Aggregate {
    pub runs: usize,
    pub solved: usize,
    pub cost: u64,
    pub initial_clauses: usize,
    pub total_clauses: usize,
    pub refinements: usize,
    pub wall_time_s: f64,
}

pub fn aggregate(records: &[RunRecord]) -> BTreeMap<(ModelKind, usize), Aggregate> {
    let mut out: BTreeMap<(ModelKind, usize), Aggregate> = BTreeMap::new();
    for r in records {
        let a = out.entry((r.model, r.agents)).or_default();
        a.runs += 1;
        if r.outcome == Outcome::Solved {
            a.solved += 1;
        }
        a.cost += r.cost.unwrap_or(0);
        a.initial_clauses += r.initial_clauses.unwrap_or(0);
        a.total_clauses += r.total_clauses.unwrap_or(0);
        a.refinements += r.refinements.unwrap_or(0);
        a.wall_time_s += r.wall_time_s;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(model: ModelKind, outcome: Outcome, t: f64) -> RunRecord {
        RunRecord {
            map: "m".into(),
            agents: 1,
            instance: 0,
            model,
            outcome,
            cost: (outcome == Outcome::Solved).then_some(3),
            wall_time_s: t,
            initial_clauses: Some(10),
            total_clauses: Some(12),
            refinements: Some(1),
            sat_calls: Some(2),
        }
    }

    #[test]
    fn cactus_sorts_and_ranks() {
        let rs: Vec<_> = [3.0, 1.0, 2.0].iter().map(|&t| record(ModelKind::NonRefined, Outcome::Solved, t)).collect();
        assert_eq!(emit_cactus(&rs, ModelKind::NonRefined), vec![(1, 1.0), (2, 2.0), (3, 3.0)]);
        assert!(emit_cactus(&rs, ModelKind::Complete).is_empty());
    }

    #[test]
    fn cactus_skips_unsolved() {
        let rs = vec![
            record(ModelKind::Complete, Outcome::Timeout, 1.0),
            record(ModelKind::Complete, Outcome::Error, 0.5),
            record(ModelKind::Complete, Outcome::Solved, 0.7),
        ];
        assert_eq!(emit_cactus(&rs, ModelKind::Complete), vec![(1, 0.7)]);
        let mut buf = Vec::new();
        write_cactus(&mut buf, &emit_cactus(&rs[..2], ModelKind::Complete)).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "rank,runtime\n");
    }

    #[test]
    fn csv_roundtrip() {
        let rs = vec![
            record(ModelKind::ConflictLazy, Outcome::Solved, 0.1 + 0.2),
            record(ModelKind::NonRefined, Outcome::Timeout, 1e-9),
        ];
        let mut buf = Vec::new();
        write_records(&mut buf, &rs).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(
            "map,agents,instance,model,outcome,cost,wall_time_s,initial_clauses,total_clauses,refinements,sat_calls\n"
        ));
        let back: Vec<RunRecord> =
            csv::Reader::from_reader(text.as_bytes()).deserialize().collect::<std::result::Result<_, _>>().unwrap();
        assert_eq!(back, rs);
    }
}
