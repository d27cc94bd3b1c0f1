//! movingai.com grid maps (`.map`) and scenario files (`.scen`).

use std::fmt::Write as _;
use std::io::BufRead;
use std::path::Path;

use nrfmapf_core::{solution_costs, AgentPath, Graph, MapfInstance, VertexId};

use crate::{Error, Result};

/// A parsed grid. Passable cells are numbered densely in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    height: usize,
    width: usize,
    /// Terrain characters as read, row-major.
    terrain: Vec<u8>,
    vertex_index: Vec<Option<VertexId>>,
    cells: Vec<(usize, usize)>,
}

fn is_passable(ch: u8) -> Option<bool> {
    match ch {
        b'.' | b'G' | b'S' => Some(true),
        b'@' | b'O' | b'T' | b'W' => Some(false),
        _ => None,
    }
}

impl GridMap {
    /// Builds a map from terrain rows; every row must have the same length.
    pub fn from_rows(rows: &[&str]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let mut terrain = Vec::with_capacity(height * width);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::parse(i + 1, format!("row has {} cells, expected {width}", row.len())));
            }
            for (c, ch) in row.bytes().enumerate() {
                if is_passable(ch).is_none() {
                    return Err(Error::parse(i + 1, format!("unknown terrain {:?} at column {c}", ch as char)));
                }
            }
            terrain.extend_from_slice(row.as_bytes());
        }
        Ok(Self::from_terrain(height, width, terrain))
    }

    fn from_terrain(height: usize, width: usize, terrain: Vec<u8>) -> Self {
        let mut vertex_index = vec![None; height * width];
        let mut cells = Vec::new();
        for (i, &ch) in terrain.iter().enumerate() {
            if is_passable(ch) == Some(true) {
                vertex_index[i] = Some(cells.len());
                cells.push((i / width, i % width));
            }
        }
        GridMap { height, width, terrain, vertex_index, cells }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn is_passable(&self, row: usize, col: usize) -> bool {
        self.vertex(row, col).is_some()
    }

    /// Vertex id of a passable in-bounds cell.
    pub fn vertex(&self, row: usize, col: usize) -> Option<VertexId> {
        if row < self.height && col < self.width {
            self.vertex_index[row * self.width + col]
        } else {
            None
        }
    }

    /// `(row, col)` of vertex `v`.
    pub fn cell(&self, v: VertexId) -> (usize, usize) {
        self.cells[v]
    }

    pub fn passable_count(&self) -> usize {
        self.cells.len()
    }

    /// 4-connected graph over the passable cells.
    pub fn graph(&self) -> Graph {
        Graph::grid(self.height, self.width, |r, c| self.is_passable(r, c))
    }

    /// The map in movingai format.
    pub fn render(&self) -> String {
        let mut out = format!("type octile\nheight {}\nwidth {}\nmap\n", self.height, self.width);
        for r in 0..self.height {
            let row = &self.terrain[r * self.width..(r + 1) * self.width];
            out.push_str(std::str::from_utf8(row).expect("terrain is ASCII"));
            out.push('\n');
        }
        out
    }
}

fn header_value(line: Option<(usize, String)>, key: &str, at: usize) -> Result<usize> {
    let (n, text) = line.ok_or_else(|| Error::parse(at, format!("missing `{key}` line")))?;
    text.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| Error::parse(n, format!("expected `{key} <n>`, found {text:?}")))
}

fn numbered_lines(reader: impl BufRead) -> impl Iterator<Item = Result<(usize, String)>> {
    reader.lines().enumerate().map(|(i, l)| {
        l.map(|mut s| {
            if s.ends_with('\r') {
                s.pop();
            }
            (i + 1, s)
        })
        .map_err(|e| Error::parse(i + 1, e.to_string()))
    })
}

/// Parses a movingai map. Errors carry the 1-based line number.
pub fn parse_map(reader: impl BufRead) -> Result<GridMap> {
    let mut lines = numbered_lines(reader);
    let mut next = || lines.next().transpose();
    match next()? {
        Some((_, l)) if l.trim_end() == "type octile" => {}
        Some((n, l)) => return Err(Error::parse(n, format!("expected `type octile`, found {l:?}"))),
        None => return Err(Error::parse(1, "empty map file")),
    }
    let height = header_value(next()?, "height", 2)?;
    let width = header_value(next()?, "width", 3)?;
    match next()? {
        Some((_, l)) if l.trim_end() == "map" => {}
        Some((n, l)) => return Err(Error::parse(n, format!("expected `map`, found {l:?}"))),
        None => return Err(Error::parse(4, "missing `map` line")),
    }
    let mut terrain = Vec::with_capacity(height * width);
    for r in 0..height {
        let (n, row) = next()?.ok_or_else(|| Error::parse(5 + r, format!("expected {height} rows, found {r}")))?;
        if row.len() != width {
            return Err(Error::parse(n, format!("row has {} cells, expected {width}", row.len())));
        }
        for (c, ch) in row.bytes().enumerate() {
            if is_passable(ch).is_none() {
                return Err(Error::parse(n, format!("unknown terrain {:?} at column {c}", ch as char)));
            }
        }
        terrain.extend_from_slice(row.as_bytes());
    }
    while let Some((n, extra)) = next()? {
        if !extra.trim().is_empty() {
            return Err(Error::parse(n, format!("more than {height} rows")));
        }
    }
    Ok(GridMap::from_terrain(height, width, terrain))
}

pub fn load_map(path: impl AsRef<Path>) -> Result<GridMap> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_map(std::io::BufReader::new(file))
}

/// One scenario record. Coordinates are `(row, col)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioEntry {
    pub bucket: i64,
    pub map_name: String,
    pub map_width: usize,
    pub map_height: usize,
    pub start: (usize, usize),
    pub goal: (usize, usize),
    pub reference_length: f64,
}

fn parse_entry(n: usize, line: &str) -> Result<ScenarioEntry> {
    let fields: Vec<&str> = if line.contains('\t') { line.split('\t').collect() } else { line.split_whitespace().collect() };
    if fields.len() != 9 {
        return Err(Error::parse(n, format!("expected 9 fields, found {}", fields.len())));
    }
    let int = |i: usize, name: &str| -> Result<usize> {
        fields[i].trim().parse().map_err(|_| Error::parse(n, format!("bad {name} {:?}", fields[i])))
    };
    Ok(ScenarioEntry {
        bucket: fields[0].trim().parse().map_err(|_| Error::parse(n, format!("bad bucket {:?}", fields[0])))?,
        map_name: fields[1].to_string(),
        map_width: int(2, "map width")?,
        map_height: int(3, "map height")?,
        start: (int(5, "start y")?, int(4, "start x")?),
        goal: (int(7, "goal y")?, int(6, "goal x")?),
        reference_length: fields[8]
            .trim()
            .parse()
            .map_err(|_| Error::parse(n, format!("bad optimal length {:?}", fields[8])))?,
    })
}

/// Parses a scenario file; entries come back in file order.
pub fn parse_scen(reader: impl BufRead) -> Result<Vec<ScenarioEntry>> {
    let mut lines = numbered_lines(reader);
    match lines.next().transpose()? {
        Some((_, l)) if matches!(l.trim(), "version 1" | "version 1.0") => {}
        Some((n, l)) => return Err(Error::parse(n, format!("expected `version 1`, found {l:?}"))),
        None => return Err(Error::parse(1, "empty scenario file")),
    }
    let mut entries = Vec::new();
    for line in lines {
        let (n, text) = line?;
        if text.trim().is_empty() {
            continue;
        }
        entries.push(parse_entry(n, &text)?);
    }
    Ok(entries)
}

pub fn load_scen(path: impl AsRef<Path>) -> Result<Vec<ScenarioEntry>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_scen(std::io::BufReader::new(file))
}

/// Scenario entries in movingai format (tab separated, `version 1` header).
pub fn render_scen(entries: &[ScenarioEntry]) -> String {
    let mut out = String::from("version 1\n");
    for e in entries {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.8}",
            e.bucket, e.map_name, e.map_width, e.map_height, e.start.1, e.start.0, e.goal.1, e.goal.0, e.reference_length
        )
        .unwrap();
    }
    out
}

/// `count` random entries on `map` with pairwise-distinct starts and
/// pairwise-distinct goals, each goal reachable from its start. The
/// reference length is the 4-connected distance and the bucket is that
/// distance divided by 4.
pub fn random_scenario(map: &GridMap, map_name: &str, count: usize, seed: u64) -> Result<Vec<ScenarioEntry>> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    let n = map.passable_count();
    if count > n {
        return Err(Error::Config(format!("{count} entries requested but the map has {n} free cells")));
    }
    let graph = map.graph();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<VertexId> = (0..n).collect();
    starts.shuffle(&mut rng);
    let mut goals = starts.clone();
    goals.shuffle(&mut rng);
    let mut used_goal = vec![false; n];
    let mut entries = Vec::with_capacity(count);
    for &s in &starts {
        if entries.len() == count {
            break;
        }
        let dist = graph.shortest_dists(s);
        let Some(&g) = goals.iter().find(|&&g| !used_goal[g] && dist[g] != nrfmapf_core::UNREACHABLE) else {
            continue;
        };
        used_goal[g] = true;
        entries.push(ScenarioEntry {
            bucket: i64::from(dist[g] / 4),
            map_name: map_name.to_string(),
            map_width: map.width(),
            map_height: map.height(),
            start: map.cell(s),
            goal: map.cell(g),
            reference_length: f64::from(dist[g]),
        });
    }
    if entries.len() < count {
        return Err(Error::Config(format!("only {} reachable start/goal pairs found", entries.len())));
    }
    Ok(entries)
}

/// Instance whose agent `i` takes scenario entry `i`, for `i < k`.
pub fn build_instance(map: &GridMap, entries: &[ScenarioEntry], k: usize) -> Result<MapfInstance> {
    if k > entries.len() {
        return Err(Error::Config(format!("{k} agents requested but the scenario has {} entries", entries.len())));
    }
    let mut starts = Vec::with_capacity(k);
    let mut goals = Vec::with_capacity(k);
    for (i, e) in entries[..k].iter().enumerate() {
        let locate = |(r, c): (usize, usize), what: &str| {
            map.vertex(r, c).ok_or_else(|| Error::BadEntry {
                entry: i,
                message: format!("{what} ({r}, {c}) is outside the map or blocked"),
            })
        };
        starts.push(locate(e.start, "start")?);
        goals.push(locate(e.goal, "goal")?);
    }
    for (what, vs) in [("start", &starts), ("goal", &goals)] {
        for j in 0..vs.len() {
            if let Some(i) = vs[..j].iter().position(|&v| v == vs[j]) {
                let (row, col) = map.cell(vs[j]);
                return Err(Error::DuplicateEntry { first: i, second: j, what, row, col });
            }
        }
    }
    Ok(MapfInstance::new(map.graph(), starts, goals)?)
}

/// Solution text: a `soc <n> makespan <m>` header, then one line per agent
/// listing its `(row,col)` cell at every step from 0 to the makespan.
pub fn render_solution(map: &GridMap, paths: &[AgentPath]) -> String {
    let (soc, makespan) = solution_costs(paths);
    let mut out = format!("soc {soc} makespan {makespan}\n");
    for (i, p) in paths.iter().enumerate() {
        write!(out, "agent {i}:").unwrap();
        for t in 0..=makespan as usize {
            let (r, c) = map.cell(p.at(t));
            write!(out, " ({r},{c})").unwrap();
        }
        out.push('\n');
    }
    out
}
