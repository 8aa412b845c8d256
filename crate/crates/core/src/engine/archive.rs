//! Observation records, the append-only archive file and the in-memory Pareto archive.
//!
//! The file holds one JSON object per line. Floats are written in shortest round-trip form
//! and parsed exactly, so records survive a write/read cycle bit for bit.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engine::Orientation;
use crate::error::{Error, Result};
use crate::pareto::{dominates_slice, extract_front, ObjectiveVector, ParetoFront};

pub const ARCHIVE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    WarmStart,
    Optimized,
}

/// One evaluated weight vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Observation {
    pub version: u32,
    pub iteration: usize,
    pub phase: Phase,
    pub weights: Vec<f64>,
    /// Objective values as the evaluator reported them.
    pub objectives_raw: Vec<f64>,
    pub orientation: Vec<Orientation>,
    pub eval_wall_seconds: f64,
    pub fit_wall_seconds: f64,
    pub propose_wall_seconds: f64,
    pub seed: u64,
}

impl Observation {
    /// Maximise-all objective vector.
    pub fn canonical(&self) -> Result<ObjectiveVector> {
        ObjectiveVector::new(Orientation::canonicalize(&self.orientation, &self.objectives_raw))
    }

    fn check(&self) -> std::result::Result<(), String> {
        if self.version != ARCHIVE_VERSION {
            return Err(format!("unsupported record version {}", self.version));
        }
        if self.objectives_raw.len() != self.orientation.len() {
            return Err(format!(
                "{} objectives with {} orientations",
                self.objectives_raw.len(),
                self.orientation.len()
            ));
        }
        if self.objectives_raw.len() < 2 {
            return Err("fewer than 2 objectives".into());
        }
        if self.weights.iter().chain(&self.objectives_raw).any(|v| !v.is_finite()) {
            return Err("non-finite weight or objective".into());
        }
        let times = [self.eval_wall_seconds, self.fit_wall_seconds, self.propose_wall_seconds];
        if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err("negative or non-finite timing".into());
        }
        Ok(())
    }

    pub fn to_json_line(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::invalid(format!("serialize: {e}")))
    }

    pub fn from_json_line(line: &str) -> std::result::Result<Self, String> {
        let obs: Self = serde_json::from_str(line).map_err(|e| e.to_string())?;
        obs.check()?;
        Ok(obs)
    }
}

/// A record that could not be read.
#[derive(Debug, Clone, PartialEq)]
pub struct LineError {
    /// 1-based line number.
    pub line: usize,
    pub message: String,
}

/// Everything readable from an archive file.
#[derive(Debug, Clone, Default)]
pub struct ArchiveContents {
    pub observations: Vec<Observation>,
    pub errors: Vec<LineError>,
    /// Byte offset where an unterminated final line starts, if there is one. Such a line is
    /// the remains of an interrupted write.
    pub partial_tail: Option<u64>,
}

/// Read every record, collecting corrupt lines instead of stopping at them. Iteration
/// numbers must increase strictly; a record that breaks the order is reported as corrupt.
pub fn read_archive(path: &Path) -> Result<ArchiveContents> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut out = ArchiveContents::default();
    let mut offset = 0u64;
    let mut buf = String::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        let n = reader.read_line(&mut buf)?;
        if n == 0 {
            break;
        }
        line_no += 1;
        let terminated = buf.ends_with('\n');
        let text = buf.trim_end_matches(['\n', '\r']);
        if text.trim().is_empty() {
            offset += n as u64;
            continue;
        }
        let parsed = Observation::from_json_line(text).and_then(|obs| {
            match out.observations.last() {
                Some(prev) if obs.iteration <= prev.iteration => Err(format!(
                    "iteration {} does not follow {}",
                    obs.iteration, prev.iteration
                )),
                _ => Ok(obs),
            }
        });
        if !terminated {
            out.partial_tail = Some(offset);
            out.errors.push(LineError { line: line_no, message: "unterminated final record".into() });
        } else {
            match parsed {
                Ok(obs) => out.observations.push(obs),
                Err(message) => out.errors.push(LineError { line: line_no, message }),
            }
        }
        offset += n as u64;
    }
    Ok(out)
}

/// Append-only writer; each record is flushed and synced before `append` returns.
#[derive(Debug)]
pub struct ArchiveWriter {
    file: File,
    path: PathBuf,
}

impl ArchiveWriter {
    /// Open for appending, creating the file if needed.
    pub fn open(path: &Path) -> Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self { file, path: path.to_path_buf() })
    }

    /// Drop everything from `offset` on (used to discard an interrupted final write).
    pub fn truncate_to(&mut self, offset: u64) -> Result<()> {
        self.file.set_len(offset)?;
        self.file.seek(SeekFrom::End(0))?;
        self.file.sync_all()?;
        Ok(())
    }

    pub fn append(&mut self, obs: &Observation) -> Result<()> {
        let mut line = obs.to_json_line()?;
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.flush()?;
        self.file.sync_data()?;
        Ok(())
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

/// Exclusive ownership of an archive, held through `<archive>.lock`.
#[derive(Debug)]
pub struct ArchiveLock {
    path: PathBuf,
}

impl ArchiveLock {
    pub fn lock_path(archive: &Path) -> PathBuf {
        let mut name = archive.as_os_str().to_owned();
        name.push(".lock");
        PathBuf::from(name)
    }

    /// Take the lock. A lock left by a process that no longer exists is taken over.
    pub fn acquire(archive: &Path) -> Result<Self> {
        let path = Self::lock_path(archive);
        for _ in 0..2 {
            match OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(mut f) => {
                    writeln!(f, "{}", std::process::id())?;
                    f.sync_all()?;
                    return Ok(Self { path });
                }
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                    let mut text = String::new();
                    File::open(&path)?.read_to_string(&mut text)?;
                    let stale = match text.trim().parse::<u32>() {
                        Ok(pid) => !process_alive(pid),
                        Err(_) => false,
                    };
                    if !stale {
                        return Err(Error::Locked(path));
                    }
                    log::warn!("removing stale lock {}", path.display());
                    std::fs::remove_file(&path)?;
                }
                Err(e) => return Err(e.into()),
            }
        }
        Err(Error::Locked(path))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl Drop for ArchiveLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}

fn process_alive(pid: u32) -> bool {
    if pid == std::process::id() {
        return true;
    }
    if cfg!(target_os = "linux") {
        Path::new(&format!("/proc/{pid}")).exists()
    } else {
        // Without a cheap liveness probe, assume the owner is still running.
        true
    }
}

/// Observations with an incrementally maintained set of non-dominated indices.
#[derive(Debug, Clone, Default)]
pub struct ParetoArchive {
    observations: Vec<Observation>,
    canonical: Vec<ObjectiveVector>,
    front: Vec<usize>,
}

impl ParetoArchive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_observations(observations: Vec<Observation>) -> Result<Self> {
        let mut a = Self::new();
        for obs in observations {
            a.push(obs)?;
        }
        Ok(a)
    }

    pub fn push(&mut self, obs: Observation) -> Result<()> {
        let c = obs.canonical()?;
        if let Some(first) = self.canonical.first() {
            if first.dim() != c.dim() {
                return Err(Error::DimensionMismatch { expected: first.dim(), found: c.dim() });
            }
        }
        if let Some(last) = self.observations.last() {
            if obs.iteration <= last.iteration {
                return Err(Error::invalid(format!(
                    "iteration {} does not follow {}",
                    obs.iteration, last.iteration
                )));
            }
        }
        let idx = self.observations.len();
        let v = c.values();
        let covered = self.front.iter().any(|&i| {
            let q = self.canonical[i].values();
            q == v || dominates_slice(q, v)
        });
        if !covered {
            let canonical = &self.canonical;
            self.front.retain(|&i| !dominates_slice(v, canonical[i].values()));
            self.front.push(idx);
        }
        self.observations.push(obs);
        self.canonical.push(c);
        Ok(())
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn canonical(&self) -> &[ObjectiveVector] {
        &self.canonical
    }

    /// Indices of non-dominated observations in ascending order; among identical objective
    /// vectors only the earliest is listed.
    pub fn front_indices(&self) -> &[usize] {
        &self.front
    }

    pub fn front(&self) -> Result<ParetoFront> {
        let pts: Vec<ObjectiveVector> =
            self.front.iter().map(|&i| self.canonical[i].clone()).collect();
        if pts.is_empty() {
            return Ok(ParetoFront::empty(0));
        }
        extract_front(&pts)
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pareto::front_indices;
    use proptest::prelude::*;

    fn obs(iteration: usize, objectives: Vec<f64>) -> Observation {
        Observation {
            version: ARCHIVE_VERSION,
            iteration,
            phase: Phase::Optimized,
            weights: vec![0.1 * iteration as f64, 1.0 / 3.0],
            orientation: vec![Orientation::Maximize; objectives.len()],
            objectives_raw: objectives,
            eval_wall_seconds: 0.25,
            fit_wall_seconds: 1e-7,
            propose_wall_seconds: 0.0,
            seed: u64::MAX - iteration as u64,
        }
    }

    #[test]
    fn json_roundtrip_is_bit_exact() {
        let mut o = obs(3, vec![0.1 + 0.2, -1e-300]);
        o.weights = vec![f64::MIN_POSITIVE, 1.0 - f64::EPSILON, 123456.789e-17];
        let line = o.to_json_line().unwrap();
        let back = Observation::from_json_line(&line).unwrap();
        assert_eq!(back, o);
        for (a, b) in back.weights.iter().zip(&o.weights) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert!(line.contains("\"phase\":\"optimized\""));
        assert!(line.contains("\"orientation\":[\"maximize\",\"maximize\"]"));
    }

    #[test]
    fn reader_reports_corrupt_lines_and_partial_tail() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.ndjson");
        let mut w = ArchiveWriter::open(&path).unwrap();
        w.append(&obs(0, vec![1.0, 2.0])).unwrap();
        w.append(&obs(1, vec![2.0, 1.0])).unwrap();
        drop(w);
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        writeln!(f, "{{not json").unwrap();
        writeln!(f, "{}", obs(1, vec![0.0, 0.0]).to_json_line().unwrap()).unwrap();
        writeln!(f, "{}", obs(4, vec![3.0, 3.0]).to_json_line().unwrap()).unwrap();
        write!(f, "{{\"version\":1,\"iter").unwrap();
        drop(f);

        let c = read_archive(&path).unwrap();
        assert_eq!(c.observations.len(), 3);
        let lines: Vec<usize> = c.errors.iter().map(|e| e.line).collect();
        assert_eq!(lines, [3, 4, 6]);
        let tail = c.partial_tail.unwrap();

        let mut w = ArchiveWriter::open(&path).unwrap();
        w.truncate_to(tail).unwrap();
        drop(w);
        let c = read_archive(&path).unwrap();
        assert!(c.partial_tail.is_none());
        assert_eq!(c.errors.len(), 2);
    }

    #[test]
    fn lock_is_exclusive_and_stale_locks_are_taken_over() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.ndjson");
        let lock = ArchiveLock::acquire(&path).unwrap();
        assert!(matches!(ArchiveLock::acquire(&path), Err(Error::Locked(_))));
        drop(lock);
        assert!(!ArchiveLock::lock_path(&path).exists());

        if cfg!(target_os = "linux") {
            // PIDs above the kernel maximum never exist.
            std::fs::write(ArchiveLock::lock_path(&path), "4194305\n").unwrap();
            let _lock = ArchiveLock::acquire(&path).unwrap();
        }
    }

    #[test]
    fn duplicates_keep_the_earliest() {
        let a = ParetoArchive::from_observations(vec![
            obs(0, vec![1.0, 1.0]),
            obs(1, vec![1.0, 1.0]),
            obs(2, vec![0.0, 2.0]),
        ])
        .unwrap();
        assert_eq!(a.front_indices(), &[0, 2]);
    }

    #[test]
    fn iterations_must_increase() {
        let mut a = ParetoArchive::new();
        a.push(obs(2, vec![1.0, 1.0])).unwrap();
        assert!(a.push(obs(2, vec![2.0, 1.0])).is_err());
    }

    proptest! {
        #[test]
        fn incremental_front_matches_batch(
            pts in prop::collection::vec((0u8..6, 0u8..6), 1..40)
        ) {
            let mut a = ParetoArchive::new();
            for (i, (x, y)) in pts.iter().enumerate() {
                a.push(obs(i, vec![*x as f64, *y as f64])).unwrap();
                let batch = front_indices(a.canonical()).unwrap();
                prop_assert_eq!(a.front_indices(), batch.as_slice());
            }
        }
    }
}
