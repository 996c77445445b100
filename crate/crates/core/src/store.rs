//! File-backed snapshot store.
//!
//! Layout under the root:
//!
//! ```text
//! <root>/<urlhash>/<captured_at>.json   one snapshot each, schema_version 1
//! <root>/<urlhash>/index.json           advisory, rebuilt whenever it disagrees
//! <root>/<urlhash>/.lock                advisory lock: shared reads, exclusive ingest
//! ```
//!
//! Snapshots are written to a `.tmp` file, synced and renamed into place,
//! so a reader sees either the whole snapshot or nothing.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use fs2::FileExt;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use xxhash_rust::xxh3::xxh3_128;

use crate::evolution::{EvolutionTrack, TrackError, TrackIndex};
use crate::model::{PageSnapshot, Timestamp};

pub const SCHEMA_VERSION: u32 = 1;
const INDEX_FILE: &str = "index.json";
const LOCK_FILE: &str = ".lock";
const TMP_SUFFIX: &str = ".tmp";

/// Set to `abort-before-commit` to kill the process after a snapshot's
/// temp file is written but before it is renamed into place.
pub const FAULT_ENV: &str = "MUSEUM_FAULT_INJECT";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error(transparent)]
    Track(#[from] TrackError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {reason}")]
    Corrupt { path: PathBuf, reason: String },
}

impl StoreError {
    fn io(path: &Path, source: io::Error) -> Self {
        StoreError::Io {
            path: path.to_owned(),
            source,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SnapshotFile {
    schema_version: u32,
    #[serde(flatten)]
    snapshot: PageSnapshot,
}

#[derive(Serialize, Deserialize, PartialEq, Eq)]
struct IndexFile {
    schema_version: u32,
    url: String,
    #[serde(flatten)]
    index: TrackIndex,
}

/// Directory name for a URL's track.
pub fn url_key(url: &str) -> String {
    format!("{:032x}", xxh3_128(url.as_bytes()))
}

#[derive(Debug, Clone)]
pub struct TrackStore {
    root: PathBuf,
}

enum LockMode {
    Shared,
    Exclusive,
}

struct TrackLock(File);

impl Drop for TrackLock {
    fn drop(&mut self) {
        let _ = FileExt::unlock(&self.0);
    }
}

impl TrackStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        TrackStore { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn track_dir(&self, url: &str) -> PathBuf {
        self.root.join(url_key(url))
    }

    fn lock(&self, dir: &Path, mode: LockMode) -> Result<Option<TrackLock>, StoreError> {
        let path = dir.join(LOCK_FILE);
        let file = match mode {
            LockMode::Exclusive => OpenOptions::new()
                .create(true)
                .truncate(false)
                .write(true)
                .open(&path)
                .map_err(|e| StoreError::io(&path, e))?,
            // Readers on a read-only store go without the lock.
            LockMode::Shared => match OpenOptions::new().create(true).truncate(false).write(true).open(&path) {
                Ok(f) => f,
                Err(_) => match File::open(&path) {
                    Ok(f) => f,
                    Err(_) => return Ok(None),
                },
            },
        };
        match mode {
            LockMode::Shared => FileExt::lock_shared(&file),
            LockMode::Exclusive => FileExt::lock_exclusive(&file),
        }
        .map_err(|e| StoreError::io(&path, e))?;
        Ok(Some(TrackLock(file)))
    }

    pub fn contains(&self, url: &str) -> bool {
        self.load(url).map(|t| !t.is_empty()).unwrap_or(false)
    }

    /// Loads a URL's track, empty if it was never ingested. Rewrites the
    /// index file when it is missing or stale.
    pub fn load(&self, url: &str) -> Result<EvolutionTrack, StoreError> {
        let dir = self.track_dir(url);
        if !dir.is_dir() {
            return Ok(EvolutionTrack::new(url));
        }
        let _guard = self.lock(&dir, LockMode::Shared)?;
        let track = self.read_track(&dir, url)?;
        // Best effort: a read-only store still serves reads.
        let _ = self.sync_index(&dir, &track);
        Ok(track)
    }

    fn read_track(&self, dir: &Path, url: &str) -> Result<EvolutionTrack, StoreError> {
        let mut entries: Vec<(Timestamp, PathBuf)> = Vec::new();
        for entry in fs::read_dir(dir).map_err(|e| StoreError::io(dir, e))? {
            let entry = entry.map_err(|e| StoreError::io(dir, e))?;
            let name = entry.file_name();
            let Some(name) = name.to_str() else { continue };
            let Some(stem) = name.strip_suffix(".json") else { continue };
            if let Ok(ts) = stem.parse::<Timestamp>() {
                entries.push((ts, entry.path()));
            }
        }
        entries.sort();

        let mut snapshots = Vec::with_capacity(entries.len());
        for (ts, path) in entries {
            let snap = read_snapshot(&path)?;
            if snap.captured_at != ts {
                return Err(StoreError::Corrupt {
                    path,
                    reason: format!("file name says {ts}, content says {}", snap.captured_at),
                });
            }
            if snap.url != url {
                return Err(StoreError::Corrupt {
                    path,
                    reason: format!("snapshot belongs to `{}`", snap.url),
                });
            }
            snapshots.push(snap);
        }
        Ok(EvolutionTrack::from_snapshots(url, snapshots)?)
    }

    fn sync_index(&self, dir: &Path, track: &EvolutionTrack) -> Result<(), StoreError> {
        let path = dir.join(INDEX_FILE);
        let wanted = index_bytes(track)?;
        if fs::read(&path).ok().as_deref() == Some(wanted.as_slice()) {
            return Ok(());
        }
        write_atomic(&path, &wanted, false)
    }

    /// Appends a snapshot to its URL's track and returns the new length.
    pub fn ingest(&self, snap: &PageSnapshot) -> Result<usize, StoreError> {
        let dir = self.track_dir(&snap.url);
        fs::create_dir_all(&dir).map_err(|e| StoreError::io(&dir, e))?;
        let _guard = self.lock(&dir, LockMode::Exclusive)?;
        self.clear_stale_temps(&dir)?;

        let mut track = self.read_track(&dir, &snap.url)?;
        track.check_append(snap)?;

        let path = dir.join(format!("{}.json", snap.captured_at));
        let body = serde_json::to_vec_pretty(&SnapshotFile {
            schema_version: SCHEMA_VERSION,
            snapshot: snap.clone(),
        })
        .map_err(|e| StoreError::Corrupt {
            path: path.clone(),
            reason: e.to_string(),
        })?;
        let fault = std::env::var(FAULT_ENV).is_ok_and(|v| v == "abort-before-commit");
        write_atomic(&path, &body, fault)?;

        track.ingest(snap.clone())?;
        self.sync_index(&dir, &track)?;
        Ok(track.len())
    }

    fn clear_stale_temps(&self, dir: &Path) -> Result<(), StoreError> {
        for entry in fs::read_dir(dir).map_err(|e| StoreError::io(dir, e))? {
            let entry = entry.map_err(|e| StoreError::io(dir, e))?;
            if entry.file_name().to_string_lossy().ends_with(TMP_SUFFIX) {
                fs::remove_file(entry.path()).map_err(|e| StoreError::io(&entry.path(), e))?;
            }
        }
        Ok(())
    }

    pub fn index_path(&self, url: &str) -> PathBuf {
        self.track_dir(url).join(INDEX_FILE)
    }
}

fn read_snapshot(path: &Path) -> Result<PageSnapshot, StoreError> {
    let bytes = fs::read(path).map_err(|e| StoreError::io(path, e))?;
    let file: SnapshotFile = serde_json::from_slice(&bytes).map_err(|e| StoreError::Corrupt {
        path: path.to_owned(),
        reason: e.to_string(),
    })?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(StoreError::Corrupt {
            path: path.to_owned(),
            reason: format!("unsupported schema_version {}", file.schema_version),
        });
    }
    if let Some(bad) = file.snapshot.segments.iter().find(|s| !s.fingerprint_is_consistent()) {
        return Err(StoreError::Corrupt {
            path: path.to_owned(),
            reason: format!("fingerprint {} does not match segment {}", bad.fingerprint, bad.dom_path),
        });
    }
    Ok(file.snapshot)
}

fn index_bytes(track: &EvolutionTrack) -> Result<Vec<u8>, StoreError> {
    let file = IndexFile {
        schema_version: SCHEMA_VERSION,
        url: track.url().to_owned(),
        index: track.index().clone(),
    };
    serde_json::to_vec_pretty(&file).map_err(|e| StoreError::Corrupt {
        path: PathBuf::from(INDEX_FILE),
        reason: e.to_string(),
    })
}

fn write_atomic(path: &Path, bytes: &[u8], abort_before_rename: bool) -> Result<(), StoreError> {
    let mut tmp_name = path.as_os_str().to_owned();
    tmp_name.push(TMP_SUFFIX);
    let tmp = PathBuf::from(tmp_name);
    {
        let mut f = File::create(&tmp).map_err(|e| StoreError::io(&tmp, e))?;
        f.write_all(bytes).map_err(|e| StoreError::io(&tmp, e))?;
        f.sync_all().map_err(|e| StoreError::io(&tmp, e))?;
    }
    if abort_before_rename {
        std::process::abort();
    }
    fs::rename(&tmp, path).map_err(|e| StoreError::io(path, e))?;
    if let Some(parent) = path.parent() {
        if let Ok(d) = File::open(parent) {
            let _ = d.sync_all();
        }
    }
    Ok(())
}
