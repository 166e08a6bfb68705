//! On-disk lexicon and instance stores.
//!
//! A store is a directory holding `<name>.lex` lexicon files, `<name>.tsv`
//! instance files, and per-lexicon `<name>.versions` / `<name>.audit`
//! sidecars. Every file is replaced by write-to-temp, fsync, rename, so a
//! crash leaves either the old or the new file. Writes are serialized; reads
//! work on an immutable snapshot and never wait for a save.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::eval::{read_instances, write_instances, EvalError, TaggedInstance};
use crate::lexicon::{
    fixture_registry, has_errors, validate_entry, Diagnostic, Entry, EntryKey, FrameRegistry, Lexicon, LexiconError,
    ParseMode, PartOfSpeech, PdirClass,
};

/// Points inside [`atomic_write_with`] where a hook can inject a failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WriteStage {
    /// Half of the bytes are in the temp file.
    MidWrite,
    /// All bytes written and synced, rename not yet done.
    BeforeRename,
    /// Target replaced.
    Renamed,
}

fn temp_path(path: &Path) -> PathBuf {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!(".{name}.tmp-{}", std::process::id()))
}

/// Replaces `path` with `data` atomically.
pub fn atomic_write(path: &Path, data: &[u8]) -> io::Result<()> {
    atomic_write_with(path, data, &mut |_| Ok(()))
}

/// [`atomic_write`] with a hook called at each [`WriteStage`]. A hook error
/// aborts the write at that point, leaving any temp file behind as a crash
/// would.
pub fn atomic_write_with(
    path: &Path,
    data: &[u8],
    hook: &mut dyn FnMut(WriteStage) -> io::Result<()>,
) -> io::Result<()> {
    let tmp = temp_path(path);
    let mut file = File::create(&tmp)?;
    let (head, tail) = data.split_at(data.len() / 2);
    file.write_all(head)?;
    hook(WriteStage::MidWrite)?;
    file.write_all(tail)?;
    file.sync_all()?;
    drop(file);
    hook(WriteStage::BeforeRename)?;
    fs::rename(&tmp, path)?;
    if let Some(dir) = path.parent() {
        // Persist the rename itself; not supported everywhere.
        if let Ok(d) = File::open(dir) {
            let _ = d.sync_all();
        }
    }
    hook(WriteStage::Renamed)
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Lexicon {
        path: String,
        #[source]
        source: LexiconError,
    },
    #[error("{path}: {source}")]
    Instances {
        path: String,
        #[source]
        source: EvalError,
    },
    #[error("entry failed validation")]
    ValidationFailed(Vec<Diagnostic>),
    #[error("version conflict: expected {expected}, store has {current}")]
    VersionConflict { expected: u64, current: u64 },
    #[error("invalid store name `{0}` (use letters, digits, `-` and `_`)")]
    BadName(String),
    #[error("instance {id}: {message}")]
    BadInstance { id: String, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn check_name(name: &str) -> Result<(), StoreError> {
    if !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
        Ok(())
    } else {
        Err(StoreError::BadName(name.to_string()))
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct VersionRecord {
    orth: String,
    pos: PartOfSpeech,
    version: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct VersionFile {
    /// Hash of the lexicon file these versions belong to.
    lex_sha256: String,
    versions: Vec<VersionRecord>,
}

#[derive(Debug, Clone, Default)]
struct LexiconState {
    lexicon: Lexicon,
    versions: HashMap<EntryKey, u64>,
}

#[derive(Debug, Clone, Default)]
struct Snapshot {
    lexicons: BTreeMap<String, LexiconState>,
}

/// An entry together with where it lives and its version.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoredEntry {
    pub lexicon: String,
    pub version: u64,
    pub entry: Entry,
}

pub struct StoreConfig {
    pub registry: FrameRegistry,
    pub pdir: PdirClass,
    pub mode: ParseMode,
}

impl Default for StoreConfig {
    fn default() -> Self {
        StoreConfig {
            registry: fixture_registry(),
            pdir: PdirClass::default(),
            mode: ParseMode::Lenient,
        }
    }
}

impl StoreConfig {
    /// Loads `frames.def` and `pdir.txt` from `root` when present, falling
    /// back to the built-in fixtures.
    pub fn from_root(root: &Path) -> Result<Self, StoreError> {
        let mut cfg = StoreConfig::default();
        let frames = root.join("frames.def");
        if frames.exists() {
            let text = fs::read_to_string(&frames).map_err(io_err(&frames))?;
            cfg.registry = FrameRegistry::parse(&text, cfg.mode)
                .map_err(|source| StoreError::Lexicon {
                    path: frames.display().to_string(),
                    source,
                })?
                .0;
        }
        let pdir = root.join("pdir.txt");
        if pdir.exists() {
            cfg.pdir = PdirClass::parse(&fs::read_to_string(&pdir).map_err(io_err(&pdir))?);
        }
        Ok(cfg)
    }
}

type FaultHook = Box<dyn Fn(WriteStage) -> io::Result<()> + Send + Sync>;

pub struct LexiconStore {
    root: PathBuf,
    config: StoreConfig,
    snapshot: RwLock<Arc<Snapshot>>,
    writer: Mutex<()>,
    fault: RwLock<Option<FaultHook>>,
}

impl LexiconStore {
    /// Opens (creating if needed) the store at `root`.
    pub fn open(root: impl Into<PathBuf>, config: StoreConfig) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(io_err(&root))?;
        let mut snapshot = Snapshot::default();
        let mut names = Vec::new();
        for dirent in fs::read_dir(&root).map_err(io_err(&root))? {
            let path = dirent.map_err(io_err(&root))?.path();
            let fname = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            if fname.starts_with('.') && fname.contains(".tmp-") {
                // Left over from an interrupted write.
                let _ = fs::remove_file(&path);
                continue;
            }
            if path.extension().is_some_and(|x| x == "lex") {
                if let Some(stem) = path.file_stem() {
                    names.push(stem.to_string_lossy().into_owned());
                }
            }
        }
        names.sort();
        for name in names {
            let state = Self::load_lexicon(&root, &name, config.mode)?;
            snapshot.lexicons.insert(name, state);
        }
        Ok(LexiconStore {
            root,
            config,
            snapshot: RwLock::new(Arc::new(snapshot)),
            writer: Mutex::new(()),
            fault: RwLock::new(None),
        })
    }

    fn load_lexicon(root: &Path, name: &str, mode: ParseMode) -> Result<LexiconState, StoreError> {
        let path = root.join(format!("{name}.lex"));
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        let text = String::from_utf8(bytes.clone()).map_err(|e| StoreError::Io {
            path: path.display().to_string(),
            source: io::Error::new(io::ErrorKind::InvalidData, e),
        })?;
        let (lexicon, _) = Lexicon::parse(&text, mode).map_err(|source| StoreError::Lexicon {
            path: path.display().to_string(),
            source,
        })?;

        let vpath = root.join(format!("{name}.versions"));
        let recorded: Option<VersionFile> = fs::read(&vpath)
            .ok()
            .and_then(|b| serde_json::from_slice(&b).ok());
        let mut versions = HashMap::new();
        if let Some(vf) = recorded {
            let current = vf.lex_sha256 == sha256_hex(&bytes);
            for r in vf.versions {
                versions.insert((r.orth, r.pos), r.version);
            }
            if !current {
                // The lexicon changed after the sidecar was written (a
                // save interrupted between the two renames). Bump every
                // version so no client holding an old one can overwrite.
                for v in versions.values_mut() {
                    *v += 1;
                }
            }
        }
        for e in lexicon.iter() {
            versions.entry(e.key()).or_insert(1);
        }
        versions.retain(|k, _| lexicon.contains(&k.0, &k.1));
        Ok(LexiconState { lexicon, versions })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn config(&self) -> &StoreConfig {
        &self.config
    }

    /// Test hook: fail writes at the given stage.
    #[doc(hidden)]
    pub fn set_fault_hook(&self, hook: Option<FaultHook>) {
        *self.fault.write() = hook;
    }

    fn snapshot(&self) -> Arc<Snapshot> {
        self.snapshot.read().clone()
    }

    pub fn lexicon_names(&self) -> Vec<String> {
        self.snapshot().lexicons.keys().cloned().collect()
    }

    pub fn lexicon(&self, name: &str) -> Option<Lexicon> {
        self.snapshot().lexicons.get(name).map(|s| s.lexicon.clone())
    }

    /// Every lexicon in name order.
    pub fn lexicons(&self) -> Vec<(String, Lexicon)> {
        self.snapshot()
            .lexicons
            .iter()
            .map(|(n, s)| (n.clone(), s.lexicon.clone()))
            .collect()
    }

    pub fn version(&self, lexicon: &str, orth: &str, pos: &PartOfSpeech) -> u64 {
        self.snapshot()
            .lexicons
            .get(lexicon)
            .and_then(|s| s.versions.get(&(orth.to_string(), pos.clone())).copied())
            .unwrap_or(0)
    }

    /// Entries for `orth` across all lexicons, ordered by part of speech
    /// and then lexicon name.
    pub fn lookup(&self, orth: &str, pos: Option<&PartOfSpeech>) -> Vec<StoredEntry> {
        let snap = self.snapshot();
        let mut out: Vec<StoredEntry> = snap
            .lexicons
            .iter()
            .flat_map(|(name, state)| {
                state
                    .lexicon
                    .lookup(orth)
                    .into_iter()
                    .filter(|e| pos.is_none_or(|p| &e.pos == p))
                    .map(|e| StoredEntry {
                        lexicon: name.clone(),
                        version: state.versions.get(&e.key()).copied().unwrap_or(1),
                        entry: e.clone(),
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        out.sort_by(|a, b| {
            (a.entry.pos.as_str(), a.lexicon.as_str()).cmp(&(b.entry.pos.as_str(), b.lexicon.as_str()))
        });
        out
    }

    fn write_file(&self, path: &Path, data: &[u8]) -> Result<(), StoreError> {
        let fault = self.fault.read();
        let mut hook = |stage| match fault.as_ref() {
            Some(h) => h(stage),
            None => Ok(()),
        };
        atomic_write_with(path, data, &mut hook).map_err(io_err(path))
    }

    /// Validates and stores `entry`, returning its new version.
    ///
    /// `expected_version` is the version the caller last saw; `None` or
    /// `Some(0)` means the caller expects the entry not to exist yet.
    pub fn save_entry(
        &self,
        lexicon: &str,
        entry: Entry,
        expected_version: Option<u64>,
        annotator: &str,
    ) -> Result<u64, StoreError> {
        check_name(lexicon)?;
        let diags = validate_entry(&entry, &self.config.registry, &self.config.pdir);
        if has_errors(&diags) {
            return Err(StoreError::ValidationFailed(diags));
        }

        let _guard = self.writer.lock();
        let snap = self.snapshot();
        let mut state = snap.lexicons.get(lexicon).cloned().unwrap_or_default();
        let key = entry.key();
        let current = state.versions.get(&key).copied().unwrap_or(0);
        let expected = expected_version.unwrap_or(0);
        if expected != current {
            return Err(StoreError::VersionConflict { expected, current });
        }
        let action = if current == 0 { "create" } else { "update" };
        let version = current + 1;
        state.lexicon.upsert(entry.clone());
        state.versions.insert(key, version);

        let text = state.lexicon.to_text();
        let lex_path = self.root.join(format!("{lexicon}.lex"));
        self.write_file(&lex_path, text.as_bytes())?;

        let mut records: Vec<VersionRecord> = state
            .versions
            .iter()
            .map(|((orth, pos), v)| VersionRecord {
                orth: orth.clone(),
                pos: pos.clone(),
                version: *v,
            })
            .collect();
        records.sort_by(|a, b| (&a.orth, a.pos.as_str()).cmp(&(&b.orth, b.pos.as_str())));
        let vf = VersionFile {
            lex_sha256: sha256_hex(text.as_bytes()),
            versions: records,
        };
        let vpath = self.root.join(format!("{lexicon}.versions"));
        let vbytes = serde_json::to_vec_pretty(&vf).expect("version file serializes");
        self.write_file(&vpath, &vbytes)?;

        self.append_audit(lexicon, annotator, &entry, action, version)?;

        let mut next = (*snap).clone();
        next.lexicons.insert(lexicon.to_string(), state);
        *self.snapshot.write() = Arc::new(next);
        Ok(version)
    }

    fn append_audit(&self, lexicon: &str, annotator: &str, entry: &Entry, action: &str, version: u64) -> Result<(), StoreError> {
        let path = self.root.join(format!("{lexicon}.audit"));
        let ts = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let clean = |s: &str| s.replace(['\t', '\n', '\r'], " ");
        let line = format!(
            "{ts}\t{}\t{}\t{}\t{action}\t{version}\n",
            clean(annotator),
            clean(&entry.orth),
            entry.pos
        );
        let mut f = OpenOptions::new().create(true).append(true).open(&path).map_err(io_err(&path))?;
        f.write_all(line.as_bytes()).map_err(io_err(&path))
    }

    /// Audit records for `lexicon`: (unix time, annotator, orth, pos, action, version).
    pub fn audit_log(&self, lexicon: &str) -> Result<Vec<[String; 6]>, StoreError> {
        check_name(lexicon)?;
        let path = self.root.join(format!("{lexicon}.audit"));
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(io_err(&path)(e)),
        };
        Ok(text
            .lines()
            .filter_map(|l| {
                let f: Vec<&str> = l.split('\t').collect();
                <[&str; 6]>::try_from(f).ok().map(|a| a.map(str::to_string))
            })
            .collect())
    }

    fn instance_path(&self, name: &str) -> Result<PathBuf, StoreError> {
        check_name(name)?;
        Ok(self.root.join(format!("{name}.tsv")))
    }

    /// Reads instance store `name`; a missing store is empty.
    pub fn instances(&self, name: &str) -> Result<Vec<TaggedInstance>, StoreError> {
        let path = self.instance_path(name)?;
        match fs::read_to_string(&path) {
            Ok(text) => read_instances(&text).map_err(|source| StoreError::Instances {
                path: path.display().to_string(),
                source,
            }),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Vec::new()),
            Err(e) => Err(io_err(&path)(e)),
        }
    }

    /// Appends instances to store `name`. Ids must be new to the store.
    pub fn append_instances(&self, name: &str, new: Vec<TaggedInstance>) -> Result<usize, StoreError> {
        let path = self.instance_path(name)?;
        let _guard = self.writer.lock();
        let mut all = self.instances(name)?;
        let mut ids: std::collections::HashSet<String> = all.iter().map(|i| i.id.clone()).collect();
        for inst in &new {
            inst.check().map_err(|message| StoreError::BadInstance {
                id: inst.id.clone(),
                message,
            })?;
            if !ids.insert(inst.id.clone()) {
                return Err(StoreError::BadInstance {
                    id: inst.id.clone(),
                    message: "id already present".into(),
                });
            }
        }
        let n = new.len();
        all.extend(new);
        self.write_file(&path, write_instances(&all).as_bytes())?;
        Ok(n)
    }
}
