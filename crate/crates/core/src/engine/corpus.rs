//! Loading a corpus directory of `.gdl` descriptions plus its manifest.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::parser::{self, LudemeTree, ParseError};

use super::{CompileError, GameSpec};

/// One corpus game: parsed tree plus the compilation result.  Games using
/// unsupported ludemes stay parse-only (`compiled` holds the error) but
/// still contribute features.
pub struct CorpusEntry {
    pub name: String,
    pub file: PathBuf,
    pub tree: LudemeTree,
    pub compiled: Result<GameSpec, CompileError>,
}

impl CorpusEntry {
    pub fn ludemes(&self) -> BTreeSet<String> {
        parser::extract_ludemes(&self.tree)
    }

    pub fn is_playable(&self) -> bool {
        self.compiled.is_ok()
    }
}

/// A `manifest.txt` row: `name,players,file`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub name: String,
    pub players: u8,
    pub file: String,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error in {path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("{path} does not declare a (game \"Name\" ...) root")]
    NotAGame { path: PathBuf },
    #[error("duplicate game name `{0}`")]
    DuplicateName(String),
    #[error("malformed manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
    #[error("no .gdl descriptions found in {0}")]
    EmptyCorpus(PathBuf),
}

/// Load every `.gdl` file in `dir`, sorted by file name.  Parse errors fail
/// the load; compile errors are kept per entry.
pub fn load_corpus(dir: &Path) -> Result<Vec<CorpusEntry>, CorpusError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|source| CorpusError::Io {
            path: dir.to_path_buf(),
            source,
        })?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "gdl"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CorpusError::EmptyCorpus(dir.to_path_buf()));
    }

    let mut entries = Vec::with_capacity(paths.len());
    let mut seen = BTreeSet::new();
    for path in paths {
        let text = std::fs::read_to_string(&path).map_err(|source| CorpusError::Io {
            path: path.clone(),
            source,
        })?;
        let tree = parser::parse(&text).map_err(|source| CorpusError::Parse {
            path: path.clone(),
            source,
        })?;
        let name = match &tree {
            LudemeTree::Compound { head, args } if head == "game" => {
                args.first().and_then(|a| a.as_str()).map(str::to_string)
            }
            _ => None,
        }
        .ok_or_else(|| CorpusError::NotAGame { path: path.clone() })?;
        if !seen.insert(name.clone()) {
            return Err(CorpusError::DuplicateName(name));
        }
        let compiled = GameSpec::compile(&tree);
        entries.push(CorpusEntry {
            name,
            file: path,
            tree,
            compiled,
        });
    }
    Ok(entries)
}

/// Read a `name,players,file` manifest, skipping blank and `#` lines.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut entries = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(CorpusError::Manifest {
                line: idx + 1,
                message: format!("expected name,players,file, found `{line}`"),
            });
        }
        let players = fields[1]
            .trim()
            .parse::<u8>()
            .map_err(|_| CorpusError::Manifest {
                line: idx + 1,
                message: format!("bad player count `{}`", fields[1]),
            })?;
        entries.push(ManifestEntry {
            name: fields[0].trim().to_string(),
            players,
            file: fields[2].trim().to_string(),
        });
    }
    Ok(entries)
}
