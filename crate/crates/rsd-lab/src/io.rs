//! Instance, permutation and assignment files (JSON).

use std::fs;
use std::path::{Path, PathBuf};

use rsd_core::{Assignment, InstanceError, MarketInstance, Permutation};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}: no such file", path.display())]
    FileNotFound { path: PathBuf },
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("{0}")]
    Instance(#[from] InstanceError),
}

impl IoError {
    pub fn class(&self) -> &'static str {
        match self {
            IoError::FileNotFound { .. } => "FileNotFound",
            IoError::Io { .. } => "IoError",
            IoError::Parse { .. } => "ParseError",
            IoError::Instance(e) => e.class(),
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::NotFound {
            IoError::FileNotFound { path: path.to_path_buf() }
        } else {
            IoError::Io { path: path.to_path_buf(), message: e.to_string() }
        }
    }
}

/// On-disk instance document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub n: usize,
    pub m: usize,
    pub capacities: Vec<u64>,
    pub preferences: Vec<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

impl InstanceFile {
    pub fn from_instance(inst: &MarketInstance) -> Self {
        InstanceFile {
            n: inst.n(),
            m: inst.m(),
            capacities: inst.capacities().iter().map(|&c| c as u64).collect(),
            preferences: (0..inst.n())
                .map(|i| inst.preferences(i).iter().map(|&k| k as u64).collect())
                .collect(),
            meta: None,
        }
    }

    pub fn to_instance(&self) -> Result<MarketInstance, InstanceError> {
        MarketInstance::new(self.n, self.m, &self.capacities, &self.preferences)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationFile {
    pub student_at: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentFile {
    /// School per student, `-1` for unmatched.
    pub school_of: Vec<i64>,
}

impl From<&Permutation> for PermutationFile {
    fn from(p: &Permutation) -> Self {
        PermutationFile { student_at: p.order().to_vec() }
    }
}

impl From<&Assignment> for AssignmentFile {
    fn from(a: &Assignment) -> Self {
        AssignmentFile { school_of: a.to_signed() }
    }
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|e| IoError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| IoError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| IoError::io(path, e))
}

pub fn parse_instance(path: &Path, text: &str) -> Result<MarketInstance, IoError> {
    let doc: InstanceFile =
        serde_json::from_str(text).map_err(|e| IoError::Parse { path: path.to_path_buf(), message: e.to_string() })?;
    Ok(doc.to_instance()?)
}

pub fn load_instance(path: &Path) -> Result<MarketInstance, IoError> {
    parse_instance(path, &read_text(path)?)
}

pub fn instance_json(inst: &MarketInstance, meta: Option<serde_json::Value>) -> String {
    let doc = InstanceFile { meta, ..InstanceFile::from_instance(inst) };
    serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
}

pub fn load_permutation(path: &Path) -> Result<Permutation, IoError> {
    let text = read_text(path)?;
    let doc: PermutationFile =
        serde_json::from_str(&text).map_err(|e| IoError::Parse { path: path.to_path_buf(), message: e.to_string() })?;
    Ok(Permutation::from_student_at(doc.student_at)?)
}
