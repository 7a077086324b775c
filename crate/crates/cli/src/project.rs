use std::path::{Path, PathBuf};

use counting::{parse_script_str, ProofScript};
use enumeration::{parse_witness_str, EnumerationWitness};
use qhl::{parse_property_str, QhpProperty};
use transition_system::{parse_system_str, TransitionSystem};

use crate::ConfigError;

pub const SYSTEM_FILE: &str = "system.sexp";
pub const PROPERTY_FILE: &str = "property.sexp";
pub const ENUMERATION_FILE: &str = "enumeration.sexp";
pub const PROOF_FILE: &str = "proof.sexp";
pub const INSTANCE_FILE: &str = "instance.sexp";

/// One benchmark directory, fully parsed.
#[derive(Clone, Debug)]
pub struct Project {
    pub name: String,
    pub dir: PathBuf,
    pub system: TransitionSystem,
    pub property: QhpProperty,
    pub witness: EnumerationWitness,
    pub script: ProofScript,
}

fn read(dir: &Path, file: &str) -> Result<String, ConfigError> {
    let p = dir.join(file);
    std::fs::read_to_string(&p).map_err(|e| ConfigError::Io(format!("{}: {}", p.display(), e)))
}

fn parse_err(file: &str, e: impl std::fmt::Display) -> ConfigError {
    ConfigError::Parse { file: file.to_string(), detail: e.to_string() }
}

pub fn project_name(dir: &Path) -> String {
    dir.canonicalize()
        .ok()
        .as_deref()
        .unwrap_or(dir)
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string())
}

pub fn load_system(dir: &Path) -> Result<TransitionSystem, ConfigError> {
    parse_system_str(&read(dir, SYSTEM_FILE)?).map_err(|e| parse_err(SYSTEM_FILE, e))
}

pub fn load_property(dir: &Path) -> Result<QhpProperty, ConfigError> {
    parse_property_str(&read(dir, PROPERTY_FILE)?).map_err(|e| parse_err(PROPERTY_FILE, e))
}

pub fn load_witness(dir: &Path) -> Result<EnumerationWitness, ConfigError> {
    parse_witness_str(&read(dir, ENUMERATION_FILE)?).map_err(|e| parse_err(ENUMERATION_FILE, e))
}

impl Project {
    pub fn load(dir: &Path) -> Result<Project, ConfigError> {
        let system = load_system(dir)?;
        let property = load_property(dir)?;
        let witness = load_witness(dir)?;
        let script = parse_script_str(&read(dir, PROOF_FILE)?).map_err(|e| parse_err(PROOF_FILE, e))?;
        for v in property.bound.free_vars() {
            if !system.params.contains(&v.base) {
                return Err(ConfigError::Resolve(format!("bound mentions `{}`, which is not a parameter of the system", v)));
            }
        }
        for (v, _) in &witness.enum_vars {
            if system.var_sort(v).is_some() {
                return Err(ConfigError::Resolve(format!("enumeration variable `{}` clashes with a state variable", v)));
            }
        }
        Ok(Project { name: project_name(dir), dir: dir.to_path_buf(), system, property, witness, script })
    }

    /// Rule applications plus the goal.
    pub fn proof_size(&self) -> usize {
        self.script.steps.iter().map(|s| s.rules.len()).sum::<usize>() + usize::from(self.script.goal.is_some())
    }

    /// Hand-written enumeration items: Valid, trel, every witness term and
    /// every strengthening conjunct.
    pub fn annotations(&self) -> usize {
        let w = &self.witness;
        2 + w.skolem.len()
            + w.successor.len()
            + w.cover.len()
            + w.strengthen.len()
            + w.distinct_strengthen.len()
            + w.cover_strengthen.len()
            + w.surj_strengthen.len()
            + usize::from(w.diff_index.is_some())
            + usize::from(w.rank.is_some())
    }
}
