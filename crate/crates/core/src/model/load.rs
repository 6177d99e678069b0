use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::static_match::{parse_taxonomy, Taxonomy};

use super::component::parse_component_file;
use super::composition::{parse_composition_syntax, resolve_composition};
use super::error::ModelError;
use super::requirements::parse_requirements;
use super::types::*;

/// A composition together with its resolved members, taxonomy and
/// requirements.
#[derive(Debug, Clone)]
pub struct System {
    pub composition: ComposedComponent,
    /// Member name to component; use [`System::members`] for declaration order.
    pub components: BTreeMap<String, ExtendedComponent>,
    pub taxonomy: Taxonomy,
    pub requirements: RequirementSpec,
}

impl System {
    /// Assembles and validates a system from already parsed parts.
    pub fn new(
        composition: ComposedComponent,
        members: Vec<ExtendedComponent>,
        taxonomy: Taxonomy,
        requirements: RequirementSpec,
    ) -> Result<Self, ModelError> {
        let bases: Vec<BasicComponent> = members.iter().map(|m| m.base.clone()).collect();
        resolve_composition(&composition, &bases)?;
        let components = members.into_iter().map(|m| (m.base.name.clone(), m)).collect();
        Ok(System { composition, components, taxonomy, requirements })
    }

    pub fn base(&self, member: &str) -> &BasicComponent {
        &self.components[member].base
    }

    pub fn ext(&self, member: &str) -> &ExtendedComponent {
        &self.components[member]
    }

    /// Members in declaration order with their instance counts.
    pub fn members(&self) -> impl Iterator<Item = (&MemberRef, &ExtendedComponent)> {
        self.composition.members.iter().map(|m| (m, &self.components[&m.name]))
    }
}

fn read(path: &Path) -> Result<String, ModelError> {
    std::fs::read_to_string(path).map_err(|source| ModelError::Io { path: path.display().to_string(), source })
}

/// Loads a composition file and everything it references. Relative paths
/// resolve against the composition file's directory.
pub fn load_system(path: impl AsRef<Path>) -> Result<System, ModelError> {
    let path = path.as_ref();
    let dir: PathBuf = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let src = read(path)?;
    let composition = parse_composition_syntax(&src).map_err(|e| e.in_file(path.display().to_string()))?;
    let mut members = Vec::new();
    for m in &composition.members {
        let p = dir.join(&m.path);
        let text = read(&p)?;
        let (base, ext) = parse_component_file(&text).map_err(|e| e.in_file(p.display().to_string()))?;
        if base.name != m.name {
            return Err(ModelError::UnknownMember(format!(
                "{} declares component `{}`, expected `{}`",
                p.display(),
                base.name,
                m.name
            )));
        }
        members.push(ext);
    }
    let taxonomy = match &composition.taxonomy {
        Some(t) => {
            let p = dir.join(t);
            parse_taxonomy(&read(&p)?).map_err(|e| {
                ModelError::Reference(format!("{}: {e}", p.display()))
            })?
        }
        None => Taxonomy::new(),
    };
    let requirements = match &composition.requirements {
        Some(r) => {
            let p = dir.join(r);
            parse_requirements(&read(&p)?).map_err(|e| e.in_file(p.display().to_string()))?
        }
        None => parse_requirements("")?,
    };
    System::new(composition, members, taxonomy, requirements).map_err(|e| e.in_file(path.display().to_string()))
}
