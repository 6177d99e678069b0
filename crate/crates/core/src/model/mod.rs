//! Conceptual component model: basic and composed components, extensions
//! with state variables and guarded transitions, and requirement
//! specifications, together with their text formats.

mod component;
mod composition;
mod error;
mod load;
mod requirements;
mod serialize;
mod types;

pub use component::{parse_component, parse_component_file, parse_extension, validate_base};
pub use composition::{parse_composition, parse_composition_syntax, resolve_composition};
pub use error::ModelError;
pub use load::{load_system, System};
pub use requirements::parse_requirements;
pub use serialize::{component_to_string, composition_to_string, requirements_to_string};
pub use types::*;
