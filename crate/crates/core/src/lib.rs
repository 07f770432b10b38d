//! Reverse engineers annotated C++ class headers into a class model and
//! generates `.adl` descriptions from it.

pub mod adl;
pub mod config;
pub mod frontend;
pub mod generator;
pub mod model;
pub mod reader;

pub use adl::{render_unit, AdlUnit};
pub use config::{load_config_dir, Config, ConfigError};
pub use generator::{generate_unit, select_classes, write_unit, GenerateError};
pub use model::{ElementId, Model, ModelError, PropertyKey, ShapeType};
pub use reader::{check_unit, parse_adl, Diagnostic};
