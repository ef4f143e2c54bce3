//! Scenario documents, CSV tables and SVG charts.

pub mod config;
pub mod csv;
pub mod svg;

pub use config::{load_config, write_config};
pub use csv::{format_sig, write_bifurcation_csv, write_csv};
pub use svg::render_svg;
