//! Configuration, point-cloud file formats, and the co-simulation stream.

pub mod config;
pub mod csv;
pub mod pcd;
pub mod sink;
pub mod stream;

pub use config::{parse_config, render_config, OutputFormat, OutputSpec, ScenarioConfig};
pub use csv::{read_csv, read_csv_file, write_csv, RecordedPoint, CSV_HEADER};
pub use pcd::write_pcd;
