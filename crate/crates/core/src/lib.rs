//! Real-time simulation of automotive LIDAR sensors disturbed by airborne dust.
//!
//! A spinning LIDAR is ray-cast against a scene of opaque boxes and triangles while
//! bounded dust or smoke clouds attenuate beams (Beer–Lambert, two-way) and scatter
//! them back as spurious points (exponential free-path sampling, one event per beam).
//! The same model can be applied to recorded point clouds ([`inject`]).
//!
//! Per-beam randomness is counter-based ([`rng::RngStream`]), so every frame is a pure
//! function of `(scenario, seed, frame_id)` regardless of thread count.

pub mod engine;
pub mod error;
pub mod geom;
pub mod inject;
pub mod io;
pub mod medium;
pub mod metrics;
pub mod rng;
pub mod scene;
pub mod sensor;
pub mod sim;

pub use engine::Engine;
pub use error::{
    ConfigError, InjectError, MetricsError, ParseError, SinkError, StreamError, ValidationError,
};
pub use geom::{Ray, Vec3};
pub use inject::{inject_dust, InjectReport, Injected};
pub use io::{
    parse_config, read_csv, read_csv_file, render_config, write_csv, OutputFormat, RecordedPoint,
    ScenarioConfig,
};
pub use medium::{CloudShape, DustCloud};
pub use metrics::{compute_metrics, sweep, FrameMetrics, SweepParam, SweepTable};
pub use scene::{Aabb, Ellipsoid, Geometry, Hit, Scene, SceneObject};
pub use sensor::{preset, scan_rays, Pose, ReturnMode, SensorModel};
pub use sim::{
    run_scenario, simulate_beam, simulate_frame, Frame, LidarReturn, ReturnKind, RunSummary, World,
};
