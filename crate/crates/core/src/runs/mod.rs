//! Configuration files, the stage pipeline, run records and slope studies.

mod config;
mod pipeline;
mod record;
mod study;

pub use config::{
    hex, EnergySpec, GeometrySpec, GreenSpec, Route, RunConfig, Stage, StudySpec, SweepSpec, ThermoSpec, Tolerances, Track,
    SWEEP_PARAMETERS,
};
pub use pipeline::{execute, run, study, sweep_points, Point, RunOutcome};
pub use record::{write_outputs, RunRecord, Timing, Trace};
pub use study::{fit_loglog, SlopeFit, StudyReport, TrackedSlope};
