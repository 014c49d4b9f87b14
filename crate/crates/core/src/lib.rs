//! Length spectra of matrix representations of free groups.
//!
//! The crate enumerates conjugacy classes of a free group, evaluates
//! translation lengths of matrix representations through Jordan projections,
//! estimates exponential growth rates of length spectra, and extracts the
//! correlation number of a pair of representations from their Manhattan curve
//! by three independent routes (tangency, mixed-spectrum minimization, and a
//! direct window-counting fit).
//!
//! Data-parallel paths (enumeration shards, curve grids) run on rayon when the
//! `parallel` feature is enabled (default); every parallel entry point has a
//! sequential twin with bit-identical output.

pub mod error;
pub mod freegroup;
pub mod growth;
pub mod manhattan;
pub mod representation;
pub mod spectrum;

pub use error::{Error, Result};
pub use freegroup::{class_count, enumerate_classes, ConjClass, Letter, ReducedWord};
pub use growth::{growth_rate, GrowthEstimate, GrowthMethod, WindowPolicy};
pub use manhattan::{
    raw_window_scan, window_count, PinchReport, PressureIntersections, RawWindowScan, XGridPolicy,
    correlation_count, correlation_mins, correlation_report, correlation_tangent,
    pinching_demo, pressure_intersections, sample_curve, sample_curve_serial, CorrelationReport,
    CurveOptions, ManhattanCurve,
};
pub use representation::{JordanVector, LengthFunctional, LoxodromyReport, Representation};
pub use spectrum::{
    compute_spectrum, compute_spectrum_serial, CountingFunction, SpectrumOptions, SpectrumTable,
};
