//! Stroboscopic-map analysis of periodically pulse-driven integrate-and-fire
//! systems `x' = f(x) + I(t)` with threshold reset `x = theta -> 0`.

// `!(a < b)` is used on purpose so that NaN lands in the failure branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bifurcation;
pub mod cli;
pub mod error;
pub mod flow;
pub mod integrate;
pub mod model;
pub mod strobo;
pub mod symbolic;

pub use error::{Error, Result};
pub use flow::{flow_autonomous, hybrid_flow, spike_time_delta, HybridTrajectory, Numerics};
pub use model::{check_hypotheses, eval_field, forcing_value, ForcingParams, HypothesisReport, SystemParams, VectorFieldSpec};
pub use strobo::{FixedPoint, GapOffsets, StroboMap, StroboResult};
pub use bifurcation::{solve_curve, sweep_2d, scan_1d, verify_ordering, CurveKind, ScanOptions, ScanSeries, SweepGrid};
pub use symbolic::{detect_orbit, encode, farey_tree, staircase, Detection, DetectOptions, Orbit, OrbitSummary, Ratio, SymbolicSequence};
