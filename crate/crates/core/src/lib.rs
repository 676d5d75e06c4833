//! Model versioning with hidden training, worked out exactly for a linear
//! SVM in the plane.
//!
//! * [`geometry`]: half-planes, convex polygons, clipping, tangent lines.
//! * [`svm`]: the separator induced by one hidden point, in closed form and
//!   by a numeric oracle.
//! * [`regions`]: attackable regions and directional, compound and cautious
//!   transferability, exactly and by Monte Carlo.
//! * [`versioning`]: separator feasibility, hidden-point reconstruction,
//!   planned version sequences, candidate pools and greedy selection.

pub mod error;
pub mod geometry;
pub mod regions;
pub mod svm;
pub mod versioning;

pub use error::{Error, Result};
pub use geometry::{ConvexPolygon, HalfPlane, Point2, TangentLines};
pub use regions::{AttackMode, AttackSampleConfig, AttackableRegion, McEstimate, TransferabilityScore};
pub use svm::{BoundaryCase, BoundaryDerivation, DecisionBoundary, HiddenPoint, Label, Line, ScenarioConfig};
pub use versioning::{AlphaRow, CandidatePool, FeasibilityReport, PlanReport, SequencePlan};
