//! Construction of a planar convex set `K` with `C¹` boundary whose metric
//! projection fails to be directionally differentiable at `(2, 0)`, together
//! with exact projection onto the truncated boundary and numerical verifiers
//! for the asymptotic statements about it.

pub mod analysis;
pub mod error;
pub mod export;
pub mod geometry;
pub mod numeric;
pub mod par;
pub mod point;
pub mod projection;
pub mod sequences;

pub use analysis::{verify_lemma, LemmaId, LemmaReport, VerifyOptions};
pub use error::{Error, Result};
pub use geometry::{build_boundary, BoundaryModel, Piece, PieceKind};
pub use par::Execution;
pub use point::Point2;
pub use projection::{project, ProjectionResult};
pub use sequences::{make_sequence, AlphaSequence, Family, SequenceSpec};
