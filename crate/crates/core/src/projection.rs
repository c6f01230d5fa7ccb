//! Exact metric projection onto `K` and the circle parameters `t_n`, `s_n`.
//!
//! Queries are folded into the first quadrant, tested against `K`, and then
//! handed to the piece whose normal region contains them. Membership and the
//! projected point are evaluated in the local frame of that piece, using
//! offsets from `(1, 0)`, so that queries on the radius-2 circle at angles
//! like `1e-40` still resolve their projections to full relative precision.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ArcPiece, BoundaryModel, Piece, SegmentPiece};
use crate::par::Execution;
use crate::point::Point2;
use crate::sequences::AlphaSequence;

/// Outcome of projecting one query onto `K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionResult {
    pub point: Point2,
    /// `point - (1, 0)`, accurate even when `point` rounds to `(1, 0)`.
    pub offset: Point2,
    /// Position in the boundary chain, or `-1` for queries inside `K`.
    pub piece_index: i64,
    pub distance: f64,
    pub truncation_safe: bool,
}

/// Closest point of the segment `[a, b]` to `p`.
pub fn project_onto_segment(p: Point2, a: Point2, b: Point2) -> Point2 {
    let d = b - a;
    let len2 = d.dot(d);
    if len2 == 0.0 {
        return a;
    }
    let t = ((p - a).dot(d) / len2).clamp(0.0, 1.0);
    a + d * t
}

/// Closest point of a boundary segment to `p`.
pub fn project_segment(p: Point2, seg: &SegmentPiece) -> Point2 {
    project_onto_segment(p, seg.from, seg.to)
}

/// Closest point of an arc to `p`. The flag is set when `p` is the center,
/// where every arc point is equally close and the start point is returned.
pub fn project_arc(p: Point2, arc: &ArcPiece) -> (Point2, bool) {
    let v = p - arc.center;
    if v.norm() == 0.0 {
        return (arc.start, true);
    }
    let delta = local_arc_angle(arc, v);
    if (0.0..=arc.span).contains(&delta) {
        return (arc.center + v * (arc.radius / v.norm()), false);
    }
    let (ds, de) = (p.dist(arc.start), p.dist(arc.end));
    (if ds <= de { arc.start } else { arc.end }, false)
}

/// Angle of `v` about the arc center, measured from `end_angle`.
fn local_arc_angle(arc: &ArcPiece, v: Point2) -> f64 {
    let (s, c) = arc.end_angle.sin_cos();
    let along = c * v.x + s * v.y;
    let across = c * v.y - s * v.x;
    across.atan2(along)
}

/// Offset of `2e^{iθ/2}` from `(1, 0)`.
pub fn circle_point_offset(theta: f64) -> Point2 {
    let s = (0.25 * theta).sin();
    Point2::new(1.0 - 4.0 * s * s, 2.0 * (0.5 * theta).sin())
}

/// The query `2e^{iθ/2}` on the radius-2 circle.
pub fn circle_point(theta: f64) -> Point2 {
    Point2::polar(2.0, 0.5 * theta)
}

/// A first-quadrant query in both representations.
#[derive(Clone, Copy)]
struct Query {
    abs: Point2,
    off: Point2,
}

/// Candidate owner: chain position, distance and offset of the foot point.
type Candidate = (usize, f64, Point2);

/// Slack on normal-region membership, in units of the rounding error of the
/// local coordinate. Queries on a region boundary then belong to both
/// neighbours and never fall through to the distance comparison, which cannot
/// separate feet closer than about `sqrt(eps)`.
const CLAIM_SLACK: f64 = 16.0 * f64::EPSILON;

impl SegmentPiece {
    /// Foot point if `q` lies in this segment's normal region.
    fn claim(&self, q: Query) -> Option<(f64, Point2)> {
        let rel = q.off - self.base_offset;
        let w = rel.dot(self.dir);
        let h = rel.dot(self.normal);
        let slack = CLAIM_SLACK * ((rel.x * self.dir.x).abs() + (rel.y * self.dir.y).abs());
        if h < 0.0 || w < self.w_to - slack || w > self.w_from + slack {
            return None;
        }
        let w = w.clamp(self.w_to, self.w_from);
        Some((h, self.base_offset + self.dir * w))
    }

    fn clamped(&self, q: Query) -> (f64, Point2) {
        let rel = q.off - self.base_offset;
        let w = rel.dot(self.dir).clamp(self.w_to, self.w_from);
        let foot = self.base_offset + self.dir * w;
        ((q.off - foot).norm(), foot)
    }
}

impl ArcPiece {
    fn center_offset(&self) -> Point2 {
        self.end_offset - Point2::polar(self.radius, self.end_angle)
    }

    fn claim(&self, q: Query) -> Option<(f64, Point2)> {
        let v = q.off - self.center_offset();
        let rho = v.norm();
        let (s, c) = self.end_angle.sin_cos();
        let along = c * v.x + s * v.y;
        let across = c * v.y - s * v.x;
        let delta = across.atan2(along);
        let slack = CLAIM_SLACK * ((c * v.y).abs() + (s * v.x).abs()) / rho;
        if rho < self.radius || delta < -slack || delta > self.span + slack {
            return None;
        }
        Some((rho - self.radius, self.offset_at(delta.clamp(0.0, self.span))))
    }

    fn clamped(&self, q: Query) -> (f64, Point2) {
        let v = q.off - self.center_offset();
        let delta = local_arc_angle(self, v).clamp(0.0, self.span);
        let foot = self.offset_at(delta);
        ((q.off - foot).norm(), foot)
    }
}

impl Piece {
    fn claim(&self, q: Query) -> Option<(f64, Point2)> {
        match self {
            Piece::Segment(s) | Piece::Closure(s) => s.claim(q),
            Piece::Arc(a) => a.claim(q),
        }
    }

    fn clamped(&self, q: Query) -> (f64, Point2) {
        match self {
            Piece::Segment(s) | Piece::Closure(s) => s.clamped(q),
            Piece::Arc(a) => a.clamped(q),
        }
    }

    /// Whether a first-quadrant point in this piece's polar sector lies in `K`.
    fn contains_radially(&self, q: Query) -> bool {
        match self {
            Piece::Segment(s) | Piece::Closure(s) => (q.off - s.base_offset).dot(s.normal) <= 0.0,
            Piece::Arc(a) => {
                // exit point of the ray through q from the circle
                let e = q.abs / q.abs.norm();
                let o = a.center;
                let eo = e.dot(o);
                let disc = a.radius * a.radius - (o.dot(o) - eo * eo);
                let exit = eo + disc.max(0.0).sqrt();
                q.abs.norm() <= exit
            }
        }
    }
}

impl BoundaryModel {
    fn is_inside(&self, q: Query) -> bool {
        if q.abs.x == 0.0 && q.abs.y == 0.0 {
            return true;
        }
        let k = self.piece_by_polar_angle(q.abs.arg());
        self.pieces()[k].contains_radially(q)
    }

    fn owner(&self, q: Query) -> Candidate {
        let mut best: Option<Candidate> = None;
        for (k, piece) in self.pieces().iter().enumerate() {
            if let Some((d, foot)) = piece.claim(q) {
                let better = match best {
                    None => true,
                    Some((bk, bd, _)) => {
                        let prefer_arc = matches!(piece, Piece::Arc(_))
                            && !matches!(self.pieces()[bk], Piece::Arc(_));
                        d < bd || (d <= bd * (1.0 + 1e-12) && prefer_arc)
                    }
                };
                if better {
                    best = Some((k, d, foot));
                }
            }
        }
        best.unwrap_or_else(|| {
            // corner cones at i and (1, 0), or a rounding gap between regions
            let mut fallback = (0, f64::INFINITY, Point2::ORIGIN);
            for (k, piece) in self.pieces().iter().enumerate() {
                let (d, foot) = piece.clamped(q);
                if d < fallback.1 {
                    fallback = (k, d, foot);
                }
            }
            fallback
        })
    }

    /// Project a query given as its offset from `(1, 0)`.
    pub fn project_offset(&self, p_off: Point2) -> ProjectionResult {
        self.project_both(Point2::ONE + p_off, p_off)
    }

    /// `abs` and `p_off` describe the same query; interior points are
    /// returned as given.
    fn project_both(&self, abs: Point2, p_off: Point2) -> ProjectionResult {
        let flip_x = abs.x < 0.0;
        let flip_y = p_off.y < 0.0;
        let off = Point2::new(
            if flip_x { -abs.x - 1.0 } else { p_off.x },
            p_off.y.abs(),
        );
        let q = Query { abs: Point2::new(abs.x.abs(), abs.y.abs()), off };

        let unfold = |o: Point2| {
            let x = if flip_x { -o.x - 2.0 } else { o.x };
            let y = if flip_y { -o.y } else { o.y };
            Point2::new(x, y)
        };
        let to_abs = |o: Point2| {
            let p = Point2::ONE + o;
            Point2::new(if flip_x { -p.x } else { p.x }, if flip_y { -p.y } else { p.y })
        };

        if self.is_inside(q) {
            return ProjectionResult {
                point: abs,
                offset: p_off,
                piece_index: -1,
                distance: 0.0,
                truncation_safe: true,
            };
        }
        let (k, distance, foot) = self.owner(q);
        ProjectionResult {
            point: to_abs(foot),
            offset: unfold(foot),
            piece_index: k as i64,
            distance,
            // on the real axis the answer is (±1, 0) whatever the depth
            truncation_safe: self.is_safe_label(self.pieces()[k].label()) || q.off.y == 0.0,
        }
    }

    pub fn project(&self, p: Point2) -> ProjectionResult {
        self.project_both(p, p - Point2::ONE)
    }

    /// `Π(2e^{iθ/2})`.
    pub fn project_circle(&self, theta: f64) -> ProjectionResult {
        self.project_offset(circle_point_offset(theta))
    }
}

/// Nearest point of `K` to `p`.
pub fn project(p: Point2, model: &BoundaryModel) -> ProjectionResult {
    model.project(p)
}

/// `t_n = α_n + α_{next(n)}`, the circle parameter whose projection is `T_n`.
pub fn param_t(seq: &AlphaSequence, n: usize) -> Result<f64> {
    if n == 0 || !seq.is_vertex(n) {
        return Err(Error::IndexOutOfRange { n, min: 1, max: usize::MAX });
    }
    Ok(seq.alpha(n) + seq.alpha(seq.next_index(n)))
}

/// The parameters around the arc `C_n` together with their differences,
/// each evaluated without cancellation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArcParams {
    pub n: usize,
    /// `t_{prev(n)}`
    pub t_prev: f64,
    pub s: f64,
    pub t: f64,
    /// `t_{prev(n)} - s_n`
    pub t_prev_minus_s: f64,
    /// `s_n - t_n`
    pub s_minus_t: f64,
}

/// Closed-form `s_n` and the gaps to its neighbours.
///
/// In the frame of the chord `A_{n-1} A_n` (normal angle `σ`), `S_n` has
/// tangential coordinate `τ = sin(b'/2) - sin(b/2)`, so the point of the
/// normal ray at distance 2 from the origin sits at angle `σ + asin(τ/2)`.
pub fn arc_params(seq: &AlphaSequence, n: usize) -> Result<ArcParams> {
    if n < seq.first_arc() {
        return Err(Error::IndexOutOfRange { n, min: seq.first_arc(), max: usize::MAX });
    }
    let p = seq.prev_index(n);
    let b = seq.diff(p, n);
    let b_next = seq.diff(n, n + 1);
    let tau = -2.0 * (0.25 * (b + b_next)).cos() * (0.25 * seq.kink(n)).sin();
    let t_prev_minus_s = 2.0 * (0.5 * tau.abs()).asin();
    let t_prev = seq.alpha(p) + seq.alpha(n);
    Ok(ArcParams {
        n,
        t_prev,
        s: t_prev + 2.0 * (0.5 * tau).asin(),
        t: seq.alpha(n) + seq.alpha(n + 1),
        t_prev_minus_s,
        s_minus_t: seq.diff(p, n + 1) - t_prev_minus_s,
    })
}

/// `s_n`, defined by `Π(2e^{i s_n/2}) = S_n`.
pub fn solve_param_s(seq: &AlphaSequence, n: usize) -> Result<f64> {
    Ok(arc_params(seq, n)?.s)
}

/// Worst violation of `‖Π(x) - Π(y)‖ <= ‖x - y‖` over a batch of pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonexpansiveReport {
    pub pairs: usize,
    /// `max ‖Π(x) - Π(y)‖ - ‖x - y‖`; zero for an empty batch.
    pub max_excess: f64,
    pub worst_pair: Option<usize>,
}

impl NonexpansiveReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_excess <= tol
    }
}

pub fn nonexpansiveness_check(
    model: &BoundaryModel,
    pairs: &[(Point2, Point2)],
    exec: Execution,
) -> NonexpansiveReport {
    let excess = exec.map(pairs, |&(x, y)| {
        let (px, py) = (model.project(x), model.project(y));
        px.point.dist(py.point) - x.dist(y)
    });
    let mut report = NonexpansiveReport { pairs: pairs.len(), max_excess: 0.0, worst_pair: None };
    for (i, &e) in excess.iter().enumerate() {
        if report.worst_pair.is_none() || e > report.max_excess {
            report.max_excess = e;
            report.worst_pair = Some(i);
        }
    }
    report
}

/// Points spaced roughly `length / count` apart along the whole boundary of
/// the truncated set, including the mirrored quadrants.
pub fn sample_boundary(model: &BoundaryModel, count: usize) -> Vec<Point2> {
    let per_quadrant = (count / 4).max(1);
    let total: f64 = model.pieces().iter().map(Piece::length).sum();
    let step = total / per_quadrant as f64;
    let mut quadrant = Vec::with_capacity(per_quadrant + model.pieces().len());
    for piece in model.pieces() {
        let k = (piece.length() / step).ceil().max(1.0) as usize;
        for j in 0..k {
            let t = j as f64 / k as f64;
            quadrant.push(match piece {
                Piece::Segment(s) | Piece::Closure(s) => s.from + (s.to - s.from) * t,
                Piece::Arc(a) => a.point_at(a.span * (1.0 - t)),
            });
        }
    }
    quadrant.push(Point2::ONE);
    let mut all = Vec::with_capacity(4 * quadrant.len());
    for (sx, sy) in [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)] {
        all.extend(quadrant.iter().map(|p| Point2::new(sx * p.x, sy * p.y)));
    }
    all
}

/// Distance from `p` to the nearest sample.
pub fn brute_force_distance(samples: &[Point2], p: Point2) -> f64 {
    samples.iter().map(|s| s.dist(p)).fold(f64::INFINITY, f64::min)
}
