//! Vertices, tangency points, arcs and the truncated boundary of `K`.
//!
//! Every construction point near `(1, 0)` is also available as an offset
//! from `(1, 0)`, evaluated from `A - 1 = (-2 sin²(α/2), sin α)` and
//! local-frame displacements. Those offsets keep full relative precision at
//! the scale of the construction, where the absolute coordinates have long
//! since rounded to 1.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::numeric::{one_minus_cos, sinc_m1, xcot_m1};
use crate::point::Point2;
use crate::sequences::AlphaSequence;

fn check_vertex(seq: &AlphaSequence, n: usize) -> Result<()> {
    if n == 0 || !seq.is_vertex(n) {
        return Err(Error::IndexOutOfRange { n, min: seq.first_arc(), max: usize::MAX });
    }
    Ok(())
}

fn check_arc(seq: &AlphaSequence, n: usize) -> Result<()> {
    if n < seq.first_arc() {
        return Err(Error::IndexOutOfRange { n, min: seq.first_arc(), max: usize::MAX });
    }
    Ok(())
}

/// `A_n = e^{iα_n}`.
pub fn vertex_a(seq: &AlphaSequence, n: usize) -> Point2 {
    Point2::polar(1.0, seq.alpha(n))
}

/// `e^{iα} - 1` without cancellation.
pub fn vertex_offset(alpha: f64) -> Point2 {
    Point2::new(-one_minus_cos(alpha), alpha.sin())
}

/// Midpoint `T_n` of the chord from `A_n` to its successor.
pub fn midpoint_t(seq: &AlphaSequence, n: usize) -> Result<Point2> {
    check_vertex(seq, n)?;
    let m = seq.next_index(n);
    let half_gap = 0.5 * seq.diff(n, m);
    let mid_angle = 0.5 * (seq.alpha(n) + seq.alpha(m));
    Ok(Point2::polar(half_gap.cos(), mid_angle))
}

/// `T_n - 1`.
pub fn midpoint_t_offset(seq: &AlphaSequence, n: usize) -> Result<Point2> {
    check_vertex(seq, n)?;
    let (a, b) = (seq.alpha(n), seq.alpha(seq.next_index(n)));
    Ok((vertex_offset(a) + vertex_offset(b)) * 0.5)
}

/// Unit vector along the chord from `A_n` towards its predecessor.
fn chord_direction(seq: &AlphaSequence, n: usize) -> Point2 {
    let sigma = 0.5 * (seq.alpha(seq.prev_index(n)) + seq.alpha(n));
    Point2::polar(1.0, sigma).perp()
}

/// `S_n - 1`.
pub fn tangency_s_offset(seq: &AlphaSequence, n: usize) -> Result<Point2> {
    check_arc(seq, n)?;
    let p = seq.prev_index(n);
    let reach = (0.5 * seq.diff(n, n + 1)).sin();
    let chord = 2.0 * (0.5 * seq.diff(p, n)).sin();
    if reach.is_nan() || reach > chord {
        return Err(Error::Degenerate(format!(
            "tangency distance {reach} exceeds chord length {chord} at n = {n}"
        )));
    }
    Ok(vertex_offset(seq.alpha(n)) + chord_direction(seq, n) * reach)
}

/// Tangency point `S_n` on the chord `A_{n-1} A_n`, at distance
/// `sin((α_n - α_{n+1})/2)` from `A_n`.
pub fn tangency_s(seq: &AlphaSequence, n: usize) -> Result<Point2> {
    Ok(Point2::ONE + tangency_s_offset(seq, n)?)
}

/// Angles of the kite at vertex `A_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KiteAngles {
    /// Central angle subtending the two neighbouring vertices.
    pub phi: f64,
    /// Interior angle of the polygon at `A_n`.
    pub psi: f64,
}

pub fn kite_angles(seq: &AlphaSequence, n: usize) -> Result<KiteAngles> {
    check_arc(seq, n)?;
    let phi = 2.0 * PI - seq.diff(seq.prev_index(n), n + 1);
    Ok(KiteAngles { phi, psi: 0.5 * phi })
}

/// Angular span `π - ψ_n` of the arc `C_n`.
pub fn arc_span(seq: &AlphaSequence, n: usize) -> Result<f64> {
    check_arc(seq, n)?;
    Ok(0.5 * seq.diff(seq.prev_index(n), n + 1))
}

/// `r_n = sin((α_n - α_{n+1})/2) / tan((α_{n-1} - α_{n+1})/4)`.
pub fn arc_radius(seq: &AlphaSequence, n: usize) -> Result<f64> {
    check_arc(seq, n)?;
    let b = seq.diff(n, n + 1);
    let f = seq.diff(seq.prev_index(n), n + 1);
    Ok((0.5 * b).sin() / (0.25 * f).tan())
}

/// Center `O_n`, on the ray from the origin through `T_n`.
pub fn arc_center(seq: &AlphaSequence, n: usize) -> Result<Point2> {
    let r = arc_radius(seq, n)?;
    let ell = (0.5 * seq.diff(n, n + 1)).cos();
    if r >= ell {
        return Err(Error::Degenerate(format!("radius {r} reaches |T_{n}| = {ell}")));
    }
    let mid_angle = 0.5 * (seq.alpha(n) + seq.alpha(n + 1));
    Ok(Point2::polar(ell - r, mid_angle))
}

/// `|r_n - 2(α_n - α_{n+1})/(α_{n-1} - α_{n+1})|`, evaluated as
/// `L · |(1+ε₁)(1+ε₂) - 1|` so that it stays accurate far below `1e-16`.
pub fn radius_asymptotic_gap(seq: &AlphaSequence, n: usize) -> Result<f64> {
    check_arc(seq, n)?;
    let b = seq.diff(n, n + 1);
    let f = seq.diff(seq.prev_index(n), n + 1);
    let lead = 2.0 * b / f;
    let e1 = sinc_m1(0.5 * b);
    let e2 = xcot_m1(0.25 * f);
    Ok(lead * (e1 + e2 + e1 * e2).abs())
}

/// A straight piece of the boundary, traversed from `from` (larger polar
/// angle) to `to`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentPiece {
    pub index: usize,
    pub from: Point2,
    pub to: Point2,
    pub(crate) from_offset: Point2,
    pub(crate) to_offset: Point2,
    /// Vertex at the low-angle end of the supporting chord.
    pub(crate) base: Point2,
    pub(crate) base_offset: Point2,
    /// Unit tangent pointing from `base` towards `from`.
    pub(crate) dir: Point2,
    /// Outward unit normal.
    pub(crate) normal: Point2,
    pub(crate) normal_angle: f64,
    /// Distance from the origin to the supporting line.
    pub(crate) support: f64,
    /// Tangential coordinates of `from` and `to`, measured from `base`.
    pub(crate) w_from: f64,
    pub(crate) w_to: f64,
}

impl SegmentPiece {
    #[allow(clippy::too_many_arguments)]
    fn new(
        index: usize,
        base_offset: Point2,
        normal_angle: f64,
        support: f64,
        w_from: f64,
        w_to: f64,
        from_offset: Point2,
        to_offset: Point2,
    ) -> Self {
        let normal = Point2::polar(1.0, normal_angle);
        Self {
            index,
            from: Point2::ONE + from_offset,
            to: Point2::ONE + to_offset,
            from_offset,
            to_offset,
            base: Point2::ONE + base_offset,
            base_offset,
            dir: normal.perp(),
            normal,
            normal_angle,
            support,
            w_from,
            w_to,
        }
    }

    pub fn normal_angle(&self) -> f64 {
        self.normal_angle
    }

    pub fn length(&self) -> f64 {
        self.w_from - self.w_to
    }

    /// Outward unit normal.
    pub fn normal(&self) -> Point2 {
        self.normal
    }
}

/// A circular arc `C_n` from `S_n` (at `start_angle` about the center) down
/// to `T_n` (at `end_angle`).
#[derive(Debug, Clone, PartialEq)]
pub struct ArcPiece {
    pub index: usize,
    pub center: Point2,
    pub radius: f64,
    pub start_angle: f64,
    pub end_angle: f64,
    pub start: Point2,
    pub end: Point2,
    pub(crate) start_offset: Point2,
    pub(crate) end_offset: Point2,
    /// `|O_n| = |T_n| - r_n`.
    pub(crate) center_dist: f64,
    /// `start_angle - end_angle`, from the closed form.
    pub(crate) span: f64,
}

impl ArcPiece {
    pub fn span(&self) -> f64 {
        self.span
    }

    pub fn length(&self) -> f64 {
        self.radius * self.span
    }

    /// Point at local angle `delta ∈ [0, span]` above `end_angle`, as an
    /// offset from `(1, 0)`.
    pub fn offset_at(&self, delta: f64) -> Point2 {
        let chord = 2.0 * self.radius * (0.5 * delta).sin();
        self.end_offset + Point2::polar(chord, self.end_angle + 0.5 * delta).perp()
    }

    pub fn point_at(&self, delta: f64) -> Point2 {
        Point2::ONE + self.offset_at(delta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PieceKind {
    Segment,
    Arc,
    Closure,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Piece {
    Segment(SegmentPiece),
    Arc(ArcPiece),
    /// Chord from `T_N` to `(1, 0)` closing the truncated chain.
    Closure(SegmentPiece),
}

impl Piece {
    pub fn kind(&self) -> PieceKind {
        match self {
            Piece::Segment(_) => PieceKind::Segment,
            Piece::Arc(_) => PieceKind::Arc,
            Piece::Closure(_) => PieceKind::Closure,
        }
    }

    /// The construction index `n` the piece belongs to.
    pub fn label(&self) -> usize {
        match self {
            Piece::Segment(s) | Piece::Closure(s) => s.index,
            Piece::Arc(a) => a.index,
        }
    }

    /// Endpoint with the larger polar angle.
    pub fn start(&self) -> Point2 {
        match self {
            Piece::Segment(s) | Piece::Closure(s) => s.from,
            Piece::Arc(a) => a.start,
        }
    }

    pub fn end(&self) -> Point2 {
        match self {
            Piece::Segment(s) | Piece::Closure(s) => s.to,
            Piece::Arc(a) => a.end,
        }
    }

    pub fn start_offset(&self) -> Point2 {
        match self {
            Piece::Segment(s) | Piece::Closure(s) => s.from_offset,
            Piece::Arc(a) => a.start_offset,
        }
    }

    pub fn end_offset(&self) -> Point2 {
        match self {
            Piece::Segment(s) | Piece::Closure(s) => s.to_offset,
            Piece::Arc(a) => a.end_offset,
        }
    }

    pub fn length(&self) -> f64 {
        match self {
            Piece::Segment(s) | Piece::Closure(s) => s.length(),
            Piece::Arc(a) => a.length(),
        }
    }

    /// Outward normal angles at the start and end of the piece.
    pub fn normal_angles(&self) -> (f64, f64) {
        match self {
            Piece::Segment(s) | Piece::Closure(s) => (s.normal_angle, s.normal_angle),
            Piece::Arc(a) => (a.start_angle, a.end_angle),
        }
    }

    /// Outward unit normal at `start()` and `end()`.
    pub fn end_normals(&self) -> (Point2, Point2) {
        let (s, e) = self.normal_angles();
        (Point2::polar(1.0, s), Point2::polar(1.0, e))
    }
}

/// The first-quadrant boundary chain of the truncated set, from `i` down to
/// `(1, 0)`. The rest of `∂K` is its image under the two axis reflections.
#[derive(Debug, Clone)]
pub struct BoundaryModel {
    seq: AlphaSequence,
    depth: usize,
    pieces: Vec<Piece>,
    /// Polar angles of the piece starts, decreasing.
    start_angles: Vec<f64>,
}

impl BoundaryModel {
    pub fn seq(&self) -> &AlphaSequence {
        &self.seq
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Reflection in the real axis maps the set onto itself.
    pub fn symmetric_real_axis(&self) -> bool {
        true
    }

    /// Reflection in the imaginary axis maps the set onto itself.
    pub fn symmetric_imaginary_axis(&self) -> bool {
        true
    }

    /// Pieces labelled up to `depth - 2` are never influenced by the closure.
    pub fn is_safe_label(&self, label: usize) -> bool {
        label + 2 <= self.depth
    }

    /// Largest index whose `t_n`, `s_n` and `t_{n-1}` all project onto safe pieces.
    pub fn max_safe_index(&self) -> usize {
        self.depth - 2
    }

    /// Chain position of the arc `C_n`.
    pub fn arc_position(&self, n: usize) -> Option<usize> {
        let first = self.seq.first_arc();
        (first..=self.depth).contains(&n).then(|| 1 + 2 * (n - first))
    }

    pub fn arc(&self, n: usize) -> Option<&ArcPiece> {
        match self.pieces.get(self.arc_position(n)?) {
            Some(Piece::Arc(a)) => Some(a),
            _ => None,
        }
    }

    pub fn arcs(&self) -> impl Iterator<Item = &ArcPiece> {
        self.pieces.iter().filter_map(|p| match p {
            Piece::Arc(a) => Some(a),
            _ => None,
        })
    }

    /// Index of the piece whose polar-angle range contains `phi ∈ [0, π/2]`.
    pub(crate) fn piece_by_polar_angle(&self, phi: f64) -> usize {
        // start angles decrease along the chain; find the last start >= phi
        let k = self.start_angles.partition_point(|&a| a >= phi);
        k.saturating_sub(1).min(self.pieces.len() - 1)
    }

    /// Index of the piece whose ordinate range contains `y ∈ [0, 1]`.
    fn piece_by_ordinate(&self, y: f64) -> usize {
        let k = self.pieces.partition_point(|p| p.end().y > y);
        k.min(self.pieces.len() - 1)
    }

    fn is_junction(&self, y: f64) -> bool {
        y == 0.0 || y == 1.0 || self.pieces.iter().any(|p| p.end().y == y || p.start().y == y)
    }

    /// `1 - x(y)` and the owning piece, for `y ∈ [0, 1]`.
    fn deficit_and_piece(&self, y: f64) -> (f64, usize) {
        let k = self.piece_by_ordinate(y);
        let dx = match &self.pieces[k] {
            Piece::Segment(s) | Piece::Closure(s) => {
                let w = (y - s.base.y) / s.dir.y;
                s.base_offset.x + w * s.dir.x
            }
            Piece::Arc(a) => {
                let delta = arc_local_angle_at(a, y);
                a.end_offset.x
                    - 2.0 * a.radius * (a.end_angle + 0.5 * delta).sin() * (0.5 * delta).sin()
            }
        };
        (-dx, k)
    }

    fn check_ordinate(y: f64) -> Result<f64> {
        if y.is_nan() || y.abs() > 1.0 {
            return Err(Error::OutOfDomain { what: "y", value: y });
        }
        Ok(y.abs())
    }

    /// Abscissa of `∂K ∩ {x >= 0}` at ordinate `y`.
    pub fn x(&self, y: f64) -> Result<f64> {
        Ok(1.0 - self.x_deficit(y)?)
    }

    /// `1 - x(y)`, without cancellation near `y = 0`.
    pub fn x_deficit(&self, y: f64) -> Result<f64> {
        let y = Self::check_ordinate(y)?;
        Ok(self.deficit_and_piece(y).0)
    }

    /// `x'(y)`; at `y = 0` the value follows from the reflection symmetry.
    pub fn x_prime(&self, y: f64) -> Result<f64> {
        let ya = Self::check_ordinate(y)?;
        if ya == 0.0 {
            return Ok(0.0);
        }
        let k = self.piece_by_ordinate(ya);
        let slope = match &self.pieces[k] {
            Piece::Segment(s) | Piece::Closure(s) => s.dir.x / s.dir.y,
            Piece::Arc(a) => -(a.end_angle + arc_local_angle_at(a, ya)).tan(),
        };
        Ok(if y < 0.0 { -slope } else { slope })
    }

    /// `x''(y)`; `None` at junctions, where it does not exist.
    pub fn x_second(&self, y: f64) -> Result<Option<f64>> {
        let ya = Self::check_ordinate(y)?;
        if self.is_junction(ya) {
            return Ok(None);
        }
        let k = self.piece_by_ordinate(ya);
        Ok(Some(match &self.pieces[k] {
            Piece::Segment(_) | Piece::Closure(_) => 0.0,
            Piece::Arc(a) => {
                let c = (a.end_angle + arc_local_angle_at(a, ya)).cos();
                -1.0 / (a.radius * c * c * c)
            }
        }))
    }
}

/// Local angle above `end_angle` of the arc point with ordinate `y`.
fn arc_local_angle_at(a: &ArcPiece, y: f64) -> f64 {
    // y - O.y = (y - T.y) + r sin γ
    let s = ((y - a.end.y) / a.radius + a.end_angle.sin()).clamp(-1.0, 1.0);
    (s.asin() - a.end_angle).clamp(0.0, a.span)
}

/// Abscissa of the boundary at ordinate `y ∈ [-1, 1]`.
pub fn boundary_x(model: &BoundaryModel, y: f64) -> Result<f64> {
    model.x(y)
}

pub fn boundary_x_prime(model: &BoundaryModel, y: f64) -> Result<f64> {
    model.x_prime(y)
}

pub fn boundary_x_second(model: &BoundaryModel, y: f64) -> Result<Option<f64>> {
    model.x_second(y)
}

fn build_arc(seq: &AlphaSequence, n: usize) -> Result<ArcPiece> {
    let radius = arc_radius(seq, n)?;
    let center = arc_center(seq, n)?;
    let p = seq.prev_index(n);
    let start_angle = 0.5 * (seq.alpha(p) + seq.alpha(n));
    let end_angle = 0.5 * (seq.alpha(n) + seq.alpha(n + 1));
    let start_offset = tangency_s_offset(seq, n)?;
    let end_offset = midpoint_t_offset(seq, n)?;
    Ok(ArcPiece {
        index: n,
        center,
        radius,
        start_angle,
        end_angle,
        start: Point2::ONE + start_offset,
        end: Point2::ONE + end_offset,
        start_offset,
        end_offset,
        center_dist: (0.5 * seq.diff(n, n + 1)).cos() - radius,
        span: arc_span(seq, n)?,
    })
}

/// Straight piece on the chord from `A_n` to its successor, running from
/// `T_n` (or from `A_1` when `n = 1`) down to the successor's tangency point.
fn build_segment(seq: &AlphaSequence, n: usize) -> Result<SegmentPiece> {
    let m = seq.next_index(n);
    let (an, am) = (seq.alpha(n), seq.alpha(m));
    let half = 0.5 * seq.diff(n, m);
    let (w_from, from_offset) = if n == 1 {
        (2.0 * half.sin(), Point2::new(-1.0, 1.0))
    } else {
        (half.sin(), midpoint_t_offset(seq, n)?)
    };
    Ok(SegmentPiece::new(
        n,
        vertex_offset(am),
        0.5 * (an + am),
        half.cos(),
        w_from,
        (0.5 * seq.diff(m, m + 1)).sin(),
        from_offset,
        tangency_s_offset(seq, m)?,
    ))
}

fn build_closure(seq: &AlphaSequence, depth: usize) -> Result<SegmentPiece> {
    let t_off = midpoint_t_offset(seq, depth)?;
    let len = t_off.norm();
    let dir = t_off / len;
    // outward normal = dir rotated by -90°
    let normal_angle = (-dir.x).atan2(dir.y);
    Ok(SegmentPiece::new(depth, Point2::ORIGIN, normal_angle, dir.y, len, 0.0, t_off, Point2::ORIGIN))
}

/// Build the truncated chain: the segment from `i`, then arc `C_n` and the
/// segment leaving `T_n` for `n` from the first arc up to `depth`, closed by
/// the chord from `T_depth` to `(1, 0)`.
pub fn build_boundary(seq: &AlphaSequence, depth: usize) -> Result<BoundaryModel> {
    let min = seq.n_min() + 2;
    if depth < min {
        return Err(Error::DepthTooSmall { depth, min });
    }
    let cap = seq.max_depth();
    if depth > cap {
        return Err(Error::DepthExceedsCap { depth, cap });
    }
    let first = seq.first_arc();
    let mut pieces = Vec::with_capacity(2 * (depth - first) + 3);
    pieces.push(Piece::Segment(build_segment(seq, 1)?));
    for n in first..=depth {
        pieces.push(Piece::Arc(build_arc(seq, n)?));
        if n < depth {
            pieces.push(Piece::Segment(build_segment(seq, n)?));
        }
    }
    pieces.push(Piece::Closure(build_closure(seq, depth)?));

    let start_angles = pieces
        .iter()
        .map(|p| match p {
            Piece::Segment(s) if s.index == 1 => FRAC_PI_2,
            _ => p.start().arg(),
        })
        .collect();
    Ok(BoundaryModel { seq: seq.clone(), depth, pieces, start_angles })
}
