//! JSON and SVG renderings of the boundary model and quotient samples.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::analysis::{GridMark, QuotientSample};
use crate::error::{Error, Result};
use crate::geometry::{build_boundary, midpoint_t, tangency_s, vertex_a, BoundaryModel, Piece};
use crate::numeric::fmt_f64;
use crate::point::Point2;
use crate::sequences::{make_sequence, SequenceSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Symmetry {
    pub real_axis: bool,
    pub imaginary_axis: bool,
}

/// Serialized form of one boundary piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PieceDoc {
    Segment {
        index: usize,
        from: Point2,
        to: Point2,
    },
    Arc {
        index: usize,
        center: Point2,
        radius: f64,
        start_angle: f64,
        end_angle: f64,
        start: Point2,
        end: Point2,
    },
    Closure {
        index: usize,
        from: Point2,
        to: Point2,
    },
}

impl From<&Piece> for PieceDoc {
    fn from(p: &Piece) -> Self {
        match p {
            Piece::Segment(s) => PieceDoc::Segment { index: s.index, from: s.from, to: s.to },
            Piece::Closure(s) => PieceDoc::Closure { index: s.index, from: s.from, to: s.to },
            Piece::Arc(a) => PieceDoc::Arc {
                index: a.index,
                center: a.center,
                radius: a.radius,
                start_angle: a.start_angle,
                end_angle: a.end_angle,
                start: a.start,
                end: a.end,
            },
        }
    }
}

/// First-quadrant boundary chain as written to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryDoc {
    pub sequence: SequenceSpec,
    pub depth: usize,
    pub symmetry: Symmetry,
    pub pieces: Vec<PieceDoc>,
}

impl BoundaryDoc {
    pub fn from_model(model: &BoundaryModel) -> Self {
        Self {
            sequence: model.seq().spec(),
            depth: model.depth(),
            symmetry: Symmetry {
                real_axis: model.symmetric_real_axis(),
                imaginary_axis: model.symmetric_imaginary_axis(),
            },
            pieces: model.pieces().iter().map(PieceDoc::from).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Rebuild the model and check that it reproduces every stored piece.
    pub fn to_model(&self) -> Result<BoundaryModel> {
        let model = build_boundary(&make_sequence(self.sequence)?, self.depth)?;
        if BoundaryDoc::from_model(&model) != *self {
            return Err(Error::Degenerate("stored pieces differ from the rebuilt model".into()));
        }
        Ok(model)
    }
}

/// Load a boundary model from its JSON form.
pub fn load_boundary(json: &str) -> Result<BoundaryModel> {
    BoundaryDoc::from_json(json)?.to_model()
}

fn xy(p: Point2) -> String {
    format!("{} {}", fmt_f64(p.x), fmt_f64(p.y))
}

/// SVG path data for the first-quadrant chain, from `i` to `(1, 0)`.
pub fn quadrant_path(model: &BoundaryModel) -> String {
    let mut d = format!("M {}", xy(model.pieces()[0].start()));
    for piece in model.pieces() {
        match piece {
            Piece::Segment(s) | Piece::Closure(s) => write!(d, " L {}", xy(s.to)),
            // arcs run clockwise about their centers
            Piece::Arc(a) => write!(d, " A {r} {r} 0 0 0 {}", xy(a.end), r = fmt_f64(a.radius)),
        }
        .expect("writing to a String");
    }
    d
}

/// Which construction points to annotate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Annotations {
    pub from: usize,
    pub to: usize,
}

/// `∂K` with the arcs highlighted and `A_n`, `T_n`, `S_n`, `O_n` marked for
/// `n` in the annotation range. Drawn in model coordinates under a y-flip.
pub fn boundary_svg(model: &BoundaryModel, annotate: Option<Annotations>) -> Result<String> {
    let mut out = String::new();
    let w = |out: &mut String, s: String| out.push_str(&s);
    w(&mut out, String::from(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" xmlns:xlink=\"http://www.w3.org/1999/xlink\" \
         viewBox=\"-1.25 -1.25 2.5 2.5\" width=\"800\" height=\"800\">\n",
    ));
    w(&mut out, String::from(
        "<style>path{fill:none;vector-effect:non-scaling-stroke}\
         .boundary{stroke:#222;stroke-width:1.5}.arc{stroke:#d62728;stroke-width:3}\
         .mark{vector-effect:non-scaling-stroke;stroke:none}.A{fill:#1f77b4}.T{fill:#2ca02c}\
         .S{fill:#ff7f0e}.O{fill:#9467bd}text{font:0.04px sans-serif}</style>\n",
    ));
    let seq = model.seq();
    w(&mut out, format!("<title>boundary, case {} depth {}</title>\n", seq.family(), model.depth()));
    w(&mut out, String::from("<g transform=\"scale(1,-1)\">\n"));
    w(&mut out, format!("<path id=\"quadrant\" class=\"boundary\" d=\"{}\"/>\n", quadrant_path(model)));
    for t in ["scale(-1,1)", "scale(1,-1)", "scale(-1,-1)"] {
        w(&mut out, format!("<use xlink:href=\"#quadrant\" href=\"#quadrant\" transform=\"{t}\"/>\n"));
    }
    for a in model.arcs() {
        w(&mut out, format!(
            "<path class=\"arc\" data-n=\"{}\" d=\"M {} A {r} {r} 0 0 0 {}\"/>\n",
            a.index,
            xy(a.start),
            xy(a.end),
            r = fmt_f64(a.radius)
        ));
    }
    w(&mut out, String::from("</g>\n"));

    if let Some(Annotations { from, to }) = annotate {
        let first = seq.first_arc();
        let to = to.min(model.depth());
        for n in from.max(first)..=to {
            let arc = model.arc(n).ok_or(Error::IndexOutOfRange { n, min: first, max: model.depth() })?;
            let marks = [
                ("A", vertex_a(seq, n)),
                ("T", midpoint_t(seq, n)?),
                ("S", tangency_s(seq, n)?),
                ("O", arc.center),
            ];
            for (class, p) in marks {
                w(&mut out, format!(
                    "<circle class=\"mark {class}\" data-n=\"{n}\" cx=\"{}\" cy=\"{}\" r=\"0.008\"/>\
                     <text x=\"{}\" y=\"{}\">{class}{n}</text>\n",
                    fmt_f64(p.x),
                    fmt_f64(-p.y),
                    fmt_f64(p.x + 0.012),
                    fmt_f64(-p.y - 0.012),
                ));
            }
        }
    }
    w(&mut out, String::from("</svg>\n"));
    Ok(out)
}

/// `Im D(θ)` against `log₁₀ θ`, with `t_n` and `s_n` samples marked.
pub fn quotient_plot_svg(samples: &[(QuotientSample, GridMark)], title: &str) -> String {
    let (width, height, pad) = (800.0, 500.0, 60.0);
    let logs: Vec<f64> = samples.iter().map(|(s, _)| s.theta.log10()).collect();
    let (mut x0, mut x1) = logs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if x1 <= x0 || x1.is_nan() || x0.is_nan() {
        x0 -= 1.0;
        x1 += 1.0;
    }
    let (y0, y1) = (0.0, 1.0);
    let sx = |v: f64| pad + (v - x0) / (x1 - x0) * (width - 2.0 * pad);
    let sy = |v: f64| height - pad - (v - y0) / (y1 - y0) * (height - 2.0 * pad);

    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {width} {height}\" width=\"{width}\" height=\"{height}\">\n\
         <style>.axis{{stroke:#444}}.grid{{stroke:#ddd}}.t{{fill:#2ca02c}}.s{{fill:#ff7f0e}}\
         .dyadic{{fill:#1f77b4}}text{{font:12px sans-serif}}</style>\n\
         <title>{title}</title>\n"
    );
    let (bx0, bx1, by0, by1) = (sx(x0), sx(x1), sy(y0), sy(y1));
    let _ = writeln!(out, "<line class=\"axis\" x1=\"{bx0}\" y1=\"{by0}\" x2=\"{bx1}\" y2=\"{by0}\"/>");
    let _ = writeln!(out, "<line class=\"axis\" x1=\"{bx0}\" y1=\"{by0}\" x2=\"{bx0}\" y2=\"{by1}\"/>");
    for k in 0..=4 {
        let v = k as f64 * 0.25;
        let y = sy(v);
        let _ = writeln!(out, "<line class=\"grid\" x1=\"{bx0}\" y1=\"{y}\" x2=\"{bx1}\" y2=\"{y}\"/>");
        let _ = writeln!(out, "<text x=\"{}\" y=\"{}\">{v}</text>", pad - 40.0, y + 4.0);
    }
    let _ = writeln!(out, "<text x=\"{}\" y=\"{}\">log10 theta</text>", width / 2.0, height - 15.0);
    let _ = writeln!(out, "<text x=\"10\" y=\"{}\">Im D</text>", pad - 20.0);
    for ((s, mark), lx) in samples.iter().zip(&logs) {
        let class = match mark {
            GridMark::T => "t",
            GridMark::S => "s",
            GridMark::Dyadic => "dyadic",
        };
        let _ = writeln!(
            out,
            "<circle class=\"{class}\" cx=\"{:.3}\" cy=\"{:.3}\" r=\"3\"><title>theta={} Dy={}</title></circle>",
            sx(*lx),
            sy(s.quotient.y),
            fmt_f64(s.theta),
            fmt_f64(s.quotient.y)
        );
    }
    out.push_str("</svg>\n");
    out
}
