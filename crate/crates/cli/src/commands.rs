use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use smoothk::analysis::{quotient_grid, GridMark, QuotientGrid, Verification};
use smoothk::export::{boundary_svg, quotient_plot_svg, Annotations, BoundaryDoc};
use smoothk::numeric::fmt_f64;
use smoothk::sequences::{check_condition_c1, min_valid_index};
use smoothk::{build_boundary, verify_lemma, AlphaSequence, Family, LemmaId, Point2, VerifyOptions};

use crate::config::{Format, RunConfig};
use crate::exit::{CliError, CONDITION_FAILED, DEPTH_GUARD, LEMMA_FAILED};

/// `println!` that tolerates a closed stdout, as when piped into `head`.
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

/// Build depth when neither `--depth` nor `--range` asks for more.
fn default_depth(seq: &AlphaSequence) -> usize {
    let d = match seq.family() {
        Family::A => 40,
        Family::B => 20,
        Family::C => 10,
    };
    (seq.first_arc() + d).min(seq.max_depth())
}

/// Depth from the config, checked against the range guard.
fn resolve_depth(cfg: &RunConfig, seq: &AlphaSequence) -> Result<usize, CliError> {
    let needed = cfg.range.map(|r| r[1] + 2);
    match (cfg.depth, needed) {
        (Some(d), Some(n)) if d < n => {
            Err(smoothk::Error::TruncationUnsafe { label: n - 2, depth: d }.into())
        }
        (Some(d), _) => Ok(d),
        (None, Some(n)) => Ok(n.max(default_depth(seq))),
        (None, None) => Ok(default_depth(seq)),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(smoothk::Error::from)?;
    s.push('\n');
    Ok(s)
}

/// Creates the output directory and records the resolved config there.
struct Output {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Output {
    fn open(cfg: &RunConfig) -> Result<Self, CliError> {
        std::fs::create_dir_all(&cfg.output).map_err(|e| CliError::io(&cfg.output, e))?;
        let mut out = Self { dir: cfg.output.clone(), written: Vec::new() };
        out.write("config.json", &to_json(cfg)?)?;
        Ok(out)
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        write_file(&path, contents)?;
        self.written.push(path);
        Ok(())
    }

    fn write_csv(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let io = |e: csv::Error| CliError::new(crate::exit::IO, format!("{}: {e}", path.display()));
        let mut w = csv::Writer::from_path(&path).map_err(io)?;
        w.write_record(header).map_err(io)?;
        for row in rows {
            w.write_record(row).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    fn report(&self) {
        for p in &self.written {
            out!("wrote {}", p.display());
        }
    }
}

pub fn validate(cfg: &RunConfig) -> Result<u8, CliError> {
    let raw = AlphaSequence::unvalidated(cfg.sequence)?;
    let horizon = raw.default_horizon();
    let raw_report = check_condition_c1(&raw, horizon);
    let n_min = match min_valid_index(&raw, horizon) {
        Ok(n) => Some(n),
        Err(smoothk::Error::NoValidIndex { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let out = json!({
        "config": cfg,
        "horizon": horizon,
        "first_failure": raw_report.first_failure,
        "n_min": n_min,
        "passed": n_min.is_some(),
    });
    out!("{}", to_json(&out)?.trim_end());
    if n_min.is_some() {
        return Ok(0);
    }
    let index = raw_report.first_failure.map_or(horizon, |f| f.index);
    eprintln!("construction condition fails at n = {index}; no start index up to {horizon}");
    Ok(CONDITION_FAILED)
}

pub fn construct(cfg: &mut RunConfig) -> Result<u8, CliError> {
    let seq = cfg.sequence()?;
    let depth = resolve_depth(cfg, &seq)?;
    let first = seq.first_arc();
    let [from, to] = cfg.range.unwrap_or([first, (first + 2).min(depth - 2)]);
    if from < first {
        return Err(CliError::usage(format!("annotation range must start at n >= {first}")));
    }
    let model = build_boundary(&seq, depth)?;
    cfg.depth = Some(depth);
    cfg.range = Some([from, to]);

    let mut out = Output::open(cfg)?;
    if cfg.wants(Format::Json) {
        out.write("boundary.json", &(BoundaryDoc::from_model(&model).to_json()? + "\n"))?;
    }
    if cfg.wants(Format::Svg) {
        out.write("boundary.svg", &boundary_svg(&model, Some(Annotations { from, to }))?)?;
    }
    if cfg.wants(Format::Csv) {
        let header = ["type", "index", "start_x", "start_y", "end_x", "end_y", "length"].map(String::from);
        let rows: Vec<Vec<String>> = model
            .pieces()
            .iter()
            .map(|p| {
                let kind = serde_json::to_value(p.kind()).map_err(smoothk::Error::from)?;
                Ok(vec![
                    kind.as_str().unwrap_or_default().to_string(),
                    p.label().to_string(),
                    fmt_f64(p.start().x),
                    fmt_f64(p.start().y),
                    fmt_f64(p.end().x),
                    fmt_f64(p.end().y),
                    fmt_f64(p.length()),
                ])
            })
            .collect::<Result<_, CliError>>()?;
        out.write_csv("pieces.csv", &header, &rows)?;
    }
    out.report();
    Ok(0)
}

#[derive(Serialize)]
struct ProjectOutput<'a> {
    config: &'a RunConfig,
    query: Point2,
    point: Point2,
    distance: f64,
    piece_index: i64,
    truncation_safe: bool,
}

pub fn project(cfg: &mut RunConfig, point: [f64; 2]) -> Result<u8, CliError> {
    let seq = cfg.sequence()?;
    let depth = resolve_depth(cfg, &seq)?;
    let model = build_boundary(&seq, depth)?;
    cfg.depth = Some(depth);
    let query = Point2::from(point);
    let r = model.project(query);
    let out = ProjectOutput {
        config: cfg,
        query,
        point: r.point,
        distance: r.distance,
        piece_index: r.piece_index,
        truncation_safe: r.truncation_safe,
    };
    out!("{}", to_json(&out)?.trim_end());
    if r.truncation_safe {
        Ok(0)
    } else {
        eprintln!("the nearest point lies within two pieces of the closure at depth {depth}; raise --depth");
        Ok(DEPTH_GUARD)
    }
}

fn value_columns(lemma: LemmaId, width: usize) -> Vec<String> {
    let names: &[&str] = match (lemma, width) {
        (LemmaId::Nonexistence, 4) => &["dt_x", "dt_y", "ds_x", "ds_y"],
        (_, 1) => &["value"],
        (_, 2) => &["x", "y"],
        _ => &[],
    };
    if names.len() == width {
        names.iter().map(|s| s.to_string()).collect()
    } else {
        (0..width).map(|i| format!("v{i}")).collect()
    }
}

pub fn verify(cfg: &mut RunConfig, lemma: LemmaId, tolerance: Option<f64>) -> Result<u8, CliError> {
    let seq = cfg.sequence()?;
    let opts = VerifyOptions { range: cfg.range, depth: cfg.depth, tolerance, exec: cfg.exec() };
    let v: Verification = verify_lemma(lemma, &seq, opts)?;
    let r = &v.report;
    cfg.depth = Some(r.depth);
    cfg.range = Some(r.range);

    let mut out = Output::open(cfg)?;
    let stem = format!("report-{lemma}");
    if cfg.wants(Format::Json) {
        out.write(&format!("{stem}.json"), &to_json(&json!({ "config": cfg, "verification": v }))?)?;
    }
    if cfg.wants(Format::Csv) {
        let width = r.observations.first().map_or(0, |o| o.value.len());
        let mut header = vec!["n".to_string()];
        header.extend(value_columns(lemma, width));
        header.push("deviation".into());
        let rows: Vec<Vec<String>> = r
            .observations
            .iter()
            .map(|o| {
                let mut row = vec![o.n.to_string()];
                row.extend(o.value.iter().map(|&x| fmt_f64(x)));
                row.push(fmt_f64(o.deviation));
                row
            })
            .collect();
        out.write_csv(&format!("{stem}.csv"), &header, &rows)?;
    }

    let target: Vec<String> = r.target.iter().map(|&x| fmt_f64(x)).collect();
    out!(
        "{lemma} case {}: {} (target [{}], final deviation {}, tolerance {}, n = {}..{}, depth {})",
        seq.family(),
        if r.passed { "pass" } else { "FAIL" },
        target.join(", "),
        fmt_f64(r.final_deviation),
        fmt_f64(r.tolerance),
        r.range[0],
        r.range[1],
        r.depth,
    );
    for c in &r.checks {
        out!("  {}: {} ({})", c.name, fmt_f64(c.value), if c.passed { "ok" } else { "failed" });
    }
    if let Some(verdict) = r.verdict {
        out!("  verdict: {verdict}");
    }
    out.report();
    Ok(if r.passed { 0 } else { LEMMA_FAILED })
}

fn mark_name(m: GridMark) -> &'static str {
    match m {
        GridMark::Dyadic => "dyadic",
        GridMark::T => "t",
        GridMark::S => "s",
    }
}

pub fn quotients(cfg: &mut RunConfig, grid: Option<&str>) -> Result<u8, CliError> {
    let seq = cfg.sequence()?;
    let grid_text = match (grid, cfg.range) {
        (Some(g), _) => g.to_string(),
        (None, Some([a, b])) => format!("ts:{a}:{b}"),
        (None, None) => "dyadic:1:10".to_string(),
    };
    let grid: QuotientGrid = grid_text.parse()?;
    let needed = grid.required_depth(&seq)?;
    let depth = match cfg.depth {
        Some(d) if d < needed => {
            return Err(smoothk::Error::TruncationUnsafe { label: needed - 2, depth: d }.into());
        }
        Some(d) => d,
        None => needed,
    };
    let model = build_boundary(&seq, depth)?;
    cfg.depth = Some(depth);
    let samples = quotient_grid(&model, grid, cfg.exec())?;

    let mut out = Output::open(cfg)?;
    if cfg.wants(Format::Csv) {
        let header = ["theta", "Dx", "Dy", "mark"].map(String::from);
        let rows: Vec<Vec<String>> = samples
            .iter()
            .map(|(s, m)| {
                vec![fmt_f64(s.theta), fmt_f64(s.quotient.x), fmt_f64(s.quotient.y), mark_name(*m).to_string()]
            })
            .collect();
        out.write_csv("quotients.csv", &header, &rows)?;
    }
    if cfg.wants(Format::Svg) {
        let title = format!("Im D(theta), case {} ({grid_text})", seq.family());
        out.write("quotients.svg", &quotient_plot_svg(&samples, &title))?;
    }
    if cfg.wants(Format::Json) {
        let rows: Vec<_> = samples
            .iter()
            .map(|(s, m)| json!({ "theta": s.theta, "projected": s.projected, "quotient": s.quotient, "mark": m }))
            .collect();
        out.write("quotients.json", &to_json(&json!({ "config": cfg, "grid": grid_text, "samples": rows }))?)?;
    }
    out!("{} samples on grid {grid_text} at depth {depth}", samples.len());
    out.report();
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{GlobalArgs, Precision};

    fn cfg(case: Family) -> RunConfig {
        let args = GlobalArgs { case: Some(case), ..Default::default() };
        RunConfig::resolve("test", &args, &[Format::Json]).unwrap()
    }

    #[test]
    fn depth_follows_range_unless_given() {
        let seq = AlphaSequence::case_b(0.5).unwrap();
        let mut c = cfg(Family::B);
        assert_eq!(resolve_depth(&c, &seq).unwrap(), 22);
        c.range = Some([3, 40]);
        assert_eq!(resolve_depth(&c, &seq).unwrap(), 42);
        c.depth = Some(30);
        assert_eq!(resolve_depth(&c, &seq).unwrap_err().code, DEPTH_GUARD);
        assert_eq!(c.precision_mode, Precision::Standard);
    }

    #[test]
    fn default_depth_respects_cap() {
        let seq = AlphaSequence::case_c(0.1).unwrap();
        assert!(default_depth(&seq) <= seq.max_depth());
    }

    #[test]
    fn csv_column_names() {
        assert_eq!(value_columns(LemmaId::ChordSpeed, 2), ["x", "y"]);
        assert_eq!(value_columns(LemmaId::Nonexistence, 4)[2], "ds_x");
        assert_eq!(value_columns(LemmaId::RadiusLimit, 3), ["v0", "v1", "v2"]);
    }
}
