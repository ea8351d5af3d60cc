//! CSV and SVG emission.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::suite::{AggregateCurve, SuiteResults, TrialResult};
use crate::error::Result;

pub const TRACE_HEADER: [&str; 8] = [
    "algorithm",
    "trial",
    "t",
    "round",
    "chosen_index",
    "inst_regret",
    "cum_regret",
    "arrived_at",
];

pub const SUMMARY_HEADER: [&str; 4] = ["algorithm", "t", "mean_cum_regret", "half_std"];

pub const ROUNDS_HEADER: [&str; 17] = [
    "algorithm",
    "trial",
    "round",
    "q",
    "length",
    "candidates",
    "survivors",
    "arrived",
    "beta",
    "max_sd",
    "variance_sum",
    "info_gain",
    "variance_sum_bound_holds",
    "variance_bound_holds",
    "optimum_in_candidates",
    "optimum_retained",
    "intervals_cover_truth",
];

/// Long format, one row per step.
pub fn write_traces_csv<W: Write>(writer: W, trials: &[TrialResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(TRACE_HEADER)?;
    for r in trials {
        let mut cum = 0.0;
        for s in &r.trace.steps {
            cum += s.inst_regret;
            w.write_record([
                r.algorithm.name().to_string(),
                r.trial.to_string(),
                s.t.to_string(),
                s.round.to_string(),
                s.chosen.to_string(),
                s.inst_regret.to_string(),
                cum.to_string(),
                s.arrival.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(writer: W, curves: &[AggregateCurve]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SUMMARY_HEADER)?;
    for c in curves {
        for (t, (m, h)) in c.mean.iter().zip(&c.half_std).enumerate() {
            w.write_record([
                c.algorithm.name().to_string(),
                (t + 1).to_string(),
                m.to_string(),
                h.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Per-round diagnostics of the elimination runs.
pub fn write_rounds_csv<W: Write>(writer: W, trials: &[TrialResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(ROUNDS_HEADER)?;
    for r in trials {
        for rd in &r.trace.rounds {
            w.write_record([
                r.algorithm.name().to_string(),
                r.trial.to_string(),
                rd.round.to_string(),
                rd.q.to_string(),
                rd.length.to_string(),
                rd.candidates.to_string(),
                rd.survivors.to_string(),
                rd.arrived.to_string(),
                rd.beta.to_string(),
                rd.max_sd.to_string(),
                rd.variance_sum.to_string(),
                rd.info_gain.to_string(),
                rd.variance_sum_bound_holds.to_string(),
                rd.variance_bound_holds.map_or("NA".to_string(), |b| b.to_string()),
                rd.optimum_in_candidates.to_string(),
                rd.optimum_retained.to_string(),
                rd.intervals_cover_truth.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `traces.csv`, `summary.csv` and `rounds.csv` into `dir`.
pub fn emit_csv(results: &SuiteResults, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let paths = ["traces.csv", "summary.csv", "rounds.csv"].map(|f| dir.join(f));
    write_traces_csv(std::fs::File::create(&paths[0])?, &results.trials)?;
    write_summary_csv(std::fs::File::create(&paths[1])?, &results.curves)?;
    write_rounds_csv(std::fs::File::create(&paths[2])?, &results.trials)?;
    Ok(paths.to_vec())
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];
const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const MAX_POINTS: usize = 400;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Indices kept when thinning a curve of length `n`; always includes the last.
fn sample_indices(n: usize) -> Vec<usize> {
    if n <= MAX_POINTS {
        return (0..n).collect();
    }
    let mut idx: Vec<usize> = (0..MAX_POINTS).map(|i| i * (n - 1) / (MAX_POINTS - 1)).collect();
    idx.dedup();
    idx
}

fn tick_label(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 0.01 && v.abs() < 1e5) {
        let s = format!("{v:.2}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.1e}")
    }
}

/// Cumulative regret against `t` with shaded half-std bands, as SVG 1.1.
pub fn render_svg(curves: &[AggregateCurve], title: &str) -> String {
    let t_max = curves.iter().map(|c| c.mean.len()).max().unwrap_or(0).max(1) as f64;
    let mut y_lo: f64 = 0.0;
    let mut y_hi: f64 = 0.0;
    for c in curves {
        for (m, h) in c.mean.iter().zip(&c.half_std) {
            y_lo = y_lo.min(m - h);
            y_hi = y_hi.max(m + h);
        }
    }
    if y_hi - y_lo <= 0.0 {
        y_hi = y_lo + 1.0;
    }
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |t: f64| LEFT + pw * t / t_max;
    let sy = |y: f64| TOP + ph * (1.0 - (y - y_lo) / (y_hi - y_lo));

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );

    // axes and ticks
    let (x0, y0, x1, y1) = (LEFT, TOP + ph, LEFT + pw, TOP);
    let _ = writeln!(
        s,
        r#"<path d="M{x0:.1},{y1:.1} L{x0:.1},{y0:.1} L{x1:.1},{y0:.1}" fill="none" stroke="black" stroke-width="1"/>"#
    );
    for i in 0..=5 {
        let t = t_max * i as f64 / 5.0;
        let x = sx(t);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.1}" y1="{y0:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/><text x="{x:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            y0 + 5.0,
            y0 + 18.0,
            tick_label(t.round())
        );
        let v = y_lo + (y_hi - y_lo) * i as f64 / 5.0;
        let y = sy(v);
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{y:.1}" x2="{x0:.1}" y2="{y:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            y + 4.0,
            tick_label(v)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle">t</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.1})">cumulative regret</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    for (ci, c) in curves.iter().enumerate() {
        let color = PALETTE[ci % PALETTE.len()];
        let idx = sample_indices(c.mean.len());
        if idx.is_empty() {
            continue;
        }
        let mut band = String::new();
        for &i in &idx {
            let _ = write!(band, "{:.2},{:.2} ", sx((i + 1) as f64), sy(c.mean[i] + c.half_std[i]));
        }
        for &i in idx.iter().rev() {
            let _ = write!(band, "{:.2},{:.2} ", sx((i + 1) as f64), sy(c.mean[i] - c.half_std[i]));
        }
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
            band.trim_end()
        );
        let line: Vec<String> = idx
            .iter()
            .map(|&i| format!("{:.2},{:.2}", sx((i + 1) as f64), sy(c.mean[i])))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            line.join(" ")
        );
        let ly = TOP + 10.0 + 18.0 * ci as f64;
        let lx = LEFT + 15.0;
        let _ = writeln!(
            s,
            r#"<g class="legend"><line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="3"/><text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12">{}</text></g>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(c.algorithm.name())
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn emit_svg(curves: &[AggregateCurve], path: &Path, title: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, render_svg(curves, title))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::Algorithm;

    #[test]
    fn empty_results_give_header_only() {
        let mut buf = Vec::new();
        write_traces_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim_end(), TRACE_HEADER.join(","));
    }

    #[test]
    fn thinning_keeps_endpoints() {
        let idx = sample_indices(2000);
        assert_eq!((idx[0], *idx.last().unwrap()), (0, 1999));
        assert!(idx.len() <= MAX_POINTS);
        assert_eq!(sample_indices(3), vec![0, 1, 2]);
    }

    #[test]
    fn flat_curve_sits_on_baseline() {
        let c = AggregateCurve {
            algorithm: Algorithm::Bpe,
            trials: 1,
            mean: vec![0.0; 10],
            half_std: vec![0.0; 10],
        };
        let svg = render_svg(&[c], "flat");
        let base = format!("{:.2}", TOP + HEIGHT - TOP - BOTTOM);
        let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let pts = line.split('"').nth(1).unwrap();
        assert!(pts.split(' ').all(|p| p.ends_with(&format!(",{base}"))));
    }
}
