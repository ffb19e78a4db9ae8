//! CSV tables, key-value manifests and SVG line plots.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use walker_core::model::{energy, EmbeddedState, ReducedState, ReferenceTrajectory, WalkerParams};
use walker_core::DiscretePath;

/// Full round-trip precision for f64.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `contents` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)
}

pub const TRAJECTORY_HEADER: &str = "k,t,x,theta,xdot_est,thetadot_est,xbar,y,energy,impact_flag";

pub fn trajectory_csv(params: &WalkerParams, path: &DiscretePath) -> String {
    let mut out = String::with_capacity(160 * path.configs.len());
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for (k, q) in path.configs.iter().enumerate() {
        let v = path.velocity_estimate(params, k);
        let s = ReducedState::from_parts(*q, v);
        let e = EmbeddedState::embed(params, &s);
        let flag = u8::from(path.impact_at(k).is_some());
        let _ = writeln!(
            out,
            "{k},{},{},{},{},{},{},{},{},{flag}",
            num(path.time(k)),
            num(q.x),
            num(q.theta),
            num(v.x),
            num(v.theta),
            num(e.xbar),
            num(e.y),
            num(energy(params, &s)),
        );
    }
    out
}

pub fn controls_csv(path: &DiscretePath) -> String {
    let mut out = String::from("k,t_mid,u_x,u_theta\n");
    for (k, u) in path.controls.iter().enumerate() {
        let _ = writeln!(out, "{k},{},{},{}", num(path.h * (k as f64 + 0.5)), num(u.ux), num(u.utheta));
    }
    out
}

pub fn reference_csv(reference: &ReferenceTrajectory, h: f64, n_steps: usize) -> String {
    let mut out = String::from("k,t,x_r,theta_r,xdot_r,thetadot_r,xbar_r\n");
    for k in 0..=n_steps {
        let t = k as f64 * h;
        let (Ok(s), Ok(foot)) = (reference.eval(t), reference.foot(t)) else {
            continue;
        };
        let _ = writeln!(
            out,
            "{k},{},{},{},{},{},{}",
            num(t),
            num(s.x),
            num(s.theta),
            num(s.xdot),
            num(s.thetadot),
            num(foot)
        );
    }
    out
}

/// One parsed row of `trajectory.csv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub k: usize,
    pub t: f64,
    pub x: f64,
    pub theta: f64,
    pub xdot_est: f64,
    pub thetadot_est: f64,
    pub xbar: f64,
    pub y: f64,
    pub energy: f64,
    pub impact: bool,
}

pub fn parse_trajectory_csv(text: &str) -> Result<Vec<TrajectoryRow>, String> {
    let mut lines = text.lines();
    if lines.next() != Some(TRAJECTORY_HEADER) {
        return Err("unexpected trajectory header".into());
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 10 {
                return Err(format!("row {}: expected 10 fields", i + 1));
            }
            let p = |j: usize| f[j].parse::<f64>().map_err(|e| format!("row {}: {e}", i + 1));
            Ok(TrajectoryRow {
                k: f[0].parse().map_err(|e| format!("row {}: {e}", i + 1))?,
                t: p(1)?,
                x: p(2)?,
                theta: p(3)?,
                xdot_est: p(4)?,
                thetadot_est: p(5)?,
                xbar: p(6)?,
                y: p(7)?,
                energy: p(8)?,
                impact: f[9] == "1",
            })
        })
        .collect()
}

/// Parses `controls.csv` into `(u_x, u_theta)` pairs.
pub fn parse_controls_csv(text: &str) -> Result<Vec<(f64, f64)>, String> {
    text.lines()
        .skip(1)
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(format!("bad controls row `{line}`"));
            }
            let p = |j: usize| f[j].parse::<f64>().map_err(|e| e.to_string());
            Ok((p(2)?, p(3)?))
        })
        .collect()
}

/// Ordered key-value manifest.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

/// One curve of a line plot.
pub struct Series<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

/// Minimal SVG line chart with a frame, axis range labels and a legend.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const L: f64 = 70.0;
    const R: f64 = 20.0;
    const T: f64 = 40.0;
    const B: f64 = 50.0;
    let finite = series.iter().flat_map(|s| s.points.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in finite {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-12 {
        (y0, y1) = (y0 - 0.5, y1 + 0.5);
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let sx = |x: f64| L + (x - x0) / (x1 - x0) * (W - L - R);
    let sy = |y: f64| H - B - (y - y0) / (y1 - y0) * (H - T - B);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{L}" y="{T}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - L - R,
        H - T - B
    );
    let _ = writeln!(svg, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{title}</text>"#, W / 2.0);
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#, W / 2.0, H - 12.0);
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{y_label}</text>"#,
        H / 2.0,
        H / 2.0
    );
    for (v, anchor, x, y) in [(x0, "start", L, H - B + 16.0), (x1, "end", W - R, H - B + 16.0)] {
        let _ = writeln!(svg, r#"<text x="{x}" y="{y}" text-anchor="{anchor}">{v:.3}</text>"#);
    }
    for (v, y) in [(y0, H - B), (y1, T + 10.0)] {
        let _ = writeln!(svg, r#"<text x="{}" y="{y}" text-anchor="end">{v:.3}</text>"#, L - 6.0);
    }
    for (i, s) in series.iter().enumerate() {
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.5"{dash} points="{}"/>"#,
            s.color,
            pts.join(" ")
        );
        let ly = T + 16.0 + 16.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="1.5"{dash}/>"#,
            W - R - 130.0,
            W - R - 110.0,
            s.color
        );
        let _ = writeln!(svg, r#"<text x="{}" y="{}">{}</text>"#, W - R - 104.0, ly + 4.0, s.label);
    }
    svg.push_str("</svg>\n");
    svg
}
