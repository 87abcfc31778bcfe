//! CSV and SVG output for profiles.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{data_profile, performance_profile, ProfileTable, StepFunction};
use crate::error::{Error, Result};

/// Accuracy levels profiles are produced for.
pub const PROFILE_TAUS: [f64; 3] = [1e-1, 1e-3, 1e-5];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Performance,
    Data,
}

impl ProfileKind {
    fn prefix(&self) -> &'static str {
        match self {
            ProfileKind::Performance => "perf",
            ProfileKind::Data => "data",
        }
    }

    fn header(&self) -> &'static str {
        match self {
            ProfileKind::Performance => "solver,alpha,rho",
            ProfileKind::Data => "solver,kappa,d",
        }
    }
}

/// `1e-1`, `1e-3`, ... as used in file names.
pub fn tau_label(tau: f64) -> String {
    format!("{tau:e}")
}

pub fn profile_csv(kind: ProfileKind, profiles: &[StepFunction]) -> String {
    let mut s = String::new();
    s.push_str(kind.header());
    s.push('\n');
    for f in profiles {
        for (x, y) in &f.points {
            let _ = writeln!(s, "{},{},{}", f.solver, x, y);
        }
    }
    s
}

/// Reads a profile CSV back into step functions, in order of appearance.
pub fn parse_csv(text: &str) -> Result<(ProfileKind, Vec<StepFunction>)> {
    let mut lines = text.lines().enumerate();
    let kind = match lines.next() {
        Some((_, "solver,alpha,rho")) => ProfileKind::Performance,
        Some((_, "solver,kappa,d")) => ProfileKind::Data,
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: "unknown CSV header".into(),
            })
        }
    };
    let mut out: Vec<StepFunction> = Vec::new();
    for (k, line) in lines {
        let err = |msg: &str| Error::Parse {
            line: k + 1,
            msg: msg.to_string(),
        };
        let mut cells = line.split(',');
        let (Some(solver), Some(x), Some(y), None) = (cells.next(), cells.next(), cells.next(), cells.next()) else {
            return Err(err("expected three fields"));
        };
        let x: f64 = x.parse().map_err(|_| err("bad number"))?;
        let y: f64 = y.parse().map_err(|_| err("bad number"))?;
        match out.last_mut() {
            Some(f) if f.solver == solver => f.points.push((x, y)),
            _ => out.push(StepFunction {
                solver: solver.to_string(),
                points: vec![(x, y)],
            }),
        }
    }
    Ok((kind, out))
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Static SVG plot. Performance profiles use a log2 horizontal axis.
pub fn render_svg(kind: ProfileKind, profiles: &[StepFunction], tau: f64) -> String {
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (60.0, 170.0, 40.0, 50.0);
    let pw = w - left - right;
    let ph = h - top - bottom;

    let xmax_data = profiles
        .iter()
        .flat_map(|f| f.points.iter().map(|p| p.0))
        .fold(0.0, f64::max);
    let (x_of, x_lo, x_hi, xlabel): (Box<dyn Fn(f64) -> f64>, f64, f64, &str) = match kind {
        ProfileKind::Performance => {
            let hi = xmax_data.max(2.0).log2() * 1.05;
            (Box::new(|a: f64| a.log2()), 0.0, hi, "log2(alpha)")
        }
        ProfileKind::Data => {
            let hi = xmax_data.max(1.0) * 1.05;
            (Box::new(|k: f64| k), 0.0, hi, "kappa")
        }
    };
    let sx = |v: f64| left + (v - x_lo) / (x_hi - x_lo) * pw;
    let sy = |v: f64| top + (1.0 - v) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let title = match kind {
        ProfileKind::Performance => "Performance profile",
        ProfileKind::Data => "Data profile",
    };
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{title}, tau = {}</text>"#,
        left + pw / 2.0,
        tau_label(tau)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let v = i as f64 / 4.0;
        let _ = writeln!(
            s,
            r##"<line x1="{left}" y1="{y:.2}" x2="{x2}" y2="{y:.2}" stroke="#ddd"/><text x="{tx}" y="{ty:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{v}</text>"##,
            y = sy(v),
            x2 = left + pw,
            tx = left - 6.0,
            ty = sy(v) + 4.0,
        );
    }
    for i in 0..=4 {
        let v = x_lo + (x_hi - x_lo) * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{y}" font-family="sans-serif" font-size="11" text-anchor="middle">{v:.2}</text>"#,
            x = sx(v),
            y = top + ph + 16.0,
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{x}" y="{y}" font-family="sans-serif" font-size="12" text-anchor="middle">{xlabel}</text>"#,
        x = left + pw / 2.0,
        y = h - 12.0
    );

    for (k, f) in profiles.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut pts: Vec<(f64, f64)> = Vec::new();
        for (j, &(x, y)) in f.points.iter().enumerate() {
            let px = sx(x_of(x));
            if j > 0 {
                pts.push((px, pts.last().expect("previous point").1));
            }
            pts.push((px, sy(y)));
        }
        if let Some(&(_, y)) = pts.last() {
            pts.push((left + pw, y));
        }
        let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            coords.join(" ")
        );
        let ly = top + 14.0 + 18.0 * k as f64;
        let lx = left + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}" font-family="sans-serif" font-size="12">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            f.solver
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `perf_tau*.{csv,svg}` and `data_tau*.{csv,svg}` for one table.
/// An empty table writes nothing.
pub fn emit(table: &ProfileTable, dir: &Path) -> Result<Vec<PathBuf>> {
    if table.is_empty() {
        log::warn!(
            "no problem left in the tau = {} table; nothing written",
            tau_label(table.tau)
        );
        return Ok(Vec::new());
    }
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (kind, profiles) in [
        (ProfileKind::Performance, performance_profile(table)?),
        (ProfileKind::Data, data_profile(table)?),
    ] {
        let stem = format!("{}_tau{}", kind.prefix(), tau_label(table.tau));
        let csv = dir.join(format!("{stem}.csv"));
        std::fs::write(&csv, profile_csv(kind, &profiles))?;
        let svg = dir.join(format!("{stem}.svg"));
        std::fs::write(&svg, render_svg(kind, &profiles, table.tau))?;
        written.push(csv);
        written.push(svg);
    }
    Ok(written)
}
