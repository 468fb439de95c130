//! Floating-point demonstration for the special linear group acting on ℝ³.
//!
//! `g_n = diag(1/n, 1/n, n²)` has determinant 1. It squeezes the plane of the
//! first two axes, so `x = e₁` and `y = e₂` approach each other, while the
//! uniform measure on `[-1,1]³` keeps density 1/8 and never concentrates:
//! its ball masses stay bounded and its mass leaves every fixed cube.

use std::f64::consts::PI;
use std::fmt::Write;

#[derive(Debug, Clone, PartialEq)]
pub struct DemoConfig {
    pub steps: usize,
    /// Cells per axis of the discretized initial measure.
    pub cells: usize,
    pub radius: f64,
    /// Half-widths of the nested cubes `K_j = [-R_j, R_j]³`.
    pub cubes: Vec<f64>,
}

impl Default for DemoConfig {
    fn default() -> Self {
        DemoConfig { steps: 2000, cells: 16, radius: 0.1, cubes: vec![1.0, 2.0, 4.0, 8.0] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoRow {
    pub n: usize,
    pub pair_gap: f64,
    pub max_ball_mass: f64,
    pub cube_masses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoSummary {
    pub initial_gap: f64,
    pub final_gap: f64,
    /// Largest `max_ball_mass / (density · ball volume)` over all steps.
    pub ball_ratio: f64,
    /// First step from which every cube holds mass below 0.9 for good.
    pub escape_step: Option<usize>,
}

pub const DENSITY: f64 = 1.0 / 8.0;
pub const ESCAPE_LEVEL: f64 = 0.9;
const SIMPSON_INTERVALS: usize = 2000;

pub fn ball_volume(r: f64) -> f64 {
    4.0 / 3.0 * PI * r.powi(3)
}

/// Area of the disk of radius `r` about the origin inside `[-s,s]²`.
fn disk_square_area(r: f64, s: f64) -> f64 {
    if r <= s {
        PI * r * r
    } else if r >= s * 2f64.sqrt() {
        4.0 * s * s
    } else {
        let segment = r * r * (s / r).acos() - s * (r * r - s * s).sqrt();
        PI * r * r - 4.0 * segment
    }
}

/// Volume of the ball of radius `r` about the origin inside
/// `[-s,s]² × [-h,h]`, by Simpson's rule along the last axis.
fn ball_box_volume(r: f64, s: f64, h: f64) -> f64 {
    let top = r.min(h);
    let k = SIMPSON_INTERVALS;
    let dz = 2.0 * top / k as f64;
    let f = |z: f64| disk_square_area((r * r - z * z).max(0.0).sqrt(), s);
    let mut sum = f(-top) + f(top);
    for i in 1..k {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(-top + i as f64 * dz);
    }
    sum * dz / 3.0
}

fn overlap(a: f64, b: f64, c: f64, d: f64) -> f64 {
    (b.min(d) - a.max(c)).max(0.0)
}

/// Scale factors of `g_n` along the three axes.
fn scales(n: usize) -> [f64; 3] {
    let n = n as f64;
    [1.0 / n, 1.0 / n, n * n]
}

/// Mass of the pushed cell measure inside `[-r,r]³`. Each cell carries its
/// mass uniformly, so its share is the fraction of its image in the cube.
fn cube_mass(n: usize, cells: usize, r: f64) -> f64 {
    let sc = scales(n);
    let width = 2.0 / cells as f64;
    let cell_mass = 1.0 / (cells * cells * cells) as f64;
    let fraction = |axis: usize, i: usize| {
        let lo = (-1.0 + i as f64 * width) * sc[axis];
        let hi = lo + width * sc[axis];
        overlap(lo, hi, -r, r) / (hi - lo)
    };
    let mut total = 0.0;
    for i in 0..cells {
        let fx = fraction(0, i);
        for j in 0..cells {
            let fy = fraction(1, j);
            for k in 0..cells {
                total += cell_mass * fx * fy * fraction(2, k);
            }
        }
    }
    total
}

pub fn demo_sl(cfg: &DemoConfig) -> (Vec<DemoRow>, DemoSummary) {
    let x = [1.0, 0.0, 0.0];
    let y = [0.0, 1.0, 0.0];
    let gap = |n: usize| {
        let sc = scales(n);
        (0..3).map(|i| (sc[i] * (x[i] - y[i])).powi(2)).sum::<f64>().sqrt()
    };
    let rows: Vec<DemoRow> = (1..=cfg.steps)
        .map(|n| {
            let sc = scales(n);
            DemoRow {
                n,
                pair_gap: gap(n),
                max_ball_mass: DENSITY * ball_box_volume(cfg.radius, sc[0], sc[2]),
                cube_masses: cfg.cubes.iter().map(|&r| cube_mass(n, cfg.cells, r)).collect(),
            }
        })
        .collect();
    let bound = DENSITY * ball_volume(cfg.radius);
    let escape_step = rows
        .iter()
        .rposition(|r| r.cube_masses.iter().any(|&m| m >= ESCAPE_LEVEL))
        .map_or(Some(1), |last| rows.get(last + 1).map(|r| r.n));
    let summary = DemoSummary {
        initial_gap: gap(1),
        final_gap: rows.last().map_or(gap(1), |r| r.pair_gap),
        ball_ratio: rows.iter().map(|r| r.max_ball_mass / bound).fold(0.0, f64::max),
        escape_step,
    };
    (rows, summary)
}

/// Decimal rendering with `digits` significant digits.
pub fn format_significant(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let magnitude = v.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}

pub fn to_csv(cfg: &DemoConfig, rows: &[DemoRow]) -> String {
    let mut out = String::from("n,pair_gap,max_ball_mass");
    for j in 1..=cfg.cubes.len() {
        write!(out, ",mass_in_K{j}").unwrap();
    }
    out.push('\n');
    for r in rows {
        write!(out, "{},{},{}", r.n, format_significant(r.pair_gap, 12), format_significant(r.max_ball_mass, 12)).unwrap();
        for m in &r.cube_masses {
            write!(out, ",{}", format_significant(*m, 12)).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn summary_text(cfg: &DemoConfig, s: &DemoSummary) -> String {
    let escape = s.escape_step.map_or("never".to_string(), |n| format!("n = {n}"));
    format!(
        "pair gap: {} -> {} (ratio {})\n\
         max ball mass / (density x ball volume) at radius {}: {}\n\
         every cube below {} from {}\n",
        format_significant(s.initial_gap, 6),
        format_significant(s.final_gap, 6),
        format_significant(s.final_gap / s.initial_gap, 6),
        cfg.radius,
        format_significant(s.ball_ratio, 6),
        ESCAPE_LEVEL,
        escape
    )
}
