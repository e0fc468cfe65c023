//! Deterministic SVG scatter plots of eigenvalue clouds.

use std::fmt::Write as _;

use pseudospec_core::numkernel::Complex64;
use pseudospec_core::oracle::Window;

use crate::error::{CliError, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 640.0;
const MARGIN: f64 = 64.0;
const MAX_MARKERS: usize = 200_000;
const PALETTE: [&str; 6] = ["#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b"];
const EIGEN_COLOR: &str = "#d62728";

#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub label: String,
    pub points: Vec<Complex64>,
}

impl Layer {
    pub fn new(label: impl Into<String>, points: Vec<Complex64>) -> Self {
        Self {
            label: label.into(),
            points,
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Bounding box of everything drawn, padded by 5% of the larger extent.
pub fn fit_window(layers: &[Layer], eigenvalues: &[Complex64]) -> Result<Window> {
    let all: Vec<Complex64> = layers
        .iter()
        .flat_map(|l| l.points.iter().copied())
        .chain(eigenvalues.iter().copied())
        .collect();
    if all.is_empty() {
        return Err(CliError::EmptyInput);
    }
    let tight = Window::around(&all, 0.0).or_else(|_| Window::around(&all, 0.5))?;
    let extent = (tight.re_max - tight.re_min).max(tight.im_max - tight.im_min);
    Ok(Window::around(&all, 0.05 * extent).or_else(|_| Window::around(&all, 0.5))?)
}

/// Step from {1, 2, 5} x 10^k giving roughly five ticks over `span`.
fn tick_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let r = raw / mag;
    let m = if r < 1.5 {
        1.0
    } else if r < 3.5 {
        2.0
    } else if r < 7.5 {
        5.0
    } else {
        10.0
    };
    m * mag
}

fn ticks(lo: f64, hi: f64) -> (Vec<f64>, usize) {
    let step = tick_step(hi - lo);
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    ((first..=last).map(|k| k as f64 * step).collect(), decimals)
}

fn label(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    // Avoid "-0.00".
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

/// Renders `layers` (one color each) and `eigenvalues` (red squares).
///
/// Points outside the window are dropped; layers above 200k points are
/// thinned to an evenly strided subset.
pub fn render(layers: &[Layer], eigenvalues: &[Complex64], window: Option<Window>) -> Result<String> {
    let total: usize = layers.iter().map(|l| l.points.len()).sum();
    if total == 0 && eigenvalues.is_empty() {
        return Err(CliError::EmptyInput);
    }
    let w = match window {
        Some(w) => w,
        None => fit_window(layers, eigenvalues)?,
    };
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let x = |re: f64| MARGIN + (re - w.re_min) / (w.re_max - w.re_min) * plot_w;
    let y = |im: f64| HEIGHT - MARGIN - (im - w.im_min) / (w.im_max - w.im_min) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r##"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##);
    let _ = writeln!(
        s,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#000000"/>"##
    );

    let (xt, xd) = ticks(w.re_min, w.re_max);
    let _ = writeln!(s, r#"<g class="axis-re">"#);
    for t in xt {
        let px = x(t);
        let _ = writeln!(
            s,
            r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#000000"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            HEIGHT - MARGIN,
            HEIGHT - MARGIN + 5.0,
            HEIGHT - MARGIN + 18.0,
            label(t, xd)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">Re z</text></g>"#,
        MARGIN + plot_w / 2.0,
        HEIGHT - 20.0
    );
    let (yt, yd) = ticks(w.im_min, w.im_max);
    let _ = writeln!(s, r#"<g class="axis-im">"#);
    for t in yt {
        let py = y(t);
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{py:.2}" x2="{MARGIN:.2}" y2="{py:.2}" stroke="#000000"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            MARGIN - 5.0,
            MARGIN - 8.0,
            py + 4.0,
            label(t, yd)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">Im z</text></g>"#,
        MARGIN + plot_h / 2.0,
        MARGIN + plot_h / 2.0
    );

    for (k, layer) in layers.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let stride = layer.points.len().div_ceil(MAX_MARKERS).max(1);
        let _ = writeln!(s, r#"<g class="cloud" fill="{color}">"#);
        for z in layer.points.iter().step_by(stride) {
            if !w.contains(*z) {
                continue;
            }
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="1.2"/>"#, x(z.re), y(z.im));
        }
        let _ = writeln!(s, "</g>");
    }

    let _ = writeln!(s, r##"<g class="eigenvalues" fill="{EIGEN_COLOR}" stroke="#000000" stroke-width="0.5">"##);
    for z in eigenvalues.iter().filter(|z| w.contains(**z)) {
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="6" height="6"/>"#,
            x(z.re) - 3.0,
            y(z.im) - 3.0
        );
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g class="legend">"#);
    let mut ly = MARGIN + 12.0;
    let lx = MARGIN + 10.0;
    for (k, layer) in layers.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<rect x="{lx:.2}" y="{:.2}" width="8" height="8" fill="{}"/><text x="{:.2}" y="{ly:.2}">{}</text>"#,
            ly - 8.0,
            PALETTE[k % PALETTE.len()],
            lx + 14.0,
            escape(&layer.label)
        );
        ly += 14.0;
    }
    if !eigenvalues.is_empty() {
        let _ = writeln!(
            s,
            r#"<rect x="{lx:.2}" y="{:.2}" width="8" height="8" fill="{EIGEN_COLOR}"/><text x="{:.2}" y="{ly:.2}">eigenvalues</text>"#,
            ly - 8.0,
            lx + 14.0
        );
    }
    let _ = writeln!(s, "</g>\n</svg>");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_point_single_marker() {
        let s = render(&[Layer::new("cloud", vec![c(0.0, 0.0)])], &[], None).unwrap();
        assert_eq!(s.matches("<circle").count(), 1);
    }

    #[test]
    fn two_clouds_two_colors() {
        let layers = [
            Layer::new("a", vec![c(0.0, 0.0), c(1.0, 1.0)]),
            Layer::new("b", vec![c(0.5, 0.5)]),
        ];
        let s = render(&layers, &[c(0.2, 0.2)], None).unwrap();
        assert!(s.contains(&format!(r#"fill="{}""#, PALETTE[0])));
        assert!(s.contains(&format!(r#"fill="{}""#, PALETTE[1])));
        assert_eq!(s.matches("<circle").count(), 3);
        assert!(s.contains(EIGEN_COLOR));
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(matches!(render(&[], &[], None), Err(CliError::EmptyInput)));
        assert!(matches!(
            render(&[Layer::new("a", vec![])], &[], None),
            Err(CliError::EmptyInput)
        ));
    }

    #[test]
    fn points_outside_window_are_clipped() {
        let w = Window::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        let s = render(&[Layer::new("a", vec![c(0.0, 0.0), c(5.0, 0.0)])], &[], Some(w)).unwrap();
        assert_eq!(s.matches("<circle").count(), 1);
    }

    #[test]
    fn tick_steps() {
        for (span, step) in [(1.0, 0.2), (10.0, 2.0), (0.03, 0.005), (2.0, 0.5)] {
            assert!((tick_step(span) - step).abs() < 1e-12 * step, "{span}");
        }
        let (t, d) = ticks(-1.0, 1.0);
        assert_eq!(d, 1);
        assert_eq!(t.len(), 5);
        assert_eq!(label(-0.0001, 2), "0.00");
    }

    #[test]
    fn rendering_is_stable() {
        let layers = [Layer::new("a", (0..50).map(|k| c(k as f64 * 0.1, (k as f64).sin())).collect())];
        let a = render(&layers, &[c(0.0, 0.0)], None).unwrap();
        let b = render(&layers, &[c(0.0, 0.0)], None).unwrap();
        assert_eq!(a, b);
    }
}
