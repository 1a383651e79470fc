//! Static SVG renderings: point patterns, graphs with a highlighted node
//! set and vibronic spectra. Output is a pure function of the input.

use std::collections::HashSet;
use std::fmt::Write;

use crate::graph::Graph;
use crate::points::StateSpace;
use crate::vibronic::Spectrum;

const BASE: &str = "#9aa5b1";
const HIGHLIGHT: &str = "#d62728";
const MARGIN: f64 = 20.0;

fn open(width: f64, height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

/// Maps `[lo, hi]` onto `[a, b]`; a degenerate range maps to the middle.
fn scale(v: f64, lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    if hi > lo {
        a + (v - lo) / (hi - lo) * (b - a)
    } else {
        0.5 * (a + b)
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Scatter plot of the first two coordinates; points in `highlight` are
/// drawn larger and in red, on top of the rest.
pub fn points(space: &StateSpace, highlight: &[usize], width: f64, height: f64) -> String {
    let xy = |i: usize| {
        let p = space.point(i);
        (p.first().copied().unwrap_or(0.0), p.get(1).copied().unwrap_or(0.0))
    };
    let (x0, x1) = bounds((0..space.len()).map(|i| xy(i).0));
    let (y0, y1) = bounds((0..space.len()).map(|i| xy(i).1));
    let marked: HashSet<usize> = highlight.iter().copied().collect();
    let mut out = open(width, height);
    let mut draw = |i: usize, r: f64, colour: &str| {
        let (x, y) = xy(i);
        let cx = scale(x, x0, x1, MARGIN, width - MARGIN);
        let cy = scale(y, y0, y1, height - MARGIN, MARGIN);
        writeln!(out, "<circle cx=\"{cx:.3}\" cy=\"{cy:.3}\" r=\"{r}\" fill=\"{colour}\"/>").unwrap();
    };
    for i in (0..space.len()).filter(|i| !marked.contains(i)) {
        draw(i, 3.0, BASE);
    }
    let mut top: Vec<usize> = marked.into_iter().filter(|&i| i < space.len()).collect();
    top.sort_unstable();
    for i in top {
        draw(i, 5.0, HIGHLIGHT);
    }
    out + "</svg>\n"
}

/// Nodes on a circle; edges inside the highlighted set and the set's
/// nodes are drawn in red.
pub fn graph(g: &Graph, highlight: &[usize], size: f64) -> String {
    let n = g.node_count();
    let marked: HashSet<usize> = highlight.iter().copied().collect();
    let radius = 0.5 * size - MARGIN;
    let pos = |i: usize| {
        let t = 2.0 * std::f64::consts::PI * i as f64 / n.max(1) as f64;
        (0.5 * size + radius * t.cos(), 0.5 * size + radius * t.sin())
    };
    let mut out = open(size, size);
    let mut inner = String::new();
    for u in 0..n {
        for v in u + 1..n {
            if !g.has_edge(u, v) {
                continue;
            }
            let ((x1, y1), (x2, y2)) = (pos(u), pos(v));
            let hot = marked.contains(&u) && marked.contains(&v);
            let line = format!(
                "<line x1=\"{x1:.3}\" y1=\"{y1:.3}\" x2=\"{x2:.3}\" y2=\"{y2:.3}\" stroke=\"{}\" stroke-width=\"{}\"/>\n",
                if hot { HIGHLIGHT } else { BASE },
                if hot { 2 } else { 1 }
            );
            if hot {
                inner += &line;
            } else {
                out += &line;
            }
        }
    }
    out += &inner;
    for i in 0..n {
        let (x, y) = pos(i);
        let colour = if marked.contains(&i) { HIGHLIGHT } else { BASE };
        writeln!(out, "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"6\" fill=\"{colour}\" stroke=\"black\" stroke-width=\"0.5\"/>").unwrap();
    }
    out + "</svg>\n"
}

/// One bar per histogram bin, scaled to the tallest bar, with the
/// broadened curve overlaid on its own scale and a zero-energy tick.
pub fn spectrum(s: &Spectrum, width: f64, height: f64) -> String {
    let lo = s.edges.first().copied().unwrap_or(0.0);
    let hi = s.edges.last().copied().unwrap_or(1.0);
    let max_count = s.counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let max_curve = s.broadened.iter().copied().fold(0.0, f64::max);
    let bottom = height - MARGIN;
    let sx = |x: f64| scale(x, lo, hi, MARGIN, width - MARGIN);
    let mut out = open(width, height);
    for (k, &count) in s.counts.iter().enumerate() {
        let x = sx(s.edges[k]);
        let w = sx(s.edges[k + 1]) - x;
        let h = count as f64 / max_count * (bottom - MARGIN);
        writeln!(
            out,
            "<rect class=\"bar\" x=\"{x:.3}\" y=\"{:.3}\" width=\"{w:.3}\" height=\"{h:.3}\" fill=\"{BASE}\"/>",
            bottom - h
        )
        .unwrap();
    }
    if max_curve > 0.0 {
        let pts: Vec<String> = s
            .grid
            .iter()
            .zip(&s.broadened)
            .map(|(&x, &y)| format!("{:.3},{:.3}", sx(x), bottom - y / max_curve * (bottom - MARGIN)))
            .collect();
        writeln!(out, "<polyline fill=\"none\" stroke=\"{HIGHLIGHT}\" stroke-width=\"1.5\" points=\"{}\"/>", pts.join(" ")).unwrap();
    }
    writeln!(out, "<line x1=\"{MARGIN}\" y1=\"{bottom}\" x2=\"{:.0}\" y2=\"{bottom}\" stroke=\"black\"/>", width - MARGIN).unwrap();
    if lo <= 0.0 && 0.0 <= hi {
        let x0 = sx(0.0);
        writeln!(out, "<line x1=\"{x0:.3}\" y1=\"{bottom}\" x2=\"{x0:.3}\" y2=\"{:.0}\" stroke=\"black\"/>", bottom + 5.0).unwrap();
        writeln!(out, "<text x=\"{x0:.3}\" y=\"{:.0}\" font-size=\"10\" text-anchor=\"middle\">0</text>", height - 3.0).unwrap();
    }
    out + "</svg>\n"
}
