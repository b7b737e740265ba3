//! SVG scatter of the spectral geometry: branch intervals, atoms, contour
//! paths, and classified eigenvalues in the complex plane.

use num_complex::Complex64;

use sheetsolve_core::contour::Contour;
use sheetsolve_core::model::SpectralScenario;
use sheetsolve_core::spectral::{ClassifiedEigenvalue, EigenClass};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 50.0;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn sx(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn sy(&self, y: f64) -> f64 {
        // screen y grows downward
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn class_color(class: EigenClass) -> &'static str {
    match class {
        EigenClass::RealIsolated => "#2e7d32",
        EigenClass::RealEmbedded => "#ef6c00",
        EigenClass::Resonance => "#c62828",
    }
}

pub fn render(s: &SpectralScenario, c: &Contour, spectrum: &[ClassifiedEigenvalue]) -> String {
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = vec![0.0];
    for branch in &s.branches {
        if branch.interval.a.is_finite() {
            xs.push(branch.interval.a);
        }
        if branch.interval.b.is_finite() {
            xs.push(branch.interval.b);
        }
    }
    for atom in &s.atoms {
        xs.push(atom.position);
    }
    for path in &c.paths {
        for v in &path.vertices {
            xs.push(v.re);
            ys.push(v.im);
        }
    }
    for e in spectrum {
        xs.push(e.value.re);
        ys.push(e.value.im);
    }
    for &ev in &s.a1_spectrum().values {
        xs.push(ev);
    }
    let (mut x0, mut x1) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let (mut y0, mut y1) = ys
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    if !x0.is_finite() || x1 - x0 < 1e-9 {
        x0 -= 1.0;
        x1 += 1.0;
    }
    if y1 - y0 < 1e-9 {
        y0 -= 1.0;
        y1 += 1.0;
    }
    let xpad = 0.12 * (x1 - x0);
    let ypad = 0.25 * (y1 - y0);
    let frame = Frame {
        x0: x0 - xpad,
        x1: x1 + xpad,
        y0: y0 - ypad,
        y1: y1 + ypad,
    };

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // real axis
    out.push_str(&format!(
        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#bbbbbb\" stroke-width=\"1\"/>\n",
        frame.sx(frame.x0),
        frame.sy(0.0),
        frame.sx(frame.x1),
        frame.sy(0.0)
    ));

    // branch intervals as thick segments, infinite ends clipped to the frame
    for branch in &s.branches {
        let a = branch.interval.a.max(frame.x0);
        let b = branch.interval.b.min(frame.x1);
        out.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#333333\" stroke-width=\"5\"/>\n",
            frame.sx(a),
            frame.sy(0.0),
            frame.sx(b),
            frame.sy(0.0)
        ));
    }

    // contour polylines with ray extensions to the frame edge
    for path in &c.paths {
        let mut pts: Vec<Complex64> = Vec::new();
        if path.left_ray {
            pts.push(Complex64::new(frame.x0, path.vertices[0].im));
        }
        pts.extend_from_slice(&path.vertices);
        if path.right_ray {
            pts.push(Complex64::new(frame.x1, path.vertices.last().unwrap().im));
        }
        let coords: Vec<String> = pts
            .iter()
            .map(|v| format!("{:.2},{:.2}", frame.sx(v.re), frame.sy(v.im)))
            .collect();
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#1565c0\" stroke-width=\"1.5\" stroke-dasharray=\"6 3\"/>\n",
            coords.join(" ")
        ));
    }

    // atoms as crosses
    for atom in &s.atoms {
        let (x, y) = (frame.sx(atom.position), frame.sy(0.0));
        out.push_str(&format!(
            "<path d=\"M {x0:.2} {y0:.2} L {x1:.2} {y1:.2} M {x0:.2} {y1:.2} L {x1:.2} {y0:.2}\" stroke=\"#6a1b9a\" stroke-width=\"2\"/>\n",
            x0 = x - 5.0,
            y0 = y - 5.0,
            x1 = x + 5.0,
            y1 = y + 5.0
        ));
    }

    // eigenvalues colored by class
    for e in spectrum {
        out.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"{}\" fill-opacity=\"0.85\"/>\n",
            frame.sx(e.value.re),
            frame.sy(e.value.im),
            class_color(e.class)
        ));
    }

    // legend
    let legend = [
        (EigenClass::RealIsolated, "real isolated"),
        (EigenClass::RealEmbedded, "real embedded"),
        (EigenClass::Resonance, "resonance"),
    ];
    for (i, (class, label)) in legend.iter().enumerate() {
        let y = 20.0 + 18.0 * i as f64;
        out.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{y:.2}\" r=\"4\" fill=\"{}\"/>\n",
            WIDTH - 150.0,
            class_color(*class)
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" font-family=\"sans-serif\">{label}</text>\n",
            WIDTH - 140.0,
            y + 4.0
        ));
    }

    out.push_str("</svg>\n");
    out
}
