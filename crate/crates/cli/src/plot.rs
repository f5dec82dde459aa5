//! Static SVG figures: entropy curve with its fit, coefficient/derivative
//! panels for sweeps, and the boundary locus against the reference circle.
//!
//! Rendering is fully deterministic: fixed canvas geometry, a fixed palette,
//! and fixed-precision coordinates, so equal inputs produce identical bytes.

use std::fmt::Write;

use xy_entropy::{BoundaryPoint, EntropyCurve, ScalingFit, SweepResult};

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

struct Panel {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
}

fn finite_range<'a>(values: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        if v.is_finite() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

impl Panel {
    fn map_x(&self, v: f64) -> f64 {
        self.x + (v - self.xmin) / (self.xmax - self.xmin) * self.w
    }

    fn map_y(&self, v: f64) -> f64 {
        self.y + self.h - (v - self.ymin) / (self.ymax - self.ymin) * self.h
    }

    fn frame(&self, out: &mut String, title: &str) {
        write!(
            out,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
             fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>",
            self.x, self.y, self.w, self.h
        )
        .unwrap();
        write!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" \
             text-anchor=\"middle\">{title}</text>",
            self.x + self.w / 2.0,
            self.y - 6.0
        )
        .unwrap();
        for k in 0..=4u32 {
            let t = f64::from(k) / 4.0;
            let xv = self.xmin + t * (self.xmax - self.xmin);
            let yv = self.ymin + t * (self.ymax - self.ymin);
            let px = self.map_x(xv);
            let py = self.map_y(yv);
            write!(
                out,
                "<line x1=\"{px:.2}\" y1=\"{:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" \
                 stroke=\"#333333\" stroke-width=\"1\"/>\
                 <text x=\"{px:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"9\" \
                 text-anchor=\"middle\">{}</text>",
                self.y + self.h,
                self.y + self.h + 4.0,
                self.y + self.h + 14.0,
                tick_label(xv)
            )
            .unwrap();
            write!(
                out,
                "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{:.2}\" y2=\"{py:.2}\" \
                 stroke=\"#333333\" stroke-width=\"1\"/>\
                 <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"9\" \
                 text-anchor=\"end\">{}</text>",
                self.x - 4.0,
                self.x,
                self.x - 6.0,
                py + 3.0,
                tick_label(yv)
            )
            .unwrap();
        }
    }

    /// Polyline through the finite points, breaking at gaps.
    fn polyline(&self, out: &mut String, xs: &[f64], ys: &[f64], color: &str) {
        let mut segment: Vec<String> = Vec::new();
        let flush = |segment: &mut Vec<String>, out: &mut String| {
            if segment.len() > 1 {
                write!(
                    out,
                    "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" \
                     stroke-width=\"1.5\"/>",
                    segment.join(" ")
                )
                .unwrap();
            }
            segment.clear();
        };
        for (&x, &y) in xs.iter().zip(ys) {
            if x.is_finite() && y.is_finite() {
                segment.push(format!("{:.2},{:.2}", self.map_x(x), self.map_y(y)));
            } else {
                flush(&mut segment, out);
            }
        }
        flush(&mut segment, out);
    }

    fn dots(&self, out: &mut String, xs: &[f64], ys: &[f64], color: &str) {
        for (&x, &y) in xs.iter().zip(ys) {
            if x.is_finite() && y.is_finite() {
                write!(
                    out,
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>",
                    self.map_x(x),
                    self.map_y(y)
                )
                .unwrap();
            }
        }
    }
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 0.01 && v.abs() < 1000.0 {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

fn document(width: f64, height: f64, body: String) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\">\n\
         <rect width=\"{width:.0}\" height=\"{height:.0}\" fill=\"#ffffff\"/>\n\
         {body}\n</svg>\n"
    )
}

/// Diagonal-entropy points as dots with the fitted scaling law as a line.
pub fn entropy_figure(curve: &EntropyCurve<f64>, fit: &ScalingFit<f64>) -> String {
    let xs: Vec<f64> = curve.block_lens().iter().map(|&l| l as f64).collect();
    let de = curve.diagonal().to_vec();
    let (xmin, xmax) = finite_range(xs.iter());
    let (ymin, ymax) = finite_range(de.iter());
    let panel = Panel {
        x: 60.0,
        y: 30.0,
        w: 400.0,
        h: 300.0,
        xmin,
        xmax,
        ymin: ymin.min(0.0),
        ymax,
    };
    let mut body = String::new();
    panel.frame(
        &mut body,
        &format!(
            "DE(L), gamma={}, lambda={} — fit a={:.4}, b={:.4}, c={:.4}",
            curve.params().gamma,
            curve.params().lambda,
            fit.a,
            fit.b,
            fit.c
        ),
    );
    let mut fit_xs = Vec::new();
    let mut fit_ys = Vec::new();
    let samples = 200usize;
    let lo = xs[0];
    let hi = xs[xs.len() - 1];
    for i in 0..=samples {
        let l = lo + (hi - lo) * i as f64 / samples as f64;
        fit_xs.push(l);
        fit_ys.push(fit.a * l + fit.b * l.log2() + fit.c);
    }
    panel.polyline(&mut body, &fit_xs, &fit_ys, PALETTE[1]);
    panel.dots(&mut body, &xs, &de, PALETTE[0]);
    document(500.0, 370.0, body)
}

/// Coefficient and derivative panels (a, b, c on the left, their field
/// derivatives on the right), one polyline per sweep.
pub fn sweep_figure(results: &[SweepResult<f64>]) -> String {
    type Extract = fn(&SweepResult<f64>) -> &[f64];
    let columns: [(&str, Extract); 6] = [
        ("a(lambda)", |r| &r.a),
        ("da/dlambda", |r| &r.da),
        ("b(lambda)", |r| &r.b),
        ("db/dlambda", |r| &r.db),
        ("c(lambda)", |r| &r.c),
        ("dc/dlambda", |r| &r.dc),
    ];
    let mut body = String::new();
    for (slot, (title, extract)) in columns.iter().enumerate() {
        let row = slot / 2;
        let col = slot % 2;
        let (xmin, xmax) = finite_range(results.iter().flat_map(|r| r.lambda.iter()));
        let (ymin, ymax) = finite_range(results.iter().flat_map(|r| extract(r).iter()));
        let panel = Panel {
            x: 60.0 + col as f64 * 330.0,
            y: 30.0 + row as f64 * 230.0,
            w: 270.0,
            h: 180.0,
            xmin,
            xmax,
            ymin,
            ymax,
        };
        panel.frame(&mut body, title);
        for (i, result) in results.iter().enumerate() {
            panel.polyline(
                &mut body,
                &result.lambda,
                extract(result),
                PALETTE[i % PALETTE.len()],
            );
        }
    }
    // legend: one entry per sweep
    for (i, result) in results.iter().enumerate() {
        write!(
            body,
            "<text x=\"30\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"10\" \
             fill=\"{}\">gamma={}</text>",
            706.0 + 12.0 * i as f64,
            PALETTE[i % PALETTE.len()],
            result.gamma
        )
        .unwrap();
    }
    document(700.0, 710.0 + 12.0 * results.len() as f64, body)
}

/// Boundary points in the (lambda, gamma) plane with the reference circle
/// `gamma² + lambda² = 1`.
pub fn boundary_figure(points: &[BoundaryPoint<f64>]) -> String {
    let panel = Panel {
        x: 60.0,
        y: 30.0,
        w: 360.0,
        h: 360.0,
        xmin: 0.0,
        xmax: 1.05,
        ymin: 0.0,
        ymax: 1.05,
    };
    let mut body = String::new();
    panel.frame(&mut body, "c = 0 locus vs the circle gamma^2 + lambda^2 = 1");
    let samples = 180usize;
    let mut cx = Vec::with_capacity(samples + 1);
    let mut cy = Vec::with_capacity(samples + 1);
    for i in 0..=samples {
        let t = std::f64::consts::FRAC_PI_2 * i as f64 / samples as f64;
        cx.push(t.cos());
        cy.push(t.sin());
    }
    panel.polyline(&mut body, &cx, &cy, PALETTE[2]);
    let xs: Vec<f64> = points.iter().map(|p| p.lambda_star).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.gamma).collect();
    panel.dots(&mut body, &xs, &ys, PALETTE[0]);
    document(470.0, 430.0, body)
}
