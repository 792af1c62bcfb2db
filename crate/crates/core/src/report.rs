//! Text output: curve and profile CSV, curve SVG.

use std::fmt::Write;

use crate::timemap::{Curve, Profile};

pub const CURVE_HEADER: &str = "alpha,lambda,dlambda_dalpha,uprime_at_1,w_at_1,admissible,reason";

/// Seventeen significant digits; round-trips every finite `f64`.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        String::new()
    }
}

/// One row per sampled amplitude, in increasing `alpha`, then footer rows
/// `#alpha_star,...` and `#lambda0,...` (`none` when not found).
pub fn curve_csv(curve: &Curve) -> String {
    let mut rows: Vec<(f64, String)> = curve
        .points
        .iter()
        .map(|pt| {
            let row = format!(
                "{},{},{},{},{},true,",
                num(pt.alpha),
                num(pt.lambda),
                num(pt.dlambda_dalpha),
                num(pt.uprime_at_1),
                num(pt.w_at_1)
            );
            (pt.alpha, row)
        })
        .chain(curve.rejected.iter().map(|r| {
            let reason = if r.reason.contains(',') {
                format!("\"{}\"", r.reason.replace('"', "\"\""))
            } else {
                r.reason.clone()
            };
            (r.alpha, format!("{},,,,,false,{}", num(r.alpha), reason))
        }))
        .collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for (_, row) in rows {
        out.push_str(&row);
        out.push('\n');
    }
    let opt = |v: Option<f64>| v.map(num).unwrap_or_else(|| "none".into());
    writeln!(out, "#alpha_star,{}", opt(curve.alpha_star)).unwrap();
    writeln!(out, "#lambda0,{}", opt(curve.lambda0)).unwrap();
    out
}

pub fn profile_csv(profile: &Profile) -> String {
    let mut out = String::from("x,u,uprime,m\n");
    for i in 0..profile.x.len() {
        writeln!(
            out,
            "{},{},{},{}",
            num(profile.x[i]),
            num(profile.u[i]),
            num(profile.uprime[i]),
            num(profile.m[i])
        )
        .unwrap();
    }
    out
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 60.0;

/// 800x600 polyline of the curve with `lambda` across and `alpha` up.
pub fn curve_svg(curve: &Curve) -> String {
    let pts: Vec<(f64, f64)> = curve
        .points
        .iter()
        .filter(|pt| pt.lambda.is_finite())
        .map(|pt| (pt.lambda, pt.alpha))
        .collect();
    let range = |vals: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, hi + 0.5)
        }
    };
    let (lmin, lmax) = range(&mut pts.iter().map(|p| p.0));
    let (amin, amax) = range(&mut pts.iter().map(|p| p.1));
    let sx = |l: f64| MARGIN + (l - lmin) / (lmax - lmin) * (WIDTH - 2.0 * MARGIN);
    let sy = |a: f64| HEIGHT - MARGIN - (a - amin) / (amax - amin) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    out.push_str(r#"<rect width="100%" height="100%" fill="white"/>"#);
    out.push('\n');
    let (x0, y0, x1, y1) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, MARGIN);
    writeln!(
        out,
        r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    let label = |out: &mut String, x: f64, y: f64, anchor: &str, text: String| {
        writeln!(
            out,
            r#"<text x="{x:.2}" y="{y:.2}" font-size="12" text-anchor="{anchor}">{text}</text>"#
        )
        .unwrap();
    };
    label(&mut out, x0, y0 + 18.0, "middle", format!("{lmin:.4}"));
    label(&mut out, x1, y0 + 18.0, "middle", format!("{lmax:.4}"));
    label(&mut out, x0 - 6.0, y0 + 4.0, "end", format!("{amin:.4}"));
    label(&mut out, x0 - 6.0, y1 + 4.0, "end", format!("{amax:.4}"));
    label(&mut out, 0.5 * WIDTH, HEIGHT - 15.0, "middle", "λ".into());
    label(&mut out, 20.0, 0.5 * HEIGHT, "middle", "u(0)".into());

    let coords: Vec<String> = pts
        .iter()
        .map(|&(l, a)| format!("{:.2},{:.2}", sx(l), sy(a)))
        .collect();
    writeln!(
        out,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#,
        coords.join(" ")
    )
    .unwrap();
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timemap::{CurvePoint, RejectedAmplitude};

    fn sample() -> Curve {
        Curve {
            points: vec![
                CurvePoint {
                    alpha: 3.0,
                    lambda: 2.0,
                    dlambda_dalpha: -1.0,
                    uprime_at_1: -0.5,
                    w_at_1: f64::NAN,
                },
                CurvePoint {
                    alpha: 2.0,
                    lambda: 4.0,
                    dlambda_dalpha: -2.0,
                    uprime_at_1: -0.25,
                    w_at_1: 0.1,
                },
            ],
            rejected: vec![RejectedAmplitude {
                alpha: 1.0,
                reason: "f(alpha)=0".into(),
            }],
            alpha_star: Some(1.5),
            lambda0: None,
        }
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, f64::MAX, std::f64::consts::PI] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(f64::NAN), "");
    }

    #[test]
    fn csv_rows_sorted_with_footer() {
        let csv = curve_csv(&sample());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CURVE_HEADER);
        assert_eq!(lines.len(), 6);
        assert!(lines[1].starts_with("1.0000000000000000e0,,,,,false,f(alpha)=0"));
        assert!(lines[2].starts_with("2.0000000000000000e0,4."));
        assert!(lines[3].ends_with(",,true,"));
        assert_eq!(lines[4], "#alpha_star,1.5000000000000000e0");
        assert_eq!(lines[5], "#lambda0,none");
        for line in &lines[1..4] {
            assert_eq!(line.split(',').count(), 7);
        }
    }

    #[test]
    fn svg_has_canvas_and_polyline() {
        let svg = curve_svg(&sample());
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains(r#"width="800" height="600""#));
        // lambda = 2 is leftmost and alpha = 3 topmost
        assert!(svg.contains(r#"points="60.00,60.00 740.00,540.00""#));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
