//! Static SVG layout plots.
//!
//! Buoys are filled on a linear blue→red scale: the weakest buoy is
//! `rgb(0,0,255)`, the strongest `rgb(255,0,0)`, and a buoy with power `p`
//! gets `t = (p − min)/(max − min)` of the way. Equal powers all map to blue.

use crate::farm::Layout;

const CANVAS: f64 = 600.0;
const MARGIN: f64 = 40.0;
const CAPTION_HEIGHT: f64 = 30.0;

/// Colour of a power on the blue→red scale spanning `[min, max]`.
pub fn power_colour(power: f64, min: f64, max: f64) -> String {
    let t = if max > min { ((power - min) / (max - min)).clamp(0.0, 1.0) } else { 0.0 };
    let red = (255.0 * t).round() as u8;
    format!("rgb({},0,{})", red, 255 - red)
}

/// `Power=<P> (Watt), q-factor=<q>` with the power rounded to a watt.
pub fn caption(total: f64, q: Option<f64>) -> String {
    match q {
        Some(q) => format!("Power={total:.0} (Watt), q-factor={q:.2}"),
        None => format!("Power={total:.0} (Watt), q-factor=n/a"),
    }
}

/// SVG of the farm boundary and its buoys coloured by `per_buoy` power.
pub fn plot_layout(layout: &Layout, per_buoy: &[f64], total: f64, q: Option<f64>, buoy_radius: f64) -> String {
    let scale = CANVAS / layout.side();
    let width = CANVAS + 2.0 * MARGIN;
    let height = width + CAPTION_HEIGHT;
    let min = per_buoy.iter().copied().fold(f64::INFINITY, f64::min);
    let max = per_buoy.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let r = (buoy_radius * scale).max(3.0);

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    );
    svg.push_str(&format!(
        "  <rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{CANVAS}\" height=\"{CANVAS}\" fill=\"none\" stroke=\"black\"/>\n"
    ));
    for (i, p) in layout.positions().iter().enumerate() {
        // y grows upward in the farm, downward in SVG
        let cx = MARGIN + p[0] * scale;
        let cy = MARGIN + CANVAS - p[1] * scale;
        let power = per_buoy.get(i).copied().unwrap_or(min);
        svg.push_str(&format!(
            "  <circle cx=\"{cx:.3}\" cy=\"{cy:.3}\" r=\"{r:.3}\" fill=\"{}\"><title>{power:.0} W</title></circle>\n",
            power_colour(power, min, max)
        ));
    }
    svg.push_str(&format!(
        "  <text x=\"{MARGIN}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n",
        height - 10.0,
        caption(total, q)
    ));
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colour_scale() {
        assert_eq!(power_colour(1.0, 1.0, 3.0), "rgb(0,0,255)");
        assert_eq!(power_colour(3.0, 1.0, 3.0), "rgb(255,0,0)");
        assert_eq!(power_colour(2.0, 1.0, 3.0), "rgb(128,0,127)");
        assert_eq!(power_colour(5.0, 5.0, 5.0), power_colour(5.0, 5.0, 5.0));
    }

    #[test]
    fn caption_format() {
        assert_eq!(caption(7347403.2, Some(0.7612)), "Power=7347403 (Watt), q-factor=0.76");
    }

    #[test]
    fn svg_contents() {
        let layout = Layout::new(100.0, vec![[0.0, 0.0], [100.0, 100.0]]).unwrap();
        let svg = plot_layout(&layout, &[4.0, 4.0], 8.0, Some(1.0), 5.0);
        assert_eq!(svg.matches("<circle").count(), 2);
        assert_eq!(svg.matches("rgb(0,0,255)").count(), 2);
        let empty = plot_layout(&Layout::new(100.0, vec![]).unwrap(), &[], 0.0, None, 5.0);
        assert!(!empty.contains("<circle") && empty.contains("<rect"));
    }
}
