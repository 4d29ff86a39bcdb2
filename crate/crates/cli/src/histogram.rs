//! Overlaid per-method histograms rendered as standalone SVG.

use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RangePolicy {
    /// Span the finite samples of all series.
    Auto,
    /// Fixed `[lo, hi]`; samples outside are not drawn.
    Fixed(f64, f64),
}

#[derive(Debug, Clone)]
pub struct Histogram {
    pub title: String,
    pub x_label: String,
    pub lo: f64,
    pub hi: f64,
    /// Series name and counts per bin.
    pub series: Vec<(String, Vec<usize>)>,
}

/// Bin of `x` among `bins` equal bins over `[lo, hi]`. Bins are right-open
/// except the last, which also takes `hi`.
pub fn bin_index(x: f64, lo: f64, hi: f64, bins: usize) -> Option<usize> {
    if !x.is_finite() || x < lo || x > hi || bins == 0 {
        return None;
    }
    let k = ((x - lo) / (hi - lo) * bins as f64).floor() as usize;
    Some(k.min(bins - 1))
}

fn auto_range<'a>(values: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

impl Histogram {
    pub fn build(title: &str, x_label: &str, series: &[(String, Vec<f64>)], bins: usize, range: RangePolicy) -> Self {
        let bins = bins.max(1);
        let (lo, hi) = match range {
            RangePolicy::Auto => auto_range(series.iter().flat_map(|(_, v)| v.iter())),
            RangePolicy::Fixed(lo, hi) => (lo, hi),
        };
        let series = series
            .iter()
            .map(|(name, values)| {
                let mut counts = vec![0; bins];
                for &v in values {
                    if let Some(k) = bin_index(v, lo, hi, bins) {
                        counts[k] += 1;
                    }
                }
                (name.clone(), counts)
            })
            .collect();
        Self {
            title: title.into(),
            x_label: x_label.into(),
            lo,
            hi,
            series,
        }
    }

    pub fn bins(&self) -> usize {
        self.series.first().map_or(0, |(_, c)| c.len())
    }

    pub fn to_svg(&self) -> String {
        const W: f64 = 760.0;
        const H: f64 = 440.0;
        const LEFT: f64 = 60.0;
        const RIGHT: f64 = 170.0;
        const TOP: f64 = 40.0;
        const BOTTOM: f64 = 60.0;
        const COLORS: [&str; 8] = [
            "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
        ];
        let pw = W - LEFT - RIGHT;
        let ph = H - TOP - BOTTOM;
        let bins = self.bins().max(1);
        let peak = self
            .series
            .iter()
            .flat_map(|(_, c)| c.iter().copied())
            .max()
            .unwrap_or(0)
            .max(1);
        let bw = pw / bins as f64;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            LEFT + pw / 2.0,
            escape(&self.title)
        );
        for (i, (_, counts)) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            for (k, &c) in counts.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let h = c as f64 / peak as f64 * ph;
                let _ = writeln!(
                    s,
                    r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}" fill-opacity="0.45" stroke="{color}" stroke-width="0.5"/>"#,
                    LEFT + k as f64 * bw,
                    TOP + ph - h,
                    bw,
                    h
                );
            }
        }
        let (x0, y0) = (LEFT, TOP + ph);
        let _ = writeln!(
            s,
            r#"<path d="M{x0} {TOP} V{y0} H{}" fill="none" stroke="black"/>"#,
            LEFT + pw
        );
        for i in 0..=5 {
            let f = i as f64 / 5.0;
            let x = LEFT + f * pw;
            let v = self.lo + f * (self.hi - self.lo);
            let _ = writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{}" stroke="black"/><text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#,
                y0 + 5.0,
                y0 + 18.0,
                tick(v)
            );
            let y = y0 - f * ph;
            let _ = writeln!(
                s,
                r#"<line x1="{}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
                x0 - 5.0,
                x0 - 8.0,
                y + 4.0,
                (f * peak as f64).round() as usize
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            H - 18.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">count</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0
        );
        let lx = LEFT + pw + 20.0;
        for (i, (name, _)) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let y = TOP + 10.0 + 20.0 * i as f64;
            let _ = writeln!(
                s,
                r#"<rect x="{lx}" y="{}" width="14" height="14" fill="{color}" fill-opacity="0.45" stroke="{color}"/><text x="{}" y="{}">{}</text>"#,
                y - 11.0,
                lx + 20.0,
                y,
                escape(name)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edges_fall_in_the_right_bins() {
        assert_eq!(bin_index(0.0, 0.0, 1.0, 4), Some(0));
        assert_eq!(bin_index(0.25, 0.0, 1.0, 4), Some(1));
        assert_eq!(bin_index(0.999, 0.0, 1.0, 4), Some(3));
        assert_eq!(bin_index(1.0, 0.0, 1.0, 4), Some(3));
        assert_eq!(bin_index(1.0001, 0.0, 1.0, 4), None);
        assert_eq!(bin_index(-0.1, 0.0, 1.0, 4), None);
        assert_eq!(bin_index(f64::NAN, 0.0, 1.0, 4), None);
    }

    #[test]
    fn auto_range_keeps_every_finite_sample() {
        let series = vec![
            ("a".to_string(), vec![1.0, 2.0, 3.0, f64::NAN]),
            ("b".to_string(), vec![-1.0, 3.0]),
        ];
        let h = Histogram::build("t", "x", &series, 30, RangePolicy::Auto);
        assert_eq!((h.lo, h.hi), (-1.0, 3.0));
        assert_eq!(h.series[0].1.iter().sum::<usize>(), 3);
        assert_eq!(h.series[1].1.iter().sum::<usize>(), 2);
        assert_eq!(h.bins(), 30);
    }

    #[test]
    fn constant_samples_get_a_unit_range() {
        let h = Histogram::build("t", "x", &[("a".into(), vec![2.0; 3])], 10, RangePolicy::Auto);
        assert_eq!((h.lo, h.hi), (1.5, 2.5));
        assert_eq!(h.series[0].1[5], 3);
    }

    #[test]
    fn fixed_range_drops_outliers() {
        let h = Histogram::build("t", "x", &[("a".into(), vec![-5.0, 0.5, 5.0])], 2, RangePolicy::Fixed(0.0, 1.0));
        assert_eq!(h.series[0].1, vec![0, 1]);
    }

    #[test]
    fn svg_has_a_bar_per_nonempty_bin_and_a_legend() {
        let series = vec![("L1.0".to_string(), vec![0.0, 0.1, 0.9]), ("L1.1 & co".to_string(), vec![0.5])];
        let svg = Histogram::build("errors", "e", &series, 4, RangePolicy::Auto).to_svg();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("stroke-width=\"0.5\"").count(), 3);
        assert!(svg.contains("L1.1 &amp; co"));
    }
}
