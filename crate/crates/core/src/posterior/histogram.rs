use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::quantile;
use crate::error::{Error, Result};

/// Fixed-width histogram with Freedman-Diaconis bins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

const MAX_BINS: usize = 500;

impl Histogram {
    pub fn freedman_diaconis(draws: &[f64]) -> Result<Self> {
        if draws.is_empty() {
            return Err(Error::TooFewDraws { needed: 1, got: 0 });
        }
        let mut s = draws.to_vec();
        s.sort_by(f64::total_cmp);
        let (lo, hi) = (s[0], s[s.len() - 1]);
        let iqr = quantile(&s, 0.75) - quantile(&s, 0.25);
        let width = 2.0 * iqr / (s.len() as f64).cbrt();
        let bins = if hi > lo && width > 0.0 {
            (((hi - lo) / width).ceil() as usize).clamp(1, MAX_BINS)
        } else {
            1
        };
        let span = if hi > lo { hi - lo } else { 1.0 };
        let edges: Vec<f64> = (0..=bins).map(|i| lo + span * i as f64 / bins as f64).collect();
        let mut counts = vec![0u64; bins];
        for v in &s {
            let idx = (((v - lo) / span) * bins as f64).floor() as usize;
            counts[idx.min(bins - 1)] += 1;
        }
        Ok(Self { edges, counts })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Density of bin `i` (integrates to one).
    pub fn density(&self, i: usize) -> f64 {
        let w = self.edges[i + 1] - self.edges[i];
        self.counts[i] as f64 / (self.total() as f64 * w)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_low,bin_high,count,density\n");
        for i in 0..self.counts.len() {
            let _ = writeln!(out, "{},{},{},{}", self.edges[i], self.edges[i + 1], self.counts[i], self.density(i));
        }
        out
    }
}

/// A plain bar chart of the histogram.
pub fn histogram_svg(h: &Histogram, title: &str) -> String {
    let (w, ht, pad) = (640.0, 360.0, 40.0);
    let max = h.counts.iter().copied().max().unwrap_or(1).max(1) as f64;
    let bar = (w - 2.0 * pad) / h.counts.len() as f64;
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{ht}\" viewBox=\"0 0 {w} {ht}\">\n\
         <text x=\"{pad}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n",
        escape(title)
    );
    for (i, c) in h.counts.iter().enumerate() {
        let bh = (ht - 2.0 * pad) * *c as f64 / max;
        let _ = writeln!(
            svg,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#4c72b0\"/>",
            pad + i as f64 * bar,
            ht - pad - bh,
            bar.max(0.5),
            bh
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{pad}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{:.4}</text>\n\
         <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{:.4}</text>\n</svg>",
        ht - pad / 3.0,
        h.edges[0],
        w - pad,
        ht - pad / 3.0,
        h.edges[h.edges.len() - 1]
    );
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_all_draws() {
        let draws: Vec<f64> = (0..1000).map(|i| (i as f64).sqrt()).collect();
        let h = Histogram::freedman_diaconis(&draws).unwrap();
        assert_eq!(h.total(), 1000);
        let area: f64 = (0..h.counts.len()).map(|i| h.density(i) * (h.edges[i + 1] - h.edges[i])).sum();
        assert!((area - 1.0).abs() < 1e-12);
        assert!(h.to_csv().lines().count() == h.counts.len() + 1);
    }

    #[test]
    fn constant_draws_give_one_bin() {
        let h = Histogram::freedman_diaconis(&[2.0; 50]).unwrap();
        assert_eq!(h.counts, vec![50]);
        assert!(histogram_svg(&h, "N <posterior>").contains("&lt;posterior&gt;"));
    }
}
