//! Generalized histogram thresholding (Barron, 2020).
//!
//! The objective unifies Otsu's method and minimum-error thresholding. With
//! `nu = inf` and `tau = 0` the within-class scatter term dominates and the
//! maximiser is Otsu's threshold; that limit is evaluated in exact integer
//! arithmetic so ties break deterministically (lowest cut wins).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Prior strengths of the GHT objective.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhtParams {
    pub nu: f64,
    pub tau: f64,
    pub kappa: f64,
    pub omega: f64,
}

impl GhtParams {
    /// The Otsu limit.
    pub const OTSU: GhtParams = GhtParams {
        nu: f64::INFINITY,
        tau: 0.0,
        kappa: 0.0,
        omega: 0.5,
    };

    /// Minimum-error thresholding (Kittler & Illingworth).
    pub const MET: GhtParams = GhtParams {
        nu: 0.0,
        tau: 0.0,
        kappa: 0.0,
        omega: 0.5,
    };

    pub fn validate(&self) -> Result<()> {
        let ok = self.nu >= 0.0
            && self.tau >= 0.0
            && self.tau.is_finite()
            && self.kappa >= 0.0
            && self.kappa.is_finite()
            && (0.0..=1.0).contains(&self.omega);
        if ok {
            Ok(())
        } else {
            Err(Error::Argument(format!("invalid GHT parameters {self:?}")))
        }
    }

    pub fn is_otsu_limit(&self) -> bool {
        self.nu.is_infinite() && self.tau == 0.0
    }
}

impl Default for GhtParams {
    fn default() -> Self {
        GhtParams::OTSU
    }
}

/// Histogram with uniform bins starting at `lo_edge`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo_edge: f64,
    pub bin_width: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(lo_edge: f64, bin_width: f64, counts: Vec<u64>) -> Result<Self> {
        if !(bin_width > 0.0) || counts.is_empty() {
            return Err(Error::Argument("histogram needs positive bin width and at least one bin".into()));
        }
        Ok(Histogram {
            lo_edge,
            bin_width,
            counts,
        })
    }

    /// One bin per integer HU over `[lo, hi]`; values are floored and clamped.
    pub fn integer_hu(lo: f32, hi: f32, values: impl Iterator<Item = f32>) -> Histogram {
        let lo_i = lo.floor() as i64;
        let bins = (hi.floor() as i64 - lo_i + 1).max(1) as usize;
        let mut counts = vec![0u64; bins];
        for v in values {
            let b = (v.floor() as i64 - lo_i).clamp(0, bins as i64 - 1) as usize;
            counts[b] += 1;
        }
        Histogram {
            lo_edge: lo_i as f64,
            bin_width: 1.0,
            counts,
        }
    }

    pub fn edge(&self, k: usize) -> f64 {
        self.lo_edge + k as f64 * self.bin_width
    }

    pub fn center(&self, k: usize) -> f64 {
        self.lo_edge + (k as f64 + 0.5) * self.bin_width
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn occupied_bins(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

/// Threshold maximising the GHT objective.
///
/// Cut `k` puts bins `0..=k` in the lower class; the returned value is the
/// upper edge of bin `k`, so `value >= threshold` selects the upper class.
pub fn ght_threshold(hist: &Histogram, params: &GhtParams) -> Result<f64> {
    params.validate()?;
    if hist.counts.len() < 2 {
        return Err(Error::Degenerate("GHT needs at least two histogram bins".into()));
    }
    if hist.total() == 0 {
        return Err(Error::Degenerate("GHT on an empty histogram".into()));
    }
    let cut = if params.is_otsu_limit() {
        otsu_cut_exact(&hist.counts).unwrap_or_else(|| best_cut(&ght_scores(hist, &GhtParams::OTSU_FLOAT)))
    } else {
        best_cut(&ght_scores(hist, params))
    };
    Ok(hist.edge(cut + 1))
}

impl GhtParams {
    // Finite stand-in used only when the exact Otsu path would overflow.
    const OTSU_FLOAT: GhtParams = GhtParams {
        nu: f64::INFINITY,
        tau: 1e-6,
        kappa: 0.0,
        omega: 0.5,
    };
}

fn best_cut(scores: &[f64]) -> usize {
    let mut best = 0;
    for (k, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = k;
        }
    }
    best
}

const CLIP: f64 = 1e-30;

/// GHT objective for every cut, with x = bin centres.
fn ght_scores(hist: &Histogram, p: &GhtParams) -> Vec<f64> {
    let n = &hist.counts;
    let total_w: f64 = n.iter().map(|&c| c as f64).sum();
    let total_s: f64 = n.iter().enumerate().map(|(k, &c)| c as f64 * hist.center(k)).sum();
    let total_q: f64 = n.iter().enumerate().map(|(k, &c)| c as f64 * hist.center(k).powi(2)).sum();
    let (mut w, mut s, mut q) = (0.0, 0.0, 0.0);
    let mut out = Vec::with_capacity(n.len() - 1);
    for k in 0..n.len() - 1 {
        let x = hist.center(k);
        let c = n[k] as f64;
        w += c;
        s += c * x;
        q += c * x * x;
        let w0 = w.max(CLIP);
        let w1 = (total_w - w).max(CLIP);
        let p0 = w0 / (w0 + w1);
        let p1 = w1 / (w0 + w1);
        let d0 = (q - s * s / w0).max(0.0);
        let (s1, q1) = (total_s - s, total_q - q);
        let d1 = (q1 - s1 * s1 / w1).max(0.0);
        let var = |pc: f64, d: f64, wc: f64| {
            let v = if p.nu.is_infinite() {
                p.tau * p.tau
            } else {
                (pc * p.nu * p.tau * p.tau + d) / (pc * p.nu + wc)
            };
            v.max(CLIP)
        };
        let v0 = var(p0, d0, w0);
        let v1 = var(p1, d1, w1);
        let f0 = -d0 / v0 - w0 * v0.ln() + 2.0 * (w0 + p.kappa * p.omega) * w0.ln();
        let f1 = -d1 / v1 - w1 * v1.ln() + 2.0 * (w1 + p.kappa * (1.0 - p.omega)) * w1.ln();
        out.push(f0 + f1);
    }
    out
}

/// Otsu's cut maximising `S0^2/w0 + S1^2/w1` (equivalently minimising the
/// within-class scatter), compared as exact fractions. `None` on overflow.
fn otsu_cut_exact(counts: &[u64]) -> Option<usize> {
    let total_w: u128 = counts.iter().map(|&c| c as u128).sum();
    let total_s = counts
        .iter()
        .enumerate()
        .try_fold(0u128, |acc, (k, &c)| acc.checked_add((c as u128).checked_mul(k as u128)?))?;
    // score(k) = num / den; empty classes contribute nothing.
    let score = |w0: u128, s0: u128| -> Option<(u128, u128)> {
        let (w1, s1) = (total_w - w0, total_s - s0);
        match (w0, w1) {
            (0, 0) => Some((0, 1)),
            (0, _) => Some((s1.checked_mul(s1)?, w1)),
            (_, 0) => Some((s0.checked_mul(s0)?, w0)),
            _ => {
                let a = s0.checked_mul(s0)?.checked_mul(w1)?;
                let b = s1.checked_mul(s1)?.checked_mul(w0)?;
                Some((a.checked_add(b)?, w0.checked_mul(w1)?))
            }
        }
    };
    let (mut w0, mut s0) = (0u128, 0u128);
    let mut best: Option<(usize, u128, u128)> = None;
    for (k, &c) in counts[..counts.len() - 1].iter().enumerate() {
        w0 += c as u128;
        s0 += c as u128 * k as u128;
        let (num, den) = score(w0, s0)?;
        let better = match best {
            None => true,
            Some((_, bn, bd)) => num.checked_mul(bd)? > bn.checked_mul(den)?,
        };
        if better {
            best = Some((k, num, den));
        }
    }
    best.map(|(k, _, _)| k)
}
