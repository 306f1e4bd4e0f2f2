use serde::Serialize;

use super::LrAtomization;

/// Piecewise-linear Neyman–Pearson trade-off curve: `beta(alpha)` is the
/// smallest type-II error under `Q` at type-I level `alpha` under `P`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TradeoffCurve {
    /// Vertices sorted by ascending `alpha`, from `alpha = 0` to `alpha = 1`.
    pub vertices: Vec<(f64, f64)>,
}

impl TradeoffCurve {
    /// Linear interpolation between vertices (randomized tests).
    pub fn beta_at(&self, alpha: f64) -> f64 {
        let alpha = alpha.clamp(0.0, 1.0);
        let v = &self.vertices;
        let i = v.partition_point(|p| p.0 < alpha);
        if i == 0 {
            return v[0].1;
        }
        if i == v.len() {
            return v[v.len() - 1].1;
        }
        let (a0, b0) = v[i - 1];
        let (a1, b1) = v[i];
        if a1 == a0 {
            return b0.min(b1);
        }
        b0 + (b1 - b0) * (alpha - a0) / (a1 - a0)
    }

    /// Largest `|beta(alpha) - other(alpha)|` over the union of both vertex sets.
    pub fn sup_distance(&self, other: impl Fn(f64) -> f64) -> f64 {
        self.vertices
            .iter()
            .map(|&(a, b)| (b - other(a)).abs())
            .fold(0.0, f64::max)
    }
}

/// Neyman–Pearson sweep: reject on the largest likelihood ratios first.
pub fn tradeoff_curve(atoms: &LrAtomization) -> TradeoffCurve {
    let mut vertices = Vec::with_capacity(atoms.atoms.len() + 2);
    let mut alpha = 0.0f64;
    let mut beta = (1.0 - atoms.q_null).max(0.0);
    vertices.push((0.0, beta));
    for a in atoms.atoms.iter().rev() {
        alpha += a.p;
        beta -= a.q;
        vertices.push((alpha.min(1.0), beta.max(0.0)));
    }
    if let Some(last) = vertices.last_mut() {
        *last = (1.0, 0.0);
    }
    TradeoffCurve { vertices }
}
