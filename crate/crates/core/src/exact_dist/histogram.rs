use std::collections::BTreeMap;

use crate::channels::Channel;
use crate::error::Result;

use super::{check_cap, Composition, DEFAULT_ATOM_CAP};

/// Exact law of the shuffled histogram for a fixed composition.
#[derive(Clone, Debug, PartialEq)]
pub struct HistogramLaw {
    pub n: usize,
    pub d: usize,
    /// Support points in lexicographic order.
    pub atoms: Vec<(Vec<u32>, f64)>,
    /// Factor applied when renormalizing after clamping round-off; 1 when
    /// the raw masses already summed to one.
    pub renormalization: f64,
}

impl HistogramLaw {
    /// Probability of `h` (0 outside the support).
    pub fn prob(&self, h: &[u32]) -> f64 {
        self.atoms
            .binary_search_by(|(key, _)| key.as_slice().cmp(h))
            .map(|i| self.atoms[i].1)
            .unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.atoms.iter().map(|(_, p)| p).sum()
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.d];
        for (h, p) in &self.atoms {
            for (my, &c) in m.iter_mut().zip(h) {
                *my += p * c as f64;
            }
        }
        m
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// Exact law `T_{n,k}`; fails when the atom count exceeds the default cap.
pub fn histogram_law(ch: &Channel, comp: Composition) -> Result<HistogramLaw> {
    histogram_law_capped(ch, comp, DEFAULT_ATOM_CAP)
}

pub fn histogram_law_capped(ch: &Channel, comp: Composition, cap: f64) -> Result<HistogramLaw> {
    check_cap(comp.n, ch.d(), cap)?;
    Ok(convolve(ch, comp.n - comp.k, comp.k))
}

/// User-by-user convolution: `zeros` draws from W0 first, then `ones` from W1.
/// Callers are responsible for the cap check.
pub(crate) fn convolve(ch: &Channel, zeros: usize, ones: usize) -> HistogramLaw {
    let d = ch.d();
    let mut law: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
    law.insert(vec![0; d], 1.0);
    let users = std::iter::repeat_n(ch.w0(), zeros).chain(std::iter::repeat_n(ch.w1(), ones));
    for w in users {
        let mut next: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for (h, p) in &law {
            for (y, &wy) in w.iter().enumerate() {
                if wy == 0.0 {
                    continue;
                }
                let mut g = h.clone();
                g[y] += 1;
                *next.entry(g).or_insert(0.0) += p * wy;
            }
        }
        law = next;
    }

    let mut atoms: Vec<(Vec<u32>, f64)> = law
        .into_iter()
        .map(|(h, p)| (h, p.max(0.0)))
        .filter(|(_, p)| *p > 0.0)
        .collect();
    atoms.sort_by(|a, b| a.0.cmp(&b.0));
    let total: f64 = atoms.iter().map(|(_, p)| p).sum();
    let mut renormalization = 1.0;
    if total > 0.0 && (total - 1.0).abs() > 1e-12 {
        renormalization = 1.0 / total;
        for (_, p) in atoms.iter_mut() {
            *p *= renormalization;
        }
    }
    HistogramLaw {
        n: zeros + ones,
        d,
        atoms,
        renormalization,
    }
}
