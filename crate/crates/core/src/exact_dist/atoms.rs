use std::collections::BTreeMap;

use serde::Serialize;

use crate::channels::Channel;
use crate::error::{Error, Result};

use super::histogram::convolve;
use super::{check_cap, ln_choose, Composition, DEFAULT_ATOM_CAP, LOG_SPACE_SWITCHOVER};

/// Relative tolerance under which two likelihood-ratio values are one atom.
pub const MERGE_TOLERANCE: f64 = 1e-12;

/// One distinct likelihood-ratio value with its mass under both hypotheses.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LrAtom {
    /// `dQ/dP`
    pub l: f64,
    /// mass under P
    pub p: f64,
    /// mass under Q
    pub q: f64,
}

/// The binary experiment `(P, Q)` compressed to its likelihood-ratio atoms.
///
/// Atoms are sorted by ascending `l` and all carry `p > 0`. Mass that `Q`
/// places where `P` vanishes is kept separately in `q_null`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LrAtomization {
    pub atoms: Vec<LrAtom>,
    pub q_null: f64,
    /// `(k, k+1)` for shuffle pairs; informational.
    pub direction: (usize, usize),
}

impl LrAtomization {
    /// Builds an atomization from raw `(l, p, q)` triples, dropping `p = 0`
    /// entries into `q_null` and merging near-equal ratios.
    pub fn from_triples(triples: Vec<(f64, f64, f64)>, direction: (usize, usize)) -> Self {
        let mut q_null = 0.0;
        let mut kept: Vec<(f64, f64, f64)> = Vec::with_capacity(triples.len());
        for (l, p, q) in triples {
            if p > 0.0 {
                kept.push((l, p, q));
            } else {
                q_null += q;
            }
        }
        kept.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut atoms: Vec<LrAtom> = Vec::with_capacity(kept.len());
        let mut anchor = f64::NAN;
        for (l, p, q) in kept {
            match atoms.last_mut() {
                Some(last) if (l - anchor).abs() <= MERGE_TOLERANCE * l.abs().max(anchor.abs()) => {
                    last.p += p;
                    last.q += q;
                    last.l = last.q / last.p;
                }
                _ => {
                    anchor = l;
                    atoms.push(LrAtom { l, p, q });
                }
            }
        }
        LrAtomization {
            atoms,
            q_null,
            direction,
        }
    }

    pub fn total_p(&self) -> f64 {
        self.atoms.iter().map(|a| a.p).sum()
    }

    pub fn total_q(&self) -> f64 {
        self.atoms.iter().map(|a| a.q).sum::<f64>() + self.q_null
    }

    /// The same experiment with the roles of `P` and `Q` exchanged.
    pub fn reversed(&self) -> LrAtomization {
        let mut triples: Vec<(f64, f64, f64)> = self
            .atoms
            .iter()
            .map(|a| {
                if a.q > 0.0 {
                    (a.p / a.q, a.q, a.p)
                } else {
                    (f64::INFINITY, 0.0, a.p)
                }
            })
            .collect();
        if self.q_null > 0.0 {
            triples.push((0.0, self.q_null, 0.0));
        }
        LrAtomization::from_triples(triples, (self.direction.1, self.direction.0))
    }

    pub fn l_max(&self) -> f64 {
        self.atoms.last().map_or(1.0, |a| a.l)
    }
}

/// Exact atoms of `L = dT_{n,k+1} / dT_{n,k}`.
pub fn lr_atoms(ch: &Channel, comp: Composition) -> Result<LrAtomization> {
    lr_atoms_capped(ch, comp, DEFAULT_ATOM_CAP)
}

pub fn lr_atoms_capped(ch: &Channel, comp: Composition, cap: f64) -> Result<LrAtomization> {
    let Composition { n, k } = comp;
    if k >= n {
        return Err(Error::validation(format!(
            "likelihood ratio needs k <= n - 1 (got k = {k}, n = {n})"
        )));
    }
    check_cap(n, ch.d(), cap)?;
    let rest = convolve(ch, n - 1 - k, k);
    let masses = pair_masses(ch, &rest);

    let w: Option<Vec<f64>> = (k == 0 && ch.w0().iter().all(|&x| x > 0.0))
        .then(|| ch.w1().iter().zip(ch.w0()).map(|(a, b)| a / b).collect());

    let mut triples = Vec::with_capacity(masses.len());
    for (h, (p, q)) in masses {
        if p > 0.0 {
            let l = q / p;
            if let Some(w) = &w {
                let linear = h.iter().zip(w).map(|(&c, wy)| c as f64 * wy).sum::<f64>() / n as f64;
                if (l - linear).abs() > 1e-10 * (1.0 + linear) {
                    return Err(Error::Invariant(format!(
                        "canonical likelihood ratio {l} disagrees with linear form {linear} at {h:?}"
                    )));
                }
            }
            triples.push((l, p, q));
        } else {
            triples.push((f64::INFINITY, 0.0, q));
        }
    }
    Ok(LrAtomization::from_triples(triples, (k, k + 1)))
}

/// `(P(N), Q(N))`, in lexicographic order, for every reachable `N = M + e_y`, with the distinguished
/// user drawing from W0 under P and from W1 under Q and `M ~ rest`.
pub(crate) fn pair_masses(
    ch: &Channel,
    rest: &super::HistogramLaw,
) -> BTreeMap<Vec<u32>, (f64, f64)> {
    let mut out: BTreeMap<Vec<u32>, (f64, f64)> = BTreeMap::new();
    for (m, t) in &rest.atoms {
        for y in 0..ch.d() {
            let (a, b) = (ch.w0()[y] * t, ch.w1()[y] * t);
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let mut h = m.clone();
            h[y] += 1;
            let e = out.entry(h).or_insert((0.0, 0.0));
            e.0 += a;
            e.1 += b;
        }
    }
    out
}

/// Canonical-pair atoms for a binary-output channel from the closed-form
/// binomial law of `K = N_1`; scales to large `n`.
pub fn binomial_atoms(ch: &Channel, n: usize) -> Result<LrAtomization> {
    let ln_pmf = binomial_ln_pmf(ch, n)?;
    let (w0, w1) = binary_ratios(ch);
    let triples = ln_pmf
        .iter()
        .enumerate()
        .map(|(k, &lp)| {
            let l = binary_lr(n, k, w0, w1);
            let p = lp.exp();
            (l, p, l * p)
        })
        .filter(|t| t.1 > 0.0)
        .collect();
    Ok(LrAtomization::from_triples(triples, (0, 1)))
}

pub(crate) fn binary_ratios(ch: &Channel) -> (f64, f64) {
    (ch.w1()[0] / ch.w0()[0], ch.w1()[1] / ch.w0()[1])
}

/// `L_{n,0}(K) = ((n-K) w(0) + K w(1)) / n`
pub(crate) fn binary_lr(n: usize, k: usize, w0: f64, w1: f64) -> f64 {
    ((n - k) as f64 * w0 + k as f64 * w1) / n as f64
}

/// `log P(K = k)` for `K ~ Bin(n, W0(1))`, k = 0..=n.
pub(crate) fn binomial_ln_pmf(ch: &Channel, n: usize) -> Result<Vec<f64>> {
    if ch.d() != 2 {
        return Err(Error::validation(format!(
            "binary-output path needs d = 2, got d = {}",
            ch.d()
        )));
    }
    ch.require_w0_positive("binomial path")?;
    if n == 0 {
        return Err(Error::validation("n must be >= 1"));
    }
    let p = ch.w0()[1];
    let (lp, lq) = (p.ln(), (ch.w0()[0]).ln());
    let out = if n > LOG_SPACE_SWITCHOVER {
        (0..=n)
            .map(|k| ln_choose(n as u64, k as u64) + k as f64 * lp + (n - k) as f64 * lq)
            .collect()
    } else {
        let mut c = 1.0f64;
        (0..=n)
            .map(|k| {
                if k > 0 {
                    c = c * (n - k + 1) as f64 / k as f64;
                }
                c.ln() + k as f64 * lp + (n - k) as f64 * lq
            })
            .collect()
    };
    Ok(out)
}
