//! Iterated extensions of Ulrich line bundles for `H = Δ`.

use serde::Serialize;

use enriq_core::chern::{ext1_dim, induction_step_report, moduli_dim, InductionReport};
use enriq_core::ulrich::{enumerate_ulrich_lines, is_ulrich_line};
use enriq_core::{fano_delta, DivisorClass, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainStep {
    pub rank: u32,
    pub d: DivisorClass,
    pub c1: DivisorClass,
    pub c1_square: i64,
    /// `c1² ≥ 19 rk² - 1` for the running class.
    pub hypothesis_ok: bool,
    /// Absent for the first line bundle.
    pub induction: Option<InductionReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainReport {
    pub rank: u32,
    pub steps: Vec<ChainStep>,
    pub c1: DivisorClass,
    pub moduli_dim: i64,
    pub hypothesis_ok: bool,
}

fn hypothesis(rank: u32, c1: &DivisorClass) -> bool {
    let r = rank as i64;
    c1.self_pairing() >= 19 * r * r - 1
}

/// Builds `0 → O(D⁽ᵏ⁾) → E_k → E_{k-1} → 0` for `k = 2..r`.
///
/// `partners` fixes the first classes of the chain; the rest are chosen greedily, taking
/// the first Ulrich line class in canonical order with `ext¹ > 0`.
pub fn build_stable_chain(r: u32, partners: &[DivisorClass]) -> Result<ChainReport> {
    if r == 0 {
        return Err(Error::ZeroRank);
    }
    let delta = fano_delta();
    if let Some(d) = partners.iter().find(|d| !is_ulrich_line(d, &delta)) {
        return Err(Error::NotUlrich { class: d.to_string() });
    }
    let lines: Vec<DivisorClass> = enumerate_ulrich_lines(&delta)?.into_iter().map(|s| s.d).collect();
    let first = match partners.first() {
        Some(d) => *d,
        None => lines[0],
    };
    let mut c1 = first;
    let mut steps = vec![ChainStep {
        rank: 1,
        d: first,
        c1,
        c1_square: c1.self_pairing(),
        hypothesis_ok: hypothesis(1, &c1),
        induction: None,
    }];
    for rank in 1..r {
        let d = match partners.get(rank as usize) {
            Some(d) => *d,
            None => *lines
                .iter()
                .find(|d| ext1_dim(rank, &c1, d) > 0)
                .ok_or_else(|| Error::ChainStuck { rank, c1: c1.to_string() })?,
        };
        let report = induction_step_report(rank, &c1, &d, &delta);
        if report.ext1 <= 0 {
            return Err(Error::ChainStuck { rank, c1: c1.to_string() });
        }
        c1 += d;
        steps.push(ChainStep {
            rank: rank + 1,
            d,
            c1,
            c1_square: c1.self_pairing(),
            hypothesis_ok: hypothesis(rank + 1, &c1),
            induction: Some(report),
        });
    }
    let hypothesis_ok = steps.iter().all(|s| s.hypothesis_ok);
    Ok(ChainReport { rank: r, steps, c1, moduli_dim: moduli_dim(r, &c1), hypothesis_ok })
}
