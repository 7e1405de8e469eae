//! Numerical constraints on Chern classes of Ulrich bundles and the dimension counts
//! used when building them as extensions.
//!
//! The dimension formulas (`moduli_dim`, `ext1_dim`) are those for the polarization `Δ`
//! and Ulrich line bundles with `D² = 18`.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::intlin::{orthogonal_complement, FinckePohst};
use crate::lattice::{canonical_orbit_form, fano_delta, pairing, DivisorClass};
use crate::ulrich::{enumerate_ulrich_lines, shifted_residues};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ChernData {
    pub rank: u32,
    pub c1: DivisorClass,
    pub c2: i64,
}

/// Slope condition: `c1·H` for an Ulrich bundle of rank `r`.
pub fn required_c1_dot_h(r: u32, h: &DivisorClass) -> i64 {
    3 * r as i64 * h.self_pairing() / 2
}

pub fn c2_of(r: u32, h: &DivisorClass, c1: &DivisorClass) -> i64 {
    c1.self_pairing() / 2 - (h.self_pairing() - 1) * r as i64
}

fn check_inputs(r: u32, h: &DivisorClass) -> Result<i64> {
    if r == 0 {
        return Err(Error::ZeroRank);
    }
    let h2 = h.self_pairing();
    if h2 <= 0 {
        return Err(Error::NonpositiveSquare { square: h2 });
    }
    Ok(h2)
}

/// Largest `-(2c1 - 3rH)²` allowed by the Hodge index bound.
pub fn window_depth(r: u32, h: &DivisorClass) -> i64 {
    let r = r as i64;
    let h2 = h.self_pairing();
    9 * r * r * h2 - 8 * (h2 - 1) * r
}

/// Calls `f` on every `c1` with `c1·H = 3rH²/2` and `c2 ≥ 0`.
fn fold_window<A, I, F, M>(r: u32, h: &DivisorClass, init: I, f: F, merge: M) -> Result<A>
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(&mut A, DivisorClass) + Sync,
    M: Fn(A, A) -> A + Sync + Send,
{
    check_inputs(r, h)?;
    let lat = orthogonal_complement(h)?;
    let m = 3 * r as i64;
    let res = shifted_residues(&lat, h, m)?;
    let fp = FinckePohst::new(&lat)?;
    let shift = m * *h;
    fp.fold(
        0,
        window_depth(r, h),
        Some(&res),
        init,
        |acc, v| {
            let c1 = (lat.class_of(v) + shift)
                .halve()
                .expect("coset vector fails parity");
            f(acc, c1)
        },
        merge,
    )
}

/// Everything the slope equation and the Hodge index bound allow, sorted by `c1`
/// descending. For `r = 1` this still contains classes with `c2 > 0`.
pub fn raw_window(r: u32, h: &DivisorClass) -> Result<Vec<ChernData>> {
    let mut out = fold_window(
        r,
        h,
        Vec::new,
        |acc, c1| acc.push(ChernData { rank: r, c1, c2: c2_of(r, h, &c1) }),
        |mut a, b| {
            a.extend(b);
            a
        },
    )?;
    out.sort_by(|a, b| b.c1.cmp(&a.c1));
    Ok(out)
}

/// Admissible `(c1, c2)` for rank `r` Ulrich bundles. A line bundle has `c2 = 0`,
/// so for `r = 1` only those survive.
pub fn enumerate_admissible_chern(r: u32, h: &DivisorClass) -> Result<Vec<ChernData>> {
    let mut out = raw_window(r, h)?;
    if r == 1 {
        out.retain(|c| c.c2 == 0);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChernOrbit {
    pub rank: u32,
    pub form: DivisorClass,
    pub c2: i64,
    pub dim: i64,
    pub count: u64,
}

/// Admissible classes grouped by sorted coordinates, without listing them.
/// Usable for ranks where the full list does not fit in memory.
pub fn admissible_chern_orbits(r: u32, h: &DivisorClass) -> Result<Vec<ChernOrbit>> {
    let counts = fold_window(
        r,
        h,
        HashMap::<DivisorClass, u64>::new,
        |acc, c1| {
            if r == 1 && c2_of(r, h, &c1) != 0 {
                return;
            }
            *acc.entry(canonical_orbit_form(&c1)).or_default() += 1;
        },
        |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        },
    )?;
    let sorted: BTreeMap<_, _> = counts.into_iter().collect();
    Ok(sorted
        .into_iter()
        .rev()
        .map(|(form, count)| ChernOrbit {
            rank: r,
            form,
            c2: c2_of(r, h, &form),
            dim: moduli_dim(r, &form),
            count,
        })
        .collect())
}

/// Groups an explicit list the same way as [`admissible_chern_orbits`].
pub fn orbits_of(rows: &[ChernData], h: &DivisorClass) -> Vec<ChernOrbit> {
    let mut m: BTreeMap<(u32, DivisorClass), u64> = BTreeMap::new();
    for c in rows {
        *m.entry((c.rank, canonical_orbit_form(&c.c1))).or_default() += 1;
    }
    m.into_iter()
        .rev()
        .map(|((rank, form), count)| ChernOrbit {
            rank,
            form,
            c2: c2_of(rank, h, &form),
            dim: moduli_dim(rank, &form),
            count,
        })
        .collect()
}

pub fn write_chern_csv<W: Write>(rows: &[ChernOrbit], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Internal(e.to_string());
    w.write_record(["r", "c1_orbit_form", "c2", "dim", "count"]).map_err(io)?;
    for row in rows {
        w.write_record([
            row.rank.to_string(),
            row.form.to_string(),
            row.c2.to_string(),
            row.dim.to_string(),
            row.count.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Internal(e.to_string()))?;
    Ok(())
}

pub fn moduli_dim(r: u32, c1: &DivisorClass) -> i64 {
    let r = r as i64;
    c1.self_pairing() - 19 * r * r + 1
}

/// `ext¹(F, O(D)) = c1(F)·D - 19 rk(F)`, valid when `F` and `O(D)` are stable,
/// non-isomorphic, of equal slope and `O(D) ≇ F(K)`. None of this is checked.
pub fn ext1_dim(rank_f: u32, c1_f: &DivisorClass, d: &DivisorClass) -> i64 {
    pairing(c1_f, d) - 19 * rank_f as i64
}

fn ceil_div(a: i64, b: i64) -> i64 {
    -((-a).div_euclid(b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InductionReport {
    pub rank: u32,
    pub slope_ok: bool,
    pub c1_dot_d: i64,
    pub ext1: i64,
    /// `⌈c1(F)²/(2 rk F) + D² rk F/2⌉`, from `(c1(F) - rk F·D)² ≤ 0`.
    pub hodge_bound: i64,
    pub hodge_bound_holds: bool,
    /// The same with coefficient `D²` instead of `D²/2`. Not implied by Hodge index.
    pub unhalved_hodge_bound: i64,
    pub unhalved_hodge_bound_holds: bool,
    pub ext_locus_dim: i64,
    pub modular_dim: i64,
    pub strict: bool,
}

/// Dimension count for bundles `E` in `0 → O(D) → E → F → 0`, `rk E = rk F + 1`.
pub fn induction_step_report(
    rank_f: u32,
    c1_f: &DivisorClass,
    d: &DivisorClass,
    h: &DivisorClass,
) -> InductionReport {
    let rf = rank_f as i64;
    let r = rf + 1;
    let c1f2 = c1_f.self_pairing();
    let d2 = d.self_pairing();
    let c1_dot_d = pairing(c1_f, d);
    let slope_ok = pairing(c1_f, h) == rf * pairing(d, h);
    let hodge_bound = ceil_div(c1f2 + d2 * rf * rf, 2 * rf);
    let unhalved_hodge_bound = ceil_div(c1f2 + 2 * d2 * rf * rf, 2 * rf);
    let ext_locus_dim = c1f2 + c1_dot_d - 19 * r * r + 19 * r;
    let modular_dim = moduli_dim(r as u32, &(*c1_f + *d));
    InductionReport {
        rank: r as u32,
        slope_ok,
        c1_dot_d,
        ext1: ext1_dim(rank_f, c1_f, d),
        hodge_bound,
        hodge_bound_holds: c1_dot_d >= hodge_bound,
        unhalved_hodge_bound,
        unhalved_hodge_bound_holds: c1_dot_d >= unhalved_hodge_bound,
        ext_locus_dim,
        modular_dim,
        strict: modular_dim > ext_locus_dim,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WildFamily {
    pub rank: u32,
    pub k: u32,
    pub epsilon: u32,
    pub c1: DivisorClass,
    pub dim: i64,
}

/// `c1 = 3kΔ + ε(E7+E8+E9+2E10)` for `r = 2k + ε`, with the dimension of its moduli.
pub fn wild_family(r: u32) -> Result<WildFamily> {
    if r == 0 {
        return Err(Error::ZeroRank);
    }
    let (k, eps) = (r / 2, r % 2);
    let tail = DivisorClass::e(7) + DivisorClass::e(8) + DivisorClass::e(9) + 2 * DivisorClass::e(10);
    let c1 = (3 * k as i64) * fano_delta() + eps as i64 * tail;
    let (ki, ei) = (k as i64, eps as i64);
    let dim = 14 * ki * ki + 14 * ki * ei - ei * ei + 1;
    if dim != moduli_dim(r, &c1) {
        return Err(Error::Internal(format!("dimension mismatch for rank {r}")));
    }
    Ok(WildFamily { rank: r, k, epsilon: eps, c1, dim })
}

/// Writes `c1` as a sum of at most `max_parts` Ulrich line classes for `H`, if possible.
///
/// Parts are drawn in the order of [`enumerate_ulrich_lines`] and returned in that order.
pub fn decompose_into_ulrich_semigroup(
    c1: &DivisorClass,
    h: &DivisorClass,
    max_parts: usize,
) -> Result<Option<Vec<DivisorClass>>> {
    let h2 = check_inputs(1, h)?;
    let slope = required_c1_dot_h(1, h);
    let total = pairing(c1, h);
    if total <= 0 || total % slope != 0 {
        return Ok(None);
    }
    let parts = (total / slope) as usize;
    if parts > max_parts {
        return Ok(None);
    }
    let cands: Vec<DivisorClass> = enumerate_ulrich_lines(h)?.into_iter().map(|s| s.d).collect();
    let index: HashMap<DivisorClass, usize> = cands.iter().enumerate().map(|(i, d)| (*d, i)).collect();
    let shell = 8 + h2;
    // 2R - 3mH is a sum of m vectors of norm -shell in H^⊥
    let feasible = |rest: &DivisorClass, m: i64| {
        let g = 2 * *rest - (3 * m) * *h;
        -(g.self_pairing() as i128) <= (m * m) as i128 * shell as i128
    };
    fn go(
        rest: DivisorClass,
        m: usize,
        start: usize,
        cands: &[DivisorClass],
        index: &HashMap<DivisorClass, usize>,
        feasible: &dyn Fn(&DivisorClass, i64) -> bool,
        out: &mut Vec<DivisorClass>,
    ) -> bool {
        if m == 1 {
            if index.get(&rest).is_some_and(|&i| i >= start) {
                out.push(rest);
                return true;
            }
            return false;
        }
        if !feasible(&rest, m as i64) {
            return false;
        }
        for i in start..cands.len() {
            let next = rest - cands[i];
            if !feasible(&next, m as i64 - 1) {
                continue;
            }
            out.push(cands[i]);
            if go(next, m - 1, i, cands, index, feasible, out) {
                return true;
            }
            out.pop();
        }
        false
    }
    let mut out = Vec::new();
    Ok(go(*c1, parts, 0, &cands, &index, &feasible, &mut out).then_some(out))
}
