//! Enumeration of lattice vectors of prescribed norm.
//!
//! [`FinckePohst`] handles negative definite Gram matrices. It factors `A = -gram`
//! as `Uᵀ D U` over ℚ (`U` unit upper triangular) so that
//!
//! ```text
//! vᵀ A v = Σ_i d_i (v_i + Σ_{j>i} u_ij v_j)²
//! ```
//!
//! and recurses from the last coordinate down, bounding each coordinate by the
//! remaining budget. All factors are cleared into integers once at construction:
//! with `L_i` the common denominator of row `i` of `U` and `M` the common
//! denominator of every `d_i / L_i²`, the scaled norm
//! `M·vᵀAv = Σ_i w_i (L_i v_i + s_i)²` has integer weights `w_i` and integer
//! centres `s_i`, so the inner loop never touches a fraction.
//!
//! [`box_search`] is the exhaustive fallback for indefinite or degenerate forms.

use std::io::Write;
use std::ops::ControlFlow;

use num_integer::Integer;
use rayon::prelude::*;

use super::gram::{Definiteness, GramLattice, NormTarget};
use super::matrix::Rational;
use crate::error::{Error, Result};

/// Scaled budgets must stay below this so that squares and sums fit in `i128`.
const SCALED_LIMIT: i128 = 1 << 100;

fn isqrt(n: i128) -> i128 {
    debug_assert!(n >= 0);
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as i128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

fn div_ceil(a: i128, b: i128) -> i128 {
    -((-a).div_euclid(b))
}

/// First value `>= lo` congruent to `r` modulo 2.
fn align_parity(lo: i128, r: u8) -> i128 {
    if lo.rem_euclid(2) == r as i128 {
        lo
    } else {
        lo + 1
    }
}

/// Parity constraint per coordinate: `v_i ≡ residues[i] (mod 2)`.
pub type Residues<'a> = Option<&'a [u8]>;

#[derive(Debug, Clone)]
pub struct FinckePohst {
    rank: usize,
    /// `coef[i][j] = L_i u_ij` for `j > i`.
    coef: Vec<Vec<i128>>,
    scale: Vec<i128>,
    weight: Vec<i128>,
    denom: i128,
    /// `(A^{-1})_ii` exactly, for coordinate bounds.
    inverse_diag: Vec<Rational>,
}

fn checked_lcm(a: i128, b: i128) -> Result<i128> {
    let g = a.gcd(&b);
    (a / g).checked_mul(b).ok_or(Error::Overflow {
        value: i128::MAX,
        limit: SCALED_LIMIT,
    })
}

impl FinckePohst {
    pub fn new(lat: &GramLattice) -> Result<Self> {
        if lat.definiteness() != Definiteness::NegativeDefinite {
            return Err(Error::NotDefinite(format!("{:?}", lat.definiteness())));
        }
        let k = lat.rank();
        let a: Vec<Vec<Rational>> = lat
            .gram()
            .iter()
            .map(|r| r.iter().map(|&x| Rational::from_integer(-(x as i128))).collect())
            .collect();
        let zero = Rational::from_integer(0);
        let mut d = vec![zero; k];
        let mut u = vec![vec![zero; k]; k];
        for i in 0..k {
            u[i][i] = Rational::from_integer(1);
            let mut di = a[i][i];
            for l in 0..i {
                di -= d[l] * u[l][i] * u[l][i];
            }
            if di <= zero {
                return Err(Error::Internal(format!("non-positive pivot {di} in LDLᵀ")));
            }
            d[i] = di;
            for j in i + 1..k {
                let mut x = a[i][j];
                for l in 0..i {
                    x -= d[l] * u[l][i] * u[l][j];
                }
                u[i][j] = x / di;
            }
        }

        let mut scale = vec![1i128; k];
        for i in 0..k {
            for j in i + 1..k {
                scale[i] = checked_lcm(scale[i], *u[i][j].denom())?;
            }
        }
        let ratios: Vec<Rational> = (0..k)
            .map(|i| d[i] / Rational::from_integer(scale[i] * scale[i]))
            .collect();
        let mut denom = 1i128;
        for r in &ratios {
            denom = checked_lcm(denom, *r.denom())?;
        }
        if denom > SCALED_LIMIT >> 20 {
            return Err(Error::Overflow { value: denom, limit: SCALED_LIMIT >> 20 });
        }
        let weight: Vec<i128> = ratios
            .iter()
            .map(|r| (*r * Rational::from_integer(denom)).to_integer())
            .collect();
        let coef: Vec<Vec<i128>> = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| {
                        if j > i {
                            (u[i][j] * Rational::from_integer(scale[i])).to_integer()
                        } else {
                            0
                        }
                    })
                    .collect()
            })
            .collect();

        // A^{-1} = U^{-1} D^{-1} U^{-T}
        let mut uinv = vec![vec![zero; k]; k];
        for i in (0..k).rev() {
            uinv[i][i] = Rational::from_integer(1);
            for j in i + 1..k {
                let mut s = zero;
                for l in i + 1..=j {
                    s += u[i][l] * uinv[l][j];
                }
                uinv[i][j] = -s;
            }
        }
        let inverse_diag = (0..k)
            .map(|i| (i..k).fold(zero, |acc, l| acc + uinv[i][l] * uinv[i][l] / d[l]))
            .collect();

        Ok(FinckePohst { rank: k, coef, scale, weight, denom, inverse_diag })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    fn scaled(&self, m: i64) -> Result<i128> {
        let v = (m as i128).checked_mul(self.denom).filter(|v| v.abs() < SCALED_LIMIT);
        v.ok_or(Error::Overflow { value: m as i128, limit: SCALED_LIMIT / self.denom })
    }

    /// Largest `|v_i|` over all `v` with `vᵀ A v <= m`: `floor(sqrt(m · (A^{-1})_ii))`.
    pub fn coordinate_bounds(&self, m: i64) -> Vec<i64> {
        self.inverse_diag
            .iter()
            .map(|r| {
                let x = *r * Rational::from_integer(m.max(0) as i128);
                let p = *x.numer();
                let q = *x.denom();
                (isqrt(p * q) / q) as i64
            })
            .collect()
    }

    fn centre(&self, level: usize, v: &[i64]) -> i128 {
        let row = &self.coef[level];
        (level + 1..self.rank).map(|j| row[j] * v[j] as i128).sum()
    }

    fn range(&self, level: usize, s: i128, budget: i128) -> (i128, i128) {
        let r = isqrt(budget / self.weight[level]);
        let l = self.scale[level];
        (div_ceil(-r - s, l), (r - s).div_euclid(l))
    }

    /// Walks every `v` with `lo <= vᵀAv <= hi` (in scaled units) whose coordinates
    /// at levels `<= level` are still free.
    fn walk<F>(
        &self,
        level: usize,
        v: &mut Vec<i64>,
        used: i128,
        lo: i128,
        hi: i128,
        residues: Residues,
        visit: &mut F,
    ) -> ControlFlow<()>
    where
        F: FnMut(&[i64]) -> ControlFlow<()>,
    {
        let budget = hi - used;
        if budget < 0 {
            return ControlFlow::Continue(());
        }
        let s = self.centre(level, v);
        let l = self.scale[level];
        let w = self.weight[level];
        if level == 0 && lo == hi {
            if budget % w != 0 {
                return ControlFlow::Continue(());
            }
            let x2 = budget / w;
            let x = isqrt(x2);
            if x * x != x2 {
                return ControlFlow::Continue(());
            }
            let roots: &[i128] = if x == 0 { &[0] } else { &[-x, x] };
            let mut cands: Vec<i128> = roots
                .iter()
                .filter(|&&xc| (xc - s).rem_euclid(l) == 0)
                .map(|&xc| (xc - s) / l)
                .filter(|c| residues.map_or(true, |r| c.rem_euclid(2) == r[0] as i128))
                .collect();
            cands.sort_unstable();
            for c in cands {
                v[0] = c as i64;
                visit(v)?;
            }
            return ControlFlow::Continue(());
        }
        let (mut a, b) = self.range(level, s, budget);
        let step = match residues {
            Some(r) => {
                a = align_parity(a, r[level]);
                2
            }
            None => 1,
        };
        let mut c = a;
        while c <= b {
            let x = l * c + s;
            let total = used + w * x * x;
            v[level] = c as i64;
            if level == 0 {
                if total >= lo {
                    visit(v)?;
                }
            } else {
                self.walk(level - 1, v, total, lo, hi, residues, visit)?;
            }
            c += step;
        }
        v[level] = 0;
        ControlFlow::Continue(())
    }

    fn top_values(&self, hi: i128, residues: Residues) -> Vec<i64> {
        let top = self.rank - 1;
        let (mut a, b) = self.range(top, 0, hi);
        let mut step = 1;
        if let Some(r) = residues {
            a = align_parity(a, r[top]);
            step = 2;
        }
        let mut out = Vec::new();
        let mut c = a;
        while c <= b {
            out.push(c as i64);
            c += step;
        }
        out
    }

    fn check_window(&self, lo: i64, hi: i64, residues: Residues) -> Result<(i128, i128)> {
        if let Some(r) = residues {
            assert_eq!(r.len(), self.rank, "residue vector has wrong length");
        }
        if lo > hi {
            return Err(Error::Internal(format!("empty norm window [{lo}, {hi}]")));
        }
        if lo < 0 {
            return Err(Error::TargetPositive { n: -lo });
        }
        Ok((self.scaled(lo)?, self.scaled(hi)?))
    }

    /// All `v` with `lo <= vᵀAv <= hi` (positive units, `A = -gram`), optionally in a parity
    /// class, sorted lexicographically. The outermost coordinate is split across the
    /// current rayon pool; the merge is order-preserving and the output is re-sorted.
    pub fn collect(&self, lo: i64, hi: i64, residues: Residues) -> Result<Vec<Vec<i64>>> {
        let (lo_s, hi_s) = self.check_window(lo, hi, residues)?;
        if self.rank == 0 {
            return Ok(if lo <= 0 { vec![vec![]] } else { vec![] });
        }
        let top = self.rank - 1;
        let chunks: Vec<Vec<Vec<i64>>> = self
            .top_values(hi_s, residues)
            .into_par_iter()
            .map(|c| {
                let mut out = Vec::new();
                let mut v = vec![0i64; self.rank];
                v[top] = c;
                let x = self.scale[top] * c as i128;
                let used = self.weight[top] * x * x;
                let mut push = |w: &[i64]| {
                    out.push(w.to_vec());
                    ControlFlow::Continue(())
                };
                if top == 0 {
                    if used >= lo_s && used <= hi_s {
                        let _ = push(&v[..]);
                    }
                } else {
                    let _ = self.walk(top - 1, &mut v, used, lo_s, hi_s, residues, &mut push);
                }
                out
            })
            .collect();
        let mut all: Vec<Vec<i64>> = chunks.into_iter().flatten().collect();
        all.sort_unstable();
        Ok(all)
    }

    /// Folds over the same vectors as [`FinckePohst::collect`] without storing them.
    /// Visiting order is unspecified, so `merge` should be commutative.
    pub fn fold<A, I, F, M>(
        &self,
        lo: i64,
        hi: i64,
        residues: Residues,
        init: I,
        f: F,
        merge: M,
    ) -> Result<A>
    where
        A: Send,
        I: Fn() -> A + Sync + Send,
        F: Fn(&mut A, &[i64]) + Sync,
        M: Fn(A, A) -> A + Sync + Send,
    {
        let (lo_s, hi_s) = self.check_window(lo, hi, residues)?;
        if self.rank == 0 {
            let mut acc = init();
            if lo <= 0 {
                f(&mut acc, &[]);
            }
            return Ok(acc);
        }
        let top = self.rank - 1;
        let acc = self
            .top_values(hi_s, residues)
            .into_par_iter()
            .map(|c| {
                let mut acc = init();
                let mut v = vec![0i64; self.rank];
                v[top] = c;
                let x = self.scale[top] * c as i128;
                let used = self.weight[top] * x * x;
                if top == 0 {
                    if used >= lo_s && used <= hi_s {
                        f(&mut acc, &v);
                    }
                } else {
                    let _ = self.walk(top - 1, &mut v, used, lo_s, hi_s, residues, &mut |w| {
                        f(&mut acc, w);
                        ControlFlow::Continue(())
                    });
                }
                acc
            })
            .reduce(&init, &merge);
        Ok(acc)
    }

    /// The first `v` (in outermost-coordinate order) with `vᵀAv = m` satisfying `accept`.
    pub fn find_first<P>(&self, m: i64, residues: Residues, accept: P) -> Result<Option<Vec<i64>>>
    where
        P: Fn(&[i64]) -> bool + Sync,
    {
        let (lo_s, hi_s) = self.check_window(m, m, residues)?;
        if self.rank == 0 {
            return Ok((m == 0 && accept(&[])).then(Vec::new));
        }
        let top = self.rank - 1;
        let found = self
            .top_values(hi_s, residues)
            .into_par_iter()
            .find_map_first(|c| {
                let mut v = vec![0i64; self.rank];
                v[top] = c;
                let x = self.scale[top] * c as i128;
                let used = self.weight[top] * x * x;
                if top == 0 {
                    return (used == lo_s && accept(&v)).then(|| v.clone());
                }
                let mut hit = None;
                let _ = self.walk(top - 1, &mut v, used, lo_s, hi_s, residues, &mut |w| {
                    if accept(w) {
                        hit = Some(w.to_vec());
                        ControlFlow::Break(())
                    } else {
                        ControlFlow::Continue(())
                    }
                });
                hit
            });
        Ok(found)
    }
}

/// All integer coordinate vectors `v` with `vᵀ·gram·v = n` in a negative definite lattice.
pub fn vectors_of_norm(lat: &GramLattice, target: NormTarget) -> Result<Vec<Vec<i64>>> {
    vectors_of_norm_in_coset(lat, target, None)
}

/// As [`vectors_of_norm`], restricted to `v ≡ residues (mod 2)`.
pub fn vectors_of_norm_in_coset(
    lat: &GramLattice,
    target: NormTarget,
    residues: Residues,
) -> Result<Vec<Vec<i64>>> {
    if lat.definiteness() != Definiteness::NegativeDefinite {
        return Err(Error::NotDefinite(format!("{:?}", lat.definiteness())));
    }
    if target.0 > 0 {
        return Err(Error::TargetPositive { n: target.0 });
    }
    let fp = FinckePohst::new(lat)?;
    fp.collect(-target.0, -target.0, residues)
}

/// Exhaustive search of `[-bound, bound]^k` for `vᵀ·gram·v = n`. Works for any Gram matrix.
pub fn box_search(lat: &GramLattice, target: NormTarget, bound: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let _ = walk_box(lat, target.0, bound, None, &mut |v| {
        out.push(v.to_vec());
        ControlFlow::Continue(())
    });
    out.sort_unstable();
    out
}

/// First solution of [`box_search`] within a parity class, in walk order.
pub fn box_search_first(
    lat: &GramLattice,
    target: NormTarget,
    bound: i64,
    residues: Residues,
) -> Option<Vec<i64>> {
    let mut hit = None;
    let _ = walk_box(lat, target.0, bound, residues, &mut |v| {
        hit = Some(v.to_vec());
        ControlFlow::Break(())
    });
    hit
}

/// Box walk over coordinates `0..k-1`, solving the last coordinate from the quadratic.
fn walk_box<F>(lat: &GramLattice, n: i64, bound: i64, residues: Residues, visit: &mut F) -> ControlFlow<()>
where
    F: FnMut(&[i64]) -> ControlFlow<()>,
{
    let k = lat.rank();
    if bound < 0 {
        return ControlFlow::Continue(());
    }
    if k == 0 {
        return if n == 0 { visit(&[]) } else { ControlFlow::Continue(()) };
    }
    let g: Vec<Vec<i128>> = lat
        .gram()
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let mut v = vec![0i64; k];
    let mut rows = vec![0i128; k];
    box_level(&g, 0, &mut v, &mut rows, 0, n as i128, bound as i128, residues, visit)
}

#[allow(clippy::too_many_arguments)]
fn box_level<F>(
    g: &[Vec<i128>],
    level: usize,
    v: &mut [i64],
    rows: &mut [i128],
    partial: i128,
    n: i128,
    bound: i128,
    residues: Residues,
    visit: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(&[i64]) -> ControlFlow<()>,
{
    let k = v.len();
    let (start, step) = match residues {
        Some(r) => (align_parity(-bound, r[level]), 2),
        None => (-bound, 1),
    };
    if level == k - 1 {
        // g x² + 2 b x + partial = n
        let a = g[level][level];
        let b = rows[level];
        let c = partial - n;
        let ok = |x: i128| {
            x >= -bound && x <= bound && residues.map_or(true, |r| x.rem_euclid(2) == r[level] as i128)
        };
        let mut sols: Vec<i128> = Vec::new();
        if a == 0 {
            if b == 0 {
                if c == 0 {
                    let mut x = start;
                    while x <= bound {
                        sols.push(x);
                        x += step;
                    }
                }
            } else if (-c).rem_euclid(2 * b) == 0 {
                sols.push(-c / (2 * b));
            }
        } else {
            let disc = b * b - a * c;
            if disc >= 0 {
                let r = isqrt(disc);
                if r * r == disc {
                    for num in [-b - r, -b + r] {
                        if num.rem_euclid(a) == 0 {
                            sols.push(num / a);
                        }
                    }
                }
            }
            sols.sort_unstable();
            sols.dedup();
        }
        for x in sols.into_iter().filter(|&x| ok(x)) {
            v[level] = x as i64;
            visit(v)?;
        }
        v[level] = 0;
        return ControlFlow::Continue(());
    }
    let mut x = start;
    while x <= bound {
        v[level] = x as i64;
        let p = partial + x * (2 * rows[level] + g[level][level] * x);
        for j in 0..k {
            rows[j] += g[j][level] * x;
        }
        let flow = box_level(g, level + 1, v, rows, p, n, bound, residues, visit);
        for j in 0..k {
            rows[j] -= g[j][level] * x;
        }
        flow?;
        x += step;
    }
    v[level] = 0;
    ControlFlow::Continue(())
}

/// Writes one CSV row per vector: coordinates `c0..c{k-1}` then `norm`.
pub fn write_vectors_csv<W: Write>(lat: &GramLattice, vectors: &[Vec<i64>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Internal(format!("csv: {e}"));
    let mut header: Vec<String> = (0..lat.rank()).map(|i| format!("c{i}")).collect();
    header.push("norm".into());
    w.write_record(&header).map_err(io)?;
    for v in vectors {
        let mut rec: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        rec.push(lat.norm(v).to_string());
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Internal(format!("csv: {e}")))?;
    Ok(())
}
