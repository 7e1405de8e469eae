//! Acyclicity checks for the cotangent bundle twists and the combinatorics used to
//! exclude destabilizing line subbundles.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{fano_delta, pairing, DivisorClass, RANK};

/// Integral class `Σ a_i E_i` with `Σ a_i = 0`, i.e. orthogonal to `Δ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ZeroSumIntClass {
    a: [i64; RANK],
}

impl ZeroSumIntClass {
    pub fn new(a: [i64; RANK]) -> Result<Self> {
        let sum: i64 = a.iter().sum();
        if sum != 0 {
            return Err(Error::NonzeroSum { sum });
        }
        Ok(ZeroSumIntClass { a })
    }

    pub fn coefficients(&self) -> &[i64; RANK] {
        &self.a
    }

    pub fn class(&self) -> DivisorClass {
        DivisorClass::from_coefficients(self.a)
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|&x| x == 0)
    }

    fn norm(&self) -> i64 {
        self.a.iter().map(|x| x * x).sum()
    }

    pub fn zero_count(&self) -> usize {
        self.a.iter().filter(|&&x| x == 0).count()
    }

    /// Indices `t` (1-based) with `(2E_t - D)² ≥ 0`.
    pub fn bad_set(&self) -> Vec<usize> {
        let n = self.norm();
        (0..RANK).filter(|&i| 4 * self.a[i] >= n).map(|i| i + 1).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CotangentEntry {
    pub label: String,
    pub class: DivisorClass,
    pub square: i64,
    pub mirror_square: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CotangentReport {
    pub entries: Vec<CotangentEntry>,
    pub all_minus_two: bool,
}

/// Squares of `Δ-2E1`, `Δ-2E2`, `Δ-2E3`, `Δ-2E1-2E2-2E3` and their negatives.
pub fn verify_cotangent_ulrich_classes() -> CotangentReport {
    let delta = fano_delta();
    let e = DivisorClass::e;
    let cases = [
        ("Delta-2E1", delta - 2 * e(1)),
        ("Delta-2E2", delta - 2 * e(2)),
        ("Delta-2E3", delta - 2 * e(3)),
        ("Delta-2E1-2E2-2E3", delta - 2 * (e(1) + e(2) + e(3))),
    ];
    let entries: Vec<CotangentEntry> = cases
        .iter()
        .map(|(label, c)| CotangentEntry {
            label: label.to_string(),
            class: *c,
            square: c.self_pairing(),
            mirror_square: (-*c).self_pairing(),
        })
        .collect();
    let all_minus_two = entries.iter().all(|x| x.square == -2 && x.mirror_square == -2);
    CotangentReport { entries, all_minus_two }
}

/// `(2E_t - D)² = 4a_t - Σ a_i²`, `t` 1-based.
pub fn square_2et_minus_d(d: &ZeroSumIntClass, t: usize) -> i64 {
    assert!((1..=RANK).contains(&t), "index {t} out of range");
    4 * d.a[t - 1] - d.norm()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Witness {
    /// Three indices with `a_t = 0`, hence `(2E_t - D)² < 0`.
    Triple([usize; 3]),
    /// No triple: the indices of the nonzero coefficients.
    Certificate(Vec<usize>),
}

pub fn witness_triple(d: &ZeroSumIntClass) -> Result<Witness> {
    if d.is_zero() {
        return Err(Error::ZeroClass);
    }
    let zeros: Vec<usize> = (0..RANK).filter(|&i| d.a[i] == 0).map(|i| i + 1).collect();
    if zeros.len() >= 3 {
        Ok(Witness::Triple([zeros[0], zeros[1], zeros[2]]))
    } else {
        Ok(Witness::Certificate((0..RANK).filter(|&i| d.a[i] != 0).map(|i| i + 1).collect()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    /// Nonempty bad set with more than five nonzero coefficients.
    TooManyNonzero,
    /// A bad index with `a_t ≤ 0`.
    NonpositiveBadIndex,
    /// Nonempty bad set and fewer than three zero coefficients.
    NoTriple,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub a: [i64; RANK],
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanReport {
    pub bound: i64,
    /// Nonzero zero-sum vectors visited.
    pub checked: u64,
    pub with_bad_set: u64,
    pub violations: Vec<Violation>,
    /// Vectors with fewer than three zeros and empty bad set. Harmless.
    pub few_zeros_empty_bad_set: u64,
    pub few_zeros_nonempty_bad_set: u64,
    pub elapsed_ms: u128,
}

#[derive(Default)]
struct Tally {
    checked: u64,
    with_bad: u64,
    few_empty: u64,
    few_bad: u64,
    violations: Vec<Violation>,
}

impl Tally {
    fn visit(&mut self, a: &[i64; RANK]) {
        let n: i64 = a.iter().map(|x| x * x).sum();
        if n == 0 {
            return;
        }
        self.checked += 1;
        let zeros = a.iter().filter(|&&x| x == 0).count();
        let mut bad = false;
        let mut nonpositive = false;
        for &x in a {
            if 4 * x >= n {
                bad = true;
                if x < 1 {
                    nonpositive = true;
                }
            }
        }
        if zeros < 3 {
            if bad {
                self.few_bad += 1;
            } else {
                self.few_empty += 1;
            }
        }
        if !bad {
            return;
        }
        self.with_bad += 1;
        let mut flag = |kind| self.violations.push(Violation { a: *a, kind });
        if RANK - zeros > 5 {
            flag(ViolationKind::TooManyNonzero);
        }
        if nonpositive {
            flag(ViolationKind::NonpositiveBadIndex);
        }
        if zeros < 3 {
            flag(ViolationKind::NoTriple);
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.checked += other.checked;
        self.with_bad += other.with_bad;
        self.few_empty += other.few_empty;
        self.few_bad += other.few_bad;
        self.violations.extend(other.violations);
        self
    }
}

fn scan_rest(a: &mut [i64; RANK], level: usize, sum: i64, bound: i64, tally: &mut Tally) {
    let left = (RANK - 1 - level) as i64;
    if level == RANK - 1 {
        let last = -sum;
        if last.abs() <= bound {
            a[level] = last;
            tally.visit(a);
        }
        return;
    }
    for x in -bound..=bound {
        let s = sum + x;
        // the remaining coordinates can absorb at most left * bound
        if s.abs() > left * bound {
            continue;
        }
        a[level] = x;
        scan_rest(a, level + 1, s, bound, tally);
    }
}

/// Every nonzero `a ∈ [-B, B]^10` with `Σ a_i = 0`, checking the structure of the bad set
/// `{t : (2E_t - D)² ≥ 0}`.
pub fn stability_scan(bound: i64) -> ScanReport {
    let start = Instant::now();
    let b = bound.max(0);
    let parts: Vec<Tally> = (-b..=b)
        .into_par_iter()
        .map(|x| {
            let mut t = Tally::default();
            let mut a = [0i64; RANK];
            a[0] = x;
            scan_rest(&mut a, 1, x, b, &mut t);
            t
        })
        .collect();
    let tally = parts.into_iter().fold(Tally::default(), Tally::merge);
    ScanReport {
        bound,
        checked: tally.checked,
        with_bad_set: tally.with_bad,
        violations: tally.violations,
        few_zeros_empty_bad_set: tally.few_empty,
        few_zeros_nonempty_bad_set: tally.few_bad,
        elapsed_ms: start.elapsed().as_millis(),
    }
}

/// `D·Δ` for a zero-sum class; always zero.
pub fn delta_degree(d: &ZeroSumIntClass) -> i64 {
    pairing(&d.class(), &fano_delta())
}
