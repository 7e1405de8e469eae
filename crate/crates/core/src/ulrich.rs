//! Ulrich line bundles: `D` is Ulrich for `H` iff `(D-H)² = (D-2H)² = -2`.

use std::collections::BTreeMap;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::intlin::{
    box_search_first, class_with_pairing, orthogonal_complement, parity_residues,
    vectors_of_norm, vectors_of_norm_in_coset, FinckePohst, GramLattice, NormTarget,
};
use crate::lattice::{canonical_orbit_form, fano_delta, pairing, DivisorClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UlrichSolution {
    pub d: DivisorClass,
    pub d1: DivisorClass,
    pub d2: DivisorClass,
    pub h: DivisorClass,
}

impl UlrichSolution {
    /// Solution attached to `F ∈ H^⊥`, when `(F+H)/2` is integral.
    pub fn from_complement_vector(f: &DivisorClass, h: &DivisorClass) -> Option<Self> {
        let d1 = (*f + *h).halve()?;
        let d2 = d1 - *h;
        Some(UlrichSolution { d: d1 + *h, d1, d2, h: *h })
    }
}

impl Serialize for UlrichSolution {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("UlrichSolution", 3)?;
        st.serialize_field("D", &self.d)?;
        st.serialize_field("D1", &self.d1)?;
        st.serialize_field("D2", &self.d2)?;
        st.end()
    }
}

/// Non-increasing `(c1, c2, c3, c4)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FourSquares {
    pub c: [i64; 4],
}

impl FourSquares {
    pub fn sum_of_squares(&self) -> i64 {
        self.c.iter().map(|x| x * x).sum()
    }
}

fn isqrt(n: i64) -> i64 {
    let mut r = (n as f64).sqrt() as i64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Lexicographically greatest non-increasing `c` with `Σ c_i² = n`.
pub fn four_squares(n: i64) -> Result<FourSquares> {
    if n < 0 {
        return Err(Error::NegativeInput { n });
    }
    fn go(rest: i64, slot: usize, cap: i64, c: &mut [i64; 4]) -> bool {
        if slot == 4 {
            return rest == 0;
        }
        let left = (4 - slot) as i64;
        let mut x = cap.min(isqrt(rest));
        while x >= 0 {
            // the remaining slots hold at most x² each
            if left * x * x < rest {
                return false;
            }
            c[slot] = x;
            if go(rest - x * x, slot + 1, x, c) {
                return true;
            }
            x -= 1;
        }
        false
    }
    let mut c = [0; 4];
    if go(n, 0, i64::MAX, &mut c) {
        Ok(FourSquares { c })
    } else {
        Err(Error::Internal(format!("no four-square representation of {n}")))
    }
}

/// `Σ c_i (E_{2i-1} - E_{2i})`.
fn difference_block(c: &FourSquares) -> DivisorClass {
    c.c.iter()
        .enumerate()
        .map(|(i, &ci)| ci * (DivisorClass::e(2 * i + 1) - DivisorClass::e(2 * i + 2)))
        .sum()
}

/// A pair of (−2)-classes with `D1 - D2 = kΔ`.
pub fn construct_ulrich_pair(k: i64) -> Result<(DivisorClass, DivisorClass)> {
    let delta = fano_delta();
    let (d1, d2) = if k < 0 {
        let (a, b) = construct_ulrich_pair(-k)?;
        (b, a)
    } else if k == 0 {
        let x = DivisorClass::e(1) - DivisorClass::e(2);
        (x, x)
    } else if k == 1 {
        let d1 = DivisorClass::from_tripled([5, 2, 2, 2, -1, -1, -1, -1, -1, -1])?;
        let d2 = DivisorClass::from_tripled([4, 1, 1, 1, -2, -2, -2, -2, -2, -2])?;
        (d1, d2)
    } else if k % 2 == 0 {
        let c = four_squares((5 * k * k + 4) / 4)?;
        let d1 = (k / 2) * delta + difference_block(&c);
        (d1, d1 - k * delta)
    } else {
        let l = 3 * DivisorClass::e(9) + 2 * DivisorClass::e(10) - delta;
        let c = four_squares((5 * k * k - 17) / 4)?;
        let block = difference_block(&c);
        let d1 = ((k + 1) / 2) * delta - l + block;
        let d2 = -((k - 1) / 2) * delta - l + block;
        (d1, d2)
    };
    if d1.self_pairing() != -2 || d2.self_pairing() != -2 || d1 - d2 != k * delta {
        return Err(Error::Internal(format!("construction for k = {k} gave {d1}, {d2}")));
    }
    Ok((d1, d2))
}

pub fn is_ulrich_line(d: &DivisorClass, h: &DivisorClass) -> bool {
    (*d - *h).self_pairing() == -2 && (*d - 2 * *h).self_pairing() == -2
}

/// How the parity condition `(F+H)/2 ∈ Λ` is imposed during enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParityStrategy {
    /// Enumerate only the coset `F0 + 2H^⊥` of admissible `F`.
    Coset,
    /// Enumerate the whole shell and test each `F`.
    Filter,
}

/// The class `2 D0 - m H` for some `D0` with `D0·H = m H²/2`. It lies in `H^⊥` and is
/// congruent to `mH` modulo `2Λ`.
pub(crate) fn shifted_representative(h: &DivisorClass, m: i64) -> Option<DivisorClass> {
    let h2 = h.self_pairing();
    let d0 = class_with_pairing(h, m * h2 / 2)?;
    Some(2 * d0 - m * *h)
}

/// Coset residues for `{F ∈ H^⊥ : F ≡ mH mod 2Λ}`.
pub(crate) fn shifted_residues(lat: &GramLattice, h: &DivisorClass, m: i64) -> Result<Vec<u8>> {
    let f0 = shifted_representative(h, m)
        .ok_or_else(|| Error::Internal(format!("no coset representative for {h}")))?;
    parity_residues(lat, &f0).ok_or_else(|| Error::Internal(format!("{f0} not in the complement")))
}

/// Every Ulrich line bundle for `H`, in canonical scan order (see [`sort_canonical`]).
pub fn enumerate_ulrich_lines(h: &DivisorClass) -> Result<Vec<UlrichSolution>> {
    enumerate_ulrich_lines_with(h, ParityStrategy::Coset)
}

pub fn enumerate_ulrich_lines_with(
    h: &DivisorClass,
    strategy: ParityStrategy,
) -> Result<Vec<UlrichSolution>> {
    let h2 = h.self_pairing();
    if h2 <= 0 {
        return Err(Error::NonpositiveSquare { square: h2 });
    }
    let lat = orthogonal_complement(h)?;
    let target = NormTarget(-8 - h2);
    let vectors = match strategy {
        ParityStrategy::Coset => {
            let res = shifted_residues(&lat, h, 3)?;
            vectors_of_norm_in_coset(&lat, target, Some(&res))?
        }
        ParityStrategy::Filter => vectors_of_norm(&lat, target)?,
    };
    let mut out = Vec::with_capacity(vectors.len());
    for v in &vectors {
        let f = lat.class_of(v);
        match UlrichSolution::from_complement_vector(&f, h) {
            Some(s) => out.push(s),
            None if strategy == ParityStrategy::Filter => {}
            None => return Err(Error::Internal(format!("coset vector {f} fails parity"))),
        }
    }
    sort_canonical(&mut out);
    Ok(out)
}

/// Orbit form descending, then `D` descending within an orbit.
pub fn sort_canonical(solutions: &mut [UlrichSolution]) {
    solutions.sort_by_cached_key(|s| std::cmp::Reverse((canonical_orbit_form(&s.d), s.d)));
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrbitCount {
    pub form: DivisorClass,
    pub count: usize,
}

impl Serialize for OrbitCount {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("OrbitCount", 3)?;
        st.serialize_field("form", self.form.tripled())?;
        st.serialize_field("pretty", &self.form.to_string())?;
        st.serialize_field("count", &self.count)?;
        st.end()
    }
}

/// Counts of `D` per permutation orbit, forms in descending order.
pub fn orbit_classes(solutions: &[UlrichSolution]) -> Vec<OrbitCount> {
    let mut m: BTreeMap<DivisorClass, usize> = BTreeMap::new();
    for s in solutions {
        *m.entry(canonical_orbit_form(&s.d)).or_default() += 1;
    }
    m.into_iter()
        .rev()
        .map(|(form, count)| OrbitCount { form, count })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessSource {
    Construction,
    Enumeration,
    BoxSearch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConjectureOutcome {
    Witness {
        d1: DivisorClass,
        d2: DivisorClass,
        source: WitnessSource,
    },
    /// Complete search found nothing (only possible when `H² > 0`).
    NoneExists,
    NotFoundWithinBound { bound: i64 },
}

impl ConjectureOutcome {
    pub fn witness(&self) -> Option<(DivisorClass, DivisorClass)> {
        match self {
            ConjectureOutcome::Witness { d1, d2, .. } => Some((*d1, *d2)),
            _ => None,
        }
    }
}

/// Result of [`conjecture_check`] together with its input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConjectureReport {
    pub h: DivisorClass,
    pub outcome: ConjectureOutcome,
    pub complete: bool,
}

impl Serialize for ConjectureReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ConjectureReport", 6)?;
        st.serialize_field("H", &self.h)?;
        match &self.outcome {
            ConjectureOutcome::Witness { d1, d2, source } => {
                st.serialize_field("status", "witness")?;
                st.serialize_field("D1", d1)?;
                st.serialize_field("D2", d2)?;
                st.serialize_field("source", source)?;
            }
            ConjectureOutcome::NoneExists => st.serialize_field("status", "none")?,
            ConjectureOutcome::NotFoundWithinBound { bound } => {
                st.serialize_field("status", "not-found-within-bound")?;
                st.serialize_field("bound", bound)?;
            }
        }
        st.serialize_field("complete", &self.complete)?;
        st.end()
    }
}

/// Look for (−2)-classes `D1`, `D2` with `D1 - D2 = H`.
///
/// Multiples of `Δ` use the explicit construction. For `H² > 0` the search is complete.
/// Otherwise only complement coordinates in `[-bound, bound]` are tried.
pub fn conjecture_check(h: &DivisorClass, bound: i64) -> Result<ConjectureReport> {
    let t = h.tripled();
    if t.iter().all(|&x| x == t[0]) {
        let (d1, d2) = construct_ulrich_pair(t[0])?;
        return Ok(ConjectureReport {
            h: *h,
            outcome: ConjectureOutcome::Witness { d1, d2, source: WitnessSource::Construction },
            complete: true,
        });
    }
    let h2 = h.self_pairing();
    let lat = orthogonal_complement(h)?;
    let res = shifted_residues(&lat, h, 3)?;
    let target = -8 - h2;
    let (hit, source) = if h2 > 0 {
        let fp = FinckePohst::new(&lat)?;
        (fp.find_first(-target, Some(&res), |_| true)?, WitnessSource::Enumeration)
    } else {
        (
            box_search_first(&lat, NormTarget(target), bound.max(0), Some(&res)),
            WitnessSource::BoxSearch,
        )
    };
    let outcome = match hit {
        Some(v) => {
            let f = lat.class_of(&v);
            let s = UlrichSolution::from_complement_vector(&f, h)
                .ok_or_else(|| Error::Internal(format!("witness {f} fails parity")))?;
            ConjectureOutcome::Witness { d1: s.d1, d2: s.d2, source }
        }
        None if h2 > 0 => ConjectureOutcome::NoneExists,
        None => ConjectureOutcome::NotFoundWithinBound { bound },
    };
    Ok(ConjectureReport { h: *h, outcome, complete: h2 > 0 })
}

/// Full result of an enumeration, in the shape written by the command line tool.
#[derive(Debug, Clone, Serialize)]
pub struct UlrichReport {
    #[serde(rename = "H")]
    pub h: DivisorClass,
    pub solutions: Vec<UlrichSolution>,
    pub orbits: Vec<OrbitCount>,
    pub complete: bool,
}

impl UlrichReport {
    pub fn new(h: DivisorClass, solutions: Vec<UlrichSolution>) -> Self {
        let orbits = orbit_classes(&solutions);
        UlrichReport { h, solutions, orbits, complete: true }
    }
}

/// `D·Δ` for an Ulrich `D` of `Δ`; the common slope of the Ulrich bundles in the chain.
pub fn delta_slope(d: &DivisorClass) -> i64 {
    pairing(d, &fano_delta())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::parse_divisor;
    use proptest::prelude::*;

    fn cls(t: [i64; 10]) -> DivisorClass {
        DivisorClass::from_tripled(t).unwrap()
    }

    #[test]
    fn four_squares_examples() {
        assert_eq!(four_squares(0).unwrap().c, [0, 0, 0, 0]);
        assert_eq!(four_squares(7).unwrap().c, [2, 1, 1, 1]);
        assert_eq!(four_squares(28).unwrap().c, [5, 1, 1, 1]);
        assert_eq!(four_squares(1).unwrap().c, [1, 0, 0, 0]);
        assert_eq!(four_squares(-1), Err(Error::NegativeInput { n: -1 }));
    }

    // all non-increasing representations, largest first
    fn squares_oracle(n: i64) -> [i64; 4] {
        let r = isqrt(n);
        let mut best = None;
        for a in 0..=r {
            for b in 0..=a {
                for c in 0..=b {
                    for d in 0..=c {
                        if a * a + b * b + c * c + d * d == n {
                            let t = [a, b, c, d];
                            if best.map_or(true, |x| t > x) {
                                best = Some(t);
                            }
                        }
                    }
                }
            }
        }
        best.unwrap()
    }

    #[test]
    fn four_squares_matches_oracle() {
        for n in 0..400 {
            let fs = four_squares(n).unwrap();
            assert_eq!(fs.c, squares_oracle(n), "n = {n}");
            assert_eq!(fs.sum_of_squares(), n);
        }
    }

    #[test]
    fn explicit_pairs() {
        let (d1, d2) = construct_ulrich_pair(1).unwrap();
        assert_eq!(d1, cls([5, 2, 2, 2, -1, -1, -1, -1, -1, -1]));
        assert_eq!(d2, cls([4, 1, 1, 1, -2, -2, -2, -2, -2, -2]));
        let (a, b) = construct_ulrich_pair(0).unwrap();
        assert_eq!(a, DivisorClass::e(1) - DivisorClass::e(2));
        assert_eq!(a, b);
        let (d1, _) = construct_ulrich_pair(3).unwrap();
        let l = 3 * DivisorClass::e(9) + 2 * DivisorClass::e(10) - fano_delta();
        let e = |i| DivisorClass::e(i);
        let expect = 2 * fano_delta() - l + 2 * (e(1) - e(2)) + (e(3) - e(4)) + (e(5) - e(6)) + (e(7) - e(8));
        assert_eq!(d1, expect);
        assert_eq!(d1.self_pairing(), -2);
    }

    #[test]
    fn pair_range() {
        let delta = fano_delta();
        for k in -25..=25 {
            let (d1, d2) = construct_ulrich_pair(k).unwrap();
            assert_eq!(d1.self_pairing(), -2);
            assert_eq!(d2.self_pairing(), -2);
            assert_eq!(d1 - d2, k * delta);
        }
    }

    #[test]
    fn ulrich_line_examples() {
        let delta = fano_delta();
        let d = parse_divisor("2E1+E2+E3+E4").unwrap();
        assert!(is_ulrich_line(&d, &delta));
        let d = parse_divisor("4E1+E2+E3+E4+E5+E6+E7").unwrap();
        assert!(is_ulrich_line(&d, &(2 * delta)));
        assert!(!is_ulrich_line(&delta, &delta));
    }

    fn forms(sols: &[UlrichSolution]) -> Vec<[i64; 10]> {
        orbit_classes(sols)
            .iter()
            .map(|o| {
                let mut a = [0; 10];
                for (x, t) in a.iter_mut().zip(o.form.tripled()) {
                    *x = t / 3;
                }
                a
            })
            .collect()
    }

    #[test]
    fn delta_solutions() {
        let delta = fano_delta();
        let sols = enumerate_ulrich_lines(&delta).unwrap();
        assert_eq!(sols.len(), 1680);
        assert_eq!(
            forms(&sols),
            vec![[2, 1, 1, 1, 0, 0, 0, 0, 0, 0], [1, 1, 1, 1, 1, 1, 0, 0, 0, -1]]
        );
        let counts: Vec<usize> = orbit_classes(&sols).iter().map(|o| o.count).collect();
        assert_eq!(counts, vec![840, 840]);
        assert_eq!(sols[0].d, parse_divisor("2E1+E2+E3+E4").unwrap());
        for s in &sols {
            assert!(is_ulrich_line(&s.d, &delta));
            assert_eq!(s.d1, s.d - delta);
            assert_eq!(s.d2, s.d - 2 * delta);
            assert_eq!(delta_slope(&s.d), 15);
        }
        let filtered = enumerate_ulrich_lines_with(&delta, ParityStrategy::Filter).unwrap();
        assert_eq!(filtered, sols);
    }

    #[test]
    fn two_delta_solutions() {
        let h = 2 * fano_delta();
        let sols = enumerate_ulrich_lines(&h).unwrap();
        assert_eq!(
            forms(&sols),
            vec![
                [4, 1, 1, 1, 1, 1, 1, 0, 0, 0],
                [3, 3, 1, 1, 1, 1, 0, 0, 0, 0],
                [3, 2, 2, 2, 1, 0, 0, 0, 0, 0],
                [3, 2, 2, 1, 1, 1, 1, 0, 0, -1],
                [2, 2, 2, 2, 2, 1, 0, 0, 0, -1],
                [2, 2, 2, 2, 1, 1, 1, 1, -1, -1],
                [2, 2, 2, 1, 1, 1, 1, 1, 1, -2],
            ]
        );
        for s in &sols {
            assert!(is_ulrich_line(&s.d, &h));
        }
        // negation F -> -F
        let set: std::collections::HashSet<_> = sols.iter().map(|s| s.d).collect();
        for s in &sols {
            assert!(set.contains(&(3 * h - s.d)));
        }
    }

    #[test]
    fn nonpositive_polarization_rejected() {
        let h = DivisorClass::e(1);
        assert_eq!(enumerate_ulrich_lines(&h), Err(Error::NonpositiveSquare { square: 0 }));
    }

    #[test]
    fn orbit_classes_of_nothing() {
        assert!(orbit_classes(&[]).is_empty());
    }

    #[test]
    fn conjecture_examples() {
        let r = conjecture_check(&fano_delta(), 0).unwrap();
        assert_eq!(r.outcome.witness(), Some(construct_ulrich_pair(1).unwrap()));
        let r = conjecture_check(&DivisorClass::ZERO, 0).unwrap();
        let x = DivisorClass::e(1) - DivisorClass::e(2);
        assert_eq!(r.outcome.witness(), Some((x, x)));
        let h = DivisorClass::e(1) - DivisorClass::e(2);
        let r = conjecture_check(&h, 3).unwrap();
        let (d1, d2) = r.outcome.witness().expect("witness within bound 3");
        assert_eq!(d1.self_pairing(), -2);
        assert_eq!(d2.self_pairing(), -2);
        assert_eq!(d1 - d2, h);
        assert!(!r.complete);
    }

    #[test]
    fn conjecture_on_positive_class() {
        let h = parse_divisor("Delta+E1").unwrap();
        let r = conjecture_check(&h, 0).unwrap();
        assert!(r.complete);
        if let Some((d1, d2)) = r.outcome.witness() {
            assert_eq!(d1 - d2, h);
            assert_eq!(d1.self_pairing(), -2);
            assert_eq!(d2.self_pairing(), -2);
        } else {
            assert_eq!(r.outcome, ConjectureOutcome::NoneExists);
        }
    }

    #[test]
    fn json_shape() {
        let sols = enumerate_ulrich_lines(&fano_delta()).unwrap();
        let rep = UlrichReport::new(fano_delta(), sols[..1].to_vec());
        let v = serde_json::to_value(&rep).unwrap();
        assert_eq!(v["solutions"][0]["D"]["t"], serde_json::json!([6, 3, 3, 3, 0, 0, 0, 0, 0, 0]));
        assert_eq!(v["orbits"][0]["count"], 1);
        assert_eq!(v["complete"], true);
    }

    proptest! {
        #[test]
        fn pair_for_any_k(k in -400i64..400) {
            let (d1, d2) = construct_ulrich_pair(k).unwrap();
            prop_assert_eq!(d1 - d2, k * fano_delta());
        }
    }
}
