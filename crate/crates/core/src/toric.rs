//! Divisors of tridegree `(2,2,2)` on `(ℙ¹)³` invariant under the involution
//! `τ: ([u0:u1],[v0:v1],[w0:w1]) ↦ ([u0:-u1],[v0:-v1],[w0:-w1])`.
//!
//! A generic such divisor is a K3 surface on which `τ` acts freely; the quotient is
//! an Enriques surface. Its 14 invariant monomials correspond to the terms of the
//! classical sextic `x²y²z² + x²y²w² + x²z²w² + y²z²w² + xyzw·Q = 0`.
//!
//! For `k ≥ 1`, `O(k,k,k)` has `6k² + 2` sections on the divisor;
//! nothing here depends on that count.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::de::{self, Deserializer};
use serde::ser::{SerializeMap, SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intlin::matrix::{rank, IntMatrix};

/// `u0^{2-i} u1^i v0^{2-j} v1^j w0^{2-k} w1^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TriMonomial {
    pub i: u8,
    pub j: u8,
    pub k: u8,
}

impl TriMonomial {
    /// Rejects exponents outside `0..=2` and monomials that are not `τ`-invariant.
    pub fn new(i: i64, j: i64, k: i64) -> Result<Self> {
        let ok = [i, j, k].iter().all(|x| (0..=2).contains(x)) && (i + j + k) % 2 == 0;
        if !ok {
            return Err(Error::NonInvariantMonomial { i, j, k });
        }
        Ok(TriMonomial { i: i as u8, j: j as u8, k: k as u8 })
    }

    pub fn exponents(&self) -> [u8; 3] {
        [self.i, self.j, self.k]
    }

    /// Whether all three exponents are even, i.e. the monomial is supported at a fixed point.
    pub fn is_vertex(&self) -> bool {
        self.exponents().iter().all(|e| e % 2 == 0)
    }

    fn eval(&self, x: &[[i128; 2]; 3]) -> i128 {
        self.exponents()
            .iter()
            .zip(x)
            .map(|(&e, p)| p[0].pow(2 - e as u32) * p[1].pow(e as u32))
            .product()
    }
}

impl fmt::Display for TriMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, e) in ["u", "v", "w"].iter().zip(self.exponents()) {
            match e {
                0 => write!(f, "{name}0^2")?,
                1 => write!(f, "{name}0{name}1")?,
                _ => write!(f, "{name}1^2")?,
            }
        }
        Ok(())
    }
}

/// The 14 invariant monomials, lexicographic in `(i, j, k)`.
pub fn invariant_monomials() -> Vec<TriMonomial> {
    let mut out = Vec::with_capacity(14);
    for i in 0..=2 {
        for j in 0..=2 {
            for k in 0..=2 {
                if let Ok(m) = TriMonomial::new(i, j, k) {
                    out.push(m);
                }
            }
        }
    }
    out
}

/// A point with every coordinate `[1:0]` (`ε = 0`) or `[0:1]` (`ε = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct FixedPoint {
    pub eps: [u8; 3],
}

impl FixedPoint {
    pub fn coordinates(&self) -> [[i128; 2]; 3] {
        self.eps.map(|e| if e == 0 { [1, 0] } else { [0, 1] })
    }

    /// The only monomial not vanishing here.
    pub fn vertex_monomial(&self) -> TriMonomial {
        TriMonomial { i: 2 * self.eps[0], j: 2 * self.eps[1], k: 2 * self.eps[2] }
    }
}

impl fmt::Display for FixedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = self.eps.iter().map(|&e| if e == 0 { "[1:0]" } else { "[0:1]" }).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// The 8 fixed points of `τ`, `ε_u` varying slowest.
pub fn fixed_points() -> Vec<FixedPoint> {
    (0u8..8)
        .map(|n| FixedPoint { eps: [(n >> 2) & 1, (n >> 1) & 1, n & 1] })
        .collect()
}

/// Integer combination of invariant monomials.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TriPolynomial {
    coeffs: BTreeMap<TriMonomial, i64>,
}

impl TriPolynomial {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn monomial(m: TriMonomial) -> Self {
        let mut p = Self::new();
        p.set(m, 1);
        p
    }

    /// Sets a coefficient; zero removes the term.
    pub fn set(&mut self, m: TriMonomial, c: i64) {
        if c == 0 {
            self.coeffs.remove(&m);
        } else {
            self.coeffs.insert(m, c);
        }
    }

    pub fn coefficient(&self, m: &TriMonomial) -> i64 {
        self.coeffs.get(m).copied().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TriMonomial, &i64)> {
        self.coeffs.iter()
    }

    pub fn eval(&self, x: &[[i128; 2]; 3]) -> i128 {
        self.coeffs.iter().map(|(m, &c)| c as i128 * m.eval(x)).sum()
    }

    /// Sum of the 8 vertex monomials.
    pub fn vertex_sum() -> Self {
        let mut p = Self::new();
        for f in fixed_points() {
            p.set(f.vertex_monomial(), 1);
        }
        p
    }

    /// Coefficients drawn uniformly from `0..modulus` for every invariant monomial.
    pub fn random(seed: u64, modulus: i64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = Self::new();
        for m in invariant_monomials() {
            p.set(m, rng.gen_range(0..modulus.max(1)));
        }
        p
    }
}

impl Serialize for TriPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.coeffs.len()))?;
        for (m, c) in &self.coeffs {
            map.serialize_entry(&format!("{},{},{}", m.i, m.j, m.k), c)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for TriPolynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = BTreeMap::<String, i64>::deserialize(d)?;
        let mut p = TriPolynomial::new();
        for (key, c) in raw {
            let e: Vec<i64> = key
                .split(',')
                .map(|x| x.trim().parse::<i64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| de::Error::custom(format!("bad monomial key {key:?}")))?;
            if e.len() != 3 {
                return Err(de::Error::custom(format!("bad monomial key {key:?}")));
            }
            let m = TriMonomial::new(e[0], e[1], e[2]).map_err(de::Error::custom)?;
            p.set(m, c);
        }
        Ok(p)
    }
}

/// Value of `p` at a fixed point: the coefficient of its vertex monomial.
pub fn vertex_coefficient(p: &TriPolynomial, f: &FixedPoint) -> i128 {
    p.eval(&f.coordinates())
}

pub fn avoids_all_fixed_points(p: &TriPolynomial) -> bool {
    fixed_points().iter().all(|f| vertex_coefficient(p, f) != 0)
}

/// Rows: fixed points. Columns: [`invariant_monomials`]. Entry: monomial value at the point.
pub fn fixed_point_condition_matrix() -> IntMatrix {
    let monos = invariant_monomials();
    fixed_points()
        .iter()
        .map(|f| monos.iter().map(|m| m.eval(&f.coordinates())).collect())
        .collect()
}

pub fn condition_rank(rows: &IntMatrix) -> usize {
    rank(rows)
}

/// Exponents of `x, y, z, w` in the sextic monomial matching `m`.
pub fn sextic_image(m: &TriMonomial) -> Result<[u32; 4]> {
    let (i, j, k) = (m.i as i64, m.j as i64, m.k as i64);
    let m = TriMonomial::new(i, j, k)?;
    let (i, j, k) = (m.i as i64, m.j as i64, m.k as i64);
    let e = [
        3 - (i + j + k) / 2,
        1 + (i - j + k) / 2,
        1 + (i + j - k) / 2,
        1 + (-i + j + k) / 2,
    ];
    Ok(e.map(|x| x as u32))
}

pub fn sextic_label(e: &[u32; 4]) -> String {
    let mut s = String::new();
    for (v, &n) in ["x", "y", "z", "w"].iter().zip(e) {
        match n {
            0 => {}
            1 => s.push_str(v),
            _ => s.push_str(&format!("{v}^{n}")),
        }
    }
    if s.is_empty() {
        s.push('1');
    }
    s
}

/// The four `xyzw`-free sextic terms, in the order `x²y²z², x²y²w², x²z²w², y²z²w²`.
pub const TETRAHEDRAL: [[u32; 4]; 4] = [[2, 2, 2, 0], [2, 2, 0, 2], [2, 0, 2, 2], [0, 2, 2, 2]];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SexticForm {
    pub tetrahedral: [i64; 4],
    /// Quadric `Q` with `xyzw` divided out, keyed by exponents.
    pub quadric: BTreeMap<[u32; 4], i64>,
}

impl Serialize for SexticForm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let tet: BTreeMap<String, i64> = TETRAHEDRAL
            .iter()
            .zip(self.tetrahedral)
            .filter(|(_, c)| *c != 0)
            .map(|(e, c)| (sextic_label(e), c))
            .collect();
        let q: BTreeMap<String, i64> = self.quadric.iter().map(|(e, c)| (sextic_label(e), *c)).collect();
        let mut st = s.serialize_struct("SexticForm", 2)?;
        st.serialize_field("tetrahedral", &tet)?;
        st.serialize_field("Q", &q)?;
        st.end()
    }
}

pub fn to_sextic_form(p: &TriPolynomial) -> SexticForm {
    let mut tetrahedral = [0i64; 4];
    let mut quadric = BTreeMap::new();
    for (m, &c) in p.terms() {
        let e = sextic_image(m).expect("polynomial holds only invariant monomials");
        if let Some(pos) = TETRAHEDRAL.iter().position(|t| *t == e) {
            tetrahedral[pos] += c;
        } else {
            let q = e.map(|x| x - 1);
            *quadric.entry(q).or_insert(0) += c;
        }
    }
    SexticForm { tetrahedral, quadric }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SingularScan {
    pub q: u64,
    pub points_checked: u64,
    pub zeros: u64,
    /// Points with `p` and all three chart derivatives vanishing, as `[[a0,a1],[b0,b1],[c0,c1]]`.
    pub singular_points: Vec<[[u64; 2]; 3]>,
    pub avoids_fixed_points: bool,
    pub fixed_points_on_divisor: Vec<FixedPoint>,
}

fn is_small_prime(q: u64) -> bool {
    (2..=31).contains(&q) && (2..q).take_while(|d| d * d <= q).all(|d| q % d != 0)
}

/// Points of `ℙ¹(F_q)`: `[1:a]` for `a = 0..q`, then `[0:1]`.
fn projective_line(q: u64) -> Vec<[u64; 2]> {
    let mut out: Vec<[u64; 2]> = (0..q).map(|a| [1, a]).collect();
    out.push([0, 1]);
    out
}

struct ModPoly {
    terms: Vec<([u8; 3], u64)>,
    q: u64,
}

impl ModPoly {
    fn new(p: &TriPolynomial, q: u64) -> Self {
        let terms = p
            .terms()
            .map(|(m, &c)| (m.exponents(), c.rem_euclid(q as i64) as u64))
            .filter(|(_, c)| *c != 0)
            .collect();
        ModPoly { terms, q }
    }

    fn pow(&self, x: u64, e: u32) -> u64 {
        (0..e).fold(1, |acc, _| acc * x % self.q)
    }

    /// Value and the derivative along the non-normalized coordinate of each factor.
    fn value_and_chart_gradient(&self, pt: &[[u64; 2]; 3]) -> (u64, [u64; 3]) {
        let q = self.q;
        let mut value = 0;
        let mut grad = [0u64; 3];
        for (e, c) in &self.terms {
            // exponent pairs (of x0, x1) per factor
            let ex: [[u32; 2]; 3] = [0, 1, 2].map(|f| [2 - e[f] as u32, e[f] as u32]);
            let factor = |f: usize| self.pow(pt[f][0], ex[f][0]) * self.pow(pt[f][1], ex[f][1]) % q;
            let vals = [factor(0), factor(1), factor(2)];
            value = (value + c * (vals[0] * vals[1] % q * vals[2] % q)) % q;
            for f in 0..3 {
                // chart x0 = 1 differentiates in x1, chart x1 = 1 in x0
                let slot = if pt[f][0] == 1 { 1 } else { 0 };
                let n = ex[f][slot];
                if n == 0 {
                    continue;
                }
                let mut dex = ex[f];
                dex[slot] -= 1;
                let d = n as u64 * self.pow(pt[f][0], dex[0]) % q * self.pow(pt[f][1], dex[1]) % q;
                let others: u64 = (0..3).filter(|&g| g != f).map(|g| vals[g]).fold(1, |a, b| a * b % q);
                grad[f] = (grad[f] + c * (d * others % q)) % q;
            }
        }
        (value, grad)
    }
}

/// Scans all `(q+1)³` points of `(ℙ¹)³` over `F_q` for singular points of `p = 0`.
/// Finding none over one field is evidence of smoothness, not a proof.
pub fn singular_scan_fq(p: &TriPolynomial, q: u64) -> Result<SingularScan> {
    if !is_small_prime(q) {
        return Err(Error::InvalidModulus { q });
    }
    let mp = ModPoly::new(p, q);
    let line = projective_line(q);
    let per_u: Vec<(u64, Vec<[[u64; 2]; 3]>)> = line
        .par_iter()
        .map(|&a| {
            let mut zeros = 0;
            let mut sing = Vec::new();
            for &b in &line {
                for &c in &line {
                    let pt = [a, b, c];
                    let (v, g) = mp.value_and_chart_gradient(&pt);
                    if v == 0 {
                        zeros += 1;
                        if g == [0, 0, 0] {
                            sing.push(pt);
                        }
                    }
                }
            }
            (zeros, sing)
        })
        .collect();
    let n = line.len() as u64;
    let mut zeros = 0;
    let mut singular_points = Vec::new();
    for (z, s) in per_u {
        zeros += z;
        singular_points.extend(s);
    }
    let on: Vec<FixedPoint> = fixed_points()
        .into_iter()
        .filter(|f| (vertex_coefficient(p, f)).rem_euclid(q as i128) == 0)
        .collect();
    Ok(SingularScan {
        q,
        points_checked: n * n * n,
        zeros,
        singular_points,
        avoids_fixed_points: on.is_empty(),
        fixed_points_on_divisor: on,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn m(i: i64, j: i64, k: i64) -> TriMonomial {
        TriMonomial::new(i, j, k).unwrap()
    }

    #[test]
    fn monomial_counts() {
        let all = invariant_monomials();
        assert_eq!(all.len(), 14);
        assert_eq!(all.iter().filter(|x| x.is_vertex()).count(), 8);
        let mixed = all
            .iter()
            .filter(|x| x.exponents().iter().filter(|&&e| e == 1).count() == 2)
            .count();
        assert_eq!(mixed, 6);
        let mut brute = 0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    brute += ((i + j + k) % 2 == 0) as usize;
                }
            }
        }
        assert_eq!(brute, 14);
        assert_eq!(
            TriMonomial::new(1, 0, 0),
            Err(Error::NonInvariantMonomial { i: 1, j: 0, k: 0 })
        );
        assert!(TriMonomial::new(3, 1, 0).is_err());
    }

    #[test]
    fn fixed_point_list() {
        let f = fixed_points();
        assert_eq!(f.len(), 8);
        assert_eq!(f[0].to_string(), "([1:0],[1:0],[1:0])");
        assert_eq!(f[7].to_string(), "([0:1],[0:1],[0:1])");
        assert_eq!(f.iter().collect::<HashSet<_>>().len(), 8);
    }

    #[test]
    fn vertex_values() {
        let p = TriPolynomial::monomial(m(0, 0, 0));
        let f = fixed_points();
        assert_eq!(vertex_coefficient(&p, &f[0]), 1);
        let other = FixedPoint { eps: [1, 0, 0] };
        assert_eq!(vertex_coefficient(&p, &other), 0);
        let mut p = TriPolynomial::new();
        for (n, mono) in invariant_monomials().into_iter().enumerate() {
            p.set(mono, n as i64 + 1);
        }
        for f in fixed_points() {
            assert_eq!(vertex_coefficient(&p, &f), p.coefficient(&f.vertex_monomial()) as i128);
        }
        assert!(avoids_all_fixed_points(&p));
        p.set(m(2, 0, 2), 0);
        assert!(!avoids_all_fixed_points(&p));
    }

    #[test]
    fn codimension_one_conditions() {
        let rows = fixed_point_condition_matrix();
        for r in &rows {
            assert_eq!(condition_rank(&vec![r.clone()]), 1);
            assert_eq!(r.iter().filter(|&&x| x != 0).count(), 1);
        }
        assert_eq!(condition_rank(&rows), 8);
    }

    #[test]
    fn figure_labels() {
        let cases = [
            ((0, 0, 0), "x^3yzw"),
            ((2, 0, 0), "x^2y^2z^2"),
            ((0, 2, 0), "x^2z^2w^2"),
            ((0, 0, 2), "x^2y^2w^2"),
            ((2, 0, 2), "xy^3zw"),
            ((0, 2, 2), "xyzw^3"),
            ((2, 2, 0), "xyz^3w"),
            ((2, 2, 2), "y^2z^2w^2"),
            ((1, 1, 0), "x^2yz^2w"),
        ];
        for ((i, j, k), label) in cases {
            assert_eq!(sextic_label(&sextic_image(&m(i, j, k)).unwrap()), label, "{i}{j}{k}");
        }
        let bad = TriMonomial { i: 1, j: 0, k: 0 };
        assert!(sextic_image(&bad).is_err());
    }

    #[test]
    fn images_distinct_and_additive() {
        let all = invariant_monomials();
        let imgs: Vec<[u32; 4]> = all.iter().map(|x| sextic_image(x).unwrap()).collect();
        for e in &imgs {
            assert_eq!(e.iter().sum::<u32>(), 6);
        }
        assert_eq!(imgs.iter().collect::<HashSet<_>>().len(), 14);
        assert_eq!(imgs.iter().filter(|e| e.contains(&0)).count(), 4);
        // equal exponent sums of two monomials give equal sums of images
        let mut seen: BTreeMap<[u8; 3], [u32; 4]> = BTreeMap::new();
        for (a, ea) in all.iter().zip(&imgs) {
            for (b, eb) in all.iter().zip(&imgs) {
                let key = [a.i + b.i, a.j + b.j, a.k + b.k];
                let sum = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2], ea[3] + eb[3]];
                assert_eq!(*seen.entry(key).or_insert(sum), sum);
            }
        }
    }

    #[test]
    fn sextic_split() {
        let s = to_sextic_form(&TriPolynomial::monomial(m(2, 0, 0)));
        assert_eq!(s.tetrahedral, [1, 0, 0, 0]);
        assert!(s.quadric.is_empty());
        let s = to_sextic_form(&TriPolynomial::monomial(m(0, 0, 0)));
        assert_eq!(s.tetrahedral, [0; 4]);
        assert_eq!(s.quadric.into_iter().collect::<Vec<_>>(), vec![([2, 0, 0, 0], 1)]);
        let mut p = TriPolynomial::new();
        for mono in invariant_monomials() {
            p.set(mono, 1);
        }
        let s = to_sextic_form(&p);
        assert_eq!(s.tetrahedral, [1; 4]);
        assert_eq!(s.quadric.len(), 10);
        let v = serde_json::to_value(&s).unwrap();
        assert_eq!(v["Q"]["x^2"], 1);
    }

    #[test]
    fn json_round_trip() {
        let p = TriPolynomial::random(7, 5);
        let text = serde_json::to_string(&p).unwrap();
        let back: TriPolynomial = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
        let q: TriPolynomial = serde_json::from_str(r#"{"0,0,0": 3, "1,1,0": -1}"#).unwrap();
        assert_eq!(q.coefficient(&m(0, 0, 0)), 3);
        assert!(serde_json::from_str::<TriPolynomial>(r#"{"1,0,0": 1}"#).is_err());
        assert!(serde_json::from_str::<TriPolynomial>(r#"{"1,0": 1}"#).is_err());
    }

    #[test]
    fn seeded_polynomials_repeat() {
        assert_eq!(TriPolynomial::random(42, 5), TriPolynomial::random(42, 5));
        assert_ne!(TriPolynomial::random(42, 5), TriPolynomial::random(43, 5));
    }

    #[test]
    fn scans() {
        let s = singular_scan_fq(&TriPolynomial::vertex_sum(), 5).unwrap();
        assert!(s.avoids_fixed_points);
        assert_eq!(s.points_checked, 216);
        let s = singular_scan_fq(&TriPolynomial::monomial(m(0, 0, 0)), 5).unwrap();
        assert!(!s.singular_points.is_empty());
        assert!(s.singular_points.iter().all(|pt| pt.iter().any(|c| c[0] == 0)));
        let s = singular_scan_fq(&TriPolynomial::random(1, 5), 5).unwrap();
        assert_eq!(s.points_checked, 216);
        assert_eq!(singular_scan_fq(&TriPolynomial::vertex_sum(), 6), Err(Error::InvalidModulus { q: 6 }));
        assert_eq!(singular_scan_fq(&TriPolynomial::vertex_sum(), 37), Err(Error::InvalidModulus { q: 37 }));
    }

    // formal derivative over the integers, reduced mod q afterwards
    #[test]
    fn gradient_matches_formal_derivative() {
        let p = TriPolynomial::random(3, 7);
        let q = 7u64;
        let mp = ModPoly::new(&p, q);
        let line = projective_line(q);
        for &a in &line {
            for &b in &line {
                for &c in &line {
                    let pt = [a, b, c];
                    let (v, g) = mp.value_and_chart_gradient(&pt);
                    let x = pt.map(|r| [r[0] as i128, r[1] as i128]);
                    assert_eq!(v as i128, p.eval(&x).rem_euclid(7));
                    for f in 0..3 {
                        let slot = if pt[f][0] == 1 { 1 } else { 0 };
                        let mut d: i128 = 0;
                        for (mono, &coef) in p.terms() {
                            let e = mono.exponents();
                            let ex = [2 - e[f] as u32, e[f] as u32];
                            if ex[slot] == 0 {
                                continue;
                            }
                            let mut term = coef as i128 * ex[slot] as i128;
                            for g in 0..3 {
                                let eg = mono.exponents()[g] as u32;
                                let mut pe = [2 - eg, eg];
                                if g == f {
                                    pe[slot] -= 1;
                                }
                                term *= x[g][0].pow(pe[0]) * x[g][1].pow(pe[1]);
                            }
                            d += term;
                        }
                        assert_eq!(g[f] as i128, d.rem_euclid(7));
                    }
                }
            }
        }
    }
}
