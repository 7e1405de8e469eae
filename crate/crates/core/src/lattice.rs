//! The lattice `Λ = Num(Y) ≅ U ⊕ E8(-1)` in the `E_1..E_10` presentation.
//!
//! A class `Σ a_i E_i` with `a_i ∈ ⅓ℤ` and `a_i - a_j ∈ ℤ` is stored as the ten
//! integers `t_i = 3 a_i`, all congruent modulo 3. The pairing is
//! `E_i·E_j = 1 - δ_ij`, which in tripled coordinates reads
//! `x·y = (S_x S_y - Σ t_i t'_i) / 9` with `S = Σ t_i`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const RANK: usize = 10;

/// Inputs whose tripled coordinates exceed this magnitude are rejected by the CLI.
pub const MAX_INPUT_COORD: i64 = 1_000_000;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DivisorClass {
    t: [i64; RANK],
}

fn congruent_mod3(t: &[i64; RANK]) -> bool {
    let r = t[0].rem_euclid(3);
    t.iter().all(|x| x.rem_euclid(3) == r)
}

impl DivisorClass {
    pub const ZERO: DivisorClass = DivisorClass { t: [0; RANK] };

    /// Builds a class from tripled coordinates, checking the mod-3 congruence.
    pub fn from_tripled(t: [i64; RANK]) -> Result<Self> {
        if congruent_mod3(&t) {
            Ok(DivisorClass { t })
        } else {
            Err(Error::InvalidClass { t })
        }
    }

    /// Integer combination `Σ a_i E_i`.
    pub fn from_coefficients(a: [i64; RANK]) -> Self {
        DivisorClass {
            t: a.map(|x| 3 * x),
        }
    }

    /// The half-pencil class `E_i`, `i` in `1..=10`.
    pub fn e(i: usize) -> Self {
        assert!((1..=RANK).contains(&i), "E index {i} out of range");
        let mut t = [0; RANK];
        t[i - 1] = 3;
        DivisorClass { t }
    }

    pub fn tripled(&self) -> &[i64; RANK] {
        &self.t
    }

    pub fn is_zero(&self) -> bool {
        self.t.iter().all(|&x| x == 0)
    }

    /// True when every `a_i` is an integer.
    pub fn is_integral(&self) -> bool {
        self.t[0].rem_euclid(3) == 0
    }

    /// Integer coefficients `a_i`, if the class is integral.
    pub fn coefficients(&self) -> Option<[i64; RANK]> {
        self.is_integral().then(|| self.t.map(|x| x / 3))
    }

    pub fn max_abs_coord(&self) -> i64 {
        self.t.iter().map(|x| x.abs()).max().unwrap_or(0)
    }

    /// `self / 2` when it lies in `Λ`, i.e. when every tripled coordinate is even.
    pub fn halve(&self) -> Option<Self> {
        self.t
            .iter()
            .all(|x| x % 2 == 0)
            .then(|| DivisorClass { t: self.t.map(|x| x / 2) })
    }

    pub fn self_pairing(&self) -> i64 {
        pairing(self, self)
    }

    /// Coordinates with respect to [`basis_of_lambda`]: `self = Σ_{i<9} c_i E_{i+1} + c_9 Δ`.
    pub fn to_basis_coords(&self) -> [i64; RANK] {
        let d = self.t[RANK - 1];
        let mut c = [0; RANK];
        for i in 0..RANK - 1 {
            c[i] = (self.t[i] - d) / 3;
        }
        c[RANK - 1] = d;
        c
    }

    pub fn from_basis_coords(c: &[i64]) -> Self {
        assert_eq!(c.len(), RANK);
        let d = c[RANK - 1];
        let mut t = [d; RANK];
        for i in 0..RANK - 1 {
            t[i] += 3 * c[i];
        }
        DivisorClass { t }
    }

    /// Applies a coordinate permutation: the result has `t[i] = self.t[perm[i]]`.
    pub fn permuted(&self, perm: &[usize; RANK]) -> Self {
        DivisorClass {
            t: std::array::from_fn(|i| self.t[perm[i]]),
        }
    }
}

/// Intersection pairing on `Λ`.
pub fn pairing(x: &DivisorClass, y: &DivisorClass) -> i64 {
    let v = pairing_numerator(&x.t, &y.t);
    debug_assert_eq!(v % 9, 0, "inexact pairing for valid classes");
    i64::try_from(v / 9).expect("pairing overflows i64")
}

fn pairing_numerator(x: &[i64; RANK], y: &[i64; RANK]) -> i128 {
    let sx: i128 = x.iter().map(|&v| v as i128).sum();
    let sy: i128 = y.iter().map(|&v| v as i128).sum();
    let dot: i128 = x.iter().zip(y).map(|(&a, &b)| a as i128 * b as i128).sum();
    sx * sy - dot
}

/// Pairing of raw tripled coordinate arrays, validating both operands.
pub fn pairing_raw(x: &[i64; RANK], y: &[i64; RANK]) -> Result<i64> {
    for t in [x, y] {
        if !congruent_mod3(t) {
            return Err(Error::InvalidClass { t: *t });
        }
    }
    let v = pairing_numerator(x, y);
    if v % 9 != 0 {
        return Err(Error::Internal(format!("pairing numerator {v} not divisible by 9")));
    }
    i64::try_from(v / 9).map_err(|_| Error::Overflow {
        value: v / 9,
        limit: i64::MAX as i128,
    })
}

/// The Fano polarization `Δ = ⅓ Σ E_i`.
pub fn fano_delta() -> DivisorClass {
    DivisorClass { t: [1; RANK] }
}

/// `{E_1, …, E_9, Δ}`, a ℤ-basis of `Λ`.
pub fn basis_of_lambda() -> Vec<DivisorClass> {
    let mut b: Vec<_> = (1..RANK).map(DivisorClass::e).collect();
    b.push(fano_delta());
    b
}

/// Orbit representative under permutations of the `E_i`: coordinates sorted non-increasing.
pub fn canonical_orbit_form(d: &DivisorClass) -> DivisorClass {
    let mut t = d.t;
    t.sort_unstable_by(|a, b| b.cmp(a));
    DivisorClass { t }
}

impl Add for DivisorClass {
    type Output = DivisorClass;
    fn add(self, rhs: Self) -> Self {
        DivisorClass {
            t: std::array::from_fn(|i| self.t[i] + rhs.t[i]),
        }
    }
}

impl Sub for DivisorClass {
    type Output = DivisorClass;
    fn sub(self, rhs: Self) -> Self {
        DivisorClass {
            t: std::array::from_fn(|i| self.t[i] - rhs.t[i]),
        }
    }
}

impl AddAssign for DivisorClass {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for DivisorClass {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl Neg for DivisorClass {
    type Output = DivisorClass;
    fn neg(self) -> Self {
        DivisorClass { t: self.t.map(|x| -x) }
    }
}

impl Mul<DivisorClass> for i64 {
    type Output = DivisorClass;
    fn mul(self, rhs: DivisorClass) -> DivisorClass {
        DivisorClass { t: rhs.t.map(|x| self * x) }
    }
}

impl std::iter::Sum for DivisorClass {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(DivisorClass::ZERO, |a, b| a + b)
    }
}

/// Renders a class in the divisor grammar accepted by [`parse_divisor`].
///
/// Non-integral classes are written as `±Delta` plus an integral part,
/// e.g. `-Delta+2E1+E2+E3+E4`.
pub fn format_divisor(d: &DivisorClass) -> String {
    let r = match d.t[0].rem_euclid(3) {
        0 => 0,
        1 => 1,
        _ => -1,
    };
    let mut out = String::new();
    match r {
        1 => out.push_str("Delta"),
        -1 => out.push_str("-Delta"),
        _ => {}
    }
    for (i, &t) in d.t.iter().enumerate() {
        let a = (t - r) / 3;
        if a == 0 {
            continue;
        }
        if a > 0 && !out.is_empty() {
            out.push('+');
        }
        match a {
            1 => {}
            -1 => out.push('-'),
            _ => out.push_str(&a.to_string()),
        }
        out.push('E');
        out.push_str(&(i + 1).to_string());
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl fmt::Display for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_divisor(self))
    }
}

impl fmt::Debug for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DivisorClass({} | t={:?})", format_divisor(self), self.t)
    }
}

#[derive(Serialize, Deserialize)]
struct DivisorJson {
    t: [i64; RANK],
    #[serde(default, skip_deserializing)]
    pretty: String,
}

impl Serialize for DivisorClass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DivisorJson {
            t: self.t,
            pretty: format_divisor(self),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DivisorClass {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = DivisorJson::deserialize(d)?;
        DivisorClass::from_tripled(raw.t).map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Parser
//
//   expr := ['+'|'-'] term (('+'|'-') term)*
//   term := [coef ['*']] atom | coef
//   atom := 'E' int(1..10) | 'Delta'
//   coef := int | int '/3'

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn found(&self) -> String {
        match self.peek() {
            Some(c) => format!("'{c}'"),
            None => "end of input".to_string(),
        }
    }

    fn err<T>(&self, expected: &str) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos,
            expected: expected.to_string(),
            found: self.found(),
        })
    }

    fn int(&mut self) -> Result<i128> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("integer");
        }
        self.src[start..self.pos].parse::<i128>().map_err(|_| Error::Parse {
            pos: start,
            expected: "integer of reasonable size".into(),
            found: self.src[start..self.pos].to_string(),
        })
    }

    /// Returns (numerator, denominator) with denominator 1 or 3.
    fn coef(&mut self) -> Result<(i128, i128)> {
        let n = self.int()?;
        self.skip_ws();
        if self.peek() == Some('/') {
            self.pos += 1;
            self.skip_ws();
            let at = self.pos;
            let d = self.int()?;
            if d != 3 {
                return Err(Error::Parse {
                    pos: at,
                    expected: "denominator 3".into(),
                    found: d.to_string(),
                });
            }
            return Ok((n, 3));
        }
        Ok((n, 1))
    }

    fn atom(&mut self) -> Result<Option<[i128; RANK]>> {
        if self.src[self.pos..].starts_with("Delta") {
            self.pos += "Delta".len();
            return Ok(Some([1; RANK]));
        }
        if self.peek() == Some('E') {
            self.pos += 1;
            self.skip_ws();
            let at = self.pos;
            let i = self.int()?;
            if !(1..=RANK as i128).contains(&i) {
                return Err(Error::Parse {
                    pos: at,
                    expected: "index in 1..10".into(),
                    found: i.to_string(),
                });
            }
            let mut t = [0; RANK];
            t[i as usize - 1] = 3;
            return Ok(Some(t));
        }
        Ok(None)
    }

    /// Parses one term and returns its tripled contribution.
    fn term(&mut self) -> Result<[i128; RANK]> {
        self.skip_ws();
        let start = self.pos;
        let coef = if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            Some(self.coef()?)
        } else {
            None
        };
        self.skip_ws();
        let mut star = false;
        if coef.is_some() && self.peek() == Some('*') {
            self.pos += 1;
            self.skip_ws();
            star = true;
        }
        let atom = self.atom()?;
        let (num, den) = coef.unwrap_or((1, 1));
        match atom {
            Some(t) => {
                let mut out = [0i128; RANK];
                for (o, &v) in out.iter_mut().zip(&t) {
                    let p = num * v;
                    if p % den != 0 {
                        return Err(Error::Parse {
                            pos: start,
                            expected: "a term lying in the lattice".into(),
                            found: self.src[start..self.pos].to_string(),
                        });
                    }
                    *o = p / den;
                }
                Ok(out)
            }
            None if coef.is_some() && !star => {
                if num == 0 {
                    Ok([0; RANK])
                } else {
                    self.err("'E<n>' or 'Delta' after a nonzero coefficient")
                }
            }
            None => self.err("'E<n>' or 'Delta'"),
        }
    }

    fn expr(&mut self) -> Result<[i128; RANK]> {
        let mut acc = [0i128; RANK];
        self.skip_ws();
        let mut sign = 1i128;
        match self.peek() {
            Some('-') => {
                sign = -1;
                self.pos += 1;
            }
            Some('+') => self.pos += 1,
            _ => {}
        }
        loop {
            let t = self.term()?;
            for (a, v) in acc.iter_mut().zip(t) {
                *a = a
                    .checked_add(sign * v)
                    .ok_or(Error::Overflow { value: *a, limit: i64::MAX as i128 })?;
            }
            self.skip_ws();
            match self.peek() {
                Some('+') => sign = 1,
                Some('-') => sign = -1,
                None => return Ok(acc),
                Some(_) => return self.err("'+', '-' or end of input"),
            }
            self.pos += 1;
        }
    }
}

/// Parses a divisor expression such as `2E1+E2+E3+E4`, `3Delta - E10` or `2*Delta`.
pub fn parse_divisor(text: &str) -> Result<DivisorClass> {
    let mut p = Parser { src: text, pos: 0 };
    let acc = p.expr()?;
    let mut t = [0i64; RANK];
    for (o, v) in t.iter_mut().zip(acc) {
        *o = i64::try_from(v).map_err(|_| Error::Overflow {
            value: v,
            limit: i64::MAX as i128,
        })?;
    }
    DivisorClass::from_tripled(t)
}
