use serde::Serialize;

use super::matrix::{hermite_normal_form, inertia, left_kernel, solve_integer_combination, IntMatrix};
use crate::error::{Error, Result};
use crate::lattice::{basis_of_lambda, pairing, DivisorClass, RANK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Definiteness {
    NegativeDefinite,
    PositiveDefinite,
    Indefinite,
    Degenerate,
}

impl Definiteness {
    pub fn of_gram(gram: &[Vec<i64>]) -> Self {
        let m: IntMatrix = gram
            .iter()
            .map(|r| r.iter().map(|&x| x as i128).collect())
            .collect();
        let n = m.len();
        match inertia(&m) {
            (_, _, z) if z > 0 => Definiteness::Degenerate,
            (0, neg, _) if neg == n => Definiteness::NegativeDefinite,
            (pos, 0, _) if pos == n => Definiteness::PositiveDefinite,
            _ => Definiteness::Indefinite,
        }
    }
}

/// A Gram matrix, optionally together with the classes of `Λ` it was computed from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GramLattice {
    basis: Option<Vec<DivisorClass>>,
    gram: Vec<Vec<i64>>,
    definiteness: Definiteness,
}

/// The self-pairing a vector is required to have.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormTarget(pub i64);

impl GramLattice {
    /// Abstract lattice given only by its Gram matrix.
    pub fn from_gram(gram: Vec<Vec<i64>>) -> Result<Self> {
        let n = gram.len();
        if gram.iter().any(|r| r.len() != n) {
            return Err(Error::Internal("gram matrix is not square".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::Internal(format!("gram matrix not symmetric at ({i},{j})")));
                }
            }
        }
        let definiteness = Definiteness::of_gram(&gram);
        Ok(GramLattice { basis: None, gram, definiteness })
    }

    /// Sublattice of `Λ` spanned by `basis`, with the Gram matrix of the pairing.
    pub fn from_basis(basis: Vec<DivisorClass>) -> Self {
        let gram: Vec<Vec<i64>> = basis
            .iter()
            .map(|x| basis.iter().map(|y| pairing(x, y)).collect())
            .collect();
        let definiteness = Definiteness::of_gram(&gram);
        GramLattice { basis: Some(basis), gram, definiteness }
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    pub fn basis(&self) -> Option<&[DivisorClass]> {
        self.basis.as_deref()
    }

    pub fn definiteness(&self) -> Definiteness {
        self.definiteness
    }

    pub fn norm(&self, v: &[i64]) -> i64 {
        let n = self.rank();
        let mut s: i128 = 0;
        for i in 0..n {
            let mut row: i128 = 0;
            for j in 0..n {
                row += self.gram[i][j] as i128 * v[j] as i128;
            }
            s += v[i] as i128 * row;
        }
        i64::try_from(s).expect("norm overflows i64")
    }

    /// The class `Σ v_i b_i`. Panics for an abstract Gram lattice.
    pub fn class_of(&self, v: &[i64]) -> DivisorClass {
        let basis = self.basis.as_ref().expect("lattice has no embedding in Λ");
        basis.iter().zip(v).map(|(b, &c)| c * *b).sum()
    }

    /// Coordinates of `x` in the basis, if `x` lies in the sublattice.
    pub fn coords_of(&self, x: &DivisorClass) -> Option<Vec<i64>> {
        let basis = self.basis.as_ref()?;
        let rows: Vec<Vec<i128>> = basis.iter().map(|b| basis_row(b)).collect();
        let sol = solve_integer_combination(&rows, &basis_row(x))?;
        sol.into_iter().map(|v| i64::try_from(v).ok()).collect()
    }
}

fn basis_row(x: &DivisorClass) -> Vec<i128> {
    x.to_basis_coords().iter().map(|&v| v as i128).collect()
}

/// Rows of the complement basis expressed in `basis_of_lambda` coordinates.
pub fn inclusion_matrix(lat: &GramLattice) -> IntMatrix {
    lat.basis()
        .unwrap_or(&[])
        .iter()
        .map(basis_row)
        .collect()
}

/// `H^⊥ = {x ∈ Λ : x·H = 0}`, a saturated rank-9 sublattice.
///
/// The kernel of `x ↦ x·H` is taken on `basis_of_lambda` coordinates through the
/// Hermite transform, then pairwise size-reduced so that enumeration over it stays
/// small. The reduction is with respect to `-gram` when `H² > 0` and with respect to
/// the Euclidean norm of the tripled coordinates otherwise.
pub fn orthogonal_complement(h: &DivisorClass) -> Result<GramLattice> {
    if h.is_zero() {
        return Err(Error::ZeroClass);
    }
    let functional: IntMatrix = basis_of_lambda()
        .iter()
        .map(|b| vec![pairing(b, h) as i128])
        .collect();
    let kernel = left_kernel(&functional);
    debug_assert_eq!(kernel.len(), RANK - 1);
    let mut rows: Vec<DivisorClass> = kernel
        .iter()
        .map(|r| {
            let c: Vec<i64> = r.iter().map(|&v| i64::try_from(v).expect("kernel entry")).collect();
            DivisorClass::from_basis_coords(&c)
        })
        .collect();
    let definite = h.self_pairing() > 0;
    let form = |x: &DivisorClass, y: &DivisorClass| -> i128 {
        if definite {
            -(pairing(x, y) as i128)
        } else {
            x.tripled()
                .iter()
                .zip(y.tripled())
                .map(|(&a, &b)| a as i128 * b as i128)
                .sum()
        }
    };
    pairwise_reduce(&mut rows, form);
    Ok(GramLattice::from_basis(rows))
}

/// Some `D ∈ Λ` with `D·H = n`, if one exists.
pub fn class_with_pairing(h: &DivisorClass, n: i64) -> Option<DivisorClass> {
    let functional: IntMatrix = basis_of_lambda()
        .iter()
        .map(|b| vec![pairing(b, h) as i128])
        .collect();
    let (hnf, u) = hermite_normal_form(&functional);
    let g = hnf[0][0];
    if g == 0 {
        return (n == 0).then_some(DivisorClass::ZERO);
    }
    if (n as i128) % g != 0 {
        return None;
    }
    let q = n as i128 / g;
    let c: Option<Vec<i64>> = u[0].iter().map(|&x| i64::try_from(x * q).ok()).collect();
    Some(DivisorClass::from_basis_coords(&c?))
}

/// Residues mod 2 of the coordinates of `x`, for `x` in `lat`.
///
/// Used to restrict enumeration to `x + 2·lat`. When `lat = H^⊥` is saturated, the
/// classes of `H^⊥` congruent to `x` modulo `2Λ` are exactly that coset.
pub fn parity_residues(lat: &GramLattice, x: &DivisorClass) -> Option<Vec<u8>> {
    let c = lat.coords_of(x)?;
    Some(c.iter().map(|v| v.rem_euclid(2) as u8).collect())
}

/// Greedy pairwise size reduction with respect to a positive definite form:
/// repeatedly replaces `b_i` by `b_i - q b_j` whenever that shortens `b_i`.
/// Terminates because the sum of norms is a strictly decreasing non-negative integer.
fn pairwise_reduce<F>(rows: &mut [DivisorClass], form: F)
where
    F: Fn(&DivisorClass, &DivisorClass) -> i128,
{
    let n = rows.len();
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let njj = form(&rows[j], &rows[j]);
                if njj == 0 {
                    continue;
                }
                let nij = form(&rows[i], &rows[j]);
                // nearest integer to nij / njj
                let q = (2 * nij + njj).div_euclid(2 * njj);
                if q == 0 {
                    continue;
                }
                let q64 = i64::try_from(q).expect("reduction multiplier");
                let cand = rows[i] - q64 * rows[j];
                if form(&cand, &cand) < form(&rows[i], &rows[i]) {
                    rows[i] = cand;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    rows.sort_by(|a, b| form(a, a).cmp(&form(b, b)).then_with(|| b.cmp(a)));
}
