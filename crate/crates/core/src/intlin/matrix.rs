//! Small dense integer matrices: Hermite and Smith forms, kernels, determinants, inertia.
//!
//! Everything is exact. Entries are `i128`; the matrices handled here are at most
//! 10×10 with small entries, so intermediate growth stays far from the limit.

use num_rational::Ratio;

pub type IntMatrix = Vec<Vec<i128>>;
pub type Rational = Ratio<i128>;

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    // returns (g, x, y) with a x + b y = g >= 0
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// Row-style Hermite normal form with the accumulated unimodular transform.
///
/// Returns `(h, u)` with `u · a = h`, `u` unimodular, `h` in row echelon form with
/// positive pivots and entries above each pivot reduced into `[0, pivot)`.
pub fn hermite_normal_form(a: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let m = a.len();
    let n = if m == 0 { 0 } else { a[0].len() };
    let mut h = a.clone();
    let mut u: IntMatrix = (0..m)
        .map(|i| (0..m).map(|j| i128::from(i == j)).collect())
        .collect();
    let mut row = 0;
    for col in 0..n {
        if row == m {
            break;
        }
        for i in row + 1..m {
            if h[i][col] == 0 {
                continue;
            }
            let (g, x, y) = ext_gcd(h[row][col], h[i][col]);
            let p = h[row][col] / g;
            let q = h[i][col] / g;
            // [x y; -q p] has determinant x p + y q = 1
            for mat in [&mut h, &mut u] {
                let (top, bottom) = mat.split_at_mut(i);
                let r0 = &mut top[row];
                let r1 = &mut bottom[0];
                for c in 0..r0.len() {
                    let a0 = r0[c];
                    let a1 = r1[c];
                    r0[c] = x * a0 + y * a1;
                    r1[c] = -q * a0 + p * a1;
                }
            }
        }
        if h[row][col] == 0 {
            continue;
        }
        if h[row][col] < 0 {
            for c in 0..n {
                h[row][c] = -h[row][c];
            }
            for c in 0..m {
                u[row][c] = -u[row][c];
            }
        }
        let piv = h[row][col];
        for i in 0..row {
            let q = h[i][col].div_euclid(piv);
            if q != 0 {
                for c in 0..n {
                    h[i][c] -= q * h[row][c];
                }
                for c in 0..m {
                    u[i][c] -= q * u[row][c];
                }
            }
        }
        row += 1;
    }
    (h, u)
}

/// Basis of the left kernel `{x : x · a = 0}` as rows, via the Hermite transform.
///
/// The kernel of an integer matrix is always saturated in `ℤ^m`, and the rows
/// returned here are a basis of it (they are rows of a unimodular matrix).
pub fn left_kernel(a: &IntMatrix) -> IntMatrix {
    let (h, u) = hermite_normal_form(a);
    h.iter()
        .zip(u)
        .filter(|(row, _)| row.iter().all(|&x| x == 0))
        .map(|(_, urow)| urow)
        .collect()
}

/// Invariant factors (diagonal of the Smith normal form), including trailing zeros.
pub fn smith_invariants(a: &IntMatrix) -> Vec<i128> {
    let mut m = a.clone();
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut diag = Vec::new();
    for k in 0..rows.min(cols) {
        loop {
            // smallest nonzero entry of the trailing block becomes the pivot
            let mut best: Option<(usize, usize)> = None;
            for i in k..rows {
                for j in k..cols {
                    if m[i][j] != 0 && best.map_or(true, |(bi, bj)| m[i][j].abs() < m[bi][bj].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                diag.extend(std::iter::repeat(0).take(rows.min(cols) - k));
                return diag;
            };
            m.swap(k, pi);
            for row in m.iter_mut() {
                row.swap(k, pj);
            }
            let piv = m[k][k];
            let mut clean = true;
            for i in k + 1..rows {
                let q = m[i][k] / piv;
                if q != 0 {
                    for j in k..cols {
                        m[i][j] -= q * m[k][j];
                    }
                }
                clean &= m[i][k] == 0;
            }
            for j in k + 1..cols {
                let q = m[k][j] / piv;
                if q != 0 {
                    for row in m.iter_mut().skip(k) {
                        row[j] -= q * row[k];
                    }
                }
                clean &= m[k][j] == 0;
            }
            if !clean {
                continue;
            }
            // divisibility: fold any offending row into row k and retry
            let bad = (k + 1..rows).find(|&i| (k + 1..cols).any(|j| m[i][j] % piv != 0));
            match bad {
                Some(i) => {
                    for j in k..cols {
                        m[k][j] += m[i][j];
                    }
                }
                None => {
                    diag.push(piv.abs());
                    break;
                }
            }
        }
    }
    diag
}

/// Determinant by fraction-free (Bareiss) elimination.
pub fn determinant(a: &IntMatrix) -> i128 {
    let n = a.len();
    if n == 0 {
        return 1;
    }
    let mut m = a.clone();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            match (k + 1..n).find(|&i| m[i][k] != 0) {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

/// Rank over ℚ.
pub fn rank(a: &IntMatrix) -> usize {
    let (h, _) = hermite_normal_form(a);
    h.iter().filter(|r| r.iter().any(|&x| x != 0)).count()
}

/// Counts of (positive, negative, zero) eigenvalues of a symmetric matrix,
/// by symmetric congruence diagonalization over ℚ.
pub fn inertia(a: &IntMatrix) -> (usize, usize, usize) {
    let n = a.len();
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .map(|r| r.iter().map(|&x| Rational::from_integer(x)).collect())
        .collect();
    let zero = Rational::from_integer(0);
    let (mut pos, mut neg) = (0, 0);
    for k in 0..n {
        if m[k][k] == zero {
            if let Some(i) = (k + 1..n).find(|&i| m[i][i] != zero) {
                m.swap(k, i);
                for row in m.iter_mut() {
                    row.swap(k, i);
                }
            } else if let Some(j) = (k + 1..n).find(|&j| m[k][j] != zero) {
                // row/col k += row/col j makes the diagonal 2 m[k][j] + m[j][j] = 2 m[k][j]
                for c in 0..n {
                    let v = m[j][c];
                    m[k][c] += v;
                }
                for r in 0..n {
                    let v = m[r][j];
                    m[r][k] += v;
                }
            } else {
                continue;
            }
        }
        let piv = m[k][k];
        if piv == zero {
            continue;
        }
        if piv > zero {
            pos += 1;
        } else {
            neg += 1;
        }
        for i in k + 1..n {
            let f = m[i][k] / piv;
            if f == zero {
                continue;
            }
            for j in k..n {
                let v = m[k][j];
                m[i][j] -= f * v;
            }
        }
        for j in k + 1..n {
            m[k][j] = zero;
        }
        for i in k + 1..n {
            m[i][k] = zero;
        }
    }
    (pos, neg, n - pos - neg)
}

/// Solves `x · rows = target` over ℚ; returns the integral solution if it exists and is unique.
pub fn solve_integer_combination(rows: &[Vec<i128>], target: &[i128]) -> Option<Vec<i128>> {
    let k = rows.len();
    let n = target.len();
    // columns of the system are the rows; build augmented n × (k+1)
    let mut m: Vec<Vec<Rational>> = (0..n)
        .map(|c| {
            let mut r: Vec<Rational> = rows.iter().map(|row| Rational::from_integer(row[c])).collect();
            r.push(Rational::from_integer(target[c]));
            r
        })
        .collect();
    let zero = Rational::from_integer(0);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..k {
        let Some(p) = (r..n).find(|&i| m[i][c] != zero) else {
            return None;
        };
        m.swap(r, p);
        let piv = m[r][c];
        for j in c..=k {
            m[r][j] /= piv;
        }
        for i in 0..n {
            if i != r && m[i][c] != zero {
                let f = m[i][c];
                for j in c..=k {
                    let v = m[r][j];
                    m[i][j] -= f * v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if (r..n).any(|i| m[i][k] != zero) {
        return None;
    }
    let mut x = vec![0i128; k];
    for (i, &c) in pivots.iter().enumerate() {
        let v = m[i][k];
        if !v.is_integer() {
            return None;
        }
        x[c] = v.to_integer();
    }
    Some(x)
}
