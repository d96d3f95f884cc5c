use num_complex::Complex64;

use super::{cx, norm, require_finite, require_square, CMatrix};
use crate::error::{PairError, Result};

/// Complex Schur form `m = q t q*`, `t` upper triangular, `q` unitary.
#[derive(Debug, Clone)]
pub struct Schur {
    pub q: CMatrix,
    pub t: CMatrix,
}

impl Schur {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.t.nrows()).map(|i| self.t[(i, i)]).collect()
    }
}

/// Rotation `g = [[c, s], [−s̄, c]]` with `g (a, b)ᵀ = (r, 0)ᵀ`, `c` real.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, cx(0.0, 0.0));
    }
    if na == 0.0 {
        return (0.0, cx(1.0, 0.0));
    }
    let r = na.hypot(nb);
    let c = na / r;
    let s = (a / na) * b.conj() / r;
    (c, s)
}

fn rot_rows(m: &mut CMatrix, k: usize, c: f64, s: Complex64, cols: std::ops::Range<usize>) {
    for j in cols {
        let x = m[(k, j)];
        let y = m[(k + 1, j)];
        m[(k, j)] = x * c + s * y;
        m[(k + 1, j)] = y * c - s.conj() * x;
    }
}

fn rot_cols(m: &mut CMatrix, k: usize, c: f64, s: Complex64, rows: std::ops::Range<usize>) {
    for i in rows {
        let x = m[(i, k)];
        let y = m[(i, k + 1)];
        m[(i, k)] = x * c + y * s.conj();
        m[(i, k + 1)] = y * c - x * s;
    }
}

fn hessenberg(a: &mut CMatrix, q: &mut CMatrix) {
    let n = a.nrows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let len = n - k - 1;
        let x: Vec<Complex64> = (0..len).map(|i| a[(k + 1 + i, k)]).collect();
        let xn = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xn == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 { cx(1.0, 0.0) } else { x[0] / x[0].norm() };
        let alpha = -phase * xn;
        let mut v = x.clone();
        v[0] -= alpha;
        let vn = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vn;
        }
        // a <- (I - 2vv*) a on rows k+1.., then a <- a (I - 2vv*) on cols k+1..
        for j in 0..n {
            let mut dot = cx(0.0, 0.0);
            for i in 0..len {
                dot += v[i].conj() * a[(k + 1 + i, j)];
            }
            for i in 0..len {
                a[(k + 1 + i, j)] -= v[i] * dot * 2.0;
            }
        }
        for i in 0..n {
            let mut dot = cx(0.0, 0.0);
            for j in 0..len {
                dot += a[(i, k + 1 + j)] * v[j];
            }
            for j in 0..len {
                a[(i, k + 1 + j)] -= dot * v[j].conj() * 2.0;
            }
        }
        for i in 0..n {
            let mut dot = cx(0.0, 0.0);
            for j in 0..len {
                dot += q[(i, k + 1 + j)] * v[j];
            }
            for j in 0..len {
                q[(i, k + 1 + j)] -= dot * v[j].conj() * 2.0;
            }
        }
        for i in (k + 2)..n {
            a[(i, k)] = cx(0.0, 0.0);
        }
    }
}

/// Complex Schur decomposition by Hessenberg reduction and single-shift QR
/// with Wilkinson shifts.
pub fn schur(m: &CMatrix) -> Result<Schur> {
    let n = require_square(m)?;
    require_finite(m)?;
    let mut t = m.clone();
    let mut q = CMatrix::identity(n, n);
    hessenberg(&mut t, &mut q);
    let anorm = norm(&t).max(f64::MIN_POSITIVE);
    let eps = f64::EPSILON;
    let budget = 60 * n.max(1);
    let mut iter_total = 0usize;
    let mut iter_here = 0usize;
    let mut hi = n;
    while hi > 1 {
        let h = hi - 1;
        // find lowest l with negligible subdiagonal entry at l
        let mut l = h;
        while l > 0 {
            let s = t[(l - 1, l - 1)].norm() + t[(l, l)].norm();
            let s = if s == 0.0 { anorm } else { s };
            if t[(l, l - 1)].norm() <= eps * s {
                t[(l, l - 1)] = cx(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == h {
            hi -= 1;
            iter_here = 0;
            continue;
        }
        iter_total += 1;
        iter_here += 1;
        if iter_total > budget {
            return Err(PairError::NoConvergence("complex QR iteration budget exhausted".into()));
        }
        let mu = if iter_here % 11 == 10 {
            // exceptional shift
            t[(h, h)] + cx(0.75, 0.5) * t[(h, h - 1)].norm()
        } else {
            let a = t[(h - 1, h - 1)];
            let b = t[(h - 1, h)];
            let c = t[(h, h - 1)];
            let d = t[(h, h)];
            let tr = (a + d) * 0.5;
            let disc = ((a - d) * 0.5 * ((a - d) * 0.5) + b * c).sqrt();
            let e1 = tr + disc;
            let e2 = tr - disc;
            if (e1 - d).norm() <= (e2 - d).norm() {
                e1
            } else {
                e2
            }
        };
        // explicit shifted QR step on the active window l..=h
        for i in l..=h {
            t[(i, i)] -= mu;
        }
        let mut rots = Vec::with_capacity(h - l);
        for k in l..h {
            let (c, s) = givens(t[(k, k)], t[(k + 1, k)]);
            rot_rows(&mut t, k, c, s, k..n);
            t[(k + 1, k)] = cx(0.0, 0.0);
            rots.push((k, c, s));
        }
        for &(k, c, s) in &rots {
            rot_cols(&mut t, k, c, s, 0..(k + 2).min(hi));
            rot_cols(&mut q, k, c, s, 0..n);
        }
        for i in l..=h {
            t[(i, i)] += mu;
        }
        // rows above l also see the column rotations; rows in the window below
        // k+2 are handled above. Columns beyond hi saw the row rotations.
    }
    for i in 0..n {
        for j in 0..i {
            t[(i, j)] = cx(0.0, 0.0);
        }
    }
    Ok(Schur { q, t })
}

/// All eigenvalues with algebraic multiplicity.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    Ok(schur(m)?.eigenvalues())
}

/// Reorder a Schur form so the selected diagonal entries come first,
/// preserving relative order within each group.
pub fn reorder_schur(s: &Schur, select: &[bool]) -> Schur {
    let n = s.t.nrows();
    let mut t = s.t.clone();
    let mut q = s.q.clone();
    let mut sel = select.to_vec();
    let mut dest = 0;
    for i in 0..n {
        if !sel[i] {
            continue;
        }
        let mut k = i;
        while k > dest {
            swap_adjacent(&mut t, &mut q, k - 1);
            sel.swap(k - 1, k);
            k -= 1;
        }
        dest += 1;
    }
    Schur { q, t }
}

fn swap_adjacent(t: &mut CMatrix, q: &mut CMatrix, k: usize) {
    let n = t.nrows();
    let t11 = t[(k, k)];
    let t22 = t[(k + 1, k + 1)];
    let (c, s) = givens(t[(k, k + 1)], t22 - t11);
    if k + 2 < n {
        rot_rows(t, k, c, s, (k + 2)..n);
    }
    rot_cols(t, k, c, s, 0..k);
    t[(k, k)] = t22;
    t[(k + 1, k + 1)] = t11;
    rot_cols(q, k, c, s, 0..n);
}
