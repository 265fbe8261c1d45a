//! Matrix exponentials for Hermitian generators.
//!
//! Dense `exp(A)` uses scaling and squaring with the degree-13 Padé
//! approximant (Higham, 2005). The action `exp(-iHt)v` of a large sparse
//! Hermitian `H` uses a Chebyshev expansion whose coefficients are Bessel
//! functions: `e^{-iat} Σ_k (2 - δ_k0) (-i)^k J_k(bt) T_k((H - a)/b)` with the
//! spectrum of `H` inside `[a - b, a + b]`.

use crate::error::{Error, Result};
use crate::special::bessel_j_sequence;
use ndarray::Array2;
use num_complex::Complex64 as C64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn norm1(a: &Array2<C64>) -> f64 {
    (0..a.ncols()).map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Solves `A X = B` by LU with partial pivoting. `A` is consumed.
pub fn solve(mut a: Array2<C64>, mut b: Array2<C64>) -> Result<Array2<C64>> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(Error::Domain("solve: shape mismatch".into()));
    }
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[[i, k]].norm().total_cmp(&a[[j, k]].norm())).unwrap();
        if a[[p, k]].norm() == 0.0 {
            return Err(Error::Domain("solve: singular matrix".into()));
        }
        if p != k {
            for j in 0..n {
                a.swap([p, j], [k, j]);
            }
            for j in 0..b.ncols() {
                b.swap([p, j], [k, j]);
            }
        }
        let pivot = a[[k, k]];
        for i in k + 1..n {
            let f = a[[i, k]] / pivot;
            if f == ZERO {
                continue;
            }
            for j in k..n {
                let t = a[[k, j]];
                a[[i, j]] -= f * t;
            }
            for j in 0..b.ncols() {
                let t = b[[k, j]];
                b[[i, j]] -= f * t;
            }
        }
    }
    for j in 0..b.ncols() {
        for i in (0..n).rev() {
            let mut s = b[[i, j]];
            for k in i + 1..n {
                s -= a[[i, k]] * b[[k, j]];
            }
            b[[i, j]] = s / a[[i, i]];
        }
    }
    Ok(b)
}

/// `exp(A)` for a dense complex matrix.
pub fn expm(a: &Array2<C64>) -> Result<Array2<C64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Domain("expm: matrix must be square".into()));
    }
    let eye = Array2::<C64>::eye(n);
    let norm = norm1(a);
    if !norm.is_finite() {
        return Err(Error::Domain("expm: non-finite matrix".into()));
    }
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = a.mapv(|z| z / 2f64.powi(s));
    let b = PADE13.map(|x| C64::new(x, 0.0));
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let u_inner = &a6 * b[13] + &a4 * b[11] + &a2 * b[9];
    let u = a.dot(&(a6.dot(&u_inner) + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &eye * b[1]));
    let v_inner = &a6 * b[12] + &a4 * b[10] + &a2 * b[8];
    let v = a6.dot(&v_inner) + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &eye * b[0];
    let mut r = solve(&v - &u, &v + &u)?;
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(r)
}

/// Largest elementwise deviation `|A_ij - conj(A_ji)|`.
pub fn hermitian_deviation(a: &Array2<C64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    worst
}

/// Frobenius norm of `U†U - 1`, an upper bound on its operator norm.
pub fn unitarity_defect(u: &Array2<C64>) -> f64 {
    let uh = u.t().mapv(|z| z.conj());
    let mut p = uh.dot(u);
    for i in 0..p.nrows() {
        p[[i, i]] -= ONE;
    }
    p.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Chebyshev evaluation of `exp(-iHt) v`.
///
/// `apply(x, y)` must write `y = Hx`; `bounds` must enclose the spectrum of H.
/// Returns the result and the number of matrix-vector products used.
pub fn chebyshev_expm_action<F>(apply: F, bounds: (f64, f64), t: f64, v: &[C64]) -> (Vec<C64>, usize)
where
    F: Fn(&[C64], &mut [C64]),
{
    let (lo, hi) = bounds;
    let pad = 1e-12 * lo.abs().max(hi.abs()).max(1.0);
    let centre = 0.5 * (hi + lo);
    let half = 0.5 * (hi - lo) + pad;
    let x = half * t;
    let global = C64::from_polar(1.0, -centre * t);
    if x.abs() < 1e-300 {
        return (v.iter().map(|z| z * global).collect(), 0);
    }
    let k_max = (x.abs() + 12.0 * x.abs().cbrt() + 40.0).ceil() as usize;
    let jk = bessel_j_sequence(k_max, x);
    let last = jk
        .iter()
        .enumerate()
        .rposition(|(k, j)| k as f64 <= x.abs() || j.abs() > 1e-18)
        .unwrap_or(0);

    let n = v.len();
    let scaled = |src: &[C64], dst: &mut [C64]| {
        apply(src, dst);
        for (d, s) in dst.iter_mut().zip(src) {
            *d = (*d - s * centre) / half;
        }
    };
    let mut out: Vec<C64> = v.iter().map(|z| z * jk[0]).collect();
    if last == 0 {
        return (out.iter().map(|z| z * global).collect(), 0);
    }
    let mut prev = v.to_vec();
    let mut cur = vec![ZERO; n];
    scaled(&prev, &mut cur);
    let mut phase = C64::new(0.0, -1.0);
    let c1 = phase * (2.0 * jk[1]);
    for (o, c) in out.iter_mut().zip(&cur) {
        *o += c * c1;
    }
    let mut next = vec![ZERO; n];
    for &jv in jk.iter().take(last + 1).skip(2) {
        scaled(&cur, &mut next);
        phase *= C64::new(0.0, -1.0);
        let ck = phase * (2.0 * jv);
        for i in 0..n {
            let t = next[i] * 2.0 - prev[i];
            next[i] = t;
            out[i] += t * ck;
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    (out.iter().map(|z| z * global).collect(), last)
}

/// Gershgorin enclosure `[min(d_i - r_i), max(d_i + r_i)]` of a Hermitian
/// matrix given its diagonal and absolute off-diagonal row sums.
pub fn gershgorin_bounds(diag: &[f64], radii: &[f64]) -> (f64, f64) {
    diag.iter().zip(radii).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (d, r)| (lo.min(d - r), hi.max(d + r)))
}
