//! Integer-order Bessel functions of the first kind.
//!
//! `J_0..J_n(x)` are generated together by Miller's backward recurrence,
//! normalized with `J_0 + 2 Σ J_2k = 1`. Forward recurrence is unstable for
//! `n > x` and is never used.

/// `J_0(x), …, J_{n_max}(x)` for real `x`.
pub fn bessel_j_sequence(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    // start index well past both n_max and the turning point x
    let top = n_max.max(ax.ceil() as usize);
    let mut start = top + 20 + (12.0 * ax.cbrt()).ceil() as usize + (ax.sqrt()).ceil() as usize;
    if start % 2 == 1 {
        start += 1;
    }

    let two_over_x = 2.0 / ax;
    let mut next = 0.0f64; // j_{k+1}
    let mut cur = 1e-300f64; // j_k
    let mut norm = 0.0f64;
    for k in (1..=start).rev() {
        if k <= n_max {
            out[k] = cur;
        }
        if k % 2 == 0 {
            norm += 2.0 * cur;
        }
        let prev = k as f64 * two_over_x * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > 1e250 {
            let s = 1e-250;
            cur *= s;
            next *= s;
            norm *= s;
            for v in out.iter_mut().skip(k.saturating_sub(1)) {
                *v *= s;
            }
        }
    }
    out[0] = cur;
    norm += cur;
    for v in out.iter_mut() {
        *v /= norm;
    }
    if x < 0.0 {
        for (n, v) in out.iter_mut().enumerate() {
            if n % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

/// `J_n(x)` for any integer order.
pub fn bessel_j(n: i64, x: f64) -> f64 {
    let m = n.unsigned_abs() as usize;
    let v = bessel_j_sequence(m, x)[m];
    if n < 0 && m % 2 == 1 {
        -v
    } else {
        v
    }
}

/// Derivative `J_n'(x) = (J_{n-1}(x) - J_{n+1}(x))/2`.
pub fn bessel_j_prime(n: i64, x: f64) -> f64 {
    0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x))
}

/// First positive maximum of `J_m(x)` (m ≥ 1) and its value.
pub fn first_bessel_maximum(m: i64) -> (f64, f64) {
    // J_m' has its first zero between m and m + 2 m^{1/3} + 2
    let mut lo = (m as f64).max(0.5) * 0.5;
    let mut hi = m as f64 + 2.0 * (m as f64).cbrt() + 2.0;
    debug_assert!(bessel_j_prime(m, lo) > 0.0 && bessel_j_prime(m, hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if bessel_j_prime(m, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * hi {
            break;
        }
    }
    let x = 0.5 * (lo + hi);
    (x, bessel_j(m, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// `J_n(x) = (1/π) ∫_0^π cos(nτ - x sin τ) dτ`; the trapezoid rule is
    /// spectrally accurate for this periodic integrand.
    fn bessel_quadrature(n: i64, x: f64) -> f64 {
        let pts = 4 * (x.abs().ceil() as usize + n.unsigned_abs() as usize) + 400;
        let h = 2.0 * PI / pts as f64;
        let s: f64 = (0..pts).map(|k| {
            let t = k as f64 * h;
            (n as f64 * t - x * t.sin()).cos()
        }).sum();
        s / pts as f64
    }

    fn bessel_series(n: u32, x: f64) -> f64 {
        let mut term = (0.5 * x).powi(n as i32) / (1..=n).map(f64::from).product::<f64>();
        let mut s = term;
        for k in 1..80 {
            term *= -(0.25 * x * x) / (k as f64 * (k + n) as f64);
            s += term;
        }
        s
    }

    #[test]
    fn matches_series_small_argument() {
        for &x in &[0.1, 0.5, 1.0, 2.0, 5.0] {
            for n in 0..12 {
                let a = bessel_j(n as i64, x);
                let b = bessel_series(n, x);
                assert!((a - b).abs() < 1e-13, "n={n} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn matches_quadrature_large_argument() {
        for &x in &[10.0, 25.0, 50.0, 137.3, 400.0] {
            let seq = bessel_j_sequence(x as usize + 60, x);
            for n in (0..seq.len()).step_by(7) {
                let q = bessel_quadrature(n as i64, x);
                assert!((seq[n] - q).abs() < 1e-12, "n={n} x={x}: {} vs {q}", seq[n]);
            }
        }
    }

    #[test]
    fn known_values() {
        assert!((bessel_j(0, 2.0) - 0.223_890_779_141_235_67).abs() < 1e-15);
        assert!((bessel_j(1, 2.0) - 0.576_724_807_756_873_4).abs() < 1e-15);
        assert_eq!(bessel_j(3, 0.0), 0.0);
        assert_eq!(bessel_j(0, 0.0), 1.0);
    }

    #[test]
    fn negative_order_and_argument() {
        for n in 1..6i64 {
            let s = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((bessel_j(-n, 3.3) - s * bessel_j(n, 3.3)).abs() < 1e-15);
            assert!((bessel_j(n, -3.3) - s * bessel_j(n, 3.3)).abs() < 1e-15);
        }
    }

    #[test]
    fn deep_tail_does_not_underflow_to_garbage() {
        let s = bessel_j_sequence(80, 1.0);
        assert!(s[80] >= 0.0 && s[80] < 1e-100);
        assert!(s.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn first_maximum_of_j1() {
        let (x, v) = first_bessel_maximum(1);
        assert!((x - 1.841_183_781_340_659).abs() < 1e-10, "{x}");
        assert!((v - 0.581_865_224_306_535).abs() < 1e-10);
    }
}
