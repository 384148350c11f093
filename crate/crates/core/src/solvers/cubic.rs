use nalgebra::Matrix3;

use crate::error::{invalid, Result};

/// Real roots of `c3 x^3 + c2 x^2 + c1 x + c0`, ascending, repeated roots
/// reported once.
///
/// Roots come from the eigenvalues of the companion matrix and are polished
/// with a few Newton steps. When the leading coefficient is negligible the
/// polynomial is solved as a quadratic or linear equation instead.
pub fn solve_cubic(c3: f64, c2: f64, c1: f64, c0: f64) -> Result<Vec<f64>> {
    let scale = c3.abs().max(c2.abs()).max(c1.abs()).max(c0.abs());
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(invalid("polynomial is identically zero or non-finite"));
    }
    let (c3, c2, c1, c0) = (c3 / scale, c2 / scale, c1 / scale, c0 / scale);
    let eval = |x: f64| ((c3 * x + c2) * x + c1) * x + c0;
    let deriv = |x: f64| (3.0 * c3 * x + 2.0 * c2) * x + c1;
    let accept = |x: f64| eval(x).abs() <= 1e-8 * 1f64.max(x.abs().powi(3));

    let mut roots = if c3.abs() <= 1e-12 {
        solve_quadratic(c2, c1, c0)
    } else {
        let companion = Matrix3::new(
            -c2 / c3,
            -c1 / c3,
            -c0 / c3,
            1.0,
            0.0,
            0.0,
            0.0,
            1.0,
            0.0,
        );
        companion
            .complex_eigenvalues()
            .iter()
            .filter(|z| z.im.abs() <= 1e-8 * (1.0 + z.re.abs()) || accept(z.re))
            .map(|z| z.re)
            .collect()
    };

    for r in roots.iter_mut() {
        for _ in 0..4 {
            let d = deriv(*r);
            if d == 0.0 {
                break;
            }
            let next = *r - eval(*r) / d;
            if !next.is_finite() || eval(next).abs() >= eval(*r).abs() {
                break;
            }
            *r = next;
        }
    }
    roots.retain(|&r| r.is_finite());
    roots.sort_by(f64::total_cmp);
    // Clustered eigenvalues of a multiple root merge when the polynomial stays
    // negligible between them.
    roots.dedup_by(|a, b| {
        let gap = (*a - *b).abs();
        gap <= 1e-6 * (1.0 + b.abs())
            || (gap <= 1e-3 * (1.0 + b.abs()) && accept(0.5 * (*a + *b)))
    });
    // A multiple root is a simple root of the derivative, where Newton
    // converges quadratically again.
    let second = |x: f64| 6.0 * c3 * x + 2.0 * c2;
    for r in roots.iter_mut() {
        let mut x = *r;
        for _ in 0..8 {
            let d2 = second(x);
            if d2 == 0.0 {
                break;
            }
            let next = x - deriv(x) / d2;
            if !next.is_finite() {
                break;
            }
            x = next;
        }
        if (x - *r).abs() <= 1e-3 * (1.0 + r.abs()) && eval(x).abs() <= eval(*r).abs() {
            *r = x;
        }
    }
    Ok(roots)
}

fn solve_quadratic(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a.abs() <= 1e-12 {
        if b.abs() <= 1e-12 {
            return Vec::new();
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < -1e-12 * (b * b).max((4.0 * a * c).abs()) {
        return Vec::new();
    }
    let sq = disc.max(0.0).sqrt();
    // Numerically stable pairing of the two roots.
    let q = -0.5 * (b + b.signum() * sq);
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / a, c / q]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_roots(got: &[f64], want: &[f64]) {
        assert_eq!(got.len(), want.len(), "{got:?} vs {want:?}");
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-9, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn documented_examples() {
        assert_roots(&solve_cubic(1.0, 0.0, 0.0, -1.0).unwrap(), &[1.0]);
        assert_roots(&solve_cubic(1.0, 0.0, -1.0, 0.0).unwrap(), &[-1.0, 0.0, 1.0]);
        assert_roots(&solve_cubic(1.0, -3.0, 0.0, 4.0).unwrap(), &[-1.0, 2.0]);
    }

    #[test]
    fn degrades_to_lower_degree() {
        assert_roots(&solve_cubic(0.0, 1.0, 0.0, -4.0).unwrap(), &[-2.0, 2.0]);
        assert_roots(&solve_cubic(0.0, 0.0, 2.0, -1.0).unwrap(), &[0.5]);
        assert!(solve_cubic(0.0, 0.0, 0.0, 3.0).unwrap().is_empty());
        assert!(solve_cubic(0.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn triple_root() {
        // (x - 1)^3
        let r = solve_cubic(1.0, -3.0, 3.0, -1.0).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0] - 1.0).abs() < 1e-4);
    }
}
