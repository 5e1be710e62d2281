//! Bracketing and bisection for real scalar functions on a finite interval.

use std::f64::consts::PI;

/// Smallest abscissa sampled by [`root_scan`] when the interval starts at zero.
pub const SCAN_FLOOR: f64 = 1e-7;

/// Magnitude below which a local minimum of `|f|` without a sign change counts as a root.
pub const EVEN_ROOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bracket {
    /// `f(lo)` and `f(hi)` have opposite signs.
    SignChange { lo: f64, hi: f64 },
    /// The function vanishes exactly at a grid point.
    Exact(f64),
    /// A touching zero (even multiplicity): `|f(x)| < EVEN_ROOT_TOL` at a local extremum.
    EvenMultiplicity { x: f64, value: f64 },
}

impl Bracket {
    /// A representative point inside the bracket.
    pub fn midpoint(&self) -> f64 {
        match *self {
            Bracket::SignChange { lo, hi } => 0.5 * (lo + hi),
            Bracket::Exact(x) => x,
            Bracket::EvenMultiplicity { x, .. } => x,
        }
    }
}

fn sample_points(x_lo: f64, x_hi: f64, density: usize) -> Vec<f64> {
    let step = (PI / (8.0 * density.max(1) as f64)).min((x_hi - x_lo) / 1e3);
    let mut xs = Vec::new();
    let mut start = x_lo;
    if x_lo <= 0.0 {
        // geometric lead-in resolves roots that crowd the origin
        let mut x = SCAN_FLOOR;
        while x < step {
            xs.push(x);
            x *= 1.05;
        }
        start = step;
    }
    let n = ((x_hi - start) / step).ceil() as usize;
    xs.extend((0..n).map(|i| start + i as f64 * step));
    xs.push(x_hi);
    xs
}

/// Finds every root of `f` on `(x_lo, x_hi]` resolvable on a grid of step
/// `min(π/(8·density), (x_hi − x_lo)/10³)`.
///
/// Sign changes are reported directly. Local minima of `|f|` with no sign change
/// are refined by golden-section search on `f`; a refined extremum that crosses
/// zero yields two sign-change brackets, one that only touches zero (below
/// [`EVEN_ROOT_TOL`]) yields an even-multiplicity bracket.
pub fn root_scan(f: impl Fn(f64) -> f64, x_lo: f64, x_hi: f64, density: usize) -> Vec<Bracket> {
    assert!(x_lo < x_hi, "root_scan needs x_lo < x_hi");
    let xs = sample_points(x_lo, x_hi, density);
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut out = Vec::new();
    for i in 0..xs.len() {
        if fs[i] == 0.0 {
            out.push(Bracket::Exact(xs[i]));
            continue;
        }
        if i + 1 < xs.len() && fs[i + 1] != 0.0 && fs[i].signum() != fs[i + 1].signum() {
            out.push(Bracket::SignChange { lo: xs[i], hi: xs[i + 1] });
            continue;
        }
        if i > 0 && i + 1 < xs.len() {
            let (a, b, c) = (fs[i - 1], fs[i], fs[i + 1]);
            let same = a.signum() == b.signum() && b.signum() == c.signum() && a != 0.0 && c != 0.0;
            if same && b.abs() <= a.abs() && b.abs() < c.abs() {
                out.extend(refine_touch(&f, xs[i - 1], xs[i + 1], b.signum()));
            }
        }
    }
    out
}

// golden-section search towards zero on the sign of f between two samples
fn refine_touch(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, sign: f64) -> Vec<Bracket> {
    let g = |x: f64| sign * f(x);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..200 {
        if gc <= 0.0 {
            return vec![Bracket::SignChange { lo, hi: c }, Bracket::SignChange { lo: c, hi }];
        }
        if gd <= 0.0 {
            return vec![Bracket::SignChange { lo, hi: d }, Bracket::SignChange { lo: d, hi }];
        }
        if (b - a).abs() <= 1e-15 * b.abs().max(1e-300) {
            break;
        }
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
    }
    let (x, v) = if gc < gd { (c, gc) } else { (d, gd) };
    if v < EVEN_ROOT_TOL {
        vec![Bracket::EvenMultiplicity { x, value: sign * v }]
    } else {
        Vec::new()
    }
}

/// Bisects a sign-change bracket until its width is below `rel_tol · |x|`.
pub fn bisect(f: impl Fn(f64) -> f64, lo: f64, hi: f64, rel_tol: f64) -> f64 {
    let (mut lo, mut hi) = (lo.min(hi), lo.max(hi));
    let mut flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rel_tol * mid.abs() || mid == lo || mid == hi {
            return mid;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::secular::{f_delta, f_star};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sign_changes(bs: &[Bracket]) -> Vec<(f64, f64)> {
        bs.iter()
            .filter_map(|b| match *b {
                Bracket::SignChange { lo, hi } => Some((lo, hi)),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn sin_brackets() {
        let bs = root_scan(f64::sin, 0.0, 10.0, 64);
        let sc = sign_changes(&bs);
        assert_eq!(bs.len(), 3);
        for (n, (lo, hi)) in sc.iter().enumerate() {
            let r = (n + 1) as f64 * PI;
            assert!(*lo <= r && r <= *hi);
            assert_abs_diff_eq!(bisect(f64::sin, *lo, *hi, 1e-12), r, epsilon = 1e-11);
        }
    }

    #[test]
    fn bare_delta_wire_has_nine_interior_brackets() {
        let bs = root_scan(|x| f_delta(0.0, 0.3, x).unwrap(), 0.0, 10.0 * PI, 64);
        // the endpoint 10π is a root of sin x but lies on the interval edge
        let interior = bs.iter().filter(|b| b.midpoint() < 10.0 * PI - 1e-6).count();
        assert_eq!(interior, 9);
    }

    #[test]
    fn exact_zero_on_grid() {
        let bs = root_scan(|x| x - 1.0, 0.5, 1.5, 64);
        assert_eq!(bs.len(), 1);
        assert_abs_diff_eq!(bs[0].midpoint(), 1.0, epsilon = 1e-3);
    }

    #[test]
    fn touching_and_near_touching_minima() {
        // double root off the grid
        let bs = root_scan(|x| (x - 2.00037).powi(2), 0.5, 3.5, 64);
        assert!(matches!(bs.as_slice(), [Bracket::EvenMultiplicity { .. }]), "{bs:?}");
        assert_abs_diff_eq!(bs[0].midpoint(), 2.00037, epsilon = 1e-4);
        // two simple roots closer than the grid step
        let (r1, r2) = (2.00037, 2.00037 + 1e-4);
        let f = |x: f64| (x - r1) * (x - r2);
        let bs = root_scan(f, 0.5, 3.5, 64);
        let sc = sign_changes(&bs);
        assert_eq!(sc.len(), 2, "{bs:?}");
        assert_abs_diff_eq!(bisect(f, sc[0].0, sc[0].1, 1e-14), r1, epsilon = 1e-12);
        assert_abs_diff_eq!(bisect(f, sc[1].0, sc[1].1, 1e-14), r2, epsilon = 1e-12);
        // a minimum well above zero is not a root
        assert!(root_scan(|x| (x - 2.0).powi(2) + 0.1, 0.5, 3.5, 64).is_empty());
    }

    #[test]
    fn roots_near_origin_are_resolved() {
        let bs = root_scan(|x| x - 3e-5, 0.0, 5.0, 64);
        assert_eq!(bs.len(), 1);
        assert_abs_diff_eq!(bisect(|x| x - 3e-5, bs[0].midpoint() * 0.9, bs[0].midpoint() * 1.1, 1e-12), 3e-5, epsilon = 1e-15);
    }

    // fine-scan oracle: 10x denser grid with plain sign counting
    #[test]
    fn dressed_star_counts_match_fine_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..30 {
            let (a, b, c) = (rng.gen_range(0.05..1.0), rng.gen_range(0.05..1.0), rng.gen_range(0.05..1.0));
            let g: f64 = rng.gen_range(-12.0..12.0);
            let f = |x: f64| f_star(g, a, b, c, x).unwrap();
            let hi = 60.0;
            let got = root_scan(f, 0.0, hi, 64).len();
            let step = PI / (8.0 * 640.0);
            let n = (hi / step) as usize;
            let xs: Vec<f64> = (1..=n).map(|i| i as f64 * step).collect();
            let want = xs.windows(2).filter(|w| f(w[0]).signum() != f(w[1]).signum()).count();
            assert_eq!(got, want, "a={a} b={b} c={c} g={g}");
        }
    }
}
