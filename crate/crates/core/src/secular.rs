//! Secular (characteristic) functions of the supported topologies.
//!
//! Every function takes the dimensionless argument `x = kL` (positive energy) or
//! `x = κL` (bound states, `E = -κ²/2`) with `L` the total graph length, and is
//! written as a sum of sine (or sinh) products, which stays accurate down to
//! `x → 0⁺` without cancellation. Roots of the positive branch are the
//! eigen-wavenumbers; the negative branch is the real factor left after `k → iκ`.

use crate::error::{Error, Result};
use crate::graph::{GraphSpec, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Branch {
    /// `E = k²/2 > 0`, argument `kL`.
    Positive,
    /// `E = -κ²/2 < 0`, argument `κL`.
    Negative,
}

fn check_arg(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("secular argument must be positive and finite, got {x}")))
    }
}

fn check_lengths(lengths: &[f64]) -> Result<()> {
    if lengths.iter().all(|l| l.is_finite() && *l > 0.0) {
        Ok(())
    } else {
        Err(Error::Domain(format!("degenerate geometry {lengths:?}")))
    }
}

/// Single-delta wire, positive energy: `-(1/x)[g(cos x - cos ωx) - x sin x]`.
pub fn f_delta(g: f64, omega: f64, x: f64) -> Result<f64> {
    check_arg(x)?;
    if omega.abs() >= 1.0 {
        return Err(Error::Domain(format!("|ω| must be < 1, got {omega}")));
    }
    Ok(wire1(g, omega, x, Kernel::Trig))
}

/// Single-delta wire, negative energy: `(1/x)[g(cosh x - cosh ωx) + x sinh x]`.
pub fn f_delta_neg(g: f64, omega: f64, x: f64) -> Result<f64> {
    check_arg(x)?;
    if omega.abs() >= 1.0 {
        return Err(Error::Domain(format!("|ω| must be < 1, got {omega}")));
    }
    Ok(wire1(g, omega, x, Kernel::Hyper))
}

// cos ωx - cos x = 2 sin(ax) sin(bx) with a = (1+ω)/2, b = (1-ω)/2.
fn wire1(g: f64, omega: f64, x: f64, kern: Kernel) -> f64 {
    let (a, b) = (0.5 * (1.0 + omega), 0.5 * (1.0 - omega));
    let s = |y| kern.s(y);
    s(x) + 2.0 * g / x * s(a * x) * s(b * x)
}

/// Critical strength below which a single-delta wire binds: `g_c = 2/(ω² - 1)`.
pub fn critical_strength_wire(omega: f64) -> Result<f64> {
    if omega.abs() >= 1.0 || !omega.is_finite() {
        return Err(Error::Domain(format!("|ω| must be < 1, got {omega}")));
    }
    Ok(2.0 / (omega * omega - 1.0))
}

/// Two-delta wire with outer pieces `a` (left), `b` (right) and middle piece `c`, expanded form.
pub fn f_2delta(g1: f64, g2: f64, a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    check_arg(x)?;
    check_lengths(&[a, b, c])?;
    Ok(wire2(g1, g2, a, b, c, x, Kernel::Trig))
}

/// Hyperbolic counterpart of [`f_2delta`] (the real factor `-i F̃(iκ)`).
pub fn f_2delta_neg(g1: f64, g2: f64, a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    check_arg(x)?;
    check_lengths(&[a, b, c])?;
    Ok(wire2(g1, g2, a, b, c, x, Kernel::Hyper))
}

fn wire2(g1: f64, g2: f64, a: f64, b: f64, c: f64, x: f64, kern: Kernel) -> f64 {
    let s = |y| kern.s(y);
    let l = a + b + c;
    let (ka, kb, kc) = (x * a / l, x * b / l, x * c / l);
    let (sa, sb, sc) = (s(ka), s(kb), s(kc));
    4.0 * g1 * g2 * sa * sb * sc / (x * x)
        + 2.0 / x * (g1 * sa * s(kb + kc) + g2 * sb * s(ka + kc))
        + s(x)
}

/// Series coefficients `(C1, C3, C5)` of the two-delta negative-energy function in `κL`.
pub fn coeffs_2delta_neg(g1: f64, g2: f64, a: f64, b: f64, c: f64) -> Result<(f64, f64, f64)> {
    check_lengths(&[a, b, c])?;
    let l = a + b + c;
    let (l1, l2) = (a + c, b + c);
    let m = 120.0 / 36.0; // 5!/(3!3!)
    let c1 = 4.0 * g1 * g2 * a * b * c / l.powi(3) + 2.0 * g1 * a * l2 / l.powi(2) + 2.0 * g2 * b * l1 / l.powi(2) + 1.0;
    let c3 = 4.0 * g1 * g2 * a * b * c * (a * a + b * b + c * c) / l.powi(5)
        + 2.0 * g1 * (a * l2.powi(3) + a.powi(3) * l2) / l.powi(4)
        + 2.0 * g2 * (b * l1.powi(3) + b.powi(3) * l1) / l.powi(4)
        + 1.0;
    let c5 = 4.0 * g1 * g2 * a * b * c * (a.powi(4) + b.powi(4) + c.powi(4) + m * (a * a * b * b + a * a * c * c + b * b * c * c))
        / l.powi(7)
        + 2.0 * g1 * (a * l2.powi(5) + a.powi(5) * l2 + m * a.powi(3) * l2.powi(3)) / l.powi(6)
        + 2.0 * g2 * (b * l1.powi(5) + b.powi(5) * l1 + m * b.powi(3) * l1.powi(3)) / l.powi(6)
        + 1.0;
    Ok((c1, c3, c5))
}

/// Upper bound on `g1` for a bound state of the two-delta wire when `C1 < 0` decides it.
///
/// Returns `None` when the denominator `aLL₂ + 2g₂abc` is not positive (the
/// inequality flips or degenerates and the leading coefficient alone cannot decide).
pub fn bound_threshold_2delta(g2: f64, a: f64, b: f64, c: f64) -> Result<Option<f64>> {
    check_lengths(&[a, b, c])?;
    let l = a + b + c;
    let (l1, l2) = (a + c, b + c);
    let den = a * l * l2 + 2.0 * g2 * a * b * c;
    if den <= 0.0 {
        return Ok(None);
    }
    Ok(Some(-0.5 * (l.powi(3) + 2.0 * g2 * b * l * l1) / den))
}

/// Three-delta wire with pieces `a, b, c, d` left to right, expanded form divided by `(kL)³`.
pub fn f_3delta(g1: f64, g2: f64, g3: f64, a: f64, b: f64, c: f64, d: f64, x: f64) -> Result<f64> {
    check_arg(x)?;
    check_lengths(&[a, b, c, d])?;
    Ok(wire3([g1, g2, g3], [a, b, c, d], x, Kernel::Trig))
}

pub fn f_3delta_neg(g1: f64, g2: f64, g3: f64, a: f64, b: f64, c: f64, d: f64, x: f64) -> Result<f64> {
    check_arg(x)?;
    check_lengths(&[a, b, c, d])?;
    Ok(wire3([g1, g2, g3], [a, b, c, d], x, Kernel::Hyper))
}

fn wire3(g: [f64; 3], p: [f64; 4], x: f64, kern: Kernel) -> f64 {
    let s = |y| kern.s(y);
    let l: f64 = p.iter().sum();
    let [ka, kb, kc, kd] = p.map(|v| x * v / l);
    let (sa, sb, sc, sd) = (s(ka), s(kb), s(kc), s(kd));
    let (s1, s2, s3) = (s(ka + kb), s(kb + kc), s(kc + kd));
    let [g1, g2, g3] = g;
    8.0 * g1 * g2 * g3 * sa * sb * sc * sd / (x * x * x)
        + 4.0 / (x * x) * (g1 * g2 * sa * sb * s3 + g2 * g3 * sc * sd * s1 + g1 * g3 * sa * sd * s2)
        + 2.0 / x * (g1 * sa * s(kb + kc + kd) + g3 * sd * s(ka + kb + kc) + g2 * s1 * s3)
        + s(x)
}

/// Dressed three-star with a delta at the central vertex.
pub fn f_star(g: f64, a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    check_arg(x)?;
    check_lengths(&[a, b, c])?;
    Ok(star(g, a, b, c, x, Kernel::Trig))
}

/// `(1/4)[cosh κL₁ + cosh κL₂ + cosh κL₃ - 3 cosh κL] - (2g/x) sinh κa sinh κb sinh κc`.
pub fn f_star_neg(g: f64, a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    check_arg(x)?;
    check_lengths(&[a, b, c])?;
    Ok(star(g, a, b, c, x, Kernel::Hyper))
}

// (1/4)[cos kL₁ + cos kL₂ + cos kL₃ - 3cos kL] = Σ_cyc cos ka sin kb sin kc; the
// hyperbolic bracket equals -Σ_cyc cosh κa sinh κb sinh κc.
fn star(g: f64, a: f64, b: f64, c: f64, x: f64, kern: Kernel) -> f64 {
    let l = a + b + c;
    let (ka, kb, kc) = (x * a / l, x * b / l, x * c / l);
    let (sa, sb, sc) = (kern.s(ka), kern.s(kb), kern.s(kc));
    kern.sign() * (kern.c(ka) * sb * sc + kern.c(kb) * sa * sc + kern.c(kc) * sa * sb + 2.0 * g / x * sa * sb * sc)
}

/// Bare three-star secular function in its cosine form.
pub fn f_star_bare(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    check_arg(x)?;
    check_lengths(&[a, b, c])?;
    let l = a + b + c;
    let k = x / l;
    let (l1, l2, l3) = ((a + b - c).abs(), (a - b + c).abs(), (a - b - c).abs());
    Ok(0.25 * ((k * l1).cos() + (k * l2).cos() + (k * l3).cos() - 3.0 * x.cos()))
}

/// `g_c = -(a+b+c)(ab+ac+bc)/(2abc)`.
pub fn critical_strength_star(a: f64, b: f64, c: f64) -> f64 {
    -(a + b + c) * (a * b + a * c + b * c) / (2.0 * a * b * c)
}

/// Dressed lollipop: prong `a`, loop circumference `loop_len`, argument `x = k(a + loop_len)`.
pub fn f_pop(g: f64, a: f64, loop_len: f64, x: f64) -> Result<f64> {
    check_arg(x)?;
    check_lengths(&[a, loop_len])?;
    Ok(pop(g, a, loop_len, x, Kernel::Trig))
}

pub fn f_pop_neg(g: f64, a: f64, loop_len: f64, x: f64) -> Result<f64> {
    check_arg(x)?;
    check_lengths(&[a, loop_len])?;
    Ok(pop(g, a, loop_len, x, Kernel::Hyper))
}

// (1/2)[3cos k(a+ℓ/2) - cos k(a-ℓ/2)] = cos ka cos(kℓ/2) - 2 sin ka sin(kℓ/2),
// (1/2)[3cosh κ(a+ℓ/2) - cosh κ(a-ℓ/2)] = cosh κa cosh(κℓ/2) + 2 sinh κa sinh(κℓ/2).
fn pop(g: f64, a: f64, loop_len: f64, x: f64, kern: Kernel) -> f64 {
    let l = a + loop_len;
    let ka = x * a / l;
    let h = 0.5 * x * loop_len / l;
    let (sa, ca, sh, ch) = (kern.s(ka), kern.c(ka), kern.s(h), kern.c(h));
    ca * ch - 2.0 * kern.sign() * sa * sh + 2.0 * g / x * sa * ch
}

/// Binding threshold of the dressed lollipop, `g_c = -(a + ℓ)/(2a)`.
pub fn critical_strength_lollipop(a: f64, loop_len: f64) -> f64 {
    -(a + loop_len) / (2.0 * a)
}

// sin/cos, sinh/cosh, or sinh/cosh times e^{-y}; every term of a secular
// function carries the same total argument, so the scaled kernel only
// multiplies the function by a positive factor and keeps it finite
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kernel {
    Trig,
    Hyper,
    HyperScaled,
}

impl Kernel {
    fn s(self, y: f64) -> f64 {
        match self {
            Kernel::Trig => y.sin(),
            Kernel::Hyper => y.sinh(),
            Kernel::HyperScaled => -0.5 * (-2.0 * y).exp_m1(),
        }
    }

    fn c(self, y: f64) -> f64 {
        match self {
            Kernel::Trig => y.cos(),
            Kernel::Hyper => y.cosh(),
            Kernel::HyperScaled => 0.5 * (1.0 + (-2.0 * y).exp()),
        }
    }

    fn sign(self) -> f64 {
        if self == Kernel::Trig {
            1.0
        } else {
            -1.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Wire1 { g: f64, omega: f64 },
    Wire2 { g: [f64; 2], a: f64, b: f64, c: f64 },
    Wire3 { g: [f64; 3], p: [f64; 4] },
    Star { g: f64, a: f64, b: f64, c: f64 },
    Lollipop { g: f64, a: f64, loop_len: f64 },
}

/// A secular function bound to the geometry and strengths of one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct SecularFn {
    topology: Topology,
    kind: Kind,
    branch: Branch,
}

impl SecularFn {
    pub fn for_spec(spec: &GraphSpec, branch: Branch) -> SecularFn {
        let g = spec.strengths();
        let kind = match spec.topology() {
            Topology::Wire1Delta => Kind::Wire1 {
                g: g[0],
                omega: spec.asymmetry(0).expect("wire topology"),
            },
            Topology::Wire2Delta => {
                let p = spec.wire_gaps().expect("wire topology");
                Kind::Wire2 { g: [g[0], g[1]], a: p[0], b: p[2], c: p[1] }
            }
            Topology::Wire3Delta => {
                let p = spec.wire_gaps().expect("wire topology");
                Kind::Wire3 { g: [g[0], g[1], g[2]], p: [p[0], p[1], p[2], p[3]] }
            }
            Topology::StarDelta => {
                let e = spec.edges();
                Kind::Star { g: g[0], a: e[0].length, b: e[1].length, c: e[2].length }
            }
            Topology::LollipopDelta => {
                let e = spec.edges();
                Kind::Lollipop { g: g[0], a: e[0].length, loop_len: e[1].length }
            }
        };
        SecularFn { topology: spec.topology(), kind, branch }
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    /// Evaluates at `x > 0`; callers guarantee the domain. The negative branch is
    /// returned times `e^{-x'}` (a positive factor) so it never overflows.
    pub fn eval(&self, x: f64) -> f64 {
        let br = match self.branch {
            Branch::Positive => Kernel::Trig,
            Branch::Negative => Kernel::HyperScaled,
        };
        match self.kind {
            Kind::Wire1 { g, omega } => wire1(g, omega, x, br),
            Kind::Wire2 { g, a, b, c } => wire2(g[0], g[1], a, b, c, x, br),
            Kind::Wire3 { g, p } => wire3(g, p, x, br),
            Kind::Star { g, a, b, c } => star(g, a, b, c, x, br),
            Kind::Lollipop { g, a, loop_len } => pop(g, a, loop_len, x, br),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    // product (motif) forms, kept here as independent references
    fn motif(g: f64, l: f64, r: f64, x: f64, total: f64) -> f64 {
        let k = x / total;
        (k * (l + r)).sin() + 2.0 * g / x * (k * l).sin() * (k * r).sin()
    }

    fn product_2delta(g1: f64, g2: f64, a: f64, b: f64, c: f64, x: f64) -> f64 {
        let l = a + b + c;
        let k = x / l;
        motif(g1, a, c, x, l) * motif(g2, b, c, x, l) - (k * a).sin() * (k * b).sin()
    }

    fn product_3delta(g: [f64; 3], p: [f64; 4], x: f64) -> f64 {
        let l: f64 = p.iter().sum();
        let k = x / l;
        let [a, b, c, d] = p;
        let f1 = motif(g[0], a, b, x, l);
        let f2 = motif(g[1], b, c, x, l);
        let f3 = motif(g[2], c, d, x, l);
        f1 * f2 * f3 - f1 * (k * b).sin() * (k * d).sin() - f3 * (k * a).sin() * (k * c).sin()
    }

    #[test]
    fn f_delta_examples() {
        for n in 1..6 {
            assert_abs_diff_eq!(f_delta(0.0, 0.3, n as f64 * PI).unwrap(), 0.0, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(f_delta(0.0, -0.44, PI / 2.0).unwrap(), 1.0, epsilon = 1e-15);
        assert!(f_delta(1.0, 0.0, 0.0).is_err());
        assert!(f_delta(1.0, 0.0, -1.0).is_err());
        assert!(f_delta_neg(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn f_delta_matches_printed_cosine_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let g = rng.gen_range::<f64, _>(-12.0..12.0);
            let om = rng.gen_range::<f64, _>(-0.99..0.99);
            let x = rng.gen_range::<f64, _>(0.01..60.0);
            let printed = -(1.0 / x) * (g * (x.cos() - (om * x).cos()) - x * x.sin());
            assert_abs_diff_eq!(f_delta(g, om, x).unwrap(), printed, epsilon = 1e-11);
            let xn = rng.gen_range::<f64, _>(0.01..20.0);
            let printed = (1.0 / xn) * (g * (xn.cosh() - (om * xn).cosh()) + xn * xn.sinh());
            let got = f_delta_neg(g, om, xn).unwrap();
            assert!((got - printed).abs() <= 1e-11 * printed.abs().max(1.0));
        }
    }

    // dense-scan oracle on the printed forms: the lowest root of the optimal atom is
    // its bound state, inside (0, π); the first positive-energy root lies beyond π
    #[test]
    fn smallest_root_of_optimal_atom_is_below_pi() {
        let (g, om) = (-3.73, -0.44);
        let pos = |x: f64| -(1.0 / x) * (g * (x.cos() - (om * x).cos()) - x * x.sin());
        let neg = |x: f64| (1.0 / x) * (g * (x.cosh() - (om * x).cosh()) + x * x.sinh());
        let n = 200_000;
        let first = |f: &dyn Fn(f64) -> f64, hi: f64| {
            (1..n)
                .map(|i| i as f64 * hi / n as f64)
                .collect::<Vec<_>>()
                .windows(2)
                .find(|w| f(w[0]).signum() != f(w[1]).signum())
                .map(|w| w[0])
        };
        let x0 = first(&neg, PI).expect("bound-state root in (0, π)");
        assert!(x0 > 0.0 && x0 < PI);
        let step = PI / n as f64;
        assert!(f_delta_neg(g, om, x0).unwrap().signum() != f_delta_neg(g, om, x0 + step).unwrap().signum());
        assert!(first(&pos, PI).is_none());
        let x1 = first(&pos, 2.0 * PI).expect("positive root in (π, 2π)");
        assert!(f_delta(g, om, x1).unwrap().signum() != f_delta(g, om, x1 + 2.0 * step).unwrap().signum());
    }

    #[test]
    fn f_delta_neg_sign_structure() {
        // barrier: positive everywhere
        for i in 1..2000 {
            let x = i as f64 * 0.02;
            assert!(f_delta_neg(2.0, -0.44, x).unwrap() > 0.0);
        }
        // g = -5 < g_c = -2.48: exactly one sign change
        let changes = count_sign_changes(|x| f_delta_neg(-5.0, -0.44, x).unwrap(), 15.0);
        assert_eq!(changes, 1);
        // large |g|: root approaches |g|
        let g = -200.0;
        let f = |x: f64| f_delta_neg(g, 0.0, x).unwrap();
        let root = (1..100_000)
            .map(|i| i as f64 * 0.005)
            .find(|&x| f(x) > 0.0 && f(x - 0.005) < 0.0)
            .unwrap();
        assert!((root - 200.0).abs() / 200.0 < 0.02, "{root}");
    }

    fn count_sign_changes(f: impl Fn(f64) -> f64, x_max: f64) -> usize {
        let mut xs = vec![];
        let mut x = 1e-6;
        while x < x_max {
            xs.push(x);
            x *= 1.001;
        }
        xs.windows(2).filter(|w| f(w[0]).signum() != f(w[1]).signum()).count()
    }

    #[test]
    fn wire1_bound_state_count_flips_at_threshold() {
        for &om in &[-0.44, 0.02, 0.0, 0.7] {
            let gc = critical_strength_wire(om).unwrap();
            for &dg in &[-1.0, -0.05, 0.05, 1.0] {
                let g = gc + dg;
                let x_max = 2.0 * g.abs() + 10.0;
                let n = count_sign_changes(|x| f_delta_neg(g, om, x).unwrap(), x_max);
                assert_eq!(n, usize::from(g < gc), "ω={om} g={g}");
            }
        }
    }

    #[test]
    fn critical_strength_examples() {
        assert_abs_diff_eq!(critical_strength_wire(0.02).unwrap(), -2.00, epsilon = 0.005);
        assert_abs_diff_eq!(critical_strength_wire(-0.44).unwrap(), -2.48, epsilon = 0.005);
        assert_eq!(critical_strength_wire(0.0).unwrap(), -2.0);
        assert!(critical_strength_wire(1.0).is_err());
        assert!(critical_strength_wire(-1.5).is_err());

        assert_abs_diff_eq!(critical_strength_star(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0), -4.5, epsilon = 1e-12);
        assert_abs_diff_eq!(critical_strength_star(1.0, 1.0, 1.0), -4.5, epsilon = 1e-12);
        assert!(critical_strength_star(1e-12, 1.0, 1.0) < -1e11);
    }

    #[test]
    fn f_2delta_reductions() {
        for n in 1..8 {
            let x = n as f64 * PI;
            assert_abs_diff_eq!(f_2delta(0.0, 0.0, 0.2, 0.5, 0.3, x).unwrap(), 0.0, epsilon = 1e-13);
        }
        // g2 = 0: single delta at a on a wire of length a + b + c
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let (a, b, c) = (rng.gen_range::<f64, _>(0.05..1.0), rng.gen_range::<f64, _>(0.05..1.0), rng.gen_range::<f64, _>(0.05..1.0));
            let g1 = rng.gen_range::<f64, _>(-12.0..12.0);
            let x = rng.gen_range::<f64, _>(0.01..50.0);
            let om = 2.0 * a / (a + b + c) - 1.0;
            assert_abs_diff_eq!(f_2delta(g1, 0.0, a, b, c, x).unwrap(), f_delta(g1, om, x).unwrap(), epsilon = 1e-12);
        }
        assert!(f_2delta(1.0, 1.0, 0.0, 0.5, 0.5, 1.0).is_err());
    }

    #[test]
    fn f_2delta_product_and_expanded_agree() {
        // the motif determinant equals sin kc times the expanded form
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let (a, b, c) = (rng.gen_range::<f64, _>(0.05..1.0), rng.gen_range::<f64, _>(0.05..1.0), rng.gen_range::<f64, _>(0.05..1.0));
            let (g1, g2) = (rng.gen_range::<f64, _>(-12.0..12.0), rng.gen_range::<f64, _>(-12.0..12.0));
            let x = rng.gen_range::<f64, _>(0.05..60.0);
            let k = x / (a + b + c);
            let lhs = product_2delta(g1, g2, a, b, c, x);
            let rhs = (k * c).sin() * f_2delta(g1, g2, a, b, c, x).unwrap();
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
        }
    }

    #[test]
    fn coeffs_2delta_examples() {
        let t = 1.0 / 3.0;
        let g = -1.7;
        let (c1, _, _) = coeffs_2delta_neg(g, g, t, t, t).unwrap();
        assert_abs_diff_eq!(c1, 4.0 * g * g / 27.0 + 8.0 * g / 9.0 + 1.0, epsilon = 1e-14);

        let thr = bound_threshold_2delta(0.0, t, t, t).unwrap().unwrap();
        assert_abs_diff_eq!(thr, -2.25, epsilon = 1e-14);
        // g2 = 0 and a = b = c = 1/3: one bound state iff g1 < -9/4
        for &(g1, want) in &[(-2.3, 1usize), (-2.2, 0)] {
            let n = count_sign_changes(|x| f_2delta_neg(g1, 0.0, t, t, t, x).unwrap(), 2.3 + 10.0);
            assert_eq!(n, want, "g1={g1}");
        }
    }

    // Taylor-remainder check of the C-series against the full hyperbolic form
    #[test]
    fn coeffs_2delta_series_matches_full_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let (a, b, c) = (rng.gen_range::<f64, _>(0.05..1.0), rng.gen_range::<f64, _>(0.05..1.0), rng.gen_range::<f64, _>(0.05..1.0));
            let (g1, g2) = (rng.gen_range::<f64, _>(-12.0..12.0), rng.gen_range::<f64, _>(-12.0..12.0));
            let (c1, c3, c5) = coeffs_2delta_neg(g1, g2, a, b, c).unwrap();
            for &x in &[1e-3, 0.01, 0.05, 0.099] {
                let series = c1 * x + c3 * x.powi(3) / 6.0 + c5 * x.powi(5) / 120.0;
                let full = f_2delta_neg(g1, g2, a, b, c, x).unwrap();
                // the neglected x⁷ term bounds the difference
                let scale = (c1 * x).abs() + (c3 * x.powi(3) / 6.0).abs() + (c5 * x.powi(5) / 120.0).abs();
                assert!((series - full).abs() <= 1e-4 * scale.max(full.abs()), "x={x} {series} {full}");
            }
        }
    }

    #[test]
    fn f_3delta_reductions() {
        for n in 1..8 {
            let x = n as f64 * PI;
            assert_abs_diff_eq!(f_3delta(0.0, 0.0, 0.0, 0.2, 0.3, 0.1, 0.4, x).unwrap(), 0.0, epsilon = 1e-13);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..500 {
            let p: [f64; 4] = std::array::from_fn(|_| rng.gen_range::<f64, _>(0.05..1.0));
            let (g1, g2) = (rng.gen_range::<f64, _>(-12.0..12.0), rng.gen_range::<f64, _>(-12.0..12.0));
            let x = rng.gen_range::<f64, _>(0.05..60.0);
            // pieces a | b | c+d; f_2delta takes (left, right, middle)
            let want = f_2delta(g1, g2, p[0], p[2] + p[3], p[1], x).unwrap();
            let got = f_3delta(g1, g2, 0.0, p[0], p[1], p[2], p[3], x).unwrap();
            assert_abs_diff_eq!(got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn f_3delta_product_and_expanded_agree() {
        // the motif determinant equals sin kb sin kc times the expanded form
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..1000 {
            let p: [f64; 4] = std::array::from_fn(|_| rng.gen_range::<f64, _>(0.05..1.0));
            let g: [f64; 3] = std::array::from_fn(|_| rng.gen_range::<f64, _>(-12.0..12.0));
            let x = rng.gen_range::<f64, _>(0.05..60.0);
            let k = x / p.iter().sum::<f64>();
            let lhs = product_3delta(g, p, x);
            let rhs = (k * p[1]).sin() * (k * p[2]).sin() * f_3delta(g[0], g[1], g[2], p[0], p[1], p[2], p[3], x).unwrap();
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-11);
        }
    }

    #[test]
    fn f_star_matches_cosine_form_and_dressing() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let (a, b, c) = (rng.gen_range::<f64, _>(0.05..1.0), rng.gen_range::<f64, _>(0.05..1.0), rng.gen_range::<f64, _>(0.05..1.0));
            let g = rng.gen_range::<f64, _>(-12.0..12.0);
            let x = rng.gen_range::<f64, _>(0.05..60.0);
            let k = x / (a + b + c);
            let bare = f_star_bare(a, b, c, x).unwrap();
            assert_abs_diff_eq!(f_star(0.0, a, b, c, x).unwrap(), bare, epsilon = 1e-12);
            let dressing = 2.0 * g / x * (k * a).sin() * (k * b).sin() * (k * c).sin();
            assert_abs_diff_eq!(f_star(g, a, b, c, x).unwrap(), bare + dressing, epsilon = 1e-12);
            assert_abs_diff_eq!(f_star(-g, a, b, c, x).unwrap(), bare - dressing, epsilon = 1e-12);

            let xn = rng.gen_range::<f64, _>(0.05..15.0);
            let kn = xn / (a + b + c);
            let (l1, l2, l3) = ((a + b - c).abs(), (a - b + c).abs(), (a - b - c).abs());
            let printed = 0.25 * ((kn * l1).cosh() + (kn * l2).cosh() + (kn * l3).cosh() - 3.0 * xn.cosh())
                - 2.0 * g / xn * (kn * a).sinh() * (kn * b).sinh() * (kn * c).sinh();
            let got = f_star_neg(g, a, b, c, xn).unwrap();
            assert!((got - printed).abs() <= 1e-10 * printed.abs().max(1.0));
        }
    }

    #[test]
    fn symmetric_bare_star_vanishes_on_sin_family() {
        let t = 1.0 / 3.0;
        for n in 1..6 {
            // sin(k/3) = 0
            let x = 3.0 * n as f64 * PI;
            assert_abs_diff_eq!(f_star(0.0, t, t, t, x).unwrap(), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(f_star(-2.0, t, t, t, x).unwrap(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn star_negative_branch_roots() {
        let (a, b, c) = (0.2, 0.3, 0.5);
        let gc = critical_strength_star(a, b, c);
        for &g in &[3.0, 0.0, gc + 0.5] {
            let n = count_sign_changes(|x| f_star_neg(g, a, b, c, x).unwrap(), g.abs() + 10.0);
            assert_eq!(n, 0, "g={g}");
        }
        for &g in &[gc - 0.5, gc - 5.0] {
            let n = count_sign_changes(|x| f_star_neg(g, a, b, c, x).unwrap(), g.abs() + 10.0);
            assert_eq!(n, 1, "g={g}");
        }
    }

    #[test]
    fn f_pop_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..1000 {
            let (a, l) = (rng.gen_range::<f64, _>(0.05..1.0), rng.gen_range::<f64, _>(0.05..1.0));
            let g = rng.gen_range::<f64, _>(-12.0..12.0);
            let x = rng.gen_range::<f64, _>(0.05..60.0);
            let k = x / (a + l);
            let bare = 0.5 * (3.0 * (k * (a + l / 2.0)).cos() - (k * (a - l / 2.0)).cos());
            assert_abs_diff_eq!(f_pop(0.0, a, l, x).unwrap(), bare, epsilon = 1e-12);
            let dressed = bare + 2.0 * g / x * (k * a).sin() * (k * l / 2.0).cos();
            assert_abs_diff_eq!(f_pop(g, a, l, x).unwrap(), dressed, epsilon = 1e-12);

            // k → iκ substitution
            let xn = rng.gen_range::<f64, _>(0.05..15.0);
            let kn = xn / (a + l);
            let printed = 0.5 * (3.0 * (kn * (a + l / 2.0)).cosh() - (kn * (a - l / 2.0)).cosh())
                + 2.0 * g / xn * (kn * a).sinh() * (kn * l / 2.0).cosh();
            let got = f_pop_neg(g, a, l, xn).unwrap();
            assert!((got - printed).abs() <= 1e-10 * printed.abs().max(1.0));
        }
        // a = ℓ/2, g = 0
        let (a, l) = (0.25, 0.5);
        let x = 1.7;
        let k = x / (a + l);
        assert_abs_diff_eq!(f_pop(0.0, a, l, x).unwrap(), 0.5 * (3.0 * (k * l).cos() - 1.0), epsilon = 1e-14);
    }

    #[test]
    fn lollipop_threshold() {
        let (a, l) = (0.3, 0.7);
        let gc = critical_strength_lollipop(a, l);
        for &(g, want) in &[(gc - 0.3, 1usize), (gc + 0.3, 0)] {
            let n = count_sign_changes(|x| f_pop_neg(g, a, l, x).unwrap(), g.abs() + 10.0);
            assert_eq!(n, want, "g={g}");
        }
    }

    #[test]
    fn secular_fn_dispatch_matches_free_functions() {
        let spec = GraphSpec::straight_wire(&[(-2.0, 0.2), (1.5, 0.5), (-4.0, 0.9)]).unwrap();
        let f = SecularFn::for_spec(&spec, Branch::Positive);
        assert_abs_diff_eq!(f.eval(3.3), f_3delta(-2.0, 1.5, -4.0, 0.2, 0.3, 0.4, 0.1, 3.3).unwrap(), epsilon = 1e-15);
        let spec = GraphSpec::straight_wire(&[(-2.0, 0.2), (1.5, 0.5)]).unwrap();
        let f = SecularFn::for_spec(&spec, Branch::Negative);
        let want = f_2delta_neg(-2.0, 1.5, 0.2, 0.5, 0.3, 3.3).unwrap() * (-3.3f64).exp();
        assert_abs_diff_eq!(f.eval(3.3), want, epsilon = 1e-15);
        // no overflow far beyond where sinh does
        assert!(f.eval(2000.0).is_finite() && f.eval(2000.0) > 0.0);
    }
}
