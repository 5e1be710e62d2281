//! Intrinsic first and second hyperpolarizabilities from a transition table.
//!
//! With `ξ̄_nm = ξ_nm − δ_nm ξ_00` and primed sums over excited states,
//!
//! ```text
//! β_ijk  = (3/4)^{3/4} Σ′ ξ^i_0n ξ̄^j_nm ξ^k_m0 / (e_n e_m)
//! γ_ijkl = ¼ [Σ′ ξ^i_0n ξ̄^j_nm ξ̄^k_mp ξ^l_p0 / (e_n e_m e_p) − Σ′ ξ^i_0n ξ^j_n0 ξ^k_0m ξ^l_m0 / (e_n e_m²)]
//! ```
//!
//! Stored components are averaged over index permutations.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::TransitionTable;

fn beta_prefactor() -> f64 {
    0.75f64.powf(0.75)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BetaTensor {
    pub xxx: f64,
    pub xxy: f64,
    pub xyy: f64,
    pub yyy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GammaTensor {
    pub xxxx: f64,
    pub xxxy: f64,
    pub xxyy: f64,
    pub xyyy: f64,
    pub yyyy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Which {
    Beta,
    Gamma,
}

// ξ^x, ξ^y with barred diagonals, and the excited-state energies
struct Parts<'a> {
    t: &'a TransitionTable,
    n: usize,
}

impl<'a> Parts<'a> {
    fn new(t: &'a TransitionTable) -> Result<Parts<'a>> {
        if t.len() < 3 {
            return Err(Error::InsufficientBasis { needed: 3, got: t.len() });
        }
        Ok(Parts { t, n: t.len() })
    }

    fn xi(&self, c: usize, a: usize, b: usize) -> f64 {
        if c == 0 {
            self.t.xi_x[a][b]
        } else {
            self.t.xi_y[a][b]
        }
    }

    fn bar(&self, c: usize, a: usize, b: usize) -> f64 {
        if a == b {
            self.xi(c, a, a) - self.xi(c, 0, 0)
        } else {
            self.xi(c, a, b)
        }
    }

    // u^c_n = ξ^c_0n / e_n over excited states
    fn u(&self, c: usize, pow: i32) -> Vec<f64> {
        (1..self.n).map(|n| self.xi(c, 0, n) / self.t.e[n].powi(pow)).collect()
    }

    // Σ_nm u_n ξ̄_nm v_m (excited states only)
    fn sandwich(&self, u: &[f64], c: usize, v: &[f64], weight: Option<&[f64]>) -> f64 {
        let mut s = 0.0;
        for (i, ui) in u.iter().enumerate() {
            if *ui == 0.0 {
                continue;
            }
            let mut row = 0.0;
            for (j, vj) in v.iter().enumerate() {
                row += self.bar(c, i + 1, j + 1) * vj;
            }
            s += ui * row * weight.map_or(1.0, |w| w[i]);
        }
        s
    }

    fn beta_raw(&self, i: usize, j: usize, k: usize) -> f64 {
        let (ui, uk) = (self.u(i, 1), self.u(k, 1));
        beta_prefactor() * self.sandwich(&ui, j, &uk, None)
    }

    fn gamma_raw(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let m = self.n - 1;
        let ui = self.u(i, 1);
        let ul = self.u(l, 1);
        // w_m = Σ_p ξ̄^k_mp u^l_p, then Σ_nm u^i_n ξ̄^j_nm w_m / e_m
        let w: Vec<f64> = (0..m)
            .map(|a| (0..m).map(|b| self.bar(k, a + 1, b + 1) * ul[b]).sum::<f64>() / self.t.e[a + 1])
            .collect();
        let first = self.sandwich(&ui, j, &w, None);
        let a: f64 = (1..self.n).map(|n| self.xi(i, 0, n) * self.xi(j, n, 0) / self.t.e[n]).sum();
        let b: f64 = (1..self.n).map(|n| self.xi(k, 0, n) * self.xi(l, n, 0) / self.t.e[n].powi(2)).sum();
        0.25 * (first - a * b)
    }
}

fn permutations_of(idx: &[usize]) -> Vec<Vec<usize>> {
    if idx.len() <= 1 {
        return vec![idx.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..idx.len() {
        let mut rest = idx.to_vec();
        let head = rest.remove(i);
        for mut p in permutations_of(&rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

fn sym_average(idx: &[usize], f: impl Fn(&[usize]) -> f64) -> f64 {
    let mut perms = permutations_of(idx);
    perms.sort();
    perms.dedup();
    perms.iter().map(|p| f(p)).sum::<f64>() / perms.len() as f64
}

fn has_y(t: &TransitionTable) -> bool {
    t.xi_y.iter().flatten().any(|v| *v != 0.0)
}

pub fn beta_intrinsic(table: &TransitionTable) -> Result<BetaTensor> {
    let p = Parts::new(table)?;
    let xxx = p.beta_raw(0, 0, 0);
    if !has_y(table) {
        return Ok(BetaTensor { xxx, ..Default::default() });
    }
    let c = |idx: [usize; 3]| sym_average(&idx, |q| p.beta_raw(q[0], q[1], q[2]));
    Ok(BetaTensor { xxx, xxy: c([0, 0, 1]), xyy: c([0, 1, 1]), yyy: p.beta_raw(1, 1, 1) })
}

pub fn gamma_intrinsic(table: &TransitionTable) -> Result<GammaTensor> {
    let p = Parts::new(table)?;
    let xxxx = p.gamma_raw(0, 0, 0, 0);
    if !has_y(table) {
        return Ok(GammaTensor { xxxx, ..Default::default() });
    }
    let c = |idx: [usize; 4]| sym_average(&idx, |q| p.gamma_raw(q[0], q[1], q[2], q[3]));
    Ok(GammaTensor {
        xxxx,
        xxxy: c([0, 0, 0, 1]),
        xxyy: c([0, 0, 1, 1]),
        xyyy: c([0, 1, 1, 1]),
        yyyy: p.gamma_raw(1, 1, 1, 1),
    })
}

/// Unsymmetrized component `β_ijk` (indices 0 = x, 1 = y), for permutation checks.
pub fn beta_component(table: &TransitionTable, idx: [usize; 3]) -> Result<f64> {
    Ok(Parts::new(table)?.beta_raw(idx[0], idx[1], idx[2]))
}

/// Unsymmetrized component `γ_ijkl` (indices 0 = x, 1 = y).
pub fn gamma_component(table: &TransitionTable, idx: [usize; 4]) -> Result<f64> {
    Ok(Parts::new(table)?.gamma_raw(idx[0], idx[1], idx[2], idx[3]))
}

/// `β_xxx` seen from a frame rotated by `theta`.
pub fn rotate_beta(t: &BetaTensor, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    t.xxx * c.powi(3) + 3.0 * t.xxy * c * c * s + 3.0 * t.xyy * c * s * s + t.yyy * s.powi(3)
}

/// `d/dθ` of [`rotate_beta`].
pub fn rotate_beta_slope(t: &BetaTensor, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    3.0 * (-t.xxx * c * c * s + t.xxy * (c.powi(3) - 2.0 * c * s * s) + t.xyy * (2.0 * c * c * s - s.powi(3)) + t.yyy * s * s * c)
}

/// `γ_xxxx` seen from a frame rotated by `theta`.
pub fn rotate_gamma(t: &GammaTensor, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    t.xxxx * c.powi(4) + 4.0 * t.xxxy * c.powi(3) * s + 6.0 * t.xxyy * c * c * s * s + 4.0 * t.xyyy * c * s.powi(3) + t.yyyy * s.powi(4)
}

/// `d/dθ` of [`rotate_gamma`].
pub fn rotate_gamma_slope(t: &GammaTensor, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    4.0 * (-t.xxxx * c.powi(3) * s
        + t.xxxy * (c.powi(4) - 3.0 * c * c * s * s)
        + 3.0 * t.xxyy * (c.powi(3) * s - c * s.powi(3))
        + t.xyyy * (3.0 * c * c * s * s - s.powi(4))
        + t.yyyy * s.powi(3) * c)
}

impl BetaTensor {
    /// Components of the same tensor after rotating the body by `phi`.
    pub fn rotated(&self, phi: f64) -> BetaTensor {
        let comp = |idx: [usize; 3]| {
            let (s, c) = phi.sin_cos();
            let r = [[c, -s], [s, c]];
            let mut v = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    for d in 0..2 {
                        v += r[idx[0]][a] * r[idx[1]][b] * r[idx[2]][d] * self.get([a, b, d]);
                    }
                }
            }
            v
        };
        BetaTensor { xxx: comp([0, 0, 0]), xxy: comp([0, 0, 1]), xyy: comp([0, 1, 1]), yyy: comp([1, 1, 1]) }
    }

    pub fn get(&self, idx: [usize; 3]) -> f64 {
        match idx.iter().sum::<usize>() {
            0 => self.xxx,
            1 => self.xxy,
            2 => self.xyy,
            _ => self.yyy,
        }
    }
}

impl GammaTensor {
    pub fn rotated(&self, phi: f64) -> GammaTensor {
        let (s, c) = phi.sin_cos();
        let r = [[c, -s], [s, c]];
        let comp = |idx: [usize; 4]| {
            let mut v = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    for d in 0..2 {
                        for e in 0..2 {
                            v += r[idx[0]][a] * r[idx[1]][b] * r[idx[2]][d] * r[idx[3]][e] * self.get([a, b, d, e]);
                        }
                    }
                }
            }
            v
        };
        GammaTensor {
            xxxx: comp([0, 0, 0, 0]),
            xxxy: comp([0, 0, 0, 1]),
            xxyy: comp([0, 0, 1, 1]),
            xyyy: comp([0, 1, 1, 1]),
            yyyy: comp([1, 1, 1, 1]),
        }
    }

    pub fn get(&self, idx: [usize; 4]) -> f64 {
        match idx.iter().sum::<usize>() {
            0 => self.xxxx,
            1 => self.xxxy,
            2 => self.xxyy,
            3 => self.xyyy,
            _ => self.yyyy,
        }
    }
}

/// Angle in `[0, 2π)` extremizing `f` (maximum when `maximize`), with the extreme value.
///
/// A 720-point grid locates candidate extrema; each is narrowed by golden-section
/// search to `1e-10` in angle and then pinned by bisection on the slope `df`, so
/// the angle is stable to rounding in the tensor.
pub fn extremize_angle(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, maximize: bool) -> (f64, f64) {
    let sgn = if maximize { 1.0 } else { -1.0 };
    let g = |t: f64| sgn * f(t);
    let dg = |t: f64| sgn * df(t);
    let n = 720;
    let h = 2.0 * PI / n as f64;
    let vals: Vec<f64> = (0..n).map(|i| g(i as f64 * h)).collect();
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..n {
        let (prev, next) = (vals[(i + n - 1) % n], vals[(i + 1) % n]);
        if vals[i] >= prev && vals[i] >= next {
            let (t, _) = golden_max(&g, (i as f64 - 1.0) * h, (i as f64 + 1.0) * h);
            let t = slope_root(&dg, t - 1e-6, t + 1e-6).unwrap_or(t);
            let v = g(t);
            if v > best.1 {
                best = (t, v);
            }
        }
    }
    if best.1 == f64::NEG_INFINITY {
        best = (0.0, vals[0]);
    }
    (best.0.rem_euclid(2.0 * PI), sgn * best.1)
}

// bisection for the descending zero of `dg` in `[a, b]`, if the slope changes sign there
fn slope_root(dg: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> Option<f64> {
    if dg(a) < 0.0 || dg(b) > 0.0 {
        return None;
    }
    loop {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            return Some(mid);
        }
        if dg(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
}

fn golden_max(g: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    while b - a > 1e-10 {
        if gc > gd {
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
    let t = 0.5 * (a + b);
    (t, g(t))
}

/// Frame angle maximizing `β_xxx(θ)` and the maximum.
pub fn theta_star_beta(t: &BetaTensor) -> (f64, f64) {
    extremize_angle(|th| rotate_beta(t, th), |th| rotate_beta_slope(t, th), true)
}

/// Frame angles and values of the largest and smallest `γ_xxxx(θ)`.
pub fn theta_star_gamma(t: &GammaTensor) -> ((f64, f64), (f64, f64)) {
    (
        extremize_angle(|th| rotate_gamma(t, th), |th| rotate_gamma_slope(t, th), true),
        extremize_angle(|th| rotate_gamma(t, th), |th| rotate_gamma_slope(t, th), false),
    )
}

pub fn beta_norm(t: &BetaTensor) -> f64 {
    (t.xxx.powi(2) + 3.0 * t.xxy.powi(2) + 3.0 * t.xyy.powi(2) + t.yyy.powi(2)).sqrt()
}

pub fn gamma_norm(t: &GammaTensor) -> f64 {
    (t.xxxx.powi(2) + 4.0 * t.xxxy.powi(2) + 6.0 * t.xxyy.powi(2) + 4.0 * t.xyyy.powi(2) + t.yyyy.powi(2)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalComponent {
    pub j: u32,
    pub m: i32,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spherical {
    pub components: Vec<SphericalComponent>,
    /// `(J, Σ_m |component|²)` for each rank present.
    pub norms: Vec<(u32, f64)>,
    /// `Σ_J norms − |tensor|²`.
    pub discrepancy: f64,
}

fn spherical(components: Vec<SphericalComponent>, ranks: &[u32], cartesian_sq: f64) -> Spherical {
    let norms: Vec<(u32, f64)> = ranks
        .iter()
        .map(|&j| (j, components.iter().filter(|c| c.j == j).map(|c| c.re * c.re + c.im * c.im).sum()))
        .collect();
    let discrepancy = norms.iter().map(|n| n.1).sum::<f64>() - cartesian_sq;
    Spherical { components, norms, discrepancy }
}

/// Rank-1 and rank-3 parts of `β` in the printed planar convention.
pub fn spherical_beta(t: &BetaTensor) -> Spherical {
    let (a, b) = (t.xxx + t.xyy, t.yyy + t.xxy);
    let (c, d) = (-t.xxx + 3.0 * t.xyy, t.yyy - 3.0 * t.xxy);
    let mut comps = Vec::new();
    for m in [-1, 1] {
        let sg = m as f64;
        comps.push(SphericalComponent { j: 1, m, re: 0.3f64.sqrt() * sg * a, im: 0.3f64.sqrt() * b });
    }
    for m in [-3i32, -1, 1, 3] {
        let sg = m.signum() as f64;
        let (re, im) = if m.abs() == 1 {
            let f = (3.0f64 / 40.0).sqrt();
            (f * sg * a, f * b)
        } else {
            let f = 0.125f64.sqrt();
            (f * sg * c, f * d)
        };
        comps.push(SphericalComponent { j: 3, m, re, im });
    }
    spherical(comps, &[1, 3], beta_norm(t).powi(2))
}

/// Rank-0, 2 and 4 parts of `γ` in the printed planar convention.
pub fn spherical_gamma(t: &GammaTensor) -> Spherical {
    let p = t.xxxx + 2.0 * t.xxyy + t.yyyy;
    let q = -t.xxxx + t.yyyy;
    let r = t.xxxy + t.xyyy;
    let w = t.xxxx - 6.0 * t.xxyy + t.yyyy;
    let v = t.xxxy - t.xyyy;
    let mut comps = vec![SphericalComponent { j: 0, m: 0, re: 0.2f64.sqrt() * p, im: 0.0 }];
    comps.push(SphericalComponent { j: 2, m: 0, re: (1.0f64 / 7.0).sqrt() * p, im: 0.0 });
    for m in [-2, 2] {
        let f = (3.0f64 / 14.0).sqrt();
        comps.push(SphericalComponent { j: 2, m, re: f * q, im: -(m.signum() as f64) * 2.0 * f * r });
    }
    comps.push(SphericalComponent { j: 4, m: 0, re: (9.0f64 / 280.0).sqrt() * p, im: 0.0 });
    for m in [-2, 2] {
        let f = (1.0f64 / 28.0).sqrt();
        comps.push(SphericalComponent { j: 4, m, re: f * q, im: -(m.signum() as f64) * 2.0 * f * r });
    }
    for m in [-4, 4] {
        comps.push(SphericalComponent { j: 4, m, re: 0.5 * w, im: (m.signum() as f64) * 0.5 * 4.0 * v });
    }
    spherical(comps, &[0, 2, 4], gamma_norm(t).powi(2))
}

/// Importance scores below this count as zero, so roundoff cannot reorder states.
pub const RANKING_FLOOR: f64 = 1e-10;

/// Excited states by descending summed `|term|` of the `xxx` (or `xxxx`) sum-over-states
/// expression they take part in; ties go to the lower index.
pub fn importance_ranking(table: &TransitionTable, which: Which) -> Result<Vec<usize>> {
    let p = Parts::new(table)?;
    let n = p.n;
    let mut score = vec![0.0; n];
    match which {
        Which::Beta => {
            for a in 1..n {
                for b in 1..n {
                    let term = (beta_prefactor() * p.xi(0, 0, a) * p.bar(0, a, b) * p.xi(0, b, 0) / (p.t.e[a] * p.t.e[b])).abs();
                    score[a] += term;
                    if b != a {
                        score[b] += term;
                    }
                }
            }
        }
        Which::Gamma => {
            for a in 1..n {
                let ua = p.xi(0, 0, a) / p.t.e[a];
                if ua == 0.0 {
                    continue;
                }
                for b in 1..n {
                    let ab = ua * p.bar(0, a, b) / p.t.e[b];
                    for c in 1..n {
                        let term = (0.25 * ab * p.bar(0, b, c) * p.xi(0, c, 0) / p.t.e[c]).abs();
                        let mut who = [a, b, c];
                        who.sort_unstable();
                        for (i, s) in who.iter().enumerate() {
                            if i == 0 || who[i - 1] != *s {
                                score[*s] += term;
                            }
                        }
                    }
                    let term = (0.25 * p.xi(0, 0, a).powi(2) * p.xi(0, 0, b).powi(2) / (p.t.e[a] * p.t.e[b].powi(2))).abs();
                    score[a] += term;
                    if b != a {
                        score[b] += term;
                    }
                }
            }
        }
    }
    for v in score.iter_mut() {
        if *v < RANKING_FLOOR {
            *v = 0.0;
        }
    }
    let mut order: Vec<usize> = (1..n).collect();
    order.sort_by(|&i, &j| score[j].total_cmp(&score[i]).then(i.cmp(&j)));
    Ok(order)
}

/// `β_xxx` (or `γ_xxxx`) summed over the ground state plus the `top_k − 1` most important excited states.
pub fn truncated_response(table: &TransitionTable, which: Which, top_k: usize) -> Result<f64> {
    if top_k < 2 {
        return Err(Error::InvalidArgument(format!("truncation needs at least 2 levels, got {top_k}")));
    }
    let ranking = importance_ranking(table, which)?;
    let mut keep: Vec<usize> = ranking.into_iter().take(top_k - 1).collect();
    keep.sort_unstable();
    keep.insert(0, 0);
    let sub = table.restricted(&keep);
    // two-level sums still need the generic code path
    let p = Parts { t: &sub, n: sub.len() };
    Ok(match which {
        Which::Beta => p.beta_raw(0, 0, 0),
        Which::Gamma => p.gamma_raw(0, 0, 0, 0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TlaDiagnostics {
    #[serde(rename = "X")]
    pub x: f64,
    #[serde(rename = "E")]
    pub e: f64,
    pub f: f64,
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "fG")]
    pub fg: f64,
    /// Three-level model `β_xxx` over the lowest three levels.
    pub beta_3l: f64,
    pub beta3: f64,
    pub beta4: f64,
    pub gamma3: f64,
    pub gamma4: f64,
    pub beta_ranking: Vec<usize>,
    pub gamma_ranking: Vec<usize>,
}

/// `f(E) = (1 − E)^{3/2}(E² + 3E/2 + 1)`.
pub fn tla_f(e: f64) -> f64 {
    (1.0 - e).max(0.0).powf(1.5) * (e * e + 1.5 * e + 1.0)
}

/// `G(X) = 3^{1/4} X √((3/2)(1 − X⁴))`.
pub fn tla_g(x: f64) -> f64 {
    3f64.powf(0.25) * x * (1.5 * (1.0 - x.powi(4)).max(0.0)).sqrt()
}

pub fn tla_params(table: &TransitionTable) -> Result<TlaDiagnostics> {
    let p = Parts::new(table)?;
    let x = p.xi(0, 0, 1).abs();
    let e = p.t.e[1] / p.t.e[2];
    let (e1, e2) = (p.t.e[1], p.t.e[2]);
    let (x01, x02, x12) = (p.xi(0, 0, 1), p.xi(0, 0, 2), p.xi(0, 1, 2));
    let beta_3l = beta_prefactor()
        * (x01 * x01 * p.bar(0, 1, 1) / (e1 * e1) + x02 * x02 * p.bar(0, 2, 2) / (e2 * e2) + 2.0 * x01 * x12 * x02 / (e1 * e2));
    let trunc = |w, k: usize| truncated_response(table, w, k.min(table.len()));
    Ok(TlaDiagnostics {
        x,
        e,
        f: tla_f(e),
        g: tla_g(x),
        fg: tla_f(e) * tla_g(x),
        beta_3l,
        beta3: trunc(Which::Beta, 3)?,
        beta4: trunc(Which::Beta, 4)?,
        gamma3: trunc(Which::Gamma, 3)?,
        gamma4: trunc(Which::Gamma, 4)?,
        beta_ranking: importance_ranking(table, Which::Beta)?,
        gamma_ranking: importance_ranking(table, Which::Gamma)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_slopes_match_central_differences() {
        let b = BetaTensor { xxx: 0.3, xxy: -0.7, xyy: 0.2, yyy: 0.5 };
        let g = GammaTensor { xxxx: 0.4, xxxy: -0.1, xxyy: 0.25, xyyy: 0.6, yyyy: -0.3 };
        let h = 1e-5;
        for th in [0.0, 0.4, 1.9, 4.2] {
            let fd_b = (rotate_beta(&b, th + h) - rotate_beta(&b, th - h)) / (2.0 * h);
            let fd_g = (rotate_gamma(&g, th + h) - rotate_gamma(&g, th - h)) / (2.0 * h);
            assert!((rotate_beta_slope(&b, th) - fd_b).abs() < 1e-8);
            assert!((rotate_gamma_slope(&g, th) - fd_g).abs() < 1e-8);
        }
        let (t, _) = theta_star_beta(&b);
        assert!(rotate_beta_slope(&b, t).abs() < 1e-14);
    }
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn arb_beta() -> impl Strategy<Value = BetaTensor> {
        (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b, c, d)| BetaTensor { xxx: a, xxy: b, xyy: c, yyy: d })
    }

    fn arb_gamma() -> impl Strategy<Value = GammaTensor> {
        (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
            .prop_map(|(a, b, c, d, e)| GammaTensor { xxxx: a, xxxy: b, xxyy: c, xyyy: d, yyyy: e })
    }

    #[test]
    fn rotation_examples() {
        let t = BetaTensor { xxx: 0.3, xxy: -0.1, xyy: 0.2, yyy: 0.7 };
        assert_eq!(rotate_beta(&t, 0.0), 0.3);
        let y = BetaTensor { yyy: 0.4, ..Default::default() };
        assert_abs_diff_eq!(rotate_beta(&y, PI / 2.0), 0.4, epsilon = 1e-15);
        let g = GammaTensor { yyyy: -0.2, ..Default::default() };
        assert_abs_diff_eq!(rotate_gamma(&g, PI / 2.0), -0.2, epsilon = 1e-15);
    }

    #[test]
    fn straight_wire_norm_is_the_single_component() {
        let t = BetaTensor { xxx: -0.6, ..Default::default() };
        assert_eq!(beta_norm(&t), 0.6);
        let g = GammaTensor { xxxx: 0.5, ..Default::default() };
        assert_eq!(gamma_norm(&g), 0.5);
        let s = spherical_beta(&t);
        let (j1, j3) = (s.norms[0].1, s.norms[1].1);
        assert!(j1 > j3);
        assert_abs_diff_eq!(s.discrepancy, 0.0, epsilon = 1e-15);
        assert!(spherical_gamma(&GammaTensor::default()).components.iter().all(|c| c.re == 0.0 && c.im == 0.0));
    }

    #[test]
    fn tla_factor_examples() {
        let fg = tla_f(0.5) * tla_g(0.79);
        assert_abs_diff_eq!(fg, 0.5f64.powf(1.5) * 2.0 * 3f64.powf(0.25) * 0.79 * (1.5 * (1.0 - 0.79f64.powi(4))).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(fg, 0.71, epsilon = 0.01);
        assert_eq!(tla_f(1.0), 0.0);
        assert_eq!(tla_g(1.0), 0.0);
    }

    // dense-grid oracle for the maximizing angle
    #[test]
    fn theta_star_matches_dense_grid() {
        let t = BetaTensor { xxx: 0.31, xxy: -0.22, xyy: 0.05, yyy: 0.4 };
        let (th, v) = theta_star_beta(&t);
        let best = (0..2_000_000).map(|i| rotate_beta(&t, i as f64 * 2.0 * PI / 2e6)).fold(f64::MIN, f64::max);
        assert_abs_diff_eq!(v, best, epsilon = 1e-11);
        assert_abs_diff_eq!(rotate_beta(&t, th), v, epsilon = 1e-15);
        assert!((0.0..2.0 * PI).contains(&th));
    }

    proptest! {
        #[test]
        fn norms_are_rotation_invariant(t in arb_beta(), g in arb_gamma(), phi in -7.0f64..7.0) {
            prop_assert!((beta_norm(&t.rotated(phi)) - beta_norm(&t)).abs() < 1e-10);
            prop_assert!((gamma_norm(&g.rotated(phi)) - gamma_norm(&g)).abs() < 1e-10);
        }

        // rotating the body by φ shows its frame-θ component at θ − φ
        #[test]
        fn rotated_components_agree_with_frame_rotation(t in arb_beta(), g in arb_gamma(), phi in -3.0f64..3.0, th in -3.0f64..3.0) {
            prop_assert!((rotate_beta(&t.rotated(phi), th) - rotate_beta(&t, th - phi)).abs() < 1e-12);
            prop_assert!((rotate_gamma(&g.rotated(phi), th) - rotate_gamma(&g, th - phi)).abs() < 1e-12);
        }

        #[test]
        fn beta_spherical_norms_sum_to_cartesian(t in arb_beta()) {
            prop_assert!(spherical_beta(&t).discrepancy.abs() < 1e-12);
        }

        #[test]
        fn theta_star_is_global(t in arb_beta()) {
            let (_, v) = theta_star_beta(&t);
            for i in 0..360 {
                prop_assert!(rotate_beta(&t, i as f64 * PI / 180.0) <= v + 1e-12);
            }
        }
    }

    #[test]
    fn printed_gamma_spherical_overcounts_pure_xxxx() {
        let g = GammaTensor { xxxx: 1.0, ..Default::default() };
        let s = spherical_gamma(&g);
        let total: f64 = s.norms.iter().map(|n| n.1).sum();
        assert_abs_diff_eq!(total, 1.375, epsilon = 1e-12);
        assert_abs_diff_eq!(s.discrepancy, 0.375, epsilon = 1e-12);
    }
}
