use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use qgraph_core::report::{analyze, AnalysisOptions, ResponseReport};
use qgraph_core::response::{
    beta_component, beta_intrinsic, gamma_component, gamma_intrinsic, importance_ranking, rotate_beta, truncated_response,
    Which,
};
use qgraph_core::GraphSpec;

fn report(spec: &GraphSpec) -> ResponseReport {
    analyze(spec, &AnalysisOptions::default()).unwrap().report
}

fn omega_grid() -> impl Iterator<Item = f64> {
    (0..100).map(|i| -1.0 + 2.0 * (i as f64 + 1.0) / 101.0)
}

#[test]
fn bare_wire_has_no_beta() {
    let r = report(&GraphSpec::delta_atom(0.0, 0.1).unwrap());
    assert!(r.beta.components.xxx.abs() < 1e-10);
    assert!(r.beta.norm < 1e-10);
}

#[test]
fn mirrored_atom_flips_beta() {
    let a = report(&GraphSpec::delta_atom(-3.0, 0.3).unwrap());
    let b = report(&GraphSpec::delta_atom(-3.0, -0.3).unwrap());
    assert!(a.beta.components.xxx.abs() > 0.1);
    assert_abs_diff_eq!(a.beta.components.xxx, -b.beta.components.xxx, epsilon = 1e-9);
    assert_abs_diff_eq!(a.gamma.components.xxxx, b.gamma.components.xxxx, epsilon = 1e-9);
}

#[test]
fn mirror_symmetric_molecule_has_no_beta() {
    let r = report(&GraphSpec::straight_wire(&[(-4.0, 0.3), (-4.0, 0.7)]).unwrap());
    assert!(r.beta.components.xxx.abs() < 1e-8);
}

#[test]
fn optimal_atom_beta() {
    let best = omega_grid()
        .map(|w| report(&GraphSpec::delta_atom(-3.73, w).unwrap()))
        .max_by(|a, b| a.beta.components.xxx.abs().total_cmp(&b.beta.components.xxx.abs()))
        .unwrap();
    let b = best.beta.components.xxx.abs();
    assert_abs_diff_eq!(b, 0.680, epsilon = 0.005);
    assert!((best.tla.beta3.abs() - b).abs() < 0.02 * b);
    assert!((best.tla.beta4.abs() - b).abs() < 0.02 * b);
    assert_abs_diff_eq!(best.tla.x, 0.79, epsilon = 0.02);
    assert_abs_diff_eq!(best.tla.e, 0.39, epsilon = 0.02);
    assert_abs_diff_eq!(best.tla.fg, 0.8, epsilon = 0.05);
    assert_eq!(&best.tla.beta_ranking[..3], &[1, 2, 3]);
}

#[test]
fn optimal_atom_gamma_needs_four_states() {
    let best = omega_grid()
        .map(|w| report(&GraphSpec::delta_atom(-9.9, w).unwrap()))
        .max_by(|a, b| a.gamma.components.xxxx.total_cmp(&b.gamma.components.xxxx))
        .unwrap();
    let g = best.gamma.components.xxxx;
    assert_abs_diff_eq!(g, 0.58, epsilon = 0.01);
    assert!(best.tla.gamma3 > g);
    assert!((best.tla.gamma4 - g).abs() < 0.02 * g);
}

// direct sum over analytic box moments
fn box_gamma_sos(n: usize) -> f64 {
    let x = |a: usize, b: usize| -> f64 {
        let (p, q) = ((a + 1) as f64, (b + 1) as f64);
        if a == b {
            0.5
        } else if (a + b) % 2 == 1 {
            -8.0 * p * q / (PI * PI * (p * p - q * q).powi(2))
        } else {
            0.0
        }
    };
    let e = |a: usize| (((a + 1) * (a + 1)) as f64 - 1.0) / 3.0;
    let xmax = 1.0 / (PI * 3f64.sqrt());
    let xi = |a: usize, b: usize| (x(a, b) - if a == b { x(0, 0) } else { 0.0 }) / xmax;
    let mut first = 0.0;
    for a in 1..n {
        for b in 1..n {
            for c in 1..n {
                first += xi(0, a) * xi(a, b) * xi(b, c) * xi(c, 0) / (e(a) * e(b) * e(c));
            }
        }
    }
    let s1: f64 = (1..n).map(|a| xi(0, a).powi(2) / e(a)).sum();
    let s2: f64 = (1..n).map(|a| xi(0, a).powi(2) / e(a).powi(2)).sum();
    0.25 * (first - s1 * s2)
}

#[test]
fn box_gamma_matches_analytic_sum() {
    let n = 200;
    let oracle = box_gamma_sos(n);
    assert!(oracle < 0.0);
    let opts = AnalysisOptions { n_states: n, ..Default::default() };
    let a = analyze(&GraphSpec::delta_atom(0.0, 0.1).unwrap(), &opts).unwrap();
    assert_abs_diff_eq!(a.report.gamma.components.xxxx, oracle, epsilon = 1e-6);
}

#[test]
fn stored_components_are_permutation_averages() {
    let spec = GraphSpec::bent_wire(&[(-3.0, 0.37)], 1.0, &[0.0, 1.1]).unwrap();
    let t = analyze(&spec, &AnalysisOptions::default()).unwrap().table;
    let b = beta_intrinsic(&t).unwrap();
    let perms = [[0, 0, 1], [0, 1, 0], [1, 0, 0]];
    let avg = perms.iter().map(|p| beta_component(&t, *p).unwrap()).sum::<f64>() / 3.0;
    assert_abs_diff_eq!(b.xxy, avg, epsilon = 1e-12);
    for p in perms {
        assert_eq!(b.get(p), b.xxy);
    }
    assert_abs_diff_eq!(beta_component(&t, [0, 1, 1]).unwrap(), beta_component(&t, [1, 1, 0]).unwrap(), epsilon = 1e-10);
    let g = gamma_intrinsic(&t).unwrap();
    let gperms = [[0, 0, 1, 1], [0, 1, 0, 1], [0, 1, 1, 0], [1, 0, 0, 1], [1, 0, 1, 0], [1, 1, 0, 0]];
    let gavg = gperms.iter().map(|p| gamma_component(&t, *p).unwrap()).sum::<f64>() / 6.0;
    assert_abs_diff_eq!(g.xxyy, gavg, epsilon = 1e-12);
    for p in gperms {
        assert_eq!(g.get(p), g.xxyy);
    }
}

#[test]
fn full_truncation_is_the_full_sum() {
    let a = analyze(&GraphSpec::straight_wire(&[(-5.0, 0.2), (-2.0, 0.55)]).unwrap(), &AnalysisOptions::default()).unwrap();
    let n = a.table.len();
    let b = truncated_response(&a.table, Which::Beta, n).unwrap();
    let g = truncated_response(&a.table, Which::Gamma, n).unwrap();
    assert_abs_diff_eq!(b, a.report.beta.components.xxx, epsilon = 1e-12);
    assert_abs_diff_eq!(g, a.report.gamma.components.xxxx, epsilon = 1e-12);
    assert!(truncated_response(&a.table, Which::Beta, 1).is_err());
}

#[test]
fn symmetric_wire_ranking_falls_back_to_index_order() {
    let a = analyze(&GraphSpec::delta_atom(0.0, 0.1).unwrap(), &AnalysisOptions::default()).unwrap();
    let r = importance_ranking(&a.table, Which::Beta).unwrap();
    assert_eq!(r, (1..a.table.len()).collect::<Vec<_>>());
}

#[test]
fn ranking_and_response_are_scale_free() {
    let spec = GraphSpec::straight_wire(&[(-6.0, 0.25), (3.0, 0.6)]).unwrap();
    let a = analyze(&spec, &AnalysisOptions::default()).unwrap();
    let b = analyze(&spec.scaled(3.7), &AnalysisOptions::default()).unwrap();
    assert_eq!(importance_ranking(&a.table, Which::Gamma).unwrap(), importance_ranking(&b.table, Which::Gamma).unwrap());
    assert_abs_diff_eq!(a.report.beta.components.xxx, b.report.beta.components.xxx, epsilon = 1e-10);
    assert_abs_diff_eq!(a.report.gamma.components.xxxx, b.report.gamma.components.xxxx, epsilon = 1e-10);
}

#[test]
fn rotating_the_graph_rotates_the_tensor() {
    let spec = GraphSpec::bent_wire(&[(-4.0, 0.45)], 1.0, &[0.0, 0.9]).unwrap();
    let a = report(&spec);
    let phi = 0.7;
    let b = report(&spec.rotated(phi));
    assert_abs_diff_eq!(b.beta.components.xxx, rotate_beta(&a.beta.components, -phi), epsilon = 1e-6);
    assert_abs_diff_eq!(b.beta.max, a.beta.max, epsilon = 1e-6);
    assert_abs_diff_eq!(b.beta.norm, a.beta.norm, epsilon = 1e-6);
    assert_abs_diff_eq!(b.gamma.norm, a.gamma.norm, epsilon = 1e-6);
}
