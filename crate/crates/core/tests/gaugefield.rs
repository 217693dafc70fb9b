use num_complex::Complex64;
use std::f64::consts::PI;
use thinring::gaugefield::*;
use thinring::geometry::*;
use thinring::spectral2d::{lowest_eigenpairs, EigenOptions, FormKind, StripOperator};

fn star() -> GeometryData {
    build_geometry(&DomainSpec::star(1.0, vec![0.0, 0.1], vec![]), 512).unwrap()
}

fn poisson(h: f64) -> Construction {
    Construction::PoissonFd { grid_h: h, solve_tol: 1e-10 }
}

#[test]
fn analytic_disc_trace_is_gamma0() {
    let g = build_geometry(&DomainSpec::disc(1.0), 256).unwrap();
    let f = build_field(&g, Construction::AnalyticDisc).unwrap();
    assert!(f.tangential_trace.iter().all(|v| (v - 0.5).abs() < 1e-14));
    assert!(f.phi0.iter().all(|v| v.abs() < 1e-14));
    assert!(gauge_phase_derivative(&f).iter().all(|v| v.abs() < 1e-14));
}

#[test]
fn analytic_construction_needs_a_disc() {
    assert!(build_field(&star(), Construction::AnalyticDisc).is_err());
}

#[test]
fn poisson_trace_on_disc_converges_to_gamma0() {
    let g = build_geometry(&DomainSpec::disc(1.0), 256).unwrap();
    let dev = |h: f64| {
        let f = build_field(&g, poisson(h)).unwrap();
        f.tangential_trace.iter().map(|v| (v - 0.5).abs()).fold(0.0, f64::max)
    };
    let (coarse, fine) = (dev(0.02), dev(0.01));
    assert!(fine < 1e-3, "{fine}");
    assert!(fine < 0.75 * coarse, "{coarse} -> {fine}");
}

#[test]
fn trace_mean_is_gamma0() {
    let g = star();
    let f = build_field(&g, poisson(0.02)).unwrap();
    let mean = f.tangential_trace.iter().sum::<f64>() / f.tangential_trace.len() as f64;
    assert!((mean - g.gamma0).abs() < 1e-6 * g.gamma0);
}

#[test]
fn star_phase_is_periodic_at_two_resolutions() {
    let g = star();
    let mut phis = Vec::new();
    for h in [0.02, 0.01] {
        let f = build_field(&g, poisson(h)).unwrap();
        let ends = f.phi0_at(&[-g.half_perimeter_l, g.half_perimeter_l]);
        assert!((ends[1] - ends[0]).abs() < 1e-6);
        assert!(f.poisson_residual <= 1e-10);
        phis.push(f.phi0);
    }
    // the phase itself is resolution independent to O(h)
    let diff = phis[0].iter().zip(&phis[1]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let size = phis[1].iter().map(|v| v.abs()).fold(0.0, f64::max);
    assert!(size > 1e-2 && diff < 0.05 * size, "{diff} vs {size}");
}

#[test]
fn phase_derivative_matches_trace() {
    let g = star();
    let f = build_field(&g, poisson(0.02)).unwrap();
    let d = gauge_phase_derivative(&f);
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    assert!(mean.abs() < 1e-10);
    for (dv, tr) in d.iter().zip(&f.tangential_trace) {
        assert!((dv - (tr - g.gamma0)).abs() < 1e-8);
    }
    assert!(f.phi0_at(&[0.0])[0].abs() < 1e-12);
}

#[test]
fn poisson_rejects_tight_budget() {
    let g = star();
    let bad = Construction::PoissonFd { grid_h: 0.05, solve_tol: 0.0 };
    assert!(build_field(&g, bad).is_err());
}

#[test]
fn gauge_round_trip() {
    let g = star();
    let f = build_field(&g, poisson(0.02)).unwrap();
    let chart = build_strip_with_scheme(&g, 0.02, 64, 8, TScheme::Lobatto).unwrap();
    let v: Vec<Complex64> = (0..chart.len()).map(|k| Complex64::new((k as f64).sin(), (k as f64 * 0.3).cos())).collect();
    let back = to_strip_gauge(&chart, &f, 37.0, &to_physical_gauge(&chart, &f, 37.0, &v));
    for (a, b) in v.iter().zip(&back) {
        assert!((a - b).norm() < 1e-12);
    }
}

/// A periodic gauge change χ(s) multiplies the s-links by e^{ib(χ(s_{i+1})−χ(s_i))}
/// and must leave the spectrum unchanged.
#[test]
fn spectrum_is_independent_of_the_phase() {
    let g = star();
    let chart = build_strip_with_scheme(&g, 0.04, 96, 8, TScheme::Lobatto).unwrap();
    let b = 20.0;
    let op = StripOperator::assemble(&chart, b, FormKind::Exact);
    let chi = |s: f64| 0.3 * (PI * s / chart.half_perimeter_l).sin() + 0.1 * (3.0 * PI * s / chart.half_perimeter_l).cos();
    let mut gauged = op.clone();
    for i in 0..chart.n_s {
        let s0 = chart.s_nodes[i];
        let s1 = s0 + chart.h_s;
        let phase = Complex64::from_polar(1.0, b * (chi(s1) - chi(s0)));
        gauged.links[i].iter_mut().for_each(|l| *l *= phase);
    }
    let opts = EigenOptions { n_eigs: 3, ..Default::default() };
    let a = lowest_eigenpairs(&op, &opts).unwrap();
    let c = lowest_eigenpairs(&gauged, &opts).unwrap();
    for (x, y) in a.values.iter().zip(&c.values) {
        assert!((x - y).abs() < 1e-9 * x.abs().max(1.0), "{x} vs {y}");
    }
}
