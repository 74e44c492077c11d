//! Tensor assembly on a coarse sphere mesh against the series solution.

use std::sync::Arc;

use mptensor::assembly::{assemble_c_check_direct, assemble_m_symmetric, BFields, TensorBundle};
use mptensor::domain::ContrastSet;
use mptensor::fem::{solve_theta_eddy_all, solve_theta_full_all, solve_theta_static_all, solve_vartheta_all, SolverParams};
use mptensor::mesh::{generate_mesh_with, Mesh, MeshOptions, UnitShape};
use mptensor::oracle::{polya_szego_sphere, sphere_c_check, sphere_mpt_full, SphereSeriesParams};
use mptensor::tensor::Rank2TensorC;
use num_complex::Complex64;

fn coarse_sphere() -> Arc<Mesh> {
    Arc::new(generate_mesh_with(UnitShape::Sphere, &MeshOptions::new(5.0, 0.35)).unwrap())
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn eddy_current_bundle_matches_the_sphere_series() {
    let mesh = coarse_sphere();
    let (mu_r, nu_i, alpha) = (2.0, 1.0, 0.01);
    let theta = solve_theta_eddy_all(nu_i, mu_r, &mesh, &SolverParams::default()).unwrap();
    let cs = ContrastSet {
        eps_r: Complex64::new(1.0, 0.0),
        mu_r,
        nu: Complex64::new(0.0, nu_i),
        nu_r: 0.0,
        nu_i,
        k_alpha: 0.0,
    };
    let bundle = TensorBundle::assemble(&theta, None, &cs, 0.0, alpha).unwrap();
    let p = SphereSeriesParams::eddy(mu_r, nu_i).unwrap();
    let m = sphere_mpt_full(&p, alpha).unwrap();
    for i in 0..3 {
        assert!(rel(bundle.m.0[i][i], m) < 0.05, "M{i}{i} = {} vs {m}", bundle.m.0[i][i]);
    }
    assert!(bundle.m.symmetry_defect() < 1e-6);
    assert!(bundle.a.norm() == 0.0);
    assert!(bundle.r_msi_norm < 1e-4 * bundle.c.norm());

    let cc = sphere_c_check(&p, alpha).unwrap();
    assert!(rel(bundle.c_check.0[0][0], cc) < 0.05);
    let direct = assemble_c_check_direct(&theta, alpha).unwrap();
    assert!((direct - bundle.c_check).max_abs() < 1e-10 * cc.norm());

    let sym = assemble_m_symmetric(&theta, &cs, alpha).unwrap();
    assert!((sym.m - bundle.m).max_abs() < 1e-5 * m.norm());
    assert_eq!(sym.tail_estimate, 0.0);
}

#[test]
fn full_model_bundle_matches_the_sphere_series() {
    let mesh = coarse_sphere();
    let (mu_r, eps_r, ka) = (2.0, Complex64::new(2.0, 0.5), 0.3);
    let cs = ContrastSet { eps_r, mu_r, nu: (eps_r - 1.0) * ka * ka, nu_r: ka * ka, nu_i: 0.5 * ka * ka, k_alpha: ka };
    let params = SolverParams::default();
    let theta = solve_theta_full_all(&cs, &mesh, &params).unwrap();
    let vartheta = solve_vartheta_all(eps_r, &mesh, &params).unwrap();
    let bundle = TensorBundle::assemble(&theta, Some(BFields::Vartheta(&vartheta)), &cs, ka, 1.0).unwrap();
    let p = SphereSeriesParams::full(mu_r, eps_r, ka).unwrap();
    let m = sphere_mpt_full(&p, 1.0).unwrap();
    assert!(rel(bundle.m.0[1][1], m) < 0.05);
    assert!(rel(bundle.b.0[2][2], polya_szego_sphere(eps_r, 1.0).unwrap().0[2][2]) < 0.05);
    assert!(rel(bundle.c_check.0[0][0], sphere_c_check(&p, 1.0).unwrap()) < 0.05);
    assert!(bundle.m.symmetry_defect() < 5e-2);
    let sym = assemble_m_symmetric(&theta, &cs, 1.0).unwrap();
    assert!(rel(sym.m.0[0][0], m) < 0.05);
    assert!(sym.tail_estimate > 0.0 && sym.tail_estimate < 0.1 * m.norm());
}

#[test]
fn static_fields_have_no_coupling_tensors() {
    let mesh = coarse_sphere();
    let theta = solve_theta_static_all(3.0, &mesh, &SolverParams::default()).unwrap();
    let cs = ContrastSet {
        eps_r: Complex64::new(1.0, 0.0),
        mu_r: 3.0,
        nu: Complex64::new(0.0, 0.0),
        nu_r: 0.0,
        nu_i: 0.0,
        k_alpha: 0.0,
    };
    let bundle = TensorBundle::assemble(&theta, None, &cs, 0.0, 2.0).unwrap();
    assert_eq!(bundle.c_check, Rank2TensorC::zeros());
    assert_eq!(bundle.n, bundle.m);
    let expect = 4.0 * std::f64::consts::PI * 8.0 * 2.0 / 5.0;
    assert!((bundle.m.0[0][0].re - expect).abs() < 0.05 * expect);
    assert!(assemble_m_symmetric(&theta, &cs, 2.0).is_err());
}

#[test]
fn alpha_scaling_is_cubic() {
    let mesh = coarse_sphere();
    let theta = solve_theta_eddy_all(5.0, 10.0, &mesh, &SolverParams::default()).unwrap();
    let cs = ContrastSet {
        eps_r: Complex64::new(1.0, 0.0),
        mu_r: 10.0,
        nu: Complex64::new(0.0, 5.0),
        nu_r: 0.0,
        nu_i: 5.0,
        k_alpha: 0.0,
    };
    let one = TensorBundle::assemble(&theta, None, &cs, 0.0, 1.0).unwrap();
    let small = TensorBundle::assemble(&theta, None, &cs, 0.0, 0.03).unwrap();
    let scaled = Rank2TensorC::from_fn(|r, i| one.m.0[r][i] * 0.03f64.powi(3));
    assert!((scaled - small.m).max_abs() <= 1e-12 * small.m.max_abs());
}
