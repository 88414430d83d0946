use std::f64::consts::PI;

use nanochiral::fiber::FiberSpec;
use nanochiral::incident::{
    cylinder_coefficients, plane_wave_field, IncidentConfig, IncidentField, IncidentModel, Side,
};
use nanochiral::polarization::{qwp_state, PolState3};
use num_complex::Complex64;
use proptest::prelude::*;

fn reference_fiber() -> FiberSpec {
    FiberSpec::silica_in_vacuum(157.5e-9, 532e-9).unwrap()
}

#[test]
fn boundary_conditions_hold_on_the_surface() {
    for spec in [
        reference_fiber(),
        FiberSpec::silica_in_vacuum(400e-9, 532e-9).unwrap(),
        FiberSpec::new(250e-9, 2.0, 1.33, 800e-9).unwrap(),
    ] {
        let s = cylinder_coefficients(&spec).unwrap();
        let a = spec.radius;
        let mut worst = 0.0f64;
        for i in 0..360 {
            let phi = (i as f64).to_radians();
            let (ez_in, hphi_in) = s.tm_tangential(a, phi, Side::Interior).unwrap();
            let (ez_out, hphi_out) = s.tm_tangential(a, phi, Side::Exterior).unwrap();
            let (hz_in, ephi_in) = s.te_tangential(a, phi, Side::Interior).unwrap();
            let (hz_out, ephi_out) = s.te_tangential(a, phi, Side::Exterior).unwrap();
            for d in [
                ez_in - ez_out,
                hphi_in - hphi_out,
                hz_in - hz_out,
                ephi_in - ephi_out,
            ] {
                worst = worst.max(d.norm());
            }
        }
        assert!(worst < 1e-8, "boundary residual {worst:e}");
    }
}

#[test]
fn radial_displacement_jumps_by_permittivity() {
    let spec = reference_fiber();
    let s = cylinder_coefficients(&spec).unwrap();
    let y = PolState3::linear_y();
    let (eps_in, eps_out) = (spec.n_core.powi(2), spec.n_clad.powi(2));
    let a = spec.radius;
    for i in 0..24 {
        let phi = 0.1 + i as f64 * PI / 12.0;
        let inside = s.at_radius(a, Side::Interior).unwrap().field(&y, phi);
        let outside = s.at_radius(a, Side::Exterior).unwrap().field(&y, phi);
        let radial = |e: nanochiral::ComplexField3| e.ex * phi.cos() + e.ey * phi.sin();
        let jump = radial(inside) * eps_in - radial(outside) * eps_out;
        assert!(jump.norm() < 1e-8);
    }
}

#[test]
fn index_matched_fiber_leaves_plane_wave_untouched() {
    let spec = FiberSpec::new(157.5e-9, 1.0, 1.0, 532e-9).unwrap();
    for theta in [0.0, 20.0, 45.0, 110.0] {
        let pol = qwp_state(theta);
        let modified = IncidentField::new(&spec, pol, IncidentModel::CylinderModified).unwrap();
        let bare = IncidentConfig::new(pol, IncidentModel::Unperturbed, spec.k0()).unwrap();
        for &r in &[0.2 * spec.radius, 0.99 * spec.radius, spec.radius, 2.5 * spec.radius] {
            for i in 0..24 {
                let phi = i as f64 * PI / 12.0 + 0.03;
                let e = modified.at(r, phi).unwrap();
                let p = plane_wave_field(&bare, [r * phi.cos(), r * phi.sin(), 0.0]);
                assert!(e.max_abs_diff(&p) < 1e-10);
            }
        }
    }
}

fn tm_intensity(r: f64, phi_deg: f64) -> f64 {
    let spec = reference_fiber();
    let s = cylinder_coefficients(&spec).unwrap();
    s.modified_field(&PolState3::linear_z(), r, phi_deg.to_radians())
        .unwrap()
        .norm_sqr()
}

#[test]
fn fiber_focuses_light_onto_its_back_side() {
    let a = reference_fiber().radius;
    assert!(tm_intensity(a, 180.0) > tm_intensity(a, 0.0));
    assert!(tm_intensity(a, 180.0) > 1.5);
}

#[test]
fn shadow_regions_flank_the_focus() {
    let r = reference_fiber().radius + 45e-9;
    for centre in [120.0, 240.0] {
        let profile: Vec<(f64, f64)> = (-20..=20)
            .map(|d| {
                let phi = centre + d as f64;
                (phi, tm_intensity(r, phi))
            })
            .collect();
        let (phi_min, i_min) = profile
            .iter()
            .copied()
            .fold((0.0, f64::INFINITY), |acc, p| if p.1 < acc.1 { p } else { acc });
        assert!((phi_min - centre).abs() < 10.0, "minimum at {phi_min}");
        assert!(i_min < tm_intensity(r, centre - 30.0));
        assert!(i_min < tm_intensity(r, centre + 30.0));
        assert!(i_min < 0.5);
    }
}

#[test]
fn unperturbed_model_is_the_plane_wave() {
    let spec = reference_fiber();
    let pol = qwp_state(45.0);
    let field = IncidentField::new(&spec, pol, IncidentModel::Unperturbed).unwrap();
    let e = field.at(spec.radius, 1.0).unwrap();
    assert!((e.norm() - 1.0).abs() < 1e-14);
    assert!(field.series().is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn channels_superpose_linearly(
        wy in (-1.0f64..1.0, -1.0f64..1.0),
        wz in (-1.0f64..1.0, -1.0f64..1.0),
        r_over_a in 0.05f64..3.0,
        phi in 0.0f64..6.3,
    ) {
        let spec = reference_fiber();
        let s = cylinder_coefficients(&spec).unwrap();
        let (cy, cz) = (Complex64::new(wy.0, wy.1), Complex64::new(wz.0, wz.1));
        prop_assume!(cy.norm() + cz.norm() > 1e-3);
        let v = nanochiral::ComplexField3::new(Complex64::new(0.0, 0.0), cy, cz);
        let pol = PolState3::new(v).unwrap();
        let norm = v.norm();
        let r = r_over_a * spec.radius;
        let total = s.modified_field(&pol, r, phi).unwrap();
        let ey = s.modified_field(&PolState3::linear_y(), r, phi).unwrap();
        let ez = s.modified_field(&PolState3::linear_z(), r, phi).unwrap();
        let recombined = (ey.scale(cy) + ez.scale(cz)) * (1.0 / norm);
        prop_assert!(total.max_abs_diff(&recombined) < 1e-12);
    }

    #[test]
    fn tm_field_is_mirror_symmetric(r_over_a in 0.05f64..3.0, phi in 0.0f64..3.2) {
        let spec = reference_fiber();
        let s = cylinder_coefficients(&spec).unwrap();
        let z = PolState3::linear_z();
        let r = r_over_a * spec.radius;
        let up = s.modified_field(&z, r, phi).unwrap().norm();
        let down = s.modified_field(&z, r, -phi).unwrap().norm();
        prop_assert!((up - down).abs() < 1e-12);
    }
}
