use approx::assert_relative_eq;
use bimeron::field::{apply_symmetry, sample, Director, Field, GridSpec, MobiusParams, Symmetry};
use bimeron::fit::*;
use bimeron::Error;
use num_complex::Complex;

fn mobius(z0: Complex<f64>, rho: f64, phi: f64, alpha: f64, beta: f64) -> MobiusParams<f64> {
    MobiusParams::new(z0, rho, phi, alpha, beta).unwrap().canonical()
}

fn grid() -> GridSpec<f64> {
    GridSpec::new(8.0, 201).unwrap()
}

fn bumped(field: &Field<f64>, amp: f64) -> Field<f64> {
    let g = *field.grid();
    let values = field
        .values()
        .iter()
        .enumerate()
        .map(|(k, d)| {
            let z = g.point(k % g.n(), k / g.n());
            let s = amp * (-(z - Complex::new(1.0, 0.5)).norm_sqr()).exp();
            Director::from_raw(d.x + s, d.y, d.z - s)
        })
        .collect();
    Field::from_vectors(g, values).unwrap()
}

#[test]
fn guess_reads_centre_and_half_mass_radius() {
    let p = mobius(Complex::new(0.0, 0.0), 0.5, 0.0, 0.0, 0.0);
    let f = sample(|z| p.eval(z), grid());
    let g = initial_guess(&f).unwrap();
    assert!(g.z0.norm() < 1e-9, "{:?}", g.z0);
    assert!(g.rho > 0.25 && g.rho < 1.0, "{}", g.rho);

    let h = grid().spacing();
    let moved = apply_symmetry(&f, Symmetry::Translation(Complex::new(1.0, 0.0)));
    let gm = initial_guess(&moved).unwrap();
    assert!((gm.z0 - Complex::new(1.0, 0.0)).norm() <= h, "{:?}", gm.z0);
}

#[test]
fn constant_field_has_no_core() {
    let f = Field::constant(grid(), Director::e2());
    assert!(matches!(initial_guess(&f), Err(Error::DegenerateDensity)));
}

#[test]
fn exact_mobius_map_is_recovered() {
    let truth = mobius(Complex::new(0.3, -0.2), 0.8, 0.4, 0.5, 0.2);
    let f = sample(|z| truth.eval(z), grid());
    assert!(defect(&f, &truth) < 1e-20);
    let guess = initial_guess(&f).unwrap();
    let r = fit(&f, &guess, &FitConfig::default()).unwrap();
    let p = r.params.canonical();
    assert!((p.z0 - truth.z0).norm() < 1e-3, "{p:?}");
    assert_relative_eq!(p.rho, truth.rho, max_relative = 1e-3);
    for (a, b) in [(p.phi, truth.phi), (p.alpha, truth.alpha), (p.beta, truth.beta)] {
        assert!((a - b).abs() < 1e-3, "{p:?}");
    }
    assert!(r.defect < 1e-6);
    assert_eq!(r.alpha_abs, r.params.alpha.abs());
    assert!(r.rho_times_log.is_none());
    let with = r.with_sigma(0.1);
    assert_relative_eq!(with.rho_times_log.unwrap(), with.params.rho * 100f64.ln(), max_relative = 1e-15);
}

#[test]
fn perturbed_map_fits_at_least_as_well_as_the_truth() {
    let truth = mobius(Complex::new(0.0, 0.0), 1.0, 0.0, 0.3, 0.0);
    let f = bumped(&sample(|z| truth.eval(z), grid()), 0.05);
    let delta = defect(&f, &truth);
    let guess = initial_guess(&f).unwrap();
    let r = fit(&f, &guess, &FitConfig::default()).unwrap();
    assert!(r.defect <= delta + 1e-8, "{} vs {delta}", r.defect);
    assert!(r.defect <= defect(&f, &guess));
    assert_relative_eq!(r.defect, defect(&f, &r.params), max_relative = 1e-12);
}

#[test]
fn stability_ratio_needs_a_dirichlet_excess() {
    let truth = mobius(Complex::new(0.0, 0.0), 1.0, 0.0, 0.0, 0.0);
    let exact = sample(|z| truth.eval(z), grid());
    let r = fit(&exact, &truth, &FitConfig { window: None, ..FitConfig::default() }).unwrap();
    let s = stability_check(&exact, &r);
    assert!(s.dirichlet_excess < 0.0);
    assert_eq!(s.ratio, f64::INFINITY);
    assert_eq!(s.stability_l, f64::INFINITY);

    let bent = bumped(&exact, 0.3);
    let r = fit(&bent, &truth, &FitConfig::default()).unwrap();
    let s = stability_check(&bent, &r);
    assert!(s.dirichlet_excess > 0.0);
    assert!(s.ratio.is_finite() && s.ratio > 0.0);
    assert_relative_eq!(s.ratio, r.defect / s.dirichlet_excess, max_relative = 1e-15);
}
