use lplab_core::direct_integral::{
    free_generator, from_spectral, inner_product, to_spectral, translate, AuxSpace, LpVector, TimeGrid,
};
use lplab_core::{C64, LabError};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn grid(n: usize) -> TimeGrid {
    TimeGrid::new(-4.0, 4.0, n).unwrap()
}

fn random_state(grid: TimeGrid, d: usize, seed: &[f64]) -> LpVector {
    let aux = AuxSpace::new(d).unwrap();
    LpVector::from_fn(grid, aux, |t, a| {
        let k = a as f64 + 1.0;
        c((seed[0] * t * k).sin() + seed[1], (seed[2] * t + k).cos() * seed[3])
    })
}

#[test]
fn grid_validation() {
    assert!(TimeGrid::new(0.0, 1.0, 12).is_err());
    assert!(TimeGrid::new(0.0, 1.0, 4).is_err());
    assert!(TimeGrid::new(1.0, 1.0, 16).is_err());
    assert!(AuxSpace::new(0).is_err());
    let g = TimeGrid::new(0.0, 8.0, 16).unwrap();
    assert_eq!(g.spacing(), 0.5);
    assert_eq!(g.point(3), 1.5);
}

#[test]
fn zero_vector_has_zero_norm() {
    let g = grid(16);
    let f = LpVector::zeros(g, AuxSpace::new(2).unwrap());
    assert_eq!(inner_product(&f, &f).unwrap(), c(0.0, 0.0));
}

#[test]
fn orthogonal_auxiliary_vectors_on_one_node() {
    let g = grid(16);
    let aux = AuxSpace::new(2).unwrap();
    let f = LpVector::from_fn(g, aux, |t, a| if t == g.point(5) && a == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) });
    let h = LpVector::from_fn(g, aux, |t, a| if t == g.point(5) && a == 1 { c(1.0, 0.0) } else { c(0.0, 0.0) });
    assert_eq!(inner_product(&f, &h).unwrap(), c(0.0, 0.0));
}

#[test]
fn constant_unit_vector_riemann_sum() {
    // 16 nodes, spacing 0.5: 16 * 0.5 = 8
    let g = TimeGrid::new(0.0, 8.0, 16).unwrap();
    let aux = AuxSpace::new(3).unwrap();
    let u = [0.6, 0.0, 0.8];
    let f = LpVector::from_fn(g, aux, |_, a| c(u[a], 0.0));
    assert!((inner_product(&f, &f).unwrap() - c(8.0, 0.0)).norm() < 1e-14);
}

#[test]
fn mismatched_grids_are_rejected() {
    let f = LpVector::zeros(grid(16), AuxSpace::new(1).unwrap());
    let g = LpVector::zeros(grid(32), AuxSpace::new(1).unwrap());
    assert!(matches!(inner_product(&f, &g), Err(LabError::Dimension(_))));
    let h = LpVector::zeros(grid(16), AuxSpace::new(2).unwrap());
    assert!(matches!(inner_product(&f, &h), Err(LabError::Dimension(_))));
}

#[test]
fn spectral_transform_of_zero_is_zero() {
    let f = LpVector::zeros(grid(32), AuxSpace::new(2).unwrap());
    assert!(to_spectral(&f).values().iter().all(|z| *z == c(0.0, 0.0)));
}

#[test]
fn spectral_transform_matches_direct_sum() {
    let g = TimeGrid::new(-3.0, 5.0, 32).unwrap();
    let f = random_state(g, 2, &[0.7, 0.1, 1.3, 0.5]);
    let s = to_spectral(&f);
    let sig = g.sigma_grid();
    for (m, &sg) in sig.iter().enumerate() {
        for a in 0..2 {
            let direct: C64 = (0..g.len())
                .map(|k| C64::from_polar(g.spacing(), -sg * g.point(k)) * f.values()[(k, a)])
                .sum();
            assert!((direct - s.values()[(m, a)]).norm() < 1e-12);
        }
    }
}

#[test]
fn plane_wave_peaks_at_its_frequency() {
    let g = grid(64);
    let sig = g.sigma_grid();
    let target = 7;
    let sigma0 = sig[target] + 0.3 * (sig[1] - sig[0]);
    let f = LpVector::from_fn(g, AuxSpace::new(1).unwrap(), |t, _| C64::from_polar(1.0, sigma0 * t));
    let s = to_spectral(&f);
    let (argmax, _) = s
        .values()
        .column(0)
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .unwrap();
    assert_eq!(argmax, target);
}

#[test]
fn lattice_shift_moves_delta_by_three_nodes() {
    let g = grid(32);
    let aux = AuxSpace::new(1).unwrap();
    let j = 10;
    let f = LpVector::from_fn(g, aux, |t, _| if t == g.point(j) { c(1.0, 0.0) } else { c(0.0, 0.0) });
    let moved = translate(&f, 3.0 * g.spacing());
    for k in 0..32 {
        let expected = if k == j + 3 { 1.0 } else { 0.0 };
        assert_eq!(moved.values()[(k, 0)], c(expected, 0.0));
    }
}

#[test]
fn translate_by_zero_is_identity() {
    let f = random_state(grid(32), 2, &[0.3, 0.2, 0.9, 1.0]);
    assert_eq!(translate(&f, 0.0), f);
}

#[test]
fn spectral_path_agrees_with_index_shift_on_lattice() {
    // a lattice multiple perturbed below the detection threshold goes
    // through the index path; compare with the spectral phase directly
    let g = grid(64);
    let f = random_state(g, 1, &[0.5, 0.0, 0.8, 0.4]);
    let tau = 5.0 * g.spacing();
    let exact = translate(&f, tau);
    let spectral = lplab_core::direct_integral::spectral_multiply(&f, |s| C64::from_polar(1.0, -s * tau));
    let diff = (exact.values() - spectral.values()).norm();
    assert!(diff < 1e-12 * exact.values().norm());
}

#[test]
fn free_generator_is_hermitian_and_generates_translation() {
    let g = grid(32);
    let k0 = free_generator(&g);
    assert!((&k0 - k0.adjoint()).norm() < 1e-12);
    let f = random_state(g, 1, &[0.4, 0.3, 0.6, 0.2]);
    let x = f.to_flat();
    let kx = &k0 * &x;
    let via_spectral = lplab_core::direct_integral::spectral_multiply(&f, |s| c(s, 0.0)).to_flat();
    assert!((kx - via_spectral).norm() < 1e-12 * x.norm() * 50.0);
}

#[test]
fn seam_margin_detects_edge_support() {
    let g = grid(32);
    let aux = AuxSpace::new(1).unwrap();
    let inner = LpVector::from_fn(g, aux, |t, _| if t.abs() < 1.0 { c(1.0, 0.0) } else { c(0.0, 0.0) });
    assert!(inner.check_seam_margin(4));
    let edge = LpVector::from_fn(g, aux, |t, _| if t > 3.7 { c(1.0, 0.0) } else { c(0.0, 0.0) });
    assert!(!edge.check_seam_margin(4));
}

#[test]
fn from_values_rejects_non_finite() {
    let g = grid(8);
    let mut v = DMatrix::from_element(8, 1, c(0.0, 0.0));
    v[(2, 0)] = c(f64::NAN, 0.0);
    assert!(LpVector::from_values(g, AuxSpace::new(1).unwrap(), v).is_err());
}

proptest! {
    #[test]
    fn parseval(a in -2.0f64..2.0, b in -1.0f64..1.0, cc in -3.0f64..3.0, d in 0.1f64..2.0, dim in 1usize..4) {
        let f = random_state(grid(64), dim, &[a, b, cc, d]);
        let s = to_spectral(&f);
        prop_assert!((f.norm() - s.norm()).abs() <= 1e-10 * f.norm().max(1e-300));
    }

    #[test]
    fn spectral_round_trip(a in -2.0f64..2.0, b in -1.0f64..1.0, cc in -3.0f64..3.0, d in 0.1f64..2.0) {
        let f = random_state(grid(128), 2, &[a, b, cc, d]);
        let back = from_spectral(&to_spectral(&f));
        prop_assert!((back.values() - f.values()).norm() <= 1e-12 * f.values().norm());
    }

    #[test]
    fn translation_is_unitary_and_a_group(a in -3.0f64..3.0, b in -3.0f64..3.0, s in 0.1f64..2.0) {
        let f = random_state(grid(64), 2, &[s, 0.2, 1.1, 0.7]);
        let ab = translate(&translate(&f, a), b);
        let direct = translate(&f, a + b);
        prop_assert!((ab.values() - direct.values()).norm() <= 1e-12 * f.values().norm());
        prop_assert!((translate(&f, a).norm() - f.norm()).abs() <= 1e-12 * f.norm());
    }

    #[test]
    fn lattice_group_law(a in -40i64..40, b in -40i64..40) {
        let g = grid(64);
        let f = random_state(g, 1, &[0.9, 0.1, 0.5, 0.3]);
        let h = g.spacing();
        let ab = translate(&translate(&f, a as f64 * h), b as f64 * h);
        let direct = translate(&f, (a + b) as f64 * h);
        prop_assert!((ab.values() - direct.values()).norm() <= 1e-12 * f.values().norm());
    }

    #[test]
    fn inner_product_conjugate_symmetric(a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let g = grid(32);
        let f = random_state(g, 2, &[a, 0.1, 0.7, 0.5]);
        let h = random_state(g, 2, &[b, -0.4, 1.9, 1.2]);
        let fh = inner_product(&f, &h).unwrap();
        let hf = inner_product(&h, &f).unwrap();
        prop_assert!((fh - hf.conj()).norm() <= 1e-14 * fh.norm().max(1.0));
    }
}
