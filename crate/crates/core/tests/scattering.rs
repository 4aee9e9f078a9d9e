mod common;

use std::sync::OnceLock;

use common::*;
use lplab_core::direct_integral::{AuxSpace, LpVector, TimeGrid};
use lplab_core::evolution::{semigroup_generator, KappaFamily, Semigroup, SubspaceLayout};
use lplab_core::numeric::linalg;
use lplab_core::scattering::*;
use lplab_core::{LabError, C64};
use nalgebra::{DMatrix, DVector};

const T: f64 = 40.0;

fn grid() -> TimeGrid {
    TimeGrid::new(-32.0, 32.0, 512).unwrap()
}

fn layout() -> SubspaceLayout {
    SubspaceLayout::new(8.0).unwrap()
}

fn one() -> DMatrix<C64> {
    DMatrix::from_element(1, 1, c(1.0, 0.0))
}

fn system(family: KappaFamily, d: usize) -> ScatteringSystem {
    let aux = AuxSpace::new(d).unwrap();
    let k = family.build(grid(), aux, &layout()).unwrap();
    ScatteringSystem::new(k, layout()).unwrap()
}

fn free() -> &'static ScatteringSystem {
    static S: OnceLock<ScatteringSystem> = OnceLock::new();
    S.get_or_init(|| system(KappaFamily::Zero, 1))
}

fn resonant() -> &'static ScatteringSystem {
    static S: OnceLock<ScatteringSystem> = OnceLock::new();
    S.get_or_init(|| system(separable_family(1.0, one()), 1))
}

fn resonant_d2() -> &'static ScatteringSystem {
    static S: OnceLock<ScatteringSystem> = OnceLock::new();
    S.get_or_init(|| system(separable_family(1.0, mixed_aux()), 2))
}

#[test]
fn free_s_matrix_is_identity_kernel() {
    let s = free().s_matrix(T).unwrap();
    let h = grid().spacing();
    assert!((s.kernel[0][(0, 0)] - c(1.0 / h, 0.0)).norm() < 1e-12);
    assert!(s.kernel.iter().skip(1).all(|k| k[(0, 0)].norm() < 1e-12));
    assert!(s.unitarity_defect() < 1e-12);
    assert!(s.sigma_variation(f64::INFINITY) < 1e-12);
}

#[test]
fn incoming_wave_operator_fixes_states_that_never_interact() {
    let sys = resonant();
    let psi = sys.packet(-12.0, 1.0, 0.5, &DVector::from_element(1, c(1.0, 0.0)));
    // trajectory [-28, -12] stays clear of [0, 8] and of its image at [-64, -56]
    let w = sys.wave_apply(WaveSign::Minus, 16.0, &psi);
    assert!((w - &psi).norm() < 1e-8 * psi.norm());
}

#[test]
fn wave_operators_are_isometric_and_certified() {
    let sys = resonant_d2();
    let mut r = rng(3);
    let probes = sys.random_probes(T, 6, &mut r).unwrap();
    for sign in [WaveSign::Plus, WaveSign::Minus] {
        for p in &probes {
            let w = sys.wave_apply(sign, T, p);
            assert!((w.norm() - p.norm()).abs() < 1e-10 * p.norm());
        }
        let cert = sys.wave_operator(sign, T, &probes).unwrap();
        assert!(cert.gap <= LIMIT_TOL);
        assert!(cert.cook_tail <= COOK_TOL);
    }
}

#[test]
fn short_times_are_not_certified() {
    let sys = resonant();
    match sys.s_matrix(6.0) {
        Err(LabError::LimitNotReached { tau, gap }) => {
            assert_eq!(tau, 6.0);
            assert!(gap > LIMIT_TOL);
        }
        other => panic!("expected a limit failure, got {other:?}"),
    }
}

#[test]
fn scattering_times_off_the_even_lattice_are_rejected() {
    let h = grid().spacing();
    for tau in [T + 0.5 * h, T + h, -T, 62.0] {
        assert!(matches!(resonant().s_matrix(tau), Err(LabError::Domain(_))), "tau = {tau}");
    }
}

#[test]
fn resonant_s_matrix_is_unitary_and_dispersive() {
    for sys in [resonant(), resonant_d2()] {
        let s = sys.s_matrix(T).unwrap();
        assert!(s.unitarity_defect() < 1e-6);
        assert!(s.sigma_variation(std::f64::consts::PI / (2.0 * grid().spacing())) > 1e-2);
    }
}

#[test]
fn local_interaction_gives_flat_s_matrix() {
    let sys = system(
        KappaFamily::Diagonal {
            lambda: 0.7,
            center: 4.0,
            width: 0.6,
            aux_op: mixed_aux(),
        },
        2,
    );
    let s = sys.s_matrix(T).unwrap();
    let band = std::f64::consts::PI / (2.0 * grid().spacing());
    assert!(s.sigma_variation(band) < 1e-6, "variation {:e}", s.sigma_variation(band));
    assert!(s.unitarity_defect() < 1e-6);
}

#[test]
fn converged_s_commutes_with_the_free_generator() {
    let mut r = rng(5);
    for sys in [resonant(), resonant_d2()] {
        let probes = sys.random_probes(T, 6, &mut r).unwrap();
        assert!(sys.stationarity_defect(T, &probes) < 1e-6);
        assert!(sys.intertwining_defect(T, 1.0, &probes) < 1e-6);
        assert!(sys.intertwining_defect(T, -2.5, &probes) < 1e-6);
    }
    let probes = free().random_probes(T, 4, &mut r).unwrap();
    assert_eq!(free().stationarity_defect(T, &probes), 0.0);
}

#[test]
fn truncated_time_breaks_stationarity() {
    let sys = resonant();
    let mut r = rng(6);
    let probes = sys.random_probes(T, 6, &mut r).unwrap();
    let converged = sys.stationarity_defect(T, &probes);
    let truncated = sys.stationarity_defect(4.0, &probes);
    assert!(truncated > 1e3 * converged.max(1e-12), "{truncated:e} vs {converged:e}");
}

fn report(sys: &ScatteringSystem, seed: u64) -> SingularityReport {
    let s = sys.s_matrix(T).unwrap();
    let sg = Semigroup::from_propagator(sys.propagator().clone(), sys.layout().clone());
    let eig = semigroup_generator(&sg).unwrap().exponent_spectrum().unwrap();
    let opts = ContinuationOptions::new(sys.grid(), sys.layout());
    continue_and_locate_singularities(&s, &eig, &opts, &mut rng(seed))
}

#[test]
fn free_system_has_no_singularities() {
    let rep = report(free(), 1);
    assert!(rep.poles.is_empty());
    assert!(rep.flagged.is_empty());
    assert!(rep.eigenvalues.is_empty());
}

#[test]
fn resonance_pole_matches_generator_eigenvalue() {
    let rep = report(resonant(), 2);
    assert_eq!(rep.matches.len(), 1, "{rep:?}");
    assert!(rep.unmatched_poles.is_empty() && rep.unmatched_eigenvalues.is_empty());
    let m = rep.matches[0];
    assert!(m.distance <= 1e-2 * m.eigenvalue.im.abs());
    let pole = rep.poles[0];
    assert!(pole.radius < 1e-2 * pole.position.im.abs());
    assert!(rep.holdout_residual < 1e-10);
}

#[test]
fn resonance_width_shrinks_with_coupling() {
    let widths: Vec<f64> = [0.5, 0.75, 1.0]
        .iter()
        .map(|&lambda| {
            let rep = report(&system(separable_family(lambda, one()), 1), 3);
            assert_eq!(rep.matches.len(), 1, "lambda = {lambda}: {rep:?}");
            rep.matches[0].pole.im.abs()
        })
        .collect();
    assert!(widths[0] > widths[1] && widths[1] > widths[2], "{widths:?}");
}

#[test]
fn age_of_a_node_state() {
    let g = grid();
    let k = g.node_at(-2.0).unwrap();
    let aux = AuxSpace::new(1).unwrap();
    let psi = LpVector::from_fn(g, aux, |t, _| if (t + 2.0).abs() < 1e-12 { c(1.0, 0.0) } else { c(0.0, 0.0) });
    assert_eq!(psi.values()[(k, 0)], c(1.0, 0.0));
    assert!((age_expectation(&layout(), &psi).unwrap() + 2.0).abs() < 1e-14);
}

#[test]
fn age_is_translation_covariant() {
    let sys = free();
    let psi = sys.packet(-16.0, 1.0, 0.3, &DVector::from_element(1, c(1.0, 0.0)));
    let aux = sys.aux();
    let a0 = age_expectation(&layout(), &LpVector::from_flat(grid(), aux, &psi).unwrap()).unwrap();
    for tau in [1.0, 2.5, 5.0] {
        let moved = sys.propagator().apply(tau, &psi);
        let a = age_expectation(&layout(), &LpVector::from_flat(grid(), aux, &moved).unwrap()).unwrap();
        assert!((a - a0 - tau).abs() < 1e-9, "tau = {tau}");
    }
}

#[test]
fn age_grows_while_trapped() {
    let sys = resonant();
    let psi = sys.packet(-6.0, 1.0, 2.0, &DVector::from_element(1, c(1.0, 0.0)));
    let aux = sys.aux();
    let mut last = f64::NEG_INFINITY;
    for step in 0..12 {
        let tau = 0.5 * step as f64;
        let x = sys.propagator().apply(tau, &psi);
        let age = age_expectation(&layout(), &LpVector::from_flat(grid(), aux, &x).unwrap()).unwrap();
        assert!(age > last, "tau = {tau}");
        last = age;
    }
    let gone = sys.propagator().apply(20.0, &psi);
    let gone = LpVector::from_flat(grid(), aux, &gone).unwrap().masked(|k| grid().point(k) >= 0.0);
    assert!(matches!(age_expectation(&layout(), &gone), Err(LabError::UndefinedAge)));
}

fn small_system() -> ScatteringSystem {
    let g = TimeGrid::new(-32.0, 32.0, 256).unwrap();
    let aux = AuxSpace::new(1).unwrap();
    let k = separable_family(1.0, one()).build(g, aux, &layout()).unwrap();
    ScatteringSystem::new(k, layout()).unwrap()
}

#[test]
fn outgoing_time_operator_is_unitarily_equivalent() {
    let sys = small_system();
    let s = sys.s_matrix(T).unwrap();
    let op = s.operator();
    let t_in = AgeObservable::multiplication(sys.grid(), sys.aux(), Representation::Incoming);
    let t_out = outgoing_time_operator(&op, &t_in).unwrap();
    assert_eq!(t_out.representation, Representation::Outgoing);
    let a = t_in.spectrum();
    let b = t_out.spectrum();
    let worst = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst:e}");
    assert!(linalg::max_abs(&(&t_out.operator - &t_in.operator)) > 1e-3);
}

#[test]
fn constant_phase_leaves_time_operator_unchanged() {
    let g = TimeGrid::new(-4.0, 4.0, 16).unwrap();
    let aux = AuxSpace::new(2).unwrap();
    let t_in = AgeObservable::multiplication(&g, aux, Representation::Incoming);
    let phase = DMatrix::from_diagonal(&DVector::from_fn(32, |i, _| C64::from_polar(1.0, 0.3 + (i % 2) as f64)));
    let t_out = outgoing_time_operator(&phase, &t_in).unwrap();
    assert!(linalg::max_abs(&(t_out.operator - &t_in.operator)) < 1e-14);
    let s = SMatrix::identity(g, aux).operator();
    let same = outgoing_time_operator(&s, &t_in).unwrap();
    assert!(linalg::max_abs(&(same.operator - &t_in.operator)) < 1e-14);
}

#[test]
fn non_unitary_s_is_rejected() {
    let g = TimeGrid::new(-4.0, 4.0, 16).unwrap();
    let aux = AuxSpace::new(1).unwrap();
    let t_in = AgeObservable::multiplication(&g, aux, Representation::Incoming);
    let s = DMatrix::identity(16, 16) * c(1.01, 0.0);
    assert!(matches!(outgoing_time_operator(&s, &t_in), Err(LabError::Validation(_))));
}

fn random_state(g: TimeGrid, d: usize, seed: u64) -> LpVector {
    let mut r = rng(seed);
    let x = random_vector(&mut r, g.len() * d);
    LpVector::from_flat(g, AuxSpace::new(d).unwrap(), &x).unwrap()
}

#[test]
fn outgoing_state_has_only_an_outgoing_part() {
    let g = TimeGrid::new(-16.0, 16.0, 64).unwrap();
    let psi = random_state(g, 3, 1).masked(|k| g.point(k) > 8.5);
    let mut r = rng(2);
    let a = AuxObservable::PerFiber(random_hermitian(&mut r, 3));
    let rep = superselection_check(&layout(), &psi, &a).unwrap();
    assert!((rep.global - rep.outgoing).norm() < 1e-12);
    assert_eq!(rep.incoming, c(0.0, 0.0));
    assert_eq!(rep.interaction, c(0.0, 0.0));
}

#[test]
fn identity_observable_splits_the_norm() {
    let g = TimeGrid::new(-16.0, 16.0, 64).unwrap();
    let psi = random_state(g, 2, 4);
    let rep = superselection_check(&layout(), &psi, &AuxObservable::PerFiber(DMatrix::identity(2, 2))).unwrap();
    let sum = rep.incoming + rep.interaction + rep.outgoing;
    assert!((sum.re - psi.norm_squared()).abs() < 1e-12 * psi.norm_squared());
    assert_eq!(rep.cross_terms, 0.0);
}

#[test]
fn random_observables_have_no_cross_terms() {
    let g = TimeGrid::new(-16.0, 16.0, 64).unwrap();
    let mut r = rng(7);
    for seed in 0..20 {
        let psi = random_state(g, 3, 100 + seed);
        let a = random_hermitian(&mut r, 3);
        let rep = superselection_check(&layout(), &psi, &AuxObservable::PerFiber(a.clone())).unwrap();
        assert!(rep.cross_terms <= 1e-12);
        assert!(rep.split_defect <= 1e-12 * rep.global.norm().max(1.0));
        let lifted = linalg::kron(&DMatrix::identity(g.len(), g.len()), &a);
        let again = superselection_check(&layout(), &psi, &AuxObservable::Lifted(lifted)).unwrap();
        assert!((again.global - rep.global).norm() < 1e-12 * rep.global.norm());
    }
}

#[test]
fn node_coupling_observable_is_not_decomposable() {
    let g = TimeGrid::new(-16.0, 16.0, 32).unwrap();
    let psi = random_state(g, 1, 9);
    let mut m = DMatrix::identity(32, 32);
    m[(3, 4)] = c(0.5, 0.0);
    m[(4, 3)] = c(0.5, 0.0);
    let err = superselection_check(&layout(), &psi, &AuxObservable::Lifted(m)).unwrap_err();
    assert!(matches!(err, LabError::NotDecomposable(_)));
    let varying = DMatrix::from_diagonal(&DVector::from_fn(32, |i, _| c(i as f64, 0.0)));
    assert!(superselection_check(&layout(), &psi, &AuxObservable::Lifted(varying)).is_err());
}
