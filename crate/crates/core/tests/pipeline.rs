use std::f64::consts::PI;

use bo3_core::lax::{h2_physical, lax_spectrum};
use bo3_core::potentials::{birkhoff_coordinates, reconstruct, DEFAULT_GAP_THRESHOLD};
use bo3_core::spectral::{integrate, Frame, IntegrationSpec};
use bo3_core::{evolve, translate, traveling_wave_speed, FlowSpec, GapSequence, TorusGrid};
use num_complex::Complex64;

fn gaps(entries: &[(usize, f64, f64)]) -> GapSequence {
    GapSequence::new(entries.iter().map(|&(n, gamma, phi)| (n, Complex64::from_polar(gamma.sqrt(), phi)))).unwrap()
}

fn assert_same_coordinates(got: &GapSequence, want: &GapSequence, tol: f64) {
    assert_eq!(got.support().collect::<Vec<_>>(), want.support().collect::<Vec<_>>());
    for n in want.support() {
        let (z, w) = (got.get(n).unwrap(), want.get(n).unwrap());
        assert!((z - w).norm() <= tol, "n={n}: {z} vs {w}");
    }
}

#[test]
fn birkhoff_map_inverts_reconstruction() {
    for g in [gaps(&[(1, 0.8, 0.3)]), gaps(&[(2, 0.5, -1.0)]), gaps(&[(1, 1.0, 0.7), (2, 0.5, -2.1)])] {
        let u = reconstruct(&g, 512).unwrap();
        let back = birkhoff_coordinates(&u, 128, DEFAULT_GAP_THRESHOLD).unwrap();
        assert_same_coordinates(&back, &g, 1e-8);
    }
}

#[test]
fn lax_gaps_are_the_actions() {
    let g = gaps(&[(1, 1.0, 0.0), (2, 0.5, 0.0)]);
    let s = lax_spectrum(&reconstruct(&g, 512).unwrap(), 128).unwrap();
    assert!((s.gap(1) - 1.0).abs() < 1e-9);
    assert!((s.gap(2) - 0.5).abs() < 1e-9);
    assert!(s.gaps()[2..40].iter().all(|gamma| gamma.abs() < 1e-9));
    // H2 = sum of actions times index.
    assert!((h2_physical(&reconstruct(&g, 512).unwrap()) - 2.0).abs() < 1e-10);
}

#[test]
fn traveling_wave_flow_is_a_translation() {
    let g = gaps(&[(1, 1.0, 0.4), (2, 0.5, 1.1)]);
    let c = traveling_wave_speed(&g, 1e-10).unwrap().unwrap();
    let u0 = reconstruct(&g, 256).unwrap();
    for t in [0.1, 0.37, 1.0] {
        let flowed = evolve(&g, &FlowSpec::new(4, t).unwrap()).unwrap();
        assert_same_coordinates(&flowed, &translate(&g, c * t), 1e-13);
        let u = reconstruct(&flowed, 256).unwrap();
        assert!(u.l2_distance(&u0.shifted(c * t).unwrap()).unwrap() < 1e-10);
    }
}

#[test]
fn off_curve_two_gap_is_not_a_translation() {
    let g = gaps(&[(1, 1.0, 0.0), (2, 0.3, 0.0)]);
    assert_eq!(traveling_wave_speed(&g, 1e-10).unwrap(), None);
    let u0 = reconstruct(&g, 256).unwrap();
    let u = reconstruct(&evolve(&g, &FlowSpec::new(4, 1.0).unwrap()).unwrap(), 256).unwrap();
    let closest = (0..2048)
        .map(|j| u.l2_distance(&u0.shifted(2.0 * PI * j as f64 / 2048.0).unwrap()).unwrap())
        .fold(f64::INFINITY, f64::min);
    assert!(closest > 1e-3, "{closest}");
}

#[test]
fn one_gap_pde_tracks_the_exact_flow() {
    let g = gaps(&[(1, 0.25, 0.2)]);
    let u0 = reconstruct(&g, 128).unwrap();
    let spec = IntegrationSpec { n: 128, dt: 1e-4, t_final: 0.05, snapshots: 5, frame: Frame::Hamiltonian };
    let traj = integrate(&u0, &spec).unwrap();
    assert_eq!(traj.snapshots.len(), 6);
    for (t, u) in &traj.snapshots {
        let exact = reconstruct(&evolve(&g, &FlowSpec::new(4, *t).unwrap()).unwrap(), 128).unwrap();
        assert!(u.l2_distance(&exact).unwrap() < 1e-9, "t={t}");
    }
    assert!(traj.conservation.max_drift() < 1e-10);
}

#[test]
fn grids_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.bo3g");
    let u = reconstruct(&gaps(&[(1, 1.0, 0.0), (2, 0.5, 0.0)]), 64).unwrap();
    u.save(&path).unwrap();
    let v = TorusGrid::load(&path).unwrap();
    assert_eq!(u.samples(), v.samples());
}

#[test]
fn integrator_converges_at_fourth_order() {
    // Differences of successive halvings cancel the spatial error.
    let u0 = reconstruct(&gaps(&[(1, 0.25, 0.0)]), 64).unwrap();
    let finals: Vec<TorusGrid> = [1e-3, 5e-4, 2.5e-4]
        .iter()
        .map(|&dt| {
            let spec = IntegrationSpec { n: 64, dt, t_final: 1.0, snapshots: 1, frame: Frame::Hamiltonian };
            integrate(&u0, &spec).unwrap().snapshots.pop().unwrap().1
        })
        .collect();
    let coarse = finals[0].l2_distance(&finals[1]).unwrap();
    let fine = finals[1].l2_distance(&finals[2]).unwrap();
    let order = (coarse / fine).log2();
    assert!((3.6..=4.4).contains(&order), "order {order} from {coarse:e} / {fine:e}");
}
