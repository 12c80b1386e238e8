mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use spfem::geometry::{contact_area_change_oracle, orientation_vector};
use spfem::scenarios::{make_double_bubble_2d, make_drop_on_substrate, plate_2d, plate_3d};
use spfem::{Anisotropy, Cluster, EnergyModel, Error, LinearSolverKind, Mode, Simulation, SolverConfig};

fn config(dt: f64, mode: Mode) -> SolverConfig {
    SolverConfig { dt, mode, ..Default::default() }
}

/// Dense hand assembly of the linear scheme on a closed polygon, unknowns
/// `(kappa, X)`, solved directly.
fn dense_polygon_step(c: &Cluster, dt: f64) -> (Vec<f64>, Vec<[f64; 2]>) {
    let x = &c.patches[0].vertices;
    let n = x.len();
    let mut omega = vec![[0.0; 2]; n];
    let mut stiff = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let (a, b) = (j, (j + 1) % n);
        let nu = orientation_vector(&[x[a], x[b]]);
        let len = (x[b] - x[a]).norm();
        for v in [a, b] {
            omega[v][0] += 0.5 * nu.x;
            omega[v][1] += 0.5 * nu.y;
        }
        stiff[(a, a)] += 1.0 / len;
        stiff[(b, b)] += 1.0 / len;
        stiff[(a, b)] -= 1.0 / len;
        stiff[(b, a)] -= 1.0 / len;
    }
    let m = 3 * n;
    let mut sys = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DVector::<f64>::zeros(m);
    for i in 0..n {
        // (X_i - x_i) . omega_i / dt - (A kappa)_i = 0
        for c2 in 0..2 {
            sys[(i, n + 2 * i + c2)] = omega[i][c2] / dt;
            rhs[i] += omega[i][c2] * x[i][c2] / dt;
        }
        for j in 0..n {
            sys[(i, j)] = -stiff[(i, j)];
        }
        // kappa_i omega_i + (A X)_i = 0
        for c2 in 0..2 {
            let row = n + 2 * i + c2;
            sys[(row, i)] = omega[i][c2];
            for j in 0..n {
                sys[(row, n + 2 * j + c2)] = stiff[(i, j)];
            }
        }
    }
    let sol = sys.lu().solve(&rhs).unwrap();
    let kappa = (0..n).map(|i| sol[i]).collect();
    let pos = (0..n).map(|i| [sol[n + 2 * i], sol[n + 2 * i + 1]]).collect();
    (kappa, pos)
}

#[test]
fn square_curvature_matches_hand_assembly() {
    let c = polygon(4, 1.0);
    let (kappa, pos) = dense_polygon_step(&c, 0.1);
    let mut sim = Simulation::new(c, config(0.1, Mode::Bgn)).unwrap();
    let out = sim.step().unwrap();
    for (v, k) in kappa.iter().enumerate() {
        assert!((out.kappa[0][v] - k).abs() < 1e-12, "{} vs {k}", out.kappa[0][v]);
        assert!((k - kappa[0]).abs() < 1e-12);
        let x = sim.cluster().patches[0].vertices[v];
        assert!((x.x - pos[v][0]).abs() < 1e-12 && (x.y - pos[v][1]).abs() < 1e-12);
    }
}

#[test]
fn polygon_curvature_is_constant() {
    let c = polygon(24, 1.0);
    let (kappa, _) = dense_polygon_step(&c, 1e-2);
    let mut sim = Simulation::new(c, config(1e-2, Mode::Bgn)).unwrap();
    let out = sim.step().unwrap();
    for (v, k) in kappa.iter().enumerate() {
        assert!((out.kappa[0][v] - k).abs() < 1e-11);
        assert!((out.kappa[0][v] - kappa[0]).abs() < 1e-11);
    }
}

#[test]
fn flat_plates_are_stationary() {
    for c in [plate_2d(33).unwrap(), plate_3d(289).unwrap()] {
        let x0 = c.positions();
        let mut sim = Simulation::new(c, config(1e-2, Mode::Sp)).unwrap();
        let out = sim.step().unwrap();
        assert_eq!(out.diagnostics.picard_iters, 1);
        let pos = sim.cluster().positions();
        for (a, b) in pos.iter().flatten().zip(x0.iter().flatten()) {
            assert!((a - b).norm() <= 1e-12);
        }
        assert!(out.kappa.iter().flatten().all(|k| k.abs() < 1e-10));
    }
}

#[test]
fn linear_mode_is_a_single_picard_iteration() {
    let run = |cfg: SolverConfig| {
        let mut sim = Simulation::new(make_double_bubble_2d(129).unwrap(), cfg).unwrap();
        sim.run(0.2, |_, _| Ok(())).unwrap();
        sim.cluster().positions()
    };
    let bgn = run(config(1e-2, Mode::Bgn));
    let sp1 = run(SolverConfig { picard_max: 1, ..config(1e-2, Mode::Sp) });
    assert_eq!(bgn, sp1);
    let sp = run(config(1e-2, Mode::Sp));
    assert_ne!(bgn, sp);
}

#[test]
fn double_bubble_conserves_volume_and_decreases_energy() {
    let mut sim = Simulation::new(make_double_bubble_2d(129).unwrap(), config(1e-2, Mode::Sp)).unwrap();
    let mut e = sim.diagnostics(0, 0.0).unwrap().energy_total;
    let v0 = sim.initial_volumes().to_vec();
    let mut prev = v0.clone();
    sim.run(0.5, |_, out| {
        let d = &out.diagnostics;
        assert!(d.energy_total <= e + 1e-12);
        assert!(d.v_delta <= 1e-10, "{}", d.v_delta);
        for l in 0..v0.len() {
            assert!((d.volumes[l] - prev[l]).abs() <= 1e-10 * v0[l]);
        }
        assert!(d.picard_iters > 1);
        e = d.energy_total;
        prev = d.volumes.clone();
        Ok(())
    })
    .unwrap();
}

#[test]
fn schur_complement_route_agrees_with_direct() {
    let run = |kind| {
        let cfg = SolverConfig { linear_solver: kind, ..config(1e-2, Mode::Sp) };
        let mut sim = Simulation::new(make_double_bubble_2d(65).unwrap(), cfg).unwrap();
        sim.run(0.05, |_, _| Ok(())).unwrap();
        sim.cluster().positions()
    };
    let a = run(LinearSolverKind::Direct);
    let b = run(LinearSolverKind::SchurCg);
    let diff = a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    assert!(diff < 1e-8, "{diff:e}");
}

fn anisotropic_runs() -> Vec<(&'static str, Cluster, f64)> {
    let mut cusp2 = make_double_bubble_2d(65).unwrap();
    cusp2.energy_model = EnergyModel::Anisotropic(Anisotropy::cusp(2, 1.0, 0.1).unwrap());
    let mut rot = spfem::scenarios::circle_2d(64, 1.0).unwrap();
    rot.energy_model = EnergyModel::Anisotropic(Anisotropy::rotation_2d(3, 0.01).unwrap());
    let mut cusp3 = spfem::scenarios::sphere_3d(300).unwrap();
    cusp3.energy_model = EnergyModel::Anisotropic(Anisotropy::cusp(3, 1.0, 0.1).unwrap());
    vec![("cusp 2d", cusp2, 1e-3), ("rotation 2d", rot, 1e-3), ("cusp 3d", cusp3, 1e-3)]
}

#[test]
fn anisotropic_energy_decreases() {
    for (name, c, dt) in anisotropic_runs() {
        let mut sim = Simulation::new(c, config(dt, Mode::Sp)).unwrap();
        let start = sim.diagnostics(0, 0.0).unwrap();
        let mut e = start.energy_total;
        sim.run(20.0 * dt, |_, out| {
            let d = &out.diagnostics;
            assert!(d.energy_total <= e + 1e-12, "{name}: {} > {e}", d.energy_total);
            assert!(d.v_delta <= 1e-10, "{name}: {}", d.v_delta);
            e = d.energy_total;
            Ok(())
        })
        .unwrap();
        assert!(e < start.energy_total, "{name}");
    }
}

/// Contact energy accumulated by the solver against swept in-plane areas.
#[test]
fn contact_energy_matches_swept_areas() {
    for (d, k) in [(2, 65), (3, 300)] {
        let rho = 0.5;
        let mut sim = Simulation::new(make_drop_on_substrate(d, k, rho).unwrap(), config(1e-3, Mode::Sp)).unwrap();
        let mut oracle = 0.0;
        let mut e = sim.diagnostics(0, 0.0).unwrap().energy_total;
        for _ in 0..100 {
            let old = sim.cluster().positions();
            let out = sim.step().unwrap();
            let new = sim.cluster().positions();
            for b in 0..sim.cluster().boundaries.len() {
                oracle += rho * contact_area_change_oracle(sim.cluster(), &old, &new, b).unwrap().0;
            }
            let got = out.diagnostics.energy_contact;
            assert!((got - oracle).abs() <= 1e-10 * oracle.abs().max(1.0), "d = {d}: {got} vs {oracle}");
            assert!(out.diagnostics.energy_total <= e + 1e-12);
            assert!((out.diagnostics.energy_total - out.diagnostics.energy_surface - got).abs() < 1e-15);
            e = out.diagnostics.energy_total;
        }
        assert!(oracle.abs() > 0.0);
    }
}

#[test]
fn picard_failure_is_reported() {
    let cfg = SolverConfig { picard_max: 2, picard_tol: 1e-15, ..config(0.5, Mode::Sp) };
    let mut sim = Simulation::new(make_double_bubble_2d(65).unwrap(), cfg).unwrap();
    let err = sim.step().unwrap_err();
    assert!(matches!(err, Error::PicardNotConverged { .. }));
    assert!(err.is_solver_failure());
    assert!(err.to_string().contains("reduce the time step"));
}

#[test]
fn zero_length_run_takes_no_steps() {
    let mut sim = Simulation::new(make_double_bubble_2d(65).unwrap(), config(1e-2, Mode::Sp)).unwrap();
    assert!(sim.run(0.0, |_, _| Ok(())).unwrap().is_empty());
    assert!(sim.steps_until(0.015).is_err());
    assert!(Simulation::new(make_double_bubble_2d(65).unwrap(), config(0.0, Mode::Sp)).is_err());
}

/// The elastic block dominates the matrix norm for small `eps`; the curvature
/// rows must still be solved to their own scale or volumes drift.
#[test]
fn badly_scaled_anisotropy_conserves_volume() {
    let mut c = spfem::scenarios::make_standard_bubble_2d(6, 1025).unwrap();
    c.energy_model = EnergyModel::Anisotropic(Anisotropy::rotation_2d(3, 0.01).unwrap());
    let mut sim = Simulation::new(c, config(1e-2, Mode::Sp)).unwrap();
    let mut worst: f64 = 0.0;
    sim.run(1.0, |_, out| {
        worst = worst.max(out.diagnostics.v_delta);
        Ok(())
    })
    .unwrap();
    assert!(worst <= 1e-10, "{worst:e}");
}
