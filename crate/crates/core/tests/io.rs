mod common;

use std::fs;

use common::*;
use spfem::diagnostics::{relative_volume_error, surface_energy};
use spfem::io::{cluster_from_json, cluster_to_json, write_frame, RunConfig};
use spfem::runner::execute;
use spfem::scenarios::{make_double_bubble_2d, make_drop_on_substrate};
use spfem::{Anisotropy, Cluster, CsvWriter, EnergyModel, Point, StepDiagnostics};

#[test]
fn surface_energy_examples() {
    let mut sq = polygon(4, 1.0);
    sq.patches[0].vertices = vec![p2(0.0, 0.0), p2(1.0, 0.0), p2(1.0, 1.0), p2(0.0, 1.0)];
    assert_eq!(surface_energy(&sq, &sq.positions()), 4.0);

    let eps = 0.1;
    sq.energy_model = EnergyModel::Anisotropic(Anisotropy::cusp(2, 1.0, eps).unwrap());
    assert!((surface_energy(&sq, &sq.positions()) - 4.0 * (1.0 + eps)).abs() < 1e-14);

    let c = polygon(1024, 1.0);
    let e = surface_energy(&c, &c.positions());
    let exact = 2.0 * 1024.0 * (std::f64::consts::PI / 1024.0).sin();
    assert!((e - exact).abs() < 1e-12);
    assert!((e - std::f64::consts::TAU).abs() < 2e-5);
}

#[test]
fn surface_energy_is_rigid_motion_invariant() {
    let c = make_double_bubble_2d(129).unwrap();
    let e0 = surface_energy(&c, &c.positions());
    let (s, co) = (0.7f64.sin(), 0.7f64.cos());
    let moved: Vec<Vec<Point>> =
        c.positions().iter().map(|p| p.iter().map(|x| p2(co * x.x - s * x.y + 3.0, s * x.x + co * x.y - 1.0)).collect()).collect();
    assert!((surface_energy(&c, &moved) - e0).abs() < 1e-13);
}

#[test]
fn relative_volume_error_examples() {
    assert_eq!(relative_volume_error(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
    let e = relative_volume_error(&[1.001, 2.004], &[1.0, 2.0]).unwrap();
    assert!((e - 0.002).abs() < 1e-15);
    assert!(relative_volume_error(&[1.0], &[0.0]).is_err());
}

#[test]
fn csv_layout() {
    let mut w = CsvWriter::new(Vec::new(), 2).unwrap();
    let d = StepDiagnostics {
        t: 0.1,
        energy_surface: 1.0,
        energy_contact: -0.25,
        energy_total: 0.75,
        volumes: vec![1.0 / 3.0, 2.0],
        v_delta: 0.0,
        mesh_ratio: 1.5,
        picard_iters: 4,
        max_displacement: 0.0,
    };
    w.write(&d).unwrap();
    let s = String::from_utf8(w.into_inner()).unwrap();
    let expect = "t,energy_surface,energy_contact,energy_total,vol_1,vol_2,v_delta,mesh_ratio,picard_iters\n\
                  1.0000000000000001e-1,1.0000000000000000e0,-2.5000000000000000e-1,7.5000000000000000e-1,\
                  3.3333333333333331e-1,2.0000000000000000e0,0.0000000000000000e0,1.5000000000000000e0,4\n";
    assert_eq!(s, expect);
}

fn bits(c: &Cluster) -> Vec<u64> {
    let mut out = Vec::new();
    for p in &c.patches {
        out.extend(p.vertices.iter().flat_map(|x| x.iter().map(|v| v.to_bits())));
        out.push(p.sigma.to_bits());
    }
    for b in &c.boundaries {
        out.push(b.contact_param.to_bits());
    }
    out
}

#[test]
fn cluster_json_round_trip_is_bitwise() {
    let mut aniso = make_double_bubble_2d(65).unwrap();
    aniso.energy_model = EnergyModel::Anisotropic(Anisotropy::rotation_2d(3, 0.01).unwrap());
    let mut perturbed_db = make_double_bubble_2d(65).unwrap();
    perturbed_db.set_sigmas(&[1.0, 0.1 + 0.2, 1.0 / 3.0]).unwrap();
    let f = Field::random(&mut rng(5), 2);
    let pos = perturbed(&perturbed_db, &f, 1e-3);
    perturbed_db.set_positions(&pos);
    for c in [aniso, perturbed_db, make_drop_on_substrate(3, 300, -0.5).unwrap(), spfem::scenarios::make_cylinder_cluster(600, 0.75).unwrap()] {
        let s = cluster_to_json(&c).unwrap();
        let back = cluster_from_json(&s).unwrap();
        assert_eq!(bits(&back), bits(&c));
        assert_eq!(back, c);
        assert_eq!(cluster_to_json(&back).unwrap(), s);
    }
}

#[test]
fn minimal_cluster_document() {
    let doc = r#"{
        "patches": [{"surface_id": 0, "dim": 2,
                     "vertices": [[1, 0], [0, 1], [-1, 0], [0, -1]],
                     "simplices": [[0, 1], [1, 2], [2, 3], [3, 0]]}],
        "regions": [{"region_id": 0, "surface_set": [0], "orientation": [1], "reference_point": [0, 0]}]
    }"#;
    let c = cluster_from_json(doc).unwrap();
    assert_eq!(c.dim, 2);
    assert_eq!(c.patches[0].sigma, 1.0);
    assert!(spfem::validate(&c).is_ok());
    assert!(cluster_from_json(&doc.replace("\"regions\"", "\"regionz\"")).is_err());
}

#[test]
fn obj_frame_for_unit_triangle() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = tetrahedron();
    c.patches[0].vertices = vec![Point::zeros(), Point::x(), Point::y()];
    c.patches[0].simplices = vec![vec![0, 1, 2]];
    c.regions.clear();
    let path = dir.path().join("tri.obj");
    write_frame(&c, &path).unwrap();
    let obj = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = obj.lines().collect();
    assert_eq!(lines[0], "o surface_0");
    assert_eq!(lines.iter().filter(|l| l.starts_with("v ")).count(), 3);
    assert_eq!(lines.iter().filter(|l| l.starts_with("f ")).count(), 1);
    assert_eq!(*lines.last().unwrap(), "f 1 2 3");
    assert!(path.with_extension("json").exists());
}

#[test]
fn obj_sidecar_uses_global_indices() {
    let dir = tempfile::tempdir().unwrap();
    let c = spfem::scenarios::make_double_bubble_3d(300).unwrap();
    let path = dir.path().join("db.obj");
    write_frame(&c, &path).unwrap();
    let obj = fs::read_to_string(&path).unwrap();
    let verts: Vec<Vec<f64>> = obj
        .lines()
        .filter(|l| l.starts_with("v "))
        .map(|l| l[2..].split(' ').map(|x| x.parse().unwrap()).collect())
        .collect();
    let side: serde_json::Value = serde_json::from_str(&fs::read_to_string(path.with_extension("json")).unwrap()).unwrap();
    let chains = side["junctions"][0]["chains"].as_array().unwrap();
    let first: Vec<usize> = chains.iter().map(|ch| ch[0].as_u64().unwrap() as usize).collect();
    assert!(first.iter().all(|&i| i >= 1));
    assert_eq!(verts[first[0] - 1], verts[first[1] - 1]);
    assert_eq!(verts[first[0] - 1], verts[first[2] - 1]);
}

#[test]
fn planar_frame_has_one_block_per_curve() {
    let dir = tempfile::tempdir().unwrap();
    let c = make_double_bubble_2d(33).unwrap();
    let path = dir.path().join("f.csv");
    write_frame(&c, &path).unwrap();
    let s = fs::read_to_string(&path).unwrap();
    let blocks: Vec<&str> = s.split("\n\n").collect();
    assert_eq!(blocks.len(), 3);
    let rows: usize = blocks.iter().map(|b| b.trim_end().lines().count()).sum();
    assert_eq!(rows, c.num_vertices());
    let circle = polygon(8, 1.0);
    write_frame(&circle, &path).unwrap();
    let s = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines.len(), 9);
    assert_eq!(lines[0], lines[8]);
}

fn run_config(dir: &std::path::Path, t_final: f64, frames: &str) -> RunConfig {
    let _ = dir;
    RunConfig::from_json(&format!(
        r#"{{"scenario": "double_bubble_2d", "dt": 0.01, "T_final": {t_final}, "mode": "sp",
            "output": {{"dir": "out", "csv": "diagnostics.csv", "frames": {frames}}},
            "picard": {{"tol": 1e-10, "max": 100}}}}"#
    ))
    .unwrap()
}

#[test]
fn zero_length_run_writes_initial_row_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = run_config(dir.path(), 0.0, "[0]");
    let sum = execute(&cfg, dir.path()).unwrap();
    assert_eq!(sum.steps, 0);
    let csv = fs::read_to_string(&sum.csv).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("0.0000000000000000e0,"));
    assert_eq!(sum.frames.len(), 1);
}

#[test]
fn frames_at_configured_times_and_deterministic_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = run_config(dir.path(), 2.0, "[0, 0.1, 2]");
    let sum = execute(&cfg, dir.path()).unwrap();
    assert_eq!(sum.steps, 200);
    let names: Vec<String> = sum.frames.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    assert_eq!(names, ["frame_000_t0.csv", "frame_001_t0.1.csv", "frame_002_t2.csv"]);
    let first = fs::read(&sum.csv).unwrap();
    assert_eq!(String::from_utf8_lossy(&first).lines().count(), 202);

    let again = execute(&cfg, dir.path()).unwrap();
    assert_eq!(fs::read(&again.csv).unwrap(), first);
}

#[test]
fn bad_configs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    assert!(execute(&run_config(dir.path(), 0.015, "[]"), dir.path()).is_err());
    assert!(execute(&run_config(dir.path(), 0.1, "[0.005]"), dir.path()).is_err());
    let both = r#"{"scenario": "drop_2d", "cluster_file": "c.json", "dt": 0.01, "T_final": 0}"#;
    assert!(execute(&RunConfig::from_json(both).unwrap(), dir.path()).is_err());
    let neither = r#"{"dt": 0.01, "T_final": 0}"#;
    assert!(execute(&RunConfig::from_json(neither).unwrap(), dir.path()).is_err());
    assert!(RunConfig::from_json(r#"{"scenario": "drop_2d", "dt": 0.01}"#).is_err());
}

#[test]
fn config_overrides_energy_and_contact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::from_json(
        r#"{"scenario": {"name": "drop_2d", "k": 65}, "dt": 0.001, "T_final": 0.001,
            "energy": {"kind": "cusp", "eps": 0.5}, "rho": [0.5]}"#,
    )
    .unwrap();
    let c = cfg.initial_cluster(dir.path()).unwrap();
    assert!(matches!(c.energy_model, EnergyModel::Anisotropic(_)));
    assert!(c.boundaries.iter().all(|b| b.contact_param == 0.5));

    fs::write(dir.path().join("c.json"), cluster_to_json(&c).unwrap()).unwrap();
    let cfg = RunConfig::from_json(r#"{"cluster_file": "c.json", "dt": 0.001, "T_final": 0.002}"#).unwrap();
    let sum = execute(&cfg, dir.path()).unwrap();
    assert_eq!(sum.steps, 2);
    assert!(sum.last.energy_contact != 0.0);
}
