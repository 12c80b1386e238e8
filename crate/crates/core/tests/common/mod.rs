#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spfem::{Cluster, EnergyModel, Point, Positions, Region, SurfacePatch};

pub fn p2(x: f64, y: f64) -> Point {
    Point::new(x, y, 0.0)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Single patch enclosing one region with outward orientation.
pub fn closed_surface(dim: usize, vertices: Vec<Point>, simplices: Vec<Vec<usize>>) -> Cluster {
    Cluster {
        dim,
        patches: vec![SurfacePatch { surface_id: 0, dim, vertices, simplices, sigma: 1.0 }],
        junctions: vec![],
        boundaries: vec![],
        regions: vec![Region {
            region_id: 0,
            surface_set: vec![0],
            orientation: vec![1],
            plane_set: vec![],
            reference_point: Point::zeros(),
        }],
        energy_model: EnergyModel::Isotropic,
    }
}

/// Regular tetrahedron with unit edges, centred at the origin.
pub fn tetrahedron() -> Cluster {
    let s = 1.0 / (2.0 * 2f64.sqrt());
    let v = vec![Point::new(s, s, s), Point::new(s, -s, -s), Point::new(-s, s, -s), Point::new(-s, -s, s)];
    closed_surface(3, v, vec![vec![0, 1, 2], vec![0, 3, 1], vec![0, 2, 3], vec![1, 3, 2]])
}

pub fn octahedron() -> Cluster {
    let v = vec![Point::x(), -Point::x(), Point::y(), -Point::y(), Point::z(), -Point::z()];
    let tris = vec![
        vec![0, 2, 4],
        vec![2, 1, 4],
        vec![1, 3, 4],
        vec![3, 0, 4],
        vec![2, 0, 5],
        vec![1, 2, 5],
        vec![3, 1, 5],
        vec![0, 3, 5],
    ];
    closed_surface(3, v, tris)
}

/// Counter-clockwise regular `n`-gon of circumradius `r`.
pub fn polygon(n: usize, r: f64) -> Cluster {
    let v = (0..n)
        .map(|j| {
            let t = std::f64::consts::TAU * j as f64 / n as f64;
            p2(r * t.cos(), r * t.sin())
        })
        .collect();
    closed_surface(2, v, (0..n).map(|j| vec![j, (j + 1) % n]).collect())
}

/// Smooth random vector field; coincident points get identical values, so
/// junctions stay attached under `perturbed`.
pub struct Field {
    a: [[f64; 3]; 3],
    b: [f64; 3],
    w: [[f64; 3]; 3],
    phase: [f64; 3],
    dim: usize,
}

impl Field {
    pub fn random(r: &mut ChaCha8Rng, dim: usize) -> Self {
        let mut m = || [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)];
        let (a0, a1, a2, b, w0, w1, w2, ph) = (m(), m(), m(), m(), m(), m(), m(), m());
        Self { a: [a0, a1, a2], b, w: [w0, w1, w2], phase: ph, dim }
    }

    pub fn at(&self, x: &Point) -> Point {
        let mut out = Point::zeros();
        for i in 0..3 {
            let mut v = self.b[i];
            for j in 0..3 {
                v += self.a[i][j] * x[j];
            }
            let arg: f64 = (0..3).map(|j| 3.0 * self.w[i][j] * x[j]).sum::<f64>() + 6.0 * self.phase[i];
            out[i] = v + 0.5 * arg.sin();
        }
        if self.dim == 2 {
            out.z = 0.0;
        }
        out
    }
}

pub fn perturbed(c: &Cluster, f: &Field, amp: f64) -> Positions {
    c.patches.iter().map(|p| p.vertices.iter().map(|x| x + f.at(x) * amp).collect()).collect()
}

/// Apply `x -> diag(s) x` to every vertex and reference point.
pub fn scale(c: &mut Cluster, s: [f64; 3]) {
    let m = |x: &Point| Point::new(x.x * s[0], x.y * s[1], x.z * s[2]);
    for p in &mut c.patches {
        for x in &mut p.vertices {
            *x = m(x);
        }
    }
    for r in &mut c.regions {
        r.reference_point = m(&r.reference_point);
    }
}

/// Double bubble made of two unit half circles and the chord between them.
pub fn half_circle_double_bubble(k: usize) -> Cluster {
    let mut c = spfem::scenarios::make_double_bubble_2d(k).unwrap();
    scale(&mut c, [0.5, 1.0, 1.0]);
    for p in &mut c.patches {
        for x in &mut p.vertices {
            let r = x.norm();
            if x.y.abs() > 1e-14 && r > 0.0 {
                *x /= r;
            }
        }
    }
    c
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
