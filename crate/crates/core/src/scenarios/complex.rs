//! Triangulated clusters obtained by refining a coarse triangle complex.
//!
//! Every coarse triangle belongs to one patch and carries a map from its
//! barycentric coordinates to space. Refinement points are keyed canonically so
//! that vertices on shared coarse edges coincide bitwise across patches.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::f64::consts::{FRAC_PI_2, TAU};

use crate::cluster::{Cluster, Point};
use crate::error::{Error, Result};

use super::builder::{ClusterBuilder, JunctionSpec, RegionSpec};

#[derive(Clone, Copy, Debug)]
pub(crate) enum Map {
    Flat,
    /// Central projection onto a sphere.
    Sphere { center: Point, r: f64 },
    /// Planar circular sector centred at the first triangle vertex.
    Sector { r: f64 },
}

#[derive(Clone, Copy, Debug)]
struct CoarseTri {
    patch: usize,
    v: [usize; 3],
    map: Map,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Key {
    Vertex(usize),
    /// Point on the coarse edge `(a, b)`, `a < b`, `t` steps from `a`.
    Edge(usize, usize, usize),
    Face(usize, usize, usize),
}

#[derive(Default)]
pub(crate) struct Complex {
    verts: Vec<Point>,
    tris: Vec<CoarseTri>,
    n_patches: usize,
}

fn edge(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl Complex {
    pub fn vertex(&mut self, p: Point) -> usize {
        self.verts.push(p);
        self.verts.len() - 1
    }

    pub fn tri(&mut self, patch: usize, v: [usize; 3], map: Map) {
        self.n_patches = self.n_patches.max(patch + 1);
        self.tris.push(CoarseTri { patch, v, map });
    }

    fn patch_edges(&self) -> Vec<BTreeSet<(usize, usize)>> {
        let mut out = vec![BTreeSet::new(); self.n_patches];
        for t in &self.tris {
            for i in 0..3 {
                out[t.patch].insert(edge(t.v[i], t.v[(i + 1) % 3]));
            }
        }
        out
    }

    /// Total number of vertex copies after refining every edge into `n` pieces.
    pub fn vertex_count(&self, n: usize) -> usize {
        let edges = self.patch_edges();
        (0..self.n_patches)
            .map(|p| {
                let verts: BTreeSet<usize> = edges[p].iter().flat_map(|&(a, b)| [a, b]).collect();
                let tris = self.tris.iter().filter(|t| t.patch == p).count();
                verts.len() + edges[p].len() * (n - 1) + tris * (n - 1) * n.saturating_sub(2) / 2
            })
            .sum()
    }

    /// Refinement level whose vertex count is closest to `k`.
    pub fn level_for(&self, k: usize) -> usize {
        (1..400).min_by_key(|&n| self.vertex_count(n).abs_diff(k)).unwrap()
    }

    /// Flip coarse triangles so that each patch is consistently oriented.
    fn orient(&mut self) -> Result<()> {
        let mut by_edge: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (i, t) in self.tris.iter().enumerate() {
            for j in 0..3 {
                by_edge.entry(edge(t.v[j], t.v[(j + 1) % 3])).or_default().push(i);
            }
        }
        let directed = |t: &CoarseTri, a: usize, b: usize| (0..3).any(|j| t.v[j] == a && t.v[(j + 1) % 3] == b);
        let mut seen = vec![false; self.tris.len()];
        for root in 0..self.tris.len() {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let mut stack = vec![root];
            while let Some(i) = stack.pop() {
                let t = self.tris[i];
                for j in 0..3 {
                    let (a, b) = (t.v[j], t.v[(j + 1) % 3]);
                    for &u in &by_edge[&edge(a, b)] {
                        if u == i || self.tris[u].patch != t.patch {
                            continue;
                        }
                        let same = directed(&self.tris[u], a, b);
                        if seen[u] {
                            if same {
                                return Err(Error::InvalidCluster(format!("patch {} is not orientable", t.patch)));
                            }
                            continue;
                        }
                        if same {
                            self.tris[u].v.swap(1, 2);
                        }
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
        }
        Ok(())
    }

    fn eval(&self, t: &CoarseTri, w: [f64; 3]) -> Point {
        let q = t.v.map(|v| self.verts[v]);
        match t.map {
            Map::Flat => q[0] * w[0] + q[1] * w[1] + q[2] * w[2],
            Map::Sphere { center, r } => {
                let s = (q[0] - center) * w[0] + (q[1] - center) * w[1] + (q[2] - center) * w[2];
                center + s.normalize() * r
            }
            Map::Sector { r } => {
                if w[0] >= 1.0 {
                    return q[0];
                }
                let s = (q[1] - q[0]) * w[1] + (q[2] - q[0]) * w[2];
                q[0] + s.normalize() * (r * (1.0 - w[0]))
            }
        }
    }

    /// Refine with `n` pieces per coarse edge. Coarse edges used by a single
    /// patch must lie in one of `planes` (point, unit normal) and become
    /// boundary lines with contact parameter `rho`.
    pub fn refine(mut self, n: usize, planes: &[(Point, Point)], rho: f64) -> Result<ClusterBuilder> {
        self.orient()?;
        let key_of = |ti: usize, t: &CoarseTri, i: usize, j: usize| -> Key {
            let w = [n - i - j, i, j];
            if let Some(c) = (0..3).find(|&c| w[c] == n) {
                return Key::Vertex(t.v[c]);
            }
            if let Some(z) = (0..3).find(|&c| w[c] == 0) {
                let (c1, c2) = ((z + 1) % 3, (z + 2) % 3);
                let (a, b) = (t.v[c1], t.v[c2]);
                return if a < b { Key::Edge(a, b, w[c2]) } else { Key::Edge(b, a, w[c1]) };
            }
            Key::Face(ti, i, j)
        };
        let mut global: HashMap<Key, usize> = HashMap::new();
        let mut gpos: Vec<Point> = Vec::new();
        let mut local: Vec<HashMap<usize, usize>> = vec![HashMap::new(); self.n_patches];
        let mut verts: Vec<Vec<Point>> = vec![Vec::new(); self.n_patches];
        let mut simplices: Vec<Vec<Vec<usize>>> = vec![Vec::new(); self.n_patches];
        for (ti, t) in self.tris.iter().enumerate() {
            let p = t.patch;
            let mut grid = vec![vec![0usize; n + 1]; n + 1];
            for i in 0..=n {
                for j in 0..=n - i {
                    let key = key_of(ti, t, i, j);
                    let g = *global.entry(key).or_insert_with(|| {
                        let w = [(n - i - j) as f64 / n as f64, i as f64 / n as f64, j as f64 / n as f64];
                        gpos.push(self.eval(t, w));
                        gpos.len() - 1
                    });
                    grid[i][j] = *local[p].entry(g).or_insert_with(|| {
                        verts[p].push(gpos[g]);
                        verts[p].len() - 1
                    });
                }
            }
            for i in 0..n {
                for j in 0..n - i {
                    simplices[p].push(vec![grid[i][j], grid[i + 1][j], grid[i][j + 1]]);
                    if i + j + 1 < n {
                        simplices[p].push(vec![grid[i + 1][j], grid[i + 1][j + 1], grid[i][j + 1]]);
                    }
                }
            }
        }
        // Fine global vertices along the coarse edge a -> b.
        let along = |a: usize, b: usize| -> Vec<usize> {
            (0..=n)
                .map(|s| {
                    let key = if s == 0 {
                        Key::Vertex(a)
                    } else if s == n {
                        Key::Vertex(b)
                    } else if a < b {
                        Key::Edge(a, b, s)
                    } else {
                        Key::Edge(b, a, n - s)
                    };
                    global[&key]
                })
                .collect()
        };

        let mut b = ClusterBuilder::new(3);
        for (p, (v, s)) in verts.into_iter().zip(simplices).enumerate() {
            let id = b.add_patch(v, s);
            debug_assert_eq!(id, p);
        }

        let mut owners: BTreeMap<(usize, usize), BTreeSet<usize>> = BTreeMap::new();
        let mut uses: BTreeMap<(usize, usize), Vec<(usize, usize, usize)>> = BTreeMap::new();
        for t in &self.tris {
            for j in 0..3 {
                let (a, c) = (t.v[j], t.v[(j + 1) % 3]);
                owners.entry(edge(a, c)).or_default().insert(t.patch);
                uses.entry(edge(a, c)).or_default().push((t.patch, a, c));
            }
        }

        // Junction lines: coarse edges shared by three patches, chained per patch triple.
        let mut groups: BTreeMap<[usize; 3], Vec<(usize, usize)>> = BTreeMap::new();
        for (e, ps) in &owners {
            match ps.len() {
                1 | 2 => {}
                3 => {
                    let v: Vec<usize> = ps.iter().copied().collect();
                    groups.entry([v[0], v[1], v[2]]).or_default().push(*e);
                }
                m => return Err(Error::Unsupported(format!("coarse edge {e:?} is shared by {m} patches"))),
            }
        }
        for (triple, edges) in groups {
            for chain in chain_undirected(&edges) {
                let mut fine: Vec<usize> = Vec::new();
                for w in chain.windows(2) {
                    let seg = along(w[0], w[1]);
                    let skip = usize::from(!fine.is_empty());
                    fine.extend_from_slice(&seg[skip..]);
                }
                if chain.first() == chain.last() {
                    fine.pop();
                }
                let vertices = triple.map(|p| fine.iter().map(|g| local[p][g]).collect());
                b.junctions.push(JunctionSpec { surfaces: triple, vertices });
            }
        }

        // Boundary lines: edges owned by one patch and used by one triangle.
        let mut bgroups: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
        for (e, u) in &uses {
            if owners[e].len() != 1 || u.len() != 1 {
                if owners[e].len() == 2 {
                    return Err(Error::InvalidCluster(format!("coarse edge {e:?} is shared by exactly two patches")));
                }
                continue;
            }
            let (patch, a, c) = u[0];
            let on = |x: &Point, pl: &(Point, Point)| (x - pl.0).dot(&pl.1).abs() < 1e-12;
            let plane = planes
                .iter()
                .position(|pl| on(&self.verts[a], pl) && on(&self.verts[c], pl))
                .ok_or_else(|| Error::InvalidCluster(format!("free coarse boundary edge {e:?} on patch {patch}")))?;
            bgroups.entry((patch, plane)).or_default().push((c, a));
        }
        for ((patch, plane), segs) in bgroups {
            for chain in chain_directed(&segs)? {
                let mut fine: Vec<usize> = Vec::new();
                for w in chain.windows(2) {
                    let seg = along(w[0], w[1]);
                    let skip = usize::from(!fine.is_empty());
                    fine.extend_from_slice(&seg[skip..]);
                }
                let chain: Vec<usize> = fine.iter().map(|g| local[patch][g]).collect();
                b.add_boundary(patch, chain, planes[plane].0, planes[plane].1, rho);
            }
        }
        Ok(b)
    }
}

/// Split undirected edges into maximal paths or cycles (cycles repeat the start).
fn chain_undirected(edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(a, b) in edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let mut used: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut out = Vec::new();
    let starts: Vec<usize> = adj.iter().filter(|(_, v)| v.len() != 2).map(|(k, _)| *k).chain(adj.keys().copied()).collect();
    for s in starts {
        while let Some(&next) = adj[&s].iter().find(|&&x| !used.contains(&edge(s, x))) {
            let mut chain = vec![s];
            let mut cur = s;
            let mut nxt = next;
            loop {
                used.insert(edge(cur, nxt));
                chain.push(nxt);
                cur = nxt;
                if adj[&cur].len() != 2 {
                    break;
                }
                match adj[&cur].iter().find(|&&x| !used.contains(&edge(cur, x))) {
                    Some(&x) => nxt = x,
                    None => break,
                }
            }
            out.push(chain);
        }
    }
    out
}

/// Join directed segments into chains; closed chains repeat the start.
fn chain_directed(segs: &[(usize, usize)]) -> Result<Vec<Vec<usize>>> {
    let mut next: BTreeMap<usize, usize> = BTreeMap::new();
    let mut ends: BTreeSet<usize> = BTreeSet::new();
    for &(a, b) in segs {
        if next.insert(a, b).is_some() {
            return Err(Error::InvalidCluster(format!("boundary branches at coarse vertex {a}")));
        }
        ends.insert(b);
    }
    let mut out = Vec::new();
    let mut done: BTreeSet<usize> = BTreeSet::new();
    let starts: Vec<usize> = next.keys().filter(|a| !ends.contains(a)).copied().chain(next.keys().copied()).collect();
    for s in starts {
        if done.contains(&s) {
            continue;
        }
        let mut chain = vec![s];
        let mut cur = s;
        while let Some(&b) = next.get(&cur) {
            done.insert(cur);
            chain.push(b);
            cur = b;
            if cur == s {
                break;
            }
        }
        out.push(chain);
    }
    Ok(out)
}

fn sph(theta: f64, phi: f64) -> Point {
    Point::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
}

fn region(surfaces: Vec<usize>, interior: Point) -> RegionSpec {
    RegionSpec { surfaces, interior, boundaries: Vec::new(), reference: interior }
}

/// Unit sphere refined from an octahedron: one surface, one region.
pub fn sphere_3d(k: usize) -> Result<Cluster> {
    let mut c = Complex::default();
    let n = c.vertex(Point::z());
    let s = c.vertex(-Point::z());
    let e: Vec<usize> = (0..4).map(|j| c.vertex(sph(FRAC_PI_2, FRAC_PI_2 * j as f64))).collect();
    let m = Map::Sphere { center: Point::zeros(), r: 1.0 };
    for j in 0..4 {
        c.tri(0, [n, e[j], e[(j + 1) % 4]], m);
        c.tri(0, [s, e[(j + 1) % 4], e[j]], m);
    }
    let level = c.level_for(k);
    let mut b = c.refine(level, &[], 0.0)?;
    b.regions.push(region(vec![0], Point::zeros()));
    b.build()
}

/// Two unit hemispheres separated by the equatorial disk.
pub fn double_bubble_3d(k: usize) -> Result<Cluster> {
    let mut c = Complex::default();
    let n = c.vertex(Point::z());
    let s = c.vertex(-Point::z());
    let o = c.vertex(Point::zeros());
    let e: Vec<usize> = (0..4).map(|j| c.vertex(sph(FRAC_PI_2, FRAC_PI_2 * j as f64))).collect();
    let m = Map::Sphere { center: Point::zeros(), r: 1.0 };
    for j in 0..4 {
        let (a, b) = (e[j], e[(j + 1) % 4]);
        c.tri(0, [n, a, b], m);
        c.tri(1, [s, b, a], m);
        c.tri(2, [o, a, b], Map::Sector { r: 1.0 });
    }
    let level = c.level_for(k);
    let mut b = c.refine(level, &[], 0.0)?;
    b.regions.push(region(vec![0, 2], Point::new(0.0, 0.0, 0.5)));
    b.regions.push(region(vec![1, 2], Point::new(0.0, 0.0, -0.5)));
    b.build()
}

/// Unit ball cut into three wedges by half-disks meeting on the z-axis.
///
/// Patches 0..3 are the walls, 3..6 the spherical lunes; lune `j` lies between
/// walls `j` and `j + 1`.
pub fn triple_bubble_3d(k: usize) -> Result<Cluster> {
    let mut c = Complex::default();
    let n = c.vertex(Point::z());
    let s = c.vertex(-Point::z());
    let o = c.vertex(Point::zeros());
    let phi = |j: usize| TAU * j as f64 / 3.0;
    let p: Vec<usize> = (0..3).map(|j| c.vertex(sph(FRAC_PI_2, phi(j)))).collect();
    let mid: Vec<usize> = (0..3).map(|j| c.vertex(sph(FRAC_PI_2, phi(j) + TAU / 6.0))).collect();
    let m = Map::Sphere { center: Point::zeros(), r: 1.0 };
    for j in 0..3 {
        c.tri(j, [o, p[j], n], Map::Sector { r: 1.0 });
        c.tri(j, [o, s, p[j]], Map::Sector { r: 1.0 });
        let (a, b) = (p[j], p[(j + 1) % 3]);
        c.tri(3 + j, [n, a, mid[j]], m);
        c.tri(3 + j, [n, mid[j], b], m);
        c.tri(3 + j, [s, mid[j], a], m);
        c.tri(3 + j, [s, b, mid[j]], m);
    }
    let level = c.level_for(k);
    let mut b = c.refine(level, &[], 0.0)?;
    for j in 0..3 {
        b.regions.push(region(vec![j, (j + 1) % 3, 3 + j], sph(FRAC_PI_2, phi(j) + TAU / 6.0) * 0.5));
    }
    b.build()
}

/// Unit ball cut into four cones over the faces of an inscribed regular tetrahedron.
///
/// Patches 0..6 are planar walls (one per tetrahedron edge), 6..10 the spherical caps.
pub fn quadruple_bubble_3d(k: usize) -> Result<Cluster> {
    let t = [
        Point::new(1.0, 1.0, 1.0),
        Point::new(1.0, -1.0, -1.0),
        Point::new(-1.0, 1.0, -1.0),
        Point::new(-1.0, -1.0, 1.0),
    ]
    .map(|x| x.normalize());
    let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let faces = [[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]];
    let mut c = Complex::default();
    let o = c.vertex(Point::zeros());
    let tv: Vec<usize> = t.iter().map(|x| c.vertex(*x)).collect();
    let mid: Vec<usize> = pairs.iter().map(|&(a, b)| c.vertex((t[a] + t[b]).normalize())).collect();
    let wall = |a: usize, b: usize| pairs.iter().position(|&p| p == (a.min(b), a.max(b))).unwrap();
    for (w, &(a, b)) in pairs.iter().enumerate() {
        c.tri(w, [o, tv[a], mid[w]], Map::Sector { r: 1.0 });
        c.tri(w, [o, mid[w], tv[b]], Map::Sector { r: 1.0 });
    }
    let m = Map::Sphere { center: Point::zeros(), r: 1.0 };
    for (f, face) in faces.iter().enumerate() {
        let centre = c.vertex((t[face[0]] + t[face[1]] + t[face[2]]).normalize());
        for i in 0..3 {
            let (a, b) = (face[i], face[(i + 1) % 3]);
            let mab = mid[wall(a, b)];
            c.tri(6 + f, [centre, tv[a], mab], m);
            c.tri(6 + f, [centre, mab, tv[b]], m);
        }
    }
    let level = c.level_for(k);
    let mut b = c.refine(level, &[], 0.0)?;
    for (f, face) in faces.iter().enumerate() {
        let interior = (t[face[0]] + t[face[1]] + t[face[2]]) / 3.0 * 0.6;
        let mut surfaces = vec![wall(face[0], face[1]), wall(face[1], face[2]), wall(face[2], face[0]), 6 + f];
        surfaces.sort_unstable();
        b.regions.push(region(surfaces, interior));
    }
    b.build()
}

/// Unit hemisphere resting on the plane `z = 0`.
pub fn drop_3d(k: usize, rho: f64) -> Result<Cluster> {
    let mut c = Complex::default();
    let n = c.vertex(Point::z());
    let e: Vec<usize> = (0..4).map(|j| c.vertex(sph(FRAC_PI_2, FRAC_PI_2 * j as f64))).collect();
    let m = Map::Sphere { center: Point::zeros(), r: 1.0 };
    for j in 0..4 {
        c.tri(0, [n, e[j], e[(j + 1) % 4]], m);
    }
    let level = c.level_for(k);
    let mut b = c.refine(level, &[(Point::zeros(), Point::z())], rho)?;
    let planes: Vec<usize> = (0..b.boundaries.len()).collect();
    b.regions.push(RegionSpec {
        surfaces: vec![0],
        interior: Point::new(0.0, 0.0, 0.3),
        boundaries: planes,
        reference: Point::zeros(),
    });
    b.build()
}

const CYL_HALF_WIDTH: f64 = 1.5;

fn square_walls(h: f64) -> Vec<(Point, Point)> {
    vec![
        (Point::new(h, 0.0, 0.0), -Point::x()),
        (Point::new(-h, 0.0, 0.0), Point::x()),
        (Point::new(0.0, h, 0.0), -Point::y()),
        (Point::new(0.0, -h, 0.0), Point::y()),
    ]
}

/// Cube bubble of edge 1 centred at the origin, cut at `z = 0` by a flat film
/// that reaches the walls of the square cylinder `[-3/2, 3/2]^2 x R`.
///
/// Patches: 0 upper half of the cube, 1 lower half, 2 the film. The only
/// region is the cube.
pub fn cylinder_3d(k: usize, rho: f64) -> Result<Cluster> {
    let a = 0.5;
    let mut c = Complex::default();
    let dirs = [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)];
    let corner = |c: &mut Complex, s: f64, z: f64| -> Vec<usize> { dirs.iter().map(|&(x, y)| c.vertex(Point::new(s * x, s * y, z))).collect() };
    let midpt = |c: &mut Complex, s: f64, z: f64| -> Vec<usize> {
        (0..4)
            .map(|j| {
                let (x0, y0) = dirs[j];
                let (x1, y1) = dirs[(j + 1) % 4];
                c.vertex(Point::new(s * 0.5 * (x0 + x1), s * 0.5 * (y0 + y1), z))
            })
            .collect()
    };
    let bot = corner(&mut c, a, 0.0);
    let bmid = midpt(&mut c, a, 0.0);
    for (patch, z) in [(0usize, a), (1, -a)] {
        let top = corner(&mut c, a, z);
        let tmid = midpt(&mut c, a, z);
        let centre = c.vertex(Point::new(0.0, 0.0, z));
        for j in 0..4 {
            let j1 = (j + 1) % 4;
            c.tri(patch, [centre, top[j], tmid[j]], Map::Flat);
            c.tri(patch, [centre, tmid[j], top[j1]], Map::Flat);
            c.tri(patch, [bot[j], bmid[j], tmid[j]], Map::Flat);
            c.tri(patch, [bot[j], tmid[j], top[j]], Map::Flat);
            c.tri(patch, [bmid[j], bot[j1], top[j1]], Map::Flat);
            c.tri(patch, [bmid[j], top[j1], tmid[j]], Map::Flat);
        }
    }
    let outer = corner(&mut c, CYL_HALF_WIDTH, 0.0);
    let omid = midpt(&mut c, CYL_HALF_WIDTH, 0.0);
    for j in 0..4 {
        let j1 = (j + 1) % 4;
        c.tri(2, [bot[j], outer[j], omid[j]], Map::Flat);
        c.tri(2, [bot[j], omid[j], bmid[j]], Map::Flat);
        c.tri(2, [bmid[j], omid[j], bot[j1]], Map::Flat);
        c.tri(2, [bot[j1], omid[j], outer[j1]], Map::Flat);
    }
    let level = c.level_for(k);
    let mut b = c.refine(level, &square_walls(CYL_HALF_WIDTH), rho)?;
    b.regions.push(region(vec![0, 1], Point::new(0.01, 0.02, 0.03)));
    b.build()
}

/// Flat square film spanning the walls `x = +-1`, `y = +-1`.
pub fn plate_3d(k: usize) -> Result<Cluster> {
    let mut c = Complex::default();
    let o = c.vertex(Point::zeros());
    let corners: Vec<usize> = [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)].iter().map(|&(x, y)| c.vertex(Point::new(x, y, 0.0))).collect();
    let mids: Vec<usize> = [(0.0, 1.0), (-1.0, 0.0), (0.0, -1.0), (1.0, 0.0)].iter().map(|&(x, y)| c.vertex(Point::new(x, y, 0.0))).collect();
    for j in 0..4 {
        c.tri(0, [o, corners[j], mids[j]], Map::Flat);
        c.tri(0, [o, mids[j], corners[(j + 1) % 4]], Map::Flat);
    }
    let level = c.level_for(k);
    c.refine(level, &square_walls(1.0), 0.0)?.build()
}
