//! Reduced degrees of freedom for the finite element spaces.
//!
//! Positions live on "nodes": classes of vertex copies glued at triple junctions.
//! Each node carries `d` components minus one per distinct boundary plane through
//! it. Curvature copies at junction vertices satisfy `sum_j o_j kappa_{s_j} = 0`;
//! the dependent copies are eliminated by row reduction.

use crate::cluster::{Cluster, Point};
use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct DofMap {
    dim: usize,
    offsets: Vec<usize>,
    node_of: Vec<usize>,
    node_first: Vec<usize>,
    node_basis: Vec<Vec<Point>>,
    n_x: usize,
    kappa_expansion: Vec<Vec<(usize, f64)>>,
    kappa_owner: Vec<(usize, usize)>,
    n_kappa: usize,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut a: usize) -> usize {
        while self.0[a] != a {
            self.0[a] = self.0[self.0[a]];
            a = self.0[a];
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Orthonormal basis of the complement of `span(normals)` in `R^d`.
fn free_directions(dim: usize, normals: &[Point]) -> Vec<Point> {
    let mut ortho: Vec<Point> = Vec::new();
    for n in normals {
        let mut v = *n;
        for o in &ortho {
            v -= o * o.dot(&v);
        }
        if v.norm() > 1e-9 {
            ortho.push(v.normalize());
        }
    }
    let axes: Vec<Point> = (0..dim)
        .map(|c| {
            let mut e = Point::zeros();
            e[c] = 1.0;
            e
        })
        .collect();
    if ortho.is_empty() {
        return axes;
    }
    // Complete the constraint normals to an orthonormal frame, preferring the
    // coordinate axes least aligned with what is already spanned.
    let mut frame = ortho.clone();
    let mut out = Vec::new();
    while frame.len() < dim {
        let best = axes
            .iter()
            .map(|e| {
                let mut v = *e;
                for f in &frame {
                    v -= f * f.dot(&v);
                }
                v
            })
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap();
        let v = best.normalize();
        frame.push(v);
        out.push(v);
    }
    if dim == 3 && out.len() == 2 {
        // Right-handed tangent frame (t1, n x t1).
        out[1] = ortho[0].cross(&out[0]);
    }
    out
}

impl DofMap {
    pub fn new(cluster: &Cluster) -> Result<Self> {
        let dim = cluster.dim;
        let mut offsets = Vec::with_capacity(cluster.patches.len() + 1);
        let mut total = 0;
        for p in &cluster.patches {
            offsets.push(total);
            total += p.vertices.len();
        }
        offsets.push(total);
        let copy = |s: usize, v: usize| offsets[s] + v;

        let mut uf = UnionFind((0..total).collect());
        for tj in &cluster.junctions {
            let s = tj.surfaces();
            for l in 0..tj.len() {
                let a = copy(s[0], tj.correspondence[0][l]);
                uf.union(a, copy(s[1], tj.correspondence[1][l]));
                uf.union(a, copy(s[2], tj.correspondence[2][l]));
            }
        }
        let mut root_node = vec![usize::MAX; total];
        let mut node_of = vec![0; total];
        let mut members: Vec<Vec<usize>> = Vec::new();
        for c in 0..total {
            let r = uf.find(c);
            if root_node[r] == usize::MAX {
                root_node[r] = members.len();
                members.push(Vec::new());
            }
            node_of[c] = root_node[r];
            members[root_node[r]].push(c);
        }

        let mut normals: Vec<Vec<Point>> = vec![Vec::new(); members.len()];
        for b in &cluster.boundaries {
            for &v in b.vertices() {
                let node = node_of[copy(b.surface(), v)];
                if !normals[node].iter().any(|n| n.cross(&b.plane_normal).norm() < 1e-12) {
                    normals[node].push(b.plane_normal);
                }
            }
        }
        let owner = |c: usize| -> (usize, usize) {
            let s = offsets.partition_point(|&o| o <= c) - 1;
            (s, c - offsets[s])
        };
        let mut node_first = Vec::with_capacity(members.len());
        let mut node_basis = Vec::with_capacity(members.len());
        let mut n_x = 0;
        for (node, nrm) in normals.iter().enumerate() {
            if nrm.len() >= 2 && members[node].len() > 1 {
                let (s, v) = owner(members[node][0]);
                return Err(Error::Unsupported(format!(
                    "vertex {v} of surface {s} is both a junction vertex and on two boundary planes"
                )));
            }
            let basis = free_directions(dim, nrm);
            node_first.push(n_x);
            n_x += basis.len();
            node_basis.push(basis);
        }

        // Curvature copies: eliminate dependent copies group by group.
        // Constraint rows per node, flattened; `usize::MAX` terminates a row.
        let mut constraints: Vec<Vec<(usize, f64)>> = vec![Vec::new(); members.len()];
        for tj in &cluster.junctions {
            let s = tj.surfaces();
            for l in 0..tj.len() {
                let node = node_of[copy(s[0], tj.correspondence[0][l])];
                for j in 0..3 {
                    constraints[node].push((copy(s[j], tj.correspondence[j][l]), f64::from(tj.orientation[j])));
                }
                constraints[node].push((usize::MAX, 0.0));
            }
        }

        // expression of each copy in terms of free copies: None = free.
        let mut dependent: Vec<Option<Vec<(usize, f64)>>> = vec![None; total];
        for (node, flat) in constraints.iter().enumerate() {
            if flat.is_empty() {
                continue;
            }
            let cols = &members[node];
            let ncol = cols.len();
            let col_index = |c: usize| cols.iter().position(|&x| x == c).unwrap();
            let mut mat: Vec<Vec<f64>> = Vec::new();
            let mut cur = vec![0.0; ncol];
            for &(c, val) in flat {
                if c == usize::MAX {
                    mat.push(std::mem::replace(&mut cur, vec![0.0; ncol]));
                } else {
                    cur[col_index(c)] += val;
                }
            }
            // Row reduction, choosing pivots from the highest surface down.
            let mut pivots: Vec<(usize, usize)> = Vec::new();
            let mut r = 0;
            for col in (0..ncol).rev() {
                if r == mat.len() {
                    break;
                }
                let (best, val) = (r..mat.len())
                    .map(|i| (i, mat[i][col].abs()))
                    .max_by(|a, b| a.1.total_cmp(&b.1))
                    .unwrap();
                if val < PIVOT_TOL {
                    continue;
                }
                mat.swap(r, best);
                let p = mat[r][col];
                for x in mat[r].iter_mut() {
                    *x /= p;
                }
                for i in 0..mat.len() {
                    if i != r && mat[i][col] != 0.0 {
                        let f = mat[i][col];
                        for j in 0..ncol {
                            let t = mat[r][j];
                            mat[i][j] -= f * t;
                        }
                    }
                }
                pivots.push((r, col));
                r += 1;
            }
            for &(row, col) in &pivots {
                let expr: Vec<(usize, f64)> = (0..ncol)
                    .filter(|&j| j != col && mat[row][j].abs() > PIVOT_TOL)
                    .map(|j| (cols[j], -mat[row][j]))
                    .collect();
                dependent[cols[col]] = Some(expr);
            }
        }
        let mut free_dof = vec![usize::MAX; total];
        let mut kappa_owner = Vec::new();
        for c in 0..total {
            if dependent[c].is_none() {
                free_dof[c] = kappa_owner.len();
                kappa_owner.push(owner(c));
            }
        }
        let kappa_expansion = (0..total)
            .map(|c| match &dependent[c] {
                None => vec![(free_dof[c], 1.0)],
                Some(expr) => expr.iter().map(|&(f, w)| (free_dof[f], w)).collect(),
            })
            .collect();

        Ok(Self {
            dim,
            offsets,
            node_of,
            node_first,
            node_basis,
            n_x,
            kappa_expansion,
            n_kappa: kappa_owner.len(),
            kappa_owner,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_kappa(&self) -> usize {
        self.n_kappa
    }

    pub fn num_nodes(&self) -> usize {
        self.node_first.len()
    }

    #[inline]
    fn copy(&self, s: usize, v: usize) -> usize {
        self.offsets[s] + v
    }

    /// Node of a vertex copy.
    #[inline]
    pub fn node(&self, s: usize, v: usize) -> usize {
        self.node_of[self.copy(s, v)]
    }

    /// First position dof and the displacement directions of a vertex copy.
    #[inline]
    pub fn x_dofs(&self, s: usize, v: usize) -> (usize, &[Point]) {
        let n = self.node(s, v);
        (self.node_first[n], &self.node_basis[n])
    }

    /// Curvature value of a vertex copy as a combination of reduced dofs.
    #[inline]
    pub fn kappa_expansion(&self, s: usize, v: usize) -> &[(usize, f64)] {
        &self.kappa_expansion[self.copy(s, v)]
    }

    /// Vertex copy that owns each reduced curvature dof.
    pub fn kappa_owners(&self) -> &[(usize, usize)] {
        &self.kappa_owner
    }

    /// Positions `id + delta` for a reduced displacement vector.
    pub fn displaced(&self, base: &[Vec<Point>], delta: &[f64]) -> Vec<Vec<Point>> {
        base.iter()
            .enumerate()
            .map(|(s, xs)| {
                xs.iter()
                    .enumerate()
                    .map(|(v, x)| {
                        let (first, basis) = self.x_dofs(s, v);
                        x + basis.iter().enumerate().map(|(c, t)| t * delta[first + c]).sum::<Point>()
                    })
                    .collect()
            })
            .collect()
    }

    /// Curvature value at every vertex copy.
    pub fn expand_kappa(&self, kappa: &[f64]) -> Vec<Vec<f64>> {
        (0..self.offsets.len() - 1)
            .map(|s| {
                (0..self.offsets[s + 1] - self.offsets[s])
                    .map(|v| self.kappa_expansion(s, v).iter().map(|&(d, w)| w * kappa[d]).sum())
                    .collect()
            })
            .collect()
    }

    /// Reduced dofs spanning the per-surface constant curvature functions that
    /// satisfy every junction condition.
    pub fn kappa_constants(&self, cluster: &Cluster) -> Vec<Vec<f64>> {
        let ns = cluster.patches.len();
        // Null space of the junction matrix acting on per-surface constants.
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for tj in &cluster.junctions {
            let mut row = vec![0.0; ns];
            for (j, s) in tj.surfaces().into_iter().enumerate() {
                row[s] += f64::from(tj.orientation[j]);
            }
            rows.push(row);
        }
        let null = null_space(&rows, ns);
        null.into_iter()
            .map(|c| self.kappa_owner.iter().map(|&(s, _)| c[s]).collect())
            .collect()
    }
}

/// Basis of the null space of a small dense matrix with `n` columns.
fn null_space(rows: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for col in 0..n {
        if r == m.len() {
            break;
        }
        let (best, val) = (r..m.len()).map(|i| (i, m[i][col].abs())).max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        if val < PIVOT_TOL {
            continue;
        }
        m.swap(r, best);
        let p = m[r][col];
        for x in m[r].iter_mut() {
            *x /= p;
        }
        for i in 0..m.len() {
            if i != r {
                let f = m[i][col];
                for j in 0..n {
                    let t = m[r][j];
                    m[i][j] -= f * t;
                }
            }
        }
        pivot_cols.push(col);
        r += 1;
    }
    (0..n)
        .filter(|c| !pivot_cols.contains(c))
        .map(|free| {
            let mut v = vec![0.0; n];
            v[free] = 1.0;
            for (row, &pc) in pivot_cols.iter().enumerate() {
                v[pc] = -m[row][free];
            }
            v
        })
        .collect()
}
