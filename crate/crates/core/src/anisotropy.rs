//! BGN-type anisotropic surface energy densities
//! `gamma(p) = (sum_l gamma_l(p)^r)^(1/r)`, `gamma_l(p) = sqrt(p . G_l p)`.

use nalgebra::{Matrix2, Matrix3};

use crate::cluster::Point;
use crate::error::{Error, Result};

/// Ratio floor used when raising `gamma_l / gamma` to large powers.
const RATIO_FLOOR: f64 = 1e-300;

#[derive(Clone, Debug, PartialEq)]
pub enum AnisotropyKind {
    Isotropic,
    Cusp { eps: f64 },
    Rotation2d { l: usize, eps: f64 },
    Matrices,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Anisotropy {
    dim: usize,
    kind: AnisotropyKind,
    exponent: f64,
    /// `G_l`, embedded in 3x3 (identity in the unused corner for 2D).
    g: Vec<Matrix3<f64>>,
    /// `det(G_l)^(1/(d-1)) G_l^{-1}`.
    gtilde: Vec<Matrix3<f64>>,
}

fn embed2(m: &Matrix2<f64>) -> Matrix3<f64> {
    Matrix3::new(m[(0, 0)], m[(0, 1)], 0.0, m[(1, 0)], m[(1, 1)], 0.0, 0.0, 0.0, 1.0)
}

impl Anisotropy {
    /// `gamma(p) = |p|`.
    pub fn isotropic(dim: usize) -> Self {
        Self::from_matrices(dim, vec![Matrix3::identity()], 1.0)
            .map(|mut a| {
                a.kind = AnisotropyKind::Isotropic;
                a
            })
            .expect("identity is SPD")
    }

    /// `G_l = (1 - eps^2) e_l e_l^T + eps^2 I`, `l = 1..d`.
    pub fn cusp(dim: usize, r: f64, eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::InvalidAnisotropy(format!("cusp eps must be positive, got {eps}")));
        }
        let e2 = eps * eps;
        let mats = (0..dim)
            .map(|l| {
                let mut m = Matrix3::identity() * e2;
                m[(l, l)] = 1.0;
                if dim == 2 {
                    m[(2, 2)] = 1.0;
                }
                m
            })
            .collect();
        let mut a = Self::from_matrices(dim, mats, r)?;
        a.kind = AnisotropyKind::Cusp { eps };
        Ok(a)
    }

    /// 2D family `G_l = R(-theta_l) diag(1, eps^2) R(theta_l)`, `theta_l = (l-1) pi / L`, `r = 1`.
    pub fn rotation_2d(l: usize, eps: f64) -> Result<Self> {
        if l == 0 {
            return Err(Error::InvalidAnisotropy("rotation2d needs L >= 1".into()));
        }
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::InvalidAnisotropy(format!("rotation2d eps must be positive, got {eps}")));
        }
        let d = Matrix2::new(1.0, 0.0, 0.0, eps * eps);
        let rot = |t: f64| Matrix2::new(t.cos(), t.sin(), -t.sin(), t.cos());
        let mats = (0..l)
            .map(|k| {
                let t = k as f64 * std::f64::consts::PI / l as f64;
                embed2(&(rot(-t) * d * rot(t)))
            })
            .collect();
        let mut a = Self::from_matrices(2, mats, 1.0)?;
        a.kind = AnisotropyKind::Rotation2d { l, eps };
        Ok(a)
    }

    /// General form from SPD matrices. In 2D only the leading 2x2 block is used.
    pub fn from_matrices(dim: usize, mats: Vec<Matrix3<f64>>, r: f64) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidAnisotropy(format!("dimension {dim}")));
        }
        if mats.is_empty() {
            return Err(Error::InvalidAnisotropy("at least one matrix is required".into()));
        }
        if !(r >= 1.0) || !r.is_finite() {
            return Err(Error::InvalidAnisotropy(format!("exponent r must be >= 1, got {r}")));
        }
        let mut g = Vec::with_capacity(mats.len());
        let mut gtilde = Vec::with_capacity(mats.len());
        for (l, m) in mats.into_iter().enumerate() {
            let m = if dim == 2 { embed2(&m.fixed_view::<2, 2>(0, 0).into_owned()) } else { m };
            let scale = m.abs().max();
            if (m - m.transpose()).abs().max() > 1e-12 * scale {
                return Err(Error::InvalidAnisotropy(format!("G_{l} is not symmetric")));
            }
            let gt = if dim == 2 {
                let m2 = m.fixed_view::<2, 2>(0, 0).into_owned();
                let det = m2.determinant();
                let inv = m2
                    .cholesky()
                    .ok_or_else(|| Error::InvalidAnisotropy(format!("G_{l} is not positive definite")))?
                    .inverse();
                embed2(&(inv * det))
            } else {
                let det = m.determinant();
                let inv = m
                    .cholesky()
                    .ok_or_else(|| Error::InvalidAnisotropy(format!("G_{l} is not positive definite")))?
                    .inverse();
                inv * det.sqrt()
            };
            g.push(m);
            gtilde.push(gt);
        }
        Ok(Self { dim, kind: AnisotropyKind::Matrices, exponent: r, g, gtilde })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &AnisotropyKind {
        &self.kind
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    pub fn matrices(&self) -> &[Matrix3<f64>] {
        &self.g
    }

    pub fn gtilde(&self) -> &[Matrix3<f64>] {
        &self.gtilde
    }

    pub fn gamma_l(&self, l: usize, p: &Point) -> f64 {
        p.dot(&(self.g[l] * p)).max(0.0).sqrt()
    }

    fn gammas(&self, p: &Point) -> Vec<f64> {
        (0..self.g.len()).map(|l| self.gamma_l(l, p)).collect()
    }

    fn combine(&self, gl: &[f64]) -> f64 {
        let r = self.exponent;
        if r == 1.0 {
            return gl.iter().sum();
        }
        let m = gl.iter().copied().fold(0.0, f64::max);
        if m == 0.0 {
            return 0.0;
        }
        m * gl.iter().map(|g| (g / m).powf(r)).sum::<f64>().powf(1.0 / r)
    }

    pub fn gamma(&self, p: &Point) -> f64 {
        self.combine(&self.gammas(p))
    }

    /// Weights `(gamma_l(p) / gamma(p))^(r-1)`, evaluated on `p / |p|`.
    pub fn weights(&self, p: &Point) -> Vec<f64> {
        let r = self.exponent;
        if r == 1.0 {
            return vec![1.0; self.g.len()];
        }
        let n = p.norm();
        let q = if n > 0.0 { p / n } else { *p };
        let gl = self.gammas(&q);
        let g = self.combine(&gl);
        gl.iter().map(|x| (x / g).max(RATIO_FLOOR).powf(r - 1.0)).collect()
    }

    /// `gamma'(p) = sum_l (gamma_l / gamma)^(r-1) G_l p / gamma_l`.
    pub fn gamma_prime(&self, p: &Point) -> Result<Point> {
        let n = p.norm();
        if !(n > 0.0) {
            return Err(Error::Domain("gamma' is undefined at p = 0".into()));
        }
        let w = self.weights(p);
        let mut out = Point::zeros();
        for (l, m) in self.g.iter().enumerate() {
            let gl = self.gamma_l(l, p);
            if gl > 0.0 {
                out += m * p * (w[l] / gl);
            }
        }
        if self.dim == 2 {
            out.z = 0.0;
        }
        Ok(out)
    }

    /// `G~`-orthonormal tangent basis of a simplex by Gram-Schmidt on the edges
    /// `q1 - q0`, `q2 - q0`. Only the first `d - 1` vectors are meaningful.
    pub fn tangent_basis(&self, l: usize, q: &[Point]) -> [Point; 2] {
        let gt = &self.gtilde[l];
        let gnorm = |v: &Point| v.dot(&(gt * v)).sqrt();
        if q.len() == 2 {
            let e = q[1] - q[0];
            return [e / gnorm(&e), Point::zeros()];
        }
        let (e1, e2) = (q[1] - q[0], q[2] - q[0]);
        let t1 = e1 / gnorm(&e1);
        let w = e2 - t1 * e2.dot(&(gt * t1));
        [t1, w / gnorm(&w)]
    }
}
