//! Discrete geometry kernels on polygonal curves and triangulated surfaces.

mod angles;
mod volume;

pub use angles::{measure_angles, AngleReport, ContactAngle, JunctionAngle};
pub use volume::{
    contact_area_change_lemma, contact_area_change_oracle, region_volume, region_volumes,
    volume_change_lemma, volume_change_oracle, wetted_area,
};

use crate::cluster::Point;
use crate::error::{Error, Result};

/// Clockwise rotation by 90 degrees in the xy-plane: `(a, b) -> (b, -a)`.
#[inline]
pub fn rot_m90(v: &Point) -> Point {
    Point::new(v.y, -v.x, 0.0)
}

/// Counter-clockwise rotation by 90 degrees in the xy-plane: `(a, b) -> (-b, a)`.
#[inline]
pub fn rot_p90(v: &Point) -> Point {
    Point::new(-v.y, v.x, 0.0)
}

/// Gather the corner points of simplex `s`.
#[inline]
pub fn gather(pos: &[Point], s: &[usize]) -> ([Point; 3], usize) {
    let mut q = [Point::zeros(); 3];
    for (k, &v) in s.iter().enumerate() {
        q[k] = pos[v];
    }
    (q, s.len())
}

/// Orientation vector of a simplex given by its `d` corners.
///
/// 2D: `rot_m90(q1 - q0)`; 3D: `(q1 - q0) x (q2 - q0)`.
#[inline]
pub fn orientation_vector(q: &[Point]) -> Point {
    match q.len() {
        2 => rot_m90(&(q[1] - q[0])),
        3 => (q[1] - q[0]).cross(&(q[2] - q[0])),
        n => panic!("simplex with {n} corners"),
    }
}

#[inline]
pub fn orientation_vector_at(pos: &[Point], s: &[usize]) -> Point {
    let (q, d) = gather(pos, s);
    orientation_vector(&q[..d])
}

/// `|A| / (d-1)!`.
#[inline]
pub fn measure_from_orientation(a: &Point, d: usize) -> f64 {
    if d == 3 {
        0.5 * a.norm()
    } else {
        a.norm()
    }
}

#[inline]
pub fn simplex_measure(q: &[Point]) -> f64 {
    measure_from_orientation(&orientation_vector(q), q.len())
}

#[inline]
pub fn simplex_measure_at(pos: &[Point], s: &[usize]) -> f64 {
    let (q, d) = gather(pos, s);
    simplex_measure(&q[..d])
}

/// Unit normal, or `None` for a degenerate simplex.
pub fn unit_normal(q: &[Point]) -> Option<Point> {
    let a = orientation_vector(q);
    let n = a.norm();
    (n > 0.0).then(|| a / n)
}

/// Tangential gradients of the P1 hat functions on a simplex.
///
/// Returns the simplex measure; gradients are written to `grad[..d]`.
pub fn p1_gradients(q: &[Point], grad: &mut [Point; 3]) -> f64 {
    let a = orientation_vector(q);
    let an = a.norm();
    match q.len() {
        2 => {
            let e = q[1] - q[0];
            let l2 = e.norm_squared();
            grad[0] = -e / l2;
            grad[1] = e / l2;
            an
        }
        3 => {
            let n = a / an;
            for k in 0..3 {
                let opp = q[(k + 2) % 3] - q[(k + 1) % 3];
                grad[k] = n.cross(&opp) / an;
            }
            0.5 * an
        }
        n => panic!("simplex with {n} corners"),
    }
}

/// Time-integrated orientation vector between two configurations of a simplex,
/// i.e. `int_0^1 A(t) dt` for linear interpolation of the corners.
pub fn integrated_orientation(old: &[Point], new: &[Point]) -> Point {
    let a0 = orientation_vector(old);
    let a1 = orientation_vector(new);
    match old.len() {
        2 => 0.5 * (a0 + a1),
        _ => {
            let mid = [
                0.5 * (old[0] + new[0]),
                0.5 * (old[1] + new[1]),
                0.5 * (old[2] + new[2]),
            ];
            (a0 + 4.0 * orientation_vector(&mid) + a1) / 6.0
        }
    }
}

/// Time-weighted normal on a simplex moving from `old` to `new`.
pub fn weighted_normal(old: &[Point], new: &[Point]) -> Result<Point> {
    let norm = orientation_vector(old).norm();
    if !(norm > 0.0) {
        return Err(Error::Domain("weighted normal of a degenerate simplex".into()));
    }
    Ok(integrated_orientation(old, new) / norm)
}

/// Time-weighted in-plane outward vector of a 3D chain segment whose direction
/// changes from `f_old` to `f_new`.
pub fn weighted_xi_3d(n: &Point, f_old: &Point, f_new: &Point) -> Result<Point> {
    let len = f_old.norm();
    if !(len > 0.0) {
        return Err(Error::Domain("weighted xi of a zero-length segment".into()));
    }
    Ok(n.cross(&(f_old + f_new)) / (2.0 * len))
}

/// In-line outward vector at a 2D contact point; `at_end` tells whether the contact
/// vertex is the last vertex of its curve.
pub fn xi_2d(n: &Point, at_end: bool) -> Point {
    let r = rot_p90(n);
    if at_end {
        r
    } else {
        -r
    }
}
