//! Planar curve networks.

use std::f64::consts::{PI, TAU};

use crate::cluster::{Cluster, Point};
use crate::error::{Error, Result};

use super::builder::{ClusterBuilder, JunctionSpec, RegionSpec};

type Param = Box<dyn Fn(f64) -> Point>;

pub(crate) struct CurveDef {
    param: Param,
    /// Junction labels of the endpoints; `None` for free or contact endpoints.
    start: Option<usize>,
    end: Option<usize>,
    closed: bool,
}

fn p2(x: f64, y: f64) -> Point {
    Point::new(x, y, 0.0)
}

pub(crate) fn line(a: Point, b: Point, start: Option<usize>, end: Option<usize>) -> CurveDef {
    CurveDef { param: Box::new(move |t| a + (b - a) * t), start, end, closed: false }
}

/// Arc of the circle `center + r (cos, sin)` from angle `t0` to `t1`.
pub(crate) fn arc(center: Point, r: f64, t0: f64, t1: f64, start: Option<usize>, end: Option<usize>) -> CurveDef {
    CurveDef {
        param: Box::new(move |t| {
            let a = t0 + (t1 - t0) * t;
            center + p2(r * a.cos(), r * a.sin())
        }),
        start,
        end,
        closed: false,
    }
}

/// Ellipse arc `(a cos, b sin)` from angle `t0` to `t1`.
pub(crate) fn ellipse(a: f64, b: f64, t0: f64, t1: f64, start: Option<usize>, end: Option<usize>) -> CurveDef {
    CurveDef {
        param: Box::new(move |t| {
            let s = t0 + (t1 - t0) * t;
            p2(a * s.cos(), b * s.sin())
        }),
        start,
        end,
        closed: false,
    }
}

pub(crate) fn circle(center: Point, r: f64) -> CurveDef {
    CurveDef {
        param: Box::new(move |t| center + p2(r * (TAU * t).cos(), r * (TAU * t).sin())),
        start: None,
        end: None,
        closed: true,
    }
}

const TABLE: usize = 8192;

/// Cumulative arc length table of a parametrized curve.
fn arc_table(f: &dyn Fn(f64) -> Point) -> Vec<f64> {
    let mut out = Vec::with_capacity(TABLE + 1);
    out.push(0.0);
    let mut prev = f(0.0);
    for i in 1..=TABLE {
        let x = f(i as f64 / TABLE as f64);
        out.push(out[i - 1] + (x - prev).norm());
        prev = x;
    }
    out
}

/// Parameters of `n + 1` points equidistributed in arc length.
fn equidistant_params(table: &[f64], n: usize) -> Vec<f64> {
    let total = *table.last().unwrap();
    (0..=n)
        .map(|j| {
            if j == 0 {
                return 0.0;
            }
            if j == n {
                return 1.0;
            }
            let target = total * j as f64 / n as f64;
            let i = table.partition_point(|&s| s < target).clamp(1, TABLE);
            let (s0, s1) = (table[i - 1], table[i]);
            let frac = if s1 > s0 { (target - s0) / (s1 - s0) } else { 0.0 };
            (i as f64 - 1.0 + frac) / TABLE as f64
        })
        .collect()
}

/// Split `total` elements over curves proportionally to length (largest remainder).
fn allocate(lengths: &[f64], total: usize, min: usize) -> Result<Vec<usize>> {
    if total < min * lengths.len() {
        return Err(Error::Config(format!("K too small for {} curves", lengths.len())));
    }
    let sum: f64 = lengths.iter().sum();
    let raw: Vec<f64> = lengths.iter().map(|l| l / sum * total as f64).collect();
    let mut n: Vec<usize> = raw.iter().map(|r| (r.floor() as usize).max(min)).collect();
    loop {
        let have: usize = n.iter().sum();
        if have == total {
            break;
        }
        if have < total {
            let i = (0..n.len())
                .max_by(|&a, &b| (raw[a] - n[a] as f64).total_cmp(&(raw[b] - n[b] as f64)))
                .unwrap();
            n[i] += 1;
        } else {
            let i = (0..n.len())
                .filter(|&i| n[i] > min)
                .min_by(|&a, &b| (raw[a] - n[a] as f64).total_cmp(&(raw[b] - n[b] as f64)))
                .ok_or_else(|| Error::Config("cannot distribute elements".into()))?;
            n[i] -= 1;
        }
    }
    Ok(n)
}

/// Discretize curves with about `k` vertices in total and glue them at the
/// labelled junction points.
pub(crate) fn build_network(junction_points: &[Point], curves: Vec<CurveDef>, k: usize) -> Result<ClusterBuilder> {
    let tables: Vec<Vec<f64>> = curves.iter().map(|c| arc_table(&*c.param)).collect();
    let lengths: Vec<f64> = tables.iter().map(|t| *t.last().unwrap()).collect();
    let open = curves.iter().filter(|c| !c.closed).count();
    let elems = allocate(&lengths, k.saturating_sub(open), 2)?;
    let mut b = ClusterBuilder::new(2);
    for (c, (curve, table)) in curves.iter().zip(&tables).enumerate() {
        let n = elems[c];
        let params = equidistant_params(table, n);
        let mut pts: Vec<Point> = params.iter().map(|&t| (curve.param)(t)).collect();
        if curve.closed {
            pts.pop();
        }
        if let Some(j) = curve.start {
            pts[0] = junction_points[j];
        }
        if let Some(j) = curve.end {
            *pts.last_mut().unwrap() = junction_points[j];
        }
        let nv = pts.len();
        let simplices = if curve.closed {
            (0..nv).map(|i| vec![i, (i + 1) % nv]).collect()
        } else {
            (0..nv - 1).map(|i| vec![i, i + 1]).collect()
        };
        b.add_patch(pts, simplices);
    }
    for (j, _) in junction_points.iter().enumerate() {
        let mut ends = Vec::new();
        for (c, curve) in curves.iter().enumerate() {
            if curve.start == Some(j) {
                ends.push((c, 0));
            }
            if curve.end == Some(j) {
                ends.push((c, b.patches[c].vertices.len() - 1));
            }
        }
        match ends.len() {
            0 => {}
            3 => b.junctions.push(JunctionSpec {
                surfaces: [ends[0].0, ends[1].0, ends[2].0],
                vertices: [vec![ends[0].1], vec![ends[1].1], vec![ends[2].1]],
            }),
            n => return Err(Error::InvalidCluster(format!("junction point {j} has {n} curve ends"))),
        }
    }
    Ok(b)
}

fn region(surfaces: Vec<usize>, interior: Point) -> RegionSpec {
    RegionSpec { surfaces, interior, boundaries: Vec::new(), reference: interior }
}

/// Two 2:1 semi-ellipses joined by a straight segment.
pub fn double_bubble_2d(k: usize, sigma: [f64; 3]) -> Result<Cluster> {
    let jp = [p2(2.0, 0.0), p2(-2.0, 0.0)];
    let curves = vec![
        ellipse(2.0, 1.0, 0.0, PI, Some(0), Some(1)),
        ellipse(2.0, 1.0, PI, TAU, Some(1), Some(0)),
        line(jp[1], jp[0], Some(1), Some(0)),
    ];
    let mut b = build_network(&jp, curves, k)?;
    b.regions.push(region(vec![0, 2], p2(0.0, 0.5)));
    b.regions.push(region(vec![1, 2], p2(0.0, -0.5)));
    let mut c = b.build()?;
    c.set_sigmas(&sigma)?;
    Ok(c)
}

/// Planar `n`-bubble, `2 <= n <= 7`, in slightly generic position.
///
/// For `n >= 3` every curve starts straight, so the initial network is a
/// polygon partition far from equilibrium. `n = 3` splits a triangle inscribed
/// in the unit circle into three parts; `n >= 4` uses a central `(n-1)`-gon
/// surrounded by `n-1` quadrilateral petals.
pub fn standard_bubble_2d(n: usize, k: usize) -> Result<Cluster> {
    match n {
        2 => double_bubble_2d(k, [1.0; 3]),
        3 => sectors_2d(k),
        4..=7 => flower_2d(n - 1, k),
        _ => Err(Error::Unsupported(format!("{n}-bubble in 2D (supported: 2 to 7)"))),
    }
}

fn petal_angles(m: usize) -> Vec<f64> {
    (0..m).map(|j| PI / 2.0 + TAU * j as f64 / m as f64 + 0.12 * (1.7 * j as f64 + 0.3).sin()).collect()
}

fn sectors_2d(k: usize) -> Result<Cluster> {
    let th = petal_angles(3);
    let mut jp = vec![p2(0.02, -0.03)];
    jp.extend(th.iter().map(|t| p2(t.cos(), t.sin())));
    let mut curves = Vec::new();
    for j in 0..3 {
        curves.push(line(jp[0], jp[1 + j], Some(0), Some(1 + j)));
    }
    for j in 0..3 {
        curves.push(line(jp[1 + j], jp[1 + (j + 1) % 3], Some(1 + j), Some(1 + (j + 1) % 3)));
    }
    let mut b = build_network(&jp, curves, k)?;
    for j in 0..3 {
        let interior = (jp[0] + jp[1 + j] + jp[1 + (j + 1) % 3]) / 3.0;
        b.regions.push(region(vec![j, (j + 1) % 3, 3 + j], interior));
    }
    b.build()
}

fn flower_2d(m: usize, k: usize) -> Result<Cluster> {
    let th = petal_angles(m);
    let rc: Vec<f64> = (0..m).map(|j| 0.45 * (1.0 + 0.08 * (2.3 * j as f64 + 1.0).sin())).collect();
    // Junction labels: Q_j = j (inner polygon), P_j = m + j (outer polygon).
    let mut jp: Vec<Point> = (0..m).map(|j| p2(rc[j] * th[j].cos(), rc[j] * th[j].sin())).collect();
    jp.extend(th.iter().map(|t| p2(t.cos(), t.sin())));
    let mut curves = Vec::new();
    for j in 0..m {
        curves.push(line(jp[j], jp[(j + 1) % m], Some(j), Some((j + 1) % m)));
    }
    for j in 0..m {
        curves.push(line(jp[j], jp[m + j], Some(j), Some(m + j)));
    }
    for j in 0..m {
        curves.push(line(jp[m + j], jp[m + (j + 1) % m], Some(m + j), Some(m + (j + 1) % m)));
    }
    let mut b = build_network(&jp, curves, k)?;
    let centre = jp[..m].iter().sum::<Point>() / m as f64;
    b.regions.push(region((0..m).collect(), centre));
    for j in 0..m {
        let j1 = (j + 1) % m;
        let interior = (jp[j] + jp[j1] + jp[m + j] + jp[m + j1]) / 4.0;
        b.regions.push(region(vec![j, m + j, m + j1, 2 * m + j], interior));
    }
    b.build()
}

/// Semicircular drop of radius 1 sitting on the line `y = 0`.
pub fn drop_2d(k: usize, rho: f64) -> Result<Cluster> {
    let mut b = build_network(&[], vec![arc(Point::zeros(), 1.0, 0.0, PI, None, None)], k)?;
    let last = b.patches[0].vertices.len() - 1;
    b.patches[0].vertices[0] = p2(1.0, 0.0);
    b.patches[0].vertices[last] = p2(-1.0, 0.0);
    let n = p2(0.0, 1.0);
    let b0 = b.add_boundary(0, vec![0], Point::zeros(), n, rho);
    let b1 = b.add_boundary(0, vec![last], Point::zeros(), n, rho);
    b.regions.push(RegionSpec { surfaces: vec![0], interior: p2(0.0, 0.5), boundaries: vec![b0, b1], reference: Point::zeros() });
    b.build()
}

/// Straight segment spanning the gap between the walls `x = -1` and `x = 1`.
pub fn plate_2d(k: usize) -> Result<Cluster> {
    let mut b = build_network(&[], vec![line(p2(-1.0, 0.0), p2(1.0, 0.0), None, None)], k)?;
    let last = b.patches[0].vertices.len() - 1;
    b.add_boundary(0, vec![0], p2(-1.0, 0.0), p2(1.0, 0.0), 0.0);
    b.add_boundary(0, vec![last], p2(1.0, 0.0), p2(-1.0, 0.0), 0.0);
    b.build()
}

/// Single closed circle enclosing one region.
pub fn circle_2d(k: usize, r: f64) -> Result<Cluster> {
    let mut b = build_network(&[], vec![circle(Point::zeros(), r)], k)?;
    b.regions.push(region(vec![0], Point::zeros()));
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn allocation_hits_total() {
        let n = allocate(&[4.84, 4.84, 4.0], 126, 2).unwrap();
        assert_eq!(n.iter().sum::<usize>(), 126);
        assert!(allocate(&[1.0; 5], 7, 2).is_err());
    }

    #[test]
    fn equidistant_on_ellipse() {
        let c = ellipse(2.0, 1.0, 0.0, PI, None, None);
        let t = arc_table(&*c.param);
        let params = equidistant_params(&t, 40);
        let pts: Vec<Point> = params.iter().map(|&s| (c.param)(s)).collect();
        let lens: Vec<f64> = pts.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
        let (lo, hi) = lens.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &l| (a.min(l), b.max(l)));
        assert!(hi / lo < 1.01, "{lo} {hi}");
    }
}
