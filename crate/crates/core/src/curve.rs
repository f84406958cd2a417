//! Discrete planar closed curves and the square-root velocity transform.
//!
//! A contour is an ordered list of boundary points of one closed shape.
//! Its SRVF is q(t) = y'(t)/sqrt(|y'(t)|), sampled on the uniform parameter
//! grid t_k = k/N with derivatives taken by cyclic central differences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{sc, Scalar};

/// Planar point / vector.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Vec2<T> {
    pub fn new(x: T, y: T) -> Self {
        Vec2 { x, y }
    }

    pub fn zero() -> Self {
        Vec2 {
            x: T::zero(),
            y: T::zero(),
        }
    }

    #[inline]
    pub fn dot(self, other: Vec2<T>) -> T {
        self.x * other.x + self.y * other.y
    }

    /// 2D cross product (z-component of the 3D cross).
    #[inline]
    pub fn cross(self, other: Vec2<T>) -> T {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> T {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn scale(self, s: T) -> Vec2<T> {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl<T: Scalar> std::ops::Add for Vec2<T> {
    type Output = Vec2<T>;
    #[inline]
    fn add(self, o: Vec2<T>) -> Vec2<T> {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Scalar> std::ops::Sub for Vec2<T> {
    type Output = Vec2<T>;
    #[inline]
    fn sub(self, o: Vec2<T>) -> Vec2<T> {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Scalar> std::ops::Neg for Vec2<T> {
    type Output = Vec2<T>;
    #[inline]
    fn neg(self) -> Vec2<T> {
        Vec2::new(-self.x, -self.y)
    }
}

/// Rotation in SO(2), stored as (cos, sin).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rot2<T> {
    pub c: T,
    pub s: T,
}

impl<T: Scalar> Rot2<T> {
    pub fn identity() -> Self {
        Rot2 {
            c: T::one(),
            s: T::zero(),
        }
    }

    pub fn from_angle(theta: T) -> Self {
        Rot2 {
            c: theta.cos(),
            s: theta.sin(),
        }
    }

    pub fn angle(self) -> T {
        self.s.atan2(self.c)
    }

    #[inline]
    pub fn apply(self, v: Vec2<T>) -> Vec2<T> {
        Vec2::new(self.c * v.x - self.s * v.y, self.s * v.x + self.c * v.y)
    }

    pub fn inverse(self) -> Rot2<T> {
        Rot2 { c: self.c, s: -self.s }
    }

    /// Composition: `self` applied after `other`.
    pub fn compose(self, other: Rot2<T>) -> Rot2<T> {
        Rot2 {
            c: self.c * other.c - self.s * other.s,
            s: self.s * other.c + self.c * other.s,
        }
    }
}

/// Ordered boundary points of one closed planar shape at one time frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour<T> {
    points: Vec<Vec2<T>>,
}

impl<T: Scalar> Contour<T> {
    /// Builds a contour, requiring at least 3 points.
    pub fn new(points: Vec<Vec2<T>>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::DegenerateContour(format!(
                "need at least 3 points, got {}",
                points.len()
            )));
        }
        Ok(Contour { points })
    }

    pub fn points(&self) -> &[Vec2<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Mean of the sample points. Coincides with the curve centroid for
    /// uniformly resampled contours.
    pub fn centroid(&self) -> Vec2<T> {
        let mut acc = Vec2::zero();
        for &p in &self.points {
            acc = acc + p;
        }
        acc.scale(T::one() / T::from_usize(self.points.len()))
    }

    /// Closed polyline length, including the wrap-around edge.
    pub fn perimeter(&self) -> T {
        let n = self.points.len();
        let mut acc = T::zero();
        for k in 0..n {
            acc += (self.points[(k + 1) % n] - self.points[k]).norm();
        }
        acc
    }

    pub fn translate(&self, v: Vec2<T>) -> Contour<T> {
        Contour {
            points: self.points.iter().map(|&p| p + v).collect(),
        }
    }

    pub fn rotate(&self, r: Rot2<T>) -> Contour<T> {
        Contour {
            points: self.points.iter().map(|&p| r.apply(p)).collect(),
        }
    }

    /// Shifts the start point by `shift` samples (cyclic).
    pub fn reseed(&self, shift: usize) -> Contour<T> {
        let n = self.points.len();
        Contour {
            points: (0..n).map(|k| self.points[(k + shift) % n]).collect(),
        }
    }
}

/// Resamples to `n` points at uniform arc length along the closed polyline.
///
/// The first output point is the input's first point (arc-length origin);
/// orientation is preserved.
pub fn resample_uniform<T: Scalar>(contour: &Contour<T>, n: usize) -> Result<Contour<T>> {
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "resample target {n} too small"
        )));
    }
    let pts = contour.points();
    let m = pts.len();

    // Cumulative arc length over the closed polyline (m+1 entries).
    let mut cum = Vec::with_capacity(m + 1);
    cum.push(T::zero());
    for k in 0..m {
        let seg = (pts[(k + 1) % m] - pts[k]).norm();
        cum.push(cum[k] + seg);
    }
    let total = cum[m];
    if total < sc::<T>(1e-12) {
        return Err(Error::DegenerateContour(
            "total length below 1e-12".to_string(),
        ));
    }

    let mut out = Vec::with_capacity(n);
    let mut seg = 0usize;
    for k in 0..n {
        let target = total * T::from_usize(k) / T::from_usize(n);
        while seg + 1 < m && cum[seg + 1] < target {
            seg += 1;
        }
        let seg_len = cum[seg + 1] - cum[seg];
        let t = if seg_len > T::zero() {
            (target - cum[seg]) / seg_len
        } else {
            T::zero()
        };
        let a = pts[seg];
        let b = pts[(seg + 1) % m];
        out.push(a + (b - a).scale(t));
    }
    Contour::new(out)
}

/// Moves the centroid to the origin and rescales the perimeter to one.
pub fn center_and_scale<T: Scalar>(contour: &Contour<T>) -> Result<Contour<T>> {
    let perimeter = contour.perimeter();
    if perimeter < sc::<T>(1e-12) {
        return Err(Error::DegenerateContour("zero perimeter".to_string()));
    }
    let c = contour.centroid();
    let inv = T::one() / perimeter;
    Contour::new(
        contour
            .points()
            .iter()
            .map(|&p| (p - c).scale(inv))
            .collect(),
    )
}

/// Discrete SRVF: planar vectors sampled at t_k = k/N.
#[derive(Debug, Clone, PartialEq)]
pub struct Srvf<T> {
    values: Vec<Vec2<T>>,
}

impl<T: Scalar> Srvf<T> {
    pub fn from_values(values: Vec<Vec2<T>>) -> Self {
        Srvf { values }
    }

    pub fn values(&self) -> &[Vec2<T>] {
        &self.values
    }

    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    /// Discrete L2 inner product: (1/N) sum q1_k . q2_k.
    pub fn inner(&self, other: &Srvf<T>) -> T {
        debug_assert_eq!(self.values.len(), other.values.len());
        let n = T::from_usize(self.values.len());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a.dot(b))
            .sum::<T>()
            / n
    }

    pub fn norm(&self) -> T {
        self.inner(self).sqrt()
    }

    pub fn rotate(&self, r: Rot2<T>) -> Srvf<T> {
        Srvf {
            values: self.values.iter().map(|&v| r.apply(v)).collect(),
        }
    }
}

/// SRVF transform with cyclic central differences on the uniform grid.
pub fn to_srvf<T: Scalar>(contour: &Contour<T>) -> Result<Srvf<T>> {
    let pts = contour.points();
    let n = pts.len();
    let two_h = sc::<T>(2.0) / T::from_usize(n);
    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        let fwd = pts[(k + 1) % n];
        let bwd = pts[(k + n - 1) % n];
        let deriv = (fwd - bwd).scale(T::one() / two_h);
        let speed = deriv.norm();
        if speed < sc::<T>(1e-10) {
            return Err(Error::CoincidentSamples { index: k });
        }
        values.push(deriv.scale(T::one() / speed.sqrt()));
    }
    Ok(Srvf { values })
}

/// Curve reconstructed from an SRVF by cumulative trapezoidal integration of
/// q|q|, starting at `basepoint`, together with the closure gap |y(1) - y(0)|.
pub struct Reconstruction<T> {
    pub contour: Contour<T>,
    pub closure_gap: T,
}

/// Inverse SRVF map. The reconstructed polyline is generally open by a small
/// gap (closure is not enforced); the gap is reported to the caller.
pub fn from_srvf<T: Scalar>(srvf: &Srvf<T>, basepoint: Vec2<T>) -> Result<Reconstruction<T>> {
    let q = srvf.values();
    let n = q.len();
    if n < 3 {
        return Err(Error::InvalidInput("SRVF grid too small".to_string()));
    }
    let h = T::one() / T::from_usize(n);
    let vel: Vec<Vec2<T>> = q.iter().map(|&qk| qk.scale(qk.norm())).collect();

    let mut pts = Vec::with_capacity(n);
    pts.push(basepoint);
    let half = sc::<T>(0.5);
    for k in 1..n {
        let step = (vel[k - 1] + vel[k]).scale(half * h);
        let prev = pts[k - 1];
        pts.push(prev + step);
    }
    // One more step to t = 1 using the cyclic wrap; its distance to the
    // basepoint is the closure gap.
    let last = pts[n - 1] + (vel[n - 1] + vel[0]).scale(half * h);
    let gap = (last - basepoint).norm();

    Ok(Reconstruction {
        contour: Contour::new(pts)?,
        closure_gap: gap,
    })
}

/// Sampled analytic shapes used by tests, the simulator seeds, and examples.
pub mod shapes {
    use super::*;

    /// Circle of given radius, `n` samples, counterclockwise.
    pub fn circle<T: Scalar>(center: Vec2<T>, radius: T, n: usize) -> Contour<T> {
        let two_pi = T::PI() * sc::<T>(2.0);
        Contour::new(
            (0..n)
                .map(|k| {
                    let t = two_pi * T::from_usize(k) / T::from_usize(n);
                    Vec2::new(center.x + radius * t.cos(), center.y + radius * t.sin())
                })
                .collect(),
        )
        .expect("circle with n >= 3")
    }

    /// Axis-aligned ellipse.
    pub fn ellipse<T: Scalar>(a: T, b: T, n: usize) -> Contour<T> {
        let two_pi = T::PI() * sc::<T>(2.0);
        Contour::new(
            (0..n)
                .map(|k| {
                    let t = two_pi * T::from_usize(k) / T::from_usize(n);
                    Vec2::new(a * t.cos(), b * t.sin())
                })
                .collect(),
        )
        .expect("ellipse with n >= 3")
    }

    /// Smooth star-like blob: circle modulated by a cosine of `lobes` periods.
    pub fn blob<T: Scalar>(radius: T, lobes: usize, amplitude: T, n: usize) -> Contour<T> {
        let two_pi = T::PI() * sc::<T>(2.0);
        Contour::new(
            (0..n)
                .map(|k| {
                    let t = two_pi * T::from_usize(k) / T::from_usize(n);
                    let r = radius * (T::one() + amplitude * (T::from_usize(lobes) * t).cos());
                    Vec2::new(r * t.cos(), r * t.sin())
                })
                .collect(),
        )
        .expect("blob with n >= 3")
    }

    /// Axis-aligned square traversed counterclockwise from the corner (half, -half).
    pub fn square<T: Scalar>(side: T, points_per_edge: usize) -> Contour<T> {
        let half = side * sc::<T>(0.5);
        let corners = [
            Vec2::new(half, -half),
            Vec2::new(half, half),
            Vec2::new(-half, half),
            Vec2::new(-half, -half),
        ];
        let mut pts = Vec::with_capacity(4 * points_per_edge);
        for e in 0..4 {
            let a = corners[e];
            let b = corners[(e + 1) % 4];
            for k in 0..points_per_edge {
                let t = T::from_usize(k) / T::from_usize(points_per_edge);
                pts.push(a + (b - a).scale(t));
            }
        }
        Contour::new(pts).expect("square")
    }
}
