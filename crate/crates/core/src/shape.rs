//! Geometry of the SRVF pre-shape sphere with rotation and reparameterization
//! alignment.
//!
//! Unit-norm SRVFs of unit-length curves live on the unit sphere of the
//! discrete L2 metric `<a,b> = (1/N) sum a_k . b_k`. Two SRVFs represent the
//! same shape when they differ by a rotation, a cyclic shift of the start
//! point, or a monotone reparameterization; alignment removes these nuisance
//! variables before any metric computation.
//!
//! Geodesics, exponential/log maps, and parallel transport are computed on
//! the pre-shape sphere *after* pairwise alignment (align-then-sphere). This
//! avoids path-straightening in the closed-curve shape space; the downstream
//! pipeline consumes only shooting vectors and transports, for which the
//! sphere approximation is standard. Closed-form sphere expressions:
//!
//! ```text
//! exp_q(v)  = cos(|v|) q + sin(|v|) v/|v|
//! log_q1(q2) = theta/sin(theta) (q2 - cos(theta) q1),  theta = acos<q1,q2>
//! transport_{a->b}(v) = v - <v, a+b>/(1 + <a,b>) (a + b)
//! ```
//!
//! The reparameterization is found by dynamic programming over monotone
//! lattice paths on the full N x N grid with local slopes restricted to
//! [1/3, 3], after a search over cyclic start points (seeds).

use std::sync::Arc;

use crate::curve::{Rot2, Srvf, Vec2};
use crate::error::{Error, Result};
use crate::scalar::{sc, Scalar};

/// Threshold beyond which two pre-shapes are treated as antipodal: the
/// transport and log formulas blow up as theta approaches pi.
const ANTIPODAL_MARGIN: f64 = 1e-6;

/// Unit-norm SRVF: a point on the discretized pre-shape sphere.
///
/// Cheap to clone (the sample grid is shared).
#[derive(Debug, Clone, PartialEq)]
pub struct PreShape<T> {
    srvf: Arc<Srvf<T>>,
}

impl<T: Scalar> PreShape<T> {
    /// Wraps an SRVF, re-normalizing it to unit L2 norm.
    pub fn new(srvf: Srvf<T>) -> Result<Self> {
        let norm = srvf.norm();
        if norm < sc::<T>(1e-12) {
            return Err(Error::DegenerateContour(
                "SRVF has vanishing norm".to_string(),
            ));
        }
        let inv = T::one() / norm;
        let values = srvf.values().iter().map(|&v| v.scale(inv)).collect();
        Ok(PreShape {
            srvf: Arc::new(Srvf::from_values(values)),
        })
    }

    pub fn srvf(&self) -> &Srvf<T> {
        &self.srvf
    }

    pub fn values(&self) -> &[Vec2<T>] {
        self.srvf.values()
    }

    pub fn grid_size(&self) -> usize {
        self.srvf.grid_size()
    }

    pub fn inner(&self, other: &PreShape<T>) -> T {
        self.srvf.inner(other.srvf())
    }

    fn from_values_normalized(values: Vec<Vec2<T>>) -> Result<Self> {
        PreShape::new(Srvf::from_values(values))
    }
}

/// Tangent vector at a pre-shape; the normal component is projected out on
/// construction so tangency holds by construction.
#[derive(Debug, Clone)]
pub struct TangentVector<T> {
    base: PreShape<T>,
    field: Vec<Vec2<T>>,
}

impl<T: Scalar> TangentVector<T> {
    pub fn new(base: PreShape<T>, mut field: Vec<Vec2<T>>) -> Self {
        assert_eq!(base.grid_size(), field.len(), "tangent grid mismatch");
        let n = T::from_usize(field.len());
        let ip = field
            .iter()
            .zip(base.values())
            .map(|(&v, &b)| v.dot(b))
            .sum::<T>()
            / n;
        for (v, &b) in field.iter_mut().zip(base.values()) {
            *v = *v - b.scale(ip);
        }
        TangentVector { base, field }
    }

    pub fn zero(base: PreShape<T>) -> Self {
        let n = base.grid_size();
        TangentVector {
            base,
            field: vec![Vec2::zero(); n],
        }
    }

    pub fn base(&self) -> &PreShape<T> {
        &self.base
    }

    pub fn field(&self) -> &[Vec2<T>] {
        &self.field
    }

    pub fn grid_size(&self) -> usize {
        self.field.len()
    }

    pub fn inner(&self, other: &TangentVector<T>) -> T {
        debug_assert_eq!(self.field.len(), other.field.len());
        let n = T::from_usize(self.field.len());
        self.field
            .iter()
            .zip(&other.field)
            .map(|(&a, &b)| a.dot(b))
            .sum::<T>()
            / n
    }

    pub fn norm(&self) -> T {
        self.inner(self).sqrt()
    }

    pub fn scale(&self, s: T) -> TangentVector<T> {
        TangentVector {
            base: self.base.clone(),
            field: self.field.iter().map(|&v| v.scale(s)).collect(),
        }
    }

    pub fn add(&self, other: &TangentVector<T>) -> TangentVector<T> {
        debug_assert_eq!(self.field.len(), other.field.len());
        TangentVector {
            base: self.base.clone(),
            field: self
                .field
                .iter()
                .zip(&other.field)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &TangentVector<T>) -> TangentVector<T> {
        debug_assert_eq!(self.field.len(), other.field.len());
        TangentVector {
            base: self.base.clone(),
            field: self
                .field
                .iter()
                .zip(&other.field)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }
}

/// Result of aligning one pre-shape to another: a rotation, a cyclic start
/// point shift, and a monotone warp gamma stored on N+1 grid nodes with
/// gamma[0] = 0 and gamma[N] = 1.
#[derive(Debug, Clone)]
pub struct Alignment<T> {
    pub rotation: Rot2<T>,
    pub seed: usize,
    pub warp: Vec<T>,
}

impl<T: Scalar> Alignment<T> {
    pub fn identity(grid_size: usize) -> Self {
        Alignment {
            rotation: Rot2::identity(),
            seed: 0,
            warp: (0..=grid_size)
                .map(|k| T::from_usize(k) / T::from_usize(grid_size))
                .collect(),
        }
    }
}

/// How candidate start points are chosen for the reparameterization search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedSearch {
    /// Every `stride`-th start point.
    Stride(usize),
    /// All start points scored by rotation-only residual; the best `keep`
    /// go through the full dynamic-programming solve.
    Prefilter(usize),
}

/// Alignment configuration.
#[derive(Debug, Clone, Copy)]
pub struct AlignConfig {
    pub seed_search: SeedSearch,
    /// Rounds of alternating rotation/warp refinement after the seed search.
    pub rounds: usize,
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig {
            seed_search: SeedSearch::Stride(5),
            rounds: 2,
        }
    }
}

impl AlignConfig {
    /// Cheaper preset used when aligning long sequences frame to frame.
    pub fn fast() -> Self {
        AlignConfig {
            seed_search: SeedSearch::Prefilter(3),
            rounds: 2,
        }
    }
}

/// Optimal rotation of `q2` onto `q1` (Procrustes over SO(2)).
///
/// Returns the rotation and the rotated pre-shape. The 2x2 problem has the
/// closed-form solution theta = atan2(S2, S1) over the cross/dot
/// correlations, which is the SVD solution restricted to det = +1.
pub fn align_rotation<T: Scalar>(q1: &PreShape<T>, q2: &PreShape<T>) -> (Rot2<T>, PreShape<T>) {
    debug_assert_eq!(q1.grid_size(), q2.grid_size());
    let rot = optimal_rotation(q1.values(), q2.values(), 0);
    let rotated = q2.srvf().rotate(rot);
    (
        rot,
        PreShape::new(rotated).expect("rotation preserves norm"),
    )
}

fn optimal_rotation<T: Scalar>(q1: &[Vec2<T>], q2: &[Vec2<T>], shift: usize) -> Rot2<T> {
    let n = q1.len();
    let mut s1 = T::zero();
    let mut s2 = T::zero();
    for k in 0..n {
        let a = q1[k];
        let b = q2[(k + shift) % n];
        s1 += a.dot(b);
        s2 += a.y * b.x - a.x * b.y;
    }
    if s1 == T::zero() && s2 == T::zero() {
        return Rot2::identity();
    }
    Rot2::from_angle(s2.atan2(s1))
}

/// Rotation-optimal squared residual for every cyclic shift, used to
/// prefilter seed candidates. `|q1 - R q2s|^2 = 2 - 2 sqrt(S1^2 + S2^2)/N`.
fn rotation_residuals<T: Scalar>(q1: &[Vec2<T>], q2: &[Vec2<T>]) -> Vec<T> {
    let n = q1.len();
    let nf = T::from_usize(n);
    let two = sc::<T>(2.0);
    (0..n)
        .map(|s| {
            let mut s1 = T::zero();
            let mut s2 = T::zero();
            for k in 0..n {
                let a = q1[k];
                let b = q2[(k + s) % n];
                s1 += a.dot(b);
                s2 += a.y * b.x - a.x * b.y;
            }
            two - two * (s1 * s1 + s2 * s2).sqrt() / nf
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Dynamic-programming reparameterization
// ---------------------------------------------------------------------------

/// Allowed lattice steps (di, dj); slopes dj/di lie in [1/3, 3].
pub(crate) const DP_STEPS: [(usize, usize); 7] =
    [(1, 1), (1, 2), (2, 1), (1, 3), (3, 1), (2, 3), (3, 2)];

/// Per-curve tables for the DP cost. The warped curve is only ever evaluated
/// at parameters with denominator 6N, so one up-front linear interpolation
/// onto that fine grid turns every cost term into table lookups.
pub(crate) struct DpTables<T> {
    n: usize,
    /// |q1_k|^2
    sq1: Vec<T>,
    /// q1 rotated by the inverse of the candidate rotation (set per seed).
    q1r: Vec<Vec2<T>>,
    /// q2 on the fine grid of 6N samples per period.
    fine: Vec<Vec2<T>>,
    /// |q2_fine|^2
    sfine: Vec<T>,
}

impl<T: Scalar> DpTables<T> {
    pub(crate) fn new(q1: &[Vec2<T>], q2: &[Vec2<T>]) -> Self {
        let n = q1.len();
        let sq1 = q1.iter().map(|&v| v.norm_sq()).collect();
        let mut fine = Vec::with_capacity(6 * n);
        let sixth = sc::<T>(1.0 / 6.0);
        for k in 0..n {
            let a = q2[k];
            let b = q2[(k + 1) % n];
            for r in 0..6 {
                let t = T::from_usize(r) * sixth;
                fine.push(a + (b - a).scale(t));
            }
        }
        let sfine = fine.iter().map(|&v| v.norm_sq()).collect();
        DpTables {
            n,
            sq1,
            q1r: q1.to_vec(),
            fine,
            sfine,
        }
    }

    /// Prepares the tables for one (seed, rotation) candidate: the rotation
    /// is folded into q1 so the fine grid stays untouched.
    pub(crate) fn set_rotation(&mut self, q1: &[Vec2<T>], rot: Rot2<T>) {
        let inv = rot.inverse();
        for (dst, &src) in self.q1r.iter_mut().zip(q1) {
            *dst = inv.apply(src);
        }
    }

    /// Cost of the path segment (i0, j0) -> (i0+a, j0+b) under start shift
    /// `seed`: sum over the a columns of |q1 - sqrt(m) q2(gamma)|^2 with the
    /// segment's constant slope m = b/a.
    #[inline]
    pub(crate) fn segment_cost(&self, i0: usize, j0: usize, a: usize, b: usize, seed: usize) -> T {
        let m = T::from_usize(b) / T::from_usize(a);
        let sqrt_m = m.sqrt();
        let two_sqrt_m = sqrt_m + sqrt_m;
        let df = 6 * b / a; // integer for every allowed step
        let fine_len = 6 * self.n;
        let base = 6 * (j0 + seed);
        let mut acc = T::zero();
        for l in 1..=a {
            let k = (i0 + l) % self.n;
            let r = (base + l * df) % fine_len;
            let q1k = self.q1r[k];
            let q2r = self.fine[r];
            acc += self.sq1[k] + m * self.sfine[r] - two_sqrt_m * q1k.dot(q2r);
        }
        acc
    }
}

/// Optimal monotone warp by dynamic programming on the (N+1)x(N+1) node grid.
/// Returns the warp (N+1 node values of gamma) and its total cost.
pub(crate) fn dp_optimal_warp<T: Scalar>(tables: &DpTables<T>, seed: usize) -> (Vec<T>, T) {
    let n = tables.n;
    let nodes = n + 1;
    let inf = T::infinity();
    let mut cost = vec![inf; nodes * nodes];
    let mut back = vec![u8::MAX; nodes * nodes];
    cost[0] = T::zero();

    for i in 1..nodes {
        for j in 1..nodes {
            let mut best = inf;
            let mut best_step = u8::MAX;
            for (si, &(a, b)) in DP_STEPS.iter().enumerate() {
                if i < a || j < b {
                    continue;
                }
                let prev = cost[(i - a) * nodes + (j - b)];
                if !prev.is_finite() {
                    continue;
                }
                let c = prev + tables.segment_cost(i - a, j - b, a, b, seed);
                if c < best {
                    best = c;
                    best_step = si as u8;
                }
            }
            cost[i * nodes + j] = best;
            back[i * nodes + j] = best_step;
        }
    }

    let total = cost[nodes * nodes - 1];
    debug_assert!(total.is_finite(), "DP target unreachable");

    // Backtrack and fill gamma at every column of the grid.
    let mut gamma = vec![T::zero(); nodes];
    let (mut i, mut j) = (n, n);
    gamma[n] = T::one();
    let nf = T::from_usize(n);
    while i > 0 {
        let step = back[i * nodes + j] as usize;
        let (a, b) = DP_STEPS[step];
        let (i0, j0) = (i - a, j - b);
        for l in 0..a {
            // gamma at column i0 + l along a segment of slope b/a
            gamma[i0 + l] =
                (T::from_usize(j0) + T::from_usize(l * b) / T::from_usize(a)) / nf;
        }
        i = i0;
        j = j0;
    }
    (gamma, total)
}

/// Applies (seed, gamma) to an SRVF: q'(t) = q(gamma(t) + seed/N) sqrt(gamma'(t)).
fn warp_srvf<T: Scalar>(q: &[Vec2<T>], gamma: &[T], seed: usize) -> Vec<Vec2<T>> {
    let n = q.len();
    debug_assert_eq!(gamma.len(), n + 1);
    let nf = T::from_usize(n);
    let shift = T::from_usize(seed) / nf;
    (0..n)
        .map(|k| {
            let gdot = (gamma[k + 1] - gamma[k]) * nf;
            let t = gamma[k] + shift;
            eval_cyclic(q, t).scale(gdot.sqrt())
        })
        .collect()
}

/// Piecewise-linear evaluation of a cyclic field at parameter t (period 1).
fn eval_cyclic<T: Scalar>(q: &[Vec2<T>], t: T) -> Vec2<T> {
    let n = q.len();
    let nf = T::from_usize(n);
    let u = (t - t.floor()) * nf;
    let i0 = u.floor().to_f64_lossy() as usize % n;
    let frac = u - u.floor();
    let a = q[i0];
    let b = q[(i0 + 1) % n];
    a + (b - a).scale(frac)
}

/// Piecewise-linear evaluation of a warp given by node values on [0,1].
fn eval_warp<T: Scalar>(gamma: &[T], t: T) -> T {
    let n = gamma.len() - 1;
    let u = t.max(T::zero()).min(T::one()) * T::from_usize(n);
    let i0 = (u.floor().to_f64_lossy() as usize).min(n - 1);
    let frac = u - T::from_usize(i0);
    gamma[i0] + (gamma[i0 + 1] - gamma[i0]) * frac
}

fn residual_sq<T: Scalar>(q1: &[Vec2<T>], q2: &[Vec2<T>]) -> T {
    let n = T::from_usize(q1.len());
    q1.iter()
        .zip(q2)
        .map(|(&a, &b)| (a - b).norm_sq())
        .sum::<T>()
        / n
}

/// Full alignment of `q2` onto `q1`: a search over cyclic seeds with a
/// rotation + DP warp per candidate, followed by further alternating
/// rotation/warp rounds on the winner and a closing rotation. The output
/// pre-shape is re-normalized to unit norm.
pub fn align_reparam<T: Scalar>(
    q1: &PreShape<T>,
    q2: &PreShape<T>,
    cfg: &AlignConfig,
) -> Result<(Alignment<T>, PreShape<T>)> {
    let n = q1.grid_size();
    if n != q2.grid_size() {
        return Err(Error::GridMismatch {
            expected: n,
            got: q2.grid_size(),
        });
    }
    let q1v = q1.values();
    let q2v = q2.values();

    let seeds: Vec<usize> = match cfg.seed_search {
        SeedSearch::Stride(stride) => (0..n).step_by(stride.max(1)).collect(),
        SeedSearch::Prefilter(keep) => {
            let res = rotation_residuals(q1v, q2v);
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| res[a].partial_cmp(&res[b]).unwrap().then(a.cmp(&b)));
            order.truncate(keep.max(1));
            order
        }
    };

    let mut tables = DpTables::new(q1v, q2v);
    let mut best: Option<(T, usize, Rot2<T>, Vec<T>, Vec<Vec2<T>>)> = None;

    for &seed in &seeds {
        let rot = optimal_rotation(q1v, q2v, seed);
        tables.set_rotation(q1v, rot);
        let (gamma, _) = dp_optimal_warp(&tables, seed);

        let shifted: Vec<Vec2<T>> = (0..n).map(|k| rot.apply(q2v[(k + seed) % n])).collect();
        let warped = warp_srvf(&shifted, &gamma, 0);
        let polish = optimal_rotation(q1v, &warped, 0);
        let aligned: Vec<Vec2<T>> = warped.iter().map(|&v| polish.apply(v)).collect();
        let res = residual_sq(q1v, &aligned);
        let rot_total = polish.compose(rot);
        if best
            .as_ref()
            .map(|(r, ..)| res < *r)
            .unwrap_or(true)
        {
            best = Some((res, seed, rot_total, gamma, aligned));
        }
    }

    let (mut res, seed, mut rot_total, mut gamma_total, mut aligned) =
        best.expect("seed list nonempty");

    // Remaining refinement rounds on the winning seed.
    for _ in 1..cfg.rounds.max(1) {
        let mut tables2 = DpTables::new(q1v, &aligned);
        tables2.set_rotation(q1v, Rot2::identity());
        let (gamma2, _) = dp_optimal_warp(&tables2, 0);
        let warped = warp_srvf(&aligned, &gamma2, 0);
        let polish = optimal_rotation(q1v, &warped, 0);
        let candidate: Vec<Vec2<T>> = warped.iter().map(|&v| polish.apply(v)).collect();
        let new_res = residual_sq(q1v, &candidate);
        if new_res >= res {
            break;
        }
        res = new_res;
        aligned = candidate;
        rot_total = polish.compose(rot_total);
        // gamma_total(t) = gamma_prev(gamma2(t))
        gamma_total = gamma2
            .iter()
            .map(|&t| eval_warp(&gamma_total, t))
            .collect();
    }

    let alignment = Alignment {
        rotation: rot_total,
        seed,
        warp: gamma_total,
    };
    Ok((alignment, PreShape::from_values_normalized(aligned)?))
}

/// Geodesic distance on the pre-shape sphere after full alignment.
pub fn shape_distance<T: Scalar>(q1: &PreShape<T>, q2: &PreShape<T>, cfg: &AlignConfig) -> Result<T> {
    let (_, aligned) = align_reparam(q1, q2, cfg)?;
    Ok(preshape_distance(q1, &aligned))
}

/// Geodesic distance without alignment: acos of the clamped inner product.
pub fn preshape_distance<T: Scalar>(q1: &PreShape<T>, q2: &PreShape<T>) -> T {
    q1.inner(q2).max(-T::one()).min(T::one()).acos()
}

/// Exponential map on the pre-shape sphere.
pub fn exp_map<T: Scalar>(q: &PreShape<T>, v: &TangentVector<T>) -> Result<PreShape<T>> {
    debug_assert_eq!(q.grid_size(), v.grid_size());
    let norm = v.norm();
    if norm < sc::<T>(1e-10) {
        return Ok(q.clone());
    }
    let c = norm.cos();
    let s = norm.sin() / norm;
    let values = q
        .values()
        .iter()
        .zip(v.field())
        .map(|(&qk, &vk)| qk.scale(c) + vk.scale(s))
        .collect();
    PreShape::from_values_normalized(values)
}

/// Inverse exponential map between pre-aligned pre-shapes (no alignment is
/// performed). Errors on antipodal inputs.
pub fn log_map_aligned<T: Scalar>(q1: &PreShape<T>, q2: &PreShape<T>) -> Result<TangentVector<T>> {
    if q1.grid_size() != q2.grid_size() {
        return Err(Error::GridMismatch {
            expected: q1.grid_size(),
            got: q2.grid_size(),
        });
    }
    let ip = q1.inner(q2).max(-T::one()).min(T::one());
    let theta = ip.acos();
    if theta > T::PI() - sc::<T>(ANTIPODAL_MARGIN) {
        return Err(Error::AntipodalShapes { frame: None });
    }
    if theta < sc::<T>(1e-12) {
        return Ok(TangentVector::zero(q1.clone()));
    }
    let scale = theta / theta.sin();
    let field = q2
        .values()
        .iter()
        .zip(q1.values())
        .map(|(&b, &a)| (b - a.scale(ip)).scale(scale))
        .collect();
    Ok(TangentVector::new(q1.clone(), field))
}

/// Shooting vector from `q1` to `q2` after aligning `q2` onto `q1`.
pub fn log_map<T: Scalar>(
    q1: &PreShape<T>,
    q2: &PreShape<T>,
    cfg: &AlignConfig,
) -> Result<TangentVector<T>> {
    let (_, aligned) = align_reparam(q1, q2, cfg)?;
    log_map_aligned(q1, &aligned)
}

/// Parallel transport along the minimal geodesic from `from` to `to`.
///
/// The caller is responsible for `to` being aligned to `from`; the TSRVF
/// pipeline guarantees this for consecutive frames.
pub fn parallel_transport<T: Scalar>(
    v: &TangentVector<T>,
    from: &PreShape<T>,
    to: &PreShape<T>,
) -> Result<TangentVector<T>> {
    let n = from.grid_size();
    if to.grid_size() != n || v.grid_size() != n {
        return Err(Error::GridMismatch {
            expected: n,
            got: to.grid_size().min(v.grid_size()),
        });
    }
    let ip = from.inner(to).max(-T::one()).min(T::one());
    if ip.acos() > T::PI() - sc::<T>(ANTIPODAL_MARGIN) {
        return Err(Error::AntipodalShapes { frame: None });
    }
    // <v, from + to> / (1 + <from, to>)
    let nf = T::from_usize(n);
    let mut vdot = T::zero();
    for ((&vk, &ak), &bk) in v.field().iter().zip(from.values()).zip(to.values()) {
        vdot += vk.dot(ak + bk);
    }
    vdot /= nf;
    let factor = vdot / (T::one() + ip);
    let field = v
        .field()
        .iter()
        .zip(from.values())
        .zip(to.values())
        .map(|((&vk, &ak), &bk)| vk - (ak + bk).scale(factor))
        .collect();
    Ok(TangentVector::new(to.clone(), field))
}

/// Uniformly spaced points along the aligned geodesic from `q1` to `q2`.
pub fn geodesic_path<T: Scalar>(
    q1: &PreShape<T>,
    q2: &PreShape<T>,
    k: usize,
    cfg: &AlignConfig,
) -> Result<Vec<PreShape<T>>> {
    if k < 2 {
        return Err(Error::InvalidInput("geodesic needs k >= 2 points".into()));
    }
    let v = log_map(q1, q2, cfg)?;
    let mut path = Vec::with_capacity(k);
    for i in 0..k {
        let t = T::from_usize(i) / T::from_usize(k - 1);
        path.push(exp_map(q1, &v.scale(t))?);
    }
    Ok(path)
}
