//! Transported square-root velocity fields and their PCA flattening.
//!
//! A shape sequence alpha(0..T-1) is represented by its base shape plus the
//! field F(tau) = shooting vector of the step alpha(tau-1) -> alpha(tau),
//! parallel-transported back to alpha(0) by chaining the single-step
//! transports along the sequence. The fields all live in one tangent space,
//! so pooled PCA turns the sequence into a d-dimensional Euclidean series.

use crate::curve::{self, Contour, Vec2};
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, Mat};
use crate::scalar::{sc, Scalar};
use crate::shape::{
    align_reparam, exp_map, log_map_aligned, parallel_transport, AlignConfig, PreShape,
    TangentVector,
};

/// A sequence of pre-shapes, each frame's SRVF aligned to its predecessor at
/// construction. Raw contours are retained for kinematics features.
#[derive(Debug, Clone)]
pub struct ShapeSequence<T> {
    id: String,
    frames: Vec<PreShape<T>>,
    raw_contours: Vec<Contour<T>>,
}

impl<T: Scalar> ShapeSequence<T> {
    /// Normalizes raw contours (resample to `n_points`, center, unit
    /// perimeter), converts each to a pre-shape, and aligns every frame to
    /// its predecessor.
    pub fn from_contours(
        id: impl Into<String>,
        contours: Vec<Contour<T>>,
        n_points: usize,
        cfg: &AlignConfig,
    ) -> Result<Self> {
        if contours.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: contours.len(),
            });
        }
        let mut frames: Vec<PreShape<T>> = Vec::with_capacity(contours.len());
        for c in &contours {
            let r = curve::resample_uniform(c, n_points)?;
            let s = curve::center_and_scale(&r)?;
            let q = PreShape::new(curve::to_srvf(&s)?)?;
            let aligned = match frames.last() {
                Some(prev) => align_reparam(prev, &q, cfg)?.1,
                None => q,
            };
            frames.push(aligned);
        }
        Ok(ShapeSequence {
            id: id.into(),
            frames,
            raw_contours: contours,
        })
    }

    /// Wraps pre-aligned frames directly (used by reconstruction and tests).
    pub fn from_preshapes(id: impl Into<String>, frames: Vec<PreShape<T>>) -> Self {
        ShapeSequence {
            id: id.into(),
            frames,
            raw_contours: Vec::new(),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn frames(&self) -> &[PreShape<T>] {
        &self.frames
    }

    pub fn raw_contours(&self) -> &[Contour<T>] {
        &self.raw_contours
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Base shape plus the transported velocity field F(tau), tau = 1..T-1,
/// every field tangent at the base.
#[derive(Debug, Clone)]
pub struct TsrvfSequence<T> {
    base: PreShape<T>,
    fields: Vec<TangentVector<T>>,
    source_id: String,
}

impl<T: Scalar> TsrvfSequence<T> {
    pub fn new(base: PreShape<T>, fields: Vec<TangentVector<T>>, source_id: impl Into<String>) -> Self {
        TsrvfSequence {
            base,
            fields,
            source_id: source_id.into(),
        }
    }

    pub fn base(&self) -> &PreShape<T> {
        &self.base
    }

    pub fn fields(&self) -> &[TangentVector<T>] {
        &self.fields
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    /// Expresses the fields in the tangent space of `reference`: the base is
    /// aligned to the reference, the same group action is applied to every
    /// field, and the result is transported along the single connecting
    /// geodesic.
    pub fn rebase(&self, reference: &PreShape<T>, cfg: &AlignConfig) -> Result<TsrvfSequence<T>> {
        if self.base.inner(reference) > T::one() - sc::<T>(1e-12) {
            // Already at (numerically) the same base.
            return Ok(self.clone());
        }
        let (alignment, aligned_base) = align_reparam(reference, &self.base, cfg)?;
        let n = self.base.grid_size();
        let nf = T::from_usize(n);
        let shift = T::from_usize(alignment.seed) / nf;

        let warp_field = |field: &[Vec2<T>]| -> Vec<Vec2<T>> {
            (0..n)
                .map(|k| {
                    let gdot = (alignment.warp[k + 1] - alignment.warp[k]) * nf;
                    let t = alignment.warp[k] + shift;
                    let v = eval_cyclic_field(field, t);
                    alignment.rotation.apply(v.scale(gdot.sqrt()))
                })
                .collect()
        };

        let mut fields = Vec::with_capacity(self.fields.len());
        for f in &self.fields {
            let acted = TangentVector::new(aligned_base.clone(), warp_field(f.field()));
            let moved = parallel_transport(&acted, &aligned_base, reference)?;
            fields.push(moved);
        }
        Ok(TsrvfSequence {
            base: reference.clone(),
            fields,
            source_id: self.source_id.clone(),
        })
    }
}

fn eval_cyclic_field<T: Scalar>(q: &[Vec2<T>], t: T) -> Vec2<T> {
    let n = q.len();
    let nf = T::from_usize(n);
    let u = (t - t.floor()) * nf;
    let i0 = u.floor().to_f64_lossy() as usize % n;
    let frac = u - u.floor();
    let a = q[i0];
    let b = q[(i0 + 1) % n];
    a + (b - a).scale(frac)
}

/// Computes the transported velocity field of a sequence: the shooting vector
/// of each consecutive step, chained back to the base frame by single-step
/// transports. Frames must be pre-aligned (as `ShapeSequence` construction
/// guarantees).
pub fn compute_tsrvf<T: Scalar>(seq: &ShapeSequence<T>) -> Result<TsrvfSequence<T>> {
    let frames = seq.frames();
    if frames.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: frames.len(),
        });
    }
    let mut fields = Vec::with_capacity(frames.len() - 1);
    for tau in 1..frames.len() {
        let mut v = log_map_aligned(&frames[tau - 1], &frames[tau]).map_err(|e| match e {
            Error::AntipodalShapes { .. } => Error::AntipodalShapes { frame: Some(tau) },
            other => other,
        })?;
        for s in (1..tau).rev() {
            v = parallel_transport(&v, &frames[s], &frames[s - 1]).map_err(|e| match e {
                Error::AntipodalShapes { .. } => Error::AntipodalShapes { frame: Some(s) },
                other => other,
            })?;
        }
        fields.push(v);
    }
    Ok(TsrvfSequence {
        base: frames[0].clone(),
        fields,
        source_id: seq.id().to_string(),
    })
}

/// Integrated field: cumulative sums of F over time.
pub fn integrate_tsrvf<T: Scalar>(f: &TsrvfSequence<T>) -> TsrvfSequence<T> {
    let mut fields: Vec<TangentVector<T>> = Vec::with_capacity(f.fields.len());
    for field in &f.fields {
        let next = match fields.last() {
            Some(prev) => prev.add(field),
            None => field.clone(),
        };
        fields.push(next);
    }
    TsrvfSequence {
        base: f.base.clone(),
        fields,
        source_id: f.source_id.clone(),
    }
}

/// Rebuilds the shape sequence from (base, F) by transporting each field
/// forward along the reconstructed path and applying the exponential map.
pub fn reconstruct_sequence<T: Scalar>(
    base: &PreShape<T>,
    f: &TsrvfSequence<T>,
) -> Result<ShapeSequence<T>> {
    let mut frames = vec![base.clone()];
    for (tau, field) in f.fields.iter().enumerate() {
        let mut v = field.clone();
        for s in 0..frames.len() - 1 {
            v = parallel_transport(&v, &frames[s], &frames[s + 1]).map_err(|e| match e {
                Error::AntipodalShapes { .. } => Error::AntipodalShapes { frame: Some(tau) },
                other => other,
            })?;
        }
        let prev = frames.last().unwrap();
        frames.push(exp_map(prev, &v)?);
    }
    Ok(ShapeSequence::from_preshapes(
        format!("{}-reconstructed", f.source_id),
        frames,
    ))
}

/// PCA basis over pooled transported fields: a mean field, d orthonormal
/// component fields, and the component variances.
#[derive(Debug, Clone)]
pub struct PcaBasis<T> {
    base: PreShape<T>,
    mean: TangentVector<T>,
    components: Vec<TangentVector<T>>,
    eigenvalues: Vec<T>,
}

impl<T: Scalar> PcaBasis<T> {
    pub fn new(
        base: PreShape<T>,
        mean: TangentVector<T>,
        components: Vec<TangentVector<T>>,
        eigenvalues: Vec<T>,
    ) -> Self {
        PcaBasis {
            base,
            mean,
            components,
            eigenvalues,
        }
    }

    pub fn base(&self) -> &PreShape<T> {
        &self.base
    }

    pub fn mean(&self) -> &TangentVector<T> {
        &self.mean
    }

    pub fn components(&self) -> &[TangentVector<T>] {
        &self.components
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }
}

/// Euclidean time series of PCA coefficients; one row per field.
#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanSeries<T> {
    values: Mat<T>,
    source_id: String,
}

impl<T: Scalar> EuclideanSeries<T> {
    pub fn new(values: Mat<T>, source_id: impl Into<String>) -> Self {
        EuclideanSeries {
            values,
            source_id: source_id.into(),
        }
    }

    pub fn from_rows(rows: &[Vec<T>], source_id: impl Into<String>) -> Self {
        EuclideanSeries {
            values: Mat::from_rows(rows),
            source_id: source_id.into(),
        }
    }

    pub fn values(&self) -> &Mat<T> {
        &self.values
    }

    pub fn rows(&self) -> usize {
        self.values.rows()
    }

    pub fn dim(&self) -> usize {
        self.values.cols()
    }

    pub fn row(&self, i: usize) -> &[T] {
        self.values.row(i)
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }
}

/// Mean-centered PCA of all fields pooled across sequences and times.
///
/// All sequences must already share a common base (see
/// [`TsrvfSequence::rebase`]). The decomposition runs on the Gram matrix when
/// the pooled sample count is below the ambient dimension 2N.
pub fn fit_pca<T: Scalar>(tsrvfs: &[TsrvfSequence<T>], d: usize) -> Result<PcaBasis<T>> {
    fit_pca_impl(tsrvfs, Some(d))
}

/// PCA retaining every component above the numerical-rank threshold.
pub fn fit_pca_full<T: Scalar>(tsrvfs: &[TsrvfSequence<T>]) -> Result<PcaBasis<T>> {
    fit_pca_impl(tsrvfs, None)
}

fn fit_pca_impl<T: Scalar>(tsrvfs: &[TsrvfSequence<T>], d: Option<usize>) -> Result<PcaBasis<T>> {
    if tsrvfs.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let base = tsrvfs[0].base().clone();
    let n = base.grid_size();
    for s in tsrvfs {
        if s.base().grid_size() != n {
            return Err(Error::GridMismatch {
                expected: n,
                got: s.base().grid_size(),
            });
        }
        if s.base().inner(&base) < T::one() - sc::<T>(1e-9) {
            return Err(Error::InvalidInput(
                "TSRVF sequences must share a common base before pooled PCA".to_string(),
            ));
        }
    }

    let pooled: Vec<&TangentVector<T>> =
        tsrvfs.iter().flat_map(|s| s.fields().iter()).collect();
    let m = pooled.len();
    if let Some(d) = d {
        if m < d {
            return Err(Error::InsufficientData { needed: d, got: m });
        }
    }
    let ambient = 2 * n;
    let inv_m = T::one() / T::from_usize(m);

    // Mean field.
    let mut mean_field = vec![Vec2::<T>::zero(); n];
    for f in &pooled {
        for (acc, &v) in mean_field.iter_mut().zip(f.field()) {
            *acc = *acc + v;
        }
    }
    for v in mean_field.iter_mut() {
        *v = v.scale(inv_m);
    }

    // Centered samples in coordinates where the weighted inner product is
    // the Euclidean one: y = (f - mean) / sqrt(N).
    let inv_sqrt_n = T::one() / T::from_usize(n).sqrt();
    let mut y = Mat::<T>::zeros(m, ambient);
    for (i, f) in pooled.iter().enumerate() {
        let row = y.row_mut(i);
        for (k, (&v, &mu)) in f.field().iter().zip(&mean_field).enumerate() {
            row[2 * k] = (v.x - mu.x) * inv_sqrt_n;
            row[2 * k + 1] = (v.y - mu.y) * inv_sqrt_n;
        }
    }

    // Eigendecomposition of the covariance, via the Gram matrix when samples
    // are scarcer than ambient dimensions.
    let (eigvals, eigvecs_ambient): (Vec<T>, Vec<Vec<T>>) = if m >= ambient {
        let mut c = Mat::<T>::zeros(ambient, ambient);
        for i in 0..m {
            let row = y.row(i);
            for a in 0..ambient {
                let ya = row[a];
                if ya == T::zero() {
                    continue;
                }
                let crow = c.row_mut(a);
                for b in 0..ambient {
                    crow[b] += ya * row[b];
                }
            }
        }
        let c = c.scale(inv_m);
        let (vals, vecs) = symmetric_eigen(&c);
        let cols = (0..ambient)
            .map(|j| (0..ambient).map(|i| vecs[(i, j)]).collect())
            .collect();
        (vals, cols)
    } else {
        let mut g = Mat::<T>::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let dot = y
                    .row(i)
                    .iter()
                    .zip(y.row(j))
                    .map(|(&a, &b)| a * b)
                    .sum::<T>();
                g[(i, j)] = dot;
                g[(j, i)] = dot;
            }
        }
        let (mu_vals, w) = symmetric_eigen(&g);
        // Covariance eigenvalue lambda = mu / m; ambient vector = Y^T w / sqrt(mu).
        let mut vals = Vec::with_capacity(m);
        let mut cols = Vec::with_capacity(m);
        for j in 0..m {
            let mu = mu_vals[j].max(T::zero());
            vals.push(mu * inv_m);
            let mut col = vec![T::zero(); ambient];
            if mu > T::zero() {
                let inv_sqrt_mu = T::one() / mu.sqrt();
                for i in 0..m {
                    let wij = w[(i, j)];
                    if wij == T::zero() {
                        continue;
                    }
                    for (a, &yia) in y.row(i).iter().enumerate() {
                        col[a] += wij * yia;
                    }
                }
                for c in col.iter_mut() {
                    *c *= inv_sqrt_mu;
                }
            }
            cols.push(col);
        }
        (vals, cols)
    };

    let lambda_max = eigvals.first().copied().unwrap_or(T::zero());
    let rank_tol = lambda_max * sc::<T>(1e-12);
    let rank = eigvals
        .iter()
        .filter(|&&l| l > rank_tol && l > T::zero())
        .count();
    let d = match d {
        Some(d) if d > rank => return Err(Error::RankExceeded { requested: d, rank }),
        Some(d) => d,
        None => rank,
    };

    let sqrt_n = T::from_usize(n).sqrt();
    let mean = TangentVector::new(base.clone(), mean_field);
    let mut components = Vec::with_capacity(d);
    for j in 0..d {
        let col = &eigvecs_ambient[j];
        let field: Vec<Vec2<T>> = (0..n)
            .map(|k| Vec2::new(col[2 * k] * sqrt_n, col[2 * k + 1] * sqrt_n))
            .collect();
        components.push(TangentVector::new(base.clone(), field));
    }
    let eigenvalues = eigvals[..d].to_vec();
    Ok(PcaBasis {
        base,
        mean,
        components,
        eigenvalues,
    })
}

/// Projects a field sequence onto the PCA components: row tau holds the
/// coefficients of the centered field F(tau).
pub fn project<T: Scalar>(f: &TsrvfSequence<T>, basis: &PcaBasis<T>) -> Result<EuclideanSeries<T>> {
    let n = basis.base.grid_size();
    if f.base().grid_size() != n {
        return Err(Error::GridMismatch {
            expected: n,
            got: f.base().grid_size(),
        });
    }
    let d = basis.dim();
    let mut values = Mat::zeros(f.len(), d);
    for (tau, field) in f.fields().iter().enumerate() {
        let centered = field.sub(&basis.mean);
        for (i, comp) in basis.components.iter().enumerate() {
            values[(tau, i)] = centered.inner(comp);
        }
    }
    Ok(EuclideanSeries {
        values,
        source_id: f.source_id.clone(),
    })
}

/// Inverse of [`project`]: coefficients back to tangent fields (coefficients
/// beyond the retained d are zero by construction).
pub fn lift<T: Scalar>(x: &EuclideanSeries<T>, basis: &PcaBasis<T>) -> TsrvfSequence<T> {
    assert_eq!(x.dim(), basis.dim(), "lift: coefficient dimension mismatch");
    let fields = (0..x.rows())
        .map(|tau| {
            let coeffs = x.row(tau);
            let mut field: Vec<Vec2<T>> = basis.mean.field().to_vec();
            for (c, comp) in coeffs.iter().zip(&basis.components) {
                for (acc, &v) in field.iter_mut().zip(comp.field()) {
                    *acc = *acc + v.scale(*c);
                }
            }
            TangentVector::new(basis.base.clone(), field)
        })
        .collect();
    TsrvfSequence {
        base: basis.base.clone(),
        fields,
        source_id: x.source_id.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::shapes;
    use crate::shape::preshape_distance;
    use approx::assert_abs_diff_eq;

    fn preshape(c: &Contour<f64>, n: usize) -> PreShape<f64> {
        let r = curve::resample_uniform(c, n).unwrap();
        let s = curve::center_and_scale(&r).unwrap();
        PreShape::new(curve::to_srvf(&s).unwrap()).unwrap()
    }

    /// Smoothly deforming blob family; frames stay well clear of antipodes.
    fn test_contours(frames: usize, amp: f64) -> Vec<Contour<f64>> {
        (0..frames)
            .map(|t| {
                let phase = t as f64 / frames as f64 * 2.0 * std::f64::consts::PI;
                let a = 1.4 + amp * phase.sin();
                let b = 1.0 - 0.5 * amp * (2.0 * phase).cos();
                shapes::ellipse(a, b, 360)
            })
            .collect()
    }

    fn test_sequence(frames: usize, n: usize) -> ShapeSequence<f64> {
        ShapeSequence::from_contours("test", test_contours(frames, 0.25), n, &AlignConfig::fast())
            .unwrap()
    }

    #[test]
    fn constant_sequence_has_zero_fields() {
        let q = preshape(&shapes::ellipse(2.0, 1.0, 360), 60);
        let seq = ShapeSequence::from_preshapes("const", vec![q.clone(); 6]);
        let f = compute_tsrvf(&seq).unwrap();
        assert_eq!(f.len(), 5);
        for field in f.fields() {
            assert!(field.norm() < 1e-9);
        }
        let h = integrate_tsrvf(&f);
        for field in h.fields() {
            assert!(field.norm() < 1e-9);
        }
    }

    #[test]
    fn two_frame_field_is_plain_log() {
        let seq = test_sequence(2, 60);
        let f = compute_tsrvf(&seq).unwrap();
        let direct = log_map_aligned(&seq.frames()[0], &seq.frames()[1]).unwrap();
        assert!(f.fields()[0].sub(&direct).norm() < 1e-12);
    }

    #[test]
    fn field_norms_match_step_distances() {
        let seq = test_sequence(12, 60);
        let f = compute_tsrvf(&seq).unwrap();
        for tau in 1..seq.len() {
            let d = preshape_distance(&seq.frames()[tau - 1], &seq.frames()[tau]);
            assert_abs_diff_eq!(f.fields()[tau - 1].norm(), d, epsilon = 1e-5);
        }
    }

    #[test]
    fn integrate_is_cumulative_sum() {
        let seq = test_sequence(8, 60);
        let f = compute_tsrvf(&seq).unwrap();
        let h = integrate_tsrvf(&f);
        assert!(h.fields()[0].sub(&f.fields()[0]).norm() < 1e-14);
        for tau in 1..f.len() {
            let diff = h.fields()[tau].sub(&h.fields()[tau - 1]);
            assert!(diff.sub(&f.fields()[tau]).norm() < 1e-12);
        }
    }

    #[test]
    fn reconstruct_zero_fields_is_constant() {
        let q = preshape(&shapes::ellipse(2.0, 1.0, 360), 60);
        let f = TsrvfSequence::new(
            q.clone(),
            vec![TangentVector::zero(q.clone()); 4],
            "zero",
        );
        let rec = reconstruct_sequence(&q, &f).unwrap();
        assert_eq!(rec.len(), 5);
        for frame in rec.frames() {
            assert!(preshape_distance(frame, &q) < 1e-6);
        }
    }

    #[test]
    fn reconstruct_two_frames_exact() {
        let seq = test_sequence(2, 60);
        let f = compute_tsrvf(&seq).unwrap();
        let rec = reconstruct_sequence(&seq.frames()[0], &f).unwrap();
        assert!(preshape_distance(&rec.frames()[1], &seq.frames()[1]) < 1e-8);
    }

    #[test]
    fn reconstruct_roundtrip_long_sequence() {
        let seq = test_sequence(50, 60);
        let f = compute_tsrvf(&seq).unwrap();
        let rec = reconstruct_sequence(&seq.frames()[0], &f).unwrap();
        let worst = seq
            .frames()
            .iter()
            .zip(rec.frames())
            .map(|(a, b)| preshape_distance(a, b))
            .fold(0.0, f64::max);
        assert!(worst < 1e-4, "worst frame-wise distance {worst}");
    }

    #[test]
    fn pca_exact_low_rank_data() {
        let base = preshape(&shapes::circle(Vec2::zero(), 1.0, 360), 40);
        let mut rng = crate::rng::stream_rng(5, 0);
        let dir1 = random_tangent(&base, &mut rng);
        let dir2 = random_tangent(&base, &mut rng);
        // Fields in the affine plane mean + span{dir1, dir2}.
        let fields: Vec<TangentVector<f64>> = (0..30)
            .map(|i| {
                let a = (i as f64 * 0.37).sin();
                let b = (i as f64 * 0.61).cos();
                dir1.scale(a).add(&dir2.scale(b))
            })
            .collect();
        let seq = TsrvfSequence::new(base.clone(), fields.clone(), "plane");
        let basis = fit_pca(&[seq.clone()], 2).unwrap();
        let x = project(&seq, &basis).unwrap();
        let back = lift(&x, &basis);
        for (f, g) in fields.iter().zip(back.fields()) {
            assert!(f.sub(g).norm() < 1e-8);
        }
        // d beyond the rank errors out.
        assert!(matches!(
            fit_pca(&[seq], 3),
            Err(Error::RankExceeded { .. })
        ));
    }

    fn random_tangent(base: &PreShape<f64>, rng: &mut impl rand::Rng) -> TangentVector<f64> {
        let field: Vec<Vec2<f64>> = (0..base.grid_size())
            .map(|_| {
                Vec2::new(
                    crate::rng::standard_normal::<f64, _>(rng),
                    crate::rng::standard_normal::<f64, _>(rng),
                )
            })
            .collect();
        TangentVector::new(base.clone(), field)
    }

    #[test]
    fn pca_isotropic_noise_explained_variance() {
        let base = preshape(&shapes::circle(Vec2::zero(), 1.0, 360), 4);
        let mut rng = crate::rng::stream_rng(17, 0);
        let fields: Vec<TangentVector<f64>> =
            (0..10_000).map(|_| random_tangent(&base, &mut rng)).collect();
        let seq = TsrvfSequence::new(base.clone(), fields, "noise");
        let d_full = 2 * 4 - 1; // tangency removes one ambient direction
        let basis = fit_pca(&[seq], d_full).unwrap();
        let total: f64 = basis.eigenvalues().iter().sum();
        let fraction = basis.eigenvalues()[0] / total;
        let expected = 1.0 / d_full as f64;
        assert!(
            (fraction - expected).abs() < 0.02,
            "top-component fraction {fraction}, expected about {expected}"
        );
    }

    #[test]
    fn pca_matches_dense_eigensolver_oracle() {
        let n = 16;
        let base = preshape(&shapes::circle(Vec2::zero(), 1.0, 360), n);
        let mut rng = crate::rng::stream_rng(23, 0);
        let fields: Vec<TangentVector<f64>> =
            (0..30).map(|_| random_tangent(&base, &mut rng)).collect();
        let seq = TsrvfSequence::new(base.clone(), fields.clone(), "oracle");
        let d = 8;
        let basis = fit_pca(&[seq], d).unwrap();

        // Dense oracle: covariance of scaled coordinates via nalgebra.
        let ambient = 2 * n;
        let m = fields.len();
        let mut mean = vec![0.0f64; ambient];
        let flat: Vec<Vec<f64>> = fields
            .iter()
            .map(|f| {
                f.field()
                    .iter()
                    .flat_map(|v| [v.x, v.y])
                    .collect::<Vec<f64>>()
            })
            .collect();
        for row in &flat {
            for (a, &v) in mean.iter_mut().zip(row) {
                *a += v / m as f64;
            }
        }
        let scale = 1.0 / (n as f64).sqrt();
        let y = nalgebra::DMatrix::from_fn(m, ambient, |i, j| (flat[i][j] - mean[j]) * scale);
        let cov = y.transpose() * &y / m as f64;
        let mut vals: Vec<f64> = cov.symmetric_eigen().eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for i in 0..d {
            assert_abs_diff_eq!(basis.eigenvalues()[i], vals[i], epsilon = 1e-8);
        }
    }

    #[test]
    fn project_centering_and_orthonormality() {
        let seq = test_sequence(10, 40);
        let f = compute_tsrvf(&seq).unwrap();
        let basis = fit_pca(&[f.clone()], 3).unwrap();

        // Components pairwise orthonormal in the weighted metric.
        for i in 0..3 {
            for j in 0..3 {
                let ip = basis.components()[i].inner(&basis.components()[j]);
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(ip, expected, epsilon = 1e-8);
            }
        }

        // The mean field projects to zero; mean + 2 comp_0 projects to (2,0,0).
        let mean_seq = TsrvfSequence::new(
            basis.base().clone(),
            vec![basis.mean().clone(), basis.mean().add(&basis.components()[0].scale(2.0))],
            "probe",
        );
        let x = project(&mean_seq, &basis).unwrap();
        assert!(x.row(0).iter().all(|v| v.abs() < 1e-10));
        assert_abs_diff_eq!(x.row(1)[0], 2.0, epsilon = 1e-10);
        assert!(x.row(1)[1].abs() < 1e-10);
        assert!(x.row(1)[2].abs() < 1e-10);
    }

    #[test]
    fn project_lift_is_identity_on_coefficients() {
        let seq = test_sequence(12, 40);
        let f = compute_tsrvf(&seq).unwrap();
        let basis = fit_pca(&[f.clone()], 4).unwrap();
        let x = project(&f, &basis).unwrap();
        let lifted = lift(&x, &basis);
        let x2 = project(&lifted, &basis).unwrap();
        for tau in 0..x.rows() {
            for i in 0..x.dim() {
                assert_abs_diff_eq!(x.row(tau)[i], x2.row(tau)[i], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn lift_residual_is_out_of_span_component() {
        let seq = test_sequence(10, 40);
        let f = compute_tsrvf(&seq).unwrap();
        let basis = fit_pca(&[f.clone()], 2).unwrap();
        let x = project(&f, &basis).unwrap();
        let lifted = lift(&x, &basis);
        for (orig, rec) in f.fields().iter().zip(lifted.fields()) {
            let centered = orig.sub(basis.mean());
            let mut in_span = 0.0;
            for comp in basis.components() {
                let c = centered.inner(comp);
                in_span += c * c;
            }
            let out_sq = (centered.norm().powi(2) - in_span).max(0.0);
            let residual = orig.sub(rec).norm();
            assert_abs_diff_eq!(residual, out_sq.sqrt(), epsilon = 1e-8);
        }
    }

    #[test]
    fn pipeline_roundtrip_full_rank() {
        let seq = test_sequence(20, 40);
        let f = compute_tsrvf(&seq).unwrap();
        let basis = fit_pca_full(&[f.clone()]).unwrap();
        let x = project(&f, &basis).unwrap();
        let lifted = lift(&x, &basis);
        let rec = reconstruct_sequence(&seq.frames()[0], &lifted).unwrap();
        let worst = seq
            .frames()
            .iter()
            .zip(rec.frames())
            .map(|(a, b)| preshape_distance(a, b))
            .fold(0.0, f64::max);
        assert!(worst < 5e-3, "roundtrip frame distance {worst}");
    }

    #[test]
    fn pca_energy_matches_total_variance() {
        let seq = test_sequence(16, 40);
        let f = compute_tsrvf(&seq).unwrap();
        let basis = fit_pca_full(&[f.clone()]).unwrap();
        let energy: f64 = basis.eigenvalues().iter().sum();

        let m = f.len() as f64;
        let mut mean = TangentVector::zero(f.base().clone());
        for field in f.fields() {
            mean = mean.add(field);
        }
        let mean = mean.scale(1.0 / m);
        let total: f64 = f
            .fields()
            .iter()
            .map(|field| field.sub(&mean).norm().powi(2))
            .sum::<f64>()
            / m;
        assert_abs_diff_eq!(energy, total, epsilon = 1e-8);
    }

    #[test]
    fn reconstruction_error_nonincreasing_in_d() {
        let seq = test_sequence(24, 40);
        let f = compute_tsrvf(&seq).unwrap();
        let mut prev = f64::INFINITY;
        for d in [1usize, 3, 6, 12] {
            let basis = fit_pca(&[f.clone()], d).unwrap();
            let x = project(&f, &basis).unwrap();
            let rec = reconstruct_sequence(&seq.frames()[0], &lift(&x, &basis)).unwrap();
            let err: f64 = seq
                .frames()
                .iter()
                .zip(rec.frames())
                .map(|(a, b)| preshape_distance(a, b))
                .sum::<f64>()
                / seq.len() as f64;
            assert!(
                err <= prev + 1e-9,
                "mean error increased from {prev} to {err} at d={d}"
            );
            prev = err;
        }
    }

    #[test]
    fn rebase_preserves_field_norms() {
        let seq = test_sequence(10, 60);
        let f = compute_tsrvf(&seq).unwrap();
        let reference = preshape(&shapes::blob(1.0, 3, 0.15, 360), 60);
        let moved = f.rebase(&reference, &AlignConfig::fast()).unwrap();
        assert!(moved.base().inner(&reference) > 1.0 - 1e-9);
        for (a, b) in f.fields().iter().zip(moved.fields()) {
            // The group action and transport are isometries up to the
            // discrete warp interpolation error.
            assert_abs_diff_eq!(a.norm(), b.norm(), epsilon = 0.05 * a.norm().max(1e-6));
        }
    }
}
