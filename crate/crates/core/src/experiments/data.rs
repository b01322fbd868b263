use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::operators::{
    gaussian_deriv2_kernel, ConvolutionOperator, DenseOperator, ForwardOperator, LinearOperator,
};
use crate::param_select::{draw_samples, Sampler, TrainingSet};
use crate::rng::{MasterSeed, Role, SampleRng};

/// Uniform sample from the closed Euclidean unit ball in `R^d`.
pub fn sample_unit_ball(d: usize, rng: &mut SampleRng) -> DVector<f64> {
    let mut z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let norm = z.norm();
    let radius = rng.random::<f64>().powf(1.0 / d as f64);
    if norm > 0.0 {
        z *= radius / norm;
    }
    z
}

fn gaussian_noise(dim: usize, tau: f64, rng: &mut SampleRng) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| tau * rng.sample::<f64, _>(StandardNormal))
}

/// Where the clean images of the TV denoising model come from.
#[derive(Debug, Clone, PartialEq)]
pub enum ImageSource {
    /// Random piecewise-constant `side x side` images with values in `[0, 1]`.
    Synthetic { side: usize },
    /// Images read from an IDX file.
    Idx(std::path::PathBuf),
}

/// Generative model for `(y, x)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub enum DataModel {
    /// `x = (A^T A)^s z`, `z` uniform in the unit ball, `y = A x + eps`, `A` a normalized
    /// `d x d` Gaussian matrix drawn from `operator_seed`.
    SpectralSource {
        d: usize,
        s: f64,
        tau: f64,
        operator_seed: u64,
    },
    /// `y = x + eps` with `x` sparse and `||x||_2 = 1`.
    SparseDenoise { d: usize, sparsity: usize, tau: f64 },
    /// `y = h * x + eps` with `h` a centered, normalized Gaussian second-derivative kernel.
    SparseDeblur { d: usize, sparsity: usize, tau: f64 },
    /// `y = x + eps` on images with pixels in `[0, 1]`.
    TvImages { source: ImageSource, tau: f64 },
}

impl DataModel {
    pub fn name(&self) -> &'static str {
        match self {
            DataModel::SpectralSource { .. } => "spectral",
            DataModel::SparseDenoise { .. } => "denoise",
            DataModel::SparseDeblur { .. } => "deblur",
            DataModel::TvImages { .. } => "tv",
        }
    }

    pub fn tau(&self) -> f64 {
        match *self {
            DataModel::SpectralSource { tau, .. }
            | DataModel::SparseDenoise { tau, .. }
            | DataModel::SparseDeblur { tau, .. }
            | DataModel::TvImages { tau, .. } => tau,
        }
    }

    /// Same model with another noise level.
    pub fn with_tau(&self, tau: f64) -> Self {
        let mut m = self.clone();
        match &mut m {
            DataModel::SpectralSource { tau: t, .. }
            | DataModel::SparseDenoise { tau: t, .. }
            | DataModel::SparseDeblur { tau: t, .. }
            | DataModel::TvImages { tau: t, .. } => *t = tau,
        }
        m
    }

    fn validate(&self) -> Result<()> {
        if !(self.tau() >= 0.0) || !self.tau().is_finite() {
            return Err(invalid(format!("noise level must be >= 0, got {}", self.tau())));
        }
        match self {
            DataModel::SpectralSource { d, s, .. } => {
                if *d == 0 {
                    return Err(invalid("dimension must be >= 1"));
                }
                if !(*s >= 0.0) {
                    return Err(invalid(format!("source exponent must be >= 0, got {s}")));
                }
            }
            DataModel::SparseDenoise { d, sparsity, .. } | DataModel::SparseDeblur { d, sparsity, .. } => {
                if *sparsity == 0 || sparsity > d {
                    return Err(invalid(format!("sparsity must lie in 1..={d}, got {sparsity}")));
                }
            }
            DataModel::TvImages { source, .. } => {
                if let ImageSource::Synthetic { side } = source {
                    if *side < 2 {
                        return Err(invalid("synthetic images need side >= 2"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Builds the forward operator and the pair sampler.
    pub fn instantiate(&self) -> Result<Instance> {
        self.validate()?;
        let tau = self.tau();
        Ok(match self {
            DataModel::SpectralSource { d, s, operator_seed, .. } => {
                let op = gaussian_operator(*d, MasterSeed(*operator_seed))?;
                Instance {
                    operator: ForwardOperator::Dense(op.clone()),
                    sampler: ModelSampler::Spectral(SpectralSampler::new(op, *s, tau)?),
                }
            }
            DataModel::SparseDenoise { d, sparsity, .. } => {
                let op = ForwardOperator::identity(*d);
                Instance {
                    operator: op.clone(),
                    sampler: ModelSampler::Sparse(SparseSampler::new(op, *sparsity, tau)?),
                }
            }
            DataModel::SparseDeblur { d, sparsity, .. } => {
                let op = ForwardOperator::Convolution(deblur_operator(*d)?);
                Instance {
                    operator: op.clone(),
                    sampler: ModelSampler::Sparse(SparseSampler::new(op, *sparsity, tau)?),
                }
            }
            DataModel::TvImages { source, .. } => {
                let pool = match source {
                    ImageSource::Synthetic { side } => ImagePool::Synthetic { side: *side },
                    ImageSource::Idx(path) => {
                        let set = load_idx_images(path)?;
                        ImagePool::Fixed {
                            rows: set.rows,
                            cols: set.cols,
                            images: Arc::new(set.images),
                        }
                    }
                };
                let (rows, cols) = pool.shape();
                Instance {
                    operator: ForwardOperator::identity(rows * cols),
                    sampler: ModelSampler::Images(ImageSampler { pool, tau }),
                }
            }
        })
    }
}

/// A data model made concrete: its forward operator and its sampler.
#[derive(Debug, Clone)]
pub struct Instance {
    pub operator: ForwardOperator,
    pub sampler: ModelSampler,
}

/// `d x d` standard Gaussian matrix scaled to unit operator norm.
pub fn gaussian_operator(d: usize, seed: MasterSeed) -> Result<DenseOperator> {
    let mut rng = seed.stream(Role::Operator, 0);
    let m = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    DenseOperator::new(m).normalize()
}

/// Circular convolution with the centered Gaussian second-derivative kernel, unit norm.
pub fn deblur_operator(d: usize) -> Result<ConvolutionOperator> {
    ConvolutionOperator::with_origin(gaussian_deriv2_kernel(d)?, d / 2)?.normalize()
}

#[derive(Debug, Clone)]
pub struct SpectralSampler {
    op: DenseOperator,
    s: f64,
    tau: f64,
}

impl SpectralSampler {
    /// `op` should have norm at most one so that `||x|| <= 1`.
    pub fn new(op: DenseOperator, s: f64, tau: f64) -> Result<Self> {
        if !(s >= 0.0) || !(tau >= 0.0) {
            return Err(invalid("source exponent and noise level must be >= 0"));
        }
        if op.input_dim() != op.output_dim() {
            return Err(invalid("source-condition model needs a square operator"));
        }
        Ok(Self { op, s, tau })
    }

    pub fn operator(&self) -> &DenseOperator {
        &self.op
    }
}

impl Sampler for SpectralSampler {
    fn draw(&self, rng: &mut SampleRng) -> Result<(DVector<f64>, DVector<f64>)> {
        let d = self.op.input_dim();
        let z = sample_unit_ball(d, rng);
        let x = if self.s == 0.0 {
            z
        } else {
            self.op.decomposition().fractional_power_apply(self.s, &z)?
        };
        let y = self.op.apply_unchecked(&x) + gaussian_noise(self.op.output_dim(), self.tau, rng);
        Ok((y, x))
    }
}

/// Sparse unit-norm truths observed through a linear operator.
#[derive(Debug, Clone)]
pub struct SparseSampler {
    op: ForwardOperator,
    sparsity: usize,
    tau: f64,
}

impl SparseSampler {
    pub fn new(op: ForwardOperator, sparsity: usize, tau: f64) -> Result<Self> {
        if sparsity == 0 || sparsity > op.input_dim() {
            return Err(invalid(format!(
                "sparsity must lie in 1..={}, got {sparsity}",
                op.input_dim()
            )));
        }
        if !(tau >= 0.0) {
            return Err(invalid("noise level must be >= 0"));
        }
        Ok(Self { op, sparsity, tau })
    }
}

/// `k` nonzeros at uniform positions, random signs times magnitudes in `(0, 1]`, scaled to unit norm.
pub fn sparse_signal(d: usize, k: usize, rng: &mut SampleRng) -> DVector<f64> {
    let mut x = DVector::zeros(d);
    for i in index::sample(rng, d, k) {
        let magnitude = 1.0 - rng.random::<f64>();
        x[i] = if rng.random_bool(0.5) { magnitude } else { -magnitude };
    }
    let norm = x.norm();
    x / norm
}

impl Sampler for SparseSampler {
    fn draw(&self, rng: &mut SampleRng) -> Result<(DVector<f64>, DVector<f64>)> {
        let x = sparse_signal(self.op.input_dim(), self.sparsity, rng);
        let y = self.op.apply_unchecked(&x) + gaussian_noise(self.op.output_dim(), self.tau, rng);
        Ok((y, x))
    }
}

#[derive(Debug, Clone)]
enum ImagePool {
    Synthetic { side: usize },
    Fixed {
        rows: usize,
        cols: usize,
        images: Arc<Vec<DVector<f64>>>,
    },
}

impl ImagePool {
    fn shape(&self) -> (usize, usize) {
        match self {
            ImagePool::Synthetic { side } => (*side, *side),
            ImagePool::Fixed { rows, cols, .. } => (*rows, *cols),
        }
    }
}

/// Clean image plus white noise.
#[derive(Debug, Clone)]
pub struct ImageSampler {
    pool: ImagePool,
    tau: f64,
}

impl ImageSampler {
    pub fn shape(&self) -> (usize, usize) {
        self.pool.shape()
    }
}

/// Random piecewise-constant image: one to three bars or blocks on a zero background.
pub fn synthetic_image(side: usize, rng: &mut SampleRng) -> DVector<f64> {
    let mut img = DVector::zeros(side * side);
    let strokes = rng.random_range(1..=3);
    for _ in 0..strokes {
        let level = rng.random_range(0.5..=1.0);
        let h = rng.random_range(1..=side.div_ceil(2).max(1));
        let w = rng.random_range(1..=side.div_ceil(2).max(1));
        let (h, w) = if rng.random_bool(0.5) { (h, w.min(3)) } else { (h.min(3), w) };
        let r0 = rng.random_range(0..=side - h);
        let c0 = rng.random_range(0..=side - w);
        for r in r0..r0 + h {
            for c in c0..c0 + w {
                let p = &mut img[r * side + c];
                *p = f64::max(*p, level);
            }
        }
    }
    img
}

impl Sampler for ImageSampler {
    fn draw(&self, rng: &mut SampleRng) -> Result<(DVector<f64>, DVector<f64>)> {
        let x = match &self.pool {
            ImagePool::Synthetic { side } => synthetic_image(*side, rng),
            ImagePool::Fixed { images, .. } => images[rng.random_range(0..images.len())].clone(),
        };
        let y = &x + gaussian_noise(x.len(), self.tau, rng);
        Ok((y, x))
    }
}

#[derive(Debug, Clone)]
pub enum ModelSampler {
    Spectral(SpectralSampler),
    Sparse(SparseSampler),
    Images(ImageSampler),
}

impl Sampler for ModelSampler {
    fn draw(&self, rng: &mut SampleRng) -> Result<(DVector<f64>, DVector<f64>)> {
        match self {
            ModelSampler::Spectral(s) => s.draw(rng),
            ModelSampler::Sparse(s) => s.draw(rng),
            ModelSampler::Images(s) => s.draw(rng),
        }
    }
}

/// `n` pairs from the spectral source model together with its operator.
pub fn gen_spectral_dataset(
    model: &DataModel,
    n: usize,
    seed: MasterSeed,
) -> Result<(DenseOperator, TrainingSet)> {
    let DataModel::SpectralSource { .. } = model else {
        return Err(invalid("expected a spectral source model"));
    };
    let inst = model.instantiate()?;
    let ForwardOperator::Dense(op) = inst.operator else {
        unreachable!("spectral models use dense operators")
    };
    Ok((op, draw_samples(&inst.sampler, n, seed, Role::Train)?))
}

/// `n` pairs from a sparse model together with its operator.
pub fn gen_sparse_dataset(
    model: &DataModel,
    n: usize,
    seed: MasterSeed,
) -> Result<(ForwardOperator, TrainingSet)> {
    match model {
        DataModel::SparseDenoise { .. } | DataModel::SparseDeblur { .. } => {}
        _ => return Err(invalid("expected a sparse model")),
    }
    let inst = model.instantiate()?;
    Ok((inst.operator, draw_samples(&inst.sampler, n, seed, Role::Train)?))
}

/// Images parsed from an IDX file, row-major, pixel `p` mapped to `p / 255`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdxImages {
    pub rows: usize,
    pub cols: usize,
    pub images: Vec<DVector<f64>>,
}

const IDX_IMAGE_MAGIC: u32 = 0x0000_0803;

pub fn parse_idx_images(bytes: &[u8]) -> Result<IdxImages> {
    let word = |i: usize| -> Result<u32> {
        let chunk = bytes.get(4 * i..4 * i + 4).ok_or(Error::Truncated {
            expected: 16,
            found: bytes.len(),
        })?;
        Ok(u32::from_be_bytes(chunk.try_into().expect("four bytes")))
    };
    let magic = word(0)?;
    if magic != IDX_IMAGE_MAGIC {
        return Err(Error::BadMagic(magic));
    }
    let (count, rows, cols) = (word(1)? as usize, word(2)? as usize, word(3)? as usize);
    let pixels = rows.checked_mul(cols).ok_or(Error::DimensionOverflow)?;
    let total = count.checked_mul(pixels).ok_or(Error::DimensionOverflow)?;
    let expected = total.checked_add(16).ok_or(Error::DimensionOverflow)?;
    if bytes.len() < expected {
        return Err(Error::Truncated {
            expected,
            found: bytes.len(),
        });
    }
    let payload = &bytes[16..expected];
    let images = if pixels == 0 {
        vec![DVector::zeros(0); count]
    } else {
        payload
            .chunks_exact(pixels)
            .map(|c| DVector::from_iterator(pixels, c.iter().map(|&p| p as f64 / 255.0)))
            .collect()
    };
    Ok(IdxImages { rows, cols, images })
}

pub fn load_idx_images(path: &Path) -> Result<IdxImages> {
    let set = parse_idx_images(&std::fs::read(path)?)?;
    if set.images.is_empty() || set.rows == 0 || set.cols == 0 {
        return Err(invalid(format!("{} contains no images", path.display())));
    }
    Ok(set)
}
