use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::config::{Init, SolverConfig};
use super::FactorSet;
use crate::error::{shape_err, Error, Result};
use crate::hosvd::{hosvd, leading_left_vectors};
use crate::linalg::{soft_shrink, spectral_norm, svd_shrink, toeplitz_diff, Cholesky};
use crate::tensor::{
    mode_product, multilinear, unfold, DenseMatrix, DenseTensor, Elementwise, ObservationMask,
};

/// Iterate of the ADMM together with the data and cached factorizations it needs.
///
/// The variable fields are public so callers can inspect or perturb a state;
/// the observation and the cached `W`-system factors are fixed at construction.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub x: FactorSet,
    pub y: FactorSet,
    pub t: FactorSet,
    pub s: DenseTensor,
    pub z: DenseTensor,
    pub w: [DenseTensor; 3],
    pub u: [DenseTensor; 3],
    pub iteration: usize,
    cfg: SolverConfig,
    observed: DenseTensor,
    mask: ObservationMask,
    w_systems: [Option<Cholesky>; 3],
}

/// Applies `mats[n]` along mode `n` for every `Some` entry.
pub(crate) fn partial_product(t: &DenseTensor, mats: [Option<&DenseMatrix>; 3]) -> Result<DenseTensor> {
    let mut out = t.clone();
    for (n, m) in mats.iter().enumerate() {
        if let Some(m) = m {
            out = mode_product(&out, m, n)?;
        }
    }
    Ok(out)
}

fn except(mats: &[DenseMatrix; 3], skip: usize) -> [Option<&DenseMatrix>; 3] {
    let mut out = [None; 3];
    for (n, m) in mats.iter().enumerate() {
        if n != skip {
            out[n] = Some(m);
        }
    }
    out
}

fn symmetrize(a: &DenseMatrix) -> DenseMatrix {
    let n = a.rows();
    DenseMatrix::from_fn(n, n, |i, j| 0.5 * (a.get(i, j) + a.get(j, i)))
}

/// `Xᵀ` applied along every mode of `Z`.
fn project_onto_factors(z: &DenseTensor, x: &FactorSet) -> Result<DenseTensor> {
    let xt = [x[0].transpose(), x[1].transpose(), x[2].transpose()];
    partial_product(z, [Some(&xt[0]), Some(&xt[1]), Some(&xt[2])])
}

/// Solves `c·v = r` along every mode-`mode` fiber of `r` in place.
fn solve_fibers(chol: &Cholesky, r: &mut DenseTensor, mode: usize) {
    let (left, k, right) = r.split_at_mode(mode);
    let mut buf = alloc::vec![0.0; k];
    let data = r.values_mut();
    for b in 0..right {
        for a in 0..left {
            let base = a + left * k * b;
            for (j, v) in buf.iter_mut().enumerate() {
                *v = data[base + left * j];
            }
            chol.solve_in_place(&mut buf);
            for (j, v) in buf.iter().enumerate() {
                data[base + left * j] = *v;
            }
        }
    }
}

impl SolverState {
    /// Builds the starting point from the zero-filled observation `P_Ω(m)`.
    ///
    /// `Z = P_Ω(m)`, `X` per `cfg.init`, `Y = X`, `S = Z ×ₙ Xₙᵀ`,
    /// `W_i = Z`, `U = 0`, `T = 0`.
    pub fn new(m: &DenseTensor, mask: &ObservationMask, cfg: &SolverConfig) -> Result<Self> {
        if m.dims() != mask.dims() {
            return Err(shape_err!("data dims {:?} vs mask dims {:?}", m.dims(), mask.dims()));
        }
        cfg.validate(m.dims())?;
        if !m.is_finite() {
            return Err(Error::NonFinite("observed tensor".into()));
        }
        let dims = m.dims();
        let mut observed = DenseTensor::zeros(dims)?;
        for &o in mask.linear_indices() {
            observed.values_mut()[o] = m.data()[o];
        }
        let z = observed.clone();
        let x: FactorSet = match cfg.init {
            Init::Hosvd => {
                let model = hosvd(&z, &cfg.ranks)?;
                let [a, b, c]: [DenseMatrix; 3] = model
                    .factors
                    .try_into()
                    .map_err(|_| shape_err!("hosvd returned the wrong number of factors"))?;
                [a, b, c]
            }
            Init::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut draw = |n: usize| -> Result<DenseMatrix> {
                    let g = DenseMatrix::from_fn(dims[n], cfg.ranks[n], |_, _| rng.sample(StandardNormal));
                    leading_left_vectors(&g, cfg.ranks[n])
                };
                [draw(0)?, draw(1)?, draw(2)?]
            }
        };
        let s = project_onto_factors(&z, &x)?;
        let zero_like = |m: &DenseMatrix| DenseMatrix::zeros(m.rows(), m.cols());
        let t = [zero_like(&x[0]), zero_like(&x[1]), zero_like(&x[2])];
        let zeros = DenseTensor::zeros(dims)?;
        let mut w_systems = [None, None, None];
        for (n, sys) in w_systems.iter_mut().enumerate() {
            if cfg.omega[n] > 0.0 {
                let ata = if cfg.toeplitz_modes[n] {
                    toeplitz_diff(dims[n])?.gram()
                } else {
                    DenseMatrix::identity(dims[n])
                };
                let a = DenseMatrix::identity(dims[n])
                    .scale(cfg.beta)
                    .add(&ata.scale(2.0 * cfg.omega[n]))?;
                *sys = Some(Cholesky::factor(&a)?);
            }
        }
        Ok(Self {
            y: x.clone(),
            x,
            t,
            s,
            w: [z.clone(), z.clone(), z.clone()],
            z,
            u: [zeros.clone(), zeros.clone(), zeros],
            iteration: 0,
            cfg: cfg.clone(),
            observed,
            mask: mask.clone(),
            w_systems,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn mask(&self) -> &ObservationMask {
        &self.mask
    }

    /// `P_Ω(m)` with zeros elsewhere.
    pub fn observed(&self) -> &DenseTensor {
        &self.observed
    }

    /// Current Tucker estimate `⟦S; X⟧`.
    pub fn tucker(&self) -> Result<DenseTensor> {
        multilinear(&self.s, &self.x)
    }

    fn grams(&self) -> [DenseMatrix; 3] {
        [self.x[0].gram(), self.x[1].gram(), self.x[2].gram()]
    }

    /// Exact minimizer of the `X⁽ⁱ⁾` subproblem given the other blocks:
    /// `X [βI + λ S_(i) BᵀB S_(i)ᵀ] = λ Z_(i) B S_(i)ᵀ + βY⁽ⁱ⁾ − T⁽ⁱ⁾`.
    ///
    /// `i` is a 0-based mode.
    pub fn update_factor(&mut self, i: usize) -> Result<()> {
        if i >= 3 {
            return Err(Error::ModeOutOfRange { mode: i, order: 3 });
        }
        self.solve_factor(i).map(|_| ())
    }

    /// Returns `Z ×_{j≠i} X⁽ʲ⁾ᵀ` evaluated with the factors used in the solve.
    fn solve_factor(&mut self, i: usize) -> Result<DenseTensor> {
        let (lambda, beta) = (self.cfg.lambda, self.cfg.beta);
        let xt = [self.x[0].transpose(), self.x[1].transpose(), self.x[2].transpose()];
        let projected = partial_product(&self.z, except(&xt, i))?;
        let s_i = unfold(&self.s, i)?;
        let zbs = unfold(&projected, i)?.matmul(&s_i.transpose())?;
        let grams = self.grams();
        let sbbs = unfold(&partial_product(&self.s, except(&grams, i))?, i)?.matmul(&s_i.transpose())?;
        let r = self.cfg.ranks[i];
        let system = symmetrize(&DenseMatrix::identity(r).scale(beta).add(&sbbs.scale(lambda))?);
        let rhs = zbs
            .scale(lambda)
            .add(&self.y[i].scale(beta))?
            .sub(&self.t[i])?;
        self.x[i] = Cholesky::factor(&system)?.solve(&rhs.transpose())?.transpose();
        Ok(projected)
    }

    /// Gauss–Seidel sweep over the three factor blocks.
    pub fn update_factors(&mut self) -> Result<()> {
        self.update_factors_cached().map(|_| ())
    }

    /// As [`Self::update_factors`], returning `Z ×ₙ Xₙᵀ` over all modes at the new factors.
    fn update_factors_cached(&mut self) -> Result<DenseTensor> {
        self.solve_factor(0)?;
        self.solve_factor(1)?;
        let p = self.solve_factor(2)?;
        mode_product(&p, &self.x[2].transpose(), 2)
    }

    /// `Y⁽ⁱ⁾ = D_{αᵢ/β}(X⁽ⁱ⁾ + T⁽ⁱ⁾/β)`.
    pub fn update_y(&mut self) -> Result<()> {
        let beta = self.cfg.beta;
        for i in 0..3 {
            let arg = self.x[i].add(&self.t[i].scale(1.0 / beta))?;
            self.y[i] = svd_shrink(&arg, self.cfg.alpha[i] / beta)?;
        }
        Ok(())
    }

    /// One proximal-gradient step on `‖⟦S;X⟧ − Z‖²/2 + (σ/λ)‖S‖₁` with
    /// step `1/ζ`, `ζ = ∏‖Xₙᵀ Xₙ‖₂`. Skipped when `ζ = 0`.
    pub fn update_core(&mut self) -> Result<()> {
        let projected = project_onto_factors(&self.z, &self.x)?;
        self.core_step(&projected)
    }

    fn core_step(&mut self, projected: &DenseTensor) -> Result<()> {
        let grams = self.grams();
        let zeta: f64 = grams.iter().map(spectral_norm).product();
        if !(zeta > 0.0) {
            return Ok(());
        }
        let grad = partial_product(&self.s, [Some(&grams[0]), Some(&grams[1]), Some(&grams[2])])?
            .sub(projected)?;
        let step = self.s.zip_with(&grad, |s, g| s - g / zeta)?;
        self.s = soft_shrink(&step, self.cfg.sigma / (self.cfg.lambda * zeta))?;
        Ok(())
    }

    /// Averaged closed form off `Ω`, the observation on `Ω`.
    pub fn update_z(&mut self) -> Result<()> {
        let (lambda, beta) = (self.cfg.lambda, self.cfg.beta);
        let zhat = self.tucker()?;
        let denom = lambda + 3.0 * beta;
        let mut z: Vec<f64> = zhat.values().iter().map(|v| lambda * v).collect();
        for (wi, ui) in self.w.iter().zip(&self.u) {
            for ((o, w), u) in z.iter_mut().zip(wi.values()).zip(ui.values()) {
                *o += beta * w - u;
            }
        }
        z.iter_mut().for_each(|v| *v /= denom);
        for &o in self.mask.linear_indices() {
            z[o] = self.observed.values()[o];
        }
        self.z = DenseTensor::new(self.z.dims().to_vec(), z)?;
        Ok(())
    }

    /// `W_{i,(i)} = [βI + 2ωᵢAᵢᵀAᵢ]⁻¹ (βZ_(i) + U_{i,(i)})`.
    pub fn update_w(&mut self) -> Result<()> {
        let beta = self.cfg.beta;
        for i in 0..3 {
            match &self.w_systems[i] {
                None => {
                    self.w[i] = self.z.zip_with(&self.u[i], |z, u| z + u / beta)?;
                }
                Some(chol) => {
                    let mut r = self.z.zip_with(&self.u[i], |z, u| beta * z + u)?;
                    solve_fibers(chol, &mut r, i);
                    self.w[i] = r;
                }
            }
        }
        Ok(())
    }

    /// `Uᵢ += β(Z − Wᵢ)`, `T⁽ⁱ⁾ += β(X⁽ⁱ⁾ − Y⁽ⁱ⁾)`.
    pub fn update_duals(&mut self) -> Result<()> {
        let beta = self.cfg.beta;
        for i in 0..3 {
            let (z, w) = (self.z.values(), self.w[i].values());
            for ((v, z), w) in self.u[i].values_mut().iter_mut().zip(z).zip(w) {
                *v += beta * (z - w);
            }
            let dx = self.x[i].sub(&self.y[i])?;
            self.t[i] = self.t[i].add(&dx.scale(beta))?;
        }
        Ok(())
    }

    /// One full sweep `X → Y → S → Z → W → U → T`.
    pub fn iterate(&mut self) -> Result<()> {
        let projected = self.update_factors_cached()?;
        self.update_y()?;
        self.core_step(&projected)?;
        self.update_z()?;
        self.update_w()?;
        self.update_duals()?;
        self.iteration += 1;
        if !self.z.is_finite() {
            return Err(Error::NonFinite(alloc::format!("Z at iteration {}", self.iteration)));
        }
        Ok(())
    }
}
