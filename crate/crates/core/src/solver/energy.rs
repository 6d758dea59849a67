use super::state::{partial_product, SolverState};
use crate::error::Result;
use crate::linalg::nuclear_norm;
use crate::tensor::{DenseMatrix, DenseTensor, Elementwise};

/// `‖Aₙ·t_(n)‖²_F` where `Aₙ` is the identity or the first-difference matrix.
pub(crate) fn regularizer_energy(t: &DenseTensor, mode: usize, toeplitz: bool) -> f64 {
    if !toeplitz {
        let f = t.frobenius();
        return f * f;
    }
    let (left, k, right) = t.split_at_mode(mode);
    let data = t.values();
    let mut sum = 0.0;
    for b in 0..right {
        for a in 0..left {
            let at = |j: usize| data[a + left * (j + k * b)];
            for j in 0..k - 1 {
                let d = at(j) - at(j + 1);
                sum += d * d;
            }
            sum += at(k - 1) * at(k - 1);
        }
    }
    sum
}

/// Rows of `x` mapped by the first-difference matrix.
pub(crate) fn difference_rows(x: &DenseMatrix) -> DenseMatrix {
    let n = x.rows();
    DenseMatrix::from_fn(n, x.cols(), |i, j| {
        if i + 1 < n {
            x.get(i, j) - x.get(i + 1, j)
        } else {
            x.get(i, j)
        }
    })
}

fn sq(t: &DenseTensor) -> f64 {
    let f = t.frobenius();
    f * f
}

impl SolverState {
    /// The augmented Lagrangian
    /// `Σωᵢ‖AᵢW_{i,(i)}‖² + Σαᵢ‖Y⁽ⁱ⁾‖_* + σ‖S‖₁ + λ/2‖⟦S;X⟧ − Z‖²
    ///  + Σ⟨Uᵢ, Z − Wᵢ⟩ + Σ⟨T⁽ⁱ⁾, X⁽ⁱ⁾ − Y⁽ⁱ⁾⟩ + β/2 Σ(‖Z − Wᵢ‖² + ‖X⁽ⁱ⁾ − Y⁽ⁱ⁾‖²)`.
    pub fn augmented_lagrangian(&self) -> Result<f64> {
        let cfg = self.config();
        let mut value = cfg.sigma * self.s.l1_norm();
        value += 0.5 * cfg.lambda * sq(&self.tucker()?.sub(&self.z)?);
        for i in 0..3 {
            if cfg.omega[i] != 0.0 {
                value += cfg.omega[i] * regularizer_energy(&self.w[i], i, cfg.toeplitz_modes[i]);
            }
            if cfg.alpha[i] != 0.0 {
                value += cfg.alpha[i] * nuclear_norm(&self.y[i])?;
            }
            let dz = self.z.sub(&self.w[i])?;
            let dx = self.x[i].sub(&self.y[i])?;
            value += crate::tensor::inner(&self.u[i], &dz)? + self.t[i].inner(&dx)?;
            let fx = dx.frobenius();
            value += 0.5 * cfg.beta * (sq(&dz) + fx * fx);
        }
        Ok(value)
    }

    /// Model objective `Ψ(X, S) + Σαᵢ‖X⁽ⁱ⁾‖_* + σ‖S‖₁` with
    /// `Ψ = Σωᵢ‖⟦S; …, AᵢX⁽ⁱ⁾, …⟧‖²`.
    pub fn objective_value(&self) -> Result<f64> {
        let cfg = self.config();
        let mut value = cfg.sigma * self.s.l1_norm();
        let grams = [self.x[0].gram(), self.x[1].gram(), self.x[2].gram()];
        for i in 0..3 {
            if cfg.alpha[i] != 0.0 {
                value += cfg.alpha[i] * nuclear_norm(&self.x[i])?;
            }
            if cfg.omega[i] == 0.0 {
                continue;
            }
            // ‖⟦S; Q⟧‖² = ⟨S ×ₙ QₙᵀQₙ, S⟩
            let mut g = grams.clone();
            if cfg.toeplitz_modes[i] {
                g[i] = difference_rows(&self.x[i]).gram();
            }
            let sg = partial_product(&self.s, [Some(&g[0]), Some(&g[1]), Some(&g[2])])?;
            value += cfg.omega[i] * crate::tensor::inner(&sg, &self.s)?;
        }
        Ok(value)
    }
}
