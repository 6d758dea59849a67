//! Reference implementations used as independent oracles.
//!
//! Everything here is written from the defining formulas with explicit
//! Kronecker products and index arithmetic, without the fast paths of the
//! library.
#![allow(dead_code)]

use lrsetd_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn randn_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn randn_tensor(rng: &mut ChaCha8Rng, dims: &[usize]) -> DenseTensor {
    DenseTensor::from_fn(dims, |_| rng.sample(StandardNormal)).unwrap()
}

pub fn all_indices(dims: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &d in dims.iter().rev() {
        out = out
            .into_iter()
            .flat_map(|tail| {
                (0..d).map(move |i| {
                    let mut v = vec![i];
                    v.extend(&tail);
                    v
                })
            })
            .collect();
    }
    out
}

/// Mode-`n` unfolding from `j = Σ_{k≠n} i_k J_k`, `J_k = ∏_{m<k, m≠n} I_m`.
pub fn unfold_oracle(t: &DenseTensor, n: usize) -> DenseMatrix {
    let dims = t.dims();
    let cols: usize = dims.iter().enumerate().filter(|(k, _)| *k != n).map(|(_, d)| d).product();
    let mut out = DenseMatrix::zeros(dims[n], cols);
    for idx in all_indices(dims) {
        let mut j = 0;
        for k in 0..dims.len() {
            if k == n {
                continue;
            }
            let jk: usize = (0..k).filter(|&m| m != n).map(|m| dims[m]).product();
            j += idx[k] * jk;
        }
        out.set(idx[n], j, t.get(&idx));
    }
    out
}

/// Column-stacked vector (first index fastest).
pub fn vec_of(t: &DenseTensor) -> DenseMatrix {
    let mut data = vec![0.0; t.len()];
    for idx in all_indices(t.dims()) {
        let mut off = 0;
        let mut stride = 1;
        for (k, &i) in idx.iter().enumerate() {
            off += i * stride;
            stride *= t.dims()[k];
        }
        data[off] = t.get(&idx);
    }
    DenseMatrix::new(t.len(), 1, data).unwrap()
}

/// `X⁽³⁾ ⊗ X⁽²⁾ ⊗ X⁽¹⁾`.
pub fn full_kron(x: &[DenseMatrix; 3]) -> DenseMatrix {
    kron(&x[2], &kron(&x[1], &x[0]))
}

/// Kronecker product of the factors other than `i`, highest mode leftmost.
pub fn kron_except(x: &[DenseMatrix; 3], i: usize) -> DenseMatrix {
    match i {
        0 => kron(&x[2], &x[1]),
        1 => kron(&x[2], &x[0]),
        _ => kron(&x[1], &x[0]),
    }
}

/// `⟦S; X⟧` via `vec = (X3 ⊗ X2 ⊗ X1)·vec(S)`.
pub fn tucker_oracle(s: &DenseTensor, x: &[DenseMatrix; 3]) -> DenseTensor {
    let v = full_kron(x).matmul(&vec_of(s)).unwrap();
    let dims = [x[0].rows(), x[1].rows(), x[2].rows()];
    DenseTensor::new(dims.to_vec(), v.data().to_vec()).unwrap()
}

/// Dense first-difference matrix.
pub fn difference_matrix(n: usize) -> DenseMatrix {
    DenseMatrix::from_fn(n, n, |i, j| match j as isize - i as isize {
        0 => 1.0,
        1 => -1.0,
        _ => 0.0,
    })
}

pub fn regularizer_matrix(n: usize, toeplitz: bool) -> DenseMatrix {
    if toeplitz {
        difference_matrix(n)
    } else {
        DenseMatrix::identity(n)
    }
}

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix: `(values, vectors)`.
pub fn sym_eig(a: &DenseMatrix) -> (Vec<f64>, DenseMatrix) {
    let n = a.rows();
    let mut a = a.clone();
    let mut v = DenseMatrix::identity(n);
    for _ in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a.get(p, q) * a.get(p, q);
            }
        }
        if off < 1e-30 * (1.0 + a.frobenius().powi(2)) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a.get(k, p), a.get(k, q));
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let (apk, aqk) = (a.get(p, k), a.get(q, k));
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let (vkp, vkq) = (v.get(k, p), v.get(k, q));
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    ((0..n).map(|i| a.get(i, i)).collect(), v)
}

/// Singular values from the eigenvalues of `mᵀm`.
pub fn singular_values_oracle(m: &DenseMatrix) -> Vec<f64> {
    let (vals, _) = sym_eig(&m.t_matmul(m).unwrap());
    let mut s: Vec<f64> = vals.into_iter().map(|v| v.max(0.0).sqrt()).collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

pub fn nuclear_oracle(m: &DenseMatrix) -> f64 {
    singular_values_oracle(m).iter().sum()
}

pub fn spectral_oracle(m: &DenseMatrix) -> f64 {
    singular_values_oracle(m).first().copied().unwrap_or(0.0)
}

pub fn sq(x: f64) -> f64 {
    x * x
}

pub fn tensor_from_matrix(m: &DenseMatrix, dims: &[usize]) -> DenseTensor {
    DenseTensor::new(dims.to_vec(), m.data().to_vec()).unwrap()
}

/// Mode-`n` product through the unfolding oracle: `fold(m · T_(n))`.
pub fn mode_product_oracle(t: &DenseTensor, m: &DenseMatrix, n: usize) -> DenseTensor {
    let prod = m.matmul(&unfold_oracle(t, n)).unwrap();
    let mut dims = t.dims().to_vec();
    dims[n] = m.rows();
    let mut out = DenseTensor::zeros(&dims).unwrap();
    for idx in all_indices(&dims) {
        let mut j = 0;
        for k in 0..dims.len() {
            if k == n {
                continue;
            }
            let jk: usize = (0..k).filter(|&q| q != n).map(|q| dims[q]).product();
            j += idx[k] * jk;
        }
        out.set(&idx, prod.get(idx[n], j));
    }
    out
}

/// Augmented Lagrangian evaluated from the displayed formula with oracle primitives.
pub fn lagrangian_oracle(st: &SolverState) -> f64 {
    let cfg = st.config();
    let zhat = tucker_oracle(&st.s, &st.x);
    let mut value = cfg.sigma * st.s.data().iter().map(|v| v.abs()).sum::<f64>();
    value += 0.5 * cfg.lambda * sq(zhat.sub(&st.z).unwrap().frobenius());
    for i in 0..3 {
        let a = regularizer_matrix(st.z.dims()[i], cfg.toeplitz_modes[i]);
        let aw = a.matmul(&unfold_oracle(&st.w[i], i)).unwrap();
        value += cfg.omega[i] * sq(aw.frobenius());
        value += cfg.alpha[i] * nuclear_oracle(&st.y[i]);
        let dz = st.z.sub(&st.w[i]).unwrap();
        let dx = st.x[i].sub(&st.y[i]).unwrap();
        value += inner(&st.u[i], &dz).unwrap() + st.t[i].inner(&dx).unwrap();
        value += 0.5 * cfg.beta * (sq(dz.frobenius()) + sq(dx.frobenius()));
    }
    value
}

/// Model objective from explicit multilinear products with `AᵢX⁽ⁱ⁾`.
pub fn objective_oracle(st: &SolverState) -> f64 {
    let cfg = st.config();
    let mut value = cfg.sigma * st.s.data().iter().map(|v| v.abs()).sum::<f64>();
    for i in 0..3 {
        value += cfg.alpha[i] * nuclear_oracle(&st.x[i]);
        let mut q = st.x.clone();
        q[i] = regularizer_matrix(q[i].rows(), cfg.toeplitz_modes[i]).matmul(&st.x[i]).unwrap();
        value += cfg.omega[i] * sq(tucker_oracle(&st.s, &q).frobenius());
    }
    value
}

/// A state with every variable filled with random values.
pub fn random_state(seed: u64, dims: [usize; 3], ranks: [usize; 3], ratio: f64) -> SolverState {
    let mut r = rng(seed);
    let m = randn_tensor(&mut r, &dims);
    let mask = random_mask(&dims, ratio, seed).unwrap();
    let mut cfg = SolverConfig::new(&dims);
    cfg.ranks = ranks;
    cfg.alpha = [r.random::<f64>(), r.random::<f64>(), r.random::<f64>()];
    cfg.sigma = r.random::<f64>();
    cfg.lambda = 0.1 + r.random::<f64>();
    cfg.beta = 0.1 + r.random::<f64>();
    cfg.omega = [r.random::<f64>(), r.random::<f64>(), r.random::<f64>()];
    cfg.toeplitz_modes = [r.random(), r.random(), r.random()];
    let mut st = SolverState::new(&m, &mask, &cfg).unwrap();
    for i in 0..3 {
        st.x[i] = randn_matrix(&mut r, dims[i], ranks[i]);
        st.y[i] = randn_matrix(&mut r, dims[i], ranks[i]);
        st.t[i] = randn_matrix(&mut r, dims[i], ranks[i]);
        st.w[i] = randn_tensor(&mut r, &dims);
        st.u[i] = randn_tensor(&mut r, &dims);
    }
    st.s = randn_tensor(&mut r, &ranks);
    st.z = project_assign(&randn_tensor(&mut r, &dims), &mask, &m).unwrap();
    st
}

/// Unit-Frobenius random direction scaled to `eps`.
pub fn perturbation_matrix(rng: &mut ChaCha8Rng, like: &DenseMatrix, eps: f64) -> DenseMatrix {
    let d = randn_matrix(rng, like.rows(), like.cols());
    d.scale(eps / d.frobenius())
}

pub fn perturbation_tensor(rng: &mut ChaCha8Rng, like: &DenseTensor, eps: f64) -> DenseTensor {
    let d = randn_tensor(rng, like.dims());
    d.scale(eps / d.frobenius())
}

pub fn rel(num: f64, den: f64) -> f64 {
    num / den.max(1e-300)
}

/// Relative residual of the `X⁽ⁱ⁾` normal equations with explicit Kronecker factors.
pub fn factor_residual(before: &SolverState, after: &SolverState, i: usize) -> f64 {
    let cfg = before.config();
    let b = kron_except(&before.x, i);
    let s_i = unfold_oracle(&before.s, i);
    let z_i = unfold_oracle(&before.z, i);
    let sb = s_i.matmul(&b.transpose()).unwrap();
    let system = DenseMatrix::identity(cfg.ranks[i])
        .scale(cfg.beta)
        .add(&sb.matmul(&sb.transpose()).unwrap().scale(cfg.lambda))
        .unwrap();
    let rhs = z_i
        .matmul(&sb.transpose())
        .unwrap()
        .scale(cfg.lambda)
        .add(&before.y[i].scale(cfg.beta))
        .unwrap()
        .sub(&before.t[i])
        .unwrap();
    let lhs = after.x[i].matmul(&system).unwrap();
    rel(lhs.sub(&rhs).unwrap().frobenius(), rhs.frobenius())
}

pub fn factor_subproblem(st: &SolverState, i: usize) -> f64 {
    let cfg = st.config();
    let fit = tucker_oracle(&st.s, &st.x).sub(&st.z).unwrap().frobenius();
    let dx = st.x[i].sub(&st.y[i]).unwrap();
    0.5 * cfg.lambda * sq(fit) + st.t[i].inner(&dx).unwrap() + 0.5 * cfg.beta * sq(dx.frobenius())
}

/// Max residual of the first-order conditions of `min τ‖Y‖_* + ½‖Y − arg‖²`.
pub fn nuclear_prox_residual(arg: &DenseMatrix, y: &DenseMatrix, tau: f64) -> f64 {
    let r = arg.sub(y).unwrap();
    if tau == 0.0 {
        return rel(r.frobenius(), arg.frobenius());
    }
    let g = r.scale(1.0 / tau);
    let mut worst = (spectral_oracle(&g) - 1.0).max(0.0);
    let (vals, v) = sym_eig(&y.t_matmul(y).unwrap());
    let emax = vals.iter().cloned().fold(0.0, f64::max);
    for (k, &ev) in vals.iter().enumerate() {
        // eigenvalues of YᵀY at rounding level belong to zero singular values
        if ev <= 1e-12 * emax.max(1e-300) {
            continue;
        }
        let sk = ev.sqrt();
        let vk = DenseMatrix::new(v.rows(), 1, v.col(k).to_vec()).unwrap();
        let uk = y.matmul(&vk).unwrap().scale(1.0 / sk);
        worst = worst.max(g.matmul(&vk).unwrap().sub(&uk).unwrap().frobenius());
        worst = worst.max(g.t_matmul(&uk).unwrap().sub(&vk).unwrap().frobenius());
    }
    worst
}

pub fn w_subproblem(st: &SolverState, w: &DenseTensor, i: usize) -> f64 {
    let cfg = st.config();
    let a = regularizer_matrix(w.dims()[i], cfg.toeplitz_modes[i]);
    cfg.omega[i] * sq(a.matmul(&unfold_oracle(w, i)).unwrap().frobenius())
        - inner(&st.u[i], w).unwrap()
        + 0.5 * cfg.beta * sq(st.z.sub(w).unwrap().frobenius())
}

/// Relative residual of the `Y⁽ⁱ⁾` prox conditions for the update `before → after`.
pub fn y_residual(before: &SolverState, after: &SolverState, i: usize) -> f64 {
    let cfg = before.config();
    let arg = before.x[i].add(&before.t[i].scale(1.0 / cfg.beta)).unwrap();
    nuclear_prox_residual(&arg, &after.y[i], cfg.alpha[i] / cfg.beta)
}

/// Largest relative stationarity residual of the `Z` subproblem off the mask;
/// infinite if an observed entry moved.
pub fn z_residual(st: &SolverState) -> f64 {
    let cfg = st.config();
    let zhat = tucker_oracle(&st.s, &st.x);
    let mut scale = cfg.lambda * zhat.frobenius();
    for i in 0..3 {
        scale += st.u[i].frobenius() + cfg.beta * st.w[i].frobenius();
    }
    let mut worst: f64 = 0.0;
    for (o, obs) in st.mask().dense().into_iter().enumerate() {
        if obs {
            if st.z.data()[o] != st.observed().data()[o] {
                return f64::INFINITY;
            }
            continue;
        }
        let mut g = cfg.lambda * (st.z.data()[o] - zhat.data()[o]);
        for i in 0..3 {
            g += st.u[i].data()[o] + cfg.beta * (st.z.data()[o] - st.w[i].data()[o]);
        }
        worst = worst.max(g.abs());
    }
    rel(worst, scale.max(1.0))
}

/// Relative gradient norm of the `Wᵢ` subproblem, with `A` and the unfolding built explicitly.
pub fn w_residual(st: &SolverState, i: usize) -> f64 {
    let cfg = st.config();
    let a = regularizer_matrix(st.z.dims()[i], cfg.toeplitz_modes[i]);
    let w_i = unfold_oracle(&st.w[i], i);
    let grad = a
        .t_matmul(&a.matmul(&w_i).unwrap())
        .unwrap()
        .scale(2.0 * cfg.omega[i])
        .sub(&unfold_oracle(&st.u[i], i))
        .unwrap()
        .sub(&unfold_oracle(&st.z, i).sub(&w_i).unwrap().scale(cfg.beta))
        .unwrap();
    rel(grad.frobenius(), cfg.beta * st.z.frobenius() + st.u[i].frobenius())
}
