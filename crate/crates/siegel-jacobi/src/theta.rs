//! Schrodinger and Weil representations on `L^2(R^{(m,n)})`, the `SL(2,R)`
//! coordinates `(tau, phi)`, the cocycle `c_M`, Iwasawa composition and
//! theta sums with their transformation laws.
//!
//! A point `x` of `R^{(m,n)}` is flattened row-major: `x_{kj}` sits at `k*n + j`.
//! In these coordinates `||x||_M^2 = x^t G x` with `G = M (x) I_n`.

use std::f64::consts::PI;

use nalgebra::{DVector, Matrix2};

use crate::error::{Error, Result};
use crate::groups::HeisenbergElement;
use crate::linalg::{c, det_r, eigh, eigh_r, inv, to_complex, CMatrix, RMatrix, C64};

pub type CVector = DVector<C64>;
pub type Sl2 = Matrix2<f64>;

const ILL_CONDITIONED: f64 = 1e-6;
const TAIL_TOL: f64 = 1e-12;
const DIVERGENCE_TOL: f64 = 1e-6;

/// Uniform centered grid `{h (i - K) : |i - K| <= K}^d` with `K = L / h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub dim: usize,
    pub extent: f64,
    pub spacing: f64,
}

impl Grid {
    pub fn new(dim: usize, extent: f64, spacing: f64) -> Result<Self> {
        if dim == 0 || !(extent > 0.0) || !(spacing > 0.0) {
            return Err(Error::Parameter("grid needs dim >= 1, extent > 0, spacing > 0".into()));
        }
        let k = extent / spacing;
        if (k - k.round()).abs() > 1e-9 * k.max(1.0) {
            return Err(Error::Parameter(format!("extent / spacing = {k} is not an integer")));
        }
        Ok(Grid { dim, extent, spacing })
    }

    /// Nodes per axis on each side of the origin.
    pub fn half_count(&self) -> usize {
        (self.extent / self.spacing).round() as usize
    }

    pub fn axis_len(&self) -> usize {
        2 * self.half_count() + 1
    }

    pub fn len(&self) -> usize {
        self.axis_len().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, mut idx: usize) -> Vec<f64> {
        let (na, k) = (self.axis_len(), self.half_count() as f64);
        let mut x = vec![0.0; self.dim];
        for a in (0..self.dim).rev() {
            x[a] = self.spacing * ((idx % na) as f64 - k);
            idx /= na;
        }
        x
    }

    pub fn nodes(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|i| self.node(i))
    }
}

/// `C exp(pi i x^t Q x + 2 pi i b^t x)` with `Im Q` positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    pub q: CMatrix,
    pub b: CVector,
    pub coef: C64,
}

impl Gaussian {
    pub fn eval(&self, x: &[f64]) -> C64 {
        let xv = CVector::from_iterator(x.len(), x.iter().map(|&t| c(t, 0.0)));
        let e = (xv.transpose() * &self.q * &xv)[(0, 0)] + (self.b.transpose() * &xv)[(0, 0)] * 2.0;
        self.coef * (c(0.0, PI) * e).exp()
    }

    /// Radius beyond which `|f| < 1e-16` of its peak bound.
    fn radius(&self) -> Result<f64> {
        let (lmin, _) = im_spectrum(&self.q)?;
        let bi = self.b.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
        let k = 37.0 / PI + bi * bi / lmin;
        Ok((bi + (bi * bi + lmin * k).sqrt()) / lmin)
    }
}

fn im_spectrum(q: &CMatrix) -> Result<(f64, f64)> {
    let (v, _) = eigh_r(&crate::linalg::im(q))?;
    let (lo, hi) = (v[0], v[v.len() - 1]);
    if !(lo > 0.0) {
        return Err(Error::Domain("Gaussian needs Im Q positive definite".into()));
    }
    Ok((lo, hi))
}

/// `det(-i P)^{-1/2}` on the branch continuous from `P = iI`.
fn det_minus_i_inv_sqrt(p: &CMatrix) -> Result<C64> {
    let a = p * c(0.0, -1.0);
    let ev = a.clone().schur().eigenvalues().ok_or_else(|| Error::Numeric("eigenvalues of -iP".into()))?;
    Ok(ev.iter().fold(c(1.0, 0.0), |acc, l| acc / l.sqrt()))
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Gaussian(Gaussian),
    Sampled { grid: Grid, samples: Vec<C64> },
}

/// A test function on `R^{(m,n)}`: closed-form Gaussian or samples on a grid.
/// Sampled functions are read between nodes by sinc interpolation and
/// vanish outside the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    m: usize,
    n: usize,
    repr: Repr,
}

impl GridFunction {
    /// `e^{-pi ||x||_M^2}`
    pub fn standard_gaussian(mm: &RMatrix, n: usize) -> Self {
        let g = gram(mm, n);
        let d = g.nrows();
        GridFunction {
            m: mm.nrows(),
            n,
            repr: Repr::Gaussian(Gaussian { q: to_complex(&g) * c(0.0, 1.0), b: CVector::zeros(d), coef: c(1.0, 0.0) }),
        }
    }

    pub fn gaussian(m: usize, n: usize, q: CMatrix, b: CVector, coef: C64) -> Result<Self> {
        let d = m * n;
        if q.shape() != (d, d) || b.len() != d {
            return Err(crate::error::dim("Gaussian descriptor must be (mn x mn, mn)"));
        }
        let q = crate::linalg::sym(&q);
        im_spectrum(&q)?;
        Ok(GridFunction { m, n, repr: Repr::Gaussian(Gaussian { q, b, coef }) })
    }

    pub fn sampled(m: usize, n: usize, grid: Grid, samples: Vec<C64>) -> Result<Self> {
        if grid.dim != m * n || samples.len() != grid.len() {
            return Err(crate::error::dim("samples must match the grid"));
        }
        if samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("samples must be finite".into()));
        }
        Ok(GridFunction { m, n, repr: Repr::Sampled { grid, samples } })
    }

    pub fn from_fn(m: usize, n: usize, grid: Grid, f: impl Fn(&[f64]) -> C64) -> Result<Self> {
        Self::sampled(m, n, grid, grid.nodes().map(|x| f(&x)).collect())
    }

    /// Samples of this function on `grid`.
    pub fn sample(&self, grid: Grid) -> Result<Self> {
        let samples = grid.nodes().map(|x| self.eval(&x)).collect::<Result<_>>()?;
        Self::sampled(self.m, self.n, grid, samples)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.m * self.n
    }

    pub fn as_gaussian(&self) -> Option<&Gaussian> {
        match &self.repr {
            Repr::Gaussian(g) => Some(g),
            Repr::Sampled { .. } => None,
        }
    }

    pub fn grid(&self) -> Option<Grid> {
        match &self.repr {
            Repr::Sampled { grid, .. } => Some(*grid),
            Repr::Gaussian(_) => None,
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<C64> {
        if x.len() != self.dim() {
            return Err(crate::error::dim("point dimension must be mn"));
        }
        match &self.repr {
            Repr::Gaussian(g) => Ok(g.eval(x)),
            Repr::Sampled { grid, samples } => sinc_eval(grid, samples, x),
        }
    }

    pub fn eval_mat(&self, x: &RMatrix) -> Result<C64> {
        if x.shape() != (self.m, self.n) {
            return Err(crate::error::dim("point must be m x n"));
        }
        self.eval(&flatten(x))
    }

    /// `sup |f - g|` over the nodes of `grid`.
    pub fn sup_distance(&self, o: &GridFunction, grid: &Grid) -> Result<f64> {
        grid.nodes().try_fold(0.0f64, |acc, x| Ok(acc.max((self.eval(&x)? - o.eval(&x)?).norm())))
    }
}

fn sinc(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        (PI * t).sin() / (PI * t)
    }
}

fn sinc_eval(grid: &Grid, samples: &[C64], x: &[f64]) -> Result<C64> {
    let (h, k, na) = (grid.spacing, grid.half_count() as f64, grid.axis_len());
    if x.iter().any(|&t| t.abs() > grid.extent + 1e-12) {
        return Ok(c(0.0, 0.0));
    }
    let pos: Vec<f64> = x.iter().map(|&t| t / h + k).collect();
    if pos.iter().all(|p| (p - p.round()).abs() < 1e-12) {
        let idx = pos.iter().fold(0usize, |acc, p| acc * na + p.round() as usize);
        return Ok(samples[idx]);
    }
    if grid.dim > 2 {
        return Err(Error::Unsupported("off-grid evaluation of sampled functions needs mn <= 2".into()));
    }
    let w: Vec<Vec<f64>> = pos.iter().map(|p| (0..na).map(|i| sinc(p - i as f64)).collect()).collect();
    Ok(match grid.dim {
        1 => samples.iter().zip(&w[0]).map(|(s, wi)| s * *wi).sum(),
        _ => {
            let mut acc = c(0.0, 0.0);
            for i in 0..na {
                if w[0][i] == 0.0 {
                    continue;
                }
                let row: C64 = (0..na).map(|j| samples[i * na + j] * w[1][j]).sum();
                acc += row * w[0][i];
            }
            acc
        }
    })
}

pub fn flatten(x: &RMatrix) -> Vec<f64> {
    let (m, n) = x.shape();
    (0..m * n).map(|k| x[(k / n, k % n)]).collect()
}

/// `G = M (x) I_n`, so that `||x||_M^2 = x^t G x`.
pub fn gram(mm: &RMatrix, n: usize) -> RMatrix {
    kron_sym(mm, &RMatrix::identity(n, n))
}

/// `K[(k,j),(l,j')] = A_kl B_jj'`
fn kron_sym(a: &RMatrix, b: &RMatrix) -> RMatrix {
    let (m, n) = (a.nrows(), b.nrows());
    RMatrix::from_fn(m * n, m * n, |r, s| a[(r / n, s / n)] * b[(r % n, s % n)])
}

fn norm_m(g: &RMatrix, x: &[f64]) -> f64 {
    let d = x.len();
    (0..d).map(|i| (0..d).map(|j| x[i] * g[(i, j)] * x[j]).sum::<f64>()).sum()
}

/// How `R_M(i, phi)` and the `sigma` generator evaluate their oscillatory integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureRule {
    /// Closed-form Gaussian calculus for Gaussian inputs, trapezoid otherwise.
    GaussianExact,
    /// Always the trapezoid rule.
    Trapezoid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub rule: QuadratureRule,
    /// Minimum nodes per axis for the trapezoid rule on Gaussian inputs.
    pub points: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature { rule: QuadratureRule::GaussianExact, points: 256 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaContext {
    mmat: RMatrix,
    pub n_cut: usize,
    pub quadrature: Quadrature,
}

impl ThetaContext {
    /// `M` symmetric positive definite. Integrality is required only by the
    /// transformation-law checks.
    pub fn new(mmat: RMatrix, n_cut: usize) -> Result<Self> {
        if !crate::linalg::is_positive_definite_r(&mmat, crate::linalg::Tolerance::new(0.0, 0.0))? {
            return Err(Error::Domain("M must be symmetric positive definite".into()));
        }
        if n_cut == 0 {
            return Err(Error::Parameter("N_cut must be at least 1".into()));
        }
        Ok(ThetaContext { mmat, n_cut, quadrature: Quadrature::default() })
    }

    pub fn with_quadrature(mut self, q: Quadrature) -> Self {
        self.quadrature = q;
        self
    }

    pub fn mmat(&self) -> &RMatrix {
        &self.mmat
    }

    pub fn m(&self) -> usize {
        self.mmat.nrows()
    }

    pub fn is_integral(&self) -> bool {
        self.mmat.iter().all(|x| (x - x.round()).abs() < 1e-12)
    }

    pub fn det_m(&self) -> f64 {
        det_r(&self.mmat)
    }

    fn check(&self, f: &GridFunction) -> Result<RMatrix> {
        if f.m != self.m() {
            return Err(crate::error::dim("function and context disagree on m"));
        }
        Ok(gram(&self.mmat, f.n))
    }
}

fn require_integral(ctx: &ThetaContext) -> Result<()> {
    if !ctx.is_integral() {
        return Err(Error::Parameter("transformation laws need an integral M".into()));
    }
    Ok(())
}

/// `[W_M(h0) f](x) = e^{pi i sigma(M(kappa0 + mu0 lambda0^t + 2 x mu0^t))} f(x + lambda0)`
pub fn schrodinger_action(h0: &HeisenbergElement, f: &GridFunction, ctx: &ThetaContext) -> Result<GridFunction> {
    let g = ctx.check(f)?;
    if h0.m() != f.m || h0.n() != f.n {
        return Err(crate::error::dim("Heisenberg element must have lambda, mu of shape m x n"));
    }
    let mm = ctx.mmat();
    let central = (mm * (&h0.kappa + &h0.mu * h0.lambda.transpose())).trace();
    let l = flatten(&h0.lambda);
    let mu = flatten(&h0.mu);
    let gmu: Vec<f64> = (0..l.len()).map(|i| (0..l.len()).map(|j| g[(i, j)] * mu[j]).sum()).collect();
    match &f.repr {
        Repr::Gaussian(gs) => {
            let lv = CVector::from_iterator(l.len(), l.iter().map(|&t| c(t, 0.0)));
            let shift_val = gs.eval(&l) / gs.coef;
            let b = &gs.q * &lv + &gs.b + CVector::from_iterator(l.len(), gmu.iter().map(|&t| c(t, 0.0)));
            let coef = gs.coef * shift_val * (c(0.0, PI * central)).exp();
            Ok(GridFunction { m: f.m, n: f.n, repr: Repr::Gaussian(Gaussian { q: gs.q.clone(), b, coef }) })
        }
        Repr::Sampled { grid, .. } => {
            if l.iter().any(|t| t.abs() > grid.extent) {
                return Err(Error::Domain("shift exceeds the grid extent".into()));
            }
            let samples = grid
                .nodes()
                .map(|x| {
                    let xs: Vec<f64> = x.iter().zip(&l).map(|(a, b)| a + b).collect();
                    let ph = PI * (central + 2.0 * x.iter().zip(&gmu).map(|(a, b)| a * b).sum::<f64>());
                    Ok(f.eval(&xs)? * c(0.0, ph).exp())
                })
                .collect::<Result<_>>()?;
            GridFunction::sampled(f.m, f.n, *grid, samples)
        }
    }
}

/// Generators of `G_M x| H_R^{(n,m)}` with their torus component `t`.
#[derive(Debug, Clone, PartialEq)]
pub enum WeilGenerator {
    H { h: HeisenbergElement, t: C64 },
    T { b: RMatrix, t: C64 },
    G { alpha: RMatrix, t: C64 },
    Sigma { t: C64 },
}

impl WeilGenerator {
    /// The symplectic part (identity for `H`).
    pub fn symplectic(&self, n: usize) -> Result<crate::groups::SymplecticElement> {
        use crate::groups::SymplecticElement as Sp;
        match self {
            WeilGenerator::H { .. } => Ok(Sp::identity(n)),
            WeilGenerator::T { b, .. } => Sp::t(b),
            WeilGenerator::G { alpha, .. } => Sp::g(alpha),
            WeilGenerator::Sigma { .. } => Ok(Sp::sigma(n)),
        }
    }

    fn torus(&self) -> C64 {
        match self {
            WeilGenerator::H { t, .. } | WeilGenerator::T { t, .. } | WeilGenerator::G { t, .. } | WeilGenerator::Sigma { t } => {
                *t
            }
        }
    }
}

/// `(a b; c d)` acting through the kernels of `R_M` on `SL(2,R)` embedded
/// diagonally in `Sp(n,R)`; `c = 0` is a dilation with a chirp, otherwise an
/// oscillatory integral.
pub fn weil_sl2_matrix_action(g: &Sl2, f: &GridFunction, ctx: &ThetaContext) -> Result<GridFunction> {
    check_det1(g)?;
    let gr = ctx.check(f)?;
    let (a, b, cc, d) = (g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)]);
    if cc.abs() <= 1e-14 {
        return dilate_chirp(f, &gr, a, a * b);
    }
    let kernel = SlKernel { a, c: cc, d, det_m_pow: ctx.det_m().powf(f.n as f64 / 2.0) };
    match (&f.repr, ctx.quadrature.rule) {
        (Repr::Gaussian(gs), QuadratureRule::GaussianExact) => {
            Ok(GridFunction { m: f.m, n: f.n, repr: Repr::Gaussian(kernel.gaussian(gs, &gr)?) })
        }
        (_, _) => {
            let grid = match f.grid() {
                Some(gd) => gd,
                None => Grid::new(f.dim(), 4.0, 0.125)?,
            };
            let samples = grid.nodes().map(|x| kernel.quadrature(f, &gr, &x, ctx)).collect::<Result<_>>()?;
            GridFunction::sampled(f.m, f.n, grid, samples)
        }
    }
}

/// `|a|^{mn/2} e^{pi i s ||x||^2} f(a x)`
fn dilate_chirp(f: &GridFunction, g: &RMatrix, a: f64, s: f64) -> Result<GridFunction> {
    let d = f.dim();
    let scale = a.abs().powf(d as f64 / 2.0);
    match &f.repr {
        Repr::Gaussian(gs) => Ok(GridFunction {
            m: f.m,
            n: f.n,
            repr: Repr::Gaussian(Gaussian {
                q: &gs.q * c(a * a, 0.0) + to_complex(g) * c(s, 0.0),
                b: &gs.b * c(a, 0.0),
                coef: gs.coef * scale,
            }),
        }),
        Repr::Sampled { grid, .. } => {
            let samples = grid
                .nodes()
                .map(|x| {
                    let ax: Vec<f64> = x.iter().map(|t| a * t).collect();
                    f.eval(&ax).map(|v| v * scale * c(0.0, PI * s * norm_m(g, &x)).exp())
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(GridFunction { m: f.m, n: f.n, repr: Repr::Sampled { grid: *grid, samples } })
        }
    }
}

/// `(det M)^{n/2} |c|^{-mn/2} integral e^{pi i (a||x||^2 + d||y||^2 - 2(x,y))/c} f(y) dy`
struct SlKernel {
    a: f64,
    c: f64,
    d: f64,
    det_m_pow: f64,
}

impl SlKernel {
    fn gaussian(&self, gs: &Gaussian, g: &RMatrix) -> Result<Gaussian> {
        let gc = to_complex(g);
        let dim = g.nrows();
        let p = &gs.q + &gc * c(self.d / self.c, 0.0);
        let pi_ = inv(&p)?;
        let q = &gc * c(self.a / self.c, 0.0) - &gc * &pi_ * &gc * c(1.0 / (self.c * self.c), 0.0);
        let b = &gc * &pi_ * &gs.b * c(1.0 / self.c, 0.0);
        let bpb = (gs.b.transpose() * &pi_ * &gs.b)[(0, 0)];
        let coef = gs.coef
            * self.det_m_pow
            * self.c.abs().powf(-(dim as f64) / 2.0)
            * det_minus_i_inv_sqrt(&p)?
            * (c(0.0, -PI) * bpb).exp();
        Ok(Gaussian { q: crate::linalg::sym(&q), b, coef })
    }

    fn phase(&self, g: &RMatrix, x: &[f64], y: &[f64]) -> C64 {
        let xy: f64 = (0..x.len()).map(|i| (0..x.len()).map(|j| x[i] * g[(i, j)] * y[j]).sum::<f64>()).sum();
        let e = (self.a * norm_m(g, x) + self.d * norm_m(g, y) - 2.0 * xy) / self.c;
        c(0.0, PI * e).exp()
    }

    /// Trapezoid value at `x` with a divergence estimate against a second
    /// spacing; an estimate above `1e-6` is an accuracy error.
    fn quadrature(&self, f: &GridFunction, g: &RMatrix, x: &[f64], ctx: &ThetaContext) -> Result<C64> {
        let dim = f.dim();
        let pref = self.det_m_pow * self.c.abs().powf(-(dim as f64) / 2.0);
        let (fine, coarse, scale) = match &f.repr {
            Repr::Sampled { grid, samples } => {
                let na = grid.axis_len();
                let k = grid.half_count();
                let (mut s1, mut s2, mut mass) = (c(0.0, 0.0), c(0.0, 0.0), 0.0);
                for (idx, y) in grid.nodes().enumerate() {
                    let v = samples[idx] * self.phase(g, x, &y);
                    s1 += v;
                    mass += samples[idx].norm();
                    let mut i = idx;
                    let mut even = true;
                    for _ in 0..dim {
                        even &= (i % na).abs_diff(k) % 2 == 0;
                        i /= na;
                    }
                    if even {
                        s2 += v;
                    }
                }
                let h = grid.spacing.powi(dim as i32);
                (s1 * h, s2 * h * 2f64.powi(dim as i32), mass * h)
            }
            Repr::Gaussian(gs) => {
                let r = gs.radius()?;
                let (_, lmax) = im_spectrum(&gs.q)?;
                let gnorm = eigh_r(g)?.0.last().copied().unwrap_or(1.0);
                let re_q = eigh(&crate::linalg::sym(&to_complex(&crate::linalg::re(&gs.q))))?.0;
                let rq = re_q.iter().fold(0.0f64, |a, v| a.max(v.abs())) + gnorm * (self.d / self.c).abs();
                let xn = x.iter().map(|t| t * t).sum::<f64>().sqrt();
                let rb = gs.b.iter().map(|z| z.re * z.re).sum::<f64>().sqrt();
                let nu = rq * r + rb + gnorm * xn / self.c.abs() + (40.0 * lmax / PI).sqrt();
                let h = (1.0 / (1.5 * nu)).min(2.0 * r / ctx.quadrature.points as f64);
                let k = (r / h).ceil() as usize;
                let run = |h: f64, k: usize| -> Result<(C64, f64)> {
                    let grid = Grid { dim, extent: h * k as f64, spacing: h };
                    let mut s = c(0.0, 0.0);
                    let mut mass = 0.0;
                    for y in grid.nodes() {
                        let fy = gs.eval(&y);
                        s += fy * self.phase(g, x, &y);
                        mass += fy.norm();
                    }
                    Ok((s * h.powi(dim as i32), mass * h.powi(dim as i32)))
                };
                let (a, mass) = run(h, k)?;
                let (b, _) = run(h * 0.8, (r / (h * 0.8)).ceil() as usize)?;
                (a, b, mass)
            }
        };
        if (fine - coarse).norm() > DIVERGENCE_TOL * scale.max(1.0) {
            return Err(Error::Accuracy(format!("quadrature divergence estimate {:.3e} at x = {x:?}", (fine - coarse).norm())));
        }
        Ok(fine * pref)
    }
}

fn check_det1(g: &Sl2) -> Result<()> {
    if (g.determinant() - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!("det = {} is not 1", g.determinant())));
    }
    Ok(())
}

/// Actions (12.10)-(12.13) of the generators `h_t`, `t(b;t)`, `g(alpha;t)`, `sigma_{n;t}`.
pub fn weil_generator_action(gen: &WeilGenerator, f: &GridFunction, ctx: &ThetaContext) -> Result<GridFunction> {
    ctx.check(f)?;
    let t = gen.torus();
    let out = match gen {
        WeilGenerator::H { h, .. } => schrodinger_action(h, f, ctx)?,
        WeilGenerator::T { b, .. } => {
            if b.shape() != (f.n, f.n) {
                return Err(crate::error::dim("b must be n x n"));
            }
            let k = kron_sym(ctx.mmat(), &crate::linalg::sym_r(b));
            map_quadratic(f, &k, None, 1.0)?
        }
        WeilGenerator::G { alpha, .. } => {
            if alpha.shape() != (f.n, f.n) {
                return Err(crate::error::dim("alpha must be n x n"));
            }
            let da = det_r(alpha);
            if da.abs() < 1e-14 {
                return Err(Error::Domain("alpha must be invertible".into()));
            }
            let l = RMatrix::from_fn(f.dim(), f.dim(), |r, s| if r / f.n == s / f.n { alpha[(r % f.n, s % f.n)] } else { 0.0 });
            map_quadratic(f, &RMatrix::zeros(f.dim(), f.dim()), Some(&l), da.abs().powf(f.m as f64 / 2.0))?
        }
        WeilGenerator::Sigma { .. } => weil_sl2_matrix_action(&S_MATRIX, f, ctx)?,
    };
    Ok(scale(out, t))
}

/// `s e^{pi i x^t K x} f(L x)`
fn map_quadratic(f: &GridFunction, k: &RMatrix, l: Option<&RMatrix>, s: f64) -> Result<GridFunction> {
    let d = f.dim();
    let id = RMatrix::identity(d, d);
    let l = l.unwrap_or(&id);
    match &f.repr {
        Repr::Gaussian(gs) => {
            let lc = to_complex(l);
            Ok(GridFunction {
                m: f.m,
                n: f.n,
                repr: Repr::Gaussian(Gaussian {
                    q: lc.transpose() * &gs.q * &lc + to_complex(k),
                    b: lc.transpose() * &gs.b,
                    coef: gs.coef * s,
                }),
            })
        }
        Repr::Sampled { grid, .. } => {
            let samples = grid
                .nodes()
                .map(|x| {
                    let lx: Vec<f64> = (0..d).map(|i| (0..d).map(|j| l[(i, j)] * x[j]).sum()).collect();
                    f.eval(&lx).map(|v| v * s * c(0.0, PI * norm_m(k, &x)).exp())
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(GridFunction { m: f.m, n: f.n, repr: Repr::Sampled { grid: *grid, samples } })
        }
    }
}

fn scale(f: GridFunction, t: C64) -> GridFunction {
    let repr = match f.repr {
        Repr::Gaussian(mut g) => {
            g.coef *= t;
            Repr::Gaussian(g)
        }
        Repr::Sampled { grid, samples } => Repr::Sampled { grid, samples: samples.into_iter().map(|v| v * t).collect() },
    };
    GridFunction { m: f.m, n: f.n, repr }
}

/// `g h g^{-1} = ((lambda, mu) g^{-1}; kappa)`
pub fn conjugate_heisenberg(sp: &crate::groups::SymplecticElement, h: &HeisenbergElement) -> HeisenbergElement {
    let gi = sp.inverse();
    HeisenbergElement {
        lambda: &h.lambda * gi.a() + &h.mu * gi.c(),
        mu: &h.lambda * gi.b() + &h.mu * gi.d(),
        kappa: h.kappa.clone(),
    }
}

/// Sup-norm residual of `R_M(g) W_M(h) f = W_M(g h g^{-1}) R_M(g) f` on a
/// check grid. For a Heisenberg generator the conjugation is taken inside the
/// Heisenberg group. Sampled inputs are compared on their own grid minus the
/// margin the shifts need.
pub fn stone_von_neumann_check(gen: &WeilGenerator, h: &HeisenbergElement, f: &GridFunction, ctx: &ThetaContext) -> Result<f64> {
    let sp = gen.symplectic(f.n)?;
    let conj = match gen {
        WeilGenerator::H { h: h0, .. } => {
            crate::groups::heisenberg_multiply(&crate::groups::heisenberg_multiply(h0, h)?, &h0.inverse())?
        }
        _ => conjugate_heisenberg(&sp, h),
    };
    let lhs = weil_generator_action(gen, &schrodinger_action(h, f, ctx)?, ctx)?;
    let rhs = schrodinger_action(&conj, &weil_generator_action(gen, f, ctx)?, ctx)?;
    let grid = match f.grid() {
        Some(g) => g,
        None => Grid::new(f.dim(), 3.0, if f.dim() <= 2 { 0.25 } else { 1.0 })?,
    };
    let shift = flatten(&h.lambda).iter().chain(flatten(&conj.lambda).iter()).fold(0.0f64, |a, t| a.max(t.abs()));
    let margin = if f.grid().is_some() { shift * (1.0 + sp.mat().abs().max()) } else { 0.0 };
    let mut res = 0.0f64;
    for x in grid.nodes() {
        if x.iter().any(|t| t.abs() > grid.extent - margin) {
            continue;
        }
        res = res.max((lhs.eval(&x)? - rhs.eval(&x)?).norm());
    }
    Ok(res)
}

/// Iwasawa coordinates `(tau, phi) = (u + iv, phi)` of `N(u) A(v) K(phi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SL2Coord {
    tau: C64,
    phi: f64,
}

impl SL2Coord {
    /// `phi` is reduced to `[0, 2 pi)`.
    pub fn new(tau: C64, phi: f64) -> Result<Self> {
        if !(tau.im > 0.0) || !tau.re.is_finite() || !phi.is_finite() {
            return Err(Error::Domain("SL2 coordinate needs Im tau > 0 and finite phi".into()));
        }
        Ok(SL2Coord { tau, phi: reduce_angle(phi) })
    }

    pub fn tau(&self) -> C64 {
        self.tau
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn u(&self) -> f64 {
        self.tau.re
    }

    pub fn v(&self) -> f64 {
        self.tau.im
    }

    /// `N(u) A(v) K(phi)`
    pub fn matrix(&self) -> Sl2 {
        let (u, v) = (self.u(), self.v());
        let n = Sl2::new(1.0, u, 0.0, 1.0);
        let a = Sl2::new(v.sqrt(), 0.0, 0.0, 1.0 / v.sqrt());
        let (s, co) = self.phi.sin_cos();
        n * a * Sl2::new(co, -s, s, co)
    }
}

fn reduce_angle(phi: f64) -> f64 {
    let r = phi.rem_euclid(2.0 * PI);
    if r >= 2.0 * PI {
        0.0
    } else {
        r
    }
}

/// `u = (ac + bd)/(c^2 + d^2)`, `v = 1/(c^2 + d^2)`, `phi = atan2(c, d)`.
pub fn iwasawa(g: &Sl2) -> Result<SL2Coord> {
    check_det1(g)?;
    let (a, b, cc, d) = (g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)]);
    let r = cc * cc + d * d;
    SL2Coord::new(c((a * cc + b * d) / r, 1.0 / r), cc.atan2(d))
}

/// Coordinates of `g1 g2` from those of `g1` and `g2`.
pub fn iwasawa_compose(g1: &SL2Coord, g2: &SL2Coord) -> Result<SL2Coord> {
    let (u1, v1, p1) = (g1.u(), g1.v(), g1.phi);
    let (u2, v2, p2) = (g2.u(), g2.v(), g2.phi);
    let (s1, c1) = p1.sin_cos();
    let (s2, c2) = p2.sin_cos();
    let den = (u2 * s1 + c1).powi(2) + (v2 * s1).powi(2);
    let a = u1 * (u2 * s1 + c1).powi(2)
        + (u1 * v2 * v2 - v1 * u2) * s1 * s1
        + v1 * u2 * c1 * c1
        + v1 * (u2 * u2 + v2 * v2 - 1.0) * s1 * c1;
    let num3 = (v2 * c2 + u2 * s2) * s1 + s2 * c1;
    let den3 = (-v2 * s2 + u2 * c2) * s1 + c2 * c1;
    SL2Coord::new(c(a / den, v1 * v2 / den), num3.atan2(den3))
}

/// `(a b; c d) . (tau, phi) = ((a tau + b)/(c tau + d), phi + arg(c tau + d))`
pub fn sl2_act_coord(g: &Sl2, x: &SL2Coord) -> Result<SL2Coord> {
    check_det1(g)?;
    let (a, b, cc, d) = (g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)]);
    let den = x.tau * cc + d;
    SL2Coord::new((x.tau * a + b) / den, x.phi + den.arg())
}

fn sign(x: f64) -> i32 {
    if x.abs() <= 1e-12 {
        0
    } else if x > 0.0 {
        1
    } else {
        -1
    }
}

/// `c_M(M1, M2) = e^{-i pi mn sign(c1 c2 c3)/4}`, `M3 = M1 M2`.
pub fn cocycle(m1: &Sl2, m2: &Sl2, m: usize, n: usize) -> Result<C64> {
    check_det1(m1)?;
    check_det1(m2)?;
    let m3 = m1 * m2;
    let s = sign(m1[(1, 0)]) * sign(m2[(1, 0)]) * sign(m3[(1, 0)]);
    Ok(c(0.0, -PI * (m * n) as f64 * s as f64 / 4.0).exp())
}

fn check_angle(p: f64) -> Result<()> {
    if [0.0, PI, 2.0 * PI].iter().any(|t| (p - t).abs() < ILL_CONDITIONED) {
        return Err(Error::Numeric(format!("phi = {p} is within 1e-6 of a multiple of pi: ill-conditioned kernel")));
    }
    Ok(())
}

/// `R_M(i, phi)`: identity, parity, or the oscillatory kernel.
pub fn weil_rotation(phi: f64, f: &GridFunction, ctx: &ThetaContext) -> Result<GridFunction> {
    let p = reduce_angle(phi);
    if p == 0.0 {
        return Ok(f.clone());
    }
    if p == PI {
        return dilate_chirp(f, &ctx.check(f)?, -1.0, 0.0);
    }
    check_angle(p)?;
    let (s, co) = p.sin_cos();
    weil_sl2_matrix_action(&Sl2::new(co, -s, s, co), f, ctx)
}

/// `[R_M(tau, phi) f](x) = v^{mn/4} e^{pi i u ||x||^2} [R_M(i, phi) f](v^{1/2} x)`
pub fn weil_sl2_action(x: &SL2Coord, f: &GridFunction, ctx: &ThetaContext) -> Result<GridFunction> {
    let rf = weil_rotation(x.phi, f, ctx)?;
    let v = x.v();
    dilate_chirp(&rf, &ctx.check(f)?, v.sqrt(), x.u())
}

/// `R_M(i, phi) f` evaluated at one point.
fn rotated_at(phi: f64, f: &GridFunction, x: &[f64], ctx: &ThetaContext) -> Result<C64> {
    let p = reduce_angle(phi);
    match (&f.repr, ctx.quadrature.rule) {
        (Repr::Sampled { .. }, _) | (Repr::Gaussian(_), QuadratureRule::Trapezoid) if p != 0.0 && p != PI => {
            check_angle(p)?;
            let (s, co) = p.sin_cos();
            let k = SlKernel { a: co, c: s, d: co, det_m_pow: ctx.det_m().powf(f.n as f64 / 2.0) };
            k.quadrature(f, &ctx.check(f)?, x, ctx)
        }
        _ => weil_rotation(p, f, ctx)?.eval(x),
    }
}

/// Sum without the central prefactor:
/// `v^{mn/4} sum_w e^{pi i (u ||w+l||^2 + 2 (w, mu))} [R(i,phi) f](v^{1/2}(w + l))`.
pub fn theta_sum_reduced(f: &GridFunction, ctx: &ThetaContext, x: &SL2Coord, lambda: &RMatrix, mu: &RMatrix) -> Result<C64> {
    let g = ctx.check(f)?;
    let (m, n) = (f.m, f.n);
    if lambda.shape() != (m, n) || mu.shape() != (m, n) {
        return Err(crate::error::dim("lambda and mu must be m x n"));
    }
    let d = m * n;
    let (u, v) = (x.u(), x.v());
    let l = flatten(lambda);
    let muf = flatten(mu);
    let rot = match (&f.repr, ctx.quadrature.rule) {
        (Repr::Gaussian(_), QuadratureRule::GaussianExact) => Some(weil_rotation(x.phi, f, ctx)?),
        _ => None,
    };
    let term = |w: &[i64]| -> Result<C64> {
        let wl: Vec<f64> = w.iter().zip(&l).map(|(&a, b)| a as f64 + b).collect();
        let wf: Vec<f64> = w.iter().map(|&a| a as f64).collect();
        let xy: f64 = (0..d).map(|i| (0..d).map(|j| wf[i] * g[(i, j)] * muf[j]).sum::<f64>()).sum();
        let ph = c(0.0, PI * (u * norm_m(&g, &wl) + 2.0 * xy)).exp();
        let arg: Vec<f64> = wl.iter().map(|t| v.sqrt() * t).collect();
        let val = match &rot {
            Some(r) => r.eval(&arg)?,
            None => rotated_at(x.phi, f, &arg, ctx)?,
        };
        Ok(ph * val)
    };
    let radius = match &rot {
        Some(r) => Some(tail_radius(r.as_gaussian().expect("Gaussian rotation"), v, &l, ctx.n_cut)?),
        None => None,
    };
    let mut total = term(&vec![0; d])?;
    for k in 1..=ctx.n_cut {
        let shell: C64 = shell_points(d, k as i64).iter().map(|w| term(w)).sum::<Result<C64>>()?;
        total += shell;
        match radius {
            Some(r) if k >= r => return Ok(total * v.powf(d as f64 / 4.0)),
            None if shell.norm() < TAIL_TOL * 1e-1 && k >= 2 => return Ok(total * v.powf(d as f64 / 4.0)),
            _ => {}
        }
    }
    Err(Error::Accuracy(format!("theta sum tail not below 1e-12 within N_cut = {}", ctx.n_cut)))
}

/// Points of `Z^d` with sup-norm exactly `k`.
fn shell_points(d: usize, k: i64) -> Vec<Vec<i64>> {
    let mut out = vec![];
    let side = (2 * k + 1) as usize;
    let total = side.pow(d as u32);
    for mut i in 0..total {
        let mut w = vec![0i64; d];
        for a in (0..d).rev() {
            w[a] = (i % side) as i64 - k;
            i /= side;
        }
        if w.iter().any(|t| t.abs() == k) {
            out.push(w);
        }
    }
    out
}

/// Smallest shell radius `N` whose analytic tail bound for the Gaussian
/// `F(v^{1/2}(w + l))` is below `1e-12`.
fn tail_radius(fr: &Gaussian, v: f64, l: &[f64], n_cut: usize) -> Result<usize> {
    let (lmin, _) = im_spectrum(&fr.q)?;
    let bi = fr.b.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
    let d = l.len() as i32;
    let linf = l.iter().fold(0.0f64, |a, t| a.max(t.abs()));
    let bound = |r: f64| fr.coef.norm() * (-PI * (lmin * r * r - 2.0 * bi * r)).exp();
    let peak = bi / lmin;
    for nn in 1..=n_cut {
        let mut tail = 0.0;
        let mut ok = true;
        for k in nn + 1..nn + 200 {
            let r = v.sqrt() * (k as f64 - linf);
            if r <= peak {
                ok = false;
                break;
            }
            let count = ((2 * k + 1) as f64).powi(d) - ((2 * k - 1) as f64).powi(d);
            let t = count * bound(r);
            tail += t;
            if t < 1e-30 {
                break;
            }
        }
        if ok && tail * v.powf(d as f64 / 4.0) < TAIL_TOL {
            return Ok(nn);
        }
    }
    Err(Error::Accuracy(format!("theta tail bound needs more than N_cut = {n_cut} shells")))
}

/// `Theta_f^{[M]}(tau, phi; lambda, mu, kappa)` with central factor `e^{pi i sigma(M(kappa + mu lambda^t))}`.
pub fn theta_sum(f: &GridFunction, ctx: &ThetaContext, x: &SL2Coord, h: &HeisenbergElement) -> Result<C64> {
    let central = (ctx.mmat() * (&h.kappa + &h.mu * h.lambda.transpose())).trace();
    Ok(theta_sum_reduced(f, ctx, x, &h.lambda, &h.mu)? * c(0.0, PI * central).exp())
}

/// Both sides of a transformation law and `|lhs - rhs| / (1 + |rhs|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LawCheck {
    pub lhs: C64,
    pub rhs: C64,
    pub residual: f64,
}

impl LawCheck {
    pub fn new(lhs: C64, rhs: C64) -> Self {
        LawCheck { lhs, rhs, residual: (lhs - rhs).norm() / (1.0 + rhs.norm()) }
    }
}

pub const S_MATRIX: Sl2 = Sl2::new(0.0, -1.0, 1.0, 0.0);
pub const T_STAR: Sl2 = Sl2::new(1.0, 2.0, 0.0, 1.0);

/// `c_M(S, (tau, phi)) = e^{-i pi mn sign(sin phi sin(phi + arg tau))/4}`, the
/// cocycle (12.16) of the pair `(S, N(u)A(v)K(phi))`.
pub fn jacobi1_constant(x: &SL2Coord, m: usize, n: usize) -> C64 {
    let s = sign(x.phi.sin() * (x.phi + x.tau.arg()).sin());
    c(0.0, -PI * (m * n) as f64 * s as f64 / 4.0).exp()
}

/// The constant `e^{i pi mn sign(sin phi sin(phi + arg tau))}` as printed.
pub fn jacobi1_constant_literal(x: &SL2Coord, m: usize, n: usize) -> C64 {
    let s = sign(x.phi.sin() * (x.phi + x.tau.arg()).sin());
    c(0.0, PI * (m * n) as f64 * s as f64).exp()
}

/// `Theta(-1/tau, phi + arg tau; -mu, lambda, kappa)` against
/// `(det M)^{-n/2} c_M(S, (tau, phi)) Theta(tau, phi; lambda, mu, kappa)`.
pub fn jacobi1_check(f: &GridFunction, ctx: &ThetaContext, x: &SL2Coord, h: &HeisenbergElement) -> Result<LawCheck> {
    require_integral(ctx)?;
    let y = sl2_act_coord(&S_MATRIX, x)?;
    let h1 = HeisenbergElement { lambda: -&h.mu, mu: h.lambda.clone(), kappa: h.kappa.clone() };
    let lhs = theta_sum(f, ctx, &y, &h1)?;
    let rhs = theta_sum(f, ctx, x, h)? * ctx.det_m().powf(-(f.n as f64) / 2.0) * jacobi1_constant(x, f.m, f.n);
    Ok(LawCheck::new(lhs, rhs))
}

/// `Theta(tau + 2, phi; lambda, s - 2 lambda + mu, kappa - s lambda^t) = Theta(tau, phi; lambda, mu, kappa)`
pub fn jacobi2_check(f: &GridFunction, ctx: &ThetaContext, x: &SL2Coord, h: &HeisenbergElement, s: &RMatrix) -> Result<LawCheck> {
    require_integral(ctx)?;
    require_integral_mat(s)?;
    let y = SL2Coord::new(x.tau + 2.0, x.phi)?;
    let h1 = HeisenbergElement {
        lambda: h.lambda.clone(),
        mu: s - &h.lambda * 2.0 + &h.mu,
        kappa: &h.kappa - s * h.lambda.transpose(),
    };
    Ok(LawCheck::new(theta_sum(f, ctx, &y, &h1)?, theta_sum(f, ctx, x, h)?))
}

/// `Theta(tau, phi; lambda + l0, mu + m0, kappa + k0 + l0 mu^t - m0 lambda^t)
///  = e^{pi i sigma(M(k0 + m0 l0^t))} Theta(tau, phi; lambda, mu, kappa)` for integral `(l0, m0; k0)`.
pub fn jacobi3_check(
    f: &GridFunction,
    ctx: &ThetaContext,
    x: &SL2Coord,
    h: &HeisenbergElement,
    h0: &HeisenbergElement,
) -> Result<LawCheck> {
    require_integral(ctx)?;
    for a in [&h0.lambda, &h0.mu, &h0.kappa] {
        require_integral_mat(a)?;
    }
    let h1 = HeisenbergElement {
        lambda: &h.lambda + &h0.lambda,
        mu: &h.mu + &h0.mu,
        kappa: &h.kappa + &h0.kappa + &h0.lambda * h.mu.transpose() - &h0.mu * h.lambda.transpose(),
    };
    let phase = c(0.0, PI * (ctx.mmat() * (&h0.kappa + &h0.mu * h0.lambda.transpose())).trace()).exp();
    Ok(LawCheck::new(theta_sum(f, ctx, x, &h1)?, phase * theta_sum(f, ctx, x, h)?))
}

fn require_integral_mat(a: &RMatrix) -> Result<()> {
    if a.iter().any(|x| (x - x.round()).abs() > 1e-12) {
        return Err(Error::Parameter("parameter must be integral".into()));
    }
    Ok(())
}

/// Generators of `Gamma_[2]^{(m,n)}`.
#[derive(Debug, Clone, PartialEq)]
pub enum Gamma2Generator {
    S,
    TStar { s: RMatrix },
    Translation { lambda0: RMatrix, mu0: RMatrix },
}

/// Left action on `(tau, phi; lambda, mu)`: the `SL(2)` part multiplies the
/// Iwasawa matrix, the vector part becomes `(lambda, mu) gamma^{-1} + v0`.
pub fn gamma2_act(gen: &Gamma2Generator, x: &SL2Coord, lambda: &RMatrix, mu: &RMatrix) -> Result<(SL2Coord, RMatrix, RMatrix)> {
    Ok(match gen {
        Gamma2Generator::S => (iwasawa(&(S_MATRIX * x.matrix()))?, -mu, lambda.clone()),
        Gamma2Generator::TStar { s } => {
            require_integral_mat(s)?;
            (iwasawa(&(T_STAR * x.matrix()))?, lambda.clone(), s - lambda * 2.0 + mu)
        }
        Gamma2Generator::Translation { lambda0, mu0 } => {
            require_integral_mat(lambda0)?;
            require_integral_mat(mu0)?;
            (*x, lambda + lambda0, mu + mu0)
        }
    })
}

/// `Theta_f conj(Theta_g)` at a point and at its image under a generator.
pub fn gamma2_check(
    f: &GridFunction,
    g: &GridFunction,
    ctx: &ThetaContext,
    gen: &Gamma2Generator,
    x: &SL2Coord,
    lambda: &RMatrix,
    mu: &RMatrix,
) -> Result<LawCheck> {
    require_integral(ctx)?;
    if (ctx.det_m() - 1.0).abs() > 1e-12 {
        return Err(Error::Parameter("product invariance needs a unimodular M".into()));
    }
    let prod = |x: &SL2Coord, l: &RMatrix, m: &RMatrix| -> Result<C64> {
        Ok(theta_sum_reduced(f, ctx, x, l, m)? * theta_sum_reduced(g, ctx, x, l, m)?.conj())
    };
    let (y, l1, m1) = gamma2_act(gen, x, lambda, mu)?;
    Ok(LawCheck::new(prod(&y, &l1, &m1)?, prod(x, lambda, mu)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{rng, uniform};

    fn ctx1(mv: f64) -> ThetaContext {
        ThetaContext::new(RMatrix::from_element(1, 1, mv), 40).unwrap()
    }

    fn h1(l: f64, m: f64, k: f64) -> HeisenbergElement {
        HeisenbergElement::new(RMatrix::from_element(1, 1, l), RMatrix::from_element(1, 1, m), RMatrix::from_element(1, 1, k))
            .unwrap()
    }

    fn shifted_gaussian() -> GridFunction {
        GridFunction::gaussian(
            1,
            1,
            CMatrix::from_element(1, 1, c(0.3, 1.2)),
            CVector::from_element(1, c(0.2, 0.1)),
            c(0.8, -0.3),
        )
        .unwrap()
    }

    #[test]
    fn schrodinger_examples() {
        let ctx = ctx1(2.0);
        let f = shifted_gaussian();
        let grid = Grid::new(1, 3.0, 0.25).unwrap();
        let k = schrodinger_action(&h1(0.0, 0.0, 0.7), &f, &ctx).unwrap();
        for x in grid.nodes() {
            let want = f.eval(&x).unwrap() * c(0.0, PI * 2.0 * 0.7).exp();
            assert!((k.eval(&x).unwrap() - want).norm() < 1e-14);
        }
        let s = schrodinger_action(&h1(0.4, 0.0, 0.0), &f, &ctx).unwrap();
        for x in grid.nodes() {
            assert!((s.eval(&x).unwrap() - f.eval(&[x[0] + 0.4]).unwrap()).norm() < 1e-14);
        }
        let mut r = rng(3);
        for _ in 0..10 {
            let a = h1(uniform(&mut r, -1.0, 1.0), uniform(&mut r, -1.0, 1.0), uniform(&mut r, -1.0, 1.0));
            let b = h1(uniform(&mut r, -1.0, 1.0), uniform(&mut r, -1.0, 1.0), uniform(&mut r, -1.0, 1.0));
            let ab = crate::groups::heisenberg_multiply(&a, &b).unwrap();
            let lhs = schrodinger_action(&ab, &f, &ctx).unwrap();
            let rhs = schrodinger_action(&a, &schrodinger_action(&b, &f, &ctx).unwrap(), &ctx).unwrap();
            for x in grid.nodes() {
                let (p, q) = (lhs.eval(&x).unwrap(), rhs.eval(&x).unwrap());
                assert!((p - q).norm() <= 1e-10 * (1.0 + q.norm()));
            }
        }
        let sampled = f.sample(Grid::new(1, 6.0, 0.05).unwrap()).unwrap();
        let ss = schrodinger_action(&h1(0.5, 0.3, 0.0), &sampled, &ctx).unwrap();
        let gs = schrodinger_action(&h1(0.5, 0.3, 0.0), &f, &ctx).unwrap();
        assert!(ss.sup_distance(&gs, &grid).unwrap() < 1e-10);
        assert!(schrodinger_action(&h1(7.0, 0.0, 0.0), &sampled, &ctx).is_err());
    }

    #[test]
    fn generator_examples() {
        let ctx = ctx1(1.0);
        let f = shifted_gaussian();
        let grid = Grid::new(1, 3.0, 0.25).unwrap();
        let g = weil_generator_action(&WeilGenerator::G { alpha: RMatrix::from_element(1, 1, 2.0), t: c(1.0, 0.0) }, &f, &ctx)
            .unwrap();
        for x in grid.nodes() {
            assert!((g.eval(&x).unwrap() - f.eval(&[2.0 * x[0]]).unwrap() * 2f64.sqrt()).norm() < 1e-14);
        }
        let t = weil_generator_action(&WeilGenerator::T { b: RMatrix::zeros(1, 1), t: c(1.0, 0.0) }, &f, &ctx).unwrap();
        assert!(t.sup_distance(&f, &grid).unwrap() < 1e-15);
        let std = GridFunction::standard_gaussian(ctx.mmat(), 1);
        let s = weil_generator_action(&WeilGenerator::Sigma { t: c(1.0, 0.0) }, &std, &ctx).unwrap();
        assert!(s.sup_distance(&std, &grid).unwrap() < 1e-14);
        // quadrature route for the self-duality
        let sampled = std.sample(Grid::new(1, 6.0, 0.05).unwrap()).unwrap();
        let sq = weil_generator_action(&WeilGenerator::Sigma { t: c(1.0, 0.0) }, &sampled, &ctx).unwrap();
        assert!(sq.sup_distance(&std, &grid).unwrap() < 1e-8);
    }

    #[test]
    fn kernel_closed_form_matches_quadrature() {
        let mut r = rng(4);
        for mv in [1.0, 2.0] {
            let ctx = ctx1(mv);
            let qctx = ctx.clone().with_quadrature(Quadrature { rule: QuadratureRule::Trapezoid, points: 256 });
            let f = shifted_gaussian();
            for phi in [0.4, PI / 2.0, 2.0, 4.0, 5.5] {
                let exact = weil_rotation(phi, &f, &ctx).unwrap();
                for _ in 0..4 {
                    let x = [uniform(&mut r, -2.0, 2.0)];
                    let q = rotated_at(phi, &f, &x, &qctx).unwrap();
                    assert!((q - exact.eval(&x).unwrap()).norm() < 1e-8, "phi {phi}: {q} vs {}", exact.eval(&x).unwrap());
                }
            }
        }
        // two-dimensional: m = 2, n = 1
        let mm = RMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]);
        let ctx = ThetaContext::new(mm, 20).unwrap();
        let qctx = ctx.clone().with_quadrature(Quadrature { rule: QuadratureRule::Trapezoid, points: 64 });
        let f = GridFunction::gaussian(
            2,
            1,
            CMatrix::from_row_slice(2, 2, &[c(0.2, 1.0), c(0.1, 0.2), c(0.1, 0.2), c(-0.1, 0.9)]),
            CVector::from_vec(vec![c(0.1, 0.0), c(0.0, 0.1)]),
            c(1.0, 0.0),
        )
        .unwrap();
        let exact = weil_rotation(1.0, &f, &ctx).unwrap();
        let x = [0.3, -0.2];
        let q = rotated_at(1.0, &f, &x, &qctx).unwrap();
        assert!((q - exact.eval(&x).unwrap()).norm() < 1e-8);
    }

    #[test]
    fn fourier_rotation_matches_summation() {
        // R(i, pi/2) against a direct Riemann sum of the Fourier integral
        let ctx = ctx1(1.0);
        let f = shifted_gaussian();
        let rf = weil_rotation(PI / 2.0, &f, &ctx).unwrap();
        for x in [-1.0, 0.0, 0.7, 2.0] {
            let h = 0.01;
            let sum: C64 = (-1200..=1200)
                .map(|k| {
                    let y = k as f64 * h;
                    f.eval(&[y]).unwrap() * c(0.0, -2.0 * PI * x * y).exp() * h
                })
                .sum();
            assert!((sum - rf.eval(&[x]).unwrap()).norm() < 1e-6);
        }
    }

    #[test]
    fn rotation_special_cases() {
        let ctx = ctx1(1.0);
        let f = shifted_gaussian();
        let grid = Grid::new(1, 3.0, 0.25).unwrap();
        let id = weil_sl2_action(&SL2Coord::new(c(0.0, 1.0), 0.0).unwrap(), &f, &ctx).unwrap();
        assert!(id.sup_distance(&f, &grid).unwrap() < 1e-15);
        let par = weil_sl2_action(&SL2Coord::new(c(0.0, 1.0), PI).unwrap(), &f, &ctx).unwrap();
        for x in grid.nodes() {
            assert!((par.eval(&x).unwrap() - f.eval(&[-x[0]]).unwrap()).norm() < 1e-15);
        }
        assert!(weil_rotation(1e-8, &f, &ctx).is_err());
        assert!(weil_rotation(PI + 1e-7, &f, &ctx).is_err());
    }

    #[test]
    fn stone_von_neumann() {
        let mut r = rng(5);
        for mv in [1.0, 3.0] {
            let ctx = ctx1(mv);
            let f = shifted_gaussian();
            let gens = [
                WeilGenerator::H { h: h1(0.3, 0.2, 0.1), t: c(1.0, 0.0) },
                WeilGenerator::T { b: RMatrix::from_element(1, 1, 0.7), t: c(0.0, 1.0) },
                WeilGenerator::G { alpha: RMatrix::from_element(1, 1, -1.5), t: c(1.0, 0.0) },
                WeilGenerator::Sigma { t: c(1.0, 0.0) },
            ];
            for gen in &gens {
                for _ in 0..5 {
                    let h = h1(uniform(&mut r, -1.0, 1.0), uniform(&mut r, -1.0, 1.0), uniform(&mut r, -1.0, 1.0));
                    let res = stone_von_neumann_check(gen, &h, &f, &ctx).unwrap();
                    assert!(res < 1e-10, "{gen:?} {res}");
                }
            }
        }
        let ctx = ctx1(1.0);
        let sampled = GridFunction::standard_gaussian(ctx.mmat(), 1).sample(Grid::new(1, 6.0, 0.05).unwrap()).unwrap();
        let res = stone_von_neumann_check(&WeilGenerator::Sigma { t: c(1.0, 0.0) }, &h1(0.0, 0.6, 0.0), &sampled, &ctx).unwrap();
        assert!(res < 1e-6, "{res}");
        // two-dimensional Gaussian calculus, m = 1, n = 2
        let ctx = ThetaContext::new(RMatrix::from_element(1, 1, 2.0), 20).unwrap();
        let f = GridFunction::gaussian(
            1,
            2,
            CMatrix::from_row_slice(2, 2, &[c(0.2, 1.0), c(0.1, 0.2), c(0.1, 0.2), c(-0.1, 0.9)]),
            CVector::from_vec(vec![c(0.1, 0.0), c(0.0, 0.1)]),
            c(1.0, 0.0),
        )
        .unwrap();
        let h = HeisenbergElement::new(
            RMatrix::from_row_slice(1, 2, &[0.3, -0.2]),
            RMatrix::from_row_slice(1, 2, &[0.5, 0.1]),
            RMatrix::from_element(1, 1, 0.2),
        )
        .unwrap();
        for gen in [
            WeilGenerator::T { b: RMatrix::from_row_slice(2, 2, &[0.5, 0.2, 0.2, -0.3]), t: c(1.0, 0.0) },
            WeilGenerator::G { alpha: RMatrix::from_row_slice(2, 2, &[1.0, 0.5, -0.2, 1.3]), t: c(1.0, 0.0) },
            WeilGenerator::Sigma { t: c(1.0, 0.0) },
        ] {
            assert!(stone_von_neumann_check(&gen, &h, &f, &ctx).unwrap() < 1e-10);
        }
    }

    fn sl2(a: f64, b: f64, cc: f64, d: f64) -> Sl2 {
        Sl2::new(a, b, cc, d)
    }

    fn rand_sl2(r: &mut crate::random::SjRng) -> Sl2 {
        SL2Coord::new(c(uniform(r, -2.0, 2.0), uniform(r, 0.2, 3.0)), uniform(r, 0.0, 2.0 * PI)).unwrap().matrix()
    }

    #[test]
    fn iwasawa_examples() {
        let d = iwasawa(&sl2(2.0, 0.0, 0.0, 0.5)).unwrap();
        assert!((d.u() - 0.0).abs() < 1e-15 && (d.v() - 4.0).abs() < 1e-14 && d.phi() == 0.0);
        let s = iwasawa(&S_MATRIX).unwrap();
        assert!(s.u().abs() < 1e-15 && (s.v() - 1.0).abs() < 1e-15 && (s.phi() - PI / 2.0).abs() < 1e-15);
        let mut r = rng(6);
        for _ in 0..50 {
            let g = rand_sl2(&mut r);
            let back = iwasawa(&g).unwrap().matrix();
            assert!((back - g).abs().max() < 1e-12);
        }
        assert!(iwasawa(&sl2(1.0, 1.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn composition_matches_multiplication() {
        let mut r = rng(7);
        for _ in 0..100 {
            let (g1, g2) = (rand_sl2(&mut r), rand_sl2(&mut r));
            let (c1, c2) = (iwasawa(&g1).unwrap(), iwasawa(&g2).unwrap());
            let c3 = iwasawa_compose(&c1, &c2).unwrap();
            let direct = iwasawa(&(g1 * g2)).unwrap();
            assert!((c3.tau() - direct.tau()).norm() < 1e-10);
            assert!((c3.phi().tan() - direct.phi().tan()).abs() < 1e-10 * (1.0 + direct.phi().tan().abs()));
            assert!((c3.matrix() - g1 * g2).abs().max() < 1e-10);
            // action on (tau, phi) agrees with left multiplication
            let act = sl2_act_coord(&g1, &c2).unwrap();
            assert!((act.matrix() - g1 * g2).abs().max() < 1e-10);
        }
        let id = SL2Coord::new(c(0.0, 1.0), 0.0).unwrap();
        let c1 = SL2Coord::new(c(0.3, 0.7), 1.1).unwrap();
        let c3 = iwasawa_compose(&c1, &id).unwrap();
        assert!((c3.tau() - c1.tau()).norm() < 1e-14 && (c3.phi() - c1.phi()).abs() < 1e-14);
    }

    #[test]
    fn literal_composition_term_fails() {
        // A with (u1 v2 - v1 u2) sin^2 phi1 as printed
        let c1 = SL2Coord::new(c(0.3, 0.7), 1.1).unwrap();
        let c2 = SL2Coord::new(c(-0.4, 1.9), 2.3).unwrap();
        let (u1, v1, p1) = (c1.u(), c1.v(), c1.phi());
        let (u2, v2) = (c2.u(), c2.v());
        let (s1, co1) = p1.sin_cos();
        let den = (u2 * s1 + co1).powi(2) + (v2 * s1).powi(2);
        let a = u1 * (u2 * s1 + co1).powi(2)
            + (u1 * v2 - v1 * u2) * s1 * s1
            + v1 * u2 * co1 * co1
            + v1 * (u2 * u2 + v2 * v2 - 1.0) * s1 * co1;
        let direct = iwasawa(&(c1.matrix() * c2.matrix())).unwrap();
        assert!((a / den - direct.u()).abs() > 1e-3);
    }

    /// `R(M1 M2) f = c R(M1) R(M2) f` read off at a point.
    fn weil_ratio(m1: &Sl2, m2: &Sl2, ctx: &ThetaContext, f: &GridFunction) -> C64 {
        let lhs = weil_sl2_matrix_action(&(m1 * m2), f, ctx).unwrap();
        let rhs = weil_sl2_matrix_action(m1, &weil_sl2_matrix_action(m2, f, ctx).unwrap(), ctx).unwrap();
        let x = [0.37];
        lhs.eval(&x).unwrap() / rhs.eval(&x).unwrap()
    }

    #[test]
    fn cocycle_table() {
        let ctx = ctx1(1.0);
        let f = shifted_gaussian();
        let s = S_MATRIX;
        let gens = [
            s,
            s.try_inverse().unwrap(),
            sl2(1.0, 1.0, 0.0, 1.0),
            sl2(1.0, -1.0, 0.0, 1.0),
            sl2(1.0, 0.0, 1.0, 1.0),
            sl2(1.0, 0.0, -1.0, 1.0),
            sl2(-1.0, 0.0, 0.0, -1.0),
            sl2(2.0, 0.0, 0.0, 0.5),
        ];
        for a in &gens {
            for b in &gens {
                let cf = cocycle(a, b, 1, 1).unwrap();
                let w = weil_ratio(a, b, &ctx, &f);
                assert!((cf - w).norm() < 1e-10, "{a} {b}: {cf} vs {w}");
            }
        }
        assert_eq!(cocycle(&s, &s, 1, 1).unwrap(), c(1.0, 0.0));
        let z = cocycle(&s, &sl2(1.0, 0.0, 1.0, 1.0), 1, 1).unwrap();
        assert!((z - c(0.0, -PI / 4.0).exp()).norm() < 1e-15);
    }

    fn rand_h(r: &mut crate::random::SjRng) -> HeisenbergElement {
        h1(uniform(r, -1.0, 1.0), uniform(r, -1.0, 1.0), uniform(r, -1.0, 1.0))
    }

    fn rand_coord(r: &mut crate::random::SjRng) -> SL2Coord {
        SL2Coord::new(c(uniform(r, -1.0, 1.0), uniform(r, 0.5, 2.0)), uniform(r, 0.1, 2.0 * PI - 0.1)).unwrap()
    }

    #[test]
    fn theta_base_value() {
        let ctx = ctx1(1.0);
        let f = GridFunction::standard_gaussian(ctx.mmat(), 1);
        let v = theta_sum(&f, &ctx, &SL2Coord::new(c(0.0, 1.0), 0.0).unwrap(), &h1(0.0, 0.0, 0.0)).unwrap();
        let direct: f64 = (-8..=8i32).map(|w| (-PI * (w * w) as f64).exp()).sum();
        assert!((v - c(direct, 0.0)).norm() < 1e-10);
        let k = theta_sum(&f, &ctx, &SL2Coord::new(c(0.0, 1.0), 0.0).unwrap(), &h1(0.0, 0.0, 0.3)).unwrap();
        assert!((k - v * c(0.0, PI * 0.3).exp()).norm() < 1e-14);
    }

    #[test]
    fn jacobi_laws() {
        let mut r = rng(8);
        let f = shifted_gaussian();
        for mv in [1.0, 2.0] {
            let ctx = ctx1(mv);
            for _ in 0..10 {
                let x = rand_coord(&mut r);
                let h = rand_h(&mut r);
                let s = RMatrix::from_element(1, 1, (uniform(&mut r, -3.0, 3.0)).round());
                assert!(jacobi2_check(&f, &ctx, &x, &h, &s).unwrap().residual < 1e-8);
                let h0 = h1(
                    uniform(&mut r, -3.0, 3.0).round(),
                    uniform(&mut r, -3.0, 3.0).round(),
                    uniform(&mut r, -3.0, 3.0).round(),
                );
                assert!(jacobi3_check(&f, &ctx, &x, &h, &h0).unwrap().residual < 1e-8);
            }
        }
        let ctx = ctx1(1.0);
        for _ in 0..10 {
            let x = rand_coord(&mut r);
            let chk = jacobi1_check(&f, &ctx, &x, &rand_h(&mut r)).unwrap();
            assert!(chk.residual < 1e-10, "{chk:?}");
        }
    }

    #[test]
    fn jacobi1_with_quadrature() {
        let mut r = rng(9);
        let ctx = ctx1(1.0).with_quadrature(Quadrature { rule: QuadratureRule::Trapezoid, points: 128 });
        let f = shifted_gaussian();
        let x = rand_coord(&mut r);
        let chk = jacobi1_check(&f, &ctx, &x, &rand_h(&mut r)).unwrap();
        assert!(chk.residual < 1e-3, "{chk:?}");
    }

    #[test]
    fn literal_jacobi1_constant_fails() {
        let ctx = ctx1(1.0);
        let f = shifted_gaussian();
        let x = SL2Coord::new(c(0.3, 1.1), 1.0).unwrap();
        let h = h1(0.2, -0.4, 0.1);
        let chk = jacobi1_check(&f, &ctx, &x, &h).unwrap();
        let literal = chk.rhs / jacobi1_constant(&x, 1, 1) * jacobi1_constant_literal(&x, 1, 1);
        assert!(chk.residual < 1e-10);
        assert!((chk.lhs - literal).norm() / (1.0 + literal.norm()) > 1e-2);
    }

    #[test]
    fn product_invariance() {
        let mut r = rng(10);
        let ctx = ctx1(1.0);
        let f = shifted_gaussian();
        let g = GridFunction::standard_gaussian(ctx.mmat(), 1);
        for _ in 0..5 {
            let x = rand_coord(&mut r);
            let (l, m) = (
                RMatrix::from_element(1, 1, uniform(&mut r, -1.0, 1.0)),
                RMatrix::from_element(1, 1, uniform(&mut r, -1.0, 1.0)),
            );
            for gen in [
                Gamma2Generator::S,
                Gamma2Generator::TStar { s: RMatrix::from_element(1, 1, 2.0) },
                Gamma2Generator::Translation {
                    lambda0: RMatrix::from_element(1, 1, 1.0),
                    mu0: RMatrix::from_element(1, 1, -2.0),
                },
            ] {
                let chk = gamma2_check(&f, &g, &ctx, &gen, &x, &l, &m).unwrap();
                assert!(chk.residual < 1e-8, "{gen:?} {chk:?}");
            }
        }
    }

    #[test]
    fn theta_with_sampled_input() {
        let ctx = ctx1(1.0);
        let f = shifted_gaussian();
        let fs = f.sample(Grid::new(1, 6.0, 0.05).unwrap()).unwrap();
        let x = SL2Coord::new(c(0.2, 0.9), 1.2).unwrap();
        let h = h1(0.3, 0.1, 0.0);
        let a = theta_sum(&f, &ctx, &x, &h).unwrap();
        let b = theta_sum(&fs, &ctx, &x, &h).unwrap();
        assert!((a - b).norm() < 1e-6, "{a} {b}");
    }
}
