//! `Sp(n,R)`, the Heisenberg group `H_R^{(n,m)}`, the Jacobi group
//! `G^J = Sp(n,R) x| H_R^{(n,m)}`, its disk model `G^J_*`, their actions and the
//! embedding `Theta : G^J -> G^J_*`.

use rand::Rng;

use crate::error::{dim, Error, Result};
use crate::linalg::{c, inv, max_abs, max_abs_r, right_div, sym, to_complex, CMatrix, RMatrix};
use crate::random::{rand_real_sym, rand_rmat, rng, SjRng};
use crate::spaces::{DiskPoint, JacobiDiskPoint, JacobiPoint, SiegelPoint};

const GROUP_TOL: f64 = 1e-10;

fn j_n(n: usize) -> RMatrix {
    let mut j = RMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

fn block(a: &RMatrix, b: &RMatrix, cc: &RMatrix, d: &RMatrix) -> RMatrix {
    let n = a.nrows();
    let mut m = RMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((0, n), (n, n)).copy_from(b);
    m.view_mut((n, 0), (n, n)).copy_from(cc);
    m.view_mut((n, n), (n, n)).copy_from(d);
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticElement {
    mat: RMatrix,
}

impl SymplecticElement {
    pub fn new(mat: RMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() || !mat.nrows().is_multiple_of(2) || mat.nrows() == 0 {
            return Err(dim("symplectic matrix must be 2n x 2n"));
        }
        let s = SymplecticElement { mat };
        if s.symplectic_defect() > GROUP_TOL * max_abs_r(&s.mat).powi(2).max(1.0) {
            return Err(Error::Domain(format!("not symplectic (defect {:.2e})", s.symplectic_defect())));
        }
        Ok(s)
    }

    pub fn from_blocks(a: &RMatrix, b: &RMatrix, cc: &RMatrix, d: &RMatrix) -> Result<Self> {
        let n = a.nrows();
        for m in [a, b, cc, d] {
            if m.shape() != (n, n) {
                return Err(dim("symplectic blocks must all be n x n"));
            }
        }
        Self::new(block(a, b, cc, d))
    }

    pub fn identity(n: usize) -> Self {
        SymplecticElement { mat: RMatrix::identity(2 * n, 2 * n) }
    }

    /// `t(b) = (I b; 0 I)`, `b` symmetric.
    pub fn t(b: &RMatrix) -> Result<Self> {
        let n = b.nrows();
        if max_abs_r(&(b - b.transpose())) > GROUP_TOL {
            return Err(Error::Domain("t(b) needs symmetric b".into()));
        }
        let i = RMatrix::identity(n, n);
        Ok(SymplecticElement { mat: block(&i, &crate::linalg::sym_r(b), &RMatrix::zeros(n, n), &i) })
    }

    /// `g(alpha) = (alpha^t 0; 0 alpha^{-1})`
    pub fn g(alpha: &RMatrix) -> Result<Self> {
        let n = alpha.nrows();
        let ai = crate::linalg::inv_r(alpha)?;
        let z = RMatrix::zeros(n, n);
        Ok(SymplecticElement { mat: block(&alpha.transpose(), &z, &z, &ai) })
    }

    /// `sigma_n = (0 -I; I 0)`
    pub fn sigma(n: usize) -> Self {
        let i = RMatrix::identity(n, n);
        let z = RMatrix::zeros(n, n);
        SymplecticElement { mat: block(&z, &(-&i), &i, &z) }
    }

    /// `J_n = (0 I; -I 0)`
    pub fn j(n: usize) -> Self {
        SymplecticElement { mat: j_n(n) }
    }

    pub fn n(&self) -> usize {
        self.mat.nrows() / 2
    }
    pub fn mat(&self) -> &RMatrix {
        &self.mat
    }
    pub fn a(&self) -> RMatrix {
        let n = self.n();
        self.mat.view((0, 0), (n, n)).into_owned()
    }
    pub fn b(&self) -> RMatrix {
        let n = self.n();
        self.mat.view((0, n), (n, n)).into_owned()
    }
    pub fn c(&self) -> RMatrix {
        let n = self.n();
        self.mat.view((n, 0), (n, n)).into_owned()
    }
    pub fn d(&self) -> RMatrix {
        let n = self.n();
        self.mat.view((n, n), (n, n)).into_owned()
    }

    /// `max |M^t J M - J|`
    pub fn symplectic_defect(&self) -> f64 {
        let j = j_n(self.n());
        max_abs_r(&(self.mat.transpose() * &j * &self.mat - j))
    }

    pub fn mul(&self, o: &SymplecticElement) -> Result<Self> {
        if self.n() != o.n() {
            return Err(dim("symplectic degree mismatch"));
        }
        Ok(SymplecticElement { mat: &self.mat * &o.mat })
    }

    /// `(A B; C D)^{-1} = (D^t -B^t; -C^t A^t)`
    pub fn inverse(&self) -> Self {
        SymplecticElement {
            mat: block(&self.d().transpose(), &(-self.b().transpose()), &(-self.c().transpose()), &self.a().transpose()),
        }
    }

    /// `C Omega + D`
    pub fn denominator(&self, omega: &CMatrix) -> CMatrix {
        to_complex(&self.c()) * omega + to_complex(&self.d())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeisenbergElement {
    pub lambda: RMatrix,
    pub mu: RMatrix,
    pub kappa: RMatrix,
}

impl HeisenbergElement {
    pub fn new(lambda: RMatrix, mu: RMatrix, kappa: RMatrix) -> Result<Self> {
        let (m, n) = lambda.shape();
        if mu.shape() != (m, n) || kappa.shape() != (m, m) {
            return Err(dim("Heisenberg element needs lambda, mu m x n and kappa m x m"));
        }
        let h = HeisenbergElement { lambda, mu, kappa };
        let s = &h.kappa + &h.mu * h.lambda.transpose();
        if max_abs_r(&(&s - s.transpose())) > GROUP_TOL * (1.0 + max_abs_r(&s)) {
            return Err(Error::Domain("kappa + mu lambda^t is not symmetric".into()));
        }
        Ok(h)
    }

    pub fn identity(n: usize, m: usize) -> Self {
        HeisenbergElement { lambda: RMatrix::zeros(m, n), mu: RMatrix::zeros(m, n), kappa: RMatrix::zeros(m, m) }
    }

    /// `(lambda, mu; 0)` with the kappa needed for validity absorbed:
    /// kappa is set to the antisymmetric part `-(mu lambda^t - lambda mu^t)/2`.
    pub fn shift(lambda: RMatrix, mu: RMatrix) -> Self {
        let s = &mu * lambda.transpose();
        let kappa = -(&s - s.transpose()) * 0.5;
        HeisenbergElement { lambda, mu, kappa }
    }

    pub fn n(&self) -> usize {
        self.lambda.ncols()
    }
    pub fn m(&self) -> usize {
        self.lambda.nrows()
    }

    pub fn inverse(&self) -> Self {
        let k = -&self.kappa + &self.lambda * self.mu.transpose() - &self.mu * self.lambda.transpose();
        HeisenbergElement { lambda: -&self.lambda, mu: -&self.mu, kappa: k }
    }
}

/// `(lambda+lambda', mu+mu'; kappa+kappa'+lambda mu'^t - mu lambda'^t)`
pub fn heisenberg_multiply(h1: &HeisenbergElement, h2: &HeisenbergElement) -> Result<HeisenbergElement> {
    if h1.lambda.shape() != h2.lambda.shape() {
        return Err(dim("Heisenberg degree mismatch"));
    }
    Ok(HeisenbergElement {
        lambda: &h1.lambda + &h2.lambda,
        mu: &h1.mu + &h2.mu,
        kappa: &h1.kappa + &h2.kappa + &h1.lambda * h2.mu.transpose() - &h1.mu * h2.lambda.transpose(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct JacobiGroupElement {
    pub sp: SymplecticElement,
    pub h: HeisenbergElement,
}

impl JacobiGroupElement {
    pub fn new(sp: SymplecticElement, h: HeisenbergElement) -> Result<Self> {
        if sp.n() != h.n() {
            return Err(dim("symplectic and Heisenberg degrees differ"));
        }
        Ok(JacobiGroupElement { sp, h })
    }

    pub fn identity(n: usize, m: usize) -> Self {
        JacobiGroupElement { sp: SymplecticElement::identity(n), h: HeisenbergElement::identity(n, m) }
    }

    pub fn from_sp(sp: SymplecticElement, m: usize) -> Self {
        let n = sp.n();
        JacobiGroupElement { sp, h: HeisenbergElement::identity(n, m) }
    }

    pub fn from_h(h: HeisenbergElement) -> Self {
        JacobiGroupElement { sp: SymplecticElement::identity(h.n()), h }
    }

    pub fn n(&self) -> usize {
        self.sp.n()
    }
    pub fn m(&self) -> usize {
        self.h.m()
    }

    pub fn inverse(&self) -> Self {
        let mi = self.sp.inverse();
        let (lt, mt) = row_times_sp(&self.h.lambda, &self.h.mu, &mi);
        let kappa = -&self.h.kappa + &lt * mt.transpose() - &mt * lt.transpose();
        JacobiGroupElement { sp: mi, h: HeisenbergElement { lambda: -lt, mu: -mt, kappa } }
    }
}

/// `(lambda, mu) M` split back into its two m x n halves.
fn row_times_sp(lambda: &RMatrix, mu: &RMatrix, m: &SymplecticElement) -> (RMatrix, RMatrix) {
    let lt = lambda * m.a() + mu * m.c();
    let mt = lambda * m.b() + mu * m.d();
    (lt, mt)
}

/// `(M, h)(M', h') = (MM', (l~+l', m~+m'; k+k'+l~ m'^t - m~ l'^t))`, `(l~, m~) = (l, m) M'`.
pub fn jacobi_multiply(g1: &JacobiGroupElement, g2: &JacobiGroupElement) -> Result<JacobiGroupElement> {
    if g1.n() != g2.n() || g1.m() != g2.m() {
        return Err(dim("Jacobi group degree mismatch"));
    }
    let (lt, mt) = row_times_sp(&g1.h.lambda, &g1.h.mu, &g2.sp);
    let kappa = &g1.h.kappa + &g2.h.kappa + &lt * g2.h.mu.transpose() - &mt * g2.h.lambda.transpose();
    Ok(JacobiGroupElement {
        sp: g1.sp.mul(&g2.sp)?,
        h: HeisenbergElement { lambda: lt + &g2.h.lambda, mu: mt + &g2.h.mu, kappa },
    })
}

/// `M . Omega = (A Omega + B)(C Omega + D)^{-1}`
pub fn act_siegel(m: &SymplecticElement, p: &SiegelPoint) -> Result<SiegelPoint> {
    if m.n() != p.n() {
        return Err(dim("act_siegel: degree mismatch"));
    }
    let o = p.omega();
    let num = to_complex(&m.a()) * o + to_complex(&m.b());
    let res = right_div(&num, &m.denominator(o))?;
    Ok(SiegelPoint::raw(sym(&res)))
}

/// `(M . Omega, (Z + lambda Omega + mu)(C Omega + D)^{-1})`
pub fn act_jacobi(g: &JacobiGroupElement, p: &JacobiPoint) -> Result<JacobiPoint> {
    if g.n() != p.n() || g.m() != p.m() {
        return Err(dim("act_jacobi: degree mismatch"));
    }
    let o = p.omega();
    let den_inv = inv(&g.sp.denominator(o))?;
    let num = to_complex(&g.sp.a()) * o + to_complex(&g.sp.b());
    let zn = (p.z() + to_complex(&g.h.lambda) * o + to_complex(&g.h.mu)) * &den_inv;
    Ok(JacobiPoint::raw(sym(&(num * den_inv)), zn))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StarGroupElement {
    pub p: CMatrix,
    pub q: CMatrix,
    pub xi: CMatrix,
    pub kappa: RMatrix,
}

impl StarGroupElement {
    pub fn new(p: CMatrix, q: CMatrix, xi: CMatrix, kappa: RMatrix) -> Result<Self> {
        let n = p.nrows();
        let m = xi.nrows();
        if p.shape() != (n, n) || q.shape() != (n, n) || xi.ncols() != n || kappa.shape() != (m, m) {
            return Err(dim("star element shapes"));
        }
        let s = StarGroupElement { p, q, xi, kappa };
        if s.defect() > GROUP_TOL * (1.0 + max_abs(&s.p).powi(2)) {
            return Err(Error::Domain(format!("star group invariants violated ({:.2e})", s.defect())));
        }
        Ok(s)
    }

    pub fn identity(n: usize, m: usize) -> Self {
        StarGroupElement {
            p: CMatrix::identity(n, n),
            q: CMatrix::zeros(n, n),
            xi: CMatrix::zeros(m, n),
            kappa: RMatrix::zeros(m, m),
        }
    }

    pub fn n(&self) -> usize {
        self.p.nrows()
    }
    pub fn m(&self) -> usize {
        self.xi.nrows()
    }

    /// Largest residual of `P^t conj(P) - conj(Q)^t Q = I` and `P^t conj(Q) = conj(Q)^t P`.
    pub fn defect(&self) -> f64 {
        let n = self.n();
        let pt = self.p.transpose();
        let qbt = self.q.conjugate().transpose();
        let e1 = &pt * self.p.conjugate() - &qbt * &self.q - CMatrix::identity(n, n);
        let e2 = &pt * self.q.conjugate() - &qbt * &self.p;
        max_abs(&e1).max(max_abs(&e2))
    }

    /// `Q conj(W) + conj(P)` style denominator `conj(Q) W + conj(P)`.
    fn denominator(&self, w: &CMatrix) -> CMatrix {
        self.q.conjugate() * w + self.p.conjugate()
    }

    pub fn mul(&self, o: &StarGroupElement) -> Result<Self> {
        star_multiply(self, o)
    }
}

/// Product in `G^J_*`, transported from `G^J` through `Theta`:
/// `P'' = PP' + Q conj(Q')`, `Q'' = PQ' + Q conj(P')`,
/// `xi~ = xi P' + conj(xi) conj(Q')`, `xi'' = xi~ + xi'`,
/// `kappa'' = kappa + kappa' - 4 Im(xi~ xi'^H)`.
pub fn star_multiply(g1: &StarGroupElement, g2: &StarGroupElement) -> Result<StarGroupElement> {
    if g1.n() != g2.n() || g1.m() != g2.m() {
        return Err(dim("star group degree mismatch"));
    }
    let p = &g1.p * &g2.p + &g1.q * g2.q.conjugate();
    let q = &g1.p * &g2.q + &g1.q * g2.p.conjugate();
    let xt = &g1.xi * &g2.p + g1.xi.conjugate() * g2.q.conjugate();
    let cross = &xt * g2.xi.adjoint();
    let kappa = &g1.kappa + &g2.kappa - cross.map(|z| 4.0 * z.im);
    Ok(StarGroupElement { p, q, xi: xt + &g2.xi, kappa })
}

/// `(P W + Q)(conj(Q) W + conj(P))^{-1}`
pub fn act_disk(g: &StarGroupElement, w: &DiskPoint) -> Result<DiskPoint> {
    if g.n() != w.n() {
        return Err(dim("act_disk: degree mismatch"));
    }
    let res = right_div(&(&g.p * w.w() + &g.q), &g.denominator(w.w()))?;
    Ok(DiskPoint::raw(sym(&res)))
}

/// Disk action together with `eta -> (eta + xi W + conj(xi))(conj(Q) W + conj(P))^{-1}`.
pub fn act_jacobi_disk(g: &StarGroupElement, p: &JacobiDiskPoint) -> Result<JacobiDiskPoint> {
    if g.n() != p.n() || g.m() != p.m() {
        return Err(dim("act_jacobi_disk: degree mismatch"));
    }
    let w = p.w();
    let di = inv(&g.denominator(w))?;
    let wn = (&g.p * w + &g.q) * &di;
    let en = (p.eta() + &g.xi * w + g.xi.conjugate()) * di;
    Ok(JacobiDiskPoint::raw(sym(&wn), en))
}

/// `Theta(M, (lambda, mu; kappa))`:
/// `P = ((A+D) + i(B-C))/2`, `Q = ((A-D) - i(B+C))/2`, `xi = (lambda + i mu)/2`.
pub fn embed_star(g: &JacobiGroupElement) -> StarGroupElement {
    let (a, b, cc, d) = (g.sp.a(), g.sp.b(), g.sp.c(), g.sp.d());
    let half = c(0.5, 0.0);
    let p = crate::linalg::from_re_im(&(&a + &d), &(&b - &cc)) * half;
    let q = crate::linalg::from_re_im(&(&a - &d), &(-(&b + &cc))) * half;
    let xi = crate::linalg::from_re_im(&g.h.lambda, &g.h.mu) * half;
    StarGroupElement { p, q, xi, kappa: g.h.kappa.clone() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    Symplectic,
    Heisenberg,
    Jacobi,
    Star,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GroupElement {
    Symplectic(SymplecticElement),
    Heisenberg(HeisenbergElement),
    Jacobi(JacobiGroupElement),
    Star(StarGroupElement),
}

pub const MAX_WORD: usize = 6;

/// One random generator `t(b)`, `g(alpha)` or `sigma_n`.
pub fn random_generator(r: &mut SjRng, n: usize) -> SymplecticElement {
    match r.random_range(0..3) {
        0 => SymplecticElement::t(&rand_real_sym(r, n, 1.0)).expect("symmetric"),
        1 => {
            let alpha = RMatrix::identity(n, n) + rand_rmat(r, n, n, 0.3);
            SymplecticElement::g(&alpha).expect("alpha = I + small is invertible")
        }
        _ => SymplecticElement::sigma(n),
    }
}

/// Product of `len` random generators; `len = 0` gives the identity.
pub fn random_symplectic_word(r: &mut SjRng, n: usize, len: usize) -> SymplecticElement {
    let mut m = SymplecticElement::identity(n);
    for _ in 0..len {
        m = m.mul(&random_generator(r, n)).expect("same degree");
    }
    m
}

pub fn random_symplectic(r: &mut SjRng, n: usize) -> SymplecticElement {
    let len = r.random_range(1..=MAX_WORD);
    random_symplectic_word(r, n, len)
}

/// Entries of lambda, mu in `[-1,1]`; kappa = S - mu lambda^t with S symmetric in `[-1,1]`.
pub fn random_heisenberg(r: &mut SjRng, n: usize, m: usize) -> HeisenbergElement {
    let lambda = rand_rmat(r, m, n, 1.0);
    let mu = rand_rmat(r, m, n, 1.0);
    let s = rand_real_sym(r, m, 1.0);
    let kappa = s - &mu * lambda.transpose();
    HeisenbergElement { lambda, mu, kappa }
}

pub fn random_jacobi(r: &mut SjRng, n: usize, m: usize) -> JacobiGroupElement {
    let sp = random_symplectic(r, n);
    JacobiGroupElement { sp, h: random_heisenberg(r, n, m) }
}

pub fn random_star(r: &mut SjRng, n: usize, m: usize) -> StarGroupElement {
    embed_star(&random_jacobi(r, n, m))
}

pub fn random_element(seed: u64, kind: ElementKind, n: usize, m: usize) -> GroupElement {
    let mut r = rng(seed);
    match kind {
        ElementKind::Symplectic => GroupElement::Symplectic(random_symplectic(&mut r, n)),
        ElementKind::Heisenberg => GroupElement::Heisenberg(random_heisenberg(&mut r, n, m)),
        ElementKind::Jacobi => GroupElement::Jacobi(random_jacobi(&mut r, n, m)),
        ElementKind::Star => GroupElement::Star(random_star(&mut r, n, m)),
    }
}

fn split_top(s: &str, sep: char) -> Vec<String> {
    let mut out = vec![];
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            _ => {}
        }
        if ch == sep && depth == 0 {
            out.push(cur.trim().to_string());
            cur.clear();
        } else {
            cur.push(ch);
        }
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

/// A scalar (meaning `x` times the all-ones or identity pattern) or a JSON array of real rows.
fn parse_real_arg(s: &str, rows: usize, cols: usize, scalar_is_identity: bool) -> Result<RMatrix> {
    let s = s.trim();
    if let Ok(x) = s.parse::<f64>() {
        return Ok(if scalar_is_identity { RMatrix::identity(rows, cols) * x } else { RMatrix::from_element(rows, cols, x) });
    }
    let v: Vec<Vec<f64>> = serde_json::from_str(s).map_err(|e| Error::Parse(format!("bad matrix argument {s:?}: {e}")))?;
    if v.len() != rows || v.iter().any(|r| r.len() != cols) {
        return Err(Error::Parse(format!("argument {s:?} must be {rows}x{cols}")));
    }
    Ok(RMatrix::from_fn(rows, cols, |i, j| v[i][j]))
}

/// Parse a generator word such as `"t(0.5);g(2);s;h(1,0,0)"`.
///
/// `t(b)`, `g(a)`, `s` are the symplectic generators; `h(l,m,k)` is a
/// Heisenberg factor. Scalar arguments of `t`, `g` mean multiples of `I_n`;
/// scalar `l`, `m` fill every entry and scalar `k` means `k I_m` (then
/// corrected to a valid element by adding the needed antisymmetric part).
pub fn parse_word(word: &str, n: usize, m: usize) -> Result<JacobiGroupElement> {
    let mut g = JacobiGroupElement::identity(n, m);
    for tok in split_top(word, ';') {
        let (name, args) = match tok.find('(') {
            Some(i) if tok.ends_with(')') => (tok[..i].trim(), &tok[i + 1..tok.len() - 1]),
            _ => (tok.as_str(), ""),
        };
        let f = match name {
            "t" => JacobiGroupElement::from_sp(SymplecticElement::t(&parse_real_arg(args, n, n, true)?)?, m),
            "g" => JacobiGroupElement::from_sp(SymplecticElement::g(&parse_real_arg(args, n, n, true)?)?, m),
            "s" | "sigma" => JacobiGroupElement::from_sp(SymplecticElement::sigma(n), m),
            "j" | "J" => JacobiGroupElement::from_sp(SymplecticElement::j(n), m),
            "h" => {
                let a = split_top(args, ',');
                if a.len() != 3 {
                    return Err(Error::Parse(format!("h(...) takes three arguments, got {tok:?}")));
                }
                let lambda = parse_real_arg(&a[0], m, n, false)?;
                let mu = parse_real_arg(&a[1], m, n, false)?;
                let k = parse_real_arg(&a[2], m, m, true)?;
                let s = &mu * lambda.transpose();
                let kappa = k - (&s - s.transpose()) * 0.5;
                JacobiGroupElement::from_h(HeisenbergElement::new(lambda, mu, kappa)?)
            }
            "" => continue,
            other => return Err(Error::Parse(format!("unknown generator {other:?}"))),
        };
        g = jacobi_multiply(&g, &f)?;
    }
    Ok(g)
}

/// Uniform interface over the four actions, used by the finite-difference
/// machinery in `metrics` and `diffops`.
pub trait Action<P> {
    fn act(&self, p: &P) -> Result<P>;
}

impl Action<SiegelPoint> for SymplecticElement {
    fn act(&self, p: &SiegelPoint) -> Result<SiegelPoint> {
        act_siegel(self, p)
    }
}

impl Action<JacobiPoint> for JacobiGroupElement {
    fn act(&self, p: &JacobiPoint) -> Result<JacobiPoint> {
        act_jacobi(self, p)
    }
}

impl Action<DiskPoint> for StarGroupElement {
    fn act(&self, p: &DiskPoint) -> Result<DiskPoint> {
        act_disk(self, p)
    }
}

impl Action<JacobiDiskPoint> for StarGroupElement {
    fn act(&self, p: &JacobiDiskPoint) -> Result<JacobiDiskPoint> {
        act_jacobi_disk(self, p)
    }
}
