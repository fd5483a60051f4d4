//! Shared numerical primitives: adaptive Gauss–Legendre quadrature on complex
//! segments, series summation, small complex matrices and the complex Gamma
//! function.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::Error;

pub type C64 = Complex<f64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Primitive cube root of unity exp(2πi/3).
pub fn zeta3() -> C64 {
    C64::from_polar(1.0, 2.0 * PI / 3.0)
}

/// ζ₃^k for any integer k.
pub fn zeta3_pow(k: i64) -> C64 {
    match k.rem_euclid(3) {
        0 => ONE,
        1 => zeta3(),
        _ => zeta3().conj(),
    }
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub panel_order: usize,
    pub tol: f64,
    pub max_subdivision_depth: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { panel_order: 16, tol: 1e-13, max_subdivision_depth: 40 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.panel_order < 4 || !(self.tol > 0.0) || self.max_subdivision_depth < 1 {
            return Err(Error::InvalidParam(format!("bad quadrature config {:?}", self)));
        }
        Ok(())
    }
}

/// Nodes and weights on [-1, 1].
#[derive(Debug)]
pub struct GaussRule {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

fn compute_gauss_rule(n: usize) -> GaussRule {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    GaussRule { x, w }
}

/// Cached Gauss–Legendre rule of order n.
pub fn gauss_rule(n: usize) -> Arc<GaussRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("gauss cache poisoned");
    guard.entry(n).or_insert_with(|| Arc::new(compute_gauss_rule(n))).clone()
}

fn panel<const N: usize, F: Fn(C64) -> [C64; N]>(f: &F, a: C64, b: C64, rule: &GaussRule) -> [C64; N] {
    let h = (b - a) * 0.5;
    let m = (b + a) * 0.5;
    let mut acc = [ZERO; N];
    for (xi, wi) in rule.x.iter().zip(&rule.w) {
        let v = f(m + h * *xi);
        for k in 0..N {
            acc[k] += v[k] * *wi;
        }
    }
    for v in acc.iter_mut() {
        *v *= h;
    }
    acc
}

fn max_abs<const N: usize>(v: &[C64; N]) -> f64 {
    v.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Leaf panel produced by the adaptive driver.
#[derive(Debug, Clone, Copy)]
pub struct Panel<const N: usize> {
    pub a: C64,
    pub b: C64,
    pub value: [C64; N],
}

/// Adaptive bisection on [a, b]; returns the accepted panels in order.
pub fn adaptive_panels<const N: usize, F: Fn(C64) -> [C64; N]>(
    f: &F,
    a: C64,
    b: C64,
    cfg: &QuadratureConfig,
) -> Result<Vec<Panel<N>>, Error> {
    let lo = gauss_rule(cfg.panel_order);
    let hi = gauss_rule(2 * cfg.panel_order);
    let mut out = Vec::new();
    let mut stack = vec![(a, b, 0usize)];
    while let Some((pa, pb, depth)) = stack.pop() {
        let i1 = panel(f, pa, pb, &lo);
        let i2 = panel(f, pa, pb, &hi);
        let mut err = 0.0f64;
        for k in 0..N {
            err = err.max((i1[k] - i2[k]).norm());
        }
        if !err.is_finite() || !max_abs(&i2).is_finite() {
            return Err(Error::NonConvergence(format!("non-finite integrand on [{pa}, {pb}]")));
        }
        if err <= cfg.tol * max_abs(&i2) + 1e-15 * (pb - pa).norm().min(1.0) {
            out.push(Panel { a: pa, b: pb, value: i2 });
            continue;
        }
        if depth >= cfg.max_subdivision_depth {
            return Err(Error::NonConvergence(format!("subdivision depth {} exceeded near [{pa}, {pb}]", cfg.max_subdivision_depth)));
        }
        let m = (pa + pb) * 0.5;
        // right half pushed first so panels pop in path order
        stack.push((m, pb, depth + 1));
        stack.push((pa, m, depth + 1));
    }
    Ok(out)
}

/// Vector-valued integral along the straight segment [a, b].
pub fn integrate_segment_n<const N: usize, F: Fn(C64) -> [C64; N]>(
    f: F,
    a: C64,
    b: C64,
    cfg: &QuadratureConfig,
) -> Result<[C64; N], Error> {
    let panels = adaptive_panels(&f, a, b, cfg)?;
    let mut acc = [ZERO; N];
    for p in &panels {
        for k in 0..N {
            acc[k] += p.value[k];
        }
    }
    Ok(acc)
}

/// Scalar integral along the straight segment [a, b].
pub fn integrate_segment<F: Fn(C64) -> C64>(f: F, a: C64, b: C64, cfg: &QuadratureConfig) -> Result<C64, Error> {
    integrate_segment_n(|z| [f(z)], a, b, cfg).map(|v| v[0])
}

/// Integral of F dG along [a, b] where F(z) = ∫_a^z f and dG = g dz; both are
/// N-vectors, result is the N×N matrix D_ij = ∫ F_i g_j. The inner integrals are
/// evaluated per accepted panel with the same Gauss rule mapped onto [p, node].
pub fn iterated_segment<const N: usize, F: Fn(C64) -> [C64; N]>(
    f: F,
    a: C64,
    b: C64,
    cfg: &QuadratureConfig,
) -> Result<([C64; N], [[C64; N]; N]), Error> {
    let panels = adaptive_panels(&f, a, b, cfg)?;
    let rule = gauss_rule(2 * cfg.panel_order);
    let mut total = [ZERO; N];
    let mut d = [[ZERO; N]; N];
    for p in &panels {
        let h = (p.b - p.a) * 0.5;
        let m = (p.b + p.a) * 0.5;
        for (xi, wi) in rule.x.iter().zip(&rule.w) {
            let node = m + h * *xi;
            let inner = panel(&f, p.a, node, &rule);
            let v = f(node);
            for i in 0..N {
                let fi = total[i] + inner[i];
                for j in 0..N {
                    d[i][j] += fi * v[j] * h * *wi;
                }
            }
        }
        for k in 0..N {
            total[k] += p.value[k];
        }
    }
    Ok((total, d))
}

/// Sums term(0) + term(1) + ... until three consecutive terms fall below
/// tol × |partial sum|.
pub fn sum_series<F: FnMut(usize) -> C64>(mut term: F, tol: f64, max_terms: usize) -> Result<C64, Error> {
    let mut acc = ZERO;
    let mut small = 0;
    for l in 0..max_terms {
        let t = term(l);
        if !t.is_finite() {
            return Err(Error::NonConvergence(format!("non-finite term at index {l}")));
        }
        acc += t;
        if t.norm() <= tol * acc.norm() || (t.norm() == 0.0 && acc.norm() == 0.0) {
            small += 1;
            if small >= 3 {
                return Ok(acc);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NonConvergence(format!("series did not converge in {max_terms} terms")))
}

/// Coefficients of Π_k (1 − e_k u)^{p·m_k} up to u^n, via log/exp of the product.
pub fn series_pow(es: &[C64], ms: &[u32], p: f64, n: usize) -> Vec<C64> {
    let mut log = vec![ZERO; n + 1];
    for k in 1..=n {
        let mut pk = ZERO;
        for (e, m) in es.iter().zip(ms) {
            pk += e.powu(k as u32) * (*m as f64);
        }
        log[k] = -pk * p / k as f64;
    }
    let mut out = vec![ZERO; n + 1];
    out[0] = ONE;
    for j in 1..=n {
        let mut acc = ZERO;
        for k in 1..=j {
            acc += log[k] * out[j - k] * k as f64;
        }
        out[j] = acc / j as f64;
    }
    out
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix { rows, cols, entries: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_columns(cols: &[Vec<C64>]) -> Self {
        let rows = cols.first().map_or(0, |c| c.len());
        Self::from_fn(rows, cols.len(), |i, j| cols[j][i])
    }

    pub fn diag(d: &[C64]) -> Self {
        Self::from_fn(d.len(), d.len(), |i, j| if i == j { d[i] } else { ZERO })
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> Vec<C64> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(|z| z * s).collect() }
    }

    pub fn sub_block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn norm_max(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.is_finite())
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum()).collect()
    }

    pub fn real_part(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self[(i, j)].re).collect()).collect()
    }

    pub fn imag_part(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self[(i, j)].im).collect()).collect()
    }

    pub fn det(&self) -> C64 {
        assert_eq!(self.rows, self.cols);
        match self.rows {
            0 => ONE,
            1 => self[(0, 0)],
            2 => self[(0, 0)] * self[(1, 1)] - self[(0, 1)] * self[(1, 0)],
            3 => {
                let m = |i, j| self[(i, j)];
                m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
                    + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
            }
            _ => {
                let lu = self.to_nalgebra().lu();
                lu.determinant()
            }
        }
    }

    /// Cofactor matrix (n ≤ 3).
    pub fn cofactor(&self) -> Self {
        let n = self.rows;
        assert!(n == self.cols && (1..=3).contains(&n));
        if n == 1 {
            return Self::identity(1);
        }
        Self::from_fn(n, n, |i, j| {
            let minor = Self::from_fn(n - 1, n - 1, |a, b| {
                let r = if a < i { a } else { a + 1 };
                let cc = if b < j { b } else { b + 1 };
                self[(r, cc)]
            });
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            minor.det() * sign
        })
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<C64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)])
    }

    pub fn from_nalgebra(m: &nalgebra::DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.entries[i * self.cols + j]
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows);
        ComplexMatrix::from_fn(self.rows, rhs.cols, |i, j| (0..self.cols).map(|k| self[(i, k)] * rhs[(k, j)]).sum())
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + rhs[(i, j)])
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - rhs[(i, j)])
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale(-ONE)
    }
}

/// Inverse by cofactors for n ≤ 3.
pub fn mat_inverse(m: &ComplexMatrix) -> Result<ComplexMatrix, Error> {
    if m.rows != m.cols || m.rows == 0 || m.rows > 3 {
        return Err(Error::InvalidParam(format!("mat_inverse needs a square matrix of size 1..3, got {}x{}", m.rows, m.cols)));
    }
    let n = m.rows as i32;
    let d = m.det();
    let scale = m.norm_max().max(f64::MIN_POSITIVE);
    if d == ZERO || d.norm() < 1e-14 * scale.powi(n) || !d.is_finite() {
        return Err(Error::Singular(format!("determinant {d:e} too small")));
    }
    Ok(m.cofactor().transpose().scale(d.inv()))
}

/// Solves the real system a·x = b (general size) by LU with partial pivoting.
pub fn solve_real(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>, Error> {
    let n = b.len();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| a[i][j]);
    let rhs = nalgebra::DVector::from_column_slice(b);
    m.lu().solve(&rhs).map(|v| v.iter().copied().collect()).ok_or_else(|| Error::Singular("real system".into()))
}

/// Solves a·x = b for complex square a of any size.
pub fn solve_complex(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, Error> {
    let lu = a.to_nalgebra().lu();
    lu.solve(&b.to_nalgebra()).map(|m| ComplexMatrix::from_nalgebra(&m)).ok_or_else(|| Error::Singular("complex system".into()))
}

/// Smallest eigenvalue of a real symmetric matrix.
pub fn min_sym_eigenvalue(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| 0.5 * (a[i][j] + a[j][i]));
    m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Complex Gamma function (Lanczos, with reflection for Re z < 1/2).
pub fn gamma_fn(z: C64) -> Result<C64, Error> {
    if z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0 {
        return Err(Error::Pole(z.re));
    }
    Ok(gamma_unchecked(z))
}

fn gamma_unchecked(z: C64) -> C64 {
    if z.re < 0.5 {
        let s = (z * PI).sin();
        return C64::from(PI) / (s * gamma_unchecked(ONE - z));
    }
    // shift up for accuracy at larger |z| via the recurrence-free Lanczos form
    let z = z - 1.0;
    let mut x = C64::from(LANCZOS[0]);
    for (k, ck) in LANCZOS.iter().enumerate().skip(1) {
        x += *ck / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * x
}

/// Least-squares slope and intercept of y against x.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Taylor coefficients a₀..a_{k_max} of an analytic f at `center` from the
/// trapezoidal Cauchy integral on a circle of the given radius with n nodes.
pub fn taylor_coefficients<F: Fn(C64) -> Result<C64, Error>>(
    f: F,
    center: C64,
    radius: f64,
    n: usize,
    k_max: usize,
) -> Result<Vec<C64>, Error> {
    if n <= k_max || !(radius > 0.0) {
        return Err(Error::InvalidParam("need n > k_max and a positive radius".into()));
    }
    let vals: Result<Vec<C64>, Error> = (0..n).map(|j| f(center + C64::from_polar(radius, 2.0 * PI * j as f64 / n as f64))).collect();
    let vals = vals?;
    Ok((0..=k_max)
        .map(|k| {
            let s: C64 = vals.iter().enumerate().map(|(j, v)| v * C64::from_polar(1.0, -2.0 * PI * (j * k) as f64 / n as f64)).sum();
            s / (n as f64 * radius.powi(k as i32))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn taylor_coefficients_of_exp() {
        let a = taylor_coefficients(|z| Ok(z.exp()), ZERO, 0.7, 32, 6).unwrap();
        let mut fact = 1.0;
        for (k, ak) in a.iter().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            assert!((ak - 1.0 / fact).norm() < 1e-14);
        }
    }

    #[test]
    fn gauss_rule_integrates_polynomials() {
        let r = gauss_rule(10);
        let s: f64 = r.x.iter().zip(&r.w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
        assert!((r.w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn segment_examples() {
        let cfg = QuadratureConfig::default();
        let v = integrate_segment(|_| ONE, ZERO, ONE, &cfg).unwrap();
        assert!(close(v, ONE, 1e-14));
        let b = c(1.0, 1.0);
        let v = integrate_segment(|z| z * z, ZERO, b, &cfg).unwrap();
        assert!(close(v, b * b * b / 3.0, 1e-14));
        // ∫_0^1 z^{-1/2} dz with z = t², dz = 2t dt
        let v = integrate_segment(|t| (t * t).sqrt().inv() * 2.0 * t, ZERO, ONE, &cfg).unwrap();
        assert!(close(v, c(2.0, 0.0), 1e-13));
    }

    #[test]
    fn segment_reports_nonconvergence() {
        let cfg = QuadratureConfig { panel_order: 4, tol: 1e-15, max_subdivision_depth: 2 };
        let r = integrate_segment(|z| (z - 0.5).inv(), ZERO, c(1.0, 1e-9), &cfg);
        assert!(matches!(r, Err(Error::NonConvergence(_))));
    }

    #[test]
    fn iterated_integral_of_constants() {
        // F = z, dG = dz on [0, 2] gives ∫ z dz = 2
        let (tot, d) = iterated_segment(|_| [ONE], ZERO, c(2.0, 0.0), &QuadratureConfig::default()).unwrap();
        assert!(close(tot[0], c(2.0, 0.0), 1e-14));
        assert!(close(d[0][0], c(2.0, 0.0), 1e-13));
    }

    #[test]
    fn series_examples() {
        assert_eq!(sum_series(|_| ZERO, 1e-15, 10).unwrap(), ZERO);
        let v = sum_series(|l| c(0.5f64.powi(l as i32), 0.0), 1e-16, 200).unwrap();
        assert!(close(v, c(2.0, 0.0), 1e-15));
        assert!(sum_series(|_| ONE, 1e-15, 50).is_err());
    }

    #[test]
    fn series_pow_matches_binomial() {
        let e = [c(0.5, 0.1)];
        let s = series_pow(&e, &[1], -1.0 / 3.0, 6);
        let u = c(0.3, -0.2);
        let direct = (ONE - e[0] * u).powf(-1.0 / 3.0);
        let partial: C64 = s.iter().enumerate().map(|(k, a)| a * u.powu(k as u32)).sum();
        assert!((direct - partial).norm() < 1e-5);
    }

    #[test]
    fn inverse_examples() {
        let id = ComplexMatrix::identity(3);
        assert_eq!(mat_inverse(&id).unwrap(), id);
        let d = ComplexMatrix::diag(&[c(2.0, 0.0), I, ONE]);
        let inv = mat_inverse(&d).unwrap();
        let expect = ComplexMatrix::diag(&[c(0.5, 0.0), -I, ONE]);
        assert!((&inv - &expect).norm_max() < 1e-15);
        let z = ComplexMatrix::zeros(2, 2);
        assert!(matches!(mat_inverse(&z), Err(Error::Singular(_))));
    }

    #[test]
    fn gamma_examples() {
        assert!(close(gamma_fn(ONE).unwrap(), ONE, 1e-14));
        let p = gamma_fn(c(1.0 / 3.0, 0.0)).unwrap() * gamma_fn(c(2.0 / 3.0, 0.0)).unwrap();
        assert!(close(p, c(2.0 * PI / 3f64.sqrt(), 0.0), 1e-14));
        for l in 0..20 {
            let z = c(l as f64 + 1.0 / 3.0, 0.0);
            let r = gamma_fn(z + 1.0).unwrap() / gamma_fn(z).unwrap();
            assert!(close(r, z, 1e-13));
        }
        assert!(matches!(gamma_fn(c(-2.0, 0.0)), Err(Error::Pole(_))));
        assert!(close(gamma_fn(c(0.5, 0.0)).unwrap(), c(PI.sqrt(), 0.0), 1e-14));
    }

    #[test]
    fn fit_recovers_slope() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 1.0).collect();
        let (m, b) = linear_fit(&x, &y);
        assert!((m - 2.5).abs() < 1e-14 && (b + 1.0).abs() < 1e-14);
    }
}
