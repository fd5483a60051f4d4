//! Series and integrals near the collision of the branch points 0 and s, scaling
//! fits over an s grid, period/Riemann-constant limits and the genus-3 → genus-2
//! sigma limit.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::{Curve, TrigonalFamilyParams};
use crate::numkernel::{
    gamma_fn, integrate_segment, linear_fit, solve_real, sum_series, zeta3, zeta3_pow, ComplexMatrix, QuadratureConfig, C64, I, ONE, ZERO,
};
use crate::periods::{period_data, PeriodData};
use crate::sigma::{abel_sum, make_sigma_context, sigma33_at_branch, SigmaContext};
use crate::Error;

pub const DEFAULT_GRID: [f64; 7] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4];
/// Polynomial degree in s^{1/3} used when extrapolating main-theorem ratios.
pub const EXTRAPOLATION_DEGREE: usize = 5;
/// Grid for main-theorem sweeps. The ratio converges like s^{1/3}, so it runs past the default grid.
pub const MAIN_THEOREM_GRID: [f64; 13] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5, 3e-6, 1e-6, 3e-7, 1e-7];
pub const MAX_ORDER: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesCoefficients {
    pub beta1: Vec<C64>,
    pub beta2: Vec<C64>,
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    pub order: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DegenerationReport {
    pub observable: String,
    pub s_grid: Vec<C64>,
    pub values: Vec<C64>,
    pub fitted_exponent: f64,
    pub limit_estimate: C64,
    pub residuals: Vec<f64>,
}

/// Coefficients of (1 − z)^{−p} = Σ (p)_ℓ/ℓ! z^ℓ.
fn binomial_neg(p: f64, order: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(order + 1);
    let mut v = 1.0;
    for l in 0..=order {
        out.push(v);
        v *= (p + l as f64) / (l as f64 + 1.0);
    }
    out
}

/// β^{(a)}: Taylor coefficients of (1 − x/b₁)^{−a/3}(1 − x/b₂)^{−a/3}.
pub fn beta_series(params: &TrigonalFamilyParams, a: u32, order: usize) -> Vec<C64> {
    let p = a as f64 / 3.0;
    let w = binomial_neg(p, order);
    let u: Vec<C64> = (0..=order).map(|l| w[l] * params.b1.powi(-(l as i32))).collect();
    let v: Vec<C64> = (0..=order).map(|l| w[l] * params.b2.powi(-(l as i32))).collect();
    (0..=order).map(|n| (0..=n).map(|k| u[k] * v[n - k]).sum()).collect()
}

/// ζ₃^a/∛(b₁b₂)^a, the value h_a(0).
pub fn h_prefactor(params: &TrigonalFamilyParams, a: u32) -> C64 {
    zeta3_pow(a as i64) / (params.b1 * params.b2).powf(1.0 / 3.0).powu(a)
}

/// h_a(x) continued from x = 0 inside the disc |x| < min|b|.
pub fn h_direct(params: &TrigonalFamilyParams, a: u32, x: C64) -> C64 {
    let p = -(a as f64) / 3.0;
    h_prefactor(params, a) * (ONE - x / params.b1).powf(p) * (ONE - x / params.b2).powf(p)
}

pub fn h_series(params: &TrigonalFamilyParams, order: usize) -> Result<SeriesCoefficients, Error> {
    if order > MAX_ORDER {
        return Err(Error::InvalidParam(format!("order {order} exceeds {MAX_ORDER}")));
    }
    let (c1, c2) = c_series(order)?;
    Ok(SeriesCoefficients { beta1: beta_series(params, 1, order), beta2: beta_series(params, 2, order), c1, c2, order })
}

/// Coefficients of (1 − z)^{−1/3} and (1 − z)^{−2/3}.
pub fn c_series(order: usize) -> Result<(Vec<f64>, Vec<f64>), Error> {
    if order > MAX_ORDER {
        return Err(Error::InvalidParam(format!("order {order} exceeds {MAX_ORDER}")));
    }
    Ok((binomial_neg(1.0 / 3.0, order), binomial_neg(2.0 / 3.0, order)))
}

/// n(n−3)(n−6)⋯ down to the residue-class element in {1, 2, 3}; 1 for n ≤ 0.
pub fn triple_factorial(n: i64) -> f64 {
    let mut v = 1.0;
    let mut k = n;
    while k > 0 {
        v *= k as f64;
        k -= 3;
    }
    v
}

/// The tabulated (3ℓ+1)!!!/ℓ!(⅓)^ℓ and (3ℓ+2)!!!/ℓ!(⅔)^ℓ.
pub fn c_series_printed(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut fact = 1.0;
    let mut c1 = Vec::new();
    let mut c2 = Vec::new();
    for l in 0..=order {
        if l > 0 {
            fact *= l as f64;
        }
        c1.push(triple_factorial(3 * l as i64 + 1) / fact * (1.0f64 / 3.0).powi(l as i32));
        c2.push(triple_factorial(3 * l as i64 + 2) / fact * (2.0f64 / 3.0).powi(l as i32));
    }
    (c1, c2)
}

/// Σ c_ℓ z^ℓ, NonConvergence outside the unit disc.
pub fn eval_c_series(coeffs: &[f64], z: C64) -> Result<C64, Error> {
    if z.norm() >= 1.0 {
        return Err(Error::NonConvergence(format!("|s/x| = {} outside the radius", z.norm())));
    }
    sum_series(|l| if l < coeffs.len() { z.powu(l as u32) * coeffs[l] } else { ZERO }, 1e-16, coeffs.len())
}

fn check_real_s_params(params: &TrigonalFamilyParams) -> Result<f64, Error> {
    let s = params.s;
    if s.im != 0.0 || s.re <= 0.0 {
        return Err(Error::InvalidParam("s must be real and positive".into()));
    }
    let m = params.b1.im.min(params.b2.im);
    if m <= s.re || s.re >= params.b1.norm().min(params.b2.norm()) {
        return Err(Error::InvalidParam("need 0 < s < Im b_a and s < |b_a|".into()));
    }
    Ok(s.re)
}

/// A₁ = s^{−1/3} h₂(0) Σ β⁽²⁾_ℓ s^ℓ Γ(ℓ+⅓)Γ(⅓)/Γ(ℓ+⅔).
pub fn a1_series(params: &TrigonalFamilyParams, order: usize) -> Result<C64, Error> {
    let s = check_real_s_params(params)?;
    let beta = beta_series(params, 2, order.min(MAX_ORDER));
    let g13 = gamma_fn(C64::from(1.0 / 3.0))?;
    let g23 = gamma_fn(C64::from(2.0 / 3.0))?;
    let mut ratio = vec![g13 * g13 / g23];
    for l in 0..beta.len() {
        let next = ratio[l] * ((l as f64 + 1.0 / 3.0) / (l as f64 + 2.0 / 3.0));
        ratio.push(next);
    }
    let sum = sum_series(|l| if l < beta.len() { beta[l] * ratio[l] * s.powi(l as i32) } else { ZERO }, 1e-16, beta.len())?;
    Ok(h_prefactor(params, 2) * sum * s.powf(-1.0 / 3.0))
}

/// Term ratios |β_{ℓ+1}/β_ℓ|·(ℓ+4/3)/(ℓ+5/3)·s of the A₁ series.
pub fn a1_term_ratios(params: &TrigonalFamilyParams, order: usize) -> Vec<f64> {
    let beta = beta_series(params, 2, order);
    let s = params.s.norm();
    (0..order).map(|l| (beta[l + 1] / beta[l]).norm() * (l as f64 + 4.0 / 3.0) / (l as f64 + 5.0 / 3.0) * s).collect()
}

/// h₂(x)/|x²(x−s)²|^{1/3}, the real-axis integrand.
fn phi_abs(params: &TrigonalFamilyParams, x: f64) -> C64 {
    let s = params.s.re;
    h_direct(params, 2, C64::from(x)) / (x * x * (x - s) * (x - s)).abs().powf(1.0 / 3.0)
}

/// ∫₀^s by direct quadrature, endpoints resolved by x = τ³ and x = s − τ³.
pub fn a1_quadrature(params: &TrigonalFamilyParams, cfg: &QuadratureConfig) -> Result<C64, Error> {
    let s = check_real_s_params(params)?;
    let m = (s / 2.0).cbrt();
    // the τ² of dx cancels the endpoint factor exactly
    let left = integrate_segment(
        |t| {
            let x = t.re.powi(3);
            h_direct(params, 2, C64::from(x)) * (3.0 / (s - x).abs().powf(2.0 / 3.0))
        },
        ZERO,
        C64::from(m),
        cfg,
    )?;
    let right = integrate_segment(
        |t| {
            let x = s - t.re.powi(3);
            h_direct(params, 2, C64::from(x)) * (3.0 / x.abs().powf(2.0 / 3.0))
        },
        ZERO,
        C64::from(m),
        cfg,
    )?;
    Ok(left + right)
}

/// ∫_s^∞ along the real axis (upper edge, positive root).
pub fn i2_quadrature(params: &TrigonalFamilyParams, cfg: &QuadratureConfig) -> Result<C64, Error> {
    let s = check_real_s_params(params)?;
    let near = integrate_segment(
        |t| {
            let x = s + t.re.powi(3);
            h_direct(params, 2, C64::from(x)) * (3.0 / x.powf(2.0 / 3.0))
        },
        ZERO,
        ONE,
        cfg,
    )?;
    // x = s + p⁻³ on p ∈ (0, 1]
    let far = integrate_segment(
        |p| {
            let p = p.re;
            if p == 0.0 {
                return ZERO;
            }
            phi_abs(params, s + p.powi(-3)) * (3.0 * p.powi(-4))
        },
        ZERO,
        ONE,
        cfg,
    )?;
    Ok(near + far)
}

/// log with argument in [0, 2π): cut along the positive real axis, upper edge at 0.
fn log_cut(z: C64) -> C64 {
    let mut a = z.im.atan2(z.re);
    if a < 0.0 {
        a += 2.0 * PI;
    }
    C64::new(z.norm().ln(), a)
}

/// y on the Hankel contour: (x(x−s))^{1/3} cut along [0, ∞) times the cube root of
/// (x−b₁)(x−b₂) continued from x = 0.
pub fn hankel_y(params: &TrigonalFamilyParams, x: C64) -> C64 {
    let y1 = ((log_cut(x) + log_cut(x - params.s)) / 3.0).exp();
    let h = zeta3_pow(-1)
        * (params.b1 * params.b2).powf(1.0 / 3.0)
        * (ONE - x / params.b1).powf(1.0 / 3.0)
        * (ONE - x / params.b2).powf(1.0 / 3.0);
    y1 * h
}

/// ∫ f over the contour from +∞+iρ to iρ, around the left half circle to −iρ,
/// then out to +∞−iρ.
fn hankel_contour<F: Fn(C64) -> C64 + Sync>(f: F, rho: f64, cfg: &QuadratureConfig) -> Result<C64, Error> {
    let leg = |p0: C64| -> Result<C64, Error> {
        let near = integrate_segment(|r| f(p0 + r.re), ZERO, ONE, cfg)?;
        let far = integrate_segment(
            |p| {
                let p = p.re;
                if p == 0.0 {
                    return ZERO;
                }
                f(p0 + p.powi(-3)) * (3.0 * p.powi(-4))
            },
            ZERO,
            ONE,
            cfg,
        )?;
        Ok(near + far)
    };
    let upper = leg(I * rho)?;
    let lower = leg(-I * rho)?;
    let arc = integrate_segment(
        |th| {
            let x = C64::from_polar(rho, th.re);
            f(x) * I * x
        },
        C64::from(PI / 2.0),
        C64::from(1.5 * PI),
        cfg,
    )?;
    Ok(-upper + arc + lower)
}

/// Regularized integrals of ν^I over the loop around [0, ∞) divided by the jump
/// ζ₃^q − 1 of each differential across the positive axis.
pub fn hankel_first_kind(params: &TrigonalFamilyParams, rho: f64, cfg: &QuadratureConfig) -> Result<Vec<C64>, Error> {
    check_real_s_params(params)?;
    if rho <= params.s.re || rho >= params.b1.im.min(params.b2.im) {
        return Err(Error::InvalidParam("need s < ρ < min Im b_a".into()));
    }
    let curve = Curve::new(*params)?;
    let mut out = Vec::with_capacity(3);
    for d in &curve.diffs[..3] {
        let v = hankel_contour(|x| d.eval(x, hankel_y(params, x)), rho, cfg)?;
        out.push(v / (zeta3_pow(d.q as i64) - ONE));
    }
    Ok(out)
}

/// I₁ as the contour integral of 1/y² divided by its jump ζ₃² − 1.
pub fn i1_contour(params: &TrigonalFamilyParams, rho: f64, cfg: &QuadratureConfig) -> Result<C64, Error> {
    Ok(hankel_first_kind(params, rho, cfg)?[0] * 3.0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmallSValues {
    pub s: f64,
    pub i1: C64,
    pub i2: C64,
    pub a1_series: C64,
    pub a1_quadrature: C64,
}

/// (I₁, I₂) with I₁ from the contour and I₂ from the real-axis integral.
pub fn i1_i2_quadrature(params: &TrigonalFamilyParams, cfg: &QuadratureConfig) -> Result<(C64, C64), Error> {
    let rho = 0.5 * (params.s.re + params.b1.im.min(params.b2.im));
    Ok((i1_contour(params, rho, cfg)?, i2_quadrature(params, cfg)?))
}

pub fn small_s_values(params: &TrigonalFamilyParams, cfg: &QuadratureConfig) -> Result<SmallSValues, Error> {
    let (i1, i2) = i1_i2_quadrature(params, cfg)?;
    Ok(SmallSValues { s: params.s.re, i1, i2, a1_series: a1_series(params, MAX_ORDER)?, a1_quadrature: a1_quadrature(params, cfg)? })
}

/// Least-squares slope of log|v| against log s, and the limit of v·s^{−e} with e the
/// slope rounded to a multiple of ⅓, extrapolated linearly in s^{1/3}.
pub fn scaling_probe(observable: &str, s_grid: &[f64], values: &[C64]) -> Result<DegenerationReport, Error> {
    if s_grid.len() < 2 || s_grid.len() != values.len() {
        return Err(Error::InvalidParam("need at least two grid points with values".into()));
    }
    if s_grid.windows(2).any(|w| w[1].abs() >= w[0].abs()) {
        return Err(Error::InvalidParam("grid must be strictly decreasing in modulus".into()));
    }
    let lx: Vec<f64> = s_grid.iter().map(|s| s.abs().ln()).collect();
    let ly: Vec<f64> = values.iter().map(|v| v.norm().ln()).collect();
    let (slope, icpt) = linear_fit(&lx, &ly);
    let e = (slope * 3.0).round() / 3.0;
    let n = s_grid.len();
    let w = |k: usize| values[k] * s_grid[k].abs().powf(-e);
    let (t1, t2) = (s_grid[n - 2].abs().cbrt(), s_grid[n - 1].abs().cbrt());
    let limit = (w(n - 1) * t1 - w(n - 2) * t2) / (t1 - t2);
    let residuals = lx.iter().zip(&ly).map(|(x, y)| y - (slope * x + icpt)).collect();
    Ok(DegenerationReport {
        observable: observable.to_string(),
        s_grid: s_grid.iter().map(|s| C64::from(*s)).collect(),
        values: values.to_vec(),
        fitted_exponent: slope,
        limit_estimate: limit,
        residuals,
    })
}

fn params_at(b1: C64, b2: C64, s: f64) -> Result<TrigonalFamilyParams, Error> {
    TrigonalFamilyParams::new(b1, b2, C64::from(s))
}

/// Period data over the grid, in grid order.
pub fn period_sweep(b1: C64, b2: C64, s_grid: &[f64], cfg: &QuadratureConfig) -> Result<Vec<PeriodData>, Error> {
    s_grid.par_iter().map(|s| period_data(&params_at(b1, b2, *s)?, cfg)).collect()
}

/// Named scalar observables of the genus-3 period data.
pub fn period_observable(pd: &PeriodData, name: &str) -> Result<C64, Error> {
    let entry = |m: &ComplexMatrix, rest: &str| -> Result<C64, Error> {
        let d: Vec<usize> = rest.chars().filter_map(|ch| ch.to_digit(10)).map(|v| v as usize).collect();
        if d.len() != 2 || d[0] == 0 || d[1] == 0 || d[0] > m.rows || d[1] > m.cols {
            return Err(Error::InvalidParam(format!("bad observable index in {name}")));
        }
        Ok(m[(d[0] - 1, d[1] - 1)])
    };
    if name == "det_omega_p" {
        return Ok(pd.omega_p.det());
    }
    if let Some(r) = name.strip_prefix("omega_pp_") {
        return entry(&pd.omega_pp, r);
    }
    if let Some(r) = name.strip_prefix("omega_p_") {
        return entry(&pd.omega_p, r);
    }
    if let Some(r) = name.strip_prefix("eta_pp_") {
        return entry(&pd.eta_pp, r);
    }
    if let Some(r) = name.strip_prefix("eta_p_") {
        return entry(&pd.eta_p, r);
    }
    if let Some(r) = name.strip_prefix("tau_") {
        return entry(&pd.tau, r);
    }
    if let Some(r) = name.strip_prefix("omega_inv_") {
        return entry(&crate::numkernel::mat_inverse(&pd.omega_p)?, r);
    }
    if let Some(r) = name.strip_prefix("branch_") {
        return entry(&pd.branch.omega, r);
    }
    Err(Error::InvalidParam(format!("unknown observable {name}")))
}

pub fn scaling_from_sweep(pds: &[PeriodData], s_grid: &[f64], name: &str) -> Result<DegenerationReport, Error> {
    let v: Result<Vec<C64>, Error> = pds.iter().map(|pd| period_observable(pd, name)).collect();
    scaling_probe(name, s_grid, &v?)
}

/// Scaling of the regularized γ₀ integrals, component i (1-based).
pub fn hankel_scaling(b1: C64, b2: C64, s_grid: &[f64], i: usize, cfg: &QuadratureConfig) -> Result<DegenerationReport, Error> {
    let rho = 0.5 * b1.im.min(b2.im);
    let v: Result<Vec<C64>, Error> = s_grid.par_iter().map(|s| Ok(hankel_first_kind(&params_at(b1, b2, *s)?, rho, cfg)?[i - 1])).collect();
    scaling_probe(&format!("gamma0_nu1_{i}"), s_grid, &v?)
}

fn block_defect(a: &ComplexMatrix, r0: usize, c0: usize, b: &ComplexMatrix) -> f64 {
    (&a.sub_block(r0, c0, b.rows, b.cols) - b).norm_max()
}

/// Sub-block defects against the genus-2 data; each report's values are the defects.
pub fn limit_compare_periods(pds: &[PeriodData], reference: &PeriodData, s_grid: &[f64]) -> Result<Vec<DegenerationReport>, Error> {
    let checks: Vec<(&str, Box<dyn Fn(&PeriodData) -> f64>)> = vec![
        ("omega_p_block", Box::new(|pd: &PeriodData| block_defect(&pd.omega_p, 1, 0, &reference.omega_p))),
        ("omega_pp_block", Box::new(|pd: &PeriodData| block_defect(&pd.omega_pp, 1, 0, &reference.omega_pp))),
        ("eta_p_block", Box::new(|pd: &PeriodData| block_defect(&pd.eta_p, 1, 0, &reference.eta_p))),
        ("eta_pp_block", Box::new(|pd: &PeriodData| block_defect(&pd.eta_pp, 1, 0, &reference.eta_pp))),
        ("tau_block", Box::new(|pd: &PeriodData| block_defect(&pd.tau, 0, 0, &reference.tau))),
        ("eta_p_row1", Box::new(|pd: &PeriodData| pd.eta_p.sub_block(0, 0, 1, 3).norm_max())),
        ("eta_pp_row1", Box::new(|pd: &PeriodData| pd.eta_pp.sub_block(0, 0, 1, 3).norm_max())),
    ];
    checks
        .iter()
        .map(|(name, f)| {
            let v: Vec<C64> = pds.iter().map(|pd| C64::from(f(pd))).collect();
            scaling_probe(name, s_grid, &v)
        })
        .collect()
}

/// Distance of v to the lattice ℤ^g + τℤ^g.
pub fn distance_mod_lattice(tau: &ComplexMatrix, v: &[C64]) -> Result<f64, Error> {
    let g = v.len();
    let mut a = vec![vec![0.0; 2 * g]; 2 * g];
    let mut rhs = vec![0.0; 2 * g];
    for i in 0..g {
        a[i][i] = 1.0;
        for j in 0..g {
            a[i][g + j] = tau[(i, j)].re;
            a[g + i][g + j] = tau[(i, j)].im;
        }
        rhs[i] = v[i].re;
        rhs[g + i] = v[i].im;
    }
    let x = solve_real(&a, &rhs)?;
    let fr: Vec<f64> = x.iter().map(|t| t - t.round()).collect();
    let mut out = 0.0f64;
    for i in 0..g {
        let z = C64::from(fr[i]) + (0..g).map(|j| tau[(i, j)] * fr[g + j]).sum::<C64>();
        out = out.max(z.norm());
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RiemannLimitReport {
    pub report: DegenerationReport,
    pub characteristic_match: Vec<bool>,
    /// residual of 2ξ̂ in ℤ² + τ̂ℤ²
    pub shifted_half_period_residual: f64,
}

/// ξ_s restricted to the first two normalized coordinates against ξ̂ (already shifted
/// by the image of B₀), modulo the genus-2 lattice.
pub fn limit_riemann_constant(pds: &[PeriodData], reference: &PeriodData, s_grid: &[f64]) -> Result<RiemannLimitReport, Error> {
    let mut defects = Vec::with_capacity(pds.len());
    let mut matches = Vec::with_capacity(pds.len());
    for pd in pds {
        let d: Vec<C64> = (0..2).map(|j| pd.xi[j] - reference.xi[j]).collect();
        defects.push(C64::from(distance_mod_lattice(&reference.tau, &d)?));
        let ok = (0..2).all(|j| pd.delta.a[j] == reference.delta.a[j] && pd.delta.b[j] == reference.delta.b[j]);
        matches.push(ok);
    }
    let twice: Vec<C64> = reference.xi.iter().map(|v| v * 2.0).collect();
    let half = distance_mod_lattice(&reference.tau, &twice)?;
    Ok(RiemannLimitReport {
        report: scaling_probe("riemann_constant", s_grid, &defects)?,
        characteristic_match: matches,
        shifted_half_period_residual: half,
    })
}

/// Lift of (x, y₀) on the genus-2 model to X_s along the x-constant section.
pub fn lift_y(x: C64, y0: C64, s: C64) -> Result<C64, Error> {
    if x == ZERO || x == s {
        return Err(Error::LiftFailure("x-constant section through a branch point".into()));
    }
    let r = s / x;
    if r.norm() >= 0.5 {
        return Err(Error::LiftFailure(format!("|s/x| = {} too large for the continuous root", r.norm())));
    }
    Ok(y0 * (ONE - r).powf(1.0 / 3.0))
}

/// |ν_{s,i+1}(P_s) − ν̂_i(P̂)| over both kinds at a point of the x-constant section.
pub fn differential_defect(params: &TrigonalFamilyParams, x: C64, y0: C64) -> Result<f64, Error> {
    let c3 = Curve::new(*params)?;
    let c2 = Curve::new(TrigonalFamilyParams { s: ZERO, ..*params })?;
    let ys = lift_y(x, y0, params.s)?;
    let v3 = c3.eval_all(x, ys);
    let v2 = c2.eval_all(x, y0);
    let pairs = [(1, 0), (2, 1), (4, 2), (5, 3)];
    Ok(pairs.iter().map(|(i, j)| (v3[*i] - v2[*j]).norm()).fold(0.0, f64::max))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MainTheoremRow {
    pub s: f64,
    /// ∛(s b₁ b₂)/√2 · σ_s(u) / σ̂(v)
    pub printed_ratio: C64,
    /// σ_s(u) / (σ₃₃(ω_s) σ̂(v))
    pub ratio: C64,
    pub sigma33: C64,
    /// max |u_{2,3} − v|
    pub projection_defect: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MainTheoremReport {
    pub points: Vec<(C64, i64)>,
    pub v: Vec<C64>,
    pub sigma_hat: C64,
    pub rows: Vec<MainTheoremRow>,
    /// fit of |1 − |ratio|| against s
    pub convergence: DegenerationReport,
    /// phase of the ratio extrapolated to s = 0 in s^{1/3}
    pub phase_limit: C64,
    pub phase_cube_defect: f64,
    /// |ratio| extrapolated to s = 0
    pub modulus_limit: f64,
    /// |printed_ratio| extrapolated to s = 0
    pub printed_modulus_limit: f64,
}

pub struct GenusTwoReference {
    pub ctx: SigmaContext,
}

pub fn genus_two_reference(b1: C64, b2: C64, cfg: &QuadratureConfig) -> Result<GenusTwoReference, Error> {
    let p = TrigonalFamilyParams::new(b1, b2, ZERO)?;
    let pd = period_data(&p, cfg)?;
    Ok(GenusTwoReference { ctx: make_sigma_context(&p, pd)? })
}

fn extrapolate_cbrt(s_grid: &[f64], vals: &[C64]) -> C64 {
    let n = vals.len();
    if n < 2 {
        return vals.last().copied().unwrap_or(ZERO);
    }
    // least-squares polynomial in t = s^{1/3}; the constant term is the limit
    let deg = (n - 1).min(EXTRAPOLATION_DEGREE);
    let ts: Vec<f64> = s_grid.iter().map(|s| s.cbrt()).collect();
    let mut a = vec![vec![0.0; deg + 1]; deg + 1];
    let (mut br, mut bi) = (vec![0.0; deg + 1], vec![0.0; deg + 1]);
    for (t, v) in ts.iter().zip(vals) {
        for i in 0..=deg {
            for j in 0..=deg {
                a[i][j] += t.powi((i + j) as i32);
            }
            br[i] += v.re * t.powi(i as i32);
            bi[i] += v.im * t.powi(i as i32);
        }
    }
    match (solve_real(&a, &br), solve_real(&a, &bi)) {
        (Ok(r), Ok(i)) => C64::new(r[0], i[0]),
        _ => vals[n - 1],
    }
}

/// Evaluates the scaled genus-3 sigma along x-constant sections through the given
/// genus-2 points (x, sheet) and compares with σ̂ at their shifted Abel image.
pub fn main_theorem_check(
    b1: C64,
    b2: C64,
    points: &[(C64, i64)],
    s_grid: &[f64],
    reference: &GenusTwoReference,
    cfg: &QuadratureConfig,
) -> Result<MainTheoremReport, Error> {
    if points.len() != 2 {
        return Err(Error::InvalidParam("two points are needed".into()));
    }
    let ctx2 = &reference.ctx;
    let curve2 = ctx2.curve();
    let (mut v, pts2) = abel_sum(&curve2, points, cfg)?;
    for (a, b) in v.iter_mut().zip(ctx2.periods.branch.omega.column(0)) {
        *a += b;
    }
    let sigma_hat = ctx2.sigma(&v)?;
    let rows: Result<Vec<MainTheoremRow>, Error> = s_grid
        .par_iter()
        .map(|s| {
            let p = params_at(b1, b2, *s)?;
            let ctx = make_sigma_context(&p, period_data(&p, cfg)?)?;
            let curve = ctx.curve();
            let mut lifted = Vec::with_capacity(2);
            for (x, y0) in &pts2 {
                let ys = lift_y(*x, *y0, p.s)?;
                let k = curve.sheet_of(*x, ys).map_err(|e| Error::LiftFailure(e.to_string()))?;
                lifted.push((*x, k));
            }
            let (mut u, _) = abel_sum(&curve, &lifted, cfg)?;
            for (a, b) in u.iter_mut().zip(ctx.periods.branch.omega.column(3)) {
                *a += b;
            }
            let sig = ctx.sigma(&u)?;
            let s33 = sigma33_at_branch(&ctx, 3, 0)?;
            let scale = (p.s * b1 * b2).powf(1.0 / 3.0) / 2f64.sqrt();
            let projection_defect = (0..2).map(|j| (u[j + 1] - v[j]).norm()).fold(0.0, f64::max);
            Ok(MainTheoremRow {
                s: *s,
                printed_ratio: scale * sig / sigma_hat,
                ratio: sig / (s33 * sigma_hat),
                sigma33: s33,
                projection_defect,
            })
        })
        .collect();
    let rows = rows?;
    let defects: Vec<C64> = rows.iter().map(|r| C64::from((1.0 - r.ratio.norm()).abs().max(f64::MIN_POSITIVE))).collect();
    let convergence = scaling_probe("main_theorem_modulus_defect", s_grid, &defects)?;
    let phases: Vec<C64> = rows.iter().map(|r| r.ratio / r.ratio.norm()).collect();
    let mut phase_limit = extrapolate_cbrt(s_grid, &phases);
    phase_limit /= phase_limit.norm();
    let phase_cube_defect = (phase_limit.powu(3) - ONE).norm();
    let moduli: Vec<C64> = rows.iter().map(|r| C64::from(r.ratio.norm())).collect();
    let modulus_limit = extrapolate_cbrt(s_grid, &moduli).re;
    let printed: Vec<C64> = rows.iter().map(|r| C64::from(r.printed_ratio.norm())).collect();
    let printed_modulus_limit = extrapolate_cbrt(s_grid, &printed).re;
    Ok(MainTheoremReport {
        points: points.to_vec(),
        v,
        sigma_hat,
        rows,
        convergence,
        phase_limit,
        phase_cube_defect,
        modulus_limit,
        printed_modulus_limit,
    })
}

/// |σ(u⁽¹⁾+u⁽²⁾+ω_s)·∛(b₁b₂)s^{1/3}/(√2 t₁t₂)| − 1 and the phase of the ratio
/// (against −1).
pub fn branch_sigma_expansion_check(ctx: &SigmaContext, t1: C64, t2: C64) -> Result<(f64, C64), Error> {
    let p = ctx.params;
    let mut u = ctx.abel_chart(&[t1, t2]);
    for (a, b) in u.iter_mut().zip(ctx.periods.branch.omega.column(3)) {
        *a += b;
    }
    let lead = -C64::from(2f64.sqrt()) / (p.b1 * p.b2).powf(1.0 / 3.0) * p.s.powf(-1.0 / 3.0) * t1 * t2;
    let r = ctx.sigma(&u)? / lead;
    Ok((r.norm() - 1.0, r / r.norm()))
}

/// Cube-root-of-unity nearest to z.
pub fn nearest_cube_root_of_unity(z: C64) -> C64 {
    (0..3)
        .map(|k| zeta3().powu(k))
        .min_by(|a, b| (z - a).norm().partial_cmp(&(z - b).norm()).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap_or(ONE)
}
