//! Command-line surface: period data, pointwise evaluation, identity suites and
//! degeneration sweeps. JSON complex numbers are [re, im].

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curves::{Curve, TrigonalFamilyParams};
use crate::degen::{
    a1_quadrature, a1_series, genus_two_reference, i1_contour, i2_quadrature, main_theorem_check, period_sweep, scaling_from_sweep,
    DegenerationReport, DEFAULT_GRID, MAIN_THEOREM_GRID,
};
use crate::elliptic::{
    addition_identity_defect, al_identity_defects, al_r, half_lattice_points_check, kiepert_defects, kodaira_iv_expansion_check,
    make_elliptic_context, omega_p_quadrature, product_identity_defects, sigma_at_omega_s, sigma_e, sigma_taylor_check,
    translation_defect_e, weierstrass_form_defects, wp, wp_prime, EllipticContext,
};
use crate::numkernel::{c, QuadratureConfig, C64, ZERO};
use crate::periods::{lattice_decompose, period_data, random_regular_x, PeriodData};
use crate::sigma::{
    abel_sum, al, al_cube_ratio, divisor_ratio, make_al_context, make_sigma_context, parity_sign, rotated_branch, sigma33_at_branch,
    translation_defect, SigmaContext,
};
use crate::theta::{quasi_periodicity_defect, theta, ThetaCharacteristic, ThetaParams};
use crate::Error;

#[derive(Debug, Parser)]
#[command(name = "trigsigma", version, about = "Sigma functions of the cyclic trigonal family y^3 = x(x-s)(x-b1)(x-b2)")]
#[command(allow_negative_numbers = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum Suite {
    All,
    Periods,
    Theta,
    Sigma,
    Al,
    Hankel,
    Elliptic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Function {
    Sigma,
    Sigma33,
    Al,
    Theta,
    SigmaE,
    Wp,
    WpPrime,
    AlE,
}

pub fn parse_complex(s: &str) -> Result<C64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| format!("cannot parse '{t}' as a number"));
    match parts.as_slice() {
        [re] => Ok(c(num(re)?, 0.0)),
        [re, im] => Ok(c(num(re)?, num(im)?)),
        _ => Err(format!("expected 're' or 're,im', got '{s}'")),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Point(pub Vec<C64>);

#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

pub fn parse_vector(s: &str) -> Result<Point, String> {
    s.split(';').map(parse_complex).collect::<Result<_, _>>().map(Point)
}

pub fn parse_grid(s: &str) -> Result<Grid, String> {
    if s.trim().is_empty() {
        return Ok(Grid(Vec::new()));
    }
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| format!("cannot parse grid value '{t}'"))).collect::<Result<_, _>>().map(Grid)
}

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    #[arg(long, default_value = "2", value_parser = parse_complex, allow_hyphen_values = true)]
    pub b1: C64,
    #[arg(long, default_value = "3", value_parser = parse_complex, allow_hyphen_values = true)]
    pub b2: C64,
    #[arg(long, default_value = "0.1", value_parser = parse_complex, allow_hyphen_values = true)]
    pub s: C64,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// quadrature tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    /// series truncation order
    #[arg(long, default_value_t = 40)]
    pub order: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

impl CommonArgs {
    pub fn quadrature(&self) -> Result<QuadratureConfig, Error> {
        let mut cfg = QuadratureConfig::default();
        if let Some(t) = self.tol {
            cfg.tol = t;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Period matrices, τ, Riemann constant and structural diagnostics
    Periods {
        #[command(flatten)]
        curve: CurveArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Evaluate sigma, σ₃₃, al, theta or the elliptic functions at a point
    Eval {
        #[command(flatten)]
        curve: CurveArgs,
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value = "sigma")]
        function: Function,
        /// point as "re,im;re,im;..." (one entry per coordinate)
        /// omit with --function sigma33 to evaluate at the rotated branch half period
        #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
        u: Option<Point>,
        /// branch point index for al and σ₃₃ (0..=3)
        #[arg(long, default_value_t = 0)]
        branch: usize,
        /// ζ₃ rotation index c, or r for the elliptic al_r
        #[arg(long, default_value_t = 0)]
        rotation: i64,
    },
    /// Run identity suites; exit code 1 if any identity fails
    Verify {
        #[command(flatten)]
        curve: CurveArgs,
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        /// random draws per identity
        #[arg(long, default_value_t = 3)]
        draws: usize,
    },
    /// Degeneration sweeps over s
    Sweep {
        #[arg(long, default_value = "2", value_parser = parse_complex, allow_hyphen_values = true)]
        b1: C64,
        #[arg(long, default_value = "3", value_parser = parse_complex, allow_hyphen_values = true)]
        b2: C64,
        #[command(flatten)]
        common: CommonArgs,
        /// comma-separated s values
        #[arg(long, value_parser = parse_grid)]
        grid: Option<Grid>,
        /// period observable such as omega_p_13 or det_omega_p (repeatable)
        #[arg(long)]
        observable: Vec<String>,
        #[arg(long)]
        main_theorem: bool,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        x1: Option<C64>,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        x2: Option<C64>,
        /// sheets of the two genus-2 points
        #[arg(long, default_value_t = 0)]
        k1: i64,
        #[arg(long, default_value_t = 1)]
        k2: i64,
        /// shorthand for --x1 and --x2
        #[arg(long, num_args = 2, value_parser = parse_complex, allow_hyphen_values = true, conflicts_with_all = ["x1", "x2"])]
        point: Vec<C64>,
    },
    /// Constants and identity suite of y(y−s) = x³
    Elliptic {
        #[arg(long, default_value = "0.01", value_parser = parse_complex, allow_hyphen_values = true)]
        s: C64,
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 3)]
        draws: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub suite: String,
    pub identity: String,
    pub defect: f64,
    pub tol: f64,
    pub pass: bool,
}

impl IdentityCheck {
    pub fn new(suite: &str, identity: &str, defect: f64, tol: f64) -> Self {
        IdentityCheck { suite: suite.into(), identity: identity.into(), defect, tol, pass: defect <= tol }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub error: String,
    pub message: String,
}

impl ErrorReport {
    pub fn from_error(e: &Error) -> Self {
        let dbg = format!("{e:?}");
        let kind = dbg.split(['(', ' ', '{']).next().unwrap_or("Error").to_string();
        ErrorReport { error: kind, message: e.to_string() }
    }
}

fn rand_c(rng: &mut ChaCha8Rng, r: f64) -> C64 {
    c(rng.gen_range(-r..r), rng.gen_range(-r..r))
}

fn random_points(curve: &Curve, rng: &mut ChaCha8Rng, n: usize) -> Vec<(C64, i64)> {
    (0..n).map(|_| (random_regular_x(curve, rng), rng.gen_range(0..3))).collect()
}

fn worst(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| if x.is_nan() { f64::INFINITY } else { m.max(x) })
}

pub fn periods_suite(pd: &PeriodData, ctx: &SigmaContext) -> Result<Vec<IdentityCheck>, Error> {
    let d = &pd.diagnostics;
    let get = |k: &str| d.get(k).copied().unwrap_or(f64::NAN);
    let mut out = vec![
        IdentityCheck::new("periods", "legendre", get("legendre_defect"), 1e-8),
        IdentityCheck::new("periods", "conjugate_periods", get("conjugate_defect"), 1e-8),
        IdentityCheck::new("periods", "tau_cofactor", get("tau_cofactor_defect"), 1e-8),
        IdentityCheck::new("periods", "tau_symmetry", get("tau_symmetry_defect"), 1e-8),
        IdentityCheck::new("periods", "im_tau_positive", (-get("im_tau_min_eigenvalue")).max(0.0), 0.0),
        IdentityCheck::new("periods", "intersection", get("intersection_defect"), 1e-8),
    ];
    if pd.genus == 3 {
        out.push(IdentityCheck::new("periods", "v_relation", get("v_relation_defect"), 1e-8));
    }
    let hp = pd.half_periods();
    let mut res: f64 = 0.0;
    for a in 0..=pd.genus {
        for cc in 0..3 {
            res = res.max(lattice_decompose(&hp, &rotated_branch(ctx, a, cc), 3)?.residual);
        }
    }
    out.push(IdentityCheck::new("periods", "branch_third_periods_in_lattice", res, 1e-6));
    Ok(out)
}

pub fn theta_suite(pd: &PeriodData, rng: &mut ChaCha8Rng, draws: usize) -> Result<Vec<IdentityCheck>, Error> {
    let g = pd.genus;
    let mut qp: f64 = 0.0;
    let mut par: f64 = 0.0;
    let mut brute: f64 = 0.0;
    let tau2 = pd.tau.sub_block(0, 0, 2, 2);
    for _ in 0..draws {
        let z: Vec<C64> = (0..g).map(|_| rand_c(rng, 0.5)).collect();
        let m: Vec<i64> = (0..g).map(|_| rng.gen_range(-2..=2)).collect();
        let n: Vec<i64> = (0..g).map(|_| rng.gen_range(-2..=2)).collect();
        let p = ThetaParams::new(pd.tau.clone(), pd.delta.clone(), 1e-14)?;
        qp = qp.max(quasi_periodicity_defect(&z, &p, &m, &n)?);
        let mz: Vec<C64> = z.iter().map(|v| -v).collect();
        for chr in ThetaCharacteristic::all_half(g) {
            let sign = chr.parity() as f64;
            let p = p.with_char(chr);
            let (a, b) = (theta(&z, &p)?, theta(&mz, &p)?);
            par = par.max((b - a * sign).norm() / a.norm().max(1e-300));
        }
        let z2 = &z[..2];
        for chr in ThetaCharacteristic::all_half(2) {
            let p = ThetaParams::new(tau2.clone(), chr.clone(), 1e-14)?;
            let a = theta(z2, &p)?;
            let b = crate::theta::theta_brute(z2, &tau2, &chr, 12);
            brute = brute.max((a - b).norm() / b.norm().max(1.0));
        }
    }
    Ok(vec![
        IdentityCheck::new("theta", "quasi_periodicity", qp, 1e-9),
        IdentityCheck::new("theta", "parity_all_half_characteristics", par, 1e-9),
        IdentityCheck::new("theta", "brute_force_genus2", brute, 1e-12),
    ])
}

pub fn sigma_suite(ctx: &SigmaContext, rng: &mut ChaCha8Rng, draws: usize, cfg: &QuadratureConfig) -> Result<Vec<IdentityCheck>, Error> {
    let g = ctx.genus;
    let mut tr: f64 = 0.0;
    let mut par: f64 = 0.0;
    let mut div: f64 = 0.0;
    let curve = ctx.curve();
    for _ in 0..draws {
        let u: Vec<C64> = (0..g).map(|_| rand_c(rng, 0.3)).collect();
        let lp: Vec<i64> = (0..g).map(|_| rng.gen_range(-1..=1)).collect();
        let lpp: Vec<i64> = (0..g).map(|_| rng.gen_range(-1..=1)).collect();
        tr = tr.max(translation_defect(ctx, &u, &lp, &lpp)?);
        let mu: Vec<C64> = u.iter().map(|v| -v).collect();
        let a = ctx.sigma(&u)?;
        par = par.max((ctx.sigma(&mu)? - a * parity_sign(ctx)).norm() / a.norm());
        let pts = random_points(&curve, rng, g);
        div = div.max(divisor_ratio(ctx, &pts[..g - 1], pts[g - 1], cfg)?);
    }
    let schur = (ctx.schur_ratio(1e-3)? - 1.0).norm();
    Ok(vec![
        IdentityCheck::new("sigma", "translation_law", tr, 1e-8),
        IdentityCheck::new("sigma", "parity", par, 1e-10),
        IdentityCheck::new("sigma", "theta_divisor_vanishing", div, 1e-6),
        IdentityCheck::new("sigma", "schur_leading_term", schur, 1e-2),
    ])
}

pub fn al_suite(ctx: &SigmaContext, rng: &mut ChaCha8Rng, draws: usize, cfg: &QuadratureConfig) -> Result<Vec<IdentityCheck>, Error> {
    if ctx.genus != 3 {
        return Ok(Vec::new());
    }
    let curve = ctx.curve();
    let alcs: Vec<_> = (0..4).map(|a| make_al_context(ctx, a, 0)).collect::<Result<_, _>>()?;
    let mut cube: f64 = 0.0;
    let mut rot: f64 = 0.0;
    for _ in 0..draws {
        let xs = random_points(&curve, rng, 3);
        let (u, pts) = abel_sum(&curve, &xs, cfg)?;
        for alc in &alcs {
            cube = cube.max((al_cube_ratio(ctx, alc, &pts, &u)? - 1.0).norm());
            let v0 = al(ctx, alc, &u)?.powu(3);
            for cc in 1..3 {
                let other = make_al_context(ctx, alc.a, cc)?;
                rot = rot.max((al(ctx, &other, &u)?.powu(3) - v0).norm() / v0.norm());
            }
        }
    }
    Ok(vec![IdentityCheck::new("al", "cube_vs_radical", cube, 1e-6), IdentityCheck::new("al", "cube_rotation_independent", rot, 1e-6)])
}

pub fn hankel_suite(cfg: &QuadratureConfig, order: usize) -> Result<Vec<IdentityCheck>, Error> {
    let mut series: f64 = 0.0;
    let mut contour: f64 = 0.0;
    for s in [0.1, 0.05, 0.01] {
        let p = TrigonalFamilyParams::new(c(2.0, 1.0), c(3.0, 1.0), c(s, 0.0))?;
        let q = a1_quadrature(&p, cfg)?;
        series = series.max((a1_series(&p, order.max(20))? - q).norm() / q.norm());
        let rho = 0.5 * (s + 1.0);
        let i1 = i1_contour(&p, rho, cfg)?;
        let i2 = i2_quadrature(&p, cfg)?;
        contour = contour.max((i2 - i1 - q).norm() / q.norm());
    }
    Ok(vec![
        IdentityCheck::new("hankel", "a1_series_vs_quadrature", series, 1e-8),
        IdentityCheck::new("hankel", "hankel_decomposition", contour, 1e-8),
    ])
}

pub fn elliptic_suite(
    ctx: &EllipticContext,
    rng: &mut ChaCha8Rng,
    draws: usize,
    cfg: &QuadratureConfig,
) -> Result<Vec<IdentityCheck>, Error> {
    let e = "elliptic";
    let w = ctx.omega_p;
    let mut us = Vec::with_capacity(draws);
    for _ in 0..draws {
        us.push((w * rand_c(rng, 0.45), w * rand_c(rng, 0.45), (rng.gen_range(-2..=2), rng.gen_range(-2..=2))));
    }
    let mut form: f64 = 0.0;
    let mut rot: f64 = 0.0;
    let mut tr: f64 = 0.0;
    let mut add: f64 = 0.0;
    let mut kiep: f64 = 0.0;
    let mut prod: f64 = 0.0;
    let mut cube: f64 = 0.0;
    let mut period: f64 = 0.0;
    let mut cube3: f64 = 0.0;
    let mut phase: f64 = 0.0;
    for (u, v, (n, m)) in &us {
        form = form.max(weierstrass_form_defects(ctx, *u)?.0);
        let z = crate::numkernel::zeta3();
        let p = wp(ctx, *u)?;
        rot = rot
            .max((wp(ctx, z * u)? - z * p).norm() / p.norm())
            .max((wp_prime(ctx, z * u)? - wp_prime(ctx, *u)?).norm() / p.norm().powf(1.5));
        tr = tr.max(translation_defect_e(ctx, *u, *n, *m)?);
        add = add.max(addition_identity_defect(ctx, *u, *v)?);
        kiep = kiep.max(kiepert_defects(ctx, *u)?.0);
        let ad = al_identity_defects(ctx, *u)?;
        prod = prod.max(ad.product);
        cube = cube.max(worst(ad.cubes));
        period = period.max(worst(ad.periodicity)).max(ad.twisted);
        phase = phase.max(ad.ratio);
        let pd = product_identity_defects(ctx, *u)?;
        cube3 = cube3.max(worst([pd.minus, pd.plus, pd.cube_derived]));
    }
    let q = omega_p_quadrature(ctx.s, cfg)?;
    let so = sigma_at_omega_s(ctx)?;
    let k = kodaira_iv_expansion_check(ctx, 64)?;
    let t = sigma_taylor_check(ctx, 64)?;
    let h = half_lattice_points_check(ctx)?;
    let inv = &ctx.invariants;
    Ok(vec![
        IdentityCheck::new(e, "eta_omega", inv.eta_omega, 1e-12),
        IdentityCheck::new(e, "legendre", inv.legendre, 1e-12),
        IdentityCheck::new(e, "omega_closed_vs_quadrature", (q - w).norm() / w.norm(), 1e-9),
        IdentityCheck::new(e, "weierstrass_form", form, 1e-9),
        IdentityCheck::new(e, "zeta3_covariance", rot, 1e-9),
        IdentityCheck::new(e, "translation", tr, 1e-9),
        IdentityCheck::new(e, "addition", add, 1e-8),
        IdentityCheck::new(e, "kiepert", kiep, 1e-8),
        IdentityCheck::new(e, "sigma_omega_s_modulus", so.derived_defect, 1e-8),
        IdentityCheck::new(e, "sigma_omega_s_ninth_power", so.ninth_power_defect, 1e-8),
        IdentityCheck::new(e, "al_product", prod, 1e-8),
        IdentityCheck::new(e, "al_cube", cube, 1e-8),
        IdentityCheck::new(e, "al_phase", phase, 1e-8),
        IdentityCheck::new(e, "al_periodicity", period, 1e-8),
        IdentityCheck::new(e, "sigma_products_at_branch", cube3, 1e-8),
        IdentityCheck::new(e, "kodaira_u3", k.u3_defect, 1e-4),
        IdentityCheck::new(e, "kodaira_u6", k.u6_defect, 1e-3),
        IdentityCheck::new(e, "sigma_taylor_u7", t.u7_defect, 1e-6),
        IdentityCheck::new(e, "y_laurent", t.y_defect, 1e-6),
        IdentityCheck::new(e, "half_lattice_points", h.max_defect, 1e-8),
    ])
}

fn sigma_context(params: &TrigonalFamilyParams, cfg: &QuadratureConfig) -> Result<(PeriodData, SigmaContext), Error> {
    let pd = period_data(params, cfg)?;
    let ctx = make_sigma_context(params, pd.clone())?;
    Ok((pd, ctx))
}

pub fn run_verify(curve: &CurveArgs, common: &CommonArgs, suite: Suite, draws: usize) -> Result<Vec<IdentityCheck>, Error> {
    let cfg = common.quadrature()?;
    let params = TrigonalFamilyParams::new(curve.b1, curve.b2, curve.s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let mut out = Vec::new();
    let want = |s: Suite| suite == Suite::All || suite == s;
    let needs_curve = [Suite::Periods, Suite::Theta, Suite::Sigma, Suite::Al].into_iter().any(want);
    if needs_curve {
        let (pd, ctx) = sigma_context(&params, &cfg)?;
        if want(Suite::Periods) {
            out.extend(periods_suite(&pd, &ctx)?);
        }
        if want(Suite::Theta) {
            out.extend(theta_suite(&pd, &mut rng, draws)?);
        }
        if want(Suite::Sigma) {
            out.extend(sigma_suite(&ctx, &mut rng, draws, &cfg)?);
        }
        if want(Suite::Al) {
            out.extend(al_suite(&ctx, &mut rng, draws, &cfg)?);
        }
    }
    if want(Suite::Hankel) {
        out.extend(hankel_suite(&cfg, common.order)?);
    }
    if want(Suite::Elliptic) {
        let s = if curve.s == ZERO { c(0.01, 0.0) } else { curve.s };
        let ectx = make_elliptic_context(s)?;
        out.extend(elliptic_suite(&ectx, &mut rng, draws, &cfg)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalOutput {
    pub function: String,
    pub params: TrigonalFamilyParams,
    pub u: Vec<C64>,
    pub value: C64,
}

pub fn run_eval(
    curve: &CurveArgs,
    common: &CommonArgs,
    function: Function,
    u: &[C64],
    branch: usize,
    rotation: i64,
) -> Result<EvalOutput, Error> {
    let cfg = common.quadrature()?;
    let params = TrigonalFamilyParams::new(curve.b1, curve.b2, curve.s)?;
    let value = match function {
        Function::SigmaE | Function::Wp | Function::WpPrime | Function::AlE => {
            let ctx = make_elliptic_context(curve.s)?;
            let x = *u.first().ok_or_else(|| Error::InvalidParam("--u needs one coordinate".into()))?;
            match function {
                Function::SigmaE => sigma_e(&ctx, x)?,
                Function::Wp => wp(&ctx, x)?,
                Function::WpPrime => wp_prime(&ctx, x)?,
                _ => al_r(&ctx, rotation.rem_euclid(3) as usize, x)?,
            }
        }
        _ => {
            let (pd, ctx) = sigma_context(&params, &cfg)?;
            let g = pd.genus;
            if function != Function::Sigma33 && u.len() != g {
                return Err(Error::InvalidParam(format!("--u needs {g} coordinates")));
            }
            if branch > g {
                return Err(Error::InvalidParam(format!("branch index {branch} out of range")));
            }
            match function {
                Function::Sigma => ctx.sigma(u)?,
                Function::Sigma33 if u.is_empty() => sigma33_at_branch(&ctx, branch, rotation)?,
                Function::Sigma33 => {
                    if u.len() != g {
                        return Err(Error::InvalidParam(format!("--u needs {g} coordinates")));
                    }
                    ctx.sigma_kk(u, g - 1)?
                }
                Function::Al => {
                    if g != 3 {
                        return Err(Error::InvalidParam("al is defined for genus 3".into()));
                    }
                    let alc = make_al_context(&ctx, branch, rotation)?;
                    al(&ctx, &alc, u)?
                }
                _ => {
                    let p = ThetaParams::new(pd.tau.clone(), pd.delta.clone(), 1e-14)?;
                    theta(u, &p)?
                }
            }
        }
    };
    let name = format!("{function:?}").to_lowercase();
    Ok(EvalOutput { function: name, params, u: u.to_vec(), value })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepOutput {
    Scaling(Vec<DegenerationReport>),
    MainTheorem(Box<crate::degen::MainTheoremReport>),
}

#[allow(clippy::too_many_arguments)]
pub fn run_sweep(
    b1: C64,
    b2: C64,
    common: &CommonArgs,
    grid: Option<&[f64]>,
    observables: &[String],
    main_theorem: bool,
    points: [(Option<C64>, i64); 2],
) -> Result<SweepOutput, Error> {
    let cfg = common.quadrature()?;
    let default: &[f64] = if main_theorem { &MAIN_THEOREM_GRID } else { &DEFAULT_GRID };
    let grid = grid.unwrap_or(default);
    if grid.is_empty() {
        return Err(Error::InvalidParam("empty grid".into()));
    }
    if grid.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::InvalidParam("grid values must be positive".into()));
    }
    if main_theorem {
        let pts: Vec<(C64, i64)> = points.iter().map(|(x, k)| (x.unwrap_or(ZERO), *k)).collect();
        if points.iter().any(|(x, _)| x.is_none()) {
            return Err(Error::InvalidParam("--main-theorem needs --x1 and --x2".into()));
        }
        let reference = genus_two_reference(b1, b2, &cfg)?;
        let r = main_theorem_check(b1, b2, &pts, grid, &reference, &cfg)?;
        return Ok(SweepOutput::MainTheorem(Box::new(r)));
    }
    let names: Vec<String> = if observables.is_empty() { vec!["omega_p_13".into()] } else { observables.to_vec() };
    let pds = period_sweep(b1, b2, grid, &cfg)?;
    let reports = names.iter().map(|n| scaling_from_sweep(&pds, grid, n)).collect::<Result<Vec<_>, _>>()?;
    Ok(SweepOutput::Scaling(reports))
}

fn sweep_csv(out: &SweepOutput) -> Result<String, Error> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    let io = |e: csv::Error| Error::InvalidParam(format!("csv: {e}"));
    let mut comments = Vec::new();
    w.write_record(["s", "observable", "value_re", "value_im", "abs"]).map_err(io)?;
    match out {
        SweepOutput::Scaling(reports) => {
            for r in reports {
                for (s, v) in r.s_grid.iter().zip(&r.values) {
                    w.write_record([s.re.to_string(), r.observable.clone(), v.re.to_string(), v.im.to_string(), v.norm().to_string()])
                        .map_err(io)?;
                }
                comments.push(format!(
                    "# {} fitted_exponent={} limit_re={} limit_im={}",
                    r.observable, r.fitted_exponent, r.limit_estimate.re, r.limit_estimate.im
                ));
            }
        }
        SweepOutput::MainTheorem(m) => {
            for row in &m.rows {
                for (name, v) in [("ratio", row.ratio), ("printed_ratio", row.printed_ratio)] {
                    w.write_record([row.s.to_string(), name.to_string(), v.re.to_string(), v.im.to_string(), v.norm().to_string()])
                        .map_err(io)?;
                }
            }
            comments.push(format!(
                "# main_theorem modulus_limit={} phase_cube_defect={} printed_modulus_limit={} fitted_exponent={}",
                m.modulus_limit, m.phase_cube_defect, m.printed_modulus_limit, m.convergence.fitted_exponent
            ));
        }
    }
    let mut s = String::from_utf8(w.into_inner().map_err(|e| Error::InvalidParam(format!("csv: {e}")))?)
        .map_err(|e| Error::InvalidParam(e.to_string()))?;
    for c in comments {
        s.push_str(&c);
        s.push('\n');
    }
    Ok(s)
}

fn checks_csv(rows: &[IdentityCheck]) -> Result<String, Error> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::InvalidParam(format!("csv: {e}")))?;
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::InvalidParam(format!("csv: {e}")))?).map_err(|e| Error::InvalidParam(e.to_string()))
}

fn to_json<T: Serialize>(v: &T) -> Result<String, Error> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::InvalidParam(format!("json: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Error> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::InvalidParam(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).map_err(|e| Error::InvalidParam(e.to_string()))
        }
    }
}

/// Runs a parsed command and returns the process exit code (0 pass, 1 suite
/// failure, 2 numeric or usage error).
pub fn run(cli: Cli) -> ExitCode {
    match dispatch(&cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let text = to_json(&ErrorReport::from_error(&e)).unwrap_or_else(|_| format!("{{\"error\":\"{e}\"}}\n"));
            print!("{text}");
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: &Command) -> Result<u8, Error> {
    match cmd {
        Command::Periods { curve, common } => {
            let params = TrigonalFamilyParams::new(curve.b1, curve.b2, curve.s)?;
            let pd = period_data(&params, &common.quadrature()?)?;
            emit(&to_json(&pd)?, common.out.as_ref())?;
            Ok(0)
        }
        Command::Eval { curve, common, function, u, branch, rotation } => {
            let r = run_eval(curve, common, *function, u.as_ref().map(|p| p.0.as_slice()).unwrap_or(&[]), *branch, *rotation)?;
            emit(&to_json(&r)?, common.out.as_ref())?;
            Ok(0)
        }
        Command::Verify { curve, common, suite, draws } => {
            let rows = run_verify(curve, common, *suite, *draws)?;
            let text = match common.format {
                Format::Json => to_json(&rows)?,
                Format::Csv => checks_csv(&rows)?,
            };
            emit(&text, common.out.as_ref())?;
            Ok(if rows.iter().all(|r| r.pass) { 0 } else { 1 })
        }
        Command::Sweep { b1, b2, common, grid, observable, main_theorem, x1, x2, k1, k2, point } => {
            let (x1, x2) = match point.as_slice() {
                [p1, p2] => (Some(*p1), Some(*p2)),
                _ => (*x1, *x2),
            };
            let r = run_sweep(*b1, *b2, common, grid.as_ref().map(|g| g.0.as_slice()), observable, *main_theorem, [(x1, *k1), (x2, *k2)])?;
            let text = match common.format {
                Format::Json => to_json(&r)?,
                Format::Csv => sweep_csv(&r)?,
            };
            emit(&text, common.out.as_ref())?;
            Ok(0)
        }
        Command::Elliptic { s, common, draws } => {
            let ctx = make_elliptic_context(*s)?;
            let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
            let rows = elliptic_suite(&ctx, &mut rng, *draws, &common.quadrature()?)?;
            #[derive(Serialize)]
            struct Doc<'a> {
                context: crate::elliptic::EllipticSummary,
                identities: &'a [IdentityCheck],
            }
            let text = match common.format {
                Format::Json => to_json(&Doc { context: ctx.summary(), identities: &rows })?,
                Format::Csv => checks_csv(&rows)?,
            };
            emit(&text, common.out.as_ref())?;
            Ok(if rows.iter().all(|r| r.pass) { 0 } else { 1 })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parsers() {
        assert_eq!(parse_complex("0.1").unwrap(), c(0.1, 0.0));
        assert_eq!(parse_complex("2, -1").unwrap(), c(2.0, -1.0));
        assert!(parse_complex("a,b").is_err());
        assert_eq!(parse_vector("1,2;3").unwrap().0, vec![c(1.0, 2.0), c(3.0, 0.0)]);
        assert_eq!(parse_grid("1e-1,1e-2").unwrap().0, vec![0.1, 0.01]);
        assert!(parse_grid("").unwrap().0.is_empty());
    }

    #[test]
    fn error_report_kind() {
        let r = ErrorReport::from_error(&Error::InvalidParam("coincident branch points".into()));
        assert_eq!(r.error, "InvalidParam");
        assert!(r.message.contains("coincident branch points"));
        assert_eq!(ErrorReport::from_error(&Error::OnLattice).error, "OnLattice");
    }
}
