//! The curves X_s: y³ = x(x−s)(x−b₁)(x−b₂) and, at s = 0, the normalization
//! X_0̂ given by y² = xz, zy = xk(x), z² = k(x)y with k(x) = (x−b₁)(x−b₂).
//! Differentials are stored as p(x) dx / (3 y^q).

use serde::{Deserialize, Serialize};

use crate::numkernel::{
    adaptive_panels, integrate_segment_n, iterated_segment, series_pow, zeta3, zeta3_pow, QuadratureConfig, C64, ONE, ZERO,
};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigonalFamilyParams {
    pub b1: C64,
    pub b2: C64,
    pub s: C64,
}

impl TrigonalFamilyParams {
    pub fn new(b1: C64, b2: C64, s: C64) -> Result<Self, Error> {
        let p = TrigonalFamilyParams { b1, b2, s };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), Error> {
        let pts = self.branch_points();
        let scale = pts.iter().fold(1.0f64, |m, z| m.max(z.norm()));
        for i in 0..pts.len() {
            if !pts[i].is_finite() {
                return Err(Error::InvalidParam("non-finite parameter".into()));
            }
            for j in 0..i {
                if (pts[i] - pts[j]).norm() <= 1e-12 * scale {
                    return Err(Error::InvalidParam("coincident branch points".into()));
                }
            }
        }
        Ok(())
    }

    pub fn genus(&self) -> usize {
        if self.s == ZERO {
            2
        } else {
            3
        }
    }

    /// Finite branch points B₀ = 0, B₁ = b₁, B₂ = b₂ and (genus 3) B₃ = s.
    pub fn branch_points(&self) -> Vec<C64> {
        if self.s == ZERO {
            vec![ZERO, self.b1, self.b2]
        } else {
            vec![ZERO, self.b1, self.b2, self.s]
        }
    }

    pub fn lambda3(&self) -> C64 {
        -(self.s + self.b1 + self.b2)
    }

    pub fn lambda2(&self) -> C64 {
        self.s * self.b1 + self.s * self.b2 + self.b1 * self.b2
    }

    pub fn k(&self, x: C64) -> C64 {
        (x - self.b1) * (x - self.b2)
    }

    /// f(x) = x(x−s)(x−b₁)(x−b₂).
    pub fn f(&self, x: C64) -> C64 {
        x * (x - self.s) * self.k(x)
    }

    /// f′ at a finite branch point (genus 3).
    pub fn f_prime_at(&self, e: C64) -> C64 {
        self.branch_points().iter().filter(|b| **b != e).map(|b| e - b).product()
    }

    /// Scales every branch point by c³ (weights x → c³x, y → c⁴y).
    pub fn rescaled(&self, c: C64) -> Self {
        let c3 = c * c * c;
        TrigonalFamilyParams { b1: self.b1 * c3, b2: self.b2 * c3, s: self.s * c3 }
    }
}

/// p(x) dx / (3 y^q), polynomial coefficients low to high.
#[derive(Debug, Clone, PartialEq)]
pub struct Differential {
    pub poly: Vec<C64>,
    pub q: u32,
}

impl Differential {
    fn new(poly: &[C64], q: u32) -> Self {
        Differential { poly: poly.to_vec(), q }
    }

    pub fn eval(&self, x: C64, y: C64) -> C64 {
        let mut p = ZERO;
        for c in self.poly.iter().rev() {
            p = p * x + c;
        }
        p / (y.powu(self.q) * 3.0)
    }

    /// Pullback multiplier under (x, y) → (x, ζ₃y).
    pub fn zeta_exponent(&self) -> i64 {
        -(self.q as i64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: C64,
    pub y: C64,
    /// z = y²/x on the genus-2 normalization.
    pub z: Option<C64>,
}

impl CurvePoint {
    pub fn genus3(x: C64, y: C64) -> Self {
        CurvePoint { x, y, z: None }
    }

    pub fn genus2(x: C64, y: C64) -> Self {
        CurvePoint { x, y, z: Some(y * y / x) }
    }

    pub fn equation_defect(&self, p: &TrigonalFamilyParams) -> f64 {
        match self.z {
            None => {
                let f = p.f(self.x);
                (self.y.powu(3) - f).norm() / (1.0 + f.norm())
            }
            Some(z) => {
                let k = p.k(self.x);
                let r1 = (self.y * self.y - self.x * z).norm();
                let r2 = (z * self.y - self.x * k).norm();
                let r3 = (z * z - k * self.y).norm();
                r1.max(r2).max(r3) / (1.0 + (self.x * k).norm())
            }
        }
    }

    /// The automorphism ζ̂₃(x, y, z) = (x, ζ₃y, ζ₃²z).
    pub fn rotate(&self) -> Self {
        CurvePoint { x: self.x, y: self.y * zeta3(), z: self.z.map(|z| z * zeta3().conj()) }
    }
}

/// One of the two curves with its differentials: the first g are of the
/// first kind, the next g of the second kind.
#[derive(Debug, Clone)]
pub struct Curve {
    pub params: TrigonalFamilyParams,
    pub genus: usize,
    pub es: Vec<C64>,
    pub ms: Vec<u32>,
    pub diffs: Vec<Differential>,
}

/// Coefficient of λ₃ in ν^II₁ that makes the residue pairing with the
/// holomorphic differentials diagonal.
pub const NU2_1_LAMBDA3_COEFF: f64 = 3.0;

impl Curve {
    pub fn new(params: TrigonalFamilyParams) -> Result<Self, Error> {
        params.validate()?;
        Ok(if params.genus() == 3 { Self::genus3(params) } else { Self::genus2(params) })
    }

    fn genus3(p: TrigonalFamilyParams) -> Self {
        Self::genus3_with_coeff(p, NU2_1_LAMBDA3_COEFF)
    }

    /// Genus-3 curve with ν^II₁ = −(5x² + κλ₃x + λ₂)dx/3y.
    pub fn genus3_with_coeff(p: TrigonalFamilyParams, kappa: f64) -> Self {
        let l2 = p.lambda2();
        let l3 = p.lambda3();
        let one = ONE;
        let diffs = vec![
            Differential::new(&[one], 2),
            Differential::new(&[ZERO, one], 2),
            Differential::new(&[one], 1),
            Differential::new(&[-l2, -l3 * kappa, C64::from(-5.0)], 1),
            Differential::new(&[ZERO, C64::from(-2.0)], 1),
            Differential::new(&[ZERO, ZERO, -one], 2),
        ];
        Curve { params: p, genus: 3, es: p.branch_points(), ms: vec![1, 1, 1, 1], diffs }
    }

    fn genus2(p: TrigonalFamilyParams) -> Self {
        let one = ONE;
        let diffs = vec![
            Differential::new(&[ZERO, one], 2),
            Differential::new(&[one], 1),
            Differential::new(&[ZERO, C64::from(-2.0)], 1),
            Differential::new(&[ZERO, ZERO, -one], 2),
        ];
        Curve { params: p, genus: 2, es: p.branch_points(), ms: vec![2, 1, 1], diffs }
    }

    pub fn ndiffs(&self) -> usize {
        self.diffs.len()
    }

    /// Diagonal pullback multipliers of ζ̂₃ on integral vectors, as powers of ζ₃.
    pub fn zeta_exponents(&self) -> Vec<i64> {
        self.diffs.iter().map(|d| d.zeta_exponent()).collect()
    }

    /// Applies ζ̂₃^k to an integral vector (length ≤ number of differentials).
    pub fn act(&self, v: &[C64], k: i64) -> Vec<C64> {
        v.iter().zip(self.zeta_exponents()).map(|(z, e)| z * zeta3_pow(e * k)).collect()
    }

    pub fn curve_value(&self, x: C64) -> C64 {
        self.es.iter().zip(&self.ms).map(|(e, m)| (x - e).powu(*m)).product()
    }

    pub fn eval_all(&self, x: C64, y: C64) -> Vec<C64> {
        self.diffs.iter().map(|d| d.eval(x, y)).collect()
    }

    pub fn max_branch_modulus(&self) -> f64 {
        self.es.iter().fold(0.0f64, |m, e| m.max(e.norm()))
    }

    /// y at x = t⁻³ on the canonical sheet y·t⁴ → 1.
    pub fn y_at_t(&self, t: C64) -> C64 {
        let u = t * t * t;
        let mut r = t.powi(-4);
        for (e, m) in self.es.iter().zip(&self.ms) {
            r *= (ONE - e * u).powf(*m as f64 / 3.0);
        }
        r
    }

    /// Radius in t below which the chart at infinity selects roots unambiguously.
    pub fn chart_radius(&self) -> f64 {
        0.5 * self.max_branch_modulus().max(1e-300).powf(-1.0 / 3.0)
    }

    pub fn infinity_parametrization(&self, t: C64) -> Result<CurvePoint, Error> {
        if t == ZERO || t.norm() >= self.chart_radius() {
            return Err(Error::OutOfChart(format!("|t| = {} outside (0, {})", t.norm(), self.chart_radius())));
        }
        let x = (t * t * t).inv();
        let y = self.y_at_t(t);
        Ok(if self.genus == 3 { CurvePoint::genus3(x, y) } else { CurvePoint::genus2(x, y) })
    }

    pub fn point(&self, x: C64, y: C64) -> CurvePoint {
        if self.genus == 3 {
            CurvePoint::genus3(x, y)
        } else {
            CurvePoint::genus2(x, y)
        }
    }

    /// The three roots of y³ = value at x.
    pub fn roots_at(&self, x: C64) -> [C64; 3] {
        let r = self.curve_value(x).powf(1.0 / 3.0);
        [r, r * zeta3(), r * zeta3().conj()]
    }

    /// Laurent coefficients in t of the integrand of differential i in the chart
    /// x = t⁻³: returns (exponent, coefficient) pairs of −p(t⁻³) t^{4q−4} G_q(t³).
    pub fn t_series(&self, i: usize, n: usize) -> Vec<(i64, C64)> {
        let d = &self.diffs[i];
        let g = series_pow(&self.es, &self.ms, -(d.q as f64) / 3.0, n);
        let mut out: Vec<(i64, C64)> = Vec::new();
        for (j, cj) in d.poly.iter().enumerate() {
            if *cj == ZERO {
                continue;
            }
            for (k, gk) in g.iter().enumerate() {
                let ex = -3 * j as i64 + 4 * d.q as i64 - 4 + 3 * k as i64;
                match out.iter_mut().find(|(e, _)| *e == ex) {
                    Some(slot) => slot.1 -= cj * gk,
                    None => out.push((ex, -cj * gk)),
                }
            }
        }
        out.sort_by_key(|(e, _)| *e);
        out
    }

    /// Number of series terms for the leg from infinity down to |x| = r.
    pub fn series_terms(&self, r: f64) -> usize {
        let ratio = self.max_branch_modulus() / r;
        if ratio <= 0.0 {
            return 4;
        }
        ((17.0 / -ratio.log10()).ceil() as usize + 6).min(400)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EndpointKind {
    Regular,
    BranchPoint(usize),
    Infinity,
}

/// A polyline in the x-plane. When `from_infinity` is set the path starts at
/// ∞ and reaches vertices[0] along the ray arg x = arg vertices[0], on the
/// sheet t₀ = ζ₃^sheet (1/x₀)^{1/3}; otherwise `start_sheet` is y at vertices[0].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub vertices: Vec<C64>,
    pub start_sheet: C64,
    pub from_infinity: Option<i64>,
    pub endpoint_kind: EndpointKind,
    /// Terminal t-value when the path ends on the chart at infinity.
    pub infinity_param: Option<C64>,
}

impl Contour {
    pub fn from_infinity(vertices: Vec<C64>, sheet: i64, end: EndpointKind) -> Self {
        Contour { vertices, start_sheet: ZERO, from_infinity: Some(sheet), endpoint_kind: end, infinity_param: None }
    }
}

/// Continuous selection of y along a contour by nearest-root stepping.
pub fn track_sheet(curve: &Curve, contour: &Contour, steps_per_edge: usize) -> Result<Vec<(C64, C64)>, Error> {
    if steps_per_edge < 8 {
        return Err(Error::InvalidParam("steps_per_edge must be at least 8".into()));
    }
    let v = &contour.vertices;
    if v.is_empty() {
        return Ok(Vec::new());
    }
    let mut y = match contour.from_infinity {
        Some(k) => curve.y_at_t((v[0]).inv().powf(1.0 / 3.0) * zeta3_pow(k)),
        None => contour.start_sheet,
    };
    let mut out = vec![(v[0], y)];
    for w in v.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut n = steps_per_edge;
        'edge: loop {
            let mut local = Vec::with_capacity(n);
            let mut yy = y;
            for k in 1..=n {
                let x = a + (b - a) * (k as f64 / n as f64);
                let roots = curve.roots_at(x);
                let sep = (roots[0] - roots[1]).norm();
                let (best, dist) =
                    roots.iter().map(|r| (*r, (r - yy).norm())).fold((roots[0], f64::INFINITY), |acc, c| if c.1 < acc.1 { c } else { acc });
                if sep == 0.0 {
                    return Err(Error::SheetAmbiguity(format!("path meets a branch point at {x}")));
                }
                if dist > 0.25 * sep {
                    if n > (1 << 22) {
                        return Err(Error::SheetAmbiguity(format!("cannot separate roots near {x}")));
                    }
                    n *= 2;
                    continue 'edge;
                }
                yy = best;
                local.push((x, yy));
            }
            y = yy;
            // keep the requested resolution in the output
            let stride = n / steps_per_edge;
            out.extend(local.iter().enumerate().filter(|(i, _)| (i + 1) % stride == 0).map(|(_, p)| *p));
            break;
        }
    }
    Ok(out)
}

/// Result of integrating all differentials along a path, plus optional
/// iterated integrals of the first-kind block.
#[derive(Debug, Clone)]
pub struct PathIntegral {
    pub values: Vec<C64>,
    pub y_end: C64,
}

/// y continued along the straight segment from (xa, ya) to x, valid while the
/// segment avoids every branch point.
pub fn continue_on_segment(curve: &Curve, xa: C64, ya: C64, x: C64) -> C64 {
    let mut r = ya;
    for (e, m) in curve.es.iter().zip(&curve.ms) {
        r *= ((x - e) / (xa - e)).powf(*m as f64 / 3.0);
    }
    r
}

fn to_array<const N: usize>(v: Vec<C64>) -> [C64; N] {
    let mut a = [ZERO; N];
    a.copy_from_slice(&v[..N]);
    a
}

/// Dispatches a const-generic kernel on the number of differentials.
macro_rules! with_n {
    ($n:expr, $body:ident, $($arg:expr),*) => {
        match $n {
            4 => $body::<4>($($arg),*),
            6 => $body::<6>($($arg),*),
            _ => unreachable!("unsupported differential count"),
        }
    };
}

fn seg_kernel<const N: usize>(curve: &Curve, xa: C64, ya: C64, xb: C64, cfg: &QuadratureConfig) -> Result<Vec<C64>, Error> {
    let f = |x: C64| -> [C64; N] {
        let y = continue_on_segment(curve, xa, ya, x);
        to_array(curve.eval_all(x, y))
    };
    integrate_segment_n(f, xa, xb, cfg).map(|a| a.to_vec())
}

fn end_kernel<const N: usize>(curve: &Curve, xa: C64, ya: C64, a: usize, cfg: &QuadratureConfig) -> Result<Vec<C64>, Error> {
    let (tau0, f) = end_integrand::<N>(curve, xa, ya, a);
    integrate_segment_n(f, tau0, ZERO, cfg).map(|a| a.to_vec())
}

/// Integrand in τ for the leg x = e_a + τ³ from xa down to the branch point.
fn end_integrand<'a, const N: usize>(curve: &'a Curve, xa: C64, ya: C64, a: usize) -> (C64, impl Fn(C64) -> [C64; N] + 'a) {
    let e = curve.es[a];
    let m = curve.ms[a];
    let tau0 = (xa - e).powf(1.0 / 3.0);
    let f = move |tau: C64| -> [C64; N] {
        let x = e + tau * tau * tau;
        let mut y = ya * (tau / tau0).powu(m);
        for (j, (e2, m2)) in curve.es.iter().zip(&curve.ms).enumerate() {
            if j != a {
                y *= ((x - e2) / (xa - e2)).powf(*m2 as f64 / 3.0);
            }
        }
        let mut v = to_array::<N>(curve.eval_all(x, y));
        for z in v.iter_mut() {
            *z *= tau * tau * 3.0;
        }
        v
    };
    (tau0, f)
}

/// A piece of a path; pieces are traversed in order carrying the sheet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Leg {
    /// From ∞ along the ray to x0, sheet selected by t₀ = ζ₃^k (1/x₀)^{1/3}.
    Infinity {
        x0: C64,
        k: i64,
    },
    /// From ∞ to the point with chart parameter t (x = t⁻³).
    InfinityT {
        t: C64,
    },
    Segment {
        to: C64,
    },
    ToBranch {
        a: usize,
    },
}

impl Curve {
    /// Finite-part integral of every differential from ∞ to t₀ in the t chart.
    pub fn infinity_leg(&self, t0: C64, nterms: usize) -> (Vec<C64>, C64) {
        let mut out = vec![ZERO; self.ndiffs()];
        for (i, slot) in out.iter_mut().enumerate() {
            for (ex, cf) in self.t_series(i, nterms) {
                debug_assert!(ex != -1, "no residue at infinity");
                *slot += cf * t0.powi((ex + 1) as i32) / (ex + 1) as f64;
            }
        }
        (out, self.y_at_t(t0))
    }

    /// Integrates all differentials along consecutive legs.
    pub fn integrate_legs(&self, legs: &[Leg], cfg: &QuadratureConfig) -> Result<PathIntegral, Error> {
        let mut total = vec![ZERO; self.ndiffs()];
        let mut x = ZERO;
        let mut y = ZERO;
        for leg in legs {
            let part = match *leg {
                Leg::Infinity { x0, k } => {
                    let t0 = x0.inv().powf(1.0 / 3.0) * zeta3_pow(k);
                    let (v, yy) = self.infinity_leg(t0, self.series_terms(x0.norm()));
                    x = x0;
                    y = yy;
                    v
                }
                Leg::InfinityT { t } => {
                    let x0 = (t * t * t).inv();
                    let (v, yy) = self.infinity_leg(t, self.series_terms(x0.norm()));
                    x = x0;
                    y = yy;
                    v
                }
                Leg::Segment { to } => {
                    let v = with_n!(self.ndiffs(), seg_kernel, self, x, y, to, cfg)?;
                    y = continue_on_segment(self, x, y, to);
                    x = to;
                    v
                }
                Leg::ToBranch { a } => {
                    let v = with_n!(self.ndiffs(), end_kernel, self, x, y, a, cfg)?;
                    x = self.es[a];
                    y = ZERO;
                    v
                }
            };
            for (t, p) in total.iter_mut().zip(part) {
                *t += p;
            }
        }
        Ok(PathIntegral { values: total, y_end: y })
    }

    /// Legs of a contour starting at infinity.
    pub fn contour_legs(&self, contour: &Contour) -> Result<Vec<Leg>, Error> {
        let k = contour.from_infinity.ok_or_else(|| Error::InvalidParam("contour must start at infinity".into()))?;
        let mut legs = vec![Leg::Infinity { x0: contour.vertices[0], k }];
        for v in &contour.vertices[1..] {
            legs.push(Leg::Segment { to: *v });
        }
        if let EndpointKind::BranchPoint(a) = contour.endpoint_kind {
            legs.push(Leg::ToBranch { a });
        }
        Ok(legs)
    }

    /// Radius of the circle where paths leave the chart at infinity.
    pub fn outer_radius(&self) -> f64 {
        3.0 * self.max_branch_modulus() + 1.0
    }

    /// Path from ∞ to a regular point x: down the ray through x to |x| (or to
    /// the outer radius first), then straight in. Bends around branch points that
    /// come too close to the radial segment.
    pub fn legs_to_point(&self, x: C64, k: i64) -> Vec<Leg> {
        let r = self.outer_radius().max(2.0 * x.norm());
        let dmin = |a: C64, b: C64| -> f64 {
            self.es
                .iter()
                .map(|e| {
                    let d = b - a;
                    let t = (((e - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
                    (a + d * t - e).norm()
                })
                .fold(f64::INFINITY, f64::min)
        };
        let th = x.arg();
        let x0 = C64::from_polar(r, th);
        let spread = self.es.iter().fold(f64::INFINITY, |m, e| m.min((e - x).norm()));
        if dmin(x0, x) > 0.2 * spread.min(1.0) {
            return vec![Leg::Infinity { x0, k }, Leg::Segment { to: x }];
        }
        // rotate the entry ray until the straight segment is clear
        for step in 1..=12 {
            for sgn in [1.0, -1.0] {
                let x1 = C64::from_polar(r, th + sgn * 0.15 * step as f64);
                if dmin(x1, x) > 0.2 * spread.min(1.0) {
                    return vec![Leg::Infinity { x0: x1, k }, Leg::Segment { to: x }];
                }
            }
        }
        vec![Leg::Infinity { x0, k }, Leg::Segment { to: x }]
    }

    /// Abel-type integral from ∞ to (x, sheet k) of all differentials.
    pub fn integral_to_point(&self, x: C64, k: i64, cfg: &QuadratureConfig) -> Result<PathIntegral, Error> {
        self.integrate_legs(&self.legs_to_point(x, k), cfg)
    }

    /// Integral from ∞ to the chart point t.
    pub fn integral_to_t(&self, t: C64) -> Vec<C64> {
        let x0 = (t * t * t).inv();
        self.infinity_leg(t, self.series_terms(x0.norm())).0
    }

    /// First-kind integrals only, from ∞ to x on sheet k.
    pub fn abel(&self, x: C64, k: i64, cfg: &QuadratureConfig) -> Result<(Vec<C64>, CurvePoint), Error> {
        let p = self.integral_to_point(x, k, cfg)?;
        Ok((p.values[..self.genus].to_vec(), self.point(x, p.y_end)))
    }

    /// Sheet index k at infinity whose continuation reaches (x, y).
    pub fn sheet_of(&self, x: C64, y: C64) -> Result<i64, Error> {
        let legs = self.legs_to_point(x, 0);
        let (x0, _) = match legs[0] {
            Leg::Infinity { x0, k } => (x0, k),
            _ => unreachable!(),
        };
        let t0 = x0.inv().powf(1.0 / 3.0);
        let y0 = self.y_at_t(t0);
        let y1 = continue_on_segment(self, x0, y0, x);
        for k in 0..3 {
            // the rotated start sheet continues to the rotated end value
            if (y1 * zeta3_pow(-4 * k) - y).norm() < 1e-8 * (1.0 + y.norm()) {
                return Ok(k);
            }
        }
        Err(Error::SheetAmbiguity(format!("no sheet reaches y = {y} at x = {x}")))
    }
}

/// Iterated integrals D_ij = ∫ F_i ν_j of the first-kind differentials along
/// legs, with F accumulated from the start of the path.
#[derive(Debug, Clone)]
pub struct IteratedIntegral {
    pub total: Vec<C64>,
    pub d: Vec<Vec<C64>>,
}

impl IteratedIntegral {
    pub fn zero(g: usize) -> Self {
        IteratedIntegral { total: vec![ZERO; g], d: vec![vec![ZERO; g]; g] }
    }

    /// Path concatenation: self followed by other.
    pub fn then(&self, other: &IteratedIntegral) -> Self {
        let g = self.total.len();
        let mut d = self.d.clone();
        for i in 0..g {
            for j in 0..g {
                d[i][j] += other.d[i][j] + self.total[i] * other.total[j];
            }
        }
        IteratedIntegral { total: self.total.iter().zip(&other.total).map(|(a, b)| a + b).collect(), d }
    }

    /// Same path traversed backwards.
    pub fn reversed(&self) -> Self {
        let g = self.total.len();
        let d = (0..g).map(|i| (0..g).map(|j| self.d[j][i]).collect()).collect();
        IteratedIntegral { total: self.total.iter().map(|z| -z).collect(), d }
    }

    /// Image under ζ̂₃^k with per-differential exponents.
    pub fn rotated(&self, exps: &[i64], k: i64) -> Self {
        let g = self.total.len();
        let f: Vec<C64> = (0..g).map(|i| zeta3_pow(exps[i] * k)).collect();
        IteratedIntegral {
            total: (0..g).map(|i| self.total[i] * f[i]).collect(),
            d: (0..g).map(|i| (0..g).map(|j| self.d[i][j] * f[i] * f[j]).collect()).collect(),
        }
    }
}

fn iter_seg_kernel<const N: usize>(curve: &Curve, xa: C64, ya: C64, xb: C64, cfg: &QuadratureConfig) -> Result<IteratedIntegral, Error> {
    let g = curve.genus;
    let f = |x: C64| -> [C64; N] {
        let y = continue_on_segment(curve, xa, ya, x);
        let v = curve.eval_all(x, y);
        let mut a = [ZERO; N];
        a[..g].copy_from_slice(&v[..g]);
        a
    };
    let (tot, d) = iterated_segment(f, xa, xb, cfg)?;
    Ok(IteratedIntegral { total: tot[..g].to_vec(), d: (0..g).map(|i| d[i][..g].to_vec()).collect() })
}

fn iter_end_kernel<const N: usize>(curve: &Curve, xa: C64, ya: C64, a: usize, cfg: &QuadratureConfig) -> Result<IteratedIntegral, Error> {
    let g = curve.genus;
    let (tau0, f) = end_integrand::<N>(curve, xa, ya, a);
    let (tot, d) = iterated_segment(f, tau0, ZERO, cfg)?;
    Ok(IteratedIntegral { total: tot[..g].to_vec(), d: (0..g).map(|i| d[i][..g].to_vec()).collect() })
}

impl Curve {
    /// Iterated first-kind integrals along legs (the first leg must start at ∞).
    pub fn iterated_legs(&self, legs: &[Leg], cfg: &QuadratureConfig) -> Result<IteratedIntegral, Error> {
        let g = self.genus;
        let mut acc = IteratedIntegral::zero(g);
        let mut x = ZERO;
        let mut y = ZERO;
        for leg in legs {
            let part = match *leg {
                Leg::Infinity { x0, k } => {
                    let t0 = x0.inv().powf(1.0 / 3.0) * zeta3_pow(k);
                    x = x0;
                    y = self.y_at_t(t0);
                    self.iterated_infinity(t0, self.series_terms(x0.norm()))
                }
                Leg::InfinityT { t } => {
                    x = (t * t * t).inv();
                    y = self.y_at_t(t);
                    self.iterated_infinity(t, self.series_terms(x.norm()))
                }
                Leg::Segment { to } => {
                    let p = with_n!(self.ndiffs(), iter_seg_kernel, self, x, y, to, cfg)?;
                    y = continue_on_segment(self, x, y, to);
                    x = to;
                    p
                }
                Leg::ToBranch { a } => {
                    let p = with_n!(self.ndiffs(), iter_end_kernel, self, x, y, a, cfg)?;
                    x = self.es[a];
                    y = ZERO;
                    p
                }
            };
            acc = acc.then(&part);
        }
        Ok(acc)
    }

    /// Iterated integrals on the chart leg from t = 0 to t₀, termwise.
    fn iterated_infinity(&self, t0: C64, n: usize) -> IteratedIntegral {
        let g = self.genus;
        let ser: Vec<Vec<(i64, C64)>> = (0..g).map(|i| self.t_series(i, n)).collect();
        let mut it = IteratedIntegral::zero(g);
        for i in 0..g {
            for (e, c) in &ser[i] {
                it.total[i] += c * t0.powi((e + 1) as i32) / (e + 1) as f64;
            }
        }
        for i in 0..g {
            for j in 0..g {
                let mut acc = ZERO;
                for (e1, c1) in &ser[i] {
                    for (e2, c2) in &ser[j] {
                        let p = e1 + 1 + e2 + 1;
                        acc += c1 * c2 * t0.powi(p as i32) / ((e1 + 1) as f64 * p as f64);
                    }
                }
                it.d[i][j] = acc;
            }
        }
        it
    }
}

/// Number of accepted panels for a segment; used to sanity-check quadrature effort.
pub fn panel_count(curve: &Curve, xa: C64, ya: C64, xb: C64, cfg: &QuadratureConfig) -> Result<usize, Error> {
    let f = |x: C64| -> [C64; 1] {
        let y = continue_on_segment(curve, xa, ya, x);
        [curve.diffs[0].eval(x, y)]
    };
    Ok(adaptive_panels(&f, xa, xb, cfg)?.len())
}

pub fn diff_first_kind_g3(p: &TrigonalFamilyParams, pt: &CurvePoint, i: usize) -> Result<C64, Error> {
    if pt.y == ZERO {
        return Err(Error::AtBranchPoint);
    }
    let y = pt.y;
    Ok(match i {
        1 => (y * y * 3.0).inv(),
        2 => pt.x / (y * y * 3.0),
        3 => (y * 3.0).inv(),
        _ => return Err(Error::InvalidParam(format!("index {i} out of range (p = {p:?})"))),
    })
}

pub fn diff_second_kind_g3(p: &TrigonalFamilyParams, pt: &CurvePoint, i: usize) -> Result<C64, Error> {
    if pt.y == ZERO {
        return Err(Error::AtBranchPoint);
    }
    let (x, y) = (pt.x, pt.y);
    Ok(match i {
        1 => -(x * x * 5.0 + p.lambda3() * x * NU2_1_LAMBDA3_COEFF + p.lambda2()) / (y * 3.0),
        2 => -(x * 2.0) / (y * 3.0),
        3 => -(x * x) / (y * y * 3.0),
        _ => return Err(Error::InvalidParam(format!("index {i} out of range"))),
    })
}

pub fn diff_first_kind_g2(pt: &CurvePoint, i: usize) -> Result<C64, Error> {
    let z = pt.z.unwrap_or_else(|| pt.y * pt.y / pt.x);
    match i {
        1 if z != ZERO && z.is_finite() => Ok((z * 3.0).inv()),
        2 if pt.y != ZERO => Ok((pt.y * 3.0).inv()),
        1 | 2 => Err(Error::AtBranchPoint),
        _ => Err(Error::InvalidParam(format!("index {i} out of range"))),
    }
}

pub fn diff_second_kind_g2(pt: &CurvePoint, i: usize) -> Result<C64, Error> {
    let z = pt.z.unwrap_or_else(|| pt.y * pt.y / pt.x);
    match i {
        1 if pt.y != ZERO => Ok(-(pt.x * 2.0) / (pt.y * 3.0)),
        2 if z != ZERO && z.is_finite() => Ok(-pt.x / (z * 3.0)),
        1 | 2 => Err(Error::AtBranchPoint),
        _ => Err(Error::InvalidParam(format!("index {i} out of range"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::c;

    fn params() -> TrigonalFamilyParams {
        TrigonalFamilyParams::new(c(2.0, 0.0), c(3.0, 0.0), c(0.1, 0.0)).unwrap()
    }

    #[test]
    fn validation_rejects_collisions() {
        assert!(TrigonalFamilyParams::new(c(2.0, 0.0), c(2.0, 0.0), c(0.1, 0.0)).is_err());
        assert!(TrigonalFamilyParams::new(c(2.0, 0.0), c(3.0, 0.0), c(2.0, 0.0)).is_err());
        assert_eq!(TrigonalFamilyParams::new(c(2.0, 0.0), c(3.0, 0.0), ZERO).unwrap().genus(), 2);
    }

    #[test]
    fn first_kind_values_and_rotation() {
        let p = params();
        let x = c(0.7, 0.4);
        let y = p.f(x).powf(1.0 / 3.0);
        let pt = CurvePoint::genus3(x, y);
        assert!(pt.equation_defect(&p) < 1e-14);
        assert!((diff_first_kind_g3(&p, &pt, 3).unwrap() - (y * 3.0).inv()).norm() < 1e-15);
        let rot = pt.rotate();
        let r = diff_first_kind_g3(&p, &rot, 1).unwrap() / diff_first_kind_g3(&p, &pt, 1).unwrap();
        assert!((r - zeta3()).norm() < 1e-14);
        let r3 = diff_second_kind_g3(&p, &rot, 3).unwrap() / diff_second_kind_g3(&p, &pt, 3).unwrap();
        assert!((r3 - zeta3()).norm() < 1e-14);
        let v = diff_second_kind_g3(&p, &CurvePoint::genus3(ZERO, y), 1).unwrap();
        assert!((v + p.lambda2() / (y * 3.0)).norm() < 1e-14);
        assert!(matches!(diff_first_kind_g3(&p, &CurvePoint::genus3(ZERO, ZERO), 1), Err(Error::AtBranchPoint)));
    }

    #[test]
    fn genus2_relations_and_rotation() {
        let p = TrigonalFamilyParams::new(c(2.0, 0.0), c(3.0, 0.0), ZERO).unwrap();
        let x = c(0.3, -1.1);
        let y = (x * x * p.k(x)).powf(1.0 / 3.0);
        let pt = CurvePoint::genus2(x, y);
        assert!(pt.equation_defect(&p) < 1e-14);
        assert!(pt.rotate().equation_defect(&p) < 1e-14);
        let r = diff_first_kind_g2(&pt.rotate(), 1).unwrap() / diff_first_kind_g2(&pt, 1).unwrap();
        assert!((r - zeta3()).norm() < 1e-14);
        let r = diff_second_kind_g2(&pt.rotate(), 2).unwrap() / diff_second_kind_g2(&pt, 2).unwrap();
        assert!((r - zeta3()).norm() < 1e-14);
        let z = pt.z.unwrap();
        assert!((diff_second_kind_g2(&pt, 2).unwrap() + x / (z * 3.0)).norm() < 1e-15);
    }

    #[test]
    fn genus2_near_b0_matches_puiseux() {
        // z = x^{1/3} k(x)^{2/3} near B₀, so ν̂^I₁/dx ≈ t⁻¹ k(0)^{-2/3} / 3 at x = t³
        let p = TrigonalFamilyParams::new(c(2.0, 0.0), c(3.0, 0.0), ZERO).unwrap();
        let t = c(1e-3, 0.0);
        let x = t * t * t;
        let y = (x * x * p.k(x)).powf(1.0 / 3.0);
        let v = diff_first_kind_g2(&CurvePoint::genus2(x, y), 1).unwrap();
        let lead = t.inv() * p.k(ZERO).powf(-2.0 / 3.0) / 3.0;
        assert!((v / lead - 1.0).norm() < 1e-6);
    }

    #[test]
    fn chart_at_infinity() {
        let cv = Curve::new(params()).unwrap();
        let t = c(0.05, 0.02);
        let pt = cv.infinity_parametrization(t).unwrap();
        assert!(pt.equation_defect(&cv.params) < 1e-12);
        assert!((pt.y * t.powi(4) - 1.0).norm() < 1e-3);
        assert!(cv.infinity_parametrization(c(10.0, 0.0)).is_err());
        // u ≈ (−t⁵/5, −t²/2, −t) along x = t⁻³
        let u = cv.integral_to_t(c(1e-3, 0.0));
        assert!((u[2] + 1e-3).norm() < 1e-9);
        assert!((u[1] + 0.5e-6).norm() < 1e-11);
        assert!((u[0] + 2e-16).norm() < 1e-19);
    }

    #[test]
    fn tracking_monodromy() {
        let cv = Curve::new(params()).unwrap();
        let x0 = c(1.2, 0.3);
        let y0 = cv.roots_at(x0)[0];
        let constant = Contour {
            vertices: vec![x0, x0],
            start_sheet: y0,
            from_infinity: None,
            endpoint_kind: EndpointKind::Regular,
            infinity_param: None,
        };
        let path = track_sheet(&cv, &constant, 8).unwrap();
        assert!(path.iter().all(|(_, y)| (*y - y0).norm() < 1e-14));
        // small square around b₁ = 2
        let b = c(2.0, 0.0);
        let r = 0.2;
        let start = b + c(r, 0.0);
        let ys = cv.roots_at(start)[0];
        let square = vec![start, b + c(r, r), b + c(-r, r), b + c(-r, -r), b + c(r, -r), start];
        let loop1 =
            Contour { vertices: square, start_sheet: ys, from_infinity: None, endpoint_kind: EndpointKind::Regular, infinity_param: None };
        let tr = track_sheet(&cv, &loop1, 16).unwrap();
        let ratio = tr.last().unwrap().1 / ys;
        assert!((ratio - zeta3()).norm() < 1e-10);
        // big square around all finite branch points
        let r = 6.0;
        let big = vec![c(r, 0.5), c(r, r), c(-r, r), c(-r, -r), c(r, -r), c(r, 0.5)];
        let yb = cv.roots_at(big[0])[1];
        let loop2 =
            Contour { vertices: big, start_sheet: yb, from_infinity: None, endpoint_kind: EndpointKind::Regular, infinity_param: None };
        let tr = track_sheet(&cv, &loop2, 32).unwrap();
        let ratio = tr.last().unwrap().1 / yb;
        // total monodromy of y around four simple branch points is ζ₃⁴ = ζ₃ (the point at ∞ ramifies)
        assert!((ratio - zeta3()).norm() < 1e-10, "ratio {ratio}");
    }

    #[test]
    fn tracking_agrees_with_product_continuation() {
        let cv = Curve::new(params()).unwrap();
        let xa = c(-1.0, -4.0);
        let ya = cv.roots_at(xa)[2];
        let xb = c(2.5, 1.5);
        let ct = Contour {
            vertices: vec![xa, xb],
            start_sheet: ya,
            from_infinity: None,
            endpoint_kind: EndpointKind::Regular,
            infinity_param: None,
        };
        let tr = track_sheet(&cv, &ct, 64).unwrap();
        let yb = continue_on_segment(&cv, xa, ya, xb);
        assert!((tr.last().unwrap().1 - yb).norm() < 1e-12);
    }

    #[test]
    fn differential_matches_abel_derivative() {
        let cv = Curve::new(params()).unwrap();
        let cfg = QuadratureConfig::default();
        let x = c(1.0, 0.0);
        let h = 1e-4;
        let legs = cv.legs_to_point(x, 0);
        let mut fwd = legs.clone();
        fwd.push(Leg::Segment { to: x + h });
        let mut bwd = legs.clone();
        bwd.push(Leg::Segment { to: x - h });
        let a = cv.integrate_legs(&fwd, &cfg).unwrap();
        let b = cv.integrate_legs(&bwd, &cfg).unwrap();
        let y = cv.integrate_legs(&legs, &cfg).unwrap().y_end;
        let deriv = (a.values[1] - b.values[1]) / (2.0 * h);
        let pt = CurvePoint::genus3(x, y);
        assert!((deriv - diff_first_kind_g3(&cv.params, &pt, 2).unwrap()).norm() < 1e-8);
    }
}
