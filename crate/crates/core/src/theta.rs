//! Riemann theta with half-integer characteristics, classical convention
//! θ[a;b](z;τ) = Σ_n exp(πi(n+a)ᵗτ(n+a) + 2πi(n+a)ᵗ(z+b)).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::numkernel::{min_sym_eigenvalue, solve_real, ComplexMatrix, C64, I, ONE, ZERO};
use crate::Error;

/// Largest admissible half-width of the summation box per coordinate.
pub const MAX_RADIUS: i64 = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaCharacteristic {
    /// δ″ (shift of the summation index)
    pub a: Vec<f64>,
    /// δ′ (shift of the argument)
    pub b: Vec<f64>,
}

impl ThetaCharacteristic {
    pub fn zero(g: usize) -> Self {
        ThetaCharacteristic { a: vec![0.0; g], b: vec![0.0; g] }
    }

    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self, Error> {
        if a.len() != b.len() {
            return Err(Error::InvalidParam("characteristic halves differ in length".into()));
        }
        for v in a.iter().chain(&b) {
            if *v != 0.0 && *v != 0.5 {
                return Err(Error::InvalidParam(format!("characteristic entry {v} not in {{0, 1/2}}")));
            }
        }
        Ok(ThetaCharacteristic { a, b })
    }

    pub fn genus(&self) -> usize {
        self.a.len()
    }

    /// +1 for even, −1 for odd.
    pub fn parity(&self) -> i32 {
        let s: f64 = self.a.iter().zip(&self.b).map(|(x, y)| 4.0 * x * y).sum();
        if (s.round() as i64) % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// All 4^g half characteristics, ordered by the bit pattern (a bits high).
    pub fn all_half(g: usize) -> Vec<Self> {
        (0..1usize << (2 * g))
            .map(|m| {
                let a = (0..g).map(|i| if m >> (2 * g - 1 - i) & 1 == 1 { 0.5 } else { 0.0 }).collect();
                let b = (0..g).map(|i| if m >> (g - 1 - i) & 1 == 1 { 0.5 } else { 0.0 }).collect();
                ThetaCharacteristic { a, b }
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct ThetaParams {
    pub tau: ComplexMatrix,
    pub chr: ThetaCharacteristic,
    pub tol: f64,
    im_tau: Vec<Vec<f64>>,
    min_eig: f64,
}

impl ThetaParams {
    pub fn new(tau: ComplexMatrix, chr: ThetaCharacteristic, tol: f64) -> Result<Self, Error> {
        let g = tau.rows;
        if tau.cols != g || chr.genus() != g || g == 0 {
            return Err(Error::InvalidParam("tau and characteristic sizes disagree".into()));
        }
        let sym = (&tau - &tau.transpose()).norm_max();
        if sym > 1e-8 * tau.norm_max().max(1.0) {
            return Err(Error::InvalidParam(format!("tau not symmetric (defect {sym:e})")));
        }
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::InvalidParam("tol must lie in (0, 1)".into()));
        }
        let im_tau = tau.imag_part();
        let min_eig = min_sym_eigenvalue(&im_tau);
        if !(min_eig > 0.0) {
            return Err(Error::InvalidParam(format!("Im tau not positive definite (min eigenvalue {min_eig:e})")));
        }
        Ok(ThetaParams { tau, chr, tol, im_tau, min_eig })
    }

    pub fn with_char(&self, chr: ThetaCharacteristic) -> Self {
        ThetaParams { chr, ..self.clone() }
    }

    pub fn genus(&self) -> usize {
        self.tau.rows
    }

    fn quad(&self, v: &[f64]) -> C64 {
        let g = v.len();
        let mut s = ZERO;
        for i in 0..g {
            for j in 0..g {
                s += self.tau[(i, j)] * (v[i] * v[j]);
            }
        }
        s
    }

    /// Saddle point m* = −(Im τ)⁻¹ Im(z) of the Gaussian in m = n + a.
    fn saddle(&self, z: &[C64]) -> Result<Vec<f64>, Error> {
        let y: Vec<f64> = z.iter().map(|w| -w.im).collect();
        solve_real(&self.im_tau, &y)
    }

    /// Quadratic-form radius (in units of (m−m*)ᵗ Im τ (m−m*)) for the tail bound.
    fn form_radius(&self) -> f64 {
        // tail terms are at most exp(−π r) relative to the peak; the extra 3 covers
        // the polynomial growth of the number of lattice points
        (-(self.tol * 1e-2).ln()) / PI + 3.0
    }

    fn box_halfwidths(&self, r: f64) -> Result<Vec<i64>, Error> {
        let g = self.genus();
        let mut out = Vec::with_capacity(g);
        for i in 0..g {
            let mut e = vec![0.0; g];
            e[i] = 1.0;
            let col = solve_real(&self.im_tau, &e)?;
            let w = (r * col[i]).sqrt().ceil() as i64 + 1;
            if w > MAX_RADIUS {
                return Err(Error::TruncationOverflow(format!(
                    "half-width {w} exceeds {MAX_RADIUS} (min eigenvalue of Im tau {:e})",
                    self.min_eig
                )));
            }
            out.push(w);
        }
        Ok(out)
    }
}

fn for_each_point(center: &[i64], w: &[i64], mut f: impl FnMut(&[i64])) {
    let g = center.len();
    let mut n: Vec<i64> = center.iter().zip(w).map(|(c, w)| c - w).collect();
    loop {
        f(&n);
        let mut k = g;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if n[k] < center[k] + w[k] {
                n[k] += 1;
                for j in k + 1..g {
                    n[j] = center[j] - w[j];
                }
                break;
            }
        }
    }
}

fn dot(a: &[f64], z: &[C64]) -> C64 {
    a.iter().zip(z).map(|(x, w)| w * x).sum()
}

/// Directional derivative weights Π_k 2πi (m·d_k).
fn deriv_weight(m: &[f64], dirs: &[&[C64]]) -> C64 {
    dirs.iter().map(|d| I * 2.0 * PI * dot(m, d)).product()
}

/// Directional derivative ∂_{d₁}…∂_{d_k} θ[a;b](z;τ) by direct summation around
/// the recentred saddle. With no directions this is θ itself.
pub fn theta_derivative(z: &[C64], p: &ThetaParams, dirs: &[&[C64]]) -> Result<C64, Error> {
    let g = p.genus();
    if z.len() != g || dirs.iter().any(|d| d.len() != g) {
        return Err(Error::InvalidParam("argument length differs from genus".into()));
    }
    let ms = p.saddle(z)?;
    let r = p.form_radius() + 2.0 * dirs.len() as f64;
    let w = p.box_halfwidths(r)?;
    let center: Vec<i64> = (0..g).map(|i| (ms[i] - p.chr.a[i]).round() as i64).collect();
    let zb: Vec<C64> = (0..g).map(|i| z[i] + p.chr.b[i]).collect();
    // subtract the peak exponent so partial sums stay in range
    let peak = {
        let m: Vec<f64> = (0..g).map(|i| center[i] as f64 + p.chr.a[i]).collect();
        (I * PI * p.quad(&m) + I * 2.0 * PI * dot(&m, &zb)).re
    };
    let mut sum = ZERO;
    let mut m = vec![0.0; g];
    for_each_point(&center, &w, |n| {
        for i in 0..g {
            m[i] = n[i] as f64 + p.chr.a[i];
        }
        let dm: Vec<f64> = (0..g).map(|i| m[i] - ms[i]).collect();
        let form: f64 = (0..g).map(|i| (0..g).map(|j| dm[i] * p.im_tau[i][j] * dm[j]).sum::<f64>()).sum();
        if form > r {
            return;
        }
        let e = I * PI * p.quad(&m) + I * 2.0 * PI * dot(&m, &zb);
        sum += (e - peak).exp() * deriv_weight(&m, dirs);
    });
    Ok(sum * peak.exp())
}

/// θ[a;b](z;τ). Near the origin of the fundamental cell the ±m terms are paired so
/// that the surviving parity component is summed without cancellation.
pub fn theta(z: &[C64], p: &ThetaParams) -> Result<C64, Error> {
    let g = p.genus();
    if z.len() != g {
        return Err(Error::InvalidParam("argument length differs from genus".into()));
    }
    let ms = p.saddle(z)?;
    if ms.iter().any(|v| v.abs() >= 0.5) {
        return theta_derivative(z, p, &[]);
    }
    let shift: f64 = {
        let q: f64 = (0..g).map(|i| (0..g).map(|j| ms[i] * p.im_tau[i][j] * ms[j]).sum::<f64>()).sum();
        q.sqrt()
    };
    let r = (p.form_radius().sqrt() + shift).powi(2);
    let w = p.box_halfwidths(r)?;
    let parity = p.chr.parity();
    let mut sum = ZERO;
    let mut m = vec![0.0; g];
    let zero_center = vec![0i64; g];
    for_each_point(&zero_center, &w, |n| {
        for i in 0..g {
            m[i] = n[i] as f64 + p.chr.a[i];
        }
        // keep one representative of each ±m pair; m = 0 stands alone
        let lead = m.iter().find(|v| **v != 0.0);
        let single = match lead {
            None => true,
            Some(v) if *v > 0.0 => false,
            Some(_) => return,
        };
        let form: f64 = (0..g).map(|i| (0..g).map(|j| m[i] * p.im_tau[i][j] * m[j]).sum::<f64>()).sum();
        if form > r {
            return;
        }
        let q = (I * PI * p.quad(&m)).exp();
        let phase_b = 2.0 * PI * m.iter().zip(&p.chr.b).map(|(x, y)| x * y).sum::<f64>();
        let arg = dot(&m, z) * (2.0 * PI);
        let t = if parity == 1 { arg.cos() * phase_b.cos() } else { -(arg.sin() * phase_b.sin()) };
        sum += if single { q * t } else { q * t * 2.0 };
    });
    Ok(sum)
}

/// Naive enumeration over the box |n_i| ≤ radius.
pub fn theta_brute(z: &[C64], tau: &ComplexMatrix, chr: &ThetaCharacteristic, radius: i64) -> C64 {
    let g = z.len();
    let mut sum = ZERO;
    let zero = vec![0i64; g];
    let w = vec![radius; g];
    for_each_point(&zero, &w, |n| {
        let m: Vec<f64> = (0..g).map(|i| n[i] as f64 + chr.a[i]).collect();
        let mut e = ZERO;
        for i in 0..g {
            for j in 0..g {
                e += tau[(i, j)] * (m[i] * m[j]);
            }
            e += (z[i] + chr.b[i]) * (2.0 * m[i]);
        }
        sum += (I * PI * e).exp();
    });
    sum
}

/// Multiplier of θ under z → z + m + τn.
pub fn quasi_periodicity_factor(z: &[C64], p: &ThetaParams, m: &[i64], n: &[i64]) -> C64 {
    let g = z.len();
    let nf: Vec<f64> = n.iter().map(|v| *v as f64).collect();
    let am: f64 = (0..g).map(|i| p.chr.a[i] * m[i] as f64).sum();
    let nz: C64 = (0..g).map(|i| (z[i] + p.chr.b[i]) * nf[i]).sum();
    (I * 2.0 * PI * am - I * PI * p.quad(&nf) - I * 2.0 * PI * nz).exp()
}

pub fn quasi_periodicity_defect(z: &[C64], p: &ThetaParams, m: &[i64], n: &[i64]) -> Result<f64, Error> {
    let g = z.len();
    let shifted: Vec<C64> = (0..g).map(|i| z[i] + m[i] as f64 + (0..g).map(|j| p.tau[(i, j)] * n[j] as f64).sum::<C64>()).collect();
    let lhs = theta(&shifted, p)?;
    let rhs = quasi_periodicity_factor(z, p, m, n) * theta(z, p)?;
    Ok((lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(f64::MIN_POSITIVE))
}

/// θ(0; i) for g = 1 in closed form, π^{1/4}/Γ(3/4).
pub fn theta_constant_i() -> f64 {
    let g34 = crate::numkernel::gamma_fn(C64::from(0.75)).map(|v| v.re).unwrap_or(f64::NAN);
    PI.powf(0.25) / g34
}

pub fn one_vec(g: usize, k: usize) -> Vec<C64> {
    (0..g).map(|i| if i == k { ONE } else { ZERO }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::c;

    fn tau2() -> ComplexMatrix {
        ComplexMatrix::from_fn(2, 2, |i, j| if i == j { c(0.1 * (i as f64 + 1.0), 1.0 + 0.3 * i as f64) } else { c(0.2, 0.35) })
    }

    fn tau3() -> ComplexMatrix {
        let v = [
            [c(0.2, 1.1), c(-0.1, 0.3), c(0.25, -0.2)],
            [c(-0.1, 0.3), c(0.4, 0.9), c(0.1, 0.15)],
            [c(0.25, -0.2), c(0.1, 0.15), c(-0.3, 1.3)],
        ];
        ComplexMatrix::from_fn(3, 3, |i, j| v[i][j])
    }

    #[test]
    fn genus_one_constant() {
        let p = ThetaParams::new(ComplexMatrix::diag(&[I]), ThetaCharacteristic::zero(1), 1e-14).unwrap();
        let v = theta(&[ZERO], &p).unwrap();
        assert!((v.re - 1.086_434_811_213_308).abs() < 1e-14);
        assert!((v.re - theta_constant_i()).abs() < 1e-13);
        let brute = theta_brute(&[ZERO], &p.tau, &p.chr, 12);
        assert!((v - brute).norm() < 1e-15);
    }

    #[test]
    fn matches_brute_force_low_genus() {
        let z = [c(0.3, -0.2), c(-0.45, 0.6)];
        for chr in ThetaCharacteristic::all_half(2) {
            let p = ThetaParams::new(tau2(), chr.clone(), 1e-14).unwrap();
            let brute = theta_brute(&z, &p.tau, &chr, 14);
            assert!((theta(&z, &p).unwrap() - brute).norm() < 1e-12 * brute.norm().max(1.0));
            let zs = [z[0] * 0.01, z[1] * 0.01];
            let brute = theta_brute(&zs, &p.tau, &chr, 14);
            assert!((theta(&zs, &p).unwrap() - brute).norm() < 1e-12 * brute.norm().max(1.0));
        }
    }

    #[test]
    fn paired_and_direct_agree() {
        let z = [c(0.05, 0.02), c(-0.01, 0.03), c(0.02, -0.04)];
        for chr in ThetaCharacteristic::all_half(3).into_iter().step_by(7) {
            let p = ThetaParams::new(tau3(), chr, 1e-14).unwrap();
            let a = theta(&z, &p).unwrap();
            let b = theta_derivative(&z, &p, &[]).unwrap();
            assert!((a - b).norm() < 1e-13 * a.norm().max(1.0));
        }
    }

    #[test]
    fn parity_of_all_characteristics() {
        let z = [c(0.13, 0.07), c(-0.21, 0.05), c(0.08, -0.11)];
        let mz: Vec<C64> = z.iter().map(|v| -v).collect();
        let chars = ThetaCharacteristic::all_half(3);
        assert_eq!(chars.len(), 64);
        assert_eq!(chars.iter().filter(|c| c.parity() == -1).count(), 28);
        for chr in chars {
            let p = ThetaParams::new(tau3(), chr.clone(), 1e-13).unwrap();
            let a = theta(&z, &p).unwrap();
            let b = theta(&mz, &p).unwrap();
            assert!((a - b * chr.parity() as f64).norm() < 1e-12 * a.norm().max(1e-3));
            if chr.parity() == -1 {
                assert!(theta(&[ZERO; 3], &p).unwrap().norm() < 1e-15);
            }
        }
    }

    #[test]
    fn quasi_periodicity() {
        let chr = ThetaCharacteristic::new(vec![0.0, 0.5, 0.5], vec![0.5, 0.0, 0.5]).unwrap();
        let p = ThetaParams::new(tau3(), chr, 1e-14).unwrap();
        let z = [c(0.3, 0.1), c(-0.2, -0.25), c(0.45, 0.05)];
        assert_eq!(quasi_periodicity_defect(&z, &p, &[0, 0, 0], &[0, 0, 0]).unwrap(), 0.0);
        for (m, n) in [([1, 0, 0], [0, 0, 0]), ([0, -2, 1], [1, 0, -1]), ([0, 0, 0], [0, 1, 0]), ([3, 1, -2], [-1, 2, 1])] {
            assert!(quasi_periodicity_defect(&z, &p, &m, &n).unwrap() < 1e-10);
        }
        // an odd characteristic vanishes at the origin, so use the even one there
        let p0 = p.with_char(ThetaCharacteristic::zero(3));
        let d = quasi_periodicity_defect(&[ZERO; 3], &p0, &[0, 0, 0], &[0, 1, 0]).unwrap();
        assert!(d < 1e-10);
    }

    #[test]
    fn derivative_matches_difference() {
        let p = ThetaParams::new(tau3(), ThetaCharacteristic::zero(3), 1e-14).unwrap();
        let z = [c(0.1, 0.2), c(0.3, -0.1), c(-0.2, 0.05)];
        let d = [c(0.3, 0.1), c(-0.5, 0.0), c(1.0, 0.2)];
        let h = 1e-5;
        let zp: Vec<C64> = (0..3).map(|i| z[i] + d[i] * h).collect();
        let zm: Vec<C64> = (0..3).map(|i| z[i] - d[i] * h).collect();
        let fd = (theta(&zp, &p).unwrap() - theta(&zm, &p).unwrap()) / (2.0 * h);
        let an = theta_derivative(&z, &p, &[&d]).unwrap();
        assert!((fd - an).norm() < 1e-7 * an.norm());
        let fd2 = (theta(&zp, &p).unwrap() - theta(&z, &p).unwrap() * 2.0 + theta(&zm, &p).unwrap()) / (h * h);
        let an2 = theta_derivative(&z, &p, &[&d, &d]).unwrap();
        assert!((fd2 - an2).norm() < 1e-4 * an2.norm());
    }

    #[test]
    fn rejects_bad_tau() {
        let bad = ComplexMatrix::diag(&[c(0.0, -1.0)]);
        assert!(ThetaParams::new(bad, ThetaCharacteristic::zero(1), 1e-12).is_err());
        let flat = ComplexMatrix::diag(&[c(0.0, 1e-6)]);
        let p = ThetaParams::new(flat, ThetaCharacteristic::zero(1), 1e-12).unwrap();
        assert!(matches!(theta(&[c(0.0, 0.0)], &p), Err(Error::TruncationOverflow(_))));
    }
}
