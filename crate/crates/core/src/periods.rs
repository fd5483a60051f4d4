//! Branch integrals ω_a, η_a along fixed contours, half-period matrices,
//! normalized period τ, Riemann constant and theta characteristic.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::{Curve, IteratedIntegral, Leg, TrigonalFamilyParams};
use crate::numkernel::{c, mat_inverse, solve_complex, solve_real, zeta3, zeta3_pow, ComplexMatrix, QuadratureConfig, C64, I, ZERO};
use crate::theta::{theta, ThetaCharacteristic, ThetaParams};
use crate::Error;

/// Entry angles of the canonical rays into B₀..B₃ and the sheet offsets applied
/// to each raw integral.
pub const RAY_ANGLES_G3: [f64; 4] = [-PI / 2.0, PI / 2.0, -PI / 2.0, -PI / 2.0];
pub const SHEETS_G3: [i64; 4] = [0, 2, 2, 0];
pub const RAY_ANGLES_G2: [f64; 3] = [-PI / 2.0, PI / 2.0, -PI / 2.0];
pub const SHEETS_G2: [i64; 3] = [0, 2, 2];

/// Fraction of the nearest-neighbour distance at which a ray hands over to the
/// local chart x = e + τ³.
const END_FRACTION: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchIntegrals {
    pub genus: usize,
    /// g × (g+1), column a = ∫_{γ_a} ν^I
    pub omega: ComplexMatrix,
    /// g × (g+1), column a = ∫_{γ_a} ν^II
    pub eta: ComplexMatrix,
}

impl BranchIntegrals {
    /// Full 2g-vector of column a (first kind then second kind).
    pub fn full_column(&self, a: usize) -> Vec<C64> {
        let mut v = self.omega.column(a);
        v.extend(self.eta.column(a));
        v
    }

    pub fn zero(genus: usize) -> Self {
        BranchIntegrals { genus, omega: ComplexMatrix::zeros(genus, genus + 1), eta: ComplexMatrix::zeros(genus, genus + 1) }
    }
}

/// ζ̂₃ pullback exponents of ν^I and ν^II rows.
pub fn row_exponents(genus: usize) -> (Vec<i64>, Vec<i64>) {
    if genus == 3 {
        (vec![1, 1, 2], vec![2, 2, 1])
    } else {
        (vec![1, 2], vec![2, 1])
    }
}

fn full_exponents(genus: usize) -> Vec<i64> {
    let (a, b) = row_exponents(genus);
    a.into_iter().chain(b).collect()
}

fn act(v: &[C64], exps: &[i64], k: i64) -> Vec<C64> {
    v.iter().zip(exps).map(|(z, e)| z * zeta3_pow(e * k)).collect()
}

pub fn ray_geometry(genus: usize) -> (&'static [f64], &'static [i64]) {
    if genus == 3 {
        (&RAY_ANGLES_G3, &SHEETS_G3)
    } else {
        (&RAY_ANGLES_G2, &SHEETS_G2)
    }
}

/// Raw legs of γ_a on the start sheet; the sheet offset is applied afterwards.
pub fn canonical_legs(curve: &Curve, a: usize) -> Vec<Leg> {
    let (angles, _) = ray_geometry(curve.genus);
    let e = curve.es[a];
    let d = curve.es.iter().enumerate().filter(|(j, _)| *j != a).map(|(_, e2)| (e - e2).norm()).fold(f64::INFINITY, f64::min);
    let dir = C64::from_polar(1.0, angles[a]);
    let r = curve.outer_radius();
    vec![Leg::Infinity { x0: e + dir * r, k: 0 }, Leg::Segment { to: e + dir * (END_FRACTION * d) }, Leg::ToBranch { a }]
}

/// Column a as a full 2g-vector, sheet offset included.
pub fn branch_column(curve: &Curve, a: usize, cfg: &QuadratureConfig) -> Result<Vec<C64>, Error> {
    let (_, sheets) = ray_geometry(curve.genus);
    let raw = curve.integrate_legs(&canonical_legs(curve, a), cfg)?;
    Ok(act(&raw.values, &full_exponents(curve.genus), sheets[a]))
}

pub fn branch_integrals(params: &TrigonalFamilyParams, cfg: &QuadratureConfig) -> Result<BranchIntegrals, Error> {
    cfg.validate()?;
    let curve = Curve::new(*params)?;
    branch_integrals_for(&curve, cfg)
}

pub fn branch_integrals_for(curve: &Curve, cfg: &QuadratureConfig) -> Result<BranchIntegrals, Error> {
    let g = curve.genus;
    let cols: Vec<Vec<C64>> = (0..=g).into_par_iter().map(|a| branch_column(curve, a, cfg)).collect::<Result<_, _>>()?;
    Ok(BranchIntegrals {
        genus: g,
        omega: ComplexMatrix::from_fn(g, g + 1, |i, a| cols[a][i]),
        eta: ComplexMatrix::from_fn(g, g + 1, |i, a| cols[a][g + i]),
    })
}

/// A cycle as a ℤ[ζ̂₃]-combination of branch integrals: (branch, [(power, coefficient)]).
pub type CycleSpec = Vec<(usize, Vec<(i64, f64)>)>;

/// Columns α₁..α₃, β₁..β₃ of W for genus 3. With `printed` the β₃ column keeps
/// the sign shown in the source table; otherwise it is negated so that the
/// basis is symplectic.
pub fn cycles_g3(printed: bool) -> Vec<CycleSpec> {
    let s = if printed { 1.0 } else { -1.0 };
    vec![
        vec![(1, vec![(1, 1.0), (0, -1.0)])],
        vec![(2, vec![(0, 1.0), (2, -1.0)])],
        vec![(0, vec![(1, 1.0), (2, -1.0)]), (3, vec![(2, 1.0), (1, -1.0)])],
        vec![(0, vec![(0, 1.0), (2, -1.0)]), (1, vec![(1, 1.0), (0, -1.0)]), (3, vec![(2, 1.0), (1, -1.0)])],
        vec![(1, vec![(2, 1.0), (0, -1.0)]), (2, vec![(0, 1.0), (2, -1.0)])],
        vec![(0, vec![(0, s), (2, -s)]), (3, vec![(2, s), (0, -s)])],
    ]
}

pub fn cycles_g2() -> Vec<CycleSpec> {
    vec![
        vec![(1, vec![(1, 1.0), (0, -1.0)])],
        vec![(2, vec![(0, 1.0), (2, -1.0)])],
        vec![(0, vec![(0, 1.0), (1, -1.0)]), (1, vec![(1, 1.0), (0, -1.0)])],
        vec![(1, vec![(2, 1.0), (0, -1.0)]), (2, vec![(0, 1.0), (2, -1.0)])],
    ]
}

/// Combinations of branch integrals that bound a disc.
pub fn null_cycle(genus: usize) -> CycleSpec {
    if genus == 3 {
        vec![(2, vec![(0, 1.0), (2, -1.0)]), (1, vec![(2, 1.0), (4, -1.0)]), (0, vec![(1, 1.0), (3, -1.0)]), (3, vec![(0, 1.0), (2, -1.0)])]
    } else {
        vec![(0, vec![(1, 1.0), (2, -1.0)]), (1, vec![(2, 1.0), (1, -1.0)]), (2, vec![(0, 1.0), (2, -1.0)])]
    }
}

/// Evaluates a cycle on the full 2g columns.
pub fn apply_cycle(bi: &BranchIntegrals, spec: &CycleSpec) -> Vec<C64> {
    let exps = full_exponents(bi.genus);
    let mut out = vec![ZERO; 2 * bi.genus];
    for (a, terms) in spec {
        let col = bi.full_column(*a);
        for (k, cf) in terms {
            for (o, v) in out.iter_mut().zip(act(&col, &exps, *k)) {
                *o += v * *cf;
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfPeriods {
    pub genus: usize,
    pub omega_p: ComplexMatrix,
    pub omega_pp: ComplexMatrix,
    pub eta_p: ComplexMatrix,
    pub eta_pp: ComplexMatrix,
}

fn assemble(bi: &BranchIntegrals, cycles: &[CycleSpec]) -> HalfPeriods {
    let g = bi.genus;
    let cols: Vec<Vec<C64>> = cycles.iter().map(|cy| apply_cycle(bi, cy).iter().map(|z| z * 0.5).collect()).collect();
    HalfPeriods {
        genus: g,
        omega_p: ComplexMatrix::from_fn(g, g, |i, j| cols[j][i]),
        omega_pp: ComplexMatrix::from_fn(g, g, |i, j| cols[g + j][i]),
        eta_p: ComplexMatrix::from_fn(g, g, |i, j| cols[j][g + i]),
        eta_pp: ComplexMatrix::from_fn(g, g, |i, j| cols[g + j][g + i]),
    }
}

/// (ω′, ω″, η′, η″) from genus-3 branch integrals with the symplectic W.
pub fn assemble_periods_g3(bi: &BranchIntegrals) -> HalfPeriods {
    assemble(bi, &cycles_g3(false))
}

/// Same with the β₃ column exactly as tabulated.
pub fn assemble_periods_g3_printed(bi: &BranchIntegrals) -> HalfPeriods {
    assemble(bi, &cycles_g3(true))
}

pub fn assemble_periods_g2(bi: &BranchIntegrals) -> HalfPeriods {
    assemble(bi, &cycles_g2())
}

pub fn assemble_periods(bi: &BranchIntegrals) -> HalfPeriods {
    if bi.genus == 3 {
        assemble_periods_g3(bi)
    } else {
        assemble_periods_g2(bi)
    }
}

pub fn null_identity_defect(bi: &BranchIntegrals) -> f64 {
    let v = apply_cycle(bi, &null_cycle(bi.genus));
    let scale = bi.omega.norm_max().max(bi.eta.norm_max()).max(f64::MIN_POSITIVE);
    v.iter().fold(0.0f64, |m, z| m.max(z.norm())) / scale
}

/// ‖ω_a − Σ_b V_{ba}(ω′_b)‖ / ‖ω‖ with the tabulated genus-3 V.
pub fn check_v_relation(bi: &BranchIntegrals, omega_p: &ComplexMatrix) -> f64 {
    // entries of (3/2)V as ℤ[ζ̂₃] polynomials, row b, column a
    let v: [[&[(i64, f64)]; 4]; 3] = [
        [&[(2, 1.0), (0, -1.0)], &[(2, 1.0), (0, -1.0)], &[], &[(2, 1.0), (0, -1.0)]],
        [&[(1, 1.0), (2, -1.0)], &[], &[(0, 1.0), (1, -1.0)], &[(1, 1.0), (2, -1.0)]],
        [&[(2, 1.0), (0, -1.0)], &[], &[], &[(1, 1.0), (0, -1.0)]],
    ];
    let (exps, _) = row_exponents(3);
    let mut worst = 0.0f64;
    for a in 0..4 {
        let mut rec = [ZERO; 3];
        for (b, row) in v.iter().enumerate() {
            let col = omega_p.column(b);
            for (k, cf) in row[a] {
                for (r, z) in rec.iter_mut().zip(act(&col, &exps, *k)) {
                    *r += z * (cf * 2.0 / 3.0);
                }
            }
        }
        for i in 0..3 {
            worst = worst.max((rec[i] - bi.omega[(i, a)]).norm());
        }
    }
    let scale = bi.omega.norm_max();
    if scale == 0.0 {
        0.0
    } else {
        worst / scale
    }
}

/// Max relative defect of the entrywise ω″/ω′ and η″/η′ identities. The
/// tabulated form uses fixed powers per row; the derived form uses ζ₃^{−r} with r
/// the pullback exponent of the row (and for genus 3 a positive third column,
/// matching the sign of the symplectic β₃).
pub fn check_conjugate_periods(hp: &HalfPeriods, printed: bool) -> f64 {
    let g = hp.genus;
    let (re_w, re_e) = row_exponents(g);
    let z = zeta3();
    let z2 = z * z;
    let mut worst = 0.0f64;
    let mut check = |pp: &ComplexMatrix, p: &ComplexMatrix, i: usize, k: C64, k3: C64| {
        let scale = p.row(i).iter().fold(0.0f64, |m, v| m.max(v.norm())).max(f64::MIN_POSITIVE);
        worst = worst.max((pp[(i, 0)] + k * p[(i, 1)]).norm() / scale);
        worst = worst.max((pp[(i, 1)] + k * p[(i, 0)] - p[(i, 1)]).norm() / scale);
        if g == 3 {
            worst = worst.max((pp[(i, 2)] - k3 * p[(i, 2)]).norm() / scale);
        }
    };
    for i in 0..g {
        let (kw, kw3, ke, ke3) = if printed {
            if g == 3 {
                if i < 2 {
                    (z2, -z, z, -z2)
                } else {
                    (z, -z2, z2, -z)
                }
            } else {
                (z2, ZERO, z, ZERO)
            }
        } else {
            (zeta3_pow(-re_w[i]), zeta3_pow(re_w[i]), zeta3_pow(-re_e[i]), zeta3_pow(re_e[i]))
        };
        check(&hp.omega_pp, &hp.omega_p, i, kw, kw3);
        check(&hp.eta_pp, &hp.eta_p, i, ke, ke3);
    }
    worst
}

pub fn compute_tau(hp: &HalfPeriods) -> Result<ComplexMatrix, Error> {
    let inv = mat_inverse(&hp.omega_p)?;
    Ok(&inv * &hp.omega_pp)
}

/// τ from the tabulated cofactor expressions.
pub fn tau_cofactor_formula(omega_p: &ComplexMatrix) -> ComplexMatrix {
    let w = |i: usize, j: usize| omega_p[(i - 1, j - 1)];
    let det = omega_p.det();
    let z = zeta3();
    let z2 = z * z;
    if omega_p.rows == 2 {
        let t1 = [[w(2, 2) * w(1, 2), w(1, 2) * w(2, 1)], [-w(1, 1) * w(2, 2), -w(1, 1) * w(2, 1)]];
        let t2 = [[w(2, 2) * w(1, 2), -w(1, 1) * w(2, 2)], [w(1, 2) * w(2, 1), w(2, 1) * w(1, 1)]];
        return ComplexMatrix::from_fn(2, 2, |i, j| {
            let base = if i == 1 && j == 1 { C64::from(1.0) } else { ZERO };
            base + (z * t1[i][j] + z2 * t2[i][j]) / det
        });
    }
    let a = w(1, 3) * w(2, 2) - w(1, 2) * w(2, 3);
    let b = w(1, 1) * w(2, 3) - w(1, 3) * w(2, 1);
    let cc = w(1, 2) * w(2, 1) - w(1, 1) * w(2, 2);
    let t1 = [
        [a * w(3, 2), a * w(3, 1), -a * w(3, 3)],
        [b * w(3, 2), b * w(3, 1), -b * w(3, 3)],
        [cc * w(3, 2), cc * w(3, 1), -b * w(3, 2) + a * w(3, 1)],
    ];
    let t2 = [
        [-a * w(3, 2), b * w(3, 2) + cc * w(3, 3), a * w(3, 3)],
        [cc * w(3, 3) + a * w(3, 1), (w(1, 3) * w(2, 1) - w(1, 1) * w(2, 2)) * w(3, 1), b * w(3, 3)],
        [-cc * w(3, 2), -cc * w(3, 1), cc * w(3, 3)],
    ];
    ComplexMatrix::from_fn(3, 3, |i, j| {
        let base = if i == 1 && j == 1 { C64::from(1.0) } else { ZERO };
        base + (z * t1[i][j] + z2 * t2[i][j]) / det
    })
}

/// τ = E₂₂ + (ζ₃/|ω′|)T₁ + (ζ₃²/|ω′|)T₂ with T₁, T₂ built from the adjugate of ω′
/// and the entrywise conjugate-period identities (row r of ω′ carries ζ̂₃-weight r).
pub fn tau_cofactor_blocks(omega_p: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let g = omega_p.rows;
    let (exps, _) = row_exponents(g);
    let adj = omega_p.cofactor().transpose();
    // ω″ = −Dω′S + ω′E₂₂ + D′ω′E₃₃ with D = diag ζ^{−r}, D′ = diag ζ^{r}
    let block = |power: i64| -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(g, g);
        for i in 0..g {
            let r = exps[i];
            if (-r).rem_euclid(3) == power {
                m[(i, 0)] -= omega_p[(i, 1)];
                m[(i, 1)] -= omega_p[(i, 0)];
            }
            if g == 3 && r.rem_euclid(3) == power {
                m[(i, 2)] += omega_p[(i, 2)];
            }
        }
        &adj * &m
    };
    (block(1), block(2))
}

pub fn tau_cofactor_derived(omega_p: &ComplexMatrix) -> ComplexMatrix {
    let (t1, t2) = tau_cofactor_blocks(omega_p);
    let det = omega_p.det();
    let z = zeta3();
    ComplexMatrix::from_fn(omega_p.rows, omega_p.rows, |i, j| {
        let base = if i == 1 && j == 1 { C64::from(1.0) } else { ZERO };
        base + (z * t1[(i, j)] + z * z * t2[(i, j)]) / det
    })
}

/// ᵗω′η″ − ᵗη′ω″, the symplectic pairing of first- and second-kind periods.
pub fn legendre_matrix(hp: &HalfPeriods) -> ComplexMatrix {
    &(&hp.omega_p.transpose() * &hp.eta_pp) - &(&hp.eta_p.transpose() * &hp.omega_pp)
}

/// ᵗω′η″ − ᵗω″η′ in the tabulated ordering.
pub fn legendre_matrix_printed(hp: &HalfPeriods) -> ComplexMatrix {
    &(&hp.omega_p.transpose() * &hp.eta_pp) - &(&hp.omega_pp.transpose() * &hp.eta_p)
}

/// Value of the Legendre matrix forced by the residue pairing of the
/// differentials and Im τ ≻ 0 with half periods: (πi/2)·(−R) with R = −I.
pub fn legendre_constant() -> C64 {
    -I * (PI / 2.0)
}

pub fn legendre_defect(hp: &HalfPeriods) -> f64 {
    (&legendre_matrix(hp) - &ComplexMatrix::identity(hp.genus).scale(legendre_constant())).norm_max()
}

/// Defect of ᵗω′η″ − ᵗω″η′ = (π/2)I taken literally.
pub fn legendre_defect_printed(hp: &HalfPeriods) -> f64 {
    (&legendre_matrix_printed(hp) - &ComplexMatrix::identity(hp.genus).scale(C64::from(PI / 2.0))).norm_max()
}

/// L₀ + ζ₃L₁ + ζ₃²L₂ assembled from the tabulated blocks (genus 3).
pub fn legendre_l_blocks(hp: &HalfPeriods) -> ComplexMatrix {
    let w = |i: usize, j: usize| hp.omega_p[(i - 1, j - 1)];
    let e = |i: usize, j: usize| hp.eta_p[(i - 1, j - 1)];
    let l0 = [
        [ZERO, e(1, 2) * w(1, 1) + e(2, 2) * w(2, 1) + e(3, 2) * w(3, 1), ZERO],
        [-e(1, 1) * w(1, 2) - e(2, 1) * w(2, 2) - e(3, 1) * w(3, 1), ZERO, -e(1, 3) * w(1, 2) - e(2, 3) * w(2, 2) - e(3, 3) * w(3, 2)],
        [ZERO, e(1, 2) * w(1, 3) + e(2, 2) * w(2, 3) + e(3, 2) * w(3, 3), ZERO],
    ];
    let l1 = [
        [
            -e(1, 2) * w(1, 1) - e(2, 2) * w(2, 1) + e(3, 1) * w(3, 2),
            -e(1, 1) * w(1, 1) - e(2, 1) * w(2, 1) + e(3, 2) * w(3, 2),
            -e(3, 3) * (w(3, 1) - w(3, 2)),
        ],
        [
            -e(1, 2) * w(1, 2) - e(2, 2) * w(2, 2) + e(3, 1) * w(3, 1),
            -e(1, 1) * w(1, 2) - e(2, 1) * w(2, 2) + e(3, 2) * w(3, 1),
            -e(3, 3) * (w(3, 1) - w(3, 2)),
        ],
        [
            (e(1, 1) - e(1, 2)) * w(1, 3) + (e(2, 1) - e(2, 2)) * w(2, 3),
            -(e(1, 1) - e(1, 2)) * w(1, 3) - (e(2, 1) - e(2, 2)) * w(2, 3),
            e(1, 3) * w(1, 3) - e(2, 3) * w(2, 3) - e(3, 3) * w(3, 3),
        ],
    ];
    let l2 = [
        [
            e(1, 1) * w(1, 2) + e(2, 1) * w(2, 2) - e(3, 2) * w(3, 1),
            e(1, 2) * w(1, 2) + e(2, 2) * w(2, 2) - e(3, 1) * w(3, 1),
            -e(1, 3) * (w(1, 1) - w(1, 2)) - e(2, 3) * (w(2, 1) - w(2, 2)),
        ],
        [
            e(1, 1) * w(1, 1) + e(2, 1) * w(2, 1) - e(3, 2) * w(3, 2),
            e(1, 2) * w(1, 1) + e(2, 2) * w(2, 1) - e(3, 1) * w(3, 2),
            e(1, 3) * (w(1, 1) - w(1, 2)) + e(2, 3) * (w(2, 1) - w(2, 2)),
        ],
        [(e(3, 1) - e(3, 2)) * w(3, 3), (e(3, 2) - e(3, 1)) * w(3, 3), -e(1, 3) * w(1, 3) - e(2, 3) * w(2, 3) + e(3, 3) * w(3, 3)],
    ];
    let z = zeta3();
    ComplexMatrix::from_fn(3, 3, |i, j| l0[i][j] + z * l1[i][j] + z * z * l2[i][j])
}

/// Residue pairing R_ij = Res_∞ (∫ν^I_i) ν^II_j computed from the t-expansions.
pub fn residue_matrix(curve: &Curve) -> ComplexMatrix {
    let g = curve.genus;
    let n = 16;
    ComplexMatrix::from_fn(g, g, |i, j| {
        let a = curve.t_series(i, n);
        let b = curve.t_series(g + j, n);
        let mut r = ZERO;
        for (e1, c1) in &a {
            let p = e1 + 1;
            for (e2, c2) in &b {
                if p + e2 == -1 {
                    r += c1 / p as f64 * c2;
                }
            }
        }
        r
    })
}

/// Intersection matrix of the assembled cycles recovered from the bilinear
/// relation M J⁻ᵀ Mᵀ = 2πi·[[0, R], [−Rᵀ, 0]]; canonical bases give [[0, I], [−I, 0]].
pub fn intersection_matrix(curve: &Curve, bi: &BranchIntegrals, cycles: &[CycleSpec]) -> Result<ComplexMatrix, Error> {
    let g = curve.genus;
    let cols: Vec<Vec<C64>> = cycles.iter().map(|cy| apply_cycle(bi, cy)).collect();
    let m = ComplexMatrix::from_fn(2 * g, 2 * g, |i, j| cols[j][i]);
    let r = residue_matrix(curve);
    let rr = ComplexMatrix::from_fn(2 * g, 2 * g, |i, j| {
        if i < g && j >= g {
            r[(i, j - g)] * (I * 2.0 * PI)
        } else if i >= g && j < g {
            -r[(j, i - g)] * (I * 2.0 * PI)
        } else {
            ZERO
        }
    });
    let left = solve_complex(&m, &rr)?;
    let jit = solve_complex(&m, &left.transpose())?.transpose();
    let inv = solve_complex(&jit, &ComplexMatrix::identity(2 * g))?;
    Ok(inv.transpose())
}

pub fn canonical_j(g: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(2 * g, 2 * g, |i, j| {
        if i < g && j == i + g {
            C64::from(1.0)
        } else if i >= g && j + g == i {
            C64::from(-1.0)
        } else {
            ZERO
        }
    })
}

/// Integer coordinates of denominator·v in the lattice ⟨2ω′, 2ω″⟩.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeCoords {
    pub l_p: Vec<i64>,
    pub l_pp: Vec<i64>,
    pub residual: f64,
}

pub fn lattice_real_coords(hp: &HalfPeriods, v: &[C64]) -> Result<Vec<f64>, Error> {
    let g = hp.genus;
    let mut a = vec![vec![0.0; 2 * g]; 2 * g];
    let mut rhs = vec![0.0; 2 * g];
    for i in 0..g {
        for j in 0..g {
            let p = hp.omega_p[(i, j)] * 2.0;
            let pp = hp.omega_pp[(i, j)] * 2.0;
            a[i][j] = p.re;
            a[i][g + j] = pp.re;
            a[g + i][j] = p.im;
            a[g + i][g + j] = pp.im;
        }
        rhs[i] = v[i].re;
        rhs[g + i] = v[i].im;
    }
    solve_real(&a, &rhs)
}

pub fn lattice_decompose(hp: &HalfPeriods, v: &[C64], denominator: u32) -> Result<LatticeCoords, Error> {
    if denominator == 0 {
        return Err(Error::InvalidParam("denominator must be at least 1".into()));
    }
    let g = hp.genus;
    let scaled: Vec<C64> = v.iter().map(|z| z * denominator as f64).collect();
    let x = lattice_real_coords(hp, &scaled)?;
    let residual = x.iter().fold(0.0f64, |m, t| m.max((t - t.round()).abs()));
    if residual > 1e-6 {
        return Err(Error::NotInLattice(residual));
    }
    Ok(LatticeCoords {
        l_p: x[..g].iter().map(|t| t.round() as i64).collect(),
        l_pp: x[g..].iter().map(|t| t.round() as i64).collect(),
        residual,
    })
}

/// Reduces a lattice vector to the lattice coset representative with coordinates in [0, 1).
pub fn reduce_mod_lattice(hp: &HalfPeriods, v: &[C64]) -> Result<Vec<C64>, Error> {
    let g = hp.genus;
    let x = lattice_real_coords(hp, v)?;
    let mut out = v.to_vec();
    for i in 0..g {
        for j in 0..g {
            out[i] -= hp.omega_p[(i, j)] * (2.0 * x[j].floor()) + hp.omega_pp[(i, j)] * (2.0 * x[g + j].floor());
        }
    }
    Ok(out)
}

/// Normalized coordinates (2ω′)⁻¹ v.
pub fn normalize(hp: &HalfPeriods, v: &[C64]) -> Result<Vec<C64>, Error> {
    let inv = mat_inverse(&hp.omega_p.scale(C64::from(2.0)))?;
    Ok(inv.mul_vec(v))
}

/// Iterated first-kind integrals along γ_a rotated by ζ̂₃^c (sheet offset included).
fn gamma_iterated(curve: &Curve, a: usize, cfg: &QuadratureConfig) -> Result<IteratedIntegral, Error> {
    curve.iterated_legs(&canonical_legs(curve, a), cfg)
}

/// α-cycles as sequences of (branch, rotation, reversed) pieces of γ-legs.
fn alpha_loops(genus: usize) -> Vec<Vec<(usize, i64, bool)>> {
    if genus == 3 {
        vec![
            vec![(1, 1, false), (1, 0, true)],
            vec![(2, 0, false), (2, 2, true)],
            vec![(0, 1, false), (0, 2, true), (3, 2, false), (3, 1, true)],
        ]
    } else {
        vec![vec![(1, 1, false), (1, 0, true)], vec![(2, 0, false), (2, 2, true)]]
    }
}

/// Normalized iterated integrals D°_kl = ∮_{α_i} w̃°_k ν°_l, one matrix per α-cycle,
/// with w̃° accumulated from ∞ along the loop.
pub fn alpha_loop_iterated(curve: &Curve, hp: &HalfPeriods, cfg: &QuadratureConfig) -> Result<Vec<ComplexMatrix>, Error> {
    let g = curve.genus;
    let (exps, _) = row_exponents(g);
    let (_, sheets) = ray_geometry(g);
    let needed: Vec<usize> = if g == 3 { vec![0, 1, 2, 3] } else { vec![1, 2] };
    let raw: BTreeMap<usize, IteratedIntegral> =
        needed.par_iter().map(|a| gamma_iterated(curve, *a, cfg).map(|it| (*a, it))).collect::<Result<_, _>>()?;
    let inv = mat_inverse(&hp.omega_p.scale(C64::from(2.0)))?;
    let mut out = Vec::new();
    for pieces in alpha_loops(g) {
        let mut acc = IteratedIntegral::zero(g);
        for (a, rot, rev) in &pieces {
            let mut it = raw[a].rotated(&exps, sheets[*a] + rot);
            if *rev {
                it = it.reversed();
            }
            acc = acc.then(&it);
        }
        let d = ComplexMatrix::from_fn(g, g, |k, l| acc.d[k][l]);
        out.push(&(&inv * &d) * &inv.transpose());
    }
    Ok(out)
}

/// ξ_j = τ_jj/2 + Σ_i ∮_{α_i} w̃°_i ν°_j.
pub fn riemann_constant(curve: &Curve, hp: &HalfPeriods, tau: &ComplexMatrix, cfg: &QuadratureConfig) -> Result<Vec<C64>, Error> {
    let g = curve.genus;
    let loops = alpha_loop_iterated(curve, hp, cfg)?;
    Ok((0..g).map(|j| tau[(j, j)] * 0.5 + (0..g).map(|i| loops[i][(i, j)]).sum::<C64>()).collect())
}

/// Writes v = τa + b with real a, b.
pub fn real_characteristic_coords(tau: &ComplexMatrix, v: &[C64]) -> Result<(Vec<f64>, Vec<f64>), Error> {
    let g = v.len();
    let a = solve_real(&tau.imag_part(), &v.iter().map(|z| z.im).collect::<Vec<_>>())?;
    let b = (0..g).map(|i| v[i].re - (0..g).map(|j| tau[(i, j)].re * a[j]).sum::<f64>()).collect();
    Ok((a, b))
}

fn half_reduce(x: f64) -> (f64, f64) {
    let twice = 2.0 * x;
    let r = twice.round();
    let v = r.rem_euclid(2.0) * 0.5;
    (v, (twice - r).abs())
}

/// Algebraic half characteristic of a half period in normalized coordinates.
pub fn algebraic_characteristic(tau: &ComplexMatrix, xi: &[C64]) -> Result<ThetaCharacteristic, Error> {
    let (a, b) = real_characteristic_coords(tau, xi)?;
    let mut worst = 0.0f64;
    let mut ra = Vec::new();
    let mut rb = Vec::new();
    for (x, y) in a.iter().zip(&b) {
        let (va, ea) = half_reduce(*x);
        let (vb, eb) = half_reduce(*y);
        worst = worst.max(ea).max(eb);
        ra.push(va);
        rb.push(vb);
    }
    if worst > 1e-6 {
        return Err(Error::NotHalfPeriod(worst));
    }
    ThetaCharacteristic::new(ra, rb)
}

/// Normalized Abel images of random effective divisors of degree g−1 (genus 3)
/// or of a single point shifted by the image of B₀ (genus 2).
pub fn divisor_test_points(
    curve: &Curve,
    hp: &HalfPeriods,
    bi: &BranchIntegrals,
    count: usize,
    seed: u64,
    cfg: &QuadratureConfig,
) -> Result<Vec<Vec<C64>>, Error> {
    let g = curve.genus;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<C64> = if g == 2 { bi.omega.column(0) } else { vec![ZERO; g] };
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut v = shift.clone();
        for _ in 0..g - 1 {
            let x = random_regular_x(curve, &mut rng);
            let k = rng.gen_range(0..3);
            let (w, _) = curve.abel(x, k, cfg)?;
            for (a, b) in v.iter_mut().zip(w) {
                *a += b;
            }
        }
        out.push(normalize(hp, &v)?);
    }
    Ok(out)
}

/// Random x in the disc |x| < 1.5·max|e|, kept away from branch points.
pub fn random_regular_x(curve: &Curve, rng: &mut ChaCha8Rng) -> C64 {
    let r = 1.5 * curve.max_branch_modulus().max(0.5);
    let dmin = 0.15
        * curve
            .es
            .iter()
            .enumerate()
            .flat_map(|(i, a)| curve.es[i + 1..].iter().map(move |b| (a - b).norm()))
            .fold(f64::INFINITY, f64::min);
    loop {
        let x = c(rng.gen_range(-r..r), rng.gen_range(-r..r));
        if x.norm() < r && curve.es.iter().all(|e| (x - e).norm() > dmin.min(0.3)) {
            return x;
        }
    }
}

/// Max of |θ[δ](z)| over the test points relative to |θ[δ]| at generic points.
pub fn divisor_vanishing(tau: &ComplexMatrix, chr: &ThetaCharacteristic, pts: &[Vec<C64>], generic: &[Vec<C64>]) -> Result<f64, Error> {
    let p = ThetaParams::new(tau.clone(), chr.clone(), 1e-13)?;
    let mut worst = 0.0f64;
    for z in pts {
        worst = worst.max(theta(z, &p)?.norm());
    }
    let mut scale = 0.0f64;
    for z in generic {
        scale = scale.max(theta(z, &p)?.norm());
    }
    Ok(worst / scale.max(f64::MIN_POSITIVE))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicReport {
    pub algebraic: Option<ThetaCharacteristic>,
    pub chosen: ThetaCharacteristic,
    /// relative |θ| on the divisor test points for the chosen characteristic
    pub vanishing: f64,
    pub agree: bool,
}

/// Characteristic from the shifted Riemann constant, cross-checked by the divisor
/// test. If the algebraic one is rejected, the unique half characteristic passing
/// the divisor test is returned.
pub fn characteristic_of(
    curve: &Curve,
    hp: &HalfPeriods,
    bi: &BranchIntegrals,
    tau: &ComplexMatrix,
    xi_shifted: &[C64],
    cfg: &QuadratureConfig,
) -> Result<CharacteristicReport, Error> {
    let g = curve.genus;
    let alg = algebraic_characteristic(tau, xi_shifted).ok();
    let pts = divisor_test_points(curve, hp, bi, 6, 0x5eed, cfg)?;
    // degree-g divisors as generic reference points
    let generic: Vec<Vec<C64>> = {
        let mut rng = ChaCha8Rng::seed_from_u64(0xface);
        let mut v = Vec::new();
        for p in &pts {
            let x = random_regular_x(curve, &mut rng);
            let (w, _) = curve.abel(x, rng.gen_range(0..3), cfg)?;
            let wn = normalize(hp, &w)?;
            v.push(p.iter().zip(wn).map(|(a, b)| a + b).collect());
        }
        v
    };
    let tol = 1e-6;
    if let Some(a) = &alg {
        let van = divisor_vanishing(tau, a, &pts, &generic)?;
        if van < tol {
            return Ok(CharacteristicReport { algebraic: alg.clone(), chosen: a.clone(), vanishing: van, agree: true });
        }
    }
    let mut passing = Vec::new();
    for chr in ThetaCharacteristic::all_half(g) {
        let van = divisor_vanishing(tau, &chr, &pts, &generic)?;
        if van < tol {
            passing.push((chr, van));
        }
    }
    if passing.len() != 1 {
        return Err(Error::AmbiguousCharacteristic(format!("{} characteristics pass the divisor test", passing.len())));
    }
    let (chosen, vanishing) = passing.pop().unwrap_or_else(|| unreachable!());
    Ok(CharacteristicReport { algebraic: alg, chosen, vanishing, agree: false })
}

/// Characteristic used by the sigma functions: genus 3 a = (0,0,½), b = (0,½,½);
/// genus 2 a = (0,0), b = (0,½) (relative to the Abel map shifted by ω̂₀).
pub fn sigma_characteristic(genus: usize) -> ThetaCharacteristic {
    if genus == 3 {
        ThetaCharacteristic { a: vec![0.0, 0.0, 0.5], b: vec![0.0, 0.5, 0.5] }
    } else {
        ThetaCharacteristic { a: vec![0.0, 0.0], b: vec![0.0, 0.5] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodData {
    pub genus: usize,
    pub params: TrigonalFamilyParams,
    pub omega_p: ComplexMatrix,
    pub omega_pp: ComplexMatrix,
    pub eta_p: ComplexMatrix,
    pub eta_pp: ComplexMatrix,
    pub tau: ComplexMatrix,
    pub branch: BranchIntegrals,
    /// Riemann constant in normalized coordinates (shifted by the image of B₀ for genus 2)
    pub xi: Vec<C64>,
    pub delta: ThetaCharacteristic,
    pub diagnostics: BTreeMap<String, f64>,
}

impl PeriodData {
    pub fn half_periods(&self) -> HalfPeriods {
        HalfPeriods {
            genus: self.genus,
            omega_p: self.omega_p.clone(),
            omega_pp: self.omega_pp.clone(),
            eta_p: self.eta_p.clone(),
            eta_pp: self.eta_pp.clone(),
        }
    }
}

/// Periods, τ and the structural diagnostics; no Riemann constant.
pub fn compute_periods(
    params: &TrigonalFamilyParams,
    cfg: &QuadratureConfig,
) -> Result<(Curve, BranchIntegrals, HalfPeriods, ComplexMatrix), Error> {
    cfg.validate()?;
    let curve = Curve::new(*params)?;
    let bi = branch_integrals_for(&curve, cfg)?;
    let hp = assemble_periods(&bi);
    let tau = compute_tau(&hp)?;
    Ok((curve, bi, hp, tau))
}

pub fn structural_diagnostics(curve: &Curve, bi: &BranchIntegrals, hp: &HalfPeriods, tau: &ComplexMatrix) -> BTreeMap<String, f64> {
    let g = curve.genus;
    let mut d = BTreeMap::new();
    d.insert("legendre_defect".into(), legendre_defect(hp));
    d.insert("legendre_defect_printed".into(), legendre_defect_printed(hp));
    d.insert("tau_symmetry_defect".into(), (tau - &tau.transpose()).norm_max());
    d.insert("im_tau_min_eigenvalue".into(), crate::numkernel::min_sym_eigenvalue(&tau.imag_part()));
    d.insert("null_identity_defect".into(), null_identity_defect(bi));
    d.insert("conjugate_defect".into(), check_conjugate_periods(hp, false));
    d.insert("conjugate_defect_printed".into(), check_conjugate_periods(hp, true));
    d.insert("tau_cofactor_defect".into(), (&tau_cofactor_derived(&hp.omega_p) - tau).norm_max());
    d.insert("tau_cofactor_defect_printed".into(), (&tau_cofactor_formula(&hp.omega_p) - tau).norm_max());
    let cycles = if g == 3 { cycles_g3(false) } else { cycles_g2() };
    if let Ok(j) = intersection_matrix(curve, bi, &cycles) {
        d.insert("intersection_defect".into(), (&j - &canonical_j(g)).norm_max());
    }
    if g == 3 {
        d.insert("v_relation_defect".into(), check_v_relation(bi, &hp.omega_p));
        d.insert("l_block_defect".into(), (&legendre_l_blocks(hp) - &legendre_matrix_printed(hp)).norm_max());
        if let Ok(j) = intersection_matrix(curve, bi, &cycles_g3(true)) {
            d.insert("intersection_defect_printed".into(), (&j - &canonical_j(g)).norm_max());
        }
    }
    d
}

/// Full period data including the Riemann constant and characteristic.
pub fn period_data(params: &TrigonalFamilyParams, cfg: &QuadratureConfig) -> Result<PeriodData, Error> {
    let (curve, bi, hp, tau) = compute_periods(params, cfg)?;
    let mut diagnostics = structural_diagnostics(&curve, &bi, &hp, &tau);
    let mut xi = riemann_constant(&curve, &hp, &tau, cfg)?;
    if curve.genus == 2 {
        let b0 = normalize(&hp, &bi.omega.column(0))?;
        for (x, s) in xi.iter_mut().zip(b0) {
            *x -= s;
        }
    }
    let report = characteristic_of(&curve, &hp, &bi, &tau, &xi, cfg)?;
    diagnostics.insert("characteristic_vanishing".into(), report.vanishing);
    diagnostics.insert("characteristic_algebraic_agrees".into(), if report.agree { 1.0 } else { 0.0 });
    let twice: Vec<C64> = xi.iter().map(|z| z * 2.0).collect();
    let two_omega_p = hp.omega_p.scale(C64::from(2.0));
    let unnorm = two_omega_p.mul_vec(&twice);
    let res = lattice_real_coords(&hp, &unnorm).map(|x| x.iter().fold(0.0f64, |m, t| m.max((t - t.round()).abs()))).unwrap_or(f64::NAN);
    diagnostics.insert("riemann_constant_half_period_residual".into(), res);
    Ok(PeriodData {
        genus: curve.genus,
        params: *params,
        omega_p: hp.omega_p,
        omega_pp: hp.omega_pp,
        eta_p: hp.eta_p,
        eta_pp: hp.eta_pp,
        tau,
        branch: bi,
        xi,
        delta: report.chosen,
        diagnostics,
    })
}
