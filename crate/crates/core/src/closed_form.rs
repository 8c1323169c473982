//! Closed-form and implicit net-reproductive-number formulas for the named
//! example families, their model builders, the two-patch quadratic and
//! three-patch cubic, and critical-dispersion root finding.
//!
//! Every formula here has a second life through the generic pipeline
//! (assemble + analyze); the test suites compare the two routes.

use crate::bracket::bisect;
use crate::demography::{build_usher, StageVitals};
use crate::dispersion::DispersionSpec;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::GlobalModel;
use crate::scalar::Scalar;

/// Closed form for a three-stage population in which only the third stage
/// reproduces: `f3 s32 s21 / [(1 - s11)(1 - s22)(1 - s33)]`.
pub fn usher_three_stage_r0<T: Scalar>(v: &StageVitals<T>) -> T {
    assert_eq!(v.stages(), 3, "formula is for three stages");
    assert!(
        v.fecundity()[0] == T::zero() && v.fecundity()[1] == T::zero(),
        "only the third stage may reproduce"
    );
    let f3 = v.fecundity()[2];
    let s21 = v.advance()[0];
    let s32 = v.advance()[1];
    let denom = (T::one() - v.stay()[0]) * (T::one() - v.stay()[1]) * (T::one() - v.stay()[2]);
    f3 * s32 * s21 / denom
}

/// Two patches coupled only through newborn dispersal: the local
/// dispersion-free net reproductive numbers and the stay-home
/// probabilities of newborns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPatchNewbornDispersal<T> {
    pub r0_1: T,
    pub r0_2: T,
    pub d11: T,
    pub d22: T,
}

impl<T: Scalar> TwoPatchNewbornDispersal<T> {
    pub fn new(r0_1: T, r0_2: T, d11: T, d22: T) -> Result<Self> {
        for (name, v) in [("d11", d11), ("d22", d22)] {
            if !(v >= T::zero() && v <= T::one()) {
                return Err(Error::InvalidDispersion {
                    stage: 1,
                    patch: if name == "d11" { 1 } else { 2 },
                    reason: format!("stay-home probability {v} outside [0, 1]"),
                });
            }
        }
        for (patch, v) in [(1, r0_1), (2, r0_2)] {
            if !(v.is_finite() && v >= T::zero()) {
                return Err(Error::InvalidVitals {
                    stage: patch,
                    reason: format!("local net reproductive number {v} must be nonnegative"),
                });
            }
        }
        Ok(TwoPatchNewbornDispersal { r0_1, r0_2, d11, d22 })
    }
}

/// The quadratic whose largest root is the global net reproductive number
/// of the two-patch newborn-dispersal family, evaluated at `rho`:
/// `rho^2 - (d11 R1 + d22 R2) rho + (d11 + d22 - 1) R1 R2`.
pub fn two_patch_quadratic_residual<T: Scalar>(p: &TwoPatchNewbornDispersal<T>, rho: T) -> T {
    let b = p.d11 * p.r0_1 + p.d22 * p.r0_2;
    let c = (p.d11 + p.d22 - T::one()) * p.r0_1 * p.r0_2;
    rho * rho - b * rho + c
}

/// Global net reproductive number of the two-patch newborn-dispersal
/// family: the larger root of the quadratic.
pub fn two_patch_r0<T: Scalar>(p: &TwoPatchNewbornDispersal<T>) -> T {
    let b = p.d11 * p.r0_1 + p.d22 * p.r0_2;
    let disc = b * b + T::of(4.0) * (T::one() - p.d11 - p.d22) * p.r0_1 * p.r0_2;
    let half = T::of(0.5);
    half * (b + disc.max(T::zero()).sqrt())
}

/// Inter-patch transmissions of a reduced three-patch graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreePatchTransmissions<T> {
    pub xi12: T,
    pub xi21: T,
    pub xi13: T,
    pub xi31: T,
    pub xi23: T,
    pub xi32: T,
}

/// Loop condition of the reduced three-patch graph, written so that the
/// value is zero at the net reproductive number:
/// `x12 x21 + x13 x31 + x23 x32 + x12 x23 x31 + x13 x32 x21 - 1`.
pub fn three_patch_residual<T: Scalar>(t: &ThreePatchTransmissions<T>) -> T {
    t.xi12 * t.xi21 + t.xi13 * t.xi31 + t.xi23 * t.xi32
        + t.xi12 * t.xi23 * t.xi31
        + t.xi13 * t.xi32 * t.xi21
        - T::one()
}

/// Reduced transmission from patch `j` to patch `i` of the newborn
/// dispersal family at candidate `rho`:
/// `d1(i,j) R0(j) / (rho - d1(j,j) R0(j))`.
///
/// Errors when the denominator is not positive, which is the
/// isolated-patch degeneracy (the patch alone already balances at `rho`).
pub fn xi_transmission<T: Scalar>(d_ij: T, d_jj: T, r0_j: T, rho: T) -> Result<T> {
    let denom = rho - d_jj * r0_j;
    if denom <= T::zero() {
        return Err(Error::DegenerateTransmission {
            denominator: denom.as_f64(),
        });
    }
    Ok(d_ij * r0_j / denom)
}

/// Unique positive root of `u^3 - a u - b` for `a, b > 0`, by bisection to
/// 1e-12. The root grows with `a` and with `b`, exceeds the magnitude of
/// any negative root, and sits on the same side of 1 as `a + b`.
pub fn cubic_positive_root<T: Scalar>(a: T, b: T) -> T {
    assert!(a > T::zero() && b > T::zero(), "coefficients must be positive");
    let g = |u: T| Ok::<T, Error>(u * u * u - a * u - b);
    let hi = T::one().max(a + b) + T::one();
    bisect(g, (T::zero(), hi), (-b, g(hi).unwrap()), T::of(1e-12))
        .expect("cubic bisection cannot fail")
}

/// Cubic coefficients of the symmetric all-disperse three-patch case:
/// `a = (R1 R2 + R1 R3 + R2 R3) / 4`, `b = R1 R2 R3 / 4`; the global net
/// reproductive number solves `u^3 - a u - b = 0`.
pub fn symmetric_three_patch_cubic<T: Scalar>(r0: [T; 3]) -> (T, T) {
    let quarter = T::of(0.25);
    let a = quarter * (r0[0] * r0[1] + r0[0] * r0[2] + r0[1] * r0[2]);
    let b = quarter * (r0[0] * r0[1] * r0[2]);
    (a, b)
}

/// Closed forms for the two-stage, two-patch amplification family with
/// common local net reproductive number `r`, survival ratio `p`, and
/// round-trip dispersal rate `d`: returns `(R0, R0_hat)`.
pub fn amplification_r0<T: Scalar>(r: T, p: T, d: T) -> (T, T) {
    let one = T::one();
    let half = T::of(0.5);
    let radicand = T::of(4.0) * (one - d) + p * d * d;
    assert!(radicand >= T::zero());
    let r0 = half * (T::of(2.0) * (one - d) + p * d * d + p.sqrt() * d * radicand.sqrt()) * r;
    let r0_hat = ((p - one) * d + one) * r;
    (r0, r0_hat)
}

/// Critical dispersal rate of the amplification family, where the global
/// net reproductive number crosses 1:
/// `d* = (1 + sqrt(p / r)) (1 - r) / (p - r)`.
///
/// Errors when `p r <= 1`: the family then never reaches 1 on `[0, 1]`.
pub fn amplification_critical_d<T: Scalar>(r: T, p: T) -> Result<T> {
    if p * r <= T::one() {
        return Err(Error::NoRoot {
            what: "amplification R0(d) - 1".into(),
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok((T::one() + (p / r).sqrt()) * (T::one() - r) / (p - r))
}

/// Assemble the two-stage, two-patch amplification model: both patches have
/// local net reproductive number `r`, newborn survival `s` and `p s`,
/// newborns disperse 1 -> 2 and adults 2 -> 1 at the common rate `d`.
pub fn build_amplification_model<T: Scalar>(r: T, s: T, p: T, d: T) -> Result<GlobalModel<T>> {
    let one = T::one();
    let zero = T::zero();
    let patch1 = build_usher(StageVitals::new(vec![zero, r / s], vec![zero, zero], vec![s])?);
    let patch2 = build_usher(StageVitals::new(
        vec![zero, r / (p * s)],
        vec![zero, zero],
        vec![p * s],
    )?);
    let newborns = Matrix::from_rows(&[vec![one - d, zero], vec![d, one]]);
    let adults = Matrix::from_rows(&[vec![one, d], vec![zero, one - d]]);
    let spec = DispersionSpec::new(vec![newborns, adults])?;
    GlobalModel::assemble(vec![patch1, patch2], spec)
}

/// Assemble a model in which only newborns disperse: per-patch vitals with
/// zero newborn stay probability plus an `n x n` column-stochastic newborn
/// movement table; all other stages remain in place.
pub fn build_newborn_dispersal_model<T: Scalar>(
    vitals: Vec<StageVitals<T>>,
    newborn_table: Matrix<T>,
) -> Result<GlobalModel<T>> {
    for (i, v) in vitals.iter().enumerate() {
        if v.stay()[0] != T::zero() {
            return Err(Error::InvalidVitals {
                stage: 1,
                reason: format!(
                    "patch {}: newborns must advance (zero stay) in a newborn-dispersal model",
                    i + 1
                ),
            });
        }
    }
    let m = vitals[0].stages();
    let n = vitals.len();
    let mut tables = vec![newborn_table];
    tables.extend(std::iter::repeat(Matrix::identity(n)).take(m - 1));
    let spec = DispersionSpec::new(tables)?;
    let locals = vitals.into_iter().map(build_usher).collect();
    GlobalModel::assemble(locals, spec)
}

/// Parameters of the two-patch goby model: three stages (larvae, juveniles,
/// adults), common local net reproductive number `r` in both patches, the
/// second patch's survival scaled by `p`, larvae dispersing 1 -> 2 at rate
/// `d`, and juveniles dispersing 2 -> 1 at rate `d q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GobyTwoPatchParams<T> {
    pub r: T,
    pub s21: T,
    pub s22: T,
    pub s32: T,
    pub s33: T,
    pub p: T,
    pub d: T,
    pub q: T,
}

impl<T: Scalar> GobyTwoPatchParams<T> {
    pub fn new(r: T, s21: T, s22: T, s32: T, s33: T, p: T, d: T, q: T) -> Result<Self> {
        let one = T::one();
        if !(r > T::zero() && r < one) {
            return Err(Error::InvalidVitals {
                stage: 3,
                reason: format!("local net reproductive number {r} must lie in (0, 1)"),
            });
        }
        if !(s21 > T::zero() && s32 > T::zero()) {
            return Err(Error::InvalidVitals {
                stage: 1,
                reason: "advancement probabilities s21 and s32 must be positive".into(),
            });
        }
        let s_norm = s21.max(s22 + s32).max(s33);
        if !(p > one && p * s_norm < one) {
            return Err(Error::InvalidVitals {
                stage: 1,
                reason: format!(
                    "survival ratio must satisfy 1 < p < 1 / ||S|| = {}, got {p}",
                    (one / s_norm)
                ),
            });
        }
        for (name, v) in [("d", d), ("q", q)] {
            if !(v >= T::zero() && v <= one) {
                return Err(Error::InvalidDispersion {
                    stage: if name == "d" { 1 } else { 2 },
                    patch: 1,
                    reason: format!("rate {name} = {v} outside [0, 1]"),
                });
            }
        }
        Ok(GobyTwoPatchParams { r, s21, s22, s32, s33, p, d, q })
    }

    /// Fecundities that give both patches the local net reproductive
    /// number `r`.
    pub fn fecundities(&self) -> (T, T) {
        let one = T::one();
        let f1 = self.r * (one - self.s22) * (one - self.s33) / (self.s21 * self.s32);
        let f2 = self.r * (one - self.p * self.s22) * (one - self.p * self.s33)
            / (self.p * self.p * self.s21 * self.s32);
        (f1, f2)
    }
}

/// Amplification factor of the goby family at full larval dispersal:
/// `xi = [p q + (1 - q)(1 - p s22)] / [1 - p (1 - q) s22]`; the model's
/// `R0(1)` equals `xi r`, and `xi = p` when `q = 1`.
pub fn goby_full_dispersal_factor<T: Scalar>(g: &GobyTwoPatchParams<T>) -> T {
    let one = T::one();
    (g.p * g.q + (one - g.q) * (one - g.p * g.s22)) / (one - g.p * (one - g.q) * g.s22)
}

/// Assemble the goby two-patch model.
pub fn build_goby_model<T: Scalar>(g: &GobyTwoPatchParams<T>) -> Result<GlobalModel<T>> {
    let zero = T::zero();
    let one = T::one();
    let (f1, f2) = g.fecundities();
    let patch1 = build_usher(StageVitals::new(
        vec![zero, zero, f1],
        vec![zero, g.s22, g.s33],
        vec![g.s21, g.s32],
    )?);
    let patch2 = build_usher(StageVitals::new(
        vec![zero, zero, f2],
        vec![zero, g.p * g.s22, g.p * g.s33],
        vec![g.p * g.s21, g.p * g.s32],
    )?);
    let larvae = Matrix::from_rows(&[vec![one - g.d, zero], vec![g.d, one]]);
    let dq = g.d * g.q;
    let juveniles = Matrix::from_rows(&[vec![one, dq], vec![zero, one - dq]]);
    let adults = Matrix::identity(2);
    let spec = DispersionSpec::new(vec![larvae, juveniles, adults])?;
    GlobalModel::assemble(vec![patch1, patch2], spec)
}

/// Critical dispersal rate of a parameterized model family: the root of
/// `R0(d) - 1` on the bracket, by bisection to `tol` in `d`. Errors when
/// `R0 - 1` does not change sign across the bracket.
pub fn critical_dispersion<T: Scalar>(
    build: impl Fn(T) -> Result<GlobalModel<T>>,
    bracket: (T, T),
    tol: T,
) -> Result<T> {
    let g = |d: T| -> Result<T> { Ok(build(d)?.analyze()?.r0 - T::one()) };
    let f_lo = g(bracket.0)?;
    let f_hi = g(bracket.1)?;
    if f_lo == T::zero() {
        return Ok(bracket.0);
    }
    if f_hi == T::zero() {
        return Ok(bracket.1);
    }
    if f_lo * f_hi > T::zero() {
        return Err(Error::NoRoot {
            what: "R0(d) - 1".into(),
            lo: bracket.0.as_f64(),
            hi: bracket.1.as_f64(),
        });
    }
    bisect(g, bracket, (f_lo, f_hi), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demography::local_r0;

    #[test]
    fn three_stage_closed_form_matches_the_generic_formula() {
        let v = StageVitals::new(
            vec![0.0_f64, 0.0, 1.9],
            vec![0.1, 0.2, 0.35],
            vec![0.5, 0.3],
        )
        .unwrap();
        assert!((usher_three_stage_r0(&v) - local_r0(&v)).abs() < 1e-12);
        let stuck = StageVitals::new(vec![0.0, 0.0, 1.9], vec![0.1, 0.2, 0.35], vec![0.0, 0.3])
            .unwrap();
        assert_eq!(usher_three_stage_r0(&stuck), 0.0);
        let leslie = StageVitals::new(vec![0.0_f64, 0.0, 1.9], vec![0.0; 3], vec![0.5, 0.3]).unwrap();
        assert!((usher_three_stage_r0(&leslie) - 1.9 * 0.3 * 0.5).abs() < 1e-15);
    }

    #[test]
    fn two_patch_special_dispersal_configurations() {
        let (r1, r2) = (0.7_f64, 1.9_f64);
        let case = |d11, d22| {
            two_patch_r0(&TwoPatchNewbornDispersal::new(r1, r2, d11, d22).unwrap())
        };
        assert!((case(0.0, 0.0) - (r1 * r2).sqrt()).abs() < 1e-12);
        assert!((case(0.5, 0.5) - 0.5 * (r1 + r2)).abs() < 1e-12);
        assert!((case(1.0, 1.0) - r2.max(r1)).abs() < 1e-12);
        assert!((case(0.0, 1.0) - r2).abs() < 1e-12);
        // the returned root satisfies the quadratic
        let p = TwoPatchNewbornDispersal::new(r1, r2, 0.3, 0.8).unwrap();
        let root = two_patch_r0(&p);
        assert!(two_patch_quadratic_residual(&p, root).abs() < 1e-10);
    }

    #[test]
    fn three_patch_residual_degenerations() {
        let zero = ThreePatchTransmissions {
            xi12: 0.0,
            xi21: 0.0,
            xi13: 0.0,
            xi31: 0.0,
            xi23: 0.0,
            xi32: 0.0,
        };
        assert_eq!(three_patch_residual(&zero), -1.0);
        let two_patch = ThreePatchTransmissions { xi12: 1.0, xi21: 1.0, ..zero };
        assert_eq!(three_patch_residual(&two_patch), 0.0);
    }

    #[test]
    fn xi_transmission_forms() {
        let xi = xi_transmission(0.4_f64, 0.0, 1.5, 2.0).unwrap();
        assert!((xi - 0.4 * 1.5 / 2.0).abs() < 1e-15);
        assert!(matches!(
            xi_transmission(0.4, 1.0, 2.0, 1.5),
            Err(Error::DegenerateTransmission { .. })
        ));
    }

    #[test]
    fn cubic_root_known_values() {
        assert!((cubic_positive_root(0.4_f64, 0.6) - 1.0).abs() < 1e-12);
        assert!((cubic_positive_root(3.0_f64, 2.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn amplification_closed_forms() {
        let (r, p) = (0.25_f64, 16.0_f64);
        let (r0_at_0, hat_at_0) = amplification_r0(r, p, 0.0);
        assert!((r0_at_0 - r).abs() < 1e-15 && (hat_at_0 - r).abs() < 1e-15);
        let (r0_at_1, hat_at_1) = amplification_r0(r, p, 1.0);
        assert!((r0_at_1 - p * r).abs() < 1e-12 && (hat_at_1 - p * r).abs() < 1e-12);
        assert!((r0_at_1 - 4.0).abs() < 1e-12);
        let d_star = amplification_critical_d(r, p).unwrap();
        assert!((d_star - 3.0 / 7.0).abs() < 1e-15);
        let (r0_at_star, _) = amplification_r0(r, p, d_star);
        assert!((r0_at_star - 1.0).abs() < 1e-10);
        assert!(amplification_critical_d(0.25_f64, 3.0).is_err());
    }

    #[test]
    fn goby_construction_keeps_local_r0() {
        let g = GobyTwoPatchParams::new(0.5, 0.05, 0.1, 0.05, 0.15, 5.0, 0.5, 1.0 / 3.0)
            .unwrap();
        let model = build_goby_model(&g).unwrap();
        for local in model.locals() {
            assert!((local_r0(local.vitals()) - 0.5).abs() < 1e-12);
        }
        // survival in patch 2 is p times survival in patch 1
        let s1 = model.locals()[0].survival();
        let s2 = model.locals()[1].survival();
        assert!(s2.max_abs_diff(&s1.scale(5.0)) < 1e-15);
        // xi = p when q = 1
        let q1 = GobyTwoPatchParams { q: 1.0, ..g };
        assert!((goby_full_dispersal_factor(&q1) - 5.0).abs() < 1e-15);
        assert!(GobyTwoPatchParams::new(0.5, 0.0, 0.1, 0.05, 0.15, 5.0, 0.5, 0.3).is_err());
        assert!(GobyTwoPatchParams::new(0.5, 0.05, 0.1, 0.05, 0.15, 7.0, 0.5, 0.3).is_err());
    }

    #[test]
    fn critical_dispersion_recovers_the_closed_form() {
        let (r, s, p) = (0.25_f64, 0.05_f64, 16.0_f64);
        let root = critical_dispersion(
            |d| build_amplification_model(r, s, p, d),
            (0.0, 1.0),
            1e-11,
        )
        .unwrap();
        assert!((root - 3.0 / 7.0).abs() < 1e-9);
        // swapped dispersal directions never cross 1 when R < 1
        let swapped = |d: f64| {
            let one = 1.0;
            let patch1 = build_usher(
                StageVitals::new(vec![0.0, r / s], vec![0.0, 0.0], vec![s]).unwrap(),
            );
            let patch2 = build_usher(
                StageVitals::new(vec![0.0, r / (p * s)], vec![0.0, 0.0], vec![p * s]).unwrap(),
            );
            let newborns = Matrix::from_rows(&[vec![one, d], vec![0.0, one - d]]);
            let adults = Matrix::from_rows(&[vec![one - d, 0.0], vec![d, one]]);
            let spec = DispersionSpec::new(vec![newborns, adults])?;
            GlobalModel::assemble(vec![patch1, patch2], spec)
        };
        assert!(matches!(
            critical_dispersion(swapped, (0.0, 1.0), 1e-9),
            Err(Error::NoRoot { .. })
        ));
    }
}
