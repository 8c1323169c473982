//! Per-patch stage-structured demography: Usher/Leslie matrix construction
//! and dispersion-free local quantities.

use crate::error::{Error, Result};
use crate::linalg::{solve_linear, spectral_radius, Matrix, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::scalar::Scalar;

/// Per-stage vital rates of one patch: fecundities, stay probabilities
/// `s(k,k)`, and advancement probabilities `s(k+1,k)`.
///
/// Validation enforces, per stage, `0 <= stay + advance < 1` (so not every
/// individual survives a time increment) and nonnegative finite fecundities.
/// `stay + advance = 0` is allowed: it models instant extinction.
#[derive(Debug, Clone, PartialEq)]
pub struct StageVitals<T> {
    fecundity: Vec<T>,
    stay: Vec<T>,
    advance: Vec<T>,
}

impl<T: Scalar> StageVitals<T> {
    pub fn new(fecundity: Vec<T>, stay: Vec<T>, advance: Vec<T>) -> Result<Self> {
        let m = fecundity.len();
        if m < 2 {
            return Err(Error::InvalidVitals {
                stage: 1,
                reason: format!("need at least 2 stages, got {m}"),
            });
        }
        if stay.len() != m {
            return Err(Error::InvalidVitals {
                stage: 1,
                reason: format!("{} stay probabilities for {m} stages", stay.len()),
            });
        }
        if advance.len() != m - 1 {
            return Err(Error::InvalidVitals {
                stage: 1,
                reason: format!(
                    "{} advancement probabilities for {m} stages (expected {})",
                    advance.len(),
                    m - 1
                ),
            });
        }
        for (k, &f) in fecundity.iter().enumerate() {
            if !(f.is_finite() && f >= T::zero()) {
                return Err(Error::InvalidVitals {
                    stage: k + 1,
                    reason: format!("fecundity {f} must be finite and nonnegative"),
                });
            }
        }
        for k in 0..m {
            let s = stay[k];
            if !(s.is_finite() && s >= T::zero() && s <= T::one()) {
                return Err(Error::InvalidVitals {
                    stage: k + 1,
                    reason: format!("stay probability {s} outside [0, 1]"),
                });
            }
            let a = if k + 1 < m { advance[k] } else { T::zero() };
            if !(a.is_finite() && a >= T::zero() && a <= T::one()) {
                return Err(Error::InvalidVitals {
                    stage: k + 1,
                    reason: format!("advancement probability {a} outside [0, 1]"),
                });
            }
            if s + a >= T::one() {
                return Err(Error::InvalidVitals {
                    stage: k + 1,
                    reason: format!(
                        "survival must satisfy stay + advance < 1, got {s} + {a}"
                    ),
                });
            }
        }
        Ok(StageVitals {
            fecundity,
            stay,
            advance,
        })
    }

    pub fn stages(&self) -> usize {
        self.fecundity.len()
    }

    pub fn fecundity(&self) -> &[T] {
        &self.fecundity
    }

    pub fn stay(&self) -> &[T] {
        &self.stay
    }

    pub fn advance(&self) -> &[T] {
        &self.advance
    }
}

/// One patch's demography matrices: fecundity `F` (first row only),
/// lower-bidiagonal survival `S`, and their sum `A = F + S`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalDemography<T> {
    vitals: StageVitals<T>,
    fecundity: Matrix<T>,
    survival: Matrix<T>,
    projection: Matrix<T>,
}

/// Assemble the Usher matrices of one patch from its vital rates.
pub fn build_usher<T: Scalar>(vitals: StageVitals<T>) -> LocalDemography<T> {
    let m = vitals.stages();
    let mut f = Matrix::zeros(m, m);
    for k in 0..m {
        f[(0, k)] = vitals.fecundity[k];
    }
    let mut s = Matrix::zeros(m, m);
    for k in 0..m {
        s[(k, k)] = vitals.stay[k];
        if k + 1 < m {
            s[(k + 1, k)] = vitals.advance[k];
        }
    }
    let projection = f.add(&s);
    LocalDemography {
        vitals,
        fecundity: f,
        survival: s,
        projection,
    }
}

impl<T: Scalar> LocalDemography<T> {
    pub fn stages(&self) -> usize {
        self.vitals.stages()
    }

    pub fn vitals(&self) -> &StageVitals<T> {
        &self.vitals
    }

    pub fn fecundity(&self) -> &Matrix<T> {
        &self.fecundity
    }

    pub fn survival(&self) -> &Matrix<T> {
        &self.survival
    }

    pub fn projection(&self) -> &Matrix<T> {
        &self.projection
    }

    /// Local dispersion-free next-generation matrix `F (I - S)^(-1)`.
    pub fn next_generation(&self) -> Result<Matrix<T>> {
        let m = self.stages();
        let coeff = Matrix::identity(m).sub(&self.survival);
        // F (I-S)^(-1) = (solve((I-S)^T, F^T))^T
        let xt = solve_linear(&coeff.transpose(), &self.fecundity.transpose())?;
        Ok(xt.transpose())
    }
}

/// True when the patch's demography is Leslie: no individual remains in its
/// stage across a time increment (zero diagonal of `S`).
pub fn is_leslie<T: Scalar>(d: &LocalDemography<T>) -> bool {
    (0..d.stages()).all(|k| d.survival[(k, k)] == T::zero())
}

/// Local dispersion-free net reproductive number by the standard Usher
/// formula: `sum_k f_k / (1 - s_kk) * prod_{l<k} s_(l+1,l) / (1 - s_ll)`.
///
/// Equals the (1,1) entry of `F (I - S)^(-1)`, and its spectral radius.
pub fn local_r0<T: Scalar>(v: &StageVitals<T>) -> T {
    let m = v.stages();
    let mut total = T::zero();
    let mut chain = T::one(); // prod_{l<k} s_(l+1,l) / (1 - s_ll)
    for k in 0..m {
        total += v.fecundity[k] / (T::one() - v.stay[k]) * chain;
        if k + 1 < m {
            chain = chain * v.advance[k] / (T::one() - v.stay[k]);
        }
    }
    total
}

/// Local dispersion-free growth rate: the spectral radius of `A = F + S`.
pub fn local_growth_rate<T: Scalar>(d: &LocalDemography<T>) -> Result<T> {
    Ok(spectral_radius(&d.projection, T::of(DEFAULT_TOL), DEFAULT_MAX_ITER)?.value)
}
