//! Random model generators for the statistical test suites. All draws go
//! through a caller-supplied RNG, so seeded runs are reproducible.

use rand::Rng;

use crate::demography::{build_usher, StageVitals};
use crate::dispersion::DispersionSpec;
use crate::linalg::Matrix;
use crate::model::GlobalModel;
use crate::scalar::Scalar;

/// Keep each stage's survival strictly away from the `stay + advance = 1`
/// boundary.
const SURVIVAL_CAP: f64 = 0.95;

/// Random vital rates: fecundities in `[0, 2.5]` with sporadic zeros, stage
/// survival split between staying and advancing under the cap.
pub fn vitals<T: Scalar, R: Rng>(rng: &mut R, stages: usize) -> StageVitals<T> {
    let mut fecundity = Vec::with_capacity(stages);
    for _ in 0..stages {
        let f = if rng.gen_bool(0.3) {
            0.0
        } else {
            rng.gen_range(0.0..2.5)
        };
        fecundity.push(T::of(f));
    }
    let mut stay = Vec::with_capacity(stages);
    let mut advance = Vec::with_capacity(stages - 1);
    for k in 0..stages {
        let s = if rng.gen_bool(0.25) {
            0.0
        } else {
            rng.gen_range(0.0..SURVIVAL_CAP)
        };
        stay.push(T::of(s));
        if k + 1 < stages {
            advance.push(T::of(rng.gen_range(0.0..(SURVIVAL_CAP - s))));
        }
    }
    StageVitals::new(fecundity, stay, advance).expect("sampled vitals are valid")
}

/// Random vitals whose projection matrix is irreducible: the full life
/// cycle (positive advancement everywhere, positive last-stage fecundity)
/// is always present.
pub fn irreducible_vitals<T: Scalar, R: Rng>(rng: &mut R, stages: usize) -> StageVitals<T> {
    let mut fecundity: Vec<T> = (0..stages)
        .map(|_| {
            if rng.gen_bool(0.5) {
                T::zero()
            } else {
                T::of(rng.gen_range(0.0..2.5))
            }
        })
        .collect();
    fecundity[stages - 1] = T::of(rng.gen_range(0.1..3.0));
    let mut stay = Vec::with_capacity(stages);
    let mut advance = Vec::with_capacity(stages - 1);
    for k in 0..stages {
        let s = if rng.gen_bool(0.4) {
            0.0
        } else {
            rng.gen_range(0.0..0.6)
        };
        stay.push(T::of(s));
        if k + 1 < stages {
            advance.push(T::of(rng.gen_range(0.05..(SURVIVAL_CAP - s))));
        }
    }
    StageVitals::new(fecundity, stay, advance).expect("sampled vitals are valid")
}

/// Leslie vitals with only the last stage reproducing and every
/// advancement positive.
pub fn leslie_last_stage_vitals<T: Scalar, R: Rng>(rng: &mut R, stages: usize) -> StageVitals<T> {
    let mut fecundity = vec![T::zero(); stages];
    fecundity[stages - 1] = T::of(rng.gen_range(0.1..3.0));
    let stay = vec![T::zero(); stages];
    let advance = (0..stages - 1)
        .map(|_| T::of(rng.gen_range(0.05..SURVIVAL_CAP)))
        .collect();
    StageVitals::new(fecundity, stay, advance).expect("sampled vitals are valid")
}

/// Random column-stochastic matrix (columns normalized uniform draws).
pub fn column_stochastic<T: Scalar, R: Rng>(rng: &mut R, n: usize) -> Matrix<T> {
    column_stochastic_with_floor(rng, n, 0.0)
}

/// Random column-stochastic matrix with every entry at least
/// `floor / n`-ish, guaranteeing a strictly positive (hence primitive)
/// pattern when `floor > 0`.
pub fn column_stochastic_with_floor<T: Scalar, R: Rng>(
    rng: &mut R,
    n: usize,
    floor: f64,
) -> Matrix<T> {
    let mut m = Matrix::zeros(n, n);
    for j in 0..n {
        let draws: Vec<f64> = (0..n).map(|_| floor + rng.gen_range(0.0..1.0)).collect();
        let total: f64 = draws.iter().sum();
        for (i, &v) in draws.iter().enumerate() {
            m[(i, j)] = T::of(v / total);
        }
    }
    m
}

/// Random dispersion spec: independent column-stochastic tables per stage.
pub fn dispersion<T: Scalar, R: Rng>(rng: &mut R, stages: usize, patches: usize) -> DispersionSpec<T> {
    let tables = (0..stages)
        .map(|_| column_stochastic(rng, patches))
        .collect();
    DispersionSpec::new(tables).expect("sampled tables are column stochastic")
}

/// Fully random model with the given dimensions.
pub fn model<T: Scalar, R: Rng>(rng: &mut R, stages: usize, patches: usize) -> GlobalModel<T> {
    let locals = (0..patches).map(|_| build_usher(vitals(rng, stages))).collect();
    GlobalModel::assemble(locals, dispersion(rng, stages, patches))
        .expect("sampled model assembles")
}

/// Random model of the newborn-dispersal form: zero newborn stay
/// probability, only stage 1 moves between patches.
pub fn newborn_dispersal_model<T: Scalar, R: Rng>(
    rng: &mut R,
    stages: usize,
    patches: usize,
) -> GlobalModel<T> {
    let locals: Vec<StageVitals<T>> = (0..patches)
        .map(|_| {
            let v = irreducible_vitals::<T, R>(rng, stages);
            let mut stay: Vec<T> = v.stay().to_vec();
            stay[0] = T::zero();
            StageVitals::new(v.fecundity().to_vec(), stay, v.advance().to_vec())
                .expect("still valid with zero newborn stay")
        })
        .collect();
    crate::closed_form::build_newborn_dispersal_model(locals, column_stochastic(rng, patches))
        .expect("sampled model assembles")
}
