//! Seeded generators for random states, unitaries and ensembles.
//!
//! Used by the verification suites and the solver's restarts. Every function
//! takes the RNG explicitly so callers control reproducibility.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c, CMatrix, CVector};
use crate::majorization::Ensemble;
use crate::state::{DensityMatrix, PureState};
use num_complex::Complex64;

pub fn gaussian_complex<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

/// Haar-random pure state.
pub fn random_pure<R: Rng>(rng: &mut R, d: usize) -> PureState {
    loop {
        let v = CVector::from_fn(d, |_, _| gaussian_complex(rng));
        if let Ok(psi) = PureState::normalized(v) {
            return psi;
        }
    }
}

/// Haar-random unitary via QR of a Ginibre matrix with the phase fix.
pub fn random_unitary<R: Rng>(rng: &mut R, d: usize) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| gaussian_complex(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { c(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random state of the given rank from the induced (Ginibre) measure.
pub fn random_density_rank<R: Rng>(rng: &mut R, d: usize, rank: usize) -> DensityMatrix {
    let g = CMatrix::from_fn(d, rank.max(1), |_, _| gaussian_complex(rng));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::from_trusted(m.unscale(tr))
}

pub fn random_density<R: Rng>(rng: &mut R, d: usize) -> DensityMatrix {
    random_density_rank(rng, d, d)
}

/// A qubit drawn uniformly from the Bloch ball.
pub fn random_qubit<R: Rng>(rng: &mut R) -> DensityMatrix {
    let (x, y, z) = loop {
        let x = rng.random_range(-1.0..1.0);
        let y = rng.random_range(-1.0..1.0);
        let z = rng.random_range(-1.0..1.0);
        if x * x + y * y + z * z <= 1.0 {
            break (x, y, z);
        }
    };
    bloch(x, y, z)
}

/// `(I + x X + y Y + z Z) / 2`; caller keeps the vector inside the unit ball.
pub fn bloch(x: f64, y: f64, z: f64) -> DensityMatrix {
    DensityMatrix::from_trusted(CMatrix::from_row_slice(
        2,
        2,
        &[c((1.0 + z) / 2.0, 0.0), c(x / 2.0, -y / 2.0), c(x / 2.0, y / 2.0), c((1.0 - z) / 2.0, 0.0)],
    ))
}

/// Random diagonal probability vector of length `d`.
pub fn random_probability<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    crate::measures::random_simplex(rng, d)
}

/// `k` Haar-random pure states with simplex weights.
pub fn random_ensemble<R: Rng>(rng: &mut R, d: usize, k: usize) -> Ensemble {
    let w = random_probability(rng, k);
    let entries = w
        .into_iter()
        .map(|p| (p.max(f64::MIN_POSITIVE), random_pure(rng, d)))
        .collect();
    Ensemble::from_trusted(entries)
}
