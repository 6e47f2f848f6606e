//! Exhaustive and sampled search over decompositions, used as an oracle for
//! the optimizer and the qubit closed form.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measures::PureCoherenceFunctional;
use crate::state::DensityMatrix;

use super::decomposition::{isometry_into, n_angles, rotations, Decomposer, Objective, Rotation, Scratch};

/// Largest dimension the oracle accepts.
pub const BRUTE_DIM_MAX: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    /// Points per angle axis for the exhaustive qubit grid.
    pub angles: usize,
    /// Ensemble sizes; sizes below the rank are skipped.
    pub sizes: Vec<usize>,
    /// Random isometries per size wherever no exhaustive grid applies.
    pub samples: usize,
    pub seed: u64,
}

impl GridSpec {
    /// 720 points per axis, sizes 2 to 4.
    pub fn standard() -> Self {
        Self {
            angles: 720,
            sizes: vec![2, 3, 4],
            samples: 720,
            seed: 0,
        }
    }
}

/// Least `f(aggregate_vector(E))` over the grid.
///
/// On qubits with `k = 2` every decomposition is, up to member phases, one
/// Givens rotation `(theta, phi)`, and the grid covers
/// `[0, pi/2] x [0, 2 pi)` exhaustively. Other sizes and qutrits draw
/// `grid.samples` seeded random angle vectors per size. The eigen-decomposition
/// is always included.
pub fn brute_force_cm(rho: &DensityMatrix, f: &PureCoherenceFunctional, grid: &GridSpec) -> Result<f64> {
    let d = rho.dim();
    if d > BRUTE_DIM_MAX {
        return Err(Error::DimensionTooLarge {
            dim: d,
            max: BRUTE_DIM_MAX,
        });
    }
    let dec = Decomposer::new(rho);
    let r = dec.rank();
    let score = |k: usize, rots: &[Rotation], buf: &mut Vec<_>, scratch: &mut Scratch| {
        isometry_into(k, r, rots, buf);
        dec.score(buf, k, f, Objective::Monotone, scratch)
    };
    let identity = rotations(&vec![0.0; n_angles(r, r)]);
    let mut best = score(r, &identity, &mut Vec::new(), &mut Scratch::default());
    if r == 1 {
        return Ok(best);
    }

    let n = grid.angles.max(2);
    for (si, &k) in grid.sizes.iter().enumerate().filter(|(_, &k)| k >= r) {
        let local = if d == 2 && k == 2 {
            (0..n)
                .into_par_iter()
                .map(|i| {
                    let theta = FRAC_PI_2 * i as f64 / (n - 1) as f64;
                    let (mut buf, mut scratch) = (Vec::new(), Scratch::default());
                    (0..n)
                        .map(|j| {
                            let g = Rotation::new(theta, 2.0 * PI * j as f64 / n as f64);
                            score(2, &[g], &mut buf, &mut scratch)
                        })
                        .fold(f64::INFINITY, f64::min)
                })
                .reduce(|| f64::INFINITY, f64::min)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(grid.seed);
            rng.set_stream(si as u64);
            let (mut buf, mut scratch) = (Vec::new(), Scratch::default());
            let mut angles = vec![0.0; n_angles(k, r)];
            let mut m = f64::INFINITY;
            for _ in 0..grid.samples {
                angles.iter_mut().for_each(|a| *a = rng.random_range(0.0..2.0 * PI));
                m = m.min(score(k, &rotations(&angles), &mut buf, &mut scratch));
            }
            m
        };
        best = best.min(local);
    }
    Ok(best)
}
