use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Haar-distributed unitary of dimension 2, 4 or 8, reproducible from `seed`.
///
/// QR of a complex Ginibre matrix, with the phases of `R`'s diagonal pushed
/// back into `Q` so the distribution is exactly Haar.
pub fn haar_random_unitary(dim: usize, seed: u64) -> Result<ComplexMatrix> {
    if !matches!(dim, 2 | 4 | 8) {
        return Err(Error::UnsupportedDimension(dim));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        C64::new(re, im)
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..dim {
        let d = r[(k, k)];
        let ph = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let col = q.column(k) * ph;
        q.set_column(k, &col);
    }
    Ok(ComplexMatrix::from_inner(q))
}
