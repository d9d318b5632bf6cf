//! Fiber products of tori: the kernel lattice `N1 ×_{N0} N2` and the
//! decomposition of the fiber product group as a torus times a finite group.

use num_bigint::BigInt;
use num_traits::One;

use crate::cone::fiber_product_basis;
use crate::error::{Error, Result};
use crate::lattice::{smith_normal_form, IntMat, IntVec};

/// Basis of `{(x1, x2) : phi1 x1 = phi2 x2}`, in Hermite normal form.
pub fn lattice_fiber_product(phi1: &IntMat, phi2: &IntMat) -> Result<Vec<IntVec>> {
    fiber_product_basis(phi1, phi2)
}

/// `T × G` with `T` a torus of dimension `torus_dim` and `G` the product of
/// the cyclic groups of order `finite_part[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TorusFpDecomposition {
    pub torus_dim: usize,
    /// Invariant factors greater than one, each dividing the next.
    pub finite_part: Vec<BigInt>,
    pub rank_r: usize,
}

/// Reads the decomposition off the Smith normal form of `[phi1ᵀ; −phi2ᵀ]`.
pub fn torus_fp_decomposition(phi1: &IntMat, phi2: &IntMat) -> Result<TorusFpDecomposition> {
    if phi1.rows() != phi2.rows() {
        return Err(Error::TargetMismatch {
            left: phi1.rows(),
            right: phi2.rows(),
        });
    }
    let stacked = phi1.transpose().vstack(&phi2.negated().transpose())?;
    let snf = smith_normal_form(&stacked);
    let rank_r = snf.rank();
    let torus_dim = phi1.cols() + phi2.cols() - rank_r;
    let kernel_rank = lattice_fiber_product(phi1, phi2)?.len();
    if kernel_rank != torus_dim {
        return Err(Error::InternalInvariant(format!(
            "torus dimension {torus_dim} differs from kernel rank {kernel_rank}"
        )));
    }
    Ok(TorusFpDecomposition {
        torus_dim,
        finite_part: snf.invariant_factors.into_iter().filter(|d| !d.is_one()).collect(),
        rank_r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(k: i64) -> IntMat {
        IntMat::from_i64_rows(1, &[vec![k]]).unwrap()
    }

    #[test]
    fn rank_one_maps() {
        let d = torus_fp_decomposition(&scalar(1), &scalar(1)).unwrap();
        assert_eq!((d.torus_dim, d.finite_part.len()), (1, 0));
        let d = torus_fp_decomposition(&scalar(2), &scalar(2)).unwrap();
        assert_eq!(d.torus_dim, 1);
        assert_eq!(d.finite_part, vec![BigInt::from(2)]);
        let d = torus_fp_decomposition(&scalar(2), &scalar(3)).unwrap();
        assert_eq!((d.torus_dim, d.finite_part.len()), (1, 0));
    }

    #[test]
    fn kernel_lattices() {
        assert_eq!(lattice_fiber_product(&scalar(1), &scalar(1)).unwrap(), vec![IntVec::from_i64(&[1, 1])]);
        assert_eq!(lattice_fiber_product(&scalar(2), &scalar(3)).unwrap(), vec![IntVec::from_i64(&[3, 2])]);
        let phi1 = IntMat::from_i64_rows(2, &[vec![1, 0]]).unwrap();
        let phi2 = IntMat::zeros(1, 0);
        assert_eq!(lattice_fiber_product(&phi1, &phi2).unwrap(), vec![IntVec::from_i64(&[0, 1])]);
        let d = torus_fp_decomposition(&phi1, &phi2).unwrap();
        assert_eq!((d.torus_dim, d.rank_r), (1, 1));
    }

    #[test]
    fn target_mismatch() {
        let phi2 = IntMat::zeros(2, 1);
        assert!(matches!(
            torus_fp_decomposition(&scalar(1), &phi2),
            Err(Error::TargetMismatch { left: 1, right: 2 })
        ));
    }
}
