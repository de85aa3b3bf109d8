//! Process handles: exact window laws and window samplers.

use std::fmt::Debug;
use std::hash::Hash;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gf2::{joint_distribution, BitExpr, SeedId};
use crate::law::{JointDist, Word};
use crate::sampling::letter;

/// Index set of a process: the line or the plane.
pub trait Site: Copy + Ord + Hash + Debug + Send + Sync + 'static {
    fn origin() -> Self;

    fn shift(self, by: Self) -> Self;

    /// Window of side `len` anchored at the origin. On the line this is
    /// `0..len`; in the plane it is the `len x len` square, listed row by row
    /// (second coordinate outer, first coordinate inner).
    fn window(len: usize) -> Vec<Self>;
}

impl Site for i64 {
    fn origin() -> Self {
        0
    }

    fn shift(self, by: Self) -> Self {
        self + by
    }

    fn window(len: usize) -> Vec<Self> {
        (0..len as i64).collect()
    }
}

impl Site for (i64, i64) {
    fn origin() -> Self {
        (0, 0)
    }

    fn shift(self, by: Self) -> Self {
        (self.0 + by.0, self.1 + by.1)
    }

    fn window(len: usize) -> Vec<Self> {
        let l = len as i64;
        (0..l).flat_map(|j| (0..l).map(move |i| (i, j))).collect()
    }
}

/// A process whose finite-dimensional laws are computable exactly.
pub trait ExactProcess: Sync {
    type Site: Site;

    fn alphabet(&self) -> u8;

    /// Joint law of the coordinates at `sites` (one block, repeats allowed).
    fn law(&self, sites: &[Self::Site]) -> Result<JointDist>;
}

/// A binary process whose coordinates are affine functionals of fair coins.
pub trait LinearField: Sync {
    type Site: Site;

    fn site_expr(&self, site: Self::Site) -> BitExpr;

    fn site_exprs(&self, sites: &[Self::Site]) -> Vec<BitExpr> {
        sites.iter().map(|&s| self.site_expr(s)).collect()
    }
}

impl<T: LinearField> ExactProcess for T {
    type Site = T::Site;

    fn alphabet(&self) -> u8 {
        2
    }

    fn law(&self, sites: &[Self::Site]) -> Result<JointDist> {
        joint_distribution(&self.site_exprs(sites))
    }
}

/// A process that can draw a window `start..start + len`.
pub trait WindowSampler: Sync {
    fn alphabet(&self) -> u8;

    fn sample_window(&self, start: i64, len: usize, rng: &mut ChaCha8Rng) -> Result<Word>;
}

/// I.i.d. fair bits, one coin per coordinate.
#[derive(Clone, Copy, Debug, Default)]
pub struct IidProcess;

impl LinearField for IidProcess {
    type Site = i64;

    fn site_expr(&self, site: i64) -> BitExpr {
        BitExpr::seed(SeedId::coin(site))
    }
}

impl WindowSampler for IidProcess {
    fn alphabet(&self) -> u8 {
        2
    }

    fn sample_window(&self, _start: i64, len: usize, rng: &mut ChaCha8Rng) -> Result<Word> {
        Ok((0..len).map(|_| letter(rng, 2)).collect())
    }
}

/// Rotation on three points: `xi_s = U + s mod 3` with `U` uniform.
#[derive(Clone, Copy, Debug, Default)]
pub struct Rot3Process;

fn rot3_letter(u: u8, s: i64) -> u8 {
    (u as i64 + s).rem_euclid(3) as u8
}

impl ExactProcess for Rot3Process {
    type Site = i64;

    fn alphabet(&self) -> u8 {
        3
    }

    fn law(&self, sites: &[i64]) -> Result<JointDist> {
        let third = BigRational::new(BigInt::one(), BigInt::from(3));
        let entries = (0..3u8).map(|u| (sites.iter().map(|&s| rot3_letter(u, s)).collect(), third.clone()));
        Ok(JointDist::new(3, vec![sites.len()], entries))
    }
}

impl WindowSampler for Rot3Process {
    fn alphabet(&self) -> u8 {
        3
    }

    fn sample_window(&self, start: i64, len: usize, rng: &mut ChaCha8Rng) -> Result<Word> {
        let u = letter(rng, 3);
        Ok((0..len as i64).map(|t| rot3_letter(u, start + t)).collect())
    }
}

/// One horizontal (or vertical) line of a planar linear field, seen as a
/// process on the integers.
pub struct FieldLine<'a, F> {
    field: &'a F,
    anchor: (i64, i64),
    vertical: bool,
}

impl<'a, F: LinearField<Site = (i64, i64)>> FieldLine<'a, F> {
    pub fn horizontal(field: &'a F, row: i64) -> Self {
        Self { field, anchor: (0, row), vertical: false }
    }

    pub fn vertical(field: &'a F, column: i64) -> Self {
        Self { field, anchor: (column, 0), vertical: true }
    }
}

impl<F: LinearField<Site = (i64, i64)>> LinearField for FieldLine<'_, F> {
    type Site = i64;

    fn site_expr(&self, t: i64) -> BitExpr {
        let site = if self.vertical { (self.anchor.0, t) } else { (t, self.anchor.1) };
        self.field.site_expr(site)
    }
}

/// Joint law of `blocks.len()` windows given as explicit site lists.
pub fn blocks_law<P: ExactProcess + ?Sized>(source: &P, windows: &[Vec<P::Site>]) -> Result<JointDist> {
    let sites: Vec<P::Site> = windows.iter().flatten().copied().collect();
    let blocks = windows.iter().map(Vec::len).collect();
    Ok(source.law(&sites)?.with_blocks(blocks))
}

/// Rejects empty windows.
pub fn check_len(len: usize) -> Result<()> {
    if len == 0 {
        return Err(Error::InvalidArgument("window length must be at least 1".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    #[test]
    fn iid_law_is_product() {
        let d = IidProcess.law(&[0, 3, 5]).unwrap();
        assert!(d.is_uniform());
        assert_eq!(d.support_len(), 8);
        let d = blocks_law(&IidProcess, &[vec![0, 1], vec![2, 3]]).unwrap();
        assert!(d.independence_defect().is_zero());
    }

    #[test]
    fn repeated_sites_are_copies() {
        let d = IidProcess.law(&[4, 4]).unwrap();
        assert_eq!(d.support_len(), 2);
        assert_eq!(d.prob(&[1, 1]), BigRational::new(BigInt::one(), BigInt::from(2)));
    }

    #[test]
    fn rot3_law() {
        let d = Rot3Process.law(&[0, 1, 2]).unwrap();
        assert_eq!(d.support_len(), 3);
        assert!(d.is_uniform());
        assert_eq!(d.prob(&[2, 0, 1]), BigRational::new(BigInt::one(), BigInt::from(3)));
        assert_eq!(Rot3Process.law(&[-1]).unwrap().prob(&[2]), BigRational::new(BigInt::one(), BigInt::from(3)));
    }

    #[test]
    fn plane_window_order() {
        assert_eq!(<(i64, i64)>::window(2), vec![(0, 0), (1, 0), (0, 1), (1, 1)]);
        assert_eq!(i64::window(3), vec![0, 1, 2]);
        assert_eq!((1, 2).shift((3, -1)), (4, 1));
    }
}
