//! Finite abelian p-groups `C_{p^a1} + ... + C_{p^ab}` in coordinate form.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::padic::{self, checked_pow, mul_mod};

pub type Coords = SmallVec<[u64; 4]>;

/// A residue vector; coordinate `j` lives in `[0, p^{a_j})`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement(pub Coords);

impl GroupElement {
    pub fn from_slice(coords: &[u64]) -> Self {
        GroupElement(Coords::from_slice(coords))
    }

    pub fn coords(&self) -> &[u64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn to_vec(&self) -> Vec<u64> {
        self.0.to_vec()
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "{}", self.0[0]);
        }
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// The additive group of a brace. Indexing is mixed radix with the first
/// coordinate least significant: `index = sum_j a_j * W_j`, `W_1 = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimePowerGroup {
    p: u64,
    exponents: Vec<u32>,
    moduli: Vec<u64>,
    weights: Vec<u64>,
    order: u64,
    n: u32,
}

impl PrimePowerGroup {
    pub fn new(p: u64, exponents: &[u32]) -> Result<Self> {
        padic::require_odd_prime(p)?;
        if exponents.is_empty() {
            return Err(Error::EmptyExponents);
        }
        if exponents.contains(&0) {
            return Err(Error::ZeroExponent);
        }
        let n: u32 = exponents.iter().sum();
        let order = checked_pow(p, n)?;
        let moduli = exponents
            .iter()
            .map(|&a| checked_pow(p, a))
            .collect::<Result<Vec<_>>>()?;
        let mut weights = Vec::with_capacity(moduli.len());
        let mut w = 1u64;
        for m in &moduli {
            weights.push(w);
            w *= m;
        }
        Ok(PrimePowerGroup { p, exponents: exponents.to_vec(), moduli, weights, order, n })
    }

    /// `sum_j C_{p^{a_j}}`, or the trivial group when `exponents` is empty.
    /// Used for quotients, which may collapse to a point.
    pub fn trivial_or(p: u64, exponents: &[u32]) -> Self {
        if exponents.is_empty() {
            return PrimePowerGroup { p, exponents: vec![], moduli: vec![], weights: vec![], order: 1, n: 0 };
        }
        PrimePowerGroup::new(p, exponents).expect("valid quotient exponents")
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn rank(&self) -> usize {
        self.exponents.len()
    }

    /// Total exponent: `|A| = p^n`.
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn modulus(&self, j: usize) -> u64 {
        self.moduli[j]
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn max_exponent(&self) -> u32 {
        self.exponents.iter().copied().max().unwrap_or(0)
    }

    /// `Some(a)` when every cyclic factor has order `p^a`.
    pub fn uniform_exponent(&self) -> Option<u32> {
        let a = *self.exponents.first()?;
        self.exponents.iter().all(|&e| e == a).then_some(a)
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement(smallvec::smallvec![0; self.rank()])
    }

    pub fn generator(&self, j: usize) -> GroupElement {
        let mut g = self.zero();
        g.0[j] = 1 % self.moduli[j];
        g
    }

    pub fn generators(&self) -> Vec<GroupElement> {
        (0..self.rank()).map(|j| self.generator(j)).collect()
    }

    /// Validated element from raw coordinates.
    pub fn element(&self, coords: &[u64]) -> Result<GroupElement> {
        if coords.len() != self.rank() {
            return Err(Error::RankMismatch { got: coords.len(), rank: self.rank() });
        }
        for (position, (&c, &m)) in coords.iter().zip(&self.moduli).enumerate() {
            if c >= m {
                return Err(Error::CoordinateOutOfRange { position, coord: c });
            }
        }
        Ok(GroupElement::from_slice(coords))
    }

    /// Element from arbitrary integer coordinates, reduced into range.
    pub fn reduce(&self, coords: &[i128]) -> GroupElement {
        GroupElement(
            coords
                .iter()
                .zip(&self.moduli)
                .map(|(&c, &m)| padic::reduce_signed(c, m))
                .collect(),
        )
    }

    pub fn element_at(&self, index: u64) -> Result<GroupElement> {
        if index >= self.order {
            return Err(Error::IndexOutOfRange { index, order: self.order });
        }
        Ok(self.element_at_unchecked(index))
    }

    #[inline]
    pub fn element_at_unchecked(&self, mut index: u64) -> GroupElement {
        let mut out = Coords::with_capacity(self.rank());
        for &m in &self.moduli {
            out.push(index % m);
            index /= m;
        }
        GroupElement(out)
    }

    #[inline]
    pub fn index_of(&self, x: &GroupElement) -> u64 {
        x.0.iter().zip(&self.weights).map(|(c, w)| c * w).sum()
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order).map(move |i| self.element_at_unchecked(i))
    }

    #[inline]
    pub fn add(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        GroupElement(
            x.0.iter()
                .zip(&y.0)
                .zip(&self.moduli)
                .map(|((a, b), m)| {
                    let s = a + b;
                    if s >= *m {
                        s - m
                    } else {
                        s
                    }
                })
                .collect(),
        )
    }

    #[inline]
    pub fn sub(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        GroupElement(
            x.0.iter()
                .zip(&y.0)
                .zip(&self.moduli)
                .map(|((a, b), m)| if a >= b { a - b } else { m - (b - a) })
                .collect(),
        )
    }

    #[inline]
    pub fn neg(&self, x: &GroupElement) -> GroupElement {
        GroupElement(
            x.0.iter()
                .zip(&self.moduli)
                .map(|(a, m)| if *a == 0 { 0 } else { m - a })
                .collect(),
        )
    }

    /// Integer multiple `k * x`.
    #[inline]
    pub fn scale(&self, x: &GroupElement, k: u64) -> GroupElement {
        GroupElement(
            x.0.iter()
                .zip(&self.moduli)
                .map(|(a, m)| mul_mod(*a, k % m, *m))
                .collect(),
        )
    }

    pub fn scale_signed(&self, x: &GroupElement, k: i64) -> GroupElement {
        let y = self.scale(x, k.unsigned_abs());
        if k < 0 {
            self.neg(&y)
        } else {
            y
        }
    }

    /// `p^i`, saturating at the group exponent (any larger power acts as 0).
    pub fn p_pow(&self, i: u32) -> u64 {
        let e = i.min(self.max_exponent());
        checked_pow(self.p, e).expect("below group exponent")
    }

    /// `p^i * x`.
    pub fn scale_p(&self, x: &GroupElement, i: u32) -> GroupElement {
        if i >= self.max_exponent() {
            return self.zero();
        }
        self.scale(x, self.p_pow(i))
    }

    /// Membership in `p^i A`.
    pub fn in_p_power(&self, x: &GroupElement, i: u32) -> bool {
        x.0.iter().zip(&self.exponents).all(|(&c, &a)| {
            let d = checked_pow(self.p, i.min(a)).expect("below factor order");
            c % d == 0
        })
    }

    /// Membership in `ann(p^i)`.
    pub fn in_annihilator(&self, x: &GroupElement, i: u32) -> bool {
        x.0.iter().zip(&self.exponents).all(|(&c, &a)| {
            let d = checked_pow(self.p, a.saturating_sub(i)).expect("below factor order");
            c % d == 0
        })
    }

    /// Canonical division by `p^k` on `p^k A`: each coordinate divided
    /// exactly; coordinates whose factor order is at most `p^k` map to 0.
    pub fn divide_p_power(&self, x: &GroupElement, k: u32) -> Result<GroupElement> {
        if !self.in_p_power(x, k) {
            return Err(Error::OutsidePowerSubgroup { k });
        }
        Ok(GroupElement(
            x.0.iter()
                .zip(&self.exponents)
                .map(|(&c, &a)| if a <= k { 0 } else { c / checked_pow(self.p, k).unwrap() })
                .collect(),
        ))
    }

    /// Additive order `p^e` of `x`, returned as the exponent `e`.
    pub fn order_exponent(&self, x: &GroupElement) -> u32 {
        x.0.iter()
            .zip(&self.exponents)
            .map(|(&c, &a)| match padic::valuation(c, self.p) {
                None => 0,
                Some(v) => a - v,
            })
            .max()
            .unwrap_or(0)
    }

    /// The socle `ann(p)`, whose non-zero elements detect kernels of
    /// additive maps.
    pub fn socle(&self) -> Vec<GroupElement> {
        let mut out = vec![self.zero()];
        for j in 0..self.rank() {
            let step = self.moduli[j] / self.p;
            let mut next = Vec::with_capacity(out.len() * self.p as usize);
            for x in &out {
                for t in 0..self.p {
                    let mut y = x.clone();
                    y.0[j] = t * step;
                    next.push(y);
                }
            }
            out = next;
        }
        out
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupElement {
        GroupElement(self.moduli.iter().map(|&m| rng.gen_range(0..m)).collect())
    }

    /// The group `p^k A` identified with `sum_j C_{p^{a_j - k}}` through
    /// division by `p^k` (factors of order at most `p^k` vanish).
    /// Returns `None` when `p^k A = 0`.
    pub fn divided(&self, k: u32) -> Option<(PrimePowerGroup, Vec<usize>)> {
        let kept: Vec<usize> = (0..self.rank()).filter(|&j| self.exponents[j] > k).collect();
        if kept.is_empty() {
            return None;
        }
        let exps: Vec<u32> = kept.iter().map(|&j| self.exponents[j] - k).collect();
        Some((PrimePowerGroup::new(self.p, &exps).expect("sub-exponents valid"), kept))
    }

    pub fn describe(&self) -> String {
        self.exponents
            .iter()
            .map(|a| format!("C_{}^{}", self.p, a))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// An additive endomorphism, stored as the images of the standard
/// generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdditiveMap {
    images: Vec<GroupElement>,
}

impl AdditiveMap {
    /// Fails unless the image of generator `j` has order dividing `p^{a_j}`.
    pub fn new(group: &PrimePowerGroup, images: Vec<GroupElement>) -> Result<Self> {
        if images.len() != group.rank() {
            return Err(Error::RankMismatch { got: images.len(), rank: group.rank() });
        }
        for (j, img) in images.iter().enumerate() {
            if group.order_exponent(img) > group.exponents()[j] {
                return Err(Error::NotAdditive { generator: j });
            }
        }
        Ok(AdditiveMap { images })
    }

    pub fn identity(group: &PrimePowerGroup) -> Self {
        AdditiveMap { images: group.generators() }
    }

    pub fn images(&self) -> &[GroupElement] {
        &self.images
    }

    pub fn apply(&self, group: &PrimePowerGroup, x: &GroupElement) -> GroupElement {
        let mut acc = group.zero();
        for (c, img) in x.0.iter().zip(&self.images) {
            if *c != 0 {
                acc = group.add(&acc, &group.scale(img, *c));
            }
        }
        acc
    }

    /// `self . other`.
    pub fn compose(&self, group: &PrimePowerGroup, other: &AdditiveMap) -> AdditiveMap {
        AdditiveMap { images: other.images.iter().map(|g| self.apply(group, g)).collect() }
    }

    /// `self - I`.
    pub fn minus_identity(&self, group: &PrimePowerGroup) -> AdditiveMap {
        AdditiveMap {
            images: self
                .images
                .iter()
                .enumerate()
                .map(|(j, img)| group.sub(img, &group.generator(j)))
                .collect(),
        }
    }

    /// Injective (hence bijective) iff no non-zero socle element is killed.
    pub fn is_bijective(&self, group: &PrimePowerGroup) -> bool {
        group.socle().iter().skip(1).all(|x| !self.apply(group, x).is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_group_examples() {
        let g = PrimePowerGroup::new(5, &[4]).unwrap();
        assert_eq!((g.order(), g.n()), (625, 4));
        let g = PrimePowerGroup::new(5, &[1, 1]).unwrap();
        assert_eq!((g.order(), g.n()), (25, 2));
        let g = PrimePowerGroup::new(7, &[6]).unwrap();
        assert_eq!((g.order(), g.n()), (117_649, 6));
        assert!(matches!(PrimePowerGroup::new(6, &[1]), Err(Error::NotPrime(6))));
        assert!(matches!(PrimePowerGroup::new(5, &[]), Err(Error::EmptyExponents)));
        assert!(matches!(PrimePowerGroup::new(2, &[3]), Err(Error::EvenPrime)));
        assert!(PrimePowerGroup::new(7, &[40]).is_err());
    }

    #[test]
    fn codec_examples() {
        let g = PrimePowerGroup::new(5, &[1, 1]).unwrap();
        assert_eq!(g.element_at(7).unwrap().coords(), &[2, 1]);
        assert!(g.element_at(0).unwrap().is_zero());
        assert!(g.element_at(25).is_err());
        let z = PrimePowerGroup::new(5, &[4]).unwrap();
        assert_eq!(z.index_of(&z.element(&[17]).unwrap()), 17);
        assert!(z.element(&[625]).is_err());
    }

    #[test]
    fn codec_round_trip_mixed() {
        let g = PrimePowerGroup::new(3, &[2, 1, 3]).unwrap();
        for i in 0..g.order() {
            assert_eq!(g.index_of(&g.element_at(i).unwrap()), i);
        }
    }

    #[test]
    fn subgroup_membership_and_division() {
        let g = PrimePowerGroup::new(5, &[3, 1]).unwrap();
        let x = g.element(&[25, 0]).unwrap();
        assert!(g.in_p_power(&x, 2));
        assert!(!g.in_p_power(&g.element(&[25, 1]).unwrap(), 1));
        assert_eq!(g.divide_p_power(&x, 1).unwrap().coords(), &[5, 0]);
        assert!(g.in_annihilator(&g.element(&[25, 3]).unwrap(), 1));
        assert!(!g.in_annihilator(&g.element(&[5, 3]).unwrap(), 1));
        assert_eq!(g.socle().len(), 25);
    }

    #[test]
    fn additive_map_well_definedness() {
        let g = PrimePowerGroup::new(5, &[2, 1]).unwrap();
        // generator 2 has order 5; sending it to an element of order 25 is ill-defined
        assert!(AdditiveMap::new(&g, vec![g.generator(0), g.generator(0)]).is_err());
        let m = AdditiveMap::new(&g, vec![g.generator(0), g.element(&[5, 1]).unwrap()]).unwrap();
        assert!(m.is_bijective(&g));
        let x = g.element(&[3, 2]).unwrap();
        assert_eq!(m.apply(&g, &x).coords(), &[13, 2]);
    }
}
