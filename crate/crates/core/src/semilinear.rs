//! Linear and semilinear sets of natural vectors.
//!
//! A linear set is an offset plus all nonnegative integer combinations of a
//! list of period vectors; a semilinear set is a finite union of linear
//! sets. General dimension is supported for membership and union; the
//! conversions to and from eventually periodic sets are one-dimensional,
//! which is all the unary pipeline needs. In dimension one, a pump tuple
//! `<p, q_0, ..., q_k>` becomes the linear set with offset
//! `p + q_0 + ... + q_k` (absorbing the mandatory first copy of every
//! generator) and periods `q_0, ..., q_k`.

use crate::automata::EventuallyPeriodicSet;
use crate::error::{Error, Result};
use crate::pumping::PumpTuple;
use serde::ser::{Serialize, SerializeStruct, Serializer};
use std::collections::BTreeSet;
use std::fmt;

/// `{offset + n_1 p_1 + ... + n_k p_k : n_i in N}` in `N^dim`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearSet {
    offset: Vec<usize>,
    periods: Vec<Vec<usize>>,
}

impl LinearSet {
    pub fn new(offset: Vec<usize>, periods: Vec<Vec<usize>>) -> Result<Self> {
        let dim = offset.len();
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        for p in &periods {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
        }
        Ok(LinearSet { offset, periods })
    }

    /// One-dimensional constructor.
    pub fn dim1(offset: usize, periods: Vec<usize>) -> Self {
        LinearSet {
            offset: vec![offset],
            periods: periods.into_iter().map(|q| vec![q]).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn offset(&self) -> &[usize] {
        &self.offset
    }

    pub fn periods(&self) -> &[Vec<usize>] {
        &self.periods
    }

    /// Membership by bounded coefficient search. All-zero periods are
    /// discarded first; every surviving period has a positive component,
    /// which bounds its coefficient by the corresponding target component.
    pub fn contains(&self, v: &[usize]) -> Result<bool> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        let periods: Vec<&Vec<usize>> = self
            .periods
            .iter()
            .filter(|p| p.iter().any(|&x| x > 0))
            .collect();

        fn search(offset: &[usize], periods: &[&Vec<usize>], v: &[usize]) -> bool {
            if offset.iter().zip(v).any(|(o, t)| o > t) {
                return false;
            }
            match periods.split_first() {
                None => offset == v,
                Some((p, rest)) => {
                    // Coefficient bound from any positive component.
                    let bound = p
                        .iter()
                        .zip(v.iter().zip(offset))
                        .filter(|(pc, _)| **pc > 0)
                        .map(|(pc, (t, o))| (t - o) / pc)
                        .min()
                        .expect("period has a positive component");
                    (0..=bound).any(|n| {
                        let shifted: Vec<usize> = offset
                            .iter()
                            .zip(p.iter())
                            .map(|(o, pc)| o + n * pc)
                            .collect();
                        search(&shifted, rest, v)
                    })
                }
            }
        }
        Ok(search(&self.offset, &periods, v))
    }

    /// Exact conversion of a one-dimensional linear set to an eventually
    /// periodic set. Beyond a numerical-semigroup closure bound the member
    /// pattern repeats with period `gcd` of the generators; the top window
    /// of the dynamic program is asserted to be periodic, doubling the bound
    /// until it stabilizes.
    pub fn to_eps(&self) -> Result<EventuallyPeriodicSet> {
        if self.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: self.dim(),
            });
        }
        let offset = self.offset[0];
        let qs: Vec<usize> = self
            .periods
            .iter()
            .map(|p| p[0])
            .filter(|&q| q > 0)
            .collect();
        if qs.is_empty() {
            return Ok(EventuallyPeriodicSet::new(
                offset + 1,
                1,
                BTreeSet::from([offset]),
                BTreeSet::new(),
            ));
        }
        let g = qs.iter().copied().fold(0, gcd);
        let qmax = *qs.iter().max().expect("non-empty");

        let mut bound = offset + qmax * qmax + qmax;
        loop {
            let mut bits = vec![false; bound + 1];
            bits[offset] = true;
            for n in offset..=bound {
                if bits[n] {
                    for &q in &qs {
                        if n + q <= bound {
                            bits[n + q] = true;
                        }
                    }
                }
            }
            // A periodic window of width qmax at the top propagates upward
            // forever, because every new member is an old member plus one
            // generator.
            let window_start = bound - g - qmax + 1;
            if (window_start..=bound - g).all(|n| bits[n] == bits[n + g]) {
                let threshold = window_start;
                let low = (0..threshold).filter(|&n| bits[n]).collect();
                let cyc = (0..g).filter(|&r| bits[threshold + r]).collect();
                return Ok(EventuallyPeriodicSet::new(threshold, g, low, cyc));
            }
            bound *= 2;
        }
    }
}

impl fmt::Display for LinearSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fmt_vec = |v: &[usize]| {
            if v.len() == 1 {
                v[0].to_string()
            } else {
                format!(
                    "({})",
                    v.iter()
                        .map(|x| x.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                )
            }
        };
        write!(
            f,
            "<{}; ({})>",
            fmt_vec(&self.offset),
            self.periods
                .iter()
                .map(|p| fmt_vec(p))
                .collect::<Vec<_>>()
                .join(",")
        )
    }
}

impl Serialize for LinearSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("LinearSet", 2)?;
        if self.dim() == 1 {
            s.serialize_field("offset", &self.offset[0])?;
            let periods: Vec<usize> = self.periods.iter().map(|p| p[0]).collect();
            s.serialize_field("periods", &periods)?;
        } else {
            s.serialize_field("offset", &self.offset)?;
            s.serialize_field("periods", &self.periods)?;
        }
        s.end()
    }
}

/// A finite union of linear sets of equal dimension.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SemilinearSet {
    components: Vec<LinearSet>,
}

impl SemilinearSet {
    pub fn new(components: Vec<LinearSet>) -> Result<Self> {
        if let Some(first) = components.first() {
            let dim = first.dim();
            for c in &components {
                if c.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: c.dim(),
                    });
                }
            }
        }
        Ok(SemilinearSet { components })
    }

    pub fn empty() -> Self {
        SemilinearSet {
            components: Vec::new(),
        }
    }

    pub fn components(&self) -> &[LinearSet] {
        &self.components
    }

    /// Union is concatenation of component lists.
    pub fn union(&self, other: &SemilinearSet) -> Result<SemilinearSet> {
        let mut components = self.components.clone();
        components.extend(other.components.clone());
        SemilinearSet::new(components)
    }

    /// Membership in any component.
    pub fn contains(&self, v: &[usize]) -> Result<bool> {
        for c in &self.components {
            if c.contains(v)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// One linear set per explicit low member (offset only) and one per
    /// cyclic residue (offset plus a single period).
    pub fn from_eps(eps: &EventuallyPeriodicSet) -> SemilinearSet {
        let mut components = Vec::new();
        for &m in eps.low() {
            components.push(LinearSet::dim1(m, vec![]));
        }
        for &r in eps.cyc() {
            components.push(LinearSet::dim1(eps.threshold() + r, vec![eps.period()]));
        }
        SemilinearSet { components }
    }
}

impl fmt::Display for SemilinearSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.is_empty() {
            return write!(f, "{{}}");
        }
        write!(
            f,
            "{}",
            self.components
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(" ∪ ")
        )
    }
}

impl Serialize for SemilinearSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("SemilinearSet", 1)?;
        s.serialize_field("components", &self.components)?;
        s.end()
    }
}

/// The linear set of a pump tuple: offset `p + sum(qs)`, periods `qs`.
pub fn tuple_to_linear(tuple: &PumpTuple) -> LinearSet {
    LinearSet::dim1(tuple.min_member(), tuple.qs().to_vec())
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_membership_dim1() {
        let ls = LinearSet::dim1(3, vec![2]);
        assert!(ls.contains(&[9]).unwrap());
        assert!(!ls.contains(&[4]).unwrap());
    }

    #[test]
    fn linear_membership_dim2() {
        let ls = LinearSet::new(vec![1, 1], vec![vec![1, 0], vec![0, 2]]).unwrap();
        assert!(ls.contains(&[4, 5]).unwrap());
        assert!(!ls.contains(&[4, 4]).unwrap());
        assert!(matches!(
            ls.contains(&[1]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn zero_periods_do_not_matter() {
        let with_zero = LinearSet::new(vec![2], vec![vec![0], vec![3]]).unwrap();
        let without = LinearSet::dim1(2, vec![3]);
        for n in 0..=40 {
            assert_eq!(
                with_zero.contains(&[n]).unwrap(),
                without.contains(&[n]).unwrap(),
                "at {n}"
            );
        }
    }

    #[test]
    fn tuple_to_linear_examples() {
        let t = tuple_to_linear(&PumpTuple::new(1, vec![2]));
        assert_eq!(t.offset(), &[3]);
        assert_eq!(t.periods(), &[vec![2]]);

        let t = tuple_to_linear(&PumpTuple::new(0, vec![1]));
        assert_eq!(t.offset(), &[1]);

        let t = tuple_to_linear(&PumpTuple::new(2, vec![1, 3]));
        assert_eq!(t.offset(), &[6]);
        assert_eq!(t.periods(), &[vec![1], vec![3]]);
    }

    #[test]
    fn linear_to_eps_semigroup() {
        // Offset 0, generators {2, 3}: everything except 1.
        let eps = LinearSet::dim1(0, vec![2, 3]).to_eps().unwrap();
        for n in 0..=100 {
            assert_eq!(eps.contains(n), n != 1, "at {n}");
        }

        // Offset 3, generator {2}: odd numbers from 3.
        let eps = LinearSet::dim1(3, vec![2]).to_eps().unwrap();
        for n in 0..=100 {
            assert_eq!(eps.contains(n), n >= 3 && n % 2 == 1, "at {n}");
        }

        // No periods: the singleton offset.
        let eps = LinearSet::dim1(5, vec![]).to_eps().unwrap();
        for n in 0..=20 {
            assert_eq!(eps.contains(n), n == 5, "at {n}");
        }
    }

    #[test]
    fn linear_to_eps_matches_membership() {
        let ls = LinearSet::dim1(4, vec![6, 10]);
        let eps = ls.to_eps().unwrap();
        for n in 0..=300 {
            assert_eq!(eps.contains(n), ls.contains(&[n]).unwrap(), "at {n}");
        }
    }

    #[test]
    fn semilinear_ops() {
        let eps = LinearSet::dim1(3, vec![2]).to_eps().unwrap();
        let patched = eps.add_finite(&BTreeSet::from([1]));
        let sl = SemilinearSet::from_eps(&patched);
        // Odd numbers >= 1 collapse to a single residue component.
        assert_eq!(sl.components().len(), 1);
        for n in 0..=100 {
            assert_eq!(sl.contains(&[n]).unwrap(), patched.contains(n), "at {n}");
        }

        assert!(!SemilinearSet::empty().contains(&[7]).unwrap());

        let a = SemilinearSet::new(vec![LinearSet::dim1(1, vec![])]).unwrap();
        let b = SemilinearSet::new(vec![LinearSet::new(vec![1, 2], vec![]).unwrap()]).unwrap();
        assert!(matches!(a.union(&b), Err(Error::DimensionMismatch { .. })));
    }
}
