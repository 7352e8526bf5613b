//! Finite sample spaces and events over them.
//!
//! An event is a set of atom indices stored as sorted, disjoint, non-adjacent
//! half-open ranges. Lottery tickets and the cells of a frame are contiguous
//! blocks of atoms, so even spaces with tens of thousands of atoms keep events
//! to a handful of ranges.

use std::collections::HashSet;
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Ordered, uniquely labelled atoms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct SampleSpace {
    atoms: Vec<String>,
}

impl SampleSpace {
    pub fn new(atoms: Vec<String>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Validation("sample space needs at least one atom".into()));
        }
        let mut seen = HashSet::with_capacity(atoms.len());
        if let Some(dup) = atoms.iter().find(|a| !seen.insert(a.as_str())) {
            return Err(Error::Validation(format!("duplicate atom label `{dup}`")));
        }
        Ok(SampleSpace { atoms })
    }

    /// Atoms labelled `1..=n`.
    pub fn numbered(n: usize) -> Result<Self> {
        SampleSpace::new((1..=n).map(|i| i.to_string()).collect())
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.atoms
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.atoms.iter().position(|a| a == label)
    }

    pub fn full(&self) -> Event {
        Event::full(self.n_atoms())
    }
}

impl TryFrom<Vec<String>> for SampleSpace {
    type Error = Error;
    fn try_from(atoms: Vec<String>) -> Result<Self> {
        SampleSpace::new(atoms)
    }
}

impl From<SampleSpace> for Vec<String> {
    fn from(space: SampleSpace) -> Self {
        space.atoms
    }
}

/// A set of atom indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Event {
    ranges: Vec<Range<usize>>,
}

impl Event {
    pub fn empty() -> Self {
        Event::default()
    }

    pub fn full(n_atoms: usize) -> Self {
        Event::span(0..n_atoms)
    }

    pub fn span(range: Range<usize>) -> Self {
        Event::from_ranges([range])
    }

    pub fn from_ranges<I: IntoIterator<Item = Range<usize>>>(ranges: I) -> Self {
        let mut rs: Vec<Range<usize>> = ranges.into_iter().filter(|r| r.start < r.end).collect();
        rs.sort_by_key(|r| r.start);
        let mut merged: Vec<Range<usize>> = Vec::with_capacity(rs.len());
        for r in rs {
            match merged.last_mut() {
                Some(last) if r.start <= last.end => last.end = last.end.max(r.end),
                _ => merged.push(r),
            }
        }
        Event { ranges: merged }
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        Event::from_ranges(indices.into_iter().map(|i| i..i + 1))
    }

    pub fn ranges(&self) -> &[Range<usize>] {
        &self.ranges
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.ranges.iter().flat_map(|r| r.clone())
    }

    pub fn len(&self) -> usize {
        self.ranges.iter().map(|r| r.end - r.start).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    pub fn contains(&self, atom: usize) -> bool {
        let i = self.ranges.partition_point(|r| r.end <= atom);
        self.ranges.get(i).is_some_and(|r| r.start <= atom)
    }

    /// One past the largest member index, or 0 for the empty event.
    pub fn bound(&self) -> usize {
        self.ranges.last().map_or(0, |r| r.end)
    }

    pub fn check(&self, n_atoms: usize) -> Result<()> {
        if self.bound() > n_atoms {
            return Err(Error::InvalidEvent(format!(
                "atom index {} out of range for {} atoms",
                self.bound() - 1,
                n_atoms
            )));
        }
        Ok(())
    }

    pub fn union(&self, other: &Event) -> Event {
        Event::from_ranges(self.ranges.iter().chain(&other.ranges).cloned())
    }

    pub fn intersection(&self, other: &Event) -> Event {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < self.ranges.len() && j < other.ranges.len() {
            let (a, b) = (&self.ranges[i], &other.ranges[j]);
            let start = a.start.max(b.start);
            let end = a.end.min(b.end);
            if start < end {
                out.push(start..end);
            }
            if a.end < b.end {
                i += 1;
            } else {
                j += 1;
            }
        }
        Event { ranges: out }
    }

    pub fn complement(&self, n_atoms: usize) -> Event {
        let mut out = Vec::with_capacity(self.ranges.len() + 1);
        let mut cursor = 0;
        for r in &self.ranges {
            if r.start >= n_atoms {
                break;
            }
            if cursor < r.start {
                out.push(cursor..r.start);
            }
            cursor = r.end;
        }
        if cursor < n_atoms {
            out.push(cursor..n_atoms);
        }
        Event { ranges: out }
    }

    pub fn is_disjoint(&self, other: &Event) -> bool {
        self.intersection(other).is_empty()
    }
}

/// Inclusive ranges, e.g. `0-3,7`.
impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.ranges.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            if r.end - r.start == 1 {
                write!(f, "{}", r.start)?;
            } else {
                write!(f, "{}-{}", r.start, r.end - 1)?;
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for Event {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |part: &str| Error::InvalidEvent(format!("malformed range `{part}` in `{s}`"));
        let mut ranges = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let range = match part.split_once('-') {
                Some((a, b)) => {
                    let a: usize = a.trim().parse().map_err(|_| bad(part))?;
                    let b: usize = b.trim().parse().map_err(|_| bad(part))?;
                    if b < a {
                        return Err(bad(part));
                    }
                    a..b + 1
                }
                None => {
                    let a: usize = part.parse().map_err(|_| bad(part))?;
                    a..a + 1
                }
            };
            ranges.push(range);
        }
        Ok(Event::from_ranges(ranges))
    }
}

impl Serialize for Event {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Event {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Indices(Vec<usize>),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Repr::Indices(v) => Ok(Event::from_indices(v)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn space_rejects_duplicates_and_empty() {
        assert!(SampleSpace::new(vec![]).is_err());
        assert!(SampleSpace::new(vec!["a".into(), "a".into()]).is_err());
        assert_eq!(SampleSpace::numbered(3).unwrap().n_atoms(), 3);
    }

    #[test]
    fn ranges_merge_and_print() {
        let e = Event::from_indices([3, 1, 2, 7, 0]);
        assert_eq!(e.ranges(), &[0..4, 7..8]);
        assert_eq!(e.to_string(), "0-3,7");
        assert_eq!("0-3, 7".parse::<Event>().unwrap(), e);
        assert_eq!(e.len(), 5);
    }

    #[test]
    fn complement_and_bounds() {
        let e = Event::from_indices([1, 2, 5]);
        assert_eq!(e.complement(7), Event::from_indices([0, 3, 4, 6]));
        assert_eq!(Event::empty().complement(4), Event::full(4));
        assert!(e.check(6).is_ok());
        assert!(e.check(5).is_err());
    }

    #[test]
    fn deserializes_index_lists() {
        let e: Event = serde_json::from_str("[4, 0, 1]").unwrap();
        assert_eq!(e, Event::from_indices([0, 1, 4]));
        let e: Event = serde_json::from_str("\"\"").unwrap();
        assert!(e.is_empty());
    }

    fn arb_event(n: usize) -> impl Strategy<Value = Event> {
        proptest::collection::vec(any::<bool>(), n)
            .prop_map(|bits| Event::from_indices(bits.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i)))
    }

    proptest! {
        #[test]
        fn set_algebra_matches_membership(a in arb_event(24), b in arb_event(24)) {
            let u = a.union(&b);
            let i = a.intersection(&b);
            let c = a.complement(24);
            for k in 0..24 {
                prop_assert_eq!(u.contains(k), a.contains(k) || b.contains(k));
                prop_assert_eq!(i.contains(k), a.contains(k) && b.contains(k));
                prop_assert_eq!(c.contains(k), !a.contains(k));
            }
            prop_assert_eq!(a.is_disjoint(&b), (0..24).all(|k| !(a.contains(k) && b.contains(k))));
            let text: Event = a.to_string().parse().unwrap();
            prop_assert_eq!(text, a);
        }
    }
}
