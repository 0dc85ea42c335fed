//! Enumeration of the resonance sets `S¹(k₃)` (sum rule `k1 + k2 = k3`) and
//! `S²(k₃)` (sum rule `k2 + k3 = k1`).
//!
//! Two independent routes produce the full triad list of a domain: a brute-force
//! scan over ordered pairs `(k1, k2)`, and the union of the two parametric
//! families (axis-aligned right triangles, and the solutions of
//! `k1x·k2x = -k1y·k2y` with every coordinate nonzero). The brute-force scan
//! stays in the crate as the oracle for the families.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{is_resonant_triad, Domain, Triad, WaveVector};

/// Default ceiling on `bound` for the O(K⁴) brute-force scan.
pub const DEFAULT_MAX_BOUND: i32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SetKind {
    /// Pairs with `k1 + k2 = k3`, `|k1|² + |k2|² = |k3|²` (nonlinearity `u²`).
    S1,
    /// Pairs with `k2 + k3 = k1`, `|k2|² + |k3|² = |k1|²` (nonlinearity `ūu`).
    S2,
}

impl fmt::Display for SetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SetKind::S1 => "s1",
            SetKind::S2 => "s2",
        })
    }
}

impl FromStr for SetKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s1" => Ok(SetKind::S1),
            "s2" => Ok(SetKind::S2),
            _ => Err(Error::InvalidConfig(format!("unknown resonance set `{s}`"))),
        }
    }
}

/// All triads of `domain`, by exhaustive scan, with the default bound ceiling.
pub fn enumerate_bruteforce(domain: &Domain) -> Result<Vec<Triad>> {
    enumerate_bruteforce_capped(domain, DEFAULT_MAX_BOUND)
}

/// Scans every ordered pair `(k1, k2)` of admissible vectors and keeps those whose
/// sum closes a resonant triad. Output is sorted by `(k3, k1)` and free of
/// duplicates. The scan is split over `k1` across the rayon pool; the final
/// sort makes the result independent of the split.
pub fn enumerate_bruteforce_capped(domain: &Domain, max_bound: i32) -> Result<Vec<Triad>> {
    if domain.bound() > max_bound {
        return Err(Error::BoundExceeded { bound: domain.bound(), max: max_bound });
    }
    let vectors = domain.as_square().vectors();
    let mut triads: Vec<Triad> = vectors
        .par_iter()
        .flat_map_iter(|&k1| {
            vectors.iter().filter_map(move |&k2| {
                let k3 = k1 + k2;
                is_resonant_triad(k1, k2, k3, domain).then_some(Triad::new(k1, k2, k3))
            })
        })
        .collect();
    triads.sort_unstable();
    triads.dedup();
    Ok(triads)
}

/// Right triangles with catheti on the axes: `{(0,b), (a,0); (a,b)}` in both
/// orders, `a, b` nonzero with `|a|, |b| <= bound`.
pub fn generate_axis_family(domain: &Domain) -> Vec<Triad> {
    let b = domain.bound();
    let nonzero: Vec<i32> = (-b..=b).filter(|&c| c != 0).collect();
    let mut out = Vec::with_capacity(2 * nonzero.len() * nonzero.len());
    for &a in &nonzero {
        for &c in &nonzero {
            let (vertical, horizontal) = (WaveVector::new(0, c), WaveVector::new(a, 0));
            let k3 = WaveVector::new(a, c);
            out.push(Triad::new(vertical, horizontal, k3));
            out.push(Triad::new(horizontal, vertical, k3));
        }
    }
    out.retain(|t| domain.admits(t));
    out.sort_unstable();
    out
}

/// Solutions with every coordinate of `k1`, `k2` nonzero: choose `k1x`, `k2x`,
/// `k1y` freely and set `k2y = -k1x·k2x / k1y` when the division is exact.
pub fn generate_general_family(domain: &Domain) -> Vec<Triad> {
    let b = domain.bound();
    let nonzero: Vec<i32> = (-b..=b).filter(|&c| c != 0).collect();
    let mut out = Vec::new();
    for &k1x in &nonzero {
        for &k2x in &nonzero {
            for &k1y in &nonzero {
                if let Some(t) = general_family_member(k1x, k2x, k1y) {
                    if t.max_abs() <= b as u32 && domain.admits(&t) {
                        out.push(t);
                    }
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// The member of the general family fixed by `(k1x, k2x, k1y)`, if integral
/// and non-degenerate. Bounds are not checked.
pub fn general_family_member(k1x: i32, k2x: i32, k1y: i32) -> Option<Triad> {
    if k1x == 0 || k2x == 0 || k1y == 0 {
        return None;
    }
    let num = -i64::from(k1x) * i64::from(k2x);
    let den = i64::from(k1y);
    if num % den != 0 {
        return None;
    }
    let k2y = i32::try_from(num / den).ok().filter(|&y| y != 0)?;
    Some(Triad::from_pair(WaveVector::new(k1x, k1y), WaveVector::new(k2x, k2y)))
}

/// Union of both parametric families, in canonical order.
pub fn generate_families(domain: &Domain) -> Vec<Triad> {
    let mut all = generate_axis_family(domain);
    all.extend(generate_general_family(domain));
    all.sort_unstable();
    all.dedup();
    all
}

/// Ordered pairs `(k1, k2)` of `S¹(k3)` or `S²(k3)` inside `domain`, sorted by `k1`.
/// A `k3` outside the domain has no pairs.
pub fn resonance_set(kind: SetKind, k3: WaveVector, domain: &Domain) -> Vec<(WaveVector, WaveVector)> {
    if k3.is_zero() || !domain.in_bound(k3) {
        return Vec::new();
    }
    let mut pairs: Vec<(WaveVector, WaveVector)> = match kind {
        SetKind::S1 => domain
            .as_square()
            .vectors()
            .into_iter()
            .filter_map(|k1| {
                let k2 = k3 - k1;
                is_resonant_triad(k1, k2, k3, domain).then_some((k1, k2))
            })
            .collect(),
        // (k1, k2) ∈ S²(k3) iff (k2, k3; k1) is an S¹ triad.
        SetKind::S2 => domain
            .as_square()
            .vectors()
            .into_iter()
            .filter_map(|k2| {
                let k1 = k2 + k3;
                is_resonant_triad(k2, k3, k1, domain).then_some((k1, k2))
            })
            .collect(),
    };
    pairs.sort_unstable();
    pairs
}

/// `S¹` or `S²` for every `k3` of a domain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceSet {
    pub kind: SetKind,
    pub domain: Domain,
    /// Keyed by `k3`; only nonempty entries are stored.
    pub carrier: BTreeMap<WaveVector, Vec<(WaveVector, WaveVector)>>,
}

impl ResonanceSet {
    /// Built from one triad scan: every S¹ triad `(k1, k2; k3)` contributes
    /// `(k1, k2)` to `S¹(k3)` and, read as `(k2, k3; k1)` for S², the pairs
    /// `(k3, k1) ∈ S²(k2)` and `(k3, k2) ∈ S²(k1)`.
    pub fn build(kind: SetKind, domain: &Domain) -> Result<Self> {
        let triads = generate_families(domain);
        let mut carrier: BTreeMap<WaveVector, Vec<(WaveVector, WaveVector)>> = BTreeMap::new();
        for t in &triads {
            match kind {
                SetKind::S1 => carrier.entry(t.k3).or_default().push((t.k1, t.k2)),
                // Each ordered triad (k2', k3'; k1') yields (k1', k2') ∈ S²(k3').
                SetKind::S2 => carrier.entry(t.k2).or_default().push((t.k3, t.k1)),
            }
        }
        for pairs in carrier.values_mut() {
            pairs.sort_unstable();
            pairs.dedup();
        }
        Ok(Self { kind, domain: *domain, carrier })
    }

    pub fn get(&self, k3: WaveVector) -> &[(WaveVector, WaveVector)] {
        self.carrier.get(&k3).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.carrier.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.carrier.is_empty()
    }
}

/// Number of (ordered) triads each vector of the domain takes part in.
/// Vectors near the bound can lose partners that exist on the full lattice.
pub fn participation(domain: &Domain, triads: &[Triad]) -> BTreeMap<WaveVector, usize> {
    let mut counts: BTreeMap<WaveVector, usize> =
        domain.vectors().into_iter().filter(|k| !k.is_zero()).map(|k| (k, 0)).collect();
    for t in triads {
        let distinct: BTreeSet<WaveVector> = t.members().into_iter().collect();
        for k in distinct {
            *counts.entry(k).or_default() += 1;
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: i32, y: i32) -> WaveVector {
        WaveVector::new(x, y)
    }

    fn sq(k: i32) -> Domain {
        Domain::square(k).unwrap()
    }

    /// Independent oracle: triple loop over (k1, k3), no use of the crate predicates.
    fn naive_count(k: i32) -> usize {
        let mut n = 0;
        for x1 in -k..=k {
            for y1 in -k..=k {
                for x3 in -k..=k {
                    for y3 in -k..=k {
                        let (x2, y2) = (x3 - x1, y3 - y1);
                        if x2.abs() > k || y2.abs() > k {
                            continue;
                        }
                        if (x1, y1) == (0, 0) || (x2, y2) == (0, 0) || (x3, y3) == (0, 0) {
                            continue;
                        }
                        if x1 * x1 + y1 * y1 + x2 * x2 + y2 * y2 == x3 * x3 + y3 * y3 {
                            n += 1;
                        }
                    }
                }
            }
        }
        n
    }

    #[test]
    fn bruteforce_counts_match_naive_oracle() {
        // Frozen from the naive scan (and an external scan): K = 0..=10.
        let frozen = [0, 8, 40, 112, 224, 376, 568, 832, 1136, 1480, 1896];
        for (k, &want) in frozen.iter().enumerate() {
            let k = k as i32;
            if k <= 5 {
                assert_eq!(naive_count(k), want, "oracle K={k}");
            }
            assert_eq!(enumerate_bruteforce(&sq(k)).unwrap().len(), want, "K={k}");
        }
    }

    #[test]
    fn bound_one_listing() {
        let got = enumerate_bruteforce(&sq(1)).unwrap();
        assert_eq!(got.len(), 8);
        assert!(got.contains(&Triad::new(v(0, 1), v(1, 0), v(1, 1))));
        assert!(got.contains(&Triad::new(v(1, 0), v(0, 1), v(1, 1))));
        for t in &got {
            assert!(t.k1.x == 0 || t.k1.y == 0);
            assert!(t.k3.x.abs() == 1 && t.k3.y.abs() == 1);
        }
    }

    #[test]
    fn bruteforce_contains_simplest_solution_and_is_sorted() {
        let got = enumerate_bruteforce(&sq(2)).unwrap();
        assert!(got.contains(&Triad::new(v(1, 1), v(1, -1), v(2, 0))));
        assert!(got.windows(2).all(|w| w[0].sort_key() < w[1].sort_key()));
        assert!(enumerate_bruteforce(&sq(0)).unwrap().is_empty());
    }

    #[test]
    fn bruteforce_respects_cap() {
        assert_eq!(enumerate_bruteforce_capped(&sq(9), 8), Err(Error::BoundExceeded { bound: 9, max: 8 }));
        assert!(enumerate_bruteforce(&sq(65)).is_err());
    }

    #[test]
    fn axis_family_examples() {
        assert!(generate_axis_family(&sq(1)).contains(&Triad::new(v(0, 1), v(1, 0), v(1, 1))));
        assert!(generate_axis_family(&sq(3)).contains(&Triad::new(v(0, 3), v(2, 0), v(2, 3))));
        assert!(generate_axis_family(&sq(0)).is_empty());
        // Every member has a zero coordinate in k1 or k2.
        for t in generate_axis_family(&sq(4)) {
            assert!(t.is_valid());
            assert!(t.k1.x == 0 || t.k1.y == 0);
        }
    }

    #[test]
    fn general_family_examples() {
        assert_eq!(general_family_member(1, 1, 1), Some(Triad::new(v(1, 1), v(1, -1), v(2, 0))));
        let t = general_family_member(2, 3, 1).unwrap();
        assert_eq!(t, Triad::new(v(2, 1), v(3, -6), v(5, -5)));
        assert!(is_resonant_triad(t.k1, t.k2, t.k3, &sq(6)));
        assert_eq!(general_family_member(1, 1, 2), None);
        assert!(generate_general_family(&sq(5))
            .iter()
            .all(|t| { [t.k1.x, t.k1.y, t.k2.x, t.k2.y].iter().all(|&c| c != 0) }));
    }

    #[test]
    fn families_partition_bruteforce() {
        for k in 0..=12 {
            let d = sq(k);
            let axis: BTreeSet<Triad> = generate_axis_family(&d).into_iter().collect();
            let general: BTreeSet<Triad> = generate_general_family(&d).into_iter().collect();
            assert!(axis.is_disjoint(&general), "K={k}");
            let brute: BTreeSet<Triad> = enumerate_bruteforce(&d).unwrap().into_iter().collect();
            let union: BTreeSet<Triad> = axis.union(&general).copied().collect();
            assert_eq!(union, brute, "K={k}");
        }
    }

    #[test]
    fn s1_examples() {
        let d = sq(2);
        assert_eq!(resonance_set(SetKind::S1, v(2, 0), &d), vec![(v(1, -1), v(1, 1)), (v(1, 1), v(1, -1))]);
        for k in 1..=6 {
            assert!(resonance_set(SetKind::S1, v(1, 0), &sq(k)).is_empty());
        }
        assert!(resonance_set(SetKind::S1, v(3, 0), &d).is_empty());
    }

    #[test]
    fn s2_examples() {
        let pairs = resonance_set(SetKind::S2, v(1, 1), &sq(2));
        assert!(pairs.contains(&(v(2, 0), v(1, -1))));
        for (k1, k2) in pairs {
            assert_eq!(k2 + v(1, 1), k1);
            assert_eq!(k2.norm2() + 2, k1.norm2());
        }
    }

    #[test]
    fn swap_relation_between_s1_and_s2() {
        let d = sq(8);
        for k3 in d.vectors() {
            for (k1, k2) in resonance_set(SetKind::S2, k3, &d) {
                assert!(is_resonant_triad(k2, k3, k1, &d));
            }
            for (k1, k2) in resonance_set(SetKind::S1, k3, &d) {
                assert!(resonance_set(SetKind::S1, k3, &d).contains(&(k2, k1)));
                assert!(resonance_set(SetKind::S2, k1, &d).contains(&(k3, k2)));
            }
        }
    }

    #[test]
    fn resonance_set_build_matches_pointwise() {
        for kind in [SetKind::S1, SetKind::S2] {
            let d = sq(4);
            let set = ResonanceSet::build(kind, &d).unwrap();
            for k3 in d.vectors() {
                assert_eq!(set.get(k3), resonance_set(kind, k3, &d).as_slice(), "{kind} {k3}");
            }
        }
    }

    #[test]
    fn reflection_symmetry() {
        let d = sq(7);
        let all: BTreeSet<Triad> = enumerate_bruteforce(&d).unwrap().into_iter().collect();
        let maps: [fn(WaveVector) -> WaveVector; 3] =
            [|k| WaveVector::new(-k.x, k.y), |k| WaveVector::new(k.x, -k.y), |k| WaveVector::new(k.y, k.x)];
        for m in maps {
            let mapped: BTreeSet<Triad> = all.iter().map(|t| t.map(m)).collect();
            assert_eq!(mapped, all);
        }
    }

    #[test]
    fn rectangular_is_filtered_square() {
        for (p, q) in [(2, 1), (1, 2), (3, 2), (1, 3), (5, 3)] {
            let rect = Domain::rectangular(9, p, q).unwrap();
            let filtered: Vec<Triad> = enumerate_bruteforce(&sq(9))
                .unwrap()
                .into_iter()
                .filter(|t| crate::lattice::satisfies_rectangular(t, p.into(), q.into()).unwrap())
                .collect();
            assert_eq!(enumerate_bruteforce(&rect).unwrap(), filtered, "{p},{q}");
            assert_eq!(generate_families(&rect), filtered, "{p},{q}");
        }
    }

    #[test]
    fn participation_covers_every_vector_inside() {
        let d = sq(4);
        let triads = enumerate_bruteforce(&d).unwrap();
        let counts = participation(&d, &triads);
        assert_eq!(counts.len(), 80);
        assert!(counts.values().all(|&n| n > 0));
    }
}
