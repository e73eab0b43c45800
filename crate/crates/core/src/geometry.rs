//! Coupling-point layouts and the phase matrices derived from them.

use crate::error::{domain, Result};

/// How a layout was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    Separate,
    Braided,
    Custom,
}

impl Topology {
    pub fn as_str(self) -> &'static str {
        match self {
            Topology::Separate => "separate",
            Topology::Braided => "braided",
            Topology::Custom => "custom",
        }
    }
}

/// Positions `x[n][m]` of the `M` coupling points of each of `N` emitters.
///
/// Invariants: every emitter has the same number of legs, positions increase
/// strictly within an emitter, and no two coupling points coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingLayout {
    positions: Vec<Vec<f64>>,
    min_spacing: f64,
    topology: Topology,
}

impl CouplingLayout {
    /// Emitters with disjoint coupling intervals, all adjacent points `d` apart.
    ///
    /// `x[n][m] = (n M + m) d` (zero-based), optionally shifted so the array
    /// midpoint sits at the origin.
    pub fn build_separate(n_atoms: usize, n_legs: usize, d: f64, centered: bool) -> Result<Self> {
        if n_atoms == 0 || n_legs == 0 {
            return domain(format!("separate layout needs N >= 1 and M >= 1, got N = {n_atoms}, M = {n_legs}"));
        }
        if !(d.is_finite() && d > 0.0) {
            return domain(format!("spacing must be positive, got {d}"));
        }
        let total = n_atoms * n_legs;
        let shift = if centered { 0.5 * (total - 1) as f64 * d } else { 0.0 };
        let positions = (0..n_atoms)
            .map(|n| (0..n_legs).map(|m| (n * n_legs + m) as f64 * d - shift).collect())
            .collect();
        Ok(Self { positions, min_spacing: d, topology: Topology::Separate })
    }

    /// Two-legged emitters interleaved pairwise: `x[n] = (2 n d, 2 n d + 3 d)`.
    ///
    /// Each emitter spans `3d`, neighbours are braided
    /// (`x[n][0] < x[n+1][0] < x[n][1] < x[n+1][1]`) and the smallest gap in
    /// the chain is `d`.
    pub fn build_braided(n_atoms: usize, d: f64, centered: bool) -> Result<Self> {
        if n_atoms < 2 {
            return domain(format!("braided layout needs at least two emitters, got {n_atoms}"));
        }
        if !(d.is_finite() && d > 0.0) {
            return domain(format!("spacing must be positive, got {d}"));
        }
        let span = (2 * (n_atoms - 1) + 3) as f64 * d;
        let shift = if centered { 0.5 * span } else { 0.0 };
        let positions = (0..n_atoms)
            .map(|n| {
                let x0 = 2.0 * n as f64 * d - shift;
                vec![x0, x0 + 3.0 * d]
            })
            .collect();
        Ok(Self { positions, min_spacing: d, topology: Topology::Braided })
    }

    /// A layout from explicit positions, validated against the invariants.
    pub fn from_positions(positions: Vec<Vec<f64>>) -> Result<Self> {
        let n_legs = match positions.first() {
            Some(p) if !p.is_empty() => p.len(),
            _ => return domain("layout needs at least one emitter with at least one leg"),
        };
        for (n, legs) in positions.iter().enumerate() {
            if legs.len() != n_legs {
                return domain(format!("emitter {} has {} legs, expected {n_legs}", n + 1, legs.len()));
            }
            if legs.iter().any(|x| !x.is_finite()) {
                return domain(format!("emitter {} has a non-finite position", n + 1));
            }
            if legs.windows(2).any(|w| w[0] >= w[1]) {
                return domain(format!("positions of emitter {} must increase strictly", n + 1));
            }
        }
        let mut all: Vec<f64> = positions.iter().flatten().copied().collect();
        all.sort_by(f64::total_cmp);
        let min_spacing = all.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        if min_spacing <= 0.0 {
            return domain("two coupling points coincide");
        }
        let min_spacing = if min_spacing.is_finite() { min_spacing } else { 1.0 };
        Ok(Self { positions, min_spacing, topology: Topology::Custom })
    }

    pub fn n_atoms(&self) -> usize {
        self.positions.len()
    }

    pub fn n_legs(&self) -> usize {
        self.positions[0].len()
    }

    pub fn positions(&self) -> &[Vec<f64>] {
        &self.positions
    }

    pub fn position(&self, atom: usize, leg: usize) -> f64 {
        self.positions[atom][leg]
    }

    /// Smallest gap between any two coupling points.
    pub fn min_spacing(&self) -> f64 {
        self.min_spacing
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    /// Gap between consecutive legs of the first emitter, if the legs are
    /// uniformly spaced in every emitter.
    pub fn within_atom_spacing(&self) -> Option<f64> {
        if self.n_legs() < 2 {
            return None;
        }
        let gap = self.positions[0][1] - self.positions[0][0];
        let tol = 1e-12 * gap.abs().max(self.min_spacing);
        let uniform = self
            .positions
            .iter()
            .all(|legs| legs.windows(2).all(|w| ((w[1] - w[0]) - gap).abs() <= tol));
        uniform.then_some(gap)
    }

    /// Leftmost and rightmost coupling point of the whole array.
    pub fn extent(&self) -> (f64, f64) {
        let all = self.positions.iter().flatten();
        let lo = all.clone().copied().fold(f64::INFINITY, f64::min);
        let hi = all.copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// The same layout translated by `offset`.
    pub fn shifted(&self, offset: f64) -> Self {
        let positions = self.positions.iter().map(|l| l.iter().map(|x| x + offset).collect()).collect();
        Self { positions, min_spacing: self.min_spacing, topology: self.topology }
    }

    /// Whether `x[n][m] = −x[N−1−n][M−1−m]` for every point, to `tol`.
    pub fn is_mirror_symmetric(&self, tol: f64) -> bool {
        let (n, m) = (self.n_atoms(), self.n_legs());
        (0..n).all(|a| (0..m).all(|l| (self.positions[a][l] + self.positions[n - 1 - a][m - 1 - l]).abs() <= tol))
    }

    /// Braiding predicate for consecutive emitters `n`, `n + 1`.
    pub fn is_braided_pair(&self, n: usize) -> bool {
        let (a, b) = (&self.positions[n], &self.positions[n + 1]);
        a.len() >= 2 && b.len() >= 2 && a[0] < b[0] && b[0] < a[a.len() - 1] && a[a.len() - 1] < b[b.len() - 1]
    }
}

/// Field phases `φ = k0 |x[n][m] − x[n'][m']|` for every pair of points.
#[derive(Debug, Clone)]
pub struct PhaseMatrix {
    n_atoms: usize,
    n_legs: usize,
    entries: Vec<f64>,
    classes: Vec<usize>,
    distinct: Vec<f64>,
}

impl PhaseMatrix {
    /// Phases of `layout` at resonant wavenumber `k0 > 0`.
    ///
    /// Entries equal up to `1e-12 k0 d` share a class in the deduplicated list.
    pub fn new(layout: &CouplingLayout, k0: f64) -> Result<Self> {
        if !(k0.is_finite() && k0 > 0.0) {
            return domain(format!("k0 must be positive, got {k0}"));
        }
        let (n_atoms, n_legs) = (layout.n_atoms(), layout.n_legs());
        let points: Vec<f64> = layout.positions().iter().flatten().copied().collect();
        let np = points.len();
        let mut entries = vec![0.0; np * np];
        for i in 0..np {
            for j in 0..np {
                entries[i * np + j] = if i == j { 0.0 } else { k0 * (points[i] - points[j]).abs() };
            }
        }
        let tol = 1e-12 * k0 * layout.min_spacing();
        let mut sorted = entries.clone();
        sorted.sort_by(f64::total_cmp);
        let mut distinct: Vec<f64> = Vec::new();
        for v in sorted {
            match distinct.last() {
                Some(&last) if v - last <= tol => {}
                _ => distinct.push(v),
            }
        }
        let classes = entries
            .iter()
            .map(|&v| {
                let idx = distinct.partition_point(|&d| d < v - tol);
                idx.min(distinct.len() - 1)
            })
            .collect();
        Ok(Self { n_atoms, n_legs, entries, classes, distinct })
    }

    fn flat(&self, atom: usize, leg: usize) -> usize {
        atom * self.n_legs + leg
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn n_legs(&self) -> usize {
        self.n_legs
    }

    /// `φ^{n n'}_{m m'}`.
    pub fn get(&self, n: usize, m: usize, n2: usize, m2: usize) -> f64 {
        let np = self.n_atoms * self.n_legs;
        self.entries[self.flat(n, m) * np + self.flat(n2, m2)]
    }

    /// Index into [`distinct_values`](Self::distinct_values) of an entry.
    pub fn class(&self, n: usize, m: usize, n2: usize, m2: usize) -> usize {
        let np = self.n_atoms * self.n_legs;
        self.classes[self.flat(n, m) * np + self.flat(n2, m2)]
    }

    /// Sorted deduplicated phases.
    pub fn distinct_values(&self) -> &[f64] {
        &self.distinct
    }

    /// For the emitter pair `(n, n2)`: how many leg pairs fall in each class.
    pub fn pair_class_counts(&self, n: usize, n2: usize) -> Vec<(usize, usize)> {
        let mut counts: Vec<(usize, usize)> = Vec::new();
        for m in 0..self.n_legs {
            for m2 in 0..self.n_legs {
                let c = self.class(n, m, n2, m2);
                match counts.iter_mut().find(|(k, _)| *k == c) {
                    Some(entry) => entry.1 += 1,
                    None => counts.push((c, 1)),
                }
            }
        }
        counts.sort_unstable();
        counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn separate_centered_two_by_two() {
        let l = CouplingLayout::build_separate(2, 2, 1.0, true).unwrap();
        assert_eq!(l.positions(), &[vec![-1.5, -0.5], vec![0.5, 1.5]]);
        assert!(l.is_mirror_symmetric(0.0));
    }

    #[test]
    fn small_atom_and_uncentered_chain() {
        let l = CouplingLayout::build_separate(1, 1, 0.3, false).unwrap();
        assert_eq!(l.positions(), &[vec![0.0]]);
        let l = CouplingLayout::build_separate(3, 2, 1.0, false).unwrap();
        assert_eq!(l.positions(), &[vec![0.0, 1.0], vec![2.0, 3.0], vec![4.0, 5.0]]);
    }

    #[test]
    fn separate_rejects_bad_input() {
        assert!(CouplingLayout::build_separate(0, 2, 1.0, false).is_err());
        assert!(CouplingLayout::build_separate(2, 0, 1.0, false).is_err());
        assert!(CouplingLayout::build_separate(2, 2, 0.0, false).is_err());
        assert!(CouplingLayout::build_separate(2, 2, -1.0, false).is_err());
    }

    #[test]
    fn braided_pair() {
        let d = 0.7;
        let l = CouplingLayout::build_braided(2, d, false).unwrap();
        let expected = [[0.0, 3.0 * d], [2.0 * d, 5.0 * d]];
        for (got, want) in l.positions().iter().zip(expected) {
            assert!(got.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-15));
        }
        assert!(l.is_braided_pair(0));
        for legs in l.positions() {
            assert!((legs[1] - legs[0] - 3.0 * d).abs() < 1e-15);
        }
        assert!((l.min_spacing() - d).abs() < 1e-15);
        assert!(CouplingLayout::build_braided(1, d, false).is_err());
    }

    #[test]
    fn braided_chain_gaps() {
        let l = CouplingLayout::build_braided(10, 1.0, false).unwrap();
        let mut all: Vec<f64> = l.positions().iter().flatten().copied().collect();
        all.sort_by(f64::total_cmp);
        let min_gap = all.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        assert!((min_gap - 1.0).abs() < 1e-12);
        for n in 0..9 {
            assert!(l.is_braided_pair(n));
        }
        assert_eq!(l.within_atom_spacing(), Some(3.0));
    }

    #[test]
    fn custom_validation() {
        assert!(CouplingLayout::from_positions(vec![vec![0.0, 1.0], vec![2.0, 3.0]]).is_ok());
        assert!(CouplingLayout::from_positions(vec![vec![1.0, 0.0]]).is_err());
        assert!(CouplingLayout::from_positions(vec![vec![0.0, 1.0], vec![1.0, 3.0]]).is_err());
        assert!(CouplingLayout::from_positions(vec![vec![0.0, 1.0], vec![2.0]]).is_err());
        assert!(CouplingLayout::from_positions(vec![]).is_err());
        let l = CouplingLayout::from_positions(vec![vec![0.0, 0.4], vec![1.0, 3.0]]).unwrap();
        assert!((l.min_spacing() - 0.4).abs() < 1e-15);
        assert_eq!(l.topology(), Topology::Custom);
    }

    #[test]
    fn phase_entries() {
        let d = 1.0;
        let k0 = 0.1 * PI;
        let l = CouplingLayout::build_separate(2, 2, d, true).unwrap();
        let p = PhaseMatrix::new(&l, k0).unwrap();
        assert_eq!(p.get(1, 0, 1, 0), 0.0);
        assert!((p.get(0, 0, 1, 1) - 0.3 * PI).abs() < 1e-14);
        assert_eq!(p.get(0, 0, 1, 1), p.get(1, 1, 0, 0));
        assert_eq!(p.distinct_values().len(), 4);
        assert_eq!(p.pair_class_counts(0, 0), vec![(0, 2), (1, 2)]);
        assert_eq!(p.pair_class_counts(0, 1), vec![(1, 1), (2, 2), (3, 1)]);
        assert!(PhaseMatrix::new(&l, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn phases_translation_invariant(n in 1usize..5, m in 1usize..4, d in 0.05f64..3.0, shift in -50.0f64..50.0) {
            let l = CouplingLayout::build_separate(n, m, d, false).unwrap();
            let a = PhaseMatrix::new(&l, 1.0).unwrap();
            let b = PhaseMatrix::new(&l.shifted(shift), 1.0).unwrap();
            for i in 0..n { for j in 0..m { for i2 in 0..n { for j2 in 0..m {
                prop_assert!((a.get(i, j, i2, j2) - b.get(i, j, i2, j2)).abs() <= 1e-12 * (1.0 + shift.abs()));
                prop_assert_eq!(a.get(i, j, i2, j2), a.get(i2, j2, i, j));
            }}}}
        }

        #[test]
        fn separate_two_leg_gaps(n in 1usize..12, d in 0.01f64..5.0) {
            let l = CouplingLayout::build_separate(n, 2, d, true).unwrap();
            for legs in l.positions() {
                prop_assert!(((legs[1] - legs[0]) - d).abs() <= 1e-12 * d * n as f64);
            }
        }
    }
}
