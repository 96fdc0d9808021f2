//! Doubled-coordinate geometry for the 3D cluster lattice.
//!
//! Sites live on the integer grid. Cell corners sit at all-even coordinates
//! and cell body centers at all-odd coordinates; neither carries a qubit.
//! A site with exactly one odd coordinate is an edge qubit (the odd axis is
//! the edge direction), a site with exactly two odd coordinates is a face
//! qubit (the even axis is the face normal). Every grid point falls in
//! exactly one of the four classes, so classification is total.
//!
//! Emission rate is a property of the vertical line (x, y): lines whose x
//! and y have equal parity carry a photon every second step (half rate),
//! lines with opposite parity every step (full rate). The stabilizer
//! generator of a qubit q is X on q and Z on its lattice neighbors; its
//! invariant axis (the coordinate axis missing from the Z support) names
//! the check plane the preparation hardware measures it in.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use thiserror::Error;

/// Coordinate axis of the doubled grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// Photon emission rate of a vertical line of sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RateClass {
    /// One photon every second time step; initialised to |+>.
    Half,
    /// One photon every time step; initialised to |0>.
    Full,
}

/// Emission rate of the line through (x, y), independent of z.
pub fn line_rate(x: i64, y: i64) -> RateClass {
    if (x + y).rem_euclid(2) == 0 {
        RateClass::Half
    } else {
        RateClass::Full
    }
}

/// Plane of the five-photon parity check that measures a qubit's generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CheckPlane {
    /// Invariant axis z: the check couples only same-z sites. These
    /// generators are products of initialisation stabilizers and are never
    /// measured by the network.
    XY,
    /// Invariant axis x.
    YZ,
    /// Invariant axis y.
    XZ,
}

impl CheckPlane {
    pub fn from_invariant_axis(axis: Axis) -> CheckPlane {
        match axis {
            Axis::X => CheckPlane::YZ,
            Axis::Y => CheckPlane::XZ,
            Axis::Z => CheckPlane::XY,
        }
    }
}

/// Total classification of a grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SiteKind {
    /// Two odd coordinates; `normal` is the even axis.
    Face { normal: Axis, rate: RateClass },
    /// One odd coordinate; `direction` is the odd axis.
    Edge { direction: Axis, rate: RateClass },
    /// All coordinates even: a corner of the primal cell complex.
    PrimalVertex,
    /// All coordinates odd: a body center, i.e. a corner of the dual complex.
    DualVertex,
}

impl SiteKind {
    pub fn is_qubit(self) -> bool {
        matches!(self, SiteKind::Face { .. } | SiteKind::Edge { .. })
    }

    /// Axis along which the site's generator has no Z support.
    pub fn invariant_axis(self) -> Option<Axis> {
        match self {
            SiteKind::Face { normal, .. } => Some(normal),
            SiteKind::Edge { direction, .. } => Some(direction),
            _ => None,
        }
    }

    pub fn rate(self) -> Option<RateClass> {
        match self {
            SiteKind::Face { rate, .. } | SiteKind::Edge { rate, .. } => Some(rate),
            _ => None,
        }
    }
}

/// A point of the doubled grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeSite {
    pub x: i64,
    pub y: i64,
    pub z: i64,
}

impl LatticeSite {
    pub fn new(x: i64, y: i64, z: i64) -> LatticeSite {
        LatticeSite { x, y, z }
    }

    pub fn coords(self) -> [i64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn coord(self, axis: Axis) -> i64 {
        self.coords()[axis.index()]
    }

    pub fn offset(self, axis: Axis, delta: i64) -> LatticeSite {
        let mut c = self.coords();
        c[axis.index()] += delta;
        LatticeSite::new(c[0], c[1], c[2])
    }
}

/// Classify a grid point by coordinate parity. Total: every point gets a kind.
pub fn classify_site(site: LatticeSite) -> SiteKind {
    let odd: Vec<Axis> = Axis::ALL
        .into_iter()
        .filter(|a| site.coord(*a).rem_euclid(2) == 1)
        .collect();
    let rate = line_rate(site.x, site.y);
    match odd.len() {
        0 => SiteKind::PrimalVertex,
        3 => SiteKind::DualVertex,
        1 => SiteKind::Edge {
            direction: odd[0],
            rate,
        },
        2 => {
            let normal = Axis::ALL
                .into_iter()
                .find(|a| site.coord(*a).rem_euclid(2) == 0)
                .expect("one even axis");
            SiteKind::Face { normal, rate }
        }
        _ => unreachable!(),
    }
}

/// Primal or dual flavor of a cell / error chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CellParity {
    /// Cube of the primal complex: center at all-odd doubled coordinates.
    Primal,
    /// Cube of the dual complex: center at all-even doubled coordinates.
    Dual,
}

/// A unit cell, addressed in cell coordinates (not doubled coordinates).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub parity: CellParity,
    pub cx: i64,
    pub cy: i64,
    pub cz: i64,
}

impl Cell {
    pub fn primal(cx: i64, cy: i64, cz: i64) -> Cell {
        Cell {
            parity: CellParity::Primal,
            cx,
            cy,
            cz,
        }
    }

    pub fn dual(cx: i64, cy: i64, cz: i64) -> Cell {
        Cell {
            parity: CellParity::Dual,
            cx,
            cy,
            cz,
        }
    }

    /// Center of the cell in doubled coordinates.
    pub fn center(self) -> LatticeSite {
        match self.parity {
            CellParity::Primal => LatticeSite::new(2 * self.cx + 1, 2 * self.cy + 1, 2 * self.cz + 1),
            CellParity::Dual => LatticeSite::new(2 * self.cx, 2 * self.cy, 2 * self.cz),
        }
    }
}

/// Boundary handling along one axis of a region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryPolicy {
    /// Sites outside the bounds simply do not exist; generators truncate.
    Open,
    /// The axis wraps; the doubled extent must be even so parities glue.
    Periodic,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("site ({0}, {1}, {2}) is not a qubit")]
    NotAQubit(i64, i64, i64),
    #[error("site ({0}, {1}, {2}) is outside the region")]
    OutOfRegion(i64, i64, i64),
    #[error("cell center ({0}, {1}, {2}) is outside the region")]
    CellOutOfRegion(i64, i64, i64),
    #[error("region is empty along axis {0:?}")]
    EmptyRegion(Axis),
    #[error("periodic axis {0:?} needs an even doubled extent, got {1}")]
    OddPeriodicExtent(Axis, i64),
}

/// An axis-aligned box of the doubled grid with per-axis boundary policy.
/// Bounds are inclusive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub min: [i64; 3],
    pub max: [i64; 3],
    pub boundary: [BoundaryPolicy; 3],
}

impl Region {
    pub fn new(
        min: [i64; 3],
        max: [i64; 3],
        boundary: [BoundaryPolicy; 3],
    ) -> Result<Region, LatticeError> {
        for (i, axis) in Axis::ALL.into_iter().enumerate() {
            if max[i] < min[i] {
                return Err(LatticeError::EmptyRegion(axis));
            }
            let extent = max[i] - min[i] + 1;
            if boundary[i] == BoundaryPolicy::Periodic && extent % 2 != 0 {
                return Err(LatticeError::OddPeriodicExtent(axis, extent));
            }
        }
        Ok(Region { min, max, boundary })
    }

    /// Open box [0, 2nx] x [0, 2ny] x [0, 2nz] in doubled coordinates.
    pub fn open_box(nx: i64, ny: i64, nz: i64) -> Result<Region, LatticeError> {
        Region::new(
            [0, 0, 0],
            [2 * nx, 2 * ny, 2 * nz],
            [BoundaryPolicy::Open; 3],
        )
    }

    pub fn extent(&self, axis: Axis) -> i64 {
        self.max[axis.index()] - self.min[axis.index()] + 1
    }

    /// Map a possibly out-of-bounds point into the region, wrapping periodic
    /// axes. Returns None if an open axis is crossed.
    pub fn canonicalize(&self, site: LatticeSite) -> Option<LatticeSite> {
        let mut c = site.coords();
        for (i, _) in Axis::ALL.into_iter().enumerate() {
            match self.boundary[i] {
                BoundaryPolicy::Open => {
                    if c[i] < self.min[i] || c[i] > self.max[i] {
                        return None;
                    }
                }
                BoundaryPolicy::Periodic => {
                    let extent = self.max[i] - self.min[i] + 1;
                    c[i] = (c[i] - self.min[i]).rem_euclid(extent) + self.min[i];
                }
            }
        }
        Some(LatticeSite::new(c[0], c[1], c[2]))
    }

    pub fn contains(&self, site: LatticeSite) -> bool {
        let c = site.coords();
        (0..3).all(|i| c[i] >= self.min[i] && c[i] <= self.max[i])
    }

    /// All qubit sites in lexicographic (x, y, z) order.
    pub fn qubit_sites(&self) -> Vec<LatticeSite> {
        let mut out = Vec::new();
        for x in self.min[0]..=self.max[0] {
            for y in self.min[1]..=self.max[1] {
                for z in self.min[2]..=self.max[2] {
                    let s = LatticeSite::new(x, y, z);
                    if classify_site(s).is_qubit() {
                        out.push(s);
                    }
                }
            }
        }
        out
    }

    /// Bijective site -> dense index map over the qubits of the region.
    pub fn site_index(&self) -> SiteIndex {
        let sites = self.qubit_sites();
        let lookup = sites
            .iter()
            .enumerate()
            .map(|(i, s)| (*s, i))
            .collect::<HashMap<_, _>>();
        SiteIndex { sites, lookup }
    }
}

/// Dense indexing of the qubits of a region, in lexicographic site order.
#[derive(Debug, Clone)]
pub struct SiteIndex {
    sites: Vec<LatticeSite>,
    lookup: HashMap<LatticeSite, usize>,
}

impl SiteIndex {
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn site(&self, index: usize) -> LatticeSite {
        self.sites[index]
    }

    pub fn index_of(&self, site: LatticeSite) -> Option<usize> {
        self.lookup.get(&site).copied()
    }

    pub fn sites(&self) -> &[LatticeSite] {
        &self.sites
    }
}

/// In-region lattice neighbors of a qubit: the unit steps along each axis
/// that land on qubit sites, wrapped across periodic boundaries. Interior
/// qubits always have exactly four (the two steps along the site's invariant
/// axis land on vertices).
pub fn neighbors(site: LatticeSite, region: &Region) -> Result<Vec<LatticeSite>, LatticeError> {
    if !region.contains(site) {
        return Err(LatticeError::OutOfRegion(site.x, site.y, site.z));
    }
    if !classify_site(site).is_qubit() {
        return Err(LatticeError::NotAQubit(site.x, site.y, site.z));
    }
    let mut out = BTreeSet::new();
    for axis in Axis::ALL {
        for delta in [-1, 1] {
            let raw = site.offset(axis, delta);
            if let Some(mapped) = region.canonicalize(raw) {
                if classify_site(mapped).is_qubit() {
                    out.insert(mapped);
                }
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// Sign of a Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn combine(self, other: Sign) -> Sign {
        if self == other {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

/// A Hermitian Pauli operator over dense qubit indices, stored as X and Z
/// support sets with an overall sign. A qubit in both supports carries Y
/// (up to the XZ phase convention, which cancels in all products used here).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliOperator {
    pub sign: Sign,
    pub x_support: BTreeSet<usize>,
    pub z_support: BTreeSet<usize>,
}

impl PauliOperator {
    pub fn identity() -> PauliOperator {
        PauliOperator {
            sign: Sign::Plus,
            x_support: BTreeSet::new(),
            z_support: BTreeSet::new(),
        }
    }

    pub fn single_x(index: usize) -> PauliOperator {
        let mut op = PauliOperator::identity();
        op.x_support.insert(index);
        op
    }

    pub fn single_z(index: usize) -> PauliOperator {
        let mut op = PauliOperator::identity();
        op.z_support.insert(index);
        op
    }

    pub fn weight(&self) -> usize {
        self.x_support.union(&self.z_support).count()
    }

    pub fn is_identity(&self) -> bool {
        self.x_support.is_empty() && self.z_support.is_empty()
    }

    pub fn commutes_with(&self, other: &PauliOperator) -> bool {
        let cross =
            self.x_support.intersection(&other.z_support).count()
                + self.z_support.intersection(&other.x_support).count();
        cross % 2 == 0
    }

    /// Product self * other in the X-then-Z normal form: each factor is
    /// written as sign * X(xs) * Z(zs); commuting the left factor's Z block
    /// past the right factor's X block contributes (-1) per crossing.
    pub fn multiply(&self, other: &PauliOperator) -> PauliOperator {
        let crossings = self.z_support.intersection(&other.x_support).count();
        let mut sign = self.sign.combine(other.sign);
        if crossings % 2 == 1 {
            sign = sign.flip();
        }
        let x_support = self
            .x_support
            .symmetric_difference(&other.x_support)
            .copied()
            .collect();
        let z_support = self
            .z_support
            .symmetric_difference(&other.z_support)
            .copied()
            .collect();
        PauliOperator {
            sign,
            x_support,
            z_support,
        }
    }
}

/// The stabilizer generator of a qubit: X on the site, Z on each in-region
/// neighbor, indexed through `index`. At open boundaries the Z support
/// truncates to the neighbors that exist.
pub fn stabilizer_generator(
    site: LatticeSite,
    region: &Region,
    index: &SiteIndex,
) -> Result<PauliOperator, LatticeError> {
    let own = index
        .index_of(site)
        .ok_or(LatticeError::OutOfRegion(site.x, site.y, site.z))?;
    let mut op = PauliOperator::single_x(own);
    for n in neighbors(site, region)? {
        let ni = index
            .index_of(n)
            .ok_or(LatticeError::OutOfRegion(n.x, n.y, n.z))?;
        op.z_support.insert(ni);
    }
    Ok(op)
}

/// The six face sites of a cell that lie inside the region (after periodic
/// wrapping). Primal cell faces are the face qubits at center +/- e_a; dual
/// cell faces are the edge qubits at center +/- e_a.
pub fn cell_faces(cell: Cell, region: &Region) -> Result<Vec<LatticeSite>, LatticeError> {
    let center = cell.center();
    if region.canonicalize(center).is_none() {
        return Err(LatticeError::CellOutOfRegion(center.x, center.y, center.z));
    }
    let mut out = Vec::new();
    for axis in Axis::ALL {
        for delta in [-1, 1] {
            if let Some(site) = region.canonicalize(center.offset(axis, delta)) {
                debug_assert!(classify_site(site).is_qubit());
                out.push(site);
            }
        }
    }
    Ok(out)
}

/// One generator per qubit of the region, in site index order.
pub fn target_stabilizer_group(region: &Region) -> Result<Vec<PauliOperator>, LatticeError> {
    let index = region.site_index();
    let mut out = Vec::with_capacity(index.len());
    for site in index.sites() {
        out.push(stabilizer_generator(*site, region, &index)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn open_region(nx: i64, ny: i64, nz: i64) -> Region {
        Region::open_box(nx, ny, nz).unwrap()
    }

    #[test]
    fn classification_examples() {
        assert_eq!(
            classify_site(LatticeSite::new(1, 1, 0)),
            SiteKind::Face {
                normal: Axis::Z,
                rate: RateClass::Half
            }
        );
        assert_eq!(
            classify_site(LatticeSite::new(0, 0, 1)),
            SiteKind::Edge {
                direction: Axis::Z,
                rate: RateClass::Half
            }
        );
        assert_eq!(
            classify_site(LatticeSite::new(2, 1, 1)),
            SiteKind::Face {
                normal: Axis::X,
                rate: RateClass::Full
            }
        );
        assert_eq!(classify_site(LatticeSite::new(0, 0, 0)), SiteKind::PrimalVertex);
        assert_eq!(classify_site(LatticeSite::new(1, 1, 1)), SiteKind::DualVertex);
    }

    #[test]
    fn classification_is_total_and_consistent() {
        for x in -2..=3 {
            for y in -2..=3 {
                for z in -2..=3 {
                    let site = LatticeSite::new(x, y, z);
                    let kind = classify_site(site);
                    let odd = [x, y, z].iter().filter(|c| c.rem_euclid(2) == 1).count();
                    match kind {
                        SiteKind::PrimalVertex => assert_eq!(odd, 0),
                        SiteKind::DualVertex => assert_eq!(odd, 3),
                        SiteKind::Edge { direction, .. } => {
                            assert_eq!(odd, 1);
                            assert_eq!(site.coord(direction).rem_euclid(2), 1);
                        }
                        SiteKind::Face { normal, .. } => {
                            assert_eq!(odd, 2);
                            assert_eq!(site.coord(normal).rem_euclid(2), 0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn interior_neighbors_example() {
        let region = open_region(2, 2, 2);
        let n = neighbors(LatticeSite::new(1, 1, 2), &region).unwrap();
        assert_eq!(
            n,
            vec![
                LatticeSite::new(0, 1, 2),
                LatticeSite::new(1, 0, 2),
                LatticeSite::new(1, 2, 2),
                LatticeSite::new(2, 1, 2),
            ]
        );
    }

    #[test]
    fn neighbors_reject_non_qubits() {
        let region = open_region(2, 2, 2);
        assert_eq!(
            neighbors(LatticeSite::new(0, 0, 0), &region),
            Err(LatticeError::NotAQubit(0, 0, 0))
        );
        assert_eq!(
            neighbors(LatticeSite::new(1, 1, 99), &region),
            Err(LatticeError::OutOfRegion(1, 1, 99))
        );
    }

    #[test]
    fn qubit_census_acceptance_region() {
        // [0,4]^2 x [0,8]: 96 edges + 68 faces = 164 qubits, of which the
        // 12 full-rate lines contribute 9 sites each.
        let region = open_region(2, 2, 4);
        let sites = region.qubit_sites();
        assert_eq!(sites.len(), 164);
        let edges = sites
            .iter()
            .filter(|s| matches!(classify_site(**s), SiteKind::Edge { .. }))
            .count();
        let faces = sites.len() - edges;
        assert_eq!((edges, faces), (96, 68));
        let full = sites
            .iter()
            .filter(|s| line_rate(s.x, s.y) == RateClass::Full)
            .count();
        assert_eq!(full, 12 * 9);
        assert_eq!(sites.len() - full, 56);
    }

    #[test]
    fn site_index_is_bijective_and_ordered() {
        let region = open_region(2, 2, 1);
        let index = region.site_index();
        for (i, s) in index.sites().iter().enumerate() {
            assert_eq!(index.index_of(*s), Some(i));
        }
        let mut sorted = index.sites().to_vec();
        sorted.sort();
        assert_eq!(sorted, index.sites());
    }

    #[test]
    fn generator_shape_interior_and_boundary() {
        let region = open_region(2, 2, 4);
        let index = region.site_index();
        let interior = stabilizer_generator(LatticeSite::new(1, 1, 2), &region, &index).unwrap();
        assert_eq!(interior.x_support.len(), 1);
        assert_eq!(interior.z_support.len(), 4);
        assert_eq!(interior.sign, Sign::Plus);
        // Corner-adjacent edge qubit: one neighbor truncated away.
        let boundary = stabilizer_generator(LatticeSite::new(0, 0, 1), &region, &index).unwrap();
        assert_eq!(boundary.z_support.len(), 2);
    }

    #[test]
    fn target_group_commutes_and_has_full_rank() {
        let region = open_region(2, 2, 2);
        let group = target_stabilizer_group(&region).unwrap();
        assert_eq!(group.len(), 90);
        for i in 0..group.len() {
            for j in (i + 1)..group.len() {
                assert!(group[i].commutes_with(&group[j]), "{} vs {}", i, j);
            }
        }
        // Full rank: each generator has X on a distinct qubit, so the X
        // parts alone are linearly independent.
        let mut x_supports = BTreeSet::new();
        for g in &group {
            assert_eq!(g.x_support.len(), 1);
            x_supports.insert(*g.x_support.iter().next().unwrap());
        }
        assert_eq!(x_supports.len(), group.len());
    }

    #[test]
    fn cell_face_product_is_pure_x() {
        // The Z legs of the six face generators of a cell cancel pairwise:
        // every edge of the cell borders exactly two of its faces.
        let region = open_region(2, 2, 2);
        let index = region.site_index();
        let cell = Cell::primal(0, 0, 0);
        let faces = cell_faces(cell, &region).unwrap();
        assert_eq!(faces.len(), 6);
        let mut product = PauliOperator::identity();
        for f in &faces {
            let g = stabilizer_generator(*f, &region, &index).unwrap();
            product = product.multiply(&g);
        }
        assert_eq!(product.sign, Sign::Plus);
        assert!(product.z_support.is_empty());
        let expect: BTreeSet<usize> = faces.iter().map(|f| index.index_of(*f).unwrap()).collect();
        assert_eq!(product.x_support, expect);
    }

    #[test]
    fn dual_cell_face_product_is_pure_x() {
        let region = Region::new(
            [0, 0, 0],
            [5, 5, 5],
            [BoundaryPolicy::Periodic; 3],
        )
        .unwrap();
        let index = region.site_index();
        let cell = Cell::dual(1, 1, 1);
        let faces = cell_faces(cell, &region).unwrap();
        assert_eq!(faces.len(), 6);
        let mut product = PauliOperator::identity();
        for f in &faces {
            let g = stabilizer_generator(*f, &region, &index).unwrap();
            product = product.multiply(&g);
        }
        assert_eq!(product.sign, Sign::Plus);
        assert!(product.z_support.is_empty());
        assert_eq!(product.x_support.len(), 6);
    }

    #[test]
    fn duality_shift_swaps_kinds() {
        // Adding +1 to every coordinate exchanges edge and face qubits while
        // preserving the invariant axis and the rate class.
        for x in 0..4 {
            for y in 0..4 {
                for z in 0..4 {
                    let s = LatticeSite::new(x, y, z);
                    let t = LatticeSite::new(x + 1, y + 1, z + 1);
                    match (classify_site(s), classify_site(t)) {
                        (SiteKind::Edge { direction, rate }, SiteKind::Face { normal, rate: r2 }) => {
                            assert_eq!(direction, normal);
                            assert_eq!(rate, r2);
                        }
                        (SiteKind::Face { normal, rate }, SiteKind::Edge { direction, rate: r2 }) => {
                            assert_eq!(normal, direction);
                            assert_eq!(rate, r2);
                        }
                        (SiteKind::PrimalVertex, SiteKind::DualVertex) => {}
                        (SiteKind::DualVertex, SiteKind::PrimalVertex) => {}
                        (a, b) => panic!("unexpected pair {:?} -> {:?}", a, b),
                    }
                }
            }
        }
    }

    #[test]
    fn periodic_region_wraps_neighbors() {
        let region = Region::new(
            [0, 0, 0],
            [3, 3, 3],
            [BoundaryPolicy::Periodic; 3],
        )
        .unwrap();
        let n = neighbors(LatticeSite::new(0, 0, 1), &region).unwrap();
        // z edge at the corner: x and y steps wrap to 3.
        assert!(n.contains(&LatticeSite::new(3, 0, 1)));
        assert!(n.contains(&LatticeSite::new(1, 0, 1)));
        assert!(n.contains(&LatticeSite::new(0, 3, 1)));
        assert!(n.contains(&LatticeSite::new(0, 1, 1)));
        assert_eq!(n.len(), 4);
    }

    #[test]
    fn periodic_extent_must_be_even() {
        let err = Region::new([0, 0, 0], [2, 3, 3], [BoundaryPolicy::Periodic; 3]);
        assert_eq!(err, Err(LatticeError::OddPeriodicExtent(Axis::X, 3)));
    }

    #[test]
    fn region_validation() {
        assert_eq!(
            Region::new([0, 0, 0], [-1, 2, 2], [BoundaryPolicy::Open; 3]),
            Err(LatticeError::EmptyRegion(Axis::X))
        );
    }

    #[test]
    fn region_serde_round_trip() {
        let region = open_region(2, 2, 4);
        let text = serde_json::to_string(&region).unwrap();
        let back: Region = serde_json::from_str(&text).unwrap();
        assert_eq!(region, back);
    }

    proptest! {
        #[test]
        fn interior_qubits_have_four_neighbors(x in 1i64..8, y in 1i64..8, z in 1i64..8) {
            let region = open_region(5, 5, 5);
            let site = LatticeSite::new(x, y, z);
            if classify_site(site).is_qubit() {
                let n = neighbors(site, &region).unwrap();
                prop_assert_eq!(n.len(), 4);
                // Neighbors never lie along the invariant axis.
                let axis = classify_site(site).invariant_axis().unwrap();
                for m in n {
                    prop_assert_eq!(m.coord(axis), site.coord(axis));
                }
            }
        }

        #[test]
        fn generators_commute_pairwise(seed in 0u64..200) {
            let region = open_region(2, 2, 2);
            let index = region.site_index();
            let n = index.len();
            let a = (seed as usize * 7919) % n;
            let b = (seed as usize * 104729 + 13) % n;
            let ga = stabilizer_generator(index.site(a), &region, &index).unwrap();
            let gb = stabilizer_generator(index.site(b), &region, &index).unwrap();
            prop_assert!(ga.commutes_with(&gb));
        }
    }
}
