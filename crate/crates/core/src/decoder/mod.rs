//! Topological error correction on one flavor of the cell complex: i.i.d.
//! Z-flip and heralded-loss sampling, cell-parity syndrome extraction with
//! supercell merging, boundary-augmented minimum-weight perfect matching,
//! canonical correction chains, homology-class failure tests, and Monte
//! Carlo threshold / suppression estimation. A separate herald localizes
//! dead transverse regions from syndrome streams.
//!
//! Geometry: a block of dx x dy x dz cells with rough boundaries along x
//! (chains may terminate there) and periodic y, z. Face qubits carry the
//! errors; each interior face borders two cells, x-faces on the rough
//! boundaries border one.

pub mod blossom;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{CellParity, LatticeSite};

#[derive(Debug, Error, PartialEq)]
pub enum DecoderError {
    #[error("block dimensions must all be at least 1, got {0}x{1}x{2}")]
    EmptyBlock(usize, usize, usize),
    #[error("probability {0} must lie in [0, 1]")]
    BadProbability(f64),
    #[error("combined error and correction leave a nonempty syndrome")]
    InternalInconsistency,
    #[error("at least one trial is required")]
    NoTrials,
    #[error("scan requires at least one distance and one error rate")]
    EmptyScan,
}

/// Normal direction of a face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FaceAxis {
    X,
    Y,
    Z,
}

/// Face position. For axis X, `x` ranges over 0..=dx (planes between and
/// outside cell columns); for Y and Z the offset coordinate ranges over the
/// periodic 0..dy / 0..dz and names the boundary it sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FaceCoord {
    pub axis: FaceAxis,
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoderBlock {
    pub dx: usize,
    pub dy: usize,
    pub dz: usize,
    pub flavor: CellParity,
}

impl DecoderBlock {
    pub fn new(
        dx: usize,
        dy: usize,
        dz: usize,
        flavor: CellParity,
    ) -> Result<DecoderBlock, DecoderError> {
        if dx == 0 || dy == 0 || dz == 0 {
            return Err(DecoderError::EmptyBlock(dx, dy, dz));
        }
        Ok(DecoderBlock { dx, dy, dz, flavor })
    }

    /// Cube block of side d, the usual distance-d configuration.
    pub fn cube(d: usize, flavor: CellParity) -> Result<DecoderBlock, DecoderError> {
        DecoderBlock::new(d, d, d, flavor)
    }

    pub fn n_cells(&self) -> usize {
        self.dx * self.dy * self.dz
    }

    pub fn n_faces(&self) -> usize {
        (self.dx + 1) * self.dy * self.dz + 2 * self.n_cells()
    }

    pub fn cell_index(&self, c: [usize; 3]) -> usize {
        debug_assert!(c[0] < self.dx && c[1] < self.dy && c[2] < self.dz);
        (c[0] * self.dy + c[1]) * self.dz + c[2]
    }

    pub fn cell_coord(&self, idx: usize) -> [usize; 3] {
        let cz = idx % self.dz;
        let rest = idx / self.dz;
        [rest / self.dy, rest % self.dy, cz]
    }

    pub fn face_index(&self, f: FaceCoord) -> usize {
        let plane = self.dy * self.dz;
        match f.axis {
            FaceAxis::X => {
                debug_assert!(f.x <= self.dx);
                (f.x * self.dy + f.y) * self.dz + f.z
            }
            FaceAxis::Y => (self.dx + 1) * plane + (f.x * self.dy + f.y) * self.dz + f.z,
            FaceAxis::Z => {
                (self.dx + 1) * plane + self.n_cells() + (f.x * self.dy + f.y) * self.dz + f.z
            }
        }
    }

    pub fn face_coord(&self, idx: usize) -> FaceCoord {
        let plane = self.dy * self.dz;
        let x_count = (self.dx + 1) * plane;
        let (axis, rest) = if idx < x_count {
            (FaceAxis::X, idx)
        } else if idx < x_count + self.n_cells() {
            (FaceAxis::Y, idx - x_count)
        } else {
            (FaceAxis::Z, idx - x_count - self.n_cells())
        };
        let z = rest % self.dz;
        let rest = rest / self.dz;
        FaceCoord {
            axis,
            x: rest / self.dy,
            y: rest % self.dy,
            z,
        }
    }

    /// The six faces bounding a cell.
    pub fn faces_of_cell(&self, c: [usize; 3]) -> [usize; 6] {
        let [cx, cy, cz] = c;
        [
            self.face_index(FaceCoord { axis: FaceAxis::X, x: cx, y: cy, z: cz }),
            self.face_index(FaceCoord { axis: FaceAxis::X, x: cx + 1, y: cy, z: cz }),
            self.face_index(FaceCoord { axis: FaceAxis::Y, x: cx, y: cy, z: cz }),
            self.face_index(FaceCoord { axis: FaceAxis::Y, x: cx, y: (cy + 1) % self.dy, z: cz }),
            self.face_index(FaceCoord { axis: FaceAxis::Z, x: cx, y: cy, z: cz }),
            self.face_index(FaceCoord { axis: FaceAxis::Z, x: cx, y: cy, z: (cz + 1) % self.dz }),
        ]
    }

    /// Cells on either side of a face; None marks a rough x-boundary side.
    pub fn cells_of_face(&self, face: usize) -> (Option<usize>, Option<usize>) {
        let f = self.face_coord(face);
        match f.axis {
            FaceAxis::X => {
                let low = (f.x > 0).then(|| self.cell_index([f.x - 1, f.y, f.z]));
                let high = (f.x < self.dx).then(|| self.cell_index([f.x, f.y, f.z]));
                (low, high)
            }
            FaceAxis::Y => {
                let prev = self.cell_index([f.x, (f.y + self.dy - 1) % self.dy, f.z]);
                (Some(prev), Some(self.cell_index([f.x, f.y, f.z])))
            }
            FaceAxis::Z => {
                let prev = self.cell_index([f.x, f.y, (f.z + self.dz - 1) % self.dz]);
                (Some(prev), Some(self.cell_index([f.x, f.y, f.z])))
            }
        }
    }

    /// Doubled-coordinate site of a face qubit: primal cells have odd
    /// centers, dual cells even, so the shared face sits one unit from
    /// either center along the normal.
    pub fn face_site(&self, face: usize) -> LatticeSite {
        let f = self.face_coord(face);
        let shift: i64 = match self.flavor {
            CellParity::Primal => 1,
            CellParity::Dual => 0,
        };
        let center = |c: usize| 2 * c as i64 + shift;
        let boundary = |c: usize| 2 * c as i64 + shift - 1;
        match f.axis {
            FaceAxis::X => LatticeSite::new(boundary(f.x), center(f.y), center(f.z)),
            FaceAxis::Y => LatticeSite::new(center(f.x), boundary(f.y), center(f.z)),
            FaceAxis::Z => LatticeSite::new(center(f.x), center(f.y), boundary(f.z)),
        }
    }
}

/// One sampled error configuration. A face lost to the environment carries
/// no flip record: loss dominates, so `flips` and `losses` are disjoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSample {
    pub flips: BTreeSet<usize>,
    pub losses: BTreeSet<usize>,
    pub p: f64,
    pub p_loss: f64,
    pub seed: u64,
    pub stream: u64,
}

/// Independent flip and loss draws for every face qubit. The RNG is keyed
/// by (seed, stream) so trials are reproducible under any parallel order;
/// both draws happen for every face regardless of the probabilities, which
/// keeps the flip pattern identical across different loss rates.
pub fn sample_errors(
    block: &DecoderBlock,
    p: f64,
    p_loss: f64,
    seed: u64,
    stream: u64,
) -> Result<ErrorSample, DecoderError> {
    for v in [p, p_loss] {
        if !(0.0..=1.0).contains(&v) {
            return Err(DecoderError::BadProbability(v));
        }
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut flips = BTreeSet::new();
    let mut losses = BTreeSet::new();
    for face in 0..block.n_faces() {
        let flip = rng.random::<f64>() < p;
        let lost = rng.random::<f64>() < p_loss;
        if lost {
            losses.insert(face);
        } else if flip {
            flips.insert(face);
        }
    }
    Ok(ErrorSample {
        flips,
        losses,
        p,
        p_loss,
        seed,
        stream,
    })
}

/// Cells merged by shared lost faces, with their combined parity. A
/// supercell that reaches a rough boundary can dump any parity there, so it
/// never becomes a matching node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Supercell {
    pub cells: Vec<usize>,
    pub odd: bool,
    pub touches_low: bool,
    pub touches_high: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Syndrome {
    /// Odd cells not involved in any loss merging.
    pub odd_cells: Vec<usize>,
    /// Loss-merged groups, any parity.
    pub clusters: Vec<Supercell>,
}

impl Syndrome {
    /// Matching nodes: odd isolated cells and odd clusters away from the
    /// boundaries, ordered by their smallest member cell.
    pub fn nodes(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = self.odd_cells.iter().map(|&c| vec![c]).collect();
        for cluster in &self.clusters {
            if cluster.odd && !cluster.touches_low && !cluster.touches_high {
                out.push(cluster.cells.clone());
            }
        }
        out.sort_by_key(|cells| cells[0]);
        out
    }

    pub fn is_empty(&self) -> bool {
        self.nodes().is_empty()
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Lower root wins, keeping cluster enumeration deterministic.
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }
}

/// Cell parities over the intact faces, with lost faces merging their
/// neighbor cells (or a cell and a rough boundary) into supercells.
pub fn extract_syndrome(sample: &ErrorSample, block: &DecoderBlock) -> Syndrome {
    let n = block.n_cells();
    let stub_low = n;
    let stub_high = n + 1;
    let mut parity = vec![false; n];
    for &face in &sample.flips {
        let (a, b) = block.cells_of_face(face);
        if let Some(c) = a {
            parity[c] ^= true;
        }
        if let Some(c) = b {
            parity[c] ^= true;
        }
    }
    let mut uf = UnionFind::new(n + 2);
    let mut touched = BTreeSet::new();
    for &face in &sample.losses {
        let (a, b) = block.cells_of_face(face);
        let a = a.unwrap_or(stub_low);
        let b = b.unwrap_or(stub_high);
        uf.union(a, b);
        if a < n {
            touched.insert(a);
        }
        if b < n {
            touched.insert(b);
        }
    }
    let low_root = uf.find(stub_low);
    let high_root = uf.find(stub_high);
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &c in &touched {
        groups.entry(uf.find(c)).or_default().push(c);
    }
    let mut clusters = Vec::new();
    for (root, cells) in groups {
        let odd = cells.iter().fold(false, |acc, &c| acc ^ parity[c]);
        clusters.push(Supercell {
            cells,
            odd,
            touches_low: root == low_root,
            touches_high: root == high_root,
        });
    }
    let odd_cells = (0..n)
        .filter(|&c| parity[c] && !touched.contains(&c))
        .collect();
    Syndrome { odd_cells, clusters }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingGraph {
    /// Real node payloads: member cells per node, as ordered by
    /// `Syndrome::nodes`. Node ids 0..n are real, n..2n their partners.
    pub nodes: Vec<Vec<usize>>,
    pub edges: Vec<(usize, usize, i64)>,
}

fn cell_distance(block: &DecoderBlock, a: usize, b: usize) -> i64 {
    let [ax, ay, az] = block.cell_coord(a);
    let [bx, by, bz] = block.cell_coord(b);
    let wrap = |u: usize, v: usize, d: usize| {
        let diff = u.abs_diff(v);
        diff.min(d - diff) as i64
    };
    ax.abs_diff(bx) as i64 + wrap(ay, by, block.dy) + wrap(az, bz, block.dz)
}

fn boundary_distance(block: &DecoderBlock, cell: usize) -> i64 {
    let cx = block.cell_coord(cell)[0];
    cx.min(block.dx - 1 - cx) as i64 + 1
}

fn node_pair_weight(block: &DecoderBlock, a: &[usize], b: &[usize]) -> i64 {
    let mut best = i64::MAX;
    for &ca in a {
        for &cb in b {
            best = best.min(cell_distance(block, ca, cb));
        }
    }
    best
}

fn node_boundary_weight(block: &DecoderBlock, cells: &[usize]) -> i64 {
    cells
        .iter()
        .map(|&c| boundary_distance(block, c))
        .min()
        .unwrap()
}

/// Complete graph over the odd nodes plus one zero-coupled partner per
/// node: real-real edges carry the minimal error count between the
/// supercells, each real-partner edge the minimal count to the nearer
/// rough boundary, and partner-partner edges are free.
pub fn build_matching_graph(syndrome: &Syndrome, block: &DecoderBlock) -> MatchingGraph {
    let nodes = syndrome.nodes();
    let n = nodes.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            edges.push((i, j, node_pair_weight(block, &nodes[i], &nodes[j])));
        }
    }
    for (i, cells) in nodes.iter().enumerate() {
        edges.push((i, n + i, node_boundary_weight(block, cells)));
    }
    for i in 0..n {
        for j in i + 1..n {
            edges.push((n + i, n + j, 0));
        }
    }
    MatchingGraph { nodes, edges }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    /// Real node payloads, copied from the graph.
    pub nodes: Vec<Vec<usize>>,
    /// Matched node-id pairs (i < j), sorted. Ids n.. are partners.
    pub pairs: Vec<(usize, usize)>,
    /// Total weight over the original (untransformed) edge weights.
    pub total_weight: i64,
}

/// Minimum-weight perfect matching of the augmented graph. The partner
/// construction guarantees a perfect matching exists.
pub fn mwpm(graph: &MatchingGraph) -> Matching {
    let n_nodes = 2 * graph.nodes.len();
    let mate = blossom::min_weight_perfect_matching(n_nodes, &graph.edges)
        .expect("partner-augmented graph always has a perfect matching");
    let weight_of: HashMap<(usize, usize), i64> = graph
        .edges
        .iter()
        .map(|&(i, j, w)| ((i.min(j), i.max(j)), w))
        .collect();
    let mut pairs = Vec::new();
    let mut total = 0;
    for (v, &m) in mate.iter().enumerate() {
        if v < m {
            pairs.push((v, m));
            total += weight_of[&(v, m)];
        }
    }
    Matching {
        nodes: graph.nodes.clone(),
        pairs,
        total_weight: total,
    }
}

/// Pick the lexicographically first pair of member cells realizing the
/// minimal distance between two nodes.
fn closest_members(block: &DecoderBlock, a: &[usize], b: &[usize]) -> (usize, usize) {
    let mut best = (a[0], b[0]);
    let mut best_d = i64::MAX;
    for &ca in a {
        for &cb in b {
            let d = cell_distance(block, ca, cb);
            if d < best_d {
                best_d = d;
                best = (ca, cb);
            }
        }
    }
    best
}

/// Canonical minimal chain between two cells: step along x first, then the
/// shorter periodic way round in y, then z; ties in the wrap direction go
/// the positive way.
fn chain_between(block: &DecoderBlock, a: usize, b: usize, out: &mut BTreeSet<usize>) {
    let [ax, ay, az] = block.cell_coord(a);
    let [bx, by, bz] = block.cell_coord(b);
    let mut toggle = |f: FaceCoord| {
        let idx = block.face_index(f);
        if !out.remove(&idx) {
            out.insert(idx);
        }
    };
    let mut cx = ax;
    while cx != bx {
        let fx = if bx > cx { cx + 1 } else { cx };
        toggle(FaceCoord { axis: FaceAxis::X, x: fx, y: ay, z: az });
        if bx > cx {
            cx += 1;
        } else {
            cx -= 1;
        }
    }
    let mut cy = ay;
    let fwd = (by + block.dy - ay) % block.dy;
    let positive = fwd * 2 <= block.dy;
    while cy != by {
        let (face_y, next) = if positive {
            (((cy + 1) % block.dy), (cy + 1) % block.dy)
        } else {
            (cy, (cy + block.dy - 1) % block.dy)
        };
        toggle(FaceCoord { axis: FaceAxis::Y, x: bx, y: face_y, z: az });
        cy = next;
    }
    let mut cz = az;
    let fwd = (bz + block.dz - az) % block.dz;
    let positive = fwd * 2 <= block.dz;
    while cz != bz {
        let (face_z, next) = if positive {
            (((cz + 1) % block.dz), (cz + 1) % block.dz)
        } else {
            (cz, (cz + block.dz - 1) % block.dz)
        };
        toggle(FaceCoord { axis: FaceAxis::Z, x: bx, y: by, z: face_z });
        cz = next;
    }
}

/// Minimal chain from a cell to the nearer rough boundary (ties go low).
fn chain_to_boundary(block: &DecoderBlock, cell: usize, out: &mut BTreeSet<usize>) {
    let [cx, cy, cz] = block.cell_coord(cell);
    let mut toggle = |f: FaceCoord| {
        let idx = block.face_index(f);
        if !out.remove(&idx) {
            out.insert(idx);
        }
    };
    let low = cx + 1;
    let high = block.dx - cx;
    if low <= high {
        for fx in 0..=cx {
            toggle(FaceCoord { axis: FaceAxis::X, x: fx, y: cy, z: cz });
        }
    } else {
        for fx in cx + 1..=block.dx {
            toggle(FaceCoord { axis: FaceAxis::X, x: fx, y: cy, z: cz });
        }
    }
}

/// Correction chains for a matching: member-to-member chains for paired
/// real nodes, boundary chains for nodes matched to their partner. Lost
/// faces are resolved separately when the failure test runs.
pub fn correction_from_matching(matching: &Matching, block: &DecoderBlock) -> BTreeSet<usize> {
    let n = matching.nodes.len();
    let mut out = BTreeSet::new();
    for &(i, j) in &matching.pairs {
        if i < n && j < n {
            let (a, b) = closest_members(block, &matching.nodes[i], &matching.nodes[j]);
            chain_between(block, a, b, &mut out);
        } else if i < n {
            debug_assert_eq!(j, n + i, "real nodes only connect to their own partner");
            let cells = &matching.nodes[i];
            let best = *cells
                .iter()
                .min_by_key(|&&c| boundary_distance(block, c))
                .unwrap();
            chain_to_boundary(block, best, &mut out);
        }
    }
    out
}

/// Assign values to lost faces so every cell parity closes: peel spanning
/// trees of the loss graph from the leaves, rooting at a boundary stub
/// whenever the cluster reaches one. Returns the faces assigned flip 1 and
/// whether a cluster connects both rough boundaries (which leaves the
/// homology class ambiguous).
fn resolve_losses(
    block: &DecoderBlock,
    losses: &BTreeSet<usize>,
    parity: &mut [bool],
) -> Result<(BTreeSet<usize>, bool), DecoderError> {
    let n = block.n_cells();
    let stub_low = n;
    let stub_high = n + 1;
    let mut adjacency: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for &face in losses {
        let (a, b) = block.cells_of_face(face);
        let a = a.unwrap_or(stub_low);
        let b = b.unwrap_or(stub_high);
        if a == b {
            continue;
        }
        adjacency.entry(a).or_default().push((face, b));
        adjacency.entry(b).or_default().push((face, a));
    }
    let mut visited = vec![false; n + 2];
    let mut assigned = BTreeSet::new();
    let mut ambiguous = false;
    let starts: Vec<usize> = [stub_low, stub_high]
        .into_iter()
        .chain(adjacency.keys().copied())
        .collect();
    for start in starts {
        if visited.get(start) == Some(&true) || !adjacency.contains_key(&start) {
            continue;
        }
        visited[start] = true;
        // BFS spanning tree, recorded as (vertex, parent, connecting face).
        let mut order = vec![(start, usize::MAX, usize::MAX)];
        let mut head = 0;
        while head < order.len() {
            let (v, _, _) = order[head];
            head += 1;
            if let Some(nbrs) = adjacency.get(&v) {
                for &(face, other) in nbrs {
                    if !visited[other] {
                        visited[other] = true;
                        order.push((other, v, face));
                    }
                }
            }
        }
        if start == stub_low && order.iter().any(|&(v, _, _)| v == stub_high) {
            ambiguous = true;
        }
        for &(v, parent, face) in order.iter().skip(1).rev() {
            if v < n && parity[v] {
                parity[v] = false;
                if parent < n {
                    parity[parent] ^= true;
                }
                if !assigned.remove(&face) {
                    assigned.insert(face);
                }
            }
        }
        if start < n && parity[start] {
            return Err(DecoderError::InternalInconsistency);
        }
    }
    Ok((assigned, ambiguous))
}

/// True when the corrected error is a homologically nontrivial chain
/// between the two rough boundaries: the combined flips, with lost faces
/// resolved, cross the x = 0 face plane an odd number of times. A loss
/// cluster spanning boundary to boundary counts as a failure outright.
pub fn logical_failure(
    sample: &ErrorSample,
    correction: &BTreeSet<usize>,
    block: &DecoderBlock,
) -> Result<bool, DecoderError> {
    let mut combined: BTreeSet<usize> = sample.flips.symmetric_difference(correction).copied().collect();
    let mut parity = vec![false; block.n_cells()];
    for &face in &combined {
        if sample.losses.contains(&face) {
            return Err(DecoderError::InternalInconsistency);
        }
        let (a, b) = block.cells_of_face(face);
        if let Some(c) = a {
            parity[c] ^= true;
        }
        if let Some(c) = b {
            parity[c] ^= true;
        }
    }
    let (assigned, ambiguous) = resolve_losses(block, &sample.losses, &mut parity)?;
    if parity.iter().any(|&p| p) {
        return Err(DecoderError::InternalInconsistency);
    }
    if ambiguous {
        return Ok(true);
    }
    combined.extend(assigned);
    let crossings = combined
        .iter()
        .filter(|&&face| {
            let f = block.face_coord(face);
            f.axis == FaceAxis::X && f.x == 0
        })
        .count();
    Ok(crossings % 2 == 1)
}

/// Full pipeline record for one sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecodeOutcome {
    pub syndrome: Syndrome,
    pub graph: MatchingGraph,
    pub matching: Matching,
    pub correction: BTreeSet<usize>,
    pub failure: bool,
}

pub fn decode_sample(
    block: &DecoderBlock,
    sample: &ErrorSample,
) -> Result<DecodeOutcome, DecoderError> {
    let syndrome = extract_syndrome(sample, block);
    let graph = build_matching_graph(&syndrome, block);
    let matching = mwpm(&graph);
    let correction = correction_from_matching(&matching, block);
    let failure = logical_failure(sample, &correction, block)?;
    Ok(DecodeOutcome {
        syndrome,
        graph,
        matching,
        correction,
        failure,
    })
}

/// One seeded sample-and-decode run.
pub fn run_trial(
    block: &DecoderBlock,
    p: f64,
    p_loss: f64,
    seed: u64,
    stream: u64,
) -> Result<DecodeOutcome, DecoderError> {
    let sample = sample_errors(block, p, p_loss, seed, stream)?;
    decode_sample(block, &sample)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub trials: u64,
    pub failures: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// 95% Wilson score interval; behaves sanely at zero failures.
pub fn wilson_interval(failures: u64, trials: u64) -> (f64, f64) {
    let z = 1.959963984540054f64;
    let n = trials as f64;
    let p = failures as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = p + z2 / (2.0 * n);
    let spread = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let low = if failures == 0 {
        0.0
    } else {
        ((center - spread) / denom).max(0.0)
    };
    let high = if failures == trials {
        1.0
    } else {
        ((center + spread) / denom).min(1.0)
    };
    (low, high)
}

fn monte_carlo_with_base(
    block: &DecoderBlock,
    p: f64,
    p_loss: f64,
    trials: u64,
    seed: u64,
    stream_base: u64,
) -> Result<TrialStats, DecoderError> {
    if trials == 0 {
        return Err(DecoderError::NoTrials);
    }
    let failures = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(block, p, p_loss, seed, stream_base | t).map(|o| o.failure as u64))
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let rate = failures as f64 / trials as f64;
    let (ci_low, ci_high) = wilson_interval(failures, trials);
    Ok(TrialStats {
        trials,
        failures,
        rate,
        ci_low,
        ci_high,
    })
}

/// Monte Carlo logical failure rate. Trial t draws its randomness from
/// stream t of the seeded generator, so the count is independent of thread
/// scheduling and repeatable.
pub fn monte_carlo(
    block: &DecoderBlock,
    p: f64,
    p_loss: f64,
    trials: u64,
    seed: u64,
) -> Result<TrialStats, DecoderError> {
    monte_carlo_with_base(block, p, p_loss, trials, seed, 0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub flavor: CellParity,
    pub d: usize,
    pub p: f64,
    pub p_loss: f64,
    pub stats: TrialStats,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub d_low: usize,
    pub d_high: usize,
    /// Crossing point of the two log-rate curves, or None when the curves
    /// do not cross inside the scanned range.
    pub p_cross: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
    pub crossings: Vec<Crossing>,
}

fn log_rate(stats: &TrialStats) -> f64 {
    // Floor zero-failure points at half a failure for interpolation.
    ((stats.failures as f64).max(0.5) / stats.trials as f64).ln()
}

fn crossing_between(rows_low: &[&ScanRow], rows_high: &[&ScanRow]) -> Option<f64> {
    debug_assert_eq!(rows_low.len(), rows_high.len());
    let f: Vec<f64> = rows_low
        .iter()
        .zip(rows_high)
        .map(|(lo, hi)| log_rate(&hi.stats) - log_rate(&lo.stats))
        .collect();
    for i in 0..f.len().saturating_sub(1) {
        if f[i] <= 0.0 && f[i + 1] > 0.0 {
            let t = -f[i] / (f[i + 1] - f[i]);
            let lp = rows_low[i].p.ln() + t * (rows_low[i + 1].p.ln() - rows_low[i].p.ln());
            return Some(lp.exp());
        }
    }
    None
}

/// Grid scan over distances and error rates. Each grid point gets a
/// disjoint block of RNG streams, so adding rows never perturbs others.
/// Crossings of the per-distance rate curves estimate the threshold.
pub fn threshold_scan(
    flavor: CellParity,
    distances: &[usize],
    ps: &[f64],
    p_loss: f64,
    trials: u64,
    seed: u64,
) -> Result<ScanResult, DecoderError> {
    if distances.is_empty() || ps.is_empty() {
        return Err(DecoderError::EmptyScan);
    }
    let mut rows = Vec::new();
    for (di, &d) in distances.iter().enumerate() {
        let block = DecoderBlock::cube(d, flavor)?;
        for (pi, &p) in ps.iter().enumerate() {
            let grid_index = (di * ps.len() + pi) as u64;
            let stats =
                monte_carlo_with_base(&block, p, p_loss, trials, seed, grid_index << 32)?;
            rows.push(ScanRow {
                flavor,
                d,
                p,
                p_loss,
                stats,
                seed,
            });
        }
    }
    let mut crossings = Vec::new();
    for i in 0..distances.len() {
        for j in i + 1..distances.len() {
            let low: Vec<&ScanRow> = rows.iter().filter(|r| r.d == distances[i]).collect();
            let high: Vec<&ScanRow> = rows.iter().filter(|r| r.d == distances[j]).collect();
            crossings.push(Crossing {
                d_low: distances[i],
                d_high: distances[j],
                p_cross: crossing_between(&low, &high),
            });
        }
    }
    Ok(ScanResult { rows, crossings })
}

/// CSV table of scan rows.
pub fn scan_csv(result: &ScanResult) -> String {
    let mut out =
        String::from("flavor,d,p,p_loss,trials,failures,rate,ci_low,ci_high,seed\n");
    for r in &result.rows {
        let flavor = match r.flavor {
            CellParity::Primal => "primal",
            CellParity::Dual => "dual",
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            flavor,
            r.d,
            r.p,
            r.p_loss,
            r.stats.trials,
            r.stats.failures,
            r.stats.rate,
            r.stats.ci_low,
            r.stats.ci_high,
            r.seed
        ));
    }
    out
}

/// Least-squares slope of log(rate) against log(p); the suppression
/// exponent of the code, expected near (d + 1) / 2 well below threshold.
pub fn fit_suppression_exponent(points: &[(f64, f64)]) -> Option<f64> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(p, r)| p > 0.0 && r > 0.0)
        .map(|&(p, r)| (p.ln(), r.ln()))
        .collect();
    if usable.len() < 2 {
        return None;
    }
    let n = usable.len() as f64;
    let mx = usable.iter().map(|u| u.0).sum::<f64>() / n;
    let my = usable.iter().map(|u| u.1).sum::<f64>() / n;
    let sxx: f64 = usable.iter().map(|u| (u.0 - mx) * (u.0 - mx)).sum();
    let sxy: f64 = usable.iter().map(|u| (u.0 - mx) * (u.1 - my)).sum();
    (sxx != 0.0).then(|| sxy / sxx)
}

/// One time-step of the herald input: transverse coordinates (cx, cy) of
/// the odd cells observed in one z-layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyndromeFrame {
    pub odd: Vec<(usize, usize)>,
}

pub const DEFAULT_HERALD_WINDOW: usize = 200;
pub const DEFAULT_HERALD_MULTIPLE: f64 = 4.0;

/// Flag transverse regions whose odd-parity frequency over the most recent
/// `window` frames exceeds `multiple` times the global mean frequency.
/// Streams shorter than the window produce no flags.
pub fn detect_faulty_chip(
    frames: &[SyndromeFrame],
    block: &DecoderBlock,
    window: usize,
    multiple: f64,
) -> Vec<(usize, usize)> {
    if window == 0 || frames.len() < window {
        return Vec::new();
    }
    let mut counts = vec![0u64; block.dx * block.dy];
    for frame in &frames[frames.len() - window..] {
        for &(cx, cy) in &frame.odd {
            counts[cx * block.dy + cy] += 1;
        }
    }
    let mean = counts.iter().sum::<u64>() as f64 / counts.len() as f64;
    let threshold = multiple * mean;
    (0..block.dx)
        .flat_map(|cx| (0..block.dy).map(move |cy| (cx, cy)))
        .filter(|&(cx, cy)| counts[cx * block.dy + cy] as f64 > threshold)
        .collect()
}

/// Synthesize a herald input stream by sampling blocks at flip rate p and
/// reading off per-layer cell parities. `dead_column` randomizes one x-face
/// column at 50%, imitating a failed chip feeding garbage into its line.
pub fn synthesize_stream(
    block: &DecoderBlock,
    p: f64,
    n_frames: usize,
    seed: u64,
    dead_column: Option<(usize, usize)>,
) -> Result<Vec<SyndromeFrame>, DecoderError> {
    let mut frames = Vec::with_capacity(n_frames);
    let mut block_index = 0u64;
    while frames.len() < n_frames {
        let mut sample = sample_errors(block, p, 0.0, seed, block_index)?;
        if let Some((fx, fy)) = dead_column {
            let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x00de_adc0_ffee_0000);
            rng.set_stream(block_index);
            for fz in 0..block.dz {
                if rng.random::<f64>() < 0.5 {
                    let face = block.face_index(FaceCoord {
                        axis: FaceAxis::X,
                        x: fx,
                        y: fy,
                        z: fz,
                    });
                    if !sample.flips.remove(&face) {
                        sample.flips.insert(face);
                    }
                }
            }
        }
        let mut parity = vec![false; block.n_cells()];
        for &face in &sample.flips {
            let (a, b) = block.cells_of_face(face);
            if let Some(c) = a {
                parity[c] ^= true;
            }
            if let Some(c) = b {
                parity[c] ^= true;
            }
        }
        for cz in 0..block.dz {
            if frames.len() == n_frames {
                break;
            }
            let mut odd = Vec::new();
            for cx in 0..block.dx {
                for cy in 0..block.dy {
                    if parity[block.cell_index([cx, cy, cz])] {
                        odd.push((cx, cy));
                    }
                }
            }
            frames.push(SyndromeFrame { odd });
        }
        block_index += 1;
    }
    Ok(frames)
}
