//! Dense GF(2) stabilizer tableau for verifying preparation schedules.
//!
//! The tableau tracks a maximal abelian group of signed Pauli operators as
//! bit-packed rows (one u64 word per 64 qubits, X and Z planes). States
//! reachable here are always full-rank product-state evolutions, so no
//! destabilizer plane is kept; deterministic measurement outcomes are
//! recovered by Gaussian elimination over the rows.
//!
//! Measuring an operator that anticommutes with some generators replaces one
//! of them and repairs the rest, which is the standard tableau update. Rows
//! are kept in the +1 gauge: a nondeterministic -1 outcome is recorded in a
//! Pauli frame instead of on the row, so the stored rows always describe the
//! state after the frame correction while `sign * (-1)^<frame, row>` is the
//! sign the physical (uncorrected) state carries the row with.

use crate::lattice::{PauliOperator, RateClass, Region, Sign};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PauliError {
    #[error("basis assignment covers {0} qubits, register has {1}")]
    AssignmentLength(usize, usize),
    #[error("operator touches qubit {0} outside the tableau")]
    UnsupportedQubit(usize),
    #[error("operator is the identity; measuring it is trivial")]
    IdentityMeasurement,
}

/// How each qubit of a register is initialised.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisAssignment {
    /// |+> on half-rate sites, |0> on full-rate sites: the product state the
    /// sources emit.
    FromRateClasses,
    /// Same basis on every qubit. `UniformZ` is the deliberate negative
    /// control: it satisfies no generator with X support on a half-rate site.
    UniformZ,
    UniformX,
    /// Explicit per-qubit bases, X meaning |+> and Z meaning |0>.
    Explicit(Vec<InitBasis>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitBasis {
    X,
    Z,
}

impl BasisAssignment {
    /// Resolve to one basis per qubit of the region, in site index order.
    pub fn resolve(&self, region: &Region) -> Result<Vec<InitBasis>, PauliError> {
        let index = region.site_index();
        match self {
            BasisAssignment::FromRateClasses => Ok(index
                .sites()
                .iter()
                .map(|s| match crate::lattice::line_rate(s.x, s.y) {
                    RateClass::Half => InitBasis::X,
                    RateClass::Full => InitBasis::Z,
                })
                .collect()),
            BasisAssignment::UniformZ => Ok(vec![InitBasis::Z; index.len()]),
            BasisAssignment::UniformX => Ok(vec![InitBasis::X; index.len()]),
            BasisAssignment::Explicit(bases) => {
                if bases.len() != index.len() {
                    return Err(PauliError::AssignmentLength(bases.len(), index.len()));
                }
                Ok(bases.clone())
            }
        }
    }
}

/// Outcome record of one projective measurement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub outcome: Sign,
    pub deterministic: bool,
    /// Set when a nondeterministic -1 outcome extended the Pauli frame.
    pub frame_updated: bool,
}

/// Classification of one target generator against the prepared state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetStatus {
    /// The physical state satisfies the generator as written.
    Satisfied,
    /// The physical state carries the wrong sign, but the recorded frame
    /// correction repairs it.
    FrameSatisfied,
    /// Not in the prepared group, or carried with a sign the frame cannot
    /// repair.
    Violated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetSummary {
    pub satisfied: usize,
    pub frame_satisfied: usize,
    pub violated: usize,
    /// Indices (into the target list) of the violated generators.
    pub violations: Vec<usize>,
}

#[derive(Clone)]
struct Row {
    neg: bool,
    x: Vec<u64>,
    z: Vec<u64>,
}

fn parity_and(a: &[u64], b: &[u64]) -> bool {
    a.iter()
        .zip(b)
        .fold(0u32, |acc, (l, r)| acc ^ (l & r).count_ones())
        % 2
        == 1
}

fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= *s;
    }
}

fn is_zero(bits: &[u64]) -> bool {
    bits.iter().all(|w| *w == 0)
}

fn get_bit(bits: &[u64], i: usize) -> bool {
    bits[i / 64] >> (i % 64) & 1 == 1
}

fn set_bit(bits: &mut [u64], i: usize) {
    bits[i / 64] |= 1u64 << (i % 64);
}

impl Row {
    fn empty(words: usize) -> Row {
        Row {
            neg: false,
            x: vec![0; words],
            z: vec![0; words],
        }
    }

    fn commutes(&self, other: &Row) -> bool {
        parity_and(&self.x, &other.z) == parity_and(&self.z, &other.x)
    }

    /// self <- self * other, with the sign rule of the X-then-Z normal form.
    fn mul_assign(&mut self, other: &Row) {
        if parity_and(&self.z, &other.x) {
            self.neg = !self.neg;
        }
        self.neg ^= other.neg;
        xor_into(&mut self.x, &other.x);
        xor_into(&mut self.z, &other.z);
    }
}

/// Maximal abelian signed Pauli group on n qubits plus a Pauli frame.
pub struct StabilizerTableau {
    n: usize,
    words: usize,
    rows: Vec<Row>,
    frame_x: Vec<u64>,
    frame_z: Vec<u64>,
}

impl StabilizerTableau {
    /// Product-state tableau: one X or Z row per qubit.
    pub fn init_product_state(
        region: &Region,
        assignment: &BasisAssignment,
    ) -> Result<StabilizerTableau, PauliError> {
        let bases = assignment.resolve(region)?;
        Ok(StabilizerTableau::from_bases(&bases))
    }

    pub fn from_bases(bases: &[InitBasis]) -> StabilizerTableau {
        let n = bases.len();
        let words = n.div_ceil(64);
        let rows = bases
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let mut row = Row::empty(words);
                match b {
                    InitBasis::X => set_bit(&mut row.x, i),
                    InitBasis::Z => set_bit(&mut row.z, i),
                }
                row
            })
            .collect();
        StabilizerTableau {
            n,
            words,
            rows,
            frame_x: vec![0; words],
            frame_z: vec![0; words],
        }
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    fn op_to_row(&self, op: &PauliOperator) -> Result<Row, PauliError> {
        let mut row = Row::empty(self.words);
        row.neg = op.sign == Sign::Minus;
        for &i in &op.x_support {
            if i >= self.n {
                return Err(PauliError::UnsupportedQubit(i));
            }
            set_bit(&mut row.x, i);
        }
        for &i in &op.z_support {
            if i >= self.n {
                return Err(PauliError::UnsupportedQubit(i));
            }
            set_bit(&mut row.z, i);
        }
        Ok(row)
    }

    /// Sign with which the stored rows carry |target| (ignoring target's own
    /// sign and the frame), or None if |target| is not in the group.
    fn member_sign(&self, target: &Row) -> Option<Sign> {
        let mut work: Vec<Row> = self.rows.clone();
        let mut used = vec![false; work.len()];
        let mut acc = Row::empty(self.words);
        let mut rem = target.clone();
        rem.neg = false;
        let col_bit = |row: &Row, c: usize| {
            if c < self.n {
                get_bit(&row.x, c)
            } else {
                get_bit(&row.z, c - self.n)
            }
        };
        for c in 0..2 * self.n {
            let Some(p) = (0..work.len()).find(|&r| !used[r] && col_bit(&work[r], c)) else {
                continue;
            };
            used[p] = true;
            let pivot_row = work[p].clone();
            for r in 0..work.len() {
                if !used[r] && col_bit(&work[r], c) {
                    work[r].mul_assign(&pivot_row);
                }
            }
            if col_bit(&rem, c) {
                acc.mul_assign(&pivot_row);
                xor_into(&mut rem.x, &pivot_row.x);
                xor_into(&mut rem.z, &pivot_row.z);
            }
        }
        if is_zero(&rem.x) && is_zero(&rem.z) {
            Some(if acc.neg { Sign::Minus } else { Sign::Plus })
        } else {
            None
        }
    }

    fn frame_anticommutes(&self, row: &Row) -> bool {
        parity_and(&self.frame_x, &row.z) != parity_and(&self.frame_z, &row.x)
    }

    /// Sign with which the physical state carries |op|, or None when |op| is
    /// not in the prepared group. With `frame_adjusted` false the stored
    /// (post-correction) sign is returned instead.
    pub fn contains(
        &self,
        op: &PauliOperator,
        frame_adjusted: bool,
    ) -> Result<Option<Sign>, PauliError> {
        let row = self.op_to_row(op)?;
        Ok(self.member_sign(&row).map(|mut s| {
            if frame_adjusted && self.frame_anticommutes(&row) {
                s = s.flip();
            }
            s
        }))
    }

    /// Projectively measure a Pauli operator, updating the group. The RNG
    /// decides nondeterministic outcomes. A nondeterministic outcome that
    /// leaves the state stabilized by -|op| stores the row at +1 and extends
    /// the frame with a single-qubit Pauli anticommuting with |op| (Z on the
    /// lowest X-support qubit, else X on the lowest Z-support qubit); stored
    /// signs of other frame-crossing rows are compensated so their physical
    /// signs are unchanged.
    pub fn measure_pauli<R: rand::Rng>(
        &mut self,
        op: &PauliOperator,
        rng: &mut R,
    ) -> Result<MeasurementRecord, PauliError> {
        if op.is_identity() {
            return Err(PauliError::IdentityMeasurement);
        }
        let target = self.op_to_row(op)?;
        let anti: Vec<usize> = (0..self.rows.len())
            .filter(|&r| !self.rows[r].commutes(&target))
            .collect();
        if anti.is_empty() {
            let stored = self
                .member_sign(&target)
                .expect("operator commuting with a maximal group is in it");
            let physical = if self.frame_anticommutes(&target) {
                stored.flip()
            } else {
                stored
            };
            // The physical state carries |op| with `physical`; measuring
            // op = s*|op| yields physical/s.
            let outcome = if target.neg { physical.flip() } else { physical };
            return Ok(MeasurementRecord {
                outcome,
                deterministic: true,
                frame_updated: false,
            });
        }
        let pivot = anti[0];
        let pivot_row = self.rows[pivot].clone();
        for &r in &anti[1..] {
            self.rows[r].mul_assign(&pivot_row);
        }
        let outcome = if rng.random() { Sign::Plus } else { Sign::Minus };
        let mut new_row = target.clone();
        new_row.neg = false;
        self.rows[pivot] = new_row;
        // The post-measurement state is stabilized by outcome * op, i.e. by
        // (outcome combined with op's sign) * |op|.
        let stabilizing_minus = (outcome == Sign::Minus) ^ target.neg;
        let mut frame_updated = false;
        if stabilizing_minus {
            frame_updated = true;
            let mut extension = Row::empty(self.words);
            if let Some(&q) = op.x_support.iter().next() {
                extension.z[q / 64] |= 1 << (q % 64);
            } else {
                let q = *op.z_support.iter().next().expect("non-identity");
                extension.x[q / 64] |= 1 << (q % 64);
            }
            // Keep every other row's physical sign invariant under the frame
            // extension; only the freshly measured row may disagree with its
            // stored sign.
            for (r, row) in self.rows.iter_mut().enumerate() {
                if r != pivot && !extension.commutes(row) {
                    row.neg = !row.neg;
                }
            }
            xor_into(&mut self.frame_x, &extension.x);
            xor_into(&mut self.frame_z, &extension.z);
        }
        Ok(MeasurementRecord {
            outcome,
            deterministic: false,
            frame_updated,
        })
    }

    /// Treat the recorded frame correction as physically applied: the stored
    /// rows already describe the corrected state, so the frame is cleared.
    pub fn apply_frame(&mut self) {
        self.frame_x.iter_mut().for_each(|w| *w = 0);
        self.frame_z.iter_mut().for_each(|w| *w = 0);
    }

    pub fn frame_is_trivial(&self) -> bool {
        is_zero(&self.frame_x) && is_zero(&self.frame_z)
    }

    /// Classify one target generator against the physical state and the
    /// recorded frame.
    pub fn verify_one(&self, target: &PauliOperator) -> Result<TargetStatus, PauliError> {
        let row = self.op_to_row(target)?;
        let Some(stored) = self.member_sign(&row) else {
            return Ok(TargetStatus::Violated);
        };
        let wanted = target.sign;
        let physical = if self.frame_anticommutes(&row) {
            stored.flip()
        } else {
            stored
        };
        if physical == wanted {
            Ok(TargetStatus::Satisfied)
        } else if stored == wanted {
            Ok(TargetStatus::FrameSatisfied)
        } else {
            Ok(TargetStatus::Violated)
        }
    }

    /// Classify every target generator and tally the result.
    pub fn verify_target(&self, targets: &[PauliOperator]) -> Result<TargetSummary, PauliError> {
        let mut summary = TargetSummary {
            satisfied: 0,
            frame_satisfied: 0,
            violated: 0,
            violations: Vec::new(),
        };
        for (i, t) in targets.iter().enumerate() {
            match self.verify_one(t)? {
                TargetStatus::Satisfied => summary.satisfied += 1,
                TargetStatus::FrameSatisfied => summary.frame_satisfied += 1,
                TargetStatus::Violated => {
                    summary.violated += 1;
                    summary.violations.push(i);
                }
            }
        }
        Ok(summary)
    }

    /// Pairwise commutation and full rank over GF(2).
    pub fn check_invariants(&self) -> bool {
        for i in 0..self.rows.len() {
            for j in (i + 1)..self.rows.len() {
                if !self.rows[i].commutes(&self.rows[j]) {
                    return false;
                }
            }
        }
        self.rank() == self.n
    }

    fn rank(&self) -> usize {
        let words = self.words;
        let mut work: Vec<Vec<u64>> = self
            .rows
            .iter()
            .map(|r| {
                let mut v = r.x.clone();
                v.extend_from_slice(&r.z);
                v
            })
            .collect();
        // Column c < n is the X bit of qubit c, column n + q the Z bit of
        // qubit q at word offset `words` in the concatenated row.
        let bit_at = |row: &[u64], c: usize| {
            if c < self.n {
                get_bit(&row[..words], c)
            } else {
                get_bit(&row[words..], c - self.n)
            }
        };
        let mut rank = 0;
        let mut row_cursor = 0;
        for c in 0..2 * self.n {
            let Some(p) = (row_cursor..work.len()).find(|&r| bit_at(&work[r], c)) else {
                continue;
            };
            work.swap(row_cursor, p);
            let pivot = work[row_cursor].clone();
            for (r, row) in work.iter_mut().enumerate() {
                if r != row_cursor && bit_at(row, c) {
                    for i in 0..pivot.len() {
                        row[i] ^= pivot[i];
                    }
                }
            }
            row_cursor += 1;
            rank += 1;
        }
        rank
    }

    /// Text dump: one generator per line as `sign xbits zbits`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            out.push(if row.neg { '-' } else { '+' });
            out.push(' ');
            for i in 0..self.n {
                out.push(if get_bit(&row.x, i) { '1' } else { '0' });
            }
            out.push(' ');
            for i in 0..self.n {
                out.push(if get_bit(&row.z, i) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    /// The accumulated frame correction as a Pauli operator.
    pub fn frame(&self) -> PauliOperator {
        let mut op = PauliOperator::identity();
        for i in 0..self.n {
            if get_bit(&self.frame_x, i) {
                op.x_support.insert(i);
            }
            if get_bit(&self.frame_z, i) {
                op.z_support.insert(i);
            }
        }
        op
    }
}
