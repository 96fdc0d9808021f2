//! Flow scheduling for the photonic preparation network.
//!
//! Photons stream along the vertical lines of the doubled grid and traverse
//! four stages of switching chips in series. Stages 1 and 2 assemble the
//! parity checks lying in y-z planes, stages 3 and 4 the checks in x-z
//! planes; consecutive stages sit two time steps apart along the fibers.
//! Each stage holds one chip per full-rate line, duplicated `gamma` times
//! when measurement readout is slower than the photon clock.
//!
//! Every chip runs the same period-8 switching cycle at a line- and
//! stage-dependent phase. A check occupies one window of the cycle: the
//! atom is initialized one step before the window opens, the five member
//! photons are routed through the module over the next five steps (right,
//! upper, center, bottom, left), and the atom is measured on the sixth.
//! The step after the measurement holds the next line photon for one step
//! so the stream stays aligned. The simulation replays the full schedule,
//! monitors it for protocol violations, extracts the realized projection
//! events, and checks that they prepare the target cluster state.

pub mod programs;

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::lattice::{
    classify_site, line_rate, target_stabilizer_group, Axis, LatticeError, LatticeSite,
    PauliOperator, RateClass, Region,
};
use crate::pauli::{BasisAssignment, InitBasis, PauliError, StabilizerTableau};

pub use programs::{
    chart_divergences, generated_row, printed_rows, ChartDivergence, ChartRow, ChipPort,
    ChipProgram, StagePair, SwitchAction, SwitchSymbol, CHART_ROWS,
};

#[derive(Debug, Error)]
pub enum PrepNetError {
    #[error("network dimensions and redundancy must all be at least 1")]
    BadConfig,
    #[error("chip ({stage},{row},{col}) is not a full-rate line of the network")]
    UnknownChip { stage: u8, row: i64, col: i64 },
    #[error("run raised {0} protocol violations; trace left for inspection")]
    Violations(usize),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

/// Size and timing parameters of one preparation network. `nx`, `ny` and
/// `layers` count primal cells, so the prepared block spans the doubled
/// coordinates [0, 2nx] x [0, 2ny] x [0, 2 layers]. `gamma` is the chip
/// redundancy covering a measurement `gamma` steps long; `seed` drives the
/// simulated measurement outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub nx: i64,
    pub ny: i64,
    pub layers: i64,
    pub gamma: u32,
    pub seed: u64,
}

impl NetworkConfig {
    pub fn new(
        nx: i64,
        ny: i64,
        layers: i64,
        gamma: u32,
        seed: u64,
    ) -> Result<NetworkConfig, PrepNetError> {
        let config = NetworkConfig { nx, ny, layers, gamma, seed };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), PrepNetError> {
        if self.nx < 1 || self.ny < 1 || self.layers < 1 || self.gamma < 1 {
            return Err(PrepNetError::BadConfig);
        }
        Ok(())
    }

    pub fn region(&self) -> Result<Region, PrepNetError> {
        Ok(Region::open_box(self.nx, self.ny, self.layers)?)
    }

    /// Chip count of the published sizing formula: `gamma` chips per check
    /// plane orientation and full-rate line.
    pub fn nominal_chip_count(&self) -> u64 {
        (self.gamma as i64 * (4 * self.nx * self.ny + 2 * (self.nx + self.ny))) as u64
    }

    fn zmax(&self) -> i64 {
        2 * self.layers
    }

    /// Fiber length offset making every emission time nonnegative.
    fn shift(&self) -> i64 {
        2 * (self.nx + self.ny)
    }

    /// Emission time of the photon at `site`, chosen so that all five
    /// members of a check reach its chip inside one switching window.
    pub fn emission_time(&self, site: LatticeSite) -> i64 {
        2 * site.z + self.shift() + 1 - site.x - site.y
    }

    /// Arrival time of a photon at stage `stage`, two steps per hop.
    pub fn arrival_time(&self, site: LatticeSite, stage: u8) -> i64 {
        self.emission_time(site) + 2 * (stage as i64 - 1)
    }

    fn line_in_range(&self, x: i64, y: i64) -> bool {
        (0..=2 * self.nx).contains(&x) && (0..=2 * self.ny).contains(&y)
    }

    fn full_lines(&self) -> Vec<(i64, i64)> {
        let mut out = Vec::new();
        for x in 0..=2 * self.nx {
            for y in 0..=2 * self.ny {
                if line_rate(x, y) == RateClass::Full {
                    out.push((x, y));
                }
            }
        }
        out
    }

    /// Start of the switching window centered on height `z_w` at the stage
    /// `stage` chip of line (x, y). Always even.
    fn window_time(&self, stage: u8, x: i64, y: i64, z_w: i64) -> i64 {
        2 * z_w + self.shift() - 1 - x - y + 2 * (stage as i64 - 1)
    }

    fn phase(&self, stage: u8, x: i64, y: i64) -> u8 {
        let r = stage_residue(stage, x, y);
        self.window_time(stage, x, y, r).rem_euclid(8) as u8
    }
}

/// Residue class modulo 4 of the window heights served by the stage
/// `stage` chip of line (x, y). Staggering the residues across neighboring
/// lines lets one chip serve all four transverse arms a half-rate line
/// emits, and the +2 offset between the stages of a pair makes the two
/// stages cover complementary heights.
pub fn stage_residue(stage: u8, x: i64, y: i64) -> i64 {
    let half = |v: i64| v.div_euclid(2).rem_euclid(2);
    let base = match stage {
        1 | 2 => {
            if x.rem_euclid(2) == 1 {
                2 * half(y)
            } else {
                1 + 2 * half(y)
            }
        }
        3 | 4 => {
            if x.rem_euclid(2) == 1 {
                1 + 2 * half(x)
            } else {
                2 * half(x)
            }
        }
        _ => panic!("stages are numbered 1 through 4"),
    };
    if stage == 2 || stage == 4 {
        (base + 2).rem_euclid(4)
    } else {
        base
    }
}

/// Axis along which a stage's checks reach for their transverse arms.
pub fn transverse_axis(stage: u8) -> Axis {
    match stage {
        1 | 2 => Axis::Y,
        3 | 4 => Axis::X,
        _ => panic!("stages are numbered 1 through 4"),
    }
}

/// One physical switching chip: stage 1..=4, redundancy copy, and the
/// full-rate line (row, col) = (x, y) it serves.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(from = "(u8, u32, i64, i64)", into = "(u8, u32, i64, i64)")]
pub struct ChipId {
    pub stage: u8,
    pub copy: u32,
    pub row: i64,
    pub col: i64,
}

impl From<(u8, u32, i64, i64)> for ChipId {
    fn from(v: (u8, u32, i64, i64)) -> ChipId {
        ChipId { stage: v.0, copy: v.1, row: v.2, col: v.3 }
    }
}

impl From<ChipId> for (u8, u32, i64, i64) {
    fn from(c: ChipId) -> (u8, u32, i64, i64) {
        (c.stage, c.copy, c.row, c.col)
    }
}

/// Instantiated network: all chips across the four stages. The published
/// sizing formula counts chips per plane orientation, so the instantiated
/// count is twice `nominal_chip_count` (four stages instead of two).
#[derive(Debug, Clone)]
pub struct NetworkLayout {
    pub config: NetworkConfig,
    pub chips: Vec<ChipId>,
}

impl NetworkLayout {
    pub fn nominal_chip_count(&self) -> u64 {
        self.config.nominal_chip_count()
    }

    pub fn instantiated_chip_count(&self) -> usize {
        self.chips.len()
    }
}

pub fn build_network(config: &NetworkConfig) -> Result<NetworkLayout, PrepNetError> {
    config.validate()?;
    let mut chips = Vec::new();
    for stage in 1..=4u8 {
        for &(x, y) in &config.full_lines() {
            for copy in 0..config.gamma {
                chips.push(ChipId { stage, copy, row: x, col: y });
            }
        }
    }
    chips.sort();
    Ok(NetworkLayout { config: *config, chips })
}

/// The switching program of every chip. Copies of a chip share one
/// program; phases are even, and the second stage of each pair carries the
/// bypass decorations.
pub fn generate_programs(
    config: &NetworkConfig,
) -> Result<BTreeMap<ChipId, ChipProgram>, PrepNetError> {
    let layout = build_network(config)?;
    let mut out = BTreeMap::new();
    for chip in layout.chips {
        let phase = config.phase(chip.stage, chip.row, chip.col);
        out.insert(chip, ChipProgram::new(phase, chip.stage % 2 == 0));
    }
    Ok(out)
}

/// One emitted photon. `id` doubles as the qubit's dense region index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhotonPulse {
    pub id: u32,
    pub site: LatticeSite,
    pub basis: InitBasis,
    pub emission: i64,
}

/// Deliberate corruption injected into a run to exercise the monitor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mutation {
    /// Exchange two symbols throughout one chip's switching pattern.
    SwapSymbols { stage: u8, row: i64, col: i64, a: SwitchSymbol, b: SwitchSymbol },
    /// Route a transverse-arm photon to the wrong neighbor line at one stage.
    MisroutePhoton { photon: u32, stage: u8 },
    /// Emit a second photon on top of an existing one.
    DuplicatePhoton { photon: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ViolationKind {
    /// Two photons routed into one module in one step.
    Collision,
    /// A photon reached a module while its atom was being measured.
    PhotonDuringMeasure,
    /// A photon reached a module while its atom was being initialized.
    PhotonDuringInit,
    /// A photon arrived at a port the switch was not serving.
    UnservedPhoton,
    /// A photon was routed into a module whose atom was never initialized,
    /// or a measurement fired on one.
    CheckWithoutInit,
    /// An initialization fired while a check was still accumulating.
    InitDuringOpenCheck,
    /// A hold step interrupted a check that had already absorbed photons.
    HoldDuringOpenCheck,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub t: i64,
    pub chip: ChipId,
    pub photons: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceAction {
    Initialize,
    Measure { duration: i64 },
    Pass { photon: u32, role: SwitchSymbol },
    Hold { photon: Option<u32> },
    EmptySlot { role: SwitchSymbol },
    Bypass { photon: u32, port: ChipPort },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub t: i64,
    pub chip: ChipId,
    pub action: TraceAction,
}

/// Schedule occupancy of one chip copy between its first and last duty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChipUsage {
    pub chip: ChipId,
    pub active_steps: u64,
    pub span_steps: u64,
    pub utilization: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub nominal_chips: u64,
    pub instantiated_chips: usize,
    pub photons: usize,
    pub events: usize,
    pub violations: usize,
    pub min_utilization: f64,
    pub max_utilization: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventTrace {
    pub config: NetworkConfig,
    pub events: Vec<TraceEvent>,
    pub violations: Vec<Violation>,
    pub usage: Vec<ChipUsage>,
    pub photons: Vec<PhotonPulse>,
}

impl EventTrace {
    pub fn summary(&self) -> TraceSummary {
        let mut min_u = f64::INFINITY;
        let mut max_u = f64::NEG_INFINITY;
        for u in &self.usage {
            min_u = min_u.min(u.utilization);
            max_u = max_u.max(u.utilization);
        }
        if self.usage.is_empty() {
            min_u = 1.0;
            max_u = 1.0;
        }
        TraceSummary {
            nominal_chips: self.config.nominal_chip_count(),
            instantiated_chips: self.usage.len(),
            photons: self.photons.len(),
            events: self.events.len(),
            violations: self.violations.len(),
            min_utilization: min_u,
            max_utilization: max_u,
        }
    }

    /// One JSON object per line: t, chip, action, and the action's fields.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            let chip = json!([e.chip.stage, e.chip.copy, e.chip.row, e.chip.col]);
            let line = match &e.action {
                TraceAction::Initialize => {
                    json!({"t": e.t, "chip": chip, "action": "initialize"})
                }
                TraceAction::Measure { duration } => {
                    json!({"t": e.t, "chip": chip, "action": "measure", "duration": duration})
                }
                TraceAction::Pass { photon, role } => {
                    json!({"t": e.t, "chip": chip, "action": "pass",
                           "photon_id": photon, "role": role.label().to_string()})
                }
                TraceAction::Hold { photon: Some(p) } => {
                    json!({"t": e.t, "chip": chip, "action": "hold", "photon_id": p})
                }
                TraceAction::Hold { photon: None } => {
                    json!({"t": e.t, "chip": chip, "action": "hold"})
                }
                TraceAction::EmptySlot { role } => {
                    json!({"t": e.t, "chip": chip, "action": "empty",
                           "role": role.label().to_string()})
                }
                TraceAction::Bypass { photon, port } => {
                    json!({"t": e.t, "chip": chip, "action": "bypass",
                           "photon_id": photon, "port": port.label().to_string()})
                }
            };
            out.push_str(&line.to_string());
            out.push('\n');
        }
        out
    }
}

struct Window {
    w: i64,
}

#[derive(Default)]
struct CopyPlan {
    windows: Vec<Window>,
    duties: BTreeSet<i64>,
    arrivals: BTreeMap<i64, Vec<(u32, ChipPort)>>,
    crossings: BTreeMap<i64, Vec<(u32, ChipPort)>>,
}

pub fn run(config: &NetworkConfig) -> Result<EventTrace, PrepNetError> {
    run_with_mutation(config, None)
}

pub fn run_with_mutation(
    config: &NetworkConfig,
    mutation: Option<&Mutation>,
) -> Result<EventTrace, PrepNetError> {
    config.validate()?;
    let region = config.region()?;
    let index = region.site_index();
    let layout = build_network(config)?;
    let zmax = config.zmax();
    let g = config.gamma as i64;

    let mut programs: BTreeMap<(u8, i64, i64), ChipProgram> = BTreeMap::new();
    for chip in &layout.chips {
        programs
            .entry((chip.stage, chip.row, chip.col))
            .or_insert_with(|| {
                ChipProgram::new(config.phase(chip.stage, chip.row, chip.col), chip.stage % 2 == 0)
            });
    }
    if let Some(Mutation::SwapSymbols { stage, row, col, a, b }) = mutation {
        let program = programs
            .get_mut(&(*stage, *row, *col))
            .ok_or(PrepNetError::UnknownChip { stage: *stage, row: *row, col: *col })?;
        program.swap_symbols(*a, *b);
    }

    let mut plans: BTreeMap<ChipId, CopyPlan> =
        layout.chips.iter().map(|c| (*c, CopyPlan::default())).collect();

    // Check windows and the hold duty each one hands to the next copy.
    for stage in 1..=4u8 {
        for &(x, y) in &config.full_lines() {
            let r = stage_residue(stage, x, y);
            let mut z_w = r;
            while z_w <= zmax {
                let j = (z_w - r).div_euclid(4);
                let w = config.window_time(stage, x, y, z_w);
                let owner = ChipId { stage, copy: j.rem_euclid(g) as u32, row: x, col: y };
                plans.get_mut(&owner).expect("chip built").windows.push(Window { w });
                let executor =
                    ChipId { stage, copy: (j + 1).rem_euclid(g) as u32, row: x, col: y };
                plans.get_mut(&executor).expect("chip built").duties.insert(w + 6);
                z_w += 4;
            }
        }
    }

    // Photon itineraries.
    let mut photons = Vec::with_capacity(index.len());
    for (i, &site) in index.sites().iter().enumerate() {
        let id = i as u32;
        let rate = classify_site(site).rate().expect("indexed sites are qubits");
        let basis = match rate {
            RateClass::Half => InitBasis::X,
            RateClass::Full => InitBasis::Z,
        };
        photons.push(PhotonPulse { id, site, basis, emission: config.emission_time(site) });

        match rate {
            RateClass::Full => {
                let (x, y, z) = (site.x, site.y, site.z);
                for stage in 1..=4u8 {
                    let r = stage_residue(stage, x, y);
                    let t = config.arrival_time(site, stage);
                    // Role by height class: the chip sees this photon as the
                    // center, left arm, held photon, or right arm of one of
                    // its windows.
                    let (z_w, hold) = match (z - r).rem_euclid(4) {
                        0 => (z, false),
                        1 => (z - 1, false),
                        2 => (z - 2, true),
                        3 => (z + 1, false),
                        _ => unreachable!(),
                    };
                    let j = (z_w - r).div_euclid(4);
                    let copy = if hold { (j + 1).rem_euclid(g) } else { j.rem_euclid(g) };
                    let chip = ChipId { stage, copy: copy as u32, row: x, col: y };
                    plans
                        .get_mut(&chip)
                        .expect("full lines have chips")
                        .arrivals
                        .entry(t)
                        .or_default()
                        .push((id, ChipPort::Central));
                }
            }
            RateClass::Half => {
                for stage in 1..=4u8 {
                    let axis = transverse_axis(stage);
                    let mut matched: Option<(i64, i64, i64)> = None;
                    let mut other: Option<(i64, i64, i64)> = None;
                    for sigma in [1i64, -1] {
                        let n = site.offset(axis, sigma);
                        if !config.line_in_range(n.x, n.y) {
                            continue;
                        }
                        if (site.z - stage_residue(stage, n.x, n.y)).rem_euclid(4) == 0 {
                            matched = Some((n.x, n.y, sigma));
                        } else {
                            other = Some((n.x, n.y, sigma));
                        }
                    }
                    let misrouted = matches!(
                        mutation,
                        Some(Mutation::MisroutePhoton { photon, stage: s })
                            if *photon == id && *s == stage
                    );
                    let target = if misrouted { other } else { matched };
                    let Some((cx, cy, sigma)) = target else { continue };
                    let t = config.arrival_time(site, stage);
                    let r_c = stage_residue(stage, cx, cy);
                    let copy = (site.z - r_c).div_euclid(4).rem_euclid(g) as u32;
                    let port = if sigma > 0 { ChipPort::Bottom } else { ChipPort::Upper };
                    let chip = ChipId { stage, copy, row: cx, col: cy };
                    plans
                        .get_mut(&chip)
                        .expect("in-range full line")
                        .arrivals
                        .entry(t)
                        .or_default()
                        .push((id, port));

                    // After service at an even stage the photon leaves the
                    // region across the other neighbor chip's bypass port.
                    if misrouted || stage % 2 == 1 {
                        continue;
                    }
                    if let Some((ox, oy, _)) = other {
                        let r_o = stage_residue(stage, ox, oy);
                        let (cross_port, cross_copy) = if sigma > 0 {
                            // Crossing the upper port during the hold step of
                            // the window two below, run by the next copy.
                            let j = (site.z - 2 - r_o).div_euclid(4);
                            (ChipPort::Upper, (j + 1).rem_euclid(g) as u32)
                        } else {
                            // Crossing the bottom port during the right-arm
                            // step of the window two above.
                            let j = (site.z + 2 - r_o).div_euclid(4);
                            (ChipPort::Bottom, j.rem_euclid(g) as u32)
                        };
                        let cross = ChipId { stage, copy: cross_copy, row: ox, col: oy };
                        plans
                            .get_mut(&cross)
                            .expect("in-range full line")
                            .crossings
                            .entry(t + 1)
                            .or_default()
                            .push((id, cross_port));
                    }
                }
            }
        }
    }

    if let Some(Mutation::DuplicatePhoton { photon }) = mutation {
        for plan in plans.values_mut() {
            for list in plan.arrivals.values_mut() {
                if let Some(&(p, port)) = list.iter().find(|(p, _)| p == photon) {
                    list.push((p, port));
                }
            }
        }
    }

    let mut events = Vec::new();
    let mut violations = Vec::new();
    let mut usage = Vec::new();
    for (&chip, plan) in &plans {
        let program = &programs[&(chip.stage, chip.row, chip.col)];
        usage.push(walk_copy(chip, program, plan, g, &mut events, &mut violations));
    }
    events.sort_by(|a, b| (a.t, a.chip).cmp(&(b.t, b.chip)));
    violations.sort_by(|a, b| (a.t, a.chip, a.kind).cmp(&(b.t, b.chip, b.kind)));

    Ok(EventTrace { config: *config, events, violations, usage, photons })
}

/// Replay one chip copy's schedule, emitting its events and flagging
/// protocol violations. Steps inside a window block follow the check state
/// machine; arrivals outside any block (stream-edge positions whose window
/// center falls outside the region) pass through without opening a check.
fn walk_copy(
    chip: ChipId,
    program: &ChipProgram,
    plan: &CopyPlan,
    gamma: i64,
    events: &mut Vec<TraceEvent>,
    violations: &mut Vec<Violation>,
) -> ChipUsage {
    let mut steps: BTreeSet<i64> = BTreeSet::new();
    for win in &plan.windows {
        steps.extend((win.w - 1)..=(win.w + 4 + gamma));
    }
    steps.extend(plan.duties.iter().copied());
    steps.extend(plan.arrivals.keys().copied());
    steps.extend(plan.crossings.keys().copied());

    let mut busy: BTreeSet<i64> = BTreeSet::new();
    let mut open = false;
    let mut loaded = 0usize;
    let mut wi = 0usize;

    let mut push_event = |busy: &mut BTreeSet<i64>, t: i64, action: TraceAction| {
        busy.insert(t);
        events.push(TraceEvent { t, chip, action });
    };

    for &t in &steps {
        while wi < plan.windows.len() && t > plan.windows[wi].w + 4 + gamma {
            wi += 1;
        }
        let offset = plan.windows.get(wi).filter(|win| t >= win.w - 1).map(|win| t - win.w);
        let in_block = offset.is_some();
        let action = program.action_at(t);

        // Bypass crossings ride a passive fiber past the module.
        if let Some(crossers) = plan.crossings.get(&t) {
            for &(photon, port) in crossers {
                if action.bypass == Some(port) {
                    push_event(&mut busy, t, TraceAction::Bypass { photon, port });
                } else {
                    violations.push(Violation {
                        kind: ViolationKind::UnservedPhoton,
                        t,
                        chip,
                        photons: vec![photon],
                    });
                }
            }
        }

        let arrivals = plan.arrivals.get(&t).cloned().unwrap_or_default();

        // Measurement continuation steps (redundancy > 1): the atom is busy.
        if offset.is_some_and(|off| off >= 6) {
            for (photon, _) in arrivals {
                violations.push(Violation {
                    kind: ViolationKind::PhotonDuringMeasure,
                    t,
                    chip,
                    photons: vec![photon],
                });
            }
            continue;
        }

        match action.symbol {
            SwitchSymbol::I => {
                for &(photon, _) in &arrivals {
                    violations.push(Violation {
                        kind: ViolationKind::PhotonDuringInit,
                        t,
                        chip,
                        photons: vec![photon],
                    });
                }
                if in_block {
                    if open && loaded > 0 {
                        violations.push(Violation {
                            kind: ViolationKind::InitDuringOpenCheck,
                            t,
                            chip,
                            photons: vec![],
                        });
                    }
                    open = true;
                    loaded = 0;
                    push_event(&mut busy, t, TraceAction::Initialize);
                }
            }
            SwitchSymbol::M => {
                for &(photon, _) in &arrivals {
                    violations.push(Violation {
                        kind: ViolationKind::PhotonDuringMeasure,
                        t,
                        chip,
                        photons: vec![photon],
                    });
                }
                if in_block {
                    push_event(&mut busy, t, TraceAction::Measure { duration: gamma });
                    busy.extend(t..t + gamma);
                    if open {
                        open = false;
                    } else {
                        violations.push(Violation {
                            kind: ViolationKind::CheckWithoutInit,
                            t,
                            chip,
                            photons: vec![],
                        });
                    }
                }
            }
            sym => {
                let port = sym.port().expect("serving symbols name a port");
                let mut served = Vec::new();
                for &(photon, p) in &arrivals {
                    if p == port {
                        served.push(photon);
                    } else {
                        violations.push(Violation {
                            kind: ViolationKind::UnservedPhoton,
                            t,
                            chip,
                            photons: vec![photon],
                        });
                    }
                }
                if served.len() > 1 {
                    violations.push(Violation {
                        kind: ViolationKind::Collision,
                        t,
                        chip,
                        photons: served.clone(),
                    });
                }
                if sym == SwitchSymbol::H {
                    if let Some(&photon) = served.first() {
                        push_event(&mut busy, t, TraceAction::Hold { photon: Some(photon) });
                        if in_block && open && loaded > 0 {
                            violations.push(Violation {
                                kind: ViolationKind::HoldDuringOpenCheck,
                                t,
                                chip,
                                photons: vec![photon],
                            });
                        }
                    } else if plan.duties.contains(&t) {
                        push_event(&mut busy, t, TraceAction::Hold { photon: None });
                    }
                } else if let Some(&photon) = served.first() {
                    push_event(&mut busy, t, TraceAction::Pass { photon, role: sym });
                    if in_block {
                        if open {
                            loaded += 1;
                        } else {
                            violations.push(Violation {
                                kind: ViolationKind::CheckWithoutInit,
                                t,
                                chip,
                                photons: vec![photon],
                            });
                        }
                    }
                } else if in_block && (0..=4).contains(&offset.expect("in block")) {
                    push_event(&mut busy, t, TraceAction::EmptySlot { role: sym });
                }
            }
        }
    }

    // Occupancy over the copy's duty span. With gamma = 1 the window blocks
    // and hold steps tile the span gaplessly, so utilization is exactly 1.
    let starts = [
        plan.windows.first().map(|win| win.w - 1),
        plan.duties.first().copied(),
    ];
    let ends = [
        plan.windows.last().map(|win| win.w + 4 + gamma),
        plan.duties.last().copied(),
    ];
    let span_start = starts.into_iter().flatten().min();
    let span_end = ends.into_iter().flatten().max();
    match (span_start, span_end) {
        (Some(a), Some(b)) if b >= a => {
            let active = busy.range(a..=b).count() as u64;
            let span = (b - a + 1) as u64;
            ChipUsage {
                chip,
                active_steps: active,
                span_steps: span,
                utilization: active as f64 / span as f64,
            }
        }
        _ => ChipUsage { chip, active_steps: 0, span_steps: 0, utilization: 1.0 },
    }
}

/// One five-photon parity projection realized by a measured window.
/// `photons` and `sites` are ordered [left, upper, center, bottom, right];
/// absent members (region boundary) are None. The measured operator is X
/// on the center qubit and Z on every present arm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectionEvent {
    pub t: i64,
    pub chip: ChipId,
    pub photons: [Option<u32>; 5],
    pub center: u32,
    pub sites: [Option<[i64; 3]>; 5],
    pub operator: PauliOperator,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectionSchedule {
    pub events: Vec<ProjectionEvent>,
    /// Windows that opened but never completed a measurable check.
    pub dropped: usize,
}

impl ProjectionSchedule {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            let line = json!({
                "t": e.t,
                "chip": [e.chip.stage, e.chip.copy, e.chip.row, e.chip.col],
                "photons": e.photons,
                "center": e.center,
                "sites": e.sites,
            });
            out.push_str(&line.to_string());
            out.push('\n');
        }
        out
    }
}

/// Extract the realized projections from a trace: each initialize/measure
/// window becomes one event, stamped with the measurement completion time.
pub fn schedule_to_projections(trace: &EventTrace) -> ProjectionSchedule {
    let mut per_chip: BTreeMap<ChipId, Vec<(i64, &TraceAction)>> = BTreeMap::new();
    for e in &trace.events {
        per_chip.entry(e.chip).or_default().push((e.t, &e.action));
    }

    // Slot order [L, U, C, B, R] matches the member sites left to right.
    let slot_of = |role: SwitchSymbol| match role {
        SwitchSymbol::L => Some(0),
        SwitchSymbol::U => Some(1),
        SwitchSymbol::C => Some(2),
        SwitchSymbol::B => Some(3),
        SwitchSymbol::R => Some(4),
        _ => None,
    };

    let mut events = Vec::new();
    let mut dropped = 0usize;
    for (chip, list) in per_chip {
        let mut open: Option<[Option<u32>; 5]> = None;
        for (t, action) in list {
            match action {
                TraceAction::Initialize => {
                    if open.is_some() {
                        dropped += 1;
                    }
                    open = Some([None; 5]);
                }
                TraceAction::Pass { photon, role } => {
                    if let (Some(slots), Some(slot)) = (open.as_mut(), slot_of(*role)) {
                        slots[slot] = Some(*photon);
                    }
                }
                TraceAction::Measure { duration } => {
                    if let Some(slots) = open.take() {
                        let Some(center) = slots[2] else {
                            dropped += 1;
                            continue;
                        };
                        let mut operator = PauliOperator::single_x(center as usize);
                        let mut sites = [None; 5];
                        for (i, member) in slots.iter().enumerate() {
                            if let Some(p) = member {
                                let s = trace.photons[*p as usize].site;
                                sites[i] = Some([s.x, s.y, s.z]);
                                if i != 2 {
                                    operator.z_support.insert(*p as usize);
                                }
                            }
                        }
                        events.push(ProjectionEvent {
                            t: t + duration - 1,
                            chip,
                            photons: slots,
                            center,
                            sites,
                            operator,
                        });
                    }
                }
                _ => {}
            }
        }
        if open.is_some() {
            dropped += 1;
        }
    }
    events.sort_by(|a, b| (a.t, a.chip).cmp(&(b.t, b.chip)));
    ProjectionSchedule { events, dropped }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolatedGenerator {
    pub index: usize,
    pub site: [i64; 3],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub qubits: usize,
    pub projections: usize,
    pub satisfied: usize,
    pub frame_satisfied: usize,
    pub violated: usize,
    pub violations: Vec<ViolatedGenerator>,
}

/// Run the network, apply its projections to the product state the sources
/// emit, and check the result against the full target generator set.
pub fn verify_prepared_state(config: &NetworkConfig) -> Result<VerificationReport, PrepNetError> {
    verify_prepared_state_with(config, &BasisAssignment::FromRateClasses)
}

/// Same, with an explicit initial product state (negative controls).
pub fn verify_prepared_state_with(
    config: &NetworkConfig,
    assignment: &BasisAssignment,
) -> Result<VerificationReport, PrepNetError> {
    let trace = run(config)?;
    if !trace.violations.is_empty() {
        return Err(PrepNetError::Violations(trace.violations.len()));
    }
    let schedule = schedule_to_projections(&trace);

    let region = config.region()?;
    let index = region.site_index();
    let mut tableau = StabilizerTableau::init_product_state(&region, assignment)?;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    for event in &schedule.events {
        tableau.measure_pauli(&event.operator, &mut rng)?;
    }

    let targets = target_stabilizer_group(&region)?;
    let summary = tableau.verify_target(&targets)?;
    let violations = summary
        .violations
        .iter()
        .map(|&i| {
            let s = index.site(i);
            ViolatedGenerator { index: i, site: [s.x, s.y, s.z] }
        })
        .collect();
    Ok(VerificationReport {
        qubits: index.len(),
        projections: schedule.events.len(),
        satisfied: summary.satisfied,
        frame_satisfied: summary.frame_satisfied,
        violated: summary.violated,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{stabilizer_generator, SiteKind};

    fn config(nx: i64, ny: i64, layers: i64, gamma: u32) -> NetworkConfig {
        NetworkConfig::new(nx, ny, layers, gamma, 7).unwrap()
    }

    #[test]
    fn chip_counts_match_the_sizing_formula() {
        assert_eq!(config(2, 2, 4, 5).nominal_chip_count(), 120);
        assert_eq!(config(40, 20, 1, 1).nominal_chip_count(), 3320);
        assert_eq!(config(1, 1, 1, 1).nominal_chip_count(), 8);
        let layout = build_network(&config(2, 2, 4, 5)).unwrap();
        assert_eq!(layout.instantiated_chip_count() as u64, 2 * layout.nominal_chip_count());
    }

    #[test]
    fn residues_pair_heights_across_stages() {
        let cfg = config(3, 3, 2, 1);
        for &(x, y) in &cfg.full_lines() {
            let r1 = stage_residue(1, x, y);
            let r3 = stage_residue(3, x, y);
            assert_eq!(stage_residue(2, x, y), (r1 + 2).rem_euclid(4));
            assert_eq!(stage_residue(4, x, y), (r3 + 2).rem_euclid(4));
            // Opposite parities: across the four stages every height class
            // gets exactly one center role and one hold.
            assert_eq!((r1 + r3).rem_euclid(2), 1);
        }
    }

    #[test]
    fn neighbor_lines_split_the_transverse_arms() {
        let cfg = config(3, 3, 2, 1);
        let region = cfg.region().unwrap();
        for site in region.qubit_sites() {
            if classify_site(site).rate() != Some(RateClass::Half) {
                continue;
            }
            for stage in 1..=4u8 {
                let axis = transverse_axis(stage);
                let mut matches = 0;
                let mut lines = 0;
                for sigma in [1, -1] {
                    let n = site.offset(axis, sigma);
                    if cfg.line_in_range(n.x, n.y) {
                        lines += 1;
                        if (site.z - stage_residue(stage, n.x, n.y)).rem_euclid(4) == 0 {
                            matches += 1;
                        }
                    }
                }
                assert!(matches <= 1);
                if lines == 2 {
                    assert_eq!(matches, 1, "interior arm at {site:?} stage {stage}");
                }
            }
        }
    }

    #[test]
    fn programs_have_even_phases_and_cover_the_chart() {
        let cfg = config(4, 4, 2, 1);
        let programs = generate_programs(&cfg).unwrap();
        for (chip, program) in &programs {
            assert_eq!(program.phase % 2, 0);
            assert_eq!(program.decorated, chip.stage % 2 == 0);
            if chip.stage <= 2 {
                assert!(program.row_label().is_some(), "chip {chip:?} off the chart");
            }
        }
        // Going down one chip column with the two stages interleaved, eight
        // consecutive slots realize all eight chart programs.
        let mut seen = BTreeSet::new();
        for y in [8, 6, 4, 2] {
            for stage in [1u8, 2] {
                let p = &programs[&ChipId { stage, copy: 0, row: 1, col: y }];
                seen.insert(p.row_label().unwrap());
            }
        }
        assert_eq!(seen.len(), 8);
    }

    #[test]
    fn clean_run_is_violation_free_with_full_occupancy() {
        let trace = run(&config(2, 2, 4, 1)).unwrap();
        assert!(trace.violations.is_empty(), "{:?}", trace.violations);
        assert_eq!(trace.usage.len(), 48);
        for u in &trace.usage {
            assert_eq!(u.utilization, 1.0, "chip {:?} idled", u.chip);
            assert_eq!(u.active_steps, u.span_steps);
        }
    }

    #[test]
    fn events_are_ordered_with_exclusive_modules() {
        let trace = run(&config(2, 2, 4, 1)).unwrap();
        let keys: Vec<_> = trace.events.iter().map(|e| (e.t, e.chip)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        // At most one module interaction per chip per step; a bypass may
        // coincide with one, nothing else may.
        let mut last: Option<(i64, ChipId)> = None;
        for e in &trace.events {
            if matches!(e.action, TraceAction::Bypass { .. }) {
                continue;
            }
            assert_ne!(last, Some((e.t, e.chip)), "double booking at {e:?}");
            last = Some((e.t, e.chip));
        }
    }

    #[test]
    fn itineraries_run_forward_through_the_stages() {
        let trace = run(&config(2, 2, 4, 1)).unwrap();
        let mut stops: BTreeMap<u32, Vec<(u8, i64)>> = BTreeMap::new();
        for e in &trace.events {
            let photon = match e.action {
                TraceAction::Pass { photon, .. } => Some(photon),
                TraceAction::Hold { photon } => photon,
                _ => None,
            };
            if let Some(p) = photon {
                stops.entry(p).or_default().push((e.chip.stage, e.t));
            }
        }
        for (p, list) in stops {
            let pulse = trace.photons[p as usize];
            for window in list.windows(2) {
                assert!(window[0].0 < window[1].0, "photon {p} revisited a stage");
            }
            for (stage, t) in list {
                assert_eq!(t, trace.config.arrival_time(pulse.site, stage));
            }
        }
    }

    #[test]
    fn full_photons_are_held_exactly_once() {
        let trace = run(&config(2, 2, 4, 1)).unwrap();
        let mut passes: BTreeMap<u32, Vec<u8>> = BTreeMap::new();
        let mut holds: BTreeMap<u32, Vec<u8>> = BTreeMap::new();
        for e in &trace.events {
            match e.action {
                TraceAction::Pass { photon, .. } => {
                    passes.entry(photon).or_default().push(e.chip.stage)
                }
                TraceAction::Hold { photon: Some(p) } => {
                    holds.entry(p).or_default().push(e.chip.stage)
                }
                _ => {}
            }
        }
        for pulse in &trace.photons {
            if pulse.basis != InitBasis::Z {
                continue;
            }
            let held = holds.get(&pulse.id).cloned().unwrap_or_default();
            let passed = passes.get(&pulse.id).cloned().unwrap_or_default();
            assert_eq!(held.len(), 1, "photon {} holds {held:?}", pulse.id);
            assert_eq!(passed.len(), 3, "photon {} passes {passed:?}", pulse.id);
            assert!(!passed.contains(&held[0]), "held stage also passed");
        }
    }

    #[test]
    fn bypasses_only_cross_decorated_stages() {
        let trace = run(&config(2, 2, 4, 1)).unwrap();
        let programs = generate_programs(&trace.config).unwrap();
        let mut crossings = 0;
        for e in &trace.events {
            if let TraceAction::Bypass { port, .. } = e.action {
                crossings += 1;
                assert!(e.chip.stage % 2 == 0, "bypass at odd stage: {e:?}");
                let action = programs[&e.chip].action_at(e.t);
                assert_eq!(action.bypass, Some(port));
            }
        }
        assert!(crossings > 0);
    }

    #[test]
    fn projections_reproduce_the_target_generators() {
        let cfg = config(2, 2, 4, 1);
        let trace = run(&cfg).unwrap();
        let schedule = schedule_to_projections(&trace);
        assert_eq!(schedule.dropped, 0);

        let region = cfg.region().unwrap();
        let index = region.site_index();
        let full_line_qubits: Vec<_> = index
            .sites()
            .iter()
            .filter(|s| line_rate(s.x, s.y) == RateClass::Full)
            .collect();
        assert_eq!(schedule.events.len(), full_line_qubits.len());
        assert_eq!(schedule.events.len(), 108);

        let mut expected = BTreeSet::new();
        for &&site in &full_line_qubits {
            let generator = stabilizer_generator(site, &region, &index).unwrap();
            expected.insert((generator.x_support.clone(), generator.z_support.clone()));
        }
        let mut realized = BTreeSet::new();
        for event in &schedule.events {
            let center = index.site(event.center as usize);
            let generator = stabilizer_generator(center, &region, &index).unwrap();
            assert_eq!(event.operator.x_support, generator.x_support);
            assert_eq!(event.operator.z_support, generator.z_support, "center {center:?}");
            realized
                .insert((event.operator.x_support.clone(), event.operator.z_support.clone()));
        }
        assert_eq!(realized, expected);
    }

    #[test]
    fn interior_photons_join_the_expected_number_of_checks() {
        let cfg = config(2, 2, 4, 1);
        let trace = run(&cfg).unwrap();
        let schedule = schedule_to_projections(&trace);
        let mut memberships: BTreeMap<u32, usize> = BTreeMap::new();
        for event in &schedule.events {
            for p in event.photons.iter().flatten() {
                *memberships.entry(*p).or_default() += 1;
            }
        }
        let zmax = 2 * cfg.layers;
        for pulse in &trace.photons {
            let s = pulse.site;
            let n = memberships.get(&pulse.id).copied().unwrap_or(0);
            match classify_site(s).rate().unwrap() {
                RateClass::Full => {
                    if s.z >= 1 && s.z <= zmax - 1 {
                        assert_eq!(n, 3, "full photon {:?}", s);
                    } else {
                        assert_eq!(n, 2, "edge full photon {:?}", s);
                    }
                }
                RateClass::Half => {
                    let interior = s.x >= 1
                        && s.x <= 2 * cfg.nx - 1
                        && s.y >= 1
                        && s.y <= 2 * cfg.ny - 1;
                    if interior {
                        assert_eq!(n, 4, "half photon {:?}", s);
                    } else {
                        assert!(n < 4, "boundary half photon {:?}", s);
                    }
                }
            }
        }
    }

    #[test]
    fn redundant_copies_share_the_load() {
        let cfg = config(2, 2, 4, 2);
        let trace = run(&cfg).unwrap();
        assert!(trace.violations.is_empty(), "{:?}", trace.violations);
        let min = trace.usage.iter().map(|u| u.utilization).fold(f64::INFINITY, f64::min);
        let max = trace.usage.iter().map(|u| u.utilization).fold(0.0, f64::max);
        assert!(min >= 0.5 && min < 0.6, "min utilization {min}");
        assert!(max <= 1.0);

        // Redundancy reshuffles the work without changing the physics.
        let baseline = run(&config(2, 2, 4, 1)).unwrap();
        let a = schedule_to_projections(&baseline);
        let b = schedule_to_projections(&trace);
        let ops = |s: &ProjectionSchedule| {
            s.events
                .iter()
                .map(|e| (e.operator.x_support.clone(), e.operator.z_support.clone()))
                .collect::<BTreeSet<_>>()
        };
        assert_eq!(ops(&a), ops(&b));
        assert_eq!(a.events.len(), b.events.len());
    }

    #[test]
    fn swapped_symbols_trip_the_monitor() {
        let cfg = config(2, 2, 4, 1);
        let mutation = Mutation::SwapSymbols {
            stage: 1,
            row: 1,
            col: 2,
            a: SwitchSymbol::M,
            b: SwitchSymbol::C,
        };
        let trace = run_with_mutation(&cfg, Some(&mutation)).unwrap();
        assert!(trace
            .violations
            .iter()
            .any(|v| v.kind == ViolationKind::PhotonDuringMeasure
                && v.chip.row == 1
                && v.chip.col == 2));
        let swapped_holds = Mutation::SwapSymbols {
            stage: 1,
            row: 1,
            col: 2,
            a: SwitchSymbol::L,
            b: SwitchSymbol::H,
        };
        let trace = run_with_mutation(&cfg, Some(&swapped_holds)).unwrap();
        assert!(trace
            .violations
            .iter()
            .any(|v| v.kind == ViolationKind::HoldDuringOpenCheck));
    }

    #[test]
    fn duplicated_photons_collide() {
        let cfg = config(2, 2, 4, 1);
        let region = cfg.region().unwrap();
        let index = region.site_index();
        let photon = index.index_of(LatticeSite::new(1, 2, 4)).unwrap() as u32;
        let trace =
            run_with_mutation(&cfg, Some(&Mutation::DuplicatePhoton { photon })).unwrap();
        assert!(trace.violations.iter().any(|v| v.kind == ViolationKind::Collision));
    }

    #[test]
    fn misrouted_photons_are_flagged() {
        let cfg = config(2, 2, 4, 1);
        let region = cfg.region().unwrap();
        let index = region.site_index();
        let site = LatticeSite::new(1, 1, 2);
        assert!(matches!(classify_site(site), SiteKind::Face { .. }));
        let photon = index.index_of(site).unwrap() as u32;
        let trace =
            run_with_mutation(&cfg, Some(&Mutation::MisroutePhoton { photon, stage: 2 }))
                .unwrap();
        assert!(!trace.violations.is_empty());
        assert!(trace.violations.iter().all(|v| v.photons.contains(&photon)));
    }

    #[test]
    fn prepared_state_satisfies_every_generator() {
        let report = verify_prepared_state(&config(2, 2, 4, 1)).unwrap();
        assert_eq!(report.qubits, 164);
        assert_eq!(report.projections, 108);
        assert_eq!(report.violated, 0, "violations: {:?}", report.violations);
        assert_eq!(report.satisfied + report.frame_satisfied, report.qubits);
    }

    #[test]
    fn all_zeros_control_fails_the_in_plane_generators() {
        let report =
            verify_prepared_state_with(&config(2, 2, 4, 1), &BasisAssignment::UniformZ).unwrap();
        // Every generator centered on a half-rate line (the checks the
        // network never measures) needs the |+> initialization.
        assert_eq!(report.violated, 56);
        assert_eq!(report.satisfied + report.frame_satisfied, report.qubits - 56);
        for v in &report.violations {
            let [x, y, _] = v.site;
            assert_eq!(line_rate(x, y), RateClass::Half);
        }
    }

    #[test]
    fn single_cell_network_verifies() {
        let report = verify_prepared_state(&config(1, 1, 1, 1)).unwrap();
        assert_eq!(report.violated, 0);
        assert!(report.projections > 0);
    }

    #[test]
    fn runs_are_deterministic_and_serializable() {
        let cfg = config(2, 2, 4, 1);
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a.to_jsonl(), b.to_jsonl());
        assert_eq!(verify_prepared_state(&cfg).unwrap(), verify_prepared_state(&cfg).unwrap());
        for line in a.to_jsonl().lines().take(200) {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert!(v.get("t").is_some() && v.get("chip").is_some() && v.get("action").is_some());
            assert_eq!(v["chip"].as_array().unwrap().len(), 4);
        }
        let schedule = schedule_to_projections(&a);
        for line in schedule.to_jsonl().lines().take(50) {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert_eq!(v["photons"].as_array().unwrap().len(), 5);
            assert_eq!(v["sites"].as_array().unwrap().len(), 5);
        }
    }
}
