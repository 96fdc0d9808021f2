//! Closed-form resource arithmetic: chip counts, code-distance selection,
//! logical footprints, magic-state distillation yields, and the per-gate
//! failure integral over elementary cells.
//!
//! Everything here is pure arithmetic on the input parameters, so the
//! functions are deterministic and cheap. `full_report` bundles the whole
//! chain into one serializable report in which every headline number carries
//! the operation and formula that produced it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ResourceError {
    #[error("physical rate {p} is not below the threshold {p_th}, no protection is possible")]
    NoProtection { p: f64, p_th: f64 },
    #[error("rate {0} must lie in [0, {1})")]
    RateOutOfRange(f64, f64),
    #[error("target error {0} must lie in (0, 1)")]
    TargetOutOfRange(f64),
    #[error("dimension {0} must be positive")]
    NonPositiveDimension(i64),
    #[error("code distance {0} must be odd")]
    DistanceNotOdd(u32),
}

/// Error-suppression model: every two units of code distance buy one factor
/// of x = p_th / p in the encoded error rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingModel {
    pub p: f64,
    pub p_th: f64,
}

pub const DEFAULT_THRESHOLD: f64 = 6.7e-3;

impl ScalingModel {
    pub fn new(p: f64, p_th: f64) -> Result<ScalingModel, ResourceError> {
        if !(p > 0.0 && p < p_th) {
            return Err(ResourceError::NoProtection { p, p_th });
        }
        Ok(ScalingModel { p, p_th })
    }

    /// Suppression factor per two units of distance.
    pub fn suppression_factor(&self) -> f64 {
        self.p_th / self.p
    }
}

/// Photonic chips for an Nx x Ny cell cross-section with replication gamma.
pub fn chip_count(nx: i64, ny: i64, gamma: i64) -> Result<i64, ResourceError> {
    for v in [nx, ny, gamma] {
        if v <= 0 {
            return Err(ResourceError::NonPositiveDimension(v));
        }
    }
    Ok(gamma * (4 * nx * ny + 2 * (nx + ny)))
}

/// Smallest odd distance d with x^(-(d-1)/2) <= target. A relative slop of
/// 1e-9 keeps the comparison stable when the suppression factor is itself
/// the rounded quotient of two floats.
pub fn required_distance(model: &ScalingModel, target: f64) -> Result<u32, ResourceError> {
    if !(target > 0.0 && target < 1.0) {
        return Err(ResourceError::TargetOutOfRange(target));
    }
    let x = model.suppression_factor();
    let bound = target * (1.0 + 1e-9);
    let mut d = 1u32;
    loop {
        let achieved = x.powf(-f64::from((d - 1) / 2));
        if achieved <= bound {
            return Ok(d);
        }
        d += 2;
        if d > 100_001 {
            return Err(ResourceError::TargetOutOfRange(target));
        }
    }
}

/// Longest error chain a distance-d code corrects: (d - 1) / 2.
pub fn correctable_chain_length(distance: u32) -> u32 {
    (distance - 1) / 2
}

/// Cross-section geometry of one logical qubit at distance d: a defect pair
/// with separation s = d - 1 cells and square defects of side c, chosen as
/// the smallest c with perimeter 4c covering s. The pitch lambda = s + c is
/// the center-to-center spacing of logical sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParams {
    pub distance: u32,
    pub separation: u32,
    pub cross_section: u32,
    pub pitch: u32,
}

impl CodeParams {
    pub fn from_distance(distance: u32) -> Result<CodeParams, ResourceError> {
        if distance % 2 == 0 {
            return Err(ResourceError::DistanceNotOdd(distance));
        }
        let separation = distance - 1;
        let cross_section = separation.div_ceil(4);
        Ok(CodeParams {
            distance,
            separation,
            cross_section,
            pitch: separation + cross_section,
        })
    }

    /// Defect perimeter in cells.
    pub fn circumference(&self) -> u32 {
        4 * self.cross_section
    }

    /// True when the perimeter matches the separation exactly rather than
    /// through rounding, i.e. 4c = s.
    pub fn circumference_matches_separation(&self) -> bool {
        self.circumference() == self.separation
    }
}

/// Transverse cell footprint (width, height) of one logical qubit: the
/// defect pair spans two pitches across and one pitch down.
pub fn logical_footprint(params: &CodeParams) -> (u32, u32) {
    let lambda = params.separation + params.cross_section;
    (2 * lambda, lambda)
}

/// The two distillation circuit species: A feeds pi/8 rotations through a
/// 15-to-1 round, Y feeds the pi/4 corrections through a 7-to-1 round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Species {
    A,
    Y,
}

impl Species {
    /// Coefficient of the cubic error recursion p' = k p^3.
    pub fn cubing_coefficient(self) -> f64 {
        match self {
            Species::A => 35.0,
            Species::Y => 7.0,
        }
    }

    /// Inputs consumed per round; also the coefficient of the linearized
    /// rejection probability 1 - P = k p.
    pub fn inputs(self) -> u32 {
        match self {
            Species::A => 15,
            Species::Y => 7,
        }
    }

    /// Logical volume of one round in the given table edition.
    pub fn circuit_volume(self, edition: VolumeEdition) -> u32 {
        let table = GateVolumeTable::edition(edition);
        match self {
            Species::A => table.a_circuit,
            Species::Y => table.y_circuit,
        }
    }
}

/// Per-level distilled error rates [p0, p1, ..., p_levels] under the cubic
/// recursion p_{l+1} = k p_l^3. The list always starts with the injected
/// rate, so it has levels + 1 entries.
pub fn distill_error(p0: f64, levels: u32, species: Species) -> Result<Vec<f64>, ResourceError> {
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(ResourceError::RateOutOfRange(p0, 1.0));
    }
    let k = species.cubing_coefficient();
    let mut out = Vec::with_capacity(levels as usize + 1);
    out.push(p0);
    let mut p = p0;
    for _ in 0..levels {
        p = k * p.powi(3);
        out.push(p);
    }
    Ok(out)
}

/// Acceptance probability of one round fed with states of error p_prev:
/// 1 - k p_prev, each of the k inputs vetoing the round at leading order.
pub fn distill_success(p_prev: f64, species: Species) -> Result<f64, ResourceError> {
    let k = f64::from(species.inputs());
    if !(p_prev >= 0.0 && p_prev < 1.0 / k) {
        return Err(ResourceError::RateOutOfRange(p_prev, 1.0 / k));
    }
    Ok(1.0 - k * p_prev)
}

/// Expected first-level circuit equivalents per accepted output of an
/// L-level cascade: sum over levels l of inputs^(L-l) / P_l, where P_l is
/// the acceptance probability of level l.
pub fn circuits_required(p0: f64, levels: u32, species: Species) -> Result<f64, ResourceError> {
    let errors = distill_error(p0, levels, species)?;
    let branch = f64::from(species.inputs());
    let mut total = 0.0;
    for l in 1..=levels {
        let success = distill_success(errors[l as usize - 1], species)?;
        total += branch.powf(f64::from(levels - l)) / success;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeEdition {
    Original,
    Revised,
}

/// Logical volumes of the primitive gates, in cells of pitch-cubed scale.
/// The original edition deliberately overestimates; the revised edition
/// reflects tighter packing of the distillation circuits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateVolumeTable {
    pub cnot: u32,
    pub single_z: u32,
    pub single_x: u32,
    pub a_circuit: u32,
    pub y_circuit: u32,
}

impl GateVolumeTable {
    pub fn edition(edition: VolumeEdition) -> GateVolumeTable {
        match edition {
            VolumeEdition::Original => GateVolumeTable {
                cnot: 12,
                single_z: 2,
                single_x: 4,
                a_circuit: 336,
                y_circuit: 120,
            },
            VolumeEdition::Revised => GateVolumeTable {
                cnot: 16,
                single_z: 2,
                single_x: 4,
                a_circuit: 168,
                y_circuit: 60,
            },
        }
    }
}

/// Volume bill of one fault-tolerant pi/8 rotation, in logical cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TGateVolume {
    /// Distillation: 16 A rounds plus the 4 Y rounds consumed on average
    /// by the pi/4 corrections.
    pub distill: u32,
    /// Teleportation that consumes the ancilla: one Z-type primitive plus
    /// half an X-type primitive.
    pub teleport: u32,
    pub total: u32,
}

pub fn t_gate_volume(table: &GateVolumeTable) -> TGateVolume {
    let distill = 16 * table.a_circuit + 4 * table.y_circuit;
    let teleport = table.single_z + table.single_x / 2;
    TGateVolume {
        distill,
        teleport,
        total: distill + teleport,
    }
}

/// Failure probability of a region of Omega = pitch * total_cells
/// elementary cells when each fails independently with probability eps:
/// 1 - (1 - eps)^Omega, evaluated stably for tiny eps.
pub fn t_gate_error(eps: f64, pitch: u32, total_cells: u32) -> Result<f64, ResourceError> {
    if !(0.0..1.0).contains(&eps) {
        return Err(ResourceError::RateOutOfRange(eps, 1.0));
    }
    let omega = f64::from(pitch) * f64::from(total_cells);
    Ok(-f64::exp_m1(omega * f64::ln_1p(-eps)))
}

/// Logical qubits alive at once while one pi/8 ancilla distills: the
/// inputs^L leaves of the A cascade plus half those of the Y cascade.
pub fn logical_qubits_per_t(levels: u32) -> f64 {
    15f64.powf(f64::from(levels)) + 7f64.powf(f64::from(levels)) / 2.0
}

/// Inputs for a full architecture report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportInputs {
    /// Physical error rate per cell.
    pub p: f64,
    /// Threshold the scaling model is anchored to.
    pub p_th: f64,
    /// Target encoded error rate per step; also the per-cell rate fed to
    /// the gate failure integral once the distance achieves it.
    pub target: f64,
    /// Distillation levels in each cascade.
    pub levels: u32,
    /// Cross-section in cells; None takes the one-logical-qubit footprint.
    pub nx: Option<i64>,
    pub ny: Option<i64>,
    pub gamma: i64,
    pub edition: VolumeEdition,
}

impl Default for ReportInputs {
    fn default() -> ReportInputs {
        ReportInputs {
            p: 6.7e-5,
            p_th: DEFAULT_THRESHOLD,
            target: 1e-16,
            levels: 2,
            nx: None,
            ny: None,
            gamma: 1,
            edition: VolumeEdition::Original,
        }
    }
}

/// Operation and formula behind one reported number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub operation: String,
    pub formula: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub name: String,
    pub value: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub inputs: ReportInputs,
    pub distance: u32,
    pub correctable_chain: u32,
    pub code: CodeParams,
    pub footprint: (u32, u32),
    pub chips: i64,
    pub a_errors: Vec<f64>,
    pub a_success: Vec<f64>,
    pub a_circuits: f64,
    pub y_errors: Vec<f64>,
    pub y_success: Vec<f64>,
    pub y_circuits: f64,
    pub volume: TGateVolume,
    pub omega: f64,
    pub t_gate_error: f64,
    pub logical_qubits_per_t: f64,
    pub entries: Vec<ReportEntry>,
}

fn entry(name: &str, value: f64, operation: &str, formula: &str) -> ReportEntry {
    ReportEntry {
        name: name.into(),
        value,
        provenance: Provenance {
            operation: operation.into(),
            formula: formula.into(),
        },
    }
}

/// Bundle the whole arithmetic chain for one parameter point.
pub fn full_report(inputs: ReportInputs) -> Result<ResourceReport, ResourceError> {
    let model = ScalingModel::new(inputs.p, inputs.p_th)?;
    let distance = required_distance(&model, inputs.target)?;
    let code = CodeParams::from_distance(distance)?;
    let footprint = logical_footprint(&code);
    let nx = inputs.nx.unwrap_or(i64::from(footprint.0));
    let ny = inputs.ny.unwrap_or(i64::from(footprint.1));
    let chips = chip_count(nx, ny, inputs.gamma)?;
    let a_errors = distill_error(inputs.p, inputs.levels, Species::A)?;
    let y_errors = distill_error(inputs.p, inputs.levels, Species::Y)?;
    let per_level_success = |errors: &[f64], species| -> Result<Vec<f64>, ResourceError> {
        errors[..errors.len() - 1]
            .iter()
            .map(|&p| distill_success(p, species))
            .collect()
    };
    let a_success = per_level_success(&a_errors, Species::A)?;
    let y_success = per_level_success(&y_errors, Species::Y)?;
    let a_circuits = circuits_required(inputs.p, inputs.levels, Species::A)?;
    let y_circuits = circuits_required(inputs.p, inputs.levels, Species::Y)?;
    let table = GateVolumeTable::edition(inputs.edition);
    let volume = t_gate_volume(&table);
    let omega = f64::from(code.pitch) * f64::from(volume.total);
    let t_err = t_gate_error(inputs.target, code.pitch, volume.total)?;
    let per_t = logical_qubits_per_t(inputs.levels);
    let entries = vec![
        entry(
            "distance",
            f64::from(distance),
            "required_distance",
            "min odd d with x^(-(d-1)/2) <= target, x = p_th/p",
        ),
        entry(
            "correctable_chain",
            f64::from(correctable_chain_length(distance)),
            "correctable_chain_length",
            "(d - 1) / 2",
        ),
        entry(
            "footprint_width",
            f64::from(footprint.0),
            "logical_footprint",
            "2s + 2c",
        ),
        entry(
            "footprint_height",
            f64::from(footprint.1),
            "logical_footprint",
            "s + c",
        ),
        entry(
            "chips",
            chips as f64,
            "chip_count",
            "gamma (4 Nx Ny + 2 (Nx + Ny))",
        ),
        entry(
            "a_output_error",
            *a_errors.last().unwrap(),
            "distill_error",
            "p' = 35 p^3 per level",
        ),
        entry(
            "y_output_error",
            *y_errors.last().unwrap(),
            "distill_error",
            "p' = 7 p^3 per level",
        ),
        entry(
            "a_circuits",
            a_circuits,
            "circuits_required",
            "sum_l 15^(L-l) / P_l",
        ),
        entry(
            "y_circuits",
            y_circuits,
            "circuits_required",
            "sum_l 7^(L-l) / P_l",
        ),
        entry(
            "distill_volume",
            f64::from(volume.distill),
            "t_gate_volume",
            "16 V_A + 4 V_Y",
        ),
        entry(
            "teleport_volume",
            f64::from(volume.teleport),
            "t_gate_volume",
            "V_1z + V_1x / 2",
        ),
        entry("omega", omega, "t_gate_error", "pitch * total volume"),
        entry(
            "t_gate_error",
            t_err,
            "t_gate_error",
            "1 - (1 - eps)^omega",
        ),
        entry(
            "logical_qubits_per_t",
            per_t,
            "logical_qubits_per_t",
            "15^L + 7^L / 2",
        ),
    ];
    Ok(ResourceReport {
        inputs,
        distance,
        correctable_chain: correctable_chain_length(distance),
        code,
        footprint,
        chips,
        a_errors,
        a_success,
        a_circuits,
        y_errors,
        y_success,
        y_circuits,
        volume,
        omega,
        t_gate_error: t_err,
        logical_qubits_per_t: per_t,
        entries,
    })
}

/// CSV level table of one cascade: level, input error, output error, and
/// the acceptance probability of that level.
pub fn distillation_csv(p0: f64, levels: u32, species: Species) -> Result<String, ResourceError> {
    let errors = distill_error(p0, levels, species)?;
    let mut out = String::from("level,input_error,output_error,success\n");
    for l in 1..=levels as usize {
        let success = distill_success(errors[l - 1], species)?;
        out.push_str(&format!(
            "{},{:e},{:e},{}\n",
            l,
            errors[l - 1],
            errors[l],
            success
        ));
    }
    Ok(out)
}
