//! End-to-end acceptance checks, one test per release criterion. Each test
//! prints a single `PASS criterion N: ...` line with the measured numbers so
//! running with `--nocapture` reads as a checklist.

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use clusterflow::decoder::{
    decode_sample, detect_faulty_chip, fit_suppression_exponent, monte_carlo, mwpm,
    synthesize_stream, threshold_scan, DecoderBlock, ErrorSample, MatchingGraph,
    DEFAULT_HERALD_MULTIPLE, DEFAULT_HERALD_WINDOW,
};
use clusterflow::lattice::CellParity;
use clusterflow::pauli::BasisAssignment;
use clusterflow::prepnet::{run, verify_prepared_state, verify_prepared_state_with, NetworkConfig};
use clusterflow::resources::{
    chip_count, circuits_required, correctable_chain_length, distill_error, full_report,
    logical_footprint, required_distance, CodeParams, ReportInputs, ScalingModel, Species,
};

#[test]
fn criterion_01_prepared_state_verifies_and_control_fails() {
    let config = NetworkConfig::new(2, 2, 4, 1, 7).unwrap();
    let start = Instant::now();
    let report = verify_prepared_state(&config).unwrap();
    let elapsed = start.elapsed();
    assert_eq!(report.violated, 0, "violations: {:?}", report.violations);
    assert_eq!(report.satisfied + report.frame_satisfied, report.qubits);
    assert!(elapsed < Duration::from_secs(10), "verification took {elapsed:?}");

    // The wrong product state must fail, and fail exactly on the generators
    // centered on half-rate sites: the ones no switch network check measures.
    let control = verify_prepared_state_with(&config, &BasisAssignment::UniformZ).unwrap();
    assert!(control.violated > 0);
    for v in &control.violations {
        let [x, y, _] = v.site;
        assert_eq!(
            (x - y).rem_euclid(2),
            0,
            "control violation off a half-rate line at {:?}",
            v.site
        );
    }
    println!(
        "PASS criterion 1: 2x2x4 verification satisfied {}/{} generators in {:?}; \
         uniform-Z control violates {}",
        report.satisfied, report.qubits, elapsed, control.violated
    );
}

#[test]
fn criterion_02_schedule_is_collision_free_and_gapless() {
    let config = NetworkConfig::new(2, 2, 4, 1, 0).unwrap();
    let trace = run(&config).unwrap();
    assert!(trace.violations.is_empty(), "violations: {:?}", trace.violations);
    let min_u = trace
        .usage
        .iter()
        .map(|u| u.utilization)
        .fold(f64::INFINITY, f64::min);
    for u in &trace.usage {
        assert_eq!(u.utilization, 1.0, "idle slots on chip {:?}", u.chip);
    }
    println!(
        "PASS criterion 2: {} chips, zero violations, minimum utilization {min_u}",
        trace.usage.len()
    );
}

#[test]
fn criterion_03_chip_counts_match_closed_form() {
    let c55 = chip_count(5, 5, 1).unwrap();
    let c4020 = chip_count(40, 20, 1).unwrap();
    assert_eq!(c55, 120);
    assert_eq!(c4020, 3320);
    for n in 1..=50i64 {
        let expect = 4 * n * n + 4 * n;
        assert_eq!(chip_count(n, n, 1).unwrap(), expect);
        let config = NetworkConfig::new(n, n, 1, 1, 0).unwrap();
        assert_eq!(config.nominal_chip_count(), expect as u64, "network sizing at n={n}");
    }
    println!(
        "PASS criterion 3: chips(5,5)={c55}, chips(40,20)={c4020}, \
         chips(N,N)=4N^2+4N for N=1..=50"
    );
}

#[test]
fn criterion_04_distance_sizing_hits_the_published_point() {
    let model = ScalingModel::new(6.7e-5, 6.7e-3).unwrap();
    assert_eq!(model.suppression_factor(), 100.0);
    let d = required_distance(&model, 1e-16).unwrap();
    assert_eq!(d, 17);
    let chain = correctable_chain_length(d);
    assert_eq!(chain, 8);
    let params = CodeParams::from_distance(d).unwrap();
    let footprint = logical_footprint(&params);
    assert_eq!(footprint, (40, 20));
    println!(
        "PASS criterion 4: suppression x100, target 1e-16 -> d={d}, \
         correctable chain {chain}, footprint {footprint:?}"
    );
}

#[test]
fn criterion_05_distillation_chain_matches_the_oracle() {
    let p0 = 6.7e-5;
    let rel = |x: f64, r: f64| ((x - r) / r).abs();

    // distill_error returns [p0, p1, ..., p_levels].
    let a = distill_error(p0, 2, Species::A).unwrap();
    let y = distill_error(p0, 2, Species::Y).unwrap();
    assert!(rel(a[1], 1.0526705e-11) < 1e-6, "a1 = {}", a[1]);
    assert!(rel(y[1], 2.105341e-12) < 1e-6, "y1 = {}", y[1]);
    let (a2, y2) = (a[2], y[2]);
    assert!(rel(a2, 4.0826805678440105e-32) < 1e-6, "a2 = {a2}");
    assert!(rel(y2, 6.53228890855042e-35) < 1e-6, "y2 = {y2}");
    assert!((1e-32..1e-31).contains(&a2));
    assert!((1e-35..1e-34).contains(&y2));

    let ca = circuits_required(p0, 2, Species::A).unwrap();
    let cy = circuits_required(p0, 2, Species::Y).unwrap();
    assert_eq!(ca.round() as i64, 16);
    assert_eq!(cy.round() as i64, 8);
    println!(
        "PASS criterion 5: level-2 errors {a2:.6e} / {y2:.6e}, \
         circuits {ca:.4} -> 16 and {cy:.4} -> 8"
    );
}

#[test]
fn criterion_06_t_gate_report_reproduces_headline_numbers() {
    let report = full_report(ReportInputs::default()).unwrap();
    let rel = (report.t_gate_error - 1.17e-11).abs() / 1.17e-11;
    assert!(rel < 0.01, "t gate error {} is {rel:.4} away", report.t_gate_error);
    assert_eq!(report.logical_qubits_per_t, 249.5);
    println!(
        "PASS criterion 6: T-gate error {:.4e} ({:.2}% from 1.17e-11), \
         {} logical qubits per T",
        report.t_gate_error,
        rel * 100.0,
        report.logical_qubits_per_t
    );
}

/// Minimum-weight perfect matching by exhaustive recursion. Pairs only along
/// edges present in the list; absent pairs are forbidden, not weight zero.
fn brute_force_minimum(n_nodes: usize, edges: &[(usize, usize, i64)]) -> Option<i64> {
    let mut weight = vec![vec![None; n_nodes]; n_nodes];
    for &(a, b, w) in edges {
        weight[a][b] = Some(w);
        weight[b][a] = Some(w);
    }
    fn solve(unmatched: &[usize], weight: &[Vec<Option<i64>>]) -> Option<i64> {
        let Some((&first, rest)) = unmatched.split_first() else {
            return Some(0);
        };
        let mut best: Option<i64> = None;
        for (i, &other) in rest.iter().enumerate() {
            let Some(w) = weight[first][other] else {
                continue;
            };
            let mut remaining = rest.to_vec();
            remaining.remove(i);
            if let Some(sub) = solve(&remaining, weight) {
                let total = w + sub;
                best = Some(best.map_or(total, |b| b.min(total)));
            }
        }
        best
    }
    let all: Vec<usize> = (0..n_nodes).collect();
    solve(&all, &weight)
}

#[test]
fn criterion_07_matching_agrees_with_brute_force() {
    let start = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(0xACCE);
    for case in 0..500u32 {
        // Mirror the decoder's augmented shape: n real nodes, n partners,
        // real-real and real-own-partner edges weighted, partner-partner free.
        let n = rng.random_range(1..=6usize);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push((i, j, rng.random_range(1..=9i64)));
            }
        }
        for i in 0..n {
            edges.push((i, n + i, rng.random_range(1..=9i64)));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push((n + i, n + j, 0));
            }
        }
        let graph = MatchingGraph {
            nodes: (0..n).map(|i| vec![i]).collect(),
            edges: edges.clone(),
        };
        let fast = mwpm(&graph);
        let slow = brute_force_minimum(2 * n, &edges).expect("augmented graph is matchable");
        assert_eq!(fast.total_weight, slow, "case {case} with {n} real nodes");
        assert_eq!(fast.pairs.len(), n);
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    println!("PASS criterion 7: 500 random augmented graphs match brute force in {elapsed:?}");
}

#[test]
fn criterion_08_single_faults_never_beat_distance_three() {
    let mut checked = 0usize;
    for flavor in [CellParity::Primal, CellParity::Dual] {
        let block = DecoderBlock::cube(3, flavor).unwrap();
        for face in 0..block.n_faces() {
            let flip = ErrorSample {
                flips: BTreeSet::from([face]),
                losses: BTreeSet::new(),
                p: 0.01,
                p_loss: 0.0,
                seed: 0,
                stream: 0,
            };
            let outcome = decode_sample(&block, &flip).unwrap();
            assert!(!outcome.failure, "{flavor:?} flip on face {face} became logical");
            let loss = ErrorSample {
                flips: BTreeSet::new(),
                losses: BTreeSet::from([face]),
                p: 0.01,
                p_loss: 0.0,
                seed: 0,
                stream: 0,
            };
            let outcome = decode_sample(&block, &loss).unwrap();
            assert!(!outcome.failure, "{flavor:?} loss on face {face} became logical");
            checked += 2;
        }
    }
    println!("PASS criterion 8: {checked} single-fault decodes at d=3 all correct");
}

#[test]
fn criterion_09_threshold_sits_in_the_expected_window() {
    let ps = [0.02, 0.026, 0.032, 0.038, 0.044];
    let scan = threshold_scan(CellParity::Primal, &[3, 5, 7], &ps, 0.0, 10_000, 20_260_814)
        .unwrap();
    let mut crossings = Vec::new();
    for c in &scan.crossings {
        let p = c
            .p_cross
            .unwrap_or_else(|| panic!("curves d={}/{} never cross", c.d_low, c.d_high));
        assert!(
            (0.02..=0.045).contains(&p),
            "crossing d={}/{} at {p}",
            c.d_low,
            c.d_high
        );
        crossings.push(format!("d{}/d{} at {p:.4}", c.d_low, c.d_high));
    }

    // Well below threshold the failure rate scales as p^((d+1)/2): slope 2
    // at d=3 and slope 3 at d=5 on a log-log fit.
    let fit_ps = [0.006, 0.0075, 0.009];
    let mut slopes = Vec::new();
    for (d, trials, lo, hi) in [(3usize, 200_000u64, 1.5, 2.5), (5, 400_000, 2.25, 3.75)] {
        let block = DecoderBlock::cube(d, CellParity::Primal).unwrap();
        let mut points = Vec::new();
        for (i, &p) in fit_ps.iter().enumerate() {
            let stats = monte_carlo(&block, p, 0.0, trials, 9_000 + (d * 10 + i) as u64).unwrap();
            assert!(stats.failures > 0, "no failures to fit at d={d} p={p}");
            points.push((p, stats.rate));
        }
        let slope = fit_suppression_exponent(&points).unwrap();
        assert!((lo..=hi).contains(&slope), "d={d} slope {slope} outside [{lo}, {hi}]");
        slopes.push(format!("d={d}: {slope:.2}"));
    }
    println!(
        "PASS criterion 9: crossings {}; suppression slopes {}",
        crossings.join(", "),
        slopes.join(", ")
    );
}

#[test]
fn criterion_10_herald_flags_dead_chip_without_false_positives() {
    let block = DecoderBlock::cube(5, CellParity::Primal).unwrap();
    for seed in 0..100u64 {
        let frames = synthesize_stream(&block, 0.01, 400, seed, None).unwrap();
        let flags =
            detect_faulty_chip(&frames, &block, DEFAULT_HERALD_WINDOW, DEFAULT_HERALD_MULTIPLE);
        assert!(flags.is_empty(), "clean stream {seed} flagged {flags:?}");
    }
    let frames = synthesize_stream(&block, 0.01, 400, 424_242, Some((2, 2))).unwrap();
    let flags =
        detect_faulty_chip(&frames, &block, DEFAULT_HERALD_WINDOW, DEFAULT_HERALD_MULTIPLE);
    assert!(!flags.is_empty(), "dead column went unflagged");
    for &(cx, cy) in &flags {
        assert!(
            cy == 2 && (cx == 1 || cx == 2),
            "flag ({cx}, {cy}) away from the dead column"
        );
    }
    println!(
        "PASS criterion 10: 100 clean streams raise no flags; dead column flagged at {flags:?}"
    );
}

#[test]
fn criterion_11_reruns_with_recorded_seeds_are_byte_identical() {
    let bin = env!("CARGO_BIN_EXE_clusterflow");
    let runs: [&[&str]; 3] = [
        &["verify-prep", "--nx", "2", "--ny", "2", "--layers", "2", "--seed", "5"],
        &[
            "threshold", "--d", "3", "--p", "0.02", "--p", "0.03", "--trials", "200", "--seed",
            "5",
        ],
        &["estimate", "--p", "6.7e-5"],
    ];
    for args in runs {
        let first = Command::new(bin).args(args).output().unwrap();
        let second = Command::new(bin).args(args).output().unwrap();
        assert!(first.status.success(), "{args:?}: {}", String::from_utf8_lossy(&first.stderr));
        assert_eq!(first.stdout, second.stdout, "stdout drifted for {args:?}");
        assert!(!first.stdout.is_empty());
    }
    println!("PASS criterion 11: verify-prep, threshold, and estimate reruns are byte-identical");
}
