//! Acceptance suite for the queuing-game analysis and the general machinery.
//!
//! Each test prints one `acceptance N: PASS` line; the checks cover the
//! closed-form attractor and cycle conditions of the queuing game, region catalogs,
//! statistical convergence of the stochastic dynamics, analytic-vs-integrator
//! equivalence, exit-time exactness, the complete two-action limit set
//! against a grid scan, equilibrium soundness of every emitted attractor,
//! and the certified three-region cycle.

use std::time::Instant;

use popdyn::attractor::{two_action_limits, verify_mfe, Attractor};
use popdyn::cycle3::{psi_maps, reduce};
use popdyn::di::{
    check_cycle_certificate, exit_time, exit_time_raw, oracle_integrate, solve, Termination,
};
use popdyn::game::{Aggregate, BorderFun, GameSpec};
use popdyn::preset::{queuing_preset, QueuingParams};
use popdyn::region::{enumerate_regions, region_by_profile, RegionVertex};
use popdyn::report::{analyze, AnalysisOptions, AnalysisReport};
use popdyn::sim::{classify_limit, run_with_stream, step, Classification, SimConfig, SimState};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

const RHO2: f64 = 0.4;
const P2: f64 = 0.6;
const RHO3: f64 = 0.3;
const P3: f64 = 0.7;
const C: f64 = 2.0;

fn queuing2(alpha_cm: f64) -> GameSpec {
    queuing_preset(&QueuingParams {
        rho: RHO2,
        p: P2,
        ps: 1.0,
        c: C,
        alpha: vec![1.0 - alpha_cm, alpha_cm],
    })
    .unwrap()
}

fn queuing3(alpha: [f64; 3]) -> GameSpec {
    queuing_preset(&QueuingParams {
        rho: RHO3,
        p: P3,
        ps: 1.0,
        c: C,
        alpha: alpha.to_vec(),
    })
    .unwrap()
}

fn dist_inf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn contains_point(list: &[Attractor], target: &[f64], tol: f64) -> bool {
    list.iter().any(|a| dist_inf(a.point.as_slice(), target) <= tol)
}

fn report_attractors(report: &AnalysisReport) -> (Vec<Attractor>, Vec<Attractor>, Vec<Attractor>) {
    (
        report.attractors.classical.iter().map(|a| a.attractor.clone()).collect(),
        report.attractors.filippov2.iter().map(|a| a.attractor.clone()).collect(),
        report.attractors.filippov_higher.iter().map(|a| a.attractor.clone()).collect(),
    )
}

/// Criterion 1 — the two-type queuing sweep against the closed-form iffs:
/// classical attractor (α_cs, α_cm, 0) iff ρ/(1+ρ) < α_cm < 2/3, the sliding
/// point (1/(1+ρ), ρ/(1+ρ), 0) iff α_cm < ρ/(1+ρ), an RV cycle iff
/// α_cm > 2/3.
#[test]
fn acceptance_01_two_type_sweep() {
    let started = Instant::now();
    let lower = RHO2 / (1.0 + RHO2);
    let sliding = [1.0 / (1.0 + RHO2), RHO2 / (1.0 + RHO2), 0.0];
    for i in 1..=19 {
        let alpha_cm = i as f64 * 0.05;
        let game = queuing2(alpha_cm);
        let report = analyze(&game, &AnalysisOptions::default()).unwrap();
        let (classical, filippov2, _) = report_attractors(&report);

        let expect_classical = lower < alpha_cm && alpha_cm < 2.0 / 3.0;
        let classical_point = [game.alpha()[0], game.alpha()[1], 0.0];
        assert_eq!(
            classical.len(),
            usize::from(expect_classical),
            "α_cm={alpha_cm}: classical attractor count"
        );
        if expect_classical {
            assert!(
                contains_point(&classical, &classical_point, 1e-9),
                "α_cm={alpha_cm}: classical point mismatch: {classical:?}"
            );
        }

        let expect_sliding = alpha_cm < lower;
        assert_eq!(
            contains_point(&filippov2, &sliding, 1e-9),
            expect_sliding,
            "α_cm={alpha_cm}: sliding attractor presence"
        );

        let expect_cycle = alpha_cm > 2.0 / 3.0;
        assert_eq!(
            !report.rv_graph.cycles.is_empty(),
            expect_cycle,
            "α_cm={alpha_cm}: RV cycle presence; edges {:?}",
            report.rv_graph.edges
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "sweep took {elapsed:?}");
    println!("acceptance 1: PASS — two-type sweep, 19 α values in {elapsed:.2?}");
}

/// Criterion 2 — five three-type parameter points, one per clause of the
/// closed-form three-type conditions, verdicts matched clause-by-clause at 1e-9.
#[test]
fn acceptance_02_three_type_spot_checks() {
    let started = Instant::now();
    let points = [
        [0.45, 0.40, 0.15], // classical only
        [0.60, 0.10, 0.30], // sliding (a): equal-share avoid/compare split
        [0.80, 0.12, 0.08], // sliding (b): cost-border point
        [0.20, 0.20, 0.60], // sliding (c): symmetric avoid split
        [0.20, 0.60, 0.20], // cyclic regime
    ];
    for [acs, acm, aac] in points {
        let game = queuing3([acs, acm, aac]);
        let report = analyze(&game, &AnalysisOptions::default()).unwrap();
        let (classical, filippov2, _) = report_attractors(&report);
        let asm = acs + acm;

        let clause_i =
            aac < (1.0 / (C + 2.0)).min(acm) && (RHO3 + 1.0) * acm + aac > RHO3
                && 3.0 * acm + (C + 2.0) * aac < 2.0;
        let clause_iia =
            aac > 0.0 && aac > acm && C / (C + 2.0) < acs && acs < (2.0 - RHO3) / (2.0 + RHO3);
        let clause_iib = aac < RHO3 / (2.0 + RHO3) && RHO3 * acm + P3 < acs;
        let clause_iic = aac > 0.0 && 1.0 / 3.0 < asm && asm < C / (C + 2.0);
        let clause_cycle = acs < (0.5f64).min((C * aac + acm) / 2.0) && acm > 0.5;

        let p_i = [acs, acm, aac];
        let p_iia = [acs, (1.0 - acs) / 2.0, (1.0 - acs) / 2.0];
        let w1 = (1.0 - RHO3 * aac) / (1.0 + RHO3);
        let w2 = (RHO3 - aac) / (1.0 + RHO3);
        let p_iib = [w1, w2, 1.0 - w1 - w2];
        let p_iic = [asm, aac / 2.0, aac / 2.0];

        let at = format!("α=({acs},{acm},{aac})");
        assert_eq!(contains_point(&classical, &p_i, 1e-9), clause_i, "{at}: clause (i)");
        assert_eq!(contains_point(&filippov2, &p_iia, 1e-9), clause_iia, "{at}: clause (ii)(a)");
        assert_eq!(contains_point(&filippov2, &p_iib, 1e-9), clause_iib, "{at}: clause (ii)(b)");
        assert_eq!(contains_point(&filippov2, &p_iic, 1e-9), clause_iic, "{at}: clause (ii)(c)");
        assert_eq!(
            !report.rv_graph.cycles.is_empty(),
            clause_cycle,
            "{at}: cycle clause; cycles {:?}",
            report.rv_graph.cycles
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "spot checks took {elapsed:?}");
    println!("acceptance 2: PASS — five three-type clause points in {elapsed:.2?}");
}

/// Criterion 3 — region catalogs: 5 two-type regions and 10 three-type
/// regions with the known action profiles, cross-checked against their
/// closed-form drift targets.
#[test]
fn acceptance_03_region_catalogs() {
    let game = queuing2(0.5);
    let regions = enumerate_regions(&game).unwrap();
    let mut profiles: Vec<Vec<usize>> = regions.iter().map(|r| r.e.clone()).collect();
    profiles.sort();
    assert_eq!(
        profiles,
        [[1, 1], [1, 2], [1, 3], [2, 1], [2, 2]].map(|p| p.to_vec()).to_vec(),
        "two-type profiles"
    );

    let game = queuing3([0.4, 0.4, 0.2]);
    let (acs, acm, aac) = (game.alpha()[0], game.alpha()[1], game.alpha()[2]);
    let regions = enumerate_regions(&game).unwrap();
    assert_eq!(regions.len(), 10, "three-type region count");
    let expected: Vec<(Vec<usize>, [f64; 3])> = vec![
        (vec![1, 3, 1], [acs + aac, 0.0, acm]),
        (vec![1, 1, 1], [1.0, 0.0, 0.0]),
        (vec![1, 1, 2], [acs + acm, aac, 0.0]),
        (vec![1, 2, 2], [acs, aac + acm, 0.0]),
        (vec![1, 2, 3], [acs, acm, aac]),
        (vec![1, 3, 3], [acs, 0.0, acm + aac]),
        (vec![2, 2, 2], [0.0, 1.0, 0.0]),
        (vec![2, 2, 3], [0.0, acs + acm, aac]),
        (vec![2, 1, 2], [acm, acs + aac, 0.0]),
        (vec![1, 1, 3], [acs + acm, 0.0, aac]),
    ];
    for (e, b) in &expected {
        let region = region_by_profile(&regions, e)
            .unwrap_or_else(|| panic!("profile {e:?} missing from the catalog"));
        assert!(
            dist_inf(region.b.as_slice(), b) < 1e-12,
            "profile {e:?}: drift target {:?} vs closed form {b:?}",
            region.b.as_slice()
        );
    }
    println!("acceptance 3: PASS — 5 + 10 regions with the known profiles and targets");
}

/// Criterion 4 — statistical convergence: 50 seeded runs of 10^5 turns end
/// within 0.02 (ℓ∞) of the predicted attractor in at least 48 cases, for the
/// classical and the sliding regime.
#[test]
fn acceptance_04_stochastic_convergence() {
    for (alpha_cm, target) in [
        (0.5, vec![0.5, 0.5, 0.0]),
        (0.2, vec![5.0 / 7.0, 2.0 / 7.0, 0.0]),
    ] {
        let started = Instant::now();
        let game = queuing2(alpha_cm);
        let mut cfg = SimConfig::new(100_000, 20260810);
        cfg.thin = 100;
        let mut hits = 0;
        for stream in 0..50 {
            let traj = run_with_stream(&game, &cfg, stream);
            if dist_inf(&traj.terminal, &target) < 0.02 {
                hits += 1;
            }
        }
        let elapsed = started.elapsed();
        assert!(
            hits >= 48,
            "α_cm={alpha_cm}: only {hits}/50 runs within 0.02 of {target:?}"
        );
        assert!(elapsed.as_secs_f64() < 60.0, "case took {elapsed:?}");
        println!(
            "acceptance 4: PASS — α_cm={alpha_cm}: {hits}/50 within 0.02 of {target:?} in {elapsed:.2?}"
        );
    }
}

/// Criterion 5 — cyclic regime: one seeded run of 10^6 turns at α_cm = 0.8 is
/// classified cyclic-suspect with laps matching an RV cycle, and after turn
/// 10^4 never enters the 0.05-ball (Euclidean) around any singleton attractor.
#[test]
fn acceptance_05_cyclic_regime() {
    let started = Instant::now();
    let game = queuing2(0.8);
    let report = analyze(&game, &AnalysisOptions::default()).unwrap();
    let attractors = report.attractor_list();
    assert!(!attractors.is_empty(), "the triple point should be listed");

    let steps: u64 = 1_000_000;
    let seed = 2u64;
    let mut state = SimState::new(&game, &Aggregate::uniform(3), 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_dist = f64::INFINITY;
    for t in 1..=steps {
        step(&mut state, &game, 1e-12, &mut rng);
        if t > 10_000 {
            for a in &attractors {
                let d = a
                    .point
                    .as_slice()
                    .iter()
                    .zip(&state.omega)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt();
                min_dist = min_dist.min(d);
            }
        }
    }
    assert!(
        min_dist > 0.05,
        "trajectory entered an attractor ball: min distance {min_dist}"
    );

    let mut cfg = SimConfig::new(steps, seed);
    cfg.thin = 100;
    let traj = run_with_stream(&game, &cfg, 0);
    let limit = classify_limit(
        &game,
        &report.regions,
        &attractors,
        &report.rv_graph.cycles,
        &traj,
        0.02,
    );
    let Classification::CyclicSuspect { cycle } = &limit.classification else {
        panic!("expected cyclic-suspect, got {:?}", limit.classification);
    };
    assert!(
        report.rv_graph.cycles.contains(cycle),
        "lap cycle {cycle:?} not an RV cycle"
    );
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "run took {elapsed:?}");
    println!(
        "acceptance 5: PASS — cyclic-suspect laps {cycle:?}, min attractor distance {min_dist:.4} in {elapsed:.2?}"
    );
}

/// Deterministic simplex point from a seeded generator.
fn random_simplex(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| -rng.random::<f64>().max(1e-12).ln()).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / sum).collect()
}

/// Random affine game on {1,2,3} with every facet robustly classified:
/// |h(b_v)| ≥ 1e-3 at every region target and |h(b_v)h(b_ṽ)| ≥ 1e-6 on every
/// adjacent pair.
fn random_margin_game(rng: &mut ChaCha8Rng) -> (GameSpec, Vec<RegionVertex>) {
    loop {
        let n_types = 2 + (rng.random::<u32>() % 2) as usize;
        let raw: Vec<f64> = (0..n_types).map(|_| rng.random::<f64>() + 0.2).collect();
        let sum: f64 = raw.iter().sum();
        let mut alpha: Vec<f64> = raw.into_iter().map(|x| x / sum).collect();
        let correction: f64 = 1.0 - alpha.iter().sum::<f64>();
        alpha[0] += correction;
        let u: Vec<Vec<Vec<f64>>> = (0..n_types)
            .map(|_| {
                (0..3)
                    .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
                    .collect()
            })
            .collect();
        let d: Vec<Vec<f64>> = (0..n_types)
            .map(|_| (0..3).map(|_| rng.random_range(-0.3..0.3)).collect())
            .collect();
        let Ok(game) = GameSpec::new(
            (0..n_types).map(|t| format!("t{t}")).collect(),
            alpha,
            vec![vec![1, 2, 3]; n_types],
            u,
            d,
        ) else {
            continue;
        };
        let Ok(regions) = enumerate_regions(&game) else {
            continue;
        };
        if regions.len() < 2 {
            continue;
        }
        let borders = game.border_functions();
        let g3_ok = regions
            .iter()
            .all(|r| borders.iter().all(|h| h.eval(r.b.as_slice()).abs() >= 1e-3));
        if !g3_ok {
            continue;
        }
        let Ok(records) = popdyn::region::adjacency(&regions, &game) else {
            continue;
        };
        let g5_ok = records
            .iter()
            .all(|rec| (rec.h_at_targets.0 * rec.h_at_targets.1).abs() >= 1e-6);
        if !g5_ok {
            continue;
        }
        return (game, regions);
    }
}

/// Criterion 6 — analytic solutions match the fixed-step integrator within
/// 1e-3 sup-norm over horizon 10 on 20 random margin games plus both queuing
/// presets, excluding corner-hit runs.
#[test]
fn acceptance_06_solver_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0d1_5eed);
    let mut fleet: Vec<GameSpec> = Vec::new();
    for _ in 0..20 {
        fleet.push(random_margin_game(&mut rng).0);
    }
    fleet.push(queuing_preset(&QueuingParams {
        rho: RHO2,
        p: P2,
        ps: 1.0,
        c: C,
        alpha: vec![0.8, 0.2],
    })
    .unwrap());
    fleet.push(queuing3([0.6, 0.1, 0.3]));

    let horizon = 10.0;
    let dt = 1e-4;
    let mut compared = 0usize;
    let mut corner_skips = 0usize;
    for (gi, game) in fleet.iter().enumerate() {
        let regions = enumerate_regions(game).unwrap();
        let records = popdyn::region::adjacency(&regions, game).unwrap();
        for _ in 0..3 {
            let start = Aggregate::new(random_simplex(&mut rng, 3)).unwrap();
            let solution = match solve(game, &regions, &records, &start, horizon) {
                Ok(s) => s,
                Err(_) => {
                    corner_skips += 1;
                    continue;
                }
            };
            if matches!(
                solution.termination,
                Termination::CornerHit { .. } | Termination::DegenerateFacet { .. }
            ) {
                corner_skips += 1;
                continue;
            }
            let oracle = oracle_integrate(game, &start, horizon, dt).unwrap();
            let mut worst = 0.0f64;
            for (i, p) in oracle.points.iter().enumerate() {
                if let Some(q) = solution.at(i as f64 * dt) {
                    worst = worst.max(dist_inf(p, &q));
                }
            }
            assert!(
                worst <= 1e-3,
                "game {gi}: sup deviation {worst} from start {:?}",
                start.as_slice()
            );
            compared += 1;
        }
    }
    assert!(compared >= 40, "only {compared} comparable runs");
    println!(
        "acceptance 6: PASS — {compared} runs within 1e-3 of the integrator ({corner_skips} corner skips)"
    );
}

/// Criterion 7 — exit-time exactness on 10^3 random crossing triples.
#[test]
fn acceptance_07_exit_time_roots() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0e11_7);
    let mut tested = 0usize;
    while tested < 1000 {
        let k = 2 + (rng.random::<u32>() % 3) as usize;
        let b = random_simplex(&mut rng, k);
        let start = random_simplex(&mut rng, k);
        let boundary = BorderFun {
            grad: (0..k).map(|_| rng.random_range(-1.0..1.0)).collect(),
            offset: rng.random_range(-0.5..0.5),
            index: (1, 2, 0),
        };
        let h_start = boundary.eval(&start);
        let h_b = boundary.eval(&b);
        if h_start * h_b >= -1e-6 {
            continue;
        }
        let region = RegionVertex {
            id: 1,
            e: vec![1],
            b: Aggregate::new(b.clone()).unwrap(),
            witness: Aggregate::uniform(k),
        };
        let start_point = Aggregate::new(start.clone()).unwrap();
        let hit = exit_time(&start_point, &region, &boundary).unwrap();
        assert!(
            boundary.eval(hit.hit.as_slice()).abs() <= 1e-10,
            "hit point off the border: {:?}",
            hit.hit.as_slice()
        );
        let expect_tau = ((h_start - h_b) / -h_b).ln();
        assert!(
            (hit.tau - expect_tau).abs() <= 1e-12,
            "tau {} vs closed form {expect_tau}",
            hit.tau
        );
        tested += 1;
    }
    println!("acceptance 7: PASS — 1000 crossing triples, |h(hit)| ≤ 1e-10, τ exact");
}

/// Scalar drift of a two-action game at a reduced coordinate, ties averaged.
fn scalar_drift(game: &GameSpec, omega1: f64) -> f64 {
    let omega = Aggregate::new(vec![omega1, 1.0 - omega1]).unwrap();
    let mut inflow = 0.0;
    for theta in 0..game.n_types() {
        let u1 = game.utility(theta, 1, &omega).unwrap();
        let u2 = game.utility(theta, 2, &omega).unwrap();
        if u1 > u2 {
            inflow += game.alpha()[theta];
        } else if u1 == u2 {
            inflow += game.alpha()[theta] / 2.0;
        }
    }
    inflow - omega1
}

/// Criterion 8 — the two-action limit set equals a 10^-5-grid scan of the
/// drift's zeros and border bracketings on 100 random games with up to four
/// types (matched at resolution 10^-4).
#[test]
fn acceptance_08_two_action_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x2ac7_10);
    let mut games = 0usize;
    while games < 100 {
        let n_types = 1 + (rng.random::<u32>() % 4) as usize;
        let raw: Vec<f64> = (0..n_types).map(|_| rng.random::<f64>() + 0.1).collect();
        let sum: f64 = raw.iter().sum();
        let mut alpha: Vec<f64> = raw.into_iter().map(|x| x / sum).collect();
        let correction: f64 = 1.0 - alpha.iter().sum::<f64>();
        alpha[0] += correction;
        let u: Vec<Vec<Vec<f64>>> = (0..n_types)
            .map(|_| {
                (0..2)
                    .map(|_| (0..2).map(|_| rng.random_range(-1.0..1.0)).collect())
                    .collect()
            })
            .collect();
        let d: Vec<Vec<f64>> = (0..n_types)
            .map(|_| (0..2).map(|_| rng.random_range(-0.5..0.5)).collect())
            .collect();
        let game = GameSpec::new(
            (0..n_types).map(|t| format!("t{t}")).collect(),
            alpha,
            vec![vec![1, 2]; n_types],
            u,
            d,
        )
        .unwrap();

        // skip resolution-limit cases: borders within 1e-3 of each other or
        // one-sided drift within 1e-4 of zero at a border
        let mut zeros: Vec<f64> = Vec::new();
        let mut degenerate = false;
        for theta in 0..n_types {
            let h = game.border(theta, 1, 2).unwrap();
            let slope = h.grad[0] - h.grad[1];
            let intercept = h.offset + h.grad[1];
            if slope.abs() < 1e-6 {
                if intercept.abs() < 1e-6 {
                    degenerate = true;
                }
                continue;
            }
            let z = -intercept / slope;
            if (-1e-3..=1.0 + 1e-3).contains(&z) {
                zeros.push(z);
            }
        }
        zeros.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if degenerate
            || zeros.windows(2).any(|w| w[1] - w[0] < 1e-3)
            || zeros.iter().any(|&z| {
                !(1e-3..=1.0 - 1e-3).contains(&z)
                    || scalar_drift(&game, (z - 1e-6).clamp(0.0, 1.0)).abs() < 1e-4
                    || scalar_drift(&game, (z + 1e-6).clamp(0.0, 1.0)).abs() < 1e-4
            })
        {
            continue;
        }
        games += 1;

        let regions = enumerate_regions(&game).unwrap();
        let found = two_action_limits(&game, &regions).unwrap();
        let found_points: Vec<f64> = found.iter().map(|a| a.point.as_slice()[0]).collect();

        // grid scan: cells where the drift brackets zero
        const N: usize = 100_000;
        let mut expected: Vec<f64> = Vec::new();
        let mut prev = scalar_drift(&game, 0.0);
        if prev == 0.0 {
            expected.push(0.0);
        }
        for i in 1..=N {
            let x = i as f64 / N as f64;
            let cur = scalar_drift(&game, x);
            if prev * cur < 0.0 || cur == 0.0 {
                expected.push(x);
            }
            prev = cur;
        }
        expected.dedup_by(|a, b| (*a - *b) < 5e-5);

        for p in &found_points {
            assert!(
                expected.iter().any(|e| (e - p).abs() <= 1e-4),
                "game {games}: emitted point {p} not found by the scan {expected:?}"
            );
        }
        for e in &expected {
            assert!(
                found_points.iter().any(|p| (e - p).abs() <= 1e-4),
                "game {games}: scan point {e} missing from {found_points:?}"
            );
        }
    }
    println!("acceptance 8: PASS — 100 two-action games match the 1e-5 grid scan");
}

/// Criterion 9 — every attractor emitted across the parameter sweeps, spot
/// checks, region-catalog games and the two-action fleet verifies as an
/// aggregate mean-field equilibrium.
#[test]
fn acceptance_09_mfe_soundness() {
    let mut checked = 0usize;

    // criterion 1 sweep and criterion 2/3 games
    let mut reports: Vec<(GameSpec, AnalysisReport)> = Vec::new();
    for i in 1..=19 {
        let game = queuing2(i as f64 * 0.05);
        let report = analyze(&game, &AnalysisOptions::default()).unwrap();
        reports.push((game, report));
    }
    for alpha in [
        [0.45, 0.40, 0.15],
        [0.60, 0.10, 0.30],
        [0.80, 0.12, 0.08],
        [0.20, 0.20, 0.60],
        [0.20, 0.60, 0.20],
        [0.40, 0.40, 0.20],
    ] {
        let game = queuing3(alpha);
        let report = analyze(&game, &AnalysisOptions::default()).unwrap();
        reports.push((game, report));
    }
    for (game, report) in &reports {
        for a in report.attractors.all() {
            assert!(
                a.mfe.is_mfe,
                "attractor {:?} failed verification: {:?}",
                a.attractor.point.as_slice(),
                a.mfe.violations
            );
            let recheck = verify_mfe(game, &report.regions, &a.attractor);
            assert!(recheck.is_mfe && recheck.violations.is_empty());
            checked += 1;
        }
    }

    // criterion 8 fleet
    let mut rng = ChaCha8Rng::seed_from_u64(0x2ac7_10);
    let mut games = 0usize;
    while games < 100 {
        let n_types = 1 + (rng.random::<u32>() % 4) as usize;
        let raw: Vec<f64> = (0..n_types).map(|_| rng.random::<f64>() + 0.1).collect();
        let sum: f64 = raw.iter().sum();
        let mut alpha: Vec<f64> = raw.into_iter().map(|x| x / sum).collect();
        let correction: f64 = 1.0 - alpha.iter().sum::<f64>();
        alpha[0] += correction;
        let u: Vec<Vec<Vec<f64>>> = (0..n_types)
            .map(|_| {
                (0..2)
                    .map(|_| (0..2).map(|_| rng.random_range(-1.0..1.0)).collect())
                    .collect()
            })
            .collect();
        let d: Vec<Vec<f64>> = (0..n_types)
            .map(|_| (0..2).map(|_| rng.random_range(-0.5..0.5)).collect())
            .collect();
        let game = GameSpec::new(
            (0..n_types).map(|t| format!("t{t}")).collect(),
            alpha,
            vec![vec![1, 2]; n_types],
            u,
            d,
        )
        .unwrap();
        games += 1;
        let regions = enumerate_regions(&game).unwrap();
        for a in two_action_limits(&game, &regions).unwrap() {
            let report = verify_mfe(&game, &regions, &a);
            assert!(
                report.is_mfe,
                "two-action attractor {:?} failed: {:?}",
                a.point.as_slice(),
                report.violations
            );
            checked += 1;
        }
    }
    assert!(checked > 120, "only {checked} attractors checked");
    println!("acceptance 9: PASS — {checked} attractors verified as equilibria");
}

/// Criterion 10 — the cyclic queuing instance yields a certified cycle:
/// fixed point found, certificate closes within 1e-6, and the hop maps match
/// the exact flow at 50 sampled facet points within 1e-8.
#[test]
fn acceptance_10_cycle_certificate() {
    let game = queuing2(0.8);
    let report = analyze(&game, &AnalysisOptions::default()).unwrap();
    let test = report
        .cycle_tests
        .iter()
        .find(|t| t.fixed_point.is_some())
        .expect("a certified cycle test");
    let cert = test.certificate.as_ref().expect("certificate present");
    assert!(cert.closed);
    let check = check_cycle_certificate(&game, &report.regions, cert).unwrap();
    assert!(check.valid, "certificate check: {check:?}");
    assert!(
        check.closure_residual < 1e-6,
        "closure residual {}",
        check.closure_residual
    );

    // hop maps against the exact flow at 50 facet points
    let cycle = &test.cycle;
    let reduced = reduce(&game, &report.regions, &report.adjacency, cycle).unwrap();
    let maps = psi_maps(&report.regions, &report.adjacency, cycle, &reduced).unwrap();
    let l = cycle.len();
    let mut sampled = 0usize;
    let mut hop = 0usize;
    while sampled < 50 {
        let i = hop % l;
        hop += 1;
        let input = &reduced[(i + l - 1) % l];
        let output = &reduced[i];
        let region = &report.regions[cycle[i] - 1];
        let rec = report
            .adjacency
            .iter()
            .find(|r| {
                let key = (cycle[i].min(cycle[(i + 1) % l]), cycle[i].max(cycle[(i + 1) % l]));
                r.pair == key
            })
            .unwrap();
        let boundary = if rec.pair.0 == cycle[i] {
            rec.border.clone()
        } else {
            rec.border.flipped()
        };
        let (s, e) = input.range;
        let x = s + (e - s) * ((sampled as f64 * 0.617) % 1.0);
        let lifted = input.lift(x);
        let Ok(hit) = exit_time_raw(&lifted, region.b.as_slice(), &boundary) else {
            continue;
        };
        let flow = output.coord(hit.hit.as_slice());
        let mapped = maps[i].eval(x);
        assert!(
            (flow - mapped).abs() <= 1e-8,
            "hop {i} at x={x}: flow {flow} vs map {mapped}"
        );
        sampled += 1;
    }
    println!(
        "acceptance 10: PASS — certificate closes at {:.2e}, 50 facet points match the flow",
        check.closure_residual
    );
}
