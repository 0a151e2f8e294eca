//! End-to-end analysis pipeline: regions → adjacency → attractors (with
//! equilibrium verdicts) → RV graph and cycles → three-action cycle tests,
//! assembled into one serializable, deterministic report.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attractor::{
    classical_attractors, filippov2_attractors, filippov_higher_attractors, two_action_limits,
    verify_mfe, Attractor, AttractorError, MfeReport,
};
use crate::cycle3::{test_cycle, Cycle3Error, CycleTest};
use crate::game::{Aggregate, GameSpec};
use crate::io::GameFile;
use crate::region::{adjacency, enumerate_regions, AdjacencyRecord, RegionError, RegionVertex};
use crate::rv::{build, find_cycles, CycleSet, Orientation, RvGraph};

#[derive(Debug, Error)]
pub enum AnalyzeError {
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error(transparent)]
    Attractor(#[from] AttractorError),
    #[error(transparent)]
    Cycle3(#[from] Cycle3Error),
}

#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    pub cycle_cap: usize,
    pub rv_orientation: Orientation,
    /// Run the three-action cycle machinery on every RV cycle (k = 3 only).
    pub run_cycle_tests: bool,
    pub fixed_point_tol: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            cycle_cap: 10_000,
            rv_orientation: Orientation::Standard,
            run_cycle_tests: true,
            fixed_point_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttractorReport {
    #[serde(flatten)]
    pub attractor: Attractor,
    pub mfe: MfeReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttractorsReport {
    pub classical: Vec<AttractorReport>,
    pub filippov2: Vec<AttractorReport>,
    pub filippov_higher: Vec<AttractorReport>,
}

impl AttractorsReport {
    pub fn all(&self) -> impl Iterator<Item = &AttractorReport> {
        self.classical
            .iter()
            .chain(&self.filippov2)
            .chain(&self.filippov_higher)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RvGraphReport {
    pub edges: Vec<(usize, usize)>,
    pub cycles: Vec<Vec<usize>>,
    /// False when the cycle cap truncated the enumeration.
    pub complete: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub game: GameFile,
    pub regions: Vec<RegionVertex>,
    pub adjacency: Vec<AdjacencyRecord>,
    pub attractors: AttractorsReport,
    pub rv_graph: RvGraphReport,
    pub cycle_tests: Vec<CycleTest>,
    pub warnings: Vec<String>,
}

impl AnalysisReport {
    /// All attractors in report order (classical, filippov2, filippov-higher),
    /// the order `sim::classify_limit` indices refer to.
    pub fn attractor_list(&self) -> Vec<Attractor> {
        self.attractors.all().map(|a| a.attractor.clone()).collect()
    }
}

/// Runs the full pipeline on a game.
pub fn analyze(game: &GameSpec, opts: &AnalysisOptions) -> Result<AnalysisReport, AnalyzeError> {
    let mut warnings = Vec::new();
    let regions = enumerate_regions(game)?;
    let records = adjacency(&regions, game)?;

    let mut classical = classical_attractors(game, &regions);
    let mut filippov2 = filippov2_attractors(game, &regions, &records);
    let filippov_higher = match filippov_higher_attractors(game, &regions, opts.cycle_cap) {
        Ok(list) => list,
        Err(AttractorError::CycleCapExceeded { cap }) => {
            warnings.push(format!(
                "profile-graph cycle enumeration hit the cap of {cap}; \
                 higher-order Filippov list may be incomplete"
            ));
            Vec::new()
        }
        Err(e) => return Err(e.into()),
    };

    // two-action games get the complete scalar enumeration merged in, which
    // also covers stationary points on the domain boundary
    if game.k() == 2 {
        let extra = two_action_limits(game, &regions)?;
        for a in extra {
            let bucket = match a.kind {
                crate::attractor::AttractorKind::Classical => &mut classical,
                _ => &mut filippov2,
            };
            let dup = bucket.iter().any(|b| {
                b.point
                    .as_slice()
                    .iter()
                    .zip(a.point.as_slice())
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max)
                    <= 1e-8
            });
            if !dup {
                bucket.push(a);
            }
        }
        classical.sort_by(|a, b| a.point.as_slice()[0].partial_cmp(&b.point.as_slice()[0]).unwrap());
        filippov2.sort_by(|a, b| a.point.as_slice()[0].partial_cmp(&b.point.as_slice()[0]).unwrap());
    }

    if game.k() > 3 {
        let n = filippov2.len() + filippov_higher.len();
        if n > 0 {
            warnings.push(format!(
                "{n} Filippov attractor(s) on a {}-action game are conjectural: the sliding \
                 analysis is proved for three actions",
                game.k()
            ));
        }
    }

    let with_mfe = |list: Vec<Attractor>, warnings: &mut Vec<String>| -> Vec<AttractorReport> {
        list.into_iter()
            .map(|attractor| {
                let mfe = verify_mfe(game, &regions, &attractor);
                if !mfe.is_mfe {
                    warnings.push(format!(
                        "attractor at {:?} failed equilibrium verification: {}",
                        attractor.point.as_slice(),
                        mfe.violations.join("; ")
                    ));
                }
                AttractorReport { attractor, mfe }
            })
            .collect()
    };
    let attractors = AttractorsReport {
        classical: with_mfe(classical, &mut warnings),
        filippov2: with_mfe(filippov2, &mut warnings),
        filippov_higher: with_mfe(filippov_higher, &mut warnings),
    };

    let graph: RvGraph = build(&records, &regions, opts.rv_orientation);
    warnings.extend(graph.warnings.iter().cloned());
    let CycleSet { cycles, complete } = find_cycles(&graph, opts.cycle_cap);
    if !complete {
        warnings.push(format!(
            "RV cycle enumeration hit the cap of {}; cycle list incomplete",
            opts.cycle_cap
        ));
    }

    let mut cycle_tests = Vec::new();
    if opts.run_cycle_tests && game.k() == 3 {
        for cycle in &cycles {
            match test_cycle(game, &regions, &records, cycle, opts.fixed_point_tol) {
                Ok(test) => cycle_tests.push(test),
                Err(e) => warnings.push(format!("cycle test for {cycle:?} skipped: {e}")),
            }
        }
    }

    Ok(AnalysisReport {
        game: GameFile::from_game(game),
        regions,
        adjacency: records,
        attractors,
        rv_graph: RvGraphReport { edges: graph.edges, cycles, complete },
        cycle_tests,
        warnings,
    })
}

/// Convenience: distance from a point to the nearest attractor of a report.
pub fn nearest_attractor(report: &AnalysisReport, point: &Aggregate) -> Option<(usize, f64)> {
    report
        .attractor_list()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let d = a
                .point
                .as_slice()
                .iter()
                .zip(point.as_slice())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            (i, d)
        })
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preset::{queuing_preset, QueuingParams};

    fn queuing2(alpha_cm: f64) -> GameSpec {
        queuing_preset(&QueuingParams {
            rho: 0.4,
            p: 0.6,
            ps: 1.0,
            c: 2.0,
            alpha: vec![1.0 - alpha_cm, alpha_cm],
        })
        .unwrap()
    }

    #[test]
    fn analyze_classical_regime() {
        let report = analyze(&queuing2(0.5), &AnalysisOptions::default()).unwrap();
        assert_eq!(report.regions.len(), 5);
        assert_eq!(report.attractors.classical.len(), 1);
        assert!(report.attractors.filippov2.is_empty());
        assert!(report.rv_graph.cycles.is_empty());
        assert!(report.attractors.all().all(|a| a.mfe.is_mfe));
    }

    #[test]
    fn analyze_cyclic_regime_runs_cycle_tests() {
        // α_cm = 0.8 has the comparing 3-cycle plus a 5-cycle through every
        // region; the 3-cycle carries the certified fixed point.
        let report = analyze(&queuing2(0.8), &AnalysisOptions::default()).unwrap();
        assert!(report.attractors.classical.is_empty());
        assert_eq!(report.rv_graph.cycles.len(), 2);
        assert_eq!(report.cycle_tests.len(), 2);
        let test = report
            .cycle_tests
            .iter()
            .find(|t| t.cycle.len() == 3)
            .expect("three-region cycle test present");
        assert!(test.fixed_point.is_some());
        assert!(test.certificate.as_ref().unwrap().closed);
    }

    #[test]
    fn report_round_trips_identically() {
        let report = analyze(&queuing2(0.8), &AnalysisOptions::default()).unwrap();
        let text = serde_json::to_string_pretty(&report).unwrap();
        let parsed: AnalysisReport = serde_json::from_str(&text).unwrap();
        let text2 = serde_json::to_string_pretty(&parsed).unwrap();
        assert_eq!(text, text2);
    }

    #[test]
    fn warning_free_reports_carry_verified_equilibria() {
        let report = analyze(&queuing2(0.35), &AnalysisOptions::default()).unwrap();
        assert!(report.warnings.is_empty(), "warnings: {:?}", report.warnings);
        assert!(report.attractors.all().all(|a| a.mfe.is_mfe));
    }

    #[test]
    fn analyze_is_deterministic() {
        let a = serde_json::to_string(&analyze(&queuing2(0.35), &AnalysisOptions::default()).unwrap()).unwrap();
        let b = serde_json::to_string(&analyze(&queuing2(0.35), &AnalysisOptions::default()).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn two_action_game_report_merges_scalar_enumeration() {
        let game = GameSpec::new(
            vec!["avoid".into()],
            vec![1.0],
            vec![vec![1, 2]],
            vec![vec![vec![-1.0, 0.0], vec![0.0, -1.0]]],
            vec![vec![0.0, 0.0]],
        )
        .unwrap();
        let report = analyze(&game, &AnalysisOptions::default()).unwrap();
        assert_eq!(report.attractors.filippov2.len(), 1);
        assert_eq!(
            report.attractors.filippov2[0].attractor.point.as_slice(),
            &[0.5, 0.5]
        );
    }
}
