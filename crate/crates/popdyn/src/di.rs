//! Analytic solver for the piecewise-affine differential inclusion driven by
//! the mean dynamics: exponential flow toward the active region's drift
//! target, crossings through non-attracting facets, sliding along attracting
//! facets, cycle-certificate checking, and a deliberately simple fixed-step
//! integrator used as an independent cross-check.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{Aggregate, BorderFun, GameSpec};
use crate::region::{AdjacencyRecord, BorderClass, RegionVertex};

/// Tolerance for treating a point as lying on a border.
const ON_BORDER_ATOL: f64 = 1e-9;
/// Points within this of two or more borders count as corners.
const CORNER_ATOL: f64 = 1e-8;
/// Sliding is considered converged when this close to its limit.
const SLIDE_CONV_TOL: f64 = 1e-10;
const MAX_PIECES: usize = 100_000;

#[derive(Debug, Error)]
pub enum DiError {
    #[error("no crossing: h(start) = {h_start:.6e} and h(target) = {h_target:.6e} do not bracket zero")]
    NoCrossing { h_start: f64, h_target: f64 },
    #[error("facet between regions {0} and {1} is not attracting (Ic); no sliding target")]
    NotAttracting(usize, usize),
    #[error("start point touches {count} borders; the solver handles interior or single-facet starts")]
    UnsupportedStart { count: usize },
    #[error("start point is not inside any enumerated region")]
    StartOutsideRegions,
    #[error("cycle certificate needs more than two regions, got {0}")]
    CycleTooShort(usize),
    #[error("solution exceeded {MAX_PIECES} pieces before the horizon")]
    PieceOverflow,
    #[error("integrator step {0} must be at most 1e-3")]
    StepTooLarge(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum PieceMode {
    /// Exponential flow toward the region's drift target.
    Interior { region: usize },
    /// Motion constrained to the facet between two regions.
    Sliding { pair: (usize, usize) },
}

/// One closed-form arc `ω(t) = target + (start − target)·e^{−(t − t_start)}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionPiece {
    pub mode: PieceMode,
    pub start: Vec<f64>,
    pub target: Vec<f64>,
    pub t_start: f64,
    /// `f64::INFINITY` for a final absorbing or sliding-limit arc.
    pub t_end: f64,
}

impl SolutionPiece {
    pub fn at(&self, t: f64) -> Vec<f64> {
        let decay = (-(t - self.t_start)).exp();
        self.target
            .iter()
            .zip(&self.start)
            .map(|(b, s)| b + (s - b) * decay)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Termination {
    /// Pieces cover the requested horizon.
    Horizon,
    /// Final piece flows to a drift target interior to its own region.
    Absorbed { region: usize },
    /// Final piece slides to the facet's interior limit point.
    SlidingLimit { pair: (usize, usize) },
    /// Reached a point where more than two regions meet; no continuation rule.
    CornerHit { time: f64, point: Vec<f64> },
    /// Reached a facet whose classification is degenerate (a drift target on
    /// the border), where the crossing/sliding dichotomy breaks down.
    DegenerateFacet { time: f64, point: Vec<f64> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Solution {
    pub pieces: Vec<SolutionPiece>,
    pub termination: Termination,
}

impl Solution {
    /// Evaluates the solution at time t, if a piece covers it.
    pub fn at(&self, t: f64) -> Option<Vec<f64>> {
        self.pieces
            .iter()
            .find(|p| t >= p.t_start - 1e-12 && t <= p.t_end)
            .map(|p| p.at(t))
    }

    /// Last time the solution is defined for (∞ for absorbing/sliding ends).
    pub fn end_time(&self) -> f64 {
        self.pieces.last().map(|p| p.t_end).unwrap_or(0.0)
    }
}

#[derive(Debug, Clone)]
pub struct ExitHit {
    pub tau: f64,
    pub hit: Aggregate,
}

/// Time for the flow from `start` toward the region's target to reach the
/// boundary: `τ = ln((h(start) − h(b)) / (−h(b)))`, requiring the boundary
/// value at the target to oppose the one at the start.
pub fn exit_time(
    start: &Aggregate,
    region: &RegionVertex,
    boundary: &BorderFun,
) -> Result<ExitHit, DiError> {
    exit_time_raw(start.as_slice(), region.b.as_slice(), boundary)
}

/// `exit_time` on raw coordinate slices; `target` is the flow target.
pub fn exit_time_raw(
    start: &[f64],
    target: &[f64],
    boundary: &BorderFun,
) -> Result<ExitHit, DiError> {
    let h_start = boundary.eval(start);
    let h_target = boundary.eval(target);
    if h_target == 0.0 || h_start * h_target > 0.0 {
        return Err(DiError::NoCrossing { h_start, h_target });
    }
    let tau = ((h_start - h_target) / -h_target).ln();
    let decay = (-tau).exp();
    let hit: Vec<f64> = target
        .iter()
        .zip(start)
        .map(|(b, s)| b + (s - b) * decay)
        .collect();
    let hit = Aggregate::new(hit).expect("convex combination of simplex points");
    Ok(ExitHit { tau, hit })
}

#[derive(Debug, Clone)]
pub struct SlidingTarget {
    pub point: Aggregate,
    /// Set when the two drift targets coincide and the direction is undefined.
    pub degenerate: bool,
}

/// Limit point of sliding motion on an attracting facet: the intersection of
/// the segment [b_v, b_ṽ] with the border hyperplane.
pub fn sliding_target(
    record: &AdjacencyRecord,
    regions: &[RegionVertex],
) -> Result<SlidingTarget, DiError> {
    if record.classification == BorderClass::Ic {
        return Err(DiError::NotAttracting(record.pair.0, record.pair.1));
    }
    let bi = regions[record.pair.0 - 1].b.as_slice();
    let bj = regions[record.pair.1 - 1].b.as_slice();
    let (hi, hj) = record.h_at_targets;
    if (hi - hj).abs() < 1e-15 {
        return Ok(SlidingTarget {
            point: regions[record.pair.0 - 1].b.clone(),
            degenerate: true,
        });
    }
    let lam = hi / (hi - hj);
    let point: Vec<f64> = bi
        .iter()
        .zip(bj)
        .map(|(x, y)| x - (x - y) * lam)
        .collect();
    Ok(SlidingTarget {
        point: Aggregate::new(point).expect("on the segment between simplex points"),
        degenerate: false,
    })
}

/// Helper bundle of lookups reused across solver steps.
struct Context<'a> {
    game: &'a GameSpec,
    regions: &'a [RegionVertex],
    adjacency: &'a [AdjacencyRecord],
}

impl<'a> Context<'a> {
    fn region_id(&self, e: &[usize]) -> Option<usize> {
        self.regions.iter().find(|r| r.e == e).map(|r| r.id)
    }

    fn record(&self, a: usize, b: usize) -> Option<&'a AdjacencyRecord> {
        let key = if a < b { (a, b) } else { (b, a) };
        self.adjacency.iter().find(|r| r.pair == key)
    }

    /// Classifies a point by best-response ties: Ok(profile) when strictly
    /// interior, Err(list of (type, tied actions)) otherwise.
    fn classify(&self, point: &[f64], atol: f64) -> Result<Vec<usize>, Vec<(usize, Vec<usize>)>> {
        let mut profile = Vec::with_capacity(self.game.n_types());
        let mut ties = Vec::new();
        for theta in 0..self.game.n_types() {
            let brs = self.game.best_response_raw(theta, point, atol);
            if brs.len() == 1 {
                profile.push(brs[0]);
            } else {
                ties.push((theta, brs));
            }
        }
        if ties.is_empty() {
            Ok(profile)
        } else {
            Err(ties)
        }
    }
}

/// Solves the inclusion from `start` over `[0, horizon]`: interior arcs cross
/// non-attracting facets and slide on attracting ones; points where more than
/// two regions meet stop the solver, since no continuation rule applies.
pub fn solve(
    game: &GameSpec,
    regions: &[RegionVertex],
    adjacency: &[AdjacencyRecord],
    start: &Aggregate,
    horizon: f64,
) -> Result<Solution, DiError> {
    let ctx = Context { game, regions, adjacency };
    let mut pieces: Vec<SolutionPiece> = Vec::new();
    let mut t = 0.0f64;
    let mut x = start.as_slice().to_vec();

    enum State {
        Interior(usize),
        Sliding(usize, usize),
    }

    let mut state = match ctx.classify(&x, ON_BORDER_ATOL) {
        Ok(profile) => State::Interior(
            ctx.region_id(&profile).ok_or(DiError::StartOutsideRegions)?,
        ),
        Err(ties) => {
            if ties.len() != 1 || ties[0].1.len() != 2 {
                return Err(DiError::UnsupportedStart {
                    count: ties.iter().map(|(_, t)| t.len() - 1).sum(),
                });
            }
            // lift the tie into the two candidate profiles
            let (theta, tied) = (&ties[0].0, &ties[0].1);
            let mut base = Vec::with_capacity(game.n_types());
            for th in 0..game.n_types() {
                if th == *theta {
                    base.push(tied[0]);
                } else {
                    let brs = game.best_response_raw(th, &x, ON_BORDER_ATOL);
                    base.push(brs[0]);
                }
            }
            let mut other = base.clone();
            other[*theta] = tied[1];
            let va = ctx.region_id(&base).ok_or(DiError::StartOutsideRegions)?;
            let vb = ctx.region_id(&other).ok_or(DiError::StartOutsideRegions)?;
            let rec = ctx
                .record(va, vb)
                .ok_or(DiError::UnsupportedStart { count: 2 })?;
            match rec.classification {
                BorderClass::Istar => State::Sliding(rec.pair.0, rec.pair.1),
                BorderClass::Ic => {
                    // enter the region whose own drift target pulls inward
                    let enter_first = rec.h_at_targets.0 > 0.0;
                    State::Interior(if enter_first { rec.pair.0 } else { rec.pair.1 })
                }
                BorderClass::Degenerate => {
                    return Ok(Solution {
                        pieces,
                        termination: Termination::DegenerateFacet { time: t, point: x },
                    })
                }
            }
        }
    };

    while pieces.len() < MAX_PIECES {
        if t >= horizon {
            return Ok(Solution { pieces, termination: Termination::Horizon });
        }
        match state {
            State::Interior(v) => {
                let region = &regions[v - 1];
                let b = region.b.as_slice();
                // earliest border crossing among the region's defining borders
                let mut first: Option<(f64, usize, usize)> = None; // (tau, theta, alt)
                for (theta, &a) in region.e.iter().enumerate() {
                    for &alt in game.action_set(theta) {
                        if alt == a {
                            continue;
                        }
                        let h = game.border(theta, a, alt).expect("profile actions");
                        let hx = h.eval(&x).max(0.0);
                        let hb = h.eval(b);
                        if hb < 0.0 {
                            let tau = ((hx - hb) / -hb).ln();
                            if first.map(|(t0, _, _)| tau < t0).unwrap_or(true) {
                                first = Some((tau, theta, alt));
                            }
                        }
                    }
                }
                let Some((tau, theta, alt)) = first else {
                    // absorbing region: b_v ∈ Q_v
                    pieces.push(SolutionPiece {
                        mode: PieceMode::Interior { region: v },
                        start: x,
                        target: b.to_vec(),
                        t_start: t,
                        t_end: f64::INFINITY,
                    });
                    return Ok(Solution {
                        pieces,
                        termination: Termination::Absorbed { region: v },
                    });
                };
                let decay = (-tau).exp();
                let hit: Vec<f64> = b
                    .iter()
                    .zip(&x)
                    .map(|(bi, xi)| bi + (xi - bi) * decay)
                    .collect();
                pieces.push(SolutionPiece {
                    mode: PieceMode::Interior { region: v },
                    start: x.clone(),
                    target: b.to_vec(),
                    t_start: t,
                    t_end: t + tau,
                });
                t += tau;
                x = hit;
                // corner test: any tie beyond the crossed pair stops the solver
                match ctx.classify(&x, CORNER_ATOL) {
                    Err(ties)
                        if ties.len() == 1
                            && ties[0].1.len() == 2
                            && ties[0].0 == theta
                            && ties[0].1.contains(&alt) => {}
                    _ => {
                        return Ok(Solution {
                            pieces,
                            termination: Termination::CornerHit { time: t, point: x },
                        })
                    }
                }
                let mut other = region.e.clone();
                other[theta] = alt;
                let Some(w) = ctx.region_id(&other) else {
                    return Ok(Solution {
                        pieces,
                        termination: Termination::CornerHit { time: t, point: x },
                    });
                };
                let Some(rec) = ctx.record(v, w) else {
                    return Ok(Solution {
                        pieces,
                        termination: Termination::CornerHit { time: t, point: x },
                    });
                };
                state = match rec.classification {
                    BorderClass::Ic => State::Interior(w),
                    BorderClass::Istar => State::Sliding(rec.pair.0, rec.pair.1),
                    BorderClass::Degenerate => {
                        return Ok(Solution {
                            pieces,
                            termination: Termination::DegenerateFacet { time: t, point: x },
                        })
                    }
                };
            }
            State::Sliding(vi, vj) => {
                let rec = ctx.record(vi, vj).expect("sliding state from a record");
                let target = sliding_target(rec, regions)?;
                let omega_inf = target.point.as_slice();
                // the facet stays valid while the other defining inequalities
                // of both regions remain nonnegative along the slide
                let mut first: Option<f64> = None;
                for (rid, other_rid) in [(vi, vj), (vj, vi)] {
                    let region = &regions[rid - 1];
                    let other = &regions[other_rid - 1];
                    let theta_pair = region
                        .e
                        .iter()
                        .zip(&other.e)
                        .position(|(a, b)| a != b)
                        .expect("pair differs in one type");
                    for (theta, &a) in region.e.iter().enumerate() {
                        for &alt in game.action_set(theta) {
                            if alt == a || (theta == theta_pair && alt == other.e[theta_pair]) {
                                continue;
                            }
                            let h = game.border(theta, a, alt).expect("profile actions");
                            let hx = h.eval(&x).max(0.0);
                            let hinf = h.eval(omega_inf);
                            if hinf < 0.0 {
                                let tau = ((hx - hinf) / -hinf).ln();
                                if first.map(|t0| tau < t0).unwrap_or(true) {
                                    first = Some(tau);
                                }
                            }
                        }
                    }
                }
                let pair = (vi, vj);
                match first {
                    None => {
                        pieces.push(SolutionPiece {
                            mode: PieceMode::Sliding { pair },
                            start: x,
                            target: omega_inf.to_vec(),
                            t_start: t,
                            t_end: f64::INFINITY,
                        });
                        return Ok(Solution {
                            pieces,
                            termination: Termination::SlidingLimit { pair },
                        });
                    }
                    Some(tau) => {
                        let decay = (-tau).exp();
                        let endpoint: Vec<f64> = omega_inf
                            .iter()
                            .zip(&x)
                            .map(|(oi, xi)| oi + (xi - oi) * decay)
                            .collect();
                        let dist = endpoint
                            .iter()
                            .zip(omega_inf)
                            .map(|(a, b)| (a - b).abs())
                            .fold(0.0, f64::max);
                        pieces.push(SolutionPiece {
                            mode: PieceMode::Sliding { pair },
                            start: x.clone(),
                            target: omega_inf.to_vec(),
                            t_start: t,
                            t_end: t + tau,
                        });
                        t += tau;
                        x = endpoint;
                        if dist < SLIDE_CONV_TOL {
                            return Ok(Solution {
                                pieces,
                                termination: Termination::SlidingLimit { pair },
                            });
                        }
                        // the facet's validity interval ends where a third
                        // region's closure is reached: a corner by definition
                        return Ok(Solution {
                            pieces,
                            termination: Termination::CornerHit { time: t, point: x },
                        });
                    }
                }
            }
        }
    }
    Err(DiError::PieceOverflow)
}

/// A closed sequence of region crossings with its switch points and times.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CycleCertificate {
    /// Regions traversed, in order.
    pub region_sequence: Vec<usize>,
    /// l+1 points; the first lies on the facet entered from the last region,
    /// and equals the last when `closed`.
    pub switch_points: Vec<Vec<f64>>,
    /// Cumulative switch epochs, one per hop.
    pub switch_times: Vec<f64>,
    pub closed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub valid: bool,
    /// |ω*_{j_l} − ω*_{j_0}|_∞ after re-deriving every hop.
    pub closure_residual: f64,
    /// Worst |h| of a re-derived switch point on its facet.
    pub max_border_residual: f64,
    /// Worst deviation between claimed and re-derived switch points.
    pub max_switch_residual: f64,
    pub crossing_conditions_hold: bool,
    pub notes: Vec<String>,
}

/// Re-derives each switch point with `exit_time`, checks closure within 1e-6
/// and the facet crossing conditions (every hop's facet non-attracting with
/// both adjacent drift targets on the same side).
pub fn check_cycle_certificate(
    game: &GameSpec,
    regions: &[RegionVertex],
    candidate: &CycleCertificate,
) -> Result<CertificateCheck, DiError> {
    let l = candidate.region_sequence.len();
    if l <= 2 {
        return Err(DiError::CycleTooShort(l));
    }
    let mut notes = Vec::new();
    let mut crossing_ok = true;
    let mut max_border = 0.0f64;
    let mut max_switch = 0.0f64;

    let border_between = |a: usize, b: usize| -> BorderFun {
        let ra = &regions[a - 1];
        let rb = &regions[b - 1];
        let theta = ra
            .e
            .iter()
            .zip(&rb.e)
            .position(|(x, y)| x != y)
            .expect("cycle regions differ in one type");
        game.border(theta, ra.e[theta], rb.e[theta])
            .expect("profile actions")
    };

    // crossing condition per facet: both adjacent targets on the same side
    for i in 0..l {
        let prev = candidate.region_sequence[(i + l - 1) % l];
        let cur = candidate.region_sequence[i];
        let h = border_between(prev, cur);
        let prod = h.eval(regions[prev - 1].b.as_slice()) * h.eval(regions[cur - 1].b.as_slice());
        if prod <= 0.0 {
            crossing_ok = false;
            notes.push(format!(
                "facet between regions {prev} and {cur} violates the crossing condition \
                 (product {prod:.3e})"
            ));
        }
    }

    let mut x = candidate.switch_points[0].clone();
    for i in 0..l {
        let cur = candidate.region_sequence[i];
        let next = candidate.region_sequence[(i + 1) % l];
        let boundary = border_between(cur, next);
        let region = &regions[cur - 1];
        match exit_time_raw(&x, region.b.as_slice(), &boundary) {
            Ok(ExitHit { hit, .. }) => {
                let hit = hit.into_vec();
                max_border = max_border.max(boundary.eval(&hit).abs());
                if let Some(claim) = candidate.switch_points.get(i + 1) {
                    let dev = hit
                        .iter()
                        .zip(claim)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    max_switch = max_switch.max(dev);
                }
                x = hit;
            }
            Err(e) => {
                notes.push(format!("hop {i} from region {cur} cannot cross: {e}"));
                return Ok(CertificateCheck {
                    valid: false,
                    closure_residual: f64::INFINITY,
                    max_border_residual: max_border,
                    max_switch_residual: max_switch,
                    crossing_conditions_hold: crossing_ok,
                    notes,
                });
            }
        }
    }
    let closure_residual = x
        .iter()
        .zip(&candidate.switch_points[0])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(CertificateCheck {
        valid: crossing_ok && closure_residual < 1e-6,
        closure_residual,
        max_border_residual: max_border,
        max_switch_residual: max_switch,
        crossing_conditions_hold: crossing_ok,
        notes,
    })
}

#[derive(Debug, Clone)]
pub struct OracleTrajectory {
    pub dt: f64,
    /// State after every step, including the initial point.
    pub points: Vec<Vec<f64>>,
}

impl OracleTrajectory {
    pub fn at_step(&self, i: usize) -> &[f64] {
        &self.points[i]
    }
}

/// Fixed-step explicit integration of the tie-averaged drift with event
/// clamping: when a step straddles a border, the endpoint is pulled back onto
/// the first hyperplane crossed, along the step direction. Deliberately
/// independent of the analytic solver.
pub fn oracle_integrate(
    game: &GameSpec,
    start: &Aggregate,
    horizon: f64,
    dt: f64,
) -> Result<OracleTrajectory, DiError> {
    if dt > 1e-3 {
        return Err(DiError::StepTooLarge(dt));
    }
    // one border per unordered action pair per type
    let borders: Vec<BorderFun> = game
        .border_functions()
        .into_iter()
        .filter(|h| h.index.0 < h.index.1)
        .collect();
    let steps = (horizon / dt).ceil() as usize;
    let mut points = Vec::with_capacity(steps + 1);
    let mut x = start.as_slice().to_vec();
    points.push(x.clone());
    for _ in 0..steps {
        // sub-step through border crossings: project onto the first violated
        // hyperplane along the step direction, then spend the remaining time
        // from there; points already on a border step off freely
        let mut remaining = dt;
        for _ in 0..8 {
            let g = game.drift_raw(&x, 1e-9);
            let next: Vec<f64> = x
                .iter()
                .zip(&g)
                .map(|(xi, gi)| xi + remaining * gi)
                .collect();
            let mut best: Option<f64> = None;
            for h in &borders {
                let hx = h.eval(&x);
                let hn = h.eval(&next);
                if hx.abs() > 1e-12 && hx * hn < 0.0 {
                    let s = hx / (hx - hn);
                    if best.map(|b| s < b).unwrap_or(true) {
                        best = Some(s);
                    }
                }
            }
            match best {
                Some(s) => {
                    for (xi, ni) in x.iter_mut().zip(&next) {
                        *xi += s * (ni - *xi);
                    }
                    remaining *= 1.0 - s;
                    if remaining <= 0.0 {
                        break;
                    }
                }
                None => {
                    x = next;
                    break;
                }
            }
        }
        points.push(x.clone());
    }
    Ok(OracleTrajectory { dt, points })
}
