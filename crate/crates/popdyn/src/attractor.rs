//! Singleton limit candidates of the mean dynamics: classical attractors
//! (drift targets interior to their own region), Filippov points on single
//! facets and at higher-order border intersections, the complete two-action
//! limit set, and verification that every candidate is an aggregate mean-field
//! equilibrium.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{Aggregate, GameSpec};
use crate::lp::{LinearProgram, LpError, LpOutcome};
use crate::region::{
    preference_changes, region_halfspaces, AdjacencyRecord, BorderClass, RegionVertex,
};

/// Strictness margin for interior membership tests.
pub const INTERIOR_EPS: f64 = 1e-9;
/// Facet membership allows this much undershoot on the non-border inequalities.
pub const FACET_MEMBER_TOL: f64 = -1e-9;
/// Attractors closer than this are considered the same point.
pub const DEDUP_TOL: f64 = 1e-8;

pub const DEFAULT_CYCLE_CAP: usize = 10_000;

#[derive(Debug, Error)]
pub enum AttractorError {
    #[error("game has {0} actions; the two-action limit set needs exactly 2")]
    NotTwoActions(usize),
    #[error("cycle enumeration cap of {cap} exceeded; attractor list may be incomplete")]
    CycleCapExceeded { cap: usize },
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttractorKind {
    Classical,
    Filippov2,
    FilippovHigher,
}

/// A singleton limit candidate: the point, the regions whose drift targets
/// support it, the convex weights, and the induced per-type equilibrium
/// profile.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Attractor {
    pub kind: AttractorKind,
    pub point: Aggregate,
    pub support_regions: Vec<usize>,
    pub weights: Vec<f64>,
    /// μ*_θ as a length-k distribution per type (zero off A_θ).
    pub mfe_profile: Vec<Vec<f64>>,
    /// Filippov points are proved to be limit sets only for k ≤ 3; for larger
    /// games they are reported as conjectural.
    pub conjectural: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MfeReport {
    pub is_mfe: bool,
    pub violations: Vec<String>,
}

/// μ*_θ^a = Σ_v λ_v·1{a = e_{v,θ}} over the support regions.
fn mfe_profile(
    game: &GameSpec,
    regions: &[RegionVertex],
    support: &[usize],
    weights: &[f64],
) -> Vec<Vec<f64>> {
    let mut mu = vec![vec![0.0; game.k()]; game.n_types()];
    for (&v, &w) in support.iter().zip(weights) {
        let region = &regions[v - 1];
        for (theta, &a) in region.e.iter().enumerate() {
            mu[theta][a - 1] += w;
        }
    }
    mu
}

fn make_attractor(
    game: &GameSpec,
    regions: &[RegionVertex],
    kind: AttractorKind,
    point: Aggregate,
    support: Vec<usize>,
    weights: Vec<f64>,
) -> Attractor {
    let mfe = mfe_profile(game, regions, &support, &weights);
    Attractor {
        kind,
        point,
        support_regions: support,
        weights,
        mfe_profile: mfe,
        conjectural: kind != AttractorKind::Classical && game.k() > 3,
    }
}

fn dist_inf(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Drift targets strictly inside their own region: every defining inequality
/// positive with margin at b_v.
pub fn classical_attractors(game: &GameSpec, regions: &[RegionVertex]) -> Vec<Attractor> {
    regions
        .iter()
        .filter(|r| {
            region_halfspaces(game, &r.e).iter().all(|(grad, off)| {
                grad.iter().zip(r.b.as_slice()).map(|(g, w)| g * w).sum::<f64>() + off
                    > INTERIOR_EPS
            })
        })
        .map(|r| {
            make_attractor(
                game,
                regions,
                AttractorKind::Classical,
                r.b.clone(),
                vec![r.id],
                vec![1.0],
            )
        })
        .collect()
}

/// For every Istar pair, the intersection of segment [b_v, b_ṽ] with the
/// border hyperplane, kept iff it lies on the actual shared facet.
pub fn filippov2_attractors(
    game: &GameSpec,
    regions: &[RegionVertex],
    adjacency: &[AdjacencyRecord],
) -> Vec<Attractor> {
    let mut out = Vec::new();
    for rec in adjacency {
        if rec.classification != BorderClass::Istar {
            continue;
        }
        let (hv, hw) = rec.h_at_targets;
        let lambda = (hw / (hv - hw)).abs();
        let v = &regions[rec.pair.0 - 1];
        let w = &regions[rec.pair.1 - 1];
        let point: Vec<f64> = v
            .b
            .as_slice()
            .iter()
            .zip(w.b.as_slice())
            .map(|(bv, bw)| lambda * bv + (1.0 - lambda) * bw)
            .collect();
        if !on_shared_facet(game, v, w, rec, &point) {
            continue;
        }
        let point = Aggregate::new(point).expect("convex combination of simplex points");
        out.push(make_attractor(
            game,
            regions,
            AttractorKind::Filippov2,
            point,
            vec![v.id, w.id],
            vec![lambda, 1.0 - lambda],
        ));
    }
    out
}

/// All defining inequalities of both regions other than the shared border
/// must be ≥ −1e-9 at the candidate point.
fn on_shared_facet(
    game: &GameSpec,
    v: &RegionVertex,
    w: &RegionVertex,
    rec: &AdjacencyRecord,
    point: &[f64],
) -> bool {
    let theta = rec.changing_type;
    for (region, other_action) in [(v, rec.actions.1), (w, rec.actions.0)] {
        for (t, &a) in region.e.iter().enumerate() {
            for &alt in game.action_set(t) {
                if alt == a || (t == theta && alt == other_action) {
                    continue;
                }
                let h = game.border(t, a, alt).expect("profile actions available");
                if h.eval(point) < FACET_MEMBER_TOL {
                    return false;
                }
            }
        }
    }
    true
}

/// Undirected simple cycles (length ≥ 3) in the single-change profile graph,
/// canonicalized to start at their smallest vertex.
fn undirected_cycles(
    n_vertices: usize,
    edges: &[(usize, usize)],
    cap: usize,
) -> Result<Vec<Vec<usize>>, AttractorError> {
    let mut adj = vec![Vec::new(); n_vertices + 1];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    for nbrs in &mut adj {
        nbrs.sort_unstable();
    }
    let mut cycles = Vec::new();
    let mut path = Vec::new();
    let mut on_path = vec![false; n_vertices + 1];

    fn dfs(
        at: usize,
        start: usize,
        adj: &[Vec<usize>],
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        cycles: &mut Vec<Vec<usize>>,
        cap: usize,
    ) -> bool {
        for &next in &adj[at] {
            if next == start && path.len() >= 3 {
                // canonical: second vertex smaller than last avoids reversals
                if path[1] < path[path.len() - 1] {
                    cycles.push(path.clone());
                    if cycles.len() > cap {
                        return false;
                    }
                }
            } else if next > start && !on_path[next] {
                path.push(next);
                on_path[next] = true;
                let ok = dfs(next, start, adj, path, on_path, cycles, cap);
                path.pop();
                on_path[next] = false;
                if !ok {
                    return false;
                }
            }
        }
        true
    }

    for start in 1..=n_vertices {
        path.clear();
        path.push(start);
        on_path.iter_mut().for_each(|b| *b = false);
        on_path[start] = true;
        if !dfs(start, start, &adj, &mut path, &mut on_path, &mut cycles, cap) {
            return Err(AttractorError::CycleCapExceeded { cap });
        }
    }
    Ok(cycles)
}

/// Higher-order Filippov points: for every simple cycle in the single-change
/// graph, the common point of the cycle's border hyperplanes, kept iff the
/// convex-combination membership program over the cycle's drift targets is
/// feasible.
pub fn filippov_higher_attractors(
    game: &GameSpec,
    regions: &[RegionVertex],
    cap: usize,
) -> Result<Vec<Attractor>, AttractorError> {
    let mut edges = Vec::new();
    for (i, v) in regions.iter().enumerate() {
        for w in &regions[i + 1..] {
            if preference_changes(&v.e, &w.e) == 1 {
                edges.push((v.id, w.id));
            }
        }
    }
    let cycles = undirected_cycles(regions.len(), &edges, cap)?;

    let mut out: Vec<Attractor> = Vec::new();
    'cycles: for cycle in cycles {
        let l = cycle.len();
        // border of each hop, oriented from the first region of the pair
        let mut borders = Vec::with_capacity(l);
        for i in 0..l {
            let v = &regions[cycle[i] - 1];
            let w = &regions[cycle[(i + 1) % l] - 1];
            let theta = v.e.iter().zip(&w.e).position(|(a, b)| a != b).unwrap();
            let h = game
                .border(theta, v.e[theta], w.e[theta])
                .expect("profile actions available");
            borders.push(h);
        }
        // the hyperplanes must share a point on the simplex plane at all
        if common_point(game.k(), &borders).is_none() {
            continue;
        }
        // membership program: Σ_v λ_v h_i(b_v) = 0 ∀i, λ on the simplex
        let eq: Vec<(Vec<f64>, f64)> = borders
            .iter()
            .map(|h| {
                (
                    cycle
                        .iter()
                        .map(|&v| h.eval(regions[v - 1].b.as_slice()))
                        .collect(),
                    0.0,
                )
            })
            .chain(std::iter::once((vec![1.0; l], 1.0)))
            .collect();
        let lp = LinearProgram {
            objective: vec![0.0; l],
            eq,
            ge: vec![],
            bounds: vec![(Some(0.0), Some(1.0)); l],
        };
        let lambda = match lp.solve() {
            Ok(LpOutcome::Optimal { x, .. }) => x,
            Ok(_) => continue,
            Err(e) => return Err(e.into()),
        };
        let mut point = vec![0.0; game.k()];
        for (&v, &lam) in cycle.iter().zip(&lambda) {
            for (p, b) in point.iter_mut().zip(regions[v - 1].b.as_slice()) {
                *p += lam * b;
            }
        }
        // the point must lie in the closure of every cycle region — the
        // hyperplanes extend beyond the facet complex, the candidate may not
        let in_closures = cycle.iter().all(|&v| {
            region_halfspaces(game, &regions[v - 1].e)
                .iter()
                .all(|(grad, off)| {
                    grad.iter().zip(&point).map(|(g, w)| g * w).sum::<f64>() + off
                        >= FACET_MEMBER_TOL
                })
        });
        if !in_closures {
            continue;
        }
        for existing in &out {
            if dist_inf(existing.point.as_slice(), &point) <= DEDUP_TOL {
                continue 'cycles;
            }
        }
        let point = Aggregate::new(point).expect("convex combination of simplex points");
        out.push(make_attractor(
            game,
            regions,
            AttractorKind::FilippovHigher,
            point,
            cycle.clone(),
            lambda,
        ));
    }
    Ok(out)
}

/// Solves for a common point of the border hyperplanes on the simplex plane;
/// `None` if the equality system is inconsistent.
fn common_point(k: usize, borders: &[crate::game::BorderFun]) -> Option<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = borders
        .iter()
        .map(|h| {
            let mut r = h.grad.clone();
            r.push(-h.offset);
            r
        })
        .collect();
    let mut simplex = vec![1.0; k];
    simplex.push(1.0);
    rows.push(simplex);
    // Gaussian elimination with partial pivoting; consistency check only.
    let m = rows.len();
    let mut rank_cols = Vec::new();
    let mut row = 0usize;
    for col in 0..k {
        let piv = (row..m).max_by(|&a, &b| rows[a][col].abs().partial_cmp(&rows[b][col].abs()).unwrap())?;
        if rows[piv][col].abs() < 1e-11 {
            continue;
        }
        rows.swap(row, piv);
        let pv = rows[row][col];
        for c in col..=k {
            rows[row][c] /= pv;
        }
        for r in 0..m {
            if r != row && rows[r][col].abs() > 0.0 {
                let f = rows[r][col];
                for c in col..=k {
                    rows[r][c] -= f * rows[row][c];
                }
            }
        }
        rank_cols.push(col);
        row += 1;
        if row == m {
            break;
        }
    }
    // inconsistent if a zero row has nonzero rhs
    for r in row..m {
        if rows[r][k].abs() > 1e-9 {
            return None;
        }
    }
    let mut x = vec![0.0; k];
    for (r, &c) in rank_cols.iter().enumerate() {
        x[c] = rows[r][k];
    }
    Some(x)
}

/// The complete two-action limit set: interior zeros of the drift per
/// interval plus border points where zero lies between the one-sided limits.
pub fn two_action_limits(
    game: &GameSpec,
    regions: &[RegionVertex],
) -> Result<Vec<Attractor>, AttractorError> {
    if game.k() != 2 {
        return Err(AttractorError::NotTwoActions(game.k()));
    }
    // Reduced coordinate ω := ω¹; border zeros inside (0,1).
    let mut zeros: Vec<f64> = Vec::new();
    for theta in 0..game.n_types() {
        let h = game.border(theta, 1, 2).expect("both actions shared");
        // h(ω) = slope·ω + intercept in the reduced coordinate
        let slope = h.grad[0] - h.grad[1];
        let intercept = h.offset + h.grad[1];
        if slope.abs() < 1e-14 {
            continue; // type never indifferent (or indifferent everywhere)
        }
        let z = -intercept / slope;
        if (0.0..=1.0).contains(&z) {
            zeros.push(z);
        }
    }
    zeros.sort_by(|a, b| a.partial_cmp(b).unwrap());
    zeros.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    // interval boundaries: 0, zeros..., 1
    let mut cuts = vec![0.0];
    cuts.extend(zeros.iter().copied().filter(|z| *z > 1e-12 && *z < 1.0 - 1e-12));
    cuts.push(1.0);

    let share_choosing_one = |omega1: f64| -> f64 {
        let omega = [omega1, 1.0 - omega1];
        (0..game.n_types())
            .map(|theta| {
                let brs = game.best_response_raw(theta, &omega, 0.0);
                if brs.contains(&1) {
                    game.alpha()[theta] / brs.len() as f64
                } else {
                    0.0
                }
            })
            .sum()
    };

    let region_id_at = |omega1: f64| -> usize {
        let omega = [omega1, 1.0 - omega1];
        let e: Vec<usize> = (0..game.n_types())
            .map(|theta| game.best_response_raw(theta, &omega, 0.0)[0])
            .collect();
        regions
            .iter()
            .find(|r| r.e == e)
            .map(|r| r.id)
            .expect("interval midpoint lies in an enumerated region")
    };

    let mut out: Vec<Attractor> = Vec::new();
    let push = |att: Attractor, out: &mut Vec<Attractor>| {
        if out
            .iter()
            .all(|a| dist_inf(a.point.as_slice(), att.point.as_slice()) > DEDUP_TOL)
        {
            out.push(att);
        }
    };

    // interior zeros: within each interval, g(ω) = b − ω with constant b
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mid = 0.5 * (lo + hi);
        let b = share_choosing_one(mid);
        let inside = (b > lo + 1e-12 && b < hi - 1e-12)
            || (lo == 0.0 && (0.0..hi - 1e-12).contains(&b))
            || (hi == 1.0 && b > lo + 1e-12 && b <= 1.0);
        if inside {
            let id = region_id_at(mid);
            let point = Aggregate::new(vec![b, 1.0 - b]).expect("on the 1-simplex");
            push(
                make_attractor(game, regions, AttractorKind::Classical, point, vec![id], vec![1.0]),
                &mut out,
            );
        }
    }

    // border points: 0 between the one-sided drift limits
    for &z in &zeros {
        let eps = 1e-9;
        let left = if z > eps { Some(share_choosing_one(z - eps) - z) } else { None };
        let right = if z < 1.0 - eps {
            Some(share_choosing_one(z + eps) - z)
        } else {
            None
        };
        let (g_lo, g_hi) = match (left, right) {
            (Some(a), Some(b)) => (a.min(b), a.max(b)),
            (Some(a), None) => (a, a),
            (None, Some(b)) => (b, b),
            (None, None) => continue,
        };
        if g_lo <= 1e-12 && g_hi >= -1e-12 {
            let point = Aggregate::new(vec![z, 1.0 - z]).expect("on the 1-simplex");
            let (support, weights) = match (left, right) {
                (Some(gl), Some(gr)) => {
                    let (bl, br) = (gl + z, gr + z);
                    let vl = region_id_at(z - eps);
                    let vr = region_id_at(z + eps);
                    if (bl - br).abs() < 1e-12 {
                        (vec![vl], vec![1.0])
                    } else {
                        // z = λ·bl + (1−λ)·br
                        let lam = ((z - br) / (bl - br)).clamp(0.0, 1.0);
                        (vec![vl, vr], vec![lam, 1.0 - lam])
                    }
                }
                (Some(_), None) => (vec![region_id_at(z - eps)], vec![1.0]),
                (None, Some(_)) => (vec![region_id_at(z + eps)], vec![1.0]),
                (None, None) => unreachable!(),
            };
            push(
                make_attractor(game, regions, AttractorKind::Filippov2, point, support, weights),
                &mut out,
            );
        }
    }
    out.sort_by(|a, b| {
        a.point.as_slice()[0]
            .partial_cmp(&b.point.as_slice()[0])
            .unwrap()
    });
    Ok(out)
}

/// Rebuilds μ* from the attractor's support and weights and checks the
/// equilibrium conditions: support inclusion in the best-response sets at the
/// point, aggregate consistency, and weight sanity.
pub fn verify_mfe(game: &GameSpec, regions: &[RegionVertex], attractor: &Attractor) -> MfeReport {
    let mut violations = Vec::new();
    let point = attractor.point.as_slice();

    let wsum: f64 = attractor.weights.iter().sum();
    if attractor.weights.iter().any(|w| *w < -1e-12) || (wsum - 1.0).abs() > 1e-9 {
        violations.push(format!(
            "weights are not a convex combination (sum {wsum:.12})"
        ));
    }
    let mut combo = vec![0.0; game.k()];
    for (&v, &w) in attractor.support_regions.iter().zip(&attractor.weights) {
        for (c, b) in combo.iter_mut().zip(regions[v - 1].b.as_slice()) {
            *c += w * b;
        }
    }
    let residual = dist_inf(&combo, point);
    if residual > 1e-8 {
        violations.push(format!(
            "support combination misses the point by {residual:.3e}"
        ));
    }

    let mu = mfe_profile(game, regions, &attractor.support_regions, &attractor.weights);
    for (theta, mu_t) in mu.iter().enumerate() {
        let brs = game.best_response_raw(theta, point, 1e-8);
        for (a0, &mass) in mu_t.iter().enumerate() {
            if mass > 1e-12 && !brs.contains(&(a0 + 1)) {
                violations.push(format!(
                    "type {theta} puts mass {mass:.6} on action {} outside its best-response set",
                    a0 + 1
                ));
            }
        }
    }
    let mut aggregate = vec![0.0; game.k()];
    for (theta, mu_t) in mu.iter().enumerate() {
        for (agg, m) in aggregate.iter_mut().zip(mu_t) {
            *agg += game.alpha()[theta] * m;
        }
    }
    let residual = dist_inf(&aggregate, point);
    if residual > 1e-8 {
        violations.push(format!(
            "aggregate of per-type profiles misses the point by {residual:.3e}"
        ));
    }
    MfeReport { is_mfe: violations.is_empty(), violations }
}
