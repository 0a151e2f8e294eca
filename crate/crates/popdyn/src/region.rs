//! Preference-region analysis: enumerates the nonempty regions Q_v (one per
//! action profile with every type strictly preferring its assigned action),
//! their drift targets b_v, and the adjacency structure between regions that
//! differ in exactly one type's action, classified by whether the separating
//! border can be crossed (Ic) or hosts sliding solutions (Istar).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{Aggregate, BorderFun, GameSpec};
use crate::lp::{strict_feasible, LinearProgram, LpError, LpOutcome};

/// Margin a region witness must clear on every defining strict inequality.
pub const REGION_EPS: f64 = 1e-9;
/// Facets must admit this much interior slack to count as genuine adjacency.
pub const FACET_EPS: f64 = 1e-9;
/// |h(b_v)·h(b_ṽ)| at or below this is classified degenerate.
pub const DEGENERATE_TOL: f64 = 1e-12;

const MAX_PROFILES: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum RegionError {
    #[error("combinatorial blowup: {profiles} action profiles exceed the cap {MAX_PROFILES}")]
    CombinatorialBlowup { profiles: usize },
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// A nonempty preference region: its action profile, drift target, and an
/// interior witness point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionVertex {
    pub id: usize,
    /// Per-type assigned action, e[θ] ∈ A_θ.
    pub e: Vec<usize>,
    /// b^a = Σ_θ α_θ·1{e_θ = a}; the in-region flow target.
    pub b: Aggregate,
    pub witness: Aggregate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BorderClass {
    /// Both drift targets on the same side: solutions cross, never linger.
    Ic,
    /// Drift targets on opposite sides: the facet hosts sliding solutions.
    Istar,
    /// A drift target sits on the border itself (assumption G.3 fails here).
    Degenerate,
}

/// Adjacency between two regions whose profiles differ in exactly one type.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdjacencyRecord {
    /// Region ids, lower first.
    pub pair: (usize, usize),
    pub changing_type: usize,
    /// (e_{v,θ}, e_{ṽ,θ}) for the changing type θ.
    pub actions: (usize, usize),
    /// h_(v,ṽ) = h^{a,ã}_θ; positive on Q_v's side.
    pub border: BorderFun,
    pub classification: BorderClass,
    /// (h(b_v), h(b_ṽ)).
    pub h_at_targets: (f64, f64),
}

/// Defining halfspaces of Q_e: h^{e_θ,a'}_θ as (grad, offset), for every type
/// and every alternative action.
pub(crate) fn region_halfspaces(game: &GameSpec, e: &[usize]) -> Vec<(Vec<f64>, f64)> {
    let mut out = Vec::new();
    for (theta, &a) in e.iter().enumerate() {
        for &alt in game.action_set(theta) {
            if alt != a {
                let h = game.border(theta, a, alt).expect("profile actions available");
                out.push((h.grad, h.offset));
            }
        }
    }
    out
}

/// Drift target of profile `e`: the aggregate when each type mass sits on its
/// assigned action.
pub(crate) fn drift_target(game: &GameSpec, e: &[usize]) -> Aggregate {
    let mut b = vec![0.0; game.k()];
    for (theta, &a) in e.iter().enumerate() {
        b[a - 1] += game.alpha()[theta];
    }
    Aggregate::new(b).expect("alpha is a probability vector")
}

/// Enumerates the nonempty regions in lexicographic profile order.
pub fn enumerate_regions(game: &GameSpec) -> Result<Vec<RegionVertex>, RegionError> {
    let profiles: usize = game
        .action_sets()
        .iter()
        .map(|s| s.len())
        .try_fold(1usize, |acc, n| acc.checked_mul(n))
        .unwrap_or(usize::MAX);
    if profiles > MAX_PROFILES {
        return Err(RegionError::CombinatorialBlowup { profiles });
    }

    let n = game.n_types();
    let mut indices = vec![0usize; n];
    let mut regions = Vec::new();
    'outer: loop {
        let e: Vec<usize> = indices
            .iter()
            .enumerate()
            .map(|(theta, &i)| game.action_set(theta)[i])
            .collect();
        let halfspaces = region_halfspaces(game, &e);
        let feas = strict_feasible(&halfspaces, game.k(), REGION_EPS)?;
        if feas.nonempty {
            regions.push(RegionVertex {
                id: regions.len() + 1,
                e: e.clone(),
                b: drift_target(game, &e),
                witness: feas.witness.expect("nonempty comes with a witness"),
            });
        }
        for theta in (0..n).rev() {
            indices[theta] += 1;
            if indices[theta] < game.action_set(theta).len() {
                continue 'outer;
            }
            indices[theta] = 0;
        }
        break;
    }
    Ok(regions)
}

/// Maps each region id to its drift target.
pub fn drift_targets(regions: &[RegionVertex], game: &GameSpec) -> Vec<(usize, Aggregate)> {
    regions
        .iter()
        .map(|r| (r.id, drift_target(game, &r.e)))
        .collect()
}

/// Number of types whose assigned action differs between two profiles.
pub(crate) fn preference_changes(a: &[usize], b: &[usize]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Tests whether the shared facet of two single-change regions is genuinely
/// (k−2)-dimensional: the border equality plus every other defining
/// inequality of both regions must admit interior slack.
fn facet_slack(
    game: &GameSpec,
    v: &RegionVertex,
    w: &RegionVertex,
    border: &BorderFun,
) -> Result<f64, LpError> {
    let k = game.k();
    let n = k + 1; // ω plus the slack variable
    let mut ge = Vec::new();
    for (region, other) in [(v, w), (w, v)] {
        let theta = region
            .e
            .iter()
            .zip(&other.e)
            .position(|(a, b)| a != b)
            .expect("profiles differ");
        for (t, &a) in region.e.iter().enumerate() {
            for &alt in game.action_set(t) {
                if alt == a || (t == theta && alt == other.e[theta]) {
                    continue;
                }
                let h = game.border(t, a, alt).expect("profile actions available");
                let mut row = h.grad;
                row.push(-1.0);
                ge.push((row, -h.offset));
            }
        }
    }
    let mut eq_border = border.grad.clone();
    eq_border.push(0.0);
    let mut eq_simplex = vec![1.0; k];
    eq_simplex.push(0.0);
    let mut objective = vec![0.0; n];
    // no other inequality: the facet is the whole hyperplane slice, slack is free
    let slack_free = ge.is_empty();
    if !slack_free {
        objective[k] = 1.0;
    }
    let mut bounds = vec![(Some(0.0), Some(1.0)); k];
    bounds.push(if slack_free { (Some(0.0), Some(0.0)) } else { (None, None) });
    let lp = LinearProgram {
        objective,
        eq: vec![(eq_border, -border.offset), (eq_simplex, 1.0)],
        ge,
        bounds,
    };
    match lp.solve()? {
        LpOutcome::Optimal { value, .. } => {
            Ok(if slack_free { f64::INFINITY } else { value })
        }
        LpOutcome::Infeasible => Ok(f64::NEG_INFINITY),
        LpOutcome::Unbounded => Err(LpError::NumericalBreakdown(
            "facet slack program cannot be unbounded".into(),
        )),
    }
}

/// All adjacent region pairs (single preference change across a genuine
/// shared facet), classified Ic / Istar / degenerate by the sign of
/// h_(v,ṽ)(b_v)·h_(v,ṽ)(b_ṽ).
pub fn adjacency(
    regions: &[RegionVertex],
    game: &GameSpec,
) -> Result<Vec<AdjacencyRecord>, RegionError> {
    let mut records = Vec::new();
    for (i, v) in regions.iter().enumerate() {
        for w in &regions[i + 1..] {
            if preference_changes(&v.e, &w.e) != 1 {
                continue;
            }
            let theta = v.e.iter().zip(&w.e).position(|(a, b)| a != b).unwrap();
            let (a, atilde) = (v.e[theta], w.e[theta]);
            let border = game.border(theta, a, atilde).expect("profile actions available");
            if facet_slack(game, v, w, &border)? <= FACET_EPS {
                continue;
            }
            let hv = border.eval(v.b.as_slice());
            let hw = border.eval(w.b.as_slice());
            let product = hv * hw;
            let classification = if product.abs() <= DEGENERATE_TOL {
                BorderClass::Degenerate
            } else if product > 0.0 {
                BorderClass::Ic
            } else {
                BorderClass::Istar
            };
            records.push(AdjacencyRecord {
                pair: (v.id, w.id),
                changing_type: theta,
                actions: (a, atilde),
                border,
                classification,
                h_at_targets: (hv, hw),
            });
        }
    }
    Ok(records)
}

/// Looks a region up by its action profile.
pub fn region_by_profile<'r>(regions: &'r [RegionVertex], e: &[usize]) -> Option<&'r RegionVertex> {
    regions.iter().find(|r| r.e == e)
}
