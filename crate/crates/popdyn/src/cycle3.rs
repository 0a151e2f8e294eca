//! Cycle-existence machinery for three-action games: borders reduced to a
//! scalar chart, the Möbius map carrying a facet point through one region to
//! the next border, the composed map around a candidate cycle with its
//! coefficient recursions, two sufficient-condition families, and a
//! fixed-point search that emits a checkable cycle certificate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::di::{exit_time_raw, CycleCertificate};
use crate::game::{BorderFun, GameSpec};
use crate::lp::{LinearProgram, LpError, LpOutcome};
use crate::region::{AdjacencyRecord, BorderClass, RegionVertex};

#[derive(Debug, Error)]
pub enum Cycle3Error {
    #[error("game has {0} actions; this analysis needs exactly 3")]
    NotThreeActions(usize),
    #[error("no adjacency record for region pair ({0}, {1})")]
    MissingRecord(usize, usize),
    #[error("facet between regions {0} and {1} is not a crossing (Ic) facet")]
    NotCrossing(usize, usize),
    #[error("hop {hop}: crossing condition violated (h(b) = {h_at_b:.3e} must be negative)")]
    CrossingViolated { hop: usize, h_at_b: f64 },
    #[error("border between regions {0} and {1} degenerates in reduced coordinates")]
    DegenerateBorder(usize, usize),
    #[error("cycle must have length > 2, got {0}")]
    CycleTooShort(usize),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Which reduced coordinate parametrizes a facet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chart {
    /// ω¹ = η·ω² + c, parameter ω² (the default).
    OmegaTwo,
    /// ω² = η·ω¹ + c, parameter ω¹ (used when the border is vertical in ω¹).
    OmegaOne,
}

/// A facet between two regions in reduced coordinates with its parameter range.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReducedBorder {
    pub pair: (usize, usize),
    pub chart: Chart,
    pub eta: f64,
    pub c: f64,
    /// Closed facet extent [s, e] in the chart parameter.
    pub range: (f64, f64),
}

impl ReducedBorder {
    /// Lifts a chart parameter to the full 3-simplex point on the facet.
    pub fn lift(&self, x: f64) -> Vec<f64> {
        match self.chart {
            Chart::OmegaTwo => {
                let w1 = self.eta * x + self.c;
                vec![w1, x, 1.0 - w1 - x]
            }
            Chart::OmegaOne => {
                let w2 = self.eta * x + self.c;
                vec![x, w2, 1.0 - x - w2]
            }
        }
    }

    /// Chart coordinate of a full simplex point.
    pub fn coord(&self, point: &[f64]) -> f64 {
        match self.chart {
            Chart::OmegaTwo => point[1],
            Chart::OmegaOne => point[0],
        }
    }
}

/// ψ(x) = (φ̃₁ + φ̃₂x)/(φ̃₃ + φ̃₄x) for one hop, plus the cumulative
/// composition ψ̄ up to this hop in the same form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MobiusMap {
    pub tilde: [f64; 4],
    pub composed: [f64; 4],
}

impl MobiusMap {
    pub fn eval(&self, x: f64) -> f64 {
        (self.tilde[0] + self.tilde[1] * x) / (self.tilde[2] + self.tilde[3] * x)
    }

    pub fn eval_composed(&self, x: f64) -> f64 {
        (self.composed[0] + self.composed[1] * x) / (self.composed[2] + self.composed[3] * x)
    }
}

/// φ_i from φ̃_i and φ_{i−1}.
fn compose(tilde: &[f64; 4], prev: &[f64; 4]) -> [f64; 4] {
    [
        tilde[0] * prev[2] + tilde[1] * prev[0],
        tilde[0] * prev[3] + tilde[1] * prev[1],
        tilde[2] * prev[2] + tilde[3] * prev[0],
        tilde[2] * prev[3] + tilde[3] * prev[1],
    ]
}

/// Reduced-coordinate form of the border between a record's regions, with the
/// facet extent found by two small LPs.
pub fn reduce_border(
    game: &GameSpec,
    regions: &[RegionVertex],
    record: &AdjacencyRecord,
) -> Result<ReducedBorder, Cycle3Error> {
    if game.k() != 3 {
        return Err(Cycle3Error::NotThreeActions(game.k()));
    }
    let h = &record.border;
    // substitute ω³ = 1 − ω¹ − ω²
    let g1 = h.grad[0] - h.grad[2];
    let g2 = h.grad[1] - h.grad[2];
    let off = h.offset + h.grad[2];
    let scale = g1.abs().max(g2.abs());
    if scale < 1e-12 {
        return Err(Cycle3Error::DegenerateBorder(record.pair.0, record.pair.1));
    }
    let (chart, eta, c) = if g1.abs() > 1e-9 * scale {
        (Chart::OmegaTwo, -g2 / g1, -off / g1)
    } else {
        (Chart::OmegaOne, -g1 / g2, -off / g2)
    };
    let range = facet_extent(game, regions, record, chart)?;
    Ok(ReducedBorder { pair: record.pair, chart, eta, c, range })
}

/// Min and max of the chart coordinate over the closed facet.
fn facet_extent(
    game: &GameSpec,
    regions: &[RegionVertex],
    record: &AdjacencyRecord,
    chart: Chart,
) -> Result<(f64, f64), Cycle3Error> {
    let k = game.k();
    let coord_idx = match chart {
        Chart::OmegaTwo => 1,
        Chart::OmegaOne => 0,
    };
    let mut ge = Vec::new();
    let v = &regions[record.pair.0 - 1];
    let w = &regions[record.pair.1 - 1];
    for (region, other) in [(v, w), (w, v)] {
        let theta = record.changing_type;
        for (t, &a) in region.e.iter().enumerate() {
            for &alt in game.action_set(t) {
                if alt == a || (t == theta && alt == other.e[theta]) {
                    continue;
                }
                let hb = game.border(t, a, alt).expect("profile actions");
                ge.push((hb.grad, -hb.offset));
            }
        }
    }
    let eq = vec![
        (record.border.grad.clone(), -record.border.offset),
        (vec![1.0; k], 1.0),
    ];
    let mut lo = None;
    let mut hi = None;
    for (sign, out) in [(1.0, &mut lo), (-1.0, &mut hi)] {
        let mut objective = vec![0.0; k];
        objective[coord_idx] = -sign;
        let lp = LinearProgram {
            objective,
            eq: eq.clone(),
            ge: ge.clone(),
            bounds: vec![(Some(0.0), Some(1.0)); k],
        };
        match lp.solve()? {
            LpOutcome::Optimal { x, .. } => *out = Some(x[coord_idx]),
            LpOutcome::Infeasible => {
                return Err(Cycle3Error::MissingRecord(record.pair.0, record.pair.1))
            }
            LpOutcome::Unbounded => unreachable!("facet extent is boxed"),
        }
    }
    Ok((lo.unwrap(), hi.unwrap()))
}

/// Finds the record for an unordered pair.
fn record_for<'a>(
    adjacency: &'a [AdjacencyRecord],
    a: usize,
    b: usize,
) -> Result<&'a AdjacencyRecord, Cycle3Error> {
    let key = if a < b { (a, b) } else { (b, a) };
    adjacency
        .iter()
        .find(|r| r.pair == key)
        .ok_or(Cycle3Error::MissingRecord(key.0, key.1))
}

/// Border between consecutive cycle regions, oriented positive inside `from`.
fn oriented_border(record: &AdjacencyRecord, from: usize) -> BorderFun {
    if record.pair.0 == from {
        record.border.clone()
    } else {
        record.border.flipped()
    }
}

/// Reduced borders for the facets along a cycle: entry i is the facet between
/// cycle[i] and cycle[i+1] (wrapping), each required to be a crossing facet.
pub fn reduce(
    game: &GameSpec,
    regions: &[RegionVertex],
    adjacency: &[AdjacencyRecord],
    cycle: &[usize],
) -> Result<Vec<ReducedBorder>, Cycle3Error> {
    if game.k() != 3 {
        return Err(Cycle3Error::NotThreeActions(game.k()));
    }
    if cycle.len() <= 2 {
        return Err(Cycle3Error::CycleTooShort(cycle.len()));
    }
    let l = cycle.len();
    let mut out = Vec::with_capacity(l);
    for i in 0..l {
        let rec = record_for(adjacency, cycle[i], cycle[(i + 1) % l])?;
        if rec.classification != BorderClass::Ic {
            return Err(Cycle3Error::NotCrossing(rec.pair.0, rec.pair.1));
        }
        out.push(reduce_border(game, regions, rec)?);
    }
    Ok(out)
}

/// Per-hop Möbius maps and their running composition around the cycle.
///
/// Hop i flows through region cycle[i] from the facet entered out of the
/// previous region to the facet shared with the next, toward b_{cycle[i]}.
pub fn psi_maps(
    regions: &[RegionVertex],
    adjacency: &[AdjacencyRecord],
    cycle: &[usize],
    reduced: &[ReducedBorder],
) -> Result<Vec<MobiusMap>, Cycle3Error> {
    let l = cycle.len();
    assert_eq!(reduced.len(), l, "one reduced border per cycle facet");
    let mut maps: Vec<MobiusMap> = Vec::with_capacity(l);
    for i in 0..l {
        let region = &regions[cycle[i] - 1];
        // input facet: between the previous region and this one
        let input = &reduced[(i + l - 1) % l];
        let output = &reduced[i];
        let rec = record_for(adjacency, cycle[i], cycle[(i + 1) % l])?;
        let h_out = oriented_border(rec, cycle[i]);
        let beta = h_out.eval(region.b.as_slice());
        if beta >= 0.0 {
            return Err(Cycle3Error::CrossingViolated { hop: i, h_at_b: beta });
        }
        // h_out along the lifted input facet is affine in the chart parameter
        let p0 = input.lift(0.0);
        let p1 = input.lift(1.0);
        let b_h = h_out.eval(&p0);
        let a_h = h_out.eval(&p1) - b_h;
        // output-chart coordinate of the lifted input point, also affine
        let q0 = output.coord(&p0);
        let q1 = output.coord(&p1) - q0;
        let b_oc = output.coord(region.b.as_slice());
        let mut tilde = [
            b_h * b_oc - beta * q0,
            a_h * b_oc - beta * q1,
            b_h - beta,
            a_h,
        ];
        // canonical sign: denominator positive on the input facet
        let mid = 0.5 * (input.range.0 + input.range.1);
        if tilde[2] + tilde[3] * mid < 0.0 {
            for t in tilde.iter_mut() {
                *t = -*t;
            }
        }
        let composed = match maps.last() {
            None => tilde,
            Some(prev) => compose(&tilde, &prev.composed),
        };
        maps.push(MobiusMap { tilde, composed });
    }
    Ok(maps)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionReport {
    pub set1_holds: bool,
    pub set2_holds: bool,
    /// Worst inequality residual per family (≤ 0 when the family holds).
    pub set1_margin: f64,
    pub set2_margin: f64,
}

const COND_TOL: f64 = 1e-9;

/// Evaluates both sufficient inequality families at the facet endpoints.
/// Either family holding suffices for a cycle to exist; failure of both is
/// inconclusive.
pub fn condition_sets(
    cycle: &[usize],
    reduced: &[ReducedBorder],
    maps: &[MobiusMap],
) -> ConditionReport {
    let l = cycle.len();
    let mut worst1 = f64::NEG_INFINITY;
    let mut worst2 = f64::NEG_INFINITY;
    for i in 0..l {
        let (s_out, e_out) = reduced[i].range;
        // first family: per-hop map from the previous facet
        let (s_in, e_in) = reduced[(i + l - 1) % l].range;
        let t = &maps[i].tilde;
        for x in [s_in, e_in] {
            // ψ_i(x) ∈ [s_out, e_out], cleared of the (positive) denominator
            let low = t[2] * s_out + t[3] * x * s_out - t[0] - t[1] * x;
            let high = -(t[2] * e_out + t[3] * x * e_out - t[0] - t[1] * x);
            worst1 = worst1.max(low).max(high);
        }
        // second family: the composed map from the starting facet
        let (s0, e0) = reduced[l - 1].range;
        let p = &maps[i].composed;
        for x in [s0, e0] {
            let low = p[2] * s_out + p[3] * x * s_out - p[0] - p[1] * x;
            let high = -(p[2] * e_out + p[3] * x * e_out - p[0] - p[1] * x);
            worst2 = worst2.max(low).max(high);
        }
    }
    ConditionReport {
        set1_holds: worst1 <= COND_TOL,
        set2_holds: worst2 <= COND_TOL,
        set1_margin: worst1,
        set2_margin: worst2,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixedPoint {
    /// Chart parameter of the cycle's starting switch point.
    pub x: f64,
    /// Set when the composed map is (numerically) the identity and every
    /// point of the range is fixed; `x` is then the range start.
    pub degenerate: bool,
}

/// Searches ψ̄(x) = x on the starting facet range by a dense scan plus
/// bisection; `None` when the map has no fixed point there.
pub fn find_fixed_point(maps: &[MobiusMap], range: (f64, f64), tol: f64) -> Option<FixedPoint> {
    let composed = maps.last()?;
    let f = |x: f64| composed.eval_composed(x) - x;
    let (s, e) = range;
    if e < s {
        return None;
    }
    const SCAN: usize = 1000;
    let width = e - s;
    if width <= 0.0 {
        return (f(s).abs() <= tol.max(1e-9)).then_some(FixedPoint { x: s, degenerate: false });
    }
    let at = |i: usize| s + width * i as f64 / SCAN as f64;
    if (0..=SCAN).all(|i| f(at(i)).abs() <= tol.max(1e-12)) {
        return Some(FixedPoint { x: s, degenerate: true });
    }
    let mut prev = f(s);
    if prev.abs() <= 1e-12 {
        return Some(FixedPoint { x: s, degenerate: false });
    }
    for i in 1..=SCAN {
        let x = at(i);
        let cur = f(x);
        if cur.abs() <= 1e-12 {
            return Some(FixedPoint { x, degenerate: false });
        }
        if prev * cur < 0.0 {
            let (mut lo, mut hi) = (at(i - 1), x);
            let (mut flo, _) = (prev, cur);
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if fm == 0.0 {
                    return Some(FixedPoint { x: mid, degenerate: false });
                }
                if flo * fm < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            return Some(FixedPoint { x: 0.5 * (lo + hi), degenerate: false });
        }
        prev = cur;
    }
    None
}

/// Rebuilds the full cycle certificate from a fixed point of the composed map
/// by regenerating every switch point and time through the exact flow.
pub fn certificate_from(
    regions: &[RegionVertex],
    adjacency: &[AdjacencyRecord],
    cycle: &[usize],
    reduced: &[ReducedBorder],
    x_star: f64,
) -> Result<CycleCertificate, Cycle3Error> {
    let l = cycle.len();
    let start = reduced[l - 1].lift(x_star);
    let mut switch_points = vec![start.clone()];
    let mut switch_times = Vec::with_capacity(l);
    let mut t = 0.0;
    let mut x = start.clone();
    for i in 0..l {
        let region = &regions[cycle[i] - 1];
        let rec = record_for(adjacency, cycle[i], cycle[(i + 1) % l])?;
        let boundary = oriented_border(rec, cycle[i]);
        let hit = exit_time_raw(&x, region.b.as_slice(), &boundary).map_err(|_| {
            Cycle3Error::CrossingViolated {
                hop: i,
                h_at_b: boundary.eval(region.b.as_slice()),
            }
        })?;
        t += hit.tau;
        switch_times.push(t);
        x = hit.hit.into_vec();
        switch_points.push(x.clone());
    }
    let closure = x
        .iter()
        .zip(&start)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(CycleCertificate {
        region_sequence: cycle.to_vec(),
        switch_points,
        switch_times,
        closed: closure <= 1e-7,
    })
}

/// Full cycle test: reduce, build maps, evaluate condition sets, search for a
/// fixed point and emit its certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CycleTest {
    pub cycle: Vec<usize>,
    pub reduced: Vec<ReducedBorder>,
    pub maps: Vec<MobiusMap>,
    pub conditions: ConditionReport,
    pub fixed_point: Option<FixedPoint>,
    pub certificate: Option<CycleCertificate>,
}

pub fn test_cycle(
    game: &GameSpec,
    regions: &[RegionVertex],
    adjacency: &[AdjacencyRecord],
    cycle: &[usize],
    tol: f64,
) -> Result<CycleTest, Cycle3Error> {
    let reduced = reduce(game, regions, adjacency, cycle)?;
    let maps = psi_maps(regions, adjacency, cycle, &reduced)?;
    let conditions = condition_sets(cycle, &reduced, &maps);
    let range = reduced[cycle.len() - 1].range;
    // a fixed point of the rational composition only certifies a cycle when
    // every hop image stays inside its facet extent
    let fixed_point = find_fixed_point(&maps, range, tol)
        .filter(|fp| chain_in_domain(&maps, &reduced, fp.x));
    let certificate = match &fixed_point {
        Some(fp) => certificate_from(regions, adjacency, cycle, &reduced, fp.x).ok(),
        None => None,
    };
    Ok(CycleTest {
        cycle: cycle.to_vec(),
        reduced,
        maps,
        conditions,
        fixed_point,
        certificate,
    })
}

/// Every hop image of `x` must land inside the next facet's extent.
fn chain_in_domain(maps: &[MobiusMap], reduced: &[ReducedBorder], x: f64) -> bool {
    let mut y = x;
    for (m, facet) in maps.iter().zip(reduced) {
        y = m.eval(y);
        let (s, e) = facet.range;
        if !(s - 1e-9..=e + 1e-9).contains(&y) {
            return false;
        }
    }
    true
}
