//! The directed Region-Vertex graph: vertices are nonempty regions, edges run
//! across crossable (Ic) facets in the direction the drift pushes, and its
//! directed simple cycles flag the possibility of cyclic limit sets.

use serde::{Deserialize, Serialize};

use crate::region::{AdjacencyRecord, BorderClass, RegionVertex};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Edge v→v' when h_(v,v')(b_v) < 0 (drift in v pushes across the facet).
    Standard,
    /// The mirrored convention, h_(v,v')(b_v) > 0.
    Reverse,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RvGraph {
    pub vertices: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
    /// Degenerate facets excluded from the edge set.
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CycleSet {
    /// Simple directed cycles as vertex sequences, deduplicated up to rotation.
    pub cycles: Vec<Vec<usize>>,
    /// False when the enumeration cap was hit and the list may be partial.
    pub complete: bool,
}

/// Builds the graph from classified adjacency records.
pub fn build(
    adjacency: &[AdjacencyRecord],
    regions: &[RegionVertex],
    orientation: Orientation,
) -> RvGraph {
    let vertices = regions.iter().map(|r| r.id).collect();
    let mut edges = Vec::new();
    let mut warnings = Vec::new();
    for rec in adjacency {
        match rec.classification {
            BorderClass::Ic => {
                let (hv, _) = rec.h_at_targets;
                let forward = match orientation {
                    Orientation::Standard => hv < 0.0,
                    Orientation::Reverse => hv > 0.0,
                };
                if forward {
                    edges.push(rec.pair);
                } else {
                    edges.push((rec.pair.1, rec.pair.0));
                }
            }
            BorderClass::Istar => {}
            BorderClass::Degenerate => warnings.push(format!(
                "facet between regions {} and {} is degenerate (a drift target lies on the \
                 border); excluded from the RV graph",
                rec.pair.0, rec.pair.1
            )),
        }
    }
    edges.sort_unstable();
    RvGraph { vertices, edges, warnings }
}

/// Johnson-style enumeration of all simple directed cycles, up to `cap`.
pub fn find_cycles(graph: &RvGraph, cap: usize) -> CycleSet {
    assert!(cap >= 1, "cycle cap must be at least 1");
    let mut ids: Vec<usize> = graph.vertices.clone();
    ids.sort_unstable();
    let index_of = |v: usize| ids.binary_search(&v).expect("edge endpoint is a vertex");
    let n = ids.len();
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in &graph.edges {
        adj[index_of(a)].push(index_of(b));
    }
    for nbrs in &mut adj {
        nbrs.sort_unstable();
    }

    struct Search<'g> {
        adj: &'g [Vec<usize>],
        ids: &'g [usize],
        start: usize,
        blocked: Vec<bool>,
        blocked_by: Vec<Vec<usize>>,
        path: Vec<usize>,
        cycles: Vec<Vec<usize>>,
        cap: usize,
        capped: bool,
    }

    impl Search<'_> {
        fn unblock(&mut self, v: usize) {
            let mut queue = vec![v];
            while let Some(v) = queue.pop() {
                if self.blocked[v] {
                    self.blocked[v] = false;
                    queue.append(&mut self.blocked_by[v]);
                }
            }
        }

        /// Returns whether a circuit through `start` was found below `v`.
        fn circuit(&mut self, v: usize) -> bool {
            let mut found = false;
            self.path.push(v);
            self.blocked[v] = true;
            for i in 0..self.adj[v].len() {
                let w = self.adj[v][i];
                if w < self.start || self.capped {
                    continue;
                }
                if w == self.start {
                    self.cycles
                        .push(self.path.iter().map(|&i| self.ids[i]).collect());
                    found = true;
                    if self.cycles.len() >= self.cap {
                        self.capped = true;
                    }
                } else if !self.blocked[w] {
                    found |= self.circuit(w);
                }
            }
            if found {
                self.unblock(v);
            } else {
                for i in 0..self.adj[v].len() {
                    let w = self.adj[v][i];
                    if w >= self.start && !self.blocked_by[w].contains(&v) {
                        self.blocked_by[w].push(v);
                    }
                }
            }
            self.path.pop();
            found
        }
    }

    let mut cycles = Vec::new();
    let mut complete = true;
    for start in 0..n {
        let mut search = Search {
            adj: &adj,
            ids: &ids,
            start,
            blocked: vec![false; n],
            blocked_by: vec![Vec::new(); n],
            path: Vec::new(),
            cycles: Vec::new(),
            cap: cap - cycles.len(),
            capped: false,
        };
        if search.cap == 0 {
            complete = false;
            break;
        }
        search.circuit(start);
        let capped = search.capped;
        cycles.append(&mut search.cycles);
        if capped {
            complete = false;
            break;
        }
    }
    CycleSet { cycles, complete }
}
