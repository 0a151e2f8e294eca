//! Game model: the multi-type game, the aggregate state on the action simplex,
//! utility evaluation, best-response sets, border functions and the mean drift.
//!
//! Actions are global indices `1..=k`; each type draws from a subset of them.
//! Utilities are affine in the aggregate: `u_θ(a, ω) = U_θ[a]·ω + d_θ[a]`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance on `Σ_a ω^a = 1` for aggregate vectors.
pub const SIMPLEX_SUM_TOL: f64 = 1e-10;
/// Aggregate coordinates may undershoot/overshoot [0,1] by this much before rejection.
pub const COORD_SLACK: f64 = 1e-12;
/// Default tie tolerance for best-response sets.
pub const DEFAULT_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum GameError {
    #[error("alpha: entries must be nonnegative and sum to 1 within 1e-12 (sum deviation {0:.3e})")]
    BadAlpha(f64),
    #[error("types: need at least one type")]
    NoTypes,
    #[error("{field}: length {got} does not match number of types {expected}")]
    TypeCountMismatch {
        field: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("actions[{theta}]: empty action set")]
    EmptyActionSet { theta: usize },
    #[error("actions[{theta}]: action {action} outside 1..={k}")]
    ActionOutOfRange { theta: usize, action: usize, k: usize },
    #[error("actions: union of action sets must be 1..={k} with no gaps (missing {missing})")]
    ActionGap { k: usize, missing: usize },
    #[error("U[{theta}]: expected a {k}x{k} matrix")]
    BadUtilityMatrix { theta: usize, k: usize },
    #[error("d[{theta}]: expected length {k}")]
    BadOffset { theta: usize, k: usize },
    #[error("action {action} not available to type {theta}")]
    ActionNotAvailable { theta: usize, action: usize },
    #[error("aggregate: component {index} = {value} outside [0,1]")]
    CoordOutOfRange { index: usize, value: f64 },
    #[error("aggregate: components sum to {sum}, not 1 within 1e-10")]
    BadSimplexSum { sum: f64 },
    #[error("aggregate: expected {expected} components, got {got}")]
    BadDimension { expected: usize, got: usize },
    #[error(
        "border h^{{{a},{atilde}}}_{theta} disagrees with utility difference at a probe point \
         (residual {residual:.3e})"
    )]
    BorderMismatch {
        a: usize,
        atilde: usize,
        theta: usize,
        residual: f64,
    },
}

/// A point on the k-simplex of aggregate action frequencies.
///
/// Construction clamps coordinates in `[-1e-12, 1+1e-12]` onto `[0,1]` and
/// rejects anything further out or with a bad sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Aggregate(Vec<f64>);

impl Aggregate {
    pub fn new(mut omega: Vec<f64>) -> Result<Self, GameError> {
        let sum: f64 = omega.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_SUM_TOL {
            return Err(GameError::BadSimplexSum { sum });
        }
        for (i, w) in omega.iter_mut().enumerate() {
            if *w < -COORD_SLACK || *w > 1.0 + COORD_SLACK {
                return Err(GameError::CoordOutOfRange { index: i, value: *w });
            }
            *w = w.clamp(0.0, 1.0);
        }
        Ok(Aggregate(omega))
    }

    /// Barycenter of the k-simplex.
    pub fn uniform(k: usize) -> Self {
        Aggregate(vec![1.0 / k as f64; k])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    /// Frequency of action `a` (1-based).
    pub fn component(&self, a: usize) -> f64 {
        self.0[a - 1]
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for Aggregate {
    type Error = GameError;
    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        Aggregate::new(v)
    }
}

impl From<Aggregate> for Vec<f64> {
    fn from(a: Aggregate) -> Vec<f64> {
        a.0
    }
}

/// Affine utility difference `h^{a,ã}_θ(ω) = u_θ(a,ω) − u_θ(ã,ω) = grad·ω + offset`.
///
/// Its zero set is the border on which type θ is indifferent between a and ã.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BorderFun {
    pub grad: Vec<f64>,
    pub offset: f64,
    /// (a, ã, θ) — θ is the 0-based type index, actions are 1-based.
    pub index: (usize, usize, usize),
}

impl BorderFun {
    pub fn eval(&self, omega: &[f64]) -> f64 {
        let mut v = self.offset;
        for (g, w) in self.grad.iter().zip(omega) {
            v += g * w;
        }
        v
    }

    /// Same border with both orientations swapped: h^{ã,a}_θ = −h^{a,ã}_θ.
    pub fn flipped(&self) -> BorderFun {
        BorderFun {
            grad: self.grad.iter().map(|g| -g).collect(),
            offset: -self.offset,
            index: (self.index.1, self.index.0, self.index.2),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TypeUtility {
    /// k×k coefficient matrix, row per action.
    u: Vec<Vec<f64>>,
    /// length-k offsets.
    d: Vec<f64>,
}

/// The multi-type population game ⟨Θ, α, {A_θ}, (u_θ)⟩ with affine utilities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameSpec {
    type_names: Vec<String>,
    alpha: Vec<f64>,
    action_sets: Vec<Vec<usize>>,
    utilities: Vec<TypeUtility>,
    k: usize,
}

impl GameSpec {
    /// Validates and builds a game.
    ///
    /// `action_sets[θ]` lists the 1-based actions of type θ; their union must
    /// be `{1..k}` without gaps. `u[θ]` is k×k and `d[θ]` length k; rows for
    /// actions outside `A_θ` are never read.
    pub fn new(
        type_names: Vec<String>,
        alpha: Vec<f64>,
        action_sets: Vec<Vec<usize>>,
        u: Vec<Vec<Vec<f64>>>,
        d: Vec<Vec<f64>>,
    ) -> Result<Self, GameError> {
        let n = type_names.len();
        if n == 0 {
            return Err(GameError::NoTypes);
        }
        for (field, got) in [
            ("alpha", alpha.len()),
            ("actions", action_sets.len()),
            ("U", u.len()),
            ("d", d.len()),
        ] {
            if got != n {
                return Err(GameError::TypeCountMismatch { field, got, expected: n });
            }
        }
        if alpha.iter().any(|a| *a < 0.0) || (alpha.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(GameError::BadAlpha((alpha.iter().sum::<f64>() - 1.0).abs()));
        }
        // dimensions are explicit: k comes from the utility arrays
        let k = d[0].len();
        let mut utilities = Vec::with_capacity(n);
        for theta in 0..n {
            if u[theta].len() != k || u[theta].iter().any(|row| row.len() != k) {
                return Err(GameError::BadUtilityMatrix { theta, k });
            }
            if d[theta].len() != k {
                return Err(GameError::BadOffset { theta, k });
            }
            utilities.push(TypeUtility {
                u: u[theta].clone(),
                d: d[theta].clone(),
            });
        }
        let mut seen = vec![false; k + 1];
        let mut sets = Vec::with_capacity(n);
        for (theta, set) in action_sets.iter().enumerate() {
            if set.is_empty() {
                return Err(GameError::EmptyActionSet { theta });
            }
            let mut s = set.clone();
            s.sort_unstable();
            s.dedup();
            for &a in &s {
                if a == 0 || a > k {
                    return Err(GameError::ActionOutOfRange { theta, action: a, k });
                }
                seen[a] = true;
            }
            sets.push(s);
        }
        if let Some(missing) = (1..=k).find(|&a| !seen[a]) {
            return Err(GameError::ActionGap { k, missing });
        }
        Ok(GameSpec {
            type_names,
            alpha,
            action_sets: sets,
            utilities,
            k,
        })
    }

    pub fn n_types(&self) -> usize {
        self.type_names.len()
    }

    /// Number of global actions k = |∪_θ A_θ|.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn type_names(&self) -> &[String] {
        &self.type_names
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn action_set(&self, theta: usize) -> &[usize] {
        &self.action_sets[theta]
    }

    pub fn action_sets(&self) -> &[Vec<usize>] {
        &self.action_sets
    }

    pub fn utility_matrix(&self, theta: usize) -> &[Vec<f64>] {
        &self.utilities[theta].u
    }

    pub fn utility_offsets(&self, theta: usize) -> &[f64] {
        &self.utilities[theta].d
    }

    fn has_action(&self, theta: usize, a: usize) -> bool {
        self.action_sets[theta].binary_search(&a).is_ok()
    }

    /// Raw affine evaluation; callers must ensure `a ∈ A_θ`.
    pub(crate) fn utility_raw(&self, theta: usize, a: usize, omega: &[f64]) -> f64 {
        let ty = &self.utilities[theta];
        let row = &ty.u[a - 1];
        let mut v = ty.d[a - 1];
        for (c, w) in row.iter().zip(omega) {
            v += c * w;
        }
        v
    }

    /// `u_θ(a, ω)`. Evaluating an action outside `A_θ` is an error, not a guess.
    pub fn utility(&self, theta: usize, a: usize, omega: &Aggregate) -> Result<f64, GameError> {
        if !self.has_action(theta, a) {
            return Err(GameError::ActionNotAvailable { theta, action: a });
        }
        Ok(self.utility_raw(theta, a, omega.as_slice()))
    }

    /// Actions of type θ within `tie_tol` of the best utility at ω. Never empty.
    pub fn best_response_set(&self, theta: usize, omega: &Aggregate, tie_tol: f64) -> Vec<usize> {
        self.best_response_raw(theta, omega.as_slice(), tie_tol)
    }

    pub(crate) fn best_response_raw(&self, theta: usize, omega: &[f64], tie_tol: f64) -> Vec<usize> {
        let set = &self.action_sets[theta];
        let mut best = f64::NEG_INFINITY;
        let mut vals = Vec::with_capacity(set.len());
        for &a in set {
            let v = self.utility_raw(theta, a, omega);
            if v > best {
                best = v;
            }
            vals.push(v);
        }
        set.iter()
            .zip(&vals)
            .filter(|(_, &v)| v >= best - tie_tol)
            .map(|(&a, _)| a)
            .collect()
    }

    /// The border `h^{a,ã}_θ`, validated against the utility difference at
    /// three pseudo-random simplex points (tolerance 1e-12).
    pub fn border(&self, theta: usize, a: usize, atilde: usize) -> Result<BorderFun, GameError> {
        for action in [a, atilde] {
            if !self.has_action(theta, action) {
                return Err(GameError::ActionNotAvailable { theta, action });
            }
        }
        let ua = &self.utilities[theta].u[a - 1];
        let ut = &self.utilities[theta].u[atilde - 1];
        let grad: Vec<f64> = ua.iter().zip(ut).map(|(x, y)| x - y).collect();
        let offset = self.utilities[theta].d[a - 1] - self.utilities[theta].d[atilde - 1];
        let border = BorderFun {
            grad,
            offset,
            index: (a, atilde, theta),
        };
        for point in probe_points(self.k, (a, atilde, theta)) {
            let direct =
                self.utility_raw(theta, a, &point) - self.utility_raw(theta, atilde, &point);
            let residual = (border.eval(&point) - direct).abs();
            if residual > 1e-12 {
                return Err(GameError::BorderMismatch { a, atilde, theta, residual });
            }
        }
        Ok(border)
    }

    /// One border per ordered pair a ≠ ã within each A_θ; count Σ_θ |A_θ|(|A_θ|−1).
    pub fn border_functions(&self) -> Vec<BorderFun> {
        let mut out = Vec::new();
        for theta in 0..self.n_types() {
            for &a in &self.action_sets[theta] {
                for &atilde in &self.action_sets[theta] {
                    if a != atilde {
                        out.push(self.border(theta, a, atilde).expect("actions checked"));
                    }
                }
            }
        }
        out
    }

    /// Mean drift `g(ω)`: per action, the tie-averaged best-response inflow
    /// minus the current frequency. Components sum to zero.
    pub fn drift(&self, omega: &Aggregate, tie_tol: f64) -> Vec<f64> {
        self.drift_raw(omega.as_slice(), tie_tol)
    }

    pub(crate) fn drift_raw(&self, omega: &[f64], tie_tol: f64) -> Vec<f64> {
        let mut g: Vec<f64> = omega.iter().map(|w| -w).collect();
        for theta in 0..self.n_types() {
            let brs = self.best_response_raw(theta, omega, tie_tol);
            let share = self.alpha[theta] / brs.len() as f64;
            for a in brs {
                g[a - 1] += share;
            }
        }
        g
    }
}

/// Three deterministic pseudo-random simplex points keyed by a border index.
fn probe_points(k: usize, key: (usize, usize, usize)) -> Vec<Vec<f64>> {
    let mut state = 0x9e37_79b9_7f4a_7c15u64
        ^ (key.0 as u64)
        ^ ((key.1 as u64) << 20)
        ^ ((key.2 as u64) << 40);
    let mut next = move || {
        // splitmix64
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z = z ^ (z >> 31);
        (z >> 11) as f64 / (1u64 << 53) as f64
    };
    (0..3)
        .map(|_| {
            let raw: Vec<f64> = (0..k).map(|_| next() + 1e-3).collect();
            let sum: f64 = raw.iter().sum();
            raw.into_iter().map(|x| x / sum).collect()
        })
        .collect()
}
