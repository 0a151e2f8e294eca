//! Built-in priority-queue game: three queues (standard, moderate, premium)
//! and up to three customer types — cost-rational `cs`, comparing `cm`
//! (rock-paper-scissors-flavored perception), and avoid-the-crowd `ac`.

use thiserror::Error;

use crate::game::{GameError, GameSpec};

#[derive(Debug, Error)]
pub enum PresetError {
    #[error("rho must lie strictly in (0, 1), got {0}")]
    BadRho(f64),
    #[error("{name} must be nonnegative, got {value}")]
    NegativeFee { name: &'static str, value: f64 },
    #[error("c must be at least 1, got {0}")]
    BadTradeoff(f64),
    #[error("alpha must have length 2 (cs, cm) or 3 (cs, cm, ac), got {0}")]
    BadAlphaLen(usize),
    #[error("alpha must be a probability vector, entries >= 0 summing to 1")]
    BadAlpha,
    #[error(transparent)]
    Game(#[from] GameError),
}

#[derive(Debug, Clone)]
pub struct QueuingParams {
    /// Congestion discount of the moderate queue, 0 < ρ < 1.
    pub rho: f64,
    /// Moderate queue fee.
    pub p: f64,
    /// Premium queue fee.
    pub ps: f64,
    /// Comparison trade-off applied to the premium queue, c ≥ 1.
    pub c: f64,
    /// Type shares: (α_cs, α_cm) or (α_cs, α_cm, α_ac).
    pub alpha: Vec<f64>,
}

/// Builds the queuing game. When `p + ρ = p_s = 1` (within 1e-9) the premium
/// queue is strictly dominated for cost-rational customers and is dropped from
/// their action set, matching the regime the closed-form results cover.
pub fn queuing_preset(params: &QueuingParams) -> Result<GameSpec, PresetError> {
    let QueuingParams { rho, p, ps, c, alpha } = params;
    if !(*rho > 0.0 && *rho < 1.0) {
        return Err(PresetError::BadRho(*rho));
    }
    for (name, value) in [("p", *p), ("ps", *ps)] {
        if value < 0.0 {
            return Err(PresetError::NegativeFee { name, value });
        }
    }
    if *c < 1.0 {
        return Err(PresetError::BadTradeoff(*c));
    }
    let include_avoid = match alpha.len() {
        2 => false,
        3 => true,
        n => return Err(PresetError::BadAlphaLen(n)),
    };
    if alpha.iter().any(|a| *a < 0.0) || (alpha.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(PresetError::BadAlpha);
    }

    let cs_dominated = (p + rho - 1.0).abs() <= 1e-9 && (ps - 1.0).abs() <= 1e-9;
    let cs_actions: Vec<usize> = if cs_dominated { vec![1, 2] } else { vec![1, 2, 3] };

    // u_cs: (−ω¹, −ρω²−p, −p_s)
    let u_cs = vec![
        vec![-1.0, 0.0, 0.0],
        vec![0.0, -rho, 0.0],
        vec![0.0, 0.0, 0.0],
    ];
    let d_cs = vec![0.0, -p, -ps];
    // u_cm: (ω³−ω², ω¹−cω³, ω²−ω¹)
    let u_cm = vec![
        vec![0.0, -1.0, 1.0],
        vec![1.0, 0.0, -c],
        vec![-1.0, 1.0, 0.0],
    ];
    let d_cm = vec![0.0, 0.0, 0.0];

    let mut names = vec!["cs".to_string(), "cm".to_string()];
    let mut actions = vec![cs_actions, vec![1, 2, 3]];
    let mut u = vec![u_cs, u_cm];
    let mut d = vec![d_cs, d_cm];
    if include_avoid {
        names.push("ac".to_string());
        actions.push(vec![1, 2, 3]);
        // u_ac(a, ω) = −ω^a
        u.push(vec![
            vec![-1.0, 0.0, 0.0],
            vec![0.0, -1.0, 0.0],
            vec![0.0, 0.0, -1.0],
        ]);
        d.push(vec![0.0, 0.0, 0.0]);
    }

    Ok(GameSpec::new(names, alpha.clone(), actions, u, d)?)
}
