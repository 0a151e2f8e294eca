//! Game-specification files (JSON), trajectory and solution CSV export.
//!
//! Game file schema: `{"types": [..], "alpha": [..], "actions": [[..]..],
//! "U": [[[..]..]..], "d": [[..]..]}` with actions numbered from 1 and one
//! k×k matrix / length-k offset row per type.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::di::{PieceMode, Solution};
use crate::game::{GameError, GameSpec};
use crate::sim::Trajectory;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("validation error: {0}")]
    Validation(#[from] GameError),
    #[error("csv: {0}")]
    Csv(std::io::Error),
}

/// On-disk mirror of a game specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameFile {
    pub types: Vec<String>,
    pub alpha: Vec<f64>,
    pub actions: Vec<Vec<usize>>,
    #[serde(rename = "U")]
    pub u: Vec<Vec<Vec<f64>>>,
    pub d: Vec<Vec<f64>>,
}

impl GameFile {
    pub fn from_game(game: &GameSpec) -> Self {
        GameFile {
            types: game.type_names().to_vec(),
            alpha: game.alpha().to_vec(),
            actions: game.action_sets().to_vec(),
            u: (0..game.n_types())
                .map(|t| game.utility_matrix(t).to_vec())
                .collect(),
            d: (0..game.n_types())
                .map(|t| game.utility_offsets(t).to_vec())
                .collect(),
        }
    }

    pub fn into_game(self) -> Result<GameSpec, GameError> {
        GameSpec::new(self.types, self.alpha, self.actions, self.u, self.d)
    }
}

/// Loads and validates a game specification file.
pub fn load_game(path: &Path) -> Result<GameSpec, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    let file: GameFile = serde_json::from_str(&text)?;
    Ok(file.into_game()?)
}

/// Writes a game specification file.
pub fn save_game(game: &GameSpec, path: &Path) -> Result<(), IoError> {
    let file = GameFile::from_game(game);
    let text = serde_json::to_string_pretty(&file).expect("game file serializes");
    std::fs::write(path, text).map_err(|source| IoError::Write {
        path: path.display().to_string(),
        source,
    })
}

/// Trajectory CSV: `step,tau,omega_1..omega_k,type_drawn,action_chosen`,
/// thinned rows; type and action are 1-based, empty on the initial row.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, k: usize, out: &mut W) -> Result<(), IoError> {
    let header: Vec<String> = ["step".into(), "tau".into()]
        .into_iter()
        .chain((1..=k).map(|a| format!("omega_{a}")))
        .chain(["type_drawn".into(), "action_chosen".into()])
        .collect();
    writeln!(out, "{}", header.join(",")).map_err(IoError::Csv)?;
    for s in &traj.samples {
        let mut row = vec![s.step.to_string(), format!("{:.17e}", s.tau)];
        row.extend(s.omega.iter().map(|w| format!("{w:.17e}")));
        row.push(s.type_drawn.map(|t| (t + 1).to_string()).unwrap_or_default());
        row.push(s.action.map(|a| a.to_string()).unwrap_or_default());
        writeln!(out, "{}", row.join(",")).map_err(IoError::Csv)?;
    }
    Ok(())
}

/// Solution CSV: `t,omega_1..omega_k,mode,region_or_pair`, sampled every
/// `dt_sample` up to the horizon (or the solution's end).
pub fn write_solution_csv<W: Write>(
    solution: &Solution,
    k: usize,
    horizon: f64,
    dt_sample: f64,
    out: &mut W,
) -> Result<(), IoError> {
    let header: Vec<String> = ["t".into()]
        .into_iter()
        .chain((1..=k).map(|a| format!("omega_{a}")))
        .chain(["mode".into(), "region_or_pair".into()])
        .collect();
    writeln!(out, "{}", header.join(",")).map_err(IoError::Csv)?;
    let end = solution.end_time().min(horizon);
    let steps = (end / dt_sample).floor() as usize;
    for i in 0..=steps {
        let t = i as f64 * dt_sample;
        let Some(piece) = solution
            .pieces
            .iter()
            .find(|p| t >= p.t_start - 1e-12 && t <= p.t_end)
        else {
            continue;
        };
        let omega = piece.at(t);
        let (mode, loc) = match &piece.mode {
            PieceMode::Interior { region } => ("interior", region.to_string()),
            PieceMode::Sliding { pair } => ("sliding", format!("{}-{}", pair.0, pair.1)),
        };
        let mut row = vec![format!("{t:.12}")];
        row.extend(omega.iter().map(|w| format!("{w:.17e}")));
        row.push(mode.into());
        row.push(loc);
        writeln!(out, "{}", row.join(",")).map_err(IoError::Csv)?;
    }
    Ok(())
}
