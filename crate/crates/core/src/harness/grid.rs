//! Meta-parameter sweeps: every cell is a benchmark over the same puzzles.

use serde::{Deserialize, Serialize};

use super::bench::{run_benchmark, Summary};
use super::config::ExperimentConfig;
use super::HarnessError;

/// One axis of a sweep: a config key and the values it takes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sweep {
    pub key: String,
    pub values: Vec<String>,
}

impl std::str::FromStr for Sweep {
    type Err = HarnessError;

    /// Parses `key=v1,v2,...`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (key, values) = s
            .split_once('=')
            .ok_or_else(|| HarnessError::Config(format!("sweep {s:?} is not key=v1,v2,...")))?;
        let values: Vec<String> = values.split(',').map(|v| v.trim().to_owned()).filter(|v| !v.is_empty()).collect();
        if values.is_empty() {
            return Err(HarnessError::Config(format!("sweep {s:?} has no values")));
        }
        Ok(Self {
            key: key.trim().to_owned(),
            values,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub name: String,
    pub settings: Vec<(String, String)>,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub cells: Vec<GridCell>,
}

impl GridReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("grid report serializes");
        s.push('\n');
        s
    }

    pub fn table(&self) -> String {
        let width = self.cells.iter().map(|c| c.name.len()).max().unwrap_or(4).max(4);
        let mut out = format!("{:<width$}  patch   neighbor  puzzle\n", "cell");
        for c in &self.cells {
            out.push_str(&format!(
                "{:<width$}  {:.4}  {:.4}    {:.4}\n",
                c.name, c.summary.mean_patch_wise, c.summary.mean_neighbor_wise, c.summary.mean_puzzle_wise
            ));
        }
        out
    }
}

/// Named override sets switching the two heads off one piece at a time.
pub fn deactivation_cells() -> Vec<(String, Vec<(String, String)>)> {
    let cell = |name: &str, kv: &[(&str, &str)]| {
        (
            name.to_owned(),
            kv.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        )
    };
    vec![
        cell("full", &[]),
        cell("no-midgame-v", &[("midgame_value", "false")]),
        cell("no-p", &[("use_policy", "false")]),
        cell("no-p-no-midgame-v", &[("use_policy", "false"), ("midgame_value", "false")]),
        cell(
            "no-p-no-v",
            &[("use_policy", "false"), ("midgame_value", "false"), ("reward", "constant-one")],
        ),
    ]
}

/// The cartesian product of `sweeps`, first axis slowest.
pub fn sweep_cells(sweeps: &[Sweep]) -> Vec<(String, Vec<(String, String)>)> {
    let mut cells: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for sweep in sweeps {
        cells = cells
            .into_iter()
            .flat_map(|prefix| {
                sweep.values.iter().map(move |v| {
                    let mut c = prefix.clone();
                    c.push((sweep.key.clone(), v.clone()));
                    c
                })
            })
            .collect();
    }
    cells
        .into_iter()
        .map(|kv| {
            let name = kv.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ");
            (name, kv)
        })
        .collect()
}

/// Runs `base` once per cell with the cell's overrides applied.
pub fn run_grid(base: &ExperimentConfig, cells: &[(String, Vec<(String, String)>)]) -> Result<GridReport, HarnessError> {
    let mut out = Vec::with_capacity(cells.len());
    for (name, settings) in cells {
        let mut cfg = base.clone();
        cfg.report = None;
        for (k, v) in settings {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        let run = run_benchmark(&cfg)?;
        out.push(GridCell {
            name: name.clone(),
            settings: settings.clone(),
            summary: run.report.summary,
        });
    }
    Ok(GridReport { cells: out })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_order() {
        let sweeps: Vec<Sweep> = ["n_visits=10,100", "c=0.5,1,2"].iter().map(|s| s.parse().unwrap()).collect();
        let cells = sweep_cells(&sweeps);
        assert_eq!(cells.len(), 6);
        assert_eq!(cells[0].0, "n_visits=10 c=0.5");
        assert_eq!(cells[5].0, "n_visits=100 c=2");
    }

    #[test]
    fn rejects_malformed_sweeps() {
        assert!("n_visits".parse::<Sweep>().is_err());
        assert!("n_visits=".parse::<Sweep>().is_err());
    }

    #[test]
    fn unknown_keys_fail_before_running() {
        let mut base = ExperimentConfig::default();
        base.puzzles = 1;
        let cells = vec![("bad".to_owned(), vec![("nonsense".to_owned(), "1".to_owned())])];
        assert!(matches!(run_grid(&base, &cells), Err(HarnessError::Config(_))));
    }
}
