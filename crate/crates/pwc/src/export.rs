//! CSV and JSON writers. Floats are written with 17 significant digits so
//! identical runs produce identical bytes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::ValueEnum;
use pwc_core::bohm::TrajectoryEnsemble;
use pwc_core::correlators::CorrelationSweep;
use pwc_core::grid::probability_density;
use pwc_core::Wavefunction;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    #[default]
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_writer(path: &Path) -> anyhow::Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

/// `x,re,im,p_density`, one row per grid point.
pub fn write_wavefunction_csv(path: &Path, psi: &Wavefunction) -> anyhow::Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["x", "re", "im", "p_density"])?;
    let density = probability_density(psi);
    for ((x, z), p) in psi
        .grid()
        .points()
        .zip(psi.amplitudes())
        .zip(density.values())
    {
        w.write_record([num(x), num(z.re), num(z.im), num(*p)])?;
    }
    w.flush()?;
    Ok(())
}

/// `particle_id,xi,t,x`, one row per recorded step.
pub fn write_trajectories_csv(path: &Path, ensemble: &TrajectoryEnsemble) -> anyhow::Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["particle_id", "xi", "t", "x"])?;
    for p in ensemble.particles() {
        let (id, xi) = (p.id.to_string(), num(p.xi));
        for q in &p.path {
            w.write_record([id.as_str(), xi.as_str(), &num(q.t), &num(q.x)])?;
        }
    }
    w.flush()?;
    Ok(())
}

const SWEEP_COLUMNS: [&str; 9] = [
    "tau", "qm_re", "qm_im", "qm_sym", "bohm", "fock_re", "fock_im", "bohm_sym", "flag",
];

/// One JSON object per lag.
pub fn sweep_rows_json(sweep: &CorrelationSweep) -> Vec<Value> {
    sweep
        .rows
        .iter()
        .map(|r| {
            json!({
                "tau": r.tau,
                "qm_re": r.grid.value.re,
                "qm_im": r.grid.value.im,
                "qm_sym": r.grid.symmetrized,
                "bohm": r.bohm.value.re,
                "bohm_sym": r.bohm.symmetrized,
                "fock_re": r.fock.value.re,
                "fock_im": r.fock.value.im,
                "flag": r.flag.as_str(),
            })
        })
        .collect()
}

pub fn write_sweep_csv(path: &Path, sweep: &CorrelationSweep) -> anyhow::Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(SWEEP_COLUMNS)?;
    for r in &sweep.rows {
        w.write_record([
            num(r.tau),
            num(r.grid.value.re),
            num(r.grid.value.im),
            num(r.grid.symmetrized),
            num(r.bohm.value.re),
            num(r.fock.value.re),
            num(r.fock.value.im),
            num(r.bohm.symmetrized),
            r.flag.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(path: &Path, value: &Value) -> anyhow::Result<()> {
    let mut f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    Ok(())
}

/// Creates `dir` if needed and returns `dir/name`.
pub fn output_path(dir: &Path, name: &str) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir.join(name))
}
