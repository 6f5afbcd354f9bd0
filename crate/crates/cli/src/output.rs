//! CSV emission with a schema self-check, and the matplotlib scripts that
//! read the CSVs back.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use dicke_core::TimeSeriesTable;

/// Row order the first column must follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    /// Strictly increasing over the whole file.
    Increasing,
    /// Strictly increasing within each block of equal second-column values.
    Blocked,
}

pub struct Csv {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub order: Order,
}

impl Csv {
    pub fn from_table(table: &TimeSeriesTable) -> Self {
        let mut header = vec!["t_us".to_string()];
        header.extend(table.names().map(String::from));
        let cols: Vec<&[f64]> = table.names().map(|n| table.column(n).unwrap()).collect();
        let rows = table
            .times()
            .iter()
            .enumerate()
            .map(|(k, &t)| std::iter::once(t).chain(cols.iter().map(|c| c[k])).collect())
            .collect();
        Csv { header, rows, order: Order::Increasing }
    }

    /// Column count, ordering of the first column and finiteness.
    pub fn check(&self) -> anyhow::Result<()> {
        let width = self.header.len();
        if width == 0 || self.rows.is_empty() {
            bail!("empty table");
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != width {
                bail!("row {i} has {} fields, header has {width}", row.len());
            }
            if let Some((j, v)) = row.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                bail!("row {i}, column `{}`: non-finite value {v}", self.header[j]);
            }
        }
        for (i, w) in self.rows.windows(2).enumerate() {
            let same_block = self.order == Order::Increasing || w[0][1] == w[1][1];
            if same_block && w[1][0] <= w[0][0] {
                bail!("column `{}` not increasing at row {}", self.header[0], i + 1);
            }
        }
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                write!(out, "{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn write(&self, dir: &Path, name: &str) -> anyhow::Result<PathBuf> {
        self.check().with_context(|| format!("schema check of {name} failed"))?;
        let path = dir.join(name);
        fs::write(&path, self.render()).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> anyhow::Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

const PRELUDE: &str = r#"import csv
import os
import sys

import matplotlib.pyplot as plt
import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))


def load(name):
    with open(os.path.join(HERE, name), newline="") as f:
        rows = list(csv.reader(f))
    header = rows[0]
    data = np.array([[float(x) for x in r] for r in rows[1:]])
    return {h: data[:, i] for i, h in enumerate(header)}


def finish(fig, stem):
    fig.tight_layout()
    if "--show" in sys.argv:
        plt.show()
    else:
        fig.savefig(os.path.join(HERE, stem + ".png"), dpi=150)
"#;

fn py_list(items: &[String]) -> String {
    let quoted: Vec<String> = items.iter().map(|s| format!("{s:?}")).collect();
    format!("[{}]", quoted.join(", "))
}

/// Concurrence of every run on one set of axes.
pub fn timeseries_script(files: &[String]) -> String {
    format!(
        r#"{PRELUDE}
FILES = {files}

fig, ax = plt.subplots(figsize=(7, 4))
for name in FILES:
    d = load(name)
    label = name[len("timeseries_"):-len(".csv")]
    (line,) = ax.plot(d["t_us"], d["concurrence"], label=label)
    if "concurrence_se" in d:
        lo = d["concurrence"] - d["concurrence_se"]
        hi = d["concurrence"] + d["concurrence_se"]
        ax.fill_between(d["t_us"], lo, hi, color=line.get_color(), alpha=0.25)
ax.set_xlabel("t (us)")
ax.set_ylabel("concurrence")
ax.legend()
finish(fig, "timeseries")
"#,
        files = py_list(files)
    )
}

/// Cumulative jump counts per channel, one panel per run.
pub fn jumps_script(files: &[String]) -> String {
    format!(
        r#"{PRELUDE}
FILES = {files}

fig, axes = plt.subplots(len(FILES), 1, figsize=(7, 3.5 * len(FILES)), squeeze=False)
for ax, name in zip(axes[:, 0], FILES):
    d = load(name)
    for key in d:
        if key.startswith("jumps_") and not key.endswith("_se"):
            (line,) = ax.plot(d["t_us"], d[key], label=key[len("jumps_"):])
            se = d[key + "_se"]
            ax.fill_between(d["t_us"], d[key] - se, d[key] + se, color=line.get_color(), alpha=0.25)
    ax.set_title(name)
    ax.set_xlabel("t (us)")
    ax.set_ylabel("mean cumulative jumps")
    ax.legend()
finish(fig, "jumps")
"#,
        files = py_list(files)
    )
}

/// Colour maps of every observable over (t, swept value), plus the summary.
pub fn surface_script(axis: &str) -> String {
    format!(
        r#"{PRELUDE}
AXIS = "{axis}"
COLUMNS = ["concurrence", "rho_00_00", "rho_01_01", "rho_10_10",
           "rho_01_10_re", "rho_01_10_im", "rho_01_10_abs"]

d = load("surface.csv")
values = np.unique(d[AXIS])
times = d["t_us"][d[AXIS] == values[0]]

fig, axes = plt.subplots(len(COLUMNS), 1, figsize=(7, 2.6 * len(COLUMNS)), sharex=True)
for ax, col in zip(axes, COLUMNS):
    z = d[col].reshape(len(values), len(times))
    mesh = ax.pcolormesh(times, values, z, shading="auto", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label=col)
    ax.set_ylabel(AXIS)
axes[-1].set_xlabel("t (us)")
finish(fig, "surface")

s = load("summary.csv")
fig, ax = plt.subplots(figsize=(6, 4))
if "peak_se" in s:
    ax.errorbar(s[AXIS], s["peak_c"], yerr=s["peak_se"], fmt="o-", ms=3, label="peak")
else:
    ax.plot(s[AXIS], s["peak_c"], "o-", ms=3, label="peak")
ax.plot(s[AXIS], s["stationary_c"], "--", label="stationary (lossy Dicke)")
ax.set_xlabel(AXIS)
ax.set_ylabel("concurrence")
ax.legend()
finish(fig, "summary")
"#
    )
}

pub fn scaling_script() -> String {
    format!(
        r#"{PRELUDE}
d = load("scaling.csv")
fig, ax = plt.subplots(figsize=(6, 4))
ax.loglog(d["delta_raman"], d["g_eff_abs"], label="|g_eff|")
ax.loglog(d["delta_raman"], d["gamma_s"], label="Gamma_S")
ax.loglog(d["delta_raman"], d["kappa"], label="kappa")
ax.set_xlabel("Raman detuning (2pi MHz)")
ax.set_ylabel("rate (2pi MHz)")
ax2 = ax.twinx()
ax2.loglog(d["delta_raman"], d["regime_ratio"], "k:", label="4|beta_T g_eff|/kappa")
ax2.set_ylabel("4|beta_T g_eff|/kappa")
ax.legend(loc="lower left")
finish(fig, "scaling")
"#
    )
}
