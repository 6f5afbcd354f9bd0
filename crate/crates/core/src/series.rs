//! Time series of named observables and the standard atomic columns.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::observables::{concurrence_x_form, partial_trace_cavity, two_qubit_block, DensityMatrix};
use crate::space::{HilbertSpace, SpaceKind, TQ_00, TQ_01, TQ_10};

pub const TIME_COLUMN: &str = "t_us";

/// Atomic observables present in every run table, in column order.
pub const STANDARD_COLUMNS: [&str; 7] = [
    "rho_00_00",
    "rho_01_01",
    "rho_10_10",
    "rho_01_10_re",
    "rho_01_10_im",
    "rho_01_10_abs",
    "concurrence",
];

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesTable {
    t_us: Vec<f64>,
    columns: Vec<(String, Vec<f64>)>,
}

impl TimeSeriesTable {
    pub fn new(t_us: Vec<f64>) -> Result<Self> {
        crate::dynamics::lindblad::check_grid(&t_us)?;
        Ok(TimeSeriesTable { t_us, columns: Vec::new() })
    }

    pub fn push_column(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if values.len() != self.t_us.len() {
            return Err(Error::InvalidColumn(name, format!("{} values for {} times", values.len(), self.t_us.len())));
        }
        if name == TIME_COLUMN || self.columns.iter().any(|(n, _)| *n == name) {
            return Err(Error::InvalidColumn(name, "duplicate name".into()));
        }
        self.columns.push((name, values));
        Ok(())
    }

    pub fn times(&self) -> &[f64] {
        &self.t_us
    }

    pub fn len(&self) -> usize {
        self.t_us.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_us.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|(n, _)| n.as_str())
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        if name == TIME_COLUMN {
            return Some(&self.t_us);
        }
        self.columns.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    /// Grid index and value of the largest entry of `name`.
    pub fn peak(&self, name: &str) -> Option<(usize, f64)> {
        let col = self.column(name)?;
        col.iter()
            .copied()
            .enumerate()
            .fold(None, |best: Option<(usize, f64)>, (i, v)| match best {
                Some((_, b)) if b >= v => best,
                _ => Some((i, v)),
            })
    }

    /// Schema check: equal lengths, increasing time, finite values.
    pub fn validate(&self) -> Result<()> {
        crate::dynamics::lindblad::check_grid(&self.t_us)?;
        for (name, v) in &self.columns {
            if v.len() != self.t_us.len() {
                return Err(Error::InvalidColumn(name.clone(), "length mismatch".into()));
            }
            if let Some(x) = v.iter().find(|x| !x.is_finite()) {
                return Err(Error::InvalidColumn(name.clone(), format!("non-finite value {x}")));
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(TIME_COLUMN);
        for (name, _) in &self.columns {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (k, t) in self.t_us.iter().enumerate() {
            write!(out, "{t}").unwrap();
            for (_, v) in &self.columns {
                write!(out, ",{}", v[k]).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_csv())
    }
}

/// Values of [`STANDARD_COLUMNS`] for a two-qubit block.
pub fn standard_values(block: &CMatrix) -> Result<[f64; 7]> {
    let coh: Complex64 = block[(TQ_01, TQ_10)];
    let rho = DensityMatrix::new_unchecked(SpaceKind::TwoQubit, block.clone());
    let conc = concurrence_x_form(&rho)?;
    Ok([
        block[(TQ_00, TQ_00)].re,
        block[(TQ_01, TQ_01)].re,
        block[(TQ_10, TQ_10)].re,
        coh.re,
        coh.im,
        coh.norm(),
        conc,
    ])
}

/// Two-qubit block of any supported state.
pub fn atomic_block(rho: &DensityMatrix) -> Result<CMatrix> {
    if rho.kind().has_cavity() {
        two_qubit_block(&partial_trace_cavity(rho)?)
    } else {
        two_qubit_block(rho)
    }
}

/// Two-qubit block of the normalized pure state `psi`, without forming the
/// full projector.
pub fn atomic_block_pure(space: &HilbertSpace, psi: &CVector) -> CMatrix {
    let n2 = psi.norm_squared();
    let mut out = CMatrix::zeros(4, 4);
    let states = space.states();
    let atoms = |i: usize| -> Option<usize> {
        let s = &states[i];
        let q = (s.ions[0].qubit()?, s.ions[1].qubit()?);
        Some(match q {
            (1, 1) => crate::space::TQ_11,
            (1, 0) => TQ_10,
            (0, 1) => TQ_01,
            _ => TQ_00,
        })
    };
    for i in 0..psi.len() {
        if psi[i].norm_sqr() == 0.0 {
            continue;
        }
        let Some(ai) = atoms(i) else { continue };
        for j in 0..psi.len() {
            if states[i].photons != states[j].photons || psi[j].norm_sqr() == 0.0 {
                continue;
            }
            if let Some(aj) = atoms(j) {
                out[(ai, aj)] += psi[i] * psi[j].conj() / n2;
            }
        }
    }
    out
}

pub fn photon_number(rho: &DensityMatrix) -> Result<Option<f64>> {
    if !rho.kind().has_cavity() {
        return Ok(None);
    }
    let space = HilbertSpace::from_kind(rho.kind())?;
    Ok(Some(
        space
            .states()
            .iter()
            .enumerate()
            .map(|(i, s)| s.photons as f64 * rho.get(i, i).re)
            .sum(),
    ))
}

/// Standard columns plus `n_cav` (cavity spaces) and `norm` for a sequence of
/// density matrices.
pub fn table_from_states(times: &[f64], states: &[DensityMatrix]) -> Result<TimeSeriesTable> {
    let mut table = TimeSeriesTable::new(times.to_vec())?;
    let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(times.len()); STANDARD_COLUMNS.len()];
    let mut n_cav = Vec::new();
    let mut norm = Vec::with_capacity(times.len());
    for rho in states {
        let vals = standard_values(&atomic_block(rho)?)?;
        for (c, v) in cols.iter_mut().zip(vals) {
            c.push(v);
        }
        if let Some(n) = photon_number(rho)? {
            n_cav.push(n);
        }
        norm.push(crate::linalg::trace(rho.matrix()).re);
    }
    for (name, c) in STANDARD_COLUMNS.iter().zip(cols) {
        table.push_column(*name, c)?;
    }
    if n_cav.len() == times.len() {
        table.push_column("n_cav", n_cav)?;
    }
    table.push_column("norm", norm)?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout_and_validation() {
        let mut t = TimeSeriesTable::new(vec![0.0, 0.5, 1.0]).unwrap();
        t.push_column("x", vec![1.0, 2.5, -3.0]).unwrap();
        assert_eq!(t.to_csv(), "t_us,x\n0,1\n0.5,2.5\n1,-3\n");
        assert!(t.push_column("x", vec![0.0; 3]).is_err());
        assert!(t.push_column("y", vec![0.0; 2]).is_err());
        t.push_column("z", vec![0.0, f64::NAN, 0.0]).unwrap();
        assert!(t.validate().is_err());
        assert!(TimeSeriesTable::new(vec![0.0, 0.0]).is_err());
        assert_eq!(t.peak("x"), Some((1, 2.5)));
    }

    #[test]
    fn pure_block_matches_partial_trace() {
        use crate::linalg::c;
        let space = HilbertSpace::restricted4();
        let psi = CVector::from_column_slice(&[c(0.1, 0.0), c(0.3, 0.2), c(0.0, -0.5), c(0.7, 0.1)]);
        let psi = &psi / c(psi.norm(), 0.0);
        let rho = DensityMatrix::from_pure(space.kind(), &psi).unwrap();
        let a = atomic_block(&rho).unwrap();
        let b = atomic_block_pure(&space, &psi);
        assert!(crate::linalg::max_abs_diff(&a, &b) < 1e-14);
    }
}
