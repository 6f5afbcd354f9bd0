//! Symbolic operators and their matrices in a given basis.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, is_hermitian, CMatrix, ONE};
use crate::space::{BasisState, HilbertSpace, Level, SpaceKind};

pub const N_IONS: usize = 2;

/// Operators addressable by name. Ion indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorSpec {
    Annihilate,
    Create,
    /// `σ−⁽ʲ⁾ = |0⟩⟨1|` on ion `j`, i.e. `|D⟩⟨S|`.
    Lower(usize),
    /// `σ+⁽ʲ⁾ = |1⟩⟨0|` on ion `j`.
    Raise(usize),
    /// `A_{ll'}⁽ʲ⁾ = |l⟩⟨l'|` on ion `j`.
    Transition { ion: usize, to: Level, from: Level },
    /// Projector on one basis index.
    Projector(usize),
    Number,
    Identity,
}

impl fmt::Display for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorSpec::Annihilate => write!(f, "a"),
            OperatorSpec::Create => write!(f, "a+"),
            OperatorSpec::Lower(j) => write!(f, "sm{j}"),
            OperatorSpec::Raise(j) => write!(f, "sp{j}"),
            OperatorSpec::Transition { ion, to, from } => write!(f, "A{to}{from}{ion}"),
            OperatorSpec::Projector(k) => write!(f, "P{k}"),
            OperatorSpec::Number => write!(f, "n"),
            OperatorSpec::Identity => write!(f, "id"),
        }
    }
}

fn parse_level(ch: char) -> Option<Level> {
    match ch.to_ascii_uppercase() {
        'S' | '1' => Some(Level::S),
        'P' => Some(Level::P),
        'D' | '0' => Some(Level::D),
        _ => None,
    }
}

/// Accepted names: `a`, `a+` (or `a†`, `adag`), `n` (or `a+a`), `id`,
/// `sm<j>`/`sp<j>` (or `σ-<j>`/`σ+<j>`), `A<l><l'><j>` with levels from
/// `S,P,D` (`1` and `0` alias `S` and `D`), `P<k>` for a basis projector.
impl FromStr for OperatorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let unknown = || Error::UnknownOperator(s.to_string());
        let ion = |rest: &str| rest.trim_matches(|ch| ch == '(' || ch == ')').parse::<usize>().map_err(|_| unknown());
        match t {
            "a" => return Ok(OperatorSpec::Annihilate),
            "a+" | "a†" | "adag" => return Ok(OperatorSpec::Create),
            "n" | "a+a" | "a†a" => return Ok(OperatorSpec::Number),
            "id" | "I" => return Ok(OperatorSpec::Identity),
            _ => {}
        }
        for (prefix, lower) in [("sm", true), ("σ-", true), ("sp", false), ("σ+", false)] {
            if let Some(rest) = t.strip_prefix(prefix) {
                let j = ion(rest)?;
                return Ok(if lower { OperatorSpec::Lower(j) } else { OperatorSpec::Raise(j) });
            }
        }
        if let Some(rest) = t.strip_prefix('A') {
            let mut chars = rest.chars();
            let to = chars.next().and_then(parse_level).ok_or_else(unknown)?;
            let from = chars.next().and_then(parse_level).ok_or_else(unknown)?;
            let j = ion(chars.as_str())?;
            return Ok(OperatorSpec::Transition { ion: j, to, from });
        }
        if let Some(rest) = t.strip_prefix('P') {
            return Ok(OperatorSpec::Projector(ion(rest)?));
        }
        Err(unknown())
    }
}

/// A dense operator tied to the basis it was built in.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOp {
    kind: SpaceKind,
    matrix: CMatrix,
}

impl LinearOp {
    pub fn new(kind: SpaceKind, matrix: CMatrix) -> Result<Self> {
        let dim = HilbertSpace::from_kind(kind)?.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: matrix.nrows().max(matrix.ncols()) });
        }
        Ok(LinearOp { kind, matrix })
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        is_hermitian(&self.matrix, tol)
    }

    pub fn adjoint(&self) -> Self {
        LinearOp { kind: self.kind, matrix: self.matrix.adjoint() }
    }

    pub fn scale(&self, z: Complex64) -> Self {
        LinearOp { kind: self.kind, matrix: &self.matrix * z }
    }

    pub fn compose(&self, rhs: &LinearOp) -> Result<Self> {
        self.same_space(rhs)?;
        Ok(LinearOp { kind: self.kind, matrix: &self.matrix * &rhs.matrix })
    }

    pub fn add(&self, rhs: &LinearOp) -> Result<Self> {
        self.same_space(rhs)?;
        Ok(LinearOp { kind: self.kind, matrix: &self.matrix + &rhs.matrix })
    }

    fn same_space(&self, rhs: &LinearOp) -> Result<()> {
        if self.kind != rhs.kind {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: rhs.dim() });
        }
        Ok(())
    }
}

fn check_ion(j: usize) -> Result<usize> {
    if j == 0 || j > N_IONS {
        return Err(Error::IonIndexOutOfRange { index: j, n_ions: N_IONS });
    }
    Ok(j - 1)
}

/// Action of `spec` on one basis state: `None` when it annihilates the state.
fn act(spec: OperatorSpec, s: &BasisState) -> Option<(f64, BasisState)> {
    let mut out = *s;
    match spec {
        OperatorSpec::Annihilate => {
            if s.photons == 0 {
                return None;
            }
            out.photons -= 1;
            Some(((s.photons as f64).sqrt(), out))
        }
        OperatorSpec::Create => {
            out.photons += 1;
            Some(((out.photons as f64).sqrt(), out))
        }
        OperatorSpec::Number => Some((s.photons as f64, out)),
        OperatorSpec::Identity => Some((1.0, out)),
        OperatorSpec::Lower(j) => transition(out, j - 1, Level::D, Level::S),
        OperatorSpec::Raise(j) => transition(out, j - 1, Level::S, Level::D),
        OperatorSpec::Transition { ion, to, from } => transition(out, ion - 1, to, from),
        OperatorSpec::Projector(_) => unreachable!("projectors are index based"),
    }
}

fn transition(mut s: BasisState, ion: usize, to: Level, from: Level) -> Option<(f64, BasisState)> {
    if s.ions[ion] != from {
        return None;
    }
    s.ions[ion] = to;
    Some((1.0, s))
}

/// Matrix of `spec` in the basis of `space`. States pushed outside a
/// truncated space are dropped.
pub fn build_operator(space: &HilbertSpace, spec: OperatorSpec) -> Result<LinearOp> {
    let dim = space.dim();
    let mut m = CMatrix::zeros(dim, dim);
    let kind = space.kind();
    match spec {
        OperatorSpec::Projector(k) => {
            if k >= dim {
                return Err(Error::DimensionMismatch { expected: dim, found: k });
            }
            m[(k, k)] = ONE;
            return LinearOp::new(kind, m);
        }
        OperatorSpec::Annihilate | OperatorSpec::Create | OperatorSpec::Number if !kind.has_cavity() => {
            return Err(Error::UnsupportedSpace(kind.name()));
        }
        OperatorSpec::Lower(j) | OperatorSpec::Raise(j) => {
            check_ion(j)?;
        }
        OperatorSpec::Transition { ion, to, from } => {
            check_ion(ion)?;
            if matches!(kind, SpaceKind::Restricted4 | SpaceKind::TwoQubit) {
                for l in [to, from] {
                    if l == Level::P {
                        return Err(Error::InvalidLevel { level: "P", space: kind.name() });
                    }
                }
            }
        }
        _ => {}
    }
    for (col, s) in space.states().iter().enumerate() {
        if let Some((amp, target)) = act(spec, s) {
            if let Some(row) = space.index_of(&target) {
                m[(row, col)] += c(amp, 0.0);
            }
        }
    }
    LinearOp::new(kind, m)
}

/// A time-dependent operator `Σ_k e^{-i 2π f_k t} M_k` with `f_k` in the
/// stored frequency units and `t` in μs.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicOp {
    terms: Vec<(f64, CMatrix)>,
}

impl HarmonicOp {
    pub fn constant(m: CMatrix) -> Self {
        HarmonicOp { terms: vec![(0.0, m)] }
    }

    /// Terms with equal frequency are merged; a zero-frequency term is always
    /// present so `dim()` is well defined.
    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (f64, CMatrix)>) -> Self {
        let mut merged: Vec<(f64, CMatrix)> = vec![(0.0, CMatrix::zeros(dim, dim))];
        for (f, m) in terms {
            match merged.iter_mut().find(|(g, _)| *g == f) {
                Some((_, acc)) => *acc += m,
                None => merged.push((f, m)),
            }
        }
        merged.retain(|(f, m)| *f == 0.0 || m.iter().any(|z| *z != c(0.0, 0.0)));
        HarmonicOp { terms: merged }
    }

    pub fn terms(&self) -> &[(f64, CMatrix)] {
        &self.terms
    }

    pub fn dim(&self) -> usize {
        self.terms[0].1.nrows()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(f, _)| *f == 0.0)
    }

    pub fn at(&self, t: f64) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim(), self.dim());
        for (f, m) in &self.terms {
            if *f == 0.0 {
                out += m;
            } else {
                out += m * Complex64::from_polar(1.0, -crate::linalg::TWO_PI * f * t);
            }
        }
        out
    }

    /// Largest frequency magnitude, for step-size selection.
    pub fn max_frequency(&self) -> f64 {
        self.terms.iter().map(|(f, _)| f.abs()).fold(0.0, f64::max)
    }

    /// Bound on the operator norm at any time.
    pub fn norm_bound(&self) -> f64 {
        self.terms.iter().map(|(_, m)| crate::linalg::operator_norm(m)).sum()
    }

    /// Union of nonzero positions over all terms.
    pub fn pattern(&self) -> Vec<(usize, usize)> {
        let n = self.dim();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if self.terms.iter().any(|(_, m)| m[(i, j)].norm() > 0.0) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Restriction to the listed basis indices.
    pub fn restrict(&self, idx: &[usize]) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(f, m)| (*f, CMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])))
            .collect();
        HarmonicOp { terms }
    }
}

impl From<CMatrix> for HarmonicOp {
    fn from(m: CMatrix) -> Self {
        HarmonicOp::constant(m)
    }
}

impl From<LinearOp> for HarmonicOp {
    fn from(op: LinearOp) -> Self {
        HarmonicOp::constant(op.into_matrix())
    }
}
