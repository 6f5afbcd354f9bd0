//! Basis bookkeeping for the ion-cavity Hilbert spaces.
//!
//! The effective two-level levels are identified with the physical ones as
//! `|1⟩ ≡ S` and `|0⟩ ≡ D`; the excited level `P` only appears in the full
//! three-level space.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{CVector, ONE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    S,
    P,
    D,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::S, Level::P, Level::D];

    pub fn name(self) -> &'static str {
        match self {
            Level::S => "S",
            Level::P => "P",
            Level::D => "D",
        }
    }

    fn ordinal(self) -> usize {
        match self {
            Level::S => 0,
            Level::P => 1,
            Level::D => 2,
        }
    }

    /// Effective qubit value: S is the excited `|1⟩`, D the ground `|0⟩`.
    pub fn qubit(self) -> Option<u8> {
        match self {
            Level::S => Some(1),
            Level::D => Some(0),
            Level::P => None,
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    /// Two effective qubits and one cavity mode with at most one excitation.
    Restricted4,
    /// Two three-level ions and a Fock space truncated at `n_max` photons.
    FullLambda { n_max: usize },
    /// Two effective qubits without the cavity, ordered |11⟩,|10⟩,|01⟩,|00⟩.
    TwoQubit,
    /// Two three-level ions without the cavity.
    LambdaPair,
}

impl SpaceKind {
    pub fn name(self) -> &'static str {
        match self {
            SpaceKind::Restricted4 => "Restricted4",
            SpaceKind::FullLambda { .. } => "FullLambda",
            SpaceKind::TwoQubit => "TwoQubit",
            SpaceKind::LambdaPair => "LambdaPair",
        }
    }

    pub fn has_cavity(self) -> bool {
        matches!(self, SpaceKind::Restricted4 | SpaceKind::FullLambda { .. })
    }
}

/// Occupation of one basis state: ion levels and photon number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisState {
    pub ions: [Level; 2],
    pub photons: usize,
}

impl BasisState {
    pub const fn new(ion1: Level, ion2: Level, photons: usize) -> Self {
        BasisState { ions: [ion1, ion2], photons }
    }
}

pub const R4_GROUND: usize = 0;
pub const R4_PHOTON: usize = 1;
pub const R4_ION2: usize = 2;
pub const R4_ION1: usize = 3;

pub const TQ_11: usize = 0;
pub const TQ_10: usize = 1;
pub const TQ_01: usize = 2;
pub const TQ_00: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertSpace {
    kind: SpaceKind,
    states: Vec<BasisState>,
    labels: Vec<String>,
}

impl HilbertSpace {
    /// |0⁽¹⁾0⁽²⁾0⁽ᶜ⁾⟩, |0⁽¹⁾0⁽²⁾1⁽ᶜ⁾⟩, |0⁽¹⁾1⁽²⁾0⁽ᶜ⁾⟩, |1⁽¹⁾0⁽²⁾0⁽ᶜ⁾⟩.
    pub fn restricted4() -> Self {
        use Level::{D, S};
        let states = vec![
            BasisState::new(D, D, 0),
            BasisState::new(D, D, 1),
            BasisState::new(D, S, 0),
            BasisState::new(S, D, 0),
        ];
        Self::from_states(SpaceKind::Restricted4, states)
    }

    /// Lexicographic over (ion 1 level, ion 2 level, photon number) with
    /// levels ordered S, P, D.
    pub fn full_lambda(n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::param("n_max", "Fock truncation needs n_max >= 1"));
        }
        let mut states = Vec::with_capacity(9 * (n_max + 1));
        for l1 in Level::ALL {
            for l2 in Level::ALL {
                for n in 0..=n_max {
                    states.push(BasisState::new(l1, l2, n));
                }
            }
        }
        Ok(Self::from_states(SpaceKind::FullLambda { n_max }, states))
    }

    pub fn two_qubit() -> Self {
        use Level::{D, S};
        let states = vec![
            BasisState::new(S, S, 0),
            BasisState::new(S, D, 0),
            BasisState::new(D, S, 0),
            BasisState::new(D, D, 0),
        ];
        Self::from_states(SpaceKind::TwoQubit, states)
    }

    pub fn lambda_pair() -> Self {
        let mut states = Vec::with_capacity(9);
        for l1 in Level::ALL {
            for l2 in Level::ALL {
                states.push(BasisState::new(l1, l2, 0));
            }
        }
        Self::from_states(SpaceKind::LambdaPair, states)
    }

    pub fn from_kind(kind: SpaceKind) -> Result<Self> {
        Ok(match kind {
            SpaceKind::Restricted4 => Self::restricted4(),
            SpaceKind::FullLambda { n_max } => Self::full_lambda(n_max)?,
            SpaceKind::TwoQubit => Self::two_qubit(),
            SpaceKind::LambdaPair => Self::lambda_pair(),
        })
    }

    fn from_states(kind: SpaceKind, states: Vec<BasisState>) -> Self {
        let labels = states.iter().map(|s| label(kind, s)).collect();
        HilbertSpace { kind, states, labels }
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    pub fn n_max(&self) -> Option<usize> {
        match self.kind {
            SpaceKind::FullLambda { n_max } => Some(n_max),
            _ => None,
        }
    }

    pub fn index_of(&self, state: &BasisState) -> Option<usize> {
        match self.kind {
            SpaceKind::FullLambda { n_max } => {
                if state.photons > n_max {
                    return None;
                }
                let [l1, l2] = state.ions;
                Some((l1.ordinal() * 3 + l2.ordinal()) * (n_max + 1) + state.photons)
            }
            SpaceKind::LambdaPair => {
                if state.photons != 0 {
                    return None;
                }
                let [l1, l2] = state.ions;
                Some(l1.ordinal() * 3 + l2.ordinal())
            }
            _ => self.states.iter().position(|s| s == state),
        }
    }

    pub fn basis_vector(&self, index: usize) -> Result<CVector> {
        if index >= self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: index });
        }
        let mut v = CVector::zeros(self.dim());
        v[index] = ONE;
        Ok(v)
    }

    pub fn state_vector(&self, state: &BasisState) -> Result<CVector> {
        let idx = self.index_of(state).ok_or(Error::InvalidLevel {
            level: "requested basis state",
            space: self.kind.name(),
        })?;
        self.basis_vector(idx)
    }

    /// Index map from this space onto the matching atoms-only space, or
    /// `None` for spaces without a cavity.
    pub(crate) fn atomic_index(&self, state: &BasisState) -> Option<usize> {
        match self.kind {
            SpaceKind::Restricted4 => {
                let q = (state.ions[0].qubit()?, state.ions[1].qubit()?);
                Some(match q {
                    (1, 1) => TQ_11,
                    (1, 0) => TQ_10,
                    (0, 1) => TQ_01,
                    _ => TQ_00,
                })
            }
            SpaceKind::FullLambda { .. } => {
                HilbertSpace::lambda_pair().index_of(&BasisState::new(state.ions[0], state.ions[1], 0))
            }
            _ => None,
        }
    }
}

fn label(kind: SpaceKind, s: &BasisState) -> String {
    match kind {
        SpaceKind::Restricted4 | SpaceKind::TwoQubit => {
            let q1 = s.ions[0].qubit().unwrap_or(9);
            let q2 = s.ions[1].qubit().unwrap_or(9);
            if kind.has_cavity() {
                format!("|{q1}{q2};{}>", s.photons)
            } else {
                format!("|{q1}{q2}>")
            }
        }
        SpaceKind::FullLambda { .. } => format!("|{}{};{}>", s.ions[0], s.ions[1], s.photons),
        SpaceKind::LambdaPair => format!("|{}{}>", s.ions[0], s.ions[1]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn restricted4_ordering() {
        let sp = HilbertSpace::restricted4();
        assert_eq!(sp.labels(), ["|00;0>", "|00;1>", "|01;0>", "|10;0>"]);
        assert_eq!(sp.index_of(&BasisState::new(Level::S, Level::D, 0)), Some(R4_ION1));
        assert_eq!(sp.index_of(&BasisState::new(Level::D, Level::S, 0)), Some(R4_ION2));
    }

    #[test]
    fn full_lambda_is_lexicographic() {
        let sp = HilbertSpace::full_lambda(2).unwrap();
        assert_eq!(sp.dim(), 27);
        for (i, s) in sp.states().iter().enumerate() {
            assert_eq!(sp.index_of(s), Some(i));
        }
        assert_eq!(sp.labels()[0], "|SS;0>");
        assert_eq!(sp.labels()[26], "|DD;2>");
        assert!(HilbertSpace::full_lambda(0).is_err());
    }

    #[test]
    fn two_qubit_ordering_matches_block_form() {
        let sp = HilbertSpace::two_qubit();
        assert_eq!(sp.labels(), ["|11>", "|10>", "|01>", "|00>"]);
    }
}
