use std::io::Write;

use serde::Serialize;

use crate::num::Scalar;

use super::net::{Marking, PlaceTransitionNet};
use super::PetriError;

/// `a_plus`, `a_minus` and `a = a_plus - a_minus`, each |T| × |P| with rows
/// in transition order and columns in place order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IncidenceMatrices<S> {
    pub places: Vec<String>,
    pub transitions: Vec<String>,
    pub a_plus: Vec<Vec<S>>,
    pub a_minus: Vec<Vec<S>>,
    pub a: Vec<Vec<S>>,
}

pub fn incidence<S: Scalar>(net: &PlaceTransitionNet) -> IncidenceMatrices<S> {
    let (np, nt) = (net.places().len(), net.transitions().len());
    let zero = || vec![vec![S::zero(); np]; nt];
    let (mut a_plus, mut a_minus) = (zero(), zero());
    for (t, set) in net.post_sets().into_iter().enumerate() {
        for (p, w) in set {
            a_plus[t][p] = a_plus[t][p].clone() + S::from_u64(w);
        }
    }
    for (t, set) in net.pre_sets().into_iter().enumerate() {
        for (p, w) in set {
            a_minus[t][p] = a_minus[t][p].clone() + S::from_u64(w);
        }
    }
    let a = a_plus
        .iter()
        .zip(&a_minus)
        .map(|(r1, r2)| r1.iter().zip(r2).map(|(x, y)| x.clone() - y.clone()).collect())
        .collect();
    IncidenceMatrices { places: net.places().to_vec(), transitions: net.transitions().to_vec(), a_plus, a_minus, a }
}

impl<S: Scalar> IncidenceMatrices<S> {
    /// `A·y` for a vector over places (length |T|).
    pub fn apply_to_places(&self, y: &[S]) -> Vec<S> {
        self.a.iter().map(|row| dot(row, y)).collect()
    }

    /// `Aᵀ·x` for a vector over transitions (length |P|).
    pub fn apply_to_transitions(&self, x: &[S]) -> Vec<S> {
        (0..self.places.len())
            .map(|p| self.a.iter().zip(x).fold(S::zero(), |acc, (row, xi)| acc + row[p].clone() * xi.clone()))
            .collect()
    }

    /// Writes one matrix as CSV with a header row of place names and the
    /// transition name in the first column.
    pub fn write_csv<W: Write>(&self, which: MatrixKind, out: W) -> Result<(), PetriError> {
        let m = match which {
            MatrixKind::Plus => &self.a_plus,
            MatrixKind::Minus => &self.a_minus,
            MatrixKind::Incidence => &self.a,
        };
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![String::new()];
        header.extend(self.places.iter().cloned());
        w.write_record(&header)?;
        for (t, row) in self.transitions.iter().zip(m) {
            let mut rec = vec![t.clone()];
            rec.extend(row.iter().map(|x| x.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    Plus,
    Minus,
    Incidence,
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// Places whose entry came out negative: the firing-count vector cannot be
/// realized from the given marking.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NegativeResultWarning {
    pub places: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StateEquationResult<S> {
    pub marking: Vec<S>,
    pub warning: Option<NegativeResultWarning>,
}

/// `M' = M + Aᵀ·X`: each transition's row of `A` is added `X[t]` times.
pub fn state_equation<S: Scalar>(
    inc: &IncidenceMatrices<S>,
    m: &[S],
    x: &[S],
) -> Result<StateEquationResult<S>, PetriError> {
    if m.len() != inc.places.len() {
        return Err(PetriError::DimensionMismatch { expected: inc.places.len(), found: m.len() });
    }
    if x.len() != inc.transitions.len() {
        return Err(PetriError::DimensionMismatch { expected: inc.transitions.len(), found: x.len() });
    }
    if let Some(i) = x.iter().position(|v| v.is_negative()) {
        return Err(PetriError::NegativeFiringCount(inc.transitions[i].clone()));
    }
    let delta = inc.apply_to_transitions(x);
    let marking: Vec<S> = m.iter().zip(delta).map(|(a, d)| a.clone() + d).collect();
    let negative: Vec<String> = marking
        .iter()
        .zip(&inc.places)
        .filter(|(v, _)| v.is_negative())
        .map(|(_, p)| p.clone())
        .collect();
    let warning = (!negative.is_empty()).then_some(NegativeResultWarning { places: negative });
    Ok(StateEquationResult { marking, warning })
}

/// Finite token counts of `m` as scalars.
pub fn marking_vector<S: Scalar>(m: &Marking) -> Result<Vec<S>, PetriError> {
    m.counts().map(|c| c.into_iter().map(S::from_u64).collect()).ok_or(PetriError::OmegaMarking)
}
