//! Composite-polynomial IR for custom gates.
//!
//! A [`CompositePoly`] is a flat sum of [`Term`]s. Each term is a coefficient
//! (a field constant times a product of named scalar challenges) multiplied by
//! a multiset of input MLEs. Powers are encoded by repeating a factor.

mod library;
mod parse;

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use sha3::{Digest, Sha3_256};
use thiserror::Error;

use crate::binding::{Binding, BindingError};
use crate::field::Fr;

pub use library::{
    builtin_gate, builtin_gate_text, builtin_gates, sweep_gate, GateId, BUILTIN_IDS,
};
pub use parse::{parse_gate, parse_gates};

/// Values of the named scalar challenges referenced by a gate.
pub type Scalars = BTreeMap<String, Fr>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GateError {
    #[error("parse error at {line}:{col}: {msg}")]
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("unknown symbol `{name}` at {line}:{col}")]
    UnknownSymbol {
        name: String,
        line: usize,
        col: usize,
    },
    #[error("input `{0}` declared twice")]
    DuplicateInput(String),
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("no value bound for challenge `{0}`")]
    MissingScalar(String),
    #[error(transparent)]
    Binding(#[from] BindingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Selector,
    Witness,
    PermAux,
    Eq,
    Temp,
}

impl Role {
    pub fn as_str(&self) -> &'static str {
        match self {
            Role::Selector => "selector",
            Role::Witness => "witness",
            Role::PermAux => "perm",
            Role::Eq => "eq",
            Role::Temp => "temp",
        }
    }

    pub fn parse(s: &str) -> Option<Role> {
        Some(match s {
            "selector" => Role::Selector,
            "witness" => Role::Witness,
            "perm" | "permutation-aux" | "permutation_aux" => Role::PermAux,
            "eq" => Role::Eq,
            "temp" => Role::Temp,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MleRef {
    pub id: String,
    pub role: Role,
}

/// `constant * Π challenges`. Challenge indices are sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coeff {
    pub constant: Fr,
    pub challenges: Vec<usize>,
}

impl Coeff {
    pub fn constant(c: Fr) -> Self {
        Self {
            constant: c,
            challenges: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    pub coeff: Coeff,
    /// Input indices, sorted, repeated for powers.
    pub factors: Vec<usize>,
}

impl Term {
    pub fn degree(&self) -> usize {
        self.factors.len()
    }

    /// `(input, multiplicity)` pairs in input order.
    pub fn factor_counts(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for &f in &self.factors {
            match out.last_mut() {
                Some((g, k)) if *g == f => *k += 1,
                _ => out.push((f, 1)),
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositePoly {
    pub name: String,
    pub inputs: Vec<MleRef>,
    pub challenges: Vec<String>,
    pub terms: Vec<Term>,
}

impl CompositePoly {
    /// Max total multiplicity over terms.
    pub fn degree(&self) -> usize {
        self.terms.iter().map(Term::degree).max().unwrap_or(0)
    }

    /// Number of distinct inputs referenced by at least one term.
    pub fn distinct_mles(&self) -> usize {
        let mut used = vec![false; self.inputs.len()];
        for t in &self.terms {
            for &f in &t.factors {
                used[f] = true;
            }
        }
        used.iter().filter(|u| **u).count()
    }

    pub fn input_index(&self, id: &str) -> Option<usize> {
        self.inputs.iter().position(|m| m.id == id)
    }

    /// SHA3-256 of the printed form; identifies the gate in proof headers.
    pub fn fingerprint(&self) -> [u8; 32] {
        Sha3_256::digest(self.to_string().as_bytes()).into()
    }

    /// The single `eq`-role input when every term carries it exactly once.
    pub fn zerocheck_factor(&self) -> Option<usize> {
        let mut eqs = self
            .inputs
            .iter()
            .enumerate()
            .filter(|(_, m)| m.role == Role::Eq);
        let (idx, _) = eqs.next()?;
        if eqs.next().is_some() || self.terms.is_empty() {
            return None;
        }
        let all = self
            .terms
            .iter()
            .all(|t| t.factors.iter().filter(|&&f| f == idx).count() == 1);
        all.then_some(idx)
    }

    /// Removes the ZeroCheck factor from every term, if the gate has one.
    pub fn zerocheck_body(&self) -> Option<CompositePoly> {
        let idx = self.zerocheck_factor()?;
        let remap = |f: usize| if f > idx { f - 1 } else { f };
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                coeff: t.coeff.clone(),
                factors: t
                    .factors
                    .iter()
                    .filter(|&&f| f != idx)
                    .map(|&f| remap(f))
                    .collect(),
            })
            .collect();
        let mut inputs = self.inputs.clone();
        inputs.remove(idx);
        Some(CompositePoly {
            name: self.name.clone(),
            inputs,
            challenges: self.challenges.clone(),
            terms,
        })
    }

    /// Appends an `eq`-role input and multiplies every term by it.
    pub fn with_eq_factor(&self, id: &str) -> CompositePoly {
        let mut out = self.clone();
        let idx = out.inputs.len();
        out.inputs.push(MleRef {
            id: id.to_string(),
            role: Role::Eq,
        });
        for t in &mut out.terms {
            t.factors.push(idx);
        }
        out
    }

    /// Resolves each term's coefficient against challenge values.
    pub fn term_coeffs(&self, scalars: &Scalars) -> Result<Vec<Fr>, GateError> {
        self.terms
            .iter()
            .map(|t| {
                t.coeff
                    .challenges
                    .iter()
                    .try_fold(t.coeff.constant, |acc, &c| {
                        let name = &self.challenges[c];
                        scalars
                            .get(name)
                            .map(|v| acc * *v)
                            .ok_or_else(|| GateError::MissingScalar(name.clone()))
                    })
            })
            .collect()
    }

    /// Evaluates the gate given one value per input.
    pub fn evaluate_values(&self, values: &[Fr], scalars: &Scalars) -> Result<Fr, GateError> {
        let coeffs = self.term_coeffs(scalars)?;
        Ok(self
            .terms
            .iter()
            .zip(coeffs)
            .map(|(t, c)| t.factors.iter().fold(c, |acc, &f| acc * values[f]))
            .sum())
    }

    /// Plugs the bound table entries at hypercube `index` into the gate.
    pub fn evaluate_at(
        &self,
        binding: &Binding,
        scalars: &Scalars,
        index: usize,
    ) -> Result<Fr, GateError> {
        let tables = binding.resolve(self)?;
        if index >= 1 << binding.num_vars() {
            return Err(BindingError::IndexOutOfRange(index).into());
        }
        let values: Vec<Fr> = tables.iter().map(|m| m.evals()[index]).collect();
        self.evaluate_values(&values, scalars)
    }
}

fn format_coeff(c: Fr) -> (bool, String) {
    let neg = -c;
    if c.as_u64().is_none() && neg.as_u64().is_some() {
        (true, neg.to_string())
    } else {
        (false, c.to_string())
    }
}

impl fmt::Display for CompositePoly {
    /// Prints the gate in the text format accepted by [`parse_gate`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "gate {} (inputs: ", self.name)?;
        for (i, m) in self.inputs.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}:{}", m.id, m.role.as_str())?;
        }
        if !self.challenges.is_empty() {
            write!(f, "; challenges: {}", self.challenges.join(", "))?;
        }
        f.write_str(") {\n  ")?;
        if self.terms.is_empty() {
            f.write_str("0")?;
        }
        for (i, t) in self.terms.iter().enumerate() {
            let (neg, mag) = format_coeff(t.coeff.constant);
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mut parts: Vec<String> = Vec::new();
            if mag != "1" || (t.factors.is_empty() && t.coeff.challenges.is_empty()) {
                parts.push(mag);
            }
            parts.extend(
                t.coeff
                    .challenges
                    .iter()
                    .map(|&c| self.challenges[c].clone()),
            );
            for (idx, k) in t.factor_counts() {
                let mut s = self.inputs[idx].id.clone();
                if k > 1 {
                    let _ = write!(s, "^{k}");
                }
                parts.push(s);
            }
            f.write_str(&parts.join("*"))?;
        }
        f.write_str("\n}\n")
    }
}
