//! Named MLE tables bound to a gate's inputs.

use indexmap::IndexMap;
use thiserror::Error;

use crate::gates::CompositePoly;
use crate::mle::Mle;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BindingError {
    #[error("no table bound for input `{0}`")]
    MissingBinding(String),
    #[error("table `{id}` has {actual} variables, binding expects {expected}")]
    DimensionMismatch {
        id: String,
        expected: usize,
        actual: usize,
    },
    #[error("hypercube index {0} out of range")]
    IndexOutOfRange(usize),
}

/// A set of equally-sized tables keyed by input id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding {
    num_vars: usize,
    tables: IndexMap<String, Mle>,
}

impl Binding {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            tables: IndexMap::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn insert(&mut self, id: &str, m: Mle) -> Result<(), BindingError> {
        if m.num_vars() != self.num_vars {
            return Err(BindingError::DimensionMismatch {
                id: id.to_string(),
                expected: self.num_vars,
                actual: m.num_vars(),
            });
        }
        self.tables.insert(id.to_string(), m);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&Mle> {
        self.tables.get(id)
    }

    pub fn get_mut(&mut self, id: &str) -> Option<&mut Mle> {
        self.tables.get_mut(id)
    }

    pub fn remove(&mut self, id: &str) -> Option<Mle> {
        self.tables.shift_remove(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Mle)> {
        self.tables.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.tables.keys().map(String::as_str)
    }

    /// Tables in the gate's input order.
    pub fn resolve<'a>(&'a self, poly: &CompositePoly) -> Result<Vec<&'a Mle>, BindingError> {
        poly.inputs
            .iter()
            .map(|m| {
                self.get(&m.id)
                    .ok_or_else(|| BindingError::MissingBinding(m.id.clone()))
            })
            .collect()
    }
}
