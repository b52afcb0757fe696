use crate::{Error, Result};

/// Weighted mutations of one representation. Always contains the current one.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborSet<R> {
    members: Vec<R>,
    weights: Vec<f64>,
    current: usize,
}

fn check_weight(w: f64) -> Result<()> {
    if w.is_finite() && w > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("neighbor weight {w} must be positive")))
    }
}

impl<R: PartialEq> NeighborSet<R> {
    /// Current representation first, then `others` in order. No deduplication.
    pub fn new(current: R, current_weight: f64, others: Vec<(R, f64)>) -> Result<Self> {
        check_weight(current_weight)?;
        let mut members = Vec::with_capacity(others.len() + 1);
        let mut weights = Vec::with_capacity(others.len() + 1);
        members.push(current);
        weights.push(current_weight);
        for (r, w) in others {
            check_weight(w)?;
            members.push(r);
            weights.push(w);
        }
        Ok(NeighborSet { members, weights, current: 0 })
    }

    /// Like [`NeighborSet::new`] but equal members are merged and their weights summed.
    pub fn merged(current: R, current_weight: f64, others: Vec<(R, f64)>) -> Result<Self> {
        let mut set = NeighborSet::new(current, current_weight, Vec::new())?;
        for (r, w) in others {
            check_weight(w)?;
            match set.members.iter().position(|m| *m == r) {
                Some(i) => set.weights[i] += w,
                None => {
                    set.members.push(r);
                    set.weights.push(w);
                }
            }
        }
        Ok(set)
    }
}

impl<R> NeighborSet<R> {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[R] {
        &self.members
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn current_index(&self) -> usize {
        self.current
    }

    pub fn current(&self) -> &R {
        &self.members[self.current]
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn probability(&self, i: usize) -> f64 {
        self.weights[i] / self.total_weight()
    }

    pub fn into_members(self) -> Vec<R> {
        self.members
    }
}
