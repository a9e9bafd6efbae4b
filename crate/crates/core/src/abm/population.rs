use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::model::SimplexPoint;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AgentType {
    Sitter,
    Identifier,
    Cheater,
}

impl AgentType {
    pub const ALL: [AgentType; 3] = [AgentType::Sitter, AgentType::Identifier, AgentType::Cheater];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(k: usize) -> AgentType {
        AgentType::ALL[k]
    }

    pub fn name(self) -> &'static str {
        match self {
            AgentType::Sitter => "sitter",
            AgentType::Identifier => "identifier",
            AgentType::Cheater => "cheater",
        }
    }
}

/// One value per agent type, indexable by [`AgentType`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct PerType<V> {
    pub sitter: V,
    pub identifier: V,
    pub cheater: V,
}

impl<V> PerType<V> {
    pub fn new(sitter: V, identifier: V, cheater: V) -> Self {
        PerType { sitter, identifier, cheater }
    }

    pub fn from_fn(mut f: impl FnMut(AgentType) -> V) -> Self {
        PerType {
            sitter: f(AgentType::Sitter),
            identifier: f(AgentType::Identifier),
            cheater: f(AgentType::Cheater),
        }
    }

    pub fn map<W>(self, mut f: impl FnMut(V) -> W) -> PerType<W> {
        PerType {
            sitter: f(self.sitter),
            identifier: f(self.identifier),
            cheater: f(self.cheater),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (AgentType, &V)> {
        AgentType::ALL.into_iter().map(move |t| (t, &self[t]))
    }
}

impl<V> Index<AgentType> for PerType<V> {
    type Output = V;
    fn index(&self, t: AgentType) -> &V {
        match t {
            AgentType::Sitter => &self.sitter,
            AgentType::Identifier => &self.identifier,
            AgentType::Cheater => &self.cheater,
        }
    }
}

impl<V> IndexMut<AgentType> for PerType<V> {
    fn index_mut(&mut self, t: AgentType) -> &mut V {
        match t {
            AgentType::Sitter => &mut self.sitter,
            AgentType::Identifier => &mut self.identifier,
            AgentType::Cheater => &mut self.cheater,
        }
    }
}

/// Integer head counts per type.
///
/// Agent identities are laid out as sitters `[0, n_S)`, identifiers
/// `[n_S, n_S + n_I)`, then cheaters. Nest `j` belongs to agent `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PopulationCounts {
    counts: PerType<u64>,
}

impl PopulationCounts {
    pub fn new(sitters: u64, identifiers: u64, cheaters: u64) -> Result<Self> {
        if sitters + identifiers + cheaters == 0 {
            return Err(Error::domain("population must contain at least one agent"));
        }
        Ok(PopulationCounts {
            counts: PerType::new(sitters, identifiers, cheaters),
        })
    }

    pub(crate) fn from_per_type(counts: PerType<u64>) -> Self {
        debug_assert!(counts.sitter + counts.identifier + counts.cheater > 0);
        PopulationCounts { counts }
    }

    /// Largest-remainder apportionment of `total` agents to the shares of `point`.
    /// Ties in the fractional part go to the earlier type (sitter, identifier, cheater).
    pub fn from_point<T: Scalar>(point: &SimplexPoint<T>, total: u64) -> Result<Self> {
        if total == 0 {
            return Err(Error::domain("population must contain at least one agent"));
        }
        let shares = point.as_array().map(|x| x.to_f64().unwrap_or(0.0));
        let quotas = shares.map(|p| p * total as f64);
        let mut counts = quotas.map(|q| q.floor() as u64);
        let assigned: u64 = counts.iter().sum();
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| {
            let ra = quotas[a] - quotas[a].floor();
            let rb = quotas[b] - quotas[b].floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        let mut remaining = total.saturating_sub(assigned);
        for &k in order.iter().cycle() {
            if remaining == 0 {
                break;
            }
            counts[k] += 1;
            remaining -= 1;
        }
        let [s, i, c] = counts;
        Self::new(s, i, c)
    }

    pub fn get(&self, t: AgentType) -> u64 {
        self.counts[t]
    }

    pub fn sitters(&self) -> u64 {
        self.counts.sitter
    }

    pub fn identifiers(&self) -> u64 {
        self.counts.identifier
    }

    pub fn cheaters(&self) -> u64 {
        self.counts.cheater
    }

    pub fn total(&self) -> u64 {
        self.counts.sitter + self.counts.identifier + self.counts.cheater
    }

    /// Number of nests, one per sitter or identifier.
    pub fn nests(&self) -> u64 {
        self.counts.sitter + self.counts.identifier
    }

    pub fn per_type(&self) -> PerType<u64> {
        self.counts
    }

    pub fn agent_type(&self, id: u64) -> AgentType {
        if id < self.counts.sitter {
            AgentType::Sitter
        } else if id < self.nests() {
            AgentType::Identifier
        } else {
            AgentType::Cheater
        }
    }

    pub fn proportions<T: Scalar>(&self) -> SimplexPoint<T> {
        let n = T::from_count(self.total());
        SimplexPoint::from_array([self.sitters(), self.identifiers(), self.cheaters()].map(|k| T::from_count(k) / n))
            .expect("count proportions lie on the simplex")
    }
}
