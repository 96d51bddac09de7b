//! The dynamic-priority information space: items, their priorities, the
//! active collection ordering and the set of feasible orderings.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::layout::ItemId;
use crate::error::{Error, Result};

/// A collection order, highest priority first. Rank of an item is its
/// position plus one.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Ordering(Vec<ItemId>);

impl Ordering {
    /// Builds an ordering; rejects repeated items.
    pub fn new(items: Vec<ItemId>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::InvalidOrdering("ordering is empty".into()));
        }
        for (i, a) in items.iter().enumerate() {
            if items[i + 1..].contains(a) {
                return Err(Error::InvalidOrdering(format!("item {a} repeated")));
            }
        }
        Ok(Self(items))
    }

    pub fn items(&self) -> &[ItemId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// 1-based rank of `item`.
    pub fn rank(&self, item: ItemId) -> Option<usize> {
        self.0.iter().position(|i| *i == item).map(|p| p + 1)
    }

    /// The item at 1-based `rank`.
    pub fn at_rank(&self, rank: usize) -> Option<ItemId> {
        rank.checked_sub(1).and_then(|i| self.0.get(i)).copied()
    }

    /// True when `self` permutes exactly the items in `items`.
    pub fn is_permutation_of(&self, items: &[ItemId]) -> bool {
        let mut a = self.0.clone();
        let mut b = items.to_vec();
        a.sort();
        b.sort();
        a == b
    }
}

impl fmt::Display for Ordering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, item) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("->")?;
            }
            write!(f, "{item}")?;
        }
        Ok(())
    }
}

/// Accepts `X->Y->Z`, `X→Y→Z`, `X,Y,Z` or `XYZ`.
impl FromStr for Ordering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let items = s
            .chars()
            .filter(|c| !c.is_whitespace() && !matches!(c, '-' | '>' | '→' | ','))
            .map(|c| {
                if c.is_ascii_uppercase() {
                    Ok(ItemId(c))
                } else {
                    Err(Error::InvalidOrdering(format!(
                        "bad item glyph {c:?} in {s:?}"
                    )))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(items)
    }
}

impl TryFrom<String> for Ordering {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Ordering> for String {
    fn from(o: Ordering) -> String {
        o.to_string()
    }
}

/// One replacement of the active ordering.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderingChange {
    pub episode: usize,
    pub from: Ordering,
    pub to: Ordering,
}

/// Items, priorities, the active ordering and the feasible contexts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InformationSpace {
    items: Vec<ItemId>,
    /// Parallel to `items`.
    priorities: Vec<f64>,
    ordering: Ordering,
    contexts: Vec<Ordering>,
    changes: Vec<OrderingChange>,
}

impl InformationSpace {
    /// Information space whose contexts are every permutation of the items.
    pub fn new(ordering: Ordering) -> Self {
        let mut items = ordering.items().to_vec();
        items.sort();
        let contexts = permutations(&items)
            .into_iter()
            .map(|p| Ordering::new(p).expect("permutation has unique items"))
            .collect();
        Self::with_contexts(ordering, contexts).expect("ordering is among all permutations")
    }

    /// Information space restricted to `contexts`, which must contain `ordering`.
    pub fn with_contexts(ordering: Ordering, contexts: Vec<Ordering>) -> Result<Self> {
        let mut items = ordering.items().to_vec();
        items.sort();
        if let Some(bad) = contexts.iter().find(|c| !c.is_permutation_of(&items)) {
            return Err(Error::InvalidOrdering(format!(
                "context {bad} is not a permutation of the items"
            )));
        }
        if !contexts.contains(&ordering) {
            return Err(Error::InvalidOrdering(format!(
                "ordering {ordering} is not among the contexts"
            )));
        }
        let priorities = priorities_for(&items, &ordering);
        Ok(Self {
            items,
            priorities,
            ordering,
            contexts,
            changes: Vec::new(),
        })
    }

    pub fn items(&self) -> &[ItemId] {
        &self.items
    }

    pub fn ordering(&self) -> &Ordering {
        &self.ordering
    }

    pub fn contexts(&self) -> &[Ordering] {
        &self.contexts
    }

    pub fn changes(&self) -> &[OrderingChange] {
        &self.changes
    }

    /// Priority value `p_k`; larger means collected earlier.
    pub fn priority(&self, item: ItemId) -> Option<f64> {
        self.items
            .iter()
            .position(|i| *i == item)
            .map(|p| self.priorities[p])
    }

    pub fn rank(&self, item: ItemId) -> Option<usize> {
        self.ordering.rank(item)
    }

    /// Replaces the active ordering at `episode` and records the change.
    /// Swapping to the current ordering is a no-op that is still recorded.
    pub fn swap_priorities(
        &mut self,
        new_ordering: Ordering,
        episode: usize,
    ) -> Result<&OrderingChange> {
        if !new_ordering.is_permutation_of(&self.items) {
            return Err(Error::InvalidOrdering(format!(
                "{new_ordering} is not a permutation of the items"
            )));
        }
        if !self.contexts.contains(&new_ordering) {
            return Err(Error::InvalidOrdering(format!(
                "{new_ordering} is not among the feasible contexts"
            )));
        }
        let from = std::mem::replace(&mut self.ordering, new_ordering);
        self.priorities = priorities_for(&self.items, &self.ordering);
        self.changes.push(OrderingChange {
            episode,
            from,
            to: self.ordering.clone(),
        });
        Ok(self.changes.last().expect("just pushed"))
    }
}

/// `p_k = |I| - rank + 1`.
fn priorities_for(items: &[ItemId], ordering: &Ordering) -> Vec<f64> {
    let n = items.len();
    items
        .iter()
        .map(|i| (n + 1 - ordering.rank(*i).expect("ordering covers items")) as f64)
        .collect()
}

fn permutations(items: &[ItemId]) -> Vec<Vec<ItemId>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}
