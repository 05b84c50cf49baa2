use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::DomainError;

/// A rooted class tree whose leaves are deliverable items.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ontology {
    pub root: String,
    /// Child to parent.
    pub parent: BTreeMap<String, String>,
}

impl Default for Ontology {
    fn default() -> Self {
        Ontology::from_edges(
            "item",
            &[
                ("item", "drink"),
                ("item", "food"),
                ("drink", "coffee"),
                ("drink", "soda"),
                ("drink", "juice"),
                ("coffee", "regular"),
                ("coffee", "decaf"),
                ("food", "sandwich"),
                ("food", "cookie"),
            ],
        )
    }
}

impl Ontology {
    /// Builds a tree from `(parent, child)` pairs.
    pub fn from_edges(root: &str, edges: &[(&str, &str)]) -> Self {
        Ontology {
            root: root.to_string(),
            parent: edges.iter().map(|(p, c)| (c.to_string(), p.to_string())).collect(),
        }
    }

    pub fn contains(&self, node: &str) -> bool {
        node == self.root || self.parent.contains_key(node)
    }

    pub fn is_leaf(&self, node: &str) -> bool {
        self.contains(node) && !self.parent.values().any(|p| p == node)
    }

    /// Leaves in name order.
    pub fn leaves(&self) -> Vec<String> {
        self.parent.keys().filter(|n| self.is_leaf(n)).cloned().collect()
    }

    /// Non-leaf nodes, root first, then name order.
    pub fn classes(&self) -> Vec<String> {
        let mut out = vec![self.root.clone()];
        out.extend(self.parent.keys().filter(|n| !self.is_leaf(n)).cloned());
        out
    }

    /// Leaves under `node`, or `node` itself when it is a leaf.
    pub fn leaves_under(&self, node: &str) -> Vec<String> {
        if self.is_leaf(node) {
            return vec![node.to_string()];
        }
        self.leaves().into_iter().filter(|l| self.path(l).iter().any(|n| n == node)).collect()
    }

    /// Nodes from `node` up to the root, inclusive.
    pub fn path(&self, node: &str) -> Vec<String> {
        let mut out = vec![node.to_string()];
        let mut cur = node;
        while let Some(p) = self.parent.get(cur) {
            out.push(p.clone());
            cur = p;
        }
        out
    }

    /// Nodes between an ancestor and a node, both counted.
    pub fn depth(&self, ancestor: &str, node: &str) -> Option<usize> {
        self.path(node).iter().position(|n| n == ancestor).map(|i| i + 1)
    }

    pub fn lowest_common_ancestor(&self, a: &str, b: &str) -> Option<String> {
        let pa = self.path(a);
        self.path(b).into_iter().find(|n| pa.contains(n))
    }

    /// Checks for a single root and that every leaf sits at depth two or more.
    pub fn validate(&self) -> Result<(), DomainError> {
        for node in self.parent.keys() {
            let path = self.path(node);
            if path.last() != Some(&self.root) || path.len() > self.parent.len() + 1 {
                return Err(DomainError::Config(format!("`{node}` does not reach root `{}`", self.root)));
            }
        }
        if self.leaves().is_empty() {
            return Err(DomainError::Config("ontology has no items".into()));
        }
        Ok(())
    }

    /// P-log facts for the direct edges: `subcls(child, parent)` between
    /// classes and `is(leaf, parent)` for items.
    pub(crate) fn facts(&self, items: &[String]) -> Vec<String> {
        let mut out = Vec::new();
        for (child, parent) in &self.parent {
            if self.is_leaf(child) {
                if items.contains(child) {
                    out.push(format!("is({child}, {parent})."));
                }
            } else {
                out.push(format!("subcls({child}, {parent})."));
            }
        }
        out
    }
}

/// Similarity of two items from their separation in the ontology.
pub fn item_closeness(ontology: &Ontology, a: &str, b: &str) -> Result<f64, DomainError> {
    for x in [a, b] {
        if !ontology.is_leaf(x) {
            return Err(DomainError::UnknownName(x.to_string()));
        }
    }
    let lca = ontology.lowest_common_ancestor(a, b).expect("items share the root");
    let d = |x: &str| ontology.depth(&lca, x).expect("lca is an ancestor");
    let r = |x: &str| ontology.depth(&ontology.root, x).expect("root is an ancestor");
    let separation = d(a).max(d(b)) - 1;
    Ok(1.0 - separation as f64 / r(a).max(r(b)) as f64)
}

/// Similarity of delivering to `delivered` when `requested` was asked for,
/// given distances from the shop. Not symmetric.
pub fn room_closeness(distances: &BTreeMap<String, f64>, delivered: &str, requested: &str) -> Result<f64, DomainError> {
    let get = |r: &str| -> Result<f64, DomainError> {
        let d = *distances.get(r).ok_or_else(|| DomainError::UnknownName(r.to_string()))?;
        if d > 0.0 && d.is_finite() {
            Ok(d)
        } else {
            Err(DomainError::Config(format!("distance to `{r}` must be positive")))
        }
    };
    let (d1, d2) = (get(delivered)?, get(requested)?);
    Ok(d2 / (2.0 * d1 + d2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_tree_shape() {
        let o = Ontology::default();
        o.validate().unwrap();
        assert_eq!(o.leaves(), ["cookie", "decaf", "juice", "regular", "sandwich", "soda"]);
        assert_eq!(o.depth("item", "regular"), Some(4));
        assert_eq!(o.leaves_under("coffee"), ["decaf", "regular"]);
        assert_eq!(o.lowest_common_ancestor("regular", "soda").as_deref(), Some("drink"));
    }

    #[test]
    fn item_examples() {
        let o = Ontology::default();
        assert_eq!(item_closeness(&o, "soda", "soda").unwrap(), 1.0);
        assert!((item_closeness(&o, "regular", "decaf").unwrap() - 0.75).abs() < 1e-12);
        assert!((item_closeness(&o, "regular", "sandwich").unwrap() - 0.25).abs() < 1e-12);
        assert!(item_closeness(&o, "regular", "coffee").is_err());
    }

    #[test]
    fn room_examples() {
        let d: BTreeMap<String, f64> = [("r0", 1.0), ("r1", 2.0), ("r2", 3.0)].map(|(k, v)| (k.to_string(), v)).into();
        assert!((room_closeness(&d, "r0", "r2").unwrap() - 0.6).abs() < 1e-12);
        assert!((room_closeness(&d, "r2", "r0").unwrap() - 1.0 / 7.0).abs() < 1e-12);
        for r in ["r0", "r1", "r2"] {
            assert!((room_closeness(&d, r, r).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        }
        let bad: BTreeMap<String, f64> = [("r0".to_string(), 0.0)].into();
        assert!(room_closeness(&bad, "r0", "r0").is_err());
    }
}
