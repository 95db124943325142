//! Dewey addresses of proof-tree nodes.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

/// A node address: the empty word is the root, `1.2` is the second child of
/// the root's first child. The derived order is the tree's lexicographic
/// order (a prefix precedes its extensions, siblings go by index).
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(Arc<[u32]>);

impl NodeId {
    pub fn root() -> Self {
        NodeId(Arc::new([]))
    }

    pub fn from_path(path: Vec<u32>) -> Self {
        assert!(path.iter().all(|&i| i > 0), "Dewey indices start at 1");
        NodeId(path.into())
    }

    pub fn path(&self) -> &[u32] {
        &self.0
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    /// The parent; the root is its own parent.
    pub fn parent(&self) -> NodeId {
        let n = self.0.len().saturating_sub(1);
        NodeId(self.0[..n].into())
    }

    pub fn child(&self, i: u32) -> NodeId {
        assert!(i > 0, "Dewey indices start at 1");
        let mut p = self.0.to_vec();
        p.push(i);
        NodeId(p.into())
    }

    /// Position among siblings, `None` for the root.
    pub fn index(&self) -> Option<u32> {
        self.0.last().copied()
    }

    /// The next sibling, `None` for the root.
    pub fn next_sibling(&self) -> Option<NodeId> {
        let i = self.index()?;
        Some(self.parent().child(i + 1))
    }

    /// The previous sibling, `None` for the root and first children.
    pub fn prev_sibling(&self) -> Option<NodeId> {
        match self.index()? {
            1 => None,
            i => Some(self.parent().child(i - 1)),
        }
    }

    /// Number of nodes on the path from the root, the root included.
    pub fn lpath(&self) -> u32 {
        self.0.len() as u32 + 1
    }

    /// True when `self` lies in the subtree rooted at `other` (itself included).
    pub fn is_in_subtree_of(&self, other: &NodeId) -> bool {
        self.0.starts_with(&other.0)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(".")?;
            }
            write!(f, "{i}")?;
        }
        Ok(())
    }
}

impl FromStr for NodeId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "ε" || s == "e" || s.is_empty() {
            return Ok(NodeId::root());
        }
        s.split('.')
            .map(|p| match p.parse::<u32>() {
                Ok(i) if i > 0 => Ok(i),
                _ => Err(format!("bad node id `{s}`")),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(|p: Vec<u32>| NodeId(p.into()))
    }
}
