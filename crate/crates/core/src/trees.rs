//! Plane trees, marked trees and degree statistics.
//!
//! A plane tree is stored as its Łukasiewicz word: the sequence of child
//! counts in depth-first preorder. Node identity is the 0-based preorder
//! position. Every other view (depths, parents, level widths) is derived
//! from the word in a single pass.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sparse map from child count `c` to the number of nodes `n(c)` with that
/// many children, for a forest of `trees` plane trees.
///
/// The forest condition `Σ n(c) = a + Σ c·n(c)` is checked on construction,
/// and `a` is derived from it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DegreeStatistics {
    counts: BTreeMap<usize, u64>,
    trees: u64,
}

/// `|n|_1`, `|n|_2^2` and `n(1)` as exact integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Norms {
    pub p1: u64,
    pub p2sq: u64,
    pub n1: u64,
}

impl DegreeStatistics {
    /// Builds forest statistics; the number of trees is derived from the
    /// node and edge totals and must be at least one.
    pub fn new<I: IntoIterator<Item = (usize, u64)>>(counts: I) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (c, k) in counts {
            if k > 0 {
                *map.entry(c).or_insert(0u64) += k;
            }
        }
        let nodes: u64 = map.values().sum();
        let edges: u64 = map.iter().map(|(&c, &k)| c as u64 * k).sum();
        if nodes <= edges {
            return Err(Error::InvalidStatistics(format!(
                "{nodes} nodes and {edges} edges cannot form a forest"
            )));
        }
        let trees = nodes - edges;
        let leaves = map.get(&0).copied().unwrap_or(0);
        if leaves < trees {
            return Err(Error::InvalidStatistics(format!(
                "n(0) = {leaves} is smaller than the number of trees {trees}"
            )));
        }
        Ok(Self { counts: map, trees })
    }

    /// Builds statistics that must describe a single tree.
    pub fn tree<I: IntoIterator<Item = (usize, u64)>>(counts: I) -> Result<Self> {
        let stats = Self::new(counts)?;
        if stats.trees != 1 {
            return Err(Error::InvalidStatistics(format!(
                "expected a single tree, statistics describe {} trees",
                stats.trees
            )));
        }
        Ok(stats)
    }

    pub fn count(&self, degree: usize) -> u64 {
        self.counts.get(&degree).copied().unwrap_or(0)
    }

    pub fn node_count(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn edge_count(&self) -> u64 {
        self.counts.iter().map(|(&c, &k)| c as u64 * k).sum()
    }

    /// Number of trees `a` in the forest.
    pub fn trees(&self) -> u64 {
        self.trees
    }

    pub fn is_tree(&self) -> bool {
        self.trees == 1
    }

    pub fn max_degree(&self) -> usize {
        self.counts.keys().next_back().copied().unwrap_or(0)
    }

    /// `(degree, count)` pairs in increasing degree order; zero counts are never stored.
    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts.iter().map(|(&c, &k)| (c, k))
    }

    /// The degree multiset, non-decreasing.
    pub fn degrees(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.node_count() as usize);
        for (c, k) in self.iter() {
            out.extend(std::iter::repeat_n(c, k as usize));
        }
        out
    }

    pub fn norms(&self) -> Norms {
        let mut norms = Norms {
            p1: 0,
            p2sq: 0,
            n1: self.count(1),
        };
        for (c, k) in self.iter() {
            let c = c as u64;
            norms.p1 += c * k;
            norms.p2sq += c * c * k;
        }
        norms
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("degree statistics always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidStatistics(e.to_string()))
    }
}

impl Serialize for DegreeStatistics {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.counts.len()))?;
        for (c, k) in &self.counts {
            map.serialize_entry(&c.to_string(), k)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for DegreeStatistics {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct StatsVisitor;

        impl<'de> Visitor<'de> for StatsVisitor {
            type Value = DegreeStatistics;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object mapping degree strings to node counts")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> std::result::Result<Self::Value, A::Error> {
                let mut pairs = Vec::new();
                while let Some((key, count)) = access.next_entry::<String, u64>()? {
                    let degree = key
                        .trim()
                        .parse::<usize>()
                        .map_err(|_| de::Error::custom(format!("degree key {key:?} is not an integer")))?;
                    pairs.push((degree, count));
                }
                DegreeStatistics::new(pairs).map_err(de::Error::custom)
            }
        }

        deserializer.deserialize_map(StatsVisitor)
    }
}

impl fmt::Display for DegreeStatistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json())
    }
}

/// An ordered rooted tree, encoded by its preorder degree word.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlaneTree {
    luka: Vec<usize>,
}

impl PlaneTree {
    /// Decodes a Łukasiewicz word. Every proper prefix must keep
    /// `Σ (d_i - 1) >= 0` and the full word must sum to `-1`.
    pub fn from_word(luka: Vec<usize>) -> Result<Self> {
        if luka.is_empty() {
            return Err(Error::InvalidWord("empty word".into()));
        }
        let mut slots: i64 = 1;
        for (i, &d) in luka.iter().enumerate() {
            if slots <= 0 {
                return Err(Error::InvalidWord(format!(
                    "prefix of length {i} already closes the tree"
                )));
            }
            slots += d as i64 - 1;
        }
        if slots != 0 {
            return Err(Error::InvalidWord(format!(
                "Σ (d_i - 1) = {} but a tree needs -1",
                slots - 1
            )));
        }
        Ok(Self { luka })
    }

    /// Rotates an arbitrary arrangement of a tree degree multiset into its
    /// unique valid rotation (cycle lemma) and decodes it.
    pub fn from_cyclic_word(mut word: Vec<usize>) -> Result<Self> {
        let total: i64 = word.iter().map(|&d| d as i64 - 1).sum();
        if word.is_empty() || total != -1 {
            return Err(Error::InvalidWord(format!(
                "Σ (d_i - 1) = {total}; the cycle lemma needs -1"
            )));
        }
        // Start right after the first position where the prefix sum is minimal.
        let mut sum = 0i64;
        let mut min = i64::MAX;
        let mut argmin = 0;
        for (i, &d) in word.iter().enumerate() {
            sum += d as i64 - 1;
            if sum < min {
                min = sum;
                argmin = i;
            }
        }
        let len = word.len();
        word.rotate_left((argmin + 1) % len);
        debug_assert!(Self::from_word(word.clone()).is_ok());
        Ok(Self { luka: word })
    }

    pub fn word(&self) -> &[usize] {
        &self.luka
    }

    pub fn into_word(self) -> Vec<usize> {
        self.luka
    }

    /// Number of nodes `|v(t)|`.
    pub fn len(&self) -> usize {
        self.luka.len()
    }

    pub fn is_empty(&self) -> bool {
        self.luka.is_empty()
    }

    pub fn degree(&self, node: usize) -> usize {
        self.luka[node]
    }

    pub fn degree_statistics(&self) -> DegreeStatistics {
        let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
        for &d in &self.luka {
            *counts.entry(d).or_insert(0) += 1;
        }
        DegreeStatistics { counts, trees: 1 }
    }

    /// Depth of every node, indexed by preorder position.
    pub fn depths(&self) -> Vec<usize> {
        self.walk().0
    }

    /// Parent of every node; `None` for the root.
    pub fn parents(&self) -> Vec<Option<usize>> {
        self.walk().1
    }

    fn walk(&self) -> (Vec<usize>, Vec<Option<usize>>) {
        let n = self.luka.len();
        let mut depths = Vec::with_capacity(n);
        let mut parents = Vec::with_capacity(n);
        // (node, children still to visit) for every ancestor on the current path
        let mut open: Vec<(usize, usize)> = Vec::new();
        for (node, &d) in self.luka.iter().enumerate() {
            depths.push(open.len());
            match open.last_mut() {
                Some((parent, remaining)) => {
                    parents.push(Some(*parent));
                    *remaining -= 1;
                }
                None => parents.push(None),
            }
            if d > 0 {
                open.push((node, d));
            }
            while matches!(open.last(), Some((_, 0))) {
                open.pop();
            }
        }
        (depths, parents)
    }

    /// Children lists, each in left-to-right order.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut children = vec![Vec::new(); self.len()];
        for (node, parent) in self.parents().into_iter().enumerate() {
            if let Some(p) = parent {
                children[p].push(node);
            }
        }
        children
    }

    pub fn height(&self) -> usize {
        self.depths().into_iter().max().unwrap_or(0)
    }

    /// `wid(t, k)` for `k = 0..=ht(t)`.
    pub fn width_profile(&self) -> Vec<usize> {
        let depths = self.depths();
        let height = depths.iter().copied().max().unwrap_or(0);
        let mut profile = vec![0; height + 1];
        for d in depths {
            profile[d] += 1;
        }
        profile
    }

    pub fn width(&self) -> usize {
        self.width_profile().into_iter().max().unwrap_or(0)
    }
}

impl fmt::Display for PlaneTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for d in &self.luka {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{d}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for PlaneTree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let word = s
            .split_whitespace()
            .map(|tok| {
                tok.parse::<usize>()
                    .map_err(|_| Error::InvalidWord(format!("token {tok:?} is not a degree")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_word(word)
    }
}

/// A plane tree with one distinguished node (its preorder index).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MarkedTree {
    tree: PlaneTree,
    mark: usize,
}

impl MarkedTree {
    pub fn new(tree: PlaneTree, mark: usize) -> Result<Self> {
        if mark >= tree.len() {
            return Err(Error::OutOfRange(format!(
                "mark {mark} is not a node of a {}-node tree",
                tree.len()
            )));
        }
        Ok(Self { tree, mark })
    }

    pub fn tree(&self) -> &PlaneTree {
        &self.tree
    }

    pub fn mark(&self) -> usize {
        self.mark
    }

    /// `|v|`, the depth of the mark.
    pub fn mark_depth(&self) -> usize {
        self.tree.depths()[self.mark]
    }

    /// Ancestors `v^0, …, v^{|v|}` of the mark (root first, mark last).
    pub fn ancestry(&self) -> Vec<usize> {
        let parents = self.tree.parents();
        let mut path = vec![self.mark];
        let mut cur = self.mark;
        while let Some(p) = parents[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// `(deg(v^0), …, deg(v^{k-1}))` along the root-to-mark path.
    pub fn spinal_degrees(&self, k: usize) -> Result<Vec<usize>> {
        let path = self.ancestry();
        let depth = path.len() - 1;
        if k > depth {
            return Err(Error::KTooLarge { k, depth });
        }
        Ok(path[..k].iter().map(|&v| self.tree.degree(v)).collect())
    }
}
