//! Small template hypergraphs `F`: octahedra, doublings, `M^(k)_d`, and the
//! linearity and simplicity classifiers.

use std::collections::{BTreeMap, HashMap};

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A loop-free `k`-graph on named vertices, optionally `k`-partite.
///
/// Edges are stored as sorted vertex-index lists, sorted and deduplicated.
/// Partition classes are 0-based internally and 1-based in JSON.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateGraph {
    arity: usize,
    names: Vec<String>,
    edges: Vec<Vec<usize>>,
    partition: Option<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct TemplateFile {
    k: usize,
    vertices: Vec<String>,
    edges: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    partition: Option<BTreeMap<String, usize>>,
}

impl TemplateGraph {
    pub fn new(
        arity: usize,
        names: Vec<String>,
        edges: Vec<Vec<usize>>,
        partition: Option<Vec<usize>>,
    ) -> Result<Self> {
        if arity == 0 {
            return Err(Error::param("template arity must be positive"));
        }
        let mut seen = HashMap::new();
        for (i, name) in names.iter().enumerate() {
            if seen.insert(name.as_str(), i).is_some() {
                return Err(Error::param(format!("duplicate vertex name {name:?}")));
            }
        }
        if let Some(p) = &partition {
            if p.len() != names.len() {
                return Err(Error::param("partition must label every vertex"));
            }
            if let Some(&c) = p.iter().find(|&&c| c >= arity) {
                return Err(Error::param(format!("partition class {} out of range 1..={arity}", c + 1)));
            }
        }
        let mut clean = Vec::with_capacity(edges.len());
        for mut e in edges {
            e.sort_unstable();
            let before = e.len();
            e.dedup();
            if e.len() != arity || before != arity {
                return Err(Error::param(format!("edge {e:?} does not have {arity} distinct vertices")));
            }
            if let Some(&v) = e.iter().find(|&&v| v >= names.len()) {
                return Err(Error::param(format!("edge references unknown vertex {v}")));
            }
            if let Some(p) = &partition {
                let mut classes: Vec<usize> = e.iter().map(|&v| p[v]).collect();
                classes.sort_unstable();
                classes.dedup();
                if classes.len() != arity {
                    return Err(Error::param(format!("edge {e:?} is not transversal to the partition")));
                }
            }
            clean.push(e);
        }
        clean.sort();
        clean.dedup();
        Ok(TemplateGraph { arity, names, edges: clean, partition })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn partition(&self) -> Option<&[usize]> {
        self.partition.as_deref()
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// The edge with its vertices listed by partition class.
    pub fn edge_by_class(&self, edge: usize) -> Result<Vec<usize>> {
        let p = self.partition.as_ref().ok_or_else(|| Error::param("template has no partition"))?;
        let mut out = vec![0; self.arity];
        for &v in &self.edges[edge] {
            out[p[v]] = v;
        }
        Ok(out)
    }

    /// Same vertices, only the listed edges.
    pub fn edge_subgraph(&self, keep: &[usize]) -> Self {
        TemplateGraph {
            arity: self.arity,
            names: self.names.clone(),
            edges: keep.iter().map(|&i| self.edges[i].clone()).sorted().dedup().collect(),
            partition: self.partition.clone(),
        }
    }

    pub fn single_edge(k: usize) -> Result<Self> {
        Self::new(
            k,
            (1..=k).map(|i| format!("x{i}")).collect(),
            vec![(0..k).collect()],
            Some((0..k).collect()),
        )
    }

    /// `Oct^(k)`: complete `k`-partite with two vertices per class.
    pub fn octahedron(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("octahedron needs k >= 1"));
        }
        let names = (1..=k).flat_map(|i| [format!("x{i}.0"), format!("x{i}.1")]).collect();
        let partition = (0..k).flat_map(|i| [i, i]).collect();
        let edges = (0..1usize << k)
            .map(|w| (0..k).map(|i| 2 * i + (w >> i & 1)).collect())
            .collect();
        Self::new(k, names, edges, Some(partition))
    }

    /// `Oct^(k)_d`: doubled vertices in the first `d` classes, single `y_j` after.
    pub fn squashed_octahedron(k: usize, d: usize) -> Result<Self> {
        if d == 0 || d >= k {
            return Err(Error::param(format!("squashed octahedron needs 1 <= d < k, got k={k}, d={d}")));
        }
        let mut names: Vec<String> = (1..=d).flat_map(|i| [format!("x{i}.0"), format!("x{i}.1")]).collect();
        names.extend((d + 1..=k).map(|j| format!("y{j}")));
        let mut partition: Vec<usize> = (0..d).flat_map(|i| [i, i]).collect();
        partition.extend(d..k);
        let edges = (0..1usize << d)
            .map(|w| {
                let mut e: Vec<usize> = (0..d).map(|i| 2 * i + (w >> i & 1)).collect();
                e.extend((0..k - d).map(|j| 2 * d + j));
                e
            })
            .collect();
        Self::new(k, names, edges, Some(partition))
    }

    /// Two `k`-edges sharing exactly `d` vertices (`2k - d` vertices in total).
    pub fn two_edges_sharing(k: usize, d: usize) -> Result<Self> {
        if d >= k {
            return Err(Error::param("shared part must be smaller than an edge"));
        }
        let names = (1..=2 * k - d).map(|i| format!("v{i}")).collect();
        let first = (0..k).collect();
        let second = (0..d).chain(k..2 * k - d).collect();
        Self::new(k, names, vec![first, second], None)
    }

    /// `db_I(F)`: classes in `classes` (0-based) are kept, the rest duplicated.
    /// A duplicated vertex `v` becomes `v.0` and `v.1`.
    pub fn doubling(&self, classes: &[usize]) -> Result<Self> {
        let p = self
            .partition
            .as_ref()
            .ok_or_else(|| Error::param("doubling needs a k-partition"))?;
        if let Some(&c) = classes.iter().find(|&&c| c >= self.arity) {
            return Err(Error::param(format!("class {} out of range", c + 1)));
        }
        let kept: Vec<bool> = (0..self.arity).map(|c| classes.contains(&c)).collect();
        let mut names = Vec::new();
        let mut partition = Vec::new();
        let mut copies = Vec::with_capacity(self.names.len());
        for (v, name) in self.names.iter().enumerate() {
            if kept[p[v]] {
                copies.push([names.len(); 2]);
                names.push(name.clone());
                partition.push(p[v]);
            } else {
                copies.push([names.len(), names.len() + 1]);
                names.push(format!("{name}.0"));
                names.push(format!("{name}.1"));
                partition.extend([p[v], p[v]]);
            }
        }
        let copies = &copies;
        let edges = self
            .edges
            .iter()
            .flat_map(|e| (0..2).map(move |a| e.iter().map(|&v| copies[v][a]).collect::<Vec<_>>()))
            .collect();
        Self::new(self.arity, names, edges, Some(partition))
    }

    /// `M^(k)_d`: doublings over every `d`-subset of classes in lexicographic order.
    pub fn complete_pattern(k: usize, d: usize) -> Result<Self> {
        if d == 0 || d >= k {
            return Err(Error::param(format!("M^(k)_d needs 1 <= d < k, got k={k}, d={d}")));
        }
        (0..k)
            .combinations(d)
            .try_fold(Self::single_edge(k)?, |f, subset| f.doubling(&subset))
    }

    /// Every two distinct edges share at most `d` vertices.
    pub fn is_d_linear(&self, d: usize) -> bool {
        self.edges
            .iter()
            .tuple_combinations()
            .all(|(a, b)| intersection_size(a, b) <= d)
    }

    /// For each edge, an `s`-subset contained in no other edge, or `None` if
    /// some edge has none.
    pub fn fingerprints(&self, s: usize) -> Option<Vec<Vec<usize>>> {
        self.edges
            .iter()
            .enumerate()
            .map(|(i, e)| {
                e.iter().copied().combinations(s).find(|sub| {
                    self.edges
                        .iter()
                        .enumerate()
                        .all(|(j, other)| j == i || !sub.iter().all(|v| other.binary_search(v).is_ok()))
                })
            })
            .collect()
    }

    pub fn is_s_simple(&self, s: usize) -> bool {
        s <= self.arity && self.fingerprints(s).is_some()
    }

    /// For every edge `t0`, whether distinct edges `t_D != t0`, one per
    /// `d`-set `D` of classes, can be chosen with `t0`'s `D`-vertices in `t_D`.
    pub fn verify_edge_selection(&self, d: usize) -> Result<bool> {
        if self.partition.is_none() {
            return Err(Error::param("edge selection needs a k-partition"));
        }
        if d == 0 || d > self.arity {
            return Err(Error::param("edge selection needs 1 <= d <= k"));
        }
        let subsets: Vec<Vec<usize>> = (0..self.arity).combinations(d).collect();
        for t0 in 0..self.edges.len() {
            let by_class = self.edge_by_class(t0)?;
            let candidates: Vec<Vec<usize>> = subsets
                .iter()
                .map(|dset| {
                    (0..self.edges.len())
                        .filter(|&t| t != t0 && dset.iter().all(|&c| self.edges[t].binary_search(&by_class[c]).is_ok()))
                        .collect()
                })
                .collect();
            if !has_perfect_matching(&candidates, self.edges.len()) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn to_json(&self) -> String {
        let file = TemplateFile {
            k: self.arity,
            vertices: self.names.clone(),
            edges: self.edges.iter().map(|e| e.iter().map(|&v| self.names[v].clone()).collect()).collect(),
            partition: self.partition.as_ref().map(|p| {
                self.names.iter().cloned().zip(p.iter().map(|c| c + 1)).collect()
            }),
        };
        serde_json::to_string(&file).expect("template serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: TemplateFile = serde_json::from_str(text)?;
        let index: HashMap<&str, usize> = file.vertices.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::param(format!("edge references unknown vertex {name:?}")))
        };
        let edges = file
            .edges
            .iter()
            .map(|e| e.iter().map(|n| lookup(n)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let partition = match &file.partition {
            None => None,
            Some(map) => Some(
                file.vertices
                    .iter()
                    .map(|n| match map.get(n) {
                        Some(&c) if c >= 1 => Ok(c - 1),
                        Some(_) => Err(Error::param("partition classes are numbered from 1")),
                        None => Err(Error::param(format!("vertex {n:?} has no partition class"))),
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        Self::new(file.k, file.vertices, edges, partition)
    }
}

fn intersection_size(a: &[usize], b: &[usize]) -> usize {
    a.iter().filter(|v| b.binary_search(v).is_ok()).count()
}

/// Kuhn's augmenting paths: can every left node get a distinct right node?
fn has_perfect_matching(candidates: &[Vec<usize>], right: usize) -> bool {
    fn augment(u: usize, candidates: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &r in &candidates[u] {
            if seen[r] {
                continue;
            }
            seen[r] = true;
            if owner[r].is_none_or(|w| augment(w, candidates, seen, owner)) {
                owner[r] = Some(u);
                return true;
            }
        }
        false
    }
    let mut owner = vec![None; right];
    (0..candidates.len()).all(|u| augment(u, candidates, &mut vec![false; right], &mut owner))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn octahedron_shapes() {
        for (k, v, e) in [(1, 2, 2), (2, 4, 4), (3, 6, 8)] {
            let o = TemplateGraph::octahedron(k).unwrap();
            assert_eq!((o.vertex_count(), o.edge_count()), (v, e));
        }
    }

    #[test]
    fn squashed_shapes() {
        for (k, d, v, e) in [(3, 2, 5, 4), (2, 1, 3, 2), (4, 1, 5, 2)] {
            let o = TemplateGraph::squashed_octahedron(k, d).unwrap();
            assert_eq!((o.vertex_count(), o.edge_count()), (v, e));
        }
        let cherry = TemplateGraph::squashed_octahedron(4, 1).unwrap();
        assert_eq!(intersection_size(&cherry.edges()[0], &cherry.edges()[1]), 3);
        assert!(TemplateGraph::squashed_octahedron(3, 3).is_err());
    }

    #[test]
    fn doubling_examples() {
        let e2 = TemplateGraph::single_edge(2).unwrap();
        let full = e2.doubling(&[0, 1]).unwrap();
        assert_eq!(full, e2);
        let path = e2.doubling(&[0]).unwrap();
        assert_eq!((path.vertex_count(), path.edge_count()), (3, 2));
        let cycle = path.doubling(&[1]).unwrap();
        assert_eq!((cycle.vertex_count(), cycle.edge_count()), (4, 4));
        assert!(cycle.is_d_linear(1) && !cycle.is_s_simple(1) && cycle.is_s_simple(2));
        let unpartitioned = TemplateGraph::two_edges_sharing(3, 1).unwrap();
        assert!(unpartitioned.doubling(&[0]).is_err());
    }

    #[test]
    fn complete_pattern_counts() {
        for (k, d) in [(2, 1), (3, 1), (3, 2), (4, 1), (4, 3)] {
            let m = TemplateGraph::complete_pattern(k, d).unwrap();
            let c = (0..k).combinations(d).count() as u32;
            let c1 = (0..k - 1).combinations(d).count() as u32;
            assert_eq!(m.vertex_count(), k * 2usize.pow(c1), "v(M) for {k},{d}");
            assert_eq!(m.edge_count(), 2usize.pow(c), "e(M) for {k},{d}");
            assert!(m.is_d_linear(d));
            assert!(m.verify_edge_selection(d).unwrap());
        }
    }

    #[test]
    fn linearity_and_simplicity() {
        let oct3 = TemplateGraph::octahedron(3).unwrap();
        assert!(oct3.is_d_linear(2) && !oct3.is_d_linear(1));
        let pair = TemplateGraph::two_edges_sharing(4, 2).unwrap();
        assert!(pair.is_d_linear(2) && !pair.is_d_linear(1) && pair.is_s_simple(1));
        let single = TemplateGraph::single_edge(3).unwrap();
        assert!(!single.verify_edge_selection(1).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let m = TemplateGraph::complete_pattern(3, 1).unwrap();
        assert_eq!(TemplateGraph::from_json(&m.to_json()).unwrap(), m);
        let bad = r#"{"k":2,"vertices":["a","b"],"edges":[["a","a"]]}"#;
        assert!(TemplateGraph::from_json(bad).is_err());
    }
}
