//! Canonical labeling by iterated neighbor refinement plus an exhaustive
//! individualization search for the ties refinement cannot break.
//!
//! Refinement starts from `(element, charge, degree, bond-order multiset)`
//! and repeatedly splits classes by the sorted multiset of
//! `(neighbor class, bond order)` until the partition stops changing. If
//! classes remain, the search individualizes each member of the smallest
//! remaining class in turn, refines again, and keeps the lexicographically
//! least serialization over all discrete leaves. Leaves with equal
//! serializations reveal automorphisms, which prune sibling branches that
//! lie in the same orbit.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::element::atomic_number;
use super::{normalize_aromatic, BondOrder, Molecule};

/// Order-invariant identity string of a molecule.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CanonicalId(String);

impl CanonicalId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CanonicalId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

struct Graph {
    labels: Vec<(u8, i8)>,
    adj: Vec<Vec<(usize, u8)>>,
}

impl Graph {
    fn new(m: &Molecule) -> Graph {
        let labels = m
            .atoms()
            .iter()
            .map(|a| (atomic_number(&a.element).unwrap_or(0), a.charge))
            .collect();
        let mut adj = vec![Vec::new(); m.atom_count()];
        for b in m.bonds() {
            adj[b.a].push((b.b, b.order.code()));
            adj[b.b].push((b.a, b.order.code()));
        }
        Graph { labels, adj }
    }

    fn len(&self) -> usize {
        self.labels.len()
    }

    fn initial_colors(&self) -> Vec<usize> {
        let keys: Vec<Vec<i64>> = (0..self.len())
            .map(|v| {
                let (z, q) = self.labels[v];
                let mut orders: Vec<i64> = self.adj[v].iter().map(|&(_, o)| o as i64).collect();
                orders.sort_unstable();
                let mut key = vec![z as i64, q as i64, self.adj[v].len() as i64];
                key.extend(orders);
                key
            })
            .collect();
        rank(&keys)
    }

    /// Splits color classes until stable. Colors stay dense ranks, and the
    /// relative order of existing classes is preserved.
    fn refine(&self, mut colors: Vec<usize>) -> Vec<usize> {
        let mut classes = count_classes(&colors);
        loop {
            let sigs: Vec<Vec<usize>> = (0..self.len())
                .map(|v| {
                    let mut nb: Vec<usize> = self.adj[v]
                        .iter()
                        .map(|&(w, o)| colors[w] * 8 + o as usize)
                        .collect();
                    nb.sort_unstable();
                    let mut sig = Vec::with_capacity(nb.len() + 1);
                    sig.push(colors[v]);
                    sig.extend(nb);
                    sig
                })
                .collect();
            colors = rank(&sigs);
            let next = count_classes(&colors);
            if next == classes {
                return colors;
            }
            classes = next;
        }
    }

    /// Serialization key of a discrete coloring: atom labels in rank order,
    /// then the sorted bond list in rank coordinates.
    fn leaf_key(&self, colors: &[usize]) -> Vec<u64> {
        let n = self.len();
        let mut by_rank = vec![0; n];
        for (v, &c) in colors.iter().enumerate() {
            by_rank[c] = v;
        }
        let mut key: Vec<u64> = by_rank
            .iter()
            .map(|&v| {
                let (z, q) = self.labels[v];
                ((z as u64) << 8) | (q as i64 + 8) as u64
            })
            .collect();
        let mut edges: Vec<u64> = Vec::new();
        for v in 0..n {
            for &(w, o) in &self.adj[v] {
                let (a, b) = (colors[v], colors[w]);
                if a < b {
                    edges.push(((a as u64) << 40) | ((b as u64) << 8) | o as u64);
                }
            }
        }
        edges.sort_unstable();
        key.push(u64::MAX);
        key.extend(edges);
        key
    }
}

fn rank<T: Ord>(keys: &[T]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut colors = vec![0; keys.len()];
    let mut c = 0;
    for (i, &v) in idx.iter().enumerate() {
        if i > 0 && keys[v] != keys[idx[i - 1]] {
            c += 1;
        }
        colors[v] = c;
    }
    colors
}

fn count_classes(colors: &[usize]) -> usize {
    colors.iter().max().map_or(0, |m| m + 1)
}

fn target_cell(colors: &[usize]) -> Option<Vec<usize>> {
    let k = count_classes(colors);
    let mut cells = vec![Vec::new(); k];
    for (v, &c) in colors.iter().enumerate() {
        cells[c].push(v);
    }
    cells
        .into_iter()
        .filter(|c| c.len() > 1)
        .min_by_key(|c| c.len())
}

fn individualize(colors: &[usize], v: usize) -> Vec<usize> {
    let cv = colors[v];
    let keys: Vec<(usize, bool)> = colors
        .iter()
        .enumerate()
        .map(|(u, &c)| (c, c == cv && u != v))
        .collect();
    rank(&keys)
}

struct Search<'g> {
    graph: &'g Graph,
    best: Option<(Vec<u64>, Vec<usize>)>,
    automorphisms: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn run(&mut self, colors: Vec<usize>, fixed: &mut Vec<usize>) {
        let colors = self.graph.refine(colors);
        let Some(cell) = target_cell(&colors) else {
            self.leaf(colors);
            return;
        };
        let mut explored: Vec<usize> = Vec::new();
        for &v in &cell {
            if !explored.is_empty() && self.same_orbit(v, &explored, fixed) {
                continue;
            }
            explored.push(v);
            fixed.push(v);
            self.run(individualize(&colors, v), fixed);
            fixed.pop();
        }
    }

    fn leaf(&mut self, colors: Vec<usize>) {
        let key = self.graph.leaf_key(&colors);
        match &self.best {
            Some((best, best_colors)) if *best == key => {
                // same serialization: map this labeling onto the best one
                let n = colors.len();
                let mut best_inv = vec![0; n];
                for (v, &c) in best_colors.iter().enumerate() {
                    best_inv[c] = v;
                }
                let perm: Vec<usize> = colors.iter().map(|&c| best_inv[c]).collect();
                if perm.iter().enumerate().any(|(i, &p)| i != p) {
                    self.automorphisms.push(perm);
                }
            }
            Some((best, _)) if *best < key => {}
            _ => self.best = Some((key, colors)),
        }
    }

    /// Whether `v` shares an orbit with an explored vertex under the known
    /// automorphisms that fix every individualized vertex.
    fn same_orbit(&self, v: usize, explored: &[usize], fixed: &[usize]) -> bool {
        let n = self.graph.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for g in &self.automorphisms {
            if fixed.iter().any(|&f| g[f] != f) {
                continue;
            }
            for (i, &j) in g.iter().enumerate() {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        let root = find(&mut parent, v);
        explored.iter().any(|&e| find(&mut parent, e) == root)
    }
}

/// Canonical rank of every atom of the aromatic-normalized molecule.
pub fn canonical_order(m: &Molecule) -> Vec<usize> {
    let normalized = normalize_aromatic(m);
    let graph = Graph::new(&normalized);
    if graph.len() == 0 {
        return Vec::new();
    }
    let mut search = Search {
        graph: &graph,
        best: None,
        automorphisms: Vec::new(),
    };
    search.run(graph.initial_colors(), &mut Vec::new());
    search.best.expect("at least one leaf").1
}

fn order_letter(order: BondOrder) -> char {
    match order {
        BondOrder::Single => 's',
        BondOrder::Double => 'd',
        BondOrder::Triple => 't',
        BondOrder::Aromatic => 'a',
    }
}

/// Computes the canonical identity of `m`.
///
/// Kekulé 6-rings of C/N atoms are first rewritten as aromatic, so the
/// Kekulé and aromatic forms of benzene or pyridine share an id.
/// Coordinates are ignored. The placeholder (empty) molecule maps to the
/// empty id.
pub fn canonical_id(m: &Molecule) -> CanonicalId {
    if m.is_placeholder() {
        return CanonicalId(String::new());
    }
    let normalized = normalize_aromatic(m);
    let ranks = canonical_order(m);
    let n = ranks.len();
    let mut by_rank = vec![0; n];
    for (v, &r) in ranks.iter().enumerate() {
        by_rank[r] = v;
    }
    let atoms: Vec<String> = by_rank
        .iter()
        .map(|&v| {
            let a = &normalized.atoms()[v];
            match a.charge {
                0 => a.element.clone(),
                q if q > 0 => format!("{}+{}", a.element, q),
                q => format!("{}{}", a.element, q),
            }
        })
        .collect();
    let mut bonds: Vec<(usize, usize, char)> = normalized
        .bonds()
        .iter()
        .map(|b| {
            let (x, y) = (ranks[b.a], ranks[b.b]);
            (x.min(y), x.max(y), order_letter(b.order))
        })
        .collect();
    bonds.sort_unstable();
    let bonds: Vec<String> = bonds
        .iter()
        .map(|(a, b, o)| format!("{a}-{b}{o}"))
        .collect();
    CanonicalId(format!("{}|{}", atoms.join(","), bonds.join(",")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chemgraph::parse_smiles;

    fn id(s: &str) -> CanonicalId {
        canonical_id(&parse_smiles(s).unwrap())
    }

    #[test]
    fn relabeling_invariant() {
        assert_eq!(id("CCO"), id("OCC"));
        assert_eq!(id("CC(=O)O"), id("OC(C)=O"));
        assert_eq!(id("[Na+].[O-]C(=O)C"), id("CC([O-])=O.[Na+]"));
    }

    #[test]
    fn kekule_equivalence() {
        assert_eq!(id("C1=CC=CC=C1"), id("c1ccccc1"));
        assert_eq!(id("C1=CC=NC=C1"), id("c1ccncc1"));
        assert_eq!(id("C1=CC=C2C=CC=CC2=C1"), id("c1ccc2ccccc2c1"));
    }

    #[test]
    fn distinguishes_isomers() {
        assert_ne!(id("CCO"), id("COC"));
        assert_ne!(id("CCC=O"), id("CC(C)=O"));
        assert_ne!(id("C[N+](C)(C)C"), id("CN(C)C"));
        assert_ne!(id("C=CC"), id("C1CC1"));
    }

    fn carbon_graph(n: usize, edges: &[(usize, usize)]) -> Molecule {
        let mut m = Molecule::new();
        for _ in 0..n {
            m.add_atom(crate::chemgraph::Atom::bare("C").unwrap());
        }
        for &(a, b) in edges {
            m.add_bond(a, b, BondOrder::Single).unwrap();
        }
        m
    }

    #[test]
    fn regular_graphs_beyond_refinement() {
        // the triangular prism and K3,3 are both 3-regular on 6 vertices, so
        // refinement alone leaves a single class in each
        let prism = carbon_graph(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (0, 3), (1, 4), (2, 5)]);
        let k33 = carbon_graph(6, &[(0, 1), (0, 3), (0, 5), (2, 1), (2, 3), (2, 5), (4, 1), (4, 3), (4, 5)]);
        assert_ne!(canonical_id(&prism), canonical_id(&k33));
        let shuffled = prism.permuted(&[4, 2, 0, 5, 1, 3]);
        assert_eq!(canonical_id(&prism), canonical_id(&shuffled));
        // cubane: 48 automorphisms exercise orbit pruning
        let cubane = parse_smiles("C12C3C4C1C5C2C3C45").unwrap();
        let shuffled = cubane.permuted(&[7, 3, 5, 1, 0, 6, 2, 4]);
        assert_eq!(canonical_id(&cubane), canonical_id(&shuffled));
    }

    #[test]
    fn format_is_stable() {
        assert_eq!(id("CCO").as_str(), "C,C,O|0-1s,1-2s");
        assert_eq!(id("C[O-]").as_str(), "C,O-1|0-1s");
        assert_eq!(id("[NH4+]").as_str(), "N+1|");
        assert_eq!(canonical_id(&Molecule::placeholder()).as_str(), "");
    }
}
