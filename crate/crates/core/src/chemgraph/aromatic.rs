use super::{BondOrder, Molecule};

fn ring_capable(m: &Molecule, atom: usize) -> bool {
    matches!(m.atoms()[atom].element.as_str(), "C" | "N")
}

fn ring_bond(order: BondOrder) -> bool {
    matches!(order, BondOrder::Single | BondOrder::Double | BondOrder::Aromatic)
}

/// All simple 6-cycles over C/N atoms, each given as its six bond indices in
/// ring order. Every cycle is reported once.
fn six_rings(m: &Molecule) -> Vec<[usize; 6]> {
    let adj = m.adjacency();
    let mut rings = Vec::new();
    for start in 0..m.atom_count() {
        if !ring_capable(m, start) {
            continue;
        }
        let mut path = vec![start];
        let mut bonds = Vec::new();
        extend(m, &adj, start, &mut path, &mut bonds, &mut rings);
    }
    rings
}

fn extend(
    m: &Molecule,
    adj: &[Vec<(usize, usize)>],
    start: usize,
    path: &mut Vec<usize>,
    bonds: &mut Vec<usize>,
    rings: &mut Vec<[usize; 6]>,
) {
    let last = *path.last().expect("non-empty path");
    for &(next, b) in &adj[last] {
        if !ring_bond(m.bonds()[b].order) {
            continue;
        }
        if path.len() == 6 {
            // close the ring; path[1] < path[5] keeps one of the two directions
            if next == start && path[1] < path[5] {
                let mut ring = [0; 6];
                ring[..5].copy_from_slice(bonds);
                ring[5] = b;
                rings.push(ring);
            }
            continue;
        }
        // the start is the smallest index on its ring
        if next <= start || path.contains(&next) || !ring_capable(m, next) {
            continue;
        }
        path.push(next);
        bonds.push(b);
        extend(m, adj, start, path, bonds, rings);
        path.pop();
        bonds.pop();
    }
}

fn alternates(m: &Molecule, ring: &[usize; 6]) -> bool {
    (0..2).any(|phase| {
        ring.iter().enumerate().all(|(i, &b)| {
            let want = if i % 2 == phase {
                BondOrder::Double
            } else {
                BondOrder::Single
            };
            let got = m.bonds()[b].order;
            got == BondOrder::Aromatic || got == want
        })
    })
}

/// Rewrites Kekulé 6-rings of C/N atoms to aromatic bonds.
///
/// A ring qualifies when its bonds alternate single/double, where bonds that
/// are already aromatic may stand in for either. Converting a ring can let a
/// fused neighbor qualify, so the rewrite repeats until nothing changes. The
/// result does not depend on atom or bond order.
pub fn normalize_aromatic(m: &Molecule) -> Molecule {
    let mut out = m.clone();
    let rings = six_rings(m);
    loop {
        let hits: Vec<usize> = rings
            .iter()
            .filter(|r| alternates(&out, r))
            .flat_map(|r| r.iter().copied())
            .filter(|&b| out.bonds()[b].order != BondOrder::Aromatic)
            .collect();
        if hits.is_empty() {
            return out;
        }
        for b in hits {
            out.set_bond_order(b, BondOrder::Aromatic);
        }
    }
}
