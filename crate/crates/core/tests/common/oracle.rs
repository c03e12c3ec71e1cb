//! Brute-force isomorphism oracle and random molecule generation for
//! checking canonical ids. Nothing here calls into the canonicalization
//! code.

use ocsr_bench::chemgraph::{Atom, BondOrder, Molecule};
use rand::seq::SliceRandom;
use rand::Rng;

/// Exhaustive search for a bijection between atoms that preserves element,
/// charge and bond order on every atom pair. Candidates are filtered by
/// label and degree, and partial maps are checked against all earlier
/// assignments.
pub fn isomorphic(a: &Molecule, b: &Molecule) -> bool {
    let n = a.atom_count();
    if n != b.atom_count() || a.bond_count() != b.bond_count() {
        return false;
    }
    let ma = matrix(a);
    let mb = matrix(b);
    let deg = |m: &Vec<Vec<Option<BondOrder>>>, v: usize| m[v].iter().flatten().count();
    let label = |m: &Molecule, v: usize| (m.atoms()[v].element.clone(), m.atoms()[v].charge);
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];

    fn assign(
        i: usize,
        n: usize,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        ok: &dyn Fn(usize, usize, &[usize]) -> bool,
    ) -> bool {
        if i == n {
            return true;
        }
        for j in 0..n {
            if used[j] || !ok(i, j, &map[..i]) {
                continue;
            }
            map[i] = j;
            used[j] = true;
            if assign(i + 1, n, map, used, ok) {
                return true;
            }
            used[j] = false;
        }
        map[i] = usize::MAX;
        false
    }

    let ok = |i: usize, j: usize, prefix: &[usize]| -> bool {
        if label(a, i) != label(b, j) || deg(&ma, i) != deg(&mb, j) {
            return false;
        }
        prefix
            .iter()
            .enumerate()
            .all(|(k, &fk)| ma[i][k] == mb[j][fk])
    };
    assign(0, n, &mut map, &mut used, &ok)
}

fn matrix(m: &Molecule) -> Vec<Vec<Option<BondOrder>>> {
    let n = m.atom_count();
    let mut out = vec![vec![None; n]; n];
    for b in m.bonds() {
        out[b.a][b.b] = Some(b.order);
        out[b.b][b.a] = Some(b.order);
    }
    out
}

const ELEMENTS: [&str; 8] = ["C", "C", "C", "C", "N", "N", "O", "S"];
const ORDERS: [BondOrder; 7] = [
    BondOrder::Single,
    BondOrder::Single,
    BondOrder::Single,
    BondOrder::Double,
    BondOrder::Double,
    BondOrder::Triple,
    BondOrder::Aromatic,
];

/// Random molecule with 1..=`max_atoms` atoms. Mostly connected, with
/// occasional extra ring bonds, charges and disconnected pieces.
pub fn random_molecule<R: Rng>(rng: &mut R, max_atoms: usize) -> Molecule {
    let n = rng.gen_range(1..=max_atoms);
    let mut m = Molecule::new();
    for _ in 0..n {
        let el = ELEMENTS[rng.gen_range(0..ELEMENTS.len())];
        let charge = match rng.gen_range(0..12) {
            0 => 1,
            1 => -1,
            _ => 0,
        };
        m.add_atom(Atom::new(el, charge, 0.0, 0.0).unwrap());
    }
    for v in 1..n {
        if rng.gen_bool(0.9) {
            let u = rng.gen_range(0..v);
            let order = ORDERS[rng.gen_range(0..ORDERS.len())];
            m.add_bond(u, v, order).unwrap();
        }
    }
    let extra = rng.gen_range(0..=n / 2);
    for _ in 0..extra {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v && m.bond_between(u, v).is_none() {
            let order = ORDERS[rng.gen_range(0..ORDERS.len())];
            m.add_bond(u, v, order).unwrap();
        }
    }
    m
}

pub fn random_permutation<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Relabels atoms and shuffles the bond list, flipping bond directions at
/// random.
pub fn scramble<R: Rng>(rng: &mut R, m: &Molecule) -> Molecule {
    let perm = random_permutation(rng, m.atom_count());
    let p = m.permuted(&perm);
    let order = random_permutation(rng, p.bond_count());
    let swap: Vec<bool> = (0..p.bond_count()).map(|_| rng.gen_bool(0.5)).collect();
    p.with_bond_order(&order, &swap)
}

/// A small edit of `m`. The result is often, but not always,
/// non-isomorphic to `m`; callers check with [`isomorphic`].
pub fn mutate<R: Rng>(rng: &mut R, m: &Molecule) -> Molecule {
    let atoms: Vec<Atom> = m.atoms().to_vec();
    let mut bonds: Vec<(usize, usize, BondOrder)> =
        m.bonds().iter().map(|b| (b.a, b.b, b.order)).collect();
    let mut atoms = atoms;
    match rng.gen_range(0..5) {
        0 if !bonds.is_empty() => {
            let i = rng.gen_range(0..bonds.len());
            bonds[i].2 = ORDERS[rng.gen_range(0..ORDERS.len())];
        }
        1 => {
            let i = rng.gen_range(0..atoms.len());
            atoms[i].element = ELEMENTS[rng.gen_range(0..ELEMENTS.len())].to_string();
        }
        2 => {
            let i = rng.gen_range(0..atoms.len());
            atoms[i].charge = [-1, 0, 1][rng.gen_range(0..3)];
        }
        3 if bonds.len() >= 2 => {
            // double edge swap: keeps every degree, changes the wiring
            let i = rng.gen_range(0..bonds.len());
            let j = rng.gen_range(0..bonds.len());
            let (a, b, o1) = bonds[i];
            let (c, d, o2) = bonds[j];
            let distinct = a != d && c != b && i != j;
            let exists = |x: usize, y: usize| {
                bonds
                    .iter()
                    .any(|&(p, q, _)| (p == x && q == y) || (p == y && q == x))
            };
            if distinct && !exists(a, d) && !exists(c, b) {
                bonds[i] = (a, d, o1);
                bonds[j] = (c, b, o2);
            }
        }
        _ => {
            if bonds.is_empty() || rng.gen_bool(0.5) {
                let u = rng.gen_range(0..atoms.len());
                let v = rng.gen_range(0..atoms.len());
                if u != v && !bonds.iter().any(|&(p, q, _)| (p == u && q == v) || (p == v && q == u)) {
                    bonds.push((u, v, BondOrder::Single));
                }
            } else {
                let i = rng.gen_range(0..bonds.len());
                bonds.remove(i);
            }
        }
    }
    let mut out = Molecule::new();
    for a in atoms {
        out.add_atom(a);
    }
    for (a, b, o) in bonds {
        out.add_bond(a, b, o).unwrap();
    }
    out
}
