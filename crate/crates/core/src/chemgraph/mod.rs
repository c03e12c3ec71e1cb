//! Molecular graphs: molfile and SMILES I/O plus an order-invariant identity.
//!
//! The identity produced by [`canonical_id`] is what recognition scoring
//! compares. Two molecules share an id exactly when their graphs of
//! elements, formal charges and (aromatic-normalized) bond orders are
//! isomorphic. Coordinates, hydrogens that are not explicit atoms, and
//! stereochemistry play no part.

mod aromatic;
mod canon;
pub mod element;
mod molfile;
mod smiles;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use aromatic::normalize_aromatic;
pub use canon::{canonical_id, canonical_order, CanonicalId};
pub use molfile::{parse_molfile, write_molfile};
pub use smiles::{parse_smiles, write_smiles};

pub const MIN_CHARGE: i8 = -4;
pub const MAX_CHARGE: i8 = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChemError {
    #[error("molfile line {line}: {message}")]
    Molfile { line: usize, message: String },
    #[error("SMILES position {position}: {message}")]
    Smiles { position: usize, message: String },
    #[error("unknown element symbol {0:?}")]
    UnknownElement(String),
    #[error("formal charge {0} outside [-4, 4]")]
    ChargeOutOfRange(i32),
    #[error("bond {a}-{b} references an atom outside 1..={atoms}")]
    BondOutOfRange { a: usize, b: usize, atoms: usize },
    #[error("bond from atom {0} to itself")]
    SelfBond(usize),
    #[error("duplicate bond between atoms {0} and {1}")]
    DuplicateBond(usize, usize),
}

pub type Result<T, E = ChemError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// The V2000 bond type code.
    pub fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            1 => BondOrder::Single,
            2 => BondOrder::Double,
            3 => BondOrder::Triple,
            4 => BondOrder::Aromatic,
            _ => return None,
        })
    }

    /// Bond valence contribution in half-units (aromatic counts as 1.5).
    pub fn half_valence(self) -> u32 {
        match self {
            BondOrder::Single => 2,
            BondOrder::Double => 4,
            BondOrder::Triple => 6,
            BondOrder::Aromatic => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub element: String,
    pub charge: i8,
    pub x: f64,
    pub y: f64,
}

impl Atom {
    pub fn new(element: &str, charge: i8, x: f64, y: f64) -> Result<Self> {
        if !element::is_element(element) {
            return Err(ChemError::UnknownElement(element.to_string()));
        }
        if !(MIN_CHARGE..=MAX_CHARGE).contains(&charge) {
            return Err(ChemError::ChargeOutOfRange(charge.into()));
        }
        Ok(Atom {
            element: element.to_string(),
            charge,
            x,
            y,
        })
    }

    /// Neutral atom at the origin.
    pub fn bare(element: &str) -> Result<Self> {
        Atom::new(element, 0, 0.0, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if self.a == atom {
            self.b
        } else {
            self.a
        }
    }

    fn key(&self) -> (usize, usize) {
        (self.a.min(self.b), self.a.max(self.b))
    }
}

/// A molecular graph with 2D depiction coordinates.
///
/// Atom indices are zero-based. The empty molecule doubles as the
/// placeholder recorded for failed recognitions; see [`Molecule::placeholder`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Molecule {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
}

impl Molecule {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a molecule, checking every bond invariant.
    pub fn from_parts(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Result<Self> {
        let mut m = Molecule {
            atoms,
            bonds: Vec::with_capacity(bonds.len()),
        };
        for b in bonds {
            m.add_bond(b.a, b.b, b.order)?;
        }
        Ok(m)
    }

    /// The sentinel standing in for an unsuccessful recognition. It never
    /// matches anything in [`same_structure`].
    pub fn placeholder() -> Self {
        Self::default()
    }

    pub fn is_placeholder(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn add_atom(&mut self, atom: Atom) -> usize {
        self.atoms.push(atom);
        self.atoms.len() - 1
    }

    pub fn add_bond(&mut self, a: usize, b: usize, order: BondOrder) -> Result<()> {
        let n = self.atoms.len();
        if a >= n || b >= n {
            return Err(ChemError::BondOutOfRange {
                a: a + 1,
                b: b + 1,
                atoms: n,
            });
        }
        if a == b {
            return Err(ChemError::SelfBond(a + 1));
        }
        let bond = Bond { a, b, order };
        if self.bonds.iter().any(|x| x.key() == bond.key()) {
            return Err(ChemError::DuplicateBond(a + 1, b + 1));
        }
        self.bonds.push(bond);
        Ok(())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn atom_mut(&mut self, index: usize) -> &mut Atom {
        &mut self.atoms[index]
    }

    pub(crate) fn set_bond_order(&mut self, bond: usize, order: BondOrder) {
        self.bonds[bond].order = order;
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        let key = (a.min(b), a.max(b));
        self.bonds.iter().position(|x| x.key() == key)
    }

    /// For each atom, the incident `(neighbor, bond index)` pairs.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.atoms.len()];
        for (i, b) in self.bonds.iter().enumerate() {
            adj[b.a].push((b.b, i));
            adj[b.b].push((b.a, i));
        }
        adj
    }

    /// Connected components as sorted atom index lists, ordered by their
    /// smallest atom index.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.atoms.len()];
        let mut out = Vec::new();
        for start in 0..self.atoms.len() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![start];
            let mut comp = Vec::new();
            while let Some(v) = stack.pop() {
                comp.push(v);
                for &(w, _) in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Returns a copy with atom `i` moved to position `perm[i]`. Bonds keep
    /// their relative order but have endpoints renumbered.
    pub fn permuted(&self, perm: &[usize]) -> Molecule {
        assert_eq!(perm.len(), self.atoms.len(), "permutation length");
        let mut atoms: Vec<Option<Atom>> = vec![None; self.atoms.len()];
        for (i, atom) in self.atoms.iter().enumerate() {
            atoms[perm[i]] = Some(atom.clone());
        }
        let atoms = atoms
            .into_iter()
            .map(|a| a.expect("perm is a permutation"))
            .collect();
        let bonds = self
            .bonds
            .iter()
            .map(|b| Bond {
                a: perm[b.a],
                b: perm[b.b],
                order: b.order,
            })
            .collect();
        Molecule { atoms, bonds }
    }

    /// Returns a copy with the bond list reordered by `order` and each bond's
    /// endpoints optionally swapped.
    pub fn with_bond_order(&self, order: &[usize], swap: &[bool]) -> Molecule {
        let bonds = order
            .iter()
            .zip(swap)
            .map(|(&i, &s)| {
                let b = self.bonds[i];
                if s {
                    Bond { a: b.b, b: b.a, ..b }
                } else {
                    b
                }
            })
            .collect();
        Molecule {
            atoms: self.atoms.clone(),
            bonds,
        }
    }

    /// Molecular formula in Hill-like order of explicit atoms only, for
    /// diagnostics.
    pub fn formula(&self) -> String {
        let mut counts: std::collections::BTreeMap<&str, usize> = Default::default();
        for a in &self.atoms {
            *counts.entry(a.element.as_str()).or_default() += 1;
        }
        let mut out = String::new();
        for key in ["C", "H"] {
            if let Some(n) = counts.remove(key) {
                out.push_str(key);
                if n > 1 {
                    out.push_str(&n.to_string());
                }
            }
        }
        for (k, n) in counts {
            out.push_str(k);
            if n > 1 {
                out.push_str(&n.to_string());
            }
        }
        out
    }
}

impl fmt::Display for Molecule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_placeholder() {
            f.write_str("<placeholder>")
        } else {
            f.write_str(&write_smiles(self))
        }
    }
}

/// Serialized as V2000 molfile text.
impl Serialize for Molecule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&write_molfile(self))
    }
}

impl<'de> Deserialize<'de> for Molecule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_molfile(&text).map_err(serde::de::Error::custom)
    }
}

/// True iff neither side is the placeholder and both share a canonical id.
pub fn same_structure(a: &Molecule, b: &Molecule) -> bool {
    if a.is_placeholder() || b.is_placeholder() {
        return false;
    }
    canonical_id(a) == canonical_id(b)
}
