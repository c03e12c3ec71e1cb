//! A SMILES subset without stereochemistry.
//!
//! Accepted grammar:
//!
//! ```text
//! smiles   := chain ( '.' chain )*
//! chain    := atom ( bond? ( atom | ring ) | '(' bond? chain ')' )*
//! atom     := organic | aromatic | bracket
//! organic  := 'B' | 'C' | 'N' | 'O' | 'P' | 'S' | 'F' | 'Cl' | 'Br' | 'I'
//! aromatic := 'b' | 'c' | 'n' | 'o' | 'p' | 's'
//! bracket  := '[' symbol ( 'H' digit? )? charge? ( ':' digits )? ']'
//! charge   := ( '+' | '-' ) digit? | '++' | '--' ...
//! bond     := '-' | '=' | '#' | ':'
//! ring     := bond? ( digit | '%' digit digit )
//! ```
//!
//! Hydrogen counts and atom classes inside brackets are accepted but not
//! kept. Isotopes, chirality (`@`) and directional bonds (`/`, `\`) are
//! rejected. Two lowercase atoms joined without a bond symbol get an
//! aromatic bond. Every other unmarked bond is single.

use std::collections::BTreeMap;

use super::element::{is_element, AROMATIC_SUBSET, ORGANIC_SUBSET};
use super::{Atom, BondOrder, ChemError, Molecule, Result};

fn err(position: usize, message: impl Into<String>) -> ChemError {
    ChemError::Smiles {
        position,
        message: message.into(),
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    mol: Molecule,
    aromatic: Vec<bool>,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn push_atom(&mut self, symbol: &str, charge: i32, aromatic: bool, at: usize) -> Result<usize> {
        if !(-4..=4).contains(&charge) {
            return Err(err(at, format!("charge {charge} outside [-4, 4]")));
        }
        let atom = Atom::new(symbol, charge as i8, 0.0, 0.0).map_err(|e| err(at, e.to_string()))?;
        self.aromatic.push(aromatic);
        Ok(self.mol.add_atom(atom))
    }

    fn organic_atom(&mut self) -> Result<Option<usize>> {
        let at = self.pos;
        let c = match self.peek() {
            Some(c) => c,
            None => return Ok(None),
        };
        let two: String = [c, self.peek_at(1).unwrap_or(' ')].iter().collect();
        if two == "Cl" || two == "Br" {
            self.pos += 2;
            return self.push_atom(&two, 0, false, at).map(Some);
        }
        let one = c.to_string();
        if ORGANIC_SUBSET.contains(&one.as_str()) {
            self.pos += 1;
            return self.push_atom(&one, 0, false, at).map(Some);
        }
        let upper = c.to_ascii_uppercase().to_string();
        if c.is_ascii_lowercase() && AROMATIC_SUBSET.contains(&upper.as_str()) {
            self.pos += 1;
            return self.push_atom(&upper, 0, true, at).map(Some);
        }
        Ok(None)
    }

    fn bracket_atom(&mut self) -> Result<usize> {
        let open = self.pos;
        self.pos += 1; // '['
        if self.peek().is_some_and(|c| c.is_ascii_digit()) {
            return Err(err(self.pos, "isotope labels are not supported"));
        }
        let sym_at = self.pos;
        let first = self
            .peek()
            .ok_or_else(|| err(open, "unterminated bracket atom"))?;
        let (symbol, aromatic) = if first.is_ascii_uppercase() {
            self.pos += 1;
            let mut s = first.to_string();
            if let Some(n) = self.peek().filter(|c| c.is_ascii_lowercase()) {
                let cand = format!("{s}{n}");
                if is_element(&cand) {
                    s = cand;
                    self.pos += 1;
                }
            }
            (s, false)
        } else if first.is_ascii_lowercase() {
            let upper = first.to_ascii_uppercase().to_string();
            if !AROMATIC_SUBSET.contains(&upper.as_str()) {
                return Err(err(sym_at, format!("unknown aromatic symbol {first:?}")));
            }
            self.pos += 1;
            (upper, true)
        } else {
            return Err(err(sym_at, format!("unknown symbol {first:?}")));
        };
        if !is_element(&symbol) {
            return Err(err(sym_at, format!("unknown element {symbol:?}")));
        }
        if self.peek() == Some('@') {
            return Err(err(self.pos, "chirality marks are not supported"));
        }
        if self.peek() == Some('H') {
            self.pos += 1;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        let mut charge: i32 = 0;
        if let Some(sign @ ('+' | '-')) = self.peek() {
            let unit = if sign == '+' { 1 } else { -1 };
            self.pos += 1;
            if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                let mut n = 0i32;
                while let Some(d) = self.peek().and_then(|c| c.to_digit(10)) {
                    n = n * 10 + d as i32;
                    self.pos += 1;
                    if n > 99 {
                        return Err(err(self.pos, "charge magnitude too large"));
                    }
                }
                charge = unit * n;
            } else {
                charge = unit;
                while self.peek() == Some(sign) {
                    charge += unit;
                    self.pos += 1;
                }
            }
        }
        if self.peek() == Some(':') {
            self.pos += 1;
            if !self.peek().is_some_and(|c| c.is_ascii_digit()) {
                return Err(err(self.pos, "malformed atom class"));
            }
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        match self.peek() {
            Some(']') => self.pos += 1,
            Some(c) => return Err(err(self.pos, format!("unexpected {c:?} in bracket atom"))),
            None => return Err(err(open, "unterminated bracket atom")),
        }
        self.push_atom(&symbol, charge, aromatic, sym_at)
    }

    fn bond_symbol(&mut self) -> Result<Option<BondOrder>> {
        let order = match self.peek() {
            Some('-') => BondOrder::Single,
            Some('=') => BondOrder::Double,
            Some('#') => BondOrder::Triple,
            Some(':') => BondOrder::Aromatic,
            Some('/' | '\\') => {
                return Err(err(self.pos, "directional bonds are not supported"))
            }
            Some('$') => return Err(err(self.pos, "quadruple bonds are not supported")),
            _ => return Ok(None),
        };
        self.pos += 1;
        Ok(Some(order))
    }

    fn ring_label(&mut self) -> Result<Option<u32>> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                self.pos += 1;
                Ok(c.to_digit(10))
            }
            Some('%') => {
                let at = self.pos;
                let d1 = self.peek_at(1).and_then(|c| c.to_digit(10));
                let d2 = self.peek_at(2).and_then(|c| c.to_digit(10));
                match (d1, d2) {
                    (Some(a), Some(b)) => {
                        self.pos += 3;
                        Ok(Some(a * 10 + b))
                    }
                    _ => Err(err(at, "'%' must be followed by two digits")),
                }
            }
            _ => Ok(None),
        }
    }

    fn implied_order(&self, a: usize, b: usize) -> BondOrder {
        if self.aromatic[a] && self.aromatic[b] {
            BondOrder::Aromatic
        } else {
            BondOrder::Single
        }
    }

    fn connect(&mut self, a: usize, b: usize, order: BondOrder, at: usize) -> Result<()> {
        self.mol
            .add_bond(a, b, order)
            .map_err(|e| err(at, e.to_string()))
    }

    fn parse(mut self) -> Result<Molecule> {
        if self.chars.is_empty() {
            return Err(err(0, "empty SMILES"));
        }
        let mut prev: Option<usize> = None;
        let mut pending: Option<(BondOrder, usize)> = None;
        let mut branches: Vec<(Option<usize>, usize)> = Vec::new();
        let mut rings: BTreeMap<u32, (usize, Option<BondOrder>, usize)> = BTreeMap::new();

        while let Some(c) = self.peek() {
            let at = self.pos;
            match c {
                '(' => {
                    if prev.is_none() {
                        return Err(err(at, "branch without a preceding atom"));
                    }
                    if pending.is_some() {
                        return Err(err(at, "bond symbol before '('"));
                    }
                    branches.push((prev, at));
                    self.pos += 1;
                }
                ')' => {
                    let (atom, _) = branches
                        .pop()
                        .ok_or_else(|| err(at, "unbalanced ')'"))?;
                    if pending.is_some() {
                        return Err(err(at, "bond symbol before ')'"));
                    }
                    if self.chars.get(at.wrapping_sub(1)) == Some(&'(') {
                        return Err(err(at, "empty branch"));
                    }
                    prev = atom;
                    self.pos += 1;
                }
                '.' => {
                    if pending.is_some() || prev.is_none() {
                        return Err(err(at, "misplaced '.'"));
                    }
                    if !branches.is_empty() {
                        return Err(err(at, "'.' inside a branch is not supported"));
                    }
                    prev = None;
                    self.pos += 1;
                }
                '-' | '=' | '#' | ':' | '/' | '\\' | '$' => {
                    if pending.is_some() {
                        return Err(err(at, "two consecutive bond symbols"));
                    }
                    if prev.is_none() {
                        return Err(err(at, "bond symbol without a preceding atom"));
                    }
                    let order = self.bond_symbol()?.expect("bond char");
                    pending = Some((order, at));
                }
                '0'..='9' | '%' => {
                    let atom = prev.ok_or_else(|| err(at, "ring closure without an atom"))?;
                    let label = self.ring_label()?.expect("ring char");
                    let order = pending.take().map(|(o, _)| o);
                    if let Some((other, open_order, _)) = rings.remove(&label) {
                        let order = match (open_order, order) {
                            (Some(x), Some(y)) if x != y => {
                                return Err(err(at, format!("conflicting bond orders on ring {label}")))
                            }
                            (Some(x), _) | (None, Some(x)) => x,
                            (None, None) => self.implied_order(other, atom),
                        };
                        self.connect(other, atom, order, at)?;
                    } else {
                        rings.insert(label, (atom, order, at));
                    }
                }
                '[' => {
                    let atom = self.bracket_atom()?;
                    self.attach(prev, atom, pending.take(), at)?;
                    prev = Some(atom);
                }
                _ => match self.organic_atom()? {
                    Some(atom) => {
                        self.attach(prev, atom, pending.take(), at)?;
                        prev = Some(atom);
                    }
                    None => return Err(err(at, format!("unknown symbol {c:?}"))),
                },
            }
        }
        if let Some((_, at)) = pending {
            return Err(err(at, "dangling bond symbol"));
        }
        if let Some((_, at)) = branches.pop() {
            return Err(err(at, "unbalanced '('"));
        }
        if let Some((label, (_, _, at))) = rings.into_iter().next() {
            return Err(err(at, format!("unmatched ring-closure {label}")));
        }
        Ok(self.mol)
    }

    fn attach(
        &mut self,
        prev: Option<usize>,
        atom: usize,
        pending: Option<(BondOrder, usize)>,
        at: usize,
    ) -> Result<()> {
        if let Some(p) = prev {
            let order = pending
                .map(|(o, _)| o)
                .unwrap_or_else(|| self.implied_order(p, atom));
            self.connect(p, atom, order, at)?;
        }
        Ok(())
    }
}

/// Parses the supported SMILES subset. All coordinates are zero.
pub fn parse_smiles(text: &str) -> Result<Molecule> {
    let trimmed = text.trim();
    Parser {
        chars: trimmed.chars().collect(),
        pos: 0,
        mol: Molecule::new(),
        aromatic: Vec::new(),
    }
    .parse()
}

fn writes_lowercase(m: &Molecule, adj: &[Vec<(usize, usize)>], atom: usize) -> bool {
    AROMATIC_SUBSET.contains(&m.atoms()[atom].element.as_str())
        && adj[atom]
            .iter()
            .any(|&(_, b)| m.bonds()[b].order == BondOrder::Aromatic)
}

fn atom_text(m: &Molecule, atom: usize, lower: bool) -> String {
    let a = &m.atoms()[atom];
    let symbol = if lower {
        a.element.to_ascii_lowercase()
    } else {
        a.element.clone()
    };
    if a.charge == 0 && ORGANIC_SUBSET.contains(&a.element.as_str()) {
        return symbol;
    }
    let charge = match a.charge {
        0 => String::new(),
        1 => "+".to_string(),
        -1 => "-".to_string(),
        c if c > 0 => format!("+{c}"),
        c => format!("-{}", -c),
    };
    format!("[{symbol}{charge}]")
}

fn bond_text(order: BondOrder, lower_a: bool, lower_b: bool) -> &'static str {
    let both = lower_a && lower_b;
    match order {
        BondOrder::Single if both => "-",
        BondOrder::Single => "",
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
        BondOrder::Aromatic if both => "",
        BondOrder::Aromatic => ":",
    }
}

struct Writer<'a> {
    m: &'a Molecule,
    adj: Vec<Vec<(usize, usize)>>,
    lower: Vec<bool>,
    visited: Vec<bool>,
    children: Vec<Vec<(usize, usize)>>,
    // ring bonds in the order they are met at each atom
    ring_bonds: Vec<Vec<usize>>,
    is_ring_bond: Vec<bool>,
    ring_digit: Vec<Option<u32>>,
    free_digits: std::collections::BTreeSet<u32>,
}

impl Writer<'_> {
    fn discover(&mut self, root: usize) {
        let mut stack = vec![(root, usize::MAX, 0usize)];
        self.visited[root] = true;
        while let Some((v, parent_bond, next)) = stack.pop() {
            if next >= self.adj[v].len() {
                continue;
            }
            stack.push((v, parent_bond, next + 1));
            let (w, b) = self.adj[v][next];
            if b == parent_bond || self.is_ring_bond[b] {
                continue;
            }
            if self.visited[w] {
                self.is_ring_bond[b] = true;
                self.ring_bonds[w].push(b);
                self.ring_bonds[v].push(b);
            } else {
                self.visited[w] = true;
                self.children[v].push((w, b));
                stack.push((w, b, 0));
            }
        }
    }

    fn emit(&mut self, root: usize, out: &mut String) {
        // Explicit stack of pending output actions keeps deep chains safe.
        enum Step {
            Atom(usize),
            Text(&'static str),
            Bond(usize, usize, usize),
        }
        let mut steps = vec![Step::Atom(root)];
        while let Some(step) = steps.pop() {
            match step {
                Step::Text(t) => out.push_str(t),
                Step::Bond(from, to, b) => {
                    let order = self.m.bonds()[b].order;
                    out.push_str(bond_text(order, self.lower[from], self.lower[to]));
                }
                Step::Atom(v) => {
                    out.push_str(&atom_text(self.m, v, self.lower[v]));
                    let rings = self.ring_bonds[v].clone();
                    for b in rings {
                        match self.ring_digit[b] {
                            Some(d) => {
                                self.free_digits.insert(d);
                                push_ring_label(out, d);
                            }
                            None => {
                                let d = *self.free_digits.iter().next().expect("ring digits");
                                self.free_digits.remove(&d);
                                self.ring_digit[b] = Some(d);
                                let bond = self.m.bonds()[b];
                                let other = bond.other(v);
                                out.push_str(bond_text(
                                    bond.order,
                                    self.lower[v],
                                    self.lower[other],
                                ));
                                push_ring_label(out, d);
                            }
                        }
                    }
                    let kids = self.children[v].clone();
                    for (i, &(w, b)) in kids.iter().enumerate().rev() {
                        let last = i + 1 == kids.len();
                        if !last {
                            steps.push(Step::Text(")"));
                        }
                        steps.push(Step::Atom(w));
                        steps.push(Step::Bond(v, w, b));
                        if !last {
                            steps.push(Step::Text("("));
                        }
                    }
                }
            }
        }
    }
}

fn push_ring_label(out: &mut String, d: u32) {
    if d < 10 {
        out.push(char::from_digit(d, 10).expect("digit"));
    } else {
        out.push_str(&format!("%{d:02}"));
    }
}

/// Writes a SMILES string whose parse has the same canonical id as `m`.
/// Components are joined with `.` in order of their lowest atom index.
pub fn write_smiles(m: &Molecule) -> String {
    let adj = m.adjacency();
    let lower = (0..m.atom_count())
        .map(|i| writes_lowercase(m, &adj, i))
        .collect();
    let n = m.atom_count();
    let mut w = Writer {
        m,
        adj,
        lower,
        visited: vec![false; n],
        children: vec![Vec::new(); n],
        ring_bonds: vec![Vec::new(); n],
        is_ring_bond: vec![false; m.bond_count()],
        ring_digit: vec![None; m.bond_count()],
        free_digits: (1..100).collect(),
    };
    let mut parts = Vec::new();
    for comp in m.components() {
        let root = comp[0];
        w.discover(root);
        let mut s = String::new();
        w.emit(root, &mut s);
        parts.push(s);
    }
    parts.join(".")
}
