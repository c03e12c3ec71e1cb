//! MDL molfile V2000 connection tables.
//!
//! Column layout (zero-based, end-exclusive):
//!
//! ```text
//! counts  aaabbblllfffcccsssxxxrrrpppiiimmmvvvvvv
//! atom    xxxxx.xxxxyyyyy.yyyyzzzzz.zzzz aaaddcccssshhhbbbvvvHHHrrriiimmmnnneee
//! bond    111222tttsssxxxrrrccc
//! ```

use super::{Atom, BondOrder, ChemError, Molecule, Result};

fn err(line: usize, message: impl Into<String>) -> ChemError {
    ChemError::Molfile {
        line,
        message: message.into(),
    }
}

fn field(line: &str, start: usize, end: usize) -> &str {
    let end = end.min(line.len());
    if start >= end {
        return "";
    }
    line.get(start..end).unwrap_or("").trim()
}

fn parse_counts(line: &str, lineno: usize) -> Result<(usize, usize)> {
    if line.contains("V3000") {
        return Err(err(lineno, "V3000 connection tables are not supported"));
    }
    let atoms = field(line, 0, 3)
        .parse::<usize>()
        .map_err(|_| err(lineno, format!("malformed counts line {line:?}")))?;
    let bonds = field(line, 3, 6)
        .parse::<usize>()
        .map_err(|_| err(lineno, format!("malformed counts line {line:?}")))?;
    Ok((atoms, bonds))
}

fn legacy_charge(code: &str) -> i8 {
    match code.parse::<u8>().unwrap_or(0) {
        1 => 3,
        2 => 2,
        3 => 1,
        5 => -1,
        6 => -2,
        7 => -3,
        _ => 0,
    }
}

fn legacy_code(charge: i8) -> u8 {
    match charge {
        3 => 1,
        2 => 2,
        1 => 3,
        -1 => 5,
        -2 => 6,
        -3 => 7,
        _ => 0,
    }
}

fn parse_atom_line(line: &str, lineno: usize) -> Result<Atom> {
    let coords = (
        field(line, 0, 10).parse::<f64>(),
        field(line, 10, 20).parse::<f64>(),
        field(line, 20, 30).parse::<f64>(),
    );
    let (x, y, symbol, charge_code) = match coords {
        (Ok(x), Ok(y), Ok(_)) if line.len() >= 32 => {
            (x, y, field(line, 31, 34).to_string(), field(line, 36, 39).to_string())
        }
        _ => {
            // Tolerate writers that do not respect the fixed columns.
            let tok: Vec<&str> = line.split_whitespace().collect();
            if tok.len() < 4 {
                return Err(err(lineno, format!("malformed atom line {line:?}")));
            }
            let x = tok[0].parse::<f64>();
            let y = tok[1].parse::<f64>();
            let z = tok[2].parse::<f64>();
            match (x, y, z) {
                (Ok(x), Ok(y), Ok(_)) => (
                    x,
                    y,
                    tok[3].to_string(),
                    tok.get(5).copied().unwrap_or("0").to_string(),
                ),
                _ => return Err(err(lineno, format!("malformed atom line {line:?}"))),
            }
        }
    };
    Atom::new(&symbol, legacy_charge(&charge_code), x, y).map_err(|e| err(lineno, e.to_string()))
}

fn looks_like_atom_line(line: &str) -> bool {
    let tok: Vec<&str> = line.split_whitespace().collect();
    tok.len() >= 4
        && tok[..3].iter().all(|t| t.contains('.') && t.parse::<f64>().is_ok())
        && tok[3].chars().all(|c| c.is_ascii_alphabetic())
}

fn parse_bond_line(line: &str, lineno: usize, natoms: usize) -> Result<(usize, usize, BondOrder)> {
    let mut a = field(line, 0, 3).parse::<usize>();
    let mut b = field(line, 3, 6).parse::<usize>();
    let mut t = field(line, 6, 9).parse::<u8>();
    if a.is_err() || b.is_err() || t.is_err() {
        let tok: Vec<&str> = line.split_whitespace().collect();
        if tok.len() >= 3 {
            a = tok[0].parse();
            b = tok[1].parse();
            t = tok[2].parse();
        }
    }
    let (a, b, t) = match (a, b, t) {
        (Ok(a), Ok(b), Ok(t)) => (a, b, t),
        _ => return Err(err(lineno, format!("malformed bond line {line:?}"))),
    };
    if a == 0 || b == 0 || a > natoms || b > natoms {
        return Err(err(
            lineno,
            format!("bond {a}-{b} references an atom outside 1..={natoms}"),
        ));
    }
    let order = BondOrder::from_code(t)
        .ok_or_else(|| err(lineno, format!("unsupported bond type {t}")))?;
    Ok((a - 1, b - 1, order))
}

/// Parses a single V2000 molfile block.
///
/// Charges given by `M  CHG` records replace every legacy charge-column
/// value, as the format requires. Text after `M  END` is ignored.
pub fn parse_molfile(text: &str) -> Result<Molecule> {
    let lines: Vec<&str> = text.lines().map(|l| l.trim_end_matches('\r')).collect();
    let get = |i: usize, what: &str| -> Result<&str> {
        lines
            .get(i)
            .copied()
            .ok_or_else(|| err(i + 1, format!("unexpected end of input, expected {what}")))
    };

    let (natoms, nbonds) = parse_counts(get(3, "counts line")?, 4)?;
    let mut mol = Molecule::new();
    let mut idx = 4;
    for _ in 0..natoms {
        let line = get(idx, "atom line")?;
        mol.add_atom(parse_atom_line(line, idx + 1)?);
        idx += 1;
    }
    for _ in 0..nbonds {
        let line = get(idx, "bond line")?;
        let parsed = parse_bond_line(line, idx + 1, natoms);
        if parsed.is_err() && looks_like_atom_line(line) {
            return Err(err(
                idx + 1,
                format!("counts line declares {natoms} atoms but the atom block continues"),
            ));
        }
        let (a, b, order) = parsed?;
        mol.add_bond(a, b, order)
            .map_err(|e| err(idx + 1, e.to_string()))?;
        idx += 1;
    }

    let mut saw_chg = false;
    loop {
        let line = get(idx, "\"M  END\"")?;
        let lineno = idx + 1;
        idx += 1;
        if line.starts_with("M  END") {
            return Ok(mol);
        }
        if let Some(rest) = line.strip_prefix("M  CHG") {
            if !saw_chg {
                for i in 0..mol.atom_count() {
                    mol.atom_mut(i).charge = 0;
                }
                saw_chg = true;
            }
            let tok: Vec<&str> = rest.split_whitespace().collect();
            let count: usize = tok
                .first()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| err(lineno, "malformed M  CHG record"))?;
            if tok.len() != 1 + 2 * count {
                return Err(err(lineno, "M  CHG entry count does not match its entries"));
            }
            for pair in tok[1..].chunks(2) {
                let atom: usize = pair[0]
                    .parse()
                    .map_err(|_| err(lineno, "malformed M  CHG atom index"))?;
                let charge: i32 = pair[1]
                    .parse()
                    .map_err(|_| err(lineno, "malformed M  CHG charge"))?;
                if atom == 0 || atom > mol.atom_count() {
                    return Err(err(lineno, format!("M  CHG references missing atom {atom}")));
                }
                if !(-4..=4).contains(&charge) {
                    return Err(err(lineno, ChemError::ChargeOutOfRange(charge).to_string()));
                }
                mol.atom_mut(atom - 1).charge = charge as i8;
            }
            continue;
        }
        if line.starts_with("M  ")
            || line.starts_with("A  ")
            || line.starts_with("V  ")
            || line.starts_with("G  ")
            || line.starts_with("S  SKP")
        {
            // other property records carry nothing this graph model keeps
            continue;
        }
        if looks_like_atom_line(line) {
            return Err(err(
                lineno,
                format!("counts line declares {natoms} atoms but the atom block continues"),
            ));
        }
        if line.trim().is_empty() || line.starts_with("$$$$") {
            return Err(err(lineno, "missing \"M  END\""));
        }
        return Err(err(lineno, format!("unexpected line {line:?} in property block")));
    }
}

/// Writes a V2000 block. Coordinates are emitted with four decimals, so a
/// parse of the output reproduces the molecule up to that rounding.
pub fn write_molfile(m: &Molecule) -> String {
    let mut out = String::new();
    out.push('\n');
    out.push_str("  ocsrbench          2D\n");
    out.push('\n');
    out.push_str(&format!(
        "{:>3}{:>3}  0  0  0  0  0  0  0  0999 V2000\n",
        m.atom_count(),
        m.bond_count()
    ));
    for a in m.atoms() {
        out.push_str(&format!(
            "{:>10.4}{:>10.4}{:>10.4} {:<3} 0{:>3}  0  0  0  0  0  0  0  0  0  0\n",
            a.x,
            a.y,
            0.0,
            a.element,
            legacy_code(a.charge)
        ));
    }
    for b in m.bonds() {
        out.push_str(&format!(
            "{:>3}{:>3}{:>3}  0\n",
            b.a + 1,
            b.b + 1,
            b.order.code()
        ));
    }
    let charged: Vec<(usize, i8)> = m
        .atoms()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.charge != 0)
        .map(|(i, a)| (i + 1, a.charge))
        .collect();
    for chunk in charged.chunks(8) {
        out.push_str(&format!("M  CHG{:>3}", chunk.len()));
        for (i, c) in chunk {
            out.push_str(&format!(" {i:>3} {c:>3}"));
        }
        out.push('\n');
    }
    out.push_str("M  END\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const METHANE: &str = "methane\n  test\n\n  1  0  0  0  0  0  0  0  0  0999 V2000\n    0.0000    0.0000    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0\nM  END\n";

    const ETHANOL: &str = "\
ethanol
  test

  3  2  0  0  0  0  0  0  0  0999 V2000
   -1.2990   -0.2500    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0
    0.0000    0.5000    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0
    1.2990   -0.2500    0.0000 O   0  0  0  0  0  0  0  0  0  0  0  0
  1  2  1  0
  2  3  1  0
M  END
";

    #[test]
    fn methane() {
        let m = parse_molfile(METHANE).unwrap();
        assert_eq!(m.atom_count(), 1);
        assert_eq!(m.atoms()[0].element, "C");
        assert_eq!(m.bond_count(), 0);
    }

    #[test]
    fn ethanol() {
        let m = parse_molfile(ETHANOL).unwrap();
        assert_eq!(m.atom_count(), 3);
        assert_eq!(m.bond_count(), 2);
        let els: Vec<&str> = m.atoms().iter().map(|a| a.element.as_str()).collect();
        assert_eq!(els, ["C", "C", "O"]);
        assert_eq!(m.atoms()[0].x, -1.299);
        assert_eq!(m.atoms()[1].y, 0.5);
        assert!(m.bonds().iter().all(|b| b.order == BondOrder::Single));
    }

    #[test]
    fn counts_mismatch_extra_atom_line() {
        let text = ETHANOL.replace("  3  2  0", "  2  2  0");
        match parse_molfile(&text) {
            Err(ChemError::Molfile { line, message }) => {
                assert_eq!(line, 7);
                assert!(message.contains("declares 2 atoms"), "{message}");
            }
            other => panic!("expected counts mismatch, got {other:?}"),
        }
        // no bonds declared: the stray atom line lands in the property block
        let text = METHANE.replace("  1  0  0", "  0  0  0");
        assert!(matches!(
            parse_molfile(&text),
            Err(ChemError::Molfile { line: 5, .. })
        ));
    }

    #[test]
    fn malformed_counts_line() {
        let text = METHANE.replace("  1  0  0  0", " x1  0  0  0");
        assert!(matches!(
            parse_molfile(&text),
            Err(ChemError::Molfile { line: 4, .. })
        ));
    }

    #[test]
    fn bond_index_out_of_range() {
        let text = ETHANOL.replace("  2  3  1  0", "  2  4  1  0");
        match parse_molfile(&text) {
            Err(ChemError::Molfile { line, message }) => {
                assert_eq!(line, 9);
                assert!(message.contains("outside"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_end() {
        let text = ETHANOL.replace("M  END\n", "");
        assert!(matches!(
            parse_molfile(&text),
            Err(ChemError::Molfile { line: 10, .. })
        ));
    }

    #[test]
    fn chg_overrides_legacy_column() {
        let legacy = ETHANOL.replace(
            "1.2990   -0.2500    0.0000 O   0  0",
            "1.2990   -0.2500    0.0000 O   0  5",
        );
        let m = parse_molfile(&legacy).unwrap();
        assert_eq!(m.atoms()[2].charge, -1);

        let with_chg = legacy.replace("M  END", "M  CHG  1   1   1\nM  END");
        let m = parse_molfile(&with_chg).unwrap();
        assert_eq!(m.atoms()[0].charge, 1);
        assert_eq!(m.atoms()[2].charge, 0, "M  CHG resets legacy charges");
    }

    #[test]
    fn write_counts_and_chg() {
        let mut m = parse_molfile(METHANE).unwrap();
        let text = write_molfile(&m);
        assert!(text.lines().nth(3).unwrap().starts_with("  1  0"));
        assert!(!text.contains("M  CHG"));

        m.add_atom(Atom::new("O", -1, 1.0, 0.0).unwrap());
        m.add_bond(0, 1, BondOrder::Single).unwrap();
        let text = write_molfile(&m);
        assert!(text.contains("M  CHG  1   2  -1"), "{text}");
        assert_eq!(parse_molfile(&text).unwrap(), m);
    }

    #[test]
    fn many_charges_split_across_records() {
        let mut m = Molecule::new();
        for i in 0..10 {
            m.add_atom(Atom::new("N", if i % 2 == 0 { 1 } else { -1 }, i as f64, 0.0).unwrap());
        }
        let text = write_molfile(&m);
        assert_eq!(text.matches("M  CHG").count(), 2);
        assert_eq!(parse_molfile(&text).unwrap(), m);
    }

    #[test]
    fn rejects_query_bonds_and_v3000() {
        let text = ETHANOL.replace("  1  2  1  0", "  1  2  8  0");
        assert!(parse_molfile(&text).is_err());
        let text = METHANE.replace("999 V2000", "999 V3000");
        assert!(parse_molfile(&text).is_err());
    }

    #[test]
    fn tolerates_crlf_and_trailing_sdf_data() {
        let text = format!("{}> <NAME>\nethanol\n\n$$$$\n", ETHANOL).replace('\n', "\r\n");
        assert_eq!(parse_molfile(&text).unwrap().atom_count(), 3);
    }
}
