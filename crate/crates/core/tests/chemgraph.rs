mod common;

use common::oracle::{isomorphic, mutate, random_molecule, random_permutation, scramble};
use ocsr_bench::chemgraph::{
    canonical_id, normalize_aromatic, parse_molfile, parse_smiles, write_molfile, write_smiles,
    Molecule,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn corpus() -> Vec<(String, Molecule)> {
    common::corpus::molecules()
}

fn round4(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}

#[test]
fn corpus_has_129_molecules() {
    assert_eq!(corpus().len(), 129);
}

#[test]
fn molfile_round_trip_over_corpus() {
    for (name, m) in corpus() {
        let back = parse_molfile(&write_molfile(&m)).unwrap();
        assert_eq!(back.atom_count(), m.atom_count(), "{name}");
        assert_eq!(back.bonds(), m.bonds(), "{name}");
        for (a, b) in m.atoms().iter().zip(back.atoms()) {
            assert_eq!(a.element, b.element, "{name}");
            assert_eq!(a.charge, b.charge, "{name}");
            assert_eq!(round4(a.x), round4(b.x), "{name}");
            assert_eq!(round4(a.y), round4(b.y), "{name}");
        }
    }
}

#[test]
fn smiles_round_trip_preserves_identity_over_corpus() {
    for (name, m) in corpus() {
        let s = write_smiles(&m);
        let back = parse_smiles(&s).unwrap_or_else(|e| panic!("{name}: {s}: {e}"));
        assert_eq!(canonical_id(&back), canonical_id(&m), "{name}: {s}");
    }
}

#[test]
fn corpus_ids_are_distinct() {
    let mut ids: Vec<_> = corpus().iter().map(|(_, m)| canonical_id(m)).collect();
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), 129);
}

#[test]
fn aromatic_smiles_match_kekule_molfiles() {
    let by_name = |needle: &str| {
        corpus()
            .into_iter()
            .find(|(n, _)| n.ends_with(needle))
            .unwrap()
            .1
    };
    for (name, smiles) in [
        ("_benzene", "c1ccccc1"),
        ("_pyridine", "c1ccncc1"),
        ("_naphthalene", "c1ccc2ccccc2c1"),
        ("_anthracene", "c1ccc2cc3ccccc3cc2c1"),
        ("_aspirin", "CC(=O)Oc1ccccc1C(=O)O"),
        ("_sodium_salicylate", "[Na+].[O-]C(=O)c1ccccc1O"),
        ("_nitrobenzene", "[O-][N+](=O)c1ccccc1"),
    ] {
        assert_eq!(
            canonical_id(&by_name(name)),
            canonical_id(&parse_smiles(smiles).unwrap()),
            "{name}"
        );
    }
}

#[test]
fn canonical_ids_agree_with_brute_force_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0c5e);
    let (mut same, mut decoys) = (0, 0);
    while same < 500 || decoys < 500 {
        let a = random_molecule(&mut rng, 9);
        let b = if same < 500 {
            scramble(&mut rng, &a)
        } else {
            let m = mutate(&mut rng, &a);
            scramble(&mut rng, &m)
        };
        let expected = isomorphic(&normalize_aromatic(&a), &normalize_aromatic(&b));
        if same < 500 {
            assert!(expected, "scrambled copy must be isomorphic");
            same += 1;
        } else if expected {
            continue;
        } else {
            decoys += 1;
        }
        assert_eq!(
            canonical_id(&a) == canonical_id(&b),
            expected,
            "{} vs {}",
            write_smiles(&a),
            write_smiles(&b)
        );
    }
}

fn arb_molecule() -> impl Strategy<Value = (Molecule, Vec<usize>)> {
    any::<u64>().prop_map(|seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_molecule(&mut rng, 14);
        let p = random_permutation(&mut rng, m.atom_count());
        (m, p)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn id_is_permutation_invariant((m, perm) in arb_molecule()) {
        prop_assert_eq!(canonical_id(&m), canonical_id(&m.permuted(&perm)));
    }

    #[test]
    fn id_ignores_coordinates((m, _) in arb_molecule(), dx in -50.0f64..50.0, dy in -50.0f64..50.0) {
        let mut moved = m.clone();
        for i in 0..moved.atom_count() {
            let a = moved.atom_mut(i);
            a.x += dx * i as f64;
            a.y -= dy;
        }
        prop_assert_eq!(canonical_id(&m), canonical_id(&moved));
    }

    #[test]
    fn smiles_round_trip((m, _) in arb_molecule()) {
        let back = parse_smiles(&write_smiles(&m)).unwrap();
        prop_assert_eq!(canonical_id(&m), canonical_id(&back));
    }

    #[test]
    fn molfile_round_trip((m, _) in arb_molecule()) {
        prop_assert_eq!(parse_molfile(&write_molfile(&m)).unwrap(), m);
    }
}
