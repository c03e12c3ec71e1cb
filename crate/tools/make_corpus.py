#!/usr/bin/env python3
"""Regenerate the bundled molfile corpus under corpus/molfiles/.

Needs RDKit, used only for 2D coordinate generation. The Rust crates never
depend on it; the generated molfiles are checked in.

Categories: 20 linear, 20 branched, 30 cyclic, 40 biochemical,
10 mixed linear/branched/cyclic, 9 pharmaceutical.
"""

import pathlib
import sys

from rdkit import Chem
from rdkit.Chem import AllChem

CORPUS = [
    # linear
    ("linear", "ethane", "CC"),
    ("linear", "propane", "CCC"),
    ("linear", "butane", "CCCC"),
    ("linear", "pentane", "CCCCC"),
    ("linear", "hexane", "CCCCCC"),
    ("linear", "heptane", "CCCCCCC"),
    ("linear", "octane", "CCCCCCCC"),
    ("linear", "ethanol", "CCO"),
    ("linear", "propan-1-ol", "CCCO"),
    ("linear", "butan-1-ol", "CCCCO"),
    ("linear", "acetic_acid", "CC(=O)O"),
    ("linear", "propanoic_acid", "CCC(=O)O"),
    ("linear", "butanal", "CCCC=O"),
    ("linear", "hexanoic_acid", "CCCCCC(=O)O"),
    ("linear", "ethylene_glycol", "OCCO"),
    ("linear", "1-chlorobutane", "CCCCCl"),
    ("linear", "propionitrile", "CCC#N"),
    ("linear", "but-2-yne", "CC#CC"),
    ("linear", "hex-1-ene", "C=CCCCC"),
    ("linear", "diethyl_ether", "CCOCC"),
    # branched
    ("branched", "isobutane", "CC(C)C"),
    ("branched", "isopentane", "CCC(C)C"),
    ("branched", "neopentane", "CC(C)(C)C"),
    ("branched", "isooctane", "CC(C)CC(C)(C)C"),
    ("branched", "tert-butanol", "CC(C)(C)O"),
    ("branched", "isopropanol", "CC(O)C"),
    ("branched", "acetone", "CC(C)=O"),
    ("branched", "2-methylbutanoic_acid", "CCC(C)C(=O)O"),
    ("branched", "isoamyl_alcohol", "CC(C)CCO"),
    ("branched", "isobutyric_acid", "CC(C)C(=O)O"),
    ("branched", "tert-butylamine", "CC(C)(C)N"),
    ("branched", "2,3-dimethylbutane", "CC(C)C(C)C"),
    ("branched", "3-ethylpentane", "CCC(CC)CC"),
    ("branched", "isobutylene", "C=C(C)C"),
    ("branched", "mtbe", "COC(C)(C)C"),
    ("branched", "isobutyraldehyde", "CC(C)C=O"),
    ("branched", "2-chloropropane", "CC(C)Cl"),
    ("branched", "isoprene", "C=CC(=C)C"),
    ("branched", "pivalic_acid", "CC(C)(C)C(=O)O"),
    ("branched", "triethylamine", "CCN(CC)CC"),
    # cyclic
    ("cyclic", "benzene", "c1ccccc1"),
    ("cyclic", "toluene", "Cc1ccccc1"),
    ("cyclic", "phenol", "Oc1ccccc1"),
    ("cyclic", "aniline", "Nc1ccccc1"),
    ("cyclic", "benzoic_acid", "OC(=O)c1ccccc1"),
    ("cyclic", "chlorobenzene", "Clc1ccccc1"),
    ("cyclic", "nitrobenzene", "[O-][N+](=O)c1ccccc1"),
    ("cyclic", "benzaldehyde", "O=Cc1ccccc1"),
    ("cyclic", "pyridine", "c1ccncc1"),
    ("cyclic", "pyrrole", "c1cc[nH]c1"),
    ("cyclic", "furan", "c1ccoc1"),
    ("cyclic", "thiophene", "c1ccsc1"),
    ("cyclic", "imidazole", "c1cnc[nH]1"),
    ("cyclic", "pyrimidine", "c1cncnc1"),
    ("cyclic", "indole", "c1ccc2[nH]ccc2c1"),
    ("cyclic", "quinoline", "c1ccc2ncccc2c1"),
    ("cyclic", "naphthalene", "c1ccc2ccccc2c1"),
    ("cyclic", "anthracene", "c1ccc2cc3ccccc3cc2c1"),
    ("cyclic", "phenanthrene", "c1ccc2c(c1)ccc1ccccc12"),
    ("cyclic", "norbornane", "C1CC2CCC1C2"),
    ("cyclic", "adamantane", "C1C2CC3CC1CC(C2)C3"),
    ("cyclic", "bicyclooctane", "C1CC2CCC1CC2"),
    ("cyclic", "cyclohexane", "C1CCCCC1"),
    ("cyclic", "cyclopentane", "C1CCCC1"),
    ("cyclic", "cyclopropane", "C1CC1"),
    ("cyclic", "cyclododecane", "C1CCCCCCCCCCC1"),
    ("cyclic", "18-crown-6", "C1COCCOCCOCCOCCOCCO1"),
    ("cyclic", "pyrene", "c1cc2ccc3cccc4ccc(c1)c2c34"),
    ("cyclic", "biphenyl", "c1ccc(cc1)-c1ccccc1"),
    ("cyclic", "cyclohexanone", "O=C1CCCCC1"),
    # biochemical
    ("biochemical", "glycine", "NCC(=O)O"),
    ("biochemical", "alanine", "CC(N)C(=O)O"),
    ("biochemical", "valine", "CC(C)C(N)C(=O)O"),
    ("biochemical", "leucine", "CC(C)CC(N)C(=O)O"),
    ("biochemical", "serine", "OCC(N)C(=O)O"),
    ("biochemical", "cysteine", "SCC(N)C(=O)O"),
    ("biochemical", "phenylalanine", "NC(Cc1ccccc1)C(=O)O"),
    ("biochemical", "tyrosine", "NC(Cc1ccc(O)cc1)C(=O)O"),
    ("biochemical", "tryptophan", "NC(Cc1c[nH]c2ccccc12)C(=O)O"),
    ("biochemical", "histidine", "NC(Cc1cnc[nH]1)C(=O)O"),
    ("biochemical", "proline", "OC(=O)C1CCCN1"),
    ("biochemical", "glutamic_acid", "NC(CCC(=O)O)C(=O)O"),
    ("biochemical", "lysine", "NCCCCC(N)C(=O)O"),
    ("biochemical", "methionine", "CSCCC(N)C(=O)O"),
    ("biochemical", "glucose", "OCC1OC(O)C(O)C(O)C1O"),
    ("biochemical", "fructose", "OCC1(O)OCC(O)C(O)C1O"),
    ("biochemical", "ribose", "OCC1OC(O)C(O)C1O"),
    ("biochemical", "glycerol", "OCC(O)CO"),
    ("biochemical", "sucrose", "OCC1OC(OC2(CO)OC(CO)C(O)C2O)C(O)C(O)C1O"),
    ("biochemical", "palmitic_acid", "CCCCCCCCCCCCCCCC(=O)O"),
    ("biochemical", "oleic_acid", "CCCCCCCCC=CCCCCCCCC(=O)O"),
    ("biochemical", "stearic_acid", "CCCCCCCCCCCCCCCCCC(=O)O"),
    ("biochemical", "cholesterol", "CC(C)CCCC(C)C1CCC2C1(CCC3C2CC=C4C3(CCC(C4)O)C)C"),
    ("biochemical", "testosterone", "CC12CCC3C(CCC4=CC(=O)CCC34C)C1CCC2O"),
    ("biochemical", "estradiol", "CC12CCC3c4ccc(O)cc4CCC3C1CCC2O"),
    ("biochemical", "adrenaline", "CNCC(O)c1ccc(O)c(O)c1"),
    ("biochemical", "dopamine", "NCCc1ccc(O)c(O)c1"),
    ("biochemical", "serotonin", "NCCc1c[nH]c2ccc(O)cc12"),
    ("biochemical", "melatonin", "CC(=O)NCCc1c[nH]c2ccc(OC)cc12"),
    ("biochemical", "histamine", "NCCc1cnc[nH]1"),
    ("biochemical", "thyroxine", "NC(Cc1cc(I)c(Oc2cc(I)c(O)c(I)c2)c(I)c1)C(=O)O"),
    ("biochemical", "nicotinamide", "NC(=O)c1cccnc1"),
    ("biochemical", "ascorbic_acid", "OCC(O)C1OC(=O)C(O)=C1O"),
    ("biochemical", "pyridoxine", "Cc1ncc(CO)c(CO)c1O"),
    ("biochemical", "niacin", "OC(=O)c1cccnc1"),
    ("biochemical", "retinol", "CC1=C(C(C)(C)CCC1)C=CC(C)=CC=CC(C)=CCO"),
    ("biochemical", "adenine", "Nc1ncnc2[nH]cnc12"),
    ("biochemical", "caffeine", "Cn1cnc2c1c(=O)n(C)c(=O)n2C"),
    ("biochemical", "uracil", "O=c1cc[nH]c(=O)[nH]1"),
    ("biochemical", "urea", "NC(N)=O"),
    # mixed
    ("mixed", "4-tert-butylphenol", "CC(C)(C)c1ccc(O)cc1"),
    ("mixed", "cyclohexylmethanol", "OCC1CCCCC1"),
    ("mixed", "2-phenylethanol", "OCCc1ccccc1"),
    ("mixed", "hexylbenzene", "CCCCCCc1ccccc1"),
    ("mixed", "4-methylcyclohexanone", "CC1CCC(=O)CC1"),
    ("mixed", "menthol", "CC(C)C1CCC(C)CC1O"),
    ("mixed", "limonene", "CC1=CCC(CC1)C(C)=C"),
    ("mixed", "hydrocinnamic_acid", "OC(=O)CCc1ccccc1"),
    ("mixed", "cyclopentylacetic_acid", "OC(=O)CC1CCCC1"),
    ("mixed", "p-cymene", "CC(C)c1ccc(C)cc1"),
    # pharmaceutical
    ("pharmaceutical", "aspirin", "CC(=O)Oc1ccccc1C(=O)O"),
    ("pharmaceutical", "paracetamol", "CC(=O)Nc1ccc(O)cc1"),
    ("pharmaceutical", "ibuprofen", "CC(C)Cc1ccc(cc1)C(C)C(=O)O"),
    ("pharmaceutical", "naproxen", "COc1ccc2cc(ccc2c1)C(C)C(=O)O"),
    ("pharmaceutical", "diazepam", "CN1C(=O)CN=C(c2ccccc2)c2cc(Cl)ccc12"),
    ("pharmaceutical", "metformin", "CN(C)C(=N)NC(N)=N"),
    ("pharmaceutical", "lidocaine", "CCN(CC)CC(=O)Nc1c(C)cccc1C"),
    ("pharmaceutical", "nicotine", "CN1CCCC1c1cccnc1"),
    ("pharmaceutical", "sodium_salicylate", "[Na+].[O-]C(=O)c1ccccc1O"),
]


def main() -> int:
    out = pathlib.Path(__file__).resolve().parent.parent / "corpus" / "molfiles"
    out.mkdir(parents=True, exist_ok=True)
    for old in out.glob("*.mol"):
        old.unlink()
    for i, (category, name, smiles) in enumerate(CORPUS, start=1):
        mol = Chem.MolFromSmiles(smiles)
        if mol is None:
            print(f"bad smiles for {name}: {smiles}", file=sys.stderr)
            return 1
        Chem.RemoveStereochemistry(mol)
        AllChem.Compute2DCoords(mol)
        Chem.Kekulize(mol, clearAromaticFlags=True)
        mol.SetProp("_Name", f"{name} ({category})")
        block = Chem.MolToMolBlock(mol, kekulize=True, includeStereo=False)
        (out / f"{i:03d}_{name}.mol").write_text(block)
    print(f"wrote {len(CORPUS)} molfiles to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
