#!/usr/bin/env python3
#
# Copyright (c) 2026, The chemflow authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Regenerates the synthetic solver fixtures under data/reference.

Outputs mimic the section layout of real ORCA output files. Geometries and
most energies are synthetic; the run is deterministic.
"""

import hashlib
import math
import os
import random
import sys

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data", "reference")
FIXTURES = os.path.join(ROOT, "fixtures")
SEED = os.path.join(ROOT, "seed")

PRINTS = ["Print[ P_Basis ] 2", "Print[ P_MOs ] 1", "Print[P_hirshfeld] 1"]
GEOM = ["MaxIter 500", "coordsys redundant", "cartfallback true", "ReducePrint true"]


def normalize(text):
    out = []
    for line in text.replace("\r\n", "\n").split("\n"):
        cut = line.find("#")
        if cut >= 0:
            line = line[:cut]
        out.append(line.rstrip())
    while out and out[-1] == "":
        out.pop()
    return "\n".join(out) + "\n" if out else ""


def input_hash(text):
    return hashlib.sha256(normalize(text).encode()).hexdigest()


def render(keywords, scf, xyz, geom=True, basis="def2-SVP", charge=0, mult=2, nprocs=16, ecp=True, prints=True):
    lines = ["! " + keywords, "%maxcore 4000", "%pal", "  nprocs %d" % nprocs, "end"]
    lines += ["%basis", '  Basis "%s"' % basis]
    if ecp:
        lines.append('  ECP "def2-ECP"')
    lines.append("end")
    lines += ["%scf"] + ["  " + s for s in scf] + ["end"]
    if geom:
        lines += ["%geom"] + ["  " + g for g in GEOM] + ["end"]
    if prints:
        lines += ["%output"] + PRINTS + ["end"]
    lines.append("* xyzfile %d %d %s" % (charge, mult, xyz))
    return "\n".join(lines) + "\n"


def ce_complex():
    # Ce at the origin with nine oxygen donors, three bidentate nitrates and three waters.
    rnd = random.Random(9)
    atoms = [("Ce", 0.0, 0.0, 0.0)]
    for k in range(3):
        phi = 2 * math.pi * k / 3
        c, s = math.cos(phi), math.sin(phi)
        n = (3.05 * c, 3.05 * s, 0.35)
        o1 = (2.55 * c - 1.05 * s, 2.55 * s + 1.05 * c, 0.30)
        o2 = (2.55 * c + 1.05 * s, 2.55 * s - 1.05 * c, 0.30)
        o3 = (4.27 * c, 4.27 * s, 0.45)
        atoms += [("N",) + n, ("O",) + o1, ("O",) + o2, ("O",) + o3]
    for k in range(3):
        phi = 2 * math.pi * k / 3 + math.pi / 3
        c, s = math.cos(phi), math.sin(phi)
        z = -1.35 if k != 1 else 1.65
        o = (2.20 * c, 2.20 * s, z)
        h1 = (o[0] + 0.76 * c - 0.2 * s, o[1] + 0.76 * s + 0.2 * c, o[2] + 0.45)
        h2 = (o[0] + 0.40 * c + 0.6 * s, o[1] + 0.40 * s - 0.6 * c, o[2] - 0.55)
        atoms += [("O",) + o, ("H",) + h1, ("H",) + h2]
    return [(el, x + rnd.uniform(-0.02, 0.02), y + rnd.uniform(-0.02, 0.02), z + rnd.uniform(-0.02, 0.02))
            for el, x, y, z in atoms]


def acetic_acid():
    return [("C", -0.0085, 0.0, 0.0), ("C", 1.4933, 0.0, 0.0), ("O", 2.1002, 1.0531, 0.0),
            ("O", 2.0563, -1.2199, 0.0), ("H", 3.0187, -1.0986, 0.0), ("H", -0.3841, -1.0247, 0.0),
            ("H", -0.3826, 0.5143, 0.8857), ("H", -0.3826, 0.5143, -0.8857)]


def xyz_text(atoms, comment):
    rows = ["%d" % len(atoms), comment]
    rows += ["%-2s %14.8f %14.8f %14.8f" % a for a in atoms]
    return "\n".join(rows) + "\n"


def perturb(atoms, seed, scale):
    rnd = random.Random(seed)
    return [(el, x + rnd.uniform(-scale, scale), y + rnd.uniform(-scale, scale), z + rnd.uniform(-scale, scale))
            for el, x, y, z in atoms]


def header(name, inp):
    out = ["", "                                 *****************",
           "                                 * O   R   C   A *",
           "                                 *****************", "",
           "                         Program Version 5.0.4 -  RELEASE  -", "",
           "================================================================================",
           "                                       INPUT FILE",
           "================================================================================",
           "NAME = %s.inp" % name]
    for i, line in enumerate(inp.rstrip("\n").split("\n"), 1):
        out.append("|%3d> %s" % (i, line))
    out.append("|%3d> " % (i + 1))
    out += ["|%3d>                          ****END OF INPUT****" % (i + 2),
            "================================================================================", ""]
    return out


def scf_section(energy, cycles, n_orb_occ):
    ev = 27.211386245988
    out = ["", "               *****************************************************",
           "               *                     SUCCESS                       *",
           "               *           SCF CONVERGED AFTER %3d CYCLES          *" % cycles,
           "               *****************************************************", "",
           "----------------", "TOTAL SCF ENERGY", "----------------", "",
           "Total Energy       :     %22s Eh          %14.5f eV" % (energy, float(energy) * ev), ""]
    out += ["----------------", "ORBITAL ENERGIES", "----------------", "",
            "  NO   OCC          E(Eh)            E(eV) "]
    rnd = random.Random(n_orb_occ)
    e = -0.95
    for i in range(n_orb_occ + 4):
        occ = 2.0 if i < n_orb_occ - 1 else (1.0 if i == n_orb_occ - 1 else 0.0)
        if i == n_orb_occ:
            e += 0.11
        e += rnd.uniform(0.005, 0.03)
        out.append("%4d   %6.4f     %12.6f     %12.4f " % (i + 100, occ, e, e * ev))
    out.append("")
    return out


def charge_sections(atoms, seed):
    rnd = random.Random(seed)
    base = {"Ce": 1.45, "N": 0.62, "O": -0.48, "H": 0.36, "C": 0.10}
    mull = [base[a[0]] + rnd.uniform(-0.05, 0.05) for a in atoms]
    shift = sum(mull) / len(mull)
    mull = [m - shift for m in mull]
    loew = [0.6 * m for m in mull]
    hirsh = [0.3 * m for m in mull]
    out = ["-----------------------", "MULLIKEN ATOMIC CHARGES", "-----------------------"]
    out += ["%4d %-2s:%12.6f" % (i, a[0], q) for i, (a, q) in enumerate(zip(atoms, mull))]
    out += ["Sum of atomic charges:   %10.7f" % sum(mull), "", "----------------------",
            "LOEWDIN ATOMIC CHARGES", "----------------------"]
    out += ["%4d %-2s:%12.6f" % (i, a[0], q) for i, (a, q) in enumerate(zip(atoms, loew))]
    out += ["", "------------------", "HIRSHFELD ANALYSIS", "------------------", "",
            "Total integrated alpha density =     %12.6f" % 100.5, "Total integrated beta density  =     %12.6f" % 99.5,
            "", "  ATOM     CHARGE      SPIN    "]
    out += ["%4d %-2s %10.6f %10.6f" % (i, a[0], q, 0.0) for i, (a, q) in enumerate(zip(atoms, hirsh))]
    out += ["", "  TOTAL  %10.6f %10.6f" % (sum(hirsh), 1.0), ""]
    return out


def dipole(value):
    return ["-------------", "DIPOLE MOMENT", "-------------", "",
            "Magnitude (a.u.)       :      %.5f" % (value / 2.541746), "Magnitude (Debye)      :      %.5f" % value, ""]


def coords(atoms):
    out = ["---------------------------------", "CARTESIAN COORDINATES (ANGSTROEM)", "---------------------------------"]
    out += ["  %-2s %14.6f %14.6f %14.6f" % a for a in atoms]
    return out + [""]


def freq_sections(atoms, freqs, seed, imag_index=None):
    n = 3 * len(atoms)
    out = ["-----------------------", "VIBRATIONAL FREQUENCIES", "-----------------------", "",
           "Scaling factor for frequencies =  1.000000000  (already applied!)", ""]
    for i, f in enumerate(freqs):
        tag = " ***imaginary mode***" if f < 0 else ""
        out.append("%6d:%13.2f cm**-1%s" % (i, f, tag))
    out += ["", "", "------------", "NORMAL MODES", "------------", "",
            "These modes are the Cartesian displacements weighted by the diagonal matrix",
            "M(i,i)=1/sqrt(m[i]) where m[i] is the mass of the displaced atom",
            "Thus, these vectors are normalized but *not* orthogonal", ""]
    rnd = random.Random(seed)
    cols = []
    for m in range(n):
        if m < 6:
            cols.append([0.0] * n)
        elif m == imag_index:
            # Imaginary mode dominated by a rocking of the water ligands.
            v = [0.0] * n
            for a, atom in enumerate(atoms):
                w = 0.18 if atom[0] in ("O", "H") and a >= 13 else 0.03
                for k in range(3):
                    v[3 * a + k] = rnd.uniform(-w, w)
            cols.append(v)
        else:
            cols.append([rnd.uniform(-0.12, 0.12) for _ in range(n)])
    for start in range(0, n, 6):
        block = list(range(start, min(start + 6, n)))
        out.append("                 " + "".join("%-11d" % b for b in block).rstrip())
        for r in range(n):
            out.append("%6d    " % r + "".join("%11.6f" % cols[b][r] for b in block))
    return out + [""]


def thermo_sections(enthalpy, gibbs):
    return ["--------------------------", "THERMOCHEMISTRY AT 298.15K", "--------------------------", "",
            "Temperature         ... 298.15 K", "Pressure            ... 1.00 atm", "",
            "Total Enthalpy                    ...   %s Eh" % enthalpy, "",
            "Final Gibbs free energy         ...   %s Eh" % gibbs, ""]


def final_energy(energy):
    return ["-------------------------", "FINAL SINGLE POINT ENERGY    %s" % energy, "-------------------------", ""]


def footer():
    return ["", "                             ****ORCA TERMINATED NORMALLY****",
            "TOTAL RUN TIME: 0 days 1 hours 3 minutes 12 seconds 407 msec", ""]


def error_output(name, inp, message):
    out = header(name, inp) + [""] + message + ["", "ORCA finished by error termination in ORCA_main", ""]
    return "\n".join(out)


def opt_freq_output(name, inp, atoms, energy, enthalpy, gibbs, freqs, seed, imag=None):
    out = header(name, inp)
    out += scf_section(energy, 24 + seed % 7, 90)
    out += ["                    *******************************************************",
            "                    ***        THE OPTIMIZATION HAS CONVERGED     ***",
            "                    *******************************************************", ""]
    out += coords(atoms)
    out += charge_sections(atoms, seed) + dipole(9.12345 + seed * 0.01)
    out += freq_sections(atoms, freqs, seed, imag)
    out += thermo_sections(enthalpy, gibbs)
    out += final_energy(energy) + footer()
    return "\n".join(out)


def sp_output(name, inp, atoms, energy, seed):
    out = header(name, inp) + scf_section(energy, 18 + seed % 5, 90)
    out += charge_sections(atoms, seed) + dipole(8.5 + seed * 0.01)
    out += final_energy(energy) + footer()
    return "\n".join(out)


def freqs_for(atoms, first, seed):
    rnd = random.Random(seed)
    n = 3 * len(atoms)
    rest = sorted(rnd.uniform(30.0, 3700.0) for _ in range(n - 7))
    return [0.0] * 6 + [first] + rest


ENTRIES = []


def emit(job, inp, out, rnd_tag=None):
    d = os.path.join(FIXTURES, job)
    os.makedirs(d, exist_ok=True)
    stem = job if rnd_tag is None else "%s.%s" % (job, rnd_tag)
    with open(os.path.join(d, stem + ".inp"), "w") as f:
        f.write(inp)
    with open(os.path.join(d, stem + ".out"), "w") as f:
        f.write(out)
    ENTRIES.append((input_hash(inp), "fixtures/%s/%s.out" % (job, stem)))


def main():
    os.makedirs(SEED, exist_ok=True)
    ce = ce_complex()
    seed_name = "cn9_YICLED_0_nunpairedes_0_charge_0_xtb.xyz"
    with open(os.path.join(SEED, seed_name), "w") as f:
        f.write(xyz_text(ce, "cn9_YICLED conformer 0, xtb pre-optimized"))
    with open(os.path.join(SEED, "acetic_acid.xyz"), "w") as f:
        f.write(xyz_text(acetic_acid(), "acetic acid"))

    kw = "OPT FREQ PBE0 def2-SVP D4 RIJCOSX DEFGRID2 TightSCF"
    good_scf = ["AutotraH false", "MaxIter 500"]
    job = "cn9_YICLED_OPT_FREQ"

    inp = render(kw, good_scf + ["TightSCF true"], seed_name)
    emit(job, inp, error_output(job, inp, ["Unknown identifier in SCF block line 13:", "  Last token: TIGHTSCF."]),
         "tightscf")
    inp = render(kw, good_scf + ["ConvCriteria Tight"], seed_name)
    emit(job, inp, error_output(job, inp, ["Unknown identifier in SCF block line 13:", "  Last token: CONVCRITERIA."]),
         "convcriteria")

    chain = [(seed_name, job, -131.99, "-1543.61225634143420", "-1543.19163287421117", "-1543.27812765093319"),
             (job + "_distorted.xyz", job + "_removed", -85.19, "-1543.61231975520713", "-1543.19168702213054",
              "-1543.27796215803467"),
             (job + "_removed_distorted.xyz", job + "_removed2", 21.47, "-1543.61240716108832",
              "-1543.19175934420176", "-1543.27780081364127")]
    for k, (xyz, name, first, e, h, g) in enumerate(chain):
        inp = render(kw, good_scf, xyz)
        atoms = perturb(ce, 100 + k, 0.01)
        emit(name if k else job, inp,
             opt_freq_output(name, inp, atoms, e, h, g, freqs_for(ce, first, 200 + k), 300 + k, 6 if first < 0 else None),
             None if k == 0 else None)

    job2 = "capped_square_antiprismatic_1_OPT_FREQ"
    chain2 = [("capped_square_antiprismatic_1_0_nunpairedes_0_charge_0_xtb.xyz", job2, -81.23, "-1543.61019337420551",
               "-1543.18958116300221", "-1543.27601334811905"),
              (job2 + "_distorted.xyz", job2 + "_removed", -14.79, "-1543.61027106931047", "-1543.18963900126417",
               "-1543.27590728102262")]
    ce2 = perturb(ce, 77, 0.15)
    for k, (xyz, name, first, e, h, g) in enumerate(chain2):
        inp = render(kw, good_scf, xyz)
        emit(name, inp, opt_freq_output(name, inp, perturb(ce2, 400 + k, 0.01), e, h, g,
                                        freqs_for(ce2, first, 500 + k), 600 + k, 6))
    with open(os.path.join(SEED, chain2[0][0]), "w") as f:
        f.write(xyz_text(ce2, "capped_square_antiprismatic_1 conformer, xtb pre-optimized"))

    sp_kw = "SP wB97M-V def2-SVPD TightSCF"
    conformers = [("cn9_YICLED", "cn9_YICLED_OPT_FREQ_removed2.xyz", "-1544.53545294825108"),
                  ("tri_tri_mer_capped", "tri_tri_mer_capped_OPT_FREQ.xyz", "-1544.53675364646824"),
                  ("tricapped_trigonal_prismatic", "tricapped_trigonal_prismatic_OPT_FREQ.xyz", "-1544.53704995156204"),
                  ("capped_square_antiprismatic_0", "capped_square_antiprismatic_0_OPT_FREQ.xyz",
                   "-1544.53720655504048"),
                  ("capped_square_antiprismatic_1", "capped_square_antiprismatic_1_OPT_FREQ_removed.xyz",
                   "-1544.53307801377878")]
    for k, (label, xyz, e) in enumerate(conformers):
        name = label + "_SP"
        inp = render(sp_kw, good_scf, xyz, geom=False, basis="def2-SVPD")
        emit(name, inp, sp_output(name, inp, perturb(ce, 700 + k, 0.05), e, 800 + k))
        bad = render("SP wB97M-V def2-SVPD VV10 TightSCF", good_scf, xyz, geom=False, basis="def2-SVPD")
        emit(name, bad, error_output(name, bad, ["INPUT ERROR", "UNRECOGNIZED OR DUPLICATED KEYWORD(S) IN SIMPLE INPUT LINE",
                                                 "   VV10"]), "vv10")

    aa = "acetic_acid_OPT_FREQ"
    inp = render("OPT FREQ B3LYP 6-31G(d) TightSCF", ["MaxIter 500"], "acetic_acid.xyz", geom=False, basis="6-31G(d)",
                 mult=1, nprocs=8, ecp=False, prints=False)
    out = header(aa, inp) + scf_section("-229.01234567890123", 14, 16)
    out += ["                    ***        THE OPTIMIZATION HAS CONVERGED     ***", ""]
    out += coords(acetic_acid()) + charge_sections(acetic_acid(), 5) + dipole(1.74211)
    out += freq_sections(acetic_acid(), freqs_for(acetic_acid(), 62.18, 6), 7)
    out += thermo_sections("-228.90802911", "-228.93401544") + final_energy("-229.01234567890123") + footer()
    emit(aa, inp, "\n".join(out))

    with open(os.path.join(ROOT, "fixtures.map"), "w") as f:
        f.write("# sha256(normalized input) -> fixture output, relative to this file\n")
        for h, path in ENTRIES:
            f.write("%s %s\n" % (h, path))
    print("wrote %d fixtures" % len(ENTRIES))


if __name__ == "__main__":
    sys.exit(main())
