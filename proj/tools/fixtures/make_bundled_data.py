#!/usr/bin/env python3
"""Regenerate the bundled catalog fixtures under data/.

The curated member stars (data/curated/members.csv) are mixed with synthetic
field stars and a handful of deliberately malformed rows. Output is fully
determined by the seed below; rerunning must not change any checked-in file.

Synthetic identifiers are kept outside the real catalog ranges
(HIP >= 130001, HR >= 10001) so they can never be mistaken for real stars.
"""
import csv
import math
import pathlib
import random

SEED = 20190712
ROOT = pathlib.Path(__file__).resolve().parents[2]
DATA = ROOT / "data"

HIP_ROWS = 5000
GAIA_ROWS = 3000
GAIA_LINK_MIN_VMAG = 4.0   # members fainter than this also appear in the Gaia-like file


def sphere_point(rng):
    ra = rng.uniform(0.0, 360.0)
    dec = math.degrees(math.asin(rng.uniform(-1.0, 1.0)))
    return ra, dec


def fmt(x, digits):
    return f"{x:.{digits}f}"


def main():
    rng = random.Random(SEED)
    members = list(csv.DictReader(open(DATA / "curated" / "members.csv", encoding="utf-8")))

    # ---- Hipparcos-like -------------------------------------------------
    hip_rows = []
    for m in members:
        hip_rows.append([m["hip"], m["ra"], m["dec"], m["plx"], m["vmag"]])

    malformed = [
        ["139001", "12.5", "abc", "4.1", "7.0"],        # unparseable dec
        ["139002", "x7.25", "10.0", "4.1", "7.0"],      # unparseable ra
        ["139003", "100.0", "20.0", "4..1", "7.0"],     # unparseable parallax
        ["139004", "100.0", "20.0", "4.1", "seven"],    # unparseable magnitude
        ["139005", "45.0", "95.0", "3.2", "8.1"],       # dec out of range
        ["139006", "46.0", "95.0", "3.2", "8.1"],
        ["139007", "47.0", "-91.5", "3.2", "8.1"],
        ["139008", "800.0", "12.0", "3.2", "8.1"],      # ra out of range
        ["139009", "-400.0", "12.0", "3.2", "8.1"],
        ["139010", "10.0", "12.0", "3.2", "nan"],       # non-finite magnitude
        ["139011", "10.0", "12.0", "3.2", "inf"],
        ["139012", "10.0", "12.0", "3.2"],              # wrong field count
        ["139013", "10.0", "12.0", "3.2", "8.0", "1"],
        ["", "10.0", "12.0", "3.2", "8.0"],             # missing id
    ]
    wrapped = [
        ["139101", "-10.0", "5.0", "6.0", "7.5"],       # wraps to 350
        ["139102", "-359.5", "-5.0", "6.0", "7.5"],     # wraps to 0.5
        ["139103", "-180.0", "33.0", "6.0", "7.5"],     # wraps to 180
    ]

    n_synth = HIP_ROWS - len(hip_rows) - len(malformed) - len(wrapped)
    synth = []
    for i in range(n_synth):
        hip = 130001 + i
        ra, dec = sphere_point(rng)
        u = rng.random()
        if u < 0.03:
            plx = fmt(-rng.uniform(0.0, 2.0), 2) if rng.random() < 0.8 else "0.00"
        elif u < 0.04:
            plx = ""
        else:
            plx = fmt(math.exp(rng.uniform(math.log(0.8), math.log(60.0))), 2)
        vmag = fmt(rng.uniform(5.0, 9.5), 2)
        synth.append([str(hip), fmt(ra, 5), fmt(dec, 5), plx, vmag])

    body = hip_rows + synth + malformed + wrapped
    rng.shuffle(body)
    with open(DATA / "hipparcos.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("hip,ra,dec,plx,vmag\n")
        for row in body:
            fh.write(",".join(row) + "\n")

    # ---- Gaia-like (extended with the optional hip link column) --------
    gaia = []
    linked = [m for m in members if float(m["vmag"]) > GAIA_LINK_MIN_VMAG]
    for k, m in enumerate(linked):
        source_id = 4000000000000000000 + 7919 * (k + 1)
        g = float(m["vmag"]) - 0.12
        plx = float(m["plx"]) * 1.004
        gaia.append([str(source_id), m["ra"], m["dec"], fmt(plx, 4), fmt(g, 4), m["hip"]])
    gaia_malformed = [
        ["4100000000000000001", "10.0", "-95.0", "1.0", "12.0", ""],
        ["4100000000000000002", "10.0", "12.0", "1.0", "", ""],
        ["4100000000000000003", "ten", "12.0", "1.0", "12.0", ""],
    ]
    n_gsynth = GAIA_ROWS - len(gaia) - len(gaia_malformed)
    for i in range(n_gsynth):
        source_id = 5000000000000000000 + 104729 * (i + 1)
        ra, dec = sphere_point(rng)
        u = rng.random()
        if u < 0.05:
            plx = fmt(-rng.uniform(0.0, 1.5), 4)
        else:
            plx = fmt(math.exp(rng.uniform(math.log(0.2), math.log(20.0))), 4)
        g = fmt(rng.uniform(7.0, 13.0), 4)
        gaia.append([str(source_id), fmt(ra, 6), fmt(dec, 6), plx, g, ""])
    gaia += gaia_malformed
    rng.shuffle(gaia)
    with open(DATA / "gaia.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("source_id,ra,dec,parallax,phot_g_mean_mag,hip\n")
        for row in gaia:
            fh.write(",".join(row) + "\n")

    # ---- crossref --------------------------------------------------------
    xref = [[m["hr"], m["hip"]] for m in members]
    synth_hips = [int(r[0]) for r in synth]
    for i in range(800):
        xref.append([str(10001 + i), str(synth_hips[i])])
    xref.append(["10900", "199999"])        # HIP with no catalog row
    xref.append([members[0]["hr"], members[0]["hip"]])   # identical duplicate
    xref.append(["10901", "notanumber"])    # malformed
    with open(DATA / "crossref.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("hr,hip\n")
        for row in xref:
            fh.write(",".join(row) + "\n")


if __name__ == "__main__":
    main()
