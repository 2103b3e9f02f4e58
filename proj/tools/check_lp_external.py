#!/usr/bin/env python3
"""Export the two reference MIPs with the CLI and solve them with HiGHS.

Usage: check_lp_external.py NNBOUND_BINARY DATA_DIR
Exit 0 on agreement, 1 on mismatch, 77 when highspy is not installed.
"""
import pathlib
import subprocess
import sys
import tempfile

try:
    import highspy
except ImportError:
    print("highspy not installed; skipping")
    sys.exit(77)

CASES = [
    ("etotal.json", "etotal_query.json", 1, 1.0),
    ("fig1.json", "fig1_query.json", 2, 0.4),
]


def solve(path):
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    if h.readModel(str(path)) != highspy.HighsStatus.kOk:
        raise RuntimeError(f"HiGHS could not read {path}")
    h.run()
    if h.getModelStatus() != highspy.HighsModelStatus.kOptimal:
        raise RuntimeError(f"{path}: {h.getModelStatus()}")
    return h.getInfo().objective_function_value


def main():
    binary, data = sys.argv[1], pathlib.Path(sys.argv[2])
    ok = True
    with tempfile.TemporaryDirectory() as tmp:
        for net, query, layer, want in CASES:
            out = pathlib.Path(tmp) / f"{net}.lp"
            subprocess.run([binary, "export-mip", "--network", str(data / net), "--query", str(data / query),
                            "--layer", str(layer), "--alpha", "zero", "--out", str(out)], check=True)
            got = solve(out)
            good = abs(got - want) <= 1e-8
            ok &= good
            print(f"{'ok' if good else 'MISMATCH'} {net} layer {layer}: {got:.12g} (expected {want})")
    sys.exit(0 if ok else 1)


if __name__ == "__main__":
    main()
