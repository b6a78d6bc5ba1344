"""Tour of the command-line interface.

Runs each subcommand against the shipped configs: verify a flow, reduce
it to normal form, classify a raw matrix, evaluate a saved chain, export
a trajectory as CSV, and build a collar chart.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"


def run(*argv):
    cmd = [sys.executable, "-m", "hkvf.cli", *argv]
    print(f"$ hkvf {' '.join(argv)}")
    proc = subprocess.run(cmd, capture_output=True, text=True)
    for line in proc.stdout.splitlines():
        print(f"  {line}")
    if proc.stderr:
        for line in proc.stderr.splitlines():
            print(f"  ! {line}")
    print(f"  (exit {proc.returncode})")
    print()
    return proc


def main():
    run("verify", "--config", str(CONFIGS / "rot_sphere.toml"))

    # counterexample: drift into the puncture escapes at t = 1
    run("verify", "--surface", "punctured_plane", "--lambda", "1",
        "--field", "1,0", "--seed", "-1,0")

    with tempfile.TemporaryDirectory() as tmp:
        chain_file = Path(tmp) / "reduction.json"
        run("classify", "--config", str(CONFIGS / "tra_half_plane_open.toml"),
            "--out", str(chain_file))
        data = json.loads(chain_file.read_text())
        print(f"  saved reduction: target {data['target']}, "
              f"rescale {data['rescale']}")
        print()

        run("map", "--chain", str(chain_file), "--apply", "2,3", "--check")

        csv_file = Path(tmp) / "orbit.csv"
        run("flow", "--surface", "plane", "--field", "rotational",
            "--seed", "1,0", "--horizon", "3.14159", "--out", str(csv_file))
        print("  first lines of the trajectory:")
        for line in csv_file.read_text().splitlines()[:4]:
            print(f"    {line}")
        print()

    run("mobius", "--matrix", "1 0 0.7 0 0 0 1 0")

    run("collar", "--surface", "closed_annulus", "--rho", "0.5",
        "--lambda", "1", "--field", "rotational", "--point", "1,0")


if __name__ == "__main__":
    main()
