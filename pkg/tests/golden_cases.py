"""CLI invocations whose JSON output is frozen under tests/golden.

Run this file directly to regenerate the golden files after an intentional change.
"""

import subprocess
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
FIXTURES = HERE / "fixtures"
GOLDEN = HERE / "golden"

# name -> (argv after "cornfield", expected exit code)
CASES = {
    "example1_ingest": (["ingest", str(FIXTURES / "example1.csv"), "--format", "json"], 0),
    "example1_assess_rd_eu": (
        ["assess", "--scale", "rd", "--observed", "0.013%", "--k", "2", "--rd-eu", "0.012%", "--format", "json"],
        1,
    ),
    "example1_assess_rr": (
        ["assess", "--scale", "rr", "--observed", "1.7", "--k", "2", "--rr-eu", "2.6", "--rr-ud", "2.6",
         "--format", "json"],
        0,
    ),
    "example1_assess_sqrt": (
        ["assess", "--scale", "rd", "--observed", "0.012%", "--k", "2", "--average-null", "--rd-eu", "1%",
         "--rd-ud-e1", "0.5%", "--rd-ud-e0", "0.5%", "--format", "json"],
        1,
    ),
    "example2_ingest": (["ingest", str(FIXTURES / "example2.csv"), "--format", "json"], 0),
    "example2_thresholds_rr": (
        ["thresholds", "--scale", "rr", "--observed", "10.7", "--k", "3", "--average-null", "--format", "json"],
        0,
    ),
    "example2_thresholds_rd": (
        ["thresholds", "--scale", "rd", "--observed", "0.094%", "--k", "3", "--format", "json"],
        0,
    ),
    "example2_thresholds_rd_monotone": (
        ["thresholds", "--scale", "rd", "--observed", "0.094%", "--k", "3", "--monotone", "--format", "json"],
        0,
    ),
}


def run_case(name: str) -> subprocess.CompletedProcess:
    argv, _ = CASES[name]
    # fixture paths are passed relative to the tests directory so output is location independent
    argv = [a.replace(str(HERE) + "/", "") for a in argv]
    return subprocess.run([sys.executable, "-m", "cornfield", *argv], cwd=HERE, capture_output=True)


def main() -> None:
    GOLDEN.mkdir(exist_ok=True)
    for name in CASES:
        out = run_case(name)
        (GOLDEN / f"{name}.json").write_bytes(out.stdout)
        print(f"{name}: exit {out.returncode}, {len(out.stdout)} bytes")


if __name__ == "__main__":
    main()
