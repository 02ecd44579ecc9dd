#!/usr/bin/env python3
"""Run the CLI end to end and validate every report it writes against the schema."""
import json
import shutil
import subprocess
import sys
from pathlib import Path

import jsonschema


def run(cli, *args):
    proc = subprocess.run([cli, *args], capture_output=True, text=True)
    if proc.returncode != 0:
        sys.exit(f"{' '.join(args)} exited {proc.returncode}: {proc.stderr}")


def main():
    cli, schema_path, work = sys.argv[1], Path(sys.argv[2]), Path(sys.argv[3])
    schema = json.loads(schema_path.read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)

    shutil.rmtree(work, ignore_errors=True)
    data = work / "data"
    run(cli, "simulate", "--n", "60", "--p", "25", "--scheme", "grid2d", "--delta", "2",
        "--T", "30", "--seed", "11", "--out", str(data))
    inputs = ["--values", str(data / "values.csv"), "--locations", str(data / "locations.csv")]

    run(cli, "detect", *inputs, "--mc-reps", "200", "--out", str(work / "detect"))
    run(cli, "detect", *inputs, "--statistic", "plain", "--stat", "max", "--out", str(work / "plain"))
    run(cli, "detect", *inputs, "--stat", "none", "--out", str(work / "nostat"))
    run(cli, "recover", *inputs, "--report", str(work / "detect" / "report.json"),
        "--out", str(work / "recover"))
    run(cli, "recover", *inputs, "--tau", "30", "--method", "bh", "--out", str(work / "bh"))
    run(cli, "recover", *inputs, "--tau", "30", "--method", "fsda0", "--out", str(work / "fsda0"))

    failures = 0
    for report in sorted(work.glob("*/report.json")):
        doc = json.loads(report.read_text())
        errors = list(validator.iter_errors(doc))
        for err in errors:
            print(f"{report}: {err.json_path}: {err.message}")
        failures += len(errors)
        if "provenance" not in doc:
            failures += 1
        print(f"{report.parent.name}: {'ok' if not errors else 'INVALID'}")

    # The schema must reject a report without provenance.
    stripped = json.loads((work / "detect" / "report.json").read_text())
    del stripped["provenance"]
    if validator.is_valid(stripped):
        print("schema accepted a report without provenance")
        failures += 1
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
