"""Run the ten acceptance criteria outside pytest and optionally save a JSON record."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from test_acceptance import CRITERIA, evaluate  # noqa: E402

from cornerlab.cli import clean  # noqa: E402


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--only", type=int, nargs="*", help="criterion numbers to run")
    p.add_argument("--json", help="write per-criterion metrics here")
    a = p.parse_args(argv)
    record, failures = {}, 0
    for number in a.only or sorted(CRITERIA):
        ok, line, res = evaluate(number)
        print(line, flush=True)
        failures += not ok
        record[number] = {"passed": ok, "seconds": res.seconds, "metrics": res.metrics}
    if a.json:
        Path(a.json).write_text(json.dumps(clean(record), indent=2, sort_keys=True))
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
