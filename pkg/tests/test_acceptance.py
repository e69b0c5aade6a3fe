"""Acceptance criteria 1-10 at full size, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -s`` or directly with
``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import sys

import pytest

from cornerlab import suites
from cornerlab.optcore import SolverConfig

CFG = SolverConfig(seed=42)

# criterion number -> (label, suite thunk, runtime limit in seconds or None)
CRITERIA = {
    1: ("builtin reference table", lambda: suites.builtin_table_suite(CFG), 30.0),
    2: ("parameter duality, 50 corners", lambda: suites.duality_suite(50, 42, CFG), 120.0),
    3: ("reflexivity, 20 corners x 50 rays", lambda: suites.reflexivity_suite(20, 50, 42, CFG), 180.0),
    4: ("max-entropy state, 20 corners x 100 states", lambda: suites.max_entropy_suite(20, 100, 42, CFG), None),
    5: ("entropy splitting, 5 corners x 20 p", lambda: suites.splitting_suite(20, 42, CFG), None),
    6: ("classical bridge", lambda: suites.bridge_suite(20, 42, CFG), None),
    7: ("chi_f = omega_f on criteria 1 and 6 systems", lambda: suites.fractional_duality_suite(CFG), None),
    8: ("tensor multiplicativity and product entropy", lambda: suites.tensor_suite(20, 20, 42, CFG), None),
    9: ("rate and capacity sequences", lambda: suites.sequences_suite(CFG), None),
    10: ("numerical hygiene, 100 instances", lambda: suites.numerics_suite(100, 42), None),
}


def evaluate(number: int):
    label, thunk, limit = CRITERIA[number]
    res = thunk()
    in_time = limit is None or res.seconds < limit
    ok = res.passed and in_time
    timing = "" if limit is None else f" [limit {limit:.0f}s]"
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {label} :: {res.line()}{timing}"
    return ok, line, res


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    ok, line, res = evaluate(number)
    with capsys.disabled():
        print("\n" + line)
    assert res.passed, line
    assert ok, f"runtime limit exceeded: {line}"


def main() -> int:
    failures = 0
    for number in sorted(CRITERIA):
        ok, line, _ = evaluate(number)
        print(line, flush=True)
        failures += not ok
    print(f"{len(CRITERIA) - failures}/{len(CRITERIA)} criteria passed")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
