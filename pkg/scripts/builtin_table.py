"""Print the builtin-family reference table, optionally for larger d than the acceptance run."""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

from cornerlab.cli import _table
from cornerlab.optcore import SolverConfig
from cornerlab.suites import BUILTIN_FAMILIES, builtin_rows


@dataclass
class TableConfig:
    families: list = field(default_factory=lambda: list(BUILTIN_FAMILIES))
    seed: int = 42


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("families", nargs="*", help="e.g. ci:5 t:5 s:5 (default: the acceptance set)")
    a = p.parse_args(argv)
    cfg = TableConfig(families=a.families or list(BUILTIN_FAMILIES))
    rows = builtin_rows(cfg.families, SolverConfig(seed=cfg.seed))
    print(_table(rows))
    return 0 if all(r.passed for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
