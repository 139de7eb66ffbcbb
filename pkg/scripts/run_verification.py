#!/usr/bin/env python3
"""Run the shipped verification suite and print one line per check.

Equivalent to ``darbouxkit verify --all`` with a human-oriented table;
exits nonzero if any check fails.
"""

import sys

from darbouxkit import run_checks


def main() -> int:
    result = run_checks()
    width = max(len(r["check"]) for r in result["checks"])
    for report in result["checks"]:
        status = "PASS" if report["pass"] else "FAIL"
        bound = ">=" if report.get("mode") == "min" else "<="
        print(
            f"[{status}] {report['check']:<{width}}  "
            f"measured {report['max_residual']:.3e} {bound} {report['tolerance']:.3e}"
        )
    print(f"seed {result['seed']}  overall: {'PASS' if result['pass'] else 'FAIL'}")
    return 0 if result["pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
