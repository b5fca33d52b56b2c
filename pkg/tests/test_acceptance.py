"""Acceptance criteria at their stated tolerances, full size (no quick mode).

Each test prints one PASS/FAIL line. Run directly for the report alone:

    python tests/test_acceptance.py
"""

import sys

import pytest

from upqi.verify import CHECKS

NAMES = {
    "1": "oracle_equivalence",
    "2": "commutation_identity",
    "3": "fock_equivalence",
    "4": "snr_gamma_limits",
    "5": "sensitivity_asymptotics",
    "6": "noiseless_round_trips",
    "7": "published_formula_errata",
    "8": "monte_carlo_consistency",
    "9": "deterministic_image_output",
}


@pytest.mark.slow
@pytest.mark.parametrize("key", list(CHECKS), ids=[f"{k}-{NAMES[k]}" for k in CHECKS])
def test_criterion(key, capsys):
    result = CHECKS[key](False)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.line()


if __name__ == "__main__":
    failed = 0
    for fn in CHECKS.values():
        res = fn(False)
        print(res.line(), flush=True)
        failed += res.passed is False
    sys.exit(1 if failed else 0)
