"""The fourteen acceptance criteria at their stated tolerances.

Each criterion prints one ``PASS``/``FAIL`` line (collected again in the
terminal summary).  Criteria that the method does not meet as stated are
strict xfails, so an unexpected pass is reported too.  Set
``BHM_ACCEPTANCE_LEVEL=fast`` for the 4x-reduced node counts.
"""

import os
import time

import pytest

from bhm.harness.validation import CRITERIA, check_sign_convention, flipped_sign, validate_suite

LEVEL = os.environ.get("BHM_ACCEPTANCE_LEVEL", "full")

KNOWN_FAILURES = {
    6: "the relation holds without the factor e^{i pi/4}/sqrt(8 pi k); with it the error is 0.45",
    7: "Phi and G remainders decay like R^-2, so the R vs 2R ratio is 0.25, below the window",
    9: "clamped unit circle at k = 2 pi: every indicator peaks at the center, distance 1 from the boundary",
    12: "sup |I11 - I1| does not decrease when the array radius doubles (ratio about 1.1)",
}


def _line(result):
    return f"{'PASS' if result.passed else 'FAIL'}  {result.name}: {result.value:.6g} ({result.tolerance}) {result.detail}"


def _params():
    for n in sorted(CRITERIA):
        marks = [pytest.mark.slow]
        if n in KNOWN_FAILURES:
            marks.append(pytest.mark.xfail(strict=True, reason=KNOWN_FAILURES[n]))
        yield pytest.param(n, marks=marks, id=f"criterion{n:02d}")


@pytest.mark.parametrize("n", list(_params()))
def test_criterion(n, acceptance_log):
    t = time.perf_counter()
    result = CRITERIA[n](LEVEL)
    line = _line(result) + f" [{time.perf_counter() - t:.1f} s]"
    acceptance_log.append(line)
    print(line)
    assert result.passed, line


def test_sign_audit_and_negative_control(acceptance_log):
    clean = check_sign_convention(LEVEL)
    with flipped_sign(3):
        mutated = check_sign_convention(LEVEL)
    acceptance_log.append(_line(clean))
    print(_line(clean))
    assert clean.passed
    assert not mutated.passed and "I3" in mutated.detail


@pytest.mark.slow
def test_fast_suite_budget_and_failure_set():
    t = time.perf_counter()
    report = validate_suite("fast")
    elapsed = time.perf_counter() - t
    failed = {int(c.name.split(":")[0].split()[-1]) for c in report.checks if not c.passed}
    assert failed == set(KNOWN_FAILURES)
    assert elapsed < 60, f"fast suite took {elapsed:.1f} s"


def test_mutation_hook_fails_suite():
    report = validate_suite("fast", mutation=3, criteria=[1])
    assert not report.checks[0].passed
