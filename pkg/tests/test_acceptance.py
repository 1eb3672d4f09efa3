"""Acceptance gate: the seven shipped criteria, one test and one printed line each.

Run with -v (test ids name the criteria) or -s (to see the PASS/FAIL lines and
timings even when green). Each criterion enforces its own runtime budget; the
details of any failure are carried into the assertion message.
"""

from orthospec.acceptance import run_criterion


def _gate(number):
    res = run_criterion(number)
    status = "PASS" if res.passed else "FAIL"
    line = f"criterion {res.number} ({res.name}): {status} [{res.elapsed:.1f}s]"
    print(line, flush=True)
    assert res.passed, "\n".join([line] + res.failures)


def test_criterion_1_weak_threshold():
    _gate(1)


def test_criterion_2_closed_form_overlap():
    _gate(2)


def test_criterion_3_optimality_consistency():
    _gate(3)


def test_criterion_4_prediction_vs_simulation():
    _gate(4)


def test_criterion_5_iteration_tracking():
    _gate(5)


def test_criterion_6_extreme_eigenvalues():
    _gate(6)


def test_criterion_7_analytic_properties():
    _gate(7)
