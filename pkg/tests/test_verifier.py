import pytest

from errors import MetricSolverError, VerificationError
from services import goldens, verifier
from services.verifier import CHECKS, run_verification


@pytest.mark.parametrize("name", sorted(goldens.hbar_identities()))
def test_ordering_identities(name):
    assert goldens.hbar_identities()[name].is_zero()


@pytest.mark.parametrize(
    "check",
    [
        verifier.check_metric_goldens,
        verifier.check_general_rhs,
        verifier.check_uncorrected_q3_rejected,
        verifier.check_commutator_identities,
        verifier.check_energy_formula,
        verifier.check_observables,
        verifier.check_classical,
    ],
)
def test_exact_checks_pass(check):
    check()


def test_summary_collects_failures():
    def broken():
        raise MetricSolverError("no solution in ansatz space", order=3)

    def crashing():
        raise RuntimeError("boom")

    summary = run_verification((("ok", lambda: None), ("broken", broken), ("crashing", crashing)))
    assert not summary.ok
    assert [r.name for r in summary.failures] == ["broken", "crashing"]
    assert summary.failures[0].detail == "order 3: no solution in ansatz space"
    assert summary.lines()[0].startswith("PASS ok")
    with pytest.raises(VerificationError) as info:
        summary.raise_for_failures()
    assert len(info.value.failures) == 2


def test_check_names_are_unique():
    names = [name for name, _ in CHECKS]
    assert len(names) == len(set(names))
