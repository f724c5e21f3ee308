import pytest

_ACCEPTANCE_MODULE = "test_acceptance"


def pytest_runtest_logreport(report):
    """Print one PASS/FAIL line per acceptance criterion."""
    if report.when != "call":
        return
    module = report.nodeid.split("::")[0]
    if _ACCEPTANCE_MODULE not in module:
        return
    name = report.nodeid.split("::")[-1]
    outcome = "PASS" if report.passed else "FAIL"
    print(f"\nACCEPTANCE {name}: {outcome}")


@pytest.fixture
def registry():
    from helpers import make_registry

    return make_registry()
