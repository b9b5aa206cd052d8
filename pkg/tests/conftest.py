import pytest

from optoscatter.params import SystemParams


@pytest.fixture
def fig3():
    """Display-scale operating point of the cooling map."""
    return SystemParams(g=2, kappa=7, gamma=0.05, chi=0.1, omega_drive=1, delta_cav=0, delta_atom=1)


@pytest.fixture
def scaled():
    """Same structure at weak drive and coupling, where the oracle should agree."""
    return SystemParams(g=2, kappa=7, gamma=0.05, chi=0.02, omega_drive=0.1, delta_cav=0, delta_atom=1)


def pytest_configure(config):
    config.acceptance_lines = []


@pytest.fixture
def criterion(request, capsys):
    """Record one pass/fail line; all lines are repeated in the terminal summary."""

    def log(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} | {detail}"
        request.config.acceptance_lines.append(line)
        with capsys.disabled():
            print(f"\n{line}")
        return ok

    return log


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if config.acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(config.acceptance_lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
