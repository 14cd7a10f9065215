"""Shared fixtures: random network generation and the acceptance report."""

import numpy as np
import pytest

from nhtop import netmodel

_ACCEPTANCE: list[tuple[int, str, bool, str]] = []


@pytest.fixture
def record_criterion():
    """Collect one pass/fail line per acceptance criterion for the summary."""

    def _record(number: int, name: str, ok: bool, detail: str = ""):
        _ACCEPTANCE.append((number, name, bool(ok), detail))

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number, name, ok, detail in sorted(_ACCEPTANCE):
        status = "PASS" if ok else "FAIL"
        line = f"criterion {number:2d}  {name:<38s} {status}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)


def random_network(rng: np.random.Generator, max_sites: int = 6) -> netmodel.NetworkSpec:
    """A valid random network: site 1 is the qubit, no qubit-qubit edges."""
    n = int(rng.integers(2, max_sites + 1))
    sites = [netmodel.SiteSpec(netmodel.QUBIT, float(rng.uniform(-1, 1)))]
    for _ in range(n - 1):
        if rng.random() < 0.25:
            sites.append(netmodel.SiteSpec(netmodel.QUBIT, float(rng.uniform(-1, 1))))
        else:
            sites.append(
                netmodel.SiteSpec(
                    netmodel.CAVITY, float(rng.uniform(-1, 1)), float(rng.uniform(0, 5))
                )
            )
    edges = []
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if sites[i - 1].kind == netmodel.QUBIT and sites[j - 1].kind == netmodel.QUBIT:
                continue
            if j == i + 1 or rng.random() < 0.3:  # keep chains connected, sprinkle extras
                edges.append((i, j, float(rng.uniform(-2, 2))))
    return netmodel.NetworkSpec(tuple(sites), tuple(edges))
