import math
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import settings

from quditqkd import protocol
from quditqkd.channel import depolarizing, mismatch_joint
from quditqkd.galois import field

# Property suites: fixed derandomized profile so every run draws the same cases.
settings.register_profile("repro", derandomize=True, max_examples=200, deadline=None)
settings.load_profile("repro")

MC_ROUNDS = 100_000
MC_SEEDS = {"A": 101, "B": 202, "C": 303}


@lru_cache(maxsize=None)
def mc_transcript(scheme: str, p: float, n: int = 2, rounds: int = MC_ROUNDS) -> protocol.Transcript:
    """Session-wide cache of the fixed-seed Monte Carlo runs."""
    cfg = protocol.ProtocolConfig(scheme, n, rounds, depolarizing(p, field(n)), 0.5, MC_SEEDS[scheme])
    return protocol.run(cfg)


def within(x: float, mean: float, var_per_trial: float, trials: int, k: float = 3.0) -> bool:
    return abs(x - mean) <= k * math.sqrt(var_per_trial / trials) + 1e-12


def summary_sigmas(channel, m: int) -> dict:
    """Standard errors of the e_c, e_a, e_raw estimators on a sample of m rounds."""
    N, n = channel.N, channel.n
    J = mismatch_joint(channel)
    ka = (N - 1) / (N - 2)
    alpha = 1.0 / n
    beta = (n - 1) * N / ((N - 1) * (N - 2)) * ka / n
    out = {}
    for name, wx, wy in (("e_c", 1.0, 0.0), ("e_a", 0.0, ka), ("e_raw", alpha, beta)):
        vals = np.array([[wy * i + wx * j for j in (0, 1)] for i in (0, 1)])
        mean = (J * vals).sum()
        out[name] = math.sqrt(((J * vals ** 2).sum() - mean ** 2) / m)
    return out


# ---------------------------------------------------------------- acceptance report

ACCEPTANCE: dict[int, list[tuple[str, bool]]] = {}


@pytest.fixture
def record():
    def _record(criterion: int, detail: str, ok: bool) -> bool:
        ACCEPTANCE.setdefault(criterion, []).append((detail, bool(ok)))
        return bool(ok)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE):
        items = ACCEPTANCE[crit]
        ok = all(passed for _, passed in items)
        terminalreporter.write_line(f"criterion {crit}: {'PASS' if ok else 'FAIL'}  ({len(items)} checks)")
        for detail, passed in items:
            if not passed:
                terminalreporter.write_line(f"    failed: {detail}")
