from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from rdlab.scales import LengthSequence, SupernaturalScale

settings.register_profile("rdlab", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("rdlab")

DYADIC = SupernaturalScale((1, 2, 4, 8, 16, 32))
MIXED = SupernaturalScale((1, 2, 6, 12, 24))


@pytest.fixture(params=["dyadic", "mixed"])
def scale(request) -> SupernaturalScale:
    return DYADIC if request.param == "dyadic" else MIXED


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


def default_lengths(scale: SupernaturalScale, omega: float = 1.0) -> LengthSequence:
    return LengthSequence.default(scale.M, omega=omega)


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
