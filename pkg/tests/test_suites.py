import math

import numpy as np
import pytest

from ellax.errors import AccuracyError, DomainError
from ellax.suites import SUITES, Record, Recorder, random_balanced, run_suite


def test_record_comparisons():
    assert Record("a", 1e-9, 1e-8).passed
    assert not Record("a", 1e-7, 1e-8).passed
    assert Record("neg", 0.5, 1e-3, lower=True).passed
    assert not Record("neg", 1e-6, 1e-3, lower=True).passed
    assert not Record("nan", math.nan, 1.0).passed
    assert not Record("err", None, 1.0, error="boom").passed
    assert Record("a", 0.0, 1.0).to_dict()["comparison"] == "<="
    assert "seconds" in Record("a", 0.0, 1.0).to_dict(timing=True)


def test_recorder_captures_numeric_errors_and_overrides():
    rec = Recorder("case", {"strict": 1e-20})

    def fails():
        raise AccuracyError("no convergence")

    rec.add("broken", 1.0, fails)
    rec.add("strict", 1e-8, lambda: 1e-10)
    broken, strict = rec.records
    assert broken.name == "case/broken" and "AccuracyError" in broken.error
    assert strict.tolerance == 1e-20 and not strict.passed


def test_random_balanced_is_valid_and_seeded():
    a = random_balanced(np.random.default_rng(1), 0.05, 0.08, 0, 1, 0.3, 0.6)
    b = random_balanced(np.random.default_rng(1), 0.05, 0.08, 0, 1, 0.3, 0.6)
    assert a == b and max(abs(x) for x in a.u) < 1


def test_unknown_suite():
    with pytest.raises(DomainError):
        run_suite("nope", {})
    assert set(SUITES) == {"kernel", "beta", "selberg", "biorth", "pluecker", "lax-A", "lax-B",
                           "isomono", "transform97"}
