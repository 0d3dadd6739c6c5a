import json

import numpy as np
import pytest

from vndarboux.verify import (
    Check,
    SuiteReport,
    direct_sum,
    random_commuting_shift_case,
    run_suite,
    suite_examples,
    suite_theorem1,
)


def test_check_pass_logic():
    assert Check("a", 1e-12, 1e-10).passed
    assert not Check("b", 1e-9, 1e-10).passed
    assert not Check("c", float("nan"), 1.0).passed
    rep = SuiteReport("x", [Check("a", 0.0, 1.0), Check("b", 2.0, 1.0)])
    assert not rep.passed and [c.name for c in rep.failures()] == ["b"]
    json.dumps(rep.to_dict())


def test_direct_sum():
    out = direct_sum(np.eye(2), 2 * np.eye(1))
    assert np.allclose(out, np.diag([1, 1, 2]))


def test_commuting_shift_case_commutes(rng):
    fam, gen, x = random_commuting_shift_case(rng, 2)
    for t in (0.0, 1.3):
        assert np.allclose(x @ gen(t), gen(t) @ x, atol=1e-12)
    assert np.allclose(x @ fam.a, fam.a @ x)


def test_theorem1_suite_small():
    rep = suite_theorem1(n_random=6)
    assert rep.passed
    assert len(rep.checks) == 3 * 8


def test_theorem1_fault_injection_names_step():
    rep = suite_theorem1(n_random=2, fault="corrupt-P")
    assert not rep.passed
    assert all("LP1a" in c.detail for c in rep.failures())


def test_examples_suite_has_64_entry_comparison():
    rep = suite_examples()
    assert rep.passed
    entries = [c for c in rep.checks if c.name.startswith("8x8:64_entries")]
    assert len(entries) == 4
    assert all(c.detail.startswith("64/64") for c in entries)


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_suite("bogus")
