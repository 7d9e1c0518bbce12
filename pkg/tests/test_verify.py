import json

import numpy as np
import pytest

from qrflab.entanglement import Bipartition, concurrence, negativity
from qrflab.errors import ConfigError
from qrflab.hilbert import conditional_decomposition, physical_state
from qrflab.qrf import standard_form_state
from qrflab.verify import (
    FAILURE_NOTE,
    SUITE_KINDS,
    Failure,
    SuiteContext,
    SuiteSpec,
    VerificationReport,
    eval_corollary,
    eval_monotonicity,
    eval_no_creation,
    eval_theorem,
    replay,
    rerun_trial,
    run_suite,
)
from qrflab.worked import example1_initial, example2_final, example2_initial, phi, z2_config

S = 1 / np.sqrt(2)
CUT = Bipartition.of(2, [0])


def _dump(report):
    return json.dumps(report.to_dict(), sort_keys=True)


@pytest.mark.parametrize("kind", SUITE_KINDS)
def test_zero_trials_pass_vacuously(kind):
    r = run_suite(SuiteSpec(kind, trials=0))
    assert r.passed and r.trials == 0


@pytest.mark.parametrize("kind", SUITE_KINDS)
def test_small_suites_pass(kind):
    r = run_suite(SuiteSpec(kind, trials=15, seed=2))
    assert r.passed, [f.to_dict() for f in r.failures[:3]]
    assert r.trials == 15


@pytest.mark.parametrize("group, frames, phys", [
    ("Z3", 2, ("qubit", "qubit")),
    ("S3", 2, ("qubit", "qubit")),
    ("Z2xZ2", 3, ("qubit", "qubit")),
    ("Z2", 3, ("qubit", "regular", "qubit")),
])
def test_theorem_and_no_creation_other_groups(group, frames, phys):
    for kind in ("theorem", "no_creation"):
        assert run_suite(SuiteSpec(kind, group, frames, phys, trials=5, seed=9)).passed


def test_determinism_and_worker_invariance():
    spec = SuiteSpec("monotonicity", trials=20, seed=4)
    a, b = run_suite(spec), run_suite(spec)
    c = run_suite(spec, workers=4)
    assert _dump(a) == _dump(b) == _dump(c)
    assert a == c
    other = run_suite(SuiteSpec("monotonicity", trials=20, seed=5))
    assert _dump(other) != _dump(a)


def test_corollary_worker_invariance():
    spec = SuiteSpec("corollary", trials=12, seed=1)
    assert _dump(run_suite(spec)) == _dump(run_suite(spec, workers=3))


def test_report_round_trip_without_timing():
    r = run_suite(SuiteSpec("theorem", trials=3, seed=1))
    d = r.to_dict()
    assert "wall_time" not in d
    assert "wall_time" in r.to_dict(timing=True)
    assert VerificationReport.from_dict(json.loads(json.dumps(d))) == r


@pytest.mark.parametrize("kind", ["theorem", "no_creation", "monotonicity"])
def test_failures_replay_from_serialized_state(kind):
    # zero tolerance turns rounding noise into recorded failures
    spec = SuiteSpec(kind, trials=10, seed=1, tol=0.0)
    r = run_suite(spec)
    assert r.failures
    for f in r.failures:
        assert f.note == FAILURE_NOTE
        back = Failure.from_dict(json.loads(json.dumps(f.to_dict())))
        chk = replay(spec, back)
        assert not chk.ok
        assert chk.value == f.value


def test_failures_sorted_and_rerunnable():
    spec = SuiteSpec("theorem", trials=10, seed=1, tol=0.0)
    r = run_suite(spec)
    keys = [(f.offset, f.frames, f.predicate) for f in r.failures]
    assert keys == sorted(keys)
    first = r.failures[0]
    again = rerun_trial(spec, first.offset)
    assert any(f.value == first.value and f.predicate == first.predicate for f in again.failures)


@pytest.mark.parametrize("bad", [
    dict(kind="nonsense"),
    dict(kind="theorem", trials=-1),
    dict(kind="theorem", frames=1),
    dict(kind="theorem", seed=-3),
    dict(kind="theorem", tol=-1.0),
])
def test_config_errors(bad):
    with pytest.raises(ConfigError):
        SuiteSpec(**bad)


def test_config_errors_at_run():
    with pytest.raises(ConfigError, match="Z5x"):
        run_suite(SuiteSpec("theorem", group="Z5x", trials=1))
    with pytest.raises(ConfigError):
        run_suite(SuiteSpec("theorem", physical=("spinor",), trials=1))
    with pytest.raises(ConfigError):
        run_suite(SuiteSpec("mixed", physical=("qubit",), trials=1))
    with pytest.raises(ConfigError):
        SuiteSpec.from_dict({"kind": "theorem", "colour": "red"})


def test_spec_round_trip():
    spec = SuiteSpec("oracle", "Z3", 2, ("regular",), 7, 3, None)
    assert SuiteSpec.from_dict(json.loads(json.dumps(spec.to_dict()))) == spec
    assert spec.tolerance == 1e-12
    assert SuiteSpec("theorem").tolerance == 1e-9


# ---------------------------------------------------------------- fixed trials

def test_theorem_on_first_example():
    ctx = SuiteContext(SuiteSpec("theorem"))
    checks = eval_theorem(ctx, example1_initial(), 1, 2)
    assert all(c.ok for c in checks.values())
    out = ctx.transform(example1_initial(), 1, 2)
    states = sorted(tuple(np.round(np.abs(e.state.amplitudes), 12)) for e in conditional_decomposition(out).nonzero().values())
    assert states == [(0, 0, 0, 1), (1, 0, 0, 0)]
    assert negativity(physical_state(out), CUT) == 0


def test_corollary_on_second_example():
    ctx = SuiteContext(SuiteSpec("corollary"))
    for l in (1, 2):
        assert eval_corollary(ctx, example2_initial(), 1, l)["some_conditional_entangled"].ok
    dec = conditional_decomposition(example2_final())
    for g in [(0, 0), (1, 0)]:
        assert abs(abs(np.vdot(phi(1j), dec.entries[g].state.amplitudes)) - 1) < 1e-12


def test_corollary_filter_excludes_product_conditionals():
    # every conditional of the first example is product, so its physical state is PPT
    rho = physical_state(example1_initial())
    assert negativity(rho, CUT) <= 0.05


def test_no_creation_on_first_example():
    ctx = SuiteContext(SuiteSpec("no_creation"))
    checks = eval_no_creation(ctx, example1_initial(), 1, 2)
    assert all(c.ok for c in checks.values())
    rho = physical_state(ctx.transform(example1_initial(), 1, 2)).matrix
    assert np.max(np.abs(rho - np.diag([0.5, 0, 0, 0.5]))) < 1e-12


def test_monotonicity_bell_with_uniform_frame():
    cfg = z2_config()
    ctx = SuiteContext(SuiteSpec("monotonicity", seed=5))
    f = np.zeros(cfg.ref_dim, dtype=complex)
    f[[cfg.ref_index((0, 0)), cfg.ref_index((0, 1))]] = S
    psi = standard_form_state(cfg, 1, f, phi(1j))
    assert abs(negativity(np.outer(phi(1j), phi(1j).conj()), CUT, (2, 2)) - 0.5) < 1e-12
    rho = physical_state(ctx.transform(psi, 1, 2))
    assert negativity(rho, CUT) == 0
    assert concurrence(rho) < 1e-12
    assert all(c.ok for c in eval_monotonicity(ctx, psi, 1, 2).values())


def test_monotonicity_single_support_is_equality():
    cfg = z2_config()
    ctx = SuiteContext(SuiteSpec("monotonicity"))
    f = np.zeros(cfg.ref_dim, dtype=complex)
    f[cfg.ref_index((0, 1))] = 1
    psi = standard_form_state(cfg, 1, f, phi(1j))
    checks = eval_monotonicity(ctx, psi, 1, 2)
    assert checks["unitary_channel_equality"].ok
    assert abs(concurrence(physical_state(ctx.transform(psi, 1, 2))) - 1) < 1e-12


def test_monotonicity_product_stays_zero():
    cfg = z2_config()
    ctx = SuiteContext(SuiteSpec("monotonicity"))
    f = np.zeros(cfg.ref_dim, dtype=complex)
    f[[cfg.ref_index((0, 0)), cfg.ref_index((0, 1))]] = S
    psi = standard_form_state(cfg, 1, f, np.array([1, 0, 0, 0]))
    rho = physical_state(ctx.transform(psi, 1, 2))
    assert negativity(rho, CUT) == 0 and concurrence(rho) < 1e-12


def test_mixed_pure_projector_matches_pure_route():
    from qrflab.verify import eval_mixed_blocks
    ctx = SuiteContext(SuiteSpec("mixed"))
    checks = eval_mixed_blocks(ctx, example1_initial().projector(), 1, 2)
    assert checks["physical_ppt"].ok and checks["physical_ppt"].value == 0


def test_oracle_setup_stats():
    r = run_suite(SuiteSpec("oracle", "Z2xZ2", 3, ("qubit", "qubit"), trials=3))
    assert r.stats["max_isometry_residual"] <= 1e-12
    assert r.stats["max_identity_hop_exact"] == 0
