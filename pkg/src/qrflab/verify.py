"""Seeded randomized suites for the frame-change separability results.

Each suite samples inputs per trial from ``numpy.random.default_rng([seed, offset])``
and hands them to an evaluator that returns named :class:`Check` values.
Evaluators depend only on their inputs, so a recorded failure can be
replayed from its serialized state with :func:`replay`.

A failing check means an implementation bug or a tolerance problem, never a
counterexample: the statements being exercised are theorems.
"""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .entanglement import (
    all_bipartitions,
    concurrence,
    entanglement_gap,
    negativity,
    schmidt_coefficients,
)
from .errors import ConfigError
from .group import named_group
from .hilbert import (
    DensityOp,
    PureState,
    conditional_decomposition,
    density_from_dict,
    density_to_dict,
    physical_state,
    random_product_state,
    random_vector,
    state_from_dict,
    state_to_dict,
)
from .qrf import (
    FrameConfig,
    apply_transform,
    apply_transform_mixed,
    assemble_state,
    build_passive_transform,
    build_perspectival_transform,
    induced_channel,
    passive_apply,
    standard_form_check,
    standard_form_state,
)
from .representation import named_representation

SUITE_KINDS = ("theorem", "corollary", "no_creation", "monotonicity", "mixed", "oracle")
DEFAULT_TOL = 1e-9
ORACLE_TOL = 1e-12
CHANNEL_TOL = 1e-12
COROLLARY_FILTER = 0.05
FAILURE_NOTE = "implementation bug or numerical tolerance issue"
REPORT_SCHEMA = "qrflab.verification/1"


class Check(NamedTuple):
    value: float
    bound: float
    ok: bool


def _at_most(value, bound):
    return Check(float(value), float(bound), bool(value <= bound))


def _above(value, bound):
    return Check(float(value), float(bound), bool(value > bound))


@dataclass(frozen=True)
class SuiteSpec:
    kind: str
    group: str = "Z2"
    frames: int = 2
    physical: tuple[str, ...] = ("qubit", "qubit")
    trials: int = 100
    seed: int = 0
    tol: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "physical", tuple(self.physical))
        if self.kind not in SUITE_KINDS:
            raise ConfigError(f"unknown suite kind {self.kind!r}; expected one of {SUITE_KINDS}")
        if self.trials < 0:
            raise ConfigError("trial count must be >= 0")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")
        if self.frames < 2:
            raise ConfigError("suites need at least two frames")
        if self.tol is not None and self.tol < 0:
            raise ConfigError("tolerance must be >= 0")

    @property
    def tolerance(self) -> float:
        if self.tol is not None:
            return self.tol
        return ORACLE_TOL if self.kind == "oracle" else DEFAULT_TOL

    def config(self) -> FrameConfig:
        try:
            group = named_group(self.group)
        except KeyError as exc:
            raise ConfigError(str(exc.args[0])) from None
        try:
            reps = tuple(named_representation(group, r) for r in self.physical)
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"physical representation: {exc}") from None
        return FrameConfig(group, self.frames, reps)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["physical"] = list(self.physical)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SuiteSpec":
        known = {"kind", "group", "frames", "physical", "trials", "seed", "tol"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown suite fields {sorted(extra)}")
        if "kind" not in d:
            raise ConfigError("suite spec needs a 'kind'")
        return cls(**d)


@dataclass(frozen=True)
class Failure:
    offset: int
    predicate: str
    value: float
    bound: float
    frames: tuple[int, int]
    evaluator: str
    state: dict = field(repr=False)
    note: str = FAILURE_NOTE

    def to_dict(self):
        d = asdict(self)
        d["frames"] = list(self.frames)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["frames"] = tuple(d["frames"])
        return cls(**d)


@dataclass
class VerificationReport:
    kind: str
    spec: SuiteSpec
    trials: int
    failures: list[Failure]
    stats: dict
    wall_time: float = field(default=0.0, compare=False)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self, timing: bool = False) -> dict:
        d = {
            "schema": REPORT_SCHEMA,
            "kind": self.kind,
            "spec": self.spec.to_dict(),
            "trials": self.trials,
            "passed": self.passed,
            "failures": [f.to_dict() for f in self.failures],
            "stats": dict(sorted(self.stats.items())),
        }
        if timing:
            d["wall_time"] = self.wall_time
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        return cls(
            kind=d["kind"],
            spec=SuiteSpec.from_dict(d["spec"]),
            trials=d["trials"],
            failures=[Failure.from_dict(f) for f in d["failures"]],
            stats=dict(d["stats"]),
            wall_time=d.get("wall_time", 0.0),
        )


# ---------------------------------------------------------------- shared context

class SuiteContext:
    """Config plus every transform a suite needs, built once and read-only."""

    def __init__(self, spec: SuiteSpec):
        self.spec = spec
        self.config = spec.config()
        self.tol = spec.tolerance
        m = self.config.m
        self.pairs = [(k, l) for k in range(1, m + 1) for l in range(1, m + 1) if k != l]
        self.passive = {p: build_passive_transform(self.config, *p) for p in self.pairs}
        self.phys_dims = self.config.phys_spec.dims
        self.cuts = all_bipartitions(len(self.phys_dims))
        self.two_qubit = self.phys_dims == (2, 2)

    def transform(self, psi: PureState, k: int, l: int) -> PureState:
        return psi if k == l else apply_transform(self.passive[(k, l)], psi)


def _random_weights(ctx: SuiteContext, k: int, rng, mode: str = "full") -> dict:
    tuples = ctx.config.domain_tuples(k)
    if mode == "single":
        chosen = [tuples[rng.integers(len(tuples))]]
    elif mode == "subset":
        size = int(rng.integers(1, len(tuples) + 1))
        chosen = [tuples[i] for i in sorted(rng.choice(len(tuples), size, replace=False))]
    else:
        chosen = tuples
    amps = random_vector(len(chosen), rng)
    return dict(zip(chosen, amps))


def _frame_vector(ctx: SuiteContext, weights: dict) -> np.ndarray:
    f = np.zeros(ctx.config.ref_dim, dtype=complex)
    for g, w in weights.items():
        f[ctx.config.ref_index(g)] = w
    return f


def _support_mode(rng) -> str:
    return ("full", "single", "subset")[rng.choice(3, p=[0.6, 0.2, 0.2])]


def _phys_negativities(ctx: SuiteContext, rho) -> list[float]:
    m = rho.matrix if isinstance(rho, DensityOp) else rho
    return [negativity(m, cut, ctx.phys_dims) for cut in ctx.cuts]


def _max_bipartite_gap(ctx: SuiteContext, vec: np.ndarray) -> float:
    gaps = [1 - schmidt_coefficients(vec, cut, ctx.phys_dims)[0] ** 2 for cut in ctx.cuts]
    return float(max(gaps, default=0.0))


# ---------------------------------------------------------------- evaluators

def eval_theorem(ctx: SuiteContext, psi_k: PureState, k: int, l: int) -> dict[str, Check]:
    """Separable conditionals in frame k stay separable in frame l."""
    psi_l = ctx.transform(psi_k, k, l)
    full, bip = 0.0, 0.0
    for entry in conditional_decomposition(psi_l).nonzero().values():
        full = max(full, entanglement_gap(entry.state))
        bip = max(bip, _max_bipartite_gap(ctx, entry.state.amplitudes))
    neg = max(_phys_negativities(ctx, physical_state(psi_l)), default=0.0)
    return {
        "conditional_separable": _at_most(full, ctx.tol),
        "conditional_bipartite_separable": _at_most(bip, ctx.tol),
        "physical_ppt": _at_most(neg, ctx.tol),
    }


def eval_corollary(ctx: SuiteContext, psi_k: PureState, k: int, l: int) -> dict[str, Check]:
    """Some conditional state in frame l is entangled."""
    psi_l = ctx.transform(psi_k, k, l)
    gaps = [entanglement_gap(e.state) for e in conditional_decomposition(psi_l).nonzero().values()]
    return {"some_conditional_entangled": _above(max(gaps, default=0.0), ctx.tol)}


def _standard_parts(ctx: SuiteContext, psi_k: PureState, k: int):
    sf = standard_form_check(psi_k, ctx.config, k, tol=DEFAULT_TOL)
    if not sf:
        raise ConfigError(f"input is not in standard form for frame {k}: {sf.reason}")
    return sf.frame_part, sf.physical_part


def _channel_residual(ctx, k, l, frame_part, phys, rho_l) -> float:
    out = induced_channel(ctx.config, k, l, frame_part)(phys.amplitudes)
    return float(np.max(np.abs(out - rho_l.matrix)))


def eval_no_creation(ctx: SuiteContext, psi_k: PureState, k: int, l: int) -> dict[str, Check]:
    """A standard form with product physical part leaves frame l's physical state PPT."""
    frame_part, phys = _standard_parts(ctx, psi_k, k)
    rho_l = physical_state(ctx.transform(psi_k, k, l))
    checks = {
        "physical_ppt": _at_most(max(_phys_negativities(ctx, rho_l), default=0.0), ctx.tol),
        "channel_consistency": _at_most(_channel_residual(ctx, k, l, frame_part, phys, rho_l), CHANNEL_TOL),
    }
    if ctx.two_qubit:
        checks["physical_concurrence"] = _at_most(concurrence(rho_l), ctx.tol)
    return checks


def eval_monotonicity(ctx: SuiteContext, psi_k: PureState, k: int, l: int) -> dict[str, Check]:
    """Entanglement of the physical part never grows; equality for single-branch frames."""
    frame_part, phys = _standard_parts(ctx, psi_k, k)
    rho_l = physical_state(ctx.transform(psi_k, k, l))
    before = _phys_negativities(ctx, phys.projector())
    after = _phys_negativities(ctx, rho_l)
    increase = max((a - b for a, b in zip(after, before)), default=0.0)
    checks = {
        "negativity_nonincreasing": _at_most(increase, ctx.tol),
        "channel_consistency": _at_most(_channel_residual(ctx, k, l, frame_part, phys, rho_l), CHANNEL_TOL),
    }
    gaps = [abs(a - b) for a, b in zip(after, before)]
    if ctx.two_qubit:
        c_before, c_after = concurrence(phys), concurrence(rho_l)
        checks["concurrence_nonincreasing"] = _at_most(c_after - c_before, ctx.tol)
        gaps.append(abs(c_after - c_before))
    if np.count_nonzero(np.abs(frame_part.amplitudes) > 1e-12) == 1:
        checks["unitary_channel_equality"] = _at_most(max(gaps, default=0.0), ctx.tol)
    return checks


def eval_mixed_blocks(ctx: SuiteContext, rho_k: DensityOp, k: int, l: int) -> dict[str, Check]:
    """Separable diagonal blocks give a PPT physical state in frame l."""
    rho_l = apply_transform_mixed(ctx.passive[(k, l)], rho_k)
    neg = max(_phys_negativities(ctx, physical_state(rho_l)), default=0.0)
    return {"physical_ppt": _at_most(neg, ctx.tol)}


def eval_mixed_standard(ctx: SuiteContext, rho_k: DensityOp, k: int, l: int) -> dict[str, Check]:
    """Mixed standard form: physical negativity does not increase."""
    rho_l = apply_transform_mixed(ctx.passive[(k, l)], rho_k)
    before = _phys_negativities(ctx, physical_state(rho_k))
    after = _phys_negativities(ctx, physical_state(rho_l))
    inc = max((a - b for a, b in zip(after, before)), default=0.0)
    return {"negativity_nonincreasing": _at_most(inc, ctx.tol)}


def eval_oracle(ctx: SuiteContext, psi_k: PureState, k: int, l: int) -> dict[str, Check]:
    """Structured application against the Kronecker-built dense operator."""
    x = psi_k.amplitudes
    structured = passive_apply(ctx.config, k, l, x)
    if k == l:
        dev = float(np.max(np.abs(structured - x)))
        return {"identity_hop_exact": _at_most(dev, 0.0)}
    dense = ctx.dense[(k, l)] @ x
    matrix_route = ctx.passive[(k, l)].matrix @ x
    return {
        "dense_oracle": _at_most(np.max(np.abs(structured - dense)), ctx.tol),
        "matrix_route": _at_most(np.max(np.abs(structured - matrix_route)), ctx.tol),
    }


EVALUATORS: dict[str, Callable] = {
    "theorem": eval_theorem,
    "corollary": eval_corollary,
    "no_creation": eval_no_creation,
    "monotonicity": eval_monotonicity,
    "mixed_blocks": eval_mixed_blocks,
    "mixed_standard": eval_mixed_standard,
    "oracle": eval_oracle,
}


# ---------------------------------------------------------------- samplers

class TrialOutcome(NamedTuple):
    accepted: bool
    failures: list
    stats: dict


def _collect(offset, evaluator, state, k, l, checks, failures, stats, prefix=""):
    for name, chk in checks.items():
        key = f"max_{prefix}{name}"
        stats[key] = max(stats.get(key, -np.inf), chk.value)
        if not chk.ok:
            failures.append(Failure(offset, name, chk.value, chk.bound, (k, l), evaluator, _serialize(state)))


def _serialize(state):
    return state_to_dict(state) if isinstance(state, PureState) else density_to_dict(state)


def _random_product_branches(ctx, weights, rng):
    return {g: random_product_state(ctx.config.phys_spec, rng).amplitudes for g in weights}


def trial_theorem(ctx, offset, rng) -> TrialOutcome:
    failures, stats = [], {}
    for k, l in ctx.pairs:
        weights = _random_weights(ctx, k, rng)
        psi_k = assemble_state(ctx.config, k, weights, _random_product_branches(ctx, weights, rng))
        _collect(offset, "theorem", psi_k, k, l, eval_theorem(ctx, psi_k, k, l), failures, stats)
    return TrialOutcome(True, failures, stats)


def trial_corollary(ctx, offset, rng) -> TrialOutcome:
    cfg = ctx.config
    k = int(rng.integers(1, cfg.m + 1))
    weights = _random_weights(ctx, k, rng)
    branches = {}
    for g in weights:
        if rng.random() < 0.5:
            branches[g] = random_vector(cfg.phys_dim, rng)
        else:
            branches[g] = random_product_state(cfg.phys_spec, rng).amplitudes
    psi_k = assemble_state(cfg, k, weights, branches)
    neg = max(_phys_negativities(ctx, physical_state(psi_k)), default=0.0)
    if neg <= COROLLARY_FILTER:
        return TrialOutcome(False, [], {})
    failures, stats = [], {"min_filter_negativity": neg}
    for l in range(1, cfg.m + 1):
        checks = eval_corollary(ctx, psi_k, k, l)
        stats["min_max_conditional_gap"] = min(stats.get("min_max_conditional_gap", np.inf),
                                               checks["some_conditional_entangled"].value)
        for name, chk in checks.items():
            if not chk.ok:
                failures.append(Failure(offset, name, chk.value, chk.bound, (k, l), "corollary", _serialize(psi_k)))
    return TrialOutcome(True, failures, stats)


def _standard_trial(ctx, offset, rng, entangled: bool, evaluator: str) -> TrialOutcome:
    cfg = ctx.config
    failures, stats = [], {"n_single_support": 0}
    for k, l in ctx.pairs:
        mode = _support_mode(rng)
        frame = _frame_vector(ctx, _random_weights(ctx, k, rng, mode))
        if entangled:
            phys = random_vector(cfg.phys_dim, rng)
        else:
            phys = random_product_state(cfg.phys_spec, rng).amplitudes
        psi_k = standard_form_state(cfg, k, frame, phys)
        if mode == "single":
            stats["n_single_support"] += 1
        checks = EVALUATORS[evaluator](ctx, psi_k, k, l)
        _collect(offset, evaluator, psi_k, k, l, checks, failures, stats)
    return TrialOutcome(True, failures, stats)


def trial_no_creation(ctx, offset, rng):
    return _standard_trial(ctx, offset, rng, entangled=False, evaluator="no_creation")


def trial_monotonicity(ctx, offset, rng):
    return _standard_trial(ctx, offset, rng, entangled=True, evaluator="monotonicity")


def _random_domain_density(ctx, k, rng) -> np.ndarray:
    """Random density matrix on the reference sector supported on ``g_k = e``."""
    cfg = ctx.config
    idx = [cfg.ref_index(g) for g in cfg.domain_tuples(k)]
    r = int(rng.integers(1, len(idx) + 1))
    a = rng.standard_normal((len(idx), r)) + 1j * rng.standard_normal((len(idx), r))
    sigma = np.zeros((cfg.ref_dim, cfg.ref_dim), dtype=complex)
    sigma[np.ix_(idx, idx)] = a @ a.conj().T
    return sigma / np.trace(sigma).real


def trial_mixed(ctx, offset, rng) -> TrialOutcome:
    cfg = ctx.config
    failures, stats = [], {}
    for k, l in ctx.pairs:
        # mixture of pure states whose branches are all product
        n_terms = int(rng.integers(1, 5))
        probs = rng.dirichlet(np.ones(n_terms))
        rho = np.zeros((cfg.dim, cfg.dim), dtype=complex)
        for p in probs:
            weights = _random_weights(ctx, k, rng)
            v = assemble_state(cfg, k, weights, _random_product_branches(ctx, weights, rng)).amplitudes
            rho += p * np.outer(v, v.conj())
        rho_k = DensityOp.from_matrix(rho, cfg.spec, k)
        _collect(offset, "mixed_blocks", rho_k, k, l, eval_mixed_blocks(ctx, rho_k, k, l), failures, stats,
                 prefix="blocks_")

        # mixed standard form with a generic (typically entangled) physical state
        rank = int(rng.integers(1, cfg.phys_dim + 1))
        g = rng.standard_normal((cfg.phys_dim, rank)) + 1j * rng.standard_normal((cfg.phys_dim, rank))
        omega = g @ g.conj().T
        omega /= np.trace(omega).real
        rho_s = DensityOp.from_matrix(np.kron(_random_domain_density(ctx, k, rng), omega), cfg.spec, k)
        _collect(offset, "mixed_standard", rho_s, k, l, eval_mixed_standard(ctx, rho_s, k, l), failures, stats,
                 prefix="standard_")
    return TrialOutcome(True, failures, stats)


def trial_oracle(ctx, offset, rng) -> TrialOutcome:
    cfg = ctx.config
    failures, stats = [], {}
    for k in range(1, cfg.m + 1):
        mask = cfg.domain_mask(k)
        x = np.zeros(cfg.dim, dtype=complex)
        x[mask] = random_vector(int(mask.sum()), rng)
        psi_k = PureState(x, cfg.spec, k)
        for l in range(1, cfg.m + 1):
            _collect(offset, "oracle", psi_k, k, l, eval_oracle(ctx, psi_k, k, l), failures, stats)
    return TrialOutcome(True, failures, stats)


TRIALS = {
    "theorem": trial_theorem,
    "corollary": trial_corollary,
    "no_creation": trial_no_creation,
    "monotonicity": trial_monotonicity,
    "mixed": trial_mixed,
    "oracle": trial_oracle,
}


def _prepare(spec: SuiteSpec) -> SuiteContext:
    ctx = SuiteContext(spec)
    cfg = ctx.config
    if spec.kind == "corollary" and len(ctx.phys_dims) < 2:
        raise ConfigError("corollary suite needs at least two physical systems")
    if spec.kind == "mixed" and sorted(ctx.phys_dims) not in ([2, 2], [2, 3]):
        raise ConfigError(f"mixed suite needs a 2x2 or 2x3 physical sector, got {ctx.phys_dims}")
    if spec.kind == "oracle":
        ctx.dense = {}
        for k, l in ctx.pairs:
            s = build_perspectival_transform(cfg, k, l).matrix
            ctx.dense[(k, l)] = s @ cfg.domain_projector(k)
    return ctx


def _setup_failures(ctx: SuiteContext, stats: dict) -> list[Failure]:
    if ctx.spec.kind != "oracle":
        return []
    failures = []
    worst = 0.0
    for (k, l), t in ctx.passive.items():
        r1, r2 = t.isometry_residuals()
        worst = max(worst, r1, r2)
        for name, r in (("isometry_domain", r1), ("isometry_codomain", r2)):
            if r > ctx.tol:
                failures.append(Failure(-1, name, r, ctx.tol, (k, l), "setup", {}))
    stats["max_isometry_residual"] = worst
    return failures


def _merge_stats(total: dict, part: dict):
    for key, v in part.items():
        if key.startswith("n_"):
            total[key] = total.get(key, 0) + v
        elif key.startswith("min_"):
            total[key] = min(total.get(key, np.inf), v)
        else:
            total[key] = max(total.get(key, -np.inf), v)


def _run_offsets(ctx, offsets, workers):
    fn = TRIALS[ctx.spec.kind]

    def one(offset):
        return fn(ctx, offset, np.random.default_rng([ctx.spec.seed, offset]))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, offsets))
    return [one(o) for o in offsets]


def run_suite(spec: SuiteSpec, workers: int = 1, max_attempts: int | None = None) -> VerificationReport:
    """Run one suite. ``workers`` only changes speed, never the report."""
    start = time.perf_counter()
    ctx = _prepare(spec)
    stats: dict = {}
    failures = _setup_failures(ctx, stats)
    accepted = 0
    if spec.kind == "corollary":
        max_attempts = max_attempts or 100 * spec.trials + 100
        attempts = 0
        chunk = max(16, 4 * workers)
        while accepted < spec.trials:
            if attempts >= max_attempts:
                raise ConfigError(f"only {accepted} of {spec.trials} trials passed the entanglement filter")
            offsets = range(attempts, min(attempts + chunk, max_attempts))
            for offset, out in zip(offsets, _run_offsets(ctx, offsets, workers)):
                attempts = offset + 1
                if out.accepted:
                    accepted += 1
                    failures.extend(out.failures)
                    _merge_stats(stats, out.stats)
                    if accepted == spec.trials:
                        break
        stats["n_attempts"] = attempts
    else:
        for out in _run_offsets(ctx, range(spec.trials), workers):
            accepted += 1
            failures.extend(out.failures)
            _merge_stats(stats, out.stats)
    failures.sort(key=lambda f: (f.offset, f.frames, f.predicate))
    stats = {k: (int(v) if k.startswith("n_") else float(v)) for k, v in stats.items()}
    return VerificationReport(spec.kind, spec, accepted, failures, stats, time.perf_counter() - start)


def replay(spec: SuiteSpec, failure: Failure) -> Check:
    """Re-evaluate a recorded failure from its serialized input."""
    if failure.evaluator == "setup":
        ctx = _prepare(spec)
        r1, r2 = ctx.passive[failure.frames].isometry_residuals()
        value = r1 if failure.predicate == "isometry_domain" else r2
        return _at_most(value, ctx.tol)
    ctx = _prepare(spec)
    state = density_from_dict(failure.state) if "matrix" in failure.state else state_from_dict(failure.state)
    k, l = failure.frames
    return EVALUATORS[failure.evaluator](ctx, state, k, l)[failure.predicate]


def rerun_trial(spec: SuiteSpec, offset: int) -> TrialOutcome:
    """Re-execute a single trial from its seed offset."""
    ctx = _prepare(spec)
    return TRIALS[spec.kind](ctx, offset, np.random.default_rng([spec.seed, offset]))
