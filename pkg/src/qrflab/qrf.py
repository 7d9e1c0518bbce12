"""Reference-frame changes over a finite group.

Layout: ``m`` reference factors, each ``L^2(G)`` with the left-regular action,
followed by physical factors carrying arbitrary representations. Frame
indices are 1-based, matching the usual labelling R_1 .. R_m.

Two kinds of frame change are built here:

* the perspectival map ``S^{k->l} = Pi_kl sum_g 1_k (x) |g^-1><g|_l (x) V^dag(g) (x) U^dag(g)``,
  a unitary on the whole space that includes the swap of factors k and l;
* the passive map ``T^{k->l} = sum_{g: g_k=e} |g_l^-1 g><g| (x) U^dag(g_l)``,
  a partial isometry from ``{g_k = e}`` onto ``{g_l = e}``. No swap appears;
  factors keep their positions and the current frame is carried as metadata.

On ``{g_k = e}`` the two coincide.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Literal, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DomainViolation,
    NotAFramePart,
    SameFrameIndices,
    TransformError,
)
from .group import FiniteGroup
from .hilbert import (
    DensityOp,
    FactorSpec,
    PureState,
    canonical_phase,
)
from .representation import Representation, combined_action, regular_representation

DOMAIN_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class FrameConfig:
    group: FiniteGroup
    frame_count: int
    physical_reps: tuple[Representation, ...] = ()
    physical_names: tuple[str | None, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "physical_reps", tuple(self.physical_reps))
        if self.frame_count < 1:
            raise ValueError("need at least one reference frame")
        for r in self.physical_reps:
            if r.group != self.group:
                raise ValueError("physical representation is over a different group")
        if self.physical_names is not None:
            names = tuple(self.physical_names)
            if len(names) != len(self.physical_reps):
                raise ValueError("one name per physical system")
            object.__setattr__(self, "physical_names", names)

    @property
    def m(self) -> int:
        return self.frame_count

    @property
    def order(self) -> int:
        return self.group.order

    @cached_property
    def spec(self) -> FactorSpec:
        dims = [r.dimension for r in self.physical_reps]
        return FactorSpec.frames(self.order, self.m, dims, self.physical_names)

    @cached_property
    def ref_spec(self) -> FactorSpec:
        return self.spec.subspec(self.spec.ref_positions)

    @cached_property
    def phys_spec(self) -> FactorSpec:
        return self.spec.subspec(self.spec.phys_positions)

    @property
    def ref_dim(self) -> int:
        return self.order ** self.m

    @property
    def phys_dim(self) -> int:
        return self.phys_spec.total_dim

    @property
    def dim(self) -> int:
        return self.ref_dim * self.phys_dim

    @property
    def ref_dims(self) -> tuple[int, ...]:
        return (self.order,) * self.m

    @cached_property
    def regular(self) -> Representation:
        return regular_representation(self.group)

    @cached_property
    def _phys_unitaries(self) -> tuple[np.ndarray, ...]:
        return tuple(combined_action(self.physical_reps, g) for g in self.group.elements)

    def physical_unitary(self, g: int) -> np.ndarray:
        """``U_1(g) (x) ... (x) U_N(g)`` on the physical sector."""
        return self._phys_unitaries[g]

    def check_frame(self, k: int):
        if not 1 <= k <= self.m:
            raise TransformError(f"frame index {k} not in 1..{self.m}")

    def tuples(self):
        return itertools.product(self.group.elements, repeat=self.m)

    def domain_tuples(self, k: int):
        """Reference tuples with ``g_k = e``."""
        self.check_frame(k)
        e = self.group.identity
        return [g for g in self.tuples() if g[k - 1] == e]

    def ref_index(self, g: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(g), self.ref_dims))

    def domain_mask(self, k: int) -> np.ndarray:
        """Boolean mask over the full basis: True where ``g_k = e``."""
        self.check_frame(k)
        mask = np.zeros(self.ref_dims, dtype=bool)
        idx = [slice(None)] * self.m
        idx[k - 1] = self.group.identity
        mask[tuple(idx)] = True
        return np.repeat(mask.reshape(-1), self.phys_dim)

    def domain_projector(self, k: int) -> np.ndarray:
        return np.diag(self.domain_mask(k).astype(complex))


@dataclass(frozen=True, eq=False)
class QrfTransform:
    kind: Literal["perspectival", "passive"]
    source: int
    target: int
    matrix: np.ndarray
    config: FrameConfig

    @property
    def domain(self) -> str:
        if self.kind == "passive":
            return f"frame {self.source} at identity"
        return "all"

    @property
    def codomain(self) -> str:
        if self.kind == "passive":
            return f"frame {self.target} at identity"
        return "all"

    def domain_projector(self) -> np.ndarray:
        if self.kind == "passive":
            return self.config.domain_projector(self.source)
        return np.eye(self.config.dim, dtype=complex)

    def codomain_projector(self) -> np.ndarray:
        if self.kind == "passive":
            return self.config.domain_projector(self.target)
        return np.eye(self.config.dim, dtype=complex)

    def isometry_residuals(self) -> tuple[float, float]:
        """``(max|T^dag T - P_dom|, max|T T^dag - P_cod|)``."""
        t = self.matrix
        r1 = np.max(np.abs(t.conj().T @ t - self.domain_projector()))
        r2 = np.max(np.abs(t @ t.conj().T - self.codomain_projector()))
        return float(r1), float(r2)


def _check_pair(config: FrameConfig, k: int, l: int):
    config.check_frame(k)
    config.check_frame(l)
    if k == l:
        raise SameFrameIndices(f"source and target frame are both {k}")


def swap_matrix(dims: Sequence[int], i: int, j: int) -> np.ndarray:
    """Permutation matrix exchanging tensor factors ``i`` and ``j``."""
    if dims[i] != dims[j]:
        raise DimensionMismatch(f"cannot swap factors of dimension {dims[i]} and {dims[j]}")
    d = int(np.prod(dims))
    idx = np.arange(d).reshape(dims).swapaxes(i, j).reshape(-1)
    return np.eye(d, dtype=complex)[idx]


def build_perspectival_transform(config: FrameConfig, source: int, target: int) -> QrfTransform:
    """Dense ``S^{source->target}`` assembled from Kronecker products and a swap.

    Every reference factor other than the two involved picks up the inverse
    regular action; physical factors pick up ``U_j^dag(g)``.
    """
    _check_pair(config, source, target)
    G, n = config.group, config.order
    total = np.zeros((config.dim, config.dim), dtype=complex)
    for g in G.elements:
        ops = []
        for pos in range(config.m):
            if pos == source - 1:
                ops.append(np.eye(n, dtype=complex))
            elif pos == target - 1:
                flip = np.zeros((n, n), dtype=complex)
                flip[G.inv(g), g] = 1
                ops.append(flip)
            else:
                ops.append(config.regular.dagger(g))
        ops.extend(r.dagger(g) for r in config.physical_reps)
        total += reduce(np.kron, ops)
    s = swap_matrix(config.spec.dims, source - 1, target - 1) @ total
    s.setflags(write=False)
    return QrfTransform("perspectival", source, target, s, config)


def build_passive_transform(config: FrameConfig, k: int, l: int) -> QrfTransform:
    """Dense partial isometry ``T^{k->l}`` built tuple by tuple."""
    _check_pair(config, k, l)
    if config.m < 2:
        raise TransformError("a frame change needs at least two frames")
    G, dp = config.group, config.phys_dim
    t = np.zeros((config.dim, config.dim), dtype=complex)
    for g in config.domain_tuples(k):
        a = g[l - 1]
        shifted = tuple(G.mul(G.inv(a), gi) for gi in g)
        src = config.ref_index(g) * dp
        dst = config.ref_index(shifted) * dp
        t[dst:dst + dp, src:src + dp] = config.physical_unitary(a).conj().T
    t.setflags(write=False)
    return QrfTransform("passive", k, l, t, config)


def passive_apply(config: FrameConfig, k: int, l: int, amplitudes: np.ndarray) -> np.ndarray:
    """Apply ``T^{k->l}`` without forming its matrix.

    Works branch by branch over ``a = g_l``: relabel the reference indices by
    left multiplication with ``a^-1`` and act with ``U^dag(a)`` on the
    physical block. Accepts a vector or a ``(dim, batch)`` array. For
    ``k == l`` this is the projector onto ``{g_k = e}``.
    """
    config.check_frame(k)
    config.check_frame(l)
    G, m, n, dp = config.group, config.m, config.order, config.phys_dim
    e = G.identity
    amplitudes = np.asarray(amplitudes, dtype=complex)
    batch_shape = amplitudes.shape[1:]
    x = amplitudes.reshape((n,) * m + (dp, -1))
    out = np.zeros_like(x)
    if k == l:
        idx = [slice(None)] * m
        idx[k - 1] = e
        out[tuple(idx)] = x[tuple(idx)]
        return out.reshape((config.dim,) + batch_shape)

    others = [i for i in range(m) if i not in (k - 1, l - 1)]
    for a in G.elements:
        src_idx = [slice(None)] * m
        src_idx[k - 1], src_idx[l - 1] = e, a
        block = x[tuple(src_idx)]  # axes: others..., phys, batch
        for ax in range(len(others)):
            # new label j holds the old label a*j
            block = np.take(block, G.table[a], axis=ax)
        block = np.einsum("pq,...qb->...pb", config.physical_unitary(a).conj().T, block)
        dst_idx = [slice(None)] * m
        dst_idx[k - 1], dst_idx[l - 1] = G.inv(a), e
        out[tuple(dst_idx)] = block
    return out.reshape((config.dim,) + batch_shape)


def _leak(mask: np.ndarray, amplitudes: np.ndarray) -> float:
    return float(np.linalg.norm(amplitudes[~mask]))


def apply_transform(t: QrfTransform, psi: PureState, tol: float = DOMAIN_TOL) -> PureState:
    """Transform a pure state; passive maps reject inputs outside ``{g_k = e}``."""
    cfg = t.config
    if psi.spec.dims != cfg.spec.dims:
        raise DimensionMismatch(f"state dims {psi.spec.dims} != transform dims {cfg.spec.dims}")
    if t.kind == "passive":
        leaked = _leak(cfg.domain_mask(t.source), psi.amplitudes)
        if leaked > tol:
            raise DomainViolation(leaked, tol)
        out = passive_apply(cfg, t.source, t.target, psi.amplitudes)
    else:
        out = t.matrix @ psi.amplitudes
    return PureState.normalized(out, psi.spec, t.target)


def apply_transform_mixed(t: QrfTransform, rho: DensityOp, tol: float = DOMAIN_TOL) -> DensityOp:
    """``T rho T^dag``; the leak is measured as ``sqrt(tr((1-P) rho))``."""
    cfg = t.config
    if rho.spec.dims != cfg.spec.dims:
        raise DimensionMismatch(f"operator dims {rho.spec.dims} != transform dims {cfg.spec.dims}")
    if t.kind == "passive":
        mask = cfg.domain_mask(t.source)
        leaked = float(np.sqrt(max(0.0, np.real(np.diag(rho.matrix))[~mask].sum())))
        if leaked > tol:
            raise DomainViolation(leaked, tol)
        x = passive_apply(cfg, t.source, t.target, rho.matrix)
        out = passive_apply(cfg, t.source, t.target, x.conj().T)
    else:
        out = t.matrix @ rho.matrix @ t.matrix.conj().T
    return DensityOp.from_matrix(out, rho.spec, t.target)


# ------------------------------------------------------------------ standard form

@dataclass(frozen=True)
class StandardForm:
    axis: int
    frame_part: PureState | DensityOp
    physical_part: PureState | DensityOp
    residual: float = 0.0

    def __bool__(self):
        return True


@dataclass(frozen=True)
class NotStandard:
    reason: str

    def __bool__(self):
        return False


def standard_form_check(state: PureState | DensityOp, config: FrameConfig, k: int, tol: float = 1e-9):
    """Factor a state as (frame part with ``g_k = e``) (x) (physical part).

    Returns :class:`StandardForm` on success and :class:`NotStandard` with a
    reason otherwise. For pure states the split is accepted when the reduced
    physical purity is at least ``1 - tol``; for mixed states when
    ``||rho - rho_ref (x) rho_phys||_F <= tol``.
    """
    config.check_frame(k)
    if state.spec.dims != config.spec.dims:
        raise DimensionMismatch(f"state dims {state.spec.dims} != config dims {config.spec.dims}")
    R, Dp = config.ref_dim, config.phys_dim
    ref_mask = config.domain_mask(k)[::Dp]

    if isinstance(state, PureState):
        M = state.amplitudes.reshape(R, Dp)
        leak = float(np.sum(np.abs(M[~ref_mask]) ** 2))
        if leak > tol:
            return NotStandard(f"weight {leak:.3e} lies outside g_{k} = e")
        _, s, vh = np.linalg.svd(M, full_matrices=False)
        purity_gap = 1 - s[0] ** 2
        if purity_gap > tol:
            return NotStandard(f"reference and physical sectors are entangled (1 - purity = {purity_gap:.3e})")
        phys = vh[0] / canonical_phase(vh[0])
        frame = M @ phys.conj()
        frame = frame / np.linalg.norm(frame)
        resid = float(np.max(np.abs(M - np.outer(frame, phys))))
        return StandardForm(
            axis=k,
            frame_part=PureState(frame, config.ref_spec, k),
            physical_part=PureState(phys, config.phys_spec),
            residual=resid,
        )

    rho = state.matrix
    diag = np.real(np.diag(rho)).reshape(R, Dp).sum(axis=1)
    leak = float(diag[~ref_mask].sum())
    if leak > tol:
        return NotStandard(f"weight {leak:.3e} lies outside g_{k} = e")
    t = rho.reshape(R, Dp, R, Dp)
    sigma = np.einsum("ajbj->ab", t)
    omega = np.einsum("iaib->ab", t)
    resid = float(np.linalg.norm(rho - np.kron(sigma, omega)))
    if resid > tol:
        return NotStandard(f"state does not factorize (residual {resid:.3e})")
    return StandardForm(
        axis=k,
        frame_part=DensityOp.from_matrix(sigma, config.ref_spec, k),
        physical_part=DensityOp.from_matrix(omega, config.phys_spec),
        residual=resid,
    )


# ------------------------------------------------------------------ state builders

def assemble_state(config: FrameConfig, k: int, weights: Mapping[tuple, complex],
                   branches: Mapping[tuple, np.ndarray] | np.ndarray) -> PureState:
    """``sum_g f(g) |g> (x) psi(g)`` over tuples with ``g_k = e``.

    ``branches`` is either a mapping from tuple to physical vector or one
    vector shared by every tuple (a standard-form state). The result is
    renormalized.
    """
    config.check_frame(k)
    e = config.group.identity
    rows = np.zeros((config.ref_dim, config.phys_dim), dtype=complex)
    for g, w in weights.items():
        if g[k - 1] != e:
            raise NotAFramePart(f"tuple {g} has g_{k} != e")
        vec = branches if isinstance(branches, np.ndarray) else branches[g]
        rows[config.ref_index(g)] = w * np.asarray(vec, dtype=complex)
    return PureState.normalized(rows.reshape(-1), config.spec, k)


def standard_form_state(config: FrameConfig, k: int, frame_part: PureState | np.ndarray,
                        physical: PureState | np.ndarray) -> PureState:
    f = frame_part.amplitudes if isinstance(frame_part, PureState) else np.asarray(frame_part, dtype=complex)
    p = physical.amplitudes if isinstance(physical, PureState) else np.asarray(physical, dtype=complex)
    _check_frame_part(config, k, f)
    return PureState.normalized(np.kron(f, p), config.spec, k)


def _check_frame_part(config: FrameConfig, k: int, f: np.ndarray, tol: float = DOMAIN_TOL):
    if f.shape != (config.ref_dim,):
        raise NotAFramePart(f"frame part has length {f.shape[0]}, expected {config.ref_dim}")
    mask = config.domain_mask(k)[::config.phys_dim]
    leaked = float(np.linalg.norm(f[~mask]))
    if leaked > tol:
        raise NotAFramePart(f"frame part has norm {leaked:.3e} outside g_{k} = e")


def predicted_branches(config: FrameConfig, k: int, l: int, psi: PureState) -> dict[tuple, np.ndarray]:
    """Unnormalized branches of ``T^{k->l} Psi`` from the covariance rule.

    For each ``g`` with ``g_l = e``: ``f~(g) psi~(g) = U^dag(g_k^-1) [f psi](g_k^-1 g)``.
    """
    G = config.group
    rows = psi.amplitudes.reshape(config.ref_dim, config.phys_dim)
    out = {}
    for g in config.domain_tuples(l):
        b = G.inv(g[k - 1])
        src = tuple(G.mul(b, gi) for gi in g)
        out[g] = config.physical_unitary(b).conj().T @ rows[config.ref_index(src)]
    return out


# ------------------------------------------------------------------ induced channel

@dataclass(frozen=True)
class ChannelTerm:
    weight: float
    element: int
    unitary: np.ndarray = field(repr=False)
    local_factors: tuple[np.ndarray, ...] = field(repr=False, default=())


@dataclass(frozen=True)
class LocalUnitaryChannel:
    """Convex mixture ``rho -> sum_i p_i W_i rho W_i^dag`` of product unitaries."""

    terms: tuple[ChannelTerm, ...]

    @property
    def is_unitary(self) -> bool:
        return len(self.terms) == 1

    def kraus_operators(self) -> list[np.ndarray]:
        return [np.sqrt(t.weight) * t.unitary for t in self.terms]

    def __call__(self, rho):
        m = rho.matrix if isinstance(rho, DensityOp) else np.asarray(rho, dtype=complex)
        if m.ndim == 1:
            m = np.outer(m, m.conj())
        out = sum(t.weight * t.unitary @ m @ t.unitary.conj().T for t in self.terms)
        if isinstance(rho, DensityOp):
            return DensityOp.from_matrix(out, rho.spec)
        return out


def induced_channel(config: FrameConfig, k: int, l: int, frame_part: PureState | np.ndarray,
                    cutoff: float = 1e-14) -> LocalUnitaryChannel:
    """Physical-sector channel induced by ``T^{k->l}`` on a standard-form state.

    Branch weights ``|f(g)|^2`` are pooled by the group element ``a = g_l``
    that ends up acting as ``U^dag(a)`` on the physical systems. Weights
    below ``cutoff`` are dropped.
    """
    config.check_frame(k)
    config.check_frame(l)
    f = frame_part.amplitudes if isinstance(frame_part, PureState) else np.asarray(frame_part, dtype=complex)
    _check_frame_part(config, k, f)
    G = config.group
    pooled = np.zeros(G.order)
    if k == l:
        pooled[G.identity] = 1.0
    else:
        for g in config.domain_tuples(k):
            pooled[g[l - 1]] += abs(f[config.ref_index(g)]) ** 2
        pooled /= pooled.sum()
    terms = []
    for a in G.elements:
        if pooled[a] < cutoff:
            continue
        local = tuple(r.dagger(a) for r in config.physical_reps)
        terms.append(ChannelTerm(float(pooled[a]), a, config.physical_unitary(a).conj().T, local))
    return LocalUnitaryChannel(tuple(terms))
