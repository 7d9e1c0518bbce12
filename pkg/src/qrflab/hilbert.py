"""Dense states over a labelled tensor factorization.

Flattening is row-major over the factors in :class:`FactorSpec` order, with
reference factors listed before physical ones. Pure states compare equal up
to a global phase.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyInput,
    EmptyKeepSet,
    InvalidDensityOp,
    LabelOutOfRange,
    NotNormalized,
    TupleLengthMismatch,
)

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
EIGEN_TOL = 1e-10
ZERO_WEIGHT = 1e-12

Role = Literal["ref", "phys"]


@dataclass(frozen=True)
class Factor:
    dim: int
    role: Role
    index: int  # 1-based frame index (ref) or system index (phys)
    name: str | None = None

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        return f"R{self.index}" if self.role == "ref" else f"P{self.index}"


@dataclass(frozen=True)
class FactorSpec:
    factors: tuple[Factor, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        for f in self.factors:
            if f.dim < 1:
                raise ValueError(f"factor {f.label} has non-positive dimension {f.dim}")

    @classmethod
    def frames(cls, order: int, m: int, phys_dims: Sequence[int] = (), names: Sequence[str] | None = None):
        """``m`` reference factors of dimension ``order`` then the physical factors."""
        names = list(names) if names is not None else [None] * len(phys_dims)
        fs = [Factor(order, "ref", k + 1) for k in range(m)]
        fs += [Factor(int(d), "phys", j + 1, names[j]) for j, d in enumerate(phys_dims)]
        return cls(tuple(fs))

    @classmethod
    def plain(cls, dims: Sequence[int]):
        return cls(tuple(Factor(int(d), "phys", j + 1) for j, d in enumerate(dims)))

    def __len__(self):
        return len(self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(f.dim for f in self.factors)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64)) if self.factors else 1

    @property
    def ref_positions(self) -> tuple[int, ...]:
        return tuple(i for i, f in enumerate(self.factors) if f.role == "ref")

    @property
    def phys_positions(self) -> tuple[int, ...]:
        return tuple(i for i, f in enumerate(self.factors) if f.role == "phys")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(f.label for f in self.factors)

    def position(self, label: str | int) -> int:
        """Factor position from a label (``"R1"``, ``"A"``) or a position."""
        if isinstance(label, (int, np.integer)):
            if not 0 <= label < len(self):
                raise IndexError(f"factor position {label} out of range")
            return int(label)
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no factor labelled {label!r}; have {self.labels}") from None

    def subspec(self, positions: Iterable[int]) -> "FactorSpec":
        return FactorSpec(tuple(self.factors[p] for p in sorted(positions)))

    def concat(self, other: "FactorSpec") -> "FactorSpec":
        return FactorSpec(self.factors + other.factors)

    def to_dict(self) -> dict:
        return {
            "dims": list(self.dims),
            "roles": [f.role for f in self.factors],
            "indices": [f.index for f in self.factors],
            "names": [f.name for f in self.factors],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FactorSpec":
        n = len(d["dims"])
        roles = d.get("roles") or ["phys"] * n
        indices = d.get("indices") or list(range(1, n + 1))
        names = d.get("names") or [None] * n
        return cls(tuple(Factor(int(a), r, int(i), nm) for a, r, i, nm in zip(d["dims"], roles, indices, names)))


def flat_index(dims: Sequence[int], labels: Sequence[int]) -> int:
    if len(dims) != len(labels):
        raise LabelOutOfRange(f"expected {len(dims)} labels, got {len(labels)}")
    for d, x in zip(dims, labels):
        if not 0 <= x < d:
            raise LabelOutOfRange(f"label {x} out of range for factor of dimension {d}")
    return int(np.ravel_multi_index(tuple(int(x) for x in labels), tuple(dims)))


def canonical_phase(vec: np.ndarray) -> complex:
    """Unit phase that makes the first significant amplitude real positive.

    "Significant" means at least half the largest magnitude, which keeps the
    choice stable when several amplitudes tie.
    """
    mags = np.abs(vec)
    peak = mags.max()
    if peak == 0:
        return 1.0 + 0j
    i = int(np.argmax(mags >= 0.5 * peak))
    return vec[i] / mags[i]


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized amplitude vector; ``frame`` records the current reference frame."""

    amplitudes: np.ndarray
    spec: FactorSpec
    frame: int | None = None

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if a.shape[0] != self.spec.total_dim:
            raise DimensionMismatch(f"vector length {a.shape[0]} != spec dimension {self.spec.total_dim}")
        norm = np.linalg.norm(a)
        if abs(norm - 1) > NORM_TOL:
            raise NotNormalized(f"state norm is {norm!r}")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def normalized(cls, vec, spec, frame=None):
        vec = np.asarray(vec, dtype=complex).reshape(-1)
        return cls(vec / np.linalg.norm(vec), spec, frame)

    @property
    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per factor."""
        return self.amplitudes.reshape(self.spec.dims)

    def projector(self) -> "DensityOp":
        return DensityOp(np.outer(self.amplitudes, self.amplitudes.conj()), self.spec, self.frame)

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def equiv(self, other: "PureState", tol: float = NORM_TOL) -> bool:
        """Equality up to global phase."""
        if self.spec.dims != other.spec.dims:
            return False
        return abs(abs(self.overlap(other)) - 1) <= tol

    def phase_distance(self, other: "PureState") -> float:
        """Max amplitude error after aligning global phases."""
        a = self.amplitudes / canonical_phase(self.amplitudes)
        b = other.amplitudes / canonical_phase(other.amplitudes)
        return float(np.max(np.abs(a - b)))

    def canonical(self) -> "PureState":
        return PureState(self.amplitudes / canonical_phase(self.amplitudes), self.spec, self.frame)

    def __repr__(self):
        return f"PureState({ket_string(self)})"


@dataclass(frozen=True, eq=False)
class DensityOp:
    matrix: np.ndarray
    spec: FactorSpec
    frame: int | None = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d = self.spec.total_dim
        if m.shape != (d, d):
            raise DimensionMismatch(f"matrix shape {m.shape} != ({d}, {d})")
        herm = np.max(np.abs(m - m.conj().T)) if d else 0.0
        if herm > HERMITIAN_TOL:
            raise InvalidDensityOp(f"matrix is not Hermitian (residual {herm:.3e})")
        tr = np.trace(m).real
        if abs(tr - 1) > NORM_TOL:
            raise InvalidDensityOp(f"trace is {tr!r}")
        lo = np.linalg.eigvalsh((m + m.conj().T) / 2).min()
        if lo < -EIGEN_TOL:
            raise InvalidDensityOp(f"negative eigenvalue {lo:.3e}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_matrix(cls, m, spec, frame=None):
        """Symmetrize and renormalize the trace before validating."""
        m = np.asarray(m, dtype=complex)
        m = (m + m.conj().T) / 2
        return cls(m / np.trace(m).real, spec, frame)

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


@dataclass(frozen=True)
class ConditionalEntry:
    weight: complex
    state: PureState | None


@dataclass(frozen=True, eq=False)
class ConditionalDecomposition:
    """``Psi = sum_g f(g) |g> (x) psi(g)`` over reference tuples ``g``."""

    source_spec: FactorSpec
    entries: dict[tuple[int, ...], ConditionalEntry] = field(default_factory=dict)

    def weights(self) -> dict[tuple[int, ...], complex]:
        return {g: e.weight for g, e in self.entries.items()}

    def nonzero(self):
        return {g: e for g, e in self.entries.items() if e.state is not None}

    def reconstruct(self) -> np.ndarray:
        ref = self.source_spec.ref_positions
        ref_dims = [self.source_spec.dims[p] for p in ref]
        phys_dim = self.source_spec.subspec(self.source_spec.phys_positions).total_dim
        out = np.zeros((int(np.prod(ref_dims)), phys_dim), dtype=complex)
        for g, e in self.entries.items():
            if e.state is not None:
                out[np.ravel_multi_index(g, ref_dims)] = e.weight * e.state.amplitudes
        return out.reshape(-1)


def basis_state(spec: FactorSpec, labels: Sequence[int], frame: int | None = None) -> PureState:
    vec = np.zeros(spec.total_dim, dtype=complex)
    vec[flat_index(spec.dims, labels)] = 1
    return PureState(vec, spec, frame)


def tensor(*parts: PureState) -> PureState:
    """Kronecker product of states in argument order."""
    if len(parts) == 1 and isinstance(parts[0], (list, tuple)):
        parts = tuple(parts[0])
    if not parts:
        raise EmptyInput("tensor() needs at least one state")
    vec = parts[0].amplitudes
    spec = parts[0].spec
    for p in parts[1:]:
        vec = np.kron(vec, p.amplitudes)
        spec = spec.concat(p.spec)
    frames = [p.frame for p in parts if p.frame is not None]
    return PureState.normalized(vec, spec, frames[0] if frames else None)


def tensor_density(*parts: DensityOp) -> DensityOp:
    if not parts:
        raise EmptyInput("tensor_density() needs at least one operator")
    m, spec = parts[0].matrix, parts[0].spec
    for p in parts[1:]:
        m = np.kron(m, p.matrix)
        spec = spec.concat(p.spec)
    return DensityOp.from_matrix(m, spec)


def _trace_out(matrix: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    n = len(dims)
    keep = sorted(keep)
    drop = [i for i in range(n) if i not in keep]
    t = matrix.reshape(tuple(dims) * 2)
    # bring (keep rows, drop rows, keep cols, drop cols) and contract drop axes
    perm = keep + drop + [n + i for i in keep] + [n + i for i in drop]
    t = t.transpose(perm)
    dk = int(np.prod([dims[i] for i in keep]))
    dd = int(np.prod([dims[i] for i in drop])) if drop else 1
    t = t.reshape(dk, dd, dk, dd)
    return np.einsum("ajbj->ab", t)


def partial_trace(rho: DensityOp | PureState, keep: Iterable[int]) -> DensityOp:
    """Reduced operator on the factor positions in ``keep`` (order preserved)."""
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise EmptyKeepSet("keep set must be nonempty")
    n = len(rho.spec)
    for k in keep:
        if not 0 <= k < n:
            raise IndexError(f"factor position {k} out of range")
    sub = rho.spec.subspec(keep)
    if isinstance(rho, PureState):
        return DensityOp.from_matrix(reduced_matrix(rho.amplitudes, rho.spec.dims, keep), sub)
    if len(keep) == n:
        return rho
    return DensityOp.from_matrix(_trace_out(rho.matrix, rho.spec.dims, keep), sub)


def reduced_matrix(vec: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix of a pure vector without forming the projector."""
    keep = sorted(keep)
    drop = [i for i in range(len(dims)) if i not in keep]
    t = np.asarray(vec).reshape(dims).transpose(keep + drop)
    dk = int(np.prod([dims[i] for i in keep]))
    t = t.reshape(dk, -1)
    return t @ t.conj().T


def physical_state(rho: DensityOp | PureState) -> DensityOp:
    """Trace out every reference factor."""
    return partial_trace(rho, rho.spec.phys_positions)


def _ref_layout(spec: FactorSpec):
    ref = spec.ref_positions
    phys = spec.phys_positions
    if ref != tuple(range(len(ref))):
        raise DimensionMismatch("reference factors must precede physical factors")
    ref_dims = tuple(spec.dims[p] for p in ref)
    return ref_dims, spec.subspec(phys)


def conditional_state(psi: PureState, gvec: Sequence[int]):
    """Weight and normalized physical state of ``<g|Psi>`` for a reference tuple.

    The weight carries the norm and the phase; the state is fixed by
    :func:`canonical_phase`. Returns ``(0, None)`` when the projection
    vanishes.
    """
    ref_dims, phys_spec = _ref_layout(psi.spec)
    if len(gvec) != len(ref_dims):
        raise TupleLengthMismatch(f"expected a tuple of length {len(ref_dims)}, got {len(gvec)}")
    row = psi.amplitudes.reshape(int(np.prod(ref_dims)), phys_spec.total_dim)[flat_index(ref_dims, gvec)]
    return _split_weight(row, phys_spec)


def _split_weight(row, phys_spec):
    norm = np.linalg.norm(row)
    if norm <= ZERO_WEIGHT:
        return 0j, None
    phase = canonical_phase(row)
    return complex(norm * phase), PureState(row / (norm * phase), phys_spec)


def conditional_decomposition(psi: PureState) -> ConditionalDecomposition:
    ref_dims, phys_spec = _ref_layout(psi.spec)
    rows = psi.amplitudes.reshape(int(np.prod(ref_dims)), phys_spec.total_dim)
    entries = {}
    for flat, g in enumerate(itertools.product(*(range(d) for d in ref_dims))):
        w, st = _split_weight(rows[flat], phys_spec)
        entries[g] = ConditionalEntry(w, st)
    return ConditionalDecomposition(psi.spec, entries)


# ---------------------------------------------------------------- random states

def random_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unit vector (normalized complex Gaussian)."""
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_state(spec: FactorSpec, rng: np.random.Generator) -> PureState:
    return PureState(random_vector(spec.total_dim, rng), spec)


def random_product_state(spec: FactorSpec, rng: np.random.Generator) -> PureState:
    vec = np.ones(1, dtype=complex)
    for d in spec.dims:
        vec = np.kron(vec, random_vector(d, rng))
    return PureState.normalized(vec, spec)


def random_density(spec: FactorSpec, rng: np.random.Generator, rank: int | None = None) -> DensityOp:
    d = spec.total_dim
    rank = rank or d
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    return DensityOp.from_matrix(g @ g.conj().T, spec)


# ---------------------------------------------------------------- formatting / io

def ket_string(psi: PureState, digits: int = 4, cutoff: float = 1e-10) -> str:
    """Human readable expansion, e.g. ``0.7071|0000> + 0.7071|1011>``."""
    dims = psi.spec.dims
    terms = []
    for flat in np.flatnonzero(np.abs(psi.amplitudes) > cutoff):
        labels = np.unravel_index(flat, dims)
        sep = "," if max(dims, default=0) > 10 else ""
        ket = "|" + sep.join(str(int(x)) for x in labels) + ">"
        a = psi.amplitudes[flat]
        terms.append(f"{_fmt_complex(a, digits)}{ket}")
    if not terms:
        return "0"
    out = terms[0]
    for t in terms[1:]:
        out += f" - {t[1:]}" if t.startswith("-") else f" + {t}"
    return out


def _fmt_complex(a: complex, digits: int) -> str:
    re, im = round(a.real, digits), round(a.imag, digits)
    if im == 0:
        return f"{re:g}"
    if re == 0:
        return f"{im:g}i"
    return f"({re:g}{im:+g}i)"


def pairs(vec: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(vec).reshape(-1)]


def from_pairs(items) -> np.ndarray:
    return np.array([complex(re, im) for re, im in items], dtype=complex)


def state_to_dict(psi: PureState) -> dict:
    d = {"spec": psi.spec.to_dict(), "amplitudes": pairs(psi.amplitudes)}
    if psi.frame is not None:
        d["frame"] = psi.frame
    return d


def state_from_dict(d: dict) -> PureState:
    return PureState(from_pairs(d["amplitudes"]), FactorSpec.from_dict(d["spec"]), d.get("frame"))


def density_to_dict(rho: DensityOp) -> dict:
    d = {"spec": rho.spec.to_dict(), "matrix": [pairs(row) for row in rho.matrix]}
    if rho.frame is not None:
        d["frame"] = rho.frame
    return d


def density_from_dict(d: dict) -> DensityOp:
    m = np.array([from_pairs(row) for row in d["matrix"]])
    return DensityOp(m, FactorSpec.from_dict(d["spec"]), d.get("frame"))
