"""Hermitian operators on labelled tensor-product spaces.

Subsystems are always ordered as in the layout; every Kronecker product in
the package follows that order (A_I, A_O, B_I, B_O, then C_I and T_I when
present).
"""

from __future__ import annotations

import dataclasses
from functools import reduce
from typing import Iterable, Mapping, Sequence

import numpy as np

from .config import MAX_DIMENSION, TOL


@dataclasses.dataclass(frozen=True)
class SystemLayout:
    """Ordered labelled subsystems with their dimensions and party tags."""

    systems: tuple[tuple[str, int], ...]
    parties: tuple[str, ...]

    def __post_init__(self):
        labels = [label for label, _ in self.systems]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate subsystem labels in {labels}")
        if len(self.parties) != len(self.systems):
            raise ValueError("every subsystem needs exactly one party tag")
        for label, dim in self.systems:
            if int(dim) != dim or dim < 1:
                raise ValueError(f"dimension of {label} must be a positive integer")
        if self.dim > MAX_DIMENSION:
            raise ValueError(f"total dimension {self.dim} exceeds {MAX_DIMENSION}")

    @classmethod
    def of(cls, *entries: tuple[str, int, str]) -> "SystemLayout":
        """Build a layout from ``(label, dim, party)`` triples."""
        return cls(tuple((lab, int(d)) for lab, d, _ in entries), tuple(p for *_, p in entries))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.systems)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.systems)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64))

    @property
    def party_of(self) -> dict[str, str]:
        return dict(zip(self.labels, self.parties))

    @property
    def is_qubit(self) -> bool:
        return all(d == 2 for d in self.dims)

    def __len__(self):
        return len(self.systems)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown subsystem {label!r}; layout has {self.labels}") from None

    def dim_of(self, labels: Iterable[str]) -> int:
        return int(np.prod([self.dims[self.index(lab)] for lab in labels], dtype=np.int64))

    def drop(self, labels: Iterable[str]) -> "SystemLayout":
        gone = set(labels)
        for lab in gone:
            self.index(lab)
        keep = [i for i, lab in enumerate(self.labels) if lab not in gone]
        return SystemLayout(tuple(self.systems[i] for i in keep), tuple(self.parties[i] for i in keep))

    def to_json(self) -> list[dict]:
        return [{"label": lab, "dim": d, "party": p} for (lab, d), p in zip(self.systems, self.parties)]

    @classmethod
    def from_json(cls, entries: Sequence[Mapping]) -> "SystemLayout":
        return cls.of(*((e["label"], e["dim"], e["party"]) for e in entries))


BIPARTITE = SystemLayout.of(("A_I", 2, "A"), ("A_O", 2, "A"), ("B_I", 2, "B"), ("B_O", 2, "B"))
TRIPARTITE = SystemLayout.of(
    ("A_I", 2, "A"), ("A_O", 2, "A"), ("B_I", 2, "B"), ("B_O", 2, "B"), ("C_I", 2, "C")
)
#: tripartite layout plus the target output, used to build the switch before tracing it out
SWITCH_PURE = SystemLayout.of(
    ("A_I", 2, "A"), ("A_O", 2, "A"), ("B_I", 2, "B"), ("B_O", 2, "B"), ("C_I", 2, "C"), ("T_I", 2, "T")
)


def _hermitian_defect(matrix: np.ndarray) -> float:
    scale = float(np.max(np.abs(matrix))) if matrix.size else 0.0
    defect = float(np.max(np.abs(matrix - matrix.conj().T))) if matrix.size else 0.0
    return defect / scale if scale > 0 else defect


class Operator:
    """A Hermitian matrix on a :class:`SystemLayout`.

    The stored matrix is read-only and exactly Hermitian; inputs that are
    Hermitian up to ``TOL.hermitian`` (relative) are symmetrised.
    """

    __slots__ = ("layout", "matrix", "_pauli")

    def __init__(self, layout: SystemLayout, matrix, *, _pauli=None):
        m = np.array(matrix, dtype=complex)
        if m.shape != (layout.dim, layout.dim):
            raise ValueError(f"matrix shape {m.shape} does not match layout dimension {layout.dim}")
        if _hermitian_defect(m) > TOL.hermitian:
            raise ValueError("operator is not Hermitian")
        m = 0.5 * (m + m.conj().T)
        m.flags.writeable = False
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "_pauli", _pauli)

    def __setattr__(self, name, value):
        raise AttributeError("Operator is immutable")

    def __reduce__(self):
        return (_rebuild_operator, (self.layout, np.array(self.matrix), self._pauli))

    def __repr__(self):
        return f"Operator({list(self.layout.labels)}, dim={self.layout.dim})"

    @classmethod
    def identity(cls, layout: SystemLayout) -> "Operator":
        return cls(layout, np.eye(layout.dim))

    @classmethod
    def zeros(cls, layout: SystemLayout) -> "Operator":
        return cls(layout, np.zeros((layout.dim, layout.dim)))

    @property
    def dim(self) -> int:
        return self.layout.dim

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def _check(self, other: "Operator"):
        if not isinstance(other, Operator):
            return NotImplemented
        if other.layout != self.layout:
            raise ValueError("layout mismatch")
        return None

    def __add__(self, other):
        if (bad := self._check(other)) is not None:
            return bad
        return Operator(self.layout, self.matrix + other.matrix)

    def __sub__(self, other):
        if (bad := self._check(other)) is not None:
            return bad
        return Operator(self.layout, self.matrix - other.matrix)

    def __neg__(self):
        return Operator(self.layout, -self.matrix)

    def __mul__(self, scalar):
        if not np.isscalar(scalar) or np.iscomplexobj(scalar):
            return NotImplemented
        return Operator(self.layout, float(scalar) * self.matrix)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / float(scalar))

    def allclose(self, other: "Operator", atol: float = 1e-12) -> bool:
        return self.layout == other.layout and bool(np.allclose(self.matrix, other.matrix, rtol=0, atol=atol))

    def norm(self) -> float:
        """Frobenius norm."""
        return float(np.linalg.norm(self.matrix))


def _rebuild_operator(layout, matrix, pauli_cache):
    return Operator(layout, matrix, _pauli=pauli_cache)


def as_operator(obj) -> Operator:
    """Accept an :class:`Operator` or anything wrapping one in ``.op``."""
    if isinstance(obj, Operator):
        return obj
    op = getattr(obj, "op", None)
    if isinstance(op, Operator):
        return op
    raise TypeError(f"expected an Operator, got {type(obj).__name__}")


def kron(*factors) -> np.ndarray:
    return reduce(np.kron, factors)


def tensor(*ops: Operator) -> Operator:
    """Tensor product of operators, concatenating their layouts."""
    systems = sum((op.layout.systems for op in ops), ())
    parties = sum((op.layout.parties for op in ops), ())
    return Operator(SystemLayout(systems, parties), kron(*(op.matrix for op in ops)))


def permute_systems(matrix: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors: factor ``perm[k]`` of the input becomes factor ``k``."""
    n = len(dims)
    t = np.asarray(matrix).reshape(tuple(dims) * 2)
    t = t.transpose(tuple(perm) + tuple(n + p for p in perm))
    d = int(np.prod(dims))
    return t.reshape(d, d)


def _partial_trace_matrix(matrix: np.ndarray, dims: Sequence[int], traced: Sequence[int]) -> np.ndarray:
    n = len(dims)
    keep = [i for i in range(n) if i not in traced]
    t = matrix.reshape(tuple(dims) * 2)
    # einsum subscripts: traced row/col axes share a letter
    letters = [chr(ord("a") + i) for i in range(2 * n)]
    for i in traced:
        letters[n + i] = letters[i]
    out = [letters[i] for i in keep] + [letters[n + i] for i in keep]
    res = np.einsum("".join(letters) + "->" + "".join(out), t)
    dk = int(np.prod([dims[i] for i in keep], dtype=np.int64))
    return res.reshape(dk, dk)


def partial_trace(H, over: Iterable[str]) -> Operator:
    """Trace out the named subsystems; the result drops them from the layout."""
    H = as_operator(H)
    over = set(over)
    traced = sorted(H.layout.index(lab) for lab in over)
    m = _partial_trace_matrix(H.matrix, H.layout.dims, traced)
    return Operator(H.layout.drop(over), m)


def _trace_and_replace_matrix(matrix: np.ndarray, layout: SystemLayout, labels: frozenset) -> np.ndarray:
    if not labels:
        return matrix
    dims = layout.dims
    traced = sorted(layout.index(lab) for lab in labels)
    keep = [i for i in range(len(dims)) if i not in traced]
    reduced = _partial_trace_matrix(matrix, dims, traced)
    dx = int(np.prod([dims[i] for i in traced]))
    embedded = np.kron(reduced, np.eye(dx) / dx)
    # embedded factors are ordered keep + traced; move them back
    order = keep + traced
    perm = [order.index(i) for i in range(len(dims))]
    return permute_systems(embedded, [dims[i] for i in order], perm)


class Replace:
    """Linear combination of trace-and-replace maps.

    ``Replace.on("B_O")`` is the map that traces out B_O and re-inserts the
    normalised identity there; products compose maps (the subsystem sets are
    united) and sums are taken termwise, so the validity projectors can be
    written down directly, e.g. ``1 - (1 - B_O) * A_I * A_O``.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[frozenset, float] | None = None):
        clean = {frozenset(k): float(v) for k, v in (terms or {}).items() if v != 0}
        object.__setattr__(self, "terms", clean)

    @classmethod
    def on(cls, *labels: str) -> "Replace":
        return cls({frozenset(labels): 1.0})

    @classmethod
    def one(cls) -> "Replace":
        return cls({frozenset(): 1.0})

    @staticmethod
    def _coerce(other) -> "Replace":
        if isinstance(other, Replace):
            return other
        if np.isscalar(other):
            return Replace({frozenset(): float(other)})
        raise TypeError(f"cannot combine Replace with {type(other).__name__}")

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0.0) + v
        return Replace(out)

    __radd__ = __add__

    def __neg__(self):
        return Replace({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        out: dict[frozenset, float] = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = k1 | k2
                out[k] = out.get(k, 0.0) + v1 * v2
        return Replace(out)

    __rmul__ = __mul__

    def __repr__(self):
        parts = []
        for k, v in sorted(self.terms.items(), key=lambda kv: (len(kv[0]), sorted(kv[0]))):
            name = "".join(sorted(k)) if k else "1"
            parts.append(f"{v:+g}*{name}")
        return "Replace(" + " ".join(parts) + ")"

    @property
    def labels(self) -> frozenset:
        return frozenset().union(*self.terms) if self.terms else frozenset()

    def __call__(self, H) -> Operator:
        H = as_operator(H)
        for lab in self.labels:
            H.layout.index(lab)
        out = np.zeros_like(H.matrix)
        for subset, coeff in self.terms.items():
            out = out + coeff * _trace_and_replace_matrix(H.matrix, H.layout, subset)
        return Operator(H.layout, out)

    def pauli_diagonal(self, layout: SystemLayout) -> np.ndarray:
        """Eigenvalue of the map on every Pauli string of ``layout``.

        Each trace-and-replace map keeps a Pauli string when the string is
        the identity on the replaced subsystems and kills it otherwise.
        """
        from .pauli import string_digits

        digits = string_digits(len(layout))
        out = np.zeros(len(digits))
        for subset, coeff in self.terms.items():
            cols = [layout.index(lab) for lab in subset]
            out += coeff * np.all(digits[:, cols] == 0, axis=1)
        return out


def trace_and_replace(H, X) -> Operator:
    """Apply ``H -> 1^X/d_X (x) tr_X H`` (re-embedded in the original order).

    ``X`` is a collection of labels or a :class:`Replace` expression.
    """
    if not isinstance(X, Replace):
        X = Replace.on(*X)
    return X(H)


def _as_matrix(H) -> np.ndarray:
    if isinstance(H, np.ndarray):
        if H.ndim != 2 or H.shape[0] != H.shape[1] or _hermitian_defect(H) > TOL.hermitian:
            raise ValueError("expected a square Hermitian matrix")
        return 0.5 * (H + H.conj().T)
    return as_operator(H).matrix


def eigenvalues(H) -> np.ndarray:
    return np.linalg.eigvalsh(_as_matrix(H))


def min_eigenvalue(H) -> float:
    return float(eigenvalues(H)[0])


def is_psd(H, tol: float | None = None) -> bool:
    """``min_eig >= -tol * ||H||`` with the spectral norm (relative by default).

    ``TOL.psd_absolute``, when set, replaces the relative test.
    """
    ev = eigenvalues(H)
    if tol is None and TOL.psd_absolute is not None:
        return bool(ev[0] >= -TOL.psd_absolute)
    tol = TOL.psd if tol is None else tol
    scale = float(np.max(np.abs(ev))) if ev.size else 0.0
    return bool(ev[0] >= -tol * max(scale, 1e-300))


def hs_inner(A, B) -> float:
    """Hilbert-Schmidt inner product ``tr[A B]`` of Hermitian operators."""
    if isinstance(A, np.ndarray) or isinstance(B, np.ndarray):
        a, b = _as_matrix(A), _as_matrix(B)
        if a.shape != b.shape:
            raise ValueError("shape mismatch")
    else:
        A, B = as_operator(A), as_operator(B)
        if A.layout != B.layout:
            raise ValueError("layout mismatch")
        a, b = A.matrix, B.matrix
    return float(np.sum(a * b.T).real)
