"""Digital post-distortion: learning an inverse of the lowpass-filtered PA.

Every compensator predicts one clean sample from a cyclic window of
received samples.  The complex problem is solved through a real one: a
single odd real function ``f`` on the stacked window ``[Re; Im]`` gives
``g(y) = f(xi(y)) + 1j * f(xi_rot(y))``, which commutes with rotation by
``1j`` by construction.  Each complex training pair therefore yields two
real regression rows.

Two real learners are provided, an odd-degree Volterra series fitted by
least squares and ridge regression with the kernel
``kappa(u, v) = sum_{k in D} (u.v)^k``, which spans the same function
class.  A complex memory polynomial serves as the baseline.
"""

from __future__ import annotations

import functools
import itertools
import json
from dataclasses import dataclass
from math import comb
from pathlib import Path

import numpy as np
import scipy.linalg

from .signal_core import DomainSignal, cyclic_windows, xi, xi_rot

MODEL_FORMAT_VERSION = 1
BASIS_ORDER = "graded-lex"
DEFAULT_RHO = 0.005
DEFAULT_MAX_SUPPORT = 4000
_CHUNK = 4096


class RankDeficientError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class MemorySpec:
    """Shifts ``l_i``; window entry ``i`` of sample ``n`` is ``y[(n - l_i) mod N]``."""

    shifts: tuple

    def __post_init__(self):
        shifts = tuple(int(s) for s in self.shifts)
        if not shifts:
            raise ValueError("memory needs at least one shift")
        if len(set(shifts)) != len(shifts):
            raise ValueError("memory shifts must be distinct")
        object.__setattr__(self, "shifts", shifts)

    @property
    def depth(self) -> int:
        return len(self.shifts)

    @classmethod
    def span(cls, lo: int, hi: int) -> "MemorySpec":
        return cls(tuple(range(lo, hi + 1)))


NO_MEMORY = MemorySpec((0,))
SYMMETRIC_MEMORY = MemorySpec.span(-2, 2)
ASYMMETRIC_MEMORY = MemorySpec.span(-5, 0)
MEMORY_PRESETS = {"none": NO_MEMORY, "symmetric": SYMMETRIC_MEMORY, "asymmetric": ASYMMETRIC_MEMORY}


@dataclass(frozen=True)
class DegreeSet:
    degrees: tuple

    def __post_init__(self):
        degrees = tuple(int(d) for d in self.degrees)
        if not degrees or any(d < 1 or d % 2 == 0 for d in degrees):
            raise ValueError("degrees must be odd positive integers")
        if list(degrees) != sorted(set(degrees)):
            raise ValueError("degrees must be sorted and distinct")
        object.__setattr__(self, "degrees", degrees)

    @classmethod
    def up_to(cls, d: int) -> "DegreeSet":
        if d < 1 or d % 2 == 0:
            raise ValueError("maximum degree must be odd and positive")
        return cls(tuple(range(1, d + 1, 2)))

    @property
    def max_degree(self) -> int:
        return self.degrees[-1]

    def __iter__(self):
        return iter(self.degrees)


@dataclass(frozen=True)
class MonomialBasis:
    """Monomials in ``num_vars`` real variables with total degree in ``degrees``.

    Each term is a non-decreasing tuple of variable indices (a multiset);
    terms are ordered by degree, then lexicographically.
    """

    num_vars: int
    degrees: DegreeSet
    terms: tuple

    @property
    def size(self) -> int:
        return len(self.terms)

    def exponents(self) -> np.ndarray:
        out = np.zeros((self.size, self.num_vars), dtype=int)
        for row, term in enumerate(self.terms):
            for v in term:
                out[row, v] += 1
        return out


def enumerate_monomials(num_vars: int, degrees: DegreeSet) -> MonomialBasis:
    terms = tuple(t for k in degrees for t in itertools.combinations_with_replacement(range(num_vars), k))
    return MonomialBasis(num_vars, degrees, terms)


def monomial_count(num_vars: int, degrees) -> int:
    """Closed form ``sum_k C(k + n - 1, k)``, matching :func:`enumerate_monomials`."""
    return sum(comb(k + num_vars - 1, k) for k in degrees)


@functools.lru_cache(maxsize=32)
def _build_plan(num_vars: int, max_degree: int):
    # For each degree k: parent column in degree k-1 and the variable to multiply.
    plan = []
    prev_index = {(): 0}
    for k in range(1, max_degree + 1):
        combos = list(itertools.combinations_with_replacement(range(num_vars), k))
        parents = np.array([prev_index[c[:-1]] for c in combos], dtype=np.intp)
        variables = np.array([c[-1] for c in combos], dtype=np.intp)
        plan.append((parents, variables))
        prev_index = {c: i for i, c in enumerate(combos)}
    return plan


def volterra_features(y, basis: MonomialBasis) -> np.ndarray:
    """Evaluate every basis monomial; ``y`` is one window or a stack of rows."""
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1
    Y = np.atleast_2d(y)
    if Y.shape[1] != basis.num_vars:
        raise ValueError(f"expected {basis.num_vars} variables, got {Y.shape[1]}")
    blocks = []
    level = np.ones((Y.shape[0], 1))
    wanted = set(basis.degrees)
    for k, (parents, variables) in enumerate(_build_plan(basis.num_vars, basis.degrees.max_degree), 1):
        level = level[:, parents] * Y[:, variables]
        if k in wanted:
            blocks.append(level)
    A = np.concatenate(blocks, axis=1)
    return A[0] if single else A


@dataclass(frozen=True)
class TrainingSet:
    """Real regression rows: ``inputs[2n] = xi(window_n)`` with target ``Re(clean_n)``,
    ``inputs[2n + 1] = xi_rot(window_n)`` with target ``Im(clean_n)``."""

    inputs: np.ndarray
    targets: np.ndarray
    memory: MemorySpec

    def __post_init__(self):
        if self.inputs.shape[0] != self.targets.shape[0]:
            raise ValueError("inputs and targets differ in length")
        if not (np.all(np.isfinite(self.inputs)) and np.all(np.isfinite(self.targets))):
            raise ValueError("training data must be finite")

    @property
    def rows(self) -> int:
        return self.inputs.shape[0]

    @property
    def complex_samples(self) -> int:
        return self.rows // 2


def _as_symbols(x) -> list:
    if isinstance(x, DomainSignal):
        return [np.asarray(x.samples)]
    if isinstance(x, np.ndarray) and x.ndim == 1:
        return [x]
    return [np.asarray(s.samples if isinstance(s, DomainSignal) else s, dtype=complex) for s in x]


def real_rows(windows: np.ndarray) -> np.ndarray:
    """Interleave ``xi`` and ``xi_rot`` of each complex window."""
    windows = np.asarray(windows, dtype=complex)
    out = np.empty((2 * windows.shape[0], 2 * windows.shape[1]))
    out[0::2] = xi(windows)
    out[1::2] = xi_rot(windows)
    return out


def build_training_set(clean, received, memory: MemorySpec) -> TrainingSet:
    """Real training rows from (clean, received) symbol pairs.

    ``clean`` and ``received`` are single symbols or equally long lists of
    symbols; windows wrap within each symbol.
    """
    clean, received = _as_symbols(clean), _as_symbols(received)
    if len(clean) != len(received):
        raise ValueError("different number of clean and received symbols")
    inputs, targets = [], []
    for c, r in zip(clean, received):
        c = np.asarray(c, dtype=complex)
        r = np.asarray(r, dtype=complex)
        if c.shape != r.shape:
            raise ValueError(f"length mismatch: {c.shape[0]} vs {r.shape[0]}")
        inputs.append(real_rows(cyclic_windows(r, memory.shifts)))
        t = np.empty(2 * c.shape[0])
        t[0::2] = c.real
        t[1::2] = c.imag
        targets.append(t)
    return TrainingSet(np.concatenate(inputs), np.concatenate(targets), memory)


# -- Volterra ---------------------------------------------------------------

@dataclass(frozen=True)
class VolterraModel:
    h: np.ndarray
    basis: MonomialBasis
    memory: MemorySpec

    def __post_init__(self):
        if self.h.shape != (self.basis.size,):
            raise ValueError("coefficient vector does not match the basis")

    @property
    def degrees(self) -> DegreeSet:
        return self.basis.degrees

    def predict_real(self, Y) -> np.ndarray:
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        out = np.empty(Y.shape[0])
        for s in range(0, Y.shape[0], _CHUNK):
            out[s:s + _CHUNK] = volterra_features(Y[s:s + _CHUNK], self.basis) @ self.h
        return out


def volterra_fit(ts: TrainingSet, basis: MonomialBasis, ridge: float = 0.0) -> VolterraModel:
    """Least squares (plus optional ridge) over the monomial features.

    Solved by pivoted QR on the feature matrix, augmented with
    ``sqrt(ridge) * I`` rows when ``ridge > 0``.
    """
    if ridge < 0:
        raise ValueError("ridge must be non-negative")
    if ts.rows < 1:
        raise ValueError("empty training set")
    if basis.num_vars != 2 * ts.memory.depth:
        raise ValueError("basis does not match the training windows")
    A = volterra_features(ts.inputs, basis)
    x = ts.targets
    if ridge > 0:
        A = np.vstack([A, np.sqrt(ridge) * np.eye(basis.size)])
        x = np.concatenate([x, np.zeros(basis.size)])
    h, _, rank, _ = scipy.linalg.lstsq(A, x, cond=1e-13, lapack_driver="gelsy")
    if rank < basis.size:
        raise RankDeficientError(
            f"feature matrix has rank {rank} < {basis.size}; pass ridge > 0 or add training data")
    return VolterraModel(h, basis, ts.memory)


# -- kernel method ----------------------------------------------------------

def kernel_eval(u, v, degrees: DegreeSet) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError("vectors differ in length")
    s = float(u @ v)
    return sum(s ** k for k in degrees)


def gram(U, V, degrees: DegreeSet) -> np.ndarray:
    """``G[i, j] = kappa(U[i], V[j])``."""
    G = np.asarray(U, dtype=float) @ np.asarray(V, dtype=float).T
    G2 = G * G
    power = G
    out = np.zeros_like(G)
    for k in range(1, degrees.max_degree + 1, 2):
        if k > 1:
            power = power * G2
        if k in degrees.degrees:
            out += power
    return out


@dataclass(frozen=True)
class KernelModel:
    supports: np.ndarray
    beta: np.ndarray
    lam: float
    degrees: DegreeSet
    memory: MemorySpec

    def __post_init__(self):
        if self.beta.shape != (self.supports.shape[0],):
            raise ValueError("one weight per support row required")
        if not self.lam > 0:
            raise ValueError("lambda must be positive")

    def predict_real(self, Y) -> np.ndarray:
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        out = np.empty(Y.shape[0])
        for s in range(0, Y.shape[0], _CHUNK):
            out[s:s + _CHUNK] = gram(Y[s:s + _CHUNK], self.supports, self.degrees) @ self.beta
        return out


def default_lambda(K: np.ndarray, rho: float = DEFAULT_RHO) -> float:
    """``rho * tr(K) / rows``."""
    return rho * float(np.trace(K)) / K.shape[0]


def subsample_pairs(ts: TrainingSet, max_rows: int | None) -> TrainingSet:
    """Keep at most ``max_rows`` rows, taking whole (xi, xi_rot) pairs at a uniform stride."""
    if max_rows is None or ts.rows <= max_rows:
        return ts
    pairs = ts.complex_samples
    keep = max(1, max_rows // 2)
    idx = np.rint(np.linspace(0, pairs - 1, keep)).astype(int)
    rows = np.stack([2 * idx, 2 * idx + 1], axis=1).ravel()
    return TrainingSet(ts.inputs[rows], ts.targets[rows], ts.memory)


def _kernel_system(ts, degrees, lam, rho, max_support):
    ts = subsample_pairs(ts, max_support)
    K = gram(ts.inputs, ts.inputs, degrees)
    if not np.all(np.isfinite(K)):
        raise ValueError("Gram matrix has non-finite entries")
    if lam is None:
        lam = default_lambda(K, rho)
    if not lam > 0:
        raise ValueError("lambda must be positive")
    return ts, K, float(lam)


def kernel_fit(ts: TrainingSet, degrees: DegreeSet, lam: float | None = None, *,
               rho: float = DEFAULT_RHO, max_support: int | None = DEFAULT_MAX_SUPPORT) -> KernelModel:
    """Kernel ridge regression, ``beta = (K + lam I)^-1 targets``.

    ``lam`` defaults to ``rho * tr(K) / rows``.  At most ``max_support``
    rows are kept as support vectors.
    """
    ts, K, lam = _kernel_system(ts, degrees, lam, rho, max_support)
    K[np.diag_indices_from(K)] += lam
    beta = scipy.linalg.cho_solve(scipy.linalg.cho_factor(K, lower=True), ts.targets)
    return KernelModel(ts.inputs.copy(), beta, lam, degrees, ts.memory)


def kernel_fit_via_projection(ts: TrainingSet, degrees: DegreeSet, lam: float | None = None, *,
                              rho: float = DEFAULT_RHO,
                              max_support: int | None = DEFAULT_MAX_SUPPORT) -> KernelModel:
    """Same minimizer, reached as a projection in ``H_K x R^rows``.

    The constraint vectors ``b_i = (kappa(y_i, .), -lam e_i)`` have Gram
    matrix ``lam K + lam^2 I`` under the inner product
    ``lam <f, g>_H + <u, v>``, and the projection of ``(0, targets)`` onto
    their span has coefficients ``alpha`` solving
    ``(lam K + lam^2 I) alpha = -lam targets``.  The minimizer keeps the
    orthogonal remainder, whose function part is ``-sum alpha_i kappa(y_i, .)``.
    """
    ts, K, lam = _kernel_system(ts, degrees, lam, rho, max_support)
    normal = lam * K
    normal[np.diag_indices_from(normal)] += lam * lam
    alpha = scipy.linalg.cho_solve(scipy.linalg.cho_factor(normal, lower=True), -lam * ts.targets)
    return KernelModel(ts.inputs.copy(), -alpha, lam, degrees, ts.memory)


# -- complex memory polynomial baseline -------------------------------------

@dataclass(frozen=True)
class MpModel:
    """``x_hat[n] = sum_{k, l} c[k, l] y[n-l] |y[n-l]|^(k-1)``, ``c`` of shape (|D|, L)."""

    coeffs: np.ndarray
    degrees: DegreeSet
    memory: MemorySpec

    def __post_init__(self):
        if self.coeffs.shape != (len(self.degrees.degrees), self.memory.depth):
            raise ValueError("coefficient shape does not match degrees x memory")


def mp_basis(windows: np.ndarray, degrees: DegreeSet) -> np.ndarray:
    windows = np.atleast_2d(np.asarray(windows, dtype=complex))
    mag = np.abs(windows)
    return np.concatenate([windows * mag ** (k - 1) for k in degrees], axis=1)


def mp_fit(clean, received, degrees: DegreeSet, memory: MemorySpec) -> MpModel:
    """Complex least squares through the normal equations ``A^H A c = A^H x``."""
    clean, received = _as_symbols(clean), _as_symbols(received)
    if len(clean) != len(received):
        raise ValueError("different number of clean and received symbols")
    A = np.concatenate([mp_basis(cyclic_windows(np.asarray(r, dtype=complex), memory.shifts), degrees)
                        for r in received])
    x = np.concatenate([np.asarray(c, dtype=complex) for c in clean])
    if A.shape[0] != x.shape[0]:
        raise ValueError("clean and received lengths differ")
    G = A.conj().T @ A
    if not np.all(np.isfinite(G)) or np.linalg.cond(G) > 1e14:
        raise RankDeficientError("memory-polynomial normal equations are singular")
    try:
        c = scipy.linalg.cho_solve(scipy.linalg.cho_factor(G, lower=True), A.conj().T @ x)
    except np.linalg.LinAlgError as exc:
        raise RankDeficientError("memory-polynomial normal equations are singular") from exc
    return MpModel(c.reshape(len(degrees.degrees), memory.depth), degrees, memory)


def mp_predict(model: MpModel, windows) -> np.ndarray:
    return mp_basis(windows, model.degrees) @ model.coeffs.ravel()


# -- prediction -------------------------------------------------------------

def predict_windows(model, windows) -> np.ndarray:
    """Complex predictions for a stack of complex windows, shape ``(n, L)``."""
    windows = np.atleast_2d(np.asarray(windows, dtype=complex))
    if windows.shape[1] != model.memory.depth:
        raise ValueError(f"window length {windows.shape[1]} != memory depth {model.memory.depth}")
    if isinstance(model, MpModel):
        return mp_predict(model, windows)
    re = model.predict_real(xi(windows))
    im = model.predict_real(xi_rot(windows))
    return re + 1j * im


def predict_complex(model, window) -> complex:
    return complex(predict_windows(model, np.asarray(window, dtype=complex)[None, :])[0])


def compensate(model, received, memory: MemorySpec | None = None):
    """Apply ``model`` to every cyclic window of ``received``.

    A :class:`DomainSignal` comes back with the same domain tag.
    """
    if memory is not None and memory != model.memory:
        raise ValueError("memory spec does not match the model")
    samples = received.samples if isinstance(received, DomainSignal) else np.asarray(received, dtype=complex)
    out = predict_windows(model, cyclic_windows(samples, model.memory.shifts))
    if isinstance(received, DomainSignal):
        return DomainSignal(out, received.kind, received.size)
    return out


def fit_linear_gain(clean, received) -> MpModel:
    """Single complex gain, the best linear (no-compensation) receiver."""
    return mp_fit(clean, received, DegreeSet((1,)), NO_MEMORY)


# -- serialization ----------------------------------------------------------

def model_to_dict(model) -> dict:
    if not isinstance(model, (VolterraModel, KernelModel, MpModel)):
        raise TypeError(f"cannot serialize {type(model).__name__}")
    common = {"memory": list(model.memory.shifts), "degrees": list(model.degrees.degrees)}
    if isinstance(model, VolterraModel):
        return {"kind": "volterra", **common, "basis_order": BASIS_ORDER, "h": model.h.tolist()}
    if isinstance(model, KernelModel):
        return {"kind": "kernel", **common, "lambda": model.lam, "beta": model.beta.tolist(),
                "supports": model.supports.tolist()}
    c = model.coeffs
    return {"kind": "mp", **common, "coeffs_re": c.real.tolist(), "coeffs_im": c.imag.tolist()}


def model_from_dict(doc: dict):
    memory = MemorySpec(tuple(doc["memory"]))
    degrees = DegreeSet(tuple(doc["degrees"]))
    kind = doc["kind"]
    if kind == "volterra":
        if doc.get("basis_order") != BASIS_ORDER:
            raise ValueError(f"unsupported basis order {doc.get('basis_order')!r}")
        basis = enumerate_monomials(2 * memory.depth, degrees)
        return VolterraModel(np.asarray(doc["h"], dtype=float), basis, memory)
    if kind == "kernel":
        return KernelModel(np.asarray(doc["supports"], dtype=float), np.asarray(doc["beta"], dtype=float),
                           float(doc["lambda"]), degrees, memory)
    if kind == "mp":
        c = np.asarray(doc["coeffs_re"]) + 1j * np.asarray(doc["coeffs_im"])
        return MpModel(c, degrees, memory)
    raise ValueError(f"unknown model kind {kind!r}")


def save_models(models: dict, path) -> None:
    doc = {"version": MODEL_FORMAT_VERSION,
           "models": {name: model_to_dict(m) for name, m in models.items()}}
    Path(path).write_text(json.dumps(doc, indent=1))


def load_models(path) -> dict:
    doc = json.loads(Path(path).read_text())
    if doc.get("version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model file version {doc.get('version')!r}")
    return {name: model_from_dict(d) for name, d in doc["models"].items()}
