"""Reference solvers: exhaustive optimum for small instances and a greedy 1-opt baseline."""

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .analysis import canonical_pattern
from .errors import SizeError, ValidationError
from .problems import DENSE_MAX_NODES

EXACT_MAX_NODES = 24


@dataclass
class OracleResult:
    best_cut: float
    best_energy: float
    enumerated_count: int
    method: str
    optimal_codes: np.ndarray = None
    n: int = 0
    best_spins: np.ndarray = None
    start_cuts: list = field(default_factory=list)
    _patterns: list = field(default=None, repr=False)

    @property
    def optimal_configs(self):
        """Canonical bit strings of every configuration attaining the optimum found."""
        if self._patterns is None:
            self._patterns = [_code_pattern(int(c), self.n) for c in self.optimal_codes]
        return self._patterns


def _code_pattern(code, n):
    # node 0 is pinned to +1, so the canonical (flipped) string starts with '0'
    # and node k+1 reads '1' exactly when bit k is set
    return "0" + "".join("1" if (code >> k) & 1 else "0" for k in range(n - 1))


def _tolerance(instance):
    w = instance.weights
    if np.all(w == np.round(w)):
        return 0.25
    return 1e-9 * max(1.0, float(np.abs(w).sum()))


def exact_best(instance, backend=None, max_nodes=EXACT_MAX_NODES):
    """Global max cut by enumerating all ``2^(n-1)`` configurations in Gray-code order."""
    n = instance.n
    if n > max_nodes:
        raise SizeError(f"exact enumeration is capped at n <= {max_nodes}; got n = {n}")
    kern = kernels.backend if backend is None else kernels.get(backend)
    w = np.ascontiguousarray(instance.dense(np.float64))
    best_energy, codes = kern.gray_enumerate(w, _tolerance(instance))
    best_energy = float(np.round(best_energy)) if _tolerance(instance) == 0.25 else float(best_energy)
    return OracleResult(
        best_cut=0.5 * (instance.total_weight - best_energy),
        best_energy=best_energy,
        enumerated_count=1 << (n - 1),
        method="exact",
        optimal_codes=np.asarray(codes, dtype=np.uint64),
        n=n,
    )


def naive_best(instance):
    """Plain re-evaluation of every configuration; the independent check on :func:`exact_best`."""
    n = instance.n
    if n > EXACT_MAX_NODES:
        raise SizeError(f"naive enumeration is capped at n <= {EXACT_MAX_NODES}; got n = {n}")
    edges = instance.edges()
    tol = _tolerance(instance)
    best = None
    winners = []
    for code, tail in enumerate(itertools.product((1, -1), repeat=n - 1)):
        s = (1,) + tail[::-1]
        e = sum(w * s[i] * s[j] for i, j, w in edges)
        if best is None or e < best - tol:
            best = e
            winners = [code]
        elif e <= best + tol:
            winners.append(code)
    return OracleResult(
        best_cut=0.5 * (instance.total_weight - best),
        best_energy=float(best),
        enumerated_count=1 << (n - 1),
        method="naive",
        optimal_codes=np.asarray(sorted(winners), dtype=np.uint64),
        n=n,
    )


def local_search_1opt(instance, starts=20, seed=0, backend=None):
    """Best of ``starts`` greedy 1-opt descents from uniform random +-1 configurations.

    Each descent flips the single spin with the largest cut gain (lowest index
    on ties) until no flip improves the cut.
    """
    if starts < 1:
        raise ValidationError(f"starts must be >= 1, got {starts}")
    if instance.n > DENSE_MAX_NODES:
        raise SizeError(f"local search works on dense matrices; n = {instance.n} exceeds {DENSE_MAX_NODES}")
    kern = kernels.backend if backend is None else kernels.get(backend)
    w = np.ascontiguousarray(instance.dense(np.float64))
    rng = np.random.default_rng(seed)
    tol = 1e-9
    best_cut = -np.inf
    best_s = None
    cuts = []
    for _ in range(starts):
        s0 = 2.0 * rng.integers(0, 2, size=instance.n) - 1.0
        s, _flips = kern.local_search(w, s0, tol)
        energy = 0.5 * float(s @ (w @ s))
        cut = 0.5 * (instance.total_weight - energy)
        cuts.append(cut)
        if cut > best_cut:
            best_cut, best_s = cut, s
    best_energy = instance.total_weight - 2.0 * best_cut
    return OracleResult(
        best_cut=float(best_cut),
        best_energy=float(best_energy),
        enumerated_count=starts,
        method="local-search-1opt",
        optimal_codes=np.zeros(0, dtype=np.uint64),
        n=instance.n,
        best_spins=best_s.astype(np.int8),
        start_cuts=cuts,
        _patterns=[canonical_pattern(best_s.astype(np.int8))],
    )


def is_one_opt_stable(instance, spins, tol=1e-9):
    """True when no single flip increases the cut."""
    s = np.asarray(spins, dtype=np.float64)
    w = instance.dense(np.float64)
    return bool(np.all(s * (w @ s) <= tol))
