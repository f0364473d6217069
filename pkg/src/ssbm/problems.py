"""Problem instances: signed unit-weight graphs plus generators and the edge-list format.

Files use 1-based node ids (the usual max-cut benchmark convention); in memory
everything is 0-based. Weights carry only the sign and relative size of a
coupling; the overall coupling magnitude is a run parameter.
"""

import hashlib
import os

import numpy as np

from .errors import ParseError, ValidationError

# Below this edge density a compressed row layout beats the dense matrix.
DENSE_MIN_DENSITY = 0.25
DENSE_MAX_NODES = 20000


class ProblemInstance:
    """Immutable undirected graph with nonzero signed weights.

    Edges are normalized to ``i < j`` and sorted. Positive weights are
    antiferro couplings (they favour opposite spins), negative weights are
    ferro couplings.
    """

    def __init__(self, n, rows, cols, weights, label=None):
        n = int(n)
        if n < 1:
            raise ValidationError(f"node count must be positive, got {n}")
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        weights = np.asarray(weights, dtype=np.float64).ravel()
        if not (rows.size == cols.size == weights.size):
            raise ValidationError("edge arrays differ in length")
        if rows.size:
            if rows.min() < 0 or cols.min() < 0 or rows.max() >= n or cols.max() >= n:
                raise ValidationError(f"node index out of range for n={n}")
            if np.any(rows == cols):
                bad = int(rows[rows == cols][0])
                raise ValidationError(f"self-loop on node {bad}")
            if np.any(weights == 0) or not np.all(np.isfinite(weights)):
                raise ValidationError("edge weights must be finite and nonzero")
        lo = np.minimum(rows, cols)
        hi = np.maximum(rows, cols)
        order = np.lexsort((hi, lo))
        lo, hi, weights = lo[order], hi[order], weights[order]
        if lo.size > 1:
            dup = (lo[1:] == lo[:-1]) & (hi[1:] == hi[:-1])
            if np.any(dup):
                k = int(np.flatnonzero(dup)[0])
                raise ValidationError(f"duplicate edge ({lo[k]}, {hi[k]})")
        for arr in (lo, hi, weights):
            arr.flags.writeable = False
        self.n = n
        self.rows = lo
        self.cols = hi
        self.weights = weights
        self.label = label
        self._cache = {}

    @classmethod
    def from_edges(cls, n, edges, label=None):
        edges = list(edges)
        if not edges:
            return cls(n, [], [], [], label=label)
        i, j, w = zip(*edges)
        return cls(n, i, j, w, label=label)

    def __repr__(self):
        tag = f", label={self.label!r}" if self.label else ""
        return f"ProblemInstance(n={self.n}, edges={self.num_edges}{tag})"

    def __eq__(self, other):
        if not isinstance(other, ProblemInstance):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.cols, other.cols)
            and np.array_equal(self.weights, other.weights)
        )

    __hash__ = None

    def __getstate__(self):
        # caches hold backend handles and large matrices; rebuild them lazily
        state = self.__dict__.copy()
        state["_cache"] = {}
        return state

    @property
    def num_edges(self):
        return int(self.rows.size)

    def edges(self):
        """Edge list as ``(i, j, w)`` tuples. Avoid on very large instances."""
        return list(zip(self.rows.tolist(), self.cols.tolist(), self.weights.tolist()))

    @property
    def degree(self):
        if "degree" not in self._cache:
            deg = np.bincount(self.rows, minlength=self.n) + np.bincount(self.cols, minlength=self.n)
            self._cache["degree"] = deg
        return self._cache["degree"]

    @property
    def abs_degree(self):
        """Per-node sum of ``|w|``."""
        if "abs_degree" not in self._cache:
            a = np.abs(self.weights)
            self._cache["abs_degree"] = np.bincount(self.rows, a, self.n) + np.bincount(self.cols, a, self.n)
        return self._cache["abs_degree"]

    @property
    def total_weight(self):
        return float(self.weights.sum())

    @property
    def is_complete(self):
        return self.num_edges == self.n * (self.n - 1) // 2

    @property
    def n_ferro(self):
        return int(np.count_nonzero(self.weights < 0))

    @property
    def n_antiferro(self):
        return int(np.count_nonzero(self.weights > 0))

    def prefers_dense(self):
        if self.n > DENSE_MAX_NODES or self.n < 2:
            return False
        if not np.all(self.weights == np.round(self.weights)) or np.any(np.abs(self.weights) > 127):
            return False
        return 2 * self.num_edges >= DENSE_MIN_DENSITY * self.n * self.n

    def dense(self, dtype=np.float64):
        """Symmetric weight matrix with a zero diagonal."""
        w = np.zeros((self.n, self.n), dtype=dtype)
        w[self.rows, self.cols] = self.weights
        w[self.cols, self.rows] = self.weights
        return w

    def csr(self):
        """Symmetric adjacency in compressed-row form: ``(indptr, indices, weights)``."""
        src = np.concatenate((self.rows, self.cols))
        dst = np.concatenate((self.cols, self.rows))
        wts = np.concatenate((self.weights, self.weights))
        order = np.lexsort((dst, src))
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=self.n), out=indptr[1:])
        return indptr, dst[order], wts[order]

    def fingerprint(self):
        h = hashlib.sha256()
        h.update(f"{self.n}:{self.num_edges}:".encode())
        h.update(np.ascontiguousarray(self.rows, dtype="<i8").tobytes())
        h.update(np.ascontiguousarray(self.cols, dtype="<i8").tobytes())
        h.update(np.ascontiguousarray(self.weights, dtype="<f8").tobytes())
        return h.hexdigest()


def gen_circulant(n, offsets, sign=1):
    """Circulant graph: node ``i`` joined to ``i + o (mod n)`` for every offset ``o``."""
    n = int(n)
    if n < 3:
        raise ValidationError(f"circulant graphs need n >= 3, got {n}")
    if sign not in (1, -1):
        raise ValidationError(f"sign must be +1 or -1, got {sign}")
    offsets = [int(o) for o in offsets]
    if not offsets:
        raise ValidationError("at least one offset is required")
    for o in offsets:
        if not 1 <= o <= n / 2:
            raise ValidationError(f"offset {o} outside [1, {n // 2}] for n={n}")
    pairs = set()
    for o in offsets:
        for i in range(n):
            j = (i + o) % n
            pairs.add((min(i, j), max(i, j)))
    pairs = sorted(pairs)
    rows, cols = zip(*pairs)
    label = f"circulant n={n} offsets={','.join(map(str, offsets))}"
    return ProblemInstance(n, rows, cols, [float(sign)] * len(pairs), label=label)


def gen_complete(n, mode="random-pm1", seed=0):
    """Complete graph with all-antiferro or random +-1 weights."""
    n = int(n)
    if n < 2:
        raise ValidationError(f"complete graphs need n >= 2, got {n}")
    rows, cols = np.triu_indices(n, 1)
    if mode == "all-af":
        weights = np.ones(rows.size)
    elif mode == "random-pm1":
        rng = np.random.default_rng(seed)
        weights = 2.0 * rng.integers(0, 2, size=rows.size) - 1.0
    else:
        raise ValidationError(f"unknown complete-graph mode {mode!r}")
    return ProblemInstance(n, rows, cols, weights, label=f"complete n={n} {mode} seed={seed}")


def j_upper_bound(instance):
    """Reciprocal of the largest number of couplings acting on one node."""
    if instance.num_edges == 0:
        raise ValidationError("coupling bound undefined for an edgeless instance")
    return 1.0 / int(instance.degree.max())


def _format_weight(w):
    return str(int(w)) if float(w).is_integer() else repr(float(w))


def save_instance(instance, path):
    lines = []
    if instance.label:
        lines.append(f"# {instance.label}")
    lines.append(f"{instance.n} {instance.num_edges}")
    if np.all(instance.weights == np.round(instance.weights)):
        wts = instance.weights.astype(np.int64).tolist()
    else:
        wts = [_format_weight(w) for w in instance.weights]
    rows = (instance.rows + 1).tolist()
    cols = (instance.cols + 1).tolist()
    lines.extend(f"{i} {j} {w}" for i, j, w in zip(rows, cols, wts))
    with open(path, "w") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def load_instance(path):
    with open(path) as fh:
        text = fh.read()
    return parse_instance(text, label=os.path.basename(str(path)))


def parse_instance(text, label=None):
    header = None
    expected = 0
    rows, cols, wts = [], [], []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if header is None:
            if len(parts) != 2:
                raise ParseError(f"expected header 'N M', got {line!r}", lineno)
            try:
                header = (int(parts[0]), int(parts[1]))
            except ValueError:
                raise ParseError(f"non-integer header {line!r}", lineno) from None
            n, expected = header
            if n < 1 or expected < 0:
                raise ParseError(f"invalid header {line!r}", lineno)
            continue
        if len(parts) != 3:
            raise ParseError(f"expected 'i j w', got {line!r}", lineno)
        try:
            i, j = int(parts[0]), int(parts[1])
            w = float(parts[2])
        except ValueError:
            raise ParseError(f"malformed edge {line!r}", lineno) from None
        if not (1 <= i <= n and 1 <= j <= n):
            raise ParseError(f"node index out of range 1..{n}: {line!r}", lineno)
        if i == j:
            raise ParseError(f"self-loop on node {i}", lineno)
        if w == 0 or not np.isfinite(w):
            raise ParseError(f"edge weight must be finite and nonzero: {line!r}", lineno)
        key = (i, j) if i < j else (j, i)
        if key in seen:
            raise ParseError(f"duplicate edge {key}", lineno)
        seen.add(key)
        rows.append(i - 1)
        cols.append(j - 1)
        wts.append(w)
    if header is None:
        raise ParseError("missing 'N M' header")
    if len(rows) != expected:
        raise ParseError(f"header declares {expected} edges, found {len(rows)}")
    return ProblemInstance(n, rows, cols, wts, label=label)
