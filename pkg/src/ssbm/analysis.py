"""Scoring and aggregation: thresholding, Ising energy, cut value, pattern census, histograms, landscape grids, CSV I/O."""

import csv
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import EvaluationError, QueryError, ValidationError

INDETERMINATE = 0

TRAJECTORY_COLUMNS = ("sample_id", "step", "n_active", "ising_energy", "cut_value")
HISTOGRAM_COLUMNS = ("bin_lo", "bin_hi", "count")
LANDSCAPE_COLUMNS = ("phi_i", "phi_k", "value")

_MODES = {"midpoint": "midpoint", "band80_20": "band80_20", "band": "band80_20"}


def threshold_states(state, mode="midpoint"):
    """Map pseudo-spins to +1 / -1 (and 0 for indeterminate under the 80/20 band).

    ``midpoint`` assigns ``phi >= 0.5`` to +1. ``band80_20`` gives +1 above 0.8,
    -1 below 0.2 and leaves the rest indeterminate.
    """
    try:
        mode = _MODES[mode]
    except KeyError:
        raise ValidationError(f"unknown threshold mode {mode!r}") from None
    phi = np.asarray(state, dtype=np.float64)
    if mode == "midpoint":
        return np.where(phi >= 0.5, 1, -1).astype(np.int8)
    spins = np.zeros(phi.shape, dtype=np.int8)
    spins[phi > 0.8] = 1
    spins[phi < 0.2] = -1
    return spins


def _checked(spins, n=None):
    s = np.asarray(spins)
    if n is not None and s.shape != (n,):
        raise ValidationError(f"expected {n} spins, got shape {s.shape}")
    if np.any(s == INDETERMINATE):
        raise EvaluationError("configuration has indeterminate spins")
    if np.any(np.abs(s) != 1):
        raise ValidationError("spins must be +1 or -1")
    return s.astype(np.float64)


def ising_energy(spins, instance):
    """``sum over edges of w * s_i * s_j`` with the stored unit weights."""
    s = _checked(spins, instance.n)
    if instance.num_edges == 0:
        return 0.0
    return float(np.sum(instance.weights * s[instance.rows] * s[instance.cols]))


def cut_value(spins, instance):
    s = _checked(spins, instance.n)
    if instance.num_edges == 0:
        return 0.0
    cut = s[instance.rows] != s[instance.cols]
    return float(np.sum(instance.weights[cut]))


def canonical_pattern(spins):
    """Bit string of the configuration modulo global flip (+1 -> '1', -1 -> '0').

    Returns whichever of the pattern and its flip is lexicographically smaller,
    so the result always starts with '0'. Accepts a bit string as well.
    """
    if isinstance(spins, str):
        bits = spins
        if set(bits) - {"0", "1"}:
            raise ValidationError(f"not a bit string: {spins!r}")
    else:
        s = _checked(spins)
        bits = "".join("1" if v > 0 else "0" for v in s)
    flipped = bits.translate(_FLIP)
    return min(bits, flipped)


_FLIP = str.maketrans("01", "10")


@dataclass
class Census:
    n_samples: int
    n_unresolved: int
    counts: Counter

    @property
    def distinct(self):
        return len(self.counts)

    @property
    def modal(self):
        """``(pattern, multiplicity)`` of the most frequent pattern; ties go to the smaller pattern."""
        if not self.counts:
            return None, 0
        return min(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))

    @property
    def modal_count(self):
        return self.modal[1]

    @property
    def modal_fraction(self):
        return self.modal_count / self.n_samples if self.n_samples else 0.0

    def table(self):
        """Multiplicity table sorted by count, then pattern."""
        return sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))


def pattern_census(configs):
    """Count distinct canonical patterns; configurations with indeterminate spins count as unresolved."""
    counts = Counter()
    unresolved = 0
    total = 0
    for cfg in configs:
        total += 1
        s = np.asarray(cfg)
        if np.any(s == INDETERMINATE):
            unresolved += 1
            continue
        counts[canonical_pattern(s)] += 1
    return Census(n_samples=total, n_unresolved=unresolved, counts=counts)


@dataclass
class CutHistogram:
    edges: np.ndarray
    counts: np.ndarray
    step: int
    sample_count: int

    def nonzero(self):
        """``{bin_lo: count}`` for occupied bins."""
        return {float(lo): int(c) for lo, c in zip(self.edges[:-1], self.counts) if c}

    def rows(self):
        return [(float(lo), float(hi), int(c)) for lo, hi, c in zip(self.edges[:-1], self.edges[1:], self.counts)]


def cuts_at_step(records, step):
    cuts = []
    for k, rec in enumerate(records):
        idx = rec.at_step(step)
        if idx is None:
            raise QueryError(f"step {step} was not recorded in sample {k}")
        cuts.append(rec.cut[idx])
    return np.asarray(cuts, dtype=np.float64)


def histogram_from_values(values, step, bin_width):
    if bin_width <= 0:
        raise ValidationError(f"bin width must be positive, got {bin_width}")
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return CutHistogram(np.zeros(1), np.zeros(0, dtype=np.int64), step, 0)
    lo = math.floor(values.min() / bin_width) * bin_width
    idx = np.floor((values - lo) / bin_width).astype(np.int64)
    nbins = int(idx.max()) + 1
    counts = np.bincount(idx, minlength=nbins)
    edges = lo + bin_width * np.arange(nbins + 1)
    return CutHistogram(edges, counts, step, int(values.size))


def cut_histogram(records, step, bin_width=1.0):
    """Histogram of the cut values recorded at ``step`` across samples."""
    return histogram_from_values(cuts_at_step(records, step), step, bin_width)


def psi_landscape(kind, resolution):
    """Pairwise coupling term with unit strength on a uniform grid over [0, 1]^2.

    Returns ``(phi, values)`` where ``values[i, k]`` belongs to
    ``(phi_i, phi_k) = (phi[i], phi[k])``. Antiferro cells hold
    ``-(sqrt(phi_i) - sqrt(1 - phi_k))`` and ferro cells ``-(sqrt(phi_i) - sqrt(phi_k))``.
    """
    if resolution < 2:
        raise ValidationError(f"resolution must be at least 2, got {resolution}")
    steps = resolution - 1
    phi = np.arange(resolution) / steps
    root = np.sqrt(phi)
    if kind in ("antiferro", "af"):
        # 1 - phi[k] is phi[steps - k] on this grid; reuse it so the zero locus is exact
        partner = root[::-1]
    elif kind in ("ferro", "f"):
        partner = root
    else:
        raise ValidationError(f"unknown landscape kind {kind!r}")
    return phi, -(root[:, None] - partner[None, :])


def write_landscape_csv(path, phi, values):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LANDSCAPE_COLUMNS)
        for i, pi in enumerate(phi):
            for k, pk in enumerate(phi):
                w.writerow((repr(float(pi)), repr(float(pk)), repr(float(values[i, k]))))


def trajectory_rows(sample_id, record):
    for t, n, e, c in zip(record.steps, record.n_active, record.energy, record.cut):
        yield (sample_id, int(t), int(n), repr(float(e)), repr(float(c)))


def write_trajectory_header(fh):
    csv.writer(fh, lineterminator="\n").writerow(TRAJECTORY_COLUMNS)


def write_trajectory_rows(fh, sample_id, record):
    csv.writer(fh, lineterminator="\n").writerows(trajectory_rows(sample_id, record))


def read_trajectory_csv(path):
    """Parse a trajectory CSV into ``{sample_id: {column: array}}``."""
    data = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != TRAJECTORY_COLUMNS:
            raise ValidationError(f"unexpected trajectory columns {reader.fieldnames}")
        for row in reader:
            sid = int(row["sample_id"])
            d = data.setdefault(sid, {"step": [], "n_active": [], "ising_energy": [], "cut_value": []})
            d["step"].append(int(row["step"]))
            d["n_active"].append(int(row["n_active"]))
            d["ising_energy"].append(float(row["ising_energy"]))
            d["cut_value"].append(float(row["cut_value"]))
    return {
        sid: {k: np.asarray(v, dtype=np.int64 if k in ("step", "n_active") else np.float64) for k, v in d.items()}
        for sid, d in data.items()
    }


def write_histogram_csv(path, hist):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HISTOGRAM_COLUMNS)
        for lo, hi, c in hist.rows():
            w.writerow((repr(lo), repr(hi), c))


def summarize_cuts(values):
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return {"count": 0, "best": None, "mean": None, "std": None}
    return {
        "count": int(values.size),
        "best": float(values.max()),
        "mean": float(values.mean()),
        "std": float(values.std()),
    }
