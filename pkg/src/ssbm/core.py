"""Pseudo-spin dynamics: coupling field, the four update rules, and the schedule runner.

A state is a float64 vector ``phi`` in ``[0, 1]^m``; ``1 - phi`` is its
complement. All update rules are synchronous: every field is computed from the
pre-step state, so relabelling nodes just relabels the output.

The sharpening map ``sin^2((pi/2) x)`` is evaluated as
``1/2 + sin(pi (x - 1/2)) / 2`` so that 0, 1/2 and 1 are exact floating-point
fixed points; ``1/2`` is unstable and any rounding residue there would grow.
"""

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .errors import ConfigurationError, DimensionError, ValidationError

CLAMP_LO = 1e-9
CLAMP_HI = 1.0 - 1e-9

_ROOT_HALF = math.sqrt(0.5)

RULES = ("basic", "psi", "composite", "evolved")


def sharpen(x):
    """``sin^2((pi/2) x)``, the map with superstable ends 0, 1 and unstable point 1/2."""
    return 0.5 + 0.5 * np.sin(np.pi * (x - 0.5))


class Couplings:
    """Backend-prepared view of an instance for the neighbour-sum kernels."""

    def __init__(self, instance, backend=None):
        self.backend = kernels.backend if backend is None else kernels.get(backend)
        self.n = instance.n
        self.abs_degree = np.ascontiguousarray(instance.abs_degree, dtype=np.float64)
        self.total_weight = instance.total_weight
        self.empty = instance.num_edges == 0
        self.dense = instance.prefers_dense()
        if self.empty:
            self._handle = None
        elif self.dense:
            self._handle = self.backend.prepare_dense(instance.dense(np.int8))
        else:
            indptr, indices, weights = instance.csr()
            self._handle = self.backend.prepare_sparse(indptr, indices, weights, instance.n)

    def sums(self, a, b):
        """``(f_a, af_a, f_b, af_b)``: |w|-weighted ferro/antiferro neighbour sums of a and b."""
        if self.empty:
            z = np.zeros(self.n)
            return z, z, z, z
        a = np.ascontiguousarray(a, dtype=np.float64)
        b = np.ascontiguousarray(b, dtype=np.float64)
        if self.dense:
            return self.backend.dense_sums(self._handle, a, b)
        return self.backend.sparse_sums(self._handle, a, b)

    def energy(self, spins):
        """Unit-weight Ising energy of a +-1 vector."""
        if self.empty:
            return 0.0
        s = np.ascontiguousarray(spins, dtype=np.float64)
        if self.dense:
            return float(self.backend.dense_energy(self._handle, s))
        indptr_handle = self._handle
        return _sparse_energy(indptr_handle, s, self.backend)


def _sparse_energy(handle, s, backend):
    # each undirected edge appears twice in the row layout
    if backend.NAME == "cython":
        indptr, indices, weights, n = handle
        rows = np.repeat(np.arange(n), np.diff(indptr))
    else:
        rows, indices, ferro, anti, n = handle
        weights = anti - ferro
    return 0.5 * float(np.sum(weights * s[rows] * s[indices]))


def couplings(instance, backend=None):
    """Cached :class:`Couplings` for ``instance`` (instances are immutable)."""
    name = kernels.BACKEND if backend is None else backend
    key = ("couplings", name)
    cache = instance._cache
    if key not in cache:
        cache[key] = Couplings(instance, backend=name)
    return cache[key]


def as_state(phi, instance=None):
    phi = np.asarray(phi, dtype=np.float64)
    if phi.ndim != 1:
        raise DimensionError(f"state must be one-dimensional, got shape {phi.shape}")
    if instance is not None and phi.size != instance.n:
        raise DimensionError(f"state has length {phi.size}, instance has {instance.n} nodes")
    if phi.size and (phi.min() < 0.0 or phi.max() > 1.0 or not np.all(np.isfinite(phi))):
        raise ValidationError("state entries must lie in [0, 1]")
    return phi


def _fields(phi, instance, j_magnitude, backend):
    """Coupling fields of the state and of its complement from one kernel call."""
    a = np.sqrt(phi)
    b = np.sqrt(1.0 - phi)
    # The field is linear in (a, b) and its weights cancel, so shifting both by
    # sqrt(1/2) changes nothing analytically but makes q vanish exactly at phi = 1/2.
    u = a - _ROOT_HALF
    v = b - _ROOT_HALF
    c = couplings(instance, backend)
    f_u, af_u, f_v, af_v = c.sums(u, v)
    deg = c.abs_degree
    q = -j_magnitude * (deg * u - f_u - af_v)
    q_bar = -j_magnitude * (deg * v - f_v - af_u)
    return a, b, q, q_bar


def psi_field(state, instance, j_magnitude, backend=None):
    """Pseudo-spin interaction field.

    ``q_i = -J sum_F |w| (sqrt(phi_i) - sqrt(phi_k)) - J sum_AF |w| (sqrt(phi_i) - sqrt(1 - phi_k))``
    """
    phi = as_state(state, instance)
    return _fields(phi, instance, j_magnitude, backend)[2]


def _branch(phi, root, q):
    # sin^2((pi/2)(sqrt(phi) + q)^2), expanded so that q == 0 returns sharpen(phi) exactly.
    # The field is added, not subtracted: with this sign antiferro edges pull
    # sqrt(phi_i) towards sqrt(1 - phi_k) and ferro edges towards sqrt(phi_k).
    return sharpen(phi + q * (2.0 * root + q))


def base_map(phi, gamma=2.0 * math.pi, theta_b=0.0):
    """Uncoupled map ``sin^2((gamma/2) phi + theta_b)``."""
    return 0.5 * (1.0 - np.cos(gamma * np.asarray(phi, dtype=np.float64) + 2.0 * theta_b))


def psi_update(state, instance, j_magnitude, backend=None):
    phi = as_state(state, instance)
    a, _, q, _ = _fields(phi, instance, j_magnitude, backend)
    return _branch(phi, a, q)


def composite_update(state, instance, j_magnitude, backend=None):
    """Average of the coupled update and the complement of its conjugate twin."""
    phi = as_state(state, instance)
    a, b, q, q_bar = _fields(phi, instance, j_magnitude, backend)
    return 0.5 * (_branch(phi, a, q) + 1.0 - _branch(1.0 - phi, b, q_bar))


def nest(x, n):
    """Apply :func:`sharpen` ``n`` times (``n = 0`` is the identity)."""
    if n < 0 or int(n) != n:
        raise ValidationError(f"nesting count must be a non-negative integer, got {n}")
    y = np.asarray(x, dtype=np.float64)
    for _ in range(int(n)):
        y = sharpen(y)
    return y if np.ndim(x) else float(y)


def evolved_update(state, instance, j_magnitude, n, backend=None):
    return nest(composite_update(state, instance, j_magnitude, backend), n)


def init_state(m, noise_sigma, rng):
    """Symmetric start at 1/2 plus independent Gaussian fluctuations, clamped away from 0 and 1."""
    if m < 1:
        raise ValidationError(f"state length must be positive, got {m}")
    if noise_sigma < 0:
        raise ValidationError(f"noise sigma must be non-negative, got {noise_sigma}")
    rng = np.random.default_rng(rng)
    phi = 0.5 + noise_sigma * rng.standard_normal(m)
    return np.clip(phi, CLAMP_LO, CLAMP_HI)


@dataclass(frozen=True)
class UpdateRule:
    kind: str
    gamma: float = 2.0 * math.pi
    theta_b: float = 0.0

    def __post_init__(self):
        if self.kind not in RULES:
            raise ConfigurationError(f"unknown rule {self.kind!r}; expected one of {', '.join(RULES)}")


@dataclass(frozen=True)
class NestSchedule:
    """Ordered ``(n, steps)`` phases. ``n`` is only read by the evolved rule."""

    phases: tuple

    def __post_init__(self):
        phases = tuple((int(n), int(steps)) for n, steps in self.phases)
        if not phases:
            raise ConfigurationError("schedule has no phases")
        for n, steps in phases:
            if n < 0:
                raise ConfigurationError(f"nesting count must be >= 0, got {n}")
            if steps < 1:
                raise ConfigurationError(f"phase step count must be >= 1, got {steps}")
        object.__setattr__(self, "phases", phases)

    @classmethod
    def parse(cls, text):
        """Parse ``"n:steps,n:steps,..."``; a bare integer means ``0:steps``."""
        phases = []
        for chunk in str(text).split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            try:
                if ":" in chunk:
                    n, steps = chunk.split(":")
                    phases.append((int(n), int(steps)))
                else:
                    phases.append((0, int(chunk)))
            except ValueError:
                raise ConfigurationError(f"bad schedule phase {chunk!r}") from None
        return cls(tuple(phases))

    @property
    def total_steps(self):
        return sum(steps for _, steps in self.phases)

    def boundaries(self):
        """Step indices at which each phase ends."""
        out, t = [], 0
        for _, steps in self.phases:
            t += steps
            out.append(t)
        return out

    def __str__(self):
        return ",".join(f"{n}:{steps}" for n, steps in self.phases)


@dataclass(frozen=True)
class RunConfig:
    rule: UpdateRule
    schedule: NestSchedule
    j_magnitude: float = 0.0
    noise_sigma: float = 1e-3
    seed: int = 0
    record_every: int = 10
    per_step_noise: bool = False
    record_states: bool = False

    def __post_init__(self):
        object.__setattr__(self, "j_magnitude", float(self.j_magnitude))
        object.__setattr__(self, "noise_sigma", float(self.noise_sigma))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "record_every", int(self.record_every))
        if self.j_magnitude < 0 or not math.isfinite(self.j_magnitude):
            raise ConfigurationError(f"coupling magnitude must be finite and >= 0, got {self.j_magnitude}")
        if self.noise_sigma < 0:
            raise ConfigurationError(f"noise sigma must be >= 0, got {self.noise_sigma}")
        if self.record_every < 1:
            raise ConfigurationError(f"record_every must be >= 1, got {self.record_every}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigurationError(f"seed must fit in 64 unsigned bits, got {self.seed}")

    def to_dict(self):
        d = asdict(self)
        d["schedule"] = str(self.schedule)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        rule = d.pop("rule")
        if isinstance(rule, str):
            rule = UpdateRule(rule)
        elif isinstance(rule, dict):
            rule = UpdateRule(**rule)
        sched = d.pop("schedule")
        if not isinstance(sched, NestSchedule):
            sched = NestSchedule.parse(sched) if isinstance(sched, str) else NestSchedule(tuple(map(tuple, sched)))
        return cls(rule=rule, schedule=sched, **d)

    def fingerprint(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass
class RunRecord:
    """Trajectory of one sample.

    ``states`` always holds the initial state (step 0), the state at every
    phase boundary and the final state; with ``record_states`` it also holds
    every recorded step.
    """

    seed: int
    config_fingerprint: str
    steps: np.ndarray
    n_active: np.ndarray
    energy: np.ndarray
    cut: np.ndarray
    final_state: np.ndarray
    total_steps: int
    states: dict = field(default_factory=dict)

    def at_step(self, step):
        idx = np.flatnonzero(self.steps == step)
        if idx.size == 0:
            return None
        return int(idx[0])

    def digest(self):
        h = hashlib.sha256()
        h.update(f"{self.seed}:{self.config_fingerprint}:{self.total_steps}".encode())
        for arr in (self.steps, self.n_active, self.energy, self.cut, self.final_state):
            h.update(np.ascontiguousarray(arr).tobytes())
        for k in sorted(self.states):
            h.update(str(k).encode())
            h.update(np.ascontiguousarray(self.states[k]).tobytes())
        return h.hexdigest()


def step_state(phi, instance, rule, j_magnitude, n=0, backend=None):
    """One synchronous update under ``rule``."""
    kind = rule.kind
    if kind == "psi":
        return psi_update(phi, instance, j_magnitude, backend)
    if kind == "composite":
        return composite_update(phi, instance, j_magnitude, backend)
    if kind == "evolved":
        return evolved_update(phi, instance, j_magnitude, n, backend)
    if kind == "basic":
        return base_map(phi, rule.gamma, rule.theta_b)
    raise ConfigurationError(f"unknown rule {kind!r}")


def _validate(instance, config):
    if config.rule.kind == "basic" and instance.num_edges:
        raise ConfigurationError("the basic map models uncoupled nodes; instance has couplings")


def run(instance, config, backend=None):
    """Initialize near 1/2 and iterate the configured rule through every schedule phase."""
    _validate(instance, config)
    rng = np.random.default_rng(int(config.seed))
    c = couplings(instance, backend)
    phi = init_state(instance.n, config.noise_sigma, rng)
    rule = config.rule
    evolved = rule.kind == "evolved"
    total = config.schedule.total_steps

    steps, actives, energies, cuts = [], [], [], []
    states = {0: phi.copy()}

    def record(t, n):
        spins = np.where(phi >= 0.5, 1.0, -1.0)
        e = c.energy(spins)
        steps.append(t)
        actives.append(n if evolved else 0)
        energies.append(e)
        cuts.append(0.5 * (c.total_weight - e))
        if config.record_states:
            states[t] = phi.copy()

    record(0, config.schedule.phases[0][0])
    t = 0
    for n, count in config.schedule.phases:
        for _ in range(count):
            phi = step_state(phi, instance, rule, config.j_magnitude, n, backend)
            if config.per_step_noise and config.noise_sigma > 0:
                phi = np.clip(phi + config.noise_sigma * rng.standard_normal(phi.size), CLAMP_LO, CLAMP_HI)
            t += 1
            if t % config.record_every == 0 or t == total:
                record(t, n)
        states[t] = phi.copy()

    return RunRecord(
        seed=int(config.seed),
        config_fingerprint=config.fingerprint(),
        steps=np.asarray(steps, dtype=np.int64),
        n_active=np.asarray(actives, dtype=np.int64),
        energy=np.asarray(energies, dtype=np.float64),
        cut=np.asarray(cuts, dtype=np.float64),
        final_state=phi,
        total_steps=t,
        states=states,
    )
