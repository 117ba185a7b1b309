"""Lindblad master-equation evolution of the pulse schedule.

The density matrix evolves under

    drho/dt = -i [H, rho] + sum_k ( L_k rho L_k+ - 1/2 {L_k+ L_k, rho} )

with piecewise-constant H given by the schedule segments.  Collapse
operators cover cavity photon loss, the three qutrit relaxation
channels e->g, f->e, f->g, and pure dephasing of the e and f levels
(L = sqrt(gamma_phi) |l><l|, so the bare coherences to the ground state
decay at gamma_phi / 2).

Two integration backends share one vectorization convention,
vec(A rho B) = (A kron B^T) vec(rho) with row-major vec:

``rk4``
    Fixed-step classical Runge-Kutta on the vectorized state with a
    precompiled sparse Liouvillian.  An optional step-doubling check
    compares each segment against a half-step rerun and refines until
    the two agree (Richardson control), raising IntegrationError if the
    budget runs out.

``expm``
    Dense matrix exponential of the Liouvillian (exact for a constant
    segment).  When a segment has no collapse channels this reduces to
    the unitary U rho U+ with U = expm(-i H t), which is cheap enough
    for wide noise-free scans.

Compiled Liouvillians and propagators are cached by content digest, so
repeated segments (all steps share three Hamiltonians) cost one
compilation each.
"""

from __future__ import annotations

import hashlib
import math
import struct
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm

from .protocol import SEG_RETRIEVE, Schedule
from .statespace import E, F, G, StateSpace


class IntegrationError(RuntimeError):
    """Raised when the step-doubling control cannot reach its tolerance."""


# ---------------------------------------------------------------------------
# decoherence channels


@dataclass(frozen=True)
class DecoherenceRates:
    """Channel rates in 1/us (inverse lifetimes).

    kappa         cavity photon loss
    gamma_ge      qutrit e -> g relaxation
    gamma_ef      qutrit f -> e relaxation
    gamma_gf      qutrit f -> g relaxation
    gamma_phi_e   pure dephasing of e
    gamma_phi_f   pure dephasing of f
    """

    kappa: float = 0.0
    gamma_ge: float = 0.0
    gamma_ef: float = 0.0
    gamma_gf: float = 0.0
    gamma_phi_e: float = 0.0
    gamma_phi_f: float = 0.0

    def __post_init__(self):
        for name, val in self.as_dict().items():
            if val < 0 or not math.isfinite(val):
                raise ValueError(f"rate {name} must be finite and >= 0")

    def as_dict(self) -> dict[str, float]:
        return {
            "kappa": self.kappa,
            "gamma_ge": self.gamma_ge,
            "gamma_ef": self.gamma_ef,
            "gamma_gf": self.gamma_gf,
            "gamma_phi_e": self.gamma_phi_e,
            "gamma_phi_f": self.gamma_phi_f,
        }

    @classmethod
    def zero(cls) -> "DecoherenceRates":
        return cls()

    @classmethod
    def from_lifetimes_us(cls, t_cavity: float = math.inf,
                          t_ge: float = math.inf, t_ef: float = math.inf,
                          t_gf: float = math.inf, t_phi_e: float = math.inf,
                          t_phi_f: float = math.inf) -> "DecoherenceRates":
        """Rates from lifetimes in us; math.inf switches a channel off."""
        inv = lambda t: 0.0 if math.isinf(t) else 1.0 / t
        return cls(kappa=inv(t_cavity), gamma_ge=inv(t_ge),
                   gamma_ef=inv(t_ef), gamma_gf=inv(t_gf),
                   gamma_phi_e=inv(t_phi_e), gamma_phi_f=inv(t_phi_f))

    @classmethod
    def t0(cls, scale: float = 1.0) -> "DecoherenceRates":
        """Baseline device: 10 us loss/relaxation, 5 us dephasing.

        scale multiplies every lifetime, so scale=5 is a five-fold
        better device and scale=0.2 a five-fold worse one.
        """
        return cls.from_lifetimes_us(
            t_cavity=10.0, t_ge=10.0, t_ef=10.0, t_gf=10.0,
            t_phi_e=5.0, t_phi_f=5.0).scaled(scale)

    def scaled(self, lifetime_factor: float) -> "DecoherenceRates":
        """New rates with every lifetime multiplied by lifetime_factor."""
        if lifetime_factor <= 0:
            raise ValueError("lifetime factor must be positive")
        return DecoherenceRates(
            **{k: v / lifetime_factor for k, v in self.as_dict().items()})


@dataclass(frozen=True)
class CollapseSet:
    """Collapse operators with the sqrt(rate) already folded in."""

    ops: tuple[np.ndarray, ...]
    labels: tuple[str, ...]

    def __len__(self):
        return len(self.ops)


def build_collapse_set(space: StateSpace, rates: DecoherenceRates) -> CollapseSet:
    """All collapse operators of the chain; zero-rate channels dropped.

    Five channels per qutrit plus one per cavity, so a chain with q
    qutrits and c cavities has 5q + c operators when every rate is
    nonzero.
    """
    ops, labels = [], []

    def add(rate, op, label):
        if rate > 0.0:
            ops.append(math.sqrt(rate) * op)
            labels.append(label)

    for j in range(1, space.n_qutrits + 1):
        add(rates.gamma_ge, space.qutrit_transition(j, G, E), f"relax_ge_q{j}")
        add(rates.gamma_ef, space.qutrit_transition(j, E, F), f"relax_ef_q{j}")
        add(rates.gamma_gf, space.qutrit_transition(j, G, F), f"relax_gf_q{j}")
        add(rates.gamma_phi_e, space.qutrit_transition(j, E, E), f"dephase_e_q{j}")
        add(rates.gamma_phi_f, space.qutrit_transition(j, F, F), f"dephase_f_q{j}")
    for j in range(1, space.n_cavities + 1):
        add(rates.kappa, space.cavity_annihilation(j), f"loss_c{j}")
    return CollapseSet(tuple(np.asarray(o, dtype=complex) for o in ops),
                       tuple(labels))


# ---------------------------------------------------------------------------
# superoperators


def lindblad_apply(rho: np.ndarray, h: np.ndarray,
                   collapse: CollapseSet) -> np.ndarray:
    """Right-hand side of the master equation, applied densely.

    Reference implementation used to cross-check the compiled
    Liouvillian; O(dim^3) per call.
    """
    out = -1j * (h @ rho - rho @ h)
    for op in collapse.ops:
        opd = op.conj().T
        anti = opd @ op
        out += op @ rho @ opd - 0.5 * (anti @ rho + rho @ anti)
    return out


def liouvillian_matrix(h: np.ndarray, collapse: CollapseSet) -> sp.csr_matrix:
    """Sparse Liouvillian with vec(A rho B) = (A kron B^T) vec(rho)."""
    dim = h.shape[0]
    eye = sp.identity(dim, format="csr")
    hs = sp.csr_matrix(h)
    liou = -1j * (sp.kron(hs, eye) - sp.kron(eye, hs.T))
    for op in collapse.ops:
        ops = sp.csr_matrix(op)
        anti = sp.csr_matrix(op.conj().T @ op)
        liou = liou + sp.kron(ops, ops.conj()) \
            - 0.5 * sp.kron(anti, eye) - 0.5 * sp.kron(eye, anti.T)
    return sp.csr_matrix(liou)


# ---------------------------------------------------------------------------
# digest-keyed caches


def _digest(*arrays: np.ndarray) -> str:
    hsh = hashlib.blake2b(digest_size=16)
    for a in arrays:
        a = np.ascontiguousarray(a)
        hsh.update(str(a.shape).encode())
        hsh.update(a.tobytes())
    return hsh.hexdigest()


class _LRU(OrderedDict):
    def __init__(self, maxsize: int):
        super().__init__()
        self.maxsize = maxsize

    def put(self, key, value):
        if key in self:
            self.move_to_end(key)
        self[key] = value
        while len(self) > self.maxsize:
            self.popitem(last=False)

    def take(self, key):
        if key in self:
            self.move_to_end(key)
            return self[key]
        return None


_LIOUVILLIANS = _LRU(maxsize=16)
_PROPAGATORS = _LRU(maxsize=64)


def clear_caches() -> None:
    _LIOUVILLIANS.clear()
    _PROPAGATORS.clear()


def _collapse_digest(collapse: CollapseSet) -> str:
    if not collapse.ops:
        return "none"
    return _digest(*collapse.ops)


def compiled_liouvillian(h: np.ndarray, collapse: CollapseSet) -> sp.csr_matrix:
    key = ("liou", _digest(h), _collapse_digest(collapse))
    hit = _LIOUVILLIANS.take(key)
    if hit is None:
        hit = liouvillian_matrix(h, collapse)
        _LIOUVILLIANS.put(key, hit)
    return hit


def _propagator(h: np.ndarray, collapse: CollapseSet,
                duration: float) -> tuple[str, np.ndarray]:
    """("unitary", U) for closed segments, else ("super", expm(L t))."""
    key = ("prop", _digest(h), _collapse_digest(collapse), duration.hex())
    hit = _PROPAGATORS.take(key)
    if hit is not None:
        return hit
    if not collapse.ops:
        val = ("unitary", expm(-1j * duration * h))
    else:
        liou = compiled_liouvillian(h, collapse).toarray()
        val = ("super", expm(duration * liou))
    _PROPAGATORS.put(key, val)
    return val


# ---------------------------------------------------------------------------
# integration


@dataclass(frozen=True)
class IntegratorConfig:
    """Knobs of the segment integrator.

    method         "auto" picks expm for collapse-free segments and rk4
                   otherwise; "rk4" / "expm" force a backend.
    dt_max_us      upper bound on the RK4 substep.
    base_substeps  minimum substeps per segment (the default substep is
                   min(dt_max_us, duration / base_substeps)).
    richardson     compare each RK4 segment against a half-step rerun
                   and refine until max|diff| <= richardson_tol.
    max_doublings  refinement budget before IntegrationError.
    """

    method: str = "auto"
    dt_max_us: float = math.inf
    base_substeps: int = 1000
    richardson: bool = True
    richardson_tol: float = 1e-9
    max_doublings: int = 4

    def __post_init__(self):
        if self.method not in ("auto", "rk4", "expm"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.base_substeps < 1:
            raise ValueError("base_substeps must be >= 1")
        if self.dt_max_us <= 0:
            raise ValueError("dt_max_us must be positive")


@dataclass
class SegmentStats:
    substeps: int
    trace_error: float
    hermiticity_drift: float


def _rk4(liou: sp.csr_matrix, v: np.ndarray, duration: float,
         n: int) -> np.ndarray:
    dt = duration / n
    for _ in range(n):
        k1 = liou @ v
        k2 = liou @ (v + 0.5 * dt * k1)
        k3 = liou @ (v + 0.5 * dt * k2)
        k4 = liou @ (v + dt * k3)
        v = v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return v


def _segment_substeps(duration: float, config: IntegratorConfig) -> int:
    dt = min(config.dt_max_us, duration / config.base_substeps)
    return max(1, int(math.ceil(duration / dt - 1e-12)))


def evolve_segment(rho: np.ndarray, h: np.ndarray, duration: float,
                   collapse: CollapseSet, config: IntegratorConfig
                   ) -> tuple[np.ndarray, SegmentStats]:
    """Propagate rho through one constant-H segment.

    Returns the re-symmetrized state and per-segment diagnostics (the
    hermiticity drift is measured before the symmetrization that
    removes it).
    """
    dim = rho.shape[0]
    method = config.method
    if method == "auto":
        method = "expm" if not collapse.ops else "rk4"

    substeps = 0
    if method == "expm":
        kind, prop = _propagator(h, collapse, duration)
        if kind == "unitary":
            out = prop @ rho @ prop.conj().T
        else:
            out = (prop @ rho.reshape(-1)).reshape(dim, dim)
    else:
        liou = compiled_liouvillian(h, collapse)
        v = rho.reshape(-1)
        n = _segment_substeps(duration, config)
        if not config.richardson:
            out = _rk4(liou, v, duration, n).reshape(dim, dim)
            substeps = n
        else:
            coarse = _rk4(liou, v, duration, n)
            for _ in range(config.max_doublings + 1):
                fine = _rk4(liou, v, duration, 2 * n)
                err = float(np.max(np.abs(fine - coarse)))
                if err <= config.richardson_tol:
                    out = fine.reshape(dim, dim)
                    substeps = 2 * n
                    break
                coarse, n = fine, 2 * n
            else:
                raise IntegrationError(
                    f"segment of {duration:.3g} us: step-doubling error "
                    f"{err:.3g} above {config.richardson_tol:.3g} after "
                    f"{config.max_doublings} refinements")

    drift = float(np.max(np.abs(out - out.conj().T)))
    out = 0.5 * (out + out.conj().T)
    trace_error = abs(float(np.trace(out).real) - 1.0)
    return out, SegmentStats(substeps, trace_error, drift)


@dataclass
class EvolutionResult:
    """Final state plus accumulated diagnostics of one schedule run.

    snapshots/times hold the recorded states (always including t=0 when
    recording is on); max_trace_error and max_hermiticity_drift are the
    worst values seen across all segments.
    """

    rho: np.ndarray
    times: np.ndarray
    snapshots: list[np.ndarray] = field(default_factory=list)
    max_trace_error: float = 0.0
    max_hermiticity_drift: float = 0.0


def evolve_schedule(rho0: np.ndarray, schedule: Schedule,
                    collapse: CollapseSet, config: IntegratorConfig,
                    record: str = "none") -> EvolutionResult:
    """Run the whole pulse program.

    record: "none", "steps" (snapshot after each walk step) or
    "segments" (after every pulse).
    """
    if record not in ("none", "steps", "segments"):
        raise ValueError(f"unknown record mode {record!r}")
    rho = np.array(rho0, dtype=complex)
    t = 0.0
    times, snaps = [], []
    if record != "none":
        times.append(0.0)
        snaps.append(rho.copy())
    result = EvolutionResult(rho=rho, times=np.zeros(0))
    for seg in schedule:
        rho, stats = evolve_segment(rho, seg.hamiltonian, seg.duration,
                                    collapse, config)
        t += seg.duration
        result.max_trace_error = max(result.max_trace_error, stats.trace_error)
        result.max_hermiticity_drift = max(result.max_hermiticity_drift,
                                           stats.hermiticity_drift)
        if record == "segments" or (record == "steps"
                                    and seg.label == SEG_RETRIEVE):
            times.append(t)
            snaps.append(rho.copy())
    result.rho = rho
    result.times = np.asarray(times)
    result.snapshots = snaps
    return result


# ---------------------------------------------------------------------------
# state checks and snapshot files


def density_matrix_checks(rho: np.ndarray) -> dict[str, float]:
    """trace_error, hermiticity, min_eigenvalue of a candidate state."""
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    tr = abs(float(np.trace(rho).real) - 1.0)
    sym = 0.5 * (rho + rho.conj().T)
    min_eig = float(np.linalg.eigvalsh(sym)[0])
    return {"trace_error": tr, "hermiticity": herm, "min_eigenvalue": min_eig}


_SNAP_MAGIC = b"CQWS"


def save_snapshots(path, times, snapshots) -> None:
    """Binary snapshot file.

    Layout: magic "CQWS", then uint64 count, uint64 dim (little
    endian), then count records of one float64 time followed by
    dim*dim complex128 entries in row-major order.
    """
    times = np.asarray(times, dtype=float)
    if len(times) != len(snapshots):
        raise ValueError("times and snapshots length mismatch")
    dim = snapshots[0].shape[0] if snapshots else 0
    with open(path, "wb") as fh:
        fh.write(_SNAP_MAGIC)
        fh.write(struct.pack("<QQ", len(times), dim))
        for t, rho in zip(times, snapshots):
            if rho.shape != (dim, dim):
                raise ValueError("inconsistent snapshot shapes")
            fh.write(struct.pack("<d", float(t)))
            fh.write(np.ascontiguousarray(rho, dtype=complex).tobytes())


def load_snapshots(path) -> tuple[np.ndarray, list[np.ndarray]]:
    with open(path, "rb") as fh:
        if fh.read(4) != _SNAP_MAGIC:
            raise ValueError("not a snapshot file")
        count, dim = struct.unpack("<QQ", fh.read(16))
        times = np.empty(count)
        snaps = []
        for i in range(count):
            times[i] = struct.unpack("<d", fh.read(8))[0]
            buf = fh.read(16 * dim * dim)
            snaps.append(np.frombuffer(buf, dtype=complex).reshape(dim, dim).copy())
    return times, snaps
