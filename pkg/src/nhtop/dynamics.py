"""Coherence time evolution and decay timescales.

The monitored quantity is ``C(t) = |<1| exp(t L) |1>|`` with ``L = -iH``,
twice the modulus of the qubit's off-diagonal density-matrix element for a
maximally coherent initial state.  Three interchangeable evaluation routes
are provided: the spectral expansion (default), a matrix-exponential oracle,
and propagation of the full single-excitation superoperator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NumericError
from .netmodel import EffectiveHamiltonian, Superoperator
from .spectral import SpectralData, decompose, overlap_weights

METHODS = ("spectral", "expm", "full_superoperator")

#: spectral -> expm fallback threshold on the eigenvector condition number
CONDITION_FALLBACK = 1e8

#: weights smaller than this never contribute to C(t) and are dropped from
#: the min/max timescales (the linearized one keeps the full sum)
WEIGHT_CUTOFF = 1e-14

DEFAULT_EPSILON = 0.05


@dataclass(frozen=True)
class CoherenceTrace:
    """C(t) samples on an ascending time grid, with the method that made them."""

    times: np.ndarray
    values: np.ndarray
    method: str

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape:
            raise ValueError("times and values must be matching 1-d arrays")
        if t.size and (np.any(np.diff(t) < 0) or t[0] < 0):
            raise ValueError("times must be ascending and non-negative")
        if np.any(v < -1e-12):
            raise NumericError("coherence values must be non-negative")
        if t.size and t[0] == 0.0 and abs(v[0] - 1.0) > 1e-12:
            raise NumericError(f"C(0) = {v[0]!r} deviates from 1 beyond 1e-12")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        for name, arr in (("times", t), ("values", v)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def log_time_grid(t_max: float, n_points: int = 400, t_min: float = 1e-2) -> np.ndarray:
    """Default grid: log-spaced from t_min to t_max, spanning relaxation to
    protection timescales."""
    if t_max <= t_min:
        raise ValueError("t_max must exceed t_min")
    return np.geomspace(t_min, t_max, n_points)


def _spectral_values(sd: SpectralData, times: np.ndarray) -> np.ndarray:
    c = overlap_weights(sd, 1)
    return np.abs(np.exp(np.outer(times, sd.eigenvalues)) @ c)


def _expm_values(H: EffectiveHamiltonian, times: np.ndarray) -> np.ndarray:
    L = H.generator
    e1 = np.zeros(H.dim, dtype=complex)
    e1[0] = 1.0
    out = np.empty(times.shape, dtype=float)
    for i, t in enumerate(times):
        out[i] = abs((scipy.linalg.expm(L * t) @ e1)[0])
    return out


def coherence_trace(H: EffectiveHamiltonian, times, method: str = "auto") -> CoherenceTrace:
    """Evolve the qubit coherence on a time grid.

    Parameters
    ----------
    H : EffectiveHamiltonian
    times : array_like
        Ascending, non-negative times.
    method : {"auto", "spectral", "expm"}
        "auto" uses the spectral expansion and falls back to the
        matrix-exponential route near exceptional points (eigenvector
        condition number above ``CONDITION_FALLBACK``) or when the spectral
        weights fail their completeness check.
    """
    t = np.asarray(times, dtype=float)
    if method not in ("auto", "spectral", "expm"):
        raise ValueError("method must be 'auto', 'spectral' or 'expm'")
    use = method
    if method in ("auto", "spectral"):
        sd = decompose(H)
        healthy = not sd.degenerate_warning and sd.condition < CONDITION_FALLBACK
        if healthy:
            # completeness at the qubit site; the bound keeps C(0) = 1
            # within the trace type's own tolerance
            c_sum = complex(np.sum(overlap_weights(sd, 1)))
            healthy = abs(c_sum - 1.0) <= 1e-12
        if healthy:
            return CoherenceTrace(t, _spectral_values(sd, t), "spectral")
        if method == "spectral":
            raise NumericError(
                f"spectral route unreliable (condition {sd.condition:.3g}); use method='auto'"
            )
        use = "expm"
    return CoherenceTrace(t, _expm_values(H, t), "expm")


def coherence_trace_superoperator(sop: Superoperator, times) -> CoherenceTrace:
    """C(t) from propagating |0><1| under the full superoperator.

    Reads back the |0><1| component, which equals the reduced-sector matrix
    element exactly; this is the independent cross-check for the reduction.
    """
    t = np.asarray(times, dtype=float)
    idx = sop.index_01(1)
    v0 = np.zeros(sop.dim, dtype=complex)
    v0[idx] = 1.0
    out = np.empty(t.shape, dtype=float)
    for i, ti in enumerate(t):
        out[i] = abs((scipy.linalg.expm(sop.matrix * ti) @ v0)[idx])
    return CoherenceTrace(t, out, "full_superoperator")


def expm_oracle(H: EffectiveHamiltonian, t: float) -> np.ndarray:
    """exp(t L) by scaling-and-squaring (Pade), independent of the spectral path."""
    if t < 0:
        raise ValueError("t must be >= 0")
    out = scipy.linalg.expm(H.generator * t)
    if not np.all(np.isfinite(out)):
        raise NumericError("matrix exponential overflowed")
    return out


@dataclass(frozen=True)
class Timescales:
    """Shortest / longest mode lifetimes and the linearized coherence time."""

    tau_min: float
    tau_max: float
    tau_lin: float
    epsilon: float

    def __post_init__(self):
        if self.tau_min > self.tau_max:
            raise ValueError("tau_min must not exceed tau_max")


def timescales(eigenvalues, weights, epsilon: float = DEFAULT_EPSILON,
               weight_cutoff: float = WEIGHT_CUTOFF) -> Timescales:
    """Decay timescales of C(t) = |sum_j c_j exp(lambda_j t)|.

    ``tau_min`` is the fastest and ``tau_max`` the slowest mode lifetime,
    restricted to modes whose weight exceeds ``weight_cutoff`` (zero-weight
    modes never appear in C).  ``tau_lin = epsilon / Re(-sum_j c_j lambda_j)``
    linearizes the initial decay; for the canonical models the weighted sum is
    the qubit's own diagonal entry, which vanishes, so tau_lin is infinite
    there and only becomes informative with on-site disorder.
    A dark mode (zero decay rate) makes tau_max infinite.
    """
    lam = np.asarray(eigenvalues, dtype=complex).ravel()
    c = np.asarray(weights, dtype=complex).ravel()
    if lam.shape != c.shape:
        raise ValueError("eigenvalues and weights must have equal length")
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    keep = np.abs(c) >= weight_cutoff
    if not np.any(keep):
        raise ValueError("all weights vanish; no coherence dynamics to time")
    decay = -lam[keep].real
    scale = max(1.0, float(np.max(np.abs(lam))))
    dark_floor = 1e-14 * scale

    fastest = float(np.max(decay))
    slowest = float(np.min(decay))
    tau_min = 1.0 / fastest if fastest > dark_floor else math.inf
    tau_max = 1.0 / slowest if slowest > dark_floor else math.inf

    drift = float(np.real(-np.sum(c * lam)))
    tau_lin = epsilon / drift if drift > dark_floor else math.inf
    return Timescales(tau_min, tau_max, tau_lin, epsilon)


def strong_dissipative_rate(J1: float, Gamma2: float) -> float:
    """Leading decoherence rate 2 J1^2 / Gamma2 when loss dominates hopping.

    Second-order perturbation theory in the qubit coupling: the qubit feeds
    the adjacent site (full loss rate Gamma2, i.e. diagonal -i*Gamma2/2) and
    decays at 2 J1^2 / Gamma2 up to relative corrections (J1/Gamma2)^2.
    """
    if Gamma2 <= 0:
        raise ValueError("Gamma2 must be positive")
    return 2.0 * J1**2 / Gamma2


def hermitian_and_loss(H: EffectiveHamiltonian):
    """Split H into its Hermitian part and per-site full loss rates."""
    return H.hermitian_part, H.loss_rates


def weak_dissipative_spectrum(H0, gammas) -> np.ndarray:
    """First-order spectrum for weak loss on an otherwise Hermitian network.

    With ``H0 = sum_k e_k |k><k|`` and site loss rates ``gammas`` (full rates,
    ``gamma_1 = 0`` for the qubit), the generator eigenvalues are, to first
    order, ``lambda_k = -i e_k - (1/2) sum_j gamma_j |<k|j>|^2``.  Returned in
    ascending order of ``e_k``.
    """
    h0 = np.asarray(H0, dtype=float)
    g = np.asarray(gammas, dtype=float).ravel()
    if h0.ndim != 2 or h0.shape[0] != h0.shape[1]:
        raise ValueError("H0 must be a square matrix")
    if np.max(np.abs(h0 - h0.T)) > 1e-12 * max(1.0, np.max(np.abs(h0))):
        raise ValueError("H0 must be symmetric")
    if g.shape != (h0.shape[0],):
        raise ValueError("gammas must match the matrix dimension")
    if np.any(g < 0):
        raise ValueError("loss rates must be non-negative")
    if g[0] != 0:
        raise ValueError("the fiducial qubit (site 1) must be lossless")
    e0, q = np.linalg.eigh(h0)
    rates = 0.5 * (np.abs(q.T) ** 2 @ g)
    return -1j * e0 - rates


def fit_exponential_rate(times, values, floor: float = 1e-300):
    """Least-squares slope of -ln C(t); returns (rate, intercept)."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    mask = v > floor
    if np.count_nonzero(mask) < 2:
        raise ValueError("not enough positive samples for a rate fit")
    slope, intercept = np.polyfit(t[mask], np.log(v[mask]), 1)
    return -float(slope), float(intercept)


def write_trace_csv(stream, trace: CoherenceTrace, header_lines=()):
    """CSV per the trace interface: header ``t,coherence``, 17 significant digits."""
    for line in header_lines:
        stream.write(f"# {line}\n")
    stream.write("t,coherence\n")
    for t, v in zip(trace.times, trace.values):
        stream.write(f"{t:.17g},{v:.17g}\n")
