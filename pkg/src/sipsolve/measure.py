"""Nonnegative discrete measures and the divergences driving the dual update.

The dual iterates of the solver live in the cone of nonnegative measures with
bounded total mass.  Progress is measured by a generalized Kullback-Leibler
divergence ``b_divergence`` that applies to unnormalized weight vectors; it
splits into a mass term ``h_func`` and a shape term ``kl_divergence`` over the
normalized profiles.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

__all__ = [
    "DiscreteMeasure",
    "h_func",
    "kl_divergence",
    "b_divergence",
]

#: Two weight vectors are considered probability vectors when their masses
#: differ from 1 by at most this much.
_MASS_TOL = 1e-12


@dataclasses.dataclass(frozen=True)
class DiscreteMeasure:
    """A finitely supported nonnegative measure, stored as atom weights.

    Parameters
    ----------
    weights : array_like
        Nonnegative, finite atom weights.  Copied to a read-only float array.
    """

    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.array(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a nonempty 1-d array")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def mass(self) -> float:
        """Total mass, the sum of all atom weights."""
        return float(self.weights.sum())

    def normalized(self) -> "DiscreteMeasure":
        """Return the probability measure with the same shape.

        Raises
        ------
        ValueError
            If the measure has zero mass.
        """
        m = self.mass
        if m <= 0.0:
            raise ValueError("cannot normalize a zero measure")
        return DiscreteMeasure(self.weights / m)


def _weights(measure) -> np.ndarray:
    """Coerce a DiscreteMeasure or array-like to a validated weight array."""
    if isinstance(measure, DiscreteMeasure):
        return measure.weights
    return DiscreteMeasure(measure).weights


def h_func(rho: float, rho_prime: float) -> float:
    """Scalar mass divergence ``rho*log(rho/rho') - rho + rho'``.

    The continuous extension at ``rho = 0`` is used, so ``h_func(0, r) == r``.

    Parameters
    ----------
    rho : float
        Nonnegative mass of the first measure.
    rho_prime : float
        Positive mass of the reference measure.

    Returns
    -------
    float
        Nonnegative, and zero iff ``rho == rho_prime``.
    """
    if not (rho >= 0.0) or not math.isfinite(rho):
        raise ValueError(f"rho must be finite and >= 0, got {rho}")
    if not (rho_prime > 0.0) or not math.isfinite(rho_prime):
        raise ValueError(f"rho_prime must be finite and > 0, got {rho_prime}")
    if rho == 0.0:
        return float(rho_prime)
    return float(rho * math.log(rho / rho_prime) - rho + rho_prime)


def kl_divergence(p, q) -> float:
    """Kullback-Leibler divergence between two probability weight vectors.

    Parameters
    ----------
    p, q : DiscreteMeasure or array_like
        Probability vectors of the same length (masses equal to 1 within
        1e-12).  Whenever some ``p[i] > 0`` has ``q[i] == 0`` the divergence
        is infinite; atoms with ``p[i] == 0`` contribute nothing.

    Returns
    -------
    float
        ``sum(p * log(p / q))``, possibly ``inf``.
    """
    pw, qw = _weights(p), _weights(q)
    if pw.shape != qw.shape:
        raise ValueError("p and q must have the same number of atoms")
    for name, w in (("p", pw), ("q", qw)):
        if abs(w.sum() - 1.0) > _MASS_TOL:
            raise ValueError(f"{name} is not normalized: mass {w.sum()!r}")
    support = pw > 0.0
    if np.any(qw[support] == 0.0):
        return math.inf
    return float(np.sum(pw[support] * np.log(pw[support] / qw[support])))


def b_divergence(lam, gam) -> float:
    """Generalized KL divergence between unnormalized weight vectors.

    Computes ``sum(lam*log(lam/gam) - lam + gam)`` with the convention
    ``0*log(0) = 0``.  Unlike :func:`kl_divergence` the arguments need not be
    normalized; for probability vectors the two functions agree.

    Decomposes as ``b(lam, gam) = mass(lam) * kl(phi_lam, phi_gam)
    + h_func(mass(lam), mass(gam))`` where ``phi`` denotes the normalized
    profile, which is how the solver separates mass growth from shape change.

    Parameters
    ----------
    lam, gam : DiscreteMeasure or array_like
        Nonnegative weight vectors of the same length.

    Returns
    -------
    float
        Nonnegative; ``inf`` when ``lam`` puts weight on an atom where
        ``gam`` has none; zero iff the vectors are identical.
    """
    lw, gw = _weights(lam), _weights(gam)
    if lw.shape != gw.shape:
        raise ValueError("lam and gam must have the same number of atoms")
    support = lw > 0.0
    if np.any(gw[support] == 0.0):
        return math.inf
    s = float(np.sum(lw[support] * np.log(lw[support] / gw[support])))
    return s - float(lw.sum()) + float(gw.sum())
