"""Jacobi elliptic functions and the complete elliptic integral of the first kind.

Every public function here takes the **modulus** ``kappa`` (written k in most
texts), not the parameter ``m = kappa**2`` used by ``scipy.special.ellipj`` and
``scipy.special.ellipk``.  To compare against those routines pass
``m = kappa**2``::

    >>> from scipy.special import ellipk
    >>> abs(complete_K(0.5) - ellipk(0.25)) < 1e-14
    True

The functions are evaluated with the arithmetic-geometric mean and the
descending Landen transformation, so they are accurate to a few ulps for every
modulus strictly below one.  At ``kappa == 1`` the hyperbolic closed forms are
used.  All functions broadcast over numpy arrays and return plain floats for
scalar input.
"""

from __future__ import annotations

import numpy as np

from conformon.exceptions import DivergenceError, DomainError

__all__ = ["complete_K", "jacobi_dn", "jacobi_sn_cn", "jacobi_sn_cn_dn"]

AGM_TOL = 1e-15
_MAX_AGM_STEPS = 64


def _as_modulus(kappa) -> np.ndarray:
    k = np.asarray(kappa, dtype=float)
    if not np.all(np.isfinite(k)) or np.any(k < 0.0) or np.any(k > 1.0):
        raise DomainError(f"modulus must lie in [0, 1], got {kappa!r}")
    return k


def _complementary_sq(k: np.ndarray) -> np.ndarray:
    # (1 - k)(1 + k) avoids the cancellation in 1 - k**2 as k -> 1
    return (1.0 - k) * (1.0 + k)


def _agm_ladder(k: np.ndarray):
    """Return the AGM sequences ``a_n`` and ``c_n`` for ``a_0 = 1, b_0 = k'``."""
    a = np.ones_like(k)
    b = np.sqrt(_complementary_sq(k))
    c = k.copy()
    a_seq, c_seq = [a], [c]
    for _ in range(_MAX_AGM_STEPS):
        if np.all(np.abs(c) < AGM_TOL * a):
            break
        a, b, c = 0.5 * (a + b), np.sqrt(a * b), 0.5 * (a - b)
        a_seq.append(a)
        c_seq.append(c)
    return a_seq, c_seq


def _scalar_or_array(x: np.ndarray):
    return float(x) if x.ndim == 0 else x


def complete_K(kappa):
    """Complete elliptic integral of the first kind K(kappa).

    Raises
    ------
    DivergenceError
        If any ``kappa == 1``; K diverges logarithmically there.
    DomainError
        If ``kappa`` lies outside [0, 1].
    """
    k = _as_modulus(kappa)
    if np.any(k == 1.0):
        raise DivergenceError("K(kappa) tends to infinity at kappa = 1")
    a_seq, _ = _agm_ladder(k)
    return _scalar_or_array(np.pi / (2.0 * a_seq[-1]))


def _sech(x: np.ndarray) -> np.ndarray:
    e = np.exp(-np.abs(x))
    return 2.0 * e / (1.0 + e * e)


def jacobi_sn_cn_dn(s, kappa):
    """Return ``(sn, cn, dn)`` of argument ``s`` and modulus ``kappa``.

    ``dn`` is formed as ``sqrt(k'^2 + k^2 cn^2)``; both terms are non-negative,
    so there is no cancellation near the minimum of dn when kappa is close
    to one.
    """
    k = _as_modulus(kappa)
    u = np.asarray(s, dtype=float)
    u, k = np.broadcast_arrays(u, k)
    sn = np.empty(u.shape)
    cn = np.empty(u.shape)
    dn = np.empty(u.shape)

    hyper = k == 1.0
    if np.any(hyper):
        uh = u[hyper]
        sn[hyper] = np.tanh(uh)
        cn[hyper] = dn[hyper] = _sech(uh)

    reg = ~hyper
    if np.any(reg):
        kr = k[reg]
        ur = u[reg]
        a_seq, c_seq = _agm_ladder(kr)
        n_steps = len(a_seq) - 1
        quarter = np.pi / (2.0 * a_seq[-1])
        ur = ur - 4.0 * quarter * np.round(ur / (4.0 * quarter))
        phi = 2.0**n_steps * a_seq[-1] * ur
        for n in range(n_steps, 0, -1):
            phi = 0.5 * (phi + np.arcsin(c_seq[n] / a_seq[n] * np.sin(phi)))
        cn_r = np.cos(phi)
        sn[reg] = np.sin(phi)
        cn[reg] = cn_r
        dn[reg] = np.sqrt(_complementary_sq(kr) + kr * kr * cn_r * cn_r)

    return _scalar_or_array(sn), _scalar_or_array(cn), _scalar_or_array(dn)


def jacobi_sn_cn(s, kappa):
    """Return ``(sn, cn)``; see :func:`jacobi_sn_cn_dn`."""
    sn, cn, _ = jacobi_sn_cn_dn(s, kappa)
    return sn, cn


def jacobi_dn(s, kappa):
    """Jacobi delta amplitude dn(s, kappa), period 2K(kappa) for kappa < 1."""
    return jacobi_sn_cn_dn(s, kappa)[2]
