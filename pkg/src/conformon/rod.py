"""Static Kirchhoff tube with intrinsic twist.

The torque constitutive law is ``m = k1 d1 + a k2 d2 + b (k3 - k3_0) d3`` with
bending ratio ``a = I1/I2`` and twisting rigidity ``b = 2a / ((1 + sigma)(1 + a))``.
Restricting the material-frame angle to ``phi = n pi / 2`` leaves two solution
families:

* Case I  (``phi = j pi``):          ``k1 = 0``, ``k2 = (-1)^j k``
* Case II (``phi = (j + 1/2) pi``):  ``k1 = (-1)^j k``, ``k2 = 0``

In both, ``k3 = tau0`` is constant and the curvature obeys

    k_ss + k**3 / 2 = (C2 - tau0**2) k,

solved by the profiles in this module.  ``C2`` is the stored tension constant;
the physical straight-tube tension is ``C = a * C2`` (Case I) or ``C = C2``
(Case II).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from conformon.elliptic import complete_K, jacobi_sn_cn_dn
from conformon.exceptions import (
    ConsistencyError,
    DegenerateMaterialError,
    DomainError,
)

TORSION_TOL = 1e-12


@dataclass(frozen=True)
class RodMaterial:
    """Elastic constants of the tube.

    Attributes:
        a: bending-rigidity ratio I1/I2, ``0 < a <= 1``
        sigma: Poisson ratio, ``-1 <= sigma <= 1/2``
        k3_0: intrinsic twist rate of the relaxed straight tube
    """

    a: float
    sigma: float
    k3_0: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.a <= 1.0:
            raise DomainError(f"bending ratio a must satisfy 0 < a <= 1, got {self.a}")
        if not -1.0 <= self.sigma <= 0.5:
            raise DomainError(f"Poisson ratio must satisfy -1 <= sigma <= 1/2, got {self.sigma}")
        if not math.isfinite(self.k3_0):
            raise DomainError("intrinsic twist must be finite")

    @property
    def b(self) -> float:
        return twisting_rigidity(self)


class CaseId(enum.Enum):
    I = "I"
    II = "II"


@dataclass(frozen=True)
class SolutionCase:
    """Which of the two ``phi = n pi / 2`` families, and its parity ``j``."""

    case_id: CaseId
    j: int = 0

    def __post_init__(self):
        if not isinstance(self.case_id, CaseId):
            object.__setattr__(self, "case_id", CaseId(self.case_id))
        if self.j not in (0, 1):
            raise DomainError(f"parity j must be 0 or 1, got {self.j}")

    @property
    def phi(self) -> float:
        offset = 0.0 if self.case_id is CaseId.I else 0.5
        return (self.j + offset) * math.pi

    @property
    def sign(self) -> int:
        return -1 if self.j else 1


def twisting_rigidity(mat: RodMaterial) -> float:
    """Twisting rigidity ``b = 2a / ((1 + sigma)(1 + a))``."""
    if mat.sigma == -1.0:
        raise DomainError("twisting rigidity diverges at sigma = -1")
    return 2.0 * mat.a / ((1.0 + mat.sigma) * (1.0 + mat.a))


def _torsion_denominator(mat: RodMaterial, case: SolutionCase) -> float:
    if case.case_id is CaseId.I:
        return mat.a + mat.sigma * (mat.a + 1.0)
    return 1.0 + mat.sigma * (mat.a + 1.0)


def torsion_from_twist(mat: RodMaterial, case: SolutionCase) -> float:
    """Torsion forced by the intrinsic twist.

    Case I gives ``tau0 = -k3_0 / (a + sigma (a + 1))`` and Case II gives
    ``tau0 = -a k3_0 / (1 + sigma (a + 1))``.

    Raises:
        DegenerateMaterialError: when the denominator vanishes.  These are the
            Poisson ratios at which an untwisted tube (``k3_0 = 0``) admits an
            arbitrary torsion; see :func:`zero_twist_sigma`.
    """
    denom = _torsion_denominator(mat, case)
    if abs(denom) < 1e-15:
        raise DegenerateMaterialError(
            f"torsion law is degenerate for a={mat.a}, sigma={mat.sigma} in case {case.case_id.value}"
        )
    if case.case_id is CaseId.I:
        return -mat.k3_0 / denom
    return -mat.a * mat.k3_0 / denom


def zero_twist_sigma(a: float, case: SolutionCase) -> float:
    """Poisson ratio at which an untwisted tube supports nonzero torsion.

    Case I requires ``b = 2a``, i.e. ``sigma = -a/(1 + a)`` in ``[-1/2, 0)``;
    Case II requires ``b = 2``, i.e. ``sigma = -1/(1 + a)`` in ``(-1, -1/2]``.
    These are exactly the zeros of the torsion-law denominators.
    """
    if not 0.0 < a <= 1.0:
        raise DomainError(f"bending ratio a must satisfy 0 < a <= 1, got {a}")
    if case.case_id is CaseId.I:
        return -a / (1.0 + a)
    return -1.0 / (1.0 + a)


def check_sigma_inequality(mat: RodMaterial, tau0: float, rtol: float = 1e-12) -> bool:
    """Whether ``sigma < -k3_0 / tau0 <= 2 sigma + 1``.

    The upper bound is met with equality for ``a = 1`` in Case I, so it is
    tested with a relative slack of ``rtol``.
    """
    if tau0 == 0.0:
        raise DomainError("inequality is undefined for tau0 = 0")
    ratio = -mat.k3_0 / tau0
    upper = 2.0 * mat.sigma + 1.0
    return bool(mat.sigma < ratio and ratio <= upper + rtol * max(1.0, abs(upper)))


# --- curvature profiles -----------------------------------------------------


def _check_excess(C2: float, tau0: float) -> float:
    excess = C2 - tau0 * tau0
    if not excess > 0.0:
        raise DomainError(f"profile requires C2 - tau0**2 > 0, got {excess}")
    return excess


@dataclass(frozen=True)
class ConformonLattice:
    """Periodic curvature ``k = 2 alpha dn(alpha xi, kappa)``, ``xi = s - v t``.

    ``alpha = sqrt((C2 - tau0**2) / (2 - kappa**2))``.  At ``kappa = 1`` this is
    the solitary profile; at ``kappa = 0`` the curvature is constant (helix).
    """

    kappa: float
    C2: float
    tau0: float
    v: float = 0.0
    kind = "lattice"

    def __post_init__(self):
        if not 0.0 <= self.kappa <= 1.0:
            raise DomainError(f"modulus must lie in [0, 1], got {self.kappa}")
        _check_excess(self.C2, self.tau0)

    @property
    def excess(self) -> float:
        """The controlling combination ``C2 - tau0**2``."""
        return self.C2 - self.tau0 * self.tau0

    @property
    def alpha(self) -> float:
        return math.sqrt(self.excess / (2.0 - self.kappa**2))

    @property
    def period(self) -> float:
        """Arclength period ``2 K(kappa) / alpha``; infinite at kappa = 1."""
        if self.kappa == 1.0:
            return math.inf
        return 2.0 * complete_K(self.kappa) / self.alpha

    def evaluate(self, s, t=0.0):
        alpha, kappa = self.alpha, self.kappa
        xi = np.asarray(s, dtype=float) - self.v * t
        sn, cn, dn = jacobi_sn_cn_dn(alpha * xi, kappa)
        k = 2.0 * alpha * dn
        k_s = -2.0 * alpha**2 * kappa**2 * sn * cn
        k_ss = -2.0 * alpha**3 * kappa**2 * dn * (cn * cn - sn * sn)
        return k, k_s, k_ss


@dataclass(frozen=True)
class Solitary:
    """Localized conformon ``k = 2 beta sech(beta xi)``, ``beta = sqrt(C2 - tau0**2)``."""

    C2: float
    tau0: float
    v: float = 0.0
    kind = "solitary"

    def __post_init__(self):
        _check_excess(self.C2, self.tau0)

    @property
    def excess(self) -> float:
        return self.C2 - self.tau0 * self.tau0

    @property
    def beta(self) -> float:
        return math.sqrt(self.excess)

    @property
    def period(self) -> float:
        return math.inf

    def evaluate(self, s, t=0.0):
        beta = self.beta
        x = beta * (np.asarray(s, dtype=float) - self.v * t)
        e = np.exp(-np.abs(x))
        sech = 2.0 * e / (1.0 + e * e)
        tanh = np.tanh(x)
        k = 2.0 * beta * sech
        k_s = -2.0 * beta**2 * sech * tanh
        k_ss = 2.0 * beta**3 * sech * (tanh * tanh - sech * sech)
        return k, k_s, k_ss


@dataclass(frozen=True)
class CircularRing:
    """Planar ring of constant curvature ``sqrt(2 C2)`` with zero torsion.

    ``C2 = 0`` gives a straight tube.
    """

    C2: float
    tau0: float = 0.0
    v: float = 0.0
    kind = "ring"

    def __post_init__(self):
        if self.tau0 != 0.0:
            raise DomainError("a circular ring has zero torsion")
        if not self.C2 >= 0.0:
            raise DomainError(f"circular ring requires C2 >= 0, got {self.C2}")

    @property
    def excess(self) -> float:
        return self.C2

    @property
    def period(self) -> float:
        return 0.0

    def evaluate(self, s, t=0.0):
        shape = np.shape(s)
        k = np.full(shape, math.sqrt(2.0 * self.C2))
        zero = np.zeros(shape)
        if not shape:
            return float(k), 0.0, 0.0
        return k, zero, zero.copy()


CurvatureProfile = Union[ConformonLattice, Solitary, CircularRing]


def curvature_eval(profile: CurvatureProfile, s, t=0.0):
    """Curvature and its first two arclength derivatives at ``xi = s - v t``."""
    return profile.evaluate(s, t)


def curvature_ode_residual(profile: CurvatureProfile, s, t=0.0):
    """``k_ss + k**3/2 - (C2 - tau0**2) k`` from analytic derivatives."""
    k, _, k_ss = profile.evaluate(s, t)
    return k_ss + 0.5 * k**3 - profile.excess * k


# --- forces and the static equations ----------------------------------------


@dataclass(frozen=True)
class ForceField:
    """Internal force ``g`` and torque ``m`` in the material frame (d1, d2, d3)."""

    g1: np.ndarray
    g2: np.ndarray
    g3: np.ndarray
    m1: np.ndarray
    m2: np.ndarray
    m3: np.ndarray


def frame_curvatures(case: SolutionCase, profile: CurvatureProfile, s, t=0.0):
    """Darboux components ``(k1, k2, k3)`` in the material frame."""
    k, _, _ = profile.evaluate(s, t)
    k = np.asarray(k, dtype=float)
    zero = np.zeros_like(k)
    k3 = np.full_like(k, profile.tau0)
    if case.case_id is CaseId.I:
        return zero, case.sign * k, k3
    return case.sign * k, zero, k3


def _check_torsion(mat: RodMaterial, case: SolutionCase, tau0: float) -> None:
    try:
        expected = torsion_from_twist(mat, case)
    except DegenerateMaterialError:
        # an untwisted tube at the degenerate Poisson ratio takes any torsion
        if mat.k3_0 == 0.0:
            return
        raise
    if abs(expected - tau0) > TORSION_TOL:
        raise ConsistencyError(
            f"profile torsion {tau0!r} differs from the torsion law value {expected!r}"
        )


def force_field(
    mat: RodMaterial,
    case: SolutionCase,
    profile: CurvatureProfile,
    s,
    t=0.0,
    check: bool = True,
) -> ForceField:
    """Force and torque carried by an exact static solution.

    Case I:  ``g = (-1)^j a (tau0 k d2 - k_s d1) + (C - a k^2/2) d3``, ``C = a C2``.
    Case II: ``g = (-1)^j (tau0 k d1 + k_s d2) + (C - k^2/2) d3``, ``C = C2``.

    With ``check=False`` the torsion of ``profile`` is not matched against the
    torsion law, which lets residual reports quantify an inconsistent input.
    """
    if check:
        _check_torsion(mat, case, profile.tau0)
    k, k_s, _ = profile.evaluate(s, t)
    k = np.asarray(k, dtype=float)
    k_s = np.asarray(k_s, dtype=float)
    tau0, sgn = profile.tau0, case.sign
    if case.case_id is CaseId.I:
        g1 = -sgn * mat.a * k_s
        g2 = sgn * mat.a * tau0 * k
        g3 = mat.a * profile.C2 - 0.5 * mat.a * k * k
    else:
        g1 = sgn * tau0 * k
        g2 = sgn * k_s
        g3 = profile.C2 - 0.5 * k * k
    k1, k2, k3 = frame_curvatures(case, profile, s, t)
    return ForceField(
        g1=g1,
        g2=g2,
        g3=g3,
        m1=k1,
        m2=mat.a * k2,
        m3=mat.b * (k3 - mat.k3_0),
    )


def _richardson(f, s: np.ndarray, h: float) -> np.ndarray:
    def central(step):
        return (f(s + step) - f(s - step)) / (2.0 * step)

    return (4.0 * central(0.5 * h) - central(h)) / 3.0


def static_residuals(
    mat: RodMaterial,
    case: SolutionCase,
    profile: CurvatureProfile,
    s,
    h: float = 1e-5,
) -> np.ndarray:
    """Residuals of the six static Kirchhoff equations, shape ``(6, len(s))``.

    Rows are the three force balances, the two torque relations that define
    ``g2`` and ``g1``, and the twist balance:

        g1' + k2 g3 - k3 g2,   g2' + k3 g1 - k1 g3,   g3' + k1 g2 - k2 g1,
        g2 - k1' - (b - a) k2 k3 + b k3_0 k2,
        g1 + a k2' - (b - 1) k1 k3 + b k3_0 k1,
        b k3' + (a - 1) k1 k2.

    Arclength derivatives are Richardson-extrapolated central differences of
    step ``h``; ``g`` comes from :func:`force_field` without a torsion check.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    a, b, k30 = mat.a, mat.b, mat.k3_0

    def g(i):
        return lambda x: getattr(force_field(mat, case, profile, x, check=False), f"g{i}")

    def kc(i):
        return lambda x: frame_curvatures(case, profile, x)[i - 1]

    ff = force_field(mat, case, profile, s, check=False)
    g1, g2, g3 = ff.g1, ff.g2, ff.g3
    k1, k2, k3 = frame_curvatures(case, profile, s)
    g1_s, g2_s, g3_s = (_richardson(g(i), s, h) for i in (1, 2, 3))
    k1_s, k2_s, k3_s = (_richardson(kc(i), s, h) for i in (1, 2, 3))

    return np.stack(
        [
            g1_s + k2 * g3 - k3 * g2,
            g2_s + k3 * g1 - k1 * g3,
            g3_s + k1 * g2 - k2 * g1,
            g2 - k1_s - (b - a) * k2 * k3 + b * k30 * k2,
            g1 + a * k2_s - (b - 1.0) * k1 * k3 + b * k30 * k1,
            b * k3_s + (a - 1.0) * k1 * k2,
        ]
    )
