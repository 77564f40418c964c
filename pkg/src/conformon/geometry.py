"""Centerline reconstruction from curvature and torsion.

The Frenet-Serret system ``R' = t, t' = k n, n' = -k t + tau b, b' = -tau n``
is integrated with classical fourth-order Runge-Kutta on a uniform arclength
grid.  The frame is re-orthonormalized after every step (Gram-Schmidt on t,
then n, then ``b = t x n``).  The starting frame is fixed at the origin with
``t = +z``, ``n = +x``, ``b = +y`` so that outputs are reproducible.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numba
import numpy as np
from scipy.optimize import brentq

from conformon.elliptic import complete_K
from conformon.exceptions import DomainError, IntegrationError, NoSolutionError
from conformon.rod import CurvatureProfile

DEFAULT_STEP = 1e-3
TORSION_GAP_K = 1e-8


@dataclass(frozen=True)
class FrameState:
    """Position and Frenet triad at arclength ``s``."""

    s: float
    R: np.ndarray
    t: np.ndarray
    n: np.ndarray
    b: np.ndarray


@dataclass(frozen=True)
class Conformation:
    """Sampled centerline with its Frenet frames.

    Attributes:
        s: (N,) arclength samples, uniformly spaced by ``step``
        R: (N, 3) positions
        t, n, b: (N, 3) unit tangent, normal and binormal
        k: (N,) curvature of the generating profile at the samples
        profile: the curvature profile that was integrated
        step: arclength increment
        t_snapshot: time at which a travelling profile was frozen
    """

    s: np.ndarray
    R: np.ndarray
    t: np.ndarray
    n: np.ndarray
    b: np.ndarray
    k: np.ndarray
    profile: CurvatureProfile
    step: float
    t_snapshot: float = 0.0

    @property
    def tau0(self) -> float:
        return self.profile.tau0

    def __len__(self) -> int:
        return len(self.s)

    def __getitem__(self, i: int) -> FrameState:
        return FrameState(float(self.s[i]), self.R[i], self.t[i], self.n[i], self.b[i])


@numba.njit(cache=True)
def _frenet_rhs(Y, k, tau, out):
    for c in range(3):
        out[0, c] = Y[1, c]
        out[1, c] = k * Y[2, c]
        out[2, c] = -k * Y[1, c] + tau * Y[3, c]
        out[3, c] = -tau * Y[2, c]


@numba.njit(cache=True)
def _rk4_frames(k_node, k_mid, tau, h, out):
    """Advance ``out[0]`` (rows R, t, n, b) through ``len(k_mid)`` steps.

    Returns the index of the first non-finite step, or -1.
    """
    K1 = np.empty((4, 3))
    K2 = np.empty((4, 3))
    K3 = np.empty((4, 3))
    K4 = np.empty((4, 3))
    Z = np.empty((4, 3))
    for i in range(k_mid.shape[0]):
        Y = out[i]
        _frenet_rhs(Y, k_node[i], tau, K1)
        for r in range(4):
            for c in range(3):
                Z[r, c] = Y[r, c] + 0.5 * h * K1[r, c]
        _frenet_rhs(Z, k_mid[i], tau, K2)
        for r in range(4):
            for c in range(3):
                Z[r, c] = Y[r, c] + 0.5 * h * K2[r, c]
        _frenet_rhs(Z, k_mid[i], tau, K3)
        for r in range(4):
            for c in range(3):
                Z[r, c] = Y[r, c] + h * K3[r, c]
        _frenet_rhs(Z, k_node[i + 1], tau, K4)
        nxt = out[i + 1]
        for r in range(4):
            for c in range(3):
                nxt[r, c] = Y[r, c] + h / 6.0 * (K1[r, c] + 2.0 * K2[r, c] + 2.0 * K3[r, c] + K4[r, c])

        # Gram-Schmidt: t, then n against t, then b = t x n
        nt = math.sqrt(nxt[1, 0] ** 2 + nxt[1, 1] ** 2 + nxt[1, 2] ** 2)
        for c in range(3):
            nxt[1, c] /= nt
        d = nxt[2, 0] * nxt[1, 0] + nxt[2, 1] * nxt[1, 1] + nxt[2, 2] * nxt[1, 2]
        for c in range(3):
            nxt[2, c] -= d * nxt[1, c]
        nn = math.sqrt(nxt[2, 0] ** 2 + nxt[2, 1] ** 2 + nxt[2, 2] ** 2)
        for c in range(3):
            nxt[2, c] /= nn
        nxt[3, 0] = nxt[1, 1] * nxt[2, 2] - nxt[1, 2] * nxt[2, 1]
        nxt[3, 1] = nxt[1, 2] * nxt[2, 0] - nxt[1, 0] * nxt[2, 2]
        nxt[3, 2] = nxt[1, 0] * nxt[2, 1] - nxt[1, 1] * nxt[2, 0]

        for r in range(4):
            for c in range(3):
                if not math.isfinite(nxt[r, c]):
                    return i
    return -1


def arclength_grid(s_start: float, s_end: float, step: float) -> tuple[np.ndarray, float]:
    """Uniform grid from ``s_start`` to ``s_end`` with spacing at most ``step``.

    The spacing is shrunk to ``(s_end - s_start) / ceil(...)`` so that both
    endpoints are samples.
    """
    if not step > 0.0:
        raise DomainError(f"step must be positive, got {step}")
    if not s_end > s_start:
        raise DomainError(f"need s_end > s_start, got [{s_start}, {s_end}]")
    length = s_end - s_start
    n = max(1, math.ceil(length / step - 1e-9))
    h = length / n
    return s_start + h * np.arange(n + 1), h


def integrate_frame(
    profile: CurvatureProfile,
    s_start: float,
    s_end: float,
    step: float = DEFAULT_STEP,
    t_snapshot: float = 0.0,
) -> Conformation:
    """Integrate the Frenet frame for ``profile`` frozen at time ``t_snapshot``."""
    s, h = arclength_grid(s_start, s_end, step)
    k_node = np.ascontiguousarray(profile.evaluate(s, t_snapshot)[0], dtype=float)
    k_mid = np.ascontiguousarray(profile.evaluate(s[:-1] + 0.5 * h, t_snapshot)[0], dtype=float)

    Y = np.zeros((len(s), 4, 3))
    Y[0, 1] = (0.0, 0.0, 1.0)
    Y[0, 2] = (1.0, 0.0, 0.0)
    Y[0, 3] = (0.0, 1.0, 0.0)
    bad = _rk4_frames(k_node, k_mid, float(profile.tau0), h, Y)
    if bad >= 0:
        raise IntegrationError(f"non-finite frame after step {bad} (s = {s[bad]:.6g})")
    return Conformation(
        s=s,
        R=Y[:, 0].copy(),
        t=Y[:, 1].copy(),
        n=Y[:, 2].copy(),
        b=Y[:, 3].copy(),
        k=k_node,
        profile=profile,
        step=h,
        t_snapshot=t_snapshot,
    )


@dataclass(frozen=True)
class CurvatureTorsion:
    """Curvature and torsion estimated from positions; NaN torsion marks a gap."""

    s: np.ndarray
    k: np.ndarray
    tau: np.ndarray


def recover_curvature_torsion(conf: Conformation) -> CurvatureTorsion:
    """Finite-difference curvature and torsion of the sampled centerline.

    Uses second-order central stencils for R', R'' and R''' (five points), so
    the two samples at each end are dropped.  Torsion is reported as NaN where
    the estimated curvature is below ``1e-8``.
    """
    R = conf.R
    h = conf.step
    if len(R) < 5:
        raise DomainError("need at least 5 samples to estimate torsion")
    if float(np.max(np.abs(conf.k))) * h >= 0.5:
        raise DomainError("step too coarse for the curvature (k * step >= 0.5)")

    d1 = (R[3:-1] - R[1:-3]) / (2.0 * h)
    d2 = (R[3:-1] - 2.0 * R[2:-2] + R[1:-3]) / h**2
    d3 = (R[4:] - 2.0 * R[3:-1] + 2.0 * R[1:-3] - R[:-4]) / (2.0 * h**3)

    cross = np.cross(d1, d2)
    cross_sq = np.einsum("ij,ij->i", cross, cross)
    speed = np.linalg.norm(d1, axis=1)
    k = np.sqrt(cross_sq) / speed**3
    tau = np.full_like(k, np.nan)
    ok = k >= TORSION_GAP_K
    tau[ok] = np.einsum("ij,ij->i", cross[ok], d3[ok]) / cross_sq[ok]
    return CurvatureTorsion(s=conf.s[2:-2].copy(), k=k, tau=tau)


def quantization_residual(L: float, m: int, C2: float, tau0: float, kappa: float) -> float:
    """``L sqrt((C2 - tau0^2) / (2 - kappa^2)) - 2 m K(kappa)``."""
    return L * math.sqrt((C2 - tau0 * tau0) / (2.0 - kappa * kappa)) - 2.0 * m * complete_K(kappa)


def minimum_closed_length(m: int, C2: float, tau0: float) -> float:
    """Shortest closed tube carrying ``m`` curvature periods: ``m pi sqrt(2) / sqrt(C2 - tau0^2)``."""
    return m * math.pi * math.sqrt(2.0) / math.sqrt(C2 - tau0 * tau0)


def closed_tube_kappa(L: float, m: int, C2: float, tau0: float, tol: float = 1e-12) -> float:
    """Modulus for which a tube of length ``L`` closes on exactly ``m`` periods.

    ``2 m K(kappa) sqrt(2 - kappa^2)`` increases monotonically on [0, 1), so the
    root is unique and bracketed.  Raises :class:`NoSolutionError` (with the
    feasibility threshold attached) when ``L`` is below
    :func:`minimum_closed_length`, and also when the root sits so close to
    ``kappa = 1`` that no double meets ``|residual| <= tol * max(1, 2 m K)``.
    """
    if not L > 0.0:
        raise DomainError(f"tube length must be positive, got {L}")
    if int(m) != m or m < 1:
        raise DomainError(f"number of periods must be a positive integer, got {m}")
    if not C2 - tau0 * tau0 > 0.0:
        raise DomainError("closed lattice tubes require C2 - tau0**2 > 0")

    def f(kappa):
        return quantization_residual(L, m, C2, tau0, kappa)

    f0 = f(0.0)
    if abs(f0) <= tol:
        return 0.0
    if f0 < 0.0:
        l_min = minimum_closed_length(m, C2, tau0)
        raise NoSolutionError(
            f"tube of length {L!r} is too short for {m} period(s); minimum length is {l_min!r}",
            threshold=l_min,
        )

    hi = 0.5
    while f(hi) > 0.0:
        if hi == np.nextafter(1.0, 0.0):
            raise NoSolutionError(
                f"tube of length {L!r} needs a modulus closer to 1 than double precision resolves"
            )
        hi = min(1.0 - 0.5 * (1.0 - hi) ** 2, np.nextafter(1.0, 0.0))
    root = brentq(f, 0.0, hi, xtol=1e-300, rtol=4.0 * np.finfo(float).eps, maxiter=500)

    # brentq stops within a few ulps; walk to the representable modulus with the smallest residual
    best, best_res = root, abs(f(root))
    for direction in (0.0, 1.0):
        cand = best
        for _ in range(64):
            cand = np.nextafter(cand, direction)
            if not 0.0 <= cand < 1.0:
                break
            res = abs(f(cand))
            if res >= best_res:
                break
            best, best_res = cand, res
    if best_res > tol * max(1.0, 2.0 * m * complete_K(best)):
        raise NoSolutionError(
            f"tube of length {L!r} needs a modulus closer to 1 than double precision resolves "
            f"(best residual {best_res:.3g})"
        )
    return float(best)


# --- export -----------------------------------------------------------------


def _csv_bytes(conf: Conformation) -> bytes:
    buf = io.StringIO()
    buf.write("s,x,y,z,k,tau\n")
    tau = float(conf.tau0)
    for s, (x, y, z), k in zip(conf.s, conf.R, conf.k):
        buf.write(f"{s:.17g},{x:.17g},{y:.17g},{z:.17g},{k:.17g},{tau:.17g}\n")
    return buf.getvalue().encode("ascii")


def tube_mesh(conf: Conformation, radius: float, ring_resolution: int = 16):
    """Vertices ``(N * M, 3)`` and triangles ``(2 (N - 1) M, 3)`` of a swept circle."""
    if ring_resolution < 3:
        raise DomainError("ring resolution must be at least 3")
    theta = 2.0 * np.pi * np.arange(ring_resolution) / ring_resolution
    offsets = (
        np.cos(theta)[None, :, None] * conf.n[:, None, :]
        + np.sin(theta)[None, :, None] * conf.b[:, None, :]
    )
    verts = (conf.R[:, None, :] + radius * offsets).reshape(-1, 3)

    n_rings = len(conf.s)
    i = np.arange(n_rings - 1)[:, None]
    j = np.arange(ring_resolution)[None, :]
    jn = (j + 1) % ring_resolution
    v00 = i * ring_resolution + j
    v10 = (i + 1) * ring_resolution + j
    v11 = (i + 1) * ring_resolution + jn
    v01 = i * ring_resolution + jn
    tri_a = np.stack([v00, v10, v11], axis=-1).reshape(-1, 3)
    tri_b = np.stack([v00, v11, v01], axis=-1).reshape(-1, 3)
    faces = np.stack([tri_a, tri_b], axis=1).reshape(-1, 3)
    return verts, faces.astype(np.int32)


def _ply_bytes(conf: Conformation, radius: float, ring_resolution: int) -> bytes:
    if radius > 0.0:
        verts, faces = tube_mesh(conf, radius, ring_resolution)
        header = (
            "ply\nformat binary_little_endian 1.0\n"
            f"element vertex {len(verts)}\n"
            "property double x\nproperty double y\nproperty double z\n"
            f"element face {len(faces)}\n"
            "property list uchar int vertex_indices\nend_header\n"
        )
        face_rec = np.zeros(len(faces), dtype=[("n", "u1"), ("idx", "<i4", (3,))])
        face_rec["n"] = 3
        face_rec["idx"] = faces
        return header.encode("ascii") + verts.astype("<f8").tobytes() + face_rec.tobytes()

    # centerline only: vertices joined by edges
    verts = conf.R
    header = (
        "ply\nformat binary_little_endian 1.0\n"
        f"element vertex {len(verts)}\n"
        "property double x\nproperty double y\nproperty double z\n"
        f"element edge {len(verts) - 1}\n"
        "property int vertex1\nproperty int vertex2\nend_header\n"
    )
    idx = np.arange(len(verts) - 1, dtype="<i4")
    edges = np.stack([idx, idx + 1], axis=1)
    return header.encode("ascii") + verts.astype("<f8").tobytes() + edges.tobytes()


def export_geometry(
    conf: Conformation,
    format: str = "csv",
    tube_radius: float = 0.0,
    ring_resolution: int = 16,
) -> bytes:
    """Serialize a conformation as CSV text or a binary little-endian PLY mesh.

    CSV has header ``s,x,y,z,k,tau`` and 17 significant digits per value.  PLY
    sweeps a circle of ``tube_radius`` along the centerline in the (n, b)
    plane, giving ``len(conf) * ring_resolution`` vertices; ``tube_radius = 0``
    writes the centerline as a vertex/edge polyline instead.
    """
    if len(conf) == 0:
        raise DomainError("cannot export an empty conformation")
    if tube_radius < 0.0:
        raise DomainError("tube radius must be non-negative")
    fmt = format.lower()
    if fmt == "csv":
        return _csv_bytes(conf)
    if fmt == "ply":
        return _ply_bytes(conf, tube_radius, ring_resolution)
    raise DomainError(f"unknown export format {format!r}")


def read_ply_header(data: bytes) -> dict[str, int]:
    """Element counts declared in a PLY header, e.g. ``{"vertex": 32, "face": 60}``."""
    head = data[: data.index(b"end_header\n")].decode("ascii")
    counts = {}
    for line in head.splitlines():
        parts = line.split()
        if parts[:1] == ["element"]:
            counts[parts[1]] = int(parts[2])
    return counts


def read_ply_vertices(data: bytes) -> np.ndarray:
    """Vertex block of a PLY written by :func:`export_geometry`."""
    counts = read_ply_header(data)
    start = data.index(b"end_header\n") + len(b"end_header\n")
    n = counts["vertex"]
    return np.frombuffer(data, dtype="<f8", count=3 * n, offset=start).reshape(n, 3)
