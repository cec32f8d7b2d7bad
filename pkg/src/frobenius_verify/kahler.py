"""Metric, Christoffel, curvature, Ricci and WDVV tensors at a chart point.

Index conventions used throughout (G is the matrix ``G[a][b] = g_{a bbar}``
of second mixed partials of the potential, H = G^{-1}):

* ``phi3[a][b][c]``     holds Phi_{a b cbar}   (two holomorphic, one anti);
* ``phi3_bar[a][b][c]`` holds Phi_{abar bbar c} = conj(phi3[a][b][c]);
* ``christoffel[k][i][j] = sum_e phi3[i][j][e] H[e][k]``  (Gamma^k_{ij});
* curvature ``R[a][b][c][d]`` (indices a, bbar, c, dbar) is

      d_c dbar_d g_{a bbar}
        - sum_{gamma,e} (d_c g_{a gammabar}) H[gamma][e] (dbar_d g_{e bbar}),

  i.e. second-derivative term minus the H-sandwich of metric gradients;
* ``ricci[c][d] = sum_{a,b} H[b][a] R[a][b][c][d]`` (trace over (a, bbar)).

With these pairings the identity
``R[a][b][c][d] = sum_k g_{k bbar} dbar_d Gamma^k_{ca}`` holds exactly,
so the Ricci tensor equals the fiber trace of ``dbar Gamma`` and the two
independent contraction routes agree to round-off.  The sandwich
position of H (rather than its transpose) is what makes this exact; it
is validated against a finite-difference pipeline in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expr import PotentialExpr
from .wirtinger import Jet, hermiticity_defect, jet_eval, partial

DEGENERACY_FLOOR = 1e-8  # min singular value must exceed floor * max
REALNESS_TOL = 1e-8


class KahlerError(Exception):
    pass


class DegenerateMetricError(KahlerError):
    pass


class RealnessError(KahlerError):
    pass


@dataclass(frozen=True)
class ChartPoint:
    coordinates: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        coords = np.asarray(self.coordinates, dtype=np.complex128)
        object.__setattr__(self, "coordinates", coords)
        if not np.all(np.isfinite(coords)):
            raise ValueError("chart point has non-finite entries")


@dataclass(frozen=True, eq=False)
class MetricData:
    """Per-point bundle of all tensors derived from one potential jet."""

    point: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    phi3: np.ndarray
    phi3_bar: np.ndarray
    christoffel: np.ndarray
    christoffel_bar: np.ndarray
    curvature: np.ndarray
    ricci: np.ndarray
    min_singular: float
    cond: float
    positive_definite: bool  # reported, not certified: spectrum at this point
    jet: Jet

    @property
    def dim(self) -> int:
        return self.g.shape[0]


def _unit(n: int, *axes: int) -> tuple[int, ...]:
    v = [0] * n
    for a in axes:
        v[a] += 1
    return tuple(v)


def metric_at(potential: PotentialExpr, point) -> MetricData:
    """All metric-level tensors at ``point`` from a single jet evaluation."""
    if isinstance(point, ChartPoint):
        point = point.coordinates
    pt = np.asarray(point, dtype=np.complex128)
    n = potential.dim
    jet = jet_eval(potential, pt)

    scale = max(1.0, float(np.max(np.abs(jet.coeffs))))
    if hermiticity_defect(jet) > REALNESS_TOL * scale:
        raise RealnessError("potential is not real-valued near the point")

    g = np.empty((n, n), dtype=np.complex128)
    phi3 = np.empty((n, n, n), dtype=np.complex128)
    ddbar = np.empty((n, n, n, n), dtype=np.complex128)
    for a in range(n):
        for b in range(n):
            g[a, b] = partial(jet, _unit(n, a), _unit(n, b))
            for c in range(n):
                phi3[a, b, c] = partial(jet, _unit(n, a, b), _unit(n, c))
                for d in range(n):
                    ddbar[a, b, c, d] = partial(jet, _unit(n, a, c), _unit(n, b, d))
    phi3_bar = np.conj(phi3)

    sv = np.linalg.svd(g, compute_uv=False)
    smax, smin = float(sv[0]), float(sv[-1])
    if smin <= DEGENERACY_FLOOR * smax:
        raise DegenerateMetricError(
            f"metric degenerate at point (min singular {smin:.3e}, max {smax:.3e})"
        )
    positive = bool(np.linalg.eigvalsh(g)[0] > 0)
    h = np.linalg.inv(g)  # LAPACK LU with partial pivoting

    christoffel = np.einsum("ije,ek->kij", phi3, h)
    # gradient term: (d_c G)[a][gamma] = phi3[a][c][gamma],
    #                (dbar_d G)[e][b]  = phi3_bar[b][d][e]
    grad = np.einsum("acg,ge,bde->abcd", phi3, h, phi3_bar)
    curvature = ddbar - grad
    ricci = np.einsum("ba,abcd->cd", h, curvature)

    return MetricData(
        point=pt,
        g=g,
        g_inv=h,
        phi3=phi3,
        phi3_bar=phi3_bar,
        christoffel=christoffel,
        christoffel_bar=np.conj(christoffel),
        curvature=curvature,
        ricci=ricci,
        min_singular=smin,
        cond=smax / smin,
        positive_definite=positive,
        jet=jet,
    )


def kahler_residuals(md: MetricData, jet: Jet) -> tuple[float, float]:
    """Symmetry-plus-consistency residuals of a metric bundle.

    First value: max of the metric-symmetry defect
    ``|d_a g_{b cbar} - d_b g_{a cbar}|`` (with derivatives read from the
    jet), the hermiticity defect of ``md.g`` and the deviation of
    ``md.g`` from the jet's second partials.  Second value: the same for
    the rank-3 tensor, ``|Phi_{a b cbar} - Phi_{b a cbar}|`` plus the
    deviation of ``md.phi3`` from the jet's third partials.  Both are 0
    for a bundle actually derived from the jet; a corrupted bundle is
    detected through the consistency terms.
    """
    n = md.dim
    g_jet = np.empty_like(md.g)
    phi3_jet = np.empty_like(md.phi3)
    for a in range(n):
        for b in range(n):
            g_jet[a, b] = partial(jet, _unit(n, a), _unit(n, b))
            for c in range(n):
                phi3_jet[a, b, c] = partial(jet, _unit(n, a, b), _unit(n, c))

    sym_g = float(np.max(np.abs(phi3_jet - np.transpose(phi3_jet, (1, 0, 2)))))
    herm = float(np.max(np.abs(md.g - np.conj(md.g.T))))
    cons_g = float(np.max(np.abs(md.g - g_jet)))

    sym_p = float(np.max(np.abs(md.phi3 - np.transpose(md.phi3, (1, 0, 2)))))
    cons_p = float(np.max(np.abs(md.phi3 - phi3_jet)))

    return max(sym_g, herm, cons_g), max(sym_p, cons_p)


def wdvv_residual_at(md: MetricData) -> float:
    """Max deviation between the two contraction routes of the
    associativity constraint on third potential derivatives.

    lhs[a,b,c,d] = sum_{e,f} Phi_{a b ebar} g^{ebar f} Phi_{f cbar dbar}
    rhs[a,b,c,d] = sum_{e,f} Phi_{b cbar ebar} g^{ebar f} Phi_{f a dbar}

    with Phi_{f cbar dbar} = phi3_bar[c][d][f] and
    Phi_{b cbar ebar} = phi3_bar[c][e][b].
    """
    h = md.g_inv
    lhs = np.einsum("abe,ef,cdf->abcd", md.phi3, h, md.phi3_bar)
    rhs = np.einsum("ceb,ef,fad->abcd", md.phi3_bar, h, md.phi3)
    return float(np.max(np.abs(lhs - rhs)))


def ricci_c1_check(md: MetricData) -> tuple[float, float]:
    """Hermiticity defect of the Ricci tensor and its max entry.

    The Ricci tensor represents the first Chern form up to the factor
    i/(2*pi); flat entries must give a vanishing max entry.
    """
    herm = float(np.max(np.abs(md.ricci - np.conj(md.ricci.T))))
    return herm, float(np.max(np.abs(md.ricci)))


def christoffel_derivatives(md: MetricData) -> tuple[np.ndarray, np.ndarray]:
    """First derivatives of the Christoffel symbols at the point.

    Returns ``(dgam, dgam_bar)`` with
    ``dgam[c][k][i][j] = d_c Gamma^k_{ij}`` and
    ``dgam_bar[d][k][i][j] = dbar_d Gamma^k_{ij}``.
    Uses order-4 jet data: d(H) = -H dG H for both derivative types.
    Cached on the bundle (pure function of immutable data).
    """
    cached = getattr(md, "_dgamma_cache", None)
    if cached is not None:
        return cached
    n = md.dim
    jet, h, phi3, phi3_bar = md.jet, md.g_inv, md.phi3, md.phi3_bar

    p4a = np.empty((n, n, n, n), dtype=np.complex128)  # d_c Phi_{ij ebar}
    p4b = np.empty((n, n, n, n), dtype=np.complex128)  # dbar_d Phi_{ij ebar}
    for i in range(n):
        for j in range(n):
            for e in range(n):
                for c in range(n):
                    p4a[i, j, c, e] = partial(jet, _unit(n, i, j, c), _unit(n, e))
                for d in range(n):
                    p4b[i, j, e, d] = partial(jet, _unit(n, i, j), _unit(n, e, d))

    # d_c H = -H (d_c G) H with (d_c G)[p][q] = phi3[p][c][q]
    dg_hol = np.einsum("pcq->cpq", phi3)
    dh_hol = -np.einsum("pe,cef,fk->cpk", h, dg_hol, h)
    # dbar_d H = -H (dbar_d G) H with (dbar_d G)[p][q] = phi3_bar[q][d][p]
    dg_anti = np.einsum("qdp->dpq", phi3_bar)
    dh_anti = -np.einsum("pe,def,fk->dpk", h, dg_anti, h)

    dgam = np.einsum("ijce,ek->ckij", p4a, h) + np.einsum(
        "ije,cek->ckij", phi3, dh_hol
    )
    dgam_bar = np.einsum("ijed,ek->dkij", p4b, h) + np.einsum(
        "ije,dek->dkij", phi3, dh_anti
    )
    object.__setattr__(md, "_dgamma_cache", (dgam, dgam_bar))
    return dgam, dgam_bar
