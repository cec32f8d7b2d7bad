"""Classification data: lattices, torus group actions and surface entries.

The geometric catalog holds the flat torus and the seven quotient
families of a product of elliptic curves E x F by a finite group.  In
the stored presentation every action is cyclic, free and contains no
translations: the three product families (Z2+Z2, Z4+Z2, Z3+Z3) are
recorded after absorbing their pure-translation generator into an
enlarged lattice, which is the unique presentation on which freeness
and translation-freeness can hold simultaneously (the linear image of
a free translation-free action on a complex torus embeds into the
diagonal stabilizer of a fixed eigenvector, hence is cyclic).  The
original family group is kept as metadata under ``holonomy``.

Freeness is decided by exact integer linear algebra: the fixed-point
equation ``(A - I) x = -t (mod lattice)`` is transported to lattice
coordinates where ``A - I`` is an integer matrix, and solvability is
read off the Smith normal form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .expr import PotentialExpr, Product, Sum, Var, ConjVar

MATCH_TOL = 1e-9
EXACT_TOL = 1e-12
ORDER_BOUND = 512


# --- integer Smith normal form --------------------------------------


def smith_normal_form(mat: Sequence[Sequence[int]]):
    """Diagonalize an integer matrix by unimodular row/column operations.

    Returns ``(U, D, V)`` with ``U @ mat @ V == D``, U and V unimodular,
    and D diagonal with nonnegative entries in divisibility order.
    Exact Python-int arithmetic throughout.
    """
    a = [[int(v) for v in row] for row in mat]
    m = len(a)
    n = len(a[0]) if m else 0
    u = [[int(i == j) for j in range(m)] for i in range(m)]
    v = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(i, j, q):  # row_i += q * row_j
        a[i] = [x + q * y for x, y in zip(a[i], a[j])]
        u[i] = [x + q * y for x, y in zip(u[i], u[j])]

    def add_col(i, j, q):  # col_i += q * col_j
        for row in a:
            row[i] += q * row[j]
        for row in v:
            row[i] += q * row[j]

    def diagonalize():
        t = 0
        while t < min(m, n):
            pr = pc = None
            best = None
            for i in range(t, m):
                for j in range(t, n):
                    if a[i][j] != 0 and (best is None or abs(a[i][j]) < best):
                        best, pr, pc = abs(a[i][j]), i, j
            if pr is None:
                break
            swap_rows(t, pr)
            swap_cols(t, pc)
            while True:
                done = True
                for i in range(t + 1, m):
                    if a[i][t] != 0:
                        q = a[i][t] // a[t][t]
                        add_row(i, t, -q)
                        if a[i][t] != 0:
                            swap_rows(i, t)
                            done = False
                for j in range(t + 1, n):
                    if a[t][j] != 0:
                        q = a[t][j] // a[t][t]
                        add_col(j, t, -q)
                        if a[t][j] != 0:
                            swap_cols(j, t)
                            done = False
                if done and all(a[i][t] == 0 for i in range(t + 1, m)):
                    if all(a[t][j] == 0 for j in range(t + 1, n)):
                        break
            t += 1
        return t

    rank = diagonalize()
    # enforce the divisibility chain d_i | d_{i+1}
    changed = True
    while changed:
        changed = False
        for i in range(rank - 1):
            di, dj = a[i][i], a[i + 1][i + 1]
            if di != 0 and dj % di != 0:
                add_col(i, i + 1, 1)
                rank = diagonalize()
                changed = True
                break
    for i in range(min(m, n)):
        if a[i][i] < 0:
            for row in v:
                row[i] = -row[i]
            a[i] = [-x for x in a[i]]  # only the diagonal entry is nonzero
    return (
        np.array(u, dtype=object),
        np.array(a, dtype=object),
        np.array(v, dtype=object),
    )


# --- domain types ----------------------------------------------------


@dataclass(frozen=True, eq=False)
class Lattice:
    """Full-rank lattice in C^n given by 2n generator vectors."""

    generators: np.ndarray  # shape (2n, n), complex

    def __post_init__(self) -> None:
        gens = np.asarray(self.generators, dtype=np.complex128)
        object.__setattr__(self, "generators", gens)
        if gens.ndim != 2 or gens.shape[0] != 2 * gens.shape[1]:
            raise ValueError("lattice needs 2n generators in C^n")
        if abs(np.linalg.det(self.real_basis())) < EXACT_TOL:
            raise ValueError("lattice generators are linearly dependent over R")

    @property
    def dim(self) -> int:
        return self.generators.shape[1]

    def real_basis(self) -> np.ndarray:
        """Columns are the generators as stacked (Re, Im) vectors."""
        cols = [np.concatenate([g.real, g.imag]) for g in self.generators]
        return np.stack(cols, axis=1)

    def coordinates(self, vector: np.ndarray) -> np.ndarray:
        vec = np.asarray(vector, dtype=np.complex128)
        rhs = np.concatenate([vec.real, vec.imag])
        return np.linalg.solve(self.real_basis(), rhs)

    def contains(self, vector: np.ndarray, tol: float = MATCH_TOL) -> bool:
        coords = self.coordinates(vector)
        return bool(np.max(np.abs(coords - np.round(coords))) < tol)


@dataclass(frozen=True, eq=False)
class AffineMap:
    """z -> A z + t on C^n."""

    A: np.ndarray
    t: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.A, dtype=np.complex128)
        t = np.asarray(self.t, dtype=np.complex128)
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "t", t)
        if abs(np.linalg.det(a)) < EXACT_TOL:
            raise ValueError("affine map has singular linear part")

    def compose(self, other: "AffineMap") -> "AffineMap":
        return AffineMap(self.A @ other.A, self.A @ other.t + self.t)

    def apply(self, z: np.ndarray) -> np.ndarray:
        return self.A @ z + self.t

    def is_identity(self, lattice: Lattice, tol: float = MATCH_TOL) -> bool:
        n = self.A.shape[0]
        return bool(np.max(np.abs(self.A - np.eye(n))) < tol) and lattice.contains(
            self.t, tol
        )


@dataclass(frozen=True, eq=False)
class GroupAction:
    lattice: Lattice
    elements: tuple[AffineMap, ...]
    name: str = ""


@dataclass(frozen=True)
class GroupReport:
    closure: bool
    lattice_stable: bool
    finite: bool
    faithful: bool

    @property
    def ok(self) -> bool:
        return self.closure and self.lattice_stable and self.finite and self.faithful


@dataclass(frozen=True, eq=False)
class CatalogEntry:
    name: str
    dim: int
    potential: Optional[PotentialExpr]
    lattice: Optional[Lattice]
    action: Optional[GroupAction]
    expected_class: str  # torus | hyperelliptic | negative-control | metadata
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.potential is not None and self.potential.dim != self.dim:
            raise ValueError("potential dimension mismatch")


# --- group validation -------------------------------------------------


def _same_mod_lattice(g: AffineMap, h: AffineMap, lattice: Lattice) -> bool:
    if np.max(np.abs(g.A - h.A)) >= MATCH_TOL:
        return False
    return lattice.contains(g.t - h.t)


def validate_group(action: GroupAction) -> GroupReport:
    """Closure mod lattice, lattice stability, finiteness, faithfulness."""
    lat = action.lattice
    els = action.elements

    stable = all(
        lat.contains(el.A @ gen) for el in els for gen in lat.generators
    )

    closure = True
    for g in els:
        for h in els:
            comp = g.compose(h)
            if not any(_same_mod_lattice(comp, el, lat) for el in els):
                closure = False
                break
        if not closure:
            break

    finite = True
    identity = AffineMap(np.eye(lat.dim), np.zeros(lat.dim))
    for el in els:
        power = el
        for _ in range(ORDER_BOUND):
            if _same_mod_lattice(power, identity, lat):
                break
            power = power.compose(el)
        else:
            finite = False
            break

    faithful = True
    for i in range(len(els)):
        for j in range(i + 1, len(els)):
            if _same_mod_lattice(els[i], els[j], lat):
                faithful = False

    return GroupReport(closure, stable, finite, faithful)


def _real_linear(a: np.ndarray) -> np.ndarray:
    """2n x 2n real matrix of z -> A z acting on stacked (Re, Im)."""
    re, im = a.real, a.imag
    top = np.concatenate([re, -im], axis=1)
    bot = np.concatenate([im, re], axis=1)
    return np.concatenate([top, bot], axis=0)


def is_free(action: GroupAction) -> tuple[bool, Optional[np.ndarray]]:
    """Decide whether the action has no fixed point on the torus.

    For each non-identity element ``(A, t)`` the fixed-point condition
    ``(A - I) x = -t (mod lattice)`` is rewritten in lattice coordinates
    where ``A - I`` becomes an integer matrix T; with ``U T V = D`` in
    Smith normal form a solution exists iff ``(U tau)_i`` is an integer
    on every zero row of D.  On failure a fixed-point witness in C^n is
    returned.
    """
    lat = action.lattice
    n = lat.dim
    basis = lat.real_basis()
    basis_inv = np.linalg.inv(basis)
    identity = AffineMap(np.eye(n), np.zeros(n))

    for el in action.elements:
        if _same_mod_lattice(el, identity, lat):
            continue
        m_real = _real_linear(el.A - np.eye(n))
        t_float = basis_inv @ m_real @ basis
        t_int = np.round(t_float)
        if np.max(np.abs(t_float - t_int)) > MATCH_TOL:
            raise ValueError("lattice is not stable under the linear part")
        tau = basis_inv @ np.concatenate([el.t.real, el.t.imag])
        u, d, v = smith_normal_form(t_int.astype(np.int64))
        w = np.array(u, dtype=np.float64) @ tau
        diag = [int(d[i][i]) for i in range(2 * n)]
        solvable = all(
            abs(w[i] - round(w[i])) < MATCH_TOL
            for i in range(2 * n)
            if diag[i] == 0
        )
        if solvable:
            eta = np.zeros(2 * n)
            for i in range(2 * n):
                if diag[i] != 0:
                    eta[i] = -w[i] / diag[i]
            xi = np.array(v, dtype=np.float64) @ eta
            x_real = basis @ xi
            witness = x_real[:n] + 1j * x_real[n:]
            moved = el.apply(witness) - witness
            if not lat.contains(moved, 1e-6):
                raise AssertionError("fixed-point witness failed verification")
            return False, witness
    return True, None


def contains_translations(action: GroupAction) -> bool:
    """True iff a non-identity element has exact identity linear part."""
    n = action.lattice.dim
    identity = AffineMap(np.eye(n), np.zeros(n))
    for el in action.elements:
        if _same_mod_lattice(el, identity, action.lattice):
            continue
        if np.max(np.abs(el.A - np.eye(n))) < EXACT_TOL:
            return True
    return False


def isometry_defect(action: GroupAction) -> float:
    """Unitarity defect max |A* A - I| of the linear parts; the flat
    metric is invariant iff this vanishes."""
    n = action.lattice.dim
    worst = 0.0
    for el in action.elements:
        worst = max(worst, float(np.max(np.abs(np.conj(el.A.T) @ el.A - np.eye(n)))))
    return worst


def isometry_check(entry: CatalogEntry) -> float:
    if entry.action is None:
        return 0.0
    return isometry_defect(entry.action)


# --- catalog construction --------------------------------------------


def flat_potential(n: int) -> PotentialExpr:
    """sum_a z_a zbar_a, the flat chart potential."""
    terms = tuple(Product((Var(a), ConjVar(a))) for a in range(n))
    root = terms[0] if n == 1 else Sum(terms, (1,) * n)
    return PotentialExpr(root, n)


def product_lattice(moduli: Sequence[complex]) -> Lattice:
    """Product of elliptic-curve lattices Z + Z*tau_a in each factor."""
    n = len(moduli)
    gens = []
    for a, tau in enumerate(moduli):
        e = np.zeros(n, dtype=np.complex128)
        e[a] = 1.0
        gens.append(e)
        gens.append(e * tau)
    return Lattice(np.stack(gens))


def square_lattice(n: int) -> Lattice:
    return product_lattice([1j] * n)


def flat_torus_entry(n: int, name: Optional[str] = None) -> CatalogEntry:
    return CatalogEntry(
        name=name or f"torus-{n}",
        dim=n,
        potential=flat_potential(n),
        lattice=square_lattice(n),
        action=None,
        expected_class="torus",
        metadata={"holonomy": "1"},
    )


_RHO = complex(-0.5, np.sqrt(3.0) / 2.0)  # primitive cube root of unity


def _cyclic_action(
    lattice: Lattice, rotation: complex, translation: np.ndarray, order: int, name: str
) -> GroupAction:
    gen = AffineMap(np.diag([1.0 + 0j, rotation]), translation)
    els = [AffineMap(np.eye(2), np.zeros(2))]
    g = gen
    for _ in range(order - 1):
        els.append(g)
        g = g.compose(gen)
    return GroupAction(lattice, tuple(els), name)


def _extended_lattice(moduli: Sequence[complex], extra: np.ndarray) -> Lattice:
    """Product lattice enlarged by an extra generator replacing tau_1 e_1.

    The replaced generator stays in the integer span of the new basis;
    used for the families whose product presentation carries a pure
    translation (absorbed here into the lattice).
    """
    e1 = np.array([1.0 + 0j, 0.0])
    e2 = np.array([0.0, 1.0 + 0j])
    gens = np.stack([e1, np.asarray(extra, dtype=np.complex128), e2, e2 * moduli[1]])
    lat = Lattice(gens)
    if not lat.contains(e1 * moduli[0]):
        raise ValueError("extended lattice does not contain the product lattice")
    return lat


def hyperelliptic_catalog() -> list[CatalogEntry]:
    """The eight flat Kahler surface entries: the torus and the seven
    quotient families of E x F.

    Per-family data (E-translation epsilon = 1 / (order of the rotation
    generator); F-actions are the classical ones).  Families whose
    product presentation includes a pure-translation generator are
    stored in the reduced form: the translation is absorbed into the
    lattice and the remaining cyclic rotation generator acts on the
    enlarged torus.  ``metadata['holonomy']`` keeps the family group
    label, ``metadata['reduced_order']`` the stored cyclic order.
    """
    phi2 = flat_potential(2)
    tau_i, tau_rho = 1j, _RHO
    entries = [
        CatalogEntry(
            name="torus",
            dim=2,
            potential=phi2,
            lattice=square_lattice(2),
            action=None,
            expected_class="torus",
            metadata={"holonomy": "1", "b1": 4, "b2": 6, "pg": 1},
        )
    ]

    def family(name, lattice, rotation, order, holonomy, reduced_note=None):
        translation = np.array([1.0 / order, 0.0], dtype=np.complex128)
        action = _cyclic_action(lattice, rotation, translation, order, name)
        meta = {"holonomy": holonomy, "b1": 2, "b2": 2, "pg": 0,
                "reduced_order": order}
        if reduced_note is not None:
            meta["absorbed_translation"] = reduced_note
        entries.append(
            CatalogEntry(
                name=name,
                dim=2,
                potential=phi2,
                lattice=lattice,
                action=action,
                expected_class="hyperelliptic",
                metadata=meta,
            )
        )

    # (1) Z2: F-symmetry x -> -x
    family("hyperelliptic-Z2", product_lattice([tau_i, tau_i]), -1.0, 2, "Z2")
    # (2) Z2+Z2: second generator (x -> x + half-period on both factors)
    # is a pure translation; absorbed into the lattice.
    v2 = np.array([0.5j, 0.5])
    family(
        "hyperelliptic-Z2xZ2",
        _extended_lattice([tau_i, tau_i], v2),
        -1.0,
        2,
        "Z2+Z2",
        reduced_note=[[v2[0].real, v2[0].imag], [v2[1].real, v2[1].imag]],
    )
    # (3) Z4 on F = C/(Z + Zi) by x -> i x
    family("hyperelliptic-Z4", product_lattice([tau_i, tau_i]), 1j, 4, "Z4")
    # (4) Z4+Z2: translation (i/2, (1+i)/2) absorbed.
    v4 = np.array([0.5j, 0.5 + 0.5j])
    family(
        "hyperelliptic-Z4xZ2",
        _extended_lattice([tau_i, tau_i], v4),
        1j,
        4,
        "Z4+Z2",
        reduced_note=[[v4[0].real, v4[0].imag], [v4[1].real, v4[1].imag]],
    )
    # (5) Z3 on F = C/(Z + Z rho) by x -> rho x
    family("hyperelliptic-Z3", product_lattice([tau_rho, tau_rho]), _RHO, 3, "Z3")
    # (6) Z3+Z3: translation (rho/3, (1-rho)/3) absorbed.
    v3 = np.array([_RHO / 3.0, (1.0 - _RHO) / 3.0])
    family(
        "hyperelliptic-Z3xZ3",
        _extended_lattice([tau_rho, tau_rho], v3),
        _RHO,
        3,
        "Z3+Z3",
        reduced_note=[[v3[0].real, v3[0].imag], [v3[1].real, v3[1].imag]],
    )
    # (7) Z6 by x -> -rho x
    family("hyperelliptic-Z6", product_lattice([tau_rho, tau_rho]), -_RHO, 6, "Z6")

    return entries


# --- negative controls and metadata rows ------------------------------


@dataclass(frozen=True)
class HopfVerdict:
    valid: bool
    affine: bool
    frobenius: bool  # always False: no Kahler metric exists
    kahler: bool  # always False


def hopf_affine_condition(a: complex, b: complex, c: complex, m: int) -> HopfVerdict:
    """Classify contraction data (x, y) -> (a x + c y^m, b y).

    Valid Hopf data requires 0 < |a| <= |b| < 1 and (a - b^m) c = 0.
    A holomorphic affine structure exists iff c = 0 or m = 1; the
    Frobenius and Kahler flags are always False for this class.
    """
    if m < 1:
        raise ValueError("m must be a positive integer")
    valid = (0.0 < abs(a) <= abs(b) < 1.0) and abs((a - b**m) * c) < EXACT_TOL
    affine = (abs(c) < EXACT_TOL) or (m == 1)
    return HopfVerdict(valid=valid, affine=affine, frobenius=False, kahler=False)


def negative_controls() -> list[CatalogEntry]:
    """Surface-classification rows that are not Frobenius; metadata only."""

    def row(name, flags, extra=None):
        meta = {"flags": flags}
        if extra:
            meta.update(extra)
        return CatalogEntry(
            name=name,
            dim=2,
            potential=None,
            lattice=None,
            action=None,
            expected_class="negative-control",
            metadata=meta,
        )

    return [
        row(
            "minimal-elliptic-VIII0",
            {"frobenius": False, "affine": True, "kahler": False},
            {"b1": "odd", "pg": ">0"},
        ),
        row(
            "inoue-VII0",
            {"frobenius": False, "affine": True, "kahler": False},
            {"b1": 1, "b2": 0, "pg": 0},
        ),
        row(
            "hopf-VII0",
            {"frobenius": False, "affine": True, "kahler": False},
            {"b1": 1, "b2": 0, "pg": 0, "affine_condition": "c*(m-1) == 0"},
        ),
        row(
            "ruled",
            {"frobenius": False, "affine": False, "kahler": True},
            {"b2": 2},
        ),
        row(
            "k3",
            {"frobenius": False, "affine": False, "kahler": True},
            {"b1": 0, "b2": 22, "pg": 1},
        ),
    ]


def metadata_rows() -> list[CatalogEntry]:
    """Higher-dimensional classification rows carried as metadata only
    (no constructive chart data)."""

    def row(name, meta):
        return CatalogEntry(
            name=name,
            dim=3,
            potential=None,
            lattice=None,
            action=None,
            expected_class="metadata",
            metadata=meta,
        )

    return [
        row("hantzsche-wendt", {"holonomy": "(Z2)^(n-1)", "b1": 0, "spin": True}),
        row("calabi-yau-3d-flat", {"holonomy": "nontrivial"}),
        row("calabi-yau-odd-dim", {"betti": "b1..b_{2n-1} = 0, b_n = 2^n"}),
    ]


def classification_counts() -> tuple[int, int]:
    """(surfaces, threefolds) = (8, 174).

    The surface count is re-derived as the catalog length; the
    threefold count is recorded as asserted metadata (enumerating the
    three-dimensional families is out of scope).
    """
    return len(hyperelliptic_catalog()), 174
