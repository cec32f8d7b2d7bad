"""Independent oracles shared by the test suite.

Everything here is deliberately written against the public surface
only: a dispatch-table interpreter for potential ASTs, nested
central-difference Wirtinger derivatives with Richardson extrapolation,
a random AST generator, and brute-force triple loops for the algebra
axioms.  These stay independent of the code paths they check.
"""

from __future__ import annotations

import cmath

import numpy as np

from frobenius_verify.expr import (
    Const,
    ConjVar,
    Exp,
    Im,
    Log,
    PotentialExpr,
    Power,
    Product,
    Re,
    Sum,
    Var,
)

# --- reference interpreter (dispatch table) ---------------------------

_DISPATCH = {
    Const: lambda node, z, ev: complex(node.value),
    Var: lambda node, z, ev: complex(z[node.axis]),
    ConjVar: lambda node, z, ev: complex(z[node.axis]).conjugate(),
    Sum: lambda node, z, ev: sum(
        s * ev(t, z) for s, t in zip(node.signs, node.terms)
    ),
    Product: lambda node, z, ev: np.prod([ev(f, z) for f in node.factors]),
    Power: lambda node, z, ev: ev(node.base, z) ** node.exponent,
    Exp: lambda node, z, ev: cmath.exp(ev(node.arg, z)),
    Log: lambda node, z, ev: cmath.log(ev(node.arg, z)),
    Re: lambda node, z, ev: complex(ev(node.arg, z).real),
    Im: lambda node, z, ev: complex(ev(node.arg, z).imag),
}


def reference_eval(expr: PotentialExpr, point) -> complex:
    def ev(node, z):
        return _DISPATCH[type(node)](node, z, ev)

    return complex(ev(expr.root, list(point)))


# --- finite differences ------------------------------------------------


def wirtinger_fd(f, point, alpha, beta, h):
    """Nested central differences for d^alpha dbar^beta f at point."""
    ops = []
    for axis, count in enumerate(alpha):
        ops.extend([(axis, False)] * count)
    for axis, count in enumerate(beta):
        ops.extend([(axis, True)] * count)

    def rec(pt, remaining):
        if not remaining:
            return f(pt)
        (axis, bar), rest = remaining[0], remaining[1:]
        ex = np.zeros(len(pt), dtype=np.complex128)
        ex[axis] = h
        ey = np.zeros(len(pt), dtype=np.complex128)
        ey[axis] = 1j * h
        dx = (rec(pt + ex, rest) - rec(pt - ex, rest)) / (2 * h)
        dy = (rec(pt + ey, rest) - rec(pt - ey, rest)) / (2 * h)
        return 0.5 * (dx + 1j * dy) if bar else 0.5 * (dx - 1j * dy)

    return rec(np.asarray(point, dtype=np.complex128), tuple(ops))


def richardson(sample, h, levels=2):
    """Extrapolate an O(h^2) central-difference value through `levels`
    halvings; kills the h^2..h^(2*levels) error terms."""
    table = [sample(h / 2**k) for k in range(levels + 1)]
    for lev in range(1, levels + 1):
        factor = 4.0**lev
        table = [
            (factor * table[i + 1] - table[i]) / (factor - 1.0)
            for i in range(len(table) - 1)
        ]
    return table[0]


def fd_partial(f, point, alpha, beta, h=0.05, levels=2):
    return richardson(lambda hh: wirtinger_fd(f, point, alpha, beta, hh), h, levels)


# --- random ASTs --------------------------------------------------------


def random_node(rng, dim, depth):
    if depth <= 0:
        kind = rng.integers(0, 4)
        if kind == 0:
            return Const(float(rng.integers(-4, 5)))
        if kind == 1:
            return Const(float(np.round(rng.uniform(-3, 3), 4)))
        if kind == 2:
            return Var(int(rng.integers(0, dim)))
        return ConjVar(int(rng.integers(0, dim)))
    kind = rng.integers(0, 7)
    if kind == 0:
        count = int(rng.integers(2, 4))
        terms = tuple(random_node(rng, dim, depth - 1) for _ in range(count))
        signs = (1,) + tuple(int(rng.choice([1, -1])) for _ in range(count - 1))
        return Sum(terms, signs)
    if kind == 1:
        count = int(rng.integers(2, 4))
        return Product(tuple(random_node(rng, dim, depth - 1) for _ in range(count)))
    if kind == 2:
        return Power(random_node(rng, dim, depth - 1), int(rng.integers(0, 5)))
    if kind == 3:
        return Exp(random_node(rng, dim, depth - 1))
    if kind == 4:
        return Log(random_node(rng, dim, depth - 1))
    if kind == 5:
        return Re(random_node(rng, dim, depth - 1))
    return Im(random_node(rng, dim, depth - 1))


def random_potential_expr(rng, dim, depth):
    return PotentialExpr(random_node(rng, dim, depth), dim)


# --- brute-force algebra oracles ----------------------------------------


def brute_multiply(C, x, y):
    n = len(x)
    out = np.zeros(n, dtype=np.complex128)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                out[k] += C[k][i][j] * x[i] * y[j]
    return out


def brute_associator(C):
    n = C.shape[0]
    worst = 0.0
    basis = np.eye(n, dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                left = brute_multiply(C, brute_multiply(C, basis[i], basis[j]), basis[k])
                right = brute_multiply(C, basis[i], brute_multiply(C, basis[j], basis[k]))
                worst = max(worst, float(np.max(np.abs(left - right))))
    return worst


def brute_compat(C, form):
    n = C.shape[0]
    worst = 0.0
    basis = np.eye(n, dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                left = brute_multiply(C, basis[i], basis[j]) @ form @ basis[k]
                right = basis[i] @ form @ brute_multiply(C, basis[j], basis[k])
                worst = max(worst, abs(left - right))
    return worst


# --- finite-difference curvature pipeline ---------------------------------


def _metric_fn(potential):
    from frobenius_verify.wirtinger import jet_eval, partial as jet_partial

    n = potential.dim

    def metric(z):
        jet = jet_eval(potential, np.asarray(z, dtype=np.complex128))
        g = np.empty((n, n), dtype=np.complex128)
        for a in range(n):
            for b in range(n):
                alpha = [0] * n
                alpha[a] = 1
                beta = [0] * n
                beta[b] = 1
                g[a, b] = jet_partial(jet, alpha, beta)
        return g

    return metric


def _unit_index(n, axis):
    v = [0] * n
    v[axis] = 1
    return tuple(v)


def fd_curvature(potential, point, h=0.02, levels=2):
    """Curvature tensor assembled from finite differences of the metric
    (never from higher jet coefficients); explicit-loop contraction."""
    n = potential.dim
    metric = _metric_fn(potential)
    zero = (0,) * n
    point = np.asarray(point, dtype=np.complex128)
    g = metric(point)
    h_inv = np.linalg.inv(g)
    dg = [fd_partial(metric, point, _unit_index(n, c), zero, h, levels) for c in range(n)]
    dbarg = [fd_partial(metric, point, zero, _unit_index(n, d), h, levels) for d in range(n)]
    curv = np.empty((n, n, n, n), dtype=np.complex128)
    for c in range(n):
        for d in range(n):
            ddbar = fd_partial(
                metric, point, _unit_index(n, c), _unit_index(n, d), h, levels
            )
            for a in range(n):
                for b in range(n):
                    grad = 0.0 + 0.0j
                    for gam in range(n):
                        for e in range(n):
                            grad += dg[c][a][gam] * h_inv[gam][e] * dbarg[d][e][b]
                    curv[a, b, c, d] = ddbar[a][b] - grad
    return curv


def fd_wdvv_residual(potential, point, h=0.02, levels=2):
    """Associativity residual assembled from metric differences only."""
    n = potential.dim
    metric = _metric_fn(potential)
    zero = (0,) * n
    point = np.asarray(point, dtype=np.complex128)
    h_inv = np.linalg.inv(metric(point))
    # phi3[a][b][c] = d_a g[b][c]
    dg = [fd_partial(metric, point, _unit_index(n, a), zero, h, levels) for a in range(n)]
    phi3 = np.empty((n, n, n), dtype=np.complex128)
    for a in range(n):
        for b in range(n):
            for c in range(n):
                phi3[a, b, c] = dg[a][b][c]
    phi3_bar = np.conj(phi3)
    worst = 0.0
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    lhs = 0.0 + 0.0j
                    rhs = 0.0 + 0.0j
                    for e in range(n):
                        for f in range(n):
                            lhs += phi3[a][b][e] * h_inv[e][f] * phi3_bar[c][d][f]
                            rhs += phi3_bar[c][e][b] * h_inv[e][f] * phi3[f][a][d]
                    worst = max(worst, abs(lhs - rhs))
    return worst


# --- random real polynomial potentials -----------------------------------


def random_polynomial_potential(rng, dim=2):
    """Flat quadratic plus small real polynomial perturbations; metric
    stays nondegenerate on moderate boxes."""
    from frobenius_verify.expr import PotentialExpr as PE

    terms = [Product((Var(a), ConjVar(a))) for a in range(dim)]
    signs = [1] * dim
    n_extra = int(rng.integers(1, 4))
    for _ in range(n_extra):
        coeff = float(np.round(rng.uniform(0.02, 0.15), 4))
        a = int(rng.integers(0, dim))
        b = int(rng.integers(0, dim))
        shape = rng.integers(0, 3)
        if shape == 0:
            # c * (z_a zbar_a)^2
            body = Power(Product((Var(a), ConjVar(a))), 2)
        elif shape == 1:
            # c * z_a zbar_a z_b zbar_b
            body = Product((Var(a), ConjVar(a), Var(b), ConjVar(b)))
        else:
            # c * re(z_a^2 zbar_b^2)
            body = Re(Product((Power(Var(a), 2), Power(ConjVar(b), 2))))
        terms.append(Product((Const(coeff), body)))
        signs.append(1)
    return PE(Sum(tuple(terms), tuple(signs)), dim)
