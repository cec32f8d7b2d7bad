"""Spec-file ingestion, verification pipelines and report emission.

Reports are deterministic: sample points come from a seeded
low-discrepancy sequence, aggregation is ordered, and JSON is emitted
with sorted keys, so identical spec + seed + version gives
byte-identical output.

Exit codes: 0 all expected, 1 verdict mismatch, 2 input error,
3 internal numeric error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import __version__, catalog as cat, frobenius as frob, kahler, theta as th
from .expr import ExprError, ParseError, PotentialExpr, parse, to_source

DEFAULT_SEED = 20240613
DEFAULT_SAMPLES = 64
DEFAULT_LAMBDA_GRID = (-1.0, -0.5, 0.5, 1.0, 2.0)
DEFAULT_RADIUS = 30
DEFAULT_TOLERANCES = {
    "structural": 1e-9,
    "fd": 1e-4,
    "theta": 1e-8,
    "theta_mult": 1e-7,
    "isometry": 1e-12,
}
DISCLAIMER = (
    "verification is chart-local at sampled points; compactness and "
    "global structure are not checked from a single chart"
)

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3


class SpecError(Exception):
    pass


@dataclass(frozen=True)
class ManifoldSpec:
    name: str
    dim: int
    potential: str
    sample_domain: dict  # {"re": [[lo, hi], ...], "im": [[lo, hi], ...]}
    lattice: Optional[list] = None  # [[ [re, im], ... ], ...]
    group: Optional[list] = None  # [{"A": [[[re,im],...],...], "t": [[re,im],...]}]
    expected_class: Optional[str] = None


@dataclass(frozen=True)
class Config:
    seed: int = DEFAULT_SEED
    samples: int = DEFAULT_SAMPLES
    lambda_grid: tuple[float, ...] = DEFAULT_LAMBDA_GRID
    radius: int = DEFAULT_RADIUS
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))


@dataclass
class Report:
    """Verification outcome for one chart spec.

    Verdict semantics: "frobenius" iff every residual is below its
    tolerance and all group verdicts pass; "pre-frobenius" iff all pass
    except associativity / pencil flatness; "not-frobenius" otherwise;
    "error" when a sample hit a numeric failure (degenerate metric,
    domain error).
    """

    spec: str
    version: str
    seed: int
    tolerances: dict
    disclaimer: str
    samples: list
    group: Optional[dict]
    verdict: str
    reasons: list

    def to_dict(self) -> dict:
        return {
            "spec": self.spec,
            "version": self.version,
            "seed": self.seed,
            "tolerances": self.tolerances,
            "disclaimer": self.disclaimer,
            "samples": self.samples,
            "group": self.group,
            "verdict": self.verdict,
            "reasons": self.reasons,
        }


def to_json(payload) -> str:
    if isinstance(payload, Report):
        payload = payload.to_dict()
    elif isinstance(payload, list):
        payload = [p.to_dict() if isinstance(p, Report) else p for p in payload]
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


# --- spec files -------------------------------------------------------


def _complex_from_pair(pair) -> complex:
    if not isinstance(pair, (list, tuple)) or len(pair) != 2:
        raise SpecError(f"expected [re, im] pair, got {pair!r}")
    return complex(float(pair[0]), float(pair[1]))


def load_manifold_spec(payload: dict) -> ManifoldSpec:
    try:
        name = str(payload["name"])
        dim = int(payload["dim"])
        potential = str(payload["potential"])
        domain = payload["sample_domain"]
    except KeyError as exc:
        raise SpecError(f"missing spec key: {exc}") from exc
    if dim < 1:
        raise SpecError("dim must be >= 1")
    for part in ("re", "im"):
        ranges = domain.get(part)
        if not isinstance(ranges, list) or len(ranges) != dim:
            raise SpecError(f"sample_domain.{part} must list {dim} ranges")
        for lo_hi in ranges:
            lo, hi = float(lo_hi[0]), float(lo_hi[1])
            if not hi > lo:
                raise SpecError("sample_domain ranges must be non-degenerate")
    try:
        parse(potential, dim)
    except ParseError as exc:
        raise SpecError(f"potential does not parse: {exc}") from exc
    lattice = payload.get("lattice")
    group = payload.get("group")
    if group is not None and lattice is None:
        raise SpecError("a group requires a lattice")
    return ManifoldSpec(
        name=name,
        dim=dim,
        potential=potential,
        sample_domain={"re": domain["re"], "im": domain["im"]},
        lattice=lattice.get("generators") if isinstance(lattice, dict) else lattice,
        group=group.get("elements") if isinstance(group, dict) else group,
        expected_class=payload.get("expected_class"),
    )


def _lattice_from_spec(generators: list, dim: int) -> cat.Lattice:
    gens = []
    for row in generators:
        if len(row) != dim:
            raise SpecError("lattice generator has wrong length")
        gens.append([_complex_from_pair(p) for p in row])
    arr = np.array(gens, dtype=np.complex128)
    if arr.shape != (2 * dim, dim):
        raise SpecError(f"lattice needs {2 * dim} generators")
    try:
        return cat.Lattice(arr)
    except ValueError as exc:
        raise SpecError(str(exc)) from exc


def _group_from_spec(
    elements: list, lattice: cat.Lattice, name: str
) -> cat.GroupAction:
    dim = lattice.dim
    maps = []
    for el in elements:
        a_rows = el.get("A")
        t_row = el.get("t")
        if a_rows is None or t_row is None:
            raise SpecError("group element needs A and t")
        a = np.array(
            [[_complex_from_pair(p) for p in row] for row in a_rows],
            dtype=np.complex128,
        )
        t = np.array([_complex_from_pair(p) for p in t_row], dtype=np.complex128)
        if a.shape != (dim, dim) or t.shape != (dim,):
            raise SpecError("group element has wrong shape")
        try:
            maps.append(cat.AffineMap(a, t))
        except ValueError as exc:
            raise SpecError(str(exc)) from exc
    return cat.GroupAction(lattice, tuple(maps), name)


# --- sampling ---------------------------------------------------------

_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53)


def _derive_seed(seed: int, label: str) -> int:
    digest = hashlib.sha256(f"{seed}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def sample_points(
    spec_domain: dict, dim: int, count: int, seed: int, label: str
) -> list[np.ndarray]:
    """Seeded Kronecker (additive-recurrence) low-discrepancy points
    inside the domain box."""
    rng = np.random.default_rng(_derive_seed(seed, label))
    offsets = rng.random(2 * dim)
    alphas = np.sqrt(np.array(_PRIMES[: 2 * dim], dtype=np.float64))
    alphas -= np.floor(alphas)
    re_ranges = [(float(lo), float(hi)) for lo, hi in spec_domain["re"]]
    im_ranges = [(float(lo), float(hi)) for lo, hi in spec_domain["im"]]
    points = []
    for k in range(1, count + 1):
        u = np.mod(offsets + k * alphas, 1.0)
        z = np.empty(dim, dtype=np.complex128)
        for a in range(dim):
            lo_r, hi_r = re_ranges[a]
            lo_i, hi_i = im_ranges[a]
            z[a] = complex(
                lo_r + u[a] * (hi_r - lo_r), lo_i + u[dim + a] * (hi_i - lo_i)
            )
        points.append(z)
    return points


# --- manifold verification --------------------------------------------


def _sample_record(
    potential: PotentialExpr, point: np.ndarray, lambda_grid: Sequence[float]
) -> dict:
    md = kahler.metric_at(potential, point)
    sym_g, sym_p = kahler.kahler_residuals(md, md.jet)
    ricci_herm, ricci_max = kahler.ricci_c1_check(md)
    hol, _anti = frob.fiber_algebra_from_metric(md)
    pencil = [frob.pencil_curvature(md, lam) for lam in lambda_grid]
    unit = frob.find_unit(hol)
    return {
        "point": [[float(z.real), float(z.imag)] for z in point],
        "kahler_symmetry": sym_g,
        "rank3_symmetry": sym_p,
        "metric_hermiticity": float(np.max(np.abs(md.g - np.conj(md.g.T)))),
        "min_singular": md.min_singular,
        "condition_number": md.cond,
        "positive_definite": md.positive_definite,
        "max_curvature": float(np.max(np.abs(md.curvature))),
        "wdvv": kahler.wdvv_residual_at(md),
        "ricci_hermiticity": ricci_herm,
        "max_ricci": ricci_max,
        "commutator": frob.commutator(hol),
        "associator": frob.associator(hol),
        "compat": frob.frobenius_compat(hol),
        "unit_exists": unit is not None,
        "pencil": [
            {
                "lambda": ps.lam,
                "curvature_norm": ps.curvature_norm,
                "trace_norm": ps.trace_norm,
            }
            for ps in pencil
        ],
    }


def _group_record(action: cat.GroupAction, tol: float) -> dict:
    report = cat.validate_group(action)
    free, witness = cat.is_free(action)
    translations = cat.contains_translations(action)
    defect = cat.isometry_defect(action)
    return {
        "closure": report.closure,
        "lattice_stable": report.lattice_stable,
        "finite": report.finite,
        "faithful": report.faithful,
        "free": free,
        "fixed_point_witness": None
        if witness is None
        else [[float(w.real), float(w.imag)] for w in witness],
        "contains_translations": translations,
        "isometry_defect": defect,
        "isometry_ok": defect <= tol,
    }


def _aggregate(samples: list, key: str) -> float:
    vals = [s[key] for s in samples if key in s]
    return max(vals) if vals else 0.0


def run_verify(spec: ManifoldSpec, config: Config) -> Report:
    """Full verification pipeline for one chart spec."""
    tol = config.tolerances
    reasons: list[str] = []
    samples: list = []
    group_rec: Optional[dict] = None
    verdict = "error"

    try:
        potential = parse(spec.potential, spec.dim)
    except ParseError as exc:
        return Report(
            spec=spec.name,
            version=__version__,
            seed=config.seed,
            tolerances=tol,
            disclaimer=DISCLAIMER,
            samples=[],
            group=None,
            verdict="error",
            reasons=[f"parse error: {exc}"],
        )

    points = sample_points(
        spec.sample_domain, spec.dim, config.samples, config.seed, spec.name
    )
    numeric_failure = False
    for idx, pt in enumerate(points):
        try:
            rec = _sample_record(potential, pt, config.lambda_grid)
            rec["index"] = idx
            samples.append(rec)
        except (kahler.KahlerError, ExprError) as exc:
            numeric_failure = True
            samples.append(
                {
                    "index": idx,
                    "point": [[float(z.real), float(z.imag)] for z in pt],
                    "error": str(exc),
                }
            )

    group_ok = True
    if spec.group is not None:
        lattice = _lattice_from_spec(spec.lattice, spec.dim)
        action = _group_from_spec(spec.group, lattice, spec.name)
        group_rec = _group_record(action, tol["isometry"])
        failures = []
        for label in ("closure", "lattice_stable", "finite", "faithful"):
            if not group_rec[label]:
                failures.append(f"group check failed: {label}")
        if not group_rec["free"]:
            failures.append("action not free")
        if group_rec["contains_translations"]:
            failures.append("action contains translations")
        if not group_rec["isometry_ok"]:
            failures.append("group check failed: isometry")
        if failures:
            group_ok = False
            reasons.extend(failures)
    elif spec.lattice is not None:
        _lattice_from_spec(spec.lattice, spec.dim)  # validated even if unused

    if numeric_failure:
        reasons.append("degenerate metric or domain error at sampled points")
        verdict = "error"
    else:
        s_tol = tol["structural"]
        core = (
            _aggregate(samples, "kahler_symmetry") < s_tol
            and _aggregate(samples, "rank3_symmetry") < s_tol
            and _aggregate(samples, "metric_hermiticity") < s_tol
            and _aggregate(samples, "ricci_hermiticity") < s_tol
            and _aggregate(samples, "commutator") < s_tol
            and _aggregate(samples, "compat") < s_tol
        )
        flatness = (
            _aggregate(samples, "max_curvature") < s_tol
            and _aggregate(samples, "wdvv") < s_tol
            and max(
                (p["trace_norm"] for s in samples for p in s["pencil"]), default=0.0
            )
            < s_tol
        )
        associativity = (
            _aggregate(samples, "associator") < s_tol
            and max(
                (p["curvature_norm"] for s in samples for p in s["pencil"]),
                default=0.0,
            )
            < s_tol
        )
        if not core:
            verdict = "not-frobenius"
            reasons.append("structural identities violated")
        elif flatness and associativity and group_ok:
            verdict = "frobenius"
        elif flatness and not associativity and group_ok:
            verdict = "pre-frobenius"
            reasons.append("associativity / pencil flatness failed")
        else:
            verdict = "not-frobenius"
            if not flatness:
                reasons.append("curvature or associativity constraint violated")

    return Report(
        spec=spec.name,
        version=__version__,
        seed=config.seed,
        tolerances=tol,
        disclaimer=DISCLAIMER,
        samples=samples,
        group=group_rec,
        verdict=verdict,
        reasons=sorted(set(reasons)),
    )


# --- catalog pipeline --------------------------------------------------


def entry_to_spec(entry: cat.CatalogEntry) -> ManifoldSpec:
    """Serialize a catalog entry into the spec-file shape (entries stay
    addressable by name through the catalog filter)."""
    n = entry.dim
    box = {
        "re": [[-0.45, 0.45]] * n,
        "im": [[-0.45, 0.45]] * n,
    }
    lattice = None
    group = None
    if entry.lattice is not None:
        lattice = [
            [[float(v.real), float(v.imag)] for v in gen]
            for gen in entry.lattice.generators
        ]
    if entry.action is not None:
        group = [
            {
                "A": [[[float(v.real), float(v.imag)] for v in row] for row in el.A],
                "t": [[float(v.real), float(v.imag)] for v in el.t],
            }
            for el in entry.action.elements
        ]
    return ManifoldSpec(
        name=entry.name,
        dim=n,
        potential=to_source(entry.potential),
        sample_domain=box,
        lattice=lattice,
        group=group,
        expected_class=entry.expected_class,
    )


def run_catalog(name_filter: Optional[str], config: Config) -> list:
    """Verify all (or filtered) catalog entries; negative-control and
    metadata rows are reported flag-only."""
    reports: list = []
    for entry in cat.hyperelliptic_catalog():
        if name_filter and name_filter not in entry.name:
            continue
        report = run_verify(entry_to_spec(entry), config)
        expected = "frobenius"
        payload = report.to_dict()
        payload["expected_class"] = entry.expected_class
        payload["expected_verdict"] = expected
        payload["matches_expected"] = report.verdict == expected
        payload["metadata"] = entry.metadata
        reports.append(payload)
    for entry in cat.negative_controls() + cat.metadata_rows():
        if name_filter and name_filter not in entry.name:
            continue
        reports.append(
            {
                "spec": entry.name,
                "version": __version__,
                "seed": config.seed,
                "kind": entry.expected_class,
                "flags": entry.metadata.get("flags"),
                "metadata": {
                    k: v for k, v in entry.metadata.items() if k != "flags"
                },
                "verdict": "negative-control"
                if entry.expected_class == "negative-control"
                else "metadata",
                "matches_expected": True,
            }
        )
    return reports


def catalog_exit_code(reports: list) -> int:
    return EXIT_OK if all(r.get("matches_expected", False) for r in reports) else EXIT_MISMATCH


# --- theta pipeline -----------------------------------------------------


def run_theta(
    tau: np.ndarray,
    level: int,
    config: Config,
    z_samples: int = 20,
) -> dict:
    """Quasi-periodicity, multiplicativity and dimension checks."""
    tau = np.asarray(tau, dtype=np.complex128)
    g = tau.shape[0]
    spec = th.RiemannThetaSpec(
        tau=tau, alpha=np.zeros(g), beta=np.zeros(g), level=level
    )
    rng = np.random.default_rng(_derive_seed(config.seed, f"theta-{g}-{level}"))
    zs = rng.random((z_samples, g)) + 0.2j * rng.random((z_samples, g))

    qp_rows = []
    worst_qp = 0.0
    for gen_index in range(2 * g):
        for row in range(z_samples):
            res = th.quasi_periodicity_residual(
                spec, zs[row], gen_index, config.radius
            )
            worst_qp = max(worst_qp, res)
            qp_rows.append(
                {
                    "generator": gen_index,
                    "z": [[float(v.real), float(v.imag)] for v in zs[row]],
                    "residual": res,
                }
            )

    # multiplicativity: product of two characteristics obeys the summed type
    spec2 = th.RiemannThetaSpec(
        tau=tau, alpha=np.full(g, 0.5), beta=np.zeros(g), level=level
    )
    t1, t2 = th.riemann_type_of(spec), th.riemann_type_of(spec2)
    tsum = th.multiply_types(t1, t2)
    worst_mult = 0.0
    for gen_index in range(2 * g):
        for row in range(min(z_samples, 8)):
            z = zs[row]
            shift = t1.lattice.generators[gen_index]
            h1 = th.eval_riemann_theta(spec, z, config.radius).value
            h2 = th.eval_riemann_theta(spec2, z, config.radius).value
            h1s = th.eval_riemann_theta(spec, z + shift, config.radius).value
            h2s = th.eval_riemann_theta(spec2, z + shift, config.radius).value
            lhs = h1s * h2s
            rhs = tsum.factor(z, gen_index) * h1 * h2
            worst_mult = max(
                worst_mult, abs(lhs - rhs) / max(abs(h1 * h2), th.RESIDUAL_FLOOR)
            )

    dim_result = th.level_space_dimension(
        g, level, tau, samples=max(4 * level**g, 16), radius=config.radius,
        seed=_derive_seed(config.seed, f"theta-rank-{g}-{level}"),
    )
    expected_dim = level**g
    ok = (
        worst_qp < config.tolerances["theta"]
        and worst_mult < config.tolerances["theta_mult"]
        and dim_result == expected_dim
    )
    return {
        "spec": f"theta(g={g}, level={level})",
        "version": __version__,
        "seed": config.seed,
        "tolerances": config.tolerances,
        "radius": config.radius,
        "samples": qp_rows,
        "multiplicativity": worst_mult,
        "level_dimension": dim_result,
        "expected_dimension": expected_dim,
        "verdict": "pass" if ok else "fail",
        "reasons": [] if ok else ["theta residuals exceed tolerance"],
    }


# --- command line -------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frobenius-verify",
        description="Verify flat-Kahler / Frobenius structure from chart data.",
    )
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    parser.add_argument(
        "--lambda-grid",
        default=",".join(str(v) for v in DEFAULT_LAMBDA_GRID),
        help="comma-separated pencil parameters",
    )
    parser.add_argument("--radius", type=int, default=DEFAULT_RADIUS)
    parser.add_argument(
        "--tolerance",
        action="append",
        default=[],
        metavar="NAME=VALUE",
        help="override a named tolerance (repeatable)",
    )
    out = parser.add_mutually_exclusive_group()
    out.add_argument("--json", action="store_true", dest="as_json")
    out.add_argument("--text", action="store_true", dest="as_text")
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="verify a manifold spec file")
    p_verify.add_argument("specfile")

    p_catalog = sub.add_parser("catalog", help="verify catalog entries")
    p_catalog.add_argument("--catalog", dest="name_filter", default=None)

    p_theta = sub.add_parser("theta", help="run theta-function checks")
    p_theta.add_argument("--genus", type=int, default=1)
    p_theta.add_argument(
        "--tau",
        default="i",
        help="'i' (g=1), 'diag:a,b' with imaginary parts, or JSON matrix",
    )
    p_theta.add_argument("--level", type=int, default=2)
    return parser


def _resolve_seed(arg_seed: Optional[int]) -> int:
    if arg_seed is not None:
        return arg_seed
    env = os.environ.get("FROBENIUS_VERIFY_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise SpecError(f"bad FROBENIUS_VERIFY_SEED: {env!r}") from exc
    return DEFAULT_SEED


def _config_from_args(args) -> Config:
    tolerances = dict(DEFAULT_TOLERANCES)
    for item in args.tolerance:
        if "=" not in item:
            raise SpecError(f"bad --tolerance {item!r}; expected NAME=VALUE")
        name, value = item.split("=", 1)
        if name not in tolerances:
            raise SpecError(f"unknown tolerance {name!r}")
        tolerances[name] = float(value)
    try:
        grid = tuple(float(v) for v in args.lambda_grid.split(",") if v.strip())
    except ValueError as exc:
        raise SpecError(f"bad --lambda-grid {args.lambda_grid!r}") from exc
    return Config(
        seed=_resolve_seed(args.seed),
        samples=args.samples,
        lambda_grid=grid,
        radius=args.radius,
        tolerances=tolerances,
    )


def _parse_tau(raw: str, genus: int) -> np.ndarray:
    raw = raw.strip()
    if raw == "i":
        return 1j * np.eye(genus)
    if raw.startswith("diag:"):
        parts = [float(v) for v in raw[len("diag:") :].split(",")]
        return 1j * np.diag(parts)
    data = json.loads(raw)
    return np.array(
        [[complex(entry[0], entry[1]) for entry in row] for row in data]
    )


def _print_report(payload, as_json: bool) -> None:
    if as_json:
        sys.stdout.write(to_json(payload))
        return
    items = payload if isinstance(payload, list) else [payload]
    for item in items:
        d = item.to_dict() if isinstance(item, Report) else item
        name = d.get("spec", "?")
        verdict = d.get("verdict", "?")
        line = f"{name}: {verdict}"
        if d.get("reasons"):
            line += f" ({'; '.join(d['reasons'])})"
        sys.stdout.write(line + "\n")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = _config_from_args(args)
    except SpecError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT

    try:
        if args.command == "verify":
            try:
                with open(args.specfile, "r", encoding="utf-8") as fh:
                    payload = json.load(fh)
                spec = load_manifold_spec(payload)
            except (OSError, json.JSONDecodeError, SpecError) as exc:
                sys.stderr.write(f"error: {exc}\n")
                return EXIT_INPUT
            report = run_verify(spec, config)
            _print_report(report, args.as_json)
            if report.verdict == "error":
                return EXIT_NUMERIC
            if spec.expected_class is None:
                return EXIT_OK
            expected = {
                "torus": "frobenius",
                "hyperelliptic": "frobenius",
                "negative-control": "not-frobenius",
            }.get(spec.expected_class, spec.expected_class)
            return EXIT_OK if report.verdict == expected else EXIT_MISMATCH

        if args.command == "catalog":
            reports = run_catalog(args.name_filter, config)
            _print_report(reports, args.as_json)
            return catalog_exit_code(reports)

        if args.command == "theta":
            try:
                tau = _parse_tau(args.tau, args.genus)
                report = run_theta(tau, args.level, config)
            except (th.ThetaError, ValueError, json.JSONDecodeError) as exc:
                sys.stderr.write(f"error: {exc}\n")
                return EXIT_INPUT
            _print_report(report, args.as_json)
            return EXIT_OK if report["verdict"] == "pass" else EXIT_MISMATCH
    except Exception as exc:  # pragma: no cover - defensive
        sys.stderr.write(f"internal error: {exc}\n")
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
