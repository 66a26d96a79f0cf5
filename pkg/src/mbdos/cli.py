"""Command-line front end tying the pipeline together.

Subcommands: sectors, tmatrix, expand, spectrum, optimize, kde, compare,
occupancy, beta, oracle, validate, cache-gc.  Exit codes: 0 success, 1 usage,
2 validation failure, 3 cache corruption.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import analysis, genfunc, oracle, ordering, resummation, sectors
from .cache import ENV_CACHE_DIR, CacheCorruptionError, CacheManifest, TableCache
from .energies import bimodal_energies, gaussian_energies
from .spectrum import (
    WeightedSpectrum,
    read_spectrum_csv,
    spectra_match,
    write_spectrum_csv,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_CACHE = 3


class UsageError(Exception):
    pass


class ValidationFailure(Exception):
    pass


@dataclass
class RunConfig:
    """Declarative run parameters; round-trips byte-identically through JSON."""

    L: int | None = None
    N: int | None = None
    r_mode: str = "boson"  # "fermion" | "boson" | "cap:<int>"
    sectors: list[int] | None = None
    drop_top: int | None = None
    energies_file: str | None = None
    gaussian: bool = False
    mu: float = 0.0
    sigma: float = 1.0
    preset: str | None = None
    seed: int = 0
    gamma: float | None = None
    gamma_mult: float | None = None
    cache_dir: str | None = None
    out: str | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls(**json.loads(text))

    def restriction(self) -> int:
        if self.r_mode == "fermion":
            return 1
        if self.r_mode == "boson":
            if self.N is None:
                raise UsageError("boson mode needs N")
            return self.N
        if self.r_mode.startswith("cap:"):
            cap = int(self.r_mode.split(":", 1)[1])
            if cap < 1:
                raise UsageError("cap must be >= 1")
            return cap
        raise UsageError(f"unknown R mode {self.r_mode!r}")

    def resolve_energies(self) -> np.ndarray:
        if self.energies_file:
            return _load_energies(self.energies_file)
        if self.preset == "bimodal":
            if self.L is None or self.N is None:
                raise UsageError("bimodal preset needs --L and --N")
            return bimodal_energies(self.L, self.N, sigma=self.sigma, seed=self.seed)
        if self.gaussian:
            if self.L is None:
                raise UsageError("gaussian energies need --L")
            return gaussian_energies(self.L, self.mu, self.sigma, self.seed)
        raise UsageError("no energy source: use --energies, --gaussian or --preset")


def _load_energies(path: str) -> np.ndarray:
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("energy"):
                continue
            values.append(float(line.split(",")[0]))
    if not values:
        raise UsageError(f"no energies found in {path}")
    return np.asarray(values, dtype=np.float64)


def _sector_set(cfg: RunConfig) -> tuple[int, ...]:
    if cfg.L is None:
        raise UsageError("--L required")
    if cfg.sectors is not None:
        return tuple(sorted(set(cfg.sectors), reverse=True))
    depth = cfg.drop_top if cfg.drop_top is not None else 0
    return analysis.drop_top_sectors(cfg.L, depth)


def _cache(cfg: RunConfig) -> TableCache | None:
    directory = cfg.cache_dir or os.environ.get(ENV_CACHE_DIR)
    return TableCache(Path(directory)) if directory else None


def _write_rows(path: str | None, header: str, rows) -> None:
    out = open(path, "w", encoding="utf-8") if path else sys.stdout
    try:
        out.write(header + "\n")
        for row in rows:
            out.write(",".join(repr(v) if isinstance(v, float) else str(v) for v in row))
            out.write("\n")
    finally:
        if path:
            out.close()


# -- subcommands ----------------------------------------------------------


def cmd_sectors(cfg: RunConfig, args) -> int:
    flow = sectors.sector_partition(args.L)
    print(json.dumps(flow.to_jsonable(), indent=1, sort_keys=True))
    return EXIT_OK


def cmd_tmatrix(cfg: RunConfig, args) -> int:
    from .cyclotomic import transfer_matrix

    tmat = transfer_matrix(args.q)
    for row in tmat.rows:
        print(",".join(str(e) for e in row))
    return EXIT_OK


def cmd_expand(cfg: RunConfig, args) -> int:
    secs = _sector_set(cfg)
    stats = genfunc.ExpandStats()
    if args.threads > 1:
        table = genfunc.expand_parallel(
            cfg.L, cfg.N, cfg.restriction(), secs, workers=args.threads
        )
        if _cache(cfg) is not None:
            _cache(cfg).store(table)
    else:
        table = genfunc.expand(
            cfg.L, cfg.N, cfg.restriction(), secs, stats=stats, cache=_cache(cfg)
        )
    if cfg.out:
        table.write(cfg.out)
    print(
        f"expanded L={cfg.L} N<={cfg.N} R={cfg.restriction()} "
        f"sectors={list(secs)} keys={table.n_keys} "
        f"touches={stats.term_touches} cache_hits={stats.cache_hits}"
    )
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig, args) -> int:
    eps = cfg.resolve_energies()
    if args.table:
        table = genfunc.CoefficientTable.read(args.table)
    else:
        if cfg.L is None or cfg.L != len(eps):
            cfg.L = len(eps)
        table = genfunc.expand(
            cfg.L, cfg.N, cfg.restriction(), _sector_set(cfg), cache=_cache(cfg)
        )
    spec = resummation.truncated_spectrum(table, eps, cfg.N)
    if cfg.out:
        write_spectrum_csv(spec, cfg.out)
    else:
        _write_rows(None, "energy,multiplicity", zip(spec.energies, spec.multiplicities))
    print(
        f"# states={spec.total_multiplicity()} entries={len(spec)} seed={cfg.seed}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_oracle(cfg: RunConfig, args) -> int:
    if args.what == "spectrum":
        eps = cfg.resolve_energies()
        spec = oracle.exact_mbdos(len(eps), cfg.N, cfg.restriction(), eps)
        if cfg.out:
            write_spectrum_csv(spec, cfg.out)
        else:
            _write_rows(None, "energy,multiplicity", zip(spec.energies, spec.multiplicities))
    else:  # udist
        dist = oracle.u_distribution(cfg.L, cfg.N, cfg.restriction(), args.l)
        _write_rows(
            cfg.out,
            "re,im,count",
            ((float(v.real), float(v.imag), c) for v, c in dist),
        )
    return EXIT_OK


def cmd_optimize(cfg: RunConfig, args) -> int:
    eps = cfg.resolve_energies()
    cfg.L = len(eps)
    secs = _sector_set(cfg) if (cfg.sectors or cfg.drop_top) else (max(
        q for q in analysis.drop_top_sectors(cfg.L, 0)
    ),)
    if args.cost == "A":
        spec = ordering.CostSpec.absolute(*secs)
    elif args.cost == "P":
        spec = ordering.CostSpec.power(*secs)
    else:
        spec = ordering.CostSpec.mixed(*secs)
    result = ordering.anneal(
        eps,
        spec,
        budget=args.budget,
        seed=cfg.seed,
        stop_factor=args.F if args.F > 0 else None,
    )
    print(f"permutation={list(result.permutation)}")
    print(
        f"cost={result.cost!r} evaluations={result.evaluations} "
        f"stopped={result.stopped} seed={cfg.seed}"
    )
    if args.trace:
        _write_rows(args.trace, "evaluation,best_cost", result.trace)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write("\n".join(str(i) for i in result.permutation) + "\n")
    return EXIT_OK


def _gamma_of(cfg: RunConfig, spec: WeightedSpectrum) -> float:
    if cfg.gamma is not None:
        return cfg.gamma
    mult = cfg.gamma_mult if cfg.gamma_mult is not None else 1000.0
    return mult * spec.mean_level_spacing()


def cmd_kde(cfg: RunConfig, args) -> int:
    spec = read_spectrum_csv(args.spectrum)
    gamma = _gamma_of(cfg, spec)
    curve = analysis.kde_curve(spec, gamma, n_points=args.points)
    _write_rows(cfg.out, "energy,density", zip(curve.energies, curve.values))
    print(f"# gamma={gamma!r} points={args.points}", file=sys.stderr)
    return EXIT_OK


def _read_curve(path: str) -> analysis.DensityCurve:
    rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return analysis.DensityCurve(
        energies=rows[:, 0], values=rows[:, 1], gamma=0.0, normalization="probability"
    )


def cmd_compare(cfg: RunConfig, args) -> int:
    a = _read_curve(args.a)
    b = _read_curve(args.b)
    print(repr(analysis.lp_distance(a, b, args.p)))
    return EXIT_OK


def _occupancy_system(cfg: RunConfig, eps: np.ndarray) -> analysis.OccupancySystem:
    depth = cfg.drop_top if cfg.drop_top is not None else 0
    return analysis.OccupancySystem(
        len(eps), cfg.N, cfg.restriction(), eps, drop_top=depth, cache=_cache(cfg)
    )


def cmd_occupancy(cfg: RunConfig, args) -> int:
    eps = cfg.resolve_energies()
    cfg.L = len(eps)
    system = _occupancy_system(cfg, eps)
    gamma = _gamma_of(cfg, oracle_or_parent(system))
    rows = []
    for energy in args.at:
        profile = system.occupancy_profile(energy, gamma)
        rows.extend(
            (energy, k, float(eps[k]), float(profile[k])) for k in range(len(eps))
        )
    _write_rows(cfg.out, "energy,level,level_energy,occupancy", rows)
    return EXIT_OK


def oracle_or_parent(system: analysis.OccupancySystem) -> WeightedSpectrum:
    return system.parent_spectrum()


def cmd_beta(cfg: RunConfig, args) -> int:
    eps = cfg.resolve_energies()
    cfg.L = len(eps)
    system = _occupancy_system(cfg, eps)
    parent = system.parent_spectrum()
    gamma = _gamma_of(cfg, parent)
    curve = analysis.kde_curve(parent, gamma)
    occ = {
        float(e): system.occupancy_profile(e, gamma) for e in args.at
    }
    b_boltz, b_fit, b_emp = analysis.beta_estimators(curve, eps, occ)
    rows = []
    for e in args.at:
        rows.append((float(e), float(b_boltz.at(e)), "boltzmann"))
        rows.append((float(e), float(b_fit.at(e)), "boltzmann-fit"))
    for e, b in zip(b_emp.energies, b_emp.beta):
        rows.append((float(e), float(b), "empirical"))
    _write_rows(cfg.out, "energy,beta,method", rows)
    return EXIT_OK


def cmd_validate(cfg: RunConfig, args) -> int:
    L, N, R = cfg.L, cfg.N, cfg.restriction()
    if L is None or N is None:
        raise UsageError("validate needs --L and --N")
    failures = []
    n_states = oracle.count_configs(L, N, R)
    print(f"states={n_states}")
    streamed = sum(1 for _ in oracle.enumerate_configs(L, N, R))
    if streamed != n_states:
        failures.append(f"stream produced {streamed} configurations, counted {n_states}")
    secs = analysis.drop_top_sectors(L, 0)
    table = genfunc.expand(L, N, R, secs, cache=_cache(cfg))
    counts = [c for (p, _), c in table.items() if p == N]
    if sum(counts) != n_states:
        failures.append("table multiplicities do not sum to the state count")
    if counts and max(counts) != 1:
        failures.append("full-sector table has a non-unit coefficient")
    print(f"all-sector table: keys={len(counts)} max_count={max(counts) if counts else 0}")
    for seed in range(args.seeds):
        eps = gaussian_energies(L, seed=cfg.seed + seed)
        exact = oracle.exact_mbdos(L, N, R, eps)
        approx = resummation.truncated_spectrum(table, eps, N)
        if not spectra_match(exact, approx, tol=1e-9):
            failures.append(f"spectrum mismatch at seed {cfg.seed + seed}")
    if failures:
        for f in failures:
            print(f"FAIL: {f}")
        raise ValidationFailure("; ".join(failures))
    print(f"spectrum match PASS ({args.seeds} seeds)")
    return EXIT_OK


def cmd_cache_gc(cfg: RunConfig, args) -> int:
    directory = cfg.cache_dir or os.environ.get(ENV_CACHE_DIR)
    if not directory:
        raise UsageError("cache-gc needs --cache or MBDOS_CACHE")
    manifest = CacheManifest(Path(directory))
    removed = manifest.gc(
        max_age_days=args.max_age_days, max_total_bytes=args.max_bytes
    )
    print(f"removed={len(removed)} quarantined={len(manifest.quarantined)}")
    return EXIT_OK


# -- parser ------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_common(p: argparse.ArgumentParser, *flags: str) -> None:
    if "L" in flags:
        p.add_argument("--L", type=int, default=None)
    if "N" in flags:
        p.add_argument("--N", type=int, default=None)
    if "R" in flags:
        group = p.add_mutually_exclusive_group()
        group.add_argument("--fermion", action="store_true")
        group.add_argument("--boson", action="store_true")
        group.add_argument("--cap", type=int, default=None)
    if "sectors" in flags:
        p.add_argument("--sectors", type=str, default=None, help="comma-separated q list")
        p.add_argument("--drop-top", type=int, default=None, help="drop k largest sectors")
    if "energies" in flags:
        p.add_argument("--energies", type=str, default=None, help="file, one energy per line")
        p.add_argument("--gaussian", action="store_true")
        p.add_argument("--mu", type=float, default=0.0)
        p.add_argument("--sigma", type=float, default=1.0)
        p.add_argument("--preset", type=str, choices=["bimodal"], default=None)
    if "gamma" in flags:
        p.add_argument("--gamma", type=float, default=None)
        p.add_argument("--gamma-mult", type=float, default=None, help="multiple of the mean level spacing")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cache", type=str, default=None)
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--threads", type=int, default=1)


def build_parser() -> _Parser:
    parser = _Parser(prog="mbdos", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sectors", help="sector partition and fold edges as JSON")
    p.add_argument("L", type=int)
    _add_common(p)

    p = sub.add_parser("tmatrix", help="print the transfer matrix of order q")
    p.add_argument("--q", type=int, required=True)
    _add_common(p)

    p = sub.add_parser("expand", help="expand a coefficient table")
    _add_common(p, "L", "N", "R", "sectors")

    p = sub.add_parser("spectrum", help="truncated spectrum from a table")
    p.add_argument("--table", type=str, default=None)
    _add_common(p, "L", "N", "R", "sectors", "energies")

    p = sub.add_parser("oracle", help="brute-force reference outputs")
    p.add_argument("what", choices=["spectrum", "udist"])
    p.add_argument("--l", type=int, default=1)
    _add_common(p, "L", "N", "R", "energies")

    p = sub.add_parser("optimize", help="anneal the level ordering")
    p.add_argument("--cost", choices=["A", "P", "mix"], default="P")
    p.add_argument("--budget", type=int, default=100_000)
    p.add_argument("--F", type=float, default=1.0, help="stop factor; <=0 disables")
    p.add_argument("--trace", type=str, default=None)
    _add_common(p, "L", "sectors", "energies")

    p = sub.add_parser("kde", help="broadened density curve from a spectrum CSV")
    p.add_argument("--spectrum", type=str, required=True)
    p.add_argument("--points", type=int, default=1000)
    _add_common(p, "gamma")

    p = sub.add_parser("compare", help="L_p distance between two curves")
    p.add_argument("--a", type=str, required=True)
    p.add_argument("--b", type=str, required=True)
    p.add_argument("--p", type=float, default=3.0)
    _add_common(p)

    p = sub.add_parser("occupancy", help="expected level occupancies")
    p.add_argument("--at", type=float, nargs="+", required=True)
    _add_common(p, "L", "N", "R", "sectors", "energies", "gamma")

    p = sub.add_parser("beta", help="inverse-temperature estimators")
    p.add_argument("--at", type=float, nargs="+", required=True)
    _add_common(p, "L", "N", "R", "sectors", "energies", "gamma")

    p = sub.add_parser("validate", help="oracle-equivalence checks for small systems")
    p.add_argument("--seeds", type=int, default=3)
    _add_common(p, "L", "N", "R")

    p = sub.add_parser("cache-gc", help="prune cache entries by age/size")
    p.add_argument("--max-age-days", type=float, default=None)
    p.add_argument("--max-bytes", type=int, default=None)
    _add_common(p)

    return parser


_HANDLERS = {
    "sectors": cmd_sectors,
    "tmatrix": cmd_tmatrix,
    "expand": cmd_expand,
    "spectrum": cmd_spectrum,
    "oracle": cmd_oracle,
    "optimize": cmd_optimize,
    "kde": cmd_kde,
    "compare": cmd_compare,
    "occupancy": cmd_occupancy,
    "beta": cmd_beta,
    "validate": cmd_validate,
    "cache-gc": cmd_cache_gc,
}


def _config_from(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    cfg.L = getattr(args, "L", None)
    cfg.N = getattr(args, "N", None)
    if getattr(args, "fermion", False):
        cfg.r_mode = "fermion"
    elif getattr(args, "cap", None):
        cfg.r_mode = f"cap:{args.cap}"
    else:
        cfg.r_mode = "boson"
    raw_sectors = getattr(args, "sectors", None)
    if raw_sectors:
        cfg.sectors = [int(tok) for tok in raw_sectors.split(",") if tok]
    cfg.drop_top = getattr(args, "drop_top", None)
    cfg.energies_file = getattr(args, "energies", None)
    cfg.gaussian = getattr(args, "gaussian", False)
    cfg.mu = getattr(args, "mu", 0.0)
    cfg.sigma = getattr(args, "sigma", 1.0)
    cfg.preset = getattr(args, "preset", None)
    cfg.seed = getattr(args, "seed", 0)
    cfg.gamma = getattr(args, "gamma", None)
    cfg.gamma_mult = getattr(args, "gamma_mult", None)
    cfg.cache_dir = getattr(args, "cache", None)
    cfg.out = getattr(args, "out", None)
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _config_from(args)
        return _HANDLERS[args.command](cfg, args)
    except UsageError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationFailure as exc:
        print(f"error: validation: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except CacheCorruptionError as exc:
        print(f"error: cache: {exc}", file=sys.stderr)
        return EXIT_CACHE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
