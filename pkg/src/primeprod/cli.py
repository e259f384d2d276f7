"""Command-line driver: each subcommand runs one verification pipeline and writes a table.

Exit codes: 0 all checks pass (or report-only), 1 a check came out false,
2 usage error, 3 resource limit.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from . import __version__
from .errors import ResourceLimitError

log = logging.getLogger("primeprod")

EXIT_OK, EXIT_FALSE, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


# -- configuration -------------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    command: str
    q_range: tuple[int, int] | None = None
    k: int = 2
    alpha: float = 1.0
    epsilon: float = 0.05
    D_exponent: float = 0.5
    grid_step: float = 1e-5
    tol: float = 0.05
    output: Path | None = None
    format: str = "json"
    threads: int = 1
    seed: int = 0
    stdout: bool = False
    extra: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("alpha", "epsilon", "D_exponent", "grid_step", "tol"):
            if not getattr(self, name) > 0:
                raise UsageError(f"--{name.replace('_', '-')} must be positive")
        if self.format not in ("json", "csv"):
            raise UsageError("--format must be json or csv")
        if self.threads < 1:
            raise UsageError("--threads must be at least 1")

    def public(self) -> dict[str, Any]:
        """Settings echoed into artifacts; output path and thread count are left out so files compare equal."""
        d = {
            "command": self.command,
            "q_range": list(self.q_range) if self.q_range else None,
            "k": self.k,
            "alpha": self.alpha,
            "epsilon": self.epsilon,
            "D_exponent": self.D_exponent,
            "grid_step": self.grid_step,
            "tol": self.tol,
            "seed": self.seed,
        }
        d.update(self.extra)
        return d


def parse_q_range(text: str) -> tuple[int, int]:
    """'lo..hi' or a single integer."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            r = int(lo), int(hi)
        else:
            r = int(text), int(text)
    except ValueError:
        raise UsageError(f"bad --q value {text!r}; expected lo..hi or an integer") from None
    if r[0] > r[1]:
        raise UsageError(f"empty q range {text}")
    if r[0] < 1:
        raise UsageError("q must be positive")
    return r


# -- output --------------------------------------------------------------------


def _num(x: float) -> float | None:
    if math.isnan(x) or math.isinf(x):
        return None
    return float(f"{x:.12g}")


def _jsonable(v: Any) -> Any:
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return _num(float(v))
    if isinstance(v, complex):
        return [_num(v.real), _num(v.imag)]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if v is None or isinstance(v, str):
        return v
    return str(v)


def _cell(v: Any) -> str:
    v = _jsonable(v)
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.12g}"
    if isinstance(v, list):
        return " ".join(_cell(x) for x in v)
    if isinstance(v, dict):
        return json.dumps(v, sort_keys=True, separators=(",", ":"))
    return str(v)


def render(cfg: RunConfig, rows: list[dict], summary: dict) -> str:
    if cfg.format == "json":
        doc = {"config": cfg.public(), "summary": summary, "rows": rows}
        return json.dumps(_jsonable(doc), indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    cols: list[str] = []
    for r in rows:
        cols.extend(c for c in r if c not in cols)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in cols])
    return buf.getvalue()


def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _pmap(cfg: RunConfig, fn: Callable, items: Iterable) -> list:
    items = list(items)
    if cfg.threads == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=cfg.threads) as ex:
        return list(ex.map(fn, items))


def _moduli(cfg: RunConfig, primes_only: bool = False, minimum: int = 1) -> list[int]:
    from .modgroup import factorize

    if cfg.q_range is None:
        raise UsageError("--q is required")
    lo, hi = cfg.q_range
    qs = [q for q in range(max(lo, minimum), hi + 1)]
    if primes_only:
        qs = [q for q in qs if [e for _, e in factorize(q).factorization] == [1]]
    if not qs:
        raise UsageError("no moduli in range")
    return qs


# -- subcommands ---------------------------------------------------------------


def cmd_cover(cfg: RunConfig) -> tuple[list[dict], dict, bool]:
    from .primesets import verify_product_cover

    if cfg.k < 1:
        raise UsageError("--k must be at least 1")
    qs = _moduli(cfg, cfg.extra.get("primes_only", False), minimum=2)

    def one(q: int) -> dict:
        x = float(q) ** cfg.alpha
        res = verify_product_cover(q, cfg.k, x)
        return {
            "q": q,
            "k": cfg.k,
            "alpha": cfg.alpha,
            "x": x,
            "covered": res.covered,
            "n_uncovered": len(res.uncovered),
            "uncovered": list(res.uncovered[:20]),
        }

    rows = _pmap(cfg, one, qs)
    ok = all(r["covered"] for r in rows)
    return rows, {"moduli": len(rows), "all_covered": ok}, ok or cfg.extra.get("report_only", False)


def cmd_density(cfg: RunConfig) -> tuple[list[dict], dict, bool]:
    from dataclasses import asdict

    from .primesets import density_report

    qs = _moduli(cfg, cfg.extra.get("primes_only", False), minimum=2)
    union = cfg.extra.get("union", False)
    rows = _pmap(cfg, lambda q: asdict(density_report(q, cfg.k, cfg.alpha, union=union)), qs)
    return rows, {"moduli": len(rows), "min_ratio": min(r["ratio"] for r in rows)}, True


def cmd_theorem1(cfg: RunConfig) -> tuple[list[dict], dict, bool]:
    from .modgroup import as_modulus
    from .suppbound import theorem1_pipeline

    qs = _moduli(cfg, cfg.extra.get("primes_only", False), minimum=3)
    if not cfg.extra.get("include_non_cube_free", False):
        qs = [q for q in qs if as_modulus(q).cube_free]
        if not qs:
            raise UsageError("no cube-free moduli in range")

    def one(q: int) -> dict:
        r = theorem1_pipeline(q, cfg.epsilon)
        return {
            "q": q,
            "phi": r.phi,
            "epsilon": r.epsilon,
            "D": r.D,
            "z": r.z,
            "cube_free": r.cube_free,
            "bound_first": r.bound.first,
            "bound_second": r.bound.second,
            "lower_bound_ratio": r.lower_bound_ratio,
            "actual_ratio": r.actual_ratio,
            "e2_ratio": r.e2_ratio,
            "first_term_ratio": r.first_term_ratio,
            "spectral_margin": r.spectral_margin,
            "sound": r.sound,
            "e2_at_least_three_eighths": r.e2_ratio >= 3 / 8,
        }

    rows = _pmap(cfg, one, qs)
    ok = all(r["sound"] and r["e2_at_least_three_eighths"] for r in rows)
    return rows, {"moduli": len(rows), "all_sound": ok}, ok


def kneser_rows(max_order: int, exhaustive: bool, n_random: int, seed: int,
                pmap: Callable = lambda f, xs: [f(x) for x in xs]) -> list[dict]:
    """Kneser inequality tallies per abelian group shape.

    Exhaustive rows cover every nonempty subset of groups up to
    min(max_order, 16); random rows spread ``n_random`` subsets evenly over
    every shape up to ``max_order`` with a per-row density drawn uniformly.
    """
    from .groupcomb import all_abelian_groups, all_subsets, kneser_batch

    jobs = []
    if exhaustive:
        for n in range(1, min(max_order, 16) + 1):
            jobs.extend(("exhaustive", G, 0) for G in all_abelian_groups(n))
    if n_random:
        groups = [G for n in range(1, max_order + 1) for G in all_abelian_groups(n)]
        base, extra = divmod(n_random, len(groups))
        jobs.extend(("random", G, base + (i < extra)) for i, G in enumerate(groups))

    seeds = np.random.SeedSequence(seed).spawn(len(jobs))

    def one(job_and_seed) -> dict:
        (mode, G, count), ss = job_and_seed
        if mode == "exhaustive":
            X = all_subsets(G)
        else:
            rng = np.random.default_rng(ss)
            dens = rng.uniform(0, 1, size=(count, 1))
            X = rng.random((count, G.order)) < dens
            X[~X.any(axis=1), 0] = True
        viol = eq = 0
        for lo in range(0, len(X), 4096):
            r = kneser_batch(G, X[lo : lo + 4096])
            viol += int((~r["holds"]).sum())
            eq += int((r["AA"] == 2 * r["AH"] - r["H"]).sum())
        return {
            "mode": mode,
            "order": G.order,
            "shape": "x".join(map(str, G.component_orders)) or "1",
            "subsets": len(X),
            "violations": viol,
            "equality_cases": eq,
            "inequality_holds": viol == 0,
        }

    return pmap(one, list(zip(jobs, seeds)))


def cmd_kneser_suite(cfg: RunConfig) -> tuple[list[dict], dict, bool]:
    max_order = cfg.extra.get("max_order", 16)
    exhaustive = cfg.extra.get("exhaustive", False)
    n_random = cfg.extra.get("random", 0)
    if max_order < 1:
        raise UsageError("--max-order must be positive")
    if exhaustive and max_order > 16:
        log.info("exhaustive enumeration is limited to order 16")
    if not exhaustive and not n_random:
        raise UsageError("choose --exhaustive and/or --random N")
    rows = kneser_rows(max_order, exhaustive, n_random, cfg.seed, lambda f, xs: _pmap(cfg, f, xs))
    ok = all(r["inequality_holds"] for r in rows)
    total = sum(r["subsets"] for r in rows)
    return rows, {"subsets": total, "violations": sum(r["violations"] for r in rows), "inequality_holds": ok}, ok


def cmd_certificates(cfg: RunConfig) -> tuple[list[dict], dict, bool]:
    from .analytic import thm2_grid_check, thm3_cosine_certificate

    do_cos = cfg.extra.get("cosine", False)
    do_thm2 = cfg.extra.get("thm2", False)
    if not (do_cos or do_thm2):
        do_cos = do_thm2 = True
    rows: list[dict] = []
    ok = True
    if do_cos:
        if cfg.grid_step > 1e-4:
            raise UsageError("--grid-step must be at most 1e-4")
        c = thm3_cosine_certificate(cfg.grid_step)
        rows.append({
            "certificate": "cosine",
            "interval": list(c.interval),
            "grid_step": c.grid_step,
            "min_value": c.min_value,
            "argmin": c.argmin,
            "positive": c.positive_on_interval,
            "value_at_half": c.value_at_half,
            "first_zero_above": c.first_zero_above,
        })
        ok &= c.positive_on_interval
    if do_thm2:
        grid = cfg.extra.get("grid", 1000)
        for i in (0, 2, 4, 6):
            for j in (1, 3, 5, 7):
                g = thm2_grid_check(i, j, cfg.tol, grid)
                rows.append({
                    "certificate": "c8_case",
                    "i": i,
                    "j": j,
                    "tol": cfg.tol,
                    "grid": grid,
                    "admissible_points": g["admissible_points"],
                    "feasible_points": g["feasible_points"],
                    "contradiction": g["contradiction_everywhere"],
                    "witness": list(g["witness"]) if g["witness"] else None,
                })
                ok &= g["contradiction_everywhere"]
    return rows, {"certificates": len(rows), "all_hold": ok}, ok


def cmd_charsum(cfg: RunConfig) -> tuple[list[dict], dict, bool]:
    from .modgroup import as_modulus
    from .selberg import burgess_exponent_ladder, max_partial_sums

    qs = _moduli(cfg, cfg.extra.get("primes_only", False), minimum=3)

    def one(q: int) -> dict:
        m = max_partial_sums(q)[1:]  # index 0 is the trivial character
        pv = math.sqrt(q) * math.log(q)
        row = {
            "q": q,
            "cube_free": as_modulus(q).cube_free,
            "characters": len(m),
            "max_partial_sum": float(m.max()) if len(m) else 0.0,
            "pv_bound": pv,
            "ratio": (float(m.max()) / pv) if len(m) else 0.0,
            "within_pv": bool((m <= pv).all()),
        }
        for r in (2, 3):
            # Burgess-type envelope q^(alpha_r) at N = q, reported only
            row[f"burgess_r{r}"] = float(q) ** float(burgess_exponent_ladder(r))
        return row

    rows = _pmap(cfg, one, qs)
    ok = all(r["within_pv"] for r in rows)
    return rows, {"moduli": len(rows), "all_within_pv": ok}, ok


def cmd_selberg(cfg: RunConfig) -> tuple[list[dict], dict, bool]:
    from .selberg import selberg_report

    qs = _moduli(cfg, cfg.extra.get("primes_only", False), minimum=5)
    if cfg.D_exponent >= 1:
        raise UsageError("--D-exponent must be below 1")

    def one(q: int) -> dict:
        D = float(q) ** cfg.D_exponent
        if D < 4:
            raise UsageError(f"q^D_exponent = {D:.3g} < 4 for q={q}")
        return selberg_report(q, D)

    rows = _pmap(cfg, one, qs)
    ok = all(r["w_upper_bound_ok"] for r in rows)
    return rows, {"moduli": len(rows), "all_majorize": ok}, ok


COMMANDS: dict[str, Callable[[RunConfig], tuple[list[dict], dict, bool]]] = {
    "cover": cmd_cover,
    "density": cmd_density,
    "theorem1": cmd_theorem1,
    "kneser-suite": cmd_kneser_suite,
    "certificates": cmd_certificates,
    "charsum": cmd_charsum,
    "selberg": cmd_selberg,
}


# -- argument parsing ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", type=Path, help="write the table here (atomically)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--stdout", action="store_true", help="also print the table to standard output")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-v", "--verbose", action="count", default=0, help="progress logging on stderr")

    qarg = argparse.ArgumentParser(add_help=False)
    qarg.add_argument("--q", dest="q", required=True, help="modulus or range lo..hi (inclusive)")
    qarg.add_argument("--primes-only", action="store_true", help="keep only prime moduli")

    p = argparse.ArgumentParser(prog="primeprod", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("cover", parents=[common, qarg], help="is E_k(q^alpha) all of (Z/qZ)*?")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--report-only", action="store_true", help="exit 0 even when some q is not covered")

    s = sub.add_parser("density", parents=[common, qarg], help="|E_k(q^alpha)| / phi(q)")
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--union", action="store_true", help="measure E_1 | E_2 instead of E_k")

    s = sub.add_parser("theorem1", parents=[common, qarg], help="Fourier support bound for E_2 with a Selberg majorant")
    s.add_argument("--epsilon", type=float, default=0.05)
    s.add_argument("--include-non-cube-free", action="store_true")

    s = sub.add_parser("kneser-suite", parents=[common], help="check |AA| >= 2|AH| - |H| over many subsets")
    s.add_argument("--max-order", type=int, default=16)
    s.add_argument("--exhaustive", action="store_true")
    s.add_argument("--random", type=int, default=0, metavar="N")

    s = sub.add_parser("certificates", parents=[common], help="cosine and C_8 real-part certificates")
    s.add_argument("--cosine", action="store_true")
    s.add_argument("--thm2", action="store_true", help="C_8 case grid for i in {0,2,4,6}")
    s.add_argument("--grid-step", type=float, default=1e-5)
    s.add_argument("--tol", type=float, default=0.05)
    s.add_argument("--grid", type=int, default=1000, help="points per axis for the C_8 grid")

    sub.add_parser("charsum", parents=[common, qarg], help="max partial character sums against sqrt(q) log q")

    s = sub.add_parser("selberg", parents=[common, qarg], help="Selberg weight diagnostics at level q^D_exponent")
    s.add_argument("--D-exponent", dest="D_exponent", type=float, default=0.5)
    return p


_EXTRA_KEYS = ("primes_only", "report_only", "union", "include_non_cube_free",
               "max_order", "exhaustive", "random", "cosine", "thm2", "grid")


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    kw: dict[str, Any] = {"command": ns.command}
    if getattr(ns, "q", None) is not None:
        kw["q_range"] = parse_q_range(ns.q)
    for name in ("k", "alpha", "epsilon", "D_exponent", "grid_step", "tol"):
        if hasattr(ns, name):
            kw[name] = getattr(ns, name)
    kw.update(output=ns.output, format=ns.format, threads=ns.threads, seed=ns.seed, stdout=ns.stdout)
    kw["extra"] = {k: getattr(ns, k) for k in _EXTRA_KEYS if hasattr(ns, k)}
    return RunConfig(**kw)


def run(cfg: RunConfig) -> int:
    rows, summary, ok = COMMANDS[cfg.command](cfg)
    text = render(cfg, rows, summary)
    if cfg.output is not None:
        write_atomic(cfg.output, text)
        log.info("wrote %d rows to %s", len(rows), cfg.output)
    if cfg.stdout or cfg.output is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    return EXIT_OK if ok else EXIT_FALSE


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)  # exits 2 on bad flags
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.WARNING - 10 * min(ns.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return run(config_from_args(ns))
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"primeprod: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ResourceLimitError, MemoryError) as e:
        print(f"primeprod: resource limit: {e}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
