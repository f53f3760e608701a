"""Command line entry point ``dp-hierarchy``.

Exit codes: 0 all checks passed, 1 a mathematical check failed, 2 usage or
configuration error, 3 runtime guard (blow-up or cube-root domain).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import platform
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .errors import (
    BlowUpDetected,
    ClosedFormMismatch,
    ConfigError,
    CubeRootDomain,
    DegenerateLeadingCoefficient,
    ResonanceViolation,
    VanishingSn,
)

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_GUARD = 0, 1, 2, 3

log = logging.getLogger("dphierarchy")


class _JsonFormatter(logging.Formatter):
    def format(self, record):
        event = {
            "time": datetime.fromtimestamp(record.created, timezone.utc).isoformat(),
            "level": record.levelname.lower(),
            "event": record.getMessage(),
        }
        event.update(getattr(record, "fields", {}))
        return json.dumps(event, sort_keys=True)


def _setup_logging(json_logs: bool, verbose: bool):
    handler = logging.StreamHandler(sys.stderr)
    if json_logs:
        handler.setFormatter(_JsonFormatter())
    else:
        handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
    log.handlers[:] = [handler]
    log.setLevel(logging.DEBUG if verbose else logging.INFO)
    log.propagate = False


def _event(msg, **fields):
    log.info(msg, extra={"fields": fields})


# manifest --------------------------------------------------------------------


class RunManifest:
    """Record of one invocation, written next to the primary output."""

    def __init__(self, argv, config_text: str = ""):
        self.command_line = list(argv)
        self.config_hash = hashlib.sha256(config_text.encode()).hexdigest()
        self.started = datetime.now(timezone.utc).isoformat()
        self.outputs = []

    def add(self, path):
        self.outputs.append(str(path))

    def write(self, primary: Path):
        import numpy

        path = primary.with_name(primary.name + ".manifest.json")
        data = {
            "command_line": self.command_line,
            "config_hash": self.config_hash,
            "versions": {
                "dphierarchy": __version__,
                "python": platform.python_version(),
                "numpy": numpy.__version__,
                "platform": platform.platform(),
            },
            "started": self.started,
            "finished": datetime.now(timezone.utc).isoformat(),
            "outputs": self.outputs,
        }
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
        return path


def _write_json(path: Path, data):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=1, sort_keys=True) + "\n")


# derive ----------------------------------------------------------------------


def cmd_derive(args, manifest):
    from .conserved import gamma, m1_expansion, triangularize
    from .diffpoly import classify, rho_seq

    out = Path(args.out)
    rhos = rho_seq(args.n, args.degree, args.scheme)
    funcs, rows = [], []
    for n in range(args.n + 1):
        g = gamma(n, args.degree, args.scheme)
        cert = classify(rhos[n], n + 1)
        funcs.append(g.to_json())
        top = g.quadratic.top()
        rows.append(
            [
                n,
                cert.in_sigma,
                cert.affine_top,
                "; ".join(f"d{i}={c}" for i, c in sorted(g.quadratic.coeffs.items())) or "0",
                str(g.linear_coeff_top),
                f"d{top[0]}={top[1]}" if top else "-",
            ]
        )
    data = {
        "convention": "unit-volume integrals modulo total derivatives; "
                      "coefficients c^(k/3) stored as k",
        "scheme": args.scheme,
        "trunc_degree": args.degree,
        "M1": m1_expansion(args.degree).to_json(),
        "gammas": funcs,
    }
    if args.dump:
        data["rho"] = [r.to_json() for r in rhos]
    status = EXIT_OK
    if args.triangularize:
        K = max(args.n - 1, 0) // 2
        try:
            tri = triangularize(K, args.degree, args.scheme)
        except DegenerateLeadingCoefficient as exc:
            log.error("triangularization failed: %s", exc)
            tri = triangularize(K, args.degree, args.scheme, strict=False)
            data["triangularization_error"] = str(exc)
            status = EXIT_CHECK
        data["F"] = [tri[k].to_json() for k in sorted(tri)]
        for k in sorted(tri):
            q = tri[k].quadratic
            rows.append(
                [
                    tri[k].label,
                    "",
                    "",
                    "; ".join(f"d{i}={c}" for i, c in sorted(q.coeffs.items())),
                    "",
                    "",
                ]
            )
    _write_json(out, data)
    manifest.add(out)
    summary = out.with_suffix(".summary.txt")
    header = ["n", "in_sigma", "affine_top", "quadratic_form", "c_n", "top"]
    widths = [max(len(str(r[i])) for r in rows + [header]) for i in range(len(header))]
    lines = ["  ".join(str(v).ljust(w) for v, w in zip(header, widths))]
    lines += ["  ".join(str(v).ljust(w) for v, w in zip(r, widths)) for r in rows]
    summary.write_text("\n".join(lines) + "\n")
    manifest.add(summary)
    print("\n".join(lines))
    return status


# verification ----------------------------------------------------------------


def _coeff_rows(max_m, scheme, corrupt):
    from .coeff_ring import RingElem
    from .conserved import linear_closed_form, linear_recursion_step, linear_table

    table = linear_table(max(max_m, 2), scheme, check=False)
    machine = list(table.c)
    if corrupt:
        machine[min(3, max_m)] = machine[min(3, max_m)] + RingElem.c_power(-7)
    rec = [machine[0], machine[1]]
    while len(rec) <= max_m:
        rec.append(linear_recursion_step(rec[-2], rec[-1], scheme))
    rows = []
    for m in range(max_m + 1):
        closed = linear_closed_form(m) if scheme == "unit" else None
        equal = rec[m] == machine[m] and (closed is None or closed == rec[m])
        rows.append([m, str(rec[m]), str(closed) if closed is not None else "n/a", str(equal).lower()])
    return rows


def cmd_verify_coeffs(args, manifest):
    rows = _coeff_rows(args.max_m, args.scheme, args.corrupt)
    out = Path(args.out) if args.out else None
    lines = [["m", "c_m_recursion", "c_m_closed_form", "equal"]] + rows
    if out:
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", newline="") as fh:
            csv.writer(fh).writerows(lines)
        manifest.add(out)
    else:
        csv.writer(sys.stdout).writerows(lines)
    ok = all(r[3] == "true" for r in rows)
    _event("verify-coeffs", rows=len(rows), ok=ok)
    return EXIT_OK if ok else EXIT_CHECK


def cmd_verify(args, manifest):
    from .conserved import compute_Sn, gamma, linear_table, quad_top_relation

    results = []
    for r in _coeff_rows(args.max_m, args.scheme, args.corrupt):
        results.append(["linear_coefficient", r[0], r[1], r[3] == "true"])
    try:
        linear_table(max(args.max_m, 2), args.scheme)
    except ClosedFormMismatch as exc:
        results.append(["linear_table", args.max_m, str(exc), False])
    for n in range(1, args.max_n + 1, 2):
        try:
            results.append(["S_n_nonzero", n, str(compute_Sn(n, args.scheme)), True])
        except (VanishingSn, ClosedFormMismatch) as exc:
            results.append(["S_n_nonzero", n, str(exc), False])
        rel = quad_top_relation(n, args.scheme)
        results.append(["quad_consistency", n, str(rel.machine_top), rel.consistent])
        # reported, not a pass/fail check: this coefficient can vanish
        top = gamma(n, 3, args.scheme).quadratic[(n + 1) // 2]
        results.append(["top_quadratic_coefficient", n, str(top), None])
    for n in range(0, args.max_n + 1, 2):
        q = gamma(n, 3, args.scheme).quadratic
        results.append(["even_quadratic_zero", n, repr(q), q.is_zero()])
    lines = [["check", "n", "value", "pass"]] + [
        [a, b, c, "info" if d is None else str(d).lower()] for a, b, c, d in results
    ]
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", newline="") as fh:
            csv.writer(fh).writerows(lines)
        manifest.add(out)
    else:
        csv.writer(sys.stdout).writerows(lines)
    failed = [r for r in results if r[3] is False]
    for r in failed:
        log.warning("check failed: %s n=%s value=%s", r[0], r[1], r[2])
    return EXIT_OK if not failed else EXIT_CHECK


# Fourier side ------------------------------------------------------------------


def cmd_resonances(args, manifest):
    from .birkhoff import classify_resonance, divisor, enumerate_In, is_trivially_resonant, km_divisor

    M = args.km if args.km is not None else args.n + 2
    header = ["alpha", "divisor", "trivial"] + [f"km_{m}" for m in range(1, M + 1)]
    rows, n_idx, counter = [], 0, 0
    for alpha in enumerate_In(args.n, args.cutoff):
        n_idx += 1
        if divisor(alpha) != 0:
            continue
        rep = classify_resonance(alpha, M)
        rows.append(rep.to_row())
        if not is_trivially_resonant(alpha) and all(km_divisor(alpha, m) == 0 for m in range(1, M + 1)):
            counter += 1
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    manifest.add(out)
    n_triv = sum(1 for r in rows if r[2] == "true")
    if not rows:
        print(f"no resonant indices among {n_idx} indices (n={args.n}, cutoff={args.cutoff})")
    else:
        print(f"{len(rows)} resonant indices among {n_idx}: {n_triv} trivially resonant, "
              f"{len(rows) - n_triv} not; {counter} solve every K_m divisor equation")
    return EXIT_OK if counter == 0 else EXIT_CHECK


def cmd_birkhoff(args, manifest):
    from .birkhoff import birkhoff_step, dp_hamiltonian_fourier

    H = dp_hamiltonian_fourier(args.cutoff, args.c)
    steps = []
    status = EXIT_OK
    for k in range(args.order):
        try:
            st = birkhoff_step(H, k, max_degree=args.order + 2)
        except ResonanceViolation as exc:
            log.error("%s", exc)
            return EXIT_CHECK
        steps.append(
            {
                "k": k,
                "degree": k + 3,
                "certified_mass_limit": st.certified_limit,
                "normal_terms": st.normal_terms.to_json(),
                "flagged": [[list(p) for p in a] for a in st.flagged],
                "violations": [],
                "chi_terms": len(st.chi),
            }
        )
        n_cert = len(st.normal_terms) - len(st.flagged)
        print(f"degree {k + 3}: {len(st.normal_terms)} kernel terms, {n_cert} certified "
              f"(all trivially resonant), {len(st.flagged)} flagged (mass > {st.certified_limit})")
        _event("birkhoff-step", degree=k + 3, kernel=len(st.normal_terms), flagged=len(st.flagged))
        H = st.H_next
    out = Path(args.out)
    _write_json(out, {"cutoff": args.cutoff, "c": str(args.c), "order": args.order, "steps": steps})
    manifest.add(out)
    return status


# simulation --------------------------------------------------------------------


def _parse_sets(items):
    return "\n".join(items or [])


def _read_config(name: str) -> str:
    """Read a config file, falling back to the bundled ``data/<name>.cfg``."""
    path = Path(name)
    if path.is_file():
        return path.read_text()
    from importlib import resources

    bundled = resources.files("dphierarchy") / "data" / (path.stem + ".cfg")
    if bundled.is_file():
        return bundled.read_text()
    raise FileNotFoundError(f"no config file {name!r} and no bundled config {path.stem!r}")


def cmd_simulate(args, manifest):
    from .spectral_sim import density_scale, initial_state, parse_config, run

    text = _read_config(args.config) if args.config else ""
    text = text + "\n" + _parse_sets(args.set)
    manifest.config_hash = hashlib.sha256(text.encode()).hexdigest()
    config = parse_config(text)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    started = time.time()

    def progress(i, n):
        _event("simulate-progress", step=i, steps=n)

    series = run(config, progress=progress if args.json_logs else None)
    series.to_csv(out)
    manifest.add(out)
    report = {"elapsed_s": round(time.time() - started, 3), "drift": {}}
    for name in series.columns:
        if name == "t" or name.endswith("_norm") or name.startswith("K_"):
            continue
        floor = 0.0
        if name.startswith("gamma_"):
            # Gamma[3] vanishes identically; measure against int |rho[n]|
            floor = density_scale(initial_state(config), config.c, int(name[6:]), config.scheme)
        try:
            report["drift"][name] = series.relative_drift(name, floor)
        except ValueError:
            report["drift"][name] = None
    for name in series.columns:
        if name.endswith("_norm"):
            col = series.column(name)
            report[f"{name}_growth"] = float(col.max() / col[0]) if col[0] else None
    rep_path = out.with_suffix(".report.json")
    _write_json(rep_path, report)
    manifest.add(rep_path)
    print(json.dumps(report, indent=1, sort_keys=True))
    if args.max_drift is not None:
        over = {k: v for k, v in report["drift"].items() if v is not None and v > args.max_drift}
        if over:
            log.error("drift above %g: %s", args.max_drift, ", ".join(sorted(over)))
            return EXIT_CHECK
    return EXIT_OK


# parser ------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="dp-hierarchy", description=__doc__.splitlines()[0])
    p.add_argument("--json-logs", action="store_true", help="emit progress events as JSON lines on stderr")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def scheme_arg(sp):
        sp.add_argument("--scheme", choices=("unit", "riccati"), default="unit",
                        help="normalisation of the density recursion")

    d = sub.add_parser("derive", help="derive Gamma functionals (and F combinations)")
    d.add_argument("--n", type=int, required=True)
    d.add_argument("--degree", type=int, default=4)
    d.add_argument("--out", required=True)
    d.add_argument("--triangularize", action="store_true")
    d.add_argument("--dump", action="store_true", help="include the rho densities")
    scheme_arg(d)
    d.set_defaults(func=cmd_derive)

    vc = sub.add_parser("verify-coeffs", help="linear coefficients: recursion vs closed form")
    vc.add_argument("--max-m", type=int, default=20)
    vc.add_argument("--out")
    vc.add_argument("--corrupt", action="store_true", help=argparse.SUPPRESS)
    scheme_arg(vc)
    vc.set_defaults(func=cmd_verify_coeffs)

    v = sub.add_parser("verify", help="linear, S_n and quadratic consistency checks")
    v.add_argument("--max-m", type=int, default=20)
    v.add_argument("--max-n", type=int, default=9)
    v.add_argument("--out")
    v.add_argument("--corrupt", action="store_true", help=argparse.SUPPRESS)
    scheme_arg(v)
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("resonances", help="scan zero-momentum indices for resonances")
    r.add_argument("--n", type=int, required=True)
    r.add_argument("--cutoff", type=int, required=True)
    r.add_argument("--km", type=int)
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_resonances)

    b = sub.add_parser("birkhoff", help="Birkhoff normal form steps for the DP Hamiltonian")
    b.add_argument("--order", type=int, required=True, help="number of steps (2 = cubic and quartic)")
    b.add_argument("--cutoff", type=int, required=True)
    b.add_argument("--c", type=int, default=1)
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_birkhoff)

    s = sub.add_parser("simulate", help="pseudospectral DP run with diagnostics")
    s.add_argument("--config", help="config file, or the name of a bundled config (small_data)")
    s.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config entry")
    s.add_argument("--out", required=True)
    s.add_argument("--max-drift", type=float, help="exit 1 if any relative drift exceeds this")
    s.set_defaults(func=cmd_simulate)
    return p


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    _setup_logging(args.json_logs, args.verbose)
    manifest = RunManifest(["dp-hierarchy"] + argv)
    try:
        status = args.func(args, manifest)
    except (ConfigError, FileNotFoundError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_USAGE
    except (BlowUpDetected, CubeRootDomain) as exc:
        log.error("runtime guard: %s", exc)
        return EXIT_GUARD
    out = getattr(args, "out", None)
    if out:
        manifest.write(Path(out))
    return status


if __name__ == "__main__":
    sys.exit(main())
