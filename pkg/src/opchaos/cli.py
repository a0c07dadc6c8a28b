"""Command-line front end: opchaos {classify, norms, orbit, certificate, oracle-check, density}."""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

from . import __version__
from .classify import (
    DCCertificate,
    Verdict,
    classify_acb,
    classify_li_yorke,
    classify_mean_li_yorke,
    classify_power_bounded,
    dc_certificate_check,
    dc_density_criterion,
    dcsum_test,
    dissipative_ddc_test,
)
from .config import HORIZON_DEFAULTS, PROPERTIES, JobConfig, normalize_system
from .density import density_estimate, index_set_from_json
from .errors import ConfigError, OpChaosError
from .norms import norm_series
from .orbit import SetFamily, irregularity_report, orbit_norm_series
from .report import report_document, write_csv, write_json
from .system import ShiftSystem, system_to_json

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_EXPECT = 3


def _json_arg(text: str, ptr: str) -> Any:
    """Inline JSON (starting with '{' or '[') or a path to a JSON file."""
    try:
        if text.lstrip().startswith(("{", "[")):
            return json.loads(text)
        with open(text) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(ptr, f"invalid JSON: {exc}") from None
    except OSError as exc:
        raise ConfigError(ptr, f"cannot read {text}: {exc.strerror}") from None


def _load_job(args) -> JobConfig:
    doc: Dict[str, Any] = {}
    if getattr(args, "config", None):
        doc = _json_arg(args.config, "")
        if not isinstance(doc, dict):
            raise ConfigError("", "a job document must be an object")
    if getattr(args, "system", None):
        doc = dict(doc, system=normalize_system(_json_arg(args.system, "/system")))
    return JobConfig.from_json(doc)


def _threads(args) -> int:
    raw = args.threads if args.threads is not None else os.environ.get("OPCHAOS_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError("/threads", f"thread count must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError("/threads", "thread count must be positive")
    return n


def _kw(**kwargs) -> dict:
    return {k: v for k, v in kwargs.items() if v is not None}


def _default_family(system) -> SetFamily:
    if isinstance(system, ShiftSystem):
        return SetFamily.translated([system.atom(0, system.origin_cell)], system.stride)
    raise ConfigError("/sets", "give a set family for non-shift systems")


def _run_property(name: str, system, cfg: JobConfig, certs: List[DCCertificate],
                  horizon: Optional[int]) -> List[Verdict]:
    if name == "power-bounded":
        return [classify_power_bounded(system, **_kw(horizon=horizon, bound=cfg.bound))]
    if name == "li-yorke":
        return [classify_li_yorke(system, None, **_kw(horizon=horizon))]
    if name == "acb":
        return [classify_acb(system, cfg.exponent, **_kw(horizon=horizon, bound=cfg.bound))]
    if name == "mean-li-yorke":
        return [classify_mean_li_yorke(system, None, **_kw(horizon=horizon, family=cfg.family))]
    if name == "dc-density":
        return [dc_density_criterion(system, None, **_kw(N_max=horizon))]
    if name == "dcsum":
        fam = cfg.set_family() if cfg.sets is not None else _default_family(system)
        return [dcsum_test(system, fam, cfg.index_set("D"), cfg.index_set("E"), cfg.tail(),
                           **_kw(horizon=cfg.horizons.get("n_max")))]
    if name == "dense-distributional-chaos":
        B = cfg.family[0] if cfg.family else None
        return [dissipative_ddc_test(system, **_kw(horizon=horizon, B=B, D=cfg.index_set("D"),
                                                   tail_bound=cfg.tail()))]
    if name == "distributional-chaos":
        if certs:
            return [dc_certificate_check(system, c) for c in certs]
        if system.space.is_sup:
            return _run_property("dc-density", system, cfg, certs, horizon)
        return _run_property("dcsum", system, cfg, certs, horizon)
    raise ConfigError("/properties", f"unknown property {name!r}")


def _parse_expect(items: Sequence[str], cfg: JobConfig) -> Dict[str, str]:
    given: Dict[str, str] = {}
    for item in items or ():
        key, sep, val = item.partition("=")
        if sep and key in PROPERTIES:
            given[key] = val
        elif sep:
            raise ConfigError("/expect", f"unknown property {key!r}")
        else:
            given["*"] = item
    # a bare value on the command line replaces the job's expectations
    out = {} if "*" in given else dict(cfg.expect)
    out.update(given)
    return out


def _expect_failures(results: List[tuple], expect: Dict[str, str]) -> List[str]:
    bad = []
    for name, verdicts in results:
        want = expect.get(name, expect.get("*"))
        if want is None:
            continue
        for v in verdicts:
            if not v.matches(want):
                bad.append(f"{name}: expected {want}, got {v.outcome} ({v.status.value})")
    return bad


def cmd_classify(args) -> int:
    cfg = _load_job(args)
    system = cfg.build_system()
    props = list(args.property or cfg.properties)
    if not props:
        raise ConfigError("/properties", "no property requested")
    certs = [DCCertificate.from_json(_json_arg(p, "/certificates")) for p in
             list(cfg.certificates) + list(args.certificate or [])]
    if certs and "distributional-chaos" not in props:
        props.append("distributional-chaos")
    horizon = args.horizon if args.horizon is not None else cfg.horizons.get("N")
    expect = _parse_expect(args.expect, cfg)
    with ThreadPoolExecutor(max_workers=_threads(args)) as pool:
        futures = [pool.submit(_run_property, name, system, cfg, certs, horizon) for name in props]
        results = [(name, f.result()) for name, f in zip(props, futures)]
    verdicts = [v for _, vs in results for v in vs]
    doc = report_document("classify", system_to_json(system), verdicts, seed=cfg.seed)
    write_json(doc, args.out or cfg.outputs.get("json"), None if args.quiet else sys.stdout)
    bad = _expect_failures(results, expect)
    for line in bad:
        print(f"expectation failed: {line}", file=sys.stderr)
    return EXIT_EXPECT if bad else EXIT_OK


def cmd_norms(args) -> int:
    cfg = _load_job(args)
    system = cfg.build_system()
    n_max = args.n_max if args.n_max is not None else cfg.horizon("n_max")
    series = norm_series(system, n_max)
    rows = [(n + 1, series.values[n], series.witnesses[n] if series.witnesses else None) for n in range(n_max)]
    csv_path = args.csv or cfg.outputs.get("csv")
    if csv_path:
        write_csv(("n", "norm", "witness"), rows, csv_path)
    extra = {"norms": {"n_max": n_max, "exact": series.exact, "divergent": series.divergent,
                       "values": series.values, "witnesses": series.witnesses}}
    doc = report_document("norms", system_to_json(system), extra=extra, seed=cfg.seed)
    write_json(doc, args.out or cfg.outputs.get("json"), None if args.quiet else sys.stdout)
    return EXIT_OK


def cmd_orbit(args) -> int:
    cfg = _load_job(args)
    system = cfg.build_system()
    if args.vector:
        vdoc = _json_arg(args.vector, "/vector")
        cfg = JobConfig.from_json(dict(cfg.to_json(), vector=vdoc))
    v = cfg.sparse_vector()
    if v is None:
        raise ConfigError("/vector", "orbit needs a starting vector")
    n_max = args.n_max if args.n_max is not None else cfg.horizon("n_max")
    series = orbit_norm_series(system, v, n_max)
    csv_path = args.csv or cfg.outputs.get("csv")
    if csv_path:
        write_csv(("n", "norm", "cesaro"), series.to_rows(), csv_path)
    irr = irregularity_report(series)
    extra = {"orbit": {"n_max": n_max, "initial_norm": series.initial_norm, "norms": series.norms,
                       "cesaro": series.cesaro, "support_drift": series.support_drift},
             "irregularity": irr.to_json()}
    doc = report_document("orbit", system_to_json(system), extra=extra, seed=cfg.seed)
    write_json(doc, args.out or cfg.outputs.get("json"), None if args.quiet else sys.stdout)
    return EXIT_OK


def cmd_certificate(args) -> int:
    if args.generate:
        try:
            eps = Fraction(args.epsilon)
        except (ValueError, ZeroDivisionError):
            raise ConfigError("/epsilon", f"not a fraction: {args.epsilon!r}") from None
        cert = DCCertificate.bayart(args.ks, eps)
        cert.validate()
        write_json(cert.to_json(), args.write, None if args.write else sys.stdout)
        return EXIT_OK
    if not args.check:
        raise ConfigError("/certificate", "pass --generate bayart or --check PATH")
    cfg = _load_job(args)
    system = cfg.build_system()
    cert = DCCertificate.from_json(_json_arg(args.check, "/certificate"))
    verdict = dc_certificate_check(system, cert)
    doc = report_document("certificate", system_to_json(system), [verdict], seed=cfg.seed)
    write_json(doc, args.out, None if args.quiet else sys.stdout)
    bad = _expect_failures([("distributional-chaos", [verdict])], _parse_expect(args.expect, cfg))
    for line in bad:
        print(f"expectation failed: {line}", file=sys.stderr)
    return EXIT_EXPECT if bad else EXIT_OK


def cmd_oracle_check(args) -> int:
    from .oracle import DEFAULT_SEED, norm_oracle_sweep

    seed = DEFAULT_SEED if args.seed is None else args.seed
    cases = norm_oracle_sweep(args.count, args.n_max, seed=seed)
    worst = max(cases, key=lambda c: c.rel_delta)
    ok = worst.rel_delta <= args.tolerance
    extra = {"oracle": {"cases": len(cases), "seed": seed, "tolerance": args.tolerance, "passed": ok,
                        "max_rel_delta": worst.rel_delta,
                        "worst": {"case": worst.case, "n": worst.n, "p": worst.p,
                                  "formula": worst.formula, "brute": worst.brute}}}
    write_json(report_document("oracle-check", extra=extra, seed=seed), args.out,
               None if args.quiet else sys.stdout)
    return EXIT_OK if ok else EXIT_EXPECT


def cmd_density(args) -> int:
    cfg = _load_job(args)
    if args.set:
        ddoc = _json_arg(args.set, "/D")
    elif cfg.D is not None:
        ddoc = cfg.D
    else:
        raise ConfigError("/D", "density needs an index set")
    D = index_set_from_json(ddoc, "/D")
    horizon = args.horizon if args.horizon is not None else cfg.horizon("index")
    est = density_estimate(D, horizon)
    doc = report_document("density", extra={"index_set": ddoc, "density": est.to_json()}, seed=cfg.seed)
    write_json(doc, args.out or cfg.outputs.get("json"), None if args.quiet else sys.stdout)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="opchaos", description="Dynamics of weighted shifts and composition operators.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, system=True):
        p.add_argument("--config", help="job JSON file (or inline JSON)")
        if system:
            p.add_argument("--system", help="system or weight-spec JSON, overriding the job's system")
        p.add_argument("--out", help="write the JSON report here")
        p.add_argument("--quiet", action="store_true", help="do not echo the report to stdout")
        p.add_argument("--threads", type=int, default=None, help="worker threads (default: $OPCHAOS_THREADS or 1)")

    p = sub.add_parser("classify", help="classify dynamical properties")
    common(p)
    p.add_argument("--property", action="append", choices=PROPERTIES)
    p.add_argument("--certificate", action="append", help="distributional chaos certificate JSON")
    p.add_argument("--expect", action="append", help="VALUE or PROPERTY=VALUE; VALUE is holds/refuted/undecided or a status")
    p.add_argument("--horizon", type=int, help="iterate horizon N")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("norms", help="iterate norms ||T^n||")
    common(p)
    p.add_argument("--n-max", type=int, help=f"default {HORIZON_DEFAULTS['n_max']}")
    p.add_argument("--csv", help="write n, norm, witness rows")
    p.set_defaults(func=cmd_norms)

    p = sub.add_parser("orbit", help="orbit norms and Cesaro means of a finitely supported vector")
    common(p)
    p.add_argument("--vector", help='JSON object atom -> coefficient, e.g. {"5": 1}')
    p.add_argument("--n-max", type=int, help=f"default {HORIZON_DEFAULTS['n_max']}")
    p.add_argument("--csv", help="write n, norm, cesaro rows")
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("certificate", help="generate or check a distributional chaos certificate")
    common(p)
    p.add_argument("--generate", choices=["bayart"])
    p.add_argument("--ks", type=int, nargs="+", default=[3, 4, 5])
    p.add_argument("--epsilon", default="1/3")
    p.add_argument("--write", help="where to write a generated certificate")
    p.add_argument("--check", help="certificate JSON to check against the system")
    p.add_argument("--expect", action="append")
    p.set_defaults(func=cmd_certificate)

    p = sub.add_parser("oracle-check", help="compare closed-form norms with dense matrix powers")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--n-max", type=int, default=16)
    p.add_argument("--seed", type=int)
    p.add_argument("--tolerance", type=float, default=1e-12)
    p.add_argument("--out")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("density", help="lower and upper density estimates of an index set")
    common(p, system=False)
    p.add_argument("--set", help="index-set JSON")
    p.add_argument("--horizon", type=int, help=f"default {HORIZON_DEFAULTS['index']}")
    p.set_defaults(func=cmd_density)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error at {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OpChaosError as exc:
        print(f"input rejected: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
