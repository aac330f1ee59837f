"""Batch front end: config ingestion, build/verify/simulate commands, reports.

All file formats are plain JSON with a schema tag and integer matrices,
serialized with sorted keys so that identical configs produce byte-identical
artifacts (timing fields excluded).  Exit codes: 0 all checks passed,
1 verification failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import bounds as bounds_mod
from . import verify as verify_mod
from .errors import (
    ConstructionFailed,
    HsaLabError,
    InvalidArgument,
    ProtocolViolation,
    TooLargeToEnumerate,
)
from .gf import FieldMatrix, PrimeField
from .protocol import direct_sum, run_round
from .schemes import (
    Scheme,
    VARIANT_LINK_KEYS,
    build_scheme_a,
    build_scheme_b,
    build_scheme_c,
    check_weighted_conditions,
    link_key_constraint_ok,
    rates,
)
from .topology import (
    Topology,
    build_cyclic,
    build_explicit,
    build_multiple_cyclic,
    build_tree,
)

CONFIG_SCHEMA = "hsa-lab/config/1"
REPORT_SCHEMA = "hsa-lab/report/1"
BOUNDS_SCHEMA = "hsa-lab/bounds/1"

DEFAULT_ENUMERATION_CAP = 10**7
DEFAULT_SWEEP_BUDGET = 100_000
DEFAULT_SAMPLED_ROUNDS = 10_000

_EXIT_OK = 0
_EXIT_VERIFICATION = 1
_EXIT_CONFIG = 2


class ConfigError(HsaLabError):
    """Configuration file is missing fields or violates preconditions."""


@dataclass
class RunConfig:
    raw: dict
    topology: Topology
    topology_kind: str
    field: PrimeField
    scheme_variant: str            # "A", "B" or "C"
    scheme_t_u: Optional[int]
    t_h: int
    t_u: int
    block_width: int
    seed: int
    enumeration_cap: int
    sweep_budget: int
    outputs: dict

    def echo(self) -> dict:
        return self.raw


def _require(d: dict, key: str, ctx: str):
    if key not in d:
        raise ConfigError(f"missing required field {key!r} in {ctx}")
    return d[key]


def _build_topology(spec: dict) -> tuple[Topology, str]:
    kind = _require(spec, "kind", "topology")
    if kind == "cyclic":
        return build_cyclic(int(_require(spec, "K", "topology")),
                            int(_require(spec, "n", "topology"))), kind
    if kind == "multiple_cyclic":
        return build_multiple_cyclic(int(_require(spec, "K", "topology")),
                                     int(_require(spec, "n", "topology")),
                                     int(_require(spec, "t", "topology"))), kind
    if kind == "explicit":
        return build_explicit(int(_require(spec, "N", "topology")),
                              int(_require(spec, "K", "topology")),
                              _require(spec, "user_links", "topology")), kind
    if kind == "tree":
        return build_tree(int(_require(spec, "U", "topology")),
                          int(_require(spec, "V", "topology"))), kind
    raise ConfigError(f"unknown topology kind {kind!r}")


def _validate_scheme_b(top: Topology, field: PrimeField, t_u: int):
    if top.N % top.K != 0 or top != build_multiple_cyclic(top.K, top.n, top.N // top.K):
        raise ConfigError("scheme B needs a (multiple) cyclic topology")
    limit = min(top.N - 1, top.K - top.n)
    if t_u < 0 or t_u + top.m > limit:
        raise ConfigError(f"scheme B needs 0 <= t_u and t_u + m <= {limit}")
    copies = top.N // top.K
    if (field.q - 1) % copies != 0:
        raise ConfigError(f"scheme B needs the copy count {copies} to divide q - 1")


def parse_config(d: dict) -> RunConfig:
    """Validate a config document completely before any work happens."""
    if d.get("schema") != CONFIG_SCHEMA:
        raise ConfigError(f"expected schema {CONFIG_SCHEMA!r}, got {d.get('schema')!r}")
    top, kind = _build_topology(_require(d, "topology", "config"))
    field = PrimeField(int(_require(d, "field_q", "config")))

    scheme = _require(d, "scheme", "config")
    variant = _require(scheme, "variant", "scheme")
    if variant not in ("A", "B", "C"):
        raise ConfigError(f"scheme variant must be A, B or C, got {variant!r}")
    scheme_t_u = scheme.get("t_u")
    if variant == "B":
        if scheme_t_u is None:
            raise ConfigError("scheme B requires the t_u parameter")
        scheme_t_u = int(scheme_t_u)
        _validate_scheme_b(top, field, scheme_t_u)
    if variant == "C":
        if top.N != top.K or top.n != 2:
            raise ConfigError("scheme C needs a cyclic topology with n = 2")
        if field.q < top.N + 2:
            raise ConfigError(f"scheme C needs q >= N + 2 = {top.N + 2}")
    if variant == "A" and field.q < top.K:
        raise ConfigError(f"scheme A needs q >= K = {top.K}")

    security = _require(d, "security", "config")
    t_h = int(_require(security, "t_h", "security"))
    t_u = int(_require(security, "t_u", "security"))
    if t_h < 1 or t_u < 0:
        raise ConfigError("security needs t_h >= 1 and t_u >= 0")

    width = int(d.get("block_width", 1))
    if width < 1:
        raise ConfigError("block_width must be at least 1")
    seed = int(d.get("seed", 0))
    caps = d.get("caps", {})
    outputs = d.get("outputs", {})
    return RunConfig(
        raw=d,
        topology=top,
        topology_kind=kind,
        field=field,
        scheme_variant=variant,
        scheme_t_u=scheme_t_u,
        t_h=t_h,
        t_u=t_u,
        block_width=width,
        seed=seed,
        enumeration_cap=int(caps.get("enumeration", DEFAULT_ENUMERATION_CAP)),
        sweep_budget=int(caps.get("sweep_budget", DEFAULT_SWEEP_BUDGET)),
        outputs=outputs,
    )


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(d)


def dump_json(obj: dict, path: Optional[str]):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("HSA_LAB_THREADS", "1")))
    except ValueError:
        return 1


def build_scheme(cfg: RunConfig) -> Scheme:
    if cfg.scheme_variant == "A":
        return build_scheme_a(cfg.topology, cfg.field, seed=cfg.seed)
    if cfg.scheme_variant == "B":
        return build_scheme_b(cfg.topology, cfg.field, cfg.scheme_t_u, seed=cfg.seed)
    return build_scheme_c(cfg.topology.N, cfg.field)


# -- command bodies -----------------------------------------------------------


def bounds_fragment(cfg: RunConfig) -> dict:
    rep = bounds_mod.bounds_report(cfg.topology, cfg.t_h, cfg.t_u)
    frag = {
        "schema": BOUNDS_SCHEMA,
        "config": cfg.echo(),
        "feasibility": {
            "verdict": "feasible" if rep.feasible else "infeasible",
            "witness": rep.witness,
        },
        "lower_bounds": rep.as_dict(),
    }
    kind = cfg.topology_kind
    if kind == "tree" and cfg.t_h == 1:
        u = int(cfg.raw["topology"]["U"])
        v = int(cfg.raw["topology"]["V"])
        frag["reference_region"] = bounds_mod.reference_region(
            "tree", U=u, V=v, T=cfg.t_u).as_dict()
    elif kind == "cyclic" and cfg.t_h == 1 and cfg.t_u == 0:
        frag["reference_region"] = bounds_mod.reference_region(
            "cyclic_nocollusion", K=cfg.topology.K, n=cfg.topology.n).as_dict()
    if cfg.topology.N == cfg.topology.K and cfg.topology.n == 2 and cfg.t_h == 1:
        frag["pair_cyclic_region"] = bounds_mod.pair_cyclic_region(
            cfg.topology.N, cfg.t_u).as_dict()
    return frag


def _decodability_block(cfg: RunConfig, scheme: Scheme) -> dict:
    states = cfg.field.q ** ((cfg.topology.N * cfg.topology.n + scheme.seed_count)
                             * cfg.block_width)
    if states <= cfg.enumeration_cap:
        ok = verify_mod.check_decodability(scheme, samples=None, width=cfg.block_width,
                                           cap=cfg.enumeration_cap)
        return {"mode": "exhaustive", "states": states, "passed": ok}
    ok = verify_mod.check_decodability(scheme, samples=DEFAULT_SAMPLED_ROUNDS,
                                       width=cfg.block_width, seed=cfg.seed)
    return {"mode": "sampled", "samples": DEFAULT_SAMPLED_ROUNDS, "passed": ok}


def verify_blocks(cfg: RunConfig, scheme: Scheme, all_sizes: Optional[bool]) -> tuple[dict, bool]:
    """Run decodability, the rank sweep and the oracle sweep; return (report, ok)."""
    threads = _threads()
    deco = _decodability_block(cfg, scheme)
    rank_sweep = verify_mod.sweep_security(
        scheme, cfg.t_h, cfg.t_u, budget=cfg.sweep_budget, all_sizes=all_sizes,
        method="rank", seed=cfg.seed, threads=threads)
    oracle_sweep = verify_mod.sweep_security(
        scheme, cfg.t_h, cfg.t_u, budget=cfg.sweep_budget, all_sizes=all_sizes,
        method="oracle", width=cfg.block_width, oracle_cap=cfg.enumeration_cap,
        seed=cfg.seed, threads=threads)
    structural: dict = {}
    if scheme.variant == VARIANT_LINK_KEYS:
        structural["mask_cancellation"] = link_key_constraint_ok(scheme)
        structural_ok = structural["mask_cancellation"]
    else:
        conds = check_weighted_conditions(scheme)
        structural = {
            "generator_is_mds": conds.generator_is_mds,
            "decoder_is_mds": conds.decoder_is_mds,
            "support_matches_links": conds.support_matches_links,
            "masks_cancel": conds.masks_cancel,
        }
        structural_ok = conds.all_hold
    blocks = {
        "decodability": deco,
        "structural": structural,
        "security_rank": rank_sweep.as_dict(),
        "security_oracle": oracle_sweep.as_dict(),
    }
    ok = (deco["passed"] and structural_ok and rank_sweep.all_passed
          and oracle_sweep.failed == 0 and oracle_sweep.disagreements == 0)
    return blocks, ok


def _comparison_rows(achieved, lower: bounds_mod.BoundsReport) -> list[dict]:
    pairs = [
        ("r_x", achieved.r_x, lower.comm_lower[0]),
        ("r_y", achieved.r_y, lower.comm_lower[1]),
        ("r_z", achieved.r_z, lower.rz_lower),
        ("r_zsigma", achieved.r_zsigma, lower.rzsigma_lower),
    ]
    rows = []
    for name, got, low in pairs:
        if low is None:
            status = "no-known-bound"
        elif got == low:
            status = "optimal"
        elif got > low:
            status = "achievable-not-tight"
        else:
            status = "defect"
        rows.append({
            "rate": name,
            "achieved": str(got),
            "lower": None if low is None else str(low),
            "status": status,
        })
    return rows


def _converse_block(cfg: RunConfig, scheme: Scheme) -> Optional[dict]:
    # the enumerated key identities are guaranteed only for two-regular
    # cyclic networks at maximal feasible user collusion
    top = cfg.topology
    if not (top.N == top.K and top.n == 2 and cfg.t_h == 1 and cfg.t_u == top.N - 2):
        return None
    states = cfg.field.q ** (scheme.seed_count * cfg.block_width)
    if states > cfg.enumeration_cap:
        return {"skipped": "cap"}
    checks = verify_mod.converse_spot_checks(scheme, width=cfg.block_width,
                                             cap=cfg.enumeration_cap)
    return checks.as_dict()


def report_document(cfg: RunConfig, all_sizes: Optional[bool]) -> tuple[dict, bool]:
    t0 = time.monotonic()
    frag = bounds_fragment(cfg)
    doc = {
        "schema": REPORT_SCHEMA,
        "config": cfg.echo(),
        "feasibility": frag["feasibility"],
        "lower_bounds": frag["lower_bounds"],
    }
    for extra in ("reference_region", "pair_cyclic_region"):
        if extra in frag:
            doc[extra] = frag[extra]
    if not bounds_mod.feasibility(cfg.topology, cfg.t_h, cfg.t_u):
        doc["verdict"] = "infeasible"
        doc["timing"] = {"seconds": round(time.monotonic() - t0, 3)}
        return doc, False

    scheme = build_scheme(cfg)
    doc["scheme"] = {"variant": cfg.scheme_variant, "seed_count": scheme.seed_count}
    achieved = rates(scheme)
    lower = bounds_mod.bounds_report(cfg.topology, cfg.t_h, cfg.t_u)
    doc["achieved"] = achieved.as_dict()
    doc["comparison"] = _comparison_rows(achieved, lower)
    blocks, ok = verify_blocks(cfg, scheme, all_sizes)
    doc.update(blocks)
    conv = _converse_block(cfg, scheme)
    if conv is not None:
        doc["converse"] = conv
    defect = any(row["status"] == "defect" for row in doc["comparison"])
    doc["verdict"] = "pass" if (ok and not defect) else "fail"
    doc["timing"] = {"seconds": round(time.monotonic() - t0, 3)}
    return doc, ok and not defect


# -- argparse commands ---------------------------------------------------------


def cmd_bounds(args) -> int:
    cfg = load_config(args.config)
    frag = bounds_fragment(cfg)
    dump_json(frag, args.out)
    if args.expect_feasible and frag["feasibility"]["verdict"] != "feasible":
        return _EXIT_VERIFICATION
    return _EXIT_OK


def cmd_build(args) -> int:
    cfg = load_config(args.config)
    scheme = build_scheme(cfg)
    out = args.out or cfg.outputs.get("scheme")
    if out is None:
        raise ConfigError("no output path: pass --out or set outputs.scheme")
    dump_json(scheme.to_dict(), out)
    return _EXIT_OK


def _load_scheme_for(cfg: RunConfig, path: str) -> Scheme:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        scheme = Scheme.from_dict(doc)
    except (OSError, json.JSONDecodeError, KeyError, InvalidArgument) as exc:
        raise ConfigError(f"cannot read scheme {path}: {exc}") from exc
    if scheme.topology != cfg.topology:
        raise ConfigError("scheme file topology does not match the config")
    if scheme.field != cfg.field:
        raise ConfigError("scheme file field does not match the config")
    return scheme


def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    scheme = _load_scheme_for(cfg, args.scheme)
    all_sizes = True if args.all_sizes else None
    blocks, ok = verify_blocks(cfg, scheme, all_sizes)
    doc = {"schema": REPORT_SCHEMA, "config": cfg.echo(),
           "verdict": "pass" if ok else "fail", **blocks}
    dump_json(doc, args.out)
    return _EXIT_OK if ok else _EXIT_VERIFICATION


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    scheme = _load_scheme_for(cfg, args.scheme)
    rng = np.random.default_rng(cfg.seed)
    inputs = [FieldMatrix(cfg.field, cfg.field.rand(rng, (cfg.topology.n, cfg.block_width)))
              for _ in range(cfg.topology.N)]
    transcript = run_round(scheme, inputs, width=cfg.block_width, seed=cfg.seed)
    doc = transcript.to_dict()
    doc["direct_sum"] = direct_sum(scheme, inputs).tolist()
    out = args.out or cfg.outputs.get("transcript")
    dump_json(doc, out)
    expected = direct_sum(scheme, inputs)
    print(f"decoded == direct sum: {transcript.decoded == expected}")
    return _EXIT_OK if not transcript.mismatch else _EXIT_VERIFICATION


def cmd_report(args) -> int:
    cfg = load_config(args.config)
    all_sizes = True if args.all_sizes else None
    doc, ok = report_document(cfg, all_sizes)
    out = args.out or cfg.outputs.get("report")
    dump_json(doc, out)
    return _EXIT_OK if ok else _EXIT_VERIFICATION


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hsa-lab",
        description="Build, verify and simulate hierarchical secure aggregation codes.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text, scheme_arg=False, expect_feasible=False, all_sizes=False):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the JSON run config")
        p.add_argument("--out", default=None, help="output path (default: stdout/config)")
        if scheme_arg:
            p.add_argument("--scheme", required=True, help="path to a built scheme file")
        if expect_feasible:
            p.add_argument("--expect-feasible", action="store_true",
                           help="exit nonzero if the parameters are infeasible")
        if all_sizes:
            p.add_argument("--all-sizes", action="store_true",
                           help="sweep every sub-pattern, not only maximal ones")
        p.set_defaults(fn=fn)
        return p

    add("bounds", cmd_bounds, "feasibility verdict and rate lower bounds",
        expect_feasible=True)
    add("build", cmd_build, "construct a scheme and write it to disk")
    add("verify", cmd_verify, "check decodability and security of a scheme file",
        scheme_arg=True, all_sizes=True)
    add("simulate", cmd_simulate, "run one aggregation round and write the transcript",
        scheme_arg=True)
    add("report", cmd_report, "one-shot pipeline: bounds + build + verify + rates",
        all_sizes=True)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG
    except HsaLabError as exc:
        if isinstance(exc, (ConstructionFailed, ProtocolViolation, TooLargeToEnumerate)):
            print(f"run failed: {exc}", file=sys.stderr)
            return _EXIT_VERIFICATION
        print(f"configuration error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
