"""Command line front end.

Subcommands:

    simulate      Monte Carlo campaign on one configuration
    sweep         campaigns across a list of coverages, fixed codebook
    bounds        exponent curves over a rate grid
    capacity-gap  duplicate-read rate loss over (alpha, crossover) pairs
    expurgate     greedy codebook expurgation report
    spectrum      pairwise distance spectrum of the codebook
    oracle        exact enumeration of a tiny instance, with MC cross-check

Exit codes: 0 success, 2 invalid configuration or arguments, 3 a runtime
invariant failed mid-run. Outputs are deterministic given the config and seed:
JSON carries a schema_version and no timestamps, CSV columns are fixed.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from dnasim import bounds as bnd
from dnasim import harness
from dnasim.config import ConfigError, RunConfig
from dnasim.decoder import make_decoder_params
from dnasim.model import make_channel_params

SCHEMA_VERSION = 1

# tables too large to duplicate into the JSON payload
_CSV_ONLY = {"trials"}


def _u64(text: str) -> int:
    val = int(text)
    if not 0 <= val < 1 << 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit int")
    return val


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="dnasim",
        description="simulation and analytic bounds for sampled coded-index storage",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("simulate", "run a Monte Carlo campaign"),
        ("sweep", "campaigns across sweep.alphas with a fixed codebook"),
        ("bounds", "exponent curves over a rate grid"),
        ("capacity-gap", "duplicate-read rate loss table"),
        ("expurgate", "expurgate the codebook and report what was removed"),
        ("spectrum", "pairwise distance spectrum of the codebook"),
        ("oracle", "exact tiny-instance probabilities plus MC cross-check"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, default=None, help="key=value file")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        p.add_argument("--seed", type=_u64, default=None, help="campaign master seed")
        p.add_argument("--trials", type=int, default=None, help="campaign trial count")
        p.add_argument(
            "--format",
            choices=("csv", "json", "both"),
            default="both",
            help="which output files to write",
        )
    return ap


def _table(columns, rows) -> dict:
    clean = [
        [v.item() if isinstance(v, np.generic) else v for v in row] for row in rows
    ]
    return {"columns": list(columns), "rows": clean}


def _cmd_simulate(cfg: RunConfig):
    params, inner, cb, dp = cfg.build_all()
    workers = cfg["campaign.workers"] or None
    res = harness.run_campaign(
        cb,
        params,
        inner,
        dp,
        trials=cfg["campaign.trials"],
        master_seed=cfg["campaign.seed"],
        n_workers=workers,
    )
    tables = {"trials": _table(res.columns, res.table.tolist())}
    rows = harness.tail_comparison(
        res,
        params,
        inner,
        dp,
        sigma_grid=cfg["analysis.sigma_grid"],
        kappa_grid=cfg["analysis.kappa_grid"],
        theta_grid=cfg["analysis.theta_grid"],
    )
    if rows:
        cols = list(rows[0])
        tables["tails"] = _table(cols, [[r[c] for c in cols] for r in rows])
    summary = res.to_summary()
    lo, hi = res.wilson
    note = f"pe={res.pe:.6g} (95% CI {lo:.3g}..{hi:.3g}) over {res.trials} trials"
    return summary, tables, note


def _cmd_sweep(cfg: RunConfig):
    base = cfg.build_channel()
    inner = cfg.build_inner(base)
    cb = cfg.build_codebook(base, inner)
    workers = cfg["campaign.workers"] or None
    rows = []
    for alpha in cfg["sweep.alphas"]:
        params = make_channel_params(base.num_molecules, alpha, base.beta)
        dp = make_decoder_params(params, cfg["decoder.tau"])
        res = harness.run_campaign(
            cb,
            params,
            inner,
            dp,
            trials=cfg["campaign.trials"],
            master_seed=cfg["campaign.seed"],
            n_workers=workers,
        )
        lo, hi = res.wilson
        rows.append(
            [
                alpha,
                params.num_reads,
                res.trials,
                res.errors,
                res.pe,
                lo,
                hi,
                float(res.column("erased").mean()) / params.num_molecules,
            ]
        )
    cols = (
        "alpha",
        "num_reads",
        "trials",
        "errors",
        "pe",
        "wilson_low",
        "wilson_high",
        "erasure_rate",
    )
    pes = [r[4] for r in rows]
    summary = {
        "num_molecules": base.num_molecules,
        "beta": base.beta,
        "num_codewords": cb.num_codewords,
        "rate": cb.rate,
        "tau": cfg["decoder.tau"],
        "trials_per_point": cfg["campaign.trials"],
        "alphas": list(cfg["sweep.alphas"]),
        "pe": pes,
        "pe_nonincreasing": all(b <= a for a, b in zip(pes, pes[1:])),
    }
    note = "pe by alpha: " + ", ".join(f"{a:g}:{p:.4g}" for a, p in zip(summary["alphas"], pes))
    return summary, {"sweep": _table(cols, rows)}, note


def _cmd_bounds(cfg: RunConfig):
    params = cfg.build_channel()
    inner = cfg.build_inner(params)
    regime = cfg["analysis.regime"]
    gap = inner.rate_b - 1.0 / params.beta
    alpha = params.coverage
    ratio = params.num_reads / (params.num_molecules * params.molecule_len)
    rates = cfg["analysis.rates"]
    if not rates:
        top = gap * (1.0 - math.exp(-alpha)) if regime == "theta" else gap
        rates = tuple(top * k / 20.0 for k in range(21))
    rows = []
    for r in rates:
        ach = bnd.achievable_exponent(
            r, inner.rate_b, params.beta, regime=regime, alpha=alpha, ratio=ratio
        )
        rc = bnd.random_coding_exponent(
            r, inner.rate_b, params.beta, regime=regime, alpha=alpha, ratio=ratio
        )
        if regime == "omega" and ratio >= 4.0 * gap:
            ex = bnd.expurgated_exponent(r, inner.rate_b, params.beta, ratio=ratio).value
        else:
            ex = None  # undefined off the deep-coverage regime; empty in CSV
        rows.append([r, ach.value, ach.branch, rc.value, ex])
    cols = ("rate", "achievable", "branch", "random_coding", "expurgated")
    first = bnd.achievable_exponent(
        0.0, inner.rate_b, params.beta, regime=regime, alpha=alpha, ratio=ratio
    )
    summary = {
        "regime": regime,
        "normalization": first.normalization,
        "rate_ceiling": first.rate_ceiling,
        "rate_b": inner.rate_b,
        "beta": params.beta,
        "alpha": alpha,
        "reads_per_nucleotide": ratio,
        "zero_rate_exponent": first.value,
    }
    note = (
        f"{regime} regime, {first.normalization} exponents, "
        f"ceiling {first.rate_ceiling:.6g}, zero-rate value {first.value:.6g}"
    )
    return summary, {"bounds": _table(cols, rows)}, note


def _cmd_capacity_gap(cfg: RunConfig):
    rows = []
    worst = 0.0
    for alpha in cfg["analysis.gap_alphas"]:
        for w in cfg["analysis.gap_crossovers"]:
            gap = bnd.capacity_gap(alpha, w)
            limit = bnd.binary_entropy(w)
            worst = max(worst, gap)
            rows.append([alpha, w, gap, gap / math.log(2.0), limit, gap / limit])
    cols = (
        "alpha",
        "crossover",
        "gap_nats",
        "gap_bits",
        "limit_nats",
        "fraction_of_limit",
    )
    summary = {
        "alphas": list(cfg["analysis.gap_alphas"]),
        "crossovers": list(cfg["analysis.gap_crossovers"]),
        "max_gap_nats": worst,
    }
    note = f"largest duplicate-read rate loss: {worst:.6g} nats/read"
    return summary, {"capacity_gap": _table(cols, rows)}, note


def _cmd_expurgate(cfg: RunConfig):
    params, inner, cb, _dp = cfg.build_all()
    res = harness.expurgate_codebook(cb, params, inner, eta=cfg["expurgate.eta"])
    m = cb.num_indices
    budget_rows = [
        [d, d / m, float(res.log_thresholds[d])] for d in range(m + 1)
    ]
    removed_rows = [[order, int(j)] for order, j in enumerate(res.removed)]
    summary = {
        "num_codewords": cb.num_codewords,
        "kept": res.num_kept,
        "removed": len(res.removed),
        "eta": res.eta,
        "max_log_slack": res.max_log_slack,
    }
    note = f"kept {res.num_kept}/{cb.num_codewords} codewords (eta={res.eta:.6g})"
    return summary, {
        "removed": _table(("order", "codeword"), removed_rows),
        "budget": _table(("distance", "gamma", "log_threshold"), budget_rows),
    }, note


def _cmd_spectrum(cfg: RunConfig):
    params, inner, cb, _dp = cfg.build_all()
    res = harness.distance_spectrum(cb)
    m = cb.num_indices
    rows = [
        [
            d,
            float(res.gamma[d]),
            int(res.pooled[d]),
            float(res.mean_counts[d]),
            float(res.ensemble_mean[d]),
            float(res.chernoff[d]),
        ]
        for d in range(m + 1)
    ]
    cols = ("distance", "gamma", "pooled", "mean_count", "ensemble_mean", "chernoff")
    nz = np.flatnonzero(res.pooled)
    summary = {
        "num_codewords": cb.num_codewords,
        "num_indices": m,
        "payload_space": cb.payload_space,
        "min_distance": int(nz[0]) if nz.size else -1,
        "max_distance": int(nz[-1]) if nz.size else -1,
    }
    note = (
        f"distances span {summary['min_distance']}..{summary['max_distance']} "
        f"over {cb.num_codewords} codewords"
    )
    return summary, {"spectrum": _table(cols, rows)}, note


def _cmd_oracle(cfg: RunConfig):
    params, inner, cb, dp = cfg.build_all()
    exact = harness.exact_small_instance(cb, params, inner, dp)
    summary = {
        "pe_exact": str(exact["pe"]),
        "pe_exact_float": exact["pe_float"],
        "mean_erased": float(exact["mean_erased"]),
        "outcomes_visited": exact["outcomes_visited"],
    }
    tables = {
        "per_codeword": _table(
            ("codeword", "pe"),
            [[j, float(p)] for j, p in enumerate(exact["per_codeword_pe"])],
        )
    }
    trials = cfg["campaign.trials"]
    if trials > 0:
        res = harness.run_campaign(
            cb, params, inner, dp, trials=trials, master_seed=cfg["campaign.seed"]
        )
        lo, hi = res.wilson
        summary.update(
            {
                "pe_mc": res.pe,
                "mc_trials": trials,
                "wilson_low": lo,
                "wilson_high": hi,
                "exact_within_wilson": bool(lo <= exact["pe_float"] <= hi),
            }
        )
    note = f"exact pe = {exact['pe']} = {exact['pe_float']:.8g}"
    if trials > 0:
        note += f"; MC estimate {summary['pe_mc']:.6g} over {trials} trials"
    return summary, tables, note


_COMMANDS = {
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "bounds": _cmd_bounds,
    "capacity-gap": _cmd_capacity_gap,
    "expurgate": _cmd_expurgate,
    "spectrum": _cmd_spectrum,
    "oracle": _cmd_oracle,
}


def _np_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def _write_outputs(command: str, out_dir: Path, fmt: str, summary, tables) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    stem = command.replace("-", "_")
    if fmt in ("json", "both"):
        payload = {
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "summary": summary,
            "tables": {k: v for k, v in tables.items() if k not in _CSV_ONLY},
        }
        path = out_dir / f"{stem}.json"
        path.write_text(
            json.dumps(payload, sort_keys=True, indent=2, default=_np_default) + "\n"
        )
        written.append(path)
    if fmt in ("csv", "both"):
        for name, tab in tables.items():
            path = out_dir / (f"{stem}.csv" if len(tables) == 1 else f"{stem}_{name}.csv")
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(tab["columns"])
                writer.writerows(tab["rows"])
            written.append(path)
    return written


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
        cfg = cfg.with_overrides(
            **{"campaign.seed": args.seed, "campaign.trials": args.trials}
        )
        summary, tables, note = _COMMANDS[args.command](cfg)
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except AssertionError as exc:
        print(f"runtime invariant violated: {exc}", file=sys.stderr)
        return 3
    written = _write_outputs(args.command, args.out, args.format, summary, tables)
    print(note)
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
