"""Batch command-line front end.

Exit codes: 0 success, 1 runtime error (JSON error object on stderr), 2 usage
error. ``CO2LSTM_LOG_LEVEL`` (e.g. ``INFO``, ``DEBUG``) sets log verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import pipeline as pl
from . import svg
from .config import PipelineConfig, load_config, with_data
from .energy import energy_report, format_report_table, load_systems_csv, load_systems_json
from .errors import Co2LstmError
from .ingest import to_canonical_csv

log = logging.getLogger("co2lstm")


def _provenance(cfg: PipelineConfig, seed: int | None = None) -> dict:
    return {"config_hash": cfg.hash(), "seed": cfg.seed if seed is None else seed}


def _config(args) -> PipelineConfig:
    cfg = load_config(args.config, args.set or ())
    if getattr(args, "data", None):
        cfg = with_data(cfg, os.path.abspath(args.data))
    return cfg


def cmd_ingest(cfg, out) -> dict:
    ds = pl.load_dataset(cfg)
    path = pl.write_text(os.path.join(out, "canonical.csv"), to_canonical_csv(ds))
    summary = {
        **_provenance(cfg),
        "source": cfg.data,
        "records": len(ds),
        "regions": {r: [s.value for s in ds.sectors(r)] for r in ds.regions},
    }
    with open(path, "rb") as fh:
        summary["canonical_sha256"] = pl.sha256_bytes(fh.read())
    pl.write_json(os.path.join(out, "ingest.json"), summary)
    return summary


def cmd_clean(cfg, out, ds=None) -> dict:
    ds = pl.load_dataset(cfg) if ds is None else ds
    result = {}
    for region, sector in pl.selected_pairs(cfg, ds):
        cs = pl.clean_pair(ds, region, sector, cfg)
        pl.write_clean(out, region, sector, cs)
        result[f"{region} / {sector.value}"] = {
            "flagged_dates": [cs.raw.dates[i].isoformat() for i in cs.flagged],
            "n_raw": len(cs.raw),
            "n_smoothed": len(cs.smoothed),
        }
    summary = {**_provenance(cfg), "zscore_threshold": cfg.zscore_threshold, "ma_window": cfg.ma_window,
               "series": result}
    pl.write_json(os.path.join(out, "clean", "summary.json"), summary)
    return summary


def cmd_pca(cfg, out, ds=None) -> dict:
    ds = pl.load_dataset(cfg) if ds is None else ds
    regions = {}
    for region in pl.selected_regions(cfg, ds):
        res = pl.run_pca(ds, region, cfg)
        regions[region] = res.to_dict(k=cfg.pca_k)
        pl.write_text(
            os.path.join(out, "pca", pl.slug(region) + ".svg"),
            svg.bar_chart(
                [f"PC{j + 1} {res.sector_attribution[j]}" for j in range(len(res.labels))],
                res.explained_ratio,
                title=f"Explained variance ratio: {region}",
                ylabel="explained variance ratio",
                meta=_provenance(cfg),
            ),
        )
    report = {**_provenance(cfg), "mode": cfg.pca_mode, "k": cfg.pca_k, "regions": regions}
    pl.write_json(os.path.join(out, "pca", "pca.json"), report)
    return report


def cmd_train(cfg, out, ds=None) -> dict:
    ds = pl.load_dataset(cfg) if ds is None else ds
    pairs = pl.selected_pairs(cfg, ds)
    summary = {}
    for res in pl.train_all(ds, pairs, cfg):
        pl.write_train(out, res, _provenance(cfg, res.checkpoint.meta["seed"]))
        summary[f"{res.region} / {res.sector.value}"] = {
            "final_train_loss": res.history.train_loss[-1] if len(res.history) else None,
            "final_val_loss": res.history.val_loss[-1] if len(res.history) else None,
            "epochs": len(res.history),
            "train_samples": len(res.prepared.train),
            "test_samples": len(res.prepared.test),
            "seed": res.checkpoint.meta["seed"],
        }
    pl.write_json(os.path.join(out, "train", "summary.json"), {**_provenance(cfg), "pairs": summary})
    return summary


def cmd_evaluate(cfg, out, ds=None) -> dict:
    ds = pl.load_dataset(cfg) if ds is None else ds
    rows = {}
    for region, sector in pl.selected_pairs(cfg, ds):
        ck = pl.read_checkpoint_for(out, region, sector)
        smoothed = pl.clean_pair(ds, region, sector, cfg).smoothed
        prepared = pl.prepare_series(smoothed, cfg.seq_len, cfg.train_fraction)
        ev = pl.evaluate_prepared(ck, prepared)
        name = pl.pair_name(region, sector)
        lines = ["date,actual,predicted"]
        lines += [f"{d.isoformat()},{a!r},{p!r}" for d, a, p in zip(ev["dates"], ev["actual"], ev["predicted"])]
        pl.write_text(os.path.join(out, "evaluate", name + ".predictions.csv"), "\n".join(lines) + "\n")
        xs = list(range(len(prepared.scaled)))
        first = len(xs) - len(ev["predicted"])
        pl.write_text(
            os.path.join(out, "evaluate", name + ".svg"),
            svg.line_chart(
                {"actual": (xs, prepared.scaled.tolist()),
                 "test prediction": (xs[first:], ev["predicted"].tolist())},
                title=f"{region} / {sector.value} (scaled)",
                meta=_provenance(cfg, ck.meta.get("seed")),
            ),
        )
        rows[f"{region} / {sector.value}"] = {
            "scaled": ev["scaled"].to_dict(),
            "original": ev["original"].to_dict(),
            "config": ck.config,
        }
    report = {**_provenance(cfg), "metrics": rows}
    pl.write_json(os.path.join(out, "evaluate", "metrics.json"), report)
    return report


def cmd_forecast(cfg, out, ds=None) -> dict:
    ds = pl.load_dataset(cfg) if ds is None else ds
    result = {}
    for region, sector in pl.selected_pairs(cfg, ds):
        ck = pl.read_checkpoint_for(out, region, sector)
        smoothed = pl.clean_pair(ds, region, sector, cfg).smoothed
        dates, scaled, original = pl.forecast(ck, smoothed, cfg.horizon)
        lines = ["date,value,scaled"]
        lines += [f"{d.isoformat()},{v:.6f},{s!r}" for d, v, s in zip(dates, original, scaled)]
        path = pl.write_text(
            os.path.join(out, "forecast", pl.pair_name(region, sector) + ".forecast.csv"), "\n".join(lines) + "\n"
        )
        result[f"{region} / {sector.value}"] = {"path": os.path.relpath(path, out), "first": dates[0].isoformat(),
                                                "last": dates[-1].isoformat()}
    summary = {**_provenance(cfg), "horizon": cfg.horizon, "forecasts": result}
    pl.write_json(os.path.join(out, "forecast", "summary.json"), summary)
    return summary


def cmd_energy(input_path: str, out: str | None) -> dict:
    with open(input_path, encoding="utf-8") as fh:
        text = fh.read()
    if input_path.lower().endswith(".csv"):
        systems = load_systems_csv(text)
    else:
        systems = load_systems_json(text)
    report = energy_report(systems)
    if out:
        pl.write_json(os.path.join(out, "energy", "energy.json"), report)
    return report


def _manifest(out: str) -> dict:
    files = {}
    for root, _, names in os.walk(out):
        for name in sorted(names):
            path = os.path.join(root, name)
            rel = os.path.relpath(path, out).replace(os.sep, "/")
            if rel in ("report.json", "manifest.json"):
                continue
            with open(path, "rb") as fh:
                files[rel] = pl.sha256_bytes(fh.read())
    return dict(sorted(files.items()))


def cmd_report(cfg, out) -> dict:
    ds = pl.load_dataset(cfg)
    bundle = {**_provenance(cfg), "config": cfg.to_dict()}
    bundle["ingest"] = cmd_ingest(cfg, out)
    bundle["clean"] = cmd_clean(cfg, out, ds)
    bundle["pca"] = cmd_pca(cfg, out, ds)
    bundle["train"] = cmd_train(cfg, out, ds)
    bundle["evaluate"] = cmd_evaluate(cfg, out, ds)
    bundle["forecast"] = cmd_forecast(cfg, out, ds)
    if cfg.energy_input:
        bundle["energy"] = cmd_energy(cfg.energy_input, out)
    bundle["artifacts"] = _manifest(out)
    pl.write_json(os.path.join(out, "manifest.json"), {**_provenance(cfg), "artifacts": bundle["artifacts"]})
    pl.write_json(os.path.join(out, "report.json"), bundle)
    return bundle


PIPELINE_COMMANDS = {
    "ingest": (cmd_ingest, "validate and canonicalise the emissions CSV"),
    "clean": (cmd_clean, "z-score outlier replacement and moving-average smoothing"),
    "pca": (cmd_pca, "per-region PCA report (JSON + SVG)"),
    "train": (cmd_train, "train one LSTM per region/sector; checkpoints and loss history"),
    "forecast": (cmd_forecast, "closed-loop forecasts from saved checkpoints"),
    "evaluate": (cmd_evaluate, "test-set MSE/RMSE/MAE/R^2 from saved checkpoints"),
    "report": (cmd_report, "run the whole pipeline and bundle every report"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="co2lstm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    for name, (_, help_text) in PIPELINE_COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("-c", "--config", help="pipeline config file")
        p.add_argument("--data", help="emissions CSV (overrides the config)")
        p.add_argument("-o", "--out", default="co2lstm-out", help="output directory (default: %(default)s)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config key; 'Region / Sector.key=value' targets one pair")
    p = sub.add_parser("energy", help="cohesive/binding energy report from a JSON or CSV input")
    p.add_argument("input", help="energies file (.json or .csv)")
    p.add_argument("-o", "--out", help="also write energy/energy.json below this directory")
    return parser


def _setup_logging() -> None:
    level = os.environ.get("CO2LSTM_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    _setup_logging()
    try:
        if args.command == "energy":
            report = cmd_energy(args.input, args.out)
            print(format_report_table(report))
            return 0
        cfg = _config(args)
        func = PIPELINE_COMMANDS[args.command][0]
        result = func(cfg, args.out)
        if args.command in ("ingest", "pca", "evaluate"):
            print(json.dumps(result, indent=2, sort_keys=True))
        else:
            print(f"{args.command}: artifacts written to {args.out}")
        return 0
    except Co2LstmError as exc:
        print(json.dumps(exc.to_dict()), file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
