"""Batch command-line surface: synth, preprocess, train, forecast, evaluate.

Every command takes --config (JSON), with --seed and --out overriding the
file.  All randomness fans out from the single config seed, commands never
mutate their inputs, and reports carry no timestamps, so identical runs
produce byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import ar as ar_mod
from . import evaluation, hybrid, mlp, selection, stationarity, synthetic
from .clearsky import SolisParams
from .errors import ConfigError, SolarcastError
from .series import (
    SiteGeometry,
    clean_missing,
    clean_panel,
    load_series,
    split_train_test,
    write_series,
)

SCHEMA_VERSION = 1

ANN_VARIANTS = {
    # name -> (use periodic coefficients, use exogenous forecasts)
    "ann": (False, False),
    "ann_pc": (True, False),
    "ann_exo": (False, True),
    "ann_exo_pc": (True, True),
}
ALL_MODELS = ("persistence", "ar_pc", "ann", "ann_pc", "ann_exo", "ann_exo_pc", "hybrid")
_SEED_STRIDE = {"ann": 100, "ann_pc": 200, "ann_exo": 300, "ann_exo_pc": 400}

DEFAULTS = {
    "selection": {"threshold": 1.96},
    "ar": {"p_max": 5},
    "mlp": {
        "h_range": [2, 5],
        "max_epochs": 150,
        "mu0": 1e-3,
        "mu_dec": 0.1,
        "mu_inc": 10.0,
        "max_fail": 5,
        "train_fraction": 0.8,
        "ensemble": 5,
    },
    "models": list(ALL_MODELS),
}


def _expect(cfg, path, types, required=True, default=None):
    node = cfg
    parts = path.split(".")
    for i, key in enumerate(parts):
        if not isinstance(node, dict) or key not in node:
            if required:
                raise ConfigError("missing required field", path=".".join(parts[: i + 1]))
            return default
        node = node[key]
    if types is not None and not isinstance(node, types):
        raise ConfigError(
            f"expected {getattr(types, '__name__', types)}, got {type(node).__name__}",
            path=path,
        )
    return node


def load_config(path, seed=None, out=None):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("top-level config must be an object")
    version = _expect(cfg, "schema_version", int)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version}", path="schema_version")
    if seed is not None:
        cfg["seed"] = seed
    if out is not None:
        cfg["out"] = out
    _expect(cfg, "seed", int)
    _expect(cfg, "out", str)
    for section, defaults in DEFAULTS.items():
        if section == "models":
            cfg.setdefault("models", list(defaults))
            continue
        node = cfg.setdefault(section, {})
        if not isinstance(node, dict):
            raise ConfigError("expected object", path=section)
        for k, v in defaults.items():
            node.setdefault(k, v)
    for name in cfg["models"]:
        if name not in ALL_MODELS:
            raise ConfigError(f"unknown model {name!r}", path="models")
    return cfg


def _site(cfg):
    lat = _expect(cfg, "site.latitude", (int, float))
    lon = _expect(cfg, "site.longitude", (int, float))
    alt = _expect(cfg, "site.altitude", (int, float), required=False, default=0.0)
    return SiteGeometry(latitude=float(lat), longitude=float(lon), altitude=float(alt))


def _solis(cfg):
    node = cfg.get("solis", "fit")
    if node == "fit":
        return None
    tau = _expect(cfg, "solis.tau", (int, float))
    b = _expect(cfg, "solis.b", (int, float))
    return SolisParams(tau=float(tau), b=float(b))


def _trainer(cfg, seed):
    m = cfg["mlp"]
    return mlp.TrainerConfig(
        mu0=float(m["mu0"]),
        mu_dec=float(m["mu_dec"]),
        mu_inc=float(m["mu_inc"]),
        max_fail=int(m["max_fail"]),
        max_epochs=int(m["max_epochs"]),
        train_fraction=float(m["train_fraction"]),
        val_fraction=1.0 - float(m["train_fraction"]),
        seed=seed,
        ensemble_size=int(m["ensemble"]),
    )


def _load_data(cfg):
    path = _expect(cfg, "data.csv", str)
    ref = _expect(cfg, "data.time_reference", str, required=False, default="solar")
    series, panel = load_series(path, geo=_site(cfg), time_reference=ref)
    return clean_missing(series), clean_panel(panel)


def _json_dump(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------- synth


def cmd_synth(cfg):
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    kind = _expect(cfg, "synth.kind", str)
    years = _expect(cfg, "synth.years", int, required=False, default=6)
    site = _site(cfg)
    if kind == "radiation":
        series, panel = synthetic.gen_radiation(
            synthetic.SynthConfig(years=years, seed=cfg["seed"])
        )
    elif kind == "regime":
        series, panel, cloudy = synthetic.gen_regime_switch(
            synthetic.RegimeConfig(years=years, seed=cfg["seed"], site=site)
        )
        with open(out / "regimes.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["timestamp", "cloudy"])
            for ts, c in zip(series.timestamps(), cloudy):
                writer.writerow([ts.isoformat(), int(c)])
    else:
        raise ConfigError(f"unknown generator {kind!r}", path="synth.kind")
    write_series(out / "data.csv", series, panel)
    print(f"wrote {out / 'data.csv'} ({series.n_days} days, {series.n_years} years)")
    return 0


# ---------------------------------------------------------- preprocess


def cmd_preprocess(cfg):
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    series, panel = _load_data(cfg)
    pipeline = stationarity.fit_pipeline(series, _site(cfg), solis=_solis(cfg))
    csi = stationarity.to_csi(series, pipeline)
    star = stationarity.to_csi_star(series, pipeline)

    pipeline.table.write_csv(out / "periodic_table.csv")
    write_series(
        out / "derived.csv", series, panel, extra={"csi": csi.values, "csi_star": star.values}
    )

    report = {"schema_version": SCHEMA_VERSION, "solis": {"tau": pipeline.solis.tau, "b": pipeline.solis.b}}
    for name, s in (("raw", series), ("csi", csi), ("csi_star", star)):
        vc = stationarity.variation_coefficient(s)
        entry = {"vc": None if vc.undefined else vc.vc}
        for mode in ("daily", "yearly"):
            f = stationarity.fisher_test(s, mode)
            entry[f"fisher_{mode}"] = {
                "f_c": f.f_c,
                "f_limit": f.f_limit,
                "seasonal": f.seasonal,
            }
        report[name] = entry
    _json_dump(report, out / "stationarity_report.json")
    print(f"wrote {out / 'stationarity_report.json'}")
    for name in ("raw", "csi", "csi_star"):
        e = report[name]
        print(
            f"  {name:9s} VC={e['vc'] if e['vc'] is None else round(e['vc'], 3)} "
            f"F_yearly={e['fisher_yearly']['f_c']:.2f} "
            f"F_daily={e['fisher_daily']['f_c']:.2f}"
        )
    return 0


# --------------------------------------------------------------- train


def _fit_variant(name, train_series, panel_train, cfg, pipeline):
    """Selection mask + hidden-width-searched ensemble for one ANN variant."""
    use_pc, use_exo = ANN_VARIANTS[name]
    target = (
        stationarity.to_csi_star(train_series, pipeline)
        if use_pc
        else stationarity.to_csi(train_series, pipeline)
    )
    design = selection.build_design(target, panel_train, use_exogenous=use_exo)
    report = selection.fit_ols(design, threshold=float(cfg["selection"]["threshold"]))
    mask = report.mask
    x, y, _ = mlp.build_dataset(target, panel_train, mask, use_exogenous=use_exo)
    scale, offset = mlp.fit_input_affine(x)
    trainer = _trainer(cfg, cfg["seed"] + _SEED_STRIDE[name])
    h_lo, h_hi = cfg["mlp"]["h_range"]
    h_best, ensemble, info = mlp.search_hidden(
        x, y, mask, trainer, (h_lo, h_hi), scale, offset
    )
    return {
        "report": report,
        "ensemble": ensemble,
        "hidden": h_best,
        "use_pc": use_pc,
        "use_exo": use_exo,
        "scores": info["scores"],
        "traces": info["traces"],
    }


def _required_variants(models):
    wanted = [m for m in models if m in ANN_VARIANTS]
    if "hybrid" in models and "ann_exo_pc" not in wanted:
        wanted.append("ann_exo_pc")
    return wanted


def _member_dict(m):
    return {
        "w1": [[float(v) for v in row] for row in m.w1],
        "b1": [float(v) for v in m.b1],
        "w2": [float(v) for v in m.w2],
        "b2": float(m.b2),
    }


def _ensemble_dict(fit):
    e = fit["ensemble"]
    first = e.members[0]
    return {
        "hidden": fit["hidden"],
        "use_pc": fit["use_pc"],
        "use_exo": fit["use_exo"],
        "mask": [bool(v) for v in first.mask],
        "input_scale": [float(v) for v in first.input_scale],
        "input_offset": [float(v) for v in first.input_offset],
        "seeds": list(e.seeds),
        "search_scores": {str(k): float(v) for k, v in fit["scores"].items()},
        "members": [_member_dict(m) for m in e.members],
        "selection": json.loads(fit["report"].to_json(fit["use_exo"])),
    }


def _ensemble_from_dict(d):
    mask = np.asarray(d["mask"], dtype=bool)
    members = [
        mlp.MlpModel(
            w1=np.asarray(m["w1"], float),
            b1=np.asarray(m["b1"], float),
            w2=np.asarray(m["w2"], float),
            b2=float(m["b2"]),
            mask=mask,
            input_scale=np.asarray(d["input_scale"], float),
            input_offset=np.asarray(d["input_offset"], float),
        )
        for m in d["members"]
    ]
    return mlp.EnsembleModel(members=members, seeds=list(d["seeds"]))


def cmd_train(cfg):
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    series, panel = _load_data(cfg)
    train_years = _expect(cfg, "split.train_years", int)
    (train_s, train_p), _ = split_train_test(series, panel, train_years)

    pipeline = stationarity.fit_pipeline(train_s, _site(cfg), solis=_solis(cfg))
    star_train = stationarity.to_csi_star(train_s, pipeline)

    models = cfg["models"]
    payload = {
        "schema_version": SCHEMA_VERSION,
        "train_years": train_years,
        "solis": {"tau": pipeline.solis.tau, "b": pipeline.solis.b},
        "periodic_table": [float(v) for v in pipeline.table.coefficients],
        "table_years": pipeline.table.years_averaged,
    }

    if "ar_pc" in models or "hybrid" in models:
        order = ar_mod.choose_order(star_train, p_max=int(cfg["ar"]["p_max"]))
        arm = ar_mod.fit_yule_walker(star_train, order)
        payload["ar"] = json.loads(arm.to_json())
    else:
        arm = None

    fits = {}
    for name in _required_variants(models):
        fits[name] = _fit_variant(name, train_s, train_p, cfg, pipeline)
        payload.setdefault("ann", {})[name] = _ensemble_dict(fits[name])
        sel_path = out / f"selection_{name}.json"
        sel_path.write_text(fits[name]["report"].to_json(fits[name]["use_exo"]) + "\n")
        traces_dir = out / "traces"
        traces_dir.mkdir(exist_ok=True)
        for k, trace in enumerate(fits[name]["traces"]):
            with open(traces_dir / f"{name}_member{k}.csv", "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["epoch", "mu", "train_sse", "val_nrmse", "accepted"])
                for row in trace:
                    writer.writerow(
                        [row.epoch, repr(row.mu), repr(row.train_sse), repr(row.val_nrmse), int(row.accepted)]
                    )

    if "hybrid" in models:
        fit = fits["ann_exo_pc"]
        forecaster = hybrid.HybridForecaster(
            ar=arm,
            ann=fit["ensemble"],
            pipeline=pipeline,
            mask=fit["ensemble"].mask,
            use_exogenous=True,
        )
        residuals = hybrid.training_residuals(forecaster, star_train, train_p)
        table = hybrid.build_confidence(residuals, years=train_years)
        payload["confidence"] = [float(v) for v in table.ci_star]
        with open(out / "confidence.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["slot", "ci_star"])
            for i, v in enumerate(table.ci_star):
                writer.writerow([i, repr(float(v))])

    _json_dump(payload, out / "models.json")
    print(f"wrote {out / 'models.json'}")
    if arm is not None:
        print(f"  ar: p={arm.p} phi={[round(float(v), 4) for v in arm.phi]}")
    for name, fit in fits.items():
        print(
            f"  {name}: H={fit['hidden']} mask={fit['report'].architecture_string(fit['use_exo'])!r}"
        )
    return 0


# ----------------------------------------------------------- forecast


def _load_models(cfg):
    out = Path(cfg["out"])
    path = out / "models.json"
    if not path.exists():
        raise ConfigError(f"{path} not found; run the train command first")
    payload = json.loads(path.read_text())
    pipeline = stationarity.StationarityPipeline(
        solis=SolisParams(**payload["solis"]),
        geo=_site(cfg),
        table=stationarity.PeriodicTable(
            coefficients=np.asarray(payload["periodic_table"], float),
            years_averaged=int(payload["table_years"]),
        ),
    )
    arm = ar_mod.ArModel.from_dict(payload["ar"]) if "ar" in payload else None
    ensembles = {
        name: _ensemble_from_dict(d) for name, d in payload.get("ann", {}).items()
    }
    table = (
        hybrid.ConfidenceTable(
            ci_star=np.asarray(payload["confidence"], float),
            years=int(payload["train_years"]),
        )
        if "confidence" in payload
        else None
    )
    return payload, pipeline, arm, ensembles, table


def _test_start(series, train_years):
    (train_s, _), _ = split_train_test(series, None, train_years)
    return len(train_s)


def _hybrid_walk(cfg, series, panel, pipeline, arm, ensembles, table):
    star = stationarity.to_csi_star(series, pipeline)
    fit = ensembles["ann_exo_pc"]
    forecaster = hybrid.HybridForecaster(
        ar=arm, ann=fit, pipeline=pipeline, mask=fit.mask, use_exogenous=True
    )
    start = _test_start(series, _expect(cfg, "split.train_years", int))
    run = hybrid.run_hybrid(forecaster, star, panel, start - 1)
    factors = stationarity.scale_factors(pipeline, star)[run.target_idx]
    phys = run.forecast * factors
    half = (
        hybrid.interval_half_width(table, pipeline, star, run.target_idx)
        if table is not None
        else np.zeros_like(phys)
    )
    return run, phys, half, forecaster


def cmd_forecast(cfg):
    out = Path(cfg["out"])
    series, panel = _load_data(cfg)
    payload, pipeline, arm, ensembles, table = _load_models(cfg)
    if arm is None or "ann_exo_pc" not in ensembles:
        raise ConfigError("forecast needs the hybrid models; train with 'hybrid' enabled")
    run, phys, half, forecaster = _hybrid_walk(
        cfg, series, panel, pipeline, arm, ensembles, table
    )
    stamps = series.timestamps()
    with open(out / "forecast.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp", "forecast_whm2", "lower", "upper", "chosen_model"])
        for i, idx in enumerate(run.target_idx):
            writer.writerow(
                [
                    stamps[idx].isoformat(),
                    repr(float(phys[i])),
                    repr(float(phys[i] - half[i])),
                    repr(float(phys[i] + half[i])),
                    run.chosen[i],
                ]
            )
    a, b = forecaster.usage_ratio()
    print(f"wrote {out / 'forecast.csv'} ({len(run.target_idx)} hours, AR/ANN = {a}/{b})")
    return 0


# ----------------------------------------------------------- evaluate


def cmd_evaluate(cfg):
    out = Path(cfg["out"])
    series, panel = _load_data(cfg)
    payload, pipeline, arm, ensembles, table = _load_models(cfg)
    train_years = _expect(cfg, "split.train_years", int)
    start = _test_start(series, train_years)
    targets = np.arange(start, len(series))
    measured = series

    csi = stationarity.to_csi(series, pipeline)
    star = stationarity.to_csi_star(series, pipeline)
    hgh = np.maximum(pipeline.clear_sky(series), stationarity.GHI_FLOOR)
    star_factors = stationarity.scale_factors(pipeline, series)

    predictions = {}
    usage = None
    for name in cfg["models"]:
        if name == "persistence":
            predictions[name] = (series.values[targets - 1], targets)
        elif name == "ar_pc":
            if arm is None:
                raise ConfigError("ar_pc requested but no AR model was trained")
            pred = ar_mod.predict_series(arm, star, start) * star_factors[targets]
            predictions[name] = (pred, targets)
        elif name in ANN_VARIANTS:
            if name not in ensembles:
                raise ConfigError(f"{name} requested but not present in models.json")
            use_pc, use_exo = ANN_VARIANTS[name]
            base = star if use_pc else csi
            ens = ensembles[name]
            x, _, t_idx = mlp.build_dataset(base, panel, ens.mask, use_exogenous=use_exo)
            sel = t_idx >= start
            raw = ens.predict(x[sel])
            factor = star_factors if use_pc else hgh
            predictions[name] = (raw * factor[t_idx[sel]], t_idx[sel])
        elif name == "hybrid":
            if arm is None or "ann_exo_pc" not in ensembles:
                raise ConfigError("hybrid requested but its sub-models are missing")
            run, phys, _, forecaster = _hybrid_walk(
                cfg, series, panel, pipeline, arm, ensembles, table
            )
            predictions[name] = (phys, run.target_idx)
            usage = forecaster.usage_ratio()

    reports, best = evaluation.compare_models(measured, predictions)

    doc = {
        "schema_version": SCHEMA_VERSION,
        "n_test": int(targets.size),
        "models": {name: reports[name].as_dict() for name in predictions},
        "best": best,
    }
    if usage is not None:
        doc["hybrid_usage"] = {"ar": usage[0], "ann": usage[1]}
    _json_dump(doc, out / "report.json")

    with open(out / "report.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", "annual"] + list(evaluation.SEASONS))
        for name in predictions:
            r = reports[name]
            writer.writerow(
                [name, f"{r.nrmse_annual:.2f}"]
                + [f"{r.nrmse_by_season[s]:.2f}" for s in evaluation.SEASONS]
            )

    print(f"wrote {out / 'report.json'}")
    width = max(len(n) for n in predictions)
    for name in predictions:
        star_mark = " *" if best.get("annual") == name else ""
        print(f"  {name:<{width}s} annual nRMSE = {reports[name].nrmse_annual:6.2f}%{star_mark}")
    if usage is not None:
        print(f"  hybrid usage AR/ANN = {usage[0]}/{usage[1]}")
    return 0


# ------------------------------------------------------------------ main


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="solarcast",
        description="Next-hour global radiation forecasting pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (
        ("synth", cmd_synth),
        ("preprocess", cmd_preprocess),
        ("train", cmd_train),
        ("forecast", cmd_forecast),
        ("evaluate", cmd_evaluate),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the JSON run config")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=None, help="override the output directory")
        p.set_defaults(fn=fn)

    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, seed=args.seed, out=args.out)
        return args.fn(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SolarcastError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
