"""Command-line entry points.

`samplab run --config cfg.json` executes the full pipeline; the remaining
subcommands expose each stage standalone with explicit --in/--out paths.
Exit codes: 0 success, 2 config/usage error, 3 data error, 4 numerical
error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import debias, evaluate, geo, inference, metrics, preprocess, samplers, snowflake, tiler, worldgen
from .census import load_census
from .errors import (ConfigError, DataError, DegenerateSampleError,
                     SamplabError, SchemaError, SingularDesignError)
from .io import read_jsonl, to_ms, write_jsonl
from .pipeline import PipelineConfig, run_pipeline, write_report

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


def _load_config(args) -> PipelineConfig:
    return PipelineConfig.from_json(args.config, overrides=args.set or ())


def cmd_run(args):
    cfg = _load_config(args)
    bundle = run_pipeline(cfg)
    print(f"pipeline complete: {len(bundle.stages_run)} stages run, "
          f"{len(bundle.stages_skipped)} skipped, outputs in {bundle.out_dir}")


def cmd_gen_world(args):
    cfg = _load_config(args)
    table = load_census(cfg.census_path, include_dc=cfg.include_dc,
                        require_complete=cfg.census_complete)
    world = worldgen.build_world(table, cfg.inclusion, cfg.behavior,
                                 seed=cfg.seed, start=cfg.window[0])
    worldgen.write_world(args.out, world)
    print(f"wrote {len(world)} users to {args.out}")


def cmd_simulate(args):
    cfg = _load_config(args)
    world = worldgen.read_world(args.world)
    stream = worldgen.simulate_month(world, cfg.window, seed=cfg.seed,
                                     behavior=cfg.behavior)
    worldgen.write_stream(args.out, stream)
    print(f"wrote {len(stream)} tweets to {args.out}")


def cmd_tile(args):
    if args.polygon:
        rings = tiler.load_polygon_file(args.polygon)
        polygon_id = args.polygon
    else:
        rings = [geo.continental_outline()]
        polygon_id = "us_continental_v1"
    tiles = tiler.tile_polygon(rings, args.spacing, shift=args.shift,
                               polygon_id=polygon_id)
    tiler.write_tiles_csv(tiles, args.out)
    print(f"wrote {len(tiles)} boxes to {args.out}")


def cmd_sample(args):
    cfg = _load_config(args)
    window = (to_ms(cfg.window[0]), to_ms(cfg.window[1]))
    stream = worldgen.read_stream(args.stream, window=window)
    if args.method == samplers.METHOD_STREAM:
        s = samplers.sample_stream(stream, mode=cfg.stream_mode, rate=cfg.stream_rate,
                                   window_ms=cfg.stream_window_ms,
                                   country=cfg.country, seed=cfg.seed)
    elif args.method == samplers.METHOD_LOC:
        s = samplers.sample_location_query(stream, cfg.country)
    elif args.method == samplers.METHOD_LANG:
        s = samplers.sample_language_query(stream, cfg.country, cfg.language)
    elif args.method == samplers.METHOD_BB:
        if not args.tiles:
            raise ConfigError("--tiles is required for the bb method")
        tiles = tiler.read_tiles_csv(args.tiles, cfg.tile_spacing)
        s = samplers.sample_bounding_box(stream, tiles,
                                         place_fallback=cfg.bb_place_fallback,
                                         country=cfg.country)
    else:
        raise ConfigError(f"unknown method {args.method!r}")
    samplers.write_sample_set(args.out_ids, args.out_summary, s)
    print(f"{args.method}: {len(s)} tweets, {s.n_authors} authors")


def _users_from_ids(world_path, ids_path):
    by_id = {u.user_id: u for u in worldgen.read_world(world_path)}
    return [by_id[uid] for uid in samplers.read_user_ids(ids_path)]


def cmd_preprocess(args):
    cfg = _load_config(args)
    users = _users_from_ids(args.world, args.users)
    retained, report = preprocess.apply_filters(users, cfg.filters,
                                                as_of=cfg.window[0], seed=cfg.seed)
    with open(args.out, "w", encoding="utf-8") as fh:
        for u in retained:
            fh.write(f"{u.user_id}\n")
    preprocess.write_removal_csv(args.out_report, {args.method or "sample": report})
    print(f"retained {len(retained)} of {len(users)} users")


def cmd_infer(args):
    cfg = _load_config(args)
    users = _users_from_ids(args.world, args.users)
    labeled = inference.infer_all(users, cfg.confusion, seed=cfg.seed)
    write_jsonl(args.out, "samplab.labeled", 1,
                (inference.labeled_to_dict(l) for l in labeled))
    print(f"labeled {len(labeled)} users")


def _read_labeled(path):
    return [inference.labeled_from_dict(d)
            for d in read_jsonl(path, "samplab.labeled", 1)]


def cmd_debias(args):
    cfg = _load_config(args)
    labeled = [l for l in inference.drop_org_labeled(_read_labeled(args.labeled))
               if l.state is not None]
    table_census = load_census(cfg.census_path, include_dc=cfg.include_dc,
                               require_complete=cfg.census_complete)
    table = debias.build_design(labeled, table_census, level=args.level,
                                zero_row_policy=args.zero_row_policy)
    debias.write_design_csv(args.out, table)
    print(f"design table: {len(table.rows)} rows "
          f"({table.dropped_rows} of {table.candidate_rows} dropped)")
    if args.fit:
        model = debias.fit_model(table, args.fit)
        model.to_json(args.out_model or args.out + f".{args.fit}.json")
        print(f"fitted {args.fit}: {model.coefficients}")


def cmd_evaluate(args):
    cfg = _load_config(args)
    labeled = [l for l in inference.drop_org_labeled(_read_labeled(args.labeled))
               if l.state is not None]
    census_table = load_census(cfg.census_path, include_dc=cfg.include_dc,
                               require_complete=cfg.census_complete)
    variant = args.variant or evaluate.VARIANT_MAIN
    level = geo.DIVISION_LEVEL if variant == evaluate.VARIANT_DIVISION else geo.STATE_LEVEL
    policy = (debias.POLICY_DROP_STATES if variant == evaluate.VARIANT_DROP_MISSING
              else debias.POLICY_DROP)
    include_dc = variant == evaluate.VARIANT_INCLUDE_DC
    table = debias.build_design(labeled, census_table.with_dc(include_dc),
                                level=level, zero_row_policy=policy)
    reports = [evaluate.loso_cv(table, spec, method=args.method or "", variant=variant)
               for spec in cfg.models]
    evaluate.write_reports_csv(args.out, reports)
    for rep in reports:
        print(f"{rep.spec}: mape {rep.mape:.2f}% (se {rep.se:.2f}) over "
              f"{rep.n_units()} units")


def cmd_metrics(args):
    cfg = _load_config(args)
    window = (to_ms(cfg.window[0]), to_ms(cfg.window[1]))
    stream = worldgen.read_stream(args.stream, window=window)
    import numpy as np
    ids = np.loadtxt(args.sample_ids, skiprows=1, dtype=np.uint64, ndmin=1)
    sub = stream.select(np.isin(stream.ids, ids))
    sample = samplers.SampleSet(method=args.method, tweets=sub.ids.copy(),
                                authors=np.unique(sub.author),
                                collection_window=window, captured=sub)
    labeled = _read_labeled(args.labeled)
    table = metrics.summarize(sample, labeled, as_of=cfg.window[1])
    metrics.write_metric_csv(args.out, table)
    print(f"metrics for {args.method}: {table.tweet_count} tweets, "
          f"{table.unique_accounts} accounts")


def cmd_snowflake(args):
    world = worldgen.read_world(args.world)
    lo, hi = (to_ms(x) for x in args.time_range.split(","))
    sampler = snowflake.RandomIdSampler()
    batches = [sampler.candidate_batch(args.seed + i, (lo, hi))
               for i in range(args.batches)]
    snowflake.write_batches(args.out_ids, args.out_sidecar, batches)
    estimate = snowflake.estimate_hit_rate(batches, snowflake.world_oracle(world))
    with open(args.out_estimate, "w", encoding="utf-8") as fh:
        json.dump({
            "n_generated": estimate.n_generated,
            "n_valid": estimate.n_valid,
            "n_valid_in_country": estimate.n_valid_in_country,
            "hit_rate": estimate.hit_rate,
            "country_rate": estimate.country_rate,
            "hit_rate_ci": list(estimate.hit_rate_ci),
            "country_rate_ci": list(estimate.country_rate_ci),
        }, fh, sort_keys=True, indent=1)
        fh.write("\n")
    print(f"hit rate {estimate.hit_rate:.6f}, in-country {estimate.country_rate:.6f}")


def cmd_report(args):
    report = write_report(args.out_dir, args.out)
    print(f"report for {report['n_stages']} stages written to {args.out}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="samplab",
        description="Sampling-bias laboratory over a synthetic platform",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("--config", required=True, help="pipeline config JSON")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config key (dotted path, JSON value)")

    p = sub.add_parser("run", help="run the full pipeline")
    add_config(p)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("gen-world", help="generate the synthetic user universe")
    add_config(p)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_gen_world)

    p = sub.add_parser("simulate", help="simulate the tweet stream")
    add_config(p)
    p.add_argument("--world", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("tile", help="build the bounding-box grid")
    p.add_argument("--polygon", help="polygon JSON; omit for the built-in US outline")
    p.add_argument("--spacing", type=float, default=0.3)
    p.add_argument("--shift", choices=[tiler.SHIFT_HALF, tiler.SHIFT_FULL],
                   default=tiler.SHIFT_HALF)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_tile)

    p = sub.add_parser("sample", help="run one sampling method over a stream")
    add_config(p)
    p.add_argument("--stream", required=True)
    p.add_argument("--method", required=True, choices=samplers.METHODS)
    p.add_argument("--tiles", help="tiles CSV (bb method)")
    p.add_argument("--out-ids", required=True)
    p.add_argument("--out-summary", required=True)
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("preprocess", help="apply the filter cascade to drawn users")
    add_config(p)
    p.add_argument("--world", required=True)
    p.add_argument("--users", required=True, help="one user id per line")
    p.add_argument("--method", help="method name for the report column")
    p.add_argument("--out", required=True)
    p.add_argument("--out-report", required=True)
    p.set_defaults(fn=cmd_preprocess)

    p = sub.add_parser("infer", help="draw observed demographic labels")
    add_config(p)
    p.add_argument("--world", required=True)
    p.add_argument("--users", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_infer)

    p = sub.add_parser("debias", help="build a design table (and optionally fit)")
    add_config(p)
    p.add_argument("--labeled", required=True)
    p.add_argument("--level", default=geo.STATE_LEVEL, choices=geo.LEVELS)
    p.add_argument("--zero-row-policy", default=debias.POLICY_DROP,
                   choices=debias.ZERO_ROW_POLICIES)
    p.add_argument("--fit", choices=debias.MODEL_SPECS)
    p.add_argument("--out", required=True)
    p.add_argument("--out-model")
    p.set_defaults(fn=cmd_debias)

    p = sub.add_parser("evaluate", help="leave-one-unit-out evaluation")
    add_config(p)
    p.add_argument("--labeled", required=True)
    p.add_argument("--method", help="method name recorded in the report")
    p.add_argument("--variant", choices=(evaluate.VARIANT_MAIN,) + evaluate.VARIANTS)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("metrics", help="descriptive statistics for one sample")
    add_config(p)
    p.add_argument("--stream", required=True)
    p.add_argument("--sample-ids", required=True)
    p.add_argument("--labeled", required=True)
    p.add_argument("--method", required=True, choices=samplers.METHODS)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_metrics)

    p = sub.add_parser("snowflake", help="random-id probing against a world")
    p.add_argument("--world", required=True)
    p.add_argument("--batches", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--time-range", required=True,
                   help="start,end (ISO dates or epoch ms)")
    p.add_argument("--out-ids", required=True)
    p.add_argument("--out-sidecar", required=True)
    p.add_argument("--out-estimate", required=True)
    p.set_defaults(fn=cmd_snowflake)

    p = sub.add_parser("report", help="summarize a finished pipeline run")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SchemaError, DataError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (SingularDesignError, DegenerateSampleError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except SamplabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
