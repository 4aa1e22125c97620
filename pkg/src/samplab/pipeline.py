"""End-to-end pipeline: world -> stream -> samplers -> draws -> filters ->
inference -> design tables -> evaluation -> metrics, with every stage
persisted, content-addressed, and resumable.

A stage re-runs only when its config subsection or any input artifact
changed (keys are sha256 over both); reruns with identical config and
inputs are skipped, and artifacts are byte-stable.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import debias, evaluate, geo, inference, metrics, preprocess, samplers, tiler, worldgen
from .census import PopulationTable, load_census, write_census
from .errors import ConfigError, DataError
from .io import canonical_json, sha256_file, sha256_text, to_ms

STAGE_VERSION = 1
LOCK_NAME = ".samplab.lock"
MANIFEST_NAME = "manifest.json"


@dataclass
class PipelineConfig:
    seed: int
    out_dir: str
    census_path: str
    include_dc: bool = False
    census_complete: bool = True
    inclusion: worldgen.InclusionDesign = field(default_factory=worldgen.InclusionDesign)
    behavior: worldgen.BehaviorConfig = field(default_factory=worldgen.BehaviorConfig)
    window: tuple = ("2022-09-07", "2022-10-08")
    tile_polygon: str | None = None     # None -> built-in continental outline
    tile_spacing: float = 0.3
    tile_shift: str = tiler.SHIFT_HALF
    stream_mode: str = "ms_window"
    stream_rate: float = 0.01
    stream_window_ms: tuple = samplers.MS_WINDOW_DEFAULT
    country: str = "US"
    language: str = "en"
    bb_place_fallback: bool = False
    n_initial: int = 30000
    n_final: int = 10000
    filters: preprocess.FilterConfig = None
    confusion: inference.ConfusionSpec = None
    models: tuple = debias.MODEL_SPECS
    variants: tuple = ()
    metric_names: tuple = ("lifetime_tweets", "tweets_per_day", "followers", "friends")

    def __post_init__(self):
        if self.filters is None:
            self.filters = preprocess.FilterConfig(
                require_language=self.language, require_country=self.country
            )
        if self.confusion is None:
            self.confusion = inference.ConfusionSpec.identity()
        for m in self.models:
            if m not in debias.MODEL_SPECS:
                raise ConfigError(f"unknown model spec {m!r}")
        for v in self.variants:
            if v not in evaluate.VARIANTS:
                raise ConfigError(f"unknown variant {v!r}")
        if not os.path.exists(self.census_path):
            raise ConfigError(f"census file not found: {self.census_path}")
        if self.tile_polygon is not None and not os.path.exists(self.tile_polygon):
            raise ConfigError(f"polygon file not found: {self.tile_polygon}")

    # -- config (de)serialization ------------------------------------------

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "out_dir": self.out_dir,
            "census": {"path": self.census_path, "include_dc": self.include_dc,
                       "require_complete": self.census_complete},
            "inclusion": self.inclusion.to_dict(),
            "behavior": self.behavior.to_dict(),
            "window": list(self.window),
            "tiles": {"polygon": self.tile_polygon, "spacing_deg": self.tile_spacing,
                      "shift": self.tile_shift},
            "stream": {"mode": self.stream_mode, "rate": self.stream_rate,
                       "window_ms": list(self.stream_window_ms)},
            "country": self.country,
            "language": self.language,
            "bb_place_fallback": self.bb_place_fallback,
            "draw": {"initial": self.n_initial, "final": self.n_final},
            "filters": self.filters.to_dict(),
            "confusion": self.confusion.to_dict(),
            "models": list(self.models),
            "variants": list(self.variants),
            "metrics": list(self.metric_names),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        census_d = d.get("census", {})
        filters_d = d.get("filters")
        confusion_d = d.get("confusion")
        if confusion_d == "identity":
            confusion_d = None
        return cls(
            seed=int(d["seed"]),
            out_dir=d["out_dir"],
            census_path=census_d["path"],
            include_dc=bool(census_d.get("include_dc", False)),
            census_complete=bool(census_d.get("require_complete", True)),
            inclusion=worldgen.InclusionDesign.from_dict(d.get("inclusion", {})),
            behavior=worldgen.BehaviorConfig.from_dict(d.get("behavior", {})),
            window=tuple(d.get("window", ("2022-09-07", "2022-10-08"))),
            tile_polygon=d.get("tiles", {}).get("polygon"),
            tile_spacing=float(d.get("tiles", {}).get("spacing_deg", 0.3)),
            tile_shift=d.get("tiles", {}).get("shift", tiler.SHIFT_HALF),
            stream_mode=d.get("stream", {}).get("mode", "ms_window"),
            stream_rate=float(d.get("stream", {}).get("rate", 0.01)),
            stream_window_ms=tuple(d.get("stream", {}).get("window_ms",
                                                           samplers.MS_WINDOW_DEFAULT)),
            country=d.get("country", "US"),
            language=d.get("language", "en"),
            bb_place_fallback=bool(d.get("bb_place_fallback", False)),
            n_initial=int(d.get("draw", {}).get("initial", 30000)),
            n_final=int(d.get("draw", {}).get("final", 10000)),
            filters=(preprocess.FilterConfig.from_dict(filters_d)
                     if filters_d else None),
            confusion=(inference.ConfusionSpec.from_dict(confusion_d)
                       if confusion_d else None),
            models=tuple(d.get("models", debias.MODEL_SPECS)),
            variants=tuple(d.get("variants", ())),
            metric_names=tuple(d.get("metrics", ("lifetime_tweets", "tweets_per_day",
                                                 "followers", "friends"))),
        )

    @classmethod
    def from_json(cls, path, overrides=()) -> "PipelineConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                d = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}")
        for item in overrides:
            if "=" not in item:
                raise ConfigError(f"--set expects key=value, got {item!r}")
            key, _, raw = item.partition("=")
            try:
                value = json.loads(raw)
            except json.JSONDecodeError:
                value = raw
            node = d
            parts = key.split(".")
            for part in parts[:-1]:
                node = node.setdefault(part, {})
            node[parts[-1]] = value
        return cls.from_dict(d)


class _Manifest:
    def __init__(self, path):
        self.path = path
        if os.path.exists(path):
            with open(path, encoding="utf-8") as fh:
                self.data = json.load(fh)
        else:
            self.data = {"stages": {}}

    def key_of(self, stage: str):
        return self.data["stages"].get(stage, {}).get("key")

    def outputs_of(self, stage: str):
        return self.data["stages"].get(stage, {}).get("outputs", [])

    def record(self, stage: str, key: str, outputs, extra=None):
        # Basenames only: manifests stay byte-identical across output dirs.
        entry = {"key": key,
                 "outputs": sorted(os.path.basename(p) for p in outputs),
                 "output_hashes": {os.path.basename(p): sha256_file(p)
                                   for p in sorted(outputs)}}
        if extra:
            entry.update(extra)
        self.data["stages"][stage] = entry

    def save(self):
        with open(self.path, "w", encoding="utf-8") as fh:
            json.dump(self.data, fh, sort_keys=True, indent=1)
            fh.write("\n")


@dataclass
class ReportBundle:
    out_dir: str
    manifest_path: str
    artifacts: dict            # stage -> [paths]
    stages_run: list
    stages_skipped: list


class Pipeline:
    def __init__(self, config: PipelineConfig):
        self.cfg = config
        self.out = config.out_dir
        os.makedirs(self.out, exist_ok=True)
        self.manifest = _Manifest(os.path.join(self.out, MANIFEST_NAME))
        self.stages_run = []
        self.stages_skipped = []
        self._cache = {}

    # -- stage plumbing -----------------------------------------------------

    def _path(self, name: str) -> str:
        return os.path.join(self.out, name)

    def _stage(self, name: str, subconfig, inputs, outputs, fn):
        """Run `fn` unless key(subconfig, input hashes) matches the manifest
        and all outputs exist."""
        parts = [f"v{STAGE_VERSION}", canonical_json(subconfig)]
        for p in inputs:
            parts.append(sha256_file(p))
        key = sha256_text("|".join(parts))
        out_paths = [self._path(o) for o in outputs]
        if self.manifest.key_of(name) == key and all(os.path.exists(p) for p in out_paths):
            self.stages_skipped.append(name)
            return out_paths
        try:
            fn(*out_paths)
        except Exception as exc:
            raise type(exc)(
                f"stage {name} failed (inputs: {', '.join(inputs) or 'none'}; "
                f"rerun: samplab run --config <config> ): {exc}"
            ) from exc
        self.manifest.record(name, key, out_paths)
        self.manifest.save()
        self.stages_run.append(name)
        return out_paths

    # -- cached loads of intermediate artifacts ------------------------------

    def _census(self, path) -> PopulationTable:
        if "census" not in self._cache:
            self._cache["census"] = load_census(
                path, include_dc=self.cfg.include_dc,
                require_complete=self.cfg.census_complete,
            )
        return self._cache["census"]

    def _world(self, path):
        if "world" not in self._cache:
            self._cache["world"] = worldgen.read_world(path)
        return self._cache["world"]

    def _stream(self, path):
        if "stream" not in self._cache:
            self._cache["stream"] = worldgen.read_stream(
                path, window=(to_ms(self.cfg.window[0]), to_ms(self.cfg.window[1]))
            )
        return self._cache["stream"]

    def _users_by_id(self, world_path):
        if "by_id" not in self._cache:
            self._cache["by_id"] = {u.user_id: u for u in self._world(world_path)}
        return self._cache["by_id"]

    # -- run -----------------------------------------------------------------

    def run(self) -> ReportBundle:
        cfg = self.cfg
        lock = self._path(LOCK_NAME)
        if os.path.exists(lock):
            raise ConfigError(f"output directory is locked by another run: {lock}")
        with open(lock, "w") as fh:
            fh.write(str(os.getpid()))
        try:
            return self._run_locked()
        finally:
            os.unlink(lock)

    def _run_config_hash(self) -> str:
        # Identify the run by its parameters and input contents, not by
        # where outputs land or inputs live on disk.
        d = self.cfg.to_dict()
        d.pop("out_dir", None)
        d["census"]["path"] = sha256_file(self.cfg.census_path)
        if self.cfg.tile_polygon:
            d["tiles"]["polygon"] = sha256_file(self.cfg.tile_polygon)
        return sha256_text(canonical_json(d))

    def _run_locked(self) -> ReportBundle:
        cfg = self.cfg
        artifacts = {}
        self.manifest.data["config_hash"] = self._run_config_hash()

        [census_art] = self._stage(
            "census",
            {"include_dc": cfg.include_dc, "complete": cfg.census_complete},
            [cfg.census_path], ["census.csv"],
            lambda out: write_census(self._census(cfg.census_path), out),
        )
        artifacts["census"] = [census_art]

        def gen_world(out):
            world = worldgen.build_world(
                self._census(cfg.census_path), cfg.inclusion, cfg.behavior,
                seed=cfg.seed, start=cfg.window[0],
            )
            worldgen.write_world(out, world)
            self._cache["world"] = world

        [world_art] = self._stage(
            "world",
            {"inclusion": cfg.inclusion.to_dict(), "behavior": cfg.behavior.to_dict(),
             "seed": cfg.seed, "start": cfg.window[0]},
            [census_art], ["world.jsonl"], gen_world,
        )
        artifacts["world"] = [world_art]

        def gen_stream(out):
            stream = worldgen.simulate_month(
                self._world(world_art), cfg.window, seed=cfg.seed, behavior=cfg.behavior,
            )
            worldgen.write_stream(out, stream)
            self._cache["stream"] = stream

        [stream_art] = self._stage(
            "stream",
            {"window": list(cfg.window), "seed": cfg.seed,
             "behavior": cfg.behavior.to_dict()},
            [world_art], ["stream.jsonl"], gen_stream,
        )
        artifacts["stream"] = [stream_art]

        def gen_tiles(out):
            if cfg.tile_polygon:
                rings = tiler.load_polygon_file(cfg.tile_polygon)
                polygon_id = os.path.basename(cfg.tile_polygon)
            else:
                rings = [geo.continental_outline()]
                polygon_id = "us_continental_v1"
            tiles = tiler.tile_polygon(rings, cfg.tile_spacing, shift=cfg.tile_shift,
                                       polygon_id=polygon_id)
            tiler.write_tiles_csv(tiles, out)
            self._cache["tiles"] = tiles

        tile_inputs = [cfg.tile_polygon] if cfg.tile_polygon else []
        [tiles_art] = self._stage(
            "tiles",
            {"spacing": cfg.tile_spacing, "shift": cfg.tile_shift,
             "builtin": cfg.tile_polygon is None},
            tile_inputs, ["tiles.csv"], gen_tiles,
        )
        artifacts["tiles"] = [tiles_art]

        def tiles_obj():
            if "tiles" not in self._cache:
                self._cache["tiles"] = tiler.read_tiles_csv(
                    tiles_art, cfg.tile_spacing, polygon_id="cached")
            return self._cache["tiles"]

        def make_sampler(method):
            def run_sampler(ids_out, summary_out):
                stream = self._stream(stream_art)
                if method == samplers.METHOD_STREAM:
                    s = samplers.sample_stream(
                        stream, mode=cfg.stream_mode, rate=cfg.stream_rate,
                        window_ms=cfg.stream_window_ms, country=cfg.country,
                        seed=cfg.seed,
                    )
                elif method == samplers.METHOD_LOC:
                    s = samplers.sample_location_query(stream, cfg.country)
                elif method == samplers.METHOD_LANG:
                    s = samplers.sample_language_query(stream, cfg.country, cfg.language)
                else:
                    s = samplers.sample_bounding_box(
                        stream, tiles_obj(), place_fallback=cfg.bb_place_fallback,
                        country=cfg.country,
                    )
                samplers.write_sample_set(ids_out, summary_out, s)
                self._cache[f"sample:{method}"] = s
            return run_sampler

        sample_arts = {}
        for method in samplers.METHODS:
            subcfg = {"method": method, "country": cfg.country}
            inputs = [stream_art]
            if method == samplers.METHOD_STREAM:
                subcfg.update({"mode": cfg.stream_mode, "rate": cfg.stream_rate,
                               "window_ms": list(cfg.stream_window_ms),
                               "seed": cfg.seed})
            elif method == samplers.METHOD_LANG:
                subcfg["language"] = cfg.language
            elif method == samplers.METHOD_BB:
                subcfg["place_fallback"] = cfg.bb_place_fallback
                inputs = [stream_art, tiles_art]
            outs = self._stage(
                f"sample_{method}", subcfg, inputs,
                [f"sample_{method}_ids.csv", f"sample_{method}_summary.json"],
                make_sampler(method),
            )
            sample_arts[method] = outs
            artifacts[f"sample_{method}"] = outs

        def sample_obj(method):
            key = f"sample:{method}"
            if key not in self._cache:
                ids = np.loadtxt(sample_arts[method][0], skiprows=1,
                                 dtype=np.uint64, ndmin=1)
                stream = self._stream(stream_art)
                mask = np.isin(stream.ids, ids)
                sub = stream.select(mask)
                self._cache[key] = samplers.SampleSet(
                    method=method, tweets=sub.ids.copy(),
                    authors=np.unique(sub.author),
                    collection_window=stream.window, captured=sub,
                )
            return self._cache[key]

        draw30_arts = {}
        for method in samplers.METHODS:
            def run_draw(out, method=method):
                s = sample_obj(method)
                draw = samplers.draw_users(s, min(cfg.n_initial, s.n_authors),
                                           seed=cfg.seed)
                samplers.write_user_sample(out, draw)
            [out] = self._stage(
                f"draw30k_{method}",
                {"n": cfg.n_initial, "seed": cfg.seed},
                list(sample_arts[method][:1]), [f"users30k_{method}.txt"], run_draw,
            )
            draw30_arts[method] = out
            artifacts[f"draw30k_{method}"] = [out]

        filt_arts = {}
        for method in samplers.METHODS:
            def run_filter(retained_out, report_out, method=method):
                by_id = self._users_by_id(world_art)
                users = [by_id[uid] for uid in samplers.read_user_ids(draw30_arts[method])]
                retained, report = preprocess.apply_filters(
                    users, cfg.filters, as_of=cfg.window[0], seed=cfg.seed,
                )
                with open(retained_out, "w", encoding="utf-8") as fh:
                    for u in retained:
                        fh.write(f"{u.user_id}\n")
                preprocess.write_removal_csv(report_out, {method: report})
            outs = self._stage(
                f"preprocess_{method}",
                {"filters": cfg.filters.to_dict(), "as_of": cfg.window[0],
                 "seed": cfg.seed},
                [draw30_arts[method], world_art],
                [f"retained_{method}.txt", f"removal_{method}.csv"], run_filter,
            )
            filt_arts[method] = outs
            artifacts[f"preprocess_{method}"] = outs

        draw10_arts = {}
        for method in samplers.METHODS:
            def run_final_draw(out, method=method):
                by_id = self._users_by_id(world_art)
                retained = [by_id[uid]
                            for uid in samplers.read_user_ids(filt_arts[method][0])]
                n = min(cfg.n_final, len(retained))
                final = preprocess.subsample(retained, n, seed=cfg.seed)
                with open(out, "w", encoding="utf-8") as fh:
                    for u in final:
                        fh.write(f"{u.user_id}\n")
            [out] = self._stage(
                f"draw10k_{method}", {"n": cfg.n_final, "seed": cfg.seed},
                [filt_arts[method][0]], [f"users10k_{method}.txt"], run_final_draw,
            )
            draw10_arts[method] = out
            artifacts[f"draw10k_{method}"] = [out]

        labeled_arts = {}
        for method in samplers.METHODS:
            def run_infer(out, method=method):
                by_id = self._users_by_id(world_art)
                users = [by_id[uid] for uid in samplers.read_user_ids(draw10_arts[method])]
                labeled = inference.infer_all(users, cfg.confusion, seed=cfg.seed)
                from .io import write_jsonl
                write_jsonl(out, "samplab.labeled", 1,
                            (inference.labeled_to_dict(l) for l in labeled))
            [out] = self._stage(
                f"infer_{method}", {"confusion": cfg.confusion.to_dict(),
                                    "seed": cfg.seed},
                [draw10_arts[method], world_art], [f"labeled_{method}.jsonl"], run_infer,
            )
            labeled_arts[method] = out
            artifacts[f"infer_{method}"] = [out]

        def labeled_obj(method):
            from .io import read_jsonl
            return [inference.labeled_from_dict(d)
                    for d in read_jsonl(labeled_arts[method], "samplab.labeled", 1)]

        design_arts = {}
        for method in samplers.METHODS:
            def run_design(csv_out, meta_out, method=method):
                labeled = inference.drop_org_labeled(labeled_obj(method))
                located = [l for l in labeled if l.state is not None]
                table = debias.build_design(
                    located, self._census(cfg.census_path), level=geo.STATE_LEVEL,
                    zero_row_policy=debias.POLICY_DROP,
                )
                debias.write_design_csv(csv_out, table)
                with open(meta_out, "w", encoding="utf-8") as fh:
                    json.dump({"candidate_rows": table.candidate_rows,
                               "dropped_rows": table.dropped_rows,
                               "level": table.level,
                               "zero_row_policy": table.zero_row_policy},
                              fh, sort_keys=True, indent=1)
                    fh.write("\n")
            outs = self._stage(
                f"design_{method}", {"include_dc": cfg.include_dc},
                [labeled_arts[method], census_art],
                [f"design_{method}.csv", f"design_{method}_meta.json"], run_design,
            )
            design_arts[method] = outs
            artifacts[f"design_{method}"] = outs

        def run_models(out):
            fitted = {}
            for method in samplers.METHODS:
                table = debias.read_design_csv(design_arts[method][0], geo.STATE_LEVEL)
                for spec in cfg.models:
                    model = debias.fit_model(table, spec)
                    fitted[f"{method}.{spec}"] = {
                        "coefficients": model.coefficients,
                        "diagnostics": model.diagnostics,
                        "level": model.level,
                    }
            with open(out, "w", encoding="utf-8") as fh:
                json.dump(fitted, fh, sort_keys=True, indent=1)
                fh.write("\n")

        [models_art] = self._stage(
            "models", {"models": list(cfg.models)},
            [design_arts[m][0] for m in samplers.METHODS], ["models.json"], run_models,
        )
        artifacts["models"] = [models_art]

        def run_evaluate(estimates_out, json_out, summary_out, missing_out):
            reports = []
            labeled_by_method = {}
            for method in samplers.METHODS:
                table = debias.read_design_csv(design_arts[method][0], geo.STATE_LEVEL)
                labeled_by_method[method] = [
                    l for l in inference.drop_org_labeled(labeled_obj(method))
                    if l.state is not None
                ]
                for spec in cfg.models:
                    reports.append(evaluate.loso_cv(table, spec, method=method))
            if cfg.variants:
                by_id = self._users_by_id(world_art)
                users30k = {
                    m: [by_id[uid] for uid in samplers.read_user_ids(draw30_arts[m])]
                    for m in samplers.METHODS
                }
                inputs = evaluate.RobustnessInputs(
                    users30k_by_method=users30k,
                    census=self._census(cfg.census_path),
                    filter_config=cfg.filters,
                    confusion_spec=cfg.confusion,
                    n_final=cfg.n_final,
                    seed=cfg.seed,
                    as_of=cfg.window[0],
                    specs=tuple(cfg.models),
                )
                reports.extend(evaluate.robustness_suite(inputs, cfg.variants))
            evaluate.write_reports_csv(estimates_out, reports)
            evaluate.write_reports_json(json_out, reports)
            evaluate.write_summary_csv(summary_out, reports)
            missing = evaluate.missing_groups(
                labeled_by_method, level=geo.STATE_LEVEL,
                sizes=tuple(s for s in (5000, 8000, cfg.n_final)
                            if s <= min(len(v) for v in labeled_by_method.values())),
                seed=cfg.seed, include_dc=cfg.include_dc,
            )
            with open(missing_out, "w", encoding="utf-8") as fh:
                json.dump(missing, fh, sort_keys=True, indent=1)
                fh.write("\n")

        eval_outs = self._stage(
            "evaluate",
            {"models": list(cfg.models), "variants": list(cfg.variants),
             "filters": cfg.filters.to_dict(), "confusion": cfg.confusion.to_dict(),
             "n_final": cfg.n_final, "seed": cfg.seed},
            [design_arts[m][0] for m in samplers.METHODS]
            + [labeled_arts[m] for m in samplers.METHODS]
            + [draw30_arts[m] for m in samplers.METHODS] + [world_art, census_art],
            ["estimates.csv", "estimates.json", "estimates_summary.csv",
             "missing_groups.json"],
            run_evaluate,
        )
        artifacts["evaluate"] = eval_outs

        def run_metrics(combined_out, removal_out, pvalue_out):
            tables = {}
            users_by_method = {}
            reports_by_method = {}
            for method in samplers.METHODS:
                s = sample_obj(method)
                by_id = self._users_by_id(world_art)
                labeled = labeled_obj(method)
                users_by_method[method] = labeled
                tables[method] = metrics.summarize(s, labeled, as_of=cfg.window[1])
                metrics.write_metric_csv(self._path(f"metrics_{method}.csv"),
                                         tables[method])
                users30 = [by_id[uid] for uid in samplers.read_user_ids(draw30_arts[method])]
                _, rep = preprocess.apply_filters(users30, cfg.filters,
                                                  as_of=cfg.window[0], seed=cfg.seed)
                reports_by_method[method] = rep
                for metric_name in cfg.metric_names:
                    values = metrics.metric_values(labeled, metric_name,
                                                   as_of_ms=to_ms(cfg.window[1]))
                    metrics.write_histogram_csv(
                        self._path(f"hist_{metric_name}_{method}.csv"),
                        metrics.log_histogram(values),
                    )
            metrics.combined_json(combined_out, tables)
            preprocess.write_removal_csv(removal_out, reports_by_method)
            methods, mat = metrics.pairwise_pvalues(
                users_by_method, "tweets_per_day", as_of_ms=to_ms(cfg.window[1]))
            metrics.write_pvalue_csv(pvalue_out, methods, mat)

        metric_outs = self._stage(
            "metrics",
            {"metrics": list(cfg.metric_names), "filters": cfg.filters.to_dict(),
             "seed": cfg.seed},
            [labeled_arts[m] for m in samplers.METHODS]
            + [sample_arts[m][0] for m in samplers.METHODS]
            + [draw30_arts[m] for m in samplers.METHODS] + [world_art, stream_art],
            ["metrics.json", "removal_table.csv", "pvalues_tweets_per_day.csv"],
            run_metrics,
        )
        artifacts["metrics"] = metric_outs

        return ReportBundle(
            out_dir=self.out,
            manifest_path=self.manifest.path,
            artifacts=artifacts,
            stages_run=self.stages_run,
            stages_skipped=self.stages_skipped,
        )


def run_pipeline(config: PipelineConfig) -> ReportBundle:
    return Pipeline(config).run()


def write_report(out_dir, path):
    """Condense a finished run's manifest into one report file."""
    manifest_path = os.path.join(out_dir, MANIFEST_NAME)
    if not os.path.exists(manifest_path):
        raise DataError(f"no manifest in {out_dir}; run the pipeline first")
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    report = {"out_dir": out_dir, "n_stages": len(manifest["stages"]), "stages": {}}
    for stage, entry in sorted(manifest["stages"].items()):
        report["stages"][stage] = {
            "outputs": [os.path.join(out_dir, p) for p in entry["outputs"]],
        }
    summary_csv = os.path.join(out_dir, "estimates_summary.csv")
    if os.path.exists(summary_csv):
        import csv as _csv
        with open(summary_csv, newline="", encoding="utf-8") as fh:
            report["estimates"] = list(_csv.DictReader(fh))
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, sort_keys=True, indent=1)
        fh.write("\n")
    return report
