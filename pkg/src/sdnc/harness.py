"""Experiment harness: trial construction, bound checking, CSV output.

A trial is fully determined by (config, trial seed): the graph, the
labeling or adversary, the learner, and hence the transcript are all
reproducible.  Trials are independent and may run across worker processes;
results are merged in seed order so output bytes do not depend on the
worker count.
"""

from __future__ import annotations

import csv
import io
import math
import os
import time
from dataclasses import dataclass, field
from multiprocessing import Pool
from pathlib import Path

import numpy as np

from . import formats
from .baselines import (
    HALVING_MAX_NODES,
    BipartiteLearner,
    ConstantLearner,
    GridWalkerLearner,
    HalvingLearner,
    TraverseLearner,
    build_gridspec,
    enumerate_convex_bipartitions,
)
from .errors import ConfigError, SdncError
from .generators import (
    FAMILIES,
    FamilyInstance,
    Provenance,
    flip_labels,
    gen_convex_bipartition,
    gen_graph,
    gen_homophilic,
    gen_strip_partition,
    measured_border,
)
from .good4 import Good4Learner, MulticlassGood4Learner, bounds, build_tables
from .graphs import Labeling, cut_border
from .protocol import (
    FixedSource,
    clique_path_adversary,
    grid_permutation_source,
    merging_degree_adversary,
    run_session,
)

CSV_HEADER = [
    "seed",
    "n",
    "m",
    "family",
    "learner",
    "source",
    "mistakes",
    "bound",
    "bound_satisfied",
    "rounds",
    "wall_ms",
]

LEARNERS = (
    "good4",
    "multiclass_good4",
    "traverse",
    "bipartite",
    "gridwalker",
    "halving",
    "constant_baseline",
)

SOURCES = ("fixed", "clique_path", "merging_degree", "grid_permutation")

LABEL_KINDS = ("convex", "flipped", "homophilic", "permuted_strips")


@dataclass
class ExperimentConfig:
    family: str
    params: dict
    learner: str
    source: str = "fixed"
    labeling: dict = field(default_factory=lambda: {"kind": "convex"})
    source_params: dict = field(default_factory=dict)
    trials: int = 1
    seed: int = 0
    workers: int = 1
    bound_overrides: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {
            "family",
            "params",
            "learner",
            "source",
            "labeling",
            "source_params",
            "trials",
            "seed",
            "workers",
            "bound_overrides",
            "sweep",
        }
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {k: v for k, v in data.items() if k in known and k != "sweep"}
        try:
            cfg = cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        cfg.validate()
        return cfg

    def validate(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}")
        if self.learner not in LEARNERS:
            raise ConfigError(f"unknown learner {self.learner!r}")
        if self.source not in SOURCES:
            raise ConfigError(f"unknown source {self.source!r}")
        kind = self.labeling.get("kind", "convex")
        if kind not in LABEL_KINDS:
            raise ConfigError(f"unknown labeling kind {kind!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.learner == "gridwalker" and self.family != "grid":
            raise ConfigError("gridwalker requires the grid family")
        if self.learner == "bipartite":
            if self.family not in ("path", "tree", "grid", "cycle"):
                raise ConfigError("bipartite learner needs a bipartite family")
            if self.family == "cycle" and self.params.get("n", 0) % 2:
                raise ConfigError("bipartite learner needs an even cycle")
        if self.learner == "halving":
            n = self.params.get("n", self.params.get("rows", 0) * self.params.get("cols", 0))
            if n > HALVING_MAX_NODES:
                raise ConfigError(
                    f"halving is capped at n <= {HALVING_MAX_NODES}"
                )
        if self.source == "grid_permutation":
            if self.family != "grid":
                raise ConfigError("grid_permutation source requires a grid")
        if self.source == "clique_path" and self.family != "clique_plus_path":
            raise ConfigError(
                "clique_path source requires the clique_plus_path family"
            )
        if self.source == "merging_degree":
            if "c" not in self.source_params:
                raise ConfigError("merging_degree source needs source_params.c")
        if kind == "permuted_strips" and self.family != "grid":
            raise ConfigError("permuted_strips labelings require a grid")


@dataclass
class SweepRecord:
    seed: int
    n: int
    m: int
    family: str
    learner: str
    source: str
    mistakes: int
    bound: float | int | None
    rounds: int | None
    wall_ms: float

    @property
    def bound_satisfied(self) -> bool | None:
        if self.bound is None:
            return None
        return self.mistakes <= self.bound

    def to_row(self) -> list[str]:
        return [
            str(self.seed),
            str(self.n),
            str(self.m),
            self.family,
            self.learner,
            self.source,
            str(self.mistakes),
            _fmt_bound(self.bound),
            "" if self.bound is None else str(self.bound_satisfied),
            "" if self.rounds is None else str(self.rounds),
            f"{self.wall_ms:.3f}",
        ]


def _fmt_bound(bound) -> str:
    if bound is None:
        return ""
    if isinstance(bound, int):
        return str(bound)
    return f"{bound:.6f}"


def _needs_tables(learner: str) -> bool:
    return learner in ("good4", "multiclass_good4", "halving")


def build_trial_instance(cfg: ExperimentConfig, trial_seed: int):
    """Materialize the (graph, labeling-or-adversary) pair of one trial."""
    rng = np.random.default_rng(trial_seed)
    if cfg.source == "clique_path":
        h, n = cfg.params["h"], cfg.params["n"]
        g, source = clique_path_adversary(h, n)
        instance = FamilyInstance(g, "clique_plus_path", h + 1, dict(cfg.params))
        return instance, None, source, None
    instance = gen_graph(cfg.family, rng, **cfg.params)
    if cfg.source == "merging_degree":
        source = merging_degree_adversary(instance.graph, cfg.source_params["c"])
        return instance, None, source, None
    tables = build_tables(instance.graph) if _needs_tables(cfg.learner) else None
    kind = cfg.labeling.get("kind", "convex")
    strip = None
    if cfg.source == "grid_permutation" or kind == "permuted_strips":
        k = cfg.labeling.get("k", 2)
        strip, labeling = gen_strip_partition(instance, k, rng)
        prov = Provenance("permuted_strips", k=k)
    elif kind == "convex":
        labeling = gen_convex_bipartition(instance, rng, tables=tables)
        prov = Provenance("convex")
    elif kind == "flipped":
        m_flips = cfg.labeling.get("m_flips", 1)
        base = gen_convex_bipartition(instance, rng, tables=tables)
        labeling = flip_labels(base, m_flips, rng)
        prov = Provenance("flipped", m_flips=m_flips)
    elif kind == "homophilic":
        target = cfg.labeling.get("border_target", 4)
        labeling = gen_homophilic(instance.graph, target, rng)
        prov = Provenance("homophilic", border_target=target)
    else:
        raise ConfigError(f"unhandled labeling kind {kind!r}")
    name = "grid_permutation" if cfg.source == "grid_permutation" else "fixed"
    source = FixedSource(labeling, name=name)
    return instance, (labeling, prov, strip), source, tables


def _make_learner(cfg: ExperimentConfig, instance, tables):
    if cfg.learner == "good4":
        return Good4Learner(tables=tables)
    if cfg.learner == "multiclass_good4":
        k = cfg.labeling.get("k", 2)
        return MulticlassGood4Learner(k, tables=tables)
    if cfg.learner == "traverse":
        return TraverseLearner()
    if cfg.learner == "bipartite":
        return BipartiteLearner()
    if cfg.learner == "gridwalker":
        spec = build_gridspec(
            instance.params["rows"], instance.params["cols"]
        )
        return GridWalkerLearner(spec)
    if cfg.learner == "halving":
        return HalvingLearner(tables=tables)
    if cfg.learner == "constant_baseline":
        return ConstantLearner()
    raise ConfigError(f"unknown learner {cfg.learner!r}")


def _bound_inputs(cfg, instance, labeled, learner, transcript, tables):
    """Everything needed to (re)compute the applicable bound."""
    w = cfg.bound_overrides.get("w", instance.w)
    info = {"w": w, "n": instance.n}
    if cfg.learner in ("good4", "multiclass_good4"):
        if labeled is not None:
            prov = labeled[1]
            info["kind"] = prov.kind
            info["M"] = prov.m_flips
            info["k"] = prov.k
        elif cfg.source == "clique_path":
            info["kind"] = "convex"  # adaptive answers stay convex
            info["M"] = 0
            info["k"] = 2
        else:
            info["kind"] = "unbounded"
    elif cfg.learner == "traverse":
        if labeled is not None:
            border = measured_border(instance.graph, labeled[0])
        else:
            border = measured_border(
                instance.graph, transcript.observed_labeling(2)
            )
        info["border"] = border
    elif cfg.learner == "bipartite":
        info["kind"] = labeled[1].kind if labeled else "unbounded"
    elif cfg.learner == "gridwalker":
        info["k"] = cfg.labeling.get("k", 2)
    elif cfg.learner == "halving":
        vs = enumerate_convex_bipartitions(instance.graph, tables=tables)
        info["h_size"] = vs.size
    return info


def compute_bound(learner: str, info: dict):
    """Map a learner plus its bound inputs to the applicable mistake bound."""
    if learner in ("good4", "multiclass_good4"):
        kind = info.get("kind")
        if kind in ("convex", "flipped", "permuted_strips"):
            rep = bounds(
                info["n"],
                info["w"],
                M=info.get("M", 0),
                k=info.get("k", 2),
            )
            if learner == "multiclass_good4":
                return rep.multiclass_bound
            return rep.near_convex_bound if info.get("M", 0) else rep.binary_bound
        return None
    if learner == "traverse":
        return info["border"] + 1
    if learner == "bipartite":
        return 2 if info.get("kind") in ("convex",) else None
    if learner == "gridwalker":
        return 3 * info["k"]
    if learner == "halving":
        return int(math.floor(math.log2(info["h_size"])))
    return None


def run_trial(cfg: ExperimentConfig, trial_seed: int) -> tuple[SweepRecord, dict]:
    instance, labeled, source, tables = build_trial_instance(cfg, trial_seed)
    learner = _make_learner(cfg, instance, tables)
    t0 = time.perf_counter()
    transcript = run_session(instance.graph, learner, source)
    wall_ms = (time.perf_counter() - t0) * 1e3
    info = _bound_inputs(cfg, instance, labeled, learner, transcript, tables)
    bound = compute_bound(cfg.learner, info)
    rounds = None
    if cfg.learner == "good4":
        rounds = len(learner.rounds)
        transcript.extras["rounds"] = [t.to_dict() for t in learner.rounds]
    elif cfg.learner == "multiclass_good4":
        rounds = learner.rounds_run
        transcript.extras["fdl_calls"] = [
            {"z_size": z, "s_size": s, "mistakes": m}
            for z, s, m in learner.state.call_log
        ]
    record = SweepRecord(
        seed=trial_seed,
        n=instance.n,
        m=instance.graph.m,
        family=instance.family,
        learner=cfg.learner,
        source=cfg.source,
        mistakes=transcript.mistakes,
        bound=bound,
        rounds=rounds,
        wall_ms=wall_ms,
    )
    meta = {
        "seed": trial_seed,
        "family": instance.family,
        "params": instance.params,
        "n": instance.n,
        "m": instance.graph.m,
        "learner": cfg.learner,
        "source": cfg.source,
        "provenance": labeled[1].to_dict() if labeled else None,
        "bound_inputs": info,
        "bound": bound,
    }
    doc = transcript.to_dict()
    doc["meta"] = meta
    return record, doc


def _trial_job(args):
    cfg_dict, trial_seed = args
    cfg = ExperimentConfig.from_dict(cfg_dict)
    return run_trial(cfg, trial_seed)


def _config_dict(cfg: ExperimentConfig) -> dict:
    return {
        "family": cfg.family,
        "params": cfg.params,
        "learner": cfg.learner,
        "source": cfg.source,
        "labeling": cfg.labeling,
        "source_params": cfg.source_params,
        "trials": cfg.trials,
        "seed": cfg.seed,
        "workers": cfg.workers,
        "bound_overrides": cfg.bound_overrides,
    }


def effective_workers(cfg_workers: int, cli_workers: int | None) -> int:
    env = os.environ.get("SDNC_WORKERS")
    if env:
        return max(1, int(env))
    if cli_workers:
        return max(1, cli_workers)
    return max(1, cfg_workers)


def run_trials(cfg: ExperimentConfig, workers: int = 1):
    seeds = [cfg.seed + i for i in range(cfg.trials)]
    if workers <= 1 or cfg.trials == 1:
        results = [run_trial(cfg, s) for s in seeds]
    else:
        cfg_dict = _config_dict(cfg)
        with Pool(processes=workers) as pool:
            results = pool.map(_trial_job, [(cfg_dict, s) for s in seeds])
    results.sort(key=lambda pair: pair[0].seed)
    return results


def records_to_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in records:
        writer.writerow(rec.to_row())
    return buf.getvalue()


def cmd_run(cfg: ExperimentConfig, out_dir, workers: int = 1) -> int:
    """Execute all trials; returns the count of bound violations."""
    out = Path(out_dir)
    (out / "transcripts").mkdir(parents=True, exist_ok=True)
    results = run_trials(cfg, workers=workers)
    records = [rec for rec, _ in results]
    Path(out / "results.csv").write_bytes(
        records_to_csv(records).encode("ascii")
    )
    for rec, doc in results:
        formats.save_json(doc, out / "transcripts" / f"trial_{rec.seed}.json")
    return sum(
        1 for rec in records if rec.bound_satisfied is False
    )


def cmd_gen(cfg: ExperimentConfig, out_dir) -> list[str]:
    """Write edge-list, labeling, and metadata sidecar per trial seed."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for i in range(cfg.trials):
        trial_seed = cfg.seed + i
        instance, labeled, source, tables = build_trial_instance(cfg, trial_seed)
        stem = f"{cfg.family}_{trial_seed}"
        formats.save_edge_list(instance.graph, out / f"{stem}.edges")
        written.append(f"{stem}.edges")
        if labeled is not None:
            formats.save_labeling(labeled[0], out / f"{stem}.labels")
            written.append(f"{stem}.labels")
        meta = {
            "family": instance.family,
            "w": instance.w,
            "n": instance.n,
            "m": instance.graph.m,
            "params": instance.params,
            "provenance": labeled[1].to_dict() if labeled else None,
            "seed": trial_seed,
        }
        formats.save_json(meta, out / f"{stem}.json")
        written.append(f"{stem}.json")
    return written


def verify_results(out_dir) -> list[str]:
    """Re-check a results directory; returns a list of problem strings."""
    out = Path(out_dir)
    csv_path = out / "results.csv"
    problems = []
    if not csv_path.exists():
        return problems
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            problems.append(f"unexpected CSV header: {reader.fieldnames}")
            return problems
        rows = list(reader)
    from .protocol import Transcript

    for row in rows:
        seed = row["seed"]
        tpath = out / "transcripts" / f"trial_{seed}.json"
        if not tpath.exists():
            problems.append(f"seed {seed}: missing transcript")
            continue
        doc = formats.load_json(tpath)
        transcript = Transcript.from_dict(doc, n=int(row["n"]))
        try:
            transcript.validate()
        except SdncError as exc:
            problems.append(f"seed {seed}: invalid transcript: {exc}")
            continue
        if transcript.mistakes != int(row["mistakes"]):
            problems.append(
                f"seed {seed}: transcript mistakes {transcript.mistakes} "
                f"!= csv {row['mistakes']}"
            )
        if doc["summary"]["mistakes"] != transcript.mistakes:
            problems.append(f"seed {seed}: summary mistake count is stale")
        meta = doc.get("meta", {})
        bound = compute_bound(meta.get("learner"), meta.get("bound_inputs", {})) \
            if meta.get("bound_inputs") is not None else None
        if _fmt_bound(bound) != row["bound"]:
            problems.append(
                f"seed {seed}: bound mismatch {_fmt_bound(bound)!r} "
                f"!= {row['bound']!r}"
            )
        if bound is not None:
            expect = str(transcript.mistakes <= bound)
            if row["bound_satisfied"] != expect:
                problems.append(f"seed {seed}: bound_satisfied flag is wrong")
    return problems


SWEEPABLE = ("n", "rows", "cols", "k", "h", "m_flips", "k_classes",
             "border_target", "learner", "family", "c")


def _apply_sweep_value(base: dict, key: str, value):
    cfg = {k: (dict(v) if isinstance(v, dict) else v) for k, v in base.items()}
    if key in ("n", "rows", "cols", "k", "h"):
        cfg.setdefault("params", {})
        cfg["params"] = dict(cfg["params"])
        cfg["params"][key] = value
    elif key in ("m_flips", "border_target"):
        cfg["labeling"] = dict(cfg.get("labeling", {"kind": "convex"}))
        cfg["labeling"][key] = value
    elif key == "k_classes":
        cfg["labeling"] = dict(cfg.get("labeling", {"kind": "convex"}))
        cfg["labeling"]["k"] = value
    elif key == "c":
        cfg["source_params"] = dict(cfg.get("source_params", {}))
        cfg["source_params"]["c"] = value
    elif key in ("learner", "family"):
        cfg[key] = value
    else:
        raise ConfigError(f"cannot sweep over {key!r}")
    return cfg


SWEEP_HEADER = [
    "family",
    "n",
    "learner",
    "source",
    "trials",
    "mean_mistakes",
    "max_mistakes",
    "violations",
    "mean_wall_ms",
]


def cmd_sweep(config_data: dict, out_dir, workers: int = 1) -> int:
    """Cross-product sweep; one aggregated CSV row per cell."""
    sweep = config_data.get("sweep", {})
    for key in sweep:
        if key not in SWEEPABLE:
            raise ConfigError(f"cannot sweep over {key!r}")
    base = {k: v for k, v in config_data.items() if k != "sweep"}
    cells = [base]
    for key, values in sweep.items():
        cells = [
            _apply_sweep_value(cell, key, value)
            for value in values
            for cell in cells
        ]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    total_violations = 0
    for cell in cells:
        cfg = ExperimentConfig.from_dict(cell)
        results = run_trials(cfg, workers=workers)
        records = [rec for rec, _ in results]
        mistakes = [rec.mistakes for rec in records]
        violations = sum(1 for rec in records if rec.bound_satisfied is False)
        total_violations += violations
        rows.append(
            [
                cfg.family,
                str(records[0].n),
                cfg.learner,
                cfg.source,
                str(len(records)),
                f"{sum(mistakes) / len(mistakes):.4f}",
                str(max(mistakes)),
                str(violations),
                f"{sum(r.wall_ms for r in records) / len(records):.3f}",
            ]
        )
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    writer.writerows(rows)
    (out / "sweep.csv").write_bytes(buf.getvalue().encode("ascii"))
    return total_violations
