"""End-to-end experiment orchestration with resumable on-disk stages.

Layout under ``out``::

    manifest.json            config, seeds and run id
    remap.csv                external_id,internal_id
    diagnostics.json         written by ``analyze``
    seed_<s>/                split TSVs, feature CSVs, model.json,
                             importance.csv, scores_test.csv, metrics.json
    report_<metric>.json     aggregated over seeds
    failed/seed_<s>/         partial artifacts of a seed whose stage raised
"""

from __future__ import annotations

import dataclasses
import json
import logging
import shutil
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .dataset import (Dataset, DatasetSplit, FeatureProfile, FeatureTable, add_negatives, assemble,
                      load_dataset, sample_negatives, split_edges, temporal_split)
from .errors import ConfigError, PairProxError
from .gbdt import GBDTModel, feature_importance, preset as get_preset, train, write_importance_csv
from .graph import build_graph, write_remap
from .logistic import LogisticModel, train_logistic
from .metrics import (EvalReport, aggregate, edge_homophily, evaluate, node_homophily, parse_metric,
                      run_id, transitivity_ratio)
from .temporal import CollabWindows

log = logging.getLogger(__name__)

STAGES = ("split", "featurize", "train", "eval")


class PipelineError(PairProxError, RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class RunConfig:
    edges: str
    attributes: Optional[str] = None
    classes: Optional[str] = None
    real_attributes: Optional[str] = None
    temporal: bool = False
    num_classes: Optional[int] = None
    dataset: str = ""
    profile: str = "binary"
    common_zeros: bool = False
    common_embedding: bool = False
    mask_direct_edge: bool = False
    ratios: list = field(default_factory=lambda: [0.85, 0.05, 0.10])
    seeds: list = field(default_factory=lambda: list(range(10)))
    negatives: str = "all"
    include_valid_in_test_graph: bool = False
    temporal_years: list = field(default_factory=lambda: [2017, 2018, 2019])
    collab_windows: dict = field(default_factory=dict)
    classifier: str = "gbdt"
    preset: str = "auc"
    overrides: dict = field(default_factory=dict)
    lr_sweep: list = field(default_factory=list)
    logistic_l2: float = 1.0
    feature_set: str = "all"
    metrics: list = field(default_factory=lambda: ["auc"])
    hits_negatives: Optional[int] = None
    transitivity_graph: str = "full"
    out: str = "runs/default"
    workers: int = 1

    @classmethod
    def from_dict(cls, d: dict, base: Optional[Path] = None) -> "RunConfig":
        if "config" in d and "edges" not in d:
            d = d["config"]
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        if "edges" not in d:
            raise ConfigError("config must name an 'edges' file")
        cfg = cls(**d)
        if base is not None:
            for name in ("edges", "attributes", "classes", "real_attributes", "out"):
                p = getattr(cfg, name)
                if p is not None and not Path(p).is_absolute():
                    setattr(cfg, name, str((base / p).resolve()))
        return cfg

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file {path} does not exist")
        try:
            d = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(d, path.parent.resolve())

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @property
    def feature_profile(self) -> FeatureProfile:
        windows = CollabWindows(**{k: tuple(v) if isinstance(v, list) else v
                                   for k, v in self.collab_windows.items()})
        return FeatureProfile(self.profile, common_zeros=self.common_zeros,
                              common_embedding=self.common_embedding, windows=windows,
                              mask_direct_edge=self.mask_direct_edge)

    def validate(self) -> None:
        for name in ("edges", "attributes", "classes", "real_attributes"):
            p = getattr(self, name)
            if p is not None and not Path(p).is_file():
                raise ConfigError(f"{name} file {p} does not exist")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if any(not isinstance(s, int) for s in self.seeds):
            raise ConfigError("seeds must be integers")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct")
        r = [float(x) for x in self.ratios]
        if len(r) != 3 or any(x <= 0 for x in r) or abs(sum(r) - 1) > 1e-9:
            raise ConfigError(f"ratios must be three positive fractions summing to 1, got {self.ratios}")
        prof = self.feature_profile
        if prof.kind == "collab" and not self.temporal:
            raise ConfigError("profile 'collab' needs a temporal edge list (temporal: true)")
        needs = {"binary": ("attributes", "classes"), "ppa": ("classes",),
                 "real": ("real_attributes",), "collab": ("real_attributes",)}[prof.kind]
        for name in needs:
            if getattr(self, name) is None:
                raise ConfigError(f"profile {prof.kind!r} requires the '{name}' file")
        if self.classifier not in ("gbdt", "logistic"):
            raise ConfigError(f"classifier must be 'gbdt' or 'logistic', got {self.classifier!r}")
        self.hyperparams()
        if self.feature_set not in ("all", "structural", "domain"):
            raise ConfigError(f"feature_set must be all|structural|domain, got {self.feature_set!r}")
        if self.feature_set == "structural" and prof.kind == "collab":
            raise ConfigError("the collab profile has no separate structural block")
        if self.negatives not in ("all", "split"):
            raise ConfigError(f"negatives must be 'all' or 'split', got {self.negatives!r}")
        if self.transitivity_graph not in ("full", "train"):
            raise ConfigError("transitivity_graph must be 'full' or 'train'")
        if not self.metrics:
            raise ConfigError("at least one metric is required")
        for m in self.metrics:
            try:
                parse_metric(m)
            except PairProxError as exc:
                raise ConfigError(str(exc)) from None
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    def hyperparams(self):
        hp = get_preset(self.preset)
        return hp.with_overrides(**self.overrides) if self.overrides else hp

    def identity(self) -> dict:
        """Config fields that determine numeric results (not paths of output
        or worker count)."""
        d = self.to_dict()
        for k in ("out", "workers"):
            d.pop(k)
        for k in ("edges", "attributes", "classes", "real_attributes"):
            if d[k] is not None:
                d[k] = Path(d[k]).name
        return d


def _seed_dir(cfg: RunConfig, seed: int) -> Path:
    return Path(cfg.out) / f"seed_{seed}"


def load(cfg: RunConfig) -> Dataset:
    return load_dataset(cfg.edges, cfg.attributes, cfg.classes, cfg.real_attributes,
                        temporal=cfg.temporal, num_classes=cfg.num_classes,
                        name=cfg.dataset or Path(cfg.edges).stem)


def write_manifest(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {"config": cfg.to_dict(), "seeds": list(cfg.seeds),
                "run_id": run_id(cfg.identity()), "version": __version__}
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return path


def stage_split(cfg: RunConfig, ds: Dataset, seed: int) -> DatasetSplit:
    d = _seed_dir(cfg, seed)
    if cfg.profile == "collab":
        train_end, valid_year, test_year = cfg.temporal_years
        split, _ = temporal_split(ds.temporal, train_end, valid_year, test_year, seed)
    else:
        split = split_edges(ds.graph.edges(), cfg.ratios, seed)
        add_negatives(split, ds.graph.num_nodes, cfg.negatives)
    split.save(d)
    return split


def stage_featurize(cfg: RunConfig, ds: Dataset, seed: int) -> dict[str, FeatureTable]:
    d = _seed_dir(cfg, seed)
    split = DatasetSplit.load(d, seed, cfg.ratios if cfg.profile != "collab" else (0, 0, 0))
    profile = cfg.feature_profile
    temporal = observed = test_graph = None
    if profile.kind == "collab":
        temporal = ds.temporal.restrict(cfg.temporal_years[0])
    else:
        observed = build_graph(ds.graph.num_nodes, split.train_pos)
        if cfg.include_valid_in_test_graph:
            test_graph = build_graph(ds.graph.num_nodes, np.vstack([split.train_pos, split.valid_pos]))
    tables = assemble(observed, ds.attrs, split, profile, cfg.workers, temporal, test_graph)
    if cfg.hits_negatives and any(parse_metric(m)[0] == "hits" for m in cfg.metrics):
        _add_hits_pool(cfg, ds, split, tables, profile, observed, test_graph, temporal, seed)
    for name, table in tables.items():
        table.to_csv(d / f"features_{name}.csv")
    return tables


def _add_hits_pool(cfg, ds, split, tables, profile, observed, test_graph, temporal, seed):
    """Featurize an extra shared negative pool for Hits@K ranking."""
    taken = np.vstack([split.all_positives(), split.train_neg, split.valid_neg, split.test_neg])
    if profile.kind == "collab":
        taken = np.vstack([taken, np.stack([ds.temporal.u, ds.temporal.v], axis=1)])
    pool = sample_negatives(ds.graph.num_nodes, taken, int(cfg.hits_negatives), seed + 7919)
    extra = DatasetSplit(np.zeros((0, 2), np.int64), np.zeros((0, 2), np.int64),
                         np.zeros((0, 2), np.int64), test_neg=pool)
    t = assemble(observed, ds.attrs, extra, profile, cfg.workers, temporal, test_graph)["test"]
    tables["hits_pool"] = t


def _select(cfg: RunConfig, table: FeatureTable, ds_names=None) -> tuple[np.ndarray, tuple]:
    if cfg.feature_set == "all":
        return table.values, table.names
    structural = set(cfg.feature_profile.structural_names)
    keep = [n for n in table.names if (n in structural) == (cfg.feature_set == "structural")]
    return table.columns(keep), tuple(keep)


def _fit(cfg: RunConfig, X, y, names, hp):
    if cfg.classifier == "logistic":
        return train_logistic(X, y, l2=cfg.logistic_l2, seed=hp.seed, feature_names=names)
    return train(X, y, hp, names)


def stage_train(cfg: RunConfig, seed: int):
    d = _seed_dir(cfg, seed)
    tr = FeatureTable.from_csv(d / "features_train.csv")
    X, names = _select(cfg, tr)
    hp = cfg.hyperparams().with_overrides(seed=seed)
    chosen = {}
    if cfg.lr_sweep and cfg.classifier == "gbdt":
        va = FeatureTable.from_csv(d / "features_valid.csv")
        Xv, _ = _select(cfg, va)
        best = None
        for lr in cfg.lr_sweep:
            m = _fit(cfg, X, tr.labels, names, hp.with_overrides(learning_rate=float(lr)))
            score = evaluate(cfg.metrics[0], m.decision_function(Xv), va.labels)
            if best is None or score > best[0]:
                best = (score, float(lr), m)
        model = best[2]
        chosen = {"learning_rate": best[1], "valid_score": best[0]}
    else:
        model = _fit(cfg, X, tr.labels, names, hp)
    (d / "model.json").write_text(json.dumps(model.to_dict(), sort_keys=True))
    if isinstance(model, GBDTModel):
        write_importance_csv(d / "importance.csv", feature_importance(model))
    if chosen:
        (d / "sweep.json").write_text(json.dumps(chosen, sort_keys=True))
    return model


def load_model(path):
    d = json.loads(Path(path).read_text())
    if d.get("format", "").startswith("pairprox-logistic"):
        return LogisticModel.from_dict(d)
    return GBDTModel.from_dict(d)


def stage_eval(cfg: RunConfig, seed: int) -> dict[str, float]:
    d = _seed_dir(cfg, seed)
    model = load_model(d / "model.json")
    te = FeatureTable.from_csv(d / "features_test.csv")
    X, _ = _select(cfg, te)
    scores = model.decision_function(X)
    with open(d / "scores_test.csv", "w") as fh:
        fh.write("u,v,label,score\n")
        for (u, v), y, s in zip(te.pairs.tolist(), te.labels.tolist(), scores.tolist()):
            fh.write(f"{u},{v},{y},{s!r}\n")
    pool_path = d / "features_hits_pool.csv"
    pool_scores = None
    if pool_path.exists():
        pool = FeatureTable.from_csv(pool_path)
        pool_scores = model.decision_function(_select(cfg, pool)[0])
    out = {}
    for m in cfg.metrics:
        kind, k = parse_metric(m)
        if kind == "hits" and pool_scores is not None:
            from .metrics import hits_at_k
            out[m] = hits_at_k(scores[te.labels == 1], pool_scores, k)
        else:
            out[m] = evaluate(m, scores, te.labels)
    (d / "metrics.json").write_text(json.dumps(out, indent=2, sort_keys=True))
    return out


def _run_stage(cfg, seed, stage, fn, *args):
    try:
        return fn(*args)
    except Exception as exc:
        src = _seed_dir(cfg, seed)
        if src.exists():
            dst = Path(cfg.out) / "failed" / src.name
            if dst.exists():
                shutil.rmtree(dst)
            dst.parent.mkdir(parents=True, exist_ok=True)
            shutil.move(str(src), str(dst))
        raise PipelineError(stage, exc) from exc


def write_reports(cfg: RunConfig, per_seed: dict[int, dict[str, float]]) -> list[EvalReport]:
    rid = run_id(cfg.identity())
    reports = []
    seeds = sorted(per_seed)
    for m in cfg.metrics:
        rep = aggregate([per_seed[s][m] for s in seeds], m, seeds, cfg.dataset or Path(cfg.edges).stem,
                        cfg.preset if cfg.classifier == "gbdt" else "logistic", rid)
        name = m.lower().replace("@", "")
        (Path(cfg.out) / f"report_{name}.json").write_text(rep.to_json())
        reports.append(rep)
    return reports


def run_pipeline(cfg: RunConfig, stages=STAGES) -> EvalReport:
    """Run the requested stages for every seed and return the report of the
    first configured metric (all reports are written to ``cfg.out``)."""
    cfg.validate()
    write_manifest(cfg)
    ds = None
    if "split" in stages or "featurize" in stages:
        try:
            ds = load(cfg)
        except Exception as exc:
            raise PipelineError("load", exc) from exc
        write_remap(Path(cfg.out) / "remap.csv", ds.remap)
    per_seed = {}
    for seed in cfg.seeds:
        log.info("seed %d", seed)
        if "split" in stages:
            _run_stage(cfg, seed, "split", stage_split, cfg, ds, seed)
        if "featurize" in stages:
            _run_stage(cfg, seed, "featurize", stage_featurize, cfg, ds, seed)
        if "train" in stages:
            _run_stage(cfg, seed, "train", stage_train, cfg, seed)
        if "eval" in stages:
            per_seed[seed] = _run_stage(cfg, seed, "eval", stage_eval, cfg, seed)
    if "eval" not in stages:
        return None
    return write_reports(cfg, per_seed)[0]


def analyze(cfg: RunConfig) -> dict:
    """Dataset diagnostics: sizes, transitivity and homophily ratios."""
    cfg.validate()
    ds = load(cfg)
    g = ds.graph
    if cfg.transitivity_graph == "train" and cfg.profile != "collab":
        split = split_edges(g.edges(), cfg.ratios, cfg.seeds[0])
        tg = build_graph(g.num_nodes, split.train_pos)
    else:
        tg = g
    out = {"dataset": ds.name, "nodes": g.num_nodes, "edges": g.num_edges,
           "transitivity": transitivity_ratio(tg), "transitivity_graph": cfg.transitivity_graph}
    if ds.attrs is not None and ds.attrs.class_block is not None:
        out["classes"] = int(ds.attrs.num_classes)
        out["node_homophily"] = node_homophily(g, ds.attrs.class_block)
        out["edge_homophily"] = edge_homophily(g, ds.attrs.class_block)
    Path(cfg.out).mkdir(parents=True, exist_ok=True)
    (Path(cfg.out) / "diagnostics.json").write_text(json.dumps(out, indent=2, sort_keys=True))
    return out


def format_table(d: dict) -> str:
    width = max(len(k) for k in d)
    lines = []
    for k, v in d.items():
        v = f"{v:.4f}" if isinstance(v, float) else str(v)
        lines.append(f"{k:<{width}}  {v}")
    return "\n".join(lines)
