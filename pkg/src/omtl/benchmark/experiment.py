"""Experiment orchestration and report emission for ``run`` and ``compare``."""
from __future__ import annotations

import csv
import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .. import __version__
from ..mt_wrls import MtWrls, mt_batch_oracle
from ..task_graph import TaskGraph
from .config import RunConfig
from .data import MultiTaskDataset, load_csv_tasks, sample_windows, synth_generate
from .evaluation import RunResult, evaluate_online
from .protocol import ElmConfig, SplitSpec, prepare
from .stats import friedman_fisher


def dataset_id(ds: MultiTaskDataset) -> str:
    src = ds.source
    if src.get("synthetic"):
        return f"synth-s{src['seed']}"
    stem = Path(src.get("file", "data")).stem
    return f"{stem}-w{ds.subset_id}" if "window_start" in src else stem


def load_datasets(cfg: RunConfig) -> list:
    out = []
    for path in cfg.data:
        ds = load_csv_tasks(path, min_rows=cfg.lag + 2)
        if cfg.windows:
            w = cfg.windows
            out.extend(sample_windows(ds, int(w["n_subsets"]), int(w["length"]), int(w["seed"])))
        else:
            out.append(ds)
    if cfg.synth:
        s = cfg.synth
        out.extend(synth_generate(int(s["tasks"]), int(s["len"]), float(s["coupling"]), int(seed))
                   for seed in s["seeds"])
    return out


def _prepare(cfg: RunConfig, ds: MultiTaskDataset):
    elm = ElmConfig(int(cfg.elm["hidden"]), int(cfg.elm["seed"]), bool(cfg.elm["standardize"])) \
        if cfg.elm else None
    return prepare(ds, SplitSpec(float(cfg.mu)), int(cfg.lag), elm, cfg.similarity_source)


def _job(args):
    cfg, ds, method = args
    p = _prepare(cfg, ds)
    return evaluate_online(method, p, grids=cfg.grids, gamma=float(cfg.gamma),
                           capacity=int(cfg.capacity))


def run_all(cfg: RunConfig, datasets) -> list:
    """Every (dataset, method) pair; returns ``results[i][j]`` for dataset i, method j."""
    jobs = [(cfg, ds, m) for ds in datasets for m in cfg.methods]
    if int(cfg.jobs) > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=int(cfg.jobs)) as pool:
            flat = list(pool.map(_job, jobs))
    else:
        flat = [_job(j) for j in jobs]
    M = len(cfg.methods)
    return [flat[i * M:(i + 1) * M] for i in range(len(datasets))]


def oracle_check(cfg: RunConfig, ds: MultiTaskDataset, lam: float, n_max: int = 60) -> float:
    """Max deviation between recursive MT-WRLS weights and the dense solve on
    every prefix of the first ``n_max`` test samples (no forgetting)."""
    p = _prepare(cfg, ds)
    tasks, X, Y = p.stream("test")
    n = min(n_max, len(Y))
    graph = TaskGraph.from_similarities(p.sims, float(cfg.gamma), lam)
    model = MtWrls(graph, p.d, 1.0)
    worst = 0.0
    for i in range(n):
        model.step(int(tasks[i]), X[i], Y[i])
        ref = mt_batch_oracle(zip(tasks[:i + 1], X[:i + 1], Y[:i + 1]), graph)
        worst = max(worst, float(np.max(np.abs(model.weights.ravel() - ref))))
    return worst


def _method_labels(methods):
    seen, labels = {}, []
    for m in methods:
        seen[m] = seen.get(m, 0) + 1
        labels.append(m if seen[m] == 1 else f"{m}#{seen[m]}")
    return labels


def _result_record(label: str, r: RunResult, names) -> dict:
    rec = {
        "method": label,
        "params": r.params,
        "per_task": [dict(task=t, name=names[t], **asdict(m)) for t, m in enumerate(r.per_task)],
        "mean": asdict(r.mean),
        "seconds": round(r.seconds, 4),
    }
    if r.search is not None:
        rec["search"] = {"evaluated": len(r.search.scores), "failed": len(r.search.failures)}
    return rec


def write_traces(path: Path, r: RunResult) -> None:
    T, n = r.predictions.shape
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "task", "actual", "predicted", "persistence"])
        for i in range(n):
            for t in range(T):
                w.writerow([i, t, repr(float(r.actuals[t, i])), repr(float(r.predictions[t, i])),
                            repr(float(r.persistence[t, i]))])


def summarize(labels, results) -> dict:
    """Mean-metric table plus Friedman/LSD statistics over datasets (rows)."""
    rel = np.array([[r.mean.relrmse for r in row] for row in results])
    relmae = np.array([[r.mean.relmae for r in row] for row in results])
    out = {"rows": [{"method": m, "RELRMSE": float(rel[:, j].mean()), "RELMAE": float(relmae[:, j].mean())}
                    for j, m in enumerate(labels)]}
    if rel.shape[0] >= 2 and rel.shape[1] >= 2:
        f = friedman_fisher(rel)
        out["friedman"] = {"statistic": f.statistic, "p_value": f.p_value,
                           "critical_difference": f.critical_difference}
        for j, row in enumerate(out["rows"]):
            row.update(mean_rank=float(f.mean_ranks[j]), victories=int(f.victories[j]),
                       defeats=int(f.defeats[j]))
    return out


def format_table(summary: dict) -> str:
    rows = summary["rows"]
    ranked = "mean_rank" in rows[0]
    head = f"{'method':<14}{'RELRMSE':>10}{'RELMAE':>10}"
    if ranked:
        head += f"{'rank':>8}{'wins':>6}{'losses':>8}"
    lines = [head]
    for r in rows:
        line = f"{r['method']:<14}{r['RELRMSE']:>10.4f}{r['RELMAE']:>10.4f}"
        if ranked:
            line += f"{r['mean_rank']:>8.2f}{r['victories']:>6d}{r['defeats']:>8d}"
        lines.append(line)
    if "friedman" in summary:
        f = summary["friedman"]
        lines.append(f"Friedman chi2 = {f['statistic']:.4f}, p = {f['p_value']:.4g}")
    return "\n".join(lines)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_outputs(command: str, cfg: RunConfig, datasets, results, out: Path,
                  extra: dict | None = None) -> dict:
    """Report JSON, per-run traces, summary CSV and a manifest under ``out``."""
    out.mkdir(parents=True, exist_ok=True)
    (out / "traces").mkdir(exist_ok=True)
    labels = _method_labels(cfg.methods)
    files = []
    records = []
    for ds, row in zip(datasets, results):
        did = dataset_id(ds)
        entries = []
        for label, r in zip(labels, row):
            trace = out / "traces" / f"{did}__{label.replace('#', '_')}.csv"
            write_traces(trace, r)
            files.append(trace)
            entries.append(_result_record(label, r, ds.names))
        records.append({"id": did, "source": ds.source, "T": ds.T, "n": ds.n,
                        "n_train": int(np.floor(cfg.mu * (ds.n - 1 - cfg.lag))),
                        "results": entries})
    summary = summarize(labels, results)
    report = {"tool": "omtl", "version": __version__, "command": command,
              "config": cfg.to_dict(), "datasets": records, "summary": summary}
    if extra:
        report.update(extra)
    rpath = out / "report.json"
    rpath.write_text(json.dumps(report, indent=2, sort_keys=True))
    files.append(rpath)
    spath = out / "summary.csv"
    with open(spath, "w", newline="") as fh:
        cols = list(summary["rows"][0])
        w = csv.DictWriter(fh, fieldnames=cols)
        w.writeheader()
        w.writerows(summary["rows"])
    files.append(spath)
    manifest = {"command": command, "files": [
        {"path": str(f.relative_to(out)), "sha256": _sha256(f), "bytes": f.stat().st_size}
        for f in files]}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return report
