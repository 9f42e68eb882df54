"""Converters from common public dataset layouts to the files read by
:func:`pairprox.dataset.load_dataset`.

Supported inputs:

* LINQS citation format (``cora.content`` + ``cora.cites``): one node per
  line as ``id  bit... label``; one citation per line as ``cited  citing``.
* Geom-GCN web graphs (``out1_node_feature_label.txt`` +
  ``out1_graph_edges.txt``), used for Texas, Cornell and Wisconsin.
* OGB collaboration raw CSVs (``edge.csv.gz``, ``edge_year.csv.gz``,
  ``edge_weight.csv.gz``, ``node-feat.csv.gz``), optionally merged with the
  held-out ``split/time/{valid,test}.pt`` files when torch is available.

Run ``python -m pairprox.formats <kind> <inputs...> <outdir>``.
"""

from __future__ import annotations

import argparse
import csv
import gzip
import sys
from pathlib import Path

import numpy as np

from .domain import write_block_csv, write_classes_csv
from .errors import InputError
from .graph import write_edge_list


def _label_ids(labels: list[str]) -> tuple[list[int], list[str]]:
    names = sorted(set(labels))
    index = {name: i for i, name in enumerate(names)}
    return [index[x] for x in labels], names


def _write_static(out: Path, ids, bits, labels, edges) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    write_block_csv(out / "attributes.csv", np.asarray(bits, dtype=np.int8), ids)
    write_classes_csv(out / "classes.csv", labels, ids)
    write_edge_list(out / "edges.tsv", edges)
    return {"edges": str(out / "edges.tsv"), "attributes": str(out / "attributes.csv"),
            "classes": str(out / "classes.csv")}


def convert_linqs(content, cites, out) -> dict:
    """Node ids are kept as given when numeric, otherwise numbered in file order.
    Citations to papers missing from the content file are dropped."""
    rows = []
    with open(content) as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) < 3:
                raise InputError(f"{content}:{lineno}: expected id, attributes and label")
            rows.append(parts)
    width = {len(r) for r in rows}
    if len(width) != 1:
        raise InputError(f"{content}: rows have differing attribute counts")
    keys = [r[0] for r in rows]
    numeric = all(k.lstrip("-").isdigit() for k in keys)
    ext = [int(k) for k in keys] if numeric else list(range(len(keys)))
    index = dict(zip(keys, ext))
    bits = [[int(float(x)) for x in r[1:-1]] for r in rows]
    labels, _ = _label_ids([r[-1] for r in rows])
    edges = []
    with open(cites) as fh:
        for line in fh:
            parts = line.split()
            if len(parts) == 2 and parts[0] in index and parts[1] in index and parts[0] != parts[1]:
                edges.append((index[parts[0]], index[parts[1]]))
    return _write_static(Path(out), ext, bits, labels, edges)


def convert_geom_gcn(node_file, edge_file, out) -> dict:
    ids, bits, labels = [], [], []
    with open(node_file) as fh:
        header = fh.readline()
        if not header.startswith("node_id"):
            raise InputError(f"{node_file}: expected a 'node_id' header line")
        for lineno, line in enumerate(fh, 2):
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 3:
                raise InputError(f"{node_file}:{lineno}: expected node_id, features, label")
            ids.append(int(parts[0]))
            bits.append([int(float(x)) for x in parts[1].split(",")])
            labels.append(int(parts[2]))
    edges = []
    with open(edge_file) as fh:
        fh.readline()
        for line in fh:
            parts = line.split()
            if len(parts) == 2 and parts[0] != parts[1]:
                edges.append((int(parts[0]), int(parts[1])))
    order = np.argsort(ids, kind="stable")
    ids = [ids[i] for i in order]
    return _write_static(Path(out), ids, [bits[i] for i in order], [labels[i] for i in order], edges)


def _read_csv_gz(path) -> np.ndarray:
    with gzip.open(path, "rt") as fh:
        return np.array([[float(x) for x in row] for row in csv.reader(fh) if row])


def convert_ogb_collab(raw_dir, out, split_dir=None) -> dict:
    """Merge the training records with the held-out 2018/2019 edges (when
    ``split_dir`` holds ``valid.pt``/``test.pt`` and torch is installed)."""
    raw = Path(raw_dir)
    edge = _read_csv_gz(raw / "edge.csv.gz").astype(np.int64)
    year = _read_csv_gz(raw / "edge_year.csv.gz").astype(np.int64).ravel()
    weight = _read_csv_gz(raw / "edge_weight.csv.gz").astype(np.int64).ravel()
    feats = _read_csv_gz(raw / "node-feat.csv.gz")
    parts = [(edge, year, weight)]
    if split_dir is not None:
        try:
            import torch
        except ImportError as exc:
            raise InputError("reading split/*.pt files requires torch") from exc
        for name in ("valid", "test"):
            d = torch.load(Path(split_dir) / f"{name}.pt", weights_only=False)
            parts.append((np.asarray(d["edge"]), np.asarray(d["year"]).ravel(),
                          np.asarray(d["weight"]).ravel()))
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "edges.tsv", "w") as fh:
        for e, y, w in parts:
            for (a, b), yy, ww in zip(e.tolist(), y.tolist(), w.tolist()):
                if a != b:
                    fh.write(f"{a}\t{b}\t{yy}\t{ww}\n")
    write_block_csv(out / "real.csv", feats, range(len(feats)))
    return {"edges": str(out / "edges.tsv"), "real_attributes": str(out / "real.csv"),
            "temporal": True}


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="python -m pairprox.formats")
    sub = p.add_subparsers(dest="kind", required=True)
    s = sub.add_parser("linqs")
    s.add_argument("content")
    s.add_argument("cites")
    s.add_argument("out")
    s = sub.add_parser("geom-gcn")
    s.add_argument("nodes")
    s.add_argument("edges")
    s.add_argument("out")
    s = sub.add_parser("ogb-collab")
    s.add_argument("raw_dir")
    s.add_argument("out")
    s.add_argument("--split-dir")
    args = p.parse_args(argv)
    try:
        if args.kind == "linqs":
            paths = convert_linqs(args.content, args.cites, args.out)
        elif args.kind == "geom-gcn":
            paths = convert_geom_gcn(args.nodes, args.edges, args.out)
        else:
            paths = convert_ogb_collab(args.raw_dir, args.out, args.split_dir)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for k, v in paths.items():
        print(f"{k}: {v}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
