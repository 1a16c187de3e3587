#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Convert public Planetoid or Geom-GCN files into the adagpr dataset layout.

Planetoid (cora, citeseer, pubmed):
    convert_planetoid.py planetoid --raw DIR --name cora --out data/cora

    DIR holds ind.<name>.{x,y,tx,ty,allx,ally,graph,test.index}. Nodes are
    ordered as allx followed by the test rows sorted by test.index, the usual
    reordering. split.json holds the standard split: the first len(y) nodes
    for training, the next 500 for validation and the test.index nodes for
    testing. Citeseer's isolated test ids get zero features and label 0 and
    are left out of every split.

Geom-GCN (cornell, texas, wisconsin, chameleon, ...):
    convert_planetoid.py geom --raw DIR --out data/cornell [--split FILE.npz]

    DIR holds out1_node_feature_label.txt and out1_graph_edges.txt. With
    --split the masks of one of the published 60/20/20 splits are written.

Edges are written once per undirected pair with u < v; self-loops and
duplicates are dropped. Features are written unnormalized.
"""

import argparse
import json
import pickle
import sys
from pathlib import Path

import numpy as np


def write_dataset(out, features, labels, edges, split=None):
    out.mkdir(parents=True, exist_ok=True)
    pairs = sorted({(min(u, v), max(u, v)) for u, v in edges if u != v})
    with open(out / "graph.edges", "w") as f:
        for u, v in pairs:
            f.write(f"{u}\t{v}\n")
    with open(out / "features.csv", "w") as f:
        for row in features:
            f.write(",".join(repr(float(x)) for x in row) + "\n")
    with open(out / "labels.csv", "w") as f:
        for y in labels:
            f.write(f"{int(y)}\n")
    if split is not None:
        with open(out / "split.json", "w") as f:
            json.dump({k: sorted(int(i) for i in split[k]) for k in ("test", "train", "val")}, f,
                      separators=(",", ":"))
            f.write("\n")
    print(f"{out}: {len(labels)} nodes, {features.shape[1]} features, "
          f"{int(labels.max()) + 1} classes, {len(pairs)} undirected edges")


def load_pickle(path):
    with open(path, "rb") as f:
        return pickle.load(f, encoding="latin1")


def dense(m):
    return m.toarray() if hasattr(m, "toarray") else np.asarray(m)


def convert_planetoid(raw, name, out):
    parts = {k: load_pickle(raw / f"ind.{name}.{k}") for k in ("x", "y", "tx", "ty", "allx", "ally", "graph")}
    test_index = [int(line) for line in open(raw / f"ind.{name}.test.index")]
    test_sorted = np.sort(test_index)

    tx, ty = dense(parts["tx"]), np.asarray(parts["ty"])
    isolated = []
    if name == "citeseer":
        full = range(test_sorted.min(), test_sorted.max() + 1)
        tx_ext = np.zeros((len(full), tx.shape[1]))
        ty_ext = np.zeros((len(full), ty.shape[1]))
        tx_ext[test_sorted - test_sorted.min(), :] = tx
        ty_ext[test_sorted - test_sorted.min(), :] = ty
        tx, ty = tx_ext, ty_ext
        present = set(test_index)
        isolated = [i for i in full if i not in present]

    features = np.vstack([dense(parts["allx"]), tx])
    onehot = np.vstack([np.asarray(parts["ally"]), ty])
    features[test_index, :] = features[test_sorted, :]
    onehot[test_index, :] = onehot[test_sorted, :]
    labels = onehot.argmax(axis=1)

    edges = [(u, v) for u, nbrs in parts["graph"].items() for v in nbrs]
    n_train = len(parts["y"])
    excluded = set(isolated)
    split = {
        "train": [i for i in range(n_train) if i not in excluded],
        "val": [i for i in range(n_train, n_train + 500) if i not in excluded],
        "test": [i for i in test_sorted.tolist() if i not in excluded],
    }
    write_dataset(out, features, labels, edges, split)


def convert_geom(raw, out, split_file):
    ids, feats, labels = [], [], []
    with open(raw / "out1_node_feature_label.txt") as f:
        next(f)
        for line in f:
            node, feat, label = line.rstrip("\n").split("\t")
            ids.append(int(node))
            feats.append([float(x) for x in feat.split(",")])
            labels.append(int(label))
    order = np.argsort(ids)
    features = np.asarray(feats)[order]
    labels = np.asarray(labels)[order]
    edges = []
    with open(raw / "out1_graph_edges.txt") as f:
        next(f)
        for line in f:
            u, v = line.split()
            edges.append((int(u), int(v)))
    split = None
    if split_file:
        masks = np.load(split_file)
        split = {k: np.flatnonzero(masks[f"{k}_mask"]).tolist() for k in ("train", "val", "test")}
    write_dataset(out, features, labels, edges, split)


def main(argv):
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="layout", required=True)
    p = sub.add_parser("planetoid")
    p.add_argument("--raw", type=Path, required=True)
    p.add_argument("--name", required=True, choices=["cora", "citeseer", "pubmed"])
    p.add_argument("--out", type=Path, required=True)
    g = sub.add_parser("geom")
    g.add_argument("--raw", type=Path, required=True)
    g.add_argument("--out", type=Path, required=True)
    g.add_argument("--split", type=Path)
    args = parser.parse_args(argv)
    if args.layout == "planetoid":
        convert_planetoid(args.raw, args.name, args.out)
    else:
        convert_geom(args.raw, args.out, args.split)


if __name__ == "__main__":
    main(sys.argv[1:])
