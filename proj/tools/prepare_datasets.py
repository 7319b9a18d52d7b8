#!/usr/bin/env python3
"""Convert public Cora / Wiki releases into the edge and label files boostne reads.

    prepare_datasets.py cora --cites cora.cites --content cora.content --out data/cora
    prepare_datasets.py wiki --graph Wiki_edgelist.txt --groups Wiki_category.txt --out data/wiki

Cora: the LINQS release (cora.cites is "cited citing" per line, cora.content
ends every row with the class name). Wiki: any whitespace edge list plus a
"node label [label ...]" file, such as the OpenNE copy of the 17-topic Wiki set.
"""

import argparse
import pathlib
import sys


def write_pairs(path, rows):
    with open(path, "w", encoding="utf-8") as f:
        for row in rows:
            f.write(" ".join(row) + "\n")


def cora(args):
    labels = []
    with open(args.content, encoding="utf-8") as f:
        for line in f:
            tok = line.split()
            if tok:
                labels.append((tok[0], tok[-1]))
    edges = []
    with open(args.cites, encoding="utf-8") as f:
        for line in f:
            tok = line.split()
            if len(tok) >= 2:
                edges.append((tok[0], tok[1]))
    return edges, labels


def wiki(args):
    edges = []
    with open(args.graph, encoding="utf-8") as f:
        for line in f:
            tok = line.split()
            if len(tok) >= 2 and not tok[0].startswith("#"):
                edges.append(tuple(tok[:2]))
    labels = []
    with open(args.groups, encoding="utf-8") as f:
        for line in f:
            tok = line.split()
            if len(tok) >= 2:
                labels.append((tok[0], *tok[1:]))
    return edges, labels


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="dataset", required=True)
    c = sub.add_parser("cora")
    c.add_argument("--cites", required=True)
    c.add_argument("--content", required=True)
    c.add_argument("--out", required=True)
    w = sub.add_parser("wiki")
    w.add_argument("--graph", required=True)
    w.add_argument("--groups", required=True)
    w.add_argument("--out", required=True)
    args = p.parse_args()

    edges, labels = cora(args) if args.dataset == "cora" else wiki(args)
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_pairs(out / f"{args.dataset}.edges", edges)
    write_pairs(out / f"{args.dataset}.labels", labels)

    undirected = {frozenset(e) for e in edges if e[0] != e[1]}
    nodes = {v for e in undirected for v in e}
    print(f"{args.dataset}: {len(nodes)} nodes, {len(undirected)} undirected edges, {len(labels)} label rows",
          file=sys.stderr)


if __name__ == "__main__":
    main()
