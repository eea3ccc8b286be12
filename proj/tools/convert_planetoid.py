#!/usr/bin/env python3
"""Convert the public Cora/Citeseer archives (<name>.content + <name>.cites)
into the canonical dataset layout read by `saug`:

    <out>/edges.txt     one "u v" pair per line
    <out>/features.txt  one whitespace-separated row per node
    <out>/labels.txt    one integer per line (-1 = unlabeled)

Node ids are assigned by first appearance in the .content file; class names
map to integers in sorted order. Citation lines pointing at unknown papers
are dropped (a handful exist in the raw archives). The loader deduplicates
reversed edges and drops self loops itself, so this script writes the raw
pairs as-is.

Usage: convert_planetoid.py <name>.content <name>.cites <out_dir>
"""

import sys
from pathlib import Path


def main() -> int:
    if len(sys.argv) != 4:
        print(__doc__, file=sys.stderr)
        return 2
    content_path, cites_path, out_dir = sys.argv[1], sys.argv[2], Path(sys.argv[3])
    out_dir.mkdir(parents=True, exist_ok=True)

    ids = {}
    rows = []
    raw_labels = []
    with open(content_path) as f:
        for line in f:
            parts = line.split()
            if not parts:
                continue
            paper, feats, cls = parts[0], parts[1:-1], parts[-1]
            ids[paper] = len(ids)
            rows.append(feats)
            raw_labels.append(cls)

    classes = {name: i for i, name in enumerate(sorted(set(raw_labels)))}
    labels = [classes[c] for c in raw_labels]

    edges = []
    dropped = 0
    with open(cites_path) as f:
        for line in f:
            parts = line.split()
            if len(parts) != 2:
                continue
            a, b = parts
            if a in ids and b in ids:
                edges.append((ids[a], ids[b]))
            else:
                dropped += 1

    with open(out_dir / "features.txt", "w") as f:
        for feats in rows:
            f.write(" ".join(feats) + "\n")
    with open(out_dir / "labels.txt", "w") as f:
        f.write("".join(f"{y}\n" for y in labels))
    with open(out_dir / "edges.txt", "w") as f:
        f.write("".join(f"{u} {v}\n" for u, v in edges))

    print(
        f"wrote {out_dir}: {len(ids)} nodes, {len(edges)} edge lines "
        f"({dropped} dangling citations dropped), {len(rows[0])} features, "
        f"{len(classes)} classes"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
