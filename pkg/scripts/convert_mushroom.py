#!/usr/bin/env python3
"""Convert the UCI mushroom CSV into the toolkit's dataset files.

Download ``agaricus-lepiota.data`` from the UCI repository yourself (it
is not bundled here), then:

    python scripts/convert_mushroom.py agaricus-lepiota.data data/mushroom

This writes edges.txt, edge_labels.txt and manifest.json into the output
directory. Features are omitted on purpose: the loader assigns one-hot
identity rows when a manifest has no feature file, which is exactly the
treatment this dataset needs.
"""

import argparse

from hgad.data import convert_mushroom, save_dataset


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("raw", help="path to agaricus-lepiota.data")
    parser.add_argument("out_dir", help="directory for the converted dataset")
    args = parser.parse_args()

    ds = convert_mushroom(args.raw)
    manifest = save_dataset(ds, args.out_dir, include_features=False)
    edible = ds.num_inliers
    print(f"{ds.hypergraph.num_nodes} attribute-value nodes, "
          f"{ds.hypergraph.num_edges} species hyperedges "
          f"({edible} edible inliers, {ds.num_anomalies} poisonous anomalies)")
    print(f"manifest: {manifest}")


if __name__ == "__main__":
    main()
