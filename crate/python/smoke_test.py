"""Smoke test for the featnet extension module.

Build and run from the repository root:

    cargo build -p featnet-py --release
    cp target/release/libfeatnet_py.so python/featnet.so
    python3 python/smoke_test.py
"""

import json
import os
import random
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import featnet  # noqa: E402


def make_table(n_rows=400, seed=7):
    rng = random.Random(seed)
    names = [f"f{i}" for i in range(12)]
    rows, labels = [], []
    for i in range(n_rows):
        label = 1 if i % 2 else -1
        row = []
        for j in range(12):
            fresh = rng.choice((-1, 0, 1))
            if j % 4 == 0:
                row.append(label if rng.random() < 0.2 else fresh)
            else:
                row.append(row[j - j % 4] if rng.random() < 0.7 else fresh)
        rows.append(row)
        labels.append(label)
    return featnet.FeatureTable(names, rows, labels, "smoke")


def main():
    table = make_table()
    assert len(table) == 400 and table.n_features == 12

    corr = featnet.spearman(table)
    values = corr.values
    assert all(abs(values[i][j] - values[j][i]) < 1e-15 for i in range(12) for j in range(12))
    assert all(values[i][i] == 1.0 for i in range(12))

    graph = corr.graph()
    assert len(graph.edges) == 12 * 11 // 2

    tree = featnet.maximum_spanning_tree(graph)
    assert len(tree.edges) == 11
    assert sum(d for _, d in tree.degrees()) == 22

    partition = featnet.louvain(graph)
    q = featnet.modularity(graph, partition.assignment)
    assert abs(q - partition.modularity) < 1e-9

    hubs = featnet.find_hubs(tree, partition)
    assert all(degree > 2 for _, degree, _ in hubs)
    print("hubs:", hubs)
    print("gamma:", tree.gamma(), tree.gamma("mle"))

    named = featnet.evaluate(table, features=["f0", "f4", "f8"], rounds=30)
    pca = featnet.evaluate(table, pca_components=3, rounds=30)
    print("accuracy named %.3f, pca %.3f" % (named["accuracy"], pca["accuracy"]))
    assert 0.0 <= named["accuracy"] <= 1.0

    legit = table.partition("legitimate")
    assert set(legit.labels) == {1}

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "data.csv")
        table.save_csv(path)
        again = featnet.FeatureTable.load(path)
        assert again.rows() == table.rows()
        manifest = json.loads(featnet.run_pipeline(path, out_dir=os.path.join(tmp, "out")))
        assert manifest["schema_version"] == 1
        assert len(manifest["entries"]) == 3
        assert os.path.isfile(os.path.join(tmp, "out", "all", "mst.graphml"))

    try:
        featnet.spearman(table, mode="kendall")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown mode accepted")

    try:
        featnet.FeatureTable.load("/nonexistent/file.csv")
    except OSError:
        pass
    else:
        raise AssertionError("missing file accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
