"""Writes a tiny Planetoid-format file set with numpy/scipy pickles.

The test-index range has gaps, like CiteSeer, so the loader's padding
path is exercised. expected.json holds the dataset as produced by the
usual reordering recipe.
"""
import json
import pickle
from collections import defaultdict
from pathlib import Path

import numpy as np
import scipy.sparse as sp

out = Path(__file__).parent / "planetoid"
out.mkdir(exist_ok=True)
rng = np.random.default_rng(0)

n_all, f, c = 8, 5, 3
test_index = [11, 8, 13, 9]  # 10 and 12 are missing from tx
allx = sp.csr_matrix((rng.random((n_all, f)) < 0.4).astype(np.float32))
ally = np.eye(c, dtype=np.int32)[rng.integers(0, c, n_all)]
tx = sp.csr_matrix(rng.random((len(test_index), f)).astype(np.float32) * (rng.random((len(test_index), f)) < 0.5))
ty = np.eye(c, dtype=np.int32)[rng.integers(0, c, len(test_index))]
x, y = allx[:3], ally[:3]
graph = defaultdict(list)
for u, v in [(0, 1), (1, 2), (2, 0), (3, 11), (11, 3), (4, 8), (5, 5), (6, 13), (9, 7), (12, 1), (10, 2), (1, 2)]:
    graph[u].append(v)

protocols = {"x": 2, "y": 2, "tx": 4, "ty": 2, "allx": 2, "ally": 5, "graph": 2}
for name, obj in [("x", x), ("y", y), ("tx", tx), ("ty", ty), ("allx", allx), ("ally", ally), ("graph", graph)]:
    with open(out / f"ind.citeseer.{name}", "wb") as fh:
        pickle.dump(obj, fh, protocol=protocols[name])
(out / "ind.citeseer.test.index").write_text("".join(f"{i}\n" for i in test_index))

# reordering recipe
sorted_index = sorted(test_index)
lo, hi = sorted_index[0], sorted_index[-1]
tx_ext = np.zeros((hi - lo + 1, f), dtype=np.float32)
tx_ext[np.array(sorted_index) - lo] = tx.toarray()
ty_ext = np.zeros((hi - lo + 1, c), dtype=np.int32)
ty_ext[np.array(sorted_index) - lo] = ty
feats = np.vstack([allx.toarray(), tx_ext])
labels = np.vstack([ally, ty_ext])
feats[test_index] = feats[sorted_index]
labels[test_index] = labels[sorted_index]
edges = sorted({(min(u, v), max(u, v)) for u, vs in graph.items() for v in vs if u != v})
expected = {
    "features": feats.astype(np.float64).tolist(),
    "labels": labels.argmax(1).tolist(),
    "edges": [list(e) for e in edges],
    "num_classes": c,
}
(out / "expected.json").write_text(json.dumps(expected))
