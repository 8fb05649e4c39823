"""Smoke test for the `pfa` Python extension.

Build and install first:  pip install --no-build-isolation ./crates/py
Then run:                 python python/smoke_test.py
"""

import json
import os
import tempfile

import pfa


def main():
    ex1 = pfa.synth("example1", n=5000, seed=42)
    assert (ex1.n_outputs, ex1.n_features, ex1.n_points) == (0, 5, 5000)

    result = pfa.run_pfa(ex1, pfa.Config(100))
    assert result.principal_subgraphs == [[1], [2], [3]], result.principal_subgraphs
    assert [r["nodes"] for r in result.removed] == [[4], [5]]
    assert json.loads(result.to_json())["principal_features"] == [1, 2, 3]

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "ex1.csv")
        ex1.save_csv(path)
        back = pfa.Dataset.load_csv(path, 0)
        assert back.to_csv() == ex1.to_csv()

    # Rows: y, x1, x2 with y a threshold of x1 + x2 / sqrt(10).
    ex4 = pfa.synth("example4", n=10000, seed=42)
    reduced = pfa.analyze(ex4, pfa.Config(100, theta=0.05))
    assert reduced.selected == [2], reduced.selected
    scores = dict(reduced.mi_scores)
    assert scores[2] > 5 * scores[3]

    intersection, runs = pfa.robust_intersection(ex1, pfa.Config(100), 3, 0.9)
    assert intersection == [1, 2, 3] and len(runs) == 3

    assert pfa.min_node_cut(4, [(1, 2), (2, 3), (3, 4), (4, 1)]) in ([1, 3], [2, 4])
    survivors, cuts = pfa.dissect(5, [(4, 1), (4, 2), (4, 3), (4, 5), (5, 1), (5, 2)])
    assert survivors == [[1], [2], [3]] and cuts == [[4], [5]]

    assert abs(pfa.chi_square_p_value(3.841, 1) - 0.05) < 1e-3
    halves = [0.0] * 500 + [1.0] * 500
    verdict = pfa.independence_test(halves, halves, nu=10)
    assert not verdict["independent"] and verdict["chi2"] == 1000.0

    try:
        pfa.Config(100, alpha=2.0)
    except ValueError:
        pass
    else:
        raise AssertionError("invalid alpha accepted")
    try:
        pfa.Dataset.load_csv("/nonexistent/data.csv")
    except OSError:
        pass
    else:
        raise AssertionError("missing file accepted")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
