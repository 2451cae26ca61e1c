"""Smoke test for the outbreak_local extension module.

Build and run from the repository root:

    python3 python/smoke_test.py --build
"""

import json
import os
import shutil
import subprocess
import sys
import sysconfig
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def build():
    subprocess.run(
        ["cargo", "build", "--release", "-p", "outbreak-local-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    lib = os.path.join(ROOT, "target", "release", "liboutbreak_local_py.so")
    dest = os.path.join(ROOT, "python", "outbreak_local" + sysconfig.get_config_var("EXT_SUFFIX"))
    shutil.copyfile(lib, dest)


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol


def main():
    if "--build" in sys.argv:
        build()
    sys.path.insert(0, os.path.join(ROOT, "python"))
    import outbreak_local as ol

    k3 = ol.Graph.complete(3)
    assert (k3.n, k3.m) == (3, 3), k3
    assert ol.exact_component_distribution(k3, 0, 0.5) == {1: 0.25, 2: 0.25, 3: 0.5}
    assert ol.exact_outbreak_distribution(k3, [0, 1], 0.5) == {2: 0.25, 3: 0.75}
    assert close(ol.exact_zeta_k(ol.Graph.path(3), 0, 2, 0.3), 0.09)

    zeta, eta = ol.survival_fixed_point([0, 0, 0, 1], 0.9)
    assert close(eta, 1 / 81) and close(zeta, 1 - (0.1 + 0.9 / 81) ** 3)
    assert close(ol.lambda_to_p(1.0), 0.5)

    g, prov = ol.gen_k_regular(3, 2000, 7)
    assert set(g.degrees()) == {3} and prov["model"] == "k_regular"
    again, _ = ol.gen_k_regular(3, 2000, 7)
    assert g.edges() == again.edges()

    mask = ol.percolate(g, 0.7, 1)
    assert len(mask) == g.m
    run = ol.run_sir(g, [0], 0.7, 5)
    assert run["final_size"] == len(run["infected"])

    report = ol.estimate(g, 20, 200, 0.9, 3)
    assert 0.9 <= report["n_tilde"] <= 1.0, report["n_tilde"]
    hist = ol.outbreak_histogram(g, 100, 0.7, 3)
    assert len(hist["final_sizes"]) == 100
    giant = ol.giant_fraction(g, 0.9, 3, 1)
    assert abs(giant["estimate"]["mean"] - zeta) < 0.02

    rep = ol.expansion(ol.Graph.complete(4), 0.25)
    assert rep["value"] == 2.0 and rep["exact"]
    bridges = ol.pivotal_bridge_report(ol.Graph.path(3), 0, 2, 0.5, 2000, 1)
    assert abs(bridges["pivotal_rate"] - 1.0) < 0.1

    try:
        ol.gen_cm([3, 3, 3], 1)
    except ValueError as e:
        assert "E_PARITY" in str(e)
    else:
        raise AssertionError("odd degree sum accepted")

    with tempfile.TemporaryDirectory() as out:
        config = {
            "gen": {"model": "k_regular", "d": 3, "n": 500, "seed": 1},
            "process": {"p": 0.7},
            "tasks": [{"task": "histogram", "trials": 50}],
            "master_seed": 9,
        }
        manifest = ol.run_experiment(json.dumps(config), out)
        assert [t["status"] for t in manifest["tasks"]] == ["ok"]
        assert os.path.exists(os.path.join(out, "manifest.json"))

    print("smoke test passed:", ol.__version__)


if __name__ == "__main__":
    main()
