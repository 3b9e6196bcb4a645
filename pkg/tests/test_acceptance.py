"""Acceptance suite: one test per criterion, each printing a PASS line.

Trend thresholds and seeds were frozen from build-time Monte-Carlo runs
(batches 0-4, 5-9, 10-14 all satisfy the trend criteria; the tests pin
seeds 0-4).  Run with `pytest -s tests/test_acceptance.py` to see the
per-criterion lines.
"""

import hashlib
import json
import math
import os
import time

import numpy as np
import pytest

from kitescore.cli import main
from kitescore.errors import ProbeCappedWarning
from kitescore.estimators import ScoreRequest, score_kite, score_ra, score_ta
from kitescore.evaluation import pearson, ta_ra_correlation, weighted_kendall_tau
from kitescore.io_formats import read_features, write_features
from kitescore.kernels import (
    FeatureMatrix,
    KernelMatrix,
    LabelVector,
    cka,
    compute_kernel,
    target_kernel,
)
from kitescore.pipeline import PipelineConfig, score_model
from kitescore.synth import (
    SyntheticZooSpec,
    gen_easy_task,
    gen_gaussian_mixture,
    gen_hard_task,
    gen_synthetic_zoo,
    two_class_spec,
    zoo_split,
)

pytestmark = pytest.mark.filterwarnings("ignore::kitescore.errors.ProbeCappedWarning")


def _pass(name):
    print(f"\nACCEPTANCE PASS: {name}")


# ---------------------------------------------------------------- oracles


def hsic_oracle(k, el):
    n = k.shape[0]
    h = np.eye(n) - np.ones((n, n)) / n
    return float(np.trace(k @ h @ el @ h)) / (n - 1) ** 2


def cka_oracle(k, el):
    return hsic_oracle(k, el) / math.sqrt(hsic_oracle(k, k) * hsic_oracle(el, el))


def kernel_entry_oracle(x, kind, sigma):
    n = x.shape[0]
    out = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            if kind == "linear":
                out[i, j] = float(np.dot(x[i], x[j]))
            elif kind == "gaussian":
                out[i, j] = math.exp(-float(np.sum((x[i] - x[j]) ** 2)) / (2 * sigma**2))
            else:
                out[i, j] = math.exp(-float(np.sum(np.abs(x[i] - x[j]))) / sigma)
    return out


def tau_bruteforce(scores, truth):
    n = len(scores)
    order = sorted(range(n), key=lambda i: -truth[i])
    ranks = [0.0] * n
    pos = 0
    while pos < n:
        end = pos
        while end + 1 < n and truth[order[end + 1]] == truth[order[pos]]:
            end += 1
        for t in range(pos, end + 1):
            ranks[order[t]] = (pos + end) / 2.0
        pos = end + 1
    num, den = [], []
    for i in range(n):
        for j in range(i + 1, n):
            w = 1.0 / (1.0 + ranks[i]) + 1.0 / (1.0 + ranks[j])
            ds = int(scores[i] > scores[j]) - int(scores[i] < scores[j])
            dt = int(truth[i] > truth[j]) - int(truth[i] < truth[j])
            if ds == 0 and dt == 0:
                continue
            num.append(w * ds * dt)
            den.append(w)
    return math.fsum(num) / math.fsum(den)


def _suite_scores(task, seed):
    """TA / RA / KITE scores plus ground truth for one zoo instance."""
    raw, labels = task
    spec = SyntheticZooSpec(raw_dim=raw.d, num_models=8, seed=seed)
    zoo = gen_synthetic_zoo(spec, task)
    scoring, _ = zoo_split(raw.n, seed, spec.holdout_fraction)
    raw_s = FeatureMatrix(raw.data[scoring], "synthetic")
    lab_s = LabelVector(labels.labels[scoring], labels.num_classes)
    out = {"truth": [m.ground_truth_accuracy for m in zoo]}
    for est in ("ta", "ra", "kite"):
        cfg = PipelineConfig(estimator=est, seed=seed)
        out[est] = [score_model(m.features, lab_s, raw_s, cfg) for m in zoo]
    return out


@pytest.fixture(scope="module")
def suite_results():
    easy = [_suite_scores(gen_easy_task(seed=s), s) for s in range(5)]
    hard = [_suite_scores(gen_hard_task(seed=s), s) for s in range(5)]
    return {"easy": easy, "hard": hard}


# -------------------------------------------------------------- criteria


def test_cka_correctness():
    rng = np.random.default_rng(0)
    start = time.perf_counter()
    for trial in range(200):
        n = int(rng.integers(3, 51))
        g1 = rng.standard_normal((n, n))
        g2 = rng.standard_normal((n, n))
        k1, k2 = g1 @ g1.T, g2 @ g2.T
        got = cka(KernelMatrix(k1), KernelMatrix(k2))
        assert abs(got - cka_oracle(k1, k2)) < 1e-10
        assert 0.0 <= got <= 1.0
        if trial % 10 == 0:
            assert abs(cka(KernelMatrix(k1), KernelMatrix(k1.copy())) - 1.0) <= 1e-12
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    _pass(f"CKA correctness (200 PSD pairs, {elapsed:.2f}s)")


def test_kernel_oracle_equivalence():
    rng = np.random.default_rng(1)
    for _ in range(100):
        n, d = int(rng.integers(2, 17)), int(rng.integers(1, 9))
        x = rng.standard_normal((n, d))
        sigma = float(rng.uniform(0.5, 2.5))
        for kind in ("linear", "gaussian", "laplacian"):
            got = compute_kernel(FeatureMatrix(x, "synthetic"), kind, sigma=sigma)
            want = kernel_entry_oracle(x, kind, sigma)
            assert np.abs(got.data - want).max() < 1e-12
    _pass("kernel oracle equivalence (3 kernels x 100 matrices)")


def test_invariance_suite():
    rng = np.random.default_rng(2)
    x = rng.standard_normal((40, 8))
    rand = rng.standard_normal((40, 8))
    labels = LabelVector(rng.integers(0, 4, 40), 4)
    f = FeatureMatrix(x, "pretrained")
    fr = FeatureMatrix(rand, "random")
    req = ScoreRequest(pretrained=f, labels=labels, random=fr)
    ta0, ra0, kite0 = score_ta(f, labels), score_ra(f, fr), score_kite(req)

    q, _ = np.linalg.qr(rng.standard_normal((8, 8)))
    f_rot = FeatureMatrix(x @ q, "pretrained")
    assert abs(score_ta(f_rot, labels) - ta0) < 1e-9
    assert abs(score_ra(f_rot, fr) - ra0) < 1e-9
    assert abs(score_kite(ScoreRequest(pretrained=f_rot, labels=labels, random=fr)) - kite0) < 1e-9

    f_scaled = FeatureMatrix(17.0 * x, "pretrained")
    assert abs(score_ta(f_scaled, labels) - ta0) < 1e-12
    assert abs(score_ra(f_scaled, fr) - ra0) < 1e-12
    assert abs(score_kite(ScoreRequest(pretrained=f_scaled, labels=labels, random=fr)) - kite0) < 1e-12

    perm = rng.permutation(40)
    permuted = ScoreRequest(
        pretrained=FeatureMatrix(x[perm], "pretrained"),
        labels=LabelVector(labels.labels[perm], 4),
        random=FeatureMatrix(rand[perm], "random"),
    )
    assert score_kite(permuted) == kite0  # exact
    _pass("invariance suite (orthogonal 1e-9, scaling 1e-12, permutation exact)")


def test_ratio_identity():
    rng = np.random.default_rng(3)
    for _ in range(50):
        n, d = int(rng.integers(6, 30)), int(rng.integers(2, 8))
        f = FeatureMatrix(rng.standard_normal((n, d)), "pretrained")
        fr = FeatureMatrix(rng.standard_normal((n, d)), "random")
        labels = LabelVector(np.arange(n) % 3, 3)
        req = ScoreRequest(pretrained=f, labels=labels, random=fr)
        want = score_ta(f, labels) / score_ra(f, fr)
        assert abs(score_kite(req) - want) <= 1e-12
    _pass("ratio identity: kite = ta / ra (50 random inputs)")


def test_separability_trend():
    start = time.perf_counter()
    means = []
    for sep in (0.5, 1.0, 2.0, 4.0):
        vals = [
            score_ta(*gen_gaussian_mixture(two_class_spec(sep, 250, dim=2, seed=s)), "linear")
            for s in range(10)
        ]
        means.append(float(np.mean(vals)))
    elapsed = time.perf_counter() - start
    assert all(a < b for a, b in zip(means, means[1:])), means
    assert elapsed < 10.0
    _pass(
        "separability trend: mean TA strictly increasing over separations "
        f"({', '.join(f'{m:.3f}' for m in means)}; {elapsed:.2f}s)"
    )


def test_ta_ra_anticorrelation(suite_results):
    for res in suite_results["easy"]:
        assert ta_ra_correlation(list(zip(res["ta"], res["ra"]))) < 0
    _pass("TA/RA anti-correlation on every one of 5 zoo seeds")


def test_regime_trends(suite_results):
    def mean_pc(runs, key, negate=False):
        sign = -1.0 if negate else 1.0
        return float(np.mean([pearson([sign * v for v in r[key]], r["truth"]) for r in runs]))

    easy_ta = mean_pc(suite_results["easy"], "ta")
    easy_nra = mean_pc(suite_results["easy"], "ra", negate=True)
    easy_kite = mean_pc(suite_results["easy"], "kite")
    hard_ta = mean_pc(suite_results["hard"], "ta")
    hard_nra = mean_pc(suite_results["hard"], "ra", negate=True)
    hard_kite = mean_pc(suite_results["hard"], "kite")

    assert easy_ta > easy_nra, (easy_ta, easy_nra)
    assert hard_nra > hard_ta, (hard_nra, hard_ta)
    assert easy_kite > max(easy_ta, easy_nra) - 0.1
    assert hard_kite > max(hard_ta, hard_nra) - 0.1
    _pass(
        "regime trends: easy PC(TA)={:.3f} > PC(-RA)={:.3f}; "
        "hard PC(-RA)={:.3f} > PC(TA)={:.3f}; KITE within 0.1 ({:.3f}/{:.3f})".format(
            easy_ta, easy_nra, hard_nra, hard_ta, easy_kite, hard_kite
        )
    )


def test_end_to_end_benchmark(tmp_path, capsys):
    for kind, target in (("zoo", "zoo"), ("hard", "hard")):
        assert main(["synth", kind, "--seed", "0", "--out", str(tmp_path / kind)]) == 0
    truth_lines = ["model_id,target_id,accuracy"]
    for kind in ("zoo", "hard"):
        truth_lines += (tmp_path / kind / "truth.csv").read_text().strip().splitlines()[1:]
    (tmp_path / "truth.csv").write_text("\n".join(truth_lines) + "\n")
    (tmp_path / "targets.json").write_text(
        json.dumps(
            {
                "targets": [
                    {"target_id": "zoo", "manifest": "zoo/manifest.json",
                     "raw_features": "zoo/raw.kfea"},
                    {"target_id": "hard", "manifest": "hard/manifest.json",
                     "raw_features": "hard/raw.kfea"},
                ]
            }
        )
    )
    rc = main([
        "eval", "--targets", str(tmp_path / "targets.json"),
        "--ground-truth", str(tmp_path / "truth.csv"),
        "--estimators", "kite,ta,ra", "--seeds", "0,1,2,3,4",
        "--out-dir", str(tmp_path / "reports"),
    ])
    capsys.readouterr()
    assert rc == 0
    summary = json.loads((tmp_path / "reports" / "summary.json").read_text())
    kite_pc = summary["estimators"]["kite"]["mean_pearson"]
    assert kite_pc >= 0.7
    _pass(f"end-to-end benchmark: KITE Mean PC = {kite_pc:.4f} >= 0.7 (5 seeds)")


def test_metric_oracles():
    rng = np.random.default_rng(4)
    for _ in range(1000):
        n = int(rng.integers(2, 51))
        truth = np.arange(n, dtype=float)
        scores = rng.permutation(n).astype(float)
        assert weighted_kendall_tau(scores, truth) == tau_bruteforce(list(scores), list(truth))
    for _ in range(100):
        x = rng.standard_normal(int(rng.integers(3, 40)))
        y = rng.standard_normal(x.size)
        n = x.size
        sx, sy = math.fsum(x), math.fsum(y)
        sxy = math.fsum(a * b for a, b in zip(x, y))
        sxx, syy = math.fsum(a * a for a in x), math.fsum(b * b for b in y)
        want = (n * sxy - sx * sy) / math.sqrt((n * sxx - sx * sx) * (n * syy - sy * sy))
        assert abs(pearson(x, y) - want) < 1e-12
    _pass("metric oracles: weighted tau exact on 1000 permutations; pearson textbook 1e-12")


def test_performance_single_model():
    rng = np.random.default_rng(5)
    features = FeatureMatrix(rng.standard_normal((500, 32)), "pretrained")
    rand = FeatureMatrix(rng.standard_normal((500, 32)), "random")
    labels = LabelVector(rng.integers(0, 10, 500), 10)
    cfg = PipelineConfig(estimator="kite", kernel="linear", pca_dim=32, seed=0)
    score_model(features, labels, None, cfg, random_features=rand)  # warm-up
    start = time.perf_counter()
    score_model(features, labels, None, cfg, random_features=rand)
    elapsed_ms = (time.perf_counter() - start) * 1000.0
    assert elapsed_ms < 500.0
    _pass(f"performance: KITE scoring n=500 d=32 in {elapsed_ms:.1f} ms < 500 ms")


def test_determinism(tmp_path, capsys):
    def tree_digest(root):
        digest = hashlib.sha256()
        for dirpath, _, files in sorted(os.walk(root)):
            for name in sorted(files):
                digest.update(name.encode())
                with open(os.path.join(dirpath, name), "rb") as fh:
                    digest.update(fh.read())
        return digest.hexdigest()

    hashes = []
    for _ in range(2):
        assert main(["synth", "zoo", "--seed", "7", "--out", str(tmp_path / "z")]) == 0
        hashes.append(tree_digest(tmp_path / "z"))
    assert hashes[0] == hashes[1]

    out_dir = str(tmp_path / "rep")
    eval_args = [
        "eval", "--targets", str(tmp_path / "z" / "targets.json"),
        "--ground-truth", str(tmp_path / "z" / "truth.csv"),
        "--estimators", "kite,heuristic", "--seeds", "0,1",
        "--out-dir", out_dir,
    ]
    report_hashes = []
    for jobs in ("1", "4"):
        assert main(eval_args + ["--jobs", jobs]) == 0
        report_hashes.append(tree_digest(out_dir))
    capsys.readouterr()
    assert report_hashes[0] == report_hashes[1]
    _pass("determinism: byte-identical synth files and reports, independent of --jobs")


def test_format_roundtrip(tmp_path):
    rng = np.random.default_rng(6)
    path = str(tmp_path / "f.kfea")
    for trial in range(1000):
        n, d = int(rng.integers(1, 12)), int(rng.integers(1, 9))
        data = (rng.standard_normal((n, d)) * 10.0 ** rng.integers(-3, 4)).astype(np.float32)
        if trial % 11 == 0:
            data[0, 0] = np.float32(-0.0)
        labels = None
        if trial % 2:
            raw = rng.integers(0, 7, n)
            labels = LabelVector(raw, int(raw.max()) + 1)
        write_features(path, FeatureMatrix(data.astype(np.float64), "pretrained"), labels)
        feats, got = read_features(path)
        assert np.array_equal(
            feats.data.astype(np.float32).view(np.uint32), data.view(np.uint32)
        )
        if labels is not None:
            assert np.array_equal(got.labels, labels.labels)

    golden = str(tmp_path / "golden.kfea")
    write_features(
        golden, FeatureMatrix(np.array([[2.5]]), "pretrained"), LabelVector(np.array([3]), 4)
    )
    blob = open(golden, "rb").read()
    assert blob.hex() == (
        "4b464541" "01" "01" "0000"
        "0100000000000000" "0100000000000000"
        "00002040" "01" "03000000"
    )
    _pass("format round-trip: 1000 files bit-exact; golden minimal file matches hex")
