"""End-to-end acceptance checks, one test per criterion.

Run with -v to get one pass/fail line per criterion.  Tolerances are part
of the contract; do not widen them to make a failure go away.
"""

import json
import subprocess
import time
import warnings
from pathlib import Path

import numpy as np
import pytest

from cpe.adaptation import (
    ShiftState,
    class_centroids,
    entropy_shift_gradient,
    infer_tta,
    marginal_entropy,
    select_confident,
    tta_step,
    view_distributions,
)
from cpe.bench import prediction_log_lines, run_benchmark, run_repeats
from cpe.config import MatchConfig
from cpe.fixtures import make_benchmark_fixture, make_mini_fixture
from cpe.formats import load_attention_map, load_embedding_set
from cpe.synonyms import ClassTextualSet, filter_synonyms
from cpe.topology import zero_dim_persistence
from cpe.transport import TransportProblem, classify_ot, sinkhorn
from cpe.views import ViewSet, activation_stats, select_views

from _oracles import pointwise_probs_direct, sweep_deaths
from test_synonyms import three_class_fixture

REPO_ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture(scope="module")
def full_benchmark(tmp_path_factory):
    out = tmp_path_factory.mktemp("acceptance-gauss")
    return make_benchmark_fixture(
        out, seed=0, n_classes=10, images_per_class=50, dim=32, n_crops=100
    )


@pytest.fixture(scope="module")
def reduced_benchmark(tmp_path_factory):
    out = tmp_path_factory.mktemp("acceptance-reduced")
    return make_benchmark_fixture(
        out,
        seed=0,
        n_classes=10,
        images_per_class=10,
        dim=32,
        n_crops=40,
        n_corner_crops=4,
        attention_size=24,
    )


def test_c1_sinkhorn_feasibility_under_ten_seconds():
    """1000 random problems, n,m <= 16: marginal violation below 1e-6."""
    rng = np.random.default_rng(11)
    epsilons = [0.05, 0.1, 0.5]
    started = time.perf_counter()
    worst = 0.0
    for trial in range(1000):
        n = int(rng.integers(1, 17))
        m = int(rng.integers(1, 17))
        cost = rng.uniform(0.0, 2.0, size=(n, m))
        a = rng.uniform(0.1, 1.0, size=n)
        a /= a.sum()
        b = rng.uniform(0.1, 1.0, size=m)
        b /= b.sum()
        eps = epsilons[trial % 3]
        plan = sinkhorn(
            TransportProblem(cost, a, b, epsilon=eps, max_iters=20000, tol=1e-10)
        )
        worst = max(worst, plan.marginal_violation(a, b))
    elapsed = time.perf_counter() - started
    assert worst < 1e-6, f"worst marginal violation {worst}"
    assert elapsed < 10.0, f"took {elapsed:.1f}s"


def test_c2_persistence_matches_threshold_sweep_oracle():
    """Exact agreement with an independent connectivity sweep on 200 spaces."""
    rng = np.random.default_rng(23)
    for _ in range(200):
        n = int(rng.integers(1, 7))
        pts = rng.normal(size=(n, 3))
        d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
        np.fill_diagonal(d, 0.0)
        diagram = zero_dim_persistence(d)
        expected = sweep_deaths(d)
        assert sorted(diagram.deaths.tolist()) == sorted(expected)


def test_c3_singleton_sets_reduce_to_pointwise():
    """Size-one sets collapse set matching to plain cosine scoring, 1e-9."""
    rng = np.random.default_rng(31)
    for _ in range(100):
        dim = int(rng.integers(3, 9))
        n_classes = int(rng.integers(2, 6))
        view = rng.normal(size=dim)
        view /= np.linalg.norm(view)
        dirs = rng.normal(size=(n_classes, dim))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        sets = [
            ClassTextualSet(f"c{k}", dirs[k][None, :], [(f"c{k}", "")])
            for k in range(n_classes)
        ]
        vs = ViewSet(view[None, :], np.array([], dtype=int))
        expect = pointwise_probs_direct(view[None, :], dirs, 0.01)

        cfg = MatchConfig(weights="uniform", tau=0.01)
        ot = classify_ot(vs, sets, cfg)
        np.testing.assert_allclose(ot.probabilities, expect, atol=1e-9)

        shifts = ShiftState.zeros(n_classes, dim, learning_rate=cfg.tta_lr)
        tta = infer_tta(vs, sets, shifts, tau=0.01)
        np.testing.assert_allclose(tta.probabilities, expect, atol=1e-9)


def test_c4_tta_gradient_and_entropy_descent():
    """Analytic gradient vs central differences; one step lowers entropy."""
    rng = np.random.default_rng(47)
    worst_rel = 0.0
    for _ in range(100):
        dim = int(rng.integers(4, 17))
        n_classes = int(rng.integers(2, 6))
        n_views = int(rng.integers(4, 13))
        views = rng.normal(size=(n_views, dim))
        views /= np.linalg.norm(views, axis=1, keepdims=True)
        centroids = rng.normal(size=(n_classes, dim))
        centroids /= np.linalg.norm(centroids, axis=1, keepdims=True)
        shifts = 0.01 * rng.normal(size=(n_classes, dim))
        tau = 0.5

        probs, entropies = view_distributions(views, centroids, ShiftState(shifts, 1.0), tau)
        selected = select_confident(entropies, 0.5)
        grad = entropy_shift_gradient(
            views, probs, selected, centroids, shifts, tau
        )

        def loss(flat):
            s = flat.reshape(n_classes, dim)
            p, _ = view_distributions(views, centroids, ShiftState(s, 1.0), tau)
            return marginal_entropy(p, selected)

        fd = np.zeros_like(shifts).ravel()
        flat = shifts.ravel().copy()
        h = 1e-5
        for i in range(flat.size):
            up = flat.copy()
            up[i] += h
            dn = flat.copy()
            dn[i] -= h
            fd[i] = (loss(up) - loss(dn)) / (2 * h)
        fd = fd.reshape(n_classes, dim)

        scale = np.maximum(np.abs(fd), 1e-8)
        worst_rel = max(worst_rel, float(np.max(np.abs(grad - fd) / scale)))
    assert worst_rel < 1e-4, f"worst relative gradient error {worst_rel}"

    descended = 0
    for _ in range(100):
        dim = 8
        n_classes = 4
        views = rng.normal(size=(10, dim))
        views /= np.linalg.norm(views, axis=1, keepdims=True)
        centroids = rng.normal(size=(n_classes, dim))
        centroids /= np.linalg.norm(centroids, axis=1, keepdims=True)
        cfg = MatchConfig(tau=0.5, tta_lr=5e-4, tta_fraction=0.5)
        state = ShiftState.zeros(n_classes, dim, learning_rate=cfg.tta_lr)

        probs, entropies = view_distributions(views, centroids, state, cfg.tau)
        selected = select_confident(entropies, cfg.tta_fraction)
        before = marginal_entropy(probs, selected)

        stepped = tta_step(views, centroids, state, cfg)
        probs2, entropies2 = view_distributions(views, centroids, stepped, cfg.tau)
        selected2 = select_confident(entropies2, cfg.tta_fraction)
        after = marginal_entropy(probs2, selected2)
        descended += int(after <= before + 1e-12)
    assert descended >= 95, f"entropy rose in {100 - descended} of 100 runs"


def test_c5_two_sigma_rejection_rates():
    """Gaussian tail mass near 2.28 percent; an exact zero outlier is cut."""
    rng = np.random.default_rng(59)
    activations = rng.normal(loc=0.5, scale=0.1, size=10000)
    kept = select_views(activations)
    removed = 1.0 - len(kept) / 10000.0
    assert 0.0178 <= removed <= 0.0278, f"removed fraction {removed}"

    spiked = np.array([0.5] * 9 + [0.0])
    kept = select_views(spiked)
    assert kept.tolist() == list(range(1, 10))
    stats = activation_stats(spiked)
    assert spiked[9] <= stats.threshold


def test_c6_synonym_fixture_exact_and_permutation_invariant():
    """Frozen retained sets; the outcome ignores candidate order."""
    retained = filter_synonyms(three_class_fixture())
    assert [c.text for c in retained["a"]] == ["a0", "a25", "a50"]
    assert [c.text for c in retained["b"]] == ["b30", "b55", "b80"]
    assert [c.text for c in retained["c"]] == ["c60", "c70", "c72"]

    per_class = three_class_fixture()
    rng = np.random.default_rng(61)
    for _ in range(5):
        shuffled = []
        for cid, cands in per_class:
            order = rng.permutation(len(cands))
            shuffled.append((cid, [cands[i] for i in order]))
        rng.shuffle(shuffled)
        again = filter_synonyms(shuffled)
        for cid in ("a", "b", "c"):
            assert {c.text for c in again[cid]} == {c.text for c in retained[cid]}


def test_c7_end_to_end_transport_beats_pointwise(full_benchmark):
    """Full 10x50 fixture: OT >= pointwise, selection-on >= selection-off."""
    started = time.perf_counter()
    pw = run_benchmark(full_benchmark, MatchConfig(matcher="pointwise"))
    ot = run_benchmark(full_benchmark, MatchConfig(matcher="ot"))
    ot_raw = run_benchmark(full_benchmark, MatchConfig(matcher="ot", select_views=False))
    elapsed = time.perf_counter() - started

    assert ot.top1_accuracy >= pw.top1_accuracy, (
        f"ot {ot.top1_accuracy} < pointwise {pw.top1_accuracy}"
    )
    assert ot.top1_accuracy >= ot_raw.top1_accuracy, (
        f"selection hurt: {ot.top1_accuracy} < {ot_raw.top1_accuracy}"
    )
    assert elapsed < 60.0, f"took {elapsed:.1f}s"


def test_c8_determinism_of_runs_and_repeats(reduced_benchmark):
    """Same inputs give byte-identical logs; equal seeds give zero spread."""
    cfg = MatchConfig(matcher="ot", n_views=30, seed=2)
    a = prediction_log_lines(run_benchmark(reduced_benchmark, cfg))
    b = prediction_log_lines(run_benchmark(reduced_benchmark, cfg))
    assert a == b

    summary = run_repeats(reduced_benchmark, cfg, [2, 2])
    assert summary["top1_accuracy"]["stddev"] == 0.0


def test_c9_mini_fixture_margin_over_template_baseline(tmp_path):
    """[SECONDARY] enriched transport beats bare-template pointwise by 2pp."""
    started = time.perf_counter()
    paths = make_mini_fixture(tmp_path / "mini")
    ot = run_benchmark(paths["manifest"], MatchConfig(matcher="ot"))
    base = run_benchmark(paths["baseline_manifest"], MatchConfig(matcher="pointwise"))
    elapsed = time.perf_counter() - started

    margin = ot.top1_accuracy - base.top1_accuracy
    assert margin >= 0.02, f"margin {margin * 100:.1f}pp"
    assert elapsed < 120.0, f"took {elapsed:.1f}s"


def test_c10_ingestion_round_trip(tmp_path):
    """[SECONDARY] committed ingestion output loads cleanly and replays
    byte-identically from its offline cache."""
    sample = REPO_ROOT / "ingest" / "sample_output"
    assert sample.is_dir(), "ingestion sample output missing"

    loaded = 0
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        for path in sorted(sample.rglob("*.cpeb")):
            load_embedding_set(path)
            loaded += 1
        for path in sorted(sample.rglob("*.cpea")):
            load_attention_map(path)
            loaded += 1
        for path in sorted(sample.rglob("*.json")):
            json.loads(path.read_text(encoding="utf-8"))
            loaded += 1
    assert loaded > 0, "sample output holds no recognized files"
    assert caught == [], [str(w.message) for w in caught]

    replay = REPO_ROOT / "ingest" / "scripts" / "replay-sample.mjs"
    assert replay.exists(), "replay script missing"
    out_dir = tmp_path / "replay"
    proc = subprocess.run(
        ["node", str(replay), str(out_dir)],
        capture_output=True,
        text=True,
        cwd=REPO_ROOT / "ingest",
    )
    assert proc.returncode == 0, proc.stderr

    produced = sorted(p.relative_to(out_dir) for p in out_dir.rglob("*") if p.is_file())
    committed = sorted(
        p.relative_to(sample) for p in sample.rglob("*") if p.is_file()
    )
    assert produced == committed, "replay produced a different file set"
    for rel in produced:
        assert (out_dir / rel).read_bytes() == (sample / rel).read_bytes(), (
            f"replay differs for {rel}"
        )
