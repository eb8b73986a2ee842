import hashlib
import math

import pytest

from dacflow.contagion import Mode, adoption_events, adoptions_from_store, reproduction_scores
from dacflow.errors import UnreachableTarget
from dacflow.events import day_index
from dacflow.ingest import finalize, fold_events, fold_snapshot, ingest_files, load_seed_set
from dacflow.metrics import DynClass
from dacflow.pipeline import seed_classes
from dacflow.synth import (
    SynthConfig,
    generate,
    generate_scale,
    load_ground_truth,
    verify_roundtrip,
    write_corpus,
)


def _analyze(corpus):
    store = fold_events(corpus.events, corpus.seeds)
    for s in corpus.snapshots:
        fold_snapshot(store, s)
    finalize(store, corpus.seeds)
    points, classes = seed_classes(store, corpus.seeds)
    return store, points, classes


def test_one_per_class_roundtrip():
    corpus = generate(SynthConfig(n_per_class=1, n_outsiders=0, rng_seed=42))
    _, points, classes = _analyze(corpus)
    assert len(corpus.seeds) == 4
    assert classes == corpus.truth.classes
    assert sorted(c.value for c in classes.values()) == sorted(c.value for c in DynClass)


def test_planted_points_realized_exactly():
    corpus = generate(SynthConfig(n_per_class=10, n_outsiders=0))
    _, points, _ = _analyze(corpus)
    for p in points:
        x, y = corpus.truth.targets[p.user]
        assert p.x == pytest.approx(x, rel=1e-12) and p.y == pytest.approx(y, rel=1e-12)
        assert abs(math.log10(p.x)) >= 0.3 and abs(math.log10(p.y)) >= 0.3


def test_fifty_planted_adopters():
    corpus = generate(SynthConfig(n_per_class=5, n_outsiders=50))
    got = adoption_events(corpus.events, corpus.seeds)
    assert {(a.adopter, day_index(a.time)) for a in got} == corpus.truth.adoption_pairs()
    assert len(got) == 50


def test_planted_r0_matches_store():
    corpus = generate(SynthConfig(n_per_class=10, n_outsiders=80))
    store, _, _ = _analyze(corpus)
    scores = {s.user: s.exact for s in reproduction_scores(store, corpus.seeds, Mode.RETWEET)}
    for user, want in corpus.truth.expected_r0.items():
        assert scores.get(user) == want


def _digest(paths):
    return {k: hashlib.sha256(open(p, "rb").read()).hexdigest() for k, p in paths.items()}


def test_same_seed_same_bytes(tmp_path):
    cfg = SynthConfig(n_per_class=8, n_outsiders=30, rng_seed=7)
    a = write_corpus(generate(cfg), tmp_path / "a")
    b = write_corpus(generate(SynthConfig(n_per_class=8, n_outsiders=30, rng_seed=7)), tmp_path / "b")
    assert _digest(a) == _digest(b)
    c = write_corpus(generate(SynthConfig(n_per_class=8, n_outsiders=30, rng_seed=8)), tmp_path / "c")
    assert _digest(a)["events"] != _digest(c)["events"]


def test_ground_truth_file_roundtrip(tmp_path):
    corpus = generate(SynthConfig(n_per_class=4, n_outsiders=10))
    write_corpus(corpus, tmp_path)
    back = load_ground_truth(tmp_path)
    assert back.classes == corpus.truth.classes
    assert back.adoptions == corpus.truth.adoptions
    assert back.expected_r0 == corpus.truth.expected_r0


def test_unreachable_margin():
    with pytest.raises(UnreachableTarget):
        generate(SynthConfig(n_per_class=1, margin=6))


def test_bad_config():
    with pytest.raises(ValueError):
        SynthConfig(horizon_days=0)
    with pytest.raises(ValueError):
        SynthConfig(margin=0)


def test_verify_passes_on_clean_corpus(tmp_path):
    corpus = generate(SynthConfig(n_per_class=10, n_outsiders=40))
    paths = write_corpus(corpus, tmp_path)
    seeds = load_seed_set(paths["seeds"])
    store, _ = ingest_files(paths["events"], seeds, paths["snapshots"])
    _, classes = seed_classes(store, seeds)
    report = verify_roundtrip(load_ground_truth(tmp_path), classes, adoptions_from_store(store),
                              reproduction_scores(store, seeds, Mode.RETWEET))
    assert report.passed
    assert [c.name for c in report.checks] == ["classes", "adoptions", "r0"]
    assert all(planted == got for planted, got in report.class_pairs.values())


def test_verify_flags_truncated_log(tmp_path):
    corpus = generate(SynthConfig(n_per_class=10, n_outsiders=40))
    paths = write_corpus(corpus, tmp_path)
    with open(paths["events"]) as fh:
        lines = fh.readlines()
    with open(paths["events"], "w") as fh:
        fh.writelines(lines[: len(lines) // 2])
    seeds = load_seed_set(paths["seeds"])
    store, _ = ingest_files(paths["events"], seeds, paths["snapshots"])
    _, classes = seed_classes(store, seeds)
    report = verify_roundtrip(load_ground_truth(tmp_path), classes, adoptions_from_store(store),
                              reproduction_scores(store, seeds, Mode.RETWEET))
    check = report.check("adoptions")
    assert not check.passed
    assert any(d.startswith("missing adopter o") for d in check.details)
    assert not report.passed


def test_scale_generator_counts(tmp_path):
    counts = generate_scale(tmp_path / "e.jsonl", 20_000, n_users=2_000, n_seeds=300,
                            seeds_path=tmp_path / "s.csv", snapshots_path=tmp_path / "n.jsonl")
    assert sum(counts.values()) == 20_000
    assert counts["post"] == 7_000
    seeds = load_seed_set(tmp_path / "s.csv")
    assert len(seeds) == 300
    store, report = ingest_files(tmp_path / "e.jsonl", seeds, tmp_path / "n.jsonl")
    assert report.errors == 0 and report.events == 20_000
    assert report.snapshots == 600


def test_scale_generator_deterministic(tmp_path):
    generate_scale(tmp_path / "a.jsonl", 5_000, n_users=500, n_seeds=50)
    generate_scale(tmp_path / "b.jsonl", 5_000, n_users=500, n_seeds=50)
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()
