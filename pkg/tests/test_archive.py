import pytest

from conftest import seed_set, store_fields
from dacflow.archive import load_archive, save_archive
from dacflow.errors import ArchiveError
from dacflow.ingest import finalize, fold_events


def test_roundtrip(tmp_path, hand_log):
    seeds = seed_set("u1")
    store = finalize(fold_events(hand_log, seeds), seeds)
    path = tmp_path / "a.dac"
    save_archive(path, store, seeds)
    back, back_seeds = load_archive(path)
    assert store_fields(back) == store_fields(store)
    assert back_seeds.records == seeds.records


def test_roundtrip_keeps_fallback_sets(tmp_path, hand_log):
    seeds = seed_set("u1")
    store = fold_events(hand_log, seeds)
    assert store.mentioners
    save_archive(tmp_path / "a.dac", store, seeds)
    back, _ = load_archive(tmp_path / "a.dac")
    assert back.mentioners == store.mentioners


def test_bytes_stable(tmp_path, hand_log):
    seeds = seed_set("u1")
    store = finalize(fold_events(hand_log, seeds), seeds)
    save_archive(tmp_path / "a.dac", store, seeds)
    save_archive(tmp_path / "b.dac", load_archive(tmp_path / "a.dac")[0], seeds)
    assert (tmp_path / "a.dac").read_bytes() == (tmp_path / "b.dac").read_bytes()


def test_other_version_rejected(tmp_path, hand_log):
    seeds = seed_set("u1")
    path = tmp_path / "a.dac"
    save_archive(path, fold_events(hand_log, seeds), seeds)
    text = path.read_text().replace("DACFLOW-AGG 1", "DACFLOW-AGG 2", 1)
    path.write_text(text)
    with pytest.raises(ArchiveError, match="version 2"):
        load_archive(path)


def test_garbage_rejected(tmp_path):
    path = tmp_path / "a.dac"
    path.write_text("hello\n")
    with pytest.raises(ArchiveError):
        load_archive(path)
    path.write_text('DACFLOW-AGG 1\n["user", "x"\n')
    with pytest.raises(ArchiveError, match="line 2"):
        load_archive(path)
