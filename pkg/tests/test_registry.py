"""File-backed registry: round trips, ordering, atomicity, concurrency."""

import json
import random
import threading

import pytest

from roman.errors import ValidationError
from roman.profile import Keypoint, MotionProfile, make_template
from roman.registry import ObjectRecord, Registry, normalize_tag


@pytest.fixture
def registry(tmp_path):
    return Registry(tmp_path / "registry")


def record(tag="0a1b2c3d", name="wire cutter", profile=None):
    return ObjectRecord(
        tag_id=tag,
        object_name=name,
        category="Squeeze/BiDirectional",
        profile=profile or make_template("two_way"),
    )


def random_profile(rng):
    times = sorted({round(rng.uniform(0.0, 6.0), 3) for _ in range(rng.randint(2, 8))})
    while len(times) < 2:
        times.append(6.0)
    kps = tuple(Keypoint(t, round(rng.uniform(-1.0, 1.0), 6)) for t in sorted(times))
    return MotionProfile(name=f"p{rng.randint(0, 999)}", duration_s=6.0, continuous=rng.random() < 0.5, keypoints=kps)


def test_put_then_get_roundtrip(registry):
    stored = registry.put_record(record())
    assert stored.updated_at is not None
    loaded = registry.get_record("0a1b2c3d")
    assert loaded == stored
    assert loaded.profile == record().profile


def test_tag_normalized_to_lowercase(registry):
    registry.put_record(record(tag="0A1B2C3D"))
    loaded = registry.get_record("0a1b2c3d")
    assert loaded is not None
    assert loaded.tag_id == "0a1b2c3d"
    assert registry.get_record("0A1B2C3D") == loaded


def test_invalid_tag_rejected():
    with pytest.raises(ValidationError):
        normalize_tag("XYZ")
    with pytest.raises(ValidationError):
        record(tag="0a1b2c3")  # 7 digits
    with pytest.raises(ValidationError):
        record(tag="0a1b2c3dd")


def test_get_unknown_returns_none(registry):
    assert registry.get_record("ffffffff") is None
    assert registry.get_record("not-a-tag") is None


def test_overwrite_bumps_updated_at(registry):
    first = registry.put_record(record())
    second = registry.put_record(record(name="renamed"))
    assert second.updated_at > first.updated_at
    assert registry.get_record("0a1b2c3d").object_name == "renamed"


def test_list_sorted_by_object_name(registry):
    rng = random.Random(13)
    names = [f"object {chr(ord('a') + i)}" for i in range(8)]
    entries = [(f"{i:08x}", name) for i, name in enumerate(names)]
    rng.shuffle(entries)
    for tag, name in entries:
        registry.put_record(record(tag=tag, name=name))
    listed = registry.list_records()
    assert [r.object_name for r in listed] == sorted(names)
    assert len(listed) == 8


def test_list_empty(registry):
    assert registry.list_records() == []


def test_put_get_identity_over_random_profiles(registry):
    rng = random.Random(211)
    for i in range(40):
        tag = f"{rng.getrandbits(32):08x}"
        profile = random_profile(rng)
        registry.put_record(record(tag=tag, profile=profile))
        loaded = registry.get_record(tag)
        assert loaded.profile == profile


def test_no_temp_files_left_behind(registry, tmp_path):
    for i in range(5):
        registry.put_record(record(tag=f"{i:08x}"))
    leftovers = [p for p in registry.root.iterdir() if p.suffix != ".json"]
    assert leftovers == []


def test_stray_files_ignored_by_list(registry):
    registry.put_record(record())
    (registry.root / "README.json").write_text("{}")
    (registry.root / ".put-x.tmp").write_text("junk")
    assert len(registry.list_records()) == 1


def test_corrupt_record_surfaces_loudly(registry):
    registry.put_record(record())
    (registry.root / "0a1b2c3d.json").write_text("{ torn")
    with pytest.raises(ValidationError):
        registry.get_record("0a1b2c3d")


def test_file_layout_is_one_json_per_tag(registry):
    registry.put_record(record())
    path = registry.root / "0a1b2c3d.json"
    assert path.exists()
    doc = json.loads(path.read_text())
    assert doc["tag_id"] == "0a1b2c3d"
    assert doc["profile"]["name"] == "two_way"


def test_concurrent_puts_leave_consistent_state(registry):
    errors = []

    def writer(worker):
        try:
            for i in range(5):
                registry.put_record(record(name=f"writer{worker}-{i}"))
        except Exception as exc:  # pragma: no cover - failure detail
            errors.append(exc)

    threads = [threading.Thread(target=writer, args=(w,)) for w in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert errors == []
    final = registry.get_record("0a1b2c3d")
    assert final is not None
    assert final.object_name.startswith("writer")
    assert len(registry.list_records()) == 1
