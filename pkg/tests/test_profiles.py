import json
import threading

import pytest

from socialrec.errors import NotFoundError, ValidationError
from socialrec.profiles import (
    Algorithm,
    ProfileRegistry,
    RecommendationProfile,
    Signal,
    default_profiles,
)


class TestProfileValidation:
    @pytest.mark.parametrize("changes", [
        {"n": 0}, {"k_default": 0}, {"lambda_": 1.5}, {"lambda_": -0.1}, {"headroom": 0},
        {"signal": "friends"}, {"algorithm_id": "uc8"}, {"n": 2.5},
    ])
    def test_invalid(self, changes):
        fields = {"profile_id": "p", "algorithm_id": "uc2", **changes}
        with pytest.raises(ValidationError):
            RecommendationProfile(**fields)

    def test_json_round_trip(self):
        p = RecommendationProfile("g", Algorithm.GOAL, lambda_=0.25, signal=Signal.TAGS, version=3)
        data = p.to_json()
        assert data["lambda"] == 0.25 and data["algorithm_id"] == "uc7" and data["signal"] == "tags"
        assert RecommendationProfile.from_json(data) == p

    def test_from_json_rejects_unknown_fields(self):
        with pytest.raises(ValidationError):
            RecommendationProfile.from_json({"profile_id": "x", "algorithm_id": "uc1", "alpha": 1})


class TestRegistry:
    def test_defaults(self):
        registry = ProfileRegistry()
        assert registry.get("cf-default").n == 20
        assert registry.get("cf-tags").signal is Signal.TAGS
        assert registry.get("goal-default").lambda_ == 0.5
        assert {"uc1-popular", "cf-default", "cf-tags", "cbf-default", "contextual-default",
                "goal-default"} <= set(registry.ids())
        assert len(default_profiles()) == len(registry.ids())

    def test_unknown(self):
        with pytest.raises(NotFoundError):
            ProfileRegistry().get("nope")

    def test_snapshot_stable(self):
        registry = ProfileRegistry()
        assert registry.get("cf-default").version == registry.get("cf-default").version

    def test_set_increments_version(self):
        registry = ProfileRegistry()
        before = registry.get("cf-default")
        version = registry.set(RecommendationProfile("cf-default", "uc2", n=5))
        assert version == before.version + 1
        assert registry.get("cf-default").n == 5
        assert before.n == 20  # old snapshot untouched

    def test_rejected_update_leaves_profile(self):
        registry = ProfileRegistry()
        before = registry.get("goal-default")
        with pytest.raises(ValidationError):
            registry.update("goal-default", lambda_=1.5)
        assert registry.get("goal-default") is before

    def test_new_profile(self):
        registry = ProfileRegistry()
        assert registry.set(RecommendationProfile("cf-small", "uc2", n=3)) == 1

    def test_concurrent_updates(self):
        registry = ProfileRegistry()
        start = registry.get("cf-default").version
        seen = []
        lock = threading.Lock()
        barrier = threading.Barrier(20)

        def worker(i):
            barrier.wait()
            for j in range(5):
                v = registry.update("cf-default", n=1 + (i * 5 + j) % 30).version
                with lock:
                    seen.append(v)

        threads = [threading.Thread(target=worker, args=(i,)) for i in range(20)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert sorted(seen) == list(range(start + 1, start + 101))
        assert registry.get("cf-default").version == start + 100

    def test_file_round_trip(self, tmp_path):
        registry = ProfileRegistry()
        registry.update("cf-default", n=7)
        path = tmp_path / "profiles.json"
        registry.save(path)
        assert json.loads(path.read_text())["profiles"]
        loaded = ProfileRegistry.from_file(path)
        assert loaded.get("cf-default").n == 7
        assert loaded.get("cf-default").version == 2

    def test_file_overlays_defaults(self, tmp_path):
        path = tmp_path / "profiles.json"
        path.write_text(json.dumps([{"profile_id": "cf-default", "algorithm_id": "uc2", "n": 9}]))
        loaded = ProfileRegistry.from_file(path)
        assert loaded.get("cf-default").n == 9
        assert loaded.get("cf-tags").n == 20

    def test_bad_file(self, tmp_path):
        path = tmp_path / "profiles.json"
        path.write_text('"nope"')
        with pytest.raises(ValidationError):
            ProfileRegistry.from_file(path)
