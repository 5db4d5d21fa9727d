import pytest

from socialrec import dataio
from socialrec.errors import ValidationError
from socialrec.evaluator.synth import SyntheticConfig, write_synthetic


class TestParsers:
    def test_interactions(self):
        text = "user_id,resource_id,timestamp_ms,kind\nu1,r1,5,click\n\nu2,r2,x,click\nu3,r3,7\n"
        result = dataio.parse_interactions(text)
        assert [i.user_id for i in result.records] == ["u1"]
        assert [line for line, _ in result.rejected] == [4, 5]

    def test_header_required(self):
        with pytest.raises(ValidationError):
            dataio.parse_interactions("u1,r1,5,click\n")
        with pytest.raises(ValidationError):
            dataio.parse_tags("")

    def test_tags_normalized(self):
        result = dataio.parse_tags("user_id,resource_id,tag,timestamp_ms\nu1,r1, Mapa ,3\n")
        assert result.records[0].tag == "mapa"

    def test_resources(self):
        text = ('{"resource_id": "r1", "title": "T", "description": "D", "categories": ["a"]}\n'
                "not json\n"
                '{"resource_id": "r2", "categories": "a"}\n'
                '{"title": "no id"}\n')
        result = dataio.parse_resources(text)
        assert [r.resource_id for r in result.records] == ["r1"]
        assert [line for line, _ in result.rejected] == [2, 3, 4]

    def test_format_round_trip(self, toy_dataset):
        assert dataio.parse_interactions(dataio.format_interactions(toy_dataset.interactions)).records \
            == toy_dataset.interactions
        assert dataio.parse_tags(dataio.format_tags(toy_dataset.tags)).records == toy_dataset.tags
        assert dataio.parse_resources(dataio.format_resources(toy_dataset.resources)).records \
            == toy_dataset.resources


class TestSnapshot:
    def test_reload_reproduces_stats(self, tmp_path, toy_dataset):
        manifest = dataio.write_snapshot(tmp_path, toy_dataset)
        reloaded = dataio.load_snapshot(tmp_path).to_store().compute_stats()
        assert reloaded == toy_dataset.to_store().compute_stats()
        assert reloaded.as_dict() == manifest["stats"]
        assert dataio.stats_from_manifest(manifest).n_interactions == 7

    def test_synthetic_snapshot(self, tmp_path):
        manifest = write_synthetic(tmp_path, SyntheticConfig(n_users=150, n_resources=30, n_topics=3, seed=9))
        stats = dataio.load_snapshot(tmp_path).to_store().compute_stats()
        assert stats.as_dict() == manifest["stats"]

    def test_strict_loading(self, tmp_path):
        bad = tmp_path / "i.csv"
        bad.write_text("user_id,resource_id,timestamp_ms,kind\n,r1,1,click\n")
        with pytest.raises(ValidationError, match="i.csv:2"):
            dataio.load_files(interactions=bad)
        with pytest.raises(OSError):
            dataio.load_files(interactions=tmp_path / "missing.csv")
