import filecmp
from collections import Counter, defaultdict

import pytest
from scipy import stats

from socialrec.dataio import load_snapshot, read_manifest
from socialrec.errors import ValidationError
from socialrec.evaluator.harness import evaluate
from socialrec.evaluator.split import chronological_split
from socialrec.evaluator.synth import SyntheticConfig, generate_synthetic, write_synthetic


def _topic_of(dataset):
    return {r.resource_id: next(iter(r.categories)) for r in dataset.resources}


class TestGenerator:
    def test_same_seed_identical_files(self, tmp_path):
        cfg = SyntheticConfig(n_users=200, n_resources=50, seed=7)
        write_synthetic(tmp_path / "a", cfg)
        write_synthetic(tmp_path / "b", cfg)
        for name in ("interactions.csv", "resources.jsonl", "tags.csv", "manifest.json"):
            assert filecmp.cmp(tmp_path / "a" / name, tmp_path / "b" / name, shallow=False)

    def test_different_seed_differs(self):
        a = generate_synthetic(n_users=100, n_resources=30, seed=1)
        b = generate_synthetic(n_users=100, n_resources=30, seed=2)
        assert a.interactions != b.interactions

    @pytest.mark.parametrize("kwargs", [
        {"p_topic_click": 1.2}, {"p_topic_click": -0.1}, {"q_topic_tag": 1.01},
        {"p_topic_click": 0.9, "q_topic_tag": 0.5}, {"activity_tail": 1.0}, {"n_users": 0},
        {"n_topics": 20, "n_resources": 10},
    ])
    def test_invalid_config(self, kwargs):
        with pytest.raises(ValidationError):
            generate_synthetic(**kwargs)

    def test_manifest_records_config(self, tmp_path):
        cfg = SyntheticConfig(n_users=50, n_resources=20, n_topics=4, seed=3)
        manifest = write_synthetic(tmp_path, cfg)
        assert read_manifest(tmp_path)["generator"]["seed"] == 3
        assert manifest["stats"]["n_users"] == load_snapshot(tmp_path).to_store().compute_stats().n_users

    def test_every_resource_has_one_topic(self):
        ds = generate_synthetic(n_users=50, n_resources=40, n_topics=4, seed=0)
        assert Counter(len(r.categories) for r in ds.resources) == {1: 40}
        assert Counter(_topic_of(ds).values()) == {f"topic-{t}": 10 for t in range(4)}

    def test_full_fidelity_stays_on_topic(self):
        ds = generate_synthetic(n_users=300, n_resources=60, n_topics=5, p_topic_click=1.0,
                                q_topic_tag=1.0, seed=4)
        topic = _topic_of(ds)
        user_topics = defaultdict(set)
        for i in ds.interactions:
            user_topics[i.user_id].add(topic[i.resource_id])
        for t in ds.tags:
            user_topics[t.user_id].add(topic[t.resource_id])
        assert all(len(ts) == 1 for ts in user_topics.values())

    def test_click_fidelity_matches_p(self):
        ds = generate_synthetic(n_users=3000, n_resources=100, n_topics=5, p_topic_click=0.6,
                                q_topic_tag=0.95, seed=5, tagger_fraction=1.0)
        topic = _topic_of(ds)
        # a user's own topic is the one all but a sliver of their tags come from
        own = {}
        by_user = defaultdict(Counter)
        for t in ds.tags:
            by_user[t.user_id][topic[t.resource_id]] += 1
        for u, c in by_user.items():
            if sum(c.values()) >= 5:
                own[u] = c.most_common(1)[0][0]
        hits = [topic[i.resource_id] == own[i.user_id] for i in ds.interactions if i.user_id in own]
        assert sum(hits) / len(hits) == pytest.approx(0.6, abs=0.03)

    def test_activity_is_heavy_tailed_and_tunable(self):
        light = generate_synthetic(n_users=2000, seed=0).to_store().compute_stats()
        sparse = generate_synthetic(n_users=2000, seed=0, activity_tail=3.5).to_store().compute_stats()
        per_user = Counter(i.user_id for i in generate_synthetic(n_users=2000, seed=0).interactions)
        assert sum(1 for n in per_user.values() if n == 1) > 0.4 * len(per_user)
        assert max(per_user.values()) >= 20
        assert sparse.avg_interactions_per_user < light.avg_interactions_per_user
        assert sparse.avg_interactions_per_user == pytest.approx(1.47, abs=0.3)


@pytest.mark.slow
class TestNoSignal:
    @pytest.mark.xfail(strict=True, reason=(
        "CF_t covers more users than CF_i whenever taggers outnumber repeat clickers, so the "
        "two differ even without topical signal; analysis in the decisions ledger"))
    def test_cf_variants_indistinguishable(self):
        cf_i, cf_t = [], []
        for seed in range(10):
            ds = generate_synthetic(p_topic_click=0.1, q_topic_tag=0.1, seed=seed)
            split = chronological_split(ds.interactions, 0.2, ds.tags)
            report = evaluate(["uc2", "uc3"], split, resources=ds.resources)
            cf_i.append(report.row("uc2").recall_at_20)
            cf_t.append(report.row("uc3").recall_at_20)
        assert stats.ttest_rel(cf_i, cf_t).pvalue > 0.05
