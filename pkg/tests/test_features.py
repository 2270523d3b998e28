from __future__ import annotations

import random

import numpy as np
import pytest

from banevasion.corpus import SynthConfig, generate_synthetic
from banevasion.errors import MissingParentBanError, UnsortedRevisionsError
from banevasion.features import (
    FeatureConfig,
    FeatureVector,
    account_features,
    pair_features,
    read_feature_matrix,
    write_feature_matrix,
)

from conftest import account, revision


@pytest.fixture(scope="module")
def config():
    return FeatureConfig()


class TestAccountFeatures:
    def test_zero_revision_account(self, config):
        vec = account_features(account("a", 1_600_000_000), [], config)
        values = vec.as_dict()
        assert values["unique_pages"] == 0
        assert values["total_contributions"] == 0
        assert values["mean_gap_seconds"] == 0
        assert values["mean_contribution_size"] == 0
        assert values["is_banned"] == 0
        assert values["duration_seconds"] == -1
        assert values["banned_dow"] == -1
        assert all(values[n] == 0 for n in vec.names if n.startswith("liwc_"))

    def test_mean_gap(self, config):
        acct = account("a", 1000, ban=5000)
        revs = [revision("a", "p", 2000), revision("a", "p", 2100)]
        assert account_features(acct, revs, config).as_dict()["mean_gap_seconds"] == 100

    def test_calendar_fields(self, config):
        # 2020-09-13 is a Sunday
        vec = account_features(account("a", 1_600_000_000), [], config).as_dict()
        assert vec["created_dow"] == 6
        assert vec["created_month"] == 9
        assert vec["created_day"] == 13

    def test_duration(self, config):
        vec = account_features(account("a", 100, ban=500), [], config).as_dict()
        assert vec["duration_seconds"] == 400
        assert vec["is_banned"] == 1

    def test_mean_contribution_size(self, config):
        acct = account("a", 0)
        revs = [
            revision("a", "p", 10, added="abcd", deleted="xy"),
            revision("a", "q", 20, added="", deleted=""),
        ]
        vec = account_features(acct, revs, config).as_dict()
        assert vec["mean_contribution_size"] == 3.0

    def test_unsorted_revisions_rejected(self, config):
        acct = account("a", 0)
        revs = [revision("a", "p", 20), revision("a", "p", 10)]
        with pytest.raises(UnsortedRevisionsError):
            account_features(acct, revs, config)

    def test_unique_pages_matches_naive_recount(self, config):
        result = generate_synthetic(
            SynthConfig(n_groups=4, n_benign=0, n_nonevading_malicious=0, seed=5)
        )
        for parent_id, _ in result.true_pairs:
            acct = result.corpus.account(parent_id)
            revs = result.corpus.revisions_of(parent_id)
            vec = account_features(acct, revs, config).as_dict()
            naive = set()
            for rev in revs:
                naive.add(rev.page_id)
            assert vec["unique_pages"] == len(naive)
            assert vec["total_contributions"] == len(revs)

    def test_deterministic_order_and_values(self, config):
        acct = account("a", 123456, ban=999999)
        revs = [revision("a", "p", 200000, added="the damn thing")]
        a = account_features(acct, revs, config)
        b = account_features(acct, revs, config)
        assert a.names == b.names
        assert np.array_equal(a.values, b.values)


class TestPairFeatures:
    def pair(self, config, **overrides):
        parent = overrides.get("parent", account("p", 0, ban=1000))
        parent_revs = overrides.get(
            "parent_revs",
            [
                revision("p", "page-a", 10, added="the damn report", comment="fix typo"),
                revision("p", "page-b", 500, added="it was ago", comment="add link"),
            ],
        )
        other = overrides.get("other", account("c", 2000, ban=4000))
        other_revs = overrides.get("other_revs")
        if other_revs is None:
            other_revs = [
                revision("c", r.page_id, r.timestamp + 2000, added=r.added_text, comment=r.comment)
                for r in parent_revs
            ]
        return pair_features(parent, parent_revs, other, other_revs, config)

    def test_self_pair_identity(self, config):
        vec = self.pair(config).as_dict()
        assert vec["page_jaccard"] == 1.0
        assert vec["comment_unigram_jaccard"] == 1.0
        assert vec["added_unigram_jaccard"] == 1.0
        assert vec["embedding_cosine"] == pytest.approx(1.0)
        assert vec["profile_abs_diff"] == 0.0
        assert vec["sentiment_abs_diff"] == 0.0

    def test_disjoint_pair(self, config):
        other_revs = [revision("c", "zz", 3000, added="qqq www", comment="zzz qqq")]
        vec = self.pair(config, other_revs=other_revs).as_dict()
        assert vec["page_jaccard"] == 0.0
        assert vec["added_unigram_jaccard"] == 0.0

    def test_inter_account_duration_sign(self, config):
        vec = self.pair(config).as_dict()
        assert vec["inter_account_seconds"] == 1000.0
        earlier = account("c", 500, ban=4000)
        vec = self.pair(config, other=earlier, other_revs=[]).as_dict()
        assert vec["inter_account_seconds"] == -500.0

    def test_parent_must_be_banned(self, config):
        with pytest.raises(MissingParentBanError):
            pair_features(account("p", 0), [], account("c", 10), [], config)

    def test_k_limit_uses_first_edits_only(self):
        config = FeatureConfig(k_limit=1)
        parent_revs = [revision("p", "page-a", 10, added="alpha beta")]
        other_revs = [
            revision("c", "page-a", 2000, added="alpha beta"),
            revision("c", "page-zz", 2100, added="totally different"),
        ]
        vec = pair_features(
            account("p", 0, ban=1000), parent_revs, account("c", 2000, ban=4000),
            other_revs, config,
        ).as_dict()
        assert vec["page_jaccard"] == 1.0
        assert vec["added_unigram_jaccard"] == 1.0

    def test_large_k_limit_equals_unlimited(self):
        unlimited = FeatureConfig(k_limit=None)
        huge = FeatureConfig(k_limit=10_000)
        a = self.pair(unlimited)
        b = self.pair(huge)
        assert a.names == b.names
        assert np.array_equal(a.values, b.values)

    def test_child_ban_features_toggle(self):
        with_ban = self.pair(FeatureConfig(include_child_ban_features=True))
        without = self.pair(FeatureConfig(include_child_ban_features=False))
        assert "child_duration_seconds" in with_ban.names
        assert "child_duration_seconds" not in without.names
        assert "child_banned_dow" not in without.names

    def test_unbanned_other_gets_sentinels(self, config):
        vec = self.pair(config, other=account("c", 2000), other_revs=[]).as_dict()
        assert vec["child_is_banned"] == 0.0
        assert vec["child_duration_seconds"] == -1.0
        assert vec["child_banned_dow"] == -1.0

    def test_similarity_ranges(self, config):
        rng = random.Random(3)
        result = generate_synthetic(
            SynthConfig(n_groups=6, n_benign=0, n_nonevading_malicious=6, seed=9)
        )
        corpus = result.corpus
        accounts = [a for a in corpus.accounts if a.ban_time is not None]
        for _ in range(30):
            parent, other = rng.sample(accounts, 2)
            vec = pair_features(
                parent, corpus.revisions_of(parent.account_id),
                other, corpus.revisions_of(other.account_id), config,
            ).as_dict()
            for key in ("page_jaccard", "comment_unigram_jaccard", "added_unigram_jaccard"):
                assert 0.0 <= vec[key] <= 1.0
            assert -1.0 <= vec["embedding_cosine"] <= 1.0

    def test_planted_page_overlap_matches_naive_jaccard(self, config):
        result = generate_synthetic(
            SynthConfig(n_groups=5, n_benign=0, n_nonevading_malicious=0,
                        page_overlap=0.5, seed=21)
        )
        corpus = result.corpus
        for parent_id, child_id in result.true_pairs:
            parent_pages = {r.page_id for r in corpus.revisions_of(parent_id)}
            child_pages = {r.page_id for r in corpus.revisions_of(child_id)}
            union = parent_pages | child_pages
            expected = len(parent_pages & child_pages) / len(union) if union else 0.0
            vec = pair_features(
                corpus.account(parent_id), corpus.revisions_of(parent_id),
                corpus.account(child_id), corpus.revisions_of(child_id), config,
            ).as_dict()
            assert vec["page_jaccard"] == pytest.approx(expected)


class TestMatrixSerialization:
    def test_round_trip(self, tmp_path, config):
        acct = account("a", 1_600_000_000, ban=1_600_100_000)
        revs = [revision("a", "p", 1_600_000_500, added="damn it all")]
        vec = account_features(acct, revs, config)
        path = tmp_path / "features.tsv"
        write_feature_matrix(path, ["s1", "s2"], [1, 0], [vec, vec])
        ids, labels, names, X = read_feature_matrix(path)
        assert ids == ["s1", "s2"]
        assert labels.tolist() == [1, 0]
        assert names == vec.names
        assert np.array_equal(X[0], vec.values)

        write_feature_matrix(tmp_path / "again.tsv", ["s1", "s2"], [1, 0], [vec, vec])
        assert (tmp_path / "features.tsv").read_bytes() == (tmp_path / "again.tsv").read_bytes()

    def test_feature_vector_validation(self):
        with pytest.raises(ValueError):
            FeatureVector(("a", "a"), np.array([1.0, 2.0]))
        with pytest.raises(ValueError):
            FeatureVector(("a",), np.array([1.0, 2.0]))
