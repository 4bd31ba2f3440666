from __future__ import annotations

import math

import pytest
from hypothesis import given, strategies as st

from flatpack.corpus import (
    ConnectionSet,
    CorpusError,
    SelfLoopError,
    compute_stats,
    connected_components,
    extract_ground_truth,
    feasible_order,
    load_corpus,
    normalize_connection,
)

from conftest import write_item_dir


def brute_force_expansion(raw_pairs):
    """Independent oracle: cross-pair every group pair, drop self-loops."""

    def members(endpoint):
        if isinstance(endpoint, int):
            return [endpoint]
        return [int(t) for t in endpoint.split(",")]

    expected = set()
    for raw_a, raw_b in raw_pairs:
        for a in members(raw_a):
            for b in members(raw_b):
                if a != b:
                    expected.add((min(a, b), max(a, b)))
    return expected


class TestNormalize:
    def test_orders_endpoints(self):
        assert tuple(normalize_connection(3, 1)) == (1, 3)

    def test_identity_case(self):
        assert tuple(normalize_connection(0, 2)) == (0, 2)

    def test_self_loop_rejected(self):
        with pytest.raises(SelfLoopError):
            normalize_connection(2, 2)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            normalize_connection(-1, 2)


class TestExtractGroundTruth:
    def test_plain_pairs(self):
        result = extract_ground_truth([("0", "1"), ("1", "2")])
        assert set(map(tuple, result.pairs)) == {(0, 1), (1, 2)}

    def test_group_cross_expansion(self):
        raw = [("0,1", "2")]
        assert set(map(tuple, extract_ground_truth(raw).pairs)) == brute_force_expansion(raw) == {
            (0, 2),
            (1, 2),
        }

    def test_overlapping_groups_drop_self_loops(self):
        raw = [("0,1", "1,2")]
        assert set(map(tuple, extract_ground_truth(raw).pairs)) == brute_force_expansion(raw) == {
            (0, 1),
            (0, 2),
            (1, 2),
        }

    def test_int_endpoints(self):
        assert set(map(tuple, extract_ground_truth([(4, 2)]).pairs)) == {(2, 4)}

    def test_unparsable_group(self):
        with pytest.raises(CorpusError, match="0,x"):
            extract_ground_truth([("0,x", "1")])

    def test_idempotent_on_own_output(self):
        first = extract_ground_truth([("0,1,2", "3"), ("1", "4")])
        again = extract_ground_truth([(c.a, c.b) for c in first])
        assert first == again

    @given(
        st.lists(
            st.tuples(st.integers(0, 8), st.integers(0, 8)).filter(lambda p: p[0] != p[1]),
            min_size=1,
            max_size=20,
        )
    )
    def test_matches_oracle_on_plain_pairs(self, pairs):
        assert set(map(tuple, extract_ground_truth(pairs).pairs)) == brute_force_expansion(pairs)


class TestLoadCorpus:
    def test_items_sorted_by_id(self, tmp_path):
        for item_id in ("Chair_zeta", "Bench_alpha", "Table_mid"):
            category, name = item_id.split("_")
            write_item_dir(tmp_path, item_id, category, name, 3, [[0, 1], [1, 2]])
        corpus = load_corpus(tmp_path)
        assert [i.id for i in corpus] == ["Bench_alpha", "Chair_zeta", "Table_mid"]

    def test_connection_out_of_range_names_pair(self, tmp_path):
        write_item_dir(tmp_path, "Chair_bad", "Chair", "bad", 4, [[0, 9]])
        with pytest.raises(CorpusError, match=r"\(0, 9\)"):
            load_corpus(tmp_path)

    def test_missing_manifest_names_item(self, tmp_path):
        (tmp_path / "Chair_ghost").mkdir()
        with pytest.raises(CorpusError, match="Chair_ghost"):
            load_corpus(tmp_path)

    def test_duplicate_ids_rejected(self, tmp_path):
        write_item_dir(tmp_path, "dir_a", "Chair", "same", 3, [[0, 1]])
        dup = write_item_dir(tmp_path, "dir_b", "Chair", "same2", 3, [[0, 1]])
        manifest = dup / "item.json"
        manifest.write_text(manifest.read_text().replace("dir_b", "dir_a"))
        with pytest.raises(CorpusError, match="duplicate"):
            load_corpus(tmp_path)

    def test_unknown_category_rejected(self, tmp_path):
        write_item_dir(tmp_path, "Sofa_x", "Sofa", "x", 3, [[0, 1]])
        with pytest.raises(CorpusError, match="Sofa"):
            load_corpus(tmp_path)

    def test_cover_page_defaults_to_first_page(self, tmp_path):
        write_item_dir(tmp_path, "Chair_a", "Chair", "a", 3, [[0, 1]], pages=3)
        item = load_corpus(tmp_path).get("Chair_a")
        assert item.cover_page == item.manual_pages[0]

    def test_deterministic_bytes(self, tmp_path):
        write_item_dir(tmp_path, "Chair_a", "Chair", "a", 4, [["0,1", 2], [2, 3]])
        assert load_corpus(tmp_path).canonical_bytes() == load_corpus(tmp_path).canonical_bytes()


class TestFixtureCorpusInvariants:
    def test_all_connections_normalized_and_in_range(self, fixture_corpus):
        for item in fixture_corpus:
            for c in item.ground_truth:
                assert c.a < c.b
                assert c.b < item.part_count

    def test_by_category_partitions_ids(self, fixture_corpus):
        ids = [i for ids in fixture_corpus.by_category.values() for i in ids]
        assert sorted(ids) == sorted(item.id for item in fixture_corpus)

    def test_category_name_lookup_unique(self, fixture_corpus):
        for item in fixture_corpus:
            assert fixture_corpus.find(item.category, item.name).id == item.id


class TestComputeStats:
    def test_hand_computed_fixture(self, tmp_path):
        for name, parts in (("a", 3), ("b", 5), ("c", 7)):
            write_item_dir(
                tmp_path, f"Chair_{name}", "Chair", name, parts, [[0, 1], [1, 2]]
            )
        stats = compute_stats(load_corpus(tmp_path))
        assert stats.parts_mean == 5.0
        assert stats.parts_min == 3
        assert stats.parts_max == 7
        assert math.isclose(stats.parts_std, math.sqrt(8 / 3), rel_tol=1e-12)
        assert stats.total_parts == 15

    def test_single_item(self, tmp_path):
        write_item_dir(tmp_path, "Desk_solo", "Desk", "solo", 4, [[0, 1], [1, 2], [2, 3]])
        stats = compute_stats(load_corpus(tmp_path))
        assert stats.parts_mean == 4.0
        assert stats.parts_std == 0.0
        assert stats.total_connections == 3

    def test_totals_equal_per_item_sums(self, fixture_corpus):
        stats = compute_stats(fixture_corpus)
        assert stats.total_parts == sum(i.part_count for i in fixture_corpus)
        assert stats.total_connections == sum(len(i.ground_truth) for i in fixture_corpus)
        assert sum(row.count for row in stats.per_category.values()) == stats.item_count

    def test_rows_sorted_by_count_desc(self, fixture_corpus):
        stats = compute_stats(fixture_corpus)
        counts = [row.count for row in stats.per_category.values()]
        assert counts == sorted(counts, reverse=True)


class TestGraphHelpers:
    def test_components(self):
        cs = ConnectionSet.from_pairs([(0, 1), (2, 3)])
        assert connected_components(cs, 5) == [[0, 1], [2, 3], [4]]

    def test_feasible_order_is_prefix_connected(self, fixture_corpus):
        for item in fixture_corpus:
            order = feasible_order(item.ground_truth, item.part_count)
            assert sorted(order) == list(range(item.part_count))
            neighbors = {i: set() for i in range(item.part_count)}
            for c in item.ground_truth:
                neighbors[c.a].add(c.b)
                neighbors[c.b].add(c.a)
            seen: set[int] = set()
            for part in order:
                if neighbors[part]:
                    first_of_component = not any(n in seen for n in neighbors[part])
                    # fixture graphs are connected, so only part 0 may start one
                    assert not first_of_component or not seen or part == order[0]
                seen.add(part)
