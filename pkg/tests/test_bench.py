import csv

import pytest

from pmod.bench import (
    REPORT_FIELDS,
    Scenario,
    baseline_policy_texts,
    emit_csv,
    format_table,
    kernel_compare,
    level_labels,
    level_sizes,
    run_matrix,
    run_scenario,
    scenario_policies,
)
from pmod.errors import ParameterError
from pmod.policy import parse_policy


def test_level_sizes_push_remainder_down():
    assert level_sizes(10, 3) == (3, 3, 4)
    assert level_sizes(9, 6) == (1, 1, 1, 2, 2, 2)
    assert level_sizes(9, 9) == (1,) * 9
    assert level_sizes(12, 4) == (3, 3, 3, 3)


def test_level_sizes_validation():
    with pytest.raises(ParameterError):
        level_sizes(2, 3)
    with pytest.raises(ParameterError):
        level_sizes(5, 0)


def test_level_labels_are_valid_attributes():
    for lv in level_labels(level_sizes(10, 3)):
        for label in lv:
            parse_policy(label)  # must tokenize as a single attribute


def test_scenario_policies_deterministic():
    a, _ = scenario_policies(3, 10, 42)
    b, _ = scenario_policies(3, 10, 42)
    c, _ = scenario_policies(3, 10, 43)
    assert a == b
    assert a != c


def test_policies_use_each_label_once_and_full_set_satisfies():
    from pmod.policy import satisfies

    texts, labels = scenario_policies(4, 13, 5)
    for text, lv in zip(texts, labels):
        tree = parse_policy(text)
        assert sorted(l.attribute for l in tree.leaves) == sorted(lv)
        assert satisfies(tree, frozenset(lv)) is not None


def test_baseline_trees_accumulate_leaves():
    texts, labels = scenario_policies(3, 9, 6)
    cumulative = baseline_policy_texts(texts)
    sizes = [len(lv) for lv in labels]
    for i, text in enumerate(cumulative):
        assert parse_policy(text).leaf_count == sum(sizes[: i + 1])


def test_scenario_validation():
    with pytest.raises(ParameterError):
        Scenario("wrong", 3, 10, 1)
    with pytest.raises(ParameterError):
        Scenario("pmod", 5, 3, 1)


@pytest.mark.parametrize("scheme", ["pmod", "cpabe_case1"])
@pytest.mark.parametrize("k,n", [(1, 3), (3, 10), (4, 11)])
def test_counts_match_formulas_exactly(scheme, k, n):
    r = run_scenario(Scenario(scheme, k, n, seed=17, backend="transparent"))
    c, s = r.counts, r.storage
    assert c["keygen_f_g0"] == c["keygen_f_g0_pred"]
    assert c["encrypt_f_g0"] == c["encrypt_f_g0_pred"]
    assert c["encrypt_f_g1"] == c["encrypt_f_g1_kem_pred"] + c["encrypt_f_g1_sampling"]
    assert c["decrypt_node_pairings"] == c["decrypt_node_pairings_pred"]
    assert c["decrypt_node_pairings"] <= c["decrypt_pairings_bound"]
    assert c["decrypt_pairings"] == c["decrypt_node_pairings"] + c["decrypt_unblind_pairings"]
    assert (s["pk_g0"], s["pk_g1"]) == (3, 1)
    assert (s["mk_g0"], s["mk_zp"]) == (1, 1)
    assert s["sk_g0"] == s["sk_g0_pred"]
    assert s["ct_g0"] == s["ct_g0_pred"]
    assert s["ct_g1"] == s["ct_g1_pred"]


def test_pmod_strictly_cheaper_on_counts():
    pm = run_scenario(Scenario("pmod", 3, 12, 23, backend="transparent"))
    base = run_scenario(Scenario("cpabe_case1", 3, 12, 23, backend="transparent"))
    assert pm.counts["encrypt_f_g0"] < base.counts["encrypt_f_g0"]
    assert pm.counts["decrypt_pairings"] < base.counts["decrypt_pairings"]
    assert pm.counts["keygen_f_g0"] < base.counts["keygen_f_g0"]


def test_row_schema_and_csv(tmp_path):
    rows = run_matrix([2], [6], seed=3, backend="transparent")
    assert len(rows) == 2
    for row in rows:
        assert tuple(row) == REPORT_FIELDS
    out = tmp_path / "r.csv"
    emit_csv(rows, str(out))
    with open(out) as fh:
        parsed = list(csv.DictReader(fh))
    assert len(parsed) == 2
    assert parsed[0]["scheme"] == "pmod"
    assert parsed[0]["encrypt_f_g0"] == parsed[0]["encrypt_f_g0_pred"]


def test_format_table_lists_all_rows():
    rows = run_matrix([2], [6], seed=3, backend="transparent")
    table = format_table(rows)
    assert "pmod" in table and "cpabe_case1" in table
    assert table.splitlines()[0].startswith("scheme")


def test_timing_rows_have_medians():
    r = run_scenario(Scenario("pmod", 2, 4, 9, backend="transparent"), runs=3)
    assert set(r.timings) == {"keygen_s", "encrypt_s", "decrypt_s"}
    assert all(v > 0 for v in r.timings.values())
    row = r.row()
    assert float(row["keygen_s"]) > 0


def test_kernel_compare_rows():
    rows = kernel_compare(curve="ss512", repeats=3)
    kernels = {r["kernel"] for r in rows}
    assert "pure" in kernels
    ops = {r["op"] for r in rows}
    assert ops == {"g0_exp", "g0_mul", "pairing", "gt_exp"}
    assert all(r["median_us"] > 0 for r in rows)
