"""Orthogonal-array construction, balance verification, and decoding."""

import itertools

import numpy as np
import pytest

from oatune.design import (
    TABLE_L27,
    DesignError,
    Factor,
    FactorSpace,
    HyperConfig,
    OrthogonalArray,
    build_array,
    build_l27,
    decode_hyperconfig,
    decode_run,
    design_to_csv,
    paper_space,
    verify_strength2,
)


@pytest.fixture(scope="module")
def space():
    return paper_space()


@pytest.fixture(scope="module")
def l27(space):
    return build_l27(space)


def brute_force_pair_counts(rows, i, j):
    """Independent oracle: count ordered level pairs by exhaustive iteration."""
    counts = {}
    for row in rows:
        key = (int(row[i]), int(row[j]))
        counts[key] = counts.get(key, 0) + 1
    return counts


class TestConstruction:
    def test_golden_table_row_for_row(self, l27, space):
        for i, expected in enumerate(TABLE_L27):
            decoded = decode_run(l27, i, space)
            assert tuple(decoded.values()) == expected, f"run {i + 1}"

    def test_first_run_levels(self, l27):
        assert l27.rows[0].tolist() == [0, 0, 0, 0, 0]

    def test_run13_levels(self, l27):
        assert l27.rows[12].tolist() == [1, 1, 2, 0, 0]

    def test_last_run_levels(self, l27):
        assert l27.rows[26].tolist() == [2, 2, 1, 0, 2]

    def test_shape(self, l27):
        assert l27.n_runs == 27
        assert l27.n_factors == 5

    def test_rows_are_distinct(self, l27):
        assert len({tuple(r) for r in l27.rows.tolist()}) == 27

    def test_column_balance(self, l27):
        for col in range(5):
            values, counts = np.unique(l27.rows[:, col], return_counts=True)
            assert values.tolist() == [0, 1, 2]
            assert counts.tolist() == [9, 9, 9]

    def test_wrong_factor_count_rejected(self):
        four = FactorSpace(tuple(Factor(f"F{i}", (0, 1, 2)) for i in range(4)))
        with pytest.raises(DesignError, match="5 factors"):
            build_l27(four)

    def test_factor_needs_three_levels(self):
        with pytest.raises(DesignError, match="BAD"):
            Factor("BAD", (1, 2))

    def test_duplicate_levels_rejected(self):
        with pytest.raises(DesignError, match="DUP"):
            Factor("DUP", (1, 1, 2))

    def test_too_many_factors_rejected(self):
        with pytest.raises(DesignError):
            FactorSpace(tuple(Factor(f"F{i}", (0, 1, 2)) for i in range(14)))

    @pytest.mark.parametrize("k", range(1, 14))
    def test_generalized_arrays_are_balanced(self, k):
        space = FactorSpace(tuple(Factor(f"F{i}", (0, 1, 2)) for i in range(k)))
        report = verify_strength2(build_array(space))
        assert report.ok


class TestVerifyStrength2:
    def test_l27_every_pair_count_is_three(self, l27):
        report = verify_strength2(l27)
        assert report.ok
        assert report.expected_count == 3
        for i, j in itertools.combinations(range(5), 2):
            counts = brute_force_pair_counts(l27.rows, i, j)
            assert set(counts) == set(itertools.product(range(3), repeat=2))
            assert set(counts.values()) == {3}

    def test_single_mutation_breaks_balance(self, l27):
        rows = l27.rows.copy()
        rows[0, 0] = 1  # was 0
        report = verify_strength2(OrthogonalArray(rows))
        assert not report.ok
        i, j, *_ = report.first_violation
        assert i == 0  # the mutated column takes part in the violation

    def test_single_column_passes_vacuously(self):
        rows = np.repeat(np.arange(3), 9).reshape(-1, 1)
        assert verify_strength2(OrthogonalArray(rows)).ok

    def test_cell_outside_levels_rejected(self, l27):
        rows = l27.rows.copy()
        rows[5, 2] = 7
        with pytest.raises(DesignError, match="malformed"):
            verify_strength2(OrthogonalArray(rows))


class TestDecodeRun:
    def test_run4(self, l27, space):
        assert decode_hyperconfig(l27, 3, space) == HyperConfig(1, 20, "elu", "RMSprop", 0.001)

    def test_run22(self, l27, space):
        assert decode_hyperconfig(l27, 21, space) == HyperConfig(3, 20, "relu", "Adamax", 0.001)

    def test_identity_payloads_return_raw_row(self, l27):
        identity = FactorSpace(tuple(Factor(f"F{i}", (0, 1, 2)) for i in range(5)))
        for i in (0, 7, 26):
            assert list(decode_run(l27, i, identity).values()) == l27.rows[i].tolist()

    def test_decode_is_bijective_over_runs(self, l27, space):
        decoded = {tuple(decode_run(l27, i, space).values()) for i in range(27)}
        assert len(decoded) == 27

    def test_index_out_of_range(self, l27, space):
        with pytest.raises(IndexError):
            decode_run(l27, 27, space)
        with pytest.raises(IndexError):
            decode_run(l27, -1, space)

    def test_missing_hyper_factor_name(self):
        with pytest.raises(DesignError, match="HL"):
            HyperConfig.from_mapping({"NN": 10})


def test_design_csv_export(tmp_path, l27, space):
    path = tmp_path / "design.csv"
    design_to_csv(l27, space, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "run,HL,NN,ACT,OPT,LR"
    assert len(lines) == 28
    assert lines[1] == "1,1,10,relu,Adam,0.001"
    assert lines[13].startswith("13,2,20,selu,Adam")
