import io
import math
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cornfield.ingest import (
    IngestError,
    format_table,
    observed_from_table,
    parse_rows,
    parse_table,
    write_table,
)
from cornfield.measures import StratifiedTable, TwoByTwo

FIXTURES = Path(__file__).parent / "fixtures"

BASIC = "exposure,outcome,count\n1,1,17\n1,0,83\n0,1,10\n0,0,90\n"


def test_basic_table():
    assert parse_table(BASIC.encode()) == TwoByTwo(17, 83, 10, 90)


def test_duplicate_rows_are_summed():
    text = "exposure,outcome,count\n1,1,5\n1,1,5\n0,1,1\n"
    t = parse_table(text.encode())
    assert t.exposed_cases == 10
    assert t.exposed_noncases == 0


def test_non_contiguous_levels_rejected():
    text = "exposure,outcome,confounder,count\n1,1,0,1\n0,1,0,1\n1,1,2,1\n0,1,2,1\n"
    with pytest.raises(IngestError, match="contiguous"):
        parse_table(text.encode())


def test_single_level_rejected():
    text = "exposure,outcome,confounder,count\n1,1,0,1\n0,1,0,1\n"
    with pytest.raises(IngestError):
        parse_table(text.encode())


@pytest.mark.parametrize(
    "text, line",
    [
        ("exposure,outcome,count\n1,1,17\n1,0,-3\n", 3),
        ("exposure,outcome,count\n1,1,17\n1,0,2.5\n", 3),
        ("exposure,outcome,count\n1,1,17\n2,0,3\n", 3),
        ("exposure,outcome,count\n1,1\n", 2),
        ("exposure,outcome,count\n1,1,x\n", 2),
        ("exposure,count\n1,1\n", 1),
        ("exposure,outcome,count,weight\n1,1,1,1\n", 1),
        ("exposure,outcome,count\n", 2),
        ("", 1),
    ],
)
def test_errors_report_line_numbers(text, line):
    with pytest.raises(IngestError) as info:
        parse_table(text.encode())
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}:")


def test_crlf_bom_and_trailing_line():
    text = "﻿Exposure,OUTCOME,Count\r\n1,1,17\r\n1,0,83\r\n0,1,10\r\n0,0,90\r\n\r\n"
    assert parse_table(text.encode("utf-8")) == TwoByTwo(17, 83, 10, 90)


def test_tab_delimiter_and_column_order():
    text = "count\toutcome\texposure\n17\t1\t1\n83\t0\t1\n10\t1\t0\n90\t0\t0\n"
    assert parse_table(text.encode(), "tab") == TwoByTwo(17, 83, 10, 90)
    with pytest.raises(IngestError):
        parse_table(text.encode(), ",")


def test_fuzzy_header_not_matched():
    with pytest.raises(IngestError, match="missing column"):
        parse_table(b"exposed,outcome,count\n1,1,1\n")


def test_invalid_utf8():
    with pytest.raises(IngestError, match="UTF-8"):
        parse_table(b"exposure,outcome,count\n1,1,\xff\n")


def test_reads_paths_and_streams():
    assert parse_table(FIXTURES / "symmetric.csv") == parse_table(io.BytesIO((FIXTURES / "symmetric.csv").read_bytes()))


def test_fixture_example1():
    m = observed_from_table(parse_table(FIXTURES / "example1.csv"))
    # independent arithmetic on the fixture counts
    assert m.rr_ed == pytest.approx((170 / 538462) / (100 / 538462), abs=1e-12)
    assert m.rr_ed == pytest.approx(1.7, abs=1e-12)
    assert m.rd_ed == pytest.approx(0.00013, abs=5e-9)


def test_symmetric_fixture():
    m = observed_from_table(parse_table(FIXTURES / "symmetric.csv"))
    assert m.rr_ed == 1.0
    assert m.rd_ed == 0.0


def test_stratified_fixture_measures():
    t = parse_table(FIXTURES / "stratified.csv")
    assert isinstance(t, StratifiedTable) and t.k == 2
    m = observed_from_table(t)
    assert m.rr_ed == pytest.approx((70 / 300) / (40 / 300))
    assert m.rd_ed == pytest.approx(0.1)
    assert m.rr_eu == pytest.approx((200 / 300) / (100 / 300))
    assert m.rd_eu == pytest.approx(1 / 3)
    assert m.rd_ud_given_e1 == pytest.approx((60 / 200 - 10 / 100,))
    assert m.rd_ud_given_e0 == pytest.approx((30 / 100 - 10 / 200,))
    assert m.rr_ud_given_e1 == pytest.approx((3.0,))


def test_identical_stratum_risks_give_equal_contrasts():
    t = StratifiedTable((TwoByTwo(2, 8, 1, 9), TwoByTwo(6, 4, 5, 5)))
    m = observed_from_table(t)
    assert m.rd_ud_given_e1 == pytest.approx(m.rd_ud_given_e0, abs=1e-15)


def test_zero_reference_risk_gives_infinite_ratio():
    t = StratifiedTable((TwoByTwo(0, 10, 0, 10), TwoByTwo(5, 5, 0, 10)))
    m = observed_from_table(t)
    assert math.isinf(m.rr_ud_given_e1[0])
    assert math.isnan(m.rr_ud_given_e0[0])


def test_write_table(tmp_path):
    t = TwoByTwo(17, 83, 10, 90)
    path = tmp_path / "t.tsv"
    write_table(t, path, "tab")
    assert b"\r" not in path.read_bytes()
    assert parse_table(path, "tab") == t


def test_rows_keep_line_numbers():
    rows = parse_rows(BASIC.encode())
    assert [n for n, _ in rows] == [2, 3, 4, 5]


cell = st.integers(min_value=0, max_value=10**9)
two_by_two = st.builds(TwoByTwo, cell, cell, cell, cell)
stratified = st.lists(two_by_two, min_size=2, max_size=5).map(lambda s: StratifiedTable(tuple(s)))


@given(st.one_of(two_by_two, stratified), st.sampled_from([",", "tab"]))
def test_round_trip(table, delimiter):
    assert parse_table(format_table(table, delimiter).encode(), delimiter) == table


@given(st.one_of(two_by_two, stratified), st.randoms(use_true_random=False))
def test_row_order_does_not_matter(table, rnd):
    header, *rows = format_table(table).splitlines()
    rnd.shuffle(rows)
    assert parse_table(("\n".join([header, *rows]) + "\n").encode()) == table


@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1), st.integers(0, 1000)), min_size=1, max_size=30))
def test_aggregation_matches_direct_sum(rows):
    text = "exposure,outcome,count\n" + "".join(f"{e},{d},{n}\n" for e, d, n in rows)
    t = parse_table(text.encode())

    def total(e, d):
        return sum(n for ee, dd, n in rows if (ee, dd) == (e, d))

    assert t == TwoByTwo(total(1, 1), total(1, 0), total(0, 1), total(0, 0))
