import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from confrange.errors import EmptyTestSet
from confrange.evaluation import (
    DEFAULT_BINS,
    PredictionRecord,
    SizeBins,
    build_report,
    conditional_coverage,
    emit_report,
    grouped_coverage,
    mae,
    marginal_coverage,
    read_predictions,
    write_predictions,
)
from confrange.plots import QUALITY_COLORS, case_plot_svg, emit_case_plot

SVG_NS = "{http://www.w3.org/2000/svg}"


def rec(i, y, y_hat, lo, hi, q="high", sigma=0.05):
    return PredictionRecord(f"c{i:03d}", y, y_hat, sigma, lo, hi, q)


def random_records(seed, n=40):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        y, y_hat = rng.random(2)
        half = rng.random() * 0.4
        out.append(rec(i, y, y_hat, max(y_hat - half, 0), min(y_hat + half, 1),
                       rng.choice(["high", "low", "unknown"])))
    return out


class TestRecord:
    def test_derived_fields(self):
        r = rec(0, 0.7, 0.8, 0.7, 0.9)
        assert r.covered and r.width == pytest.approx(0.2)
        assert not rec(0, 0.69, 0.8, 0.7, 0.9).covered

    def test_inclusive_upper(self):
        assert rec(0, 0.9, 0.8, 0.7, 0.9).covered


class TestCoverage:
    def test_nine_of_ten(self):
        records = [rec(i, 0.5, 0.5, 0.4, 0.6) for i in range(9)] + [rec(9, 0.9, 0.5, 0.4, 0.6)]
        assert marginal_coverage(records) == 0.9

    def test_trivial_intervals(self):
        assert marginal_coverage([rec(i, i / 10, 0.5, 0.0, 1.0) for i in range(11)]) == 1.0

    def test_recount(self):
        records = random_records(0)
        assert marginal_coverage(records) == sum(r.lower <= r.y_true <= r.upper for r in records) / 40

    def test_empty(self):
        for fn in (marginal_coverage, mae, conditional_coverage, grouped_coverage):
            with pytest.raises(EmptyTestSet):
                fn([])


class TestBins:
    def test_assignment(self):
        idx = DEFAULT_BINS.assign([0.0, 0.05, 0.1, 0.10001, 0.2, 0.3, 0.5, 0.7, 1.0])
        assert idx.tolist() == [0, 0, 0, 1, 1, 2, 2, 3, 3]

    def test_small_width_bin(self):
        out = conditional_coverage([rec(0, 0.5, 0.5, 0.47, 0.54)])
        assert out[0]["bin"] == "(0, 0.1]"
        assert (out[0]["count"], out[0]["coverage"]) == (1, 1.0)

    def test_empty_bin_flagged(self):
        out = conditional_coverage([rec(0, 0.5, 0.5, 0.2, 0.8)])
        assert out[0]["count"] == 0 and out[0]["coverage"] is None

    def test_custom_edges(self):
        bins = SizeBins((0.0, 0.5, 1.0))
        assert len(bins) == 2 and bins.names == ("(0, 0.5]", "(0.5, 1]")

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000))
    def test_partition_and_weighted_mean(self, seed):
        records = random_records(seed)
        bins = conditional_coverage(records)
        assert sum(b["count"] for b in bins) == len(records)
        weighted = sum(b["count"] * b["coverage"] for b in bins if b["count"]) / len(records)
        assert weighted == pytest.approx(marginal_coverage(records), abs=1e-12)


class TestGrouped:
    def test_all_high(self):
        out = grouped_coverage([rec(0, 0.5, 0.5, 0.4, 0.6), rec(1, 0.5, 0.5, 0.4, 0.6)])
        assert out["high"]["count"] == 2
        assert out["low"] == {"count": 0, "marginal_coverage": None, "mae": None, "per_bin": None}

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 10_000))
    def test_partition_and_composition(self, seed):
        records = random_records(seed)
        out = grouped_coverage(records)
        assert sum(g["count"] for g in out.values()) == len(records)
        for label, g in out.items():
            sub = [r for r in records if r.quality_label == label]
            if sub:
                assert g["marginal_coverage"] == marginal_coverage(sub)


class TestMae:
    def test_two_point(self):
        assert mae([rec(0, 0.6, 0.5, 0, 1), rec(1, 0.5, 0.5, 0, 1)]) == pytest.approx(0.05)

    def test_zero(self):
        assert mae([rec(i, 0.3, 0.3, 0, 1) for i in range(3)]) == 0.0

    def test_recount(self):
        records = random_records(3)
        assert mae(records) == pytest.approx(sum(abs(r.y_true - r.y_hat) for r in records) / 40, abs=1e-15)


class TestReport:
    def test_permutation_invariant(self):
        records = random_records(4)
        a = build_report(records, 0.1).to_dict()
        b = build_report(list(reversed(records)), 0.1).to_dict()
        assert json.dumps(a) == json.dumps(b)

    def test_adding_trivial_interval_keeps_coverage(self):
        records = random_records(5)
        before = marginal_coverage(records)
        assert marginal_coverage(records + [rec(99, 0.3, 0.9, 0.0, 1.0)]) >= before

    def test_json_layout(self, tmp_path):
        records = [rec(0, 0.5, 0.5, 0.2, 0.8, "high")]
        emit_report(build_report(records, 0.1), tmp_path / "r.json", tmp_path / "r.csv", records)
        data = json.loads((tmp_path / "r.json").read_text())
        assert list(data) == ["n_test", "alpha", "marginal_coverage", "mae", "width_stats", "per_bin", "per_quality"]
        assert data["per_bin"][0]["coverage"] is None
        assert "null" in (tmp_path / "r.json").read_text()
        assert data["per_quality"]["low"]["count"] == 0

    def test_csv_round_trip(self, tmp_path):
        records = random_records(6)
        write_predictions(records, tmp_path / "p.csv")
        header = (tmp_path / "p.csv").read_text().splitlines()[0]
        assert header == "image_id,y_true,y_hat,sigma,lower,upper,width,covered,quality_label"
        back = read_predictions(tmp_path / "p.csv")
        for a, b in zip(records, back):
            assert a.image_id == b.image_id and a.quality_label == b.quality_label
            assert a.covered == b.covered
            for f in ("y_true", "y_hat", "sigma", "lower", "upper", "width"):
                assert getattr(b, f) == pytest.approx(getattr(a, f), abs=5e-7)

    def test_six_decimals(self, tmp_path):
        write_predictions([rec(0, 1 / 3, 0.5, 0.25, 0.75)], tmp_path / "p.csv")
        row = (tmp_path / "p.csv").read_text().splitlines()[1]
        assert row == "c000,0.333333,0.500000,0.050000,0.250000,0.750000,0.500000,true,high"

    def test_byte_identical(self, tmp_path):
        records = random_records(7)
        for name in ("a", "b"):
            emit_report(build_report(records, 0.1), tmp_path / f"{name}.json", tmp_path / f"{name}.csv", records)
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


class TestCasePlot:
    def test_single_record_parses(self, tmp_path):
        emit_case_plot([rec(0, 0.8, 0.75, 0.6, 0.9)], tmp_path / "p.svg")
        root = ET.parse(tmp_path / "p.svg").getroot()
        assert root.tag == SVG_NS + "svg"
        assert len(root.findall(f".//{SVG_NS}rect[@class='range']")) == 1
        assert len(root.findall(f".//{SVG_NS}circle")) == 2

    def test_order_independent(self):
        records = random_records(8)
        shuffled = [records[i] for i in np.random.default_rng(0).permutation(len(records))]
        assert case_plot_svg(records) == case_plot_svg(shuffled)

    def test_sorted_descending(self):
        records = random_records(9)
        root = ET.fromstring(case_plot_svg(records))
        ids = [c.get("data-id") for c in root.findall(f".//{SVG_NS}circle[@class='y-true']")]
        expected = [r.image_id for r in sorted(records, key=lambda r: -r.y_true)]
        assert ids == expected

    def test_marker_colours(self):
        records = [rec(0, 0.9, 0.8, 0.7, 0.95, "high"), rec(1, 0.5, 0.6, 0.3, 0.8, "low"),
                   rec(2, 0.7, 0.7, 0.6, 0.8, "high")]
        root = ET.fromstring(case_plot_svg(records))
        for c in root.findall(f".//{SVG_NS}circle[@class='y-hat']"):
            assert c.get("fill") == QUALITY_COLORS[c.get("data-quality")]
        for c in root.findall(f".//{SVG_NS}circle[@class='y-true']"):
            assert c.get("fill") == "#000000"

    def test_empty(self):
        with pytest.raises(EmptyTestSet):
            case_plot_svg([])
