"""
Tests for wassquant file formats, plots and example generation
"""

import json

import numpy as np
import pytest
from lxml import etree

from wassquant.core.examples import EXAMPLE_CONFIGS, create_example_files
from wassquant.core.measures import Codebook, DiscreteMeasure
from wassquant.core.parsers import (
    CSV_COLUMNS,
    read_codebook,
    read_labels,
    read_measure,
    read_rate_csv,
    read_sample,
    write_codebook,
    write_labels,
    write_measure,
    write_plan,
    write_rate_csv,
    write_sample,
    write_summary,
)
from wassquant.core.plotting import build_loglog_svg, render_loglog_svg
from wassquant.core.rates import (
    RateConfig,
    RateResult,
    TrialRecord,
    fit_loglog_slope,
    slope_band,
)
from wassquant.core.samplers import make_sampler
from wassquant.core.transport import wasserstein
from wassquant.errors import MeasureFormatError


def _fake_result() -> RateResult:
    sampler = make_sampler("uniform-cube", 1, name="interval")
    cfg = RateConfig(sampler=sampler, n_grid=(16, 64, 256), trials=3)
    records = tuple(
        TrialRecord(
            "empirical",
            "interval",
            1,
            1,
            n,
            n,
            t,
            (1 + 0.1 * t) / np.sqrt(n),
            100 * n + t,
        )
        for n in cfg.n_grid
        for t in range(3)
    )
    medians = {16: 1.1 / 4, 64: 1.1 / 8, 256: 1.1 / 16}
    slope, intercept, stderr = fit_loglog_slope(list(medians.items()))
    refs = {n: 16 * 256 for n in cfg.n_grid}
    return RateResult(cfg, records, slope, intercept, stderr, slope_band(1), refs)


class TestMeasureFiles:
    """Measure, sample, codebook and label documents"""

    def test_measure_values_survive_a_write(self, temp_dir):
        mu = DiscreteMeasure([[0.1, 1 / 3], [2.0, -0.7]], [0.3, 0.7])
        back = read_measure(write_measure(temp_dir / "m.json", mu))
        np.testing.assert_array_equal(back.support, mu.support)
        np.testing.assert_array_equal(back.weights, mu.weights)

    def test_weights_default_to_uniform(self, temp_dir):
        path = temp_dir / "m.json"
        path.write_text(json.dumps({"dim": 1, "points": [[0.0], [1.0], [2.0], [3.0]]}))
        np.testing.assert_allclose(read_measure(path).weights, 0.25)

    def test_duplicate_points_are_merged(self, temp_dir):
        path = temp_dir / "m.json"
        document = {
            "dim": 1,
            "points": [[0.0], [0.0], [1.0]],
            "weights": [0.25, 0.25, 0.5],
        }
        path.write_text(json.dumps(document))
        mu = read_measure(path)
        assert mu.size == 2
        np.testing.assert_allclose(mu.weights, [0.5, 0.5])

    @pytest.mark.parametrize(
        "document",
        [
            [1, 2, 3],
            {"dim": 1},
            {"dim": 1, "points": []},
            {"dim": 2, "points": [[0.0]]},
            {"dim": 1, "points": [[0.0], [1.0]], "weights": [1.0]},
            {"dim": 1, "points": [[0.0], [1.0]], "weights": ["a", "b"]},
            {"dim": 1, "points": [[0.0]], "colour": "red"},
            {"dim": 1, "points": [["x"]]},
        ],
    )
    def test_malformed_documents(self, temp_dir, document):
        path = temp_dir / "bad.json"
        path.write_text(json.dumps(document))
        with pytest.raises(MeasureFormatError):
            read_measure(path)

    def test_fixture_errors(self, fixtures_dir):
        for name in ("bad_json.json", "bad_weights.json", "ragged.json"):
            with pytest.raises(MeasureFormatError):
                read_measure(fixtures_dir / name)

    def test_sample_keeps_repeats(self, temp_dir):
        pts = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 2.0]])
        back = read_sample(write_sample(temp_dir / "s.json", pts))
        np.testing.assert_array_equal(back, pts)

    def test_codebook_and_labels(self, temp_dir):
        S = Codebook([[0.0, 0.0], [1.0, 1.0]])
        assert read_codebook(write_codebook(temp_dir / "c.json", S)).k == 2
        labels = np.array([0, 1, 1, 0])
        back = read_labels(write_labels(temp_dir / "l.json", labels, 2))
        np.testing.assert_array_equal(back, labels)

    def test_codebook_rejects_repeated_centers(self, temp_dir):
        path = temp_dir / "c.json"
        path.write_text(json.dumps({"dim": 1, "centers": [[0.0], [0.0]]}))
        with pytest.raises(MeasureFormatError):
            read_codebook(path)

    def test_plan_document(self, temp_dir, fixtures_dir):
        mu = read_measure(fixtures_dir / "mu.json")
        nu = read_measure(fixtures_dir / "nu.json")
        result = wasserstein(mu, nu, 2)
        path = write_plan(temp_dir / "plan.json", result.plan, result.cost, result.p)
        data = json.loads(path.read_text())
        assert data["p"] == 2.0
        assert data["cost"] == result.cost
        assert {(i, j) for i, j, _ in data["entries"]} == {(0, 0), (1, 1)}


class TestRateFiles:
    def test_csv_columns_and_exact_floats(self, temp_dir):
        result = _fake_result()
        rows = read_rate_csv(write_rate_csv(temp_dir / "rates.csv", result.records))
        assert tuple(rows[0]) == CSV_COLUMNS
        assert len(rows) == 9
        distances = [float(r["distance"]) for r in rows]
        assert distances == [rec.distance for rec in result.records]

    def test_csv_uses_unix_newlines(self, temp_dir):
        path = write_rate_csv(temp_dir / "rates.csv", _fake_result().records)
        assert b"\r\n" not in path.read_bytes()

    def test_summary_holds_exactly_the_record(self, temp_dir):
        summary = _fake_result().summary()
        path = write_summary(temp_dir / "summary.json", summary)
        assert json.loads(path.read_text()) == json.loads(json.dumps(summary))
        assert path.read_text().endswith("\n")


class TestPlotting:
    """Log-log SVG rendering"""

    def test_svg_tree(self):
        root = build_loglog_svg(_fake_result())
        assert etree.QName(root).localname == "svg"
        circles = [el for el in root.iter() if etree.QName(el).localname == "circle"]
        # nine trials plus three medians
        assert len(circles) == 12

    def test_rendered_file_parses(self, temp_dir):
        path = render_loglog_svg(temp_dir / "plots" / "rates.svg", _fake_result())
        text = path.read_text(encoding="utf-8")
        assert text.startswith('<?xml version="1.0" encoding="UTF-8"?>')
        root = etree.fromstring(text.encode("utf-8"))
        assert etree.QName(root).localname == "svg"
        assert "slope -0.500" in text


class TestExampleFiles:
    def test_creates_all_files(self, temp_dir):
        paths = create_example_files(str(temp_dir))
        names = {p.name for p in paths}
        assert {"mu.json", "nu.json", "sample.json"} <= names
        assert set(EXAMPLE_CONFIGS) <= names
        for p in paths:
            assert p.exists()

    def test_example_measures_parse(self, temp_dir):
        create_example_files(str(temp_dir))
        mu = read_measure(temp_dir / "mu.json")
        nu = read_measure(temp_dir / "nu.json")
        assert wasserstein(mu, nu, 2).cost == pytest.approx(np.sqrt(0.5))
        assert read_sample(temp_dir / "sample.json").shape == (40, 2)
