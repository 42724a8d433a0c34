import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from itisc.models import ALGORITHMS, ConfigError, FittedModel, canonical, fit_model, parse_model_spec, resolve_params
from itisc.report import HEADER, ExperimentReport, build_metadata


class TestModelSpecs:
    def test_parse_with_params(self):
        algo, params = parse_model_spec("fuzzy-itisc-r:t2=0.1")
        assert algo == "fuzzy-itisc-r" and params == {"t1": 1.0, "t2": 0.1}

    @pytest.mark.parametrize("alias,name", [("km", "kmeans"), ("fi", "fuzzy-itisc-r"), ("hierarchical", "hc")])
    def test_aliases(self, alias, name):
        assert canonical(alias) == name

    @pytest.mark.parametrize("text", ["nope", "fcm:t2=1", "fcm:m=1", "fi:t2=0", "fi:t2=-1", "hc:linkage=median",
                                      "fcm:m", "kmeans:n_init=0", "fi:t2=abc"])
    def test_invalid(self, text):
        with pytest.raises(ConfigError):
            parse_model_spec(text)

    def test_resolve_defaults(self):
        assert resolve_params("hc") == {"linkage": "ward"}


class TestFitModel:
    X = np.array([[0.0, 0.0], [0.2, 0.1], [5.0, 5.0], [5.1, 4.9], [0.0, 5.0], [0.1, 5.2]])

    @pytest.mark.parametrize("algorithm", ALGORITHMS)
    def test_every_algorithm(self, algorithm):
        m = fit_model(self.X, algorithm, 3, seed=0)
        assert m.centers.shape == (3, 2)
        assert m.labels.shape == (6,) and set(m.labels.tolist()) <= {0, 1, 2}
        np.testing.assert_array_equal(m.predict(self.X), m.predict(self.X))

    def test_kmeans_c_equals_n(self):
        assert fit_model(self.X, "kmeans", 6, seed=1).objective == 0.0

    def test_round_trip(self):
        m = fit_model(self.X, "fuzzy-itisc-ao", 3, seed=2, params={"t2": 0.5})
        back = FittedModel.from_dict(json.loads(json.dumps(m.to_dict(include_membership=True))))
        np.testing.assert_array_equal(back.centers, m.centers)
        np.testing.assert_array_equal(back.membership, m.membership)
        np.testing.assert_array_equal(back.predict(self.X), m.predict(self.X))
        assert back.label == m.label == "fuzzy-itisc-ao(t1=1,t2=0.5)"

    def test_membership_flag_gated(self):
        d = fit_model(self.X, "fcm", 3).to_dict()
        assert "membership" not in d and "weights" not in d


class TestReport:
    def sample(self):
        r = ExperimentReport()
        r.add("exp", "fcm(m=2)", "C=3;M=1", "MaxBoundaryDist", 8.922103279968995)
        r.add("exp", 'odd "name", with comma', "p", "m", -1e-300)
        r.add("exp", "x", "p", "nan-metric", float("nan"))
        return r

    def test_csv_round_trip(self):
        r = self.sample()
        back = ExperimentReport.from_csv(r.to_csv())
        assert back.rows[:2] == r.rows[:2]
        assert np.isnan(back.rows[2].value)
        assert r.to_csv().splitlines()[0] == ",".join(HEADER)

    @given(st.lists(st.tuples(*[st.text(st.characters(blacklist_categories=("Cc", "Cs")))] * 4,
                              st.floats(allow_nan=False)), max_size=10))
    def test_csv_round_trip_property(self, rows):
        r = ExperimentReport()
        for row in rows:
            r.add(*row)
        assert ExperimentReport.from_csv(r.to_csv()).rows == r.rows

    def test_json_round_trip(self):
        r = self.sample()
        r.metadata = {"seeds": [0, 1]}
        back = ExperimentReport.from_json(r.to_json())
        assert back.rows[:2] == r.rows[:2] and back.metadata == r.metadata

    def test_select_value(self):
        r = self.sample()
        assert r.value(metric="MaxBoundaryDist") == 8.922103279968995
        with pytest.raises(KeyError):
            r.value(experiment="exp")

    def test_bad_header(self):
        with pytest.raises(ValueError):
            ExperimentReport.from_csv("a,b\n1,2\n")

    def test_metadata_timestamp_opt_in(self, monkeypatch):
        monkeypatch.delenv("SOURCE_DATE_EPOCH", raising=False)
        assert "timestamp" not in build_metadata([0])
        assert "timestamp" in build_metadata([0], stamp=True)
        monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
        assert build_metadata([0])["timestamp"] == 1700000000
