import json

import numpy as np
import pytest

from costboost.bagging import fit_bagged
from costboost.boosting import CostMatrix, EarlyStopSpec, fit_adaboost_m1, fit_gentleboost
from costboost.errors import VersionMismatch
from costboost.modelio import dumps_model, load_model, save_model
from costboost.svm import fit_linear_svm


@pytest.fixture(scope="module")
def models(request):
    from costboost.dataset import synth_survey

    d = synth_survey(150, 0.7, 4, informative=(0,), seed=3)
    c = CostMatrix([[0, 2], [1, 0]])
    return d, [
        fit_bagged(d, 8, seed=1, cost=c),
        fit_adaboost_m1(d, c, 20, stop=EarlyStopSpec(patience=5)),
        fit_gentleboost(d, None, 15),
        fit_linear_svm(d, 1.0, c),
    ]


def test_round_trip_exact(tmp_path, models):
    d, ms = models
    for i, m in enumerate(ms):
        p = save_model(m, tmp_path / f"m{i}.json")
        back = load_model(p)
        assert np.array_equal(back.predict(d.features), m.predict(d.features))
        assert np.array_equal(back.decision_function(d.features), m.decision_function(d.features))
        assert dumps_model(back) == p.read_text()


def test_version_and_format_checked(tmp_path, models):
    _, ms = models
    doc = json.loads(dumps_model(ms[0]))
    doc["version"] = 99
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(VersionMismatch):
        load_model(p)
    p.write_text("{not json")
    with pytest.raises(VersionMismatch):
        load_model(p)
    p.write_text(json.dumps({"format": "other"}))
    with pytest.raises(VersionMismatch):
        load_model(p)
