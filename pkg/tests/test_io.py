import json

import numpy as np
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from gaugeelastic.io import read_csv, write_csv, write_json


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (5, 3), elements=st.floats(allow_nan=False, allow_infinity=False,
                                                      width=64)))
def test_csv_round_trip_is_exact(tmp_path_factory, data):
    p = tmp_path_factory.mktemp("csv") / "d.csv"
    write_csv(str(p), ["a", "b", "c"], data)
    cols, back = read_csv(str(p))
    assert cols == ["a", "b", "c"]
    assert np.array_equal(back, data)


def test_sidecar_and_width_check(tmp_path):
    p = tmp_path / "d.csv"
    write_csv(str(p), ["x"], [[1.0], [2.0]], {"config_sha256": "abc"})
    side = json.loads((tmp_path / "d.csv.json").read_text())
    assert side["rows"] == 2 and side["columns"] == ["x"] and side["config_sha256"] == "abc"
    try:
        write_csv(str(p), ["x", "y"], [[1.0]])
    except ValueError:
        pass
    else:
        raise AssertionError("width mismatch not caught")


def test_json_handles_numpy(tmp_path):
    p = tmp_path / "r.json"
    write_json(str(p), {"b": np.float64(1.5), "a": np.arange(2), "c": np.bool_(True)})
    text = p.read_text()
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": [0, 1], "b": 1.5, "c": True}
