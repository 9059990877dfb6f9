import json
import subprocess
import sys

import pytest

from tods.errors import HyperparamOutOfRange, UnknownPrimitive
from tods.registry import (
    Family,
    HyperparamSpec,
    get_primitive,
    normalize_rules,
    registry_list,
)

EXPECTED_IDS = [
    # ordered by (family, id); the registry must list exactly these
    "tods.data_processing.impute_missing",
    "tods.data_processing.timestamp_validation",
    "tods.timeseries_processing.difference",
    "tods.timeseries_processing.moving_average",
    "tods.timeseries_processing.seasonal_decomposition",
    "tods.timeseries_processing.segment_subsequences",
    "tods.timeseries_processing.standardize",
    "tods.feature_analysis.autocorrelation",
    "tods.feature_analysis.dft_magnitudes",
    "tods.feature_analysis.nmf",
    "tods.feature_analysis.window_statistics",
    "tods.detection.ar_residual",
    "tods.detection.iforest",
    "tods.detection.knn",
    "tods.detection.matrix_profile",
    "tods.detection.threshold",
    "tods.detection.zscore",
    "tods.reinforcement.rule_based_filter",
]


def test_registry_contents_and_order():
    assert [d.id for d in registry_list()] == EXPECTED_IDS


def test_family_sizes():
    counts = {}
    for d in registry_list():
        counts[d.family] = counts.get(d.family, 0) + 1
    assert counts == {
        Family.DATA_PROCESSING: 2,
        Family.TIMESERIES_PROCESSING: 5,
        Family.FEATURE_ANALYSIS: 4,
        Family.DETECTION: 6,
        Family.REINFORCEMENT: 1,
    }


def test_defaults_pass_their_own_schemas():
    for d in registry_list():
        for name, value in d.defaults().items():
            d.hyperparams[name].validate(name, value)


def test_get_primitive():
    d = get_primitive("tods.detection.knn")
    assert d.family is Family.DETECTION
    with pytest.raises(UnknownPrimitive):
        get_primitive("tods.detection.abacus")


def test_descriptor_json_shape():
    d = get_primitive("tods.detection.iforest")
    doc = d.to_json()
    assert doc["id"] == d.id
    assert doc["family"] == "DetectionAlgorithm"
    assert doc["produces"] == "Scores"
    assert doc["arguments"] == {"data": "Table"}
    schema = doc["hyperparam_schema"]["n_trees"]
    assert schema["type"] == "int"
    assert schema["default"] == 100
    assert schema["range"] == [1, 1000]
    assert json.dumps(doc)  # JSON-serializable throughout


def test_registry_is_stable_across_processes():
    script = (
        "import json\n"
        "from tods.registry import registry_list\n"
        "print(json.dumps([d.to_json() for d in registry_list()], sort_keys=True))\n"
    )
    runs = [
        subprocess.run([sys.executable, "-c", script],
                       capture_output=True, text=True, check=True).stdout
        for _ in range(2)
    ]
    assert runs[0] == runs[1]
    assert [d["id"] for d in json.loads(runs[0])] == EXPECTED_IDS


# --- hyperparameter schema validation --------------------------------------

def int_spec(lo=1, hi=100):
    return HyperparamSpec(type="int", default=lo, lo=lo, hi=hi)


def test_int_validation():
    spec = int_spec(1, 10)
    assert spec.validate("w", 5) == 5
    with pytest.raises(HyperparamOutOfRange):
        spec.validate("w", 0)
    with pytest.raises(HyperparamOutOfRange):
        spec.validate("w", 11)
    with pytest.raises(HyperparamOutOfRange):
        spec.validate("w", 2.5)
    with pytest.raises(HyperparamOutOfRange):
        spec.validate("w", True)  # bools sneak through isinstance(int) checks


def test_float_validation_coerces_ints():
    spec = HyperparamSpec(type="float", default=0.5, lo=0.0, hi=1.0)
    assert spec.validate("c", 1) == 1.0
    assert isinstance(spec.validate("c", 1), float)
    with pytest.raises(HyperparamOutOfRange):
        spec.validate("c", float("nan"))
    with pytest.raises(HyperparamOutOfRange):
        spec.validate("c", 1.001)


def test_enum_validation():
    spec = HyperparamSpec(type="enum", default="a", choices=("a", "b"))
    assert spec.validate("m", "b") == "b"
    with pytest.raises(HyperparamOutOfRange):
        spec.validate("m", "c")


def test_float_list_validation():
    spec = HyperparamSpec(type="float_list", default=())
    assert spec.validate("xs", [1, 2.5]) == [1.0, 2.5]
    with pytest.raises(HyperparamOutOfRange):
        spec.validate("xs", [1.0, "two"])
    with pytest.raises(HyperparamOutOfRange):
        spec.validate("xs", 3.0)


# --- rules wire form --------------------------------------------------------

def test_normalize_rules_canonical_form():
    rules = normalize_rules([
        {"predicate": {"kind": "time_in", "args": [5, 10]}, "action": "force_normal"},
    ])
    assert rules == [{
        "action": "force_normal",
        "feature": "prediction",
        "predicate": {"args": [5.0, 10.0], "kind": "time_in"},
    }]


def test_normalize_rules_rejects_bad_shapes():
    good = {"predicate": {"kind": "in_range", "args": [0, 1]}, "action": "force_outlier"}
    for bad in [
        {**good, "action": "force_maybe"},
        {**good, "predicate": {"kind": "near", "args": [0, 1]}},
        {**good, "predicate": {"kind": "in_range", "args": [0]}},
        {**good, "predicate": {"kind": "in_range", "args": [2, 1]}},  # lo > hi
        {**good, "extra": 1},
        "not a dict",
    ]:
        with pytest.raises(HyperparamOutOfRange):
            normalize_rules([bad])


def test_rules_hyperparam_validates_via_descriptor():
    d = get_primitive("tods.reinforcement.rule_based_filter")
    spec = d.hyperparams["rules"]
    with pytest.raises(HyperparamOutOfRange):
        spec.validate("rules", [{"action": "force_normal"}])  # missing predicate
