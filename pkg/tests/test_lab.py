import csv
import io
import json

import pytest

from fglab.fgl import law_to_json, standard_law
from fglab.gf import FieldSpec
from fglab.lab.cli import main
from fglab.lab.config import ConfigError, ExperimentConfig, PrecisionError, parse_policy
from fglab.lab.report import CSV_COLUMNS
from fglab.lab.rng import SplitMix64
from fglab.pseries import biv_from_dict


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_splitmix_reference_vectors():
    r = SplitMix64(0)
    assert [r.next() for _ in range(2)] == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4]
    r = SplitMix64(1234567)
    assert r.next() == 6457827717110365317


def test_rng_elements_are_reproducible():
    spec = FieldSpec(3, 2)
    a = [SplitMix64(7).element(spec) for _ in range(3)]
    b = [SplitMix64(7).element(spec) for _ in range(3)]
    assert a == b
    assert not SplitMix64(0).element(spec, nonzero=True).is_zero()


def test_config_checks():
    with pytest.raises(ConfigError):
        ExperimentConfig("trichotomy", p=4).validate()
    with pytest.raises(ConfigError):
        ExperimentConfig("trichotomy", p=2, h=3, field_deg=2).validate()
    with pytest.raises(PrecisionError):
        ExperimentConfig("trichotomy", p=2, h=2, N=15).validate()
    assert ExperimentConfig("trichotomy", p=2, h=2).validate().precision == 80
    assert parse_policy("trials=5,sizes=64;128") == {"trials": 5, "sizes": "64;128"}
    with pytest.raises(ConfigError):
        parse_policy("oops")


def test_exit_codes(capsys):
    assert run(capsys, "trichotomy", "--p", "2", "--h", "2", "--prec", "40")[0] == 3
    assert run(capsys, "trichotomy", "--p", "9")[0] == 2
    assert run(capsys, "nonsense")[0] == 2
    assert run(capsys, "verify-law")[0] == 2
    assert run(capsys, "ramification", "--p", "3", "--h", "2")[0] == 2


def test_construct_is_idempotent(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(capsys, "construct", "--p", "2", "--h", "2", "--prec", "128", "--out", str(a))[0] == 0
    assert run(capsys, "construct", "--p", "2", "--h", "2", "--prec", "128", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    code, out, err = run(capsys, "verify-law", str(a))
    assert code == 0
    checks = {c["name"]: c for c in json.loads(out)["checks"]}
    assert checks["p-series"]["measured"] == {"nonzero_degrees": [4]}


def test_construct_degenerate(capsys):
    code, out, err = run(capsys, "construct", "--p", "2", "--h", "2", "--prec", "1")
    law = json.loads(out)
    assert code == 0 and law["N"] == 1 and law["meta"]["degenerate"] is True
    assert sorted(map(tuple, [c[:2] for c in law["G"]])) == [(0, 1), (1, 0)]


def test_construct_height_one(tmp_path, capsys):
    f = tmp_path / "l.json"
    run(capsys, "construct", "--p", "3", "--h", "1", "--prec", "32", "--out", str(f))
    code, out, _ = run(capsys, "verify-law", str(f))
    checks = {c["name"]: c for c in json.loads(out)["checks"]}
    assert code == 0 and checks["height"]["measured"] == 1


def test_verify_corrupted_law(tmp_path, capsys):
    law = standard_law(2, 2, 32)
    obj = law_to_json(law)
    obj["G"] = obj["G"] + [[3, 3, [1, 0]]]  # symmetric, but not associative
    f = tmp_path / "bad.json"
    f.write_text(json.dumps(obj))
    code, out, _ = run(capsys, "verify-law", str(f))
    assert code == 1
    checks = {c["name"]: c for c in json.loads(out)["checks"]}
    assert checks["associativity"]["pass"] is False
    assert checks["associativity"]["measured"]["witness"]


def test_verify_additive_law(tmp_path, capsys):
    from fglab.fgl import FormalGroupLaw

    spec = FieldSpec(2, 1)
    law = FormalGroupLaw(biv_from_dict(spec, 32, {(1, 0): 1, (0, 1): 1}), None, {})
    f = tmp_path / "add.json"
    f.write_text(json.dumps(law_to_json(law)))
    code, out, _ = run(capsys, "verify-law", str(f))
    checks = {c["name"]: c for c in json.loads(out)["checks"]}
    assert checks["height"]["measured"] == "[p]=0, height infinite to precision"
    assert code == 0


def test_reports_are_deterministic(capsys):
    args = ("normalizer", "--p", "3", "--h", "1", "--seed", "5", "--policy", "trials=6,samples=3")
    one = run(capsys, *args)
    two = run(capsys, *args)
    assert one == two
    rep = json.loads(one[1])
    assert all(c["anchor"] for c in rep["checks"])


def test_csv_report(capsys):
    code, out, _ = run(capsys, "ramification", "--p", "3", "--h", "1", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert list(rows[0]) == CSV_COLUMNS
    assert {r["pass"] for r in rows} == {"pass"}


def test_height_verb(capsys):
    code, out, _ = run(capsys, "height", "--p", "3", "--h", "1")
    rep = json.loads(out)
    assert code == 0
    assert rep["checks"][0]["measured"]["h"] == 1


def test_trichotomy_verb(capsys):
    code, out, _ = run(capsys, "trichotomy", "--p", "2", "--h", "2")
    rep = json.loads(out)
    assert code == 0 and rep["summary"]["failed"] == 0
    assert rep["config"]["N"] == 80


def test_bench_verb(capsys):
    code, out, _ = run(capsys, "bench", "--policy", "sizes=16;32")
    rep = json.loads(out)
    assert code == 0
    assert set(rep["timing"]["compose"]) == {"horner", "blocked", "frobenius"}
