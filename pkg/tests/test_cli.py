import json
import math

import pytest

import qcover.cli as cli
from qcover import ConsistencyError
from qcover.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out else None)


def strip_volatile(obj):
    """Drop the fields that legitimately differ between identical runs."""
    if isinstance(obj, dict):
        return {
            k: strip_volatile(v)
            for k, v in obj.items()
            if k not in {"timestamp", "elapsed_ms"}
        }
    if isinstance(obj, list):
        return [strip_volatile(v) for v in obj]
    return obj


@pytest.fixture()
def d3_path(tmp_path):
    v = [1 / math.sqrt(3), -1 / math.sqrt(3), 1 / math.sqrt(3)]
    entries = [[[v[i] * v[j], 0.0] for j in range(3)] for i in range(3)]
    p = tmp_path / "d3.json"
    p.write_text(json.dumps({"n": 3, "entries": entries}))
    return str(p)


@pytest.fixture()
def threeslit_path(tmp_path):
    p = tmp_path / "threeslit.json"
    p.write_text(json.dumps({"n": 3, "elements": [[1, 2], [2, 3]]}))
    return str(p)


@pytest.fixture()
def pair_cover_path(tmp_path):
    p = tmp_path / "pair.json"
    p.write_text(json.dumps({"n": 2, "elements": [[1], [2]]}))
    return str(p)


class TestEnvelope:
    def test_shape_and_config(self, capsys):
        code, env = run(capsys, "identities", "--n", "4",
                        "--samples", "5", "--seed", "3")
        assert code == 0
        assert set(env) == {"command", "config", "timestamp", "report"}
        assert env["command"] == "identities"
        assert env["config"]["n"] == 4
        assert env["config"]["seed"] == 3
        assert "out" not in env["config"]
        assert env["report"]["n"] == 4
        assert env["report"]["samples"] == 5

    def test_out_file(self, capsys, tmp_path, pair_cover_path):
        target = tmp_path / "report.json"
        code = main(["cover-check", "--antichain", pair_cover_path,
                     "--out", str(target)])
        assert code == 0
        assert capsys.readouterr().out == ""
        env = json.loads(target.read_text())
        assert env["report"]["is_cover"] is True


class TestSubcommands:
    def test_validate(self, capsys, d3_path):
        code, env = run(capsys, "validate", "--dmatrix", d3_path, "--k", "2")
        assert code == 0
        rep = env["report"]
        assert rep["hermitian"] is True
        assert rep["strongly_positive"] is True
        assert rep["total_measure"] == pytest.approx(1 / 3)

    def test_measure_with_antichain(self, capsys, d3_path, threeslit_path):
        code, env = run(capsys, "measure", "--dmatrix", d3_path,
                        "--antichain", threeslit_path)
        assert code == 0
        rep = env["report"]
        assert rep["mu_omega"] == pytest.approx(1 / 3)
        assert rep["singletons"] == pytest.approx([1 / 3] * 3)
        assert [e["mu"] for e in rep["events"]] == pytest.approx([0.0, 0.0])

    def test_cover_check_yes(self, capsys, pair_cover_path):
        code, env = run(capsys, "cover-check", "--antichain", pair_cover_path)
        assert code == 0
        rep = env["report"]
        assert rep["is_cover"] is True
        assert rep["coefficients"] == ["1", "1"]

    def test_cover_check_no(self, capsys, threeslit_path):
        code, env = run(capsys, "cover-check", "--antichain", threeslit_path)
        assert code == 0
        rep = env["report"]
        assert rep["is_cover"] is False
        assert rep["witness"] is not None

    def test_scan(self, capsys):
        code, env = run(capsys, "scan", "--n", "3")
        assert code == 0
        rep = env["report"]
        assert rep["total"] == 6
        assert rep["covers"] == 6
        assert rep["counterexamples"] == []

    def test_coevents(self, capsys, d3_path):
        code, env = run(capsys, "coevents", "--dmatrix", d3_path)
        assert code == 0
        rep = env["report"]
        assert rep["no_coevent"] is False
        assert rep["ppc_supports"] == [[1, 3]]
        assert rep["nontriviality"] == [1, 3]

    def test_coevents_none(self, capsys, tmp_path):
        v = [1 / math.sqrt(2), -1 / math.sqrt(2)]
        entries = [[[v[i] * v[j], 0.0] for j in range(2)] for i in range(2)]
        p = tmp_path / "d2.json"
        p.write_text(json.dumps({"n": 2, "entries": entries}))
        code, env = run(capsys, "coevents", "--dmatrix", str(p))
        assert code == 0
        assert env["report"]["no_coevent"] is True

    def test_antichain_enumerate(self, capsys):
        code, env = run(capsys, "antichain", "enumerate", "--n", "3")
        assert code == 0
        assert env["command"] == "antichain enumerate"
        assert env["report"]["count"] == 6

    def test_antichain_classify(self, capsys, tmp_path):
        p = tmp_path / "ac.json"
        p.write_text(json.dumps(
            {"n": 4, "elements": [[1, 2, 3], [1, 4], [2, 4], [3, 4]]}
        ))
        code, env = run(capsys, "antichain", "classify",
                        "--antichain", str(p))
        assert code == 0
        cert = env["report"]["certificate"]
        assert cert["kind"] == "pivot_bound"
        assert cert["pivot"] == 2
        assert len(env["report"]["decompositions"]) == 2

    def test_antichain_generate(self, capsys):
        code, env = run(capsys, "antichain", "generate", "bowtie",
                        "--n", "5")
        assert code == 0
        assert env["report"]["kind"] == "bowtie"
        assert len(env["report"]["antichain"]["elements"]) == 6

    def test_pks_rays(self, capsys):
        code, env = run(capsys, "pks", "rays")
        assert code == 0
        assert env["report"]["count"] == 33

    def test_pks_bases(self, capsys):
        code, env = run(capsys, "pks", "bases")
        assert code == 0
        assert env["report"]["basis_count"] == 16
        assert env["report"]["pair_count"] == 72

    def test_pks_search(self, capsys):
        code, env = run(capsys, "pks", "search")
        assert code == 0
        assert env["report"]["satisfiable"] is False

    def test_pks_witness(self, capsys):
        code, env = run(capsys, "pks", "witness")
        assert code == 0
        assert env["report"]["verdict"] == "antichain: yes; inextendible: no"

    def test_pks_sample(self, capsys):
        code, env = run(capsys, "pks", "sample", "--samples", "200",
                        "--seed", "5")
        assert code == 0
        assert env["report"]["all_covered"] is True
        assert env["report"]["samples"] == 200


class TestExitCodes:
    def test_bad_n(self, capsys):
        assert main(["scan", "--n", "0"]) == 2
        assert "error:" in capsys.readouterr().err

    def test_missing_file(self, capsys):
        assert main(["validate", "--dmatrix", "/no/such/file.json"]) == 2
        assert "error:" in capsys.readouterr().err

    def test_bad_generator_params(self, capsys):
        assert main(["antichain", "generate", "bowtie", "--n", "6"]) == 2
        assert main(["antichain", "generate", "level", "--n", "4"]) == 2

    def test_unknown_flag(self, capsys):
        assert main(["scan", "--n", "3", "--bogus"]) == 2
        capsys.readouterr()

    def test_unknown_command(self, capsys):
        assert main(["frobnicate"]) == 2
        capsys.readouterr()

    def test_counterexample_exit(self, capsys, monkeypatch):
        class FakeReport:
            counterexamples = ({"n": 3, "elements": [[1]]},)

            def to_json(self):
                return {"counterexamples": list(self.counterexamples)}

        monkeypatch.setattr(cli, "scan", lambda *a, **kw: FakeReport())
        code, env = run(capsys, "scan", "--n", "3")
        assert code == 3
        assert env["report"]["counterexamples"]

    def test_internal_error_exit(self, capsys, monkeypatch):
        def boom(*a, **kw):
            raise ConsistencyError("invariant broken")

        monkeypatch.setattr(cli, "witness_check", boom)
        assert main(["pks", "witness"]) == 4
        assert "internal error:" in capsys.readouterr().err


class TestDeterminism:
    def test_scan_repeatable(self, capsys):
        _, a = run(capsys, "scan", "--n", "4", "--workers", "1")
        _, b = run(capsys, "scan", "--n", "4", "--workers", "1")
        assert strip_volatile(a) == strip_volatile(b)

    def test_identities_repeatable(self, capsys):
        _, a = run(capsys, "identities", "--n", "5", "--samples", "20",
                   "--seed", "11")
        _, b = run(capsys, "identities", "--n", "5", "--samples", "20",
                   "--seed", "11")
        assert strip_volatile(a) == strip_volatile(b)

    def test_search_repeatable(self, capsys):
        _, a = run(capsys, "pks", "search")
        _, b = run(capsys, "pks", "search")
        assert strip_volatile(a) == strip_volatile(b)
