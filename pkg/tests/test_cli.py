"""End-to-end runs of the experiment runner on small configs."""

import json
from pathlib import Path

import pytest

from recurlab.certificates import Certificate
from recurlab.cli import ConfigError, ExperimentConfig, main, run

TRI13 = {"name": "triangular-pow2", "count": 13}


def write_config(tmp_path: Path, data: dict) -> Path:
    p = tmp_path / "config.json"
    p.write_text(json.dumps(data))
    return p


def config(kind: str, params: dict, **extra) -> dict:
    return {"schema": "recurlab/1", "kind": kind, "params": params, **extra}


# --- config validation -----------------------------------------------------

def test_schema_rejects_bad_configs():
    good = config("witness", {"seq": TRI13, "theta": "1/3", "horizon": 3})
    ExperimentConfig.from_dict(good)
    for breakage in [
        lambda d: d.pop("schema"),
        lambda d: d.update(schema="recurlab/2"),
        lambda d: d.update(kind="unknown"),
        lambda d: d.update(extra=1),
        lambda d: d["params"].pop("seq"),
        lambda d: d["params"].update(stray=1),
        lambda d: d["params"]["seq"].update(name="mystery"),
    ]:
        data = json.loads(json.dumps(good))
        breakage(data)
        with pytest.raises(ConfigError, match="schema violation"):
            ExperimentConfig.from_dict(data)


def test_malformed_config_exits_nonzero(tmp_path):
    p = write_config(tmp_path, config("jamison", {"epsilon": "1/4",
                                                  "horizon": 5}))
    assert main(["jamison", "--config", str(p)]) == 2


def test_kind_subcommand_mismatch(tmp_path):
    p = write_config(tmp_path, config("witness", {"seq": TRI13,
                                                  "theta": "1/3",
                                                  "horizon": 3}))
    assert main(["jamison", "--config", str(p)]) == 2


# --- experiment kinds ------------------------------------------------------

def test_witness_run(tmp_path):
    cfg = ExperimentConfig.from_dict(config(
        "witness", {"seq": TRI13, "theta": "1/3", "horizon": 12,
                    "target": "3/2"}))
    report = run(cfg, out_dir=tmp_path)
    assert report["passed"] and report["schema"] == "recurlab/1"
    assert (tmp_path / "report.json").exists()
    assert (tmp_path / "cert-00-rotation-witness.json").exists()
    lines = (tmp_path / "residues.csv").read_text().splitlines()
    assert lines[0] == "k,n_k,residue,dist,dist_lo,dist_hi"
    assert len(lines) == 14
    assert lines[1].startswith("0,1,1/3,")


def test_rankone_run(tmp_path):
    p = write_config(tmp_path, config(
        "rankone", {"schedule": {"kind": "chacon", "rounds": 6},
                    "k_range": [1, 2]}, out=str(tmp_path / "out")))
    assert main(["rankone", "--config", str(p)]) == 0
    rows = (tmp_path / "out" / "overlaps.csv").read_text().splitlines()
    assert rows[1].split(",")[:3] == ["1", "3", "0/1"]
    assert rows[2].split(",")[:3] == ["2", "12", "0/1"]
    levels = (tmp_path / "out" / "levels.csv").read_text().splitlines()
    assert levels[0] == "level,lo,lo_frac,width_frac,red"


def test_jamison_naturals_no_witness(tmp_path):
    p = write_config(tmp_path, config(
        "jamison", {"seq": {"name": "naturals", "count": 13},
                    "epsilon": "1/4", "horizon": 12, "grid": 13,
                    "expect": "separation"}, out=str(tmp_path / "out")))
    assert main(["jamison", "--config", str(p)]) == 0
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    cert = report["certificates"][0]
    assert "no small-sup witness found" in cert["claim"]
    assert cert["passed"] and not report["values"]["witness_found"]


def test_jamison_expectation_can_fail(tmp_path):
    p = write_config(tmp_path, config(
        "jamison", {"seq": {"name": "naturals", "count": 13},
                    "epsilon": "1/4", "horizon": 12, "grid": 13,
                    "expect": "witness"}, out=str(tmp_path / "out")))
    assert main(["jamison", "--config", str(p)]) == 1


def test_jamison_structural_witness(tmp_path):
    cfg = ExperimentConfig.from_dict(config(
        "jamison", {"seq": {"name": "triangular-pow2", "count": 14},
                    "epsilon": "1/4", "horizon": 12, "expect": "witness"}))
    report = run(cfg, out_dir=tmp_path)
    assert report["passed"]
    scan = (tmp_path / "scan.csv").read_text().splitlines()
    assert len(scan) == 14        # a found witness tabulates every k


def test_kahane_run(tmp_path):
    cfg = ExperimentConfig.from_dict(config(
        "kahane", {"seq": TRI13, "stages": 4,
                   "targets": {"rule": "inverse-linear"}, "horizon": 3},
        bits=96))
    report = run(cfg, out_dir=tmp_path)
    assert report["passed"] and len(report["certificates"]) == 2
    kinds = [c["kind"] for c in report["certificates"]]
    assert kinds == ["rigid-measure-build", "rigidity-check"]
    rows = (tmp_path / "fourier.csv").read_text().splitlines()
    assert rows[0] == "k,n_k,target,dev,dev_lo,dev_hi"
    assert len(rows) == 5


def test_linsys_run(tmp_path):
    cfg = ExperimentConfig.from_dict(config(
        "linsys", {"seq": TRI13, "dimension": 8, "horizon": 3,
                   "delta": "1/8", "witness_theta": "1/3",
                   "mc": {"samples": 200, "gamma_scale": 0.9}}, seed=7))
    report = run(cfg, out_dir=tmp_path)
    assert report["passed"]
    kinds = [c["kind"] for c in report["certificates"]]
    assert kinds == ["power-norms", "ball-disjoint", "ball-sample"]
    assert (tmp_path / "norms.csv").read_text().startswith(
        "k,n_k,norm_TI,norm_TD,bits_used")
    assert "gamma_max" in report["values"]


def test_bohr_run(tmp_path):
    cfg = ExperimentConfig.from_dict(config(
        "bohr", {"r": 1, "n_max": 3, "eps": "1/8",
                 "probe": {"rotations": ["1/6"], "eps": "1/2"}}))
    report = run(cfg, out_dir=tmp_path)
    assert report["passed"]
    kinds = [c["kind"] for c in report["certificates"]]
    assert kinds == ["non-jamison-witness"] * 2 + ["rotation-witness"] * 2 \
        + ["union"]
    union = report["certificates"][-1]
    assert union["values"]["elements"] == report["values"]["merged"]
    blocks = (tmp_path / "blocks.csv").read_text().splitlines()
    assert blocks[1] == "1,0,7"
    assert report["values"]["probe"]["found"]
    assert (tmp_path / "probe.csv").read_text().splitlines()[0] == \
        "tuple,eps,found_k,value"


def test_gauss_run(tmp_path):
    cfg = ExperimentConfig.from_dict(config(
        "gauss", {"kahane": {"seq": TRI13, "stages": 4,
                             "targets": {"rule": "pow2", "log2": 4}},
                  "rectangle": [-0.6, 0.9, -0.7, 0.8], "blocks": 10,
                  "side": "A", "max_index": 5, "samples": 1000}, seed=11))
    report = run(cfg, out_dir=tmp_path)
    assert report["passed"]
    assert report["values"]["atoms"] == 16
    rows = (tmp_path / "gauss.csv").read_text().splitlines()
    assert len(rows[0].split(",")) == 13
    assert len(rows) == 5         # A-indices 2..5 of the 10-block split


# --- flags and overrides ---------------------------------------------------

def test_flag_overrides(tmp_path):
    p = write_config(tmp_path, config(
        "witness", {"seq": TRI13, "theta": "1/3", "horizon": 12}))
    out = tmp_path / "ovr"
    assert main(["witness", "--config", str(p), "--out", str(out),
                 "--horizon", "5", "--bits", "64", "--seed", "3"]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["config"]["params"]["horizon"] == 5
    assert report["config"]["bits"] == 64 and report["config"]["seed"] == 3
    assert len((out / "residues.csv").read_text().splitlines()) == 7


def test_reports_reproduce_bit_for_bit(tmp_path):
    cfg = ExperimentConfig.from_dict(config(
        "linsys", {"seq": TRI13, "dimension": 8, "horizon": 3,
                   "delta": "1/8", "witness_theta": "1/3",
                   "mc": {"samples": 200}}, seed=5))
    first = run(cfg, out_dir=tmp_path / "a")
    again = run(ExperimentConfig.from_dict(first["config"]),
                out_dir=tmp_path / "b")
    assert again["certificates"] == first["certificates"]
    assert again["values"] == first["values"]


# --- gen-seq, combine, report ----------------------------------------------

def test_gen_seq_stdout(capsys):
    assert main(["gen-seq", "--name", "chacon", "--count", "5"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out == ["k,n_k", "0,1", "1,4", "2,13", "3,40", "4,121"]


def test_gen_seq_to_file(tmp_path):
    assert main(["gen-seq", "--name", "divisibility", "--count", "4",
                 "--base", "3", "--ratio", "2", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "sequence.csv").read_text() == \
        "k,n_k\n0,3\n1,6\n2,12\n3,24\n"


def test_combine_requires_all_passing(tmp_path):
    good = Certificate(kind="a", claim="first", passed=True,
                       values={"elements": [3, 1]})
    good.save(tmp_path / "a.json")
    Certificate(kind="b", claim="second", passed=False).save(tmp_path / "b.json")
    assert main(["combine", str(tmp_path / "a.json"), str(tmp_path / "b.json"),
                 "--out", str(tmp_path / "u")]) == 1
    assert not (tmp_path / "u").exists()


def test_combine_merges_elements(tmp_path):
    Certificate(kind="a", claim="first", passed=True, exact=True,
                values={"elements": [3, 1]}).save(tmp_path / "a.json")
    Certificate(kind="b", claim="second", passed=True, exact=True,
                values={"elements": [2, 3]}).save(tmp_path / "b.json")
    assert main(["combine", str(tmp_path / "a.json"), str(tmp_path / "b.json"),
                 "--out", str(tmp_path), "--claim", "both halves"]) == 0
    data = json.loads((tmp_path / "combined.json").read_text())
    assert data["claim"] == "both halves" and data["passed"] and data["exact"]
    assert data["values"]["elements"] == [1, 2, 3]
    assert [c["kind"] for c in data["values"]["components"]] == ["a", "b"]


def test_combine_run_reports(tmp_path):
    wit_path = tmp_path / "w.json"
    wit_path.write_text(json.dumps(
        config("witness", {"seq": TRI13, "theta": "1/3", "horizon": 3})))
    boh_path = tmp_path / "b.json"
    boh_path.write_text(json.dumps(config("bohr", {"r": 1, "n_max": 2, "eps": "1"})))
    assert main(["witness", "--config", str(wit_path),
                 "--out", str(tmp_path / "w")]) == 0
    assert main(["bohr", "--config", str(boh_path),
                 "--out", str(tmp_path / "b")]) == 0
    assert main(["combine", str(tmp_path / "w" / "report.json"),
                 str(tmp_path / "b" / "report.json"),
                 "--out", str(tmp_path)]) == 0
    data = json.loads((tmp_path / "combined.json").read_text())
    # the rotation witnesses hold enclosures, so the union is not exact
    assert data["passed"] and not data["exact"]
    comps = data["values"]["components"]
    assert [c["kind"] for c in comps] == ["witness", "bohr"]
    assert comps[0]["claim"] == "1 certificate(s)"
    # elements surface from the bohr union through the run report
    assert data["values"]["elements"] == [6, 7, 13, 468, 469, 937, 1405]


def test_combine_single_certificate(tmp_path):
    Certificate(kind="solo", claim="alone", passed=True,
                values={"elements": [5]}).save(tmp_path / "s.json")
    assert main(["combine", str(tmp_path / "s.json"),
                 "--out", str(tmp_path)]) == 0
    data = json.loads((tmp_path / "combined.json").read_text())
    assert data["values"]["elements"] == [5] and data["passed"]


def test_report_subcommand(tmp_path, capsys):
    Certificate(kind="demo", claim="ok", passed=True).save(tmp_path / "c.json")
    assert main(["report", str(tmp_path / "c.json")]) == 0
    assert "passed:  True" in capsys.readouterr().out
    Certificate(kind="demo", claim="no", passed=False).save(tmp_path / "f.json")
    assert main(["report", str(tmp_path / "f.json")]) == 1
    (tmp_path / "x.json").write_text("{}")
    assert main(["report", str(tmp_path / "x.json")]) == 2
