import csv
import io
import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from simapprox import cli
from simapprox.errors import InvalidArgument
from simapprox.harness import (
    RATIO_COLUMNS,
    SCHEMA,
    ApproxReport,
    ExperimentConfig,
    loglog_svg,
    ratio_csv,
    resolve_nodes,
    run,
)

CONFIG_TEXT = """\
[experiment]
domain = disk            ; unit disk
function = pole:2
theorem = 1
k = 1
nodes = equispaced:3
degrees = 8, 16
compacts = disk:0,0,0.5; disk:0.2,0,0.1
seed = 7
plots = no
"""


@pytest.fixture(scope="module")
def small_config():
    return ExperimentConfig(domain="disk", function="pole:2", theorem="1", nodes="equispaced:3",
                            degrees=(8, 16), compacts=("disk:0,0,0.5",), plots=True)


@pytest.fixture(scope="module")
def small_report(small_config):
    return run(small_config)


def test_config_file_parse(tmp_path):
    path = tmp_path / "exp.ini"
    path.write_text(CONFIG_TEXT)
    cfg = ExperimentConfig.from_file(path)
    assert cfg.degrees == (8, 16) and cfg.seed == 7 and cfg.plots is False
    assert cfg.compacts == ("disk:0,0,0.5", "disk:0.2,0,0.1")
    cfg.validate()
    over = cfg.with_overrides(k=2, degrees=(4, 8, 12), function=None)
    assert over.k == 2 and over.degrees == (4, 8, 12) and over.function == "pole:2"


def test_config_file_needs_section(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[other]\nk = 1\n")
    with pytest.raises(InvalidArgument):
        ExperimentConfig.from_file(path)


@pytest.mark.parametrize("overrides", [
    {"theorem": "4"},
    {"degrees": (16, 8)},
    {"degrees": ()},
    {"k": 0},
    {"mode": "slow"},
    {"domain": "blob"},
    {"function": "pole:0.5"},
    {"compacts": ("disk:0,0,2",)},
    {"nodes": "random:4"},
    {"nodes": "equispaced:x"},
])
def test_config_validation_errors(overrides):
    with pytest.raises(InvalidArgument):
        ExperimentConfig(**overrides).validate()


def test_unknown_config_key():
    with pytest.raises(InvalidArgument):
        ExperimentConfig.from_mapping({"degree": "8"})


def test_resolve_nodes(maps):
    D = maps["disk"].domain
    z = resolve_nodes("equispaced:4", D, maps["disk"])
    assert np.allclose(z, [1, 1j, -1, -1j])
    s = resolve_nodes("equispaced:3", maps["segment"].domain, maps["segment"])
    assert np.allclose(np.sort(s.real), [-1, 0, 1], atol=1e-12)
    assert np.allclose(resolve_nodes("list:1;0.5j", D, maps["disk"]), [1, 0.5j])
    assert len(resolve_nodes("boundary:5", D, maps["disk"])) == 5


def test_report_determinism(small_config, small_report):
    again = run(small_config)
    assert again.to_json(include_timestamp=False) == small_report.to_json(include_timestamp=False)


def test_report_json_round_trip(small_report):
    text = small_report.to_json()
    back = ApproxReport.from_json(text)
    assert back.to_json() == text
    assert back.data["schema"] == SCHEMA
    with pytest.raises(InvalidArgument):
        ApproxReport.from_json(json.dumps({"schema": 99}))


def test_report_contents(small_report):
    d = small_report.data
    assert d["status"] == "ok" and d["degrees"] == [8, 16]
    assert {c["name"] for c in d["criteria"]} >= {"interpolation exactness", "max-modulus sanity"}
    assert "c1" in d["fits"] and "dini_c2" in d["fits"]
    json.loads(small_report.to_json())  # strict JSON: no NaN or Infinity


def test_ratio_csv_format(small_report):
    text = ratio_csv(small_report.ratio_rows())
    assert "\r" not in text
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == RATIO_COLUMNS
    assert len(rows) - 1 == len(small_report.ratio_rows())
    val = rows[2][RATIO_COLUMNS.index("re")]
    assert len(val.replace("-", "").replace(".", "").split("e")[0].lstrip("0")) <= 17
    assert float(val) == small_report.ratio_rows()[1]["re"]


def test_written_files(small_report, tmp_path):
    paths = small_report.write(tmp_path)
    assert set(paths) == {"json", "csv", "errors", "ratios"}
    for key in ("errors", "ratios"):
        root = ET.parse(paths[key]).getroot()
        assert root.tag.endswith("svg")
        assert any(el.tag.endswith("polyline") for el in root.iter())


def test_loglog_svg_is_valid_xml():
    svg = loglog_svg({"a": ([1, 10, 100], [1e-1, 1e-3, 1e-5]), "b & c": ([1, 2], [0, 1])}, "t<1>", "x", "y")
    root = ET.fromstring(svg)
    assert root.tag.endswith("svg")


def test_failed_run_report():
    rep = run(ExperimentConfig(domain="blob"))
    assert rep.status == "failed" and rep.exit_code == 1
    assert rep.data["errors"][0]["type"] == "InvalidArgument"
    json.loads(rep.to_json())


def test_theorem3_disk_residuals():
    rep = run(ExperimentConfig(theorem="3", degrees=(8,), eps=0.25, nodes="equispaced:8",
                               function="branch:0.5,1", compacts=()))
    assert rep.status == "ok"
    assert max(max(v) for v in rep.data["runs"][0]["node_residuals"]) <= 1e-9
    assert rep.exit_code == 0


def test_cli_exit_codes(tmp_path, capsys):
    ok = cli.main(["approx", "--theorem", "3", "--n", "8", "--eps", "0.25", "--nodes", "equispaced:8",
                   "--compacts", "", "--output", str(tmp_path / "ok"), "--quiet"])
    assert ok == 0
    # an analytic f decays geometrically, so the ratio to omega(rho) drifts past 3x
    drift = cli.main(["sweep", "--function", "pole:2", "--degrees", "8,16", "--nodes", "equispaced:3",
                      "--output", str(tmp_path / "drift"), "--quiet"])
    assert drift == 2
    bad = cli.main(["approx", "--domain", "blob", "--n", "8", "--output", str(tmp_path / "bad"), "--quiet"])
    assert bad == 1
    assert json.loads((tmp_path / "bad" / "report.json").read_text())["status"] == "failed"


def test_cli_map_and_fekete(tmp_path, capsys):
    csv_path = tmp_path / "lc.csv"
    assert cli.main(["map", "--domain", "segment", "--terms", "3", "--delta", "0.1", "0.2",
                     "--points", "64", "--csv", str(csv_path)]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["capacity"] == pytest.approx(0.5)
    rows = list(csv.reader(csv_path.open()))
    assert rows[0] == ["delta", "theta", "re", "im"] and len(rows) == 129
    out = tmp_path / "f.json"
    assert cli.main(["fekete", "--domain", "disk", "--N", "6", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert len(data["points"]) == 6 and data["ks_statistic"] <= 1 / 6 + 1e-9


def test_cli_report_regenerates(small_report, tmp_path):
    small_report.write(tmp_path / "a")
    code = cli.main(["report", str(tmp_path / "a" / "report.json"), "--output", str(tmp_path / "b")])
    assert code == small_report.exit_code
    assert (tmp_path / "b" / "ratios.csv").read_text() == (tmp_path / "a" / "ratios.csv").read_text()


def test_cli_verify_csvs(tmp_path, capsys):
    kcsv, ecsv = tmp_path / "k.csv", tmp_path / "e.csv"
    code = cli.main(["verify", "--criteria", "3", "--kernel-csv", str(kcsv),
                     "--extension-csv", str(ecsv), "--extension-depth", "3"])
    assert code in (0, 2)
    krows = list(csv.reader(kcsv.open()))
    assert krows[0] == ["dist", "error", "bound"] and len(krows) > 100
    erows = list(csv.reader(ecsv.open()))
    assert erows[0] == ["re", "im", "d", "dbar", "bound", "ratio"]
