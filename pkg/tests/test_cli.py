import json

import pytest

from bochnerlab import config
from bochnerlab.cli import main


def run(capsys, *argv):
    rc = main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


def test_pettis(capsys):
    rc, out, _ = run(capsys, "pettis", "ex53", "--k", "6")
    assert rc == 0 and json.loads(out)["value"] == 0.125


def test_bocce_full_set(capsys):
    rc, out, _ = run(capsys, "bocce", "ex52", "--k", "3", "--set", "full")
    assert rc == 0 and json.loads(out)["bocce"] == 1.0


def test_tight_not_found(capsys):
    rc, out, _ = run(capsys, "tight", "ex32", "--prefix", "6", "--eps", "0.5")
    assert rc == 0 and "NOT_FOUND" in out


def test_report_csv_and_out(capsys, tmp_path):
    target = tmp_path / "r.csv"
    rc, out, _ = run(capsys, "report", "spike", "--prefix", "6",
                     "--no-criteria", "--format", "csv", "--out", str(target))
    assert rc == 0 and out == ""
    lines = target.read_text().splitlines()
    assert lines[0] == "k,metric,value"
    assert any(",flag.in_measure," in line for line in lines)


def test_report_json_deterministic(capsys):
    args = ("report", "ex55", "--prefix", "5", "--no-criteria")
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    assert a == b and json.loads(a)["flags"]["pettis"] is True


def test_bite_and_moduli(capsys):
    rc, out, _ = run(capsys, "bite", "spike", "--prefix", "4")
    assert rc == 0 and json.loads(out)["biting"]["removed_measure"][0] == "1/2"
    rc, out, _ = run(capsys, "moduli", "ex34", "--prefix", "4")
    assert rc == 0 and "ui" in json.loads(out)["moduli"]


def test_functionals_option(capsys):
    rc, out, _ = run(capsys, "report", "ex52", "--prefix", "4",
                     "--no-criteria", "--functionals", "coords:1,2")
    assert rc == 0


def test_property_passes(capsys):
    rc, out, _ = run(capsys, "property", "--count", "3", "--seed", "1")
    assert rc == 0


def test_sequence_file_source(capsys, tmp_path):
    from bochnerlab import gallery
    from bochnerlab.serialize import dumps
    path = tmp_path / "seq.json"
    path.write_text(dumps(gallery.get("ex53", 3)))
    rc, out, _ = run(capsys, "pettis", str(path), "--k", "3")
    assert rc == 0 and json.loads(out)["value"] == pytest.approx(2 ** -1.5)


@pytest.mark.parametrize("argv", [
    ("pettis", "nope", "--k", "1"),
    ("bocce", "ex52", "--k", "2", "--set", "level:zz"),
    ("pettis", "ex55", "--k", "6", "--cap", "2"),
])
def test_input_errors_exit_2(capsys, argv):
    rc, out, err = run(capsys, *argv)
    assert rc == 2 and out == "" and err


def test_member_outside_file_prefix(capsys, tmp_path):
    from bochnerlab import gallery
    from bochnerlab.serialize import dumps
    path = tmp_path / "seq.json"
    path.write_text(dumps(gallery.get("ex32", 2)))
    rc, out, err = run(capsys, "pettis", str(path), "--k", "5")
    assert rc == 2 and out == "" and "--k 5" in err


def test_resolution_error_exit_3(capsys):
    before = config.get_config() if hasattr(config, "get_config") else None
    rc, _, err = run(capsys, "--max-level", "3", "pettis", "ex53", "--k", "5")
    assert rc == 3 and err
    if before is not None:
        assert config.get_config() == before
