import csv
import io
import json
import subprocess
import sys

import pytest

from primeprod.cli import UsageError, main, parse_q_range
from primeprod.groupcomb import abelian_group_shapes


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cover_all_covered(capsys):
    code, out, _ = run(["cover", "--k", "6", "--q", "101..199", "--alpha", "1", "--format", "csv"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 99 and all(r["covered"] == "true" for r in rows)


def test_cover_witness(capsys):
    code, out, _ = run(["cover", "--k", "2", "--q", "7..7", "--alpha", "1"], capsys)
    assert code == 1
    row = json.loads(out)["rows"][0]
    assert row["covered"] is False and row["uncovered"] == [5]
    code, _, _ = run(["cover", "--k", "2", "--q", "7", "--report-only"], capsys)
    assert code == 0


@pytest.mark.parametrize(
    "args",
    [
        ["cover", "--k", "2", "--q", "9..7"],
        ["cover", "--k", "2", "--q", "abc"],
        ["cover", "--k", "0", "--q", "7"],
        ["cover", "--k", "2", "--q", "7", "--alpha", "-1"],
        ["certificates", "--grid-step", "0.01", "--cosine"],
        ["kneser-suite", "--max-order", "8"],
        ["selberg", "--q", "101", "--D-exponent", "1.5"],
        ["density", "--q", "1", "--k", "1"],
    ],
)
def test_usage_errors(args, capsys):
    code, out, err = run(args, capsys)
    assert code == 2 and out == "" and "error" in err


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as e:
        main(["cover", "--q", "7"])  # --k missing
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(["nonsense"])
    assert e.value.code == 2


def test_resource_limit_exit_3(capsys):
    code, _, err = run(["cover", "--k", "2", "--q", "100000", "--alpha", "2"], capsys)
    assert code == 3 and "resource" in err


def test_certificates_cosine(capsys):
    code, out, _ = run(["certificates", "--cosine", "--grid-step", "1e-5"], capsys)
    assert code == 0
    row = json.loads(out)["rows"][0]
    assert abs(row["min_value"] - 0.014) < 1e-3 and row["positive"] is True
    assert row["interval"] == [round(10 / 29, 12), round(19 / 29, 12)]


def test_certificates_c8_reports_gap(capsys):
    code, out, _ = run(["certificates", "--thm2", "--grid", "200", "--tol", "0.05"], capsys)
    doc = json.loads(out)
    assert code == 1
    by_i = {r["i"]: r["contradiction"] for r in doc["rows"]}
    assert by_i[0] is True and by_i[2] is False
    code, _, _ = run(["certificates", "--thm2", "--grid", "200", "--tol", "0.04"], capsys)
    assert code == 0


def test_kneser_suite(capsys):
    code, out, _ = run(["kneser-suite", "--max-order", "16", "--exhaustive", "--format", "csv"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert all(r["inequality_holds"] == "true" for r in rows)
    expect = sum((1 << n) - 1 for n in range(1, 17) for _ in abelian_group_shapes(n))
    assert sum(int(r["subsets"]) for r in rows) == expect
    assert {r["shape"] for r in rows if r["order"] == "16"} == {"16", "8x2", "4x4", "4x2x2", "2x2x2x2"}


def test_support_pipeline_row(capsys):
    code, out, _ = run(["theorem1", "--q", "10007", "--epsilon", "0.05", "--format", "csv"], capsys)
    assert code == 0
    (row,) = csv.DictReader(io.StringIO(out))
    assert float(row["lower_bound_ratio"]) <= float(row["actual_ratio"])
    assert row["sound"] == "true"


def test_charsum_density_selberg(capsys):
    code, out, _ = run(["charsum", "--q", "3..60", "--format", "csv"], capsys)
    assert code == 0 and out.startswith("q,")
    code, out, _ = run(["density", "--q", "101", "--k", "1", "--alpha", "1.3"], capsys)
    assert code == 0 and json.loads(out)["rows"][0]["ratio"] == 0.67
    code, out, _ = run(["selberg", "--q", "1009..1013", "--primes-only", "--D-exponent", "0.7"], capsys)
    assert code == 0 and [r["q"] for r in json.loads(out)["rows"]] == [1009, 1013]


def test_output_file_and_numbers(tmp_path, capsys):
    target = tmp_path / "sub" / "theorem1.json"
    code, out, _ = run(["theorem1", "--q", "1009..1020", "--output", str(target)], capsys)
    assert code == 0 and out == ""
    assert [p.name for p in target.parent.iterdir()] == ["theorem1.json"]
    doc = json.loads(target.read_text())
    for row in doc["rows"]:
        for v in row.values():
            if isinstance(v, float):
                assert len(f"{v!r}".lstrip("-").replace(".", "").split("e")[0].lstrip("0")) <= 12
    code, out, _ = run(["theorem1", "--q", "1009", "--output", str(target), "--stdout"], capsys)
    assert json.loads(out) == json.loads(target.read_text())


def test_threads_do_not_change_output(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    base = ["kneser-suite", "--max-order", "40", "--random", "3000", "--seed", "5", "--format", "csv"]
    assert main(base + ["--output", str(a)]) == 0
    assert main(base + ["--output", str(b), "--threads", "3"]) == 0
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.csv"
    main(base[:-4] + ["--seed", "6", "--format", "csv", "--output", str(c)])
    assert c.read_bytes() != a.read_bytes()


def test_parse_q_range():
    assert parse_q_range("5..9") == (5, 9)
    assert parse_q_range("7") == (7, 7)
    with pytest.raises(UsageError):
        parse_q_range("9..5")


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "primeprod", "cover", "--k", "2", "--q", "7"], capture_output=True, text=True)
    assert r.returncode == 1 and json.loads(r.stdout)["summary"]["all_covered"] is False
