import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from solitonlab import catalog, cli, connections, etaconn, integrate, solitons, suites
from solitonlab.report import DISCREPANT, FAIL, PASS, SKIPPED

DATA = Path(__file__).parent / "data"
FIELDS = ["id", "anchor", "n_points", "max_residual", "verdict"]


def anchors():
    out = set(integrate.ANCHORS.values())
    for mod in (connections, etaconn, solitons, integrate, suites):
        out |= {v for k, v in vars(mod).items() if k.startswith("ANCHOR") and isinstance(v, str)}
    return out


@pytest.fixture
def runner():
    return CliRunner()


def run(runner, *args):
    return runner.invoke(cli.main, [str(a) for a in args])


def records(output):
    rows = [json.loads(line) for line in output.splitlines() if line.strip()]
    return rows[:-1], rows[-1]


def test_flat_torus_statistical_pass(runner):
    r = run(runner, "check", "--manifold", "builtin:flat-torus-2", "--suite", "statistical")
    assert r.exit_code == 0, r.output
    assert "FAIL" not in r.output.replace("FAIL=0", "")


def test_golden_structured(runner):
    r = run(runner, "check", "flat-torus-2", "--suite", "statistical", "--format", "structured")
    assert r.exit_code == 0
    assert r.output == (DATA / "flat-torus-2-statistical.jsonl").read_text()


def test_sphere_statistical_fails(runner):
    r = run(runner, "check", "round-sphere-2", "--suite", "statistical", "--format", "structured")
    assert r.exit_code == 1
    rows, summary = records(r.output)
    verdicts = {row["id"]: row["verdict"] for row in rows}
    assert verdicts["statistical-hess-g"] == FAIL
    assert verdicts["statistical-levi-civita"] == PASS
    assert summary["summary"][FAIL] >= 1


def test_structured_fields_and_anchors(runner):
    r = run(runner, "check", "kenmotsu-3", "--suite", "all", "--points", "8", "--format", "structured")
    rows, summary = records(r.output)
    known = anchors()
    for row in rows:
        assert list(row) == FIELDS
        assert row["anchor"] in known, row
        assert row["verdict"] in (PASS, FAIL, DISCREPANT, SKIPPED)
    assert sum(summary["summary"].values()) == len(rows)
    assert r.exit_code == (1 if summary["summary"][FAIL] else 0)


def test_determinism(runner):
    args = ("check", "builtin:hyperbolic-2", "--suite", "all", "--points", "12", "--seed", "7", "--format", "structured")
    a, b = run(runner, *args), run(runner, *args)
    assert a.output == b.output
    c = run(runner, *args[:-4], "--seed", "8", "--format", "structured")
    assert c.output != a.output


def test_all_builtins_tag_manifold(runner):
    r = run(runner, "check", "builtin:all", "--suite", "bounds", "--points", "5", "--format", "structured")
    rows, _ = records(r.output)
    assert {row["manifold"] for row in rows} == set(catalog.names())


def test_bad_inputs(runner, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"name": "x"}')
    r = run(runner, "check", "--manifold", bad)
    assert r.exit_code == 2 and "SpecParseError" in r.output
    assert run(runner, "check", "builtin:nowhere").exit_code == 2
    assert run(runner, "check", "flat-torus-2", "--points", "0").exit_code == 2
    assert run(runner, "check", "flat-torus-2", "--tol", "0").exit_code == 2
    assert run(runner, "check", "flat-torus-2", "--bogus").exit_code == 2
    assert run(runner, "check").exit_code == 2


def test_file_manifold(runner):
    # conjugate Ricci symmetry fails off flat parallel data; everything else holds
    r = run(runner, "check", "--manifold", DATA / "warped-torus-2.json", "--suite", "etaconn", "--points", "10", "--format", "structured")
    rows, _ = records(r.output)
    assert [row["id"] for row in rows if row["verdict"] == FAIL] == ["conjugate-ricci"]
    assert r.exit_code == 1


def test_volume_commands(runner):
    r = run(runner, "volume", "warped-torus-2", "--formula", "prop_p")
    assert r.exit_code == 0, r.output
    fields = dict(kv.split("=") for kv in r.output.split()[2:])
    assert float(fields["vol"]) == pytest.approx(78.95683520871486, rel=1e-12)
    assert float(fields["rhs"]) == pytest.approx(78.95683520871486, rel=1e-6)
    assert float(fields["residual"]) <= 1e-6
    r = run(runner, "volume", "--manifold", "builtin:minkowski-2")
    assert r.exit_code == 2 and "NonCompactManifold" in r.output


def test_volume_preconditions_skip(runner):
    r = run(runner, "volume", "flat-torus-2", "--grid", "16")
    assert r.exit_code == 0
    assert "remark_i" in r.output and "SKIPPED" in r.output


def test_catalog_commands(runner):
    r = run(runner, "catalog", "list")
    assert r.exit_code == 0
    assert set(catalog.names()) <= set(r.output.split())
    r = run(runner, "catalog", "show", "kenmotsu-3")
    assert catalog.loads(r.output) == catalog.builtin("kenmotsu-3")
    assert run(runner, "catalog", "show", "nope").exit_code == 2
