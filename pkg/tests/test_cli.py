"""End-to-end tests of the command-line interface via main(argv)."""

import json

import pytest

from hydramaps import MapSpecError, cli
from hydramaps.cli import format_report, main, parse_map_spec


def run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, argv):
    code, out, err = run(capsys, argv)
    assert code == 0, f"exit {code}, stderr: {err}"
    return json.loads(out)


# ---------------------------------------------------------------------------
# map-spec parsing

class TestParseMapSpec:
    def test_valid(self):
        H = parse_map_spec(
            '{"p": 2, "branches": [{"r": "1/2", "c": "0"},'
            ' {"r": "3/2", "c": "1/2"}]}')
        assert H.modulus == 2

    def test_initial_condition(self):
        H = parse_map_spec(
            '{"p": 2, "branches": [{"r": "1", "c": "0"},'
            ' {"r": "3/2", "c": "1/2"}], "initial_condition": "7"}')
        assert H.initial_value == 7

    @pytest.mark.parametrize("text,fragment", [
        ("not json", "not valid JSON"),
        ("[1, 2]", "JSON object"),
        ('{"branches": []}', 'keys "p" and "branches"'),
        ('{"p": true, "branches": []}', '"p" must be an integer'),
        ('{"p": 1, "branches": []}', '"p" must be an integer >= 2'),
        ('{"p": 2, "branches": 3}', 'must be a list'),
        ('{"p": 2, "branches": [{"r": "1/2"}]}',
         'exactly the fields "r" and "c"'),
        ('{"p": 2, "branches": [{"r": "1/2", "c": "0", "x": 1}]}',
         'exactly the fields'),
        ('{"p": 2, "branches": [{"r": 0.5, "c": "0"}]}',
         'must be a rational string'),
        ('{"p": 2, "branches": [{"r": "1/x", "c": "0"}]}', 'field "r"'),
        ('{"p": 2, "branches": [{"r": "1/2", "c": "0"}]}', 'expected 2'),
        ('{"p": 2, "branches": [{"r": "0", "c": "0"},'
         ' {"r": "3/2", "c": "1/2"}]}', 'nonzero'),
        ('{"p": 2, "branches": [{"r": "1/2", "c": "0"},'
         ' {"r": "3/2", "c": "1/2"}], "initial_condition": 5}',
         '"initial_condition"'),
    ])
    def test_rejects(self, text, fragment):
        with pytest.raises(MapSpecError, match=fragment.replace("[", r"\[")):
            parse_map_spec(text)


# ---------------------------------------------------------------------------
# report formatting

class TestFormatReport:
    def test_json_is_sorted_and_indented(self):
        report = {"schema_version": "1", "command": "x",
                  "inputs": {}, "results": {"b": "2", "a": "1"}}
        text = format_report(report, "json")
        assert text == json.dumps(report, sort_keys=True, indent=2)
        assert json.loads(text) == report

    def test_csv_needs_tabular_results(self):
        report = {"command": "analyze", "results": {"modulus": "2"}}
        with pytest.raises(MapSpecError):
            format_report(report, "csv")
        with pytest.raises(MapSpecError):
            format_report(report, "yaml")


# ---------------------------------------------------------------------------
# analyze

class TestAnalyze:
    def test_golden_collatz(self, capsys, t3_path):
        code, out, err = run(capsys, ["analyze", "--map", t3_path])
        assert code == 0
        report = json.loads(out)
        assert report["schema_version"] == "1"
        assert report["command"] == "analyze"
        results = report["results"]
        assert results["modulus"] == "2"
        assert results["branches"] == [{"r": "1/2", "c": "0"},
                                       {"r": "3/2", "c": "1/2"}]
        assert results["classification"] == {
            "integral": True, "proper": True, "centered": True}
        places = results["places"]
        assert set(places) == {"2", "3", "inf"}
        assert places["2"]["rho"] == "4"
        assert places["2"]["guarantee"] == "none"
        assert places["2"]["ell_bound"] == "2"
        assert places["3"]["rho"] == "1/3"
        assert places["3"]["guarantee"] == "almost-everywhere"
        assert places["inf"]["rho"] == "3/4"
        assert places["inf"]["max_branch_norm"] == "3/2"
        assert places["inf"]["ell_bound"] is None
        # output is canonical sorted-key JSON
        assert out.strip() == json.dumps(report, sort_keys=True, indent=2)

    def test_explicit_places(self, capsys, t3_path):
        report = run_json(capsys, ["analyze", "--map", t3_path,
                                   "--places", "7,inf"])
        places = report["results"]["places"]
        assert set(places) == {"7", "inf"}
        assert places["7"]["rho"] == "1"
        assert places["7"]["guarantee"] == "none"

    def test_bad_place(self, capsys, t3_path):
        code, _, err = run(capsys, ["analyze", "--map", t3_path,
                                    "--places", "4"])
        assert code == 2
        assert "error" in err

    def test_missing_map_file(self, capsys):
        code, _, err = run(capsys, ["analyze", "--map", "/no/such/file"])
        assert code == 2
        assert "cannot read map spec" in err


# ---------------------------------------------------------------------------
# orbit and cycles

class TestOrbit:
    def test_preperiodic(self, capsys, t3_path):
        report = run_json(capsys, ["orbit", "--map", t3_path,
                                   "--start", "7"])
        results = report["results"]
        assert results["status"] == "preperiodic"
        assert results["tail"] == ["7", "11", "17", "26", "13",
                                   "20", "10", "5", "8", "4"]
        assert results["cycle"] == ["1", "2"]
        assert results["steps"] == "12"

    def test_escape_with_budget(self, capsys, t3_path):
        report = run_json(capsys, ["orbit", "--map", t3_path,
                                   "--start", "27", "--max-steps", "5"])
        results = report["results"]
        assert results["status"] == "escaped"
        assert results["cycle"] == []
        assert results["steps"] == "5"
        assert report["inputs"]["max_steps"] == "5"


class TestCycles:
    def test_full_census(self, capsys, t3_path):
        report = run_json(capsys, ["cycles", "--map", t3_path,
                                   "--range=-1000:1000"])
        results = report["results"]
        assert results["count"] == "5"
        members = [tuple(int(z) for z in c["members"])
                   for c in results["cycles"]]
        assert (1, 2) in members
        assert (0,) in members
        assert (-1,) in members
        assert (-10, -5, -7) in members
        lengths = sorted(int(c["length"]) for c in results["cycles"])
        assert lengths == [1, 1, 2, 3, 11]

    def test_bad_range(self, capsys, t3_path):
        code, _, err = run(capsys, ["cycles", "--map", t3_path,
                                    "--range", "10:1"])
        assert code == 2
        code, _, err = run(capsys, ["cycles", "--map", t3_path,
                                    "--range", "nope"])
        assert code == 2


# ---------------------------------------------------------------------------
# numen

class TestNumen:
    def test_at_nat(self, capsys, t3_path):
        report = run_json(capsys, ["numen", "--map", t3_path, "--at", "27"])
        assert report["results"] == {"kind": "nat", "n": "27",
                                     "value": "85/32"}

    def test_at_truncation(self, capsys, t3_path):
        report = run_json(capsys, ["numen", "--map", t3_path,
                                   "--at", "7", "--depth", "3"])
        assert report["results"]["kind"] == "truncation"
        assert report["results"]["value"] == "19/8"

    def test_at_rational(self, capsys, t3_path):
        report = run_json(capsys, ["numen", "--map", t3_path,
                                   "--at-rational=-3/7"])
        assert report["results"]["kind"] == "rational"
        assert report["results"]["z"] == "-3/7"
        assert report["results"]["value"] == "-10"

    def test_requires_exactly_one_target(self, capsys, t3_path):
        code, _, _ = run(capsys, ["numen", "--map", t3_path])
        assert code == 2
        code, _, _ = run(capsys, ["numen", "--map", t3_path,
                                  "--at", "3", "--at-rational", "5"])
        assert code == 2

    def test_negative_at(self, capsys, t3_path):
        code, _, _ = run(capsys, ["numen", "--map", t3_path, "--at=-3"])
        assert code == 2

    def test_non_contracting_place(self, capsys, t3_path):
        code, _, err = run(capsys, ["numen", "--map", t3_path,
                                    "--at-rational=-1/3", "--place", "2"])
        assert code == 3
        assert "error" in err

    def test_non_integral_rational(self, capsys, t3_path):
        code, _, _ = run(capsys, ["numen", "--map", t3_path,
                                  "--at-rational", "1/2"])
        assert code == 3


# ---------------------------------------------------------------------------
# charfn

class TestCharFn:
    def test_solve_table(self, capsys, t3_path):
        report = run_json(capsys, ["charfn", "--map", t3_path,
                                   "--place", "3", "--level", "1"])
        results = report["results"]
        assert results["method"] == "solve"
        assert float(results["residual"]) < 1e-12
        rows = results["table"]
        assert [row["t"] for row in rows] == ["0", "1/3", "2/3"]
        assert float(rows[0]["re"]) == pytest.approx(1)
        assert float(rows[1]["re"]) == pytest.approx(-0.5, abs=1e-12)
        assert float(rows[1]["im"]) == pytest.approx(3 ** 0.5 / 6, abs=1e-12)
        assert float(rows[2]["im"]) == pytest.approx(-(3 ** 0.5) / 6,
                                                     abs=1e-12)

    def test_csv_table(self, capsys, t3_path):
        code, out, _ = run(capsys, ["charfn", "--map", t3_path,
                                    "--place", "3", "--level", "1",
                                    "--format", "csv"])
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "t,re,im"
        assert len(lines) == 4
        assert lines[1].startswith("0,")

    def test_estimate_method(self, capsys, t3_path):
        report = run_json(capsys, ["charfn", "--map", t3_path,
                                   "--place", "3", "--level", "1",
                                   "--method", "estimate", "--depth", "12"])
        assert report["results"]["method"] == "estimate"

    def test_archimedean_rejected(self, capsys, t3_path):
        code, _, _ = run(capsys, ["charfn", "--map", t3_path,
                                  "--place", "inf", "--level", "1"])
        assert code == 2

    def test_violated_precondition(self, capsys, t3_path):
        code, _, _ = run(capsys, ["charfn", "--map", t3_path,
                                  "--place", "2", "--level", "1"])
        assert code == 3

    def test_composite_place(self, capsys, t3_path):
        code, _, _ = run(capsys, ["charfn", "--map", t3_path,
                                  "--place", "4", "--level", "1"])
        assert code == 2


# ---------------------------------------------------------------------------
# dist

class TestDist:
    def test_inversion_golden(self, capsys, t3_path):
        report = run_json(capsys, ["dist", "--map", t3_path,
                                   "--place", "3", "--exponent", "1"])
        results = report["results"]
        assert results["method"] == "inversion"
        assert results["base"] == "3"
        assert results["b"] == "0"
        rows = {row["w"]: float(row["p"]) for row in results["probabilities"]}
        assert rows["0"] == pytest.approx(0, abs=1e-12)
        assert rows["1"] == pytest.approx(1 / 3, abs=1e-12)
        assert rows["2"] == pytest.approx(2 / 3, abs=1e-12)

    def test_compare_empirical(self, capsys, t3_path):
        report = run_json(capsys, ["dist", "--map", t3_path,
                                   "--place", "3", "--exponent", "1",
                                   "--compare-empirical", "--depth", "20"])
        results = report["results"]
        assert results["comparison"]["method"] == "empirical"
        assert float(results["total_variation"]) < 1e-2

    def test_csv(self, capsys, t3_path):
        code, out, _ = run(capsys, ["dist", "--map", t3_path,
                                    "--place", "3", "--exponent", "1",
                                    "--format", "csv"])
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "w,probability"
        assert len(lines) == 4

    def test_archimedean_rejected(self, capsys, t3_path):
        code, _, _ = run(capsys, ["dist", "--map", t3_path,
                                  "--place", "inf", "--exponent", "1"])
        assert code == 2

    def test_precondition_exit(self, capsys, t3_path):
        code, _, _ = run(capsys, ["dist", "--map", t3_path,
                                  "--place", "2", "--exponent", "1"])
        assert code == 3

    def test_resource_exit(self, capsys, t3_path):
        code, _, _ = run(capsys, ["dist", "--map", t3_path,
                                  "--place", "3", "--exponent", "1",
                                  "--method", "empirical",
                                  "--depth", "30"])
        assert code == 4


# ---------------------------------------------------------------------------
# correspond

class TestCorrespond:
    def test_full_roundtrip(self, capsys, t3_path):
        report = run_json(capsys, ["correspond", "--map", t3_path,
                                   "--range=-1000:1000",
                                   "--scan-length", "10"])
        results = report["results"]
        certs = results["certificates"]
        assert len(certs) == 5
        assert all(cert["verified"] for cert in certs)
        by_cycle = {tuple(cert["cycle"]): cert for cert in certs}
        assert by_cycle[("0",)]["note"]
        neg = by_cycle[("-10", "-5", "-7")]
        assert neg["n"] == "3"
        assert neg["z"] == "-3/7"
        assert neg["x_value"] == "-10"
        assert neg["string"]["entries"] == ["1", "1", "0"]
        assert results["scan"]["words_scanned"] == "2046"
        assert results["scan"]["skipped"] == "0"
        assert results["scan"]["integer_values"] == [
            "-10", "-7", "-5", "-1", "0", "1", "2"]
        assert results["scan_consistent"] is True
        assert results["stray_values"] == []

    def test_stray_values(self, capsys, t3_path):
        report = run_json(capsys, ["correspond", "--map", t3_path,
                                   "--range=-10:10", "--scan-length", "12"])
        results = report["results"]
        assert results["scan_consistent"] is False
        assert results["stray_values"] == [
            "-136", "-91", "-82", "-68", "-61", "-55",
            "-41", "-37", "-34", "-25", "-17"]

    def test_requires_normalized_map(self, capsys, tmp_path):
        path = tmp_path / "improper.json"
        path.write_text(json.dumps({
            "p": 2,
            "branches": [{"r": "1", "c": "0"}, {"r": "3/2", "c": "1/2"}],
        }))
        code, _, _ = run(capsys, ["correspond", "--map", str(path),
                                  "--range=-5:5"])
        assert code == 3


# ---------------------------------------------------------------------------
# argparse-level behavior

class TestArgparse:
    def test_unknown_command(self, capsys):
        assert main(["bogus"]) == 2
        capsys.readouterr()

    def test_missing_required_option(self, capsys):
        assert main(["orbit"]) == 2
        capsys.readouterr()

    def test_console_entry_exits(self, capsys, t3_path):
        with pytest.raises(SystemExit) as exc:
            cli.console_entry()
        assert exc.value.code == 2  # no argv: missing subcommand
        capsys.readouterr()
