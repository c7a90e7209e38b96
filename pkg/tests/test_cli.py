import json
import os

from cmpartitions import cli


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestBasicCommands:
    def test_pn(self, capsys, tmp_path):
        code, out, _ = run_cli(capsys, "pn", "--n", "5",
                               "--cache-path", str(tmp_path / "c.json"))
        assert code == 0
        assert out.strip() == "7"

    def test_pn_rejects_zero(self, capsys):
        code, _, err = run_cli(capsys, "pn", "--n", "0", "--no-cache")
        assert code == 4
        assert "positive" in err

    def test_unknown_command(self, capsys):
        code, _, _ = run_cli(capsys, "frobnicate")
        assert code == 4

    def test_orbit(self, capsys):
        code, out, _ = run_cli(capsys, "orbit", "--n", "1", "--no-cache", "--json")
        assert code == 0
        doc = json.loads(out)
        assert doc["scaled_poly"] == ["1", "-529", "82616", "-5097973"]

    def test_forms_json(self, capsys):
        code, out, _ = run_cli(capsys, "forms", "--n", "1", "--no-cache")
        assert code == 0
        rows = json.loads(out)
        assert [r["a"] for r in rows] == [6, 12, 18]
        assert all(set(r) == {"a", "b", "c", "im_alpha"} for r in rows)

    def test_eval_j_at_i(self, capsys):
        code, out, _ = run_cli(capsys, "eval", "--what", "j", "--z", "0,1",
                               "--no-cache", "--json")
        assert code == 0
        doc = json.loads(out)
        assert doc["value"][0].startswith("1728.0")

    def test_eval_bad_point(self, capsys):
        code, _, _ = run_cli(capsys, "eval", "--what", "j", "--z", "nonsense",
                             "--no-cache")
        assert code == 4

    def test_hypothesis(self, capsys):
        code, out, _ = run_cli(capsys, "hypothesis", "--order", "60",
                               "--no-cache", "--json")
        assert code == 0
        doc = json.loads(out)
        assert doc["f_integral"] and doc["companion_integral"]

    def test_hypothesis_dump_series(self, capsys):
        code, out, _ = run_cli(capsys, "hypothesis", "--order", "10",
                               "--dump-series", "--no-cache", "--json")
        assert code == 0
        series = json.loads(out)["series"]
        assert series["start_exp"] == -1
        assert series["coeffs"][:3] == ["1", "-10", "-29"]

    def test_precision_exhausted_exit(self, capsys):
        code, _, err = run_cli(capsys, "eval", "--what", "j",
                               "--z", "0.21,1.3", "--tol", "0",
                               "--precision-bits", "256",
                               "--max-precision-bits", "512", "--no-cache")
        assert code == 3
        assert "precision exhausted" in err


class TestVerification:
    def test_verify_decomp_passes(self, capsys):
        code, out, _ = run_cli(capsys, "verify-decomp", "--trials", "3",
                               "--n-max", "1", "--seed", "7", "--no-cache")
        assert code == 0
        assert "PASS" in out

    def test_verify_decomp_deterministic(self, capsys):
        args = ("verify-decomp", "--trials", "4", "--n-max", "1",
                "--seed", "7", "--json", "--no-cache")
        code1, out1, _ = run_cli(capsys, *args)
        code2, out2, _ = run_cli(capsys, *args)
        assert code1 == code2 == 0
        assert out1 == out2

    def test_verify_decomp_fails_with_absurd_tol(self, capsys):
        code, out, _ = run_cli(capsys, "verify-decomp", "--trials", "2",
                               "--n-max", "1", "--tol", "1e-200", "--no-cache")
        assert code == 2
        assert "FAIL" in out

    def test_verify_appendix_single_point(self, capsys):
        code, out, _ = run_cli(capsys, "verify-appendix", "--z", "0.5,2",
                               "--precision-bits", "512", "--tol", "1e-30",
                               "--no-cache", "--json")
        assert code == 0
        doc = json.loads(out)
        assert doc["pass"] is True
        row = doc["per_polynomial"]["b"][0]
        assert len(row["per_coefficient"]) == 13

    def test_masser_n1(self, capsys):
        code, out, _ = run_cli(capsys, "masser", "--n", "1",
                               "--precision-bits", "512", "--tol", "1e-15",
                               "--no-cache", "--json")
        assert code == 0
        doc = json.loads(out)
        assert doc["pass"] is True
        assert len(doc["rows"]) == 3

    def test_norms_skip_beta(self, capsys):
        code, out, _ = run_cli(capsys, "norms", "--n", "1", "--skip-beta",
                               "--no-cache", "--json")
        assert code == 0
        doc = json.loads(out)
        assert doc["j_norm"]["value"] == "-12771880859375"
        assert doc["j_norm"]["coprime_to_6"] is True


class TestCache:
    def test_roundtrip_byte_identical(self, capsys, tmp_path):
        path = str(tmp_path / "cache.json")
        args = ("pn", "--n", "2", "--cache-path", path, "--json")
        _, out1, _ = run_cli(capsys, *args)
        first_bytes = open(path, "rb").read()
        _, out2, _ = run_cli(capsys, *args)
        assert out1 == out2
        assert open(path, "rb").read() == first_bytes

    def test_version_mismatch_ignored(self, capsys, tmp_path):
        path = tmp_path / "cache.json"
        path.write_text(json.dumps({"version": 99, "entries": [
            {"n": 1, "working_bits": 256, "pn": "999"}]}))
        code, out, err = run_cli(capsys, "pn", "--n", "1",
                                 "--cache-path", str(path))
        assert code == 0
        assert out.strip() == "1"  # not the poisoned value
        assert "version mismatch" in err

    def test_malformed_bypassed(self, capsys, tmp_path):
        path = tmp_path / "cache.json"
        path.write_text("{ not json")
        code, out, err = run_cli(capsys, "pn", "--n", "1",
                                 "--cache-path", str(path))
        assert code == 0
        assert out.strip() == "1"
        assert "unreadable" in err

    def test_higher_precision_shadows(self, capsys, tmp_path):
        path = str(tmp_path / "cache.json")
        run_cli(capsys, "pn", "--n", "1", "--cache-path", path,
                "--precision-bits", "320")
        cache = json.loads(open(path).read())
        assert cache["entries"][0]["working_bits"] == 320
        # a lower-precision request reuses the stored entry (no new write)
        before = open(path, "rb").read()
        code, out, _ = run_cli(capsys, "pn", "--n", "1", "--cache-path", path,
                               "--precision-bits", "256")
        assert code == 0 and out.strip() == "1"
        assert open(path, "rb").read() == before

    def test_show_and_clear(self, capsys, tmp_path):
        path = str(tmp_path / "cache.json")
        run_cli(capsys, "pn", "--n", "1", "--cache-path", path)
        code, out, _ = run_cli(capsys, "cache", "show", "--cache-path", path)
        assert code == 0 and "n=1" in out
        code, _, _ = run_cli(capsys, "cache", "clear", "--cache-path", path)
        assert code == 0
        assert not os.path.exists(path)

    def test_env_var_default(self, capsys, tmp_path, monkeypatch):
        path = str(tmp_path / "env-cache.json")
        monkeypatch.setenv(cli.CACHE_ENV_VAR, path)
        code, _, _ = run_cli(capsys, "pn", "--n", "1")
        assert code == 0
        assert os.path.exists(path)


class TestReport:
    def test_n1_document(self, capsys, tmp_path):
        code, out, _ = run_cli(capsys, "report", "--n-max", "1",
                               "--hypothesis-order", "60", "--json",
                               "--cache-path", str(tmp_path / "c.json"))
        assert code == 0
        doc = json.loads(out)
        block = doc["per_n"][0]
        assert block["scaled_poly"] == ["1", "-529", "82616", "-5097973"]
        assert block["pn"] == block["pn_oracle"] == "1"
        assert block["j_norm"]["coprime_to_6"] is True
        assert block["beta_norm"]["coprime_to_6"] is True
        assert doc["hypothesis"]["f_integral"] is True
        assert len(block["resolvent_roots"]) == 3

    def test_threads_deterministic(self, capsys, tmp_path):
        base = ("report", "--n-max", "2", "--hypothesis-order", "40",
                "--json", "--no-cache")
        _, out1, _ = run_cli(capsys, *base, "--threads", "1")
        _, out2, _ = run_cli(capsys, *base, "--threads", "2")
        assert out1 == out2

    def test_cache_reuse_identical_output(self, capsys, tmp_path):
        path = str(tmp_path / "cache.json")
        args = ("report", "--n-max", "1", "--hypothesis-order", "40",
                "--json", "--cache-path", path)
        _, out1, _ = run_cli(capsys, *args)
        _, out2, _ = run_cli(capsys, *args)
        assert out1 == out2
