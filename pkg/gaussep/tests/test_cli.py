import io
import json

import numpy as np
import pytest

from gaussep.cli import EXIT_INCONCLUSIVE, EXIT_MISSING_FILE, EXIT_NEGATIVE, EXIT_OK, cli_dispatch
from gaussep.io import save_qcm
from gaussep.settings import Tolerances, settings
from gaussep.symplectic import ModeLayout, QCM


def run(*argv, stdin=""):
    stdout = io.StringIO()
    code = cli_dispatch(list(argv), stdin=io.StringIO(stdin), stdout=stdout)
    return code, stdout.getvalue()


def generate(*argv):
    code, document = run("gen", *argv)
    assert code == EXIT_OK
    return document


@pytest.fixture
def state_file(tmp_path):
    def write(*argv):
        path = tmp_path / f"{'_'.join(argv)}.json"
        path.write_text(generate(*argv))
        return str(path)
    return write


class TestCommands:
    def test_tmsv_is_not_ppt(self):
        code, output = run("ppt", stdin=generate("tmsv", "1.0"))
        assert code == EXIT_NEGATIVE
        assert "0.135335" in output

    def test_check(self):
        assert run("check", stdin=generate("vacuum", "1", "1"))[0] == EXIT_OK

    def test_check_invalid_matrix(self):
        buffer = io.StringIO()
        save_qcm(QCM(0.5 * np.eye(2), ModeLayout(1)), buffer)
        code, output = run("check", "--json", stdin=buffer.getvalue())
        assert code == EXIT_NEGATIVE
        assert json.loads(output)['min_eigenvalue'] == pytest.approx(-0.5)

    def test_thermal_is_separable(self):
        assert run("sep", stdin=generate("thermal", "2", "1", "1"))[0] == EXIT_OK

    def test_single_party(self):
        code, output = run("sep", "--json", stdin=generate("thermal", "2", "1"))
        assert code == EXIT_OK
        assert json.loads(output)['method'] == "single_party"

    @pytest.mark.parametrize("engine", ["auto", "general"])
    def test_engines_agree_on_noisy_tmsv(self, engine):
        document = generate("tmsv", "0.25", "--nu", "3")
        code, output = run("sep", "--json", "--engine", engine, stdin=document)
        assert code == EXIT_OK
        assert json.loads(output)['verdict'] == "separable"

    def test_entangled_exit_code(self):
        code, output = run("sep", "--json", stdin=generate("tmsv", "0.5"))
        assert code == EXIT_NEGATIVE
        assert json.loads(output)['witness'] == "ppt_violation"

    def test_certificate_round_trip(self, state_file, tmp_path):
        cert = str(tmp_path / "cert.json")
        assert run("sep", state_file("random", "1", "2", "--seed", "5"), "--cert", cert)[0] in (
            EXIT_OK, EXIT_NEGATIVE
        )
        code, output = run("revalidate", cert)
        assert code == EXIT_OK
        assert "certificate valid: yes" in output

    def test_fullsep(self, state_file):
        code, output = run("fullsep", state_file("thermal", "1.5", "3"), "--groups", "1,1,1",
                           "--json")
        assert code == EXIT_OK
        assert json.loads(output)['group_sizes'] == [1, 1, 1]

    def test_abs_sep(self, state_file, tmp_path):
        cert = str(tmp_path / "abs.json")
        assert run("abs-sep", state_file("thermal", "1.5", "1", "1"), "--cert", cert)[0] == EXIT_OK
        assert run("revalidate", cert)[0] == EXIT_OK
        assert run("abs-sep", state_file("tmsv", "0.5"))[0] == EXIT_NEGATIVE

    def test_orbit(self, state_file):
        code, output = run("orbit", state_file("thermal", "2", "1", "1"), "--trials", "5",
                           "--json")
        assert code == EXIT_OK
        assert json.loads(output)['trials'] == 5

    def test_localize(self, state_file, tmp_path):
        reduced = tmp_path / "reduced.json"
        code, output = run("localize", state_file("thermal", "1.5", "2", "1"),
                           "--output", str(reduced))
        assert code == EXIT_OK
        assert "spectators: 1" in output
        assert run("check", str(reduced))[0] == EXIT_OK

    def test_localize_needs_symmetry(self, state_file):
        assert run("localize", state_file("random", "2", "1", "--seed", "1"))[0] == 65

    def test_means(self, state_file):
        first = state_file("thermal", "2", "1")
        second = state_file("thermal", "8", "1")
        code, output = run("means", first, second, "--json")
        assert code == EXIT_OK
        assert np.allclose(json.loads(output)['geometric'], 4 * np.eye(2))

    def test_schur(self, state_file):
        code, output = run("means", state_file("thermal", "2", "1", "1"), "--schur", "2", "--json")
        assert code == EXIT_OK
        assert json.loads(output)['positivity'] == "pos_def"

    def test_suite(self):
        code, output = run("suite", "--case", "mean_identity", "--scale", "0.005", "--json")
        assert code == EXIT_OK
        assert json.loads(output)['cases'][0]['samples'] == 5


class TestErrors:
    def test_unknown_flag(self):
        assert run("sep", "--frobnicate")[0] == 64

    def test_unknown_suite_case(self):
        assert run("suite", "--case", "everything")[0] == 64

    def test_missing_file(self, tmp_path):
        assert run("sep", str(tmp_path / "nowhere.json"))[0] == EXIT_MISSING_FILE

    def test_malformed_input(self):
        assert run("ppt", stdin='{"kind": "qcm", "schema_')[0] == 65

    def test_gen_parameters(self):
        assert run("gen", "tmsv")[0] == 64
        assert run("gen", "thermal", "2", "1.5")[0] == 64

    def test_bad_groups(self, state_file):
        assert run("fullsep", state_file("thermal", "1.5", "3"), "--groups", "3")[0] == 64

    def test_settings_are_restored(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({'solver': {'max_iterations': 10}}))
        run("ppt", "--config", str(config), "--tol-verdict", "1e-3", stdin=generate("tmsv", "1"))
        assert settings.tolerances == Tolerances()
        assert settings.file is None

    def test_bad_config(self, tmp_path):
        config = tmp_path / "config.txt"
        config.write_text("{}")
        assert run("ppt", "--config", str(config), stdin=generate("tmsv", "1"))[0] == 78

    def test_help(self):
        assert run("--help")[0] == EXIT_OK

    def test_inconclusive_code(self):
        assert EXIT_INCONCLUSIVE == 2
