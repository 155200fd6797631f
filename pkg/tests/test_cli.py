import numpy as np
import pytest

from bftex.cli import main
from bftex.image import load_csv_matrix, load_image, save_pgm
from bftex.synthetic import generate_suite


def run_cli(args):
    with pytest.raises(SystemExit) as excinfo:
        main(args)
    return excinfo.value.code


@pytest.fixture
def sample_image(tmp_path, rng):
    path = tmp_path / "in.pgm"
    save_pgm(rng.random((32, 32)), path)
    return path


class TestFilterCommand:
    def test_writes_maps_and_csv(self, tmp_path, sample_image):
        plus, minus = tmp_path / "p.pgm", tmp_path / "m.pgm"
        code = run_cli(["filter", "--input", str(sample_image),
                        "--output-plus", str(plus),
                        "--output-minus", str(minus)])
        assert code == 0
        assert plus.exists() and minus.exists()
        pm = load_csv_matrix(tmp_path / "p.csv")
        mm = load_csv_matrix(tmp_path / "m.csv")
        assert np.all(pm * mm == 0)

    def test_sigma_order_is_usage_error(self, tmp_path, sample_image):
        code = run_cli(["filter", "--input", str(sample_image),
                        "--output-plus", str(tmp_path / "p.pgm"),
                        "--output-minus", str(tmp_path / "m.pgm"),
                        "--sigma1", "4", "--sigma2", "2"])
        assert code == 2

    def test_epsilon_zero_is_valid(self, tmp_path, sample_image):
        code = run_cli(["filter", "--input", str(sample_image),
                        "--output-plus", str(tmp_path / "p.pgm"),
                        "--output-minus", str(tmp_path / "m.pgm"),
                        "--epsilon", "0"])
        assert code == 0


class TestExtractClassify:
    def test_round_trip(self, tmp_path, rng):
        imgs = []
        for i in range(4):
            p = tmp_path / f"i{i}.pgm"
            save_pgm(rng.random((24, 24)), p)
            imgs.append(str(p))
        feats = tmp_path / "f.csv"
        code = run_cli(["extract", "--input", *imgs, "--label", "1",
                        "--family", "lbp", "--out", str(feats)])
        assert code == 0
        lines = feats.read_text().strip().splitlines()
        assert len(lines) == 4
        assert all(line.split(",")[1] == "1" for line in lines)
        # self-classification must be perfect
        code = run_cli(["classify", "--refs", str(feats),
                        "--queries", str(feats)])
        assert code == 0


class TestExperimentCommand:
    def test_end_to_end_and_determinism(self, tmp_path, capsys):
        manifest = generate_suite(tmp_path / "suite", n_classes=4,
                                  per_class=6, size=48, seed=2)
        cfg = tmp_path / "exp.cfg"
        cfg.write_text(f"manifest = {manifest}\n"
                       "preprocessor = bf,none\n"
                       "family = lbp\np = 8\nr = 1\n"
                       "n_train = 3\nrepeats = 2\nseed = 5\n")
        out1, out2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
        assert run_cli(["experiment", "--config", str(cfg),
                        "--out", str(out1)]) == 0
        assert run_cli(["experiment", "--config", str(cfg),
                        "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()
        assert "bf" in capsys.readouterr().out

    def test_missing_config_key(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("preprocessor = bf\n")
        assert run_cli(["experiment", "--config", str(cfg)]) == 2

    def test_missing_manifest_file(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("manifest = nowhere.txt\n")
        assert run_cli(["experiment", "--config", str(cfg)]) == 2


class TestSweepCommand:
    def test_small_grid(self, tmp_path):
        manifest = generate_suite(tmp_path / "suite", n_classes=4,
                                  per_class=4, size=48, seed=3)
        cfg = tmp_path / "exp.cfg"
        cfg.write_text(f"manifest = {manifest}\n"
                       "family = lbp\nn_train = 2\nrepeats = 1\nseed = 5\n")
        grid = tmp_path / "grid.cfg"
        grid.write_text("sigma1 = 1.0\nsigma2 = 3.0,4.0\nepsilon = 0.1\n")
        out = tmp_path / "sweep.csv"
        assert run_cli(["sweep", "--config", str(cfg), "--grid", str(grid),
                        "--out", str(out)]) == 0
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 3  # header + 2 grid points


class TestGenSynthetic:
    def test_generates_manifest(self, tmp_path):
        out = tmp_path / "suite"
        assert run_cli(["gen-synthetic", "--out-dir", str(out),
                        "--classes", "3", "--per-class", "2",
                        "--size", "48"]) == 0
        manifest = out / "manifest.txt"
        assert manifest.exists()
        lines = [l for l in manifest.read_text().splitlines()
                 if l and not l.startswith("#")]
        assert len(lines) == 6
        name = lines[0].split()[0]
        img = load_image(out / name)
        assert img.shape == (48, 48)


class TestBenchCommand:
    def test_small_run(self, capsys):
        assert run_cli(["bench", "--size", "128", "--count", "3"]) == 0
        out = capsys.readouterr().out
        assert "BF preprocessing" in out
        assert "CLBP_S/M_P=24" in out


def test_help_lists_defaults(capsys):
    code = run_cli(["filter", "--help"])
    assert code == 0
    out = capsys.readouterr().out
    for flag, default in [("--sigma1", "1.0"), ("--sigma2", "4.0"),
                          ("--epsilon", "0.1")]:
        assert flag in out and default in out
