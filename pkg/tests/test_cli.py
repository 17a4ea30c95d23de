from pathlib import Path

import numpy as np
import pytest

from rtepinn.reference import Field
from scripts.main import build_parser, main

EXPERIMENT_DIR = Path(__file__).parent.parent / "config" / "experiments"


def test_parser_requires_a_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_train_options():
    args = build_parser().parse_args(["train", "a.toml", "b.toml", "--jobs", "2", "--eps",
                                      "0.01"])
    assert args.configs == ["a.toml", "b.toml"]
    assert args.jobs == 2 and args.eps == 0.01 and args.long is False


def test_hfun_writes_the_table(tmp_path, capsys):
    path = tmp_path / "h1.csv"
    assert main(["hfun", "--dim", "1", "--output", str(path)]) == 0
    assert path.exists()
    assert "3.18" in capsys.readouterr().out


def test_compare_prints_both_errors(tmp_path, capsys):
    x = np.linspace(0.0, 1.0, 101)
    ref = Field(1.0 - x, {"x": x}, name="rho").to_csv(tmp_path / "ref.csv")
    pred = Field(2.0 * (1.0 - x), {"x": x}, name="rho").to_npz(tmp_path / "pred.npz")
    assert main(["compare", str(pred), str(ref)]) == 0
    out = capsys.readouterr().out
    assert "rel_l2       1.000000e+00" in out


def test_compare_rejects_other_files(tmp_path):
    path = tmp_path / "field.txt"
    path.write_text("1 2 3")
    assert main(["compare", str(path), str(path)]) == 2


def test_long_experiment_needs_the_flag():
    assert main(["train", str(EXPERIMENT_DIR / "ex5.7.toml")]) == 2


def test_missing_config_is_a_config_error(tmp_path):
    assert main(["fdm", str(tmp_path / "nothing.toml")]) == 2


def test_fdm_writes_reference_files(tmp_path):
    config = tmp_path / "ex5.1.toml"
    config.write_text('schema_version = 1\n\n[experiment]\nid = "ex5.1"\n\n'
                      '[problem]\nepsilon = 0.5\n\n[fdm]\nn_x = 21\nn_v = 8\n')
    assert main(["fdm", str(config), "--seed", "4"]) == 0
    out = tmp_path / "results" / "ex5.1"
    assert (out / "ex5.1_seed4_reference_f.csv").exists()
    assert (out / "ex5.1_seed4_summary.json").exists()
