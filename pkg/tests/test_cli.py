import numpy as np
import pytest

from topsmear.cli import main
from topsmear.config import ConfigError, RunConfig
from topsmear.field import load_field


def test_gen_twice_identical(tmp_path):
    for name in ("a.csv", "b.csv"):
        assert main(["gen", "blobs", "--seed", "7", "--out", str(tmp_path / name)]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_gen_png(tmp_path):
    assert main(["gen", "wells", "--rows", "20", "--cols", "30", "--out", str(tmp_path / "w.png")]) == 0
    assert load_field(tmp_path / "w.png", "png8").shape == (20, 30)


def test_run_zero_steps_returns_input(tmp_path):
    main(["gen", "circle", "--rows", "24", "--cols", "24", "--seed", "1", "--out", str(tmp_path / "c.csv")])
    rc = main(["run", "--input", str(tmp_path / "c.csv"), "--preset", "circle", "--steps", "0",
               "--seed", "3", "--out", str(tmp_path / "out")])
    assert rc == 0
    np.testing.assert_array_equal(load_field(tmp_path / "out" / "final.csv"), load_field(tmp_path / "c.csv"))
    assert (tmp_path / "out" / "loss_log.csv").read_text().strip() == "step,wall_ms,topo_loss,data_loss,total_loss"
    assert (tmp_path / "out" / "diagram.csv").exists() and (tmp_path / "out" / "final.png").exists()


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("# blobs demo\npreset = blobs\nseed = 5\nsteps = 4\nrows = 20\ncols = 20\nk = 2\n")
    rc = main(["run", "--config", str(cfg), "--steps", "2", "--out", str(tmp_path / "o")])
    assert rc == 0
    assert len((tmp_path / "o" / "loss_log.csv").read_text().splitlines()) == 3


def test_config_with_section_header(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[run]\nseed = 2\neps = 10\nshift = yes\nregion = -inf, inf, 30, inf\n")
    rc = RunConfig.from_file(cfg)
    assert rc.seed == 2 and rc.eps == 10.0 and rc.shift is True
    assert rc.functional().region.life_min == 30.0


def test_preset_resolution():
    sc = RunConfig(preset="blobs", eps=7.0).smear_config()
    assert sc.superlevel and sc.eps == 7.0 and sc.spec.sign == "minimize"
    assert sc.downsample.k == 3
    assert RunConfig(preset="segmentation").smear_config().data_term == "bce"


@pytest.mark.parametrize("argv,needle", [
    (["run", "--preset", "blobs", "--out", "{d}/x"], "seed"),
    (["run", "--preset", "nope", "--seed", "1", "--out", "{d}/x"], "unknown preset"),
    (["run", "--input", "{d}/missing.csv", "--seed", "1", "--out", "{d}/x"], "not found"),
    (["run", "--config", "{d}/missing.ini", "--out", "{d}/x"], "not found"),
    (["run", "--preset", "blobs", "--seed", "x", "--out", "{d}/x"], "bad value"),
    (["run", "--preset", "blobs", "--seed", "1", "--sign", "up", "--out", "{d}/x"], "sign"),
    (["diagram", "{d}/missing.csv"], "not found"),
])
def test_errors_exit_nonzero_with_one_line(tmp_path, capsys, argv, needle):
    argv = [a.format(d=tmp_path) for a in argv]
    assert main(argv) != 0
    err = capsys.readouterr().err.strip()
    assert len(err.splitlines()) == 1 and needle in err


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("seed = 1\nlearning_rate = 3\n")
    with pytest.raises(ConfigError):
        RunConfig.from_file(cfg)


def test_diagram_stdout(tmp_path, capsys):
    (tmp_path / "f.csv").write_text("0,2,1\n")
    assert main(["diagram", str(tmp_path / "f.csv")]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out == ["dim,birth,death,birth_vertex,death_vertex", "0,0,inf,0,none", "0,1,2,2,1"]


def test_smearvis_and_bench_outputs(tmp_path):
    base = ["--preset", "circle_smear", "--rows", "24", "--cols", "24", "--seed", "0"]
    assert main(["smearvis", *base, "--n-samples", "5", "--out", str(tmp_path / "s")]) == 0
    for name in ("heat_birth.csv", "heat_death.csv", "heat.png"):
        assert (tmp_path / "s" / name).exists()
    assert main(["bench", *base, "--steps", "4", "--eval-every", "2", "--out", str(tmp_path / "b")]) == 0
    lines = (tmp_path / "b" / "bench.csv").read_text().splitlines()
    assert lines[0] == "arm,step,elapsed_s,loss,reduction_pct" and len(lines) == 7
