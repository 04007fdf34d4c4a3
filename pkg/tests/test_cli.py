"""In-process checks of the command line: exit codes, files, and layering."""

import hashlib
import json
import math
import os

import numpy as np
import pytest

from superchains.chain_store import SuperchainLayout, build_draws, save_binary, save_csv
from superchains.cli import main
from superchains.targets.base import BenchmarkMoments


def _converged_draws(seed=0):
    # iid standard normals: the superchain-mean spread sits far below the
    # alarm threshold once every chain keeps several draws.
    gen = np.random.default_rng(seed)
    layout = SuperchainLayout(4, 8, 8, 2, warmup=3, seed=17)
    return build_draws(layout, gen.standard_normal((4, 8, 8, 2)))


def _separated_draws():
    gen = np.random.default_rng(1)
    values = 0.1 * gen.standard_normal((4, 4, 2, 1))
    values += 3.0 * np.arange(4).reshape(4, 1, 1, 1)
    return build_draws(SuperchainLayout(4, 4, 2, 1, warmup=0, seed=5), values)


# ------------------------------------------------------------------- sample


def test_sample_writes_bundle(tmp_path, capsys):
    out = tmp_path / "run"
    code = main(
        [
            "sample", "--target", "gaussian", "--out", str(out),
            "--K", "2", "--M", "2", "--N", "3", "--warmup", "2", "--seed", "3",
        ]
    )
    assert code == 0
    stdout = capsys.readouterr().out
    assert "sampled gaussian" in stdout
    assert (out / "draws.csv").is_file()
    assert (out / "draws.bin").is_file()
    meta = json.loads((out / "metadata.json").read_text())
    cfg = meta["config"]
    assert cfg["target"] == "gaussian"
    assert (cfg["K"], cfg["M"], cfg["N"], cfg["warmup"], cfg["seed"]) == (2, 2, 3, 2, 3)
    assert meta["dim"] == 1
    assert meta["sampling_accept_rate"]["mean"] is not None
    assert "superchains" in meta["versions"]


def test_sample_same_seed_is_byte_identical(tmp_path):
    args = ["sample", "--target", "gaussian", "--K", "2", "--M", "2", "--N", "2",
            "--warmup", "1", "--seed", "9"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    for name in ("draws.csv", "draws.bin"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_sample_format_csv_only(tmp_path):
    out = tmp_path / "run"
    code = main(["sample", "--target", "gaussian", "--out", str(out), "--format", "csv",
                 "--K", "2", "--M", "2", "--N", "2", "--warmup", "0", "--seed", "1"])
    assert code == 0
    assert (out / "draws.csv").is_file()
    assert not (out / "draws.bin").exists()


def test_sample_config_file_layering(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "target = gaussian\nstep_size = 0.25\nK = 2\nM = 2\nN = 2\nwarmup = 1\nseed = 4\n"
    )
    out = tmp_path / "run"
    code = main(["sample", "--config", str(cfg), "--out", str(out), "--format", "csv",
                 "--step-size", "0.3"])
    assert code == 0
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["config"]["step_size"] == 0.3
    assert meta["config"]["K"] == 2


def test_sample_rejects_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("target = gaussian\nstepsize = 0.25\n")
    assert main(["sample", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "stepsize" in capsys.readouterr().err


def test_sample_requires_target(tmp_path, capsys):
    assert main(["sample", "--out", str(tmp_path / "o")]) == 2
    assert "no target" in capsys.readouterr().err


def test_unknown_target_lists_registry(tmp_path, capsys):
    assert main(["sample", "--target", "nope", "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "registered targets" in err and "gaussian" in err


# ----------------------------------------------------------------- diagnose


def test_diagnose_converged_csv(tmp_path, capsys):
    path = tmp_path / "draws.csv"
    save_csv(_converged_draws(), path)
    assert main(["diagnose", str(path)]) == 0
    stdout = capsys.readouterr().out
    assert "converged" in stdout and "not converged" not in stdout
    assert (tmp_path / "draws.report.json").is_file()


def test_diagnose_flags_separated_superchains(tmp_path, capsys):
    path = tmp_path / "draws.csv"
    save_csv(_separated_draws(), path)
    report = tmp_path / "custom_report.json"
    assert main(["diagnose", str(path), "--report", str(report)]) == 1
    assert "not converged" in capsys.readouterr().out
    assert report.is_file()
    assert not (tmp_path / "draws.report.json").exists()


def test_diagnose_binary_input(tmp_path, capsys):
    path = tmp_path / "draws.bin"
    save_binary(_converged_draws(), path)
    assert main(["diagnose", str(path)]) == 0
    assert "converged" in capsys.readouterr().out


def test_diagnose_tau_loosens_threshold(tmp_path):
    path = tmp_path / "draws.csv"
    save_csv(_separated_draws(), path)
    assert main(["diagnose", str(path)]) == 1
    assert main(["diagnose", str(path), "--tau", "1e6"]) == 0


def test_diagnose_layout_reshape(tmp_path, capsys):
    path = tmp_path / "draws.csv"
    save_csv(_converged_draws(), path)
    assert main(["diagnose", str(path), "--layout", "8,4,8,2"]) == 0
    assert "dim 1" in capsys.readouterr().out


def test_diagnose_layout_element_mismatch(tmp_path, capsys):
    path = tmp_path / "draws.csv"
    save_csv(_converged_draws(), path)
    assert main(["diagnose", str(path), "--layout", "3,3,3,3"]) == 2
    err = capsys.readouterr().err
    assert "error:" in err and "81 values" in err and "512" in err


def test_diagnose_layout_needs_four_integers(tmp_path, capsys):
    path = tmp_path / "draws.csv"
    save_csv(_converged_draws(), path)
    assert main(["diagnose", str(path), "--layout", "2,2"]) == 2
    assert "four integers" in capsys.readouterr().err


def test_diagnose_truncated_binary(tmp_path, capsys):
    path = tmp_path / "draws.bin"
    save_binary(_converged_draws(), path)
    path.write_bytes(path.read_bytes()[:-7])
    assert main(["diagnose", str(path)]) == 2
    assert "error:" in capsys.readouterr().err


def test_diagnose_missing_file(tmp_path, capsys):
    assert main(["diagnose", str(tmp_path / "absent.csv")]) == 2
    assert "error:" in capsys.readouterr().err


# ------------------------------------------------------------------- oracle


def test_oracle_nested_curve_values(capsys):
    t = 0.5 * math.log(2.0)
    code = main(["oracle", "--statistic", "nested", "--mu0", "1.0", "--sigma0", "1.0",
                 "--M", "16", "--T", repr(t)])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "T,bias,B,W,ratio,rhat_limit"
    fields = lines[1].split(",")
    assert float(fields[0]) == pytest.approx(t)
    assert float(fields[1]) == pytest.approx(math.exp(-t), rel=1e-12)
    assert float(fields[4]) == pytest.approx(1.0625, rel=1e-12)
    assert float(fields[5]) == pytest.approx(math.sqrt(2.0625), rel=1e-12)


def test_oracle_curve_accepts_repeated_times(capsys):
    code = main(["oracle", "--statistic", "rhat", "--mu0", "0.0", "--sigma0", "1.0",
                 "--T", "0.5", "--T", "1.0"])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 3
    for line in lines[1:]:
        fields = [float(v) for v in line.split(",")]
        assert len(fields) == 6
        assert fields[5] == pytest.approx(math.sqrt(1.0 + fields[4]), rel=1e-12)


def test_oracle_reliability_bound_row(capsys):
    code = main(["oracle", "--reliability", "--statistic", "nested", "--mu0", "2.0",
                 "--sigma0", "0.0", "--M", "16", "--delta", "0.1", "--delta-prime", "0.02"])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("statistic,mu0,delta,delta_prime,verdict")
    fields = lines[1].split(",")
    assert fields[0] == "nested"
    assert fields[4] == "bound"
    assert float(fields[5]) == pytest.approx(7.4625, rel=1e-12)


def test_oracle_requires_curve_times(capsys):
    assert main(["oracle"]) == 2
    assert "error:" in capsys.readouterr().err


def test_bad_flag_value_exits_via_argparse(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["oracle", "--sigma", "wide", "--T", "1"])
    assert excinfo.value.code == 2
    assert "invalid float value" in capsys.readouterr().err


def test_thread_cap_env(monkeypatch):
    monkeypatch.setenv("SUPERCHAIN_THREADS", "1")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMEXPR_NUM_THREADS"):
        monkeypatch.delenv(var, raising=False)
    assert main(["oracle", "--T", "1.0"]) == 0
    assert os.environ["OMP_NUM_THREADS"] == "1"


# --------------------------------------------------------------- experiment


def _tiny_sweep_args(outdir, extra=()):
    return [
        "experiment", "sweep", "--target", "gaussian",
        "--K", "4", "--M", "4", "--N", "2",
        "--warmup-grid", "2,5", "--reps", "2", "--seed", "7",
        "--epsilons", "0.05,0.2", "--min-support", "1",
        "--out", str(outdir), *extra,
    ]


def test_experiment_sweep_bundle(tmp_path, capsys):
    out = tmp_path / "bundle"
    assert main(_tiny_sweep_args(out)) == 0
    assert "bundle written" in capsys.readouterr().out
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["experiment"] == "sweep"
    run = manifest["runs"][0]
    assert (run["target"], run["K"], run["M"], run["N"]) == ("gaussian", 4, 4, 2)
    assert run["replications"] == 2 and run["seed"] == 7 and run["records"] == 4
    for name, digest in manifest["files"].items():
        assert hashlib.sha256((out / name).read_bytes()).hexdigest() == digest
    sweep_lines = (out / "sweep.csv").read_text().splitlines()
    assert sweep_lines[0] == "target,dim,warmup,rep,nRhat,E2,threshold"
    assert len(sweep_lines) == 5
    assert (out / "fraction.csv").read_text().startswith("epsilon,fraction,count")


def test_experiment_sweep_is_deterministic(tmp_path):
    assert main(_tiny_sweep_args(tmp_path / "a")) == 0
    assert main(_tiny_sweep_args(tmp_path / "b")) == 0
    for name in ("sweep.csv", "fraction.csv", "manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_experiment_sweep_plots(tmp_path):
    out = tmp_path / "bundle"
    assert main(_tiny_sweep_args(out, extra=("--plots",))) == 0
    svg = out / "sweep.svg"
    assert svg.is_file()
    assert svg.read_bytes().startswith(b"<?xml")
    manifest = json.loads((out / "manifest.json").read_text())
    assert "sweep.svg" in manifest["files"]


def test_experiment_scale_divides_superchains(tmp_path, capsys):
    out = tmp_path / "bundle"
    assert main(_tiny_sweep_args(out, extra=("--scale", "2"))) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["runs"][0]["K"] == 2
    assert main(_tiny_sweep_args(tmp_path / "c", extra=("--scale", "3"))) == 2
    assert "does not divide" in capsys.readouterr().err


def test_experiment_ratio_variance_bundle(tmp_path):
    out = tmp_path / "rv"
    code = main(["experiment", "ratio-variance", "--total-chains", "16",
                 "--k-values", "2,4", "--reps", "3", "--seed", "1", "--out", str(out)])
    assert code == 0
    lines = (out / "ratio_variance.csv").read_text().splitlines()
    assert lines[0] == "K,warmup,N,variance"
    assert len(lines) == 3
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["runs"][0]["total_chains"] == 16
    assert manifest["runs"][0]["k_values"] == [2, 4]


def test_experiment_reliability_bundle(tmp_path):
    out = tmp_path / "rel"
    code = main(["experiment", "reliability", "--mu0-values", "0", "--sigma0-sq-values", "1",
                 "--K-rel", "8", "--M-rel", "4", "--steps", "4", "--checkpoint-every", "2",
                 "--seed", "2", "--out", str(out)])
    assert code == 0
    lines = (out / "reliability.csv").read_text().splitlines()
    assert lines[0] == "mu0,sigma0_sq,empirical,theoretical,sigma0_sq_bound"
    assert len(lines) == 2
    manifest = json.loads((out / "manifest.json").read_text())
    run = manifest["runs"][0]
    assert run["kind"] == "gaussian" and run["points"] == 1
    assert 0.0 <= run["agreement"] <= 1.0


# ---------------------------------------------------------------- benchmarks


def test_missing_benchmark_exit_code(tmp_path, monkeypatch, capsys):
    from superchains.targets import benchmarks as benchmarks_module

    monkeypatch.delenv("SUPERCHAIN_BENCHMARKS", raising=False)
    monkeypatch.setattr(
        benchmarks_module, "_cache_locations",
        lambda name, directory=None: [tmp_path / f"{name}.json"],
    )
    code = main(["experiment", "sweep", "--target", "eight_schools", "--K", "2", "--M", "2",
                 "--warmup-grid", "0", "--reps", "1", "--out", str(tmp_path / "b")])
    assert code == 3
    assert "compute-benchmarks" in capsys.readouterr().err


def test_compute_benchmarks_cli_plumbing(tmp_path, monkeypatch, capsys):
    import superchains.targets as targets_package

    def fake_compute(target, progress=None, seed=2718):
        assert target.name == "eight_schools"
        assert seed == 99
        if progress is not None:
            progress(10, 10)
        return BenchmarkMoments(
            mean=np.zeros(target.dim),
            variance=np.ones(target.dim),
            provenance="long-run-oracle",
            config={"seed": seed},
        )

    monkeypatch.setattr(targets_package, "compute_benchmark", fake_compute)
    code = main(["compute-benchmarks", "--target", "eight_schools",
                 "--out", str(tmp_path), "--oracle-seed", "99"])
    assert code == 0
    assert "wrote" in capsys.readouterr().out
    payload = json.loads((tmp_path / "eight_schools.json").read_text())
    assert payload["target"] == "eight_schools"
    assert payload["config"]["seed"] == 99
