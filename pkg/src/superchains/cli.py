"""Command line: sample, diagnose, oracle curves, experiments, benchmarks.

Exit codes are stable across subcommands: 0 success (diagnose: converged),
1 diagnostic above threshold, 2 usage or parse errors, 3 missing
prerequisite (benchmark cache not computed yet).

Run settings resolve in three layers: the packaged per-target config, then
an optional --config file, then individual flags.  Unknown keys in config
files are errors rather than silently ignored.

SUPERCHAIN_THREADS caps the numerical thread pools (OMP/BLAS); it must be
read before numpy loads, which is why the heavy imports here live inside
the handlers.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import platform
import sys
from pathlib import Path


def _cap_threads() -> None:
    cap = os.environ.get("SUPERCHAIN_THREADS")
    if not cap:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(var, cap)


DATA_TARGETS = ("eight_schools", "german_credit", "pharmacokinetics", "item_response")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


_RUN_FLAG_KEYS = (
    ("K", "K"),
    ("M", "M"),
    ("N", "N"),
    ("warmup", "warmup"),
    ("seed", "seed"),
    ("kind", "kind"),
    ("step_size", "step_size"),
    ("leapfrog", "leapfrog"),
    ("init_mu0", "init.mu0"),
    ("init_sigma0", "init.sigma0"),
    ("init_preset", "init.preset"),
)


def _add_run_flags(sub: argparse.ArgumentParser, with_layout: bool = True) -> None:
    if with_layout:
        sub.add_argument("--K", help="superchain count")
        sub.add_argument("--M", help="subchains per superchain")
        sub.add_argument("--N", help="kept draws per subchain")
        sub.add_argument("--warmup", help="warmup transitions")
    sub.add_argument("--seed", help="root seed")
    sub.add_argument("--kind", help="kernel: mala or hmc")
    sub.add_argument("--step-size", dest="step_size", help="leapfrog step size")
    sub.add_argument("--leapfrog", help="leapfrog steps per proposal")
    sub.add_argument("--init-mu0", dest="init_mu0", help="initialization mean")
    sub.add_argument("--init-sigma0", dest="init_sigma0", help="initialization standard deviation")
    sub.add_argument("--init-preset", dest="init_preset", help="named init center (anchored)")


def _resolved_values(args) -> dict[str, str]:
    """Packaged config, then --config file, then flags; returns flat keys."""
    from .errors import ConfigurationError
    from .tuning import packaged_config, parse_flat_config, validate_keys

    file_values: dict[str, str] = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        file_values = parse_flat_config(path.read_text(), source=str(path))
        validate_keys(file_values, source=str(path))

    target = getattr(args, "target", None) or file_values.get("target")
    if not target:
        raise ConfigurationError("no target given (use --target or a config file with target=...)")
    from .targets import REGISTRY

    if target not in REGISTRY:
        raise ConfigurationError(
            f"unknown target {target!r}; registered targets: {', '.join(sorted(REGISTRY))}"
        )

    try:
        values = packaged_config(target)
    except ConfigurationError:
        values = {}
    values.update(file_values)
    values["target"] = target
    for attr, key in _RUN_FLAG_KEYS:
        flag = getattr(args, attr, None)
        if flag is not None:
            values[key] = flag
    return values


def _resolve_run(args):
    from .targets import get_target
    from .tuning import build_plan, resolve_settings

    settings = resolve_settings(_resolved_values(args), source="<command line>")
    target = get_target(settings.target)
    return settings, target, build_plan(settings, target.dim)


def _settings_json(settings) -> dict:
    return {
        "target": settings.target,
        "kind": settings.kind,
        "step_size": settings.step_size,
        "leapfrog": settings.leapfrog,
        "K": settings.num_superchains,
        "M": settings.num_subchains,
        "N": settings.num_draws,
        "warmup": settings.warmup,
        "seed": settings.seed,
        "init.mu0": [float(v) for v in settings.init_mu0],
        "init.sigma0": settings.init_sigma0,
    }


def _versions() -> dict:
    import numpy

    from . import __version__

    return {"superchains": __version__, "numpy": numpy.__version__, "python": platform.python_version()}


def _cmd_sample(args) -> int:
    import numpy as np

    from .chain_store import save_binary, save_csv
    from .samplers import run

    settings, target, plan = _resolve_run(args)
    result = run(plan, target)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)

    written = []
    if args.format in ("csv", "both"):
        save_csv(result.draws, outdir / "draws.csv")
        written.append("draws.csv")
    if args.format in ("binary", "both"):
        save_binary(result.draws, outdir / "draws.bin")
        written.append("draws.bin")

    meta = {
        "config": _settings_json(settings),
        "dim": target.dim,
        "warmup_accept_rate": _rate_summary(result.warmup_accept_rate),
        "sampling_accept_rate": _rate_summary(result.sampling_accept_rate),
        "warnings": result.warnings,
        "versions": _versions(),
    }
    with open(outdir / "metadata.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append("metadata.json")

    rate = float(np.nanmean(result.sampling_accept_rate))
    print(f"sampled {settings.target}: K={plan.layout.num_superchains} M={plan.layout.num_subchains} "
          f"N={plan.layout.num_draws} warmup={plan.layout.warmup} accept={rate:.3f}")
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"wrote {', '.join(written)} to {outdir}")
    return 0


def _rate_summary(rates) -> dict:
    import numpy as np

    if np.all(np.isnan(rates)):
        return {"mean": None, "min": None, "max": None}
    return {
        "mean": float(np.nanmean(rates)),
        "min": float(np.nanmin(rates)),
        "max": float(np.nanmax(rates)),
    }


def _cmd_diagnose(args) -> int:
    from .chain_store import ChainDraws, SuperchainLayout, load_binary, load_csv
    from .diagnostics import build_report
    from .errors import ShapeError

    path = Path(args.draws)
    loader = load_binary if path.suffix in (".bin", ".dat") else load_csv
    draws = loader(path)

    if args.layout:
        shape = args.layout
        if len(shape) != 4:
            raise ShapeError(f"--layout needs K,M,N,D (four integers), got {len(shape)}")
        have = draws.values.size
        need = int(math.prod(shape))
        if have != need:
            raise ShapeError(f"--layout {shape} needs {need} values, file has {have}")
        layout = SuperchainLayout(*shape, warmup=draws.layout.warmup, seed=draws.layout.seed)
        draws = ChainDraws(layout=layout, values=draws.values.reshape(shape))

    report = build_report(draws, tau=args.tau)
    report_path = Path(args.report) if args.report else path.with_suffix(".report.json")
    report.to_json(report_path)

    c = report.components
    for d in range(report.layout.dim):
        status = "ok" if report.passed[d] else "above"
        print(f"dim {d}: nRhat={float(c.nested_rhat[d]):.6f} threshold={report.threshold:.6f} {status}")
    verdict = "converged" if report.all_passed else "not converged"
    print(f"{verdict}; report written to {report_path}")
    return 0 if report.all_passed else 1


def _cmd_oracle(args) -> int:
    from .langevin_oracle import (
        LangevinSpec,
        ReliabilityQuery,
        nested_limits,
        reliability_sigma0_bound,
        rhat_ratio_averaged_diffusion,
        rhat_reliability_bound,
    )

    def spec_at(t: float) -> LangevinSpec:
        return LangevinSpec(mu=args.mu, sigma=args.sigma, mu0=args.mu0,
                            sigma0=args.sigma0, T=t, M=args.M)

    if args.reliability:
        query = ReliabilityQuery(delta=args.delta, delta_prime=args.delta_prime)
        print("statistic,mu0,delta,delta_prime,verdict,sigma0_sq_bound,t_star,a2_ceiling,always_reliable_delta")
        if args.statistic == "nested":
            res = reliability_sigma0_bound(spec_at(1.0), query)
        else:
            res = rhat_reliability_bound(spec_at(1.0), query)
        fields = [
            args.statistic,
            repr(args.mu0),
            repr(args.delta),
            repr(args.delta_prime),
            res.verdict.value,
            "" if res.sigma0_sq_bound is None else repr(res.sigma0_sq_bound),
            "" if res.t_star is None else repr(res.t_star),
            "" if res.a2_ceiling is None else repr(res.a2_ceiling),
            "" if res.always_reliable_delta is None else repr(res.always_reliable_delta),
        ]
        print(",".join(fields))
        return 0

    if not args.T:
        raise_usage("oracle curves need --T (one or more times) or --reliability")
    lines = ["T,bias,B,W,ratio,rhat_limit"]
    for t in args.T:
        if args.statistic == "nested":
            b, w = nested_limits(spec_at(t))
            bias = (args.mu0 - args.mu) * math.exp(-t)
            ratio = b / w
        else:
            bias, b, w, ratio = rhat_ratio_averaged_diffusion(spec_at(t))
        lines.append(f"{t!r},{bias!r},{b!r},{w!r},{ratio!r},{math.sqrt(1.0 + ratio)!r}")
    print("\n".join(lines))
    return 0


def raise_usage(message: str) -> None:
    from .errors import ConfigurationError

    raise ConfigurationError(message)


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    digest.update(path.read_bytes())
    return digest.hexdigest()


def _write_bundle_manifest(outdir: Path, extra: dict) -> None:
    files = {
        p.name: _sha256(p)
        for p in sorted(outdir.iterdir())
        if p.is_file() and p.name != "manifest.json"
    }
    payload = dict(extra)
    payload["files"] = files
    with open(outdir / "manifest.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _scaled_k(k: int, scale: int) -> int:
    from .errors import ConfigurationError

    if scale < 1:
        raise ConfigurationError(f"--scale must be >= 1, got {scale}")
    if k % scale != 0 or k // scale < 2:
        raise ConfigurationError(f"--scale {scale} does not divide K={k} down to >= 2 superchains")
    return k // scale


def _int_flag(value, name: str, default: int) -> int:
    from .errors import ConfigurationError

    if value is None:
        return default
    try:
        return int(value)
    except ValueError:
        raise ConfigurationError(f"--{name} must be an integer, got {value!r}") from None


def _sweep_plan(args, target: str):
    from .experiments import DEFAULT_WARMUP_GRID, SweepPlan
    from .tuning import settings_for_target

    overrides = {}
    for attr, key in _RUN_FLAG_KEYS:
        if attr in ("K", "M", "N", "warmup", "seed"):
            continue
        flag = getattr(args, attr, None)
        if flag is not None:
            overrides[key] = flag
    base = settings_for_target(target, overrides or None)
    k = _int_flag(args.K, "K", base.num_superchains)
    m = _int_flag(args.M, "M", base.num_subchains)
    if args.full:
        k = max(2048 // m, 2)
    k = _scaled_k(k, args.scale)
    return SweepPlan(
        target=target,
        warmup_lengths=args.warmup_grid or DEFAULT_WARMUP_GRID,
        num_superchains=k,
        num_subchains=m,
        num_draws=_int_flag(args.N, "N", 1),
        replications=args.reps,
        seed=_int_flag(args.seed, "seed", base.seed),
        config_overrides=tuple(sorted(overrides.items())),
    )


def _run_sweep_bundle(args, target: str, outdir: Path, prefix: str = "") -> dict:
    from .experiments import fraction_above_quantile, run_sweep, write_fraction_csv, write_sweep_csv

    plan = _sweep_plan(args, target)
    records = run_sweep(plan)
    write_sweep_csv(records, outdir / f"{prefix}sweep.csv")
    points = fraction_above_quantile(records, _epsilon_grid(args), min_support=args.min_support)
    write_fraction_csv(points, outdir / f"{prefix}fraction.csv")
    if args.plots:
        _plot_sweep(records, outdir / f"{prefix}sweep.svg")
    return {
        "target": target,
        "K": plan.num_superchains,
        "M": plan.num_subchains,
        "N": plan.num_draws,
        "replications": plan.replications,
        "seed": plan.seed,
        "records": len(records),
    }


def _epsilon_grid(args) -> tuple[float, ...]:
    if args.epsilons:
        return args.epsilons
    grid = [10.0 ** (-4 + 5 * i / 24) for i in range(25)]
    grid.append(float("inf"))
    return tuple(grid)


def _cmd_experiment(args) -> int:
    from .errors import ConfigurationError

    outdir = Path(args.out) if args.out else Path(f"experiment-{args.name}")
    outdir.mkdir(parents=True, exist_ok=True)
    meta: dict = {"experiment": args.name, "scale": args.scale, "warmup_continuation": True}

    if args.name == "sweep" or args.name == "fraction":
        meta["runs"] = [_run_sweep_bundle(args, args.target or "gaussian", outdir)]
    elif args.name == "benchmarks-figure":
        targets = args.targets or DATA_TARGETS
        runs = []
        for name in targets:
            runs.append(_run_sweep_bundle(args, name, outdir, prefix=f"{name}_"))
        meta["runs"] = runs
    elif args.name == "ratio-variance":
        meta["runs"] = [_ratio_variance_bundle(args, outdir)]
    elif args.name == "reliability":
        meta["runs"] = [_reliability_bundle(args, outdir)]
    else:
        raise ConfigurationError(f"unknown experiment {args.name!r}")

    _write_bundle_manifest(outdir, meta)
    print(f"experiment {args.name}: bundle written to {outdir}")
    return 0


def _ratio_variance_bundle(args, outdir: Path) -> dict:
    from .experiments import ratio_variance_study, write_ratio_variance_csv

    total = 2048 if args.full else args.total_chains
    total = total // args.scale
    records = ratio_variance_study(
        total_chains=total,
        k_values=args.k_values,
        warmup_grid=args.warmup_grid or (0,),
        num_draws_values=args.n_values,
        replications=args.reps,
        seed=_int_flag(args.seed, "seed", 0),
        phi=args.phi,
        init_mu0=args.rv_mu0,
        init_sigma0=args.rv_sigma0,
        independent_inits=args.independent_inits,
    )
    write_ratio_variance_csv(records, outdir / "ratio_variance.csv")
    if args.plots:
        _plot_ratio_variance(records, outdir / "ratio_variance.svg")
    return {"total_chains": total, "k_values": list(args.k_values), "replications": args.reps}


def _reliability_bundle(args, outdir: Path) -> dict:
    from .experiments import reliability_study, write_reliability_csv

    k = 1024 if args.full else args.K_rel
    k = _scaled_k(k, args.scale)
    points = reliability_study(
        args.target or "gaussian",
        mu0_values=args.mu0_values,
        sigma0_sq_values=args.sigma0_sq_values,
        num_subchains=args.M_rel,
        num_superchains=k,
        delta=args.delta,
        delta_prime=args.delta_prime,
        step_size=args.step_size_rel,
        num_steps=args.steps,
        checkpoint_every=args.checkpoint_every,
        seed=_int_flag(args.seed, "seed", 0),
    )
    write_reliability_csv(points, outdir / "reliability.csv")
    if args.plots:
        _plot_reliability(points, outdir / "reliability.svg")
    agree = [p for p in points if p.theoretical is not None]
    meta = {"kind": args.target or "gaussian", "K": k, "M": args.M_rel, "points": len(points)}
    if agree:
        meta["agreement"] = sum(p.empirical == p.theoretical for p in agree) / len(agree)
    return meta


def _cmd_compute_benchmarks(args) -> int:
    from .targets import benchmarks as benchmarks_module
    from .targets import compute_benchmark, get_target, save_benchmark

    names = args.target or list(DATA_TARGETS)
    outdir = args.out or Path(benchmarks_module.__file__).parent / "data" / "benchmarks"
    for name in names:
        target = get_target(name)
        print(f"computing long-run oracle for {name} (this can take minutes)...")

        def progress(done, total):
            if done % max(total // 10, 1) == 0:
                print(f"  {name}: {done}/{total} draws")

        moments = compute_benchmark(target, progress=progress, seed=args.oracle_seed)
        path = save_benchmark(name, moments, outdir)
        print(f"  wrote {path}")
    return 0


def _import_pyplot():
    from .errors import ConfigurationError

    try:
        import matplotlib
    except ImportError:
        raise ConfigurationError(
            "--plots needs matplotlib; install the plots extra"
        ) from None
    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "superchains"
    from matplotlib import pyplot as plt

    return plt


def _save_svg(fig, path: Path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})


def _plot_sweep(records, path: Path) -> None:
    plt = _import_pyplot()
    xs = [r.nested_rhat for r in records if not r.diverged]
    ys = [max(r.squared_error, 1e-12) for r in records if not r.diverged]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.scatter(xs, ys, s=8, alpha=0.5)
    ax.axvline(records[0].threshold, color="k", lw=0.8)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("nested Rhat")
    ax.set_ylabel("scaled squared error")
    _save_svg(fig, path)
    plt.close(fig)


def _plot_ratio_variance(records, path: Path) -> None:
    plt = _import_pyplot()
    fig, ax = plt.subplots(figsize=(5, 4))
    ks = sorted({r.num_superchains for r in records})
    for k in ks:
        rows = [r for r in records if r.num_superchains == k]
        ax.plot([r.warmup for r in rows], [r.variance for r in rows], marker="o", label=f"K={k}")
    ax.set_yscale("log")
    ax.set_xlabel("warmup")
    ax.set_ylabel("variance of nested B/W")
    ax.legend()
    _save_svg(fig, path)
    plt.close(fig)


def _plot_reliability(points, path: Path) -> None:
    plt = _import_pyplot()
    fig, ax = plt.subplots(figsize=(5, 4))
    colors = {"reliable": "tab:blue", "unreliable": "tab:red"}
    for p in points:
        ax.scatter(p.mu0, max(p.sigma0_sq, 1e-3), c=colors[p.empirical], s=30)
    ax.set_yscale("log")
    ax.set_xlabel("mu0")
    ax.set_ylabel("sigma0^2")
    _save_svg(fig, path)
    plt.close(fig)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="superchains",
        description="Many-short-chain MCMC with nested convergence diagnostics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sample = sub.add_parser("sample", help="run chains and write draws + metadata")
    p_sample.add_argument("--target", help="registered target name")
    p_sample.add_argument("--config", help="flat key=value config file")
    p_sample.add_argument("--out", default="run", help="output directory")
    p_sample.add_argument("--format", choices=("csv", "binary", "both"), default="both")
    _add_run_flags(p_sample)
    p_sample.set_defaults(handler=_cmd_sample)

    p_diag = sub.add_parser("diagnose", help="nested diagnostic report for stored draws")
    p_diag.add_argument("draws", help="draws file (.csv or .bin)")
    p_diag.add_argument("--tau", type=float, default=1e-4, help="threshold slack")
    p_diag.add_argument("--layout", type=_int_list, help="reinterpret as K,M,N,D")
    p_diag.add_argument("--report", help="report path (default: alongside input)")
    p_diag.set_defaults(handler=_cmd_diagnose)

    p_oracle = sub.add_parser("oracle", help="closed-form diffusion curves and bounds")
    p_oracle.add_argument("--mu", type=float, default=0.0, help="target mean")
    p_oracle.add_argument("--sigma", type=float, default=1.0, help="target standard deviation")
    p_oracle.add_argument("--mu0", type=float, default=0.0, help="initialization mean")
    p_oracle.add_argument("--sigma0", type=float, default=0.0, help="initialization standard deviation")
    p_oracle.add_argument("--M", type=int, default=1, help="subchains per superchain")
    p_oracle.add_argument("--T", type=float, action="append", help="diffusion time (repeatable)")
    p_oracle.add_argument("--statistic", choices=("nested", "rhat"), default="nested")
    p_oracle.add_argument("--reliability", action="store_true", help="emit the reliability verdict instead of curves")
    p_oracle.add_argument("--delta", type=float, default=0.1)
    p_oracle.add_argument("--delta-prime", dest="delta_prime", type=float, default=0.02)
    p_oracle.set_defaults(handler=_cmd_oracle)

    p_exp = sub.add_parser("experiment", help="reproducible CSV/SVG study bundles")
    p_exp.add_argument("name", choices=("sweep", "fraction", "ratio-variance", "reliability", "benchmarks-figure"))
    p_exp.add_argument("--target", help="target for sweep/reliability")
    p_exp.add_argument("--targets", type=lambda s: tuple(s.split(",")), help="targets for benchmarks-figure")
    p_exp.add_argument("--out", help="bundle directory")
    p_exp.add_argument("--scale", type=int, default=1, help="divide superchain count by this factor")
    p_exp.add_argument("--full", action="store_true", help="full-scale chain counts for offline runs")
    p_exp.add_argument("--plots", action="store_true", help="emit SVG figures (needs matplotlib)")
    p_exp.add_argument("--reps", type=int, default=10, help="replications")
    p_exp.add_argument("--warmup-grid", dest="warmup_grid", type=_int_list, help="comma-separated warmup lengths")
    p_exp.add_argument("--epsilons", type=_float_list, help="cutoffs for the fraction curve (inf allowed)")
    p_exp.add_argument("--min-support", dest="min_support", type=int, default=100)
    p_exp.add_argument("--total-chains", dest="total_chains", type=int, default=512)
    p_exp.add_argument("--k-values", dest="k_values", type=_int_list, default=(2, 8, 32, 128))
    p_exp.add_argument("--n-values", dest="n_values", type=_int_list, default=(1,))
    p_exp.add_argument("--phi", type=float, default=0.0, help="AR(1) lag-one correlation for ratio-variance")
    p_exp.add_argument("--rv-mu0", dest="rv_mu0", type=float, default=0.0)
    p_exp.add_argument("--rv-sigma0", dest="rv_sigma0", type=float, default=1.0)
    p_exp.add_argument("--independent-inits", dest="independent_inits", action="store_true")
    p_exp.add_argument("--mu0-values", dest="mu0_values", type=_float_list,
                       default=(0.0, 0.5, 1.0, 1.5, 2.0, 2.5))
    p_exp.add_argument("--sigma0-sq-values", dest="sigma0_sq_values", type=_float_list,
                       default=(0.0, 0.25, 1.0, 4.0, 9.0, 25.0))
    p_exp.add_argument("--K-rel", dest="K_rel", type=int, default=256, help="superchains for reliability")
    p_exp.add_argument("--M-rel", dest="M_rel", type=int, default=16, help="subchains for reliability")
    p_exp.add_argument("--delta", type=float, default=0.1)
    p_exp.add_argument("--delta-prime", dest="delta_prime", type=float, default=0.02)
    p_exp.add_argument("--mala-step", dest="step_size_rel", type=float, default=0.04)
    p_exp.add_argument("--steps", type=int, default=5000)
    p_exp.add_argument("--checkpoint-every", dest="checkpoint_every", type=int, default=25)
    _add_run_flags(p_exp)
    p_exp.set_defaults(handler=_cmd_experiment)

    p_bench = sub.add_parser("compute-benchmarks", help="long-run oracle moments for the data targets")
    p_bench.add_argument("--target", action="append", help="target name (repeatable; default: all four)")
    p_bench.add_argument("--out", help="cache directory (default: packaged cache)")
    p_bench.add_argument("--oracle-seed", dest="oracle_seed", type=int, default=2718)
    p_bench.set_defaults(handler=_cmd_compute_benchmarks)

    return parser


def main(argv=None) -> int:
    _cap_threads()
    parser = build_parser()
    args = parser.parse_args(argv)

    from .errors import MissingBenchmarkError, SuperchainError

    try:
        return args.handler(args)
    except MissingBenchmarkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except SuperchainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
