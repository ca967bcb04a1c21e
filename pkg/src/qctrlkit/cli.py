"""Command-line front end.

Every command writes its result plus a ``<out>.manifest.json`` run manifest
recording the resolved configuration, seed, tool version, input digests and
wall time. Exit codes: 0 success, 2 malformed configuration or usage, 3
numerical failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 2, 3, 4


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _version() -> str:
    from . import __version__

    return __version__


def _config_error(message):
    return CliError(message, EXIT_CONFIG)


def _read_json(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_IO) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise _config_error(f"{path} is not valid JSON: {exc}") from exc


def _json_arg(value):
    """Inline JSON text or a path to a JSON file."""
    if value is None:
        return {}
    text = value.strip()
    if text.startswith("{") or text.startswith("["):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise _config_error(f"invalid inline JSON: {exc}") from exc
    return _read_json(value)


def _write_json(path, data):
    try:
        Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}", EXIT_IO) from exc


def _write_csv(path, header, rows):
    from .io import write_csv

    try:
        write_csv(path, header, rows)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}", EXIT_IO) from exc


def _read_csv(path):
    from .io import read_csv

    try:
        return read_csv(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_IO) from exc
    except (ValueError, StopIteration) as exc:
        raise _config_error(f"{path} is not a numeric CSV with a header: {exc}") from exc


def _validated(data, schema, path="input"):
    import jsonschema

    from .io import validate

    try:
        return validate(data, schema)
    except jsonschema.ValidationError as exc:
        raise _config_error(f"{path} does not match the {schema} schema: {exc.message}") from exc


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("QCTRLKIT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise _config_error("QCTRLKIT_THREADS must be an integer") from exc
    return os.cpu_count() or 1


def _freq(args, value):
    """Apply the --hz conversion to a frequency given on the command line."""
    return None if value is None else float(value) * (2 * np.pi if args.hz else 1.0)


def _manifest(args, inputs, outputs, seed, started, config):
    from .io import file_digest

    digests = {}
    for path in inputs:
        try:
            digests[str(path)] = file_digest(path)
        except OSError as exc:
            raise CliError(f"cannot read {path}: {exc}", EXIT_IO) from exc
    return {
        "command": args.command,
        "argv": sys.argv[1:] if args.argv is None else list(args.argv),
        "config": config,
        "seed": seed,
        "tool_version": _version(),
        "inputs": digests,
        "outputs": [str(p) for p in outputs],
        "wall_time": time.perf_counter() - started,
    }


def _finish(args, out, inputs, seed, started, config, extra_outputs=()):
    manifest = _manifest(args, inputs, [out, *extra_outputs], seed, started, config)
    _write_json(str(out) + ".manifest.json", manifest)


def _load_control(path):
    from .io import control_from_dict

    data = _validated(_read_json(path), "control", path)
    try:
        ctrl, noise = control_from_dict(data, check=False)
    except (ValueError, TypeError) as exc:
        raise _config_error(f"{path}: {exc}") from exc
    return data, ctrl, noise


# ------------------------------------------------------------------ commands
def cmd_simulate(args):
    from .io import channels_from_dict
    from .simulator import simulate

    started = time.perf_counter()
    data, ctrl, _ = _load_control(args.control)
    inputs = [args.control]
    channels = []
    if args.noise:
        noise_data = _read_json(args.noise)
        inputs.append(args.noise)
    elif "noise" in data:
        noise_data = data["noise"]
    else:
        noise_data = None
    if noise_data is not None:
        _validated(noise_data, "noise", args.noise or "embedded noise")
        try:
            channels = channels_from_dict(noise_data, check=False)
        except ValueError as exc:
            raise _config_error(str(exc)) from exc
    D = ctrl.dimension
    if not 0 <= args.initial < D:
        raise _config_error(f"initial basis state must be in [0, {D})")
    if args.points < 1:
        raise _config_error("--points must be positive")
    psi0 = np.zeros(D, dtype=complex)
    psi0[args.initial] = 1.0
    if args.times:
        times = _read_csv(args.times)[1][:, 0]
        inputs.append(args.times)
        if np.any(np.diff(times) < 0) or times.min() < 0 or times.max() > ctrl.duration * (1 + 1e-12):
            raise _config_error("--times must be sorted and lie within [0, duration]")
    elif args.points > 1:
        times = np.linspace(0.0, ctrl.duration, args.points)
    else:
        times = np.array([ctrl.duration])
    if args.trials < 1:
        raise _config_error("--trials must be positive")
    try:
        result = simulate(ctrl, psi0, times, channels, seed=args.seed, trials=args.trials,
                          workers=_threads(args))
    except (ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
        raise CliError(f"simulation failed: {exc}", EXIT_NUMERICAL) from exc
    header = ["time [s]"] + [f"population_{k} [1]" for k in range(D)]
    _write_csv(args.out, header, np.column_stack([times, result.populations]))
    from .optimizer.graph import complex_to_json

    rho_path = str(args.out) + ".density.json"
    _write_json(rho_path, {"rho": complex_to_json(result.final_density.rho),
                           "trials": result.final_density.trials,
                           "purity": result.final_density.purity, "time": float(times[-1])})
    _finish(args, args.out, inputs, args.seed, started,
            {"control": args.control, "noise": args.noise, "trials": args.trials, "points": len(times),
             "initial": args.initial, "channels": len(channels)}, [rho_path])


def cmd_filter_function(args):
    from .control import Projector
    from .filter_functions import filter_function

    started = time.perf_counter()
    _, ctrl, noise = _load_control(args.control)
    if args.noise_operator is not None:
        N = np.asarray(_json_arg(args.noise_operator), dtype=float)
        if N.ndim == 3 and N.shape[-1] == 2:
            N = N[..., 0] + 1j * N[..., 1]
    else:
        if not noise:
            raise _config_error("control file has no noise operators; pass --noise-operator")
        if not 0 <= args.noise_index < len(noise):
            raise _config_error("--noise-index out of range")
        N = noise[args.noise_index]
    inputs = [args.control]
    if args.freqs:
        omega = _read_csv(args.freqs)[1][:, 0] * (2 * np.pi if args.hz else 1.0)
        inputs.append(args.freqs)
    else:
        w_max = _freq(args, args.max_frequency)
        if w_max is None:
            w_max = 20 * 2 * np.pi / ctrl.duration
        if args.points < 2 or not w_max > 0:
            raise _config_error("need at least two frequencies and a positive maximum frequency")
        omega = np.linspace(_freq(args, args.min_frequency), w_max, args.points)
    projector = None
    if args.projector:
        diag = _json_arg(args.projector)
        diag = diag.get("diagonal") if isinstance(diag, dict) else diag
        try:
            projector = Projector(diag)
        except (ValueError, TypeError) as exc:
            raise _config_error(f"invalid projector: {exc}") from exc
    try:
        ff = filter_function(ctrl, N, projector, frequencies=omega, m=args.samples)
    except ValueError as exc:
        raise _config_error(str(exc)) from exc
    _write_csv(args.out, ["angular frequency [rad/s]", "filter function [s^2]"],
               np.column_stack([ff.frequencies, ff.values]))
    _finish(args, args.out, inputs, None, started,
            {"control": args.control, "points": int(omega.size), "projector": args.projector,
             "min_frequency": float(omega[0]), "max_frequency": float(omega[-1]),
             "samples": args.samples})


def cmd_optimize(args):
    from .optimizer import CostGraph, StopCriteria, minimize

    started = time.perf_counter()
    data = _validated(_read_json(args.problem), "problem", args.problem)
    try:
        graph = CostGraph.from_dict(data["graph"])
        stop = StopCriteria(**data.get("stop", {}))
    except (ValueError, KeyError, TypeError) as exc:
        raise _config_error(f"{args.problem}: {exc}") from exc
    starts = args.starts if args.starts is not None else data.get("starts", 1)
    if starts < 1:
        raise _config_error("--starts must be at least 1")
    res = minimize(graph, starts=starts, seed=args.seed, stop=stop)
    out = res.to_dict()
    out["history"] = [h.tolist() for h in res.history]
    _write_json(args.out, out)
    _finish(args, args.out, [args.problem], args.seed, started,
            {"problem": args.problem, "starts": starts, "stop": stop.__dict__})


def _partition(args):
    from .reconstruction import FrequencyPartition

    data = _validated(_read_json(args.partition), "partition", args.partition)
    factor = 2 * np.pi if args.hz else 1.0
    try:
        return FrequencyPartition(tuple((lo * factor, hi * factor, n) for lo, hi, n in data["bands"]))
    except ValueError as exc:
        raise _config_error(f"{args.partition}: {exc}") from exc


def cmd_reconstruct(args):
    from .reconstruction import build_sensitivity, reconstruct_co, reconstruct_svd

    started = time.perf_counter()
    partition = _partition(args)
    inputs = [args.partition, args.infidelities]
    _, I = _read_csv(args.infidelities)
    I = I[:, -1] if I.ndim == 2 else I
    if args.sensitivity:
        _, F = _read_csv(args.sensitivity)
        inputs.append(args.sensitivity)
    elif args.controls:
        controls, ops = [], []
        for path in args.controls:
            _, ctrl, noise = _load_control(path)
            if not noise:
                raise _config_error(f"{path} has no noise operators")
            controls.append(ctrl)
            ops = noise[: partition.channels] if not ops else ops
            inputs.append(path)
        if len(ops) != partition.channels:
            raise _config_error("partition channel count differs from the noise operator count")
        F = build_sensitivity(controls, ops, partition, m=args.samples).matrix
    else:
        raise _config_error("pass --sensitivity or --controls")
    if F.shape != (I.size, partition.size):
        raise _config_error(f"sensitivity shape {F.shape} does not match {I.size} infidelities "
                            f"and {partition.size} frequencies")
    try:
        if args.method == "svd":
            rec = reconstruct_svd(F, I, cutoff=args.cutoff)
        else:
            rec = reconstruct_co(F, I, lam=args.lam, tikhonov_weight=args.tikhonov_weight,
                                 l1_weight=args.l1_weight)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_NUMERICAL) from exc
    channel = np.concatenate([np.full(n, k) for k, n in enumerate(partition.counts)])
    _write_csv(args.out, ["channel [1]", "angular frequency [rad/s]", "psd [1/s]"],
               np.column_stack([channel, partition.frequencies(), rec.values]))
    _finish(args, args.out, inputs, None, started,
            {"method": args.method, "partition": partition.to_dict(), "lambda": rec.regularization,
             "warning": rec.warning})


def cmd_identify(args):
    from .identification import DataSet, identify, simulate_data
    from .io import experiments_from_dict

    started = time.perf_counter()
    data = _validated(_read_json(args.experiments), "experiments", args.experiments)
    try:
        experiments = experiments_from_dict(data, check=False)
    except ValueError as exc:
        raise _config_error(f"{args.experiments}: {exc}") from exc
    inputs = [args.experiments]
    if args.data:
        _, table = _read_csv(args.data)
        if table.shape[1] < 2:
            raise _config_error("data CSV needs value and uncertainty columns")
        try:
            dataset = DataSet(table[:, -2], table[:, -1])
        except ValueError as exc:
            raise _config_error(str(exc)) from exc
        inputs.append(args.data)
    elif args.synthetic_sigma is not None:
        if "truth" not in data:
            raise _config_error("synthetic data needs a 'truth' entry in the experiments file")
        dataset = simulate_data(data["truth"], experiments, args.synthetic_sigma, args.seed)
    else:
        raise _config_error("pass --data or --synthetic-sigma")
    if dataset.values.size != len(experiments):
        raise _config_error("one data row per experiment is required")
    bounds = data.get("bounds")
    res = identify(experiments, dataset, bounds=bounds, starts=args.starts, seed=args.seed)
    out = res.to_dict()
    out["parameter_names"] = data.get("parameter_names", [])
    out["units"] = data.get("units", "rad/s")
    _write_json(args.out, out)
    _finish(args, args.out, inputs, args.seed, started,
            {"experiments": args.experiments, "starts": args.starts,
             "synthetic_sigma": args.synthetic_sigma})


def cmd_scenario(args):
    from .scenarios import SCENARIOS, build

    if args.action == "list":
        print("\n".join(sorted(SCENARIOS)))
        return
    if args.name is None or args.out is None:
        raise _config_error("scenario build needs a name and --out")
    started = time.perf_counter()
    params = _json_arg(args.params)
    if not isinstance(params, dict):
        raise _config_error("--params must be a JSON object")
    try:
        artifact = build(args.name, params)
    except (KeyError, TypeError, ValueError) as exc:
        raise _config_error(str(exc)) from exc
    schema = {"control": "control", "problem": "problem", "experiments": "experiments"}[artifact["type"]]
    _validated(json.loads(json.dumps(artifact)), schema, "scenario output")
    _write_json(args.out, artifact)
    inputs = [args.params] if args.params and Path(args.params).is_file() else []
    _finish(args, args.out, inputs, None, started, {"scenario": args.name, "params": params})


# -------------------------------------------------------------------- parser
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qctrlkit", description="Quantum control toolkit.")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: $QCTRLKIT_THREADS or the CPU count)")
    p.add_argument("--hz", action="store_true",
                   help="frequency inputs are in Hz and are multiplied by 2 pi")
    p.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    s = sub.add_parser("simulate", help="noisy time-domain simulation")
    s.add_argument("--control", required=True)
    s.add_argument("--noise", "--channels", dest="noise",
                   help="noise channel JSON (defaults to channels embedded in the control)")
    s.add_argument("--times", help="CSV whose first column lists output times [s]; overrides --points")
    s.add_argument("--trials", type=int, default=1)
    s.add_argument("--points", type=int, default=101, help="uniform output times on [0, duration]")
    s.add_argument("--initial", type=int, default=0, help="initial basis state index")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("filter-function", help="filter function of a control")
    f.add_argument("--control", required=True)
    f.add_argument("--noise-index", type=int, default=0)
    f.add_argument("--noise-operator", help="operator as JSON (inline or file), overrides --noise-index")
    f.add_argument("--min-frequency", type=float, default=0.0)
    f.add_argument("--max-frequency", type=float, default=None)
    f.add_argument("--points", type=int, default=501)
    f.add_argument("--freqs", help="CSV whose first column lists angular frequencies; overrides the range")
    f.add_argument("--projector", help="projector diagonal as JSON (inline or file)")
    f.add_argument("--samples", type=int, default=None, help="time samples m")
    f.add_argument("--out", required=True)
    f.set_defaults(func=cmd_filter_function)

    o = sub.add_parser("optimize", help="minimize a declarative cost graph")
    o.add_argument("--problem", required=True)
    o.add_argument("--starts", type=int, default=None)
    o.add_argument("--seed", type=int, required=True)
    o.add_argument("--out", required=True)
    o.set_defaults(func=cmd_optimize)

    r = sub.add_parser("reconstruct", help="noise spectrum reconstruction")
    src = r.add_mutually_exclusive_group(required=True)
    src.add_argument("--sensitivity", help="sensitivity matrix CSV (header row, c x n)")
    src.add_argument("--controls", nargs="+", help="control JSON files with noise operators")
    r.add_argument("--infidelities", required=True, help="CSV whose last column holds the infidelities")
    r.add_argument("--partition", required=True)
    r.add_argument("--method", choices=("svd", "co"), default="svd")
    r.add_argument("--cutoff", type=float, default=1e-8)
    r.add_argument("--lam", type=float, default=None, help="regularization weight (default: L-curve)")
    r.add_argument("--tikhonov-weight", type=float, default=1.0)
    r.add_argument("--l1-weight", type=float, default=0.0)
    r.add_argument("--samples", type=int, default=None)
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_reconstruct)

    i = sub.add_parser("identify", help="maximum-likelihood Hamiltonian estimation")
    i.add_argument("--experiments", required=True)
    i.add_argument("--data", help="CSV with value and uncertainty as the last two columns")
    i.add_argument("--synthetic-sigma", type=float, default=None,
                   help="generate data from the file's 'truth' with this Gaussian noise")
    i.add_argument("--starts", type=int, default=30)
    i.add_argument("--seed", type=int, required=True)
    i.add_argument("--out", required=True)
    i.set_defaults(func=cmd_identify)

    c = sub.add_parser("scenario", help="build bundled scenario artifacts")
    c.add_argument("action", choices=("build", "list"))
    c.add_argument("name", nargs="?")
    c.add_argument("--params", default=None, help="JSON object, inline or a file path")
    c.add_argument("--out")
    c.set_defaults(func=cmd_scenario)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv = argv
    try:
        args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    except (RuntimeError, FloatingPointError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return 0


if __name__ == "__main__":
    sys.exit(main())
