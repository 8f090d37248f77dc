"""Command-line front end.

    hmfp <command> --config <path> [--input <snapshot>] [--sweep k=v1,v2,...]

Commands: steady, evolve, stability, rearrange, diag.  A sweep fans the
run out over the listed values of one config key, each variant fully
isolated in its own hash-named directory; HMFP_THREADS caps the worker
pool.  Exit codes: 0 success, 1 config or I/O trouble, 2 an iterative
solve failed to converge, 3 the time integrator aborted.
"""

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from .config import load_config
from .errors import ConfigError, ConvergenceError, SolverAbort
from .experiment import (run_diag, run_evolve, run_rearrange, run_stability,
                         run_steady)

_EXIT_CONFIG = 1
_EXIT_NONCONVERGENCE = 2
_EXIT_ABORT = 3


def _worker_count(n_jobs):
    raw = os.environ.get("HMFP_THREADS", "")
    try:
        cap = int(raw) if raw else (os.cpu_count() or 1)
    except ValueError:
        raise ConfigError("HMFP_THREADS must be an integer, got %r" % raw)
    return max(1, min(n_jobs, cap))


def _sweep_configs(cfg, sweep):
    if sweep is None:
        return [cfg]
    key, sep, values = sweep.partition("=")
    if not sep or not values:
        raise ConfigError("--sweep wants key=v1,v2,..., got %r" % sweep)
    return [cfg.with_value(key.strip(), v.strip())
            for v in values.split(",")]


def _dispatch(command, cfg, input_path):
    if command == "steady":
        out, result = run_steady(cfg)
        print("%s: lambda = %.10g, residual = %.3e, %d iterations"
              % (out, result.multipliers.lam, result.fixed_point_residual,
                 result.iterations))
    elif command == "evolve":
        out, result = run_evolve(cfg, input_path)
        print("%s: %d steps to t = %.6g, boundary loss %.3e"
              % (out, result.steps, result.time, result.boundary_loss))
    elif command == "stability":
        out, sup = run_stability(cfg, input_path)
        print("%s: sup orbital distance = %.10g" % (out, sup))
    elif command == "rearrange":
        out, banded = run_rearrange(cfg, input_path)
        print("%s: banded equimeasurability defect = %.10g" % (out, banded))
    elif command == "diag":
        out, rec = run_diag(cfg, input_path)
        print("%s: %s" % (out, rec.to_csv()))
    else:
        raise ConfigError("unknown command %r" % command)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="hmfp",
        description="Ground states, evolution, and stability experiments "
                    "for the mean-field kinetic model.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("steady", "evolve", "stability", "rearrange", "diag"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="config file path")
        p.add_argument("--input", default=None, help="input snapshot path")
        p.add_argument("--sweep", default=None,
                       help="fan out over key=v1,v2,... config variants")

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else _EXIT_CONFIG
        return 0 if code == 0 else _EXIT_CONFIG

    try:
        cfg = load_config(args.config)
        jobs = _sweep_configs(cfg, args.sweep)
        if len(jobs) == 1:
            _dispatch(args.command, jobs[0], args.input)
        else:
            workers = _worker_count(len(jobs))
            with ThreadPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(_dispatch, args.command, job, args.input)
                           for job in jobs]
                for fut in futures:
                    fut.result()
    except ConfigError as exc:
        print("hmfp: %s" % exc, file=sys.stderr)
        return _EXIT_CONFIG
    except ConvergenceError as exc:
        print("hmfp: did not converge: %s" % exc, file=sys.stderr)
        return _EXIT_NONCONVERGENCE
    except SolverAbort as exc:
        print("hmfp: solver aborted: %s" % exc, file=sys.stderr)
        return _EXIT_ABORT
    except OSError as exc:
        print("hmfp: %s" % exc, file=sys.stderr)
        return _EXIT_CONFIG
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
