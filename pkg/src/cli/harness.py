"""
Command-line harness: one subcommand per analysis, CSV tables on stdout or ``--out``.

Exit codes: 0 on success, 2 on invalid input (one ``error[CODE]: message`` line on
stderr), 1 on a broken internal invariant or a failed oracle gate.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence

from src import __version__
from src.config.settings import get_settings, log_run_event, new_run_id, run_timestamp
from src.framework.errors import AnalysisError, ErrorCode, InputError, InternalError
from src.framework.parallel import parallel_map
from src.schemas.ensemble_schema import EnsembleSpec
from src.schemas.report_schema import GateReport, GateStamp, RunManifest
from src.tools.csv_tools import build_table, parse_eps_grid, parse_int_list, write_csv
from src.tools.cycle_correction_tools import alpha, gamma
from src.tools.density_evolution_tools import bp_threshold, de_trajectory
from src.tools.ensemble_tools import design_rate, load_ensemble, stability_bound
from src.tools.simulation_tools import estimate_pb
from src.tools.tree_correction_tools import beta

logger = logging.getLogger(__name__)

FIGURE1_GRID = "0:0.99:0.005"
FIGURE1_ITERATIONS = (1, 2, 3, 4, 5, 6, 7, 8, 50)
FIGURE2_BLOCKLENGTHS = "360,720,5760"
FIGURE2_GRID = "0.3:0.7:0.05"
FIGURE2_ITERATIONS = 20

SIM_COLUMNS = [
    "epsilon", "n", "t", "trials", "pb_hat", "stderr", "pb_inf", "scaled_gap", "scaled_stderr", "seed",
]
ALPHA_COLUMNS = ["epsilon", "t", "beta", "gamma", "alpha"]
BETA_COLUMNS = ["epsilon", "t", "E_KK", "sum_VV_term", "sum_CC_term", "beta"]


# --------------------------------------------------------------------------
# Argument parsing
# --------------------------------------------------------------------------

def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}")
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must fit in an unsigned 64-bit integer, got {value}")
    return value


def _non_negative(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {value}")
    return value


def _positive(text: str) -> int:
    value = _non_negative(text)
    if value == 0:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return value


def _add_flags(parser: argparse.ArgumentParser, *flags: str, **defaults: Any) -> None:
    settings = get_settings()
    if "ensemble" in flags:
        parser.add_argument("--ensemble", required=True, help="Ensemble JSON path or shipped ensemble name.")
    if "eps" in flags:
        parser.add_argument(
            "--eps", default=defaults.get("eps", "0.5"), help="Erasure probability A or grid A:B:STEP."
        )
    if "t" in flags:
        parser.add_argument("--t", type=_non_negative, default=defaults.get("t", 10), help="Iterations.")
    if "n" in flags:
        parser.add_argument("--n", default=defaults.get("n", "360"), help="Comma-separated blocklengths.")
    if "trials" in flags:
        parser.add_argument("--trials", type=_positive, default=defaults.get("trials", 10_000))
    if "seed" in flags:
        parser.add_argument("--seed", type=_seed, default=0)
    if "workers" in flags:
        parser.add_argument(
            "--workers", type=_non_negative, default=settings.workers, help="Worker processes (0 = all cores)."
        )
    if "trust-gamma" in flags:
        parser.add_argument(
            "--trust-gamma", action="store_true", help="Emit gamma without a passing oracle gate."
        )
    parser.add_argument("--out", default=None, help="Output path (stdout when omitted).")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ldpc-fss",
        description="Finite-length correction analysis of BP decoding for LDPC ensembles on the BEC.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_flags(sub.add_parser("de", help="Density-evolution trajectory."), "ensemble", "eps", "t")
    _add_flags(sub.add_parser("threshold", help="BP threshold and stability bound."), "ensemble")
    _add_flags(sub.add_parser("beta", help="Tree part of the 1/n coefficient."), "ensemble", "eps", "t")
    _add_flags(
        sub.add_parser("gamma", help="Single-cycle part of the 1/n coefficient."),
        "ensemble", "eps", "t", "trust-gamma",
    )
    _add_flags(
        sub.add_parser("alpha", help="alpha = beta + gamma."), "ensemble", "eps", "t", "trust-gamma"
    )
    _add_flags(
        sub.add_parser("simulate", help="Monte Carlo estimate of the finite-n bit erasure rate."),
        "ensemble", "eps", "t", "n", "trials", "seed", "workers",
    )
    _add_flags(
        sub.add_parser("oracle-check", help="Run the oracle gate and write a JSON report."),
        "ensemble", "eps", "t", "n", "trials", "seed", "workers",
        eps="0.1:0.9:0.1", t=2, n="", trials=2000,
    )
    _add_flags(
        sub.add_parser("figure1", help="alpha over an epsilon sweep at t = 1..8 and 50."),
        "ensemble", "eps", "workers", "trust-gamma", eps=FIGURE1_GRID,
    )
    _add_flags(
        sub.add_parser("figure2", help="Scaled simulation gaps with the alpha reference column."),
        "ensemble", "eps", "t", "n", "trials", "seed", "workers", "trust-gamma",
        eps=FIGURE2_GRID, t=FIGURE2_ITERATIONS, n=FIGURE2_BLOCKLENGTHS,
    )
    return parser


# --------------------------------------------------------------------------
# Gamma trust
# --------------------------------------------------------------------------

def gate_passed() -> bool:
    """True when a passing gate stamp exists for this tool version."""
    path = Path(get_settings().gate_stamp_path)
    if not path.exists():
        return False
    try:
        stamp = GateStamp.model_validate_json(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        logger.warning("[cli] Ignoring unreadable gate stamp %s: %s", path, exc)
        return False
    return stamp.passed and stamp.tool_version == __version__


def _require_gamma_trust(args: argparse.Namespace) -> None:
    if args.trust_gamma:
        logger.warning("[cli] --trust-gamma: emitting gamma without a passing oracle gate.")
        return
    if not gate_passed():
        raise InputError(
            ErrorCode.GAMMA_NOT_TRUSTED,
            f"gamma has not passed the oracle gate for version {__version__}; "
            "run oracle-check or pass --trust-gamma.",
        )


def write_gate_stamp(report: GateReport) -> Path:
    path = Path(get_settings().gate_stamp_path)
    stamp = GateStamp(
        passed=report.passed, tool_version=report.tool_version, ensemble=report.ensemble, timestamp=run_timestamp()
    )
    path.write_text(stamp.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info("[cli] Gate stamp written to %s (passed=%s)", path, report.passed)
    return path


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------

class _AlphaTask(NamedTuple):
    spec: EnsembleSpec
    epsilon: float
    iterations: tuple


def _alpha_rows(task: _AlphaTask) -> List[Dict[str, Any]]:
    rows = []
    for t in task.iterations:
        parts = alpha(task.spec, task.epsilon, t)
        rows.append({name: getattr(parts, name) for name in ALPHA_COLUMNS})
    return rows


def _manifest(args: argparse.Namespace, parameters: Dict[str, Any]) -> RunManifest:
    return RunManifest(
        subcommand=args.command,
        ensemble_path=args.ensemble,
        parameters=parameters,
        seed=getattr(args, "seed", None),
        output_path=args.out,
        tool_version=__version__,
        timestamp=run_timestamp(),
    )


def _cmd_de(args: argparse.Namespace, spec: EnsembleSpec) -> int:
    rows = []
    for eps in parse_eps_grid(args.eps):
        traj = de_trajectory(spec, eps, args.t)
        for tau in range(traj.T + 1):
            rows.append(
                {"epsilon": eps, "t": tau, "P": traj.P[tau], "Q": traj.Q[tau], "pb_inf": traj.Pb_inf[tau]}
            )
    frame = build_table(rows, ["epsilon", "t", "P", "Q", "pb_inf"])
    write_csv(frame, _manifest(args, {"eps": args.eps, "t": args.t}), args.out)
    return 0


def _cmd_threshold(args: argparse.Namespace, spec: EnsembleSpec) -> int:
    row = {
        "ensemble": spec.name,
        "threshold": bp_threshold(spec),
        "stability_bound": stability_bound(spec),
        "design_rate": design_rate(spec),
    }
    frame = build_table([row], list(row))
    write_csv(frame, _manifest(args, {"tol": 1e-4}), args.out)
    return 0


def _cmd_beta(args: argparse.Namespace, spec: EnsembleSpec) -> int:
    rows = []
    for eps in parse_eps_grid(args.eps):
        state = beta(spec, eps, args.t)
        rows.append(
            {
                "epsilon": eps,
                "t": args.t,
                "E_KK": state.E_KK,
                "sum_VV_term": state.sum_VV_term,
                "sum_CC_term": state.sum_CC_term,
                "beta": state.beta,
            }
        )
    frame = build_table(rows, BETA_COLUMNS)
    write_csv(frame, _manifest(args, {"eps": args.eps, "t": args.t}), args.out)
    return 0


def _cmd_gamma(args: argparse.Namespace, spec: EnsembleSpec) -> int:
    _require_gamma_trust(args)
    rows = []
    for eps in parse_eps_grid(args.eps):
        state = gamma(spec, eps, args.t)
        rows.append(
            {
                "epsilon": eps,
                "t": args.t,
                "gamma": state.gamma,
                "sum_Fv": state.sum_Fv,
                "sum_Fc": state.sum_Fc,
                "sum_Fr": state.sum_Fr,
            }
        )
    frame = build_table(rows, ["epsilon", "t", "gamma", "sum_Fv", "sum_Fc", "sum_Fr"])
    write_csv(frame, _manifest(args, {"eps": args.eps, "t": args.t, "trust_gamma": args.trust_gamma}), args.out)
    return 0


def _cmd_alpha(args: argparse.Namespace, spec: EnsembleSpec) -> int:
    _require_gamma_trust(args)
    rows = []
    for eps in parse_eps_grid(args.eps):
        rows.extend(_alpha_rows(_AlphaTask(spec, eps, (args.t,))))
    frame = build_table(rows, ALPHA_COLUMNS)
    write_csv(frame, _manifest(args, {"eps": args.eps, "t": args.t, "trust_gamma": args.trust_gamma}), args.out)
    return 0


def _simulate_rows(args: argparse.Namespace, spec: EnsembleSpec) -> List[Dict[str, Any]]:
    rows = []
    for n in parse_int_list(args.n, "--n"):
        for eps in parse_eps_grid(args.eps):
            estimate = estimate_pb(
                spec, n, eps, args.t, args.trials, args.seed, workers=args.workers, progress=args.out is not None
            )
            rows.append(estimate.model_dump())
    return rows


def _cmd_simulate(args: argparse.Namespace, spec: EnsembleSpec) -> int:
    frame = build_table(_simulate_rows(args, spec), SIM_COLUMNS)
    parameters = {"eps": args.eps, "n": args.n, "t": args.t, "trials": args.trials}
    write_csv(frame, _manifest(args, parameters), args.out)
    return 0


def _cmd_figure1(args: argparse.Namespace, spec: EnsembleSpec) -> int:
    _require_gamma_trust(args)
    tasks = [_AlphaTask(spec, eps, FIGURE1_ITERATIONS) for eps in parse_eps_grid(args.eps)]
    chunks = parallel_map(_alpha_rows, tasks, args.workers, desc="figure1")
    rows = [row for chunk in chunks for row in chunk]
    frame = build_table(rows, ALPHA_COLUMNS)
    parameters = {"eps": args.eps, "t": ",".join(str(t) for t in FIGURE1_ITERATIONS), "trust_gamma": args.trust_gamma}
    write_csv(frame, _manifest(args, parameters), args.out)
    return 0


def _cmd_figure2(args: argparse.Namespace, spec: EnsembleSpec) -> int:
    _require_gamma_trust(args)
    rows = _simulate_rows(args, spec)
    reference = {eps: alpha(spec, eps, args.t).alpha for eps in parse_eps_grid(args.eps)}
    for row in rows:
        row["alpha"] = reference[row["epsilon"]]
    frame = build_table(rows, SIM_COLUMNS + ["alpha"])
    parameters = {
        "eps": args.eps, "n": args.n, "t": args.t, "trials": args.trials, "trust_gamma": args.trust_gamma,
    }
    write_csv(frame, _manifest(args, parameters), args.out)
    return 0


def _cmd_oracle_check(args: argparse.Namespace, spec: EnsembleSpec) -> int:
    from src.checks import initialize_state
    from src.graph import run_oracle_gate

    state = initialize_state(
        spec,
        args.t,
        ensemble_label=args.ensemble,
        epsilons=parse_eps_grid(args.eps),
        gamma_n_list=parse_int_list(args.n, "--n") if args.n else None,
        gamma_graphs=args.trials,
        seed=args.seed,
        workers=args.workers,
    )
    report = run_oracle_gate(state)
    text = report.model_dump_json(indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        logger.info("[cli] Gate report written to %s", args.out)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()
    write_gate_stamp(report)
    return 0 if report.passed else 1


COMMANDS: Dict[str, Callable[[argparse.Namespace, EnsembleSpec], int]] = {
    "de": _cmd_de,
    "threshold": _cmd_threshold,
    "beta": _cmd_beta,
    "gamma": _cmd_gamma,
    "alpha": _cmd_alpha,
    "simulate": _cmd_simulate,
    "oracle-check": _cmd_oracle_check,
    "figure1": _cmd_figure1,
    "figure2": _cmd_figure2,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv``, run one subcommand and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    run_id = new_run_id()
    params = {key: value for key, value in vars(args).items() if key != "command"}
    log_run_event("start", params, args.command, run_id)
    started = time.perf_counter()

    try:
        spec = load_ensemble(args.ensemble, exact=args.command == "oracle-check")
        code = COMMANDS[args.command](args, spec)
    except InputError as exc:
        sys.stderr.write(f"error[{exc.code.value}]: {exc.args[0]}\n")
        log_run_event("error", {"code": exc.code.value, "message": exc.args[0]}, args.command, run_id)
        return 2
    except (InternalError, AssertionError) as exc:
        code_name = exc.code.value if isinstance(exc, AnalysisError) else "ASSERTION"
        message = exc.args[0] if exc.args else repr(exc)
        logger.exception("[cli] Internal failure in %s", args.command)
        sys.stderr.write(f"error[{code_name}]: {message}\n")
        log_run_event("error", {"code": code_name, "message": str(message)}, args.command, run_id)
        return 1

    elapsed = time.perf_counter() - started
    log_run_event("finish", {"exit_code": code, "seconds": round(elapsed, 3)}, args.command, run_id)
    logger.info("[cli] %s finished in %.2fs (exit %d)", args.command, elapsed, code)
    return code


__all__ = ["run", "build_parser", "gate_passed", "write_gate_stamp", "COMMANDS"]
