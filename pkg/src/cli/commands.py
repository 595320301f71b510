"""
Command-line entry point: channel, bepre, capacity-sweep, ser and complexity.

Exit codes: 0 success, 1 configuration error, 2 numerical failure, 3 I/O error.
"""
import argparse
import logging
import sys
from typing import Callable, Dict, List, Optional

from dotenv import load_dotenv

from src.link_model.channel import channel_matrix
from src.link_model.exceptions import LinkModelError
from src.monitoring.metrics import update_equivalence_residual, write_metrics
from src.schemes.bepre import bepre_transforms, verify_transforms
from src.schemes.complexity import complexity_table
from src.schemes.detection import ConstellationFactory

from .config_parser import parse_config
from .models import ConfigError, SweepSpec
from .sweep import SweepResult, build_metadata, run_ser_sweep, run_sweep
from .writers import emit_channel, emit_csv, matrix_record, write_json, write_sidecar

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


def _single_point(spec: SweepSpec, command: str) -> None:
    if spec.axes:
        logger.warning("%s evaluates the base geometry only; sweep axes are ignored", command)


def _square_only(spec: SweepSpec, command: str) -> None:
    if spec.geometry.n_rx != spec.geometry.n_tx:
        raise ConfigError(
            "n_rx_elements", spec.key_lines.get("n_rx_elements"),
            f"only the channel subcommand supports N != M ({command} needs equal element counts)"
        )


def run_channel(spec: SweepSpec, args: argparse.Namespace) -> None:
    _single_point(spec, "channel")
    channel = channel_matrix(spec.geometry)
    emit_channel(channel, args.out, build_metadata(spec, "channel"))


def run_bepre(spec: SweepSpec, args: argparse.Namespace) -> None:
    _square_only(spec, "bepre")
    _single_point(spec, "bepre")
    channel = channel_matrix(spec.geometry)
    transforms = bepre_transforms(channel)
    report = verify_transforms(channel, transforms)
    update_equivalence_residual(report.equivalence_residual)
    payload = {
        "channel": matrix_record(channel),
        "beamform": matrix_record(transforms.beamform),
        "predetect": matrix_record(transforms.predetect),
        "circulant": matrix_record(transforms.circulant),
        "verification": report.model_dump(by_alias=True),
    }
    write_json(args.out, payload)
    write_sidecar(args.out, build_metadata(spec, "bepre"))
    logger.info("Wrote BePre transforms to %s (equivalence residual %.2e)", args.out, report.equivalence_residual)


def run_capacity_sweep(spec: SweepSpec, args: argparse.Namespace) -> None:
    _square_only(spec, "capacity-sweep")
    result = run_sweep(spec, linear_gamma=args.linear_gamma)
    emit_csv(result, args.out)


def run_ser(spec: SweepSpec, args: argparse.Namespace) -> None:
    _square_only(spec, "ser")
    if spec.trials < 1:
        raise ConfigError("trials", spec.key_lines.get("trials"), "the ser subcommand needs trials >= 1")
    emit_csv(run_ser_sweep(spec), args.out)


def run_complexity(spec: SweepSpec, args: argparse.Namespace) -> None:
    """Operation counts for N over the n_elements axis, or 1..n_elements."""
    n_axis = [axis for axis in spec.axes if axis.param == "n_elements"]
    n_values = n_axis[0].values() if n_axis else list(range(1, spec.n_elements + 1))
    xi = ConstellationFactory.create(spec.constellation).size
    frame = complexity_table(n_values, xi)
    metadata = build_metadata(spec, "complexity")
    metadata["columns"] = list(frame.columns)
    metadata["n_values"] = n_values
    metadata["xi"] = xi
    emit_csv(SweepResult(frame=frame, metadata=metadata), args.out)


COMMANDS: Dict[str, Callable[[SweepSpec, argparse.Namespace], None]] = {
    "channel": run_channel,
    "bepre": run_bepre,
    "capacity-sweep": run_capacity_sweep,
    "ser": run_ser,
    "complexity": run_complexity,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="Path to the key = value experiment config")
    common.add_argument("--out", required=True, help="Output path (a .meta.json sidecar is written next to it)")
    common.add_argument(
        "--strict-eq17", "--linear-gamma", dest="linear_gamma", action="store_true",
        help="Also report BePre spectrum efficiency with the linear singular value"
    )
    common.add_argument(
        "--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Root log level"
    )
    common.add_argument("--metrics-out", default=None, help="Write Prometheus metrics to this textfile")

    parser = argparse.ArgumentParser(
        prog="oam-link",
        description="Misaligned-UCA OAM link simulator with joint beamforming and pre-detection"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    helps = {
        "channel": "Dump the channel matrix H",
        "bepre": "Dump the BePre transforms and their verification report",
        "capacity-sweep": "Sweep spectrum efficiency with and without BePre",
        "ser": "Monte-Carlo symbol error rate with and without BePre",
        "complexity": "Operation counts of joint and per-mode ML detection",
    }
    for name, text in helps.items():
        subparsers.add_parser(name, parents=[common], help=text)
    return parser


def _read_config(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as handle:
            return handle.read()
    except OSError as e:
        raise OSError(e.errno, f"Cannot read config: {e.strerror}", path) from e


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one subcommand.

    Args:
        argv: Arguments without the program name (sys.argv[1:] when omitted)

    Returns:
        int: Process exit code
    """
    load_dotenv()
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        # usage errors count as configuration errors
        return EXIT_OK if e.code == 0 else EXIT_CONFIG
    logging.getLogger().setLevel(args.log_level)

    try:
        spec = parse_config(_read_config(args.config))
        COMMANDS[args.command](spec, args)
        if args.metrics_out:
            write_metrics(args.metrics_out)
    except ConfigError as e:
        logger.error("Configuration error: %s", e)
        return EXIT_CONFIG
    except LinkModelError as e:
        logger.error("Numerical failure: %s", e)
        return EXIT_NUMERICAL
    except OSError as e:
        logger.error("I/O error: %s", e)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
