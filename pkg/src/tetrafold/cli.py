"""Module that contains the command line application."""

# Why does this file exist, and why not put this in `__main__`?
#
# You might be tempted to import things from `__main__` later,
# but that will cause problems: the code will get executed twice:
#
# - When you run `python -m tetrafold` python will execute
#   `__main__.py` as a script. That means there won't be any
#   `tetrafold.__main__` in `sys.modules`.
# - When you import `__main__` it will get executed again (as a module) because
#   there's no `tetrafold.__main__` in `sys.modules`.

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any

from tetrafold import debug
from tetrafold.artifacts import SPECTRUM_JSON, write_fold_result, write_hamiltonian, write_report, write_spectrum, write_xyz
from tetrafold.config import RunConfig, load_run_config
from tetrafold.evolution import TieBreak, run
from tetrafold.hamiltonian import assemble
from tetrafold.lattice import EncodingScheme, TetrafoldError
from tetrafold.loggers import get_logger
from tetrafold.oracle import enumerate_spectrum, spectrum_of_layout
from tetrafold.vqe import Entangler

log = get_logger(__name__)


class _DebugInfo(argparse.Action):
    def __init__(self, nargs: int | str | None = 0, **kwargs: Any) -> None:
        super().__init__(nargs=nargs, **kwargs)

    def __call__(self, *args: Any, **kwargs: Any) -> None:  # noqa: ARG002
        debug.print_debug_info()
        sys.exit(0)


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("-c", "--config", dest="config_file", metavar="FILE", help="YAML run configuration.")
    parser.add_argument("-s", "--sequence", help="Peptide sequence, side chains written as X[Y].")
    parser.add_argument("--encoding", choices=[scheme.value for scheme in EncodingScheme], help="Turn encoding.")
    parser.add_argument("--max-l", dest="max_l", type=int, choices=(1, 2), help="Highest interaction order.")
    parser.add_argument(
        "--q6-saving",
        dest="q6_saving",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="Pin the second bit of turn 3 (dense only). Automatic by default.",
    )
    parser.add_argument("--mj-matrix", dest="mj_matrix", metavar="CSV", help="Contact energy matrix.")
    parser.add_argument("--second-shell-matrix", dest="second_shell_matrix", metavar="CSV", help="2-NN energy matrix.")
    parser.add_argument("--contact-map", dest="contact_map", metavar="CSV", help="Per-pair energies (i,j,l,epsilon).")
    parser.add_argument("--alpha", type=float, help="CVaR tail fraction.")
    parser.add_argument("--shots", type=int, help="Shots per evaluation.")
    parser.add_argument("-F", "--differential-weight", dest="differential_weight", type=float, help="DE weight F.")
    parser.add_argument("--crossover", type=float, help="DE crossover rate CR.")
    parser.add_argument("--population", type=int, help="Population size (default 5mn).")
    parser.add_argument("--layers", type=int, help="Ansatz depth m.")
    parser.add_argument("--generations", type=int, help="Number of generations.")
    parser.add_argument("--seed", type=int, help="Master seed.")
    parser.add_argument("--entangler", choices=[entangler.value for entangler in Entangler], help="CNOT pattern.")
    parser.add_argument(
        "--tie-break",
        dest="tie_break",
        choices=[rule.value for rule in TieBreak],
        help="Survivor of a CVaR tie: the parent, or the one with more shots in the tied tail.",
    )
    parser.add_argument(
        "--oracle",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="Enumerate the spectrum to track ground-state probabilities.",
    )
    parser.add_argument("--enumeration-cap", dest="enumeration_cap", type=int, help="Largest turn space enumerated.")
    parser.add_argument("-o", "--output-dir", dest="output_dir", metavar="DIR", help="Output directory.")


_RUN_OPTIONS = (
    "sequence",
    "encoding",
    "max_l",
    "q6_saving",
    "mj_matrix",
    "second_shell_matrix",
    "contact_map",
    "alpha",
    "shots",
    "differential_weight",
    "crossover",
    "population",
    "layers",
    "generations",
    "seed",
    "entangler",
    "tie_break",
    "oracle",
    "enumeration_cap",
    "output_dir",
)


def get_parser() -> argparse.ArgumentParser:
    """Return the CLI argument parser.

    Returns:
        An argparse parser.
    """
    parser = argparse.ArgumentParser(prog="tetrafold", description="Fold peptides on the tetrahedral lattice.")
    parser.add_argument("-V", "--version", action="version", version=f"%(prog)s {debug.get_version()}")
    parser.add_argument("--debug-info", action=_DebugInfo, help="Print debug information.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="Log more (repeatable).")
    parser.add_argument("-q", "--quiet", action="store_true", help="Only log errors.")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    build = subparsers.add_parser("build", help="Assemble the Hamiltonian and export its Pauli terms.")
    _add_run_options(build)
    enumerate_cmd = subparsers.add_parser("enumerate", help="Enumerate the exact spectrum.")
    _add_run_options(enumerate_cmd)
    fold = subparsers.add_parser("fold", help="Minimize the CVaR by differential evolution.")
    _add_run_options(fold)
    report = subparsers.add_parser("report", help="Turn a fold run into plot-ready CSV files.")
    report.add_argument("directory", help="Directory of a fold run.")
    return parser


def _load(opts: argparse.Namespace) -> RunConfig:
    overrides = {name: getattr(opts, name) for name in _RUN_OPTIONS}
    return load_run_config(opts.config_file, overrides)


def _print(data: dict[str, Any]) -> None:
    print(json.dumps(data, indent=2, sort_keys=True))


def cmd_build(config: RunConfig) -> int:
    """Assemble the Hamiltonian, export it and print its size.

    Parameters:
        config: The run configuration.

    Returns:
        An exit code.
    """
    hamiltonian = assemble(
        config.peptide(),
        config.scheme(),
        config.interaction_model(),
        config.penalty_config(),
        q6_saving=config.q6_saving,
    )
    write_hamiltonian(hamiltonian, config.output_dir)
    report = hamiltonian.resources()
    _print(
        {
            "n_conf": hamiltonian.layout.n_conf,
            "n_int": hamiltonian.layout.n_int,
            "n": hamiltonian.n,
            "term_count": report.term_count,
            "operator_count": report.operator_count,
            "max_locality": report.max_locality,
        },
    )
    return 0


def cmd_enumerate(config: RunConfig) -> int:
    """Enumerate the spectrum and write it with one geometry per level.

    Parameters:
        config: The run configuration.

    Returns:
        An exit code.
    """
    peptide = config.peptide()
    spectrum = enumerate_spectrum(
        peptide,
        config.scheme(),
        config.interaction_model(),
        q6_saving=config.q6_saving,
        cap=config.enumeration_cap,
    )
    output = Path(config.output_dir)
    write_spectrum(spectrum, output / SPECTRUM_JSON)
    for rank, entry in enumerate(spectrum):
        comment = f"{peptide} energy={entry.energy:.6f} contacts={entry.contact_bits or '-'}"
        write_xyz(entry.representative, peptide, output / "conformations" / f"level_{rank:03d}.xyz", comment)
    ground = spectrum.ground
    _print(
        {
            "levels": len(spectrum),
            "conformations": spectrum.total,
            "ground_energy": ground.energy,
            "ground_degeneracy": ground.degeneracy,
            "ground_contacts": ground.contact_bits,
        },
    )
    return 0


def cmd_fold(config: RunConfig) -> int:
    """Run the optimizer and write the result files.

    Parameters:
        config: The run configuration.

    Returns:
        An exit code.
    """
    hamiltonian = assemble(
        config.peptide(),
        config.scheme(),
        config.interaction_model(),
        config.penalty_config(),
        q6_saving=config.q6_saving,
    )
    spectrum = None
    if config.oracle:
        spectrum = spectrum_of_layout(hamiltonian.layout, hamiltonian.model, config.enumeration_cap)
    result = run(hamiltonian, config.de_config(), spectrum=spectrum)
    write_fold_result(result, config.output_dir, config.as_dict())
    final = result.trajectory[-1]
    _print(
        {
            "best_cvar": final.best_cvar,
            "best_bitstring": result.best_bitstring,
            "best_energy": result.best_energy,
            "max_P0": final.max_p0,
        },
    )
    return 0


def cmd_report(directory: str) -> int:
    """Write the report CSVs of a fold run.

    Parameters:
        directory: The run directory.

    Returns:
        An exit code.
    """
    for path in write_report(directory):
        print(path)
    return 0


def _configure_logging(verbose: int, quiet: bool) -> None:  # noqa: FBT001
    level = logging.ERROR if quiet else logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)-8s %(message)s")


def main(args: list[str] | None = None) -> int:
    """Run the main program.

    This function is executed when you type `tetrafold` or `python -m tetrafold`.

    Parameters:
        args: Arguments passed from the command line.

    Returns:
        An exit code.
    """
    parser = get_parser()
    opts = parser.parse_args(args=args)
    _configure_logging(opts.verbose, opts.quiet)
    try:
        if opts.command == "report":
            return cmd_report(opts.directory)
        config = _load(opts)
        commands = {"build": cmd_build, "enumerate": cmd_enumerate, "fold": cmd_fold}
        return commands[opts.command](config)
    except (TetrafoldError, OSError, ValueError) as error:
        log.error(str(error))  # noqa: TRY400
        return 1
