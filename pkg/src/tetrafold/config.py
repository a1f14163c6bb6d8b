"""Run configuration: a typed schema validated like MkDocs options, read from YAML and CLI flags."""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING, Any, Mapping, Union

import yaml
from mkdocs.config.base import Config
from mkdocs.config.config_options import Choice as MkChoice
from mkdocs.config.config_options import Optional as MkOptional
from mkdocs.config.config_options import SubConfig as MkSubConfig
from mkdocs.config.config_options import Type as MkType

from tetrafold.evolution import DEConfig, TieBreak
from tetrafold.hamiltonian import PenaltyConfig
from tetrafold.interactions import InteractionModel, load_contact_map, load_contact_matrix
from tetrafold.lattice import EncodingScheme, Peptide, TetrafoldError
from tetrafold.loggers import get_logger
from tetrafold.oracle import DEFAULT_ENUMERATION_CAP
from tetrafold.vqe import Entangler

if TYPE_CHECKING:
    from os import PathLike

log = get_logger(__name__)

PathType = Union[str, "PathLike[str]", Path]

_NUMBER = (int, float)


class RunConfigError(TetrafoldError):
    """Invalid run configuration."""

    def __init__(self, messages: list[str]) -> None:
        """Initialize the error.

        Parameters:
            messages: Every problem found.
        """
        self.messages = messages
        super().__init__("Invalid run configuration:\n" + "\n".join(f"  - {message}" for message in messages))


class PenaltyOptions(Config):
    """Penalty overrides; unset weights follow the automatic rule."""

    lambda_back = MkOptional(MkType(_NUMBER))
    lambda_chirality = MkOptional(MkType(_NUMBER))
    lambda_onehot = MkOptional(MkType(_NUMBER))
    lambda_1 = MkOptional(MkType(_NUMBER))
    lambda_2 = MkOptional(MkType(_NUMBER))
    lambda_3 = MkOptional(MkType(_NUMBER))
    lambda_5 = MkOptional(MkType(_NUMBER))
    enforce_audit = MkType(bool, default=True)


class RunConfig(Config):
    """Everything a run needs: the instance, the Hamiltonian and the optimizer."""

    sequence = MkOptional(MkType(str))
    encoding = MkChoice(tuple(scheme.value for scheme in EncodingScheme), default=EncodingScheme.DENSE.value)
    max_l = MkChoice((1, 2), default=1)
    q6_saving = MkOptional(MkType(bool))
    mj_matrix = MkOptional(MkType(str))
    second_shell_matrix = MkOptional(MkType(str))
    contact_map = MkOptional(MkType(str))
    penalties = MkSubConfig(PenaltyOptions, validate=True)
    alpha = MkType(_NUMBER, default=0.05)
    shots = MkType(int, default=1024)
    differential_weight = MkType(_NUMBER, default=0.7)
    crossover = MkType(_NUMBER, default=0.9)
    population = MkOptional(MkType(int))
    layers = MkType(int, default=2)
    generations = MkType(int, default=100)
    seed = MkType(int, default=0)
    entangler = MkChoice(tuple(entangler.value for entangler in Entangler), default=Entangler.RING.value)
    tie_break = MkChoice(tuple(rule.value for rule in TieBreak), default=TieBreak.PARENT.value)
    oracle = MkType(bool, default=False)
    enumeration_cap = MkType(int, default=DEFAULT_ENUMERATION_CAP)
    output_dir = MkType(str, default="tetrafold-run")

    def peptide(self) -> Peptide:
        """The peptide to fold."""
        return Peptide.from_string(self.sequence or "")

    def scheme(self) -> EncodingScheme:
        """The turn encoding."""
        return EncodingScheme(self.encoding)

    def penalty_config(self) -> PenaltyConfig:
        """The penalty overrides."""
        options = self.penalties
        return PenaltyConfig(
            lambda_back=options.lambda_back,
            lambda_chirality=options.lambda_chirality,
            lambda_onehot=options.lambda_onehot,
            lambda_1=options.lambda_1,
            lambda_2=options.lambda_2,
            lambda_3=options.lambda_3,
            lambda_5=options.lambda_5,
            enforce_audit=options.enforce_audit,
        )

    def interaction_model(self) -> InteractionModel:
        """The interaction model: a contact map alone, or a contact matrix with optional overrides."""
        overrides = load_contact_map(self.contact_map) if self.contact_map else {}
        if overrides and not self.mj_matrix:
            return InteractionModel.from_contact_map(overrides, self.max_l)
        first_shell = load_contact_matrix(self.mj_matrix)
        second_shell = load_contact_matrix(self.second_shell_matrix) if self.second_shell_matrix else None
        return InteractionModel(first_shell, second_shell, self.max_l, overrides)

    def de_config(self) -> DEConfig:
        """The optimizer settings."""
        return DEConfig(
            population=self.population,
            differential_weight=float(self.differential_weight),
            crossover=float(self.crossover),
            generations=self.generations,
            seed=self.seed,
            alpha=float(self.alpha),
            shots=self.shots,
            layers=self.layers,
            entangler=Entangler(self.entangler),
            tie_break=TieBreak(self.tie_break),
        )

    def as_dict(self) -> dict[str, Any]:
        """Plain mapping of the validated values, for the run manifest."""
        values = {key: self[key] for key in self}
        values["penalties"] = {key: self.penalties[key] for key in self.penalties}
        return values


def _read_yaml(path: PathType) -> dict[str, Any]:
    try:
        with Path(path).open(encoding="utf-8") as file:
            data = yaml.safe_load(file)
    except yaml.YAMLError as error:
        raise RunConfigError([f"{path}: {error}"]) from error
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise RunConfigError([f"{path}: expected a mapping at the top level"])
    return data


def load_run_config(path: PathType | None = None, overrides: Mapping[str, Any] | None = None) -> RunConfig:
    """Read, merge and validate a run configuration.

    Parameters:
        path: YAML file, if any.
        overrides: Values from command-line flags; `None` values are ignored and the rest win over the file.

    Returns:
        The validated configuration.
    """
    data = _read_yaml(path) if path is not None else {}
    data.update({key: value for key, value in (overrides or {}).items() if value is not None})
    config = RunConfig(config_file_path=str(path) if path is not None else None)
    config.load_dict(data)
    failed, warnings = config.validate()
    messages = [f"{key}: {error}" for key, error in failed]
    messages.extend(f"{key}: {warning}" for key, warning in warnings)
    if not failed and not config.sequence:
        messages.append("sequence: a peptide sequence is required")
    if not messages:
        try:
            config.peptide()
            config.de_config()
            config.de_config().sampling()
        except (TetrafoldError, ValueError) as error:
            messages.append(str(error))
    if messages:
        raise RunConfigError(messages)
    log.debug(f"Loaded run configuration for {config.sequence}")
    return config
