"""Files written and read by the command line: Hamiltonians, spectra, geometries, run results, reports."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import TYPE_CHECKING, Any, Mapping, Union

import numpy as np
import pandas as pd

from tetrafold.debug import get_debug_info, get_version
from tetrafold.evolution import GenerationRecord, HistogramBin
from tetrafold.lattice import BOND_SQUARED, EncodingScheme, Peptide, TetrafoldError, TurnSequence, build_layout, grow
from tetrafold.loggers import get_logger
from tetrafold.oracle import Spectrum, SpectrumEntry
from tetrafold.polynomial import PauliHamiltonian

if TYPE_CHECKING:
    from os import PathLike

    from tetrafold.evolution import FoldResult
    from tetrafold.hamiltonian import FoldingHamiltonian
    from tetrafold.lattice import Conformation

log = get_logger(__name__)

PathType = Union[str, "PathLike[str]", Path]

HAMILTONIAN_JSON = "hamiltonian.json"
HAMILTONIAN_TEXT = "hamiltonian.txt"
SPECTRUM_JSON = "spectrum.json"
TRAJECTORY_CSV = "trajectory.csv"
HISTOGRAM_JSON = "histogram.json"
BEST_FOLD_XYZ = "best_fold.xyz"
MANIFEST_JSON = "manifest.json"
ENERGY_HISTOGRAM_CSV = "energy_histogram.csv"
ENERGY_VS_GENERATION_CSV = "energy_vs_generation.csv"
GROUND_PROBABILITY_CSV = "ground_probability_vs_generation.csv"

TRAJECTORY_COLUMNS = ("generation", "mean_cvar", "best_cvar", "mean_P0", "max_P0")


class ArtifactError(TetrafoldError):
    """Missing or corrupt result file."""


def _dump_json(data: Any, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _load_json(path: Path) -> Any:
    if not path.is_file():
        raise ArtifactError(f"Missing file: {path}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as error:
        raise ArtifactError(f"Corrupt JSON in {path}: {error}") from error


def _layout_metadata(hamiltonian: FoldingHamiltonian) -> dict[str, Any]:
    layout = hamiltonian.layout
    return {
        "sequence": str(layout.peptide),
        "encoding": layout.scheme.value,
        "max_l": layout.max_l,
        "q6_saving": layout.q6_saving,
        "n_conf": layout.n_conf,
        "n_int": layout.n_int,
        "n": layout.n,
        "contacts": [str(contact) for contact in layout.contacts],
    }


def write_hamiltonian(hamiltonian: FoldingHamiltonian, directory: PathType) -> list[Path]:
    """Export a Hamiltonian as JSON Pauli records plus a plain-text listing.

    Parameters:
        hamiltonian: The Hamiltonian.
        directory: Output directory.

    Returns:
        The written paths.
    """
    directory = Path(directory)
    report = hamiltonian.resources()
    data = {
        **_layout_metadata(hamiltonian),
        "term_count": report.term_count,
        "operator_count": report.operator_count,
        "max_locality": report.max_locality,
        "locality_histogram": {str(k): v for k, v in report.locality_histogram.items()},
        "penalties": {
            "lambda_back": hamiltonian.weights.back,
            "lambda_chirality": hamiltonian.weights.chirality,
            "lambda_onehot": hamiltonian.weights.onehot,
            "lambda_1": {str(c): w for c, w in hamiltonian.weights.first_shell.items()},
            "lambda_2": hamiltonian.weights.second,
            "lambda_3": hamiltonian.weights.third,
            "lambda_5": hamiltonian.weights.fifth,
            "audit_passed": hamiltonian.audit.passed,
        },
        "terms": hamiltonian.pauli.to_records(),
    }
    json_path = directory / HAMILTONIAN_JSON
    text_path = directory / HAMILTONIAN_TEXT
    _dump_json(data, json_path)
    text_path.write_text(hamiltonian.pauli.dump(), encoding="utf-8")
    log.info(f"Wrote {report.term_count} Pauli strings to {json_path}")
    return [json_path, text_path]


def read_hamiltonian(path: PathType) -> tuple[dict[str, Any], PauliHamiltonian]:
    """Read back an exported Hamiltonian.

    Parameters:
        path: The JSON file.

    Returns:
        The metadata and the Pauli terms.
    """
    data = _load_json(Path(path))
    try:
        terms = PauliHamiltonian.from_records(data.pop("terms"))
    except (KeyError, TypeError, ValueError) as error:
        raise ArtifactError(f"Corrupt Hamiltonian in {path}: {error}") from error
    return data, terms


def write_spectrum(spectrum: Spectrum, path: PathType) -> Path:
    """Export a spectrum as JSON, one object per level.

    Parameters:
        spectrum: The spectrum.
        path: Output file.

    Returns:
        The written path.
    """
    layout = spectrum.layout
    data = {
        "sequence": str(layout.peptide),
        "encoding": layout.scheme.value,
        "max_l": layout.max_l,
        "q6_saving": layout.q6_saving,
        "contacts": [str(contact) for contact in layout.contacts],
        "levels": [
            {
                "energy": entry.energy,
                "degeneracy": entry.degeneracy,
                "distinct": entry.distinct,
                "contact_bits": entry.contact_bits,
                "contacts": [list(contact) for contact in entry.contact_set],
                "self_avoiding": entry.self_avoiding,
                "main_turns": list(entry.representative.turns.main),
                "side_turns": [-1 if axis is None else axis for axis in entry.representative.turns.side],
            }
            for entry in spectrum
        ],
    }
    path = Path(path)
    _dump_json(data, path)
    log.info(f"Wrote {len(spectrum)} levels to {path}")
    return path


def read_spectrum(path: PathType) -> Spectrum:
    """Rebuild a spectrum from its JSON export.

    Parameters:
        path: The JSON file.

    Returns:
        The spectrum.
    """
    data = _load_json(Path(path))
    try:
        layout = build_layout(
            Peptide.from_string(data["sequence"]),
            EncodingScheme(data["encoding"]),
            data["max_l"],
            data["q6_saving"],
        )
        contacts = {str(contact): contact for contact in layout.contacts}
        entries = []
        for level in data["levels"]:
            side = tuple(None if axis == -1 else axis for axis in level["side_turns"])
            turns = TurnSequence(tuple(level["main_turns"]), side)
            bits = level["contact_bits"]
            entries.append(
                SpectrumEntry(
                    energy=float(level["energy"]),
                    degeneracy=int(level["degeneracy"]),
                    representative=grow(turns),
                    contacts=tuple(contacts[label] for label, bit in zip(contacts, bits) if bit == "1"),
                    contact_bits=bits,
                    self_avoiding=bool(level["self_avoiding"]),
                    distinct=int(level["distinct"]),
                ),
            )
    except (KeyError, TypeError, ValueError, TetrafoldError) as error:
        raise ArtifactError(f"Corrupt spectrum in {path}: {error}") from error
    return Spectrum(layout, tuple(entries))


def format_xyz(conformation: Conformation, peptide: Peptide, comment: str = "") -> str:
    """Render a conformation as XYZ text in bond-length units.

    Parameters:
        conformation: The conformation.
        peptide: The peptide, for species labels.
        comment: Second line of the file.

    Returns:
        The XYZ text.
    """
    lines = [str(len(conformation.beads)), comment.replace("\n", " ")]
    coordinates = conformation.coordinates / math.sqrt(BOND_SQUARED)
    for bead, (x, y, z) in zip(conformation.beads, coordinates.tolist()):
        lines.append(f"{peptide.species(bead)} {x:.6f} {y:.6f} {z:.6f}")
    return "\n".join(lines) + "\n"


def write_xyz(conformation: Conformation, peptide: Peptide, path: PathType, comment: str = "") -> Path:
    """Write a conformation as an XYZ file.

    Parameters:
        conformation: The conformation.
        peptide: The peptide.
        path: Output file.
        comment: Second line of the file.

    Returns:
        The written path.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_xyz(conformation, peptide, comment), encoding="utf-8")
    return path


def read_xyz(path: PathType) -> tuple[list[str], np.ndarray]:
    """Read an XYZ file.

    Parameters:
        path: The file.

    Returns:
        Species labels and an `(N, 3)` coordinate array.
    """
    path = Path(path)
    if not path.is_file():
        raise ArtifactError(f"Missing file: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    try:
        count = int(lines[0])
        rows = [line.split() for line in lines[2 : 2 + count]]
        labels = [row[0] for row in rows]
        coordinates = np.array([[float(v) for v in row[1:4]] for row in rows])
    except (IndexError, ValueError) as error:
        raise ArtifactError(f"Corrupt XYZ file {path}: {error}") from error
    return labels, coordinates


def write_trajectory(records: list[GenerationRecord], path: PathType) -> Path:
    """Write per-generation statistics as CSV. `P0` columns stay empty without an oracle.

    Parameters:
        records: The records.
        path: Output file.

    Returns:
        The written path.
    """
    frame = pd.DataFrame(
        [(r.generation, r.mean_cvar, r.best_cvar, r.mean_p0, r.max_p0) for r in records],
        columns=list(TRAJECTORY_COLUMNS),
    )
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.12g")
    return path


def _optional(value: Any) -> float | None:
    return None if pd.isna(value) else float(value)


def read_trajectory(path: PathType) -> list[GenerationRecord]:
    """Read per-generation statistics.

    Parameters:
        path: The CSV file.

    Returns:
        The records.
    """
    path = Path(path)
    if not path.is_file():
        raise ArtifactError(f"Missing file: {path}")
    try:
        frame = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as error:
        raise ArtifactError(f"Corrupt trajectory in {path}: {error}") from error
    missing = set(TRAJECTORY_COLUMNS) - set(frame.columns)
    if missing:
        raise ArtifactError(f"Corrupt trajectory in {path}: missing columns {sorted(missing)}")
    return [
        GenerationRecord(
            int(row.generation),
            float(row.mean_cvar),
            float(row.best_cvar),
            _optional(row.mean_P0),
            _optional(row.max_P0),
        )
        for row in frame.itertuples(index=False)
    ]


def write_histogram(histogram: Mapping[str, HistogramBin], path: PathType) -> Path:
    """Write the contact-bitstring histogram as JSON.

    Parameters:
        histogram: Bins keyed by contact bitstring.
        path: Output file.

    Returns:
        The written path.
    """
    data = {
        key: {"shots": b.shots, "frequency": b.frequency, "lowest_energy": b.lowest_energy}
        for key, b in histogram.items()
    }
    path = Path(path)
    _dump_json(data, path)
    return path


def read_histogram(path: PathType) -> dict[str, HistogramBin]:
    """Read a contact-bitstring histogram.

    Parameters:
        path: The JSON file.

    Returns:
        Bins keyed by contact bitstring.
    """
    data = _load_json(Path(path))
    try:
        return {
            key: HistogramBin(int(b["shots"]), float(b["frequency"]), float(b["lowest_energy"]))
            for key, b in sorted(data.items())
        }
    except (AttributeError, KeyError, TypeError, ValueError) as error:
        raise ArtifactError(f"Corrupt histogram in {path}: {error}") from error


def write_manifest(config: Mapping[str, Any], path: PathType, **extra: Any) -> Path:
    """Record what is needed to reproduce a run.

    Parameters:
        config: The validated run configuration.
        path: Output file.
        **extra: Additional entries.

    Returns:
        The written path.
    """
    data = {
        "config": dict(config),
        "seed": config.get("seed"),
        "version": get_version(),
        "environment": get_debug_info().as_dict(),
        **extra,
    }
    path = Path(path)
    _dump_json(data, path)
    return path


def write_fold_result(result: FoldResult, directory: PathType, config: Mapping[str, Any]) -> list[Path]:
    """Write every file of a fold run.

    Parameters:
        result: The run result.
        directory: Output directory.
        config: The validated run configuration, for the manifest.

    Returns:
        The written paths.
    """
    directory = Path(directory)
    peptide = result.hamiltonian.layout.peptide
    paths = [
        write_trajectory(result.trajectory, directory / TRAJECTORY_CSV),
        write_histogram(result.histogram, directory / HISTOGRAM_JSON),
    ]
    conformation = result.best_conformation
    if conformation is not None:
        comment = f"{peptide} energy={result.best_energy:.6f} bits={result.best_bitstring}"
        paths.append(write_xyz(conformation, peptide, directory / BEST_FOLD_XYZ, comment))
    else:
        log.warning(f"Best outcome {result.best_bitstring} has invalid turns; no geometry written")
    paths.append(
        write_manifest(
            config,
            directory / MANIFEST_JSON,
            best_bitstring=result.best_bitstring,
            best_energy=result.best_energy,
            best_cvar=result.best.fitness,
            best_theta=result.best.theta.tolist(),
            population=len(result.population),
        ),
    )
    log.info(f"Wrote {len(paths)} result files to {directory}")
    return paths


def write_report(directory: PathType) -> list[Path]:
    """Turn the files of a fold run into plot-ready CSVs.

    Parameters:
        directory: The run directory.

    Returns:
        The written paths.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise ArtifactError(f"Not a run directory: {directory}")
    records = read_trajectory(directory / TRAJECTORY_CSV)
    histogram = read_histogram(directory / HISTOGRAM_JSON)

    energy_histogram = pd.DataFrame(
        [(key, b.shots, b.frequency, b.lowest_energy) for key, b in histogram.items()],
        columns=["contact_bits", "shots", "frequency", "lowest_energy"],
    )
    energies = pd.DataFrame(
        [(r.generation, r.mean_cvar, r.best_cvar) for r in records],
        columns=["generation", "mean_cvar", "best_cvar"],
    )
    probabilities = pd.DataFrame(
        [(r.generation, r.mean_p0, r.max_p0) for r in records],
        columns=["generation", "mean_P0", "max_P0"],
    )
    outputs = [
        (energy_histogram, directory / ENERGY_HISTOGRAM_CSV),
        (energies, directory / ENERGY_VS_GENERATION_CSV),
        (probabilities, directory / GROUND_PROBABILITY_CSV),
    ]
    for frame, path in outputs:
        frame.to_csv(path, index=False, float_format="%.12g")
    log.info(f"Wrote {len(outputs)} report files to {directory}")
    return [path for _, path in outputs]
