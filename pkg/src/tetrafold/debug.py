"""Environment report, printed by `--debug-info` and stored in run manifests."""

from __future__ import annotations

import os
import platform
import sys
from dataclasses import asdict, dataclass, field
from importlib import metadata
from typing import Any

_PACKAGES = ("tetrafold", "numpy", "pandas", "mkdocs", "pyyaml")

# Thread pools of the linear algebra backends; they change timings, never results.
_THREAD_VARIABLES = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


@dataclass
class Variable:
    """An environment variable that can change how a run behaves."""

    name: str
    """Variable name."""
    value: str
    """Variable value."""


@dataclass
class Package:
    """An installed distribution and its version."""

    name: str
    """Distribution name."""
    version: str
    """Version, `0.0.0` when not installed."""


@dataclass
class Environment:
    """Where a run happened."""

    interpreter: str
    """Interpreter name and version."""
    executable: str
    """Path to the Python executable."""
    platform: str
    """Operating system."""
    cpu_count: int
    """Logical CPUs seen by the process."""
    packages: list[Package] = field(default_factory=list)
    """Numerical stack versions."""
    variables: list[Variable] = field(default_factory=list)
    """Set `TETRAFOLD_*` and thread-count variables."""

    def as_dict(self) -> dict[str, Any]:
        """Return the environment as plain JSON-ready data."""
        return asdict(self)


def _interpreter() -> str:
    impl = sys.implementation.version
    version = f"{impl.major}.{impl.minor}.{impl.micro}"
    if impl.releaselevel != "final":
        version += impl.releaselevel[0] + str(impl.serial)
    return f"{sys.implementation.name} {version}"


def get_version(dist: str = "tetrafold") -> str:
    """Get version of the given distribution.

    Parameters:
        dist: A distribution name.

    Returns:
        A version number.
    """
    try:
        return metadata.version(dist)
    except metadata.PackageNotFoundError:
        return "0.0.0"


def get_debug_info() -> Environment:
    """Collect the environment of the current process.

    Returns:
        Environment information.
    """
    names = [*_THREAD_VARIABLES, *sorted(var for var in os.environ if var.startswith("TETRAFOLD"))]
    return Environment(
        interpreter=_interpreter(),
        executable=sys.executable,
        platform=platform.platform(),
        cpu_count=os.cpu_count() or 1,
        packages=[Package(name, get_version(name)) for name in _PACKAGES],
        variables=[Variable(name, value) for name in names if (value := os.getenv(name))],
    )


def print_debug_info() -> None:
    """Print the environment as a Markdown list, ready to paste in an issue."""
    info = get_debug_info()
    print(f"- __System__: {info.platform} ({info.cpu_count} CPUs)")
    print(f"- __Python__: {info.interpreter} ({info.executable})")
    print("- __Environment variables__:")
    for var in info.variables:
        print(f"  - `{var.name}`: `{var.value}`")
    print("- __Installed packages__:")
    for pkg in info.packages:
        print(f"  - `{pkg.name}` v{pkg.version}")


if __name__ == "__main__":
    print_debug_info()
