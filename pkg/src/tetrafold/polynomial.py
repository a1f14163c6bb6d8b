"""Multilinear pseudo-boolean polynomials and their Z-Pauli expansion."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import TYPE_CHECKING, Any, Dict, Iterable, Iterator, Mapping, Sequence, Tuple

import numpy as np

if TYPE_CHECKING:
    from numpy.typing import NDArray

Monomial = Tuple[int, ...]
"""Sorted tuple of distinct qubit indices; the empty tuple is the constant term."""

ZERO_TOLERANCE = 1e-9
"""Coefficients below this magnitude are dropped."""

_BATCH_CELLS = 1 << 22


def _canonical_key(indices: Iterable[int]) -> Monomial:
    return tuple(sorted(set(indices)))


def _check_bits(bits: Sequence[int] | str, num_qubits: int | None, highest: int) -> list[int]:
    values = [int(b) for b in bits]
    if num_qubits is not None and len(values) != num_qubits:
        raise ValueError(f"Expected {num_qubits} bits, got {len(values)}")
    if len(values) <= highest:
        raise ValueError(f"Expected at least {highest + 1} bits, got {len(values)}")
    return values


class _Terms(Mapping[Monomial, float]):
    """Immutable sparse map from index subsets to coefficients."""

    def __init__(self, terms: Mapping[Monomial, float] | Iterable[tuple[Iterable[int], float]] = ()) -> None:
        items = terms.items() if isinstance(terms, Mapping) else terms
        merged: dict[Monomial, float] = {}
        for indices, coeff in items:
            key = _canonical_key(indices)
            merged[key] = merged.get(key, 0.0) + float(coeff)
        self._terms = {k: c for k, c in merged.items() if abs(c) >= ZERO_TOLERANCE}

    @classmethod
    def _wrap(cls, terms: dict[Monomial, float]) -> Any:
        poly = cls.__new__(cls)
        poly._terms = {k: c for k, c in terms.items() if abs(c) >= ZERO_TOLERANCE}
        return poly

    def __getitem__(self, key: Monomial) -> float:
        return self._terms[key]

    def __iter__(self) -> Iterator[Monomial]:
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other: object) -> bool:
        if type(other) is not type(self):
            return NotImplemented
        return self._terms == other._terms  # type: ignore[attr-defined]

    __hash__ = None  # type: ignore[assignment]

    @property
    def constant(self) -> float:
        """The coefficient of the empty subset."""
        return self._terms.get((), 0.0)

    @property
    def degree(self) -> int:
        """Size of the largest subset."""
        return max((len(k) for k in self._terms), default=0)

    @property
    def variables(self) -> tuple[int, ...]:
        """Indices appearing in some term."""
        return tuple(sorted({i for key in self._terms for i in key}))

    def sorted_items(self) -> list[tuple[Monomial, float]]:
        """Terms ordered by size, then indices."""
        return sorted(self._terms.items(), key=lambda item: (len(item[0]), item[0]))

    def __repr__(self) -> str:
        shown = ", ".join(f"{k}: {c:g}" for k, c in self.sorted_items()[:6])
        more = ", ..." if len(self) > 6 else ""  # noqa: PLR2004
        return f"{type(self).__name__}({{{shown}{more}}})"


class PBPoly(_Terms):
    """A multilinear polynomial over binary variables (`q * q = q`)."""

    @classmethod
    def constant_term(cls, value: float) -> PBPoly:
        """Build a constant polynomial.

        Parameters:
            value: The constant.

        Returns:
            The polynomial.
        """
        return cls({(): value})

    @classmethod
    def variable(cls, index: int) -> PBPoly:
        """Build the polynomial `q_index`.

        Parameters:
            index: Qubit index.

        Returns:
            The polynomial.
        """
        return cls({(index,): 1.0})

    def _coerce(self, other: PBPoly | float) -> PBPoly:
        if isinstance(other, PBPoly):
            return other
        return PBPoly.constant_term(other)

    def __add__(self, other: PBPoly | float) -> PBPoly:
        other = self._coerce(other)
        terms = dict(self._terms)
        for key, coeff in other._terms.items():
            terms[key] = terms.get(key, 0.0) + coeff
        return PBPoly._wrap(terms)

    __radd__ = __add__

    def __neg__(self) -> PBPoly:
        return PBPoly._wrap({k: -c for k, c in self._terms.items()})

    def __sub__(self, other: PBPoly | float) -> PBPoly:
        return self + (-self._coerce(other))

    def __rsub__(self, other: PBPoly | float) -> PBPoly:
        return self._coerce(other) - self

    def __mul__(self, other: PBPoly | float) -> PBPoly:
        if not isinstance(other, PBPoly):
            return PBPoly._wrap({k: c * other for k, c in self._terms.items()})
        terms: dict[Monomial, float] = {}
        for left, lc in self._terms.items():
            for right, rc in other._terms.items():
                key = left if not right else right if not left else _canonical_key(left + right)
                terms[key] = terms.get(key, 0.0) + lc * rc
        return PBPoly._wrap(terms)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> PBPoly:
        if exponent < 0:
            raise ValueError("Negative powers are not polynomials")
        result = PBPoly.constant_term(1.0)
        for _ in range(exponent):
            result = result * self
        return result

    @cached_property
    def _compiled(self) -> tuple[float, list[tuple[NDArray[np.intp], NDArray[np.float64]]]]:
        groups: dict[int, list[tuple[Monomial, float]]] = {}
        for key, coeff in self._terms.items():
            if key:
                groups.setdefault(len(key), []).append((key, coeff))
        compiled = [
            (
                np.array([key for key, _ in items], dtype=np.intp),
                np.array([coeff for _, coeff in items], dtype=np.float64),
            )
            for _, items in sorted(groups.items())
        ]
        return self.constant, compiled


def evaluate(poly: PBPoly, bits: Sequence[int] | str, num_qubits: int | None = None) -> float:
    """Evaluate a polynomial on one assignment.

    Parameters:
        poly: The polynomial.
        bits: Bits indexed by qubit.
        num_qubits: Expected assignment length, when known.

    Returns:
        The value.
    """
    values = _check_bits(bits, num_qubits, max(poly.variables, default=-1))
    return float(sum(coeff for key, coeff in poly.items() if all(values[i] for i in key)))


def indices_to_bits(indices: NDArray[np.integer] | Sequence[int], num_qubits: int) -> NDArray[np.uint8]:
    """Expand basis-state indices into bit rows, qubit 0 being the most significant bit.

    Parameters:
        indices: Basis-state indices.
        num_qubits: Register size.

    Returns:
        A `(len(indices), num_qubits)` array of bits.
    """
    indices = np.asarray(indices, dtype=np.int64)
    shifts = np.arange(num_qubits - 1, -1, -1, dtype=np.int64)
    return ((indices[:, None] >> shifts) & 1).astype(np.uint8)


def bits_to_index(bits: Sequence[int] | str) -> int:
    """Basis-state index of a bitstring (big-endian).

    Parameters:
        bits: The bits.

    Returns:
        The index.
    """
    return int("".join(str(int(b)) for b in bits) or "0", 2)


def evaluate_batch(poly: PBPoly, bits: NDArray[np.integer], num_qubits: int | None = None) -> NDArray[np.float64]:
    """Evaluate a polynomial on many assignments at once.

    Parameters:
        poly: The polynomial.
        bits: A `(batch, n)` array of bits.
        num_qubits: Expected assignment length, when known.

    Returns:
        The values, one per row.
    """
    bits = np.asarray(bits)
    if bits.ndim != 2:  # noqa: PLR2004
        raise ValueError("Expected a two-dimensional array of bits")
    if num_qubits is not None and bits.shape[1] != num_qubits:
        raise ValueError(f"Expected {num_qubits} bits per row, got {bits.shape[1]}")
    if bits.shape[1] <= max(poly.variables, default=-1):
        raise ValueError(f"Rows of {bits.shape[1]} bits do not cover the polynomial's variables")
    constant, groups = poly._compiled
    flags = bits.astype(bool)
    values = np.full(bits.shape[0], constant, dtype=np.float64)
    for indices, coeffs in groups:
        step = max(1, _BATCH_CELLS // max(1, indices.size))
        for start in range(0, bits.shape[0], step):
            chunk = flags[start : start + step]
            values[start : start + step] += chunk[:, indices].all(axis=2).astype(np.float64) @ coeffs
    return values


class PauliHamiltonian(_Terms):
    """Weighted Z-strings; each key is the support `gamma` of a Pauli-Z product."""

    def evaluate(self, bits: Sequence[int] | str, num_qubits: int | None = None) -> float:
        """Expectation value on a computational basis state.

        Parameters:
            bits: Bits indexed by qubit.
            num_qubits: Expected assignment length, when known.

        Returns:
            The value.
        """
        values = _check_bits(bits, num_qubits, max(self.variables, default=-1))
        signs = [1 - 2 * v for v in values]
        total = 0.0
        for support, coeff in self.items():
            sign = 1
            for i in support:
                sign *= signs[i]
            total += coeff * sign
        return total

    def to_records(self) -> list[dict[str, Any]]:
        """Serializable form: a list of `{gamma, coeff}` objects.

        Returns:
            The records, identity first then by locality and indices.
        """
        return [{"coeff": coeff, "gamma": list(support)} for support, coeff in self.sorted_items()]

    @classmethod
    def from_records(cls, records: Iterable[Mapping[str, Any]]) -> PauliHamiltonian:
        """Rebuild from `to_records` output.

        Parameters:
            records: The records.

        Returns:
            The Hamiltonian.
        """
        return cls(((tuple(int(i) for i in r["gamma"]), float(r["coeff"])) for r in records))

    def dump(self) -> str:
        """A plain-text listing, one term per line, for diffing.

        Returns:
            The listing.
        """
        lines = []
        for support, coeff in self.sorted_items():
            label = " ".join(f"Z{i}" for i in support) or "I"
            lines.append(f"{coeff:+.12e} {label}")
        return "\n".join(lines) + "\n"


def to_pauli(poly: PBPoly) -> PauliHamiltonian:
    """Expand a polynomial over Z-strings with `q = (1 - Z) / 2`.

    Parameters:
        poly: The polynomial.

    Returns:
        The Pauli form.
    """
    strings: Dict[Monomial, float] = {}
    for key, coeff in poly.items():
        scale = coeff / (1 << len(key))
        for size in range(len(key) + 1):
            signed = scale if size % 2 == 0 else -scale
            for support in combinations(key, size):
                strings[support] = strings.get(support, 0.0) + signed
    return PauliHamiltonian._wrap(strings)


@dataclass(frozen=True)
class ResourceReport:
    """Size of a Pauli Hamiltonian."""

    term_count: int
    """Number of stored Pauli strings, the identity included."""
    max_locality: int
    """Largest support."""
    locality_histogram: dict[int, int]
    """Number of strings per support size; size 0 is the identity."""

    @property
    def operator_count(self) -> int:
        """Strings acting on at least one qubit."""
        return self.term_count - self.locality_histogram.get(0, 0)


def resource_report(pauli: PauliHamiltonian) -> ResourceReport:
    """Count the strings of a Pauli Hamiltonian.

    Parameters:
        pauli: The Hamiltonian.

    Returns:
        The report.
    """
    histogram = Counter(len(support) for support in pauli)
    return ResourceReport(
        term_count=sum(histogram.values()),
        max_locality=max(histogram, default=0),
        locality_histogram=dict(sorted(histogram.items())),
    )
