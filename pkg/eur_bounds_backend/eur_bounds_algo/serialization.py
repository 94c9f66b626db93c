"""
Measurement specification files and result files.

Measurement specification
-------------------------
.. code-block:: javascript

    {
        "schema_version": "1.0",
        "dim": 2,
        "measurements": [
            {"type": "basis", "vectors": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]},
            {"type": "povm", "elements": [
                [[[0.5, 0], [0.5, 0]], [[0.5, 0], [0.5, 0]]],
                [[[0.5, 0], [-0.5, 0]], [[-0.5, 0], [0.5, 0]]]
            ]}
        ]
    }

Complex numbers are ``[re, im]`` pairs; vectors are lists of pairs and
matrices lists of rows of pairs. The JSON schemas for this format and for the
result files live in ``data/schemas``.

Result files are written with sorted keys and without timing information
unless requested, so equal inputs give byte-identical files. NaN values are
written as ``null``.
"""

import csv
import hashlib
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .applications import MeasurementFamily, SteeringResult, SweepPoint, SweepResult
from .entropy import EntropyFamily, EntropySpec, EurBounds
from .exceptions import EurBoundsError, NotBases, ParseError
from .quantum_core import Povm, PureState, pvm_from_basis, validate_povm
from .solver import BoundCertificate, IterationRecord

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"

SCHEMA_DIR = Path(__file__).resolve().parent / "data" / "schemas"

LN2 = math.log(2.0)


@dataclass(frozen=True, eq=False)
class MeasurementEntry:
    """One measurement of a spec file: basis vectors (one per row) or POVM elements."""

    kind: str
    values: np.ndarray

    @property
    def povm(self) -> Povm:
        if self.kind == "basis":
            return pvm_from_basis(list(self.values))
        return validate_povm(list(self.values))


@dataclass(frozen=True, eq=False)
class MeasurementSpecFile:
    schema_version: str
    dim: int
    measurements: tuple


# -- parsing -----------------------------------------------------------------


def _complex_array(raw, shape: tuple, field: str) -> np.ndarray:
    try:
        array = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError("expected numbers", field=field) from exc
    if array.shape != shape + (2,):
        raise ParseError(
            f"expected shape {shape} of [re, im] pairs, got {array.shape}", field=field
        )
    if not np.all(np.isfinite(array)):
        raise ParseError("non-finite entry", field=field)
    return array[..., 0] + 1.0j * array[..., 1]


def _parse_measurement(raw, dim: int, index: int) -> MeasurementEntry:
    field = f"measurements[{index}]"
    if not isinstance(raw, dict):
        raise ParseError("measurement must be an object", field=field)
    kind = raw.get("type")
    if kind == "basis":
        vectors = raw.get("vectors")
        if not isinstance(vectors, list):
            raise ParseError("missing vectors", field=f"{field}.vectors")
        values = _complex_array(vectors, (len(vectors), dim), f"{field}.vectors")
    elif kind == "povm":
        elements = raw.get("elements")
        if not isinstance(elements, list):
            raise ParseError("missing elements", field=f"{field}.elements")
        values = _complex_array(
            elements, (len(elements), dim, dim), f"{field}.elements"
        )
    else:
        raise ParseError(f"unknown measurement type {kind!r}", field=f"{field}.type")

    values.setflags(write=False)
    entry = MeasurementEntry(kind=kind, values=values)
    try:
        entry.povm
    except EurBoundsError as exc:
        raise ParseError(f"invalid measurement: {exc}", field=field) from exc
    return entry


def parse_spec_document(document) -> MeasurementSpecFile:
    """Validate an already-decoded spec document."""
    if not isinstance(document, dict):
        raise ParseError("top level must be an object")
    version = document.get("schema_version")
    if not isinstance(version, str):
        raise ParseError("missing schema_version", field="schema_version")
    dim = document.get("dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 2:
        raise ParseError("dim must be an integer >= 2", field="dim")
    measurements = document.get("measurements")
    if not isinstance(measurements, list) or not measurements:
        raise ParseError("need a non-empty measurements list", field="measurements")
    return MeasurementSpecFile(
        schema_version=version,
        dim=dim,
        measurements=tuple(
            _parse_measurement(raw, dim, index)
            for index, raw in enumerate(measurements)
        ),
    )


def _decode(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}", line=exc.lineno) from exc


def parse_spec_text(text: str) -> MeasurementSpecFile:
    """
    Parse a measurement specification from JSON text.

    Raises
    ------
    ParseError
        With the line number for JSON syntax errors and the field path for
        structural or physical errors.
    """
    return parse_spec_document(_decode(text))


def spec_digest(document) -> str:
    """SHA-256 of the canonical JSON form (sorted keys, no whitespace)."""
    canonical = json.dumps(document, sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def load_spec(path) -> tuple[MeasurementSpecFile, str]:
    """Read a spec file; returns the parsed spec and its content digest."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    document = _decode(text)
    return parse_spec_document(document), spec_digest(document)


# -- conversions -------------------------------------------------------------


def spec_povms(spec: MeasurementSpecFile) -> list[Povm]:
    return [entry.povm for entry in spec.measurements]


def spec_bases(spec: MeasurementSpecFile, count: Optional[int] = None) -> list:
    """
    The measurements as bases of canonical-phase states.

    Raises
    ------
    NotBases
        If some measurement is a POVM, or there are not ``count`` of them.
    """
    kinds = [entry.kind for entry in spec.measurements]
    if any(kind != "basis" for kind in kinds):
        raise NotBases("all measurements must be of type 'basis'")
    if count is not None and len(kinds) != count:
        raise NotBases(f"expected {count} bases, got {len(kinds)}")
    return [
        [PureState.from_vector(vector) for vector in entry.values]
        for entry in spec.measurements
    ]


def povm_spec(povms: Sequence[Povm]) -> MeasurementSpecFile:
    entries = []
    for povm in povms:
        values = np.array(povm.elements)
        values.setflags(write=False)
        entries.append(MeasurementEntry(kind="povm", values=values))
    return MeasurementSpecFile(
        schema_version=SCHEMA_VERSION, dim=povms[0].dim, measurements=tuple(entries)
    )


def bases_spec(bases: Sequence[Sequence[PureState]]) -> MeasurementSpecFile:
    entries = []
    for basis in bases:
        values = np.array([state.amplitudes for state in basis])
        values.setflags(write=False)
        entries.append(MeasurementEntry(kind="basis", values=values))
    return MeasurementSpecFile(
        schema_version=SCHEMA_VERSION,
        dim=bases[0][0].dim,
        measurements=tuple(entries),
    )


def complex_pairs(array) -> list:
    """Nested lists with every complex entry as ``[re, im]``."""
    array = np.asarray(array, dtype=np.complex128)
    return np.stack([array.real, array.imag], axis=-1).tolist()


def serialize_spec(spec: MeasurementSpecFile) -> dict:
    measurements = []
    for entry in spec.measurements:
        key = "vectors" if entry.kind == "basis" else "elements"
        measurements.append({"type": entry.kind, key: complex_pairs(entry.values)})
    return {
        "schema_version": spec.schema_version,
        "dim": spec.dim,
        "measurements": measurements,
    }


# -- result payloads ---------------------------------------------------------


def _plain(value):
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def dumps_json(payload) -> str:
    return json.dumps(_plain(payload), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, payload) -> None:
    Path(path).write_text(dumps_json(payload), encoding="utf-8")


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Write rows with floats in round-trip precision and NaN/None as empty cells."""

    def cell(value):
        if value is None:
            return ""
        if isinstance(value, (bool, np.bool_)):
            return "true" if value else "false"
        if isinstance(value, (float, np.floating)):
            return "" if not math.isfinite(value) else format(float(value), ".17g")
        return value

    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([cell(value) for value in row])


def read_comparison_csv(path) -> list[float]:
    """
    Read the ``q`` column of an external comparison table, one row per grid point.

    Raises
    ------
    ParseError
    """
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            reader = csv.DictReader(handle)
            if reader.fieldnames is None or "q" not in reader.fieldnames:
                raise ParseError("comparison table needs a 'q' column", field="q")
            values = []
            for line, row in enumerate(reader, start=2):
                try:
                    values.append(float(row["q"]))
                except (TypeError, ValueError) as exc:
                    raise ParseError("not a number", field="q", line=line) from exc
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    return values


@dataclass(frozen=True)
class Units:
    """Scale factors for display: log-based values divide by ln 2 in bits."""

    bits: bool = False

    @property
    def name(self) -> str:
        return "bits" if self.bits else "nats"

    @property
    def log_scale(self) -> float:
        return 1.0 / LN2 if self.bits else 1.0

    def family_scale(self, spec: EntropySpec) -> float:
        return self.log_scale if spec.is_logarithmic else 1.0

    def tsallis_scale(self, spec: EntropySpec) -> float:
        # q_tsallis is the Shannon-sum bound for Shannon runs, a power sum otherwise
        return self.log_scale if spec.family is EntropyFamily.SHANNON else 1.0


def iteration_payload(record: IterationRecord, scale: float = 1.0) -> dict:
    return {
        "index": record.index,
        "h_minus": record.h_minus * scale,
        "h_plus": record.h_plus * scale,
        "gap": record.gap * scale,
        "optimal_vertex_z": record.optimal_vertex_z,
        "witness_probabilities": record.witness_probabilities,
        "cut_normal": record.cut_normal,
        "vertex_count": record.vertex_count,
    }


def bounds_payload(
    certificate: BoundCertificate, bounds: EurBounds, units: Units
) -> dict:
    spec = certificate.config.entropy
    scale = units.family_scale(spec)
    log_scale = units.log_scale
    q_sum = bounds.q_shannon_sum
    return {
        "bounds": {
            "h_minus": certificate.final_h_minus * scale,
            "h_plus": certificate.final_h_plus * scale,
            "gap": certificate.gap * scale,
            "converged": certificate.converged,
            "stop_reason": certificate.stop_reason.value,
        },
        "q": {
            "q_tsallis": bounds.q_tsallis * units.tsallis_scale(spec),
            "q_renyi": bounds.q_renyi * log_scale,
            "q_shannon_sum": None if q_sum is None else q_sum * log_scale,
        },
        "certificate": {
            "iterations": certificate.iteration_count,
            "max_vertex_count": certificate.max_vertex_count,
            "reduced_rank": certificate.reduced_rank,
            "ellipsoid_semi_axes": certificate.ellipsoid_semi_axes,
            "degenerate_skips": certificate.degenerate_skips,
            "witness_state": complex_pairs(certificate.witness_state.amplitudes),
            "witness_probabilities": certificate.witness_probabilities,
        },
    }


def result_payload(
    command: str,
    digest: str,
    certificate: BoundCertificate,
    bounds: EurBounds,
    units: Units,
    dim: int,
    trace: bool = False,
    seed: Optional[int] = None,
    seconds: Optional[float] = None,
) -> dict:
    """The result document of a single solver run (see ``result.schema.json``)."""
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "input_digest": digest,
        "entropy": certificate.config.entropy.describe(),
        "units": units.name,
        "solver": certificate.config.describe(),
        "dim": dim,
        "n_measurements": bounds.n_measurements,
        **bounds_payload(certificate, bounds, units),
    }
    if trace:
        scale = units.family_scale(certificate.config.entropy)
        payload["trace"] = [iteration_payload(r, scale) for r in certificate.iterations]
    if seed is not None:
        payload["seed"] = seed
    if seconds is not None:
        payload["timing"] = {"seconds": seconds}
    return payload


def _sweep_point_payload(point: SweepPoint, units: Units, spec: EntropySpec) -> dict:
    scale = units.family_scale(spec)
    log_scale = units.log_scale

    def scaled(value, factor):
        return None if value is None else value * factor

    return {
        "parameters": point.parameters,
        "q_optimal": point.q_optimal * scale,
        "h_minus": point.h_minus * scale,
        "h_plus": point.h_plus * scale,
        "gap": point.gap * scale,
        "q_tsallis": point.q_tsallis * units.tsallis_scale(spec),
        "q_renyi": point.q_renyi * log_scale,
        "converged": point.converged,
        "stop_reason": point.stop_reason,
        "iterations": point.iterations,
        "vertex_count_max": point.vertex_count_max,
        "q_mu": scaled(point.q_mu, log_scale),
        "q_cp": scaled(point.q_cp, log_scale),
        "q_rpz": scaled(point.q_rpz, log_scale),
        "error": point.error,
    }


def sweep_payload(result: SweepResult, units: Units, seconds=None) -> dict:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "sweep_bounds",
        "family": result.family.name.value,
        "entropy": result.spec.describe(),
        "units": units.name,
        "solver": result.config.describe(),
        "n_measurements": result.family.n_measurements,
        "dim": result.family.dim,
        "points": [
            _sweep_point_payload(point, units, result.spec) for point in result.points
        ],
    }
    if seconds is not None:
        payload["timing"] = {"seconds": seconds}
    return payload


def sweep_table(result: SweepResult, units: Units) -> tuple[list, list]:
    """CSV header and rows: parameters, q_optimal, gap, analytic bounds, iterations."""
    names = list(result.family.parameters)
    two_basis = result.family.n_measurements == 2
    header = names + ["q_optimal", "gap"]
    if two_basis:
        header += ["q_mu", "q_cp", "q_rpz"]
    header += ["iterations", "vertex_count_max"]

    scale = units.family_scale(result.spec)
    rows = []
    for point in result.points:
        row = [point.parameters[name] for name in names]
        row += [point.q_optimal * scale, point.gap * scale]
        if two_basis:
            row += [
                None if value is None else value * units.log_scale
                for value in (point.q_mu, point.q_cp, point.q_rpz)
            ]
        row += [point.iterations, point.vertex_count_max]
        rows.append(row)
    return header, rows


def steering_payload(result: SteeringResult, family: MeasurementFamily, config) -> dict:
    points = []
    for index, parameters in enumerate(result.grid):
        entry = {
            "parameters": parameters,
            "q_tsallis_2": result.q_tsallis_2[index],
            "eta_threshold": result.eta_threshold[index],
            "clamped": result.clamped[index],
            "error": result.points[index].error if result.points else None,
        }
        if result.comparison_q is not None:
            entry["comparison_q"] = result.comparison_q[index]
            entry["comparison_eta"] = result.comparison_eta[index]
        points.append(entry)
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "steering_thresholds",
        "family": family.name.value,
        "units": "nats",
        "solver": config.describe(),
        "alpha": result.alpha,
        "n_measurements": result.n_measurements,
        "dim": result.dim,
        "points": points,
    }


def steering_table(
    result: SteeringResult, family: MeasurementFamily
) -> tuple[list, list]:
    """CSV header and rows: parameters, q_tsallis_2, eta_threshold, clamped."""
    names = list(family.parameters)
    header = names + ["q_tsallis_2", "eta_threshold", "clamped"]
    with_comparison = result.comparison_q is not None
    if with_comparison:
        header += ["comparison_q", "comparison_eta"]
    rows = []
    for index, parameters in enumerate(result.grid):
        row = [parameters[name] for name in names]
        row += [
            result.q_tsallis_2[index],
            result.eta_threshold[index],
            bool(result.clamped[index]),
        ]
        if with_comparison:
            row += [result.comparison_q[index], result.comparison_eta[index]]
        rows.append(row)
    return header, rows
