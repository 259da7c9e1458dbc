"""Dataset files: JSON schema, loading, saving, bundled data.

A dataset is one JSON document::

    {
      "name": "...",                   # optional, defaults to the file stem
      "n": 4,
      "gamma_xx": [[...], ...],        # n x n, row-major
      "gamma_pp": [[...], ...],
      "gamma_xp": [[...], ...],        # optional, default zero
      "sigma_xx": [[...], ...],        # optional as a group
      "sigma_pp": [[...], ...],
      "sigma_xp": [[...], ...],        # optional
      "witness_X": [[...], ...],       # optional as a pair
      "witness_P": [[...], ...],
      "maximizers": {"1|2,3,4": {"X": [[...]], "P": [[...]]}, ...},
      "note": "free-form provenance text"
    }

Matrices are arrays of arrays of decimal numbers, so files stay readable
and auditable against their source records.  Saving re-emits every number
with ``repr`` precision, which round-trips floats exactly.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .core import Bipartition, CovarianceMatrix, SigmaMatrix
from .gme import MatrixWitness


class DatasetError(ValueError):
    """A dataset file failed to parse or validate."""


@dataclass(frozen=True, eq=False)
class Dataset:
    """Parsed dataset: measured matrix plus optional errors and witnesses.

    ``source_doc`` holds the raw parsed JSON when the dataset came from a
    file; :func:`save` re-emits it verbatim so round-trips preserve every
    decimal as written (loaders may normalize, e.g. symmetrize, the typed
    views).
    """

    name: str
    gamma: CovarianceMatrix
    sigma: Optional[SigmaMatrix] = None
    witness: Optional[MatrixWitness] = None
    maximizers: Optional[dict[Bipartition, MatrixWitness]] = None
    note: str = ""
    source_doc: Optional[dict] = None

    @property
    def n(self) -> int:
        return self.gamma.n


def _matrix(doc: dict, key: str, n: int, path) -> np.ndarray:
    value = doc[key]
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise DatasetError(f"{path}: field {key!r} is not a numeric matrix") from None
    if arr.shape != (n, n):
        raise DatasetError(f"{path}: field {key!r} has shape {arr.shape}, expected ({n}, {n})")
    return arr


def load(path: Union[str, Path]) -> Dataset:
    """Load and validate a dataset file.

    Raises :class:`DatasetError` with file/line context for malformed
    JSON, and with a field description for shape or sign violations.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DatasetError(f"{path}: {exc.strerror or exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{path}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise DatasetError(f"{path}: top level must be a JSON object")

    try:
        n = int(doc["n"])
    except KeyError:
        raise DatasetError(f"{path}: missing mode count 'n'") from None
    except (TypeError, ValueError):
        raise DatasetError(f"{path}: 'n' must be an integer") from None
    if n < 1:
        raise DatasetError(f"{path}: 'n' must be positive")

    for key in ("gamma_xx", "gamma_pp"):
        if key not in doc:
            raise DatasetError(f"{path}: missing field {key!r}")

    try:
        gamma = CovarianceMatrix(
            xx=_matrix(doc, "gamma_xx", n, path),
            pp=_matrix(doc, "gamma_pp", n, path),
            xp=_matrix(doc, "gamma_xp", n, path) if "gamma_xp" in doc else None,
        )
    except ValueError as exc:
        raise DatasetError(f"{path}: {exc}") from None

    sigma = None
    if "sigma_xx" in doc or "sigma_pp" in doc:
        for key in ("sigma_xx", "sigma_pp"):
            if key not in doc:
                raise DatasetError(f"{path}: sigma blocks must come as a pair; missing {key!r}")
        try:
            sigma = SigmaMatrix(
                xx=_matrix(doc, "sigma_xx", n, path),
                pp=_matrix(doc, "sigma_pp", n, path),
                xp=_matrix(doc, "sigma_xp", n, path) if "sigma_xp" in doc else None,
            )
        except ValueError as exc:
            raise DatasetError(f"{path}: {exc}") from None

    witness = None
    if "witness_X" in doc or "witness_P" in doc:
        for key in ("witness_X", "witness_P"):
            if key not in doc:
                raise DatasetError(f"{path}: witness matrices come as a pair; missing {key!r}")
        try:
            witness = MatrixWitness(
                x_mat=_matrix(doc, "witness_X", n, path),
                p_mat=_matrix(doc, "witness_P", n, path),
            )
        except ValueError as exc:
            raise DatasetError(f"{path}: {exc}") from None

    maximizers = None
    if "maximizers" in doc:
        raw = doc["maximizers"]
        if not isinstance(raw, dict):
            raise DatasetError(f"{path}: 'maximizers' must map bipartition specs to X/P pairs")
        maximizers = {}
        for spec, pair in raw.items():
            try:
                bp = Bipartition.parse(spec, n)
            except ValueError as exc:
                raise DatasetError(f"{path}: bad bipartition key {spec!r}: {exc}") from None
            if not isinstance(pair, dict) or "X" not in pair or "P" not in pair:
                raise DatasetError(f"{path}: maximizer {spec!r} must hold matrices 'X' and 'P'")
            try:
                maximizers[bp] = MatrixWitness(
                    x_mat=_matrix(pair, "X", n, f"{path}[{spec}]"),
                    p_mat=_matrix(pair, "P", n, f"{path}[{spec}]"),
                )
            except ValueError as exc:
                raise DatasetError(f"{path}: maximizer {spec!r}: {exc}") from None

    return Dataset(
        name=str(doc.get("name", path.stem)),
        gamma=gamma,
        sigma=sigma,
        witness=witness,
        maximizers=maximizers,
        note=str(doc.get("note", "")),
        source_doc=doc,
    )


def save(dataset: Dataset, path: Union[str, Path]) -> None:
    """Write a dataset to disk; numeric fields round-trip exactly."""
    if dataset.source_doc is not None:
        Path(path).write_text(json.dumps(dataset.source_doc, indent=2) + "\n")
        return
    doc: dict = {"name": dataset.name, "n": dataset.n}
    doc["gamma_xx"] = dataset.gamma.xx.tolist()
    if dataset.gamma.has_cross_block:
        doc["gamma_xp"] = dataset.gamma.xp.tolist()
    doc["gamma_pp"] = dataset.gamma.pp.tolist()
    if dataset.sigma is not None:
        doc["sigma_xx"] = dataset.sigma.xx.tolist()
        if np.any(dataset.sigma.xp != 1.0):
            doc["sigma_xp"] = dataset.sigma.xp.tolist()
        doc["sigma_pp"] = dataset.sigma.pp.tolist()
    if dataset.witness is not None:
        doc["witness_X"] = dataset.witness.x_mat.tolist()
        doc["witness_P"] = dataset.witness.p_mat.tolist()
    if dataset.maximizers is not None:
        doc["maximizers"] = {
            bp.label: {"X": w.x_mat.tolist(), "P": w.p_mat.tolist()}
            for bp, w in dataset.maximizers.items()
        }
    if dataset.note:
        doc["note"] = dataset.note
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def bundled_path(name: str) -> Path:
    """Filesystem path of a dataset shipped with the package."""
    candidate = resources.files("covrepair").joinpath("data", f"{name}.json")
    with resources.as_file(candidate) as real:
        if not real.exists():
            raise DatasetError(f"no bundled dataset named {name!r}")
        return Path(real)


def load_bundled(name: str) -> Dataset:
    """Load a dataset shipped with the package (e.g. ``"fourpartite"``)."""
    return load(bundled_path(name))
