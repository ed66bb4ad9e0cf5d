"""Binary field snapshots and JSON-manifested ensemble snapshots.

Field format (little-endian): magic "NLSS", version u32, N u32, theta 3*f64,
convention u8, then (2N+1)^3 complex f64 pairs in lexicographic xi order.
An ensemble snapshot is a directory holding one field file per member plus a
JSON manifest with occupations, geometry, convention, and lattice radius.
"""

from __future__ import annotations

import json
import os
import struct

import numpy as np

from .ensemble import EnsembleState
from .geometry import Convention, FrequencyLattice, TorusGeometry
from .reports import write_bytes_atomic, write_text_atomic
from .spectral import SpectralField

MAGIC = b"NLSS"
VERSION = 1
_HEADER = struct.Struct("<4sII3dB")
_CONVENTION_CODE = {Convention.STANDARD: 0, Convention.PAPER: 1}
_CODE_CONVENTION = {v: k for k, v in _CONVENTION_CODE.items()}


class SnapshotError(ValueError):
    pass


def write_field_snapshot(path, field: SpectralField, geometry: TorusGeometry,
                         convention: Convention) -> None:
    header = _HEADER.pack(MAGIC, VERSION, field.lattice.n, *geometry.theta,
                          _CONVENTION_CODE[convention])
    payload = np.ascontiguousarray(field.coeffs, dtype="<c16").tobytes()
    write_bytes_atomic(path, header + payload)


def read_field_snapshot(path) -> tuple[SpectralField, TorusGeometry, Convention]:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise SnapshotError(f"{path}: truncated header")
    magic, version, n, t1, t2, t3, conv_code = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise SnapshotError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise SnapshotError(f"{path}: unsupported version {version}")
    if conv_code not in _CODE_CONVENTION:
        raise SnapshotError(f"{path}: unknown convention code {conv_code}")
    lattice = FrequencyLattice(n)
    expected = _HEADER.size + 16 * lattice.count
    if len(raw) != expected:
        raise SnapshotError(f"{path}: expected {expected} bytes, found {len(raw)}")
    coeffs = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size).reshape(lattice.shape)
    field = SpectralField(lattice, coeffs.astype(complex))
    return field, TorusGeometry((t1, t2, t3)), _CODE_CONVENTION[conv_code]


def write_ensemble_snapshot(directory, state: EnsembleState) -> None:
    directory = os.fspath(directory)
    os.makedirs(directory, exist_ok=True)
    members = []
    for i, field in enumerate(state.fields):
        name = f"member_{i:03d}.nlss"
        write_field_snapshot(os.path.join(directory, name), field,
                             state.geometry, state.convention)
        members.append(name)
    manifest = {
        "format": "nlss-ensemble",
        "version": VERSION,
        "n": state.lattice.n if state.fields else 0,
        "j": state.size,
        "occupations": [float(l) for l in state.occupations],
        "theta": list(state.geometry.theta),
        "convention": state.convention.value,
        "members": members,
    }
    write_text_atomic(os.path.join(directory, "manifest.json"),
                      json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def read_ensemble_snapshot(directory) -> EnsembleState:
    directory = os.fspath(directory)
    with open(os.path.join(directory, "manifest.json"), "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    if manifest.get("format") != "nlss-ensemble":
        raise SnapshotError(f"{directory}: not an ensemble snapshot")
    geometry = TorusGeometry(tuple(manifest["theta"]))
    convention = Convention.parse(manifest["convention"])
    fields = []
    for name in manifest["members"]:
        field, geo, conv = read_field_snapshot(os.path.join(directory, name))
        if geo != geometry or conv != convention:
            raise SnapshotError(f"{name}: member metadata disagrees with manifest")
        fields.append(field)
    return EnsembleState(tuple(fields), np.asarray(manifest["occupations"], float),
                         geometry, convention)
