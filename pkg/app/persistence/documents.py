"""
Document files: JSON text <-> pydantic documents <-> domain objects.

This layer keeps file handling and literal grids out of the services.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Union

from pydantic import BaseModel

from app.core.errors import InputError
from app.models.schemas import MatPolyDocument, PencilDocument
from app.services import fields as F
from app.services.bases import basis_from_tag
from app.services.blockpoly import BlockMatrix, MatrixPolynomial, Pencil

logger = logging.getLogger("documents")

PathLike = Union[str, Path]


def _read_text(path: PathLike) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}", detail={"path": str(path)}) from exc


def _validate_json(model: type[BaseModel], text: str, origin: str) -> BaseModel:
    try:
        json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{origin} is not valid JSON: {exc.msg} at line {exc.lineno}") from exc
    return model.model_validate_json(text)


def parse(text: str) -> MatrixPolynomial:
    """Document text to a MatrixPolynomial."""
    doc = _validate_json(MatPolyDocument, text, "document")
    return document_to_matpoly(doc)  # type: ignore[arg-type]


def serialize(p: MatrixPolynomial) -> str:
    return matpoly_to_document(p).model_dump_json(indent=2)


def document_to_matpoly(doc: MatPolyDocument) -> MatrixPolynomial:
    field = F.field_from_tag(doc.field)
    basis = basis_from_tag(doc.basis)
    coeffs = [F.parse_matrix(field, c) for c in doc.coeffs]
    return MatrixPolynomial.from_coeffs(field, basis, coeffs)


def matpoly_to_document(p: MatrixPolynomial) -> MatPolyDocument:
    return MatPolyDocument(
        field=p.field.tag(),
        basis=p.basis.tag(),
        n=p.n,
        grade=p.grade,
        coeffs=[F.format_matrix(p.field, c) for c in p.coeffs],
    )


def document_to_pencil(doc: PencilDocument) -> Pencil:
    field = F.field_from_tag(doc.field)
    basis = basis_from_tag(doc.basis)
    x = BlockMatrix(F.parse_matrix(field, doc.X), doc.n, field)
    y = BlockMatrix(F.parse_matrix(field, doc.Y), doc.n, field)
    ansatz = None if doc.ansatz is None else tuple(field.parse(a) for a in doc.ansatz)
    return Pencil(x, y, basis, ansatz)


def pencil_to_document(pencil: Pencil) -> PencilDocument:
    field = pencil.field
    ansatz = None if pencil.ansatz is None else [field.format(a) for a in pencil.ansatz]
    return PencilDocument(
        field=field.tag(),
        basis=pencil.basis.tag(),
        n=pencil.n,
        k=pencil.k,
        X=pencil.X.format(),
        Y=pencil.Y.format(),
        ansatz=ansatz,
    )


def read_matpoly(path: PathLike) -> MatrixPolynomial:
    doc = _validate_json(MatPolyDocument, _read_text(path), str(path))
    p = document_to_matpoly(doc)  # type: ignore[arg-type]
    logger.debug("read %s: n=%d grade=%d over %s", path, p.n, p.grade, p.field)
    return p


def read_pencil(path: PathLike) -> Pencil:
    doc = _validate_json(PencilDocument, _read_text(path), str(path))
    return document_to_pencil(doc)  # type: ignore[arg-type]


def write_document(path: PathLike, doc: BaseModel) -> None:
    try:
        Path(path).write_text(doc.model_dump_json(indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}", detail={"path": str(path)}) from exc
    logger.info("wrote %s", path)
