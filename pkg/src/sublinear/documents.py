"""Loading spaces, measures, families and random vectors from JSON documents.

Accepted family documents::

    {"atoms": 2, "members": [[0.5, 0.5], {"weights": [0.3, 0.7]}],
     "values": [[1.0], [-1.0]]}

    {"structure": "homogeneous-product", "n": 2,
     "base_values": [-1, 1], "marginals": [[0.5, 0.5], [0.6, 0.4]]}

    {"structure": "product", "marginals": [[[..], [..]], ...],
     "coordinate_values": [[..], [..]]}

``members`` may accompany a tagged document; it is then checked against the
product reconstruction.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np

from .dependence import ENDCertificate, certify, homogeneous_product_family, product_family
from .errors import StructuralError
from .measure_space import Measure, RandomVector, SampleSpace
from .sublinear_core import HOMOGENEOUS, PRODUCT, MeasureFamily


class FamilyDocument(NamedTuple):
    family: MeasureFamily
    X: Optional[RandomVector]
    certificate: Optional[ENDCertificate]


def read_json(source, base_dir: Optional[Path] = None):
    """A dict passes through; a string/Path is read relative to ``base_dir``."""
    if isinstance(source, dict):
        return source
    path = Path(source)
    if base_dir is not None and not path.is_absolute():
        path = base_dir / path
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise StructuralError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise StructuralError(f"{path}: invalid JSON ({exc})") from exc


def _weights(entry):
    return entry["weights"] if isinstance(entry, dict) else entry


def load_family(doc: dict) -> FamilyDocument:
    if not isinstance(doc, dict):
        raise StructuralError("family document must be a JSON object")
    structure = doc.get("structure", "general")
    try:
        if structure == HOMOGENEOUS:
            marg = [np.asarray(_weights(m), float) for m in doc["marginals"]]
            base = SampleSpace(len(marg[0]))
            model = homogeneous_product_family([Measure(base, w) for w in marg], int(doc["n"]),
                                               doc.get("base_values"))
            F, X = model.family, model.X
        elif structure == PRODUCT:
            rows = []
            for member in doc["marginals"]:
                rows.append([Measure.from_weights(np.asarray(_weights(q), float)) for q in member])
            # factor spaces must be shared objects-by-value across members
            spaces = [q.space for q in rows[0]]
            rows = [[Measure(spaces[i], q.weights) for i, q in enumerate(r)] for r in rows]
            model = product_family(rows, doc.get("coordinate_values"))
            F, X = model.family, model.X
        elif structure == "general":
            members = [np.asarray(_weights(m), float) for m in doc["members"]]
            space = SampleSpace(int(doc.get("atoms", len(members[0]))), doc.get("labels"))
            F = MeasureFamily(space, tuple(Measure(space, w) for w in members))
            X = None
        else:
            raise StructuralError(f"unknown structure tag {structure!r}")
    except (KeyError, IndexError, TypeError) as exc:
        raise StructuralError(f"malformed family document: {exc!r}") from exc

    if structure != "general":
        if "atoms" in doc and int(doc["atoms"]) != F.space.atom_count:
            raise StructuralError("declared atom count does not match the product structure")
        if "members" in doc:
            given = np.asarray([_weights(m) for m in doc["members"]], float)
            if given.shape != F.matrix.shape or np.max(np.abs(given - F.matrix)) > 1e-12:
                raise StructuralError("members do not match the declared product structure")
    if "values" in doc:
        X = RandomVector.from_dict(doc, F.space)
    return FamilyDocument(F, X, certify(F))


def load_measure(doc, space: Optional[SampleSpace] = None) -> Measure:
    if isinstance(doc, dict) and space is None and "atoms" in doc:
        space = SampleSpace.from_dict(doc)
    return Measure.from_dict(doc, space)


def load_random_vector(doc: dict, space: Optional[SampleSpace] = None) -> RandomVector:
    if space is None:
        space = SampleSpace.from_dict(doc) if "atoms" in doc else SampleSpace(len(doc["values"]))
    return RandomVector.from_dict(doc, space)
