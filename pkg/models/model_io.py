# models/model_io.py
# =============================================================================
"""Model files: a '# key value' header followed by the parameters.

Linear models store one sparse weight row per type in the feature-matrix row
format. Embedding models store U and V as dense row-major blocks.
"""
import json
import logging
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from models.embedding_model import EmbeddingModel
from models.linear_model import LinearModel
from utils.exceptions import ParseError
from utils.helpers import format_number
from vector_store.feature_store import read_sparse_header, read_sparse_rows
from vector_store.sparse import FeatureSpace

logger = logging.getLogger(__name__)

Model = Union[LinearModel, EmbeddingModel]


def _write_header(f, model: Model, type_symbols: List[str]) -> None:
    f.write(f"# model {model.algorithm}\n")
    f.write(f"# algorithm {model.config.get('algorithm', model.algorithm)}\n")
    f.write(f"# d_e {model.space.total_dim}\n")
    f.write(f"# num_types {model.num_types}\n")
    f.write(f"# config {json.dumps(model.config, sort_keys=True)}\n")
    f.write(f"# types {json.dumps(type_symbols)}\n")
    for block in model.space.blocks:
        f.write(f"# block {block.name} {block.offset} {block.width}\n")


def write_model(path, model: Model, type_symbols: List[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        _write_header(f, model, type_symbols)
        if isinstance(model, LinearModel):
            for t, symbol in enumerate(type_symbols):
                nz = np.flatnonzero(model.weights[t])
                row = " ".join(f"{i}:{format_number(model.weights[t, i])}" for i in nz.tolist())
                f.write(f"{symbol}\t{row}\n")
        else:
            f.write(f"# d_t {model.V.shape[0]}\n")
            f.write(f"# d {model.d}\n")
            for name, matrix in (("U", model.U), ("V", model.V)):
                for r in range(matrix.shape[0]):
                    f.write(f"{name}\t" + " ".join(format_number(x) for x in matrix[r].tolist()) + "\n")
    logger.info("Wrote %s model to %s", model.algorithm, path)


def read_model(path) -> Tuple[Model, List[str]]:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        header, blocks, first = read_sparse_header(f, path.name)
        try:
            kind = header["model"]
            d_e = int(header["d_e"])
            num_types = int(header["num_types"])
            config = json.loads(header.get("config", "{}"))
            type_symbols = json.loads(header["types"])
        except (KeyError, ValueError) as e:
            raise ParseError(f"incomplete model header: {e}", None, path.name) from None
        space = FeatureSpace(blocks)
        if space.total_dim != d_e:
            raise ParseError(f"block widths sum to {space.total_dim}, header says d_e={d_e}", None, path.name)
        if kind == "linear":
            weights = np.zeros((num_types, d_e))
            position = {s: i for i, s in enumerate(type_symbols)}
            for symbol, indices, values in read_sparse_rows(f, first, d_e, path.name):
                if symbol not in position:
                    raise ParseError(f"weight row for undeclared type '{symbol}'", None, path.name)
                weights[position[symbol], indices] = values
            return LinearModel(weights, space, config), type_symbols
        if kind == "embedding":
            try:
                d_t, d = int(header["d_t"]), int(header["d"])
            except (KeyError, ValueError) as e:
                raise ParseError(f"incomplete embedding header: {e}", None, path.name) from None
            rows = {"U": [], "V": []}
            lines = ([first] if first is not None else [])
            for line_number, line in lines + list(enumerate(f, start=(first[0] + 1 if first else 1))):
                name, _, body = line.rstrip("\n").partition("\t")
                if name not in rows:
                    raise ParseError(f"unexpected matrix row '{name}'", line_number, path.name)
                try:
                    rows[name].append([float(x) for x in body.split()])
                except ValueError as e:
                    raise ParseError(f"bad {name} entry: {e}", line_number, path.name) from None
            try:
                U = np.array(rows["U"], dtype=np.float64).reshape(d_e, d)
                V = np.array(rows["V"], dtype=np.float64).reshape(d_t, d)
            except ValueError:
                raise ParseError(f"U/V rows do not form {d_e}x{d} and {d_t}x{d} matrices", None, path.name) from None
            return EmbeddingModel(U, V, space, config), type_symbols
    raise ParseError(f"unknown model kind '{kind}'", None, path.name)
