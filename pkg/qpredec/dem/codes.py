"""CSS code specifications."""
import json
import os
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np


def _binary_matrix(rows, n: int, name: str) -> np.ndarray:
    matrix = np.asarray(rows, dtype=np.int64)
    if matrix.size == 0:
        return np.zeros((0, n), dtype=np.uint8)
    if matrix.ndim != 2 or matrix.shape[1] != n:
        raise ValueError(f"`{name}` shape must be (rows, {n}), got {matrix.shape}.")
    if not np.isin(matrix, (0, 1)).all():
        raise ValueError(f"`{name}` entries must be 0 or 1.")
    return matrix.astype(np.uint8)


def _orthogonal(a: np.ndarray, b: np.ndarray) -> bool:
    return not ((a.astype(np.int64) @ b.T.astype(np.int64)) % 2).any()


@dataclass(frozen=True, eq=False)
class CssCodeSpec:
    """A CSS code given by its check and logical matrices.

    Parameters
    ----------
    name : str
    n : int
        Number of physical qubits.
    hx, hz : array-like, shape [num_checks, n]
        X-type and Z-type check matrices over GF(2).
    lx, lz : array-like, shape [k, n]
        X-type and Z-type logical operators.
    d : int, optional
        Code distance, informational only.
    """
    name: str
    n: int
    hx: np.ndarray
    hz: np.ndarray
    lx: np.ndarray
    lz: np.ndarray
    d: Optional[int] = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"`n` must be positive, got {self.n}.")
        for key in ("hx", "hz", "lx", "lz"):
            object.__setattr__(self, key, _binary_matrix(getattr(self, key), self.n, key))
        if not _orthogonal(self.hx, self.hz):
            raise ValueError("rows of `hx` must be orthogonal to rows of `hz` over GF(2).")
        if not _orthogonal(self.lx, self.hz):
            raise ValueError("rows of `lx` must commute with rows of `hz`.")
        if not _orthogonal(self.lz, self.hx):
            raise ValueError("rows of `lz` must commute with rows of `hx`.")
        if self.d is not None and self.d < 1:
            raise ValueError(f"`d` must be positive, got {self.d}.")

    @property
    def k(self) -> int:
        return self.lx.shape[0]

    def sector_matrices(self, sector: str):
        """Return (check matrix, logical matrix) seen by the given decoding sector.

        The Z sector detects X data errors with ``hz`` and reads them out on ``lz``;
        the X sector uses ``hx`` and ``lx``.
        """
        if sector == "Z":
            return self.hz, self.lz
        if sector == "X":
            return self.hx, self.lx
        raise ValueError(f"`sector` must be 'X' or 'Z', got {sector!r}.")

    def to_dict(self) -> dict:
        spec = {
            "name": self.name,
            "n": self.n,
            "hx": self.hx.tolist(),
            "hz": self.hz.tolist(),
            "lx": self.lx.tolist(),
            "lz": self.lz.tolist(),
        }
        if self.d is not None:
            spec["d"] = self.d
        return spec

    @classmethod
    def from_dict(cls, spec: dict) -> "CssCodeSpec":
        missing = {"name", "n", "hx", "hz", "lx", "lz"} - set(spec)
        if missing:
            raise ValueError(f"code spec is missing keys {sorted(missing)}.")
        return cls(
            name=str(spec["name"]),
            n=int(spec["n"]),
            hx=spec["hx"],
            hz=spec["hz"],
            lx=spec["lx"],
            lz=spec["lz"],
            d=int(spec["d"]) if spec.get("d") is not None else None,
        )


def load_code_spec(path: Union[str, os.PathLike]) -> CssCodeSpec:
    with open(path, "r", encoding="utf-8") as f:
        return CssCodeSpec.from_dict(json.load(f))


def repetition_code(n: int) -> CssCodeSpec:
    """Bit-flip repetition code on ``n`` qubits (Z checks on neighbouring pairs)."""
    if n < 2:
        raise ValueError(f"`n` must be >= 2, got {n}.")
    hz = np.zeros((n - 1, n), dtype=np.uint8)
    for c in range(n - 1):
        hz[c, c] = hz[c, c + 1] = 1
    lz = np.zeros((1, n), dtype=np.uint8)
    lz[0, 0] = 1
    return CssCodeSpec(
        name=f"repetition-{n}",
        n=n,
        hx=np.zeros((0, n), dtype=np.uint8),
        hz=hz,
        lx=np.ones((1, n), dtype=np.uint8),
        lz=lz,
        d=n,
    )
