"""Disjoint open axis-aligned boxes in R^m used as cluster regions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GraphonError

DEFAULT_COVERAGE_TOL = 0.01


@dataclass(frozen=True, eq=False)
class Box:
    """Open box Π_a (lo_a, hi_a); infinite entries mean unbounded sides."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.array([-np.inf if v is None else v for v in np.atleast_1d(self.lo)], dtype=float)
        hi = np.array([np.inf if v is None else v for v in np.atleast_1d(self.hi)], dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1 or lo.size == 0:
            raise GraphonError("box corners must be vectors of the same length")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)) or np.any(lo >= hi):
            raise GraphonError("every box side must satisfy lo < hi")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def interval(cls, lo, hi) -> "Box":
        return cls([lo], [hi])

    @property
    def dim(self) -> int:
        return self.lo.size

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all((x > self.lo) & (x < self.hi)))

    def in_closure(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all((x >= self.lo) & (x <= self.hi)))

    def gaps(self, other: "Box") -> np.ndarray:
        """Per-axis distance between the two boxes (0 where the sides overlap)."""
        return np.maximum(0.0, np.maximum(other.lo - self.hi, self.lo - other.hi))

    def disjoint(self, other: "Box") -> bool:
        return bool(np.any((self.hi <= other.lo) | (other.hi <= self.lo)))

    def distance(self, other: "Box") -> float:
        return float(np.linalg.norm(self.gaps(other)))

    def point_distance(self, x) -> float:
        x = np.asarray(x, dtype=float)
        d = np.maximum(0.0, np.maximum(self.lo - x, x - self.hi))
        return float(np.linalg.norm(d))

    def to_json(self) -> dict:
        conv = lambda a: [None if not np.isfinite(v) else float(v) for v in a]
        return {"lo": conv(self.lo), "hi": conv(self.hi)}


@dataclass(frozen=True, eq=False)
class RegionSet:
    """Regions A_1..A_N (color j is region j), optional separation and coverage slack."""

    boxes: tuple
    d_min: float | None = None
    coverage_tol: float = DEFAULT_COVERAGE_TOL

    def __post_init__(self):
        boxes = tuple(self.boxes)
        if not boxes:
            raise GraphonError("need at least one region")
        if len({b.dim for b in boxes}) != 1:
            raise GraphonError("all regions must have the same dimension")
        for i in range(len(boxes)):
            for j in range(i + 1, len(boxes)):
                if not boxes[i].disjoint(boxes[j]):
                    raise GraphonError(f"regions {i + 1} and {j + 1} overlap")
                if self.d_min is not None and boxes[i].distance(boxes[j]) < self.d_min - 1e-12:
                    raise GraphonError(f"regions {i + 1} and {j + 1} are closer than d_min = {self.d_min}")
        if self.d_min is not None and self.d_min <= 0:
            raise GraphonError("d_min must be positive")
        if not 0 <= self.coverage_tol <= 1:
            raise GraphonError("coverage tolerance must lie in [0, 1]")
        object.__setattr__(self, "boxes", boxes)

    @classmethod
    def thresholds(cls, alpha: float, lo: float | None = None, hi: float | None = None, **kw) -> "RegionSet":
        """Two 1-d regions (lo, α) and (α, hi)."""
        return cls((Box.interval(lo, alpha), Box.interval(alpha, hi)), **kw)

    @property
    def dim(self) -> int:
        return self.boxes[0].dim

    def __len__(self):
        return len(self.boxes)

    def to_json(self) -> list:
        return [b.to_json() for b in self.boxes]

    @classmethod
    def from_json(cls, data, d_min=None, coverage_tol=DEFAULT_COVERAGE_TOL) -> "RegionSet":
        if isinstance(data, dict):
            d_min = data.get("d_min", d_min)
            coverage_tol = data.get("coverage_tol", coverage_tol)
            data = data["regions"]
        try:
            boxes = [Box(b["lo"], b["hi"]) for b in data]
        except (KeyError, TypeError) as exc:
            raise GraphonError(f"malformed region list: {exc}") from None
        return cls(tuple(boxes), d_min=d_min, coverage_tol=coverage_tol)
