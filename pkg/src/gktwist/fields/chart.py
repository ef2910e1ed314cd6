from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expr import Var


class DomainError(ValueError):
    """A point lies outside the rectangular chart domain."""


class ChartMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class Chart:
    """Rectangular coordinate chart: ordered coordinate names and bounds."""

    names: tuple
    bounds: tuple

    def __post_init__(self):
        names = tuple(self.names)
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "bounds", bounds)
        if len(set(names)) != len(names):
            raise ValueError(f"coordinate names must be unique: {names}")
        if len(bounds) != len(names):
            raise ValueError("one (lo, hi) bound pair per coordinate is required")
        for name, (lo, hi) in zip(names, bounds):
            if not (np.isfinite(lo) and np.isfinite(hi)) or hi <= lo:
                raise ValueError(f"bad bounds for {name!r}: {(lo, hi)}")

    @property
    def dim(self) -> int:
        return len(self.names)

    def coords(self):
        return tuple(Var(n) for n in self.names)

    def check(self, points) -> np.ndarray:
        """Return ``points`` as an (N, dim) array, raising if any is outside."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[-1] != self.dim:
            raise ValueError(f"expected points with {self.dim} coordinates, got shape {pts.shape}")
        lo = np.array([b[0] for b in self.bounds])
        hi = np.array([b[1] for b in self.bounds])
        outside = ~np.all((pts >= lo) & (pts <= hi), axis=1)
        if np.any(outside):
            bad = pts[np.argmax(outside)]
            raise DomainError(f"point {bad.tolist()} outside chart {dict(zip(self.names, self.bounds))}")
        return pts

    def sample(self, rng: np.random.Generator, n: int, margin: float = 0.0) -> np.ndarray:
        """Uniform random interior points, shrinking each side by ``margin`` (a fraction)."""
        lo = np.array([b[0] for b in self.bounds])
        hi = np.array([b[1] for b in self.bounds])
        width = hi - lo
        return rng.uniform(lo + margin * width, hi - margin * width, size=(n, self.dim))

    def grid(self, n: int) -> np.ndarray:
        axes = [np.linspace(lo, hi, n) for lo, hi in self.bounds]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def same_as(self, other: "Chart") -> None:
        if self != other:
            raise ChartMismatchError(f"fields live on different charts: {self.names} vs {other.names}")
