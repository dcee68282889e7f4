from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class ExponentCurve:
    """Exponent values on a rate grid, with the optimizer found at each rate.

    ``kind`` is ``"converse"`` (lower bound) or ``"achievability"`` (upper
    bound). ``param`` holds s* for the converse and alpha* for the
    achievability curve; ``argmin`` holds Q_X* or P_X* respectively.
    """

    kind: str
    rates: np.ndarray
    values: np.ndarray
    param: np.ndarray
    argmin: list[np.ndarray]
    diagnostics: list[dict] = field(default_factory=list)

    def __len__(self):
        return len(self.rates)

    def monotonicity_violation(self) -> float:
        """Largest increase between consecutive rates (0 if non-increasing)."""
        if len(self.values) < 2:
            return 0.0
        return float(max(0.0, np.max(np.diff(self.values))))


def rate_grid(start: float, stop: float, step: float) -> np.ndarray:
    if step <= 0:
        raise ValueError("rate step must be positive")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    if n < 1:
        raise ValueError("empty rate grid")
    return np.round(start + step * np.arange(n), 12)


def digest(p: np.ndarray) -> str:
    return "[" + " ".join(f"{v:.6f}" for v in np.asarray(p)) + "]"
