"""Default numerical tolerances, collected in one place.

The CLI overrides these through flags; library calls take them as keyword
arguments defaulting to ``DEFAULTS``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    rel_tol: float = 1e-10
    nodes_min: int = 64
    nodes_max: int = 65536
    nested_nodes_max: int = 2048
    unit_circle_guard: float = 1e-9
    degeneracy: float = 1e-6
    coincidence: float = 1e-12
    fd_step: float = 1e-6
    max_depth: int = 3
    path_guard: float = 1e9
    ksum_guard: float = 1e8
    density_step: float = 1e-4
    tie_tol: float = 1e-12

    def with_overrides(self, **kwargs) -> "Tolerances":
        clean = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **clean)


DEFAULTS = Tolerances()
