"""End-to-end model problems on eps-indexed nets."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..nets import GridNet, fmt


@dataclass
class ScenarioResult:
    """Output of one scenario run.

    ``solution`` maps a label to a GridNet or to per-eps sample tables
    ``[(eps, {column: array})]``; ``checks`` maps invariant names to booleans.
    """

    name: str
    solution: dict
    classifications: dict
    shadow: dict
    conservation: dict
    params: dict
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(bool(v) for v in self.checks.values())

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "checks": {k: bool(v) for k, v in self.checks.items()},
            "classifications": self.classifications,
            "shadow": self.shadow,
            "conservation": self.conservation,
            "params": self.params,
        }

    def csv_files(self) -> dict:
        """{filename: text}, one file per solution label."""
        out = {}
        for label, sol in self.solution.items():
            if isinstance(sol, GridNet):
                out[f"{label}.csv"] = sol.to_csv()
                continue
            cols = list(sol[0][1].keys())
            lines = [",".join(["epsilon"] + cols)]
            for e, table in sol:
                arrs = [np.asarray(table[c], float) for c in cols]
                for row in zip(*arrs):
                    lines.append(",".join([fmt(e)] + [fmt(v) for v in row]))
            out[f"{label}.csv"] = "\n".join(lines) + "\n"
        return out


def per_eps(grid, values) -> list:
    return [{"epsilon": float(e), "value": float(v)} for e, v in zip(grid.values, values)]


from .particles import central_field, delta_particle, geodesic_energy  # noqa: E402
from .elastic import beam_with_joint, hard_rod, rod_general, string_with_spring, weierstrass  # noqa: E402
from .waves import wave_delta_spring  # noqa: E402

SCENARIOS = {
    "delta_particle": delta_particle,
    "central_field": central_field,
    "string_with_spring": string_with_spring,
    "beam_with_joint": beam_with_joint,
    "hard_rod": hard_rod,
    "rod_general": rod_general,
    "weierstrass": weierstrass,
    "wave_delta_spring": wave_delta_spring,
    "geodesic_energy": geodesic_energy,
}

__all__ = ["SCENARIOS", "ScenarioResult"] + list(SCENARIOS)
