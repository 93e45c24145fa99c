"""Unit-circle localization of all eleven indicators under each boundary condition.

Shows that the clamped plate puts every maximum at the center at k = 2 pi
while the simply supported plate localizes the boundary.
"""

import numpy as np

from bhm.forward import BoundaryCondition
from bhm.geometry import Circle
from bhm.harness.config import ExperimentConfig
from bhm.harness.experiment import compute_images, localization, simulate_data
from bhm.imaging import GridSpec
from bhm.specfun import WaveParams


def main():
    params = WaveParams(2 * np.pi)
    for bc in BoundaryCondition:
        cfg = ExperimentConfig(params=params, curves=(Circle(),), bc=bc, grid=GridSpec(nx=61, ny=61))
        name = bc.name.lower()
        try:
            grids = compute_images(cfg, simulate_data(cfg))
        except Exception as exc:
            print(f"{name:17s} failed: {exc}")
            continue
        marks = []
        for j, g in grids.items():
            c = localization(g, cfg.curves, params.kappa)
            marks.append(f"I{j}:{'ok' if c.passed else 'x'}({c.value:.2f})")
        print(f"{name:17s} " + " ".join(marks))


if __name__ == "__main__":
    main()
