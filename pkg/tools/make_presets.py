"""Regenerate the shipped scenario presets.

The coefficient and loading matrices are drawn once from fixed seeds and
written to ``src/spatialmc/presets``. Rerunning reproduces the same files.
"""

from pathlib import Path

import numpy as np

from spatialmc.simulate import ScenarioConfig, save_config

OUT = Path(__file__).resolve().parents[1] / "src" / "spatialmc" / "presets"
FAMILIES = {"toy": (4, 1, 1), "high": (12, 3, 2)}
N_OBSERVED, N_UNMEASURED = 2, 2
UNMEASURED_RATIO = 0.5


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for family, (p, q, seed) in FAMILIES.items():
        rng = np.random.default_rng(seed)
        b_o = rng.standard_normal((N_OBSERVED, q))
        b_u = rng.standard_normal((N_UNMEASURED, q))
        b_u *= UNMEASURED_RATIO * np.linalg.norm(b_o) / np.linalg.norm(b_u)
        v, _ = np.linalg.qr(rng.standard_normal((p, q)))
        for scenario in "ABCD":
            cfg = ScenarioConfig(scenario=scenario, b_o=b_o, b_u=b_u, v=v,
                                 name=f"{family}-{scenario}", seed=1)
            save_config(cfg, OUT / f"{family}-{scenario}.json")
            print("wrote", cfg.name)


if __name__ == "__main__":
    main()
