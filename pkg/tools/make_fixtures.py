"""Write the toy-C, 20% MCAR, seed-1 fixture files and their golden metrics.

Data files are regenerated from the preset; ``--golden`` also reruns the
CLI and freezes its reported MSE values into ``toy-c-20.golden.json``.
"""

import json
import sys
from pathlib import Path

from spatialmc.harness import io
from spatialmc.harness.cli import main as cli_main
from spatialmc.simulate import gen_dataset, load_preset

ROOT = Path(__file__).resolve().parents[1] / "fixtures"
STEM = ROOT / "toy-c-20"


def cli_args(out_prefix):
    return ["--quiet", "complete", "--input", f"{STEM}.csv", "--method", "smc",
            "--coords", f"{STEM}.coords.csv", "--covariates", f"{STEM}.covariates.csv",
            "--rank", "1", "--truth", f"{STEM}.truth.csv",
            "--predict", f"{STEM}.new-coords.csv",
            "--predict-covariates", f"{STEM}.new-covariates.csv",
            "--predict-truth", f"{STEM}.new-truth.csv", "--output", str(out_prefix)]


def main(golden=False):
    ROOT.mkdir(exist_ok=True)
    cfg = load_preset("toy-C").replace(mcar_level=0.2, seed=1)
    ds = gen_dataset(cfg)
    names = [f"x{j + 1}" for j in range(cfg.p)]
    cov_names = [f"ro{j + 1}" for j in range(ds.r_o.shape[1])]
    io.write_matrix(f"{STEM}.csv", ds.x_masked, names)
    io.write_matrix(f"{STEM}.truth.csv", ds.x_monitor, names)
    io.write_coords(f"{STEM}.coords.csv", ds.monitor_coords)
    io.write_matrix(f"{STEM}.covariates.csv", ds.r_o_monitor, cov_names)
    io.write_coords(f"{STEM}.new-coords.csv", ds.new_coords)
    io.write_matrix(f"{STEM}.new-covariates.csv", ds.r_o_new, cov_names)
    io.write_matrix(f"{STEM}.new-truth.csv", ds.x_new, names)
    if golden:
        out = Path("/tmp/toy-c-20-golden")
        if cli_main(cli_args(out)) != 0:
            raise SystemExit("CLI run failed")
        meta = json.loads(Path(f"{out}.fit.json").read_text())
        keep = {k: meta[k] for k in ("mse_missing_entries", "mse_new_locations", "lambda",
                                     "attained_rank")}
        Path(f"{STEM}.golden.json").write_text(json.dumps(keep, indent=2) + "\n")
        print(keep)


if __name__ == "__main__":
    main(golden="--golden" in sys.argv)
