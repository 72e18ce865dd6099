"""Short training run on the 25-Gaussians grid, with and without noising.

Uses a fraction of the full budget so it finishes in about a minute;
expect partial coverage.  The full-budget comparison (20k steps, three
seeds) lives in the acceptance tests, and the command line will run it
for you:

    noisegan train --out run_diff --seed 1
    noisegan train --out run_van  --seed 1 --no-diffusion
"""

import os

import numpy as np

from noisegan import GanConfig, coverage, generate, grid_25, sample_grid, train
from noisegan.svgplot import scatter_chart

OUT = os.path.join(os.path.dirname(__file__), "out", "grid_training")
STEPS = 4000


def run(tag, **overrides):
    grid = grid_25()
    data = sample_grid(grid, 50_000, np.random.default_rng([1, 0]))
    cfg = GanConfig(total_steps=STEPS, seed=1, **overrides)
    gen, _, trace = train(data, cfg)
    samples = generate(gen, 10_000, np.random.default_rng([1, 2]))
    report = coverage(samples, grid)
    print(f"{tag}: modes {report.modes_covered}/25, "
          f"high-quality fraction {report.high_quality_fraction:.3f}, "
          f"final ceiling T={int(trace.column('T')[-1])}")
    return data, samples


def main():
    os.makedirs(OUT, exist_ok=True)
    print(f"{STEPS} steps each (the benchmark setting is 20000):")
    data, noised_samples = run("with noising   ")
    _, vanilla_samples = run("vanilla baseline", diffusion_enabled=False)

    path = os.path.join(OUT, "samples.svg")
    scatter_chart(path, [("data", data[:1500]),
                         ("noising", noised_samples[:1500]),
                         ("vanilla", vanilla_samples[:1500])],
                  title=f"generated samples after {STEPS} steps",
                  xlabel="x1", ylabel="x2")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
