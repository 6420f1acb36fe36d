"""From a raw residual stream to batch densities.

A condition monitor rarely reasons about individual samples.  It cuts the
residual stream into fixed-size batches and summarizes each batch as a
Gaussian pdf; everything downstream (distinguishability, thresholds,
classification) works on those pdfs.  This script walks that pipeline on a
small synthetic stream, then corrupts a few samples to show why the
trimmed covariance estimator is the safer default on real data.
"""

import numpy as np

from kldiag import (
    ResidualSeries,
    estimate_gaussian,
    estimate_gaussian_trimmed,
    partition,
)

rng = np.random.default_rng(20)

# A 2-d residual stream: fault-free for 300 samples, then a mean shift.
nominal = rng.normal(size=(300, 2)) @ np.array([[0.05, 0.0], [0.01, 0.04]])
faulty = rng.normal(size=(200, 2)) @ np.array([[0.05, 0.0], [0.01, 0.04]])
faulty[:, 0] += 0.12

series = ResidualSeries(samples=np.vstack([nominal, faulty]))
batches = partition(series, batch_size=50)
print(f"{len(series)} samples -> {len(batches)} batches of 50")

print("\nper-batch mean of the first residual (the fault enters at t=300):")
for batch in batches:
    pdf = estimate_gaussian(batch)
    print(f"  t={batch.offset:3d}..{batch.offset + len(batch) - 1:3d}   "
          f"mean_0 = {pdf.mean[0]:+.4f}")

# Now corrupt 4 of the 50 samples in the first batch with large spikes, as a
# stuck ADC or a communication glitch would.
corrupt = np.array(batches[0].samples)
corrupt[[7, 19, 23, 41]] += 1.5
spiky = partition(ResidualSeries(samples=corrupt), batch_size=50)[0]

plain = estimate_gaussian(spiky)
robust = estimate_gaussian_trimmed(spiky, trim_fraction=0.1)
reference = estimate_gaussian(batches[0])

print("\ncovariance trace under 4/50 corrupted samples:")
print(f"  clean batch        {np.trace(reference.cov):.6f}")
print(f"  plain estimate     {np.trace(plain.cov):.6f}")
print(f"  trimmed estimate   {np.trace(robust.cov):.6f}")
print("\nthe trimmed fit discards the highest-Mahalanobis tenth of the batch,")
print("so the spikes barely move it; the plain fit inflates by an order of")
print("magnitude and would blur every divergence computed from it.")
