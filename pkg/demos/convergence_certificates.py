"""Spectral certificates: reading convergence off the matrices.

Before running a single simulation step, the learning matrix already tells
the story.  Primitivity guarantees a unique dominant eigenvalue, the
second eigenvalue modulus and the Dobrushin coefficient bound the
contraction per step, and the sample-size calculator says how many
observations per step keep the stochastic dynamics glued to that ideal
contraction with high confidence.
"""

import numpy as np

from epidyn import (
    analyze,
    communicates,
    covering_number_log_bound,
    dobrushin_coefficient,
    entry_lower_bound,
    grid_setting,
    is_primitive,
    normalize_rows,
    required_sample_size,
    second_modulus,
)

print(__doc__)

banded = np.array(
    [
        [1.0, 1.0, 0.0, 0.0],
        [1.0, 1.0, 1.0, 0.0],
        [0.0, 1.0, 1.0, 1.0],
        [0.0, 0.0, 1.0, 1.0],
    ]
)
primitive, exponent = is_primitive(banded)
print(f"banded chain of four agents: primitive={primitive}, first positive power={exponent}")
print(f"  ends communicate: {communicates(banded, 0, 3)} and {communicates(banded, 3, 0)}")

cycle = np.array([[0.0, 1.0], [1.0, 0.0]])
print(f"pure two-cycle: primitive={is_primitive(cycle)[0]} "
      f"(powers alternate, second eigenvalue modulus {second_modulus(cycle):.0f})")
print()

lam = normalize_rows(banded)
report = analyze(lam)
print("row-normalized banded chain as a learning matrix:")
print(f"  dobrushin coefficient: {report.dobrushin:.4f}")
print(f"  second eigenvalue modulus: {report.second_modulus:.4f}")
print(f"  min entry: {report.min_entry:.4f}")
print()

gamma = np.array([[0.9, 0.1], [0.1, 0.9]])
print("closed-form floor on learning-matrix entries (positive structure,")
print(f"credibility floor 0.1): {entry_lower_bound(gamma, 0.1):.5f}")
print()

setting = grid_setting(5)
print("tabular hypothesis class over the box [-10, 10], five experiences:")
for eps in (2.0, 1.0, 0.5):
    print(f"  log covering number at radius {eps}: "
          f"{covering_number_log_bound(setting, eps):.2f}")
print()

print("observations per step sufficient for the high-confidence contraction")
print("(two agents, bound M=20, per-step rate 0.9, confidence 90%):")
for t in (1, 5, 10):
    m = required_sample_size(t, 2, 20.0, 0.9, 0.1, 8.944, setting)
    print(f"  through step {t:2d}: m >= {m:,}")
print()
print("the requirement grows with the horizon: holding a geometric error")
print("envelope for longer needs geometrically more evidence per step.")
