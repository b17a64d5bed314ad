"""Two agents, one knob: how self-inertia shapes the road to agreement.

The structure matrix [[a, 1-a], [1-a, a]] says each agent weighs itself by
a and the other by 1-a.  At a = 0.5 both average each other and agreement
is almost immediate; at a = 0.9 each mostly resamples itself and the gap
closes slowly; at a = 1 nobody listens and nothing ever changes.  The decay
of the distance to shared knowledge is geometric, so we report the fitted
per-step rate next to the Dobrushin coefficient that certifies it.
"""

import numpy as np

from epidyn import (
    analyze,
    compute_credibility,
    compute_social_learning,
    ConstantLikelihood,
    fit_decay_rate,
    preset,
    run,
)

print(__doc__)
print(f"{'alpha':>6} {'dobrushin':>10} {'fitted rate':>12} {'d at T=25':>12}")
for alpha in (0.1, 0.3, 0.5, 0.7, 0.9, 1.0):
    setup = preset("test1-self-inertia", alpha=alpha, replicates=50)
    cred = compute_credibility(
        setup.initial.functions, setup.landscape, setup.config.c_min
    )
    learning = compute_social_learning(setup.structure, cred)
    report = analyze(learning)
    result = run(setup.config, setup.structure, setup.landscape, setup.initial)
    mean = result.trace.mean_column("d_nearest")
    rate = fit_decay_rate(mean)
    print(f"{alpha:6.1f} {report.dobrushin:10.3f} {rate:12.4f} {mean[-1]:12.3g}")

print()
print("rates sit near the Dobrushin coefficient: the matrix certifies the")
print("contraction the sampled dynamics then realizes, noise and all.")
print("alpha = 1 keeps the distance glued to its starting value.")
