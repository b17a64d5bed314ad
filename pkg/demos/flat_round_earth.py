"""Walk through the credibility computation on a four-agent toy world.

Two rival concepts, a flat earth and a round earth, compete to explain five
experiences: three where the horizon looks flat (f1, f2, f3) and two where
the curvature shows (r1, r2).  A flat earth explains the f experiences
perfectly and the r experiences not at all; a round earth explains
everything.  Unexperienced entries carry the neutral likelihood 1/2.
"""

import numpy as np

from epidyn import (
    DiscreteConcepts,
    KnowledgeFunction,
    KnowledgeSetting,
    TabularLikelihood,
    compute_credibility,
    compute_social_learning,
    normalize_rows,
)

experiences = np.arange(5.0)[:, None]  # f1 f2 f3 r1 r2
concepts = DiscreteConcepts(
    [[0.0], [1.0], [2.0]], labels=("none", "flat", "round")
)
setting = KnowledgeSetting(experiences, concepts)

FLAT, ROUND, NONE = [1.0], [2.0], [0.0]
population = [
    KnowledgeFunction(setting, [FLAT, NONE, NONE, NONE, NONE]),   # only f1
    KnowledgeFunction(setting, [FLAT, NONE, NONE, FLAT, NONE]),   # flat twice
    KnowledgeFunction(setting, [ROUND, NONE, NONE, ROUND, NONE]), # round twice
    KnowledgeFunction(setting, [FLAT, NONE, NONE, ROUND, NONE]),  # one of each
]

likelihood = TabularLikelihood(
    np.array(
        [
            # none  flat  round
            [0.5, 1.0, 1.0],
            [0.5, 1.0, 1.0],
            [0.5, 1.0, 1.0],
            [0.5, 0.0, 1.0],
            [0.5, 0.0, 1.0],
        ]
    )
)

print(__doc__)
credibility = compute_credibility(population, likelihood, c_min=0.0)
np.set_printoptions(precision=3, suppress=True)
print("credibility matrix (row i = how much agent i trusts each agent):")
print(credibility)
print()
print("reading the rows:")
print(" - agent 0 only knows f1, where everyone looks equally good")
print(" - agents 1-3 discount agent 0 for never having seen r1 (factor 1/2)")
print(" - agent 1 maps r1 to 'flat', which r1 rules out: zero credibility,")
print("   even from agent 1 herself")
print(" - agent 2 discounts agent 3 for using two concepts where one would")
print("   do (parsimony penalty 1/(1+1))")
print()

print("row-normalized view (each row sums to 1):")
print(normalize_rows(credibility))
print()

structure = np.ones((4, 4))
learning = compute_social_learning(structure, credibility)
print("uniform structure blended with credibility gives the sampling rows:")
print(learning)
print()
print("agent 2 (round-round) is everyone's favourite source.")
