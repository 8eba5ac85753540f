"""
Working set growth policies
===========================

Start the working set solver with a badly chosen first size and watch how
each growth policy recovers. Sizing from the current support (the default)
catches up within a handful of outer iterations whether the first guess
was too small or too large; adding a fixed number of features is slow.
"""

from celer_lasso import (CelerConfig, GrowthPolicy, LassoProblem, celer_solve, lambda_max,
                         preprocess, synthesize)

X, y, _ = synthesize(400, 4000, 100, seed=3)
X, y, _ = preprocess(X, y, unit_norm_cols=True, center_y=True, unit_norm_y=True)
prob = LassoProblem(X, y, lambda_max(X, y) / 5)

target = celer_solve(prob, cfg=CelerConfig(eps=1e-10))
s = int((target.beta != 0).sum())
print(f"support size at the solution: {s}\n")

for p_init in (10, 8 * s):
    print(f"first working set size {p_init}")
    for text in ("prune", "doubling", "geometric:4", "linear:10"):
        res = celer_solve(prob, cfg=CelerConfig(eps=1e-6, p_init=p_init,
                                               growth=GrowthPolicy.parse(text)))
        sizes = [o.p_t for o in res.outer_trace if o.inner_epochs]
        shown = " ".join(map(str, sizes[:10])) + (" ..." if len(sizes) > 10 else "")
        print(f"  {text:<12} {len(res.outer_trace):3d} outer, {res.coord_updates:8d} updates: "
              f"{shown}")
    print()
