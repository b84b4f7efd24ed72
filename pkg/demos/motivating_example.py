"""Two datasets {X, Y} and {Y, Z} with Y -> X and a latent confounder of Y and Z.

Plain IOD cannot rule out an edge between X and Z; the stored pair structures
can, because Y -> X together with Y <-> Z leaves no room for a directed X-Z edge.
"""
from overlap_causal import MODES, OverlapProblem, discover
from overlap_causal.experiments import load_fixture

fx = load_fixture("motivating")
problem = OverlapProblem(list(fx.variable_sets), truth=fx.graph, name="motivating")
truth = problem.truth_mag()
print("true MAG:", truth.to_text())

for mode in MODES:
    result = discover(problem, mode)
    keys = {m.key() for m in result.mags()}
    print(f"\n{mode}: {result.total_mags} MAGs in {len(result)} classes, truth found: {truth.key() in keys}")
    if result.total_mags <= 6:
        for m in result.mags():
            print("   ", m.to_text())

store = discover(problem, "causal-iod").diagnostics["store"]
print("\nstored pair structures:")
for item in store:
    print("   ", item["pair"], item["structure"])
