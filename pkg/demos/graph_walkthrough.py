"""Build the submatrix graph for two small profiles and print what it contains.

Run: python demos/graph_walkthrough.py
"""

from rmt_smin import graph as G
from rmt_smin import profile as P


def show(g):
    for v in g.vertices:
        kind = "terminal" if g.is_terminal(v) else "split"
        label = "{" + ",".join(str(i + 1) for i in v) + "}" if v else "∅"
        print(f"  {label:<14} {kind}")
    print(f"  {len(g.edges)} edges, longest path {g.longest_path()} (bound {g.path_length_bound()})")


# Lower-triangular 4x4 with L^2 = 2: columns 3 and 4 are light, 1 and 2 are heavy.
lower = G.build_graph(P.lower_triangular(4), G.GraphParams.raw_override(4, 2.0))
print("lower triangular, n=4")
show(lower)
print(lower.to_dot())

# The 6x6 cyclic band of width 1 ends in six pairs at cyclic distance 2, plus the empty set.
band = G.build_graph(P.periodic_band(6, 1), G.GraphParams.raw_override(6, 2.0))
print("periodic band, n=6, w=1")
show(band)
print("checks:", G.validate(band))

en = G.enumerate_structures(band, r0=0)
print(f"{en.count} (path, r-sequence) structures; crude bound {en.bound:.3g}")

# With parameters tied to a shift z the thresholds come from z itself.
params = G.GraphParams.from_shift(12, 3.0, kappa=0.3)
g = G.build_graph(P.periodic_band(12, 1), params)
print(f"n=12, z=3, kappa=0.3: {len(g.vertices)} vertices, {len(g.non_empty_terminals)} non-empty terminals")
lad = G.dyadic_ladder(12, params)
print(f"ladder cutoffs p0={lad.p0}, p0~={lad.p0_tilde} (clamped: {not lad.p0_tilde_exact})")
