"""A block-shift profile whose s_min really is exponentially small.

With z = sqrt(d)/4 the recursion z x_l = G_l x_{l+1} doubles the norm at
almost every step, so the witness vector certifies s_min <= 2^(1-n/d)|z|.
"""

from rmt_smin import verify as V

for n, d in ((64, 8), (200, 20), (500, 25)):
    rep = V.check_optimality_example(n, d, trials=20, seed=3)
    s = rep.summary
    worst = max(r["smin"] for r in rep.per_trial)
    print(f"n={n} d={d}: threshold {s['threshold']:.2e}, largest s_min {worst:.2e}, "
          f"growth {s['growth_event_frequency']:.0%}, c_hat {s['c_hat']:.3f} ({s['c_hat_kind']})")
