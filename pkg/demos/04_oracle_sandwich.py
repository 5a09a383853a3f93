"""Trap the true infimum between a closed-form lower bound and the best
feasible function a search can find.
"""
from dyadic_bellman.bellman_forms import BellmanQuery
from dyadic_bellman.infimum_oracle import ObjectiveSpec, sandwich

cases = [
    ("equality case, F/f^p = N", BellmanQuery(N=2, p=2, F=2.0, f=1.0, q=3), ObjectiveSpec("strong_q", 2, q=3)),
    ("generic strong bound", BellmanQuery(N=2, p=2, F=3.0, f=1.0, q=3), ObjectiveSpec("strong_q", 2, q=3)),
    ("top quarter", BellmanQuery(N=2, p=2, F=2.0, f=1.0, kappa=0.25),
     ObjectiveSpec("top_kappa_p", 2, kappa=0.25)),
]
for label, query, spec in cases:
    print(label)
    try:
        results = sandwich(query, spec, [2, 3, 4], seeds=(0, 1), iteration_budget=400)
    except ValueError as exc:
        print("  ", exc)
        continue
    for r in results:
        print(f"   depth {r.m}: {r.lower:.6f} <= inf <= {r.upper:.6f}   gap {r.gap:.2e}")
