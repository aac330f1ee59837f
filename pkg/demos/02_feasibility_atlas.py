#!/usr/bin/env python3
"""Feasibility thresholds and key-rate lower bounds across small networks.

For every cyclic network up to six relays, prints where a scheme at
per-link load 1/n stops existing as collusion grows, and the exact key
bounds inside the feasible region.
"""

from hsa_lab import (
    bounds_report,
    build_cyclic,
    collusion_threshold,
    pair_cyclic_region,
    feasibility,
    min_cut,
    reference_region,
)

for k in range(3, 7):
    for n in range(2, k):
        top = build_cyclic(k, n)
        print(f"\ncyclic network K={k}, n={n}  (min-cut {min_cut(top)}, "
              f"per-link load 1/{n})")
        for t_h in range(1, k - n + 1):
            thr = collusion_threshold(top, t_h)
            print(f"  t_h={t_h}: tolerates up to {thr - 1} colluding users")
        grid = []
        for t_h in range(1, k - n + 2):
            row = "".join("F" if t_h <= k - n and feasibility(top, t_h, t_u) else "."
                          for t_u in range(top.N + 1))
            grid.append(f"    t_h={t_h}: {row}")
        print("  feasible (F) over t_u = 0..N:")
        print("\n".join(grid))

print("\nkey-rate lower bounds on cyclic K=6, n=2 (one colluding relay):")
top = build_cyclic(6, 2)
for t_u in range(0, 5):
    rep = bounds_report(top, 1, t_u)
    print(f"  t_u={t_u}: r_z >= {rep.rz_lower}, r_zsigma >= {rep.rzsigma_lower}"
          + (f"  [{rep.special_case}]" if rep.special_case else ""))

print("\noptimal key rates for two-regular cyclic networks (N users, T colluders):")
for n_users in (5, 6):
    for t in range(0, n_users):
        region = pair_cyclic_region(n_users, t)
        if region.exists:
            print(f"  N={n_users} T={t}: r_z={region.rz}, r_zsigma={region.rzsigma}"
                  f" ({region.clause})")
        else:
            print(f"  N={n_users} T={t}: no scheme at optimal communication load")

print("\nreference regions from earlier settings:")
tree = reference_region("tree", U=3, V=2, T=1)
print(f"  tree U=3 V=2 T=1: {dict((k, str(v)) for k, v in tree.bounds.items())}")
print(f"    notes: {tree.server_security_terms}")
cyc = reference_region("cyclic_nocollusion", K=4, n=2)
print(f"  cyclic K=4 n=2, no user collusion: "
      f"{dict((k, str(v)) for k, v in cyc.bounds.items())}")
