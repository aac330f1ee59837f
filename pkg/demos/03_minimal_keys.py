#!/usr/bin/env python3
"""Key-rate optimal constructions on cyclic networks.

The per-link-key scheme tolerates maximal collusion but stores a full
input's worth of key per user.  On (multiple) cyclic networks a single
key symbol per user suffices: this script builds the weighted scheme,
checks its three structural conditions, and shows that its rates meet
the lower bounds exactly.  The closed-form two-regular construction is
shown last, matrix by matrix.
"""

import numpy as np

from hsa_lab import (
    PrimeField,
    build_cyclic,
    build_multiple_cyclic,
    build_scheme_a,
    build_scheme_b,
    build_scheme_c,
    check_weighted_conditions,
    key_lower,
    rates,
    sweep_security,
)
from hsa_lab.verify import check_decodability

top = build_cyclic(6, 2)
field = PrimeField(13)
print("cyclic network K=N=6, n=m=2 over F_13, one colluding relay\n")
for t_u in (0, 1, 2):
    scheme = build_scheme_b(top, field, t_u=t_u, seed=7)
    conds = check_weighted_conditions(scheme)
    achieved = rates(scheme)
    rz, rzs = key_lower(top, 1, t_u)
    sweep = sweep_security(scheme, 1, t_u, method="rank")
    print(f"t_u={t_u}: conditions hold={conds.all_hold}, "
          f"decodable={check_decodability(scheme, samples=2000, seed=t_u)}, "
          f"security {sweep.passed}/{sweep.checked}")
    print(f"   achieved (r_z, r_zsigma) = ({achieved.r_z}, {achieved.r_zsigma});"
          f" lower bounds = ({rz}, {rzs})  ->  "
          + ("OPTIMAL" if (achieved.r_z, achieved.r_zsigma) == (rz, rzs) else "loose"))

print("\nfor contrast, the per-link-key scheme on the same network:")
contrast = build_scheme_a(top, PrimeField(7), seed=0)
a_rates = rates(contrast)
rz, rzs = key_lower(top, 1, 2)
print(f"   achieved (r_z, r_zsigma) = ({a_rates.r_z}, {a_rates.r_zsigma}); "
      f"lower bounds = ({rz}, {rzs})  ->  achievable, not tight")

print("\ntwo cyclic copies sharing six relays (12 users) over F_29:")
stacked = build_scheme_b(build_multiple_cyclic(6, 2, 2), PrimeField(29), t_u=0, seed=2)
print(f"   conditions hold: {check_weighted_conditions(stacked).all_hold}; "
      f"rates {rates(stacked)}")

print("\nclosed-form construction, N=5 over F_7:")
closed = build_scheme_c(5, PrimeField(7))
print("decoding matrix:")
print(np.array(closed.decode_matrix.tolist()))
print("link weights (row i supported on user i's two relays):")
print(np.array(closed.key_weights.tolist()))
print("key generator (identity plus one cancelling column):")
print(np.array(closed.key_map.tolist()))
prod = closed.key_map @ closed.key_weights @ closed.decode_matrix.T
print(f"generator @ weights @ decoder^T == 0: {prod.is_zero()}")
print(f"rates: {rates(closed)}  (source-key rate (N-1)/2 = {rates(closed).r_zsigma})")
