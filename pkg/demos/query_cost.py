"""
Oracle query budget for simulating a combined schedule
======================================================

The Dyson-series query bound grows almost linearly in the total evolution
time. Lambda is measured directly from the family and the path.
"""

import numpy as np

from ccadiabatic import CostParams, Search, lae_path, lambda_smooth, query_bound

family, path = Search(5), lae_path(5)
for maxT in (1e2, 1e3, 1e4):
    lam = lambda_smooth(family, path, 4, time_scale=maxT)
    p = CostParams(M=2, d=1, k=2, Lam=lam, maxT=maxT, eps=1e-3, L=1, n=8, n_H=64, Gamma=1.0, N_T=64)
    rep = query_bound(p)
    print(f"maxT={maxT:8.0f}  Lambda={lam:.4f}  N={rep.N_queries:.3e}  N/maxT={rep.N_queries / maxT:.3e}")

# %%
# N / maxT creeps up like maxT^(1/(2k)). Larger k flattens the growth but
# pays a (5/3)^k prefactor, so the best k at fixed maxT is moderate.
print(np.round([query_bound(CostParams(M=2, d=1, k=k, Lam=1.0, maxT=1e4, eps=1e-3, L=1, n=8, n_H=64,
                                       Gamma=1.0, N_T=64)).N_queries for k in (1, 2, 3)], -3))
