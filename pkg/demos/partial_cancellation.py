"""
Cancelling the first-order error with a dual path
=================================================

Branch A follows a locally adiabatic schedule. Branch B copies it up to
s = 0.8 and then turns around with a polynomial tail whose derivative at the
end has the opposite sign. Choosing T_B and the mixing angle so the two
boundary terms cancel leaves a combined error of order 1/T^2.
"""

import numpy as np

from ccadiabatic import Search, combine, evolve, ground_state, lae_path, solve_partial

family = Search(5)
f_A = lae_path(5)
start = ground_state(family)

sol = solve_partial(family, f_A, 80.0, level=1, delta=0.2)
print("branch times:", np.round(sol.times, 4), " theta:", round(sol.theta, 6))
print(sol.diagnostics)

# %%
# Combined amplitude vs the single run at the longer of the two branch times.
for T_A in (200.0, 400.0, 800.0):
    sol = solve_partial(family, f_A, T_A, level=1, delta=0.2, tracks=sol.tracks)
    runs = [evolve(family, b.path, b.T, start, tr=tr) for b, tr in zip(sol.plan.branches, sol.tracks)]
    out = combine(runs, sol.plan, sol.tracks[0])
    single = evolve(family, f_A, max(sol.times), start, tr=sol.tracks[0])
    g = sol.tracks[0].vectors[-1][:, 0]
    single_err = np.linalg.norm(single.final_state - g * (g.conj() @ single.final_state))
    print(f"T_A={T_A:6.0f}  combined={out.diabatic_error:.3e}  single={single_err:.3e}  p={out.p_success:.6f}")
