"""How many bits does a robot need to read a hidden switch?

A two-action task: one action works well (90%) and the other badly (20%),
and which is which depends on a switch the robot can only learn by
looking.  The switch is the expensive state.  Sweeping beta shows the
price of reading it, and a constrained solve finds the cheapest policy
that still succeeds 95% of the time.

    python demos/hidden_switch.py
"""

from pathlib import Path

import numpy as np

from te_mdp.io import read_scenario
from te_mdp.solver import SolverConfig, solve_constrained, sweep

here = Path(__file__).parent
sc = read_scenario(here / "scenarios" / "switch.json")
pm = sc.product()
print(f"{sc.name}: '{sc.formula}' within T = {sc.horizon}, {pm.n_states} product states\n")

betas = np.logspace(-2, 2, 9)
reports = sweep(pm, betas, SolverConfig(T=sc.horizon))
print(f"{'beta':>8} {'TE [bits]':>10} {'P(fail)':>9}")
for b, r in zip(betas, reports):
    print(f"{b:8.3g} {r.transfer_entropy_bits:10.4f} {r.failure_probability:9.4f}")

print("\nAt small beta the robot reads the switch and rarely fails; at large beta")
print("it guesses, and the failure rate settles where a blind policy lands.\n")

q, beta, rep = solve_constrained(pm, 0.95, SolverConfig(T=sc.horizon))
print(f"Cheapest policy with P(success) >= 0.95: beta* = {beta:.4g}, "
      f"{rep.transfer_entropy_bits:.4f} bits, P(fail) = {rep.failure_probability:.4f}")
print("Action distribution on the first try, for each switch position:")
for v in [i for i, n in enumerate(pm.names) if n.startswith("wait|")]:
    print(f"  {pm.names[v]:>16}: " + ", ".join(f"{a}={p:.3f}" for a, p in zip(pm.actions, q[1][v, 0])))
