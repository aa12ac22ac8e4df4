"""
Existence time against observed steepening
==========================================

The Picard estimate gives a lower bound ``T ~ 1 / (4 C^2 ||U0||)`` on the
lifespan.  We set ``C`` to 1 and compare it with the time the steepening
alert fires for five peakon-antipeakon pairs of growing amplitude.  With
``gamma = 0`` the equation is invariant under ``u -> a u(x, a t)``, so the
alert time also scales like ``1 / a``.  The estimate is about sixty times
smaller than the observed alert time here.  Exploratory record only.
"""

import math

from mch.diagnostics import run_monitored
from mch.initial_data import InitialDataSpec, initial_state
from mch.solvers import SolverConfig, estimate_existence_time
from mch.spectral import Grid

grid = Grid(1, 256, 2 * math.pi)
cfg = SolverConfig(dt=1e-3, t_end=4.0)
print(f"{'amplitude':>9} {'||U0||':>9} {'T_est':>9} {'alert t':>9} {'|Du| x':>8} {'status':>8}")
for amp in (0.5, 1.0, 2.0, 4.0, 8.0):
    s0 = initial_state(grid, InitialDataSpec("peakon_antipeakon", amplitude=amp, width=0.1, separation=0.3))
    est = estimate_existence_time(s0, 1.0)
    res = run_monitored(s0, cfg, threshold=5.0)
    alert = res.alert.time if res.alert.triggered else math.inf
    growth = res.trace[-1].linf_grad_u / res.trace[0].linf_grad_u
    print(f"{amp:9.2f} {est.initial_norm:9.3f} {est.t_est:9.2e} {alert:9.3f} {growth:8.2f} {res.status:>8}")
