"""
Peakon meets antipeakon
=======================

With ``gamma = 0`` the system is the scalar Camassa-Holm equation.  A
smoothed peakon and antipeakon approach each other; the slope grows by
an order of magnitude while the amplitude drops.  That is the steepening
alert.  A finite grid cannot break, so the run continues past it.
"""

from pathlib import Path

from mch import config
from mch.diagnostics import run_monitored, trace_arrays

cfg = config.load(Path(__file__).parent.parent / "configs" / "peakon_antipeakon.ini")
res = run_monitored(cfg.initial_state(), cfg.solver, cfg.output.steepening_threshold, stop_on_alert=False)
a = trace_arrays(res.trace)

print(f"alert at t = {res.alert.time:.4f}: slope x{res.alert.slope_ratio:.2f}, "
      f"amplitude x{res.alert.amplitude_ratio:.3f}")
print(f"solver status at the end: {res.status} (t = {a['time'][-1]:.3f})")

print(f"{'t':>6} {'|u|':>8} {'|Du|':>10} {'I14':>8}")
for k in range(0, len(res.trace), 250):
    print(f"{a['time'][k]:6.3f} {a['linf_u'][k]:8.4f} {a['linf_grad_u'][k]:10.3f} {a['i14'][k]:8.4f}")
