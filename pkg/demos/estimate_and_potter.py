"""Recover B from the rate vector alone, then certify Potter bounds."""
from grvar.catalog import get_entry
from grvar.cli import estimation_errors, run_potter
from grvar.grv_core import DEFAULT_X_PROBES

cfg = {"t_min": None, "t_max": None, "points": None, "x": list(DEFAULT_X_PROBES), "epsilon": [0.1, 0.3]}
for name in ("power_series", "log_power_2", "compl_gamma_b1"):
    e = get_entry(name)
    err = estimation_errors(e)
    print(f"{name}: |B_hat - B| = {err['B_error']:.1e}, h error = {err.get('h_error', float('nan')):.1e}")
    for row in run_potter(e, cfg):
        print(f"   {row['check']:22s} eps={row['epsilon']}  t_eps={row['t_eps']}")
