"""Growth of the shifted dyadic maximal operator with the shift.

Desk-scale version of the shifted-operator study: lower-bound L^2 estimates
against the shift n, fitted to c*log(2+n) and to a power law.  The curve
should look logarithmic -- visibly concave on a log-x axis, with a small
power-law exponent.  (The full-size study in the test suite uses a much
larger grid to reach shift 1024.)
"""

from calderon_lab.experiments import shift_growth_study

rec = shift_growth_study("maximal", shifts=[1, 2, 4, 8, 16, 32, 64], n=1 << 18, trials=4)

print("shift  estimate")
for s, v in zip(rec.query["shifts"], rec.trial_values):
    print(f"{s:5d}  {v:.4f}")
fit = rec.fit
print(f"log fit   : c = {fit['log_fit']['slope']:.3f}, r^2 = {fit['log_fit']['r2']:.3f}")
print(f"power fit : exponent = {fit['power_fit']['exponent']:.3f}")
print(f"preferred : {fit['preferred']}  (wall time {rec.wall_time:.1f}s)")
