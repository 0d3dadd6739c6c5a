"""Asymptotics of the 3x3 solution: the x-y spin projection and <J_z>.

The data behind the three figures are computed and summarised; write them
to CSV with ``vndarboux reproduce`` if you want to plot them.
"""

import math

from vndarboux import figures

f1 = figures.fig1()
f2 = figures.fig2()
a1, a2 = figures.amplitude(f1), figures.amplitude(f2)
print(f"amplitude on [0, 10]:       {a1:.3e}  trend {figures.envelope_trend(f1):+d}")
print(f"amplitude on [-230, -220]:  {a2:.3e}  trend {figures.envelope_trend(f2):+d}")
print(f"ratio: 10^{math.log10(a1 / a2):.2f}")

traj, fits = figures.fig3()
for key, fit in fits.items():
    d = fit.to_dict()
    print(f"<J_z> t -> {'+' if key == 'plus' else '-'}inf: {d['A']:+.4f} sin(wt) {d['B']:+.4f} cos(wt), "
          f"w = {d['omega']:.5f}, RMS misfit {d['misfit']:.1e}")
print(f"asymptotes differ by {figures.separation(fits['plus'], fits['minus']):.0f} standard errors")
