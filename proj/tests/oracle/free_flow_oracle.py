#!/usr/bin/env python3
"""Independent reference for the free-flow single-link model.

Written from the model definition with numpy/scipy only (no code shared with
the C++ library). Prints the values frozen in oracle_values.hpp:

    python3 tests/oracle/free_flow_oracle.py
"""
import math
import warnings

import numpy as np
from scipy import integrate

ALPHA, BETA = 20.06, 4.0
P_TX = 13.0 + 10 * math.log10(10.0)  # dBm, 13 dBm/MHz over 10 MHz
GAINS = 6.0
NOISE = -174.0 + 10 * math.log10(10e6) + 6.0
GAMMA_DB = 1.02
T_PCK, T_TTI = 622e-6, 1e-3


def loss(d):
    return ALPHA + 10 * BETA * np.log10(np.maximum(d, 1.0))


def inv_loss(l):
    return 10 ** ((l - ALPHA) / (10 * BETA))


def mw(dbm):
    return 10 ** (dbm / 10)


def setup(du, thr, lam):
    lt = lam * T_TTI
    dx = inv_loss(P_TX + GAINS - thr)
    pr = mw(P_TX + GAINS - loss(du))
    imax = pr / mw(GAMMA_DB) - mw(NOISE)
    di = math.inf if imax <= 0 else max(1.0, inv_loss(P_TX + GAINS - 10 * math.log10(imax)))
    return lt, dx, pr, imax, di


def closed(du, thr, lam):
    lt, dx, _, _, di = setup(du, thr, lam)
    s = 1.0 if dx >= du else -1.0
    pb = 0.5 * ((1 - math.exp(-2 * lt * (dx + du))) + s * (1 - math.exp(-2 * lt * abs(dx - du))))
    pbb = 0.5 / (1 - pb) * (math.exp(-2 * lt * max(di, dx - du)) + math.exp(-2 * lt * max(di, dx + du)))
    pu = math.exp(-2 * lt * di)
    pc = (T_TTI - T_PCK) / T_TTI
    psq = (1 - pb) * (1 - pc)
    return dict(p_busy=pb, p_pr_busy=pbb, p_unpr=pu, p_sq=psq, prp=(1 - psq / 2) * pbb + psq / 2 * pu)


def exact(du, thr, lam):
    """Busy/deferred terms by direct integration of the nearest-point density;
    the straddling term as a triple integral over (tau, y, x)."""
    lt, dx, _, imax, _ = setup(du, thr, lam)
    lo, hi = du - dx, du + dx

    def cdf(x):
        return 0.5 * math.exp(2 * lt * x) if x < 0 else 1 - 0.5 * math.exp(-2 * lt * x)

    def mass(a, b):
        return max(0.0, cdf(b) - cdf(a)) if b > a else 0.0

    def power(r):
        return mw(P_TX + GAINS - loss(abs(r)))

    def outside_mass(r):
        # points with |x| >= r that are not inside [lo, hi]
        tot = 0.0
        for a, b in ((-math.inf, -r), (r, math.inf)):
            for c, d in ((a, min(b, lo)), (max(a, hi), b)):
                if d > c:
                    tot += mass(max(c, -1e12), min(d, 1e12))
        return tot

    p_busy = mass(lo, hi)
    # interferer outside the protected area and farther than the hard limit
    r_min = max(1.0, inv_loss(P_TX + GAINS - 10 * math.log10(imax))) if imax > 0 else math.inf
    p_ok_idle = outside_mass(r_min) if math.isfinite(r_min) else 0.0
    p_pr_busy = p_ok_idle / (1 - p_busy)

    def inner(tau, y):
        rem = imax - tau * power(y)
        if rem <= 0:
            return 0.0
        if tau >= 1:
            return outside_mass(0.0)
        r = max(1.0, inv_loss(P_TX + GAINS - 10 * math.log10(rem / (1 - tau))))
        return outside_mass(r)

    radius = math.log(1e9) / (2 * lt)

    def f_tau(tau):
        v, _ = integrate.quad(lambda y: lt * math.exp(-2 * lt * y) * inner(tau, y), 0, radius, limit=400,
                              points=[r_min] if math.isfinite(r_min) and r_min < radius else None)
        return 2 * v

    straddle, _ = integrate.quad(f_tau, 0, 1, limit=400)
    p_pr_sq = straddle / (1 - p_busy)
    pc = (T_TTI - T_PCK) / T_TTI
    return p_busy * p_pr_busy + (1 - p_busy) * pc * p_pr_busy + (1 - p_busy) * (1 - pc) * p_pr_sq


def main():
    warnings.simplefilter("ignore", integrate.IntegrationWarning)
    print(f"protected range -65 dBm: {inv_loss(P_TX + GAINS + 65.0):.6f} m")
    print(f"protected range -98.8 dBm: {inv_loss(P_TX + GAINS + 98.8):.6f} m")
    print(f"d_i(200 m): {setup(200, -65, 1.0)[4]:.6f} m")
    for lt, dx, du in ((0.001, 390, 200), (0.001, 55, 200)):
        s = 1.0 if dx >= du else -1.0
        pb = 0.5 * ((1 - math.exp(-2 * lt * (dx + du))) + s * (1 - math.exp(-2 * lt * abs(dx - du))))
        print(f"p_busy(lt={lt}, dx={dx}, du={du}) = {pb:.6f}")
    for thr, du, lam in ((-65.0, 100, 1.0), (-65.0, 200, 1.0), (-65.0, 300, 1.0), (-98.8, 100, 1.0),
                         (-98.8, 200, 1.0), (-98.8, 300, 1.0), (-65.0, 200, 0.5), (-98.8, 200, 2.0)):
        c = closed(du, thr, lam)
        e = exact(du, thr, lam)
        print(f"thr={thr} du={du} lam={lam}: closed={c['prp']:.6f} p_busy={c['p_busy']:.6f} "
              f"p_pr_busy={c['p_pr_busy']:.6f} exact={e:.6f}")


if __name__ == "__main__":
    main()
