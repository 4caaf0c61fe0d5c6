"""Independent 50-digit evaluator for the closed-form identification bounds.

Writes tests/data/golden_bounds.csv. Every value is computed from the bound
statements directly (no shared code with the C++ library). Bounds whose
burn-in condition fails, or whose denominator is not positive, are "inf".

Run: python3 tests/oracle/gen_golden.py
"""
import csv
import math
import os
import random

import mpmath as mp

mp.mp.dps = 50

POINTS = 100
HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "..", "data", "golden_bounds.csv")


def log_nine(c, n_x, delta, k=1):
    return mp.log(mp.mpf(c) * mp.power(9, k * n_x) / delta)


def a_priori(n_x, n_u, delta, sw, sx, T0, Ti):
    Tbar0 = 128 * log_nine(8, n_x, delta)
    Tbari = 64 * (3 + 2 * mp.sqrt(2)) * log_nine(8 * n_u, n_x, delta)
    epsA = sw / sx * 16 * mp.sqrt(T0 * log_nine(4, n_x, delta)) / T0 if T0 >= Tbar0 else mp.inf
    root = mp.sqrt(2 * Ti * log_nine(4 * n_u, n_x, delta))
    den = mp.mpf(Ti) / 2 - mp.mpf(4) / 3 * root
    if Ti >= Tbari and den > 0:
        factor = 4 * mp.sqrt(10) / 3 * root / den
        epsB, epsb0 = sw / sx * factor, sw * factor
    else:
        epsB = epsb0 = mp.inf
    return dict(ap_epsA=epsA, ap_epsB=epsB, ap_epsb0=epsb0, ap_Tbar0=Tbar0, ap_Tbari=Tbari)


def data_dependent(n_x, n_u, delta, sw, sx, T0, Ti, lam0, lami):
    Tbar0 = log_nine(2, n_x, delta) / 2
    Tbari = log_nine(2 * n_u, n_x, delta, k=2) / 2
    epsA = sw / sx * 4 * mp.sqrt(T0 * log_nine(4, n_x, delta)) / lam0 if T0 >= Tbar0 else mp.inf
    if Ti >= Tbari:
        factor = 4 * mp.sqrt(10) / 3 * mp.sqrt(2 * Ti * log_nine(2 * n_u, n_x, delta)) / lami
        epsB, epsb0 = sw / sx * factor, sw * factor
    else:
        epsB = epsb0 = mp.inf
    return dict(dd_epsA=epsA, dd_epsB=epsB, dd_epsb0=epsb0, dd_Tbar0=Tbar0, dd_Tbari=Tbari)


def ellipsoid_scalings(n_x, n_u, delta, sw, T0, Ti, lam0, lami):
    C_A = sw**2 * (2 * mp.sqrt(n_x) + mp.sqrt(2 * mp.log(2 / delta))) ** 2
    C1 = sw**2 * (mp.sqrt(n_x + 1) + mp.sqrt(n_x) + mp.sqrt(2 * mp.log(2 * n_u / delta))) ** 2
    # Diagonal entry of C M^{-1} for M = lambda I; needs T_0 >= n_x, T_i >= n_x + 1.
    E_A = C_A / lam0 if T0 >= n_x else mp.inf
    E_B = C1 / lami if Ti >= n_x + 1 else mp.inf
    return dict(C_A=C_A, C1=C1, E_A=E_A, E_B=E_B)


def lifted_proxy(a):
    return 2 * a + 1 if a <= 1 else a * a + 2 * a


def fmt(v):
    return "inf" if v == mp.inf else mp.nstr(v, 25, strip_zeros=False)


def fmt_input(v):
    # Inputs are doubles; repr round-trips them exactly.
    return repr(float(v))


def main():
    rng = random.Random(20240917)
    inputs = ["n_x", "n_u", "delta", "sigma_w", "sigma_x", "T0", "Ti", "lambda0", "lambdai", "a"]
    rows = []
    for k in range(POINTS):
        n_x = rng.randint(1, 30)
        n_u = rng.randint(1, 5)
        delta = mp.mpf(10 ** rng.uniform(-4, math.log10(0.5)))
        sw = mp.mpf((10 ** rng.uniform(-2, 0.3)))
        sx = mp.mpf((10 ** rng.uniform(-1, 0.5)))
        T0 = int(10 ** rng.uniform(0.5, 7))
        Ti = int(10 ** rng.uniform(0.5, 7))
        lam0 = mp.mpf((T0 * rng.uniform(0.05, 1.5)))
        lami = mp.mpf((Ti * rng.uniform(0.05, 1.5)))
        # Pin the proxy breakpoint a = 1 on a few points.
        a = mp.mpf(1) if k % 25 == 0 else mp.mpf((10 ** rng.uniform(-2, 0.7)))
        row = dict(n_x=n_x, n_u=n_u, delta=delta, sigma_w=sw, sigma_x=sx, T0=T0, Ti=Ti, lambda0=lam0,
                   lambdai=lami, a=a)
        row.update(a_priori(n_x, n_u, delta, sw, sx, T0, Ti))
        row.update(data_dependent(n_x, n_u, delta, sw, sx, T0, Ti, lam0, lami))
        row.update(ellipsoid_scalings(n_x, n_u, delta, sw, T0, Ti, lam0, lami))
        row["proxy"] = lifted_proxy(a)
        rows.append(row)
    fields = inputs + [f for f in rows[0] if f not in inputs]
    with open(OUT, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(fields)
        for r in rows:
            w.writerow([r[c] if isinstance(r[c], int) else fmt_input(r[c]) if c in inputs else fmt(r[c])
                        for c in fields])


if __name__ == "__main__":
    main()
