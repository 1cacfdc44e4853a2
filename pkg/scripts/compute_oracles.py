"""Independent reference values used to freeze expected numbers in the tests.

Nothing here imports ``levygap``: every value comes from mpmath, scipy or a
plain numpy Monte Carlo so the tests compare the library against an
independent computation. Run once; the printed numbers are pinned in
``tests/oracle_values.py``.
"""
import math

import mpmath as mp
import numpy as np
from scipy import stats

mp.mp.dps = 40


def zeta_alternating(s):
    # eta(s) = sum (-1)^(k-1) k^-s summed with mpmath's alternating-series
    # acceleration, then zeta = eta / (1 - 2^(1-s))
    eta = mp.nsum(lambda k: (-1) ** (k - 1) / mp.power(k, s), [1, mp.inf])
    return eta / (1 - mp.power(2, 1 - s))


def main():
    rng = np.random.default_rng(20261016)

    z_half = zeta_alternating(mp.mpf(1) / 2)
    z_third = zeta_alternating(mp.mpf(1) / 3)
    print("zeta(1/2)      ", mp.nstr(z_half, 25), " mpmath.zeta:", mp.nstr(mp.zeta(0.5), 25))
    print("zeta(1/3)      ", mp.nstr(z_third, 25), " mpmath.zeta:", mp.nstr(mp.zeta(mp.mpf(1) / 3), 25))
    beta1 = -z_half / mp.sqrt(2 * mp.pi)
    print("beta1          ", mp.nstr(beta1, 25))

    # compound Poisson, lambda=1, N(0,1) jumps, no drift: E X_1^+
    series = mp.nsum(lambda k: mp.sqrt(k) / mp.factorial(k), [1, mp.inf])
    ex1 = mp.e ** -1 * series / mp.sqrt(2 * mp.pi)
    print("sum sqrt(k)/k! ", mp.nstr(series, 20))
    print("CP E X1+ series", mp.nstr(ex1, 20))
    m = 10_000_000
    counts = rng.poisson(1.0, m)
    x = np.sqrt(counts) * rng.standard_normal(m)
    xp = np.maximum(x, 0.0)
    print("CP E X1+ MC    ", xp.mean(), "+-", xp.std(ddof=1) / math.sqrt(m))
    coef = 1 / mp.sqrt(2 * mp.pi) - ex1
    print("CP 2n-gap coef   ", mp.nstr(coef, 20))

    # symmetric 1.5-stable, unit scale: E X_1^+ by scipy's sampler
    xs = stats.levy_stable.rvs(1.5, 0.0, size=m, random_state=rng)
    xsp = np.maximum(xs, 0.0)
    print("stable E X1+ MC", xsp.mean(), "(heavy tail: SE estimate unreliable)",
          xsp.std(ddof=1) / math.sqrt(m))
    print("stable E X1+ Gamma(1-1/a)/pi", mp.nstr(mp.gamma(1 - 1 / mp.mpf(1.5)) / mp.pi, 20))
    print("stable limit coef -zeta(1/3)*EX1+ (MC)", float(-z_third) * xsp.mean())

    # Gaussian integrals with Z standard normal: E phi(Z), E Z Phi(Z)
    e_phi = mp.quad(lambda z: mp.npdf(z) ** 2, [-mp.inf, mp.inf])
    e_zPhi = mp.quad(lambda z: z * mp.ncdf(z) * mp.npdf(z), [-mp.inf, mp.inf])
    print("E phi(Z)       ", mp.nstr(e_phi, 20), " 1/(2 sqrt pi) =", mp.nstr(1 / (2 * mp.sqrt(mp.pi)), 20))
    print("E Z Phi(Z)     ", mp.nstr(e_zPhi, 20))

    # Brownian sigma=1, t=1, n=2: E max(0, X_1/2, X_1)
    paths = 10_000_000
    z = rng.standard_normal((paths, 2)) * math.sqrt(0.5)
    x = np.cumsum(z, axis=1)
    mx = np.maximum(0.0, x.max(axis=1))
    print("E M_1^2 MC     ", mx.mean(), "+-", mx.std(ddof=1) / math.sqrt(paths))
    print("E M_1^2 hand   ", math.sqrt(1 / (4 * math.pi)) + 0.5 * math.sqrt(1 / (2 * math.pi)))

    # discrete-sum oracle for the Brownian gap at n=4096, sigma=0.2
    n = 4096
    disc = sum(math.sqrt(k / n) / k for k in range(1, n + 1)) * 0.2 / math.sqrt(2 * math.pi)
    cont = 0.2 * math.sqrt(2 / math.pi)
    print("Brownian sqrt(n)*gap n=4096", math.sqrt(n) * (cont - disc))

    # symmetric VG(theta=0, sigma=.2, nu=.3): integral of x^+ nu(dx) = C/M
    vs, vn = 0.2, 0.3
    rate = math.sqrt(2 / vn) / vs
    print("VG int x+ nu   ", (1 / vn) / rate)
    g = rng.gamma(1 / vn, vn, m)
    xv = vs * np.sqrt(g) * rng.standard_normal(m)
    print("VG E X1+ MC    ", np.maximum(xv, 0).mean(), "+-", np.maximum(xv, 0).std() / math.sqrt(m))
    a = 1 / vn
    print("VG E X1+ exact ", vs * math.sqrt(vn) * math.exp(math.lgamma(a + 0.5) - math.lgamma(a)) / math.sqrt(2 * math.pi))


if __name__ == "__main__":
    main()
