"""Independent reference values frozen into the test suite.

Nothing here imports singular_elliptic: closed forms come from sympy,
improper integrals from mpmath, and the t^3 profile from scipy's solve_bvp
(a different discretization than either package solver).

    python3 scripts/derive_oracles.py
"""

import math

import mpmath as mp
import numpy as np
import sympy as sp
from scipy.integrate import solve_bvp, solve_ivp

mp.mp.dps = 30
t, s, r, a = sp.symbols("t s r a", positive=True)


def ko_value(q, a0):
    # psi(a) = int_a^inf (2 H1(s))^(-1/2) ds with H1 the primitive of t^q
    H1 = sp.integrate(t ** q, (t, 0, s))
    return sp.nsimplify(sp.integrate(1 / sp.sqrt(2 * H1), (s, a0, sp.oo)))


def laplacian_coefficient(N, alpha):
    f = r ** (-alpha)
    lap = sp.diff(f, r, 2) + (N - 1) / r * sp.diff(f, r)
    return sp.simplify(lap / r ** (-alpha - 2))


def profile_t3():
    # N=2, alpha=2, h=t^3: w'' + 4 w = cos^2(theta) w^3, w'(0)=0, w(pi/2)=0
    th = np.linspace(0, math.pi / 2, 4001)

    def f(x, y):
        return np.vstack([y[1], -4 * y[0] + np.cos(x) ** 2 * y[0] ** 3])

    bc = lambda ya, yb: np.array([ya[1], yb[0]])
    guess = np.vstack([2 * np.cos(th), -2 * np.sin(th)])
    sol = solve_bvp(f, bc, th, guess, tol=1e-10, max_nodes=200000)
    assert sol.success, sol.message
    return float(sol.sol(0.0)[0]), float(-sol.sol(math.pi / 2)[1])


def blowup_profile(c1, c2, q, d):
    """Half-line solution of v'' = c1 (c2 v)^q with v(0+) = inf, sampled on (0, d)."""
    # first integral: v' = -sqrt(2 c1 c2^q v^(q+1)/(q+1)); integrate s(v) from v = inf
    k = math.sqrt(2 * c1 * c2 ** q / (q + 1))
    ss = np.linspace(0.05 * d, d, 20)
    # s(v) = int_v^inf dz / (k z^((q+1)/2))  =>  v(s) = (k s (q-1)/2)^(-2/(q-1))
    return ss, (k * ss * (q - 1) / 2) ** (-2 / (q - 1))


def main():
    print("KO psi(1), t^3:", ko_value(3, 1), float(ko_value(3, 1)))
    print("KO psi(2), t^3:", ko_value(3, 2), float(ko_value(3, 2)))
    for q in (1.5, 2, 5):
        print(f"KO psi(1), t^{q}:", float(ko_value(sp.nsimplify(q), 1)))
    # phi(s) = sqrt2 / s for t^3; C = 2^alpha phi((2/9) 3^(-alpha/2))
    for alpha in (2, 0):
        C = 2 ** alpha * sp.sqrt(2) / (sp.Rational(2, 9) * sp.Integer(3) ** sp.Rational(-alpha, 2))
        print(f"global constant alpha={alpha}:", sp.nsimplify(C), float(C))
    print("Delta2 sup (a+b)^3/(a^3+b^3) on a=b:", sp.limit((2 * a) ** 3 / (2 * a ** 3), a, 1))
    print("Delta2 sup (a+b)^2/(a^2+b^2) on a=b:", sp.limit((2 * a) ** 2 / (2 * a ** 2), a, 1))
    # subcritical integral for t^3, N=2, alpha=2, c=1
    sub = sp.integrate(t ** (2 - 2 - 2) * (t ** (2 - 2 + 1)) ** 3, (t, 0, 1))
    print("subcritical t^3 N=2 alpha=2:", sub)
    # c-dependence of the same integral: c^3 / 2
    print("local integrability t^3 alpha=2:", sp.integrate((r ** 2) ** 3 * r ** -3, (r, 0, 1)))
    for N, alpha in ((2, 2), (3, 2), (2, sp.Rational(1, 2)), (3, 1)):
        print(f"lambda N={N} alpha={alpha}:", laplacian_coefficient(N, alpha))
    print("primitive t^3 at 2:", sp.integrate(t ** 3, (t, 0, 2)),
          " t^2 at 3:", sp.integrate(t ** 2, (t, 0, 3)))
    print("Poisson kernel at centre:", 1 / (2 * mp.pi))
    w0, kappa = profile_t3()
    print(f"profile t^3 (N=2, alpha=2): w(0) = {w0:.10f}, kappa = {kappa:.10f}")
    # scaled_phi(c1, c2, s) = phi(sqrt(c1 c2) s) / c2 with phi(x) = sqrt2 / x
    phi = lambda x: sp.sqrt(2) / x
    print("scaled_phi(1,4,sqrt2/2):", sp.simplify(phi(sp.sqrt(4) * sp.sqrt(2) / 2) / 4))
    ss, v = blowup_profile(1.5 ** -5, 0.5 ** 3, 3, 0.5)
    print("blow-up ODE oracle (c1=(3/2)^-5, c2=1/8, t^3) at s=0.5:", v[-1])
    # numeric confirmation of the closed-form blow-up profile by shooting from s=d
    k = math.sqrt(2 * 1.5 ** -5 * 0.125 ** 3 / 4)
    vd = (k * 0.5) ** -1.0
    sol = solve_ivp(lambda x, y: [y[1], 1.5 ** -5 * (0.125 * y[0]) ** 3],
                    (0.5, 0.1), [vd, -k * vd ** 2], rtol=1e-12, atol=1e-12)
    print("  shooting check at s=0.1:", sol.y[0, -1], "closed form:", (k * 0.1) ** -1.0)


if __name__ == "__main__":
    main()
