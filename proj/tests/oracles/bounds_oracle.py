"""Independent high-precision evaluation of the closed-form bounds.

Run with `python3 tests/oracles/bounds_oracle.py`; the printed values are the
ones frozen into tests/test_bounds.cpp and tests/test_losses.cpp.
"""
import mpmath as mp

mp.mp.dps = 40
E = mp.e


def thm1(n_total, n_max):
    return mp.log(1 + n_max * E**2 / (n_total - n_max))


def batch_bound(b, c, eps):
    b_bar = mp.ceil(b * (1 - mp.mpf(1) / c - eps))
    tail = 2 * (mp.log(2 * b) + 2) * mp.exp(-2 * b * eps**2)
    upper = E**2 * (1 + eps * c) / (c * (1 - eps) - 1) + tail
    return int(b_bar), -tail, upper


def tau(a, m):
    return mp.mpf(1) / 2 - 2 / a - mp.mpf(2) ** 1.5 / (a * m)


def lin(m, v, vs):
    return (2 / mp.sqrt(m) * vs + 2 / mp.sqrt(m) * v + v / m) / 4


def general(cw, m, vt, v, vs, a):
    return (cw - 1) * (tau(a, m) ** -2 * vt + a * lin(m, v, vs))


def prop1(cw, m, vt, v, vs):
    return (cw - 1) * (8 * vt + 8 * vs / mp.sqrt(m) + 8 * v / mp.sqrt(m) + 4 * v / m)


def grid_min(cw, m, vt, v, vs, lo=5, hi=100, step=mp.mpf("1e-3")):
    best_a, best = None, mp.inf
    a = mp.mpf(lo)
    while a <= hi:
        val = general(cw, m, vt, v, vs, a)
        if val < best:
            best_a, best = a, val
        a += step
    return best_a, best


if __name__ == "__main__":
    print("thm1 N=50000 nmax=5000", thm1(50000, 5000))
    print("thm1 ratio 1/100", mp.log(1 + E**2 / 100))
    print("thm1 N=100 nmax=20", thm1(100, 20), "e^2/4", E**2 / 4)
    for c in (4, 16, 64):
        print("thm1 balanced C", c, mp.log(1 + E**2 / (c - 1)))
    print("batch 1024 100 0.05", batch_bound(1024, 100, mp.mpf("0.05")))
    for b in (256, 1024):
        for eps in ("0.02", "0.05"):
            print("batch", b, 20, eps, batch_bound(b, 20, mp.mpf(eps)))
    cw, m, vt, v = 2, 100, mp.mpf("0.01"), mp.mpf("0.1")
    vs = mp.sqrt(v)
    print("baseline", (cw - 1) * (1 + mp.mpf(1) / m) * v)
    print("prop1", prop1(cw, m, vt, v, vs))
    print("tau16", tau(16, m), "general16", general(cw, m, vt, v, vs, 16))
    A = 2 + mp.mpf(2) ** 1.5 / m
    bl = lin(m, v, vs)
    F = 2 * vt * A / bl
    print("A", A, "b_lin", bl, "F", F)
    y = mp.findroot(lambda y: y**3 - 8 * F * y - 16 * F * A, 5)
    print("y*", y, "a*", 2 * A + y, "E(a*)", general(cw, m, vt, v, vs, 2 * A + y))
    print("E(a*) closed", (cw - 1) * bl / (4 * A) * (2 * A + y) * (2 * A + y + 2 * A))
    print("grid", grid_min(cw, m, vt, v, vs))
    print("cubic A=2 F=1", mp.findroot(lambda y: y**3 - 8 * y - 32, 5))
    for c, n, k in ((4, 1, 1), (5, 20, 1), (2, 1, 1), (5, 20, 2)):
        print("ufm target", c, n, k, mp.log(k * n * (c - 1)) - 1 - mp.mpf(1) / (c - 1))
