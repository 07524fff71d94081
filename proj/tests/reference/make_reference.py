"""Reference values frozen into the unit tests.

Computed with mpmath at 50 digits, independently of the C++ implementation.
Run: python3 tests/reference/make_reference.py
"""
import mpmath as mp

mp.mp.dps = 50


def vp_linear(t, bmin=mp.mpf("0.1"), bmax=mp.mpf(20)):
    integral = bmin * t + t * t * (bmax - bmin) / 2
    ab = mp.e ** (-integral)
    return ab, mp.sqrt(ab), mp.sqrt(1 - ab), bmin + t * (bmax - bmin)


def vp_cosine(t, eps=mp.mpf("0.008")):
    f = lambda u: mp.cos((u + eps) / (1 + eps) * mp.pi / 2) ** 2
    ab = f(t) / f(0)
    ab = min(max(ab, mp.mpf("1e-9")), 1 - mp.mpf("1e-9"))
    beta = -mp.diff(lambda u: mp.log(f(u) / f(0)), t)
    return ab, beta


def ve(t, smin=mp.mpf("0.002"), smax=mp.mpf(80)):
    sigma = smin * (smax / smin) ** t
    g = mp.sqrt(mp.diff(lambda u: (smin * (smax / smin) ** u) ** 2, t))
    return sigma, g


def karras(smin, smax, rho, n):
    a, b = smax ** (1 / rho), smin ** (1 / rho)
    return [(a + mp.mpf(i) / (n - 1) * (b - a)) ** rho for i in range(n)] + [0]


def bimodal_logp(x, t):
    _, s, sig, _ = vp_linear(t)
    var = s * s * mp.mpf("0.01") + sig * sig
    comp = lambda m: mp.mpf("0.5") * mp.npdf(x, s * m, mp.sqrt(var))
    return mp.log(comp(-6) + comp(6))


def show(name, values):
    print(name, ", ".join(mp.nstr(v, 17) for v in values))


for t in ["1e-5", "0.1", "0.5", "1"]:
    show(f"vp_linear t={t}: alpha_bar s sigma beta =", vp_linear(mp.mpf(t)))
for t in ["0", "0.3", "0.9"]:
    show(f"vp_cosine t={t}: alpha_bar beta =", vp_cosine(mp.mpf(t)))
for t in ["0", "0.5", "1"]:
    show(f"ve t={t}: sigma g =", ve(mp.mpf(t)))
show("karras(0.002, 80, 7, 5) =", karras(mp.mpf("0.002"), mp.mpf(80), mp.mpf(7), 5))
for x in ["-2", "0.3", "1.7"]:
    for t in ["0.3"]:
        xv, tv = mp.mpf(x), mp.mpf(t)
        f = lambda u: bimodal_logp(u, tv)
        show(f"bimodal t={t} x={x}: logp score d2 d3 =", [f(xv), mp.diff(f, xv), mp.diff(f, xv, 2), mp.diff(f, xv, 3)])
