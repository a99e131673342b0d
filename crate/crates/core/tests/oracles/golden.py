#!/usr/bin/env python3
"""Independent scalar oracle for the frozen values in tests/golden.rs.

Evaluates every quantity entry by entry in 40-digit arithmetic; no matrix
library is used. Run: python3 golden.py
"""
from mpmath import mp, mpf, mpc, sqrt, exp, pi, cos, sin

mp.dps = 40
C = mpf(299792458)


def geometry(n, fc):
    lam = C / mpf(fc)
    return lam, lam / 2


def offset(n_idx, n):
    # n_idx is 1-based
    return mpf(2 * n_idx - n - 1) / 2


def steer(n, fc, theta, r, exact=False):
    lam, d = geometry(n, fc)
    k = 2 * pi / lam
    theta, out = mpf(theta), []
    for i in range(1, n + 1):
        delta = offset(i, n)
        if r is None:
            excess = -delta * d * theta
        elif exact:
            r = mpf(r)
            excess = sqrt(r * r - 2 * r * delta * d * theta + delta * delta * d * d) - r
        else:
            r = mpf(r)
            excess = -delta * d * theta + delta * delta * d * d * (1 - theta * theta) / (2 * r)
        out.append(exp(mpc(0, -1) * k * excess) / sqrt(n))
    return out


def fmt(z):
    return f"c({mp.nstr(z.real, 17, strip_zeros=False)}, {mp.nstr(z.imag, 17, strip_zeros=False)})"


def dump(name, values):
    print(f"const {name}: [Complex64; {len(values)}] = [")
    for z in values:
        print(f"    {fmt(z)},")
    print("];")


# Steering vector, N = 8 at 100 GHz, theta = 0.5, r = 10 m.
fres = steer(8, 100e9, "0.5", 10)
exact = steer(8, 100e9, "0.5", 10, exact=True)
dump("STEER_N8_FRESNEL", fres)
dump("STEER_N8_EXACT", exact)
print("// max |fresnel - exact| =", mp.nstr(max(abs(a - b) for a, b in zip(fres, exact)), 5))

# Two-path channel, N = 8, G = 2.
paths = [
    (mpc("0.8", "-0.3"), "0.5", 10, [1, 1]),
    (mpc("-0.2", "0.9"), "-0.25", 6, [0, 1]),
]
n, g = 8, 2
h = [mpc(0) for _ in range(n)]
for gain, theta, r, vis in paths:
    a = steer(n, 100e9, theta, r)
    for i in range(n):
        if vis[i // (n // g)]:
            h[i] += sqrt(mpf(n) / len(paths)) * gain * a[i]
dump("CHANNEL_N8_L2", h)

# Adaptive dictionary, N = 8, G = 2, U = 2, r = (7, 15) m; row-major 8 x 4.
u_count = 2
angles = [mpf(2 * u - u_count - 1) / u_count for u in range(1, u_count + 1)]
dists = [7, 15]
rows = [[mpc(0)] * (g * u_count) for _ in range(n)]
for u in range(u_count):
    a = steer(n, 100e9, angles[u], dists[u])
    for i in range(n):
        rows[i][u * g + i // (n // g)] = a[i]
dump("DICT_N8_G2_U2", [z for row in rows for z in row])

# Sensing matrix for a deterministic combiner W[i, m] = exp(j 2 pi ((i+1)(m+2) mod 7) / 7) / sqrt(16),
# N = 16, G = 4, U = 4, r_u = 20 m, M = 6; Psi = W^H D, row-major 6 x 16.
n, g, u_count, m = 16, 4, 4, 6
angles = [mpf(2 * u - u_count - 1) / u_count for u in range(1, u_count + 1)]
W = [[exp(mpc(0, 2) * pi * (((i + 1) * (j + 2)) % 7) / 7) / sqrt(n) for j in range(m)] for i in range(n)]
D = [[mpc(0)] * (g * u_count) for _ in range(n)]
for u in range(u_count):
    a = steer(n, 100e9, angles[u], 20)
    for i in range(n):
        D[i][u * g + i // (n // g)] = a[i]
psi = []
for j in range(m):
    for c in range(g * u_count):
        psi.append(sum(W[i][j].conjugate() * D[i][c] for i in range(n)))
dump("PSI_N16_M6", psi)


# Polar codebook sizes.
def rings(n, u_count, beta, s_max, rmin, fc=100e9):
    lam, d = geometry(n, fc)
    total = 0
    for u in range(1, u_count + 1):
        theta = mpf(2 * u - u_count - 1) / u_count
        kept = sum(
            1
            for s in range(1, s_max + 1)
            if n * n * d * d * (1 - theta * theta) / (2 * beta * beta * lam * s) >= rmin
        )
        total += kept + 1
    return total


print("// Q(N=U=256, beta=0.6, s_max=10) =", rings(256, 256, mpf("0.6"), 10, 5))
print("// Q(N=U=64, beta=0.3, s_max=10) =", rings(64, 64, mpf("0.3"), 10, 5))
