"""Reference values for the unit tests, computed with mpmath at 40 digits.

Run: python3 tests/data/gen_reference.py > tests/unit/reference_values.hpp
"""
import mpmath as mp

mp.mp.dps = 40


def envelope(a, x):
    a = abs(a)
    if a > x:
        return -mp.pi * a / 2
    return -mp.sqrt(x * x - a * a) - a * mp.asin(a / x)


def besselk_series(nu_re, nu_im, x):
    """K_nu(x) = pi/(2 sin(nu pi)) (I_{-nu}(x) - I_nu(x)) by the power series, with the
    working precision raised to absorb the cancellation. Non-integer nu only."""
    a = abs(nu_im)
    with mp.workdps(int((2 * x + a * float(mp.pi) + 10 * abs(nu_re)) / 2.3) + 50):
        nu = mp.mpc(nu_re, nu_im)
        X = mp.mpf(x)
        q = (X / 2) ** 2

        def I(v):
            term = (X / 2) ** v / mp.gamma(v + 1)
            s = term
            k = 0
            while True:
                k += 1
                term = term * q / (k * (k + v))
                s += term
                if k > X and abs(term) < abs(s) * mp.mpf(10) ** (-mp.mp.dps + 5):
                    return s

        return +(mp.pi / (2 * mp.sin(nu * mp.pi)) * (I(-nu) - I(nu)))


def besselk(br, bi, x):
    if bi == 0 and br == int(br):
        return mp.besselk(int(br), mp.mpf(x))
    return besselk_series(br, bi, x)


bessel_cases = []
for a in [0.5, 3.7, 10, 20, 40, 100, 500, 2000]:
    for x in [0.3, 2, 5.441398092702653, 10, 20, 50, 100, 300, 1200]:
        bessel_cases.append((0.0, a, x))
for nu in [(0.1, 2.0), (0.05, 2.0), (0.2, 5.0), (0.5, -2000.0), (0.5, -40.0), (0.5, -10.0),
           (0.502, 0.0), (1.5, 0.0), (1.0, 0.0), (2.0, 0.0), (0.0, 0.0), (1.0, 3.0), (-0.3, 7.5), (2.5, 0.0)]:
    for x in [0.3, 2, 5.441398092702653, 20, 80]:
        bessel_cases.append((nu[0], nu[1], x))

print("#pragma once")
print("// Generated by tests/data/gen_reference.py (mpmath, 40 digits). Do not edit.")
print("#include <array>")
print("namespace ref {")
print("struct BesselCase { double nu_re, nu_im, x, re, im; };  // K_nu(x) * exp(-envelope)")
print("inline constexpr BesselCase kBessel[] = {")
for br, bi, x in bessel_cases:
    nu = mp.mpc(br, bi)
    v = besselk(br, bi, x) * mp.exp(-envelope(bi, mp.mpf(x)))
    print(f"    {{{br!r}, {bi!r}, {x!r}, {mp.nstr(v.real, 20)}, {mp.nstr(v.imag, 20)}}},")
print("};")

print("struct ZetaCase { double s_re, s_im, re, im, dre, dim; };")
print("inline constexpr ZetaCase kZeta[] = {")
for s in [(2, 0), (-1, 0), (0.5, 14.134725141734693790), (0.5, 100), (1, 20), (1, 2000), (3, -7), (-2, 50), (0.3, 1000),
          (0.5, 9999), (1.002, 0), (0.7, -3.3), (-1.5, 2)]:
    z = mp.mpc(*s)
    v = mp.zeta(z)
    d = mp.zeta(z, derivative=1)
    print(f"    {{{float(s[0])!r}, {float(s[1])!r}, {mp.nstr(v.real, 20)}, {mp.nstr(v.imag, 20)}, {mp.nstr(d.real, 20)}, {mp.nstr(d.imag, 20)}}},")
print("};")

print("struct LogGammaCase { double s_re, s_im, re, im; };")
print("inline constexpr LogGammaCase kLogGamma[] = {")
for s in [(0.25, 0), (0.5, 0), (3.3, 7.1), (-4.5, 0.2), (0.25, 500), (0.5, 9999), (-4.9, -3), (10, 0.5), (0.1, 0.01)]:
    z = mp.mpc(*s)
    v = mp.loggamma(z)
    print(f"    {{{float(s[0])!r}, {float(s[1])!r}, {mp.nstr(v.real, 20)}, {mp.nstr(v.imag, 20)}}},")
print("};")

print("struct LCase { double s_re, s_im; long d; double re, im; };")
print("inline constexpr LCase kDirichletL[] = {")


def chi(d, n):
    return mp.mpf(int(mp.re(kron(d, n))))


def kron(d, n):
    # Kronecker symbol through sympy-free small routine
    from sympy import jacobi_symbol
    res = 1
    while n % 2 == 0:
        n //= 2
        if d % 2 == 0:
            return 0
        if d % 8 in (3, 5):
            res = -res
    if n == 1:
        return res
    return res * jacobi_symbol(d % n, n)


for (sr, si, d) in [(2, 0, -3), (2, 0, -4), (2, 0, 5), (2, 0, 12), (2, 0, -23), (2, 0, -84), (2, 0, -7), (2, 0, 8),
                    (0.5, 10, -4), (0.5, 3, 5), (1, 4, -23), (3, 0, 21), (0.7, 100, 13), (2, 0, 28), (2, 0, -8)]:
    q = abs(d)
    s = mp.mpc(sr, si)
    v = sum(kron(d, a) * mp.zeta(s, mp.mpf(a) / q) for a in range(1, q + 1)) * mp.power(q, -s)
    print(f"    {{{float(sr)!r}, {float(si)!r}, {d}, {mp.nstr(v.real, 20)}, {mp.nstr(v.imag, 20)}}},")
print("};")
print("}  // namespace ref")
