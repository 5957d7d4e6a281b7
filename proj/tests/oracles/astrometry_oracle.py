#!/usr/bin/env python3
"""50-digit reference values for the astrometry tests (mpmath)."""
from mpmath import mp, mpf, cos, sin, log10, acos, atan2, sqrt, pi, degrees, radians

mp.dps = 50

print("1000/742.12 pc =", mp.nstr(mpf(1000) / mpf("742.12"), 20))

d = mpf(1000) / 100
ra, dec = radians(180), radians(45)
print("xyz(180,45,100mas) =", [mp.nstr(v, 20) for v in (d * cos(dec) * cos(ra), d * cos(dec) * sin(ra), d * sin(dec))])

print("M(0.03, 7.679) =", mp.nstr(mpf("0.03") + 5 - 5 * log10(mpf("7.679")), 20))


def unit(ra_deg, dec_deg):
    a, b = radians(ra_deg), radians(dec_deg)
    return (cos(b) * cos(a), cos(b) * sin(a), sin(b))


u, v = unit(10, 20), unit(30, 40)
dot = sum(x * y for x, y in zip(u, v))
print("sep((10,20),(30,40)) arccos =", mp.nstr(degrees(acos(dot)), 20))
