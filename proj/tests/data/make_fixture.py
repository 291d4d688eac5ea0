"""Regenerates the synthetic SIE / NAO fixture used by the pipeline tests.

SIE(t) = b0 + b1 t + b2 t^2 + sum_i a_i sin(i w t) + c_i cos(i w t) + N(0, 0.002^2),
t = days since 2015-01-01, w = 2 pi / 365.25, rounded to 3 decimals, with a
few days replaced by the -9999 sentinel. NAO is a unit-innovation AR(1) with
phi = 0.6 and a handful of omitted days.
"""
import datetime as dt
import math
import random

B = (11.5, -1.5e-4, 2e-8)
SINE = (1.8, -0.3, 0.12, 0.05)
COSINE = (-4.2, 0.9, -0.2, 0.03)
START = dt.date(2015, 1, 1)
DAYS = 1096
SIE_MISSING = {200, 201, 202, 640, 900}
NAO_MISSING = {50, 51, 333, 800}

rng = random.Random(20191001)
w = 2 * math.pi / 365.25

with open("sie_fixture.csv", "w") as f:
    f.write(" Year, Month, Day,     Extent,    Missing, Source Data\n")
    f.write("  YYYY,    MM,  DD, 10^6 sq km, 10^6 sq km, Source data product web site\n")
    for t in range(DAYS):
        d = START + dt.timedelta(days=t)
        x = B[0] + B[1] * t + B[2] * t * t
        for i in range(4):
            x += SINE[i] * math.sin((i + 1) * w * t) + COSINE[i] * math.cos((i + 1) * w * t)
        x += rng.gauss(0.0, 0.002)
        v = "-9999" if t in SIE_MISSING else f"{x:.3f}"
        f.write(f"  {d.year}, {d.month:4d}, {d.day:3d}, {v:>10}, {0:10.3f}, ['synthetic']\n")

with open("nao_fixture.txt", "w") as f:
    x = 0.0
    for t in range(-200, DAYS):
        x = 0.6 * x + rng.gauss(0.0, 1.0)
        if t < 0 or t in NAO_MISSING:
            continue
        d = START + dt.timedelta(days=t)
        f.write(f"{d.year} {d.month:2d} {d.day:2d} {x:.3f}\n")
