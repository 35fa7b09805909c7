#!/usr/bin/env python3
"""Reference evaluation of the TDPSD descriptors at 60 significant digits.

Reads tests/data/tdpsd_fixture.csv (one window per row) and writes
tests/data/tdpsd_reference.csv (six values per row, 17 significant digits).
The implementation under test is never imported; this is a straight-line
transcription of the definition.

    python3 tests/oracles/tdpsd_reference.py           # regenerate
    python3 tests/oracles/tdpsd_reference.py --make-fixture
"""
import csv
import pathlib
import sys

import mpmath as mp

mp.mp.dps = 60
EPS = mp.mpf("1e-10")
LAM = mp.mpf("0.1")
DATA = pathlib.Path(__file__).resolve().parent.parent / "data"


def floor_log(v):
    return mp.log(max(v, EPS))


def descriptors(x):
    d1 = [x[i] - x[i - 1] for i in range(1, len(x))]
    d2 = [d1[i] - d1[i - 1] for i in range(1, len(d1))]
    m0 = mp.sqrt(mp.fsum(v * v for v in x))
    m2 = mp.sqrt(mp.fsum(v * v for v in d1))
    m4 = mp.sqrt(mp.fsum(v * v for v in d2))
    m0, m2, m4 = (m ** LAM / LAM for m in (m0, m2, m4))
    return [
        floor_log(m0),
        floor_log(abs(m0 - m2) + EPS),
        floor_log(abs(m0 - m4) + EPS),
        floor_log(m0 / mp.sqrt(abs((m0 - m2) * (m0 - m4)) + EPS)),
        floor_log(m2 / mp.sqrt(m0 * m4 + EPS)),
        floor_log((mp.fsum(abs(v) for v in d1) + EPS) / (mp.fsum(abs(v) for v in d2) + EPS)),
    ]


def tdpsd(x):
    y = [mp.log(v * v + EPS) for v in x]
    fx, fy = descriptors(x), descriptors(y)
    return [-2 * a * b / (a * a + b * b + EPS) for a, b in zip(fx, fy)]


def make_fixture():
    # Band-limited noise, a decaying sinusoid, an all-zero window, and a ramp.
    import numpy as np
    from scipy import signal

    rng = np.random.default_rng(20240611)
    sos = signal.butter(4, [30, 300], btype="band", fs=2000, output="sos")
    rows = [signal.sosfilt(sos, rng.standard_normal(400)) * 0.3]
    t = np.arange(400) / 2000.0
    rows.append(np.exp(-5 * t) * np.sin(2 * np.pi * 95 * t))
    rows.append(np.zeros(400))
    # dyadic steps keep every difference exact in binary, so the second
    # differences vanish identically and the eps floor is exercised
    rows.append((np.arange(400) - 200) / 256.0)
    with open(DATA / "tdpsd_fixture.csv", "w", newline="") as f:
        w = csv.writer(f)
        for r in rows:
            w.writerow([repr(float(v)) for v in r])


def main():
    if "--make-fixture" in sys.argv:
        make_fixture()
    out = []
    with open(DATA / "tdpsd_fixture.csv") as f:
        for row in csv.reader(f):
            x = [mp.mpf(v) for v in row]
            out.append([mp.nstr(v, 17, min_fixed=-mp.inf, max_fixed=mp.inf) for v in tdpsd(x)])
    with open(DATA / "tdpsd_reference.csv", "w", newline="") as f:
        csv.writer(f).writerows(out)


if __name__ == "__main__":
    main()
