"""Regenerate the committed fixture CSVs.

The fixtures are synthetic daily confirmed-case curves shaped after the
first Indian COVID-19 wave (2020-03-14 .. 2021-01-10): one national
series and six state series. Each state is an asymmetric bell curve with
multiplicative log-normal noise; the national column adds a "rest of the
country" curve plus a small unallocated bucket, so the national total is
deliberately not equal to the sum of the listed states.

    python3 make_fixtures.py
"""

import csv
import datetime as dt
import math

import numpy as np

START = dt.date(2020, 3, 14)
END = dt.date(2021, 1, 10)
SEED = 20210110

# name, peak value, peak day offset, rise width, decline width, tail floor
STATES = [
    ("Maharashtra", 22000.0, 185, 42.0, 48.0, 3000.0),
    ("Andhra Pradesh", 9800.0, 150, 30.0, 40.0, 150.0),
    ("Tamil Nadu", 6200.0, 135, 35.0, 70.0, 600.0),
    ("Karnataka", 9000.0, 195, 45.0, 35.0, 700.0),
    ("Chhattisgarh", 3300.0, 200, 30.0, 55.0, 500.0),
    ("Kerala", 8600.0, 215, 28.0, 60.0, 4200.0),
]
REST = (45000.0, 188, 44.0, 50.0, 5500.0)


def wave(t, peak, centre, rise, decline, floor):
    width = rise if t <= centre else decline
    bell = peak * math.exp(-0.5 * ((t - centre) / width) ** 2)
    if t > centre:
        # decline flattens into a plateau instead of dying out
        ramp = 1.0 - math.exp(-(t - centre) / 25.0)
        bell = max(bell, floor * ramp)
    return bell


def main():
    rng = np.random.default_rng(SEED)
    days = (END - START).days + 1
    dates = [START + dt.timedelta(days=i) for i in range(days)]

    states = []
    for _, *params in STATES:
        mean = np.array([wave(t, *params) for t in range(days)])
        noisy = mean * rng.lognormal(0.0, 0.08, size=days)
        states.append(np.round(noisy).astype(int))
    rest_mean = np.array([wave(t, *REST) for t in range(days)])
    rest = np.round(rest_mean * rng.lognormal(0.0, 0.06, size=days)).astype(int)
    unallocated = rng.poisson(lam=np.maximum(rest_mean * 0.002, 0.2))
    national = np.maximum(sum(states) + rest + unallocated, 1)

    with open("india.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", "value"])
        for d, v in zip(dates, national):
            w.writerow([d.isoformat(), int(v)])

    with open("india_panel.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", "India"] + [s[0] for s in STATES])
        for i, d in enumerate(dates):
            w.writerow([d.isoformat(), int(national[i])] + [int(s[i]) for s in states])

    for (name, *_), series in zip(STATES, states):
        fname = name.lower().replace(" ", "_") + ".csv"
        with open(fname, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["date", "value"])
            for d, v in zip(dates, series):
                w.writerow([d.isoformat(), int(v)])


if __name__ == "__main__":
    main()
