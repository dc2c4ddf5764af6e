#!/usr/bin/env python3
"""Writes the small intraday fixtures under tests/fixtures."""
import calendar
import math
import pathlib
import random
import sys

OPEN = 7 * 60 + 30
CLOSE = 13 * 60 + 59


def day_bars(date, rng, price, minutes=None):
    rows = []
    for m in minutes if minutes is not None else range(OPEN, CLOSE + 1):
        rows.append((f"{date} {m // 60:02d}:{m % 60:02d}:00", price))
        price *= math.exp(0.001 * rng.gauss(0.0, 1.0))
    return rows, price


def epoch(stamp):
    date, clock = stamp.split(" ")
    y, mo, d = map(int, date.split("-"))
    hh, mm, ss = map(int, clock.split(":"))
    return calendar.timegm((y, mo, d, hh, mm, ss, 0, 0, 0))


def write(path, rows, epoch_stamps=False, extra=()):
    with open(path, "w", newline="") as f:
        f.write("timestamp,price\n")
        for stamp, price in rows:
            f.write(f"{epoch(stamp) if epoch_stamps else stamp},{price:.10g}\n")
        for line in extra:
            f.write(line + "\n")


def main(out):
    out = pathlib.Path(out)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20260101)

    rows, price = [], 100.0
    for date in ("2010-03-01", "2010-03-02"):
        pre, _ = day_bars(date, rng, price, range(OPEN - 3, OPEN))
        day, price = day_bars(date, rng, price)
        rows += pre + day
    malformed = ["2010-03-02 14:30:00,not-a-price"]
    write(out / "two_days.csv", rows, extra=malformed)
    write(out / "two_days_epoch.csv", rows, epoch_stamps=True, extra=["1267540200,not-a-price"])

    edge = []
    short, price = day_bars("2011-05-02", rng, 50.0, [m for m in range(OPEN, CLOSE + 1) if m != OPEN + 100])
    edge += short
    dup, price = day_bars("2011-05-03", rng, price)
    dup.insert(51, dup[50])
    edge += dup
    edge += [(f"2011-05-04 {m // 60:02d}:{m % 60:02d}:00", 42.0) for m in range(OPEN, CLOSE + 1)]
    good, price = day_bars("2011-05-05", rng, price)
    edge += good
    write(out / "edge_days.csv", edge)

    write(out / "empty.csv", [])


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures")
