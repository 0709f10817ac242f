"""Regenerates demo.csv: a small mixed-type table with a binary target."""
import csv
import math
import pathlib

import numpy as np

rng = np.random.default_rng(7)
n = 240
rows = []
for i in range(n):
    age = rng.uniform(20, 70)
    income = rng.lognormal(10.5, 0.4)
    region = rng.choice(["north", "south", "east"])
    member = rng.choice(["yes", "no"], p=[0.4, 0.6])
    tenure = rng.uniform(0, 10)
    z = 0.06 * (age - 45) + 1.2 * (math.log(income) - 10.5) + (0.8 if member == "yes" else -0.4)
    z += {"north": 0.3, "south": -0.5, "east": 0.0}[region] + 0.12 * (tenure - 5)
    z += rng.normal(0, 0.8)
    churn = "stay" if z > 0 else "leave"
    spend = 12 * age + 0.01 * income + 30 * tenure + rng.normal(0, 60)
    rows.append([f"{age:.1f}", f"{income:.0f}", region, member, f"{tenure:.1f}", f"{spend:.2f}", churn])

# A few missing cells, dropped by sanitize.
for i in (5, 77, 150):
    rows[i][2] = "NA"
rows[200][0] = ""

out = pathlib.Path(__file__).with_name("demo.csv")
with out.open("w", newline="") as f:
    w = csv.writer(f)
    w.writerow(["age", "income", "region", "member", "tenure", "spend", "outcome"])
    w.writerows(rows)
