"""Regenerates the CSV fixtures under data/.

cars.csv is the classic 406-row automobile dataset (vega-datasets, BSD-3)
with a Brand column derived from the first token of Name.

college.csv is synthetic. It uses the College Scorecard column layout
(six dimensions, ten measures) and is drawn so that private and public
institutions form two clusters in SATAverage x AverageCost.

usage: python3 make_fixtures.py path/to/cars.json
"""
import csv
import json
import sys

import numpy as np

HERE = __file__.rsplit("/", 1)[0] or "."


def fmt(v):
    if v is None:
        return ""
    if isinstance(v, float) and v.is_integer():
        return str(int(v))
    return str(v)


def cars(src):
    rows = json.load(open(src))
    cols = ["Name", "MilesPerGal", "Cylinders", "Displacement", "Horsepower",
            "Weight", "Acceleration", "Year", "Origin", "Brand"]
    with open(f"{HERE}/cars.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([
                r["Name"], fmt(r["Miles_per_Gallon"]), fmt(r["Cylinders"]),
                fmt(r["Displacement"]), fmt(r["Horsepower"]), fmt(r["Weight_in_lbs"]),
                fmt(r["Acceleration"]), r["Year"], r["Origin"], r["Name"].split()[0],
            ])


def college(n=1200, seed=20200612):
    rng = np.random.default_rng(seed)
    private = rng.random(n) < 0.55
    regions = ["Far West", "Great Lakes", "Mid East", "New England", "Plains",
               "Rocky Mountains", "Southeast", "Southwest", "Outlying Areas"]
    geos = ["Large City", "Midsize City", "Small City", "Suburb", "Town", "Rural"]
    pred = ["Associate", "Bachelor's", "Certificate", "Graduate"]
    high = ["Associate", "Bachelor's", "Certificate", "Graduate", "Non-degree"]

    sat = np.where(private, rng.normal(1150, 110, n), rng.normal(1060, 90, n))
    cost = np.where(private, rng.normal(46000, 6500, n), rng.normal(20500, 3500, n))
    act = np.clip(np.round((sat - 400) / 36 + rng.normal(0, 1.2, n)), 12, 35)
    admit = np.clip(1.6 - sat / 1000 + rng.normal(0, 0.12, n), 0.05, 1.0)
    expend = np.maximum(3000, cost * 0.35 + rng.normal(0, 2500, n))
    salary = np.maximum(3000, 5500 + (sat - 1000) * 8 + rng.normal(0, 900, n))
    debt = np.maximum(2000, np.where(private, 19000, 14500) + rng.normal(0, 3000, n))
    age = np.clip(rng.gamma(9, 2.6, n), 17, 45)
    income = np.maximum(5000, rng.lognormal(10.6, 0.45, n))
    earnings = np.maximum(15000, 18000 + sat * 20 + rng.normal(0, 6000, n))

    cols = ["Name", "PredominantDegree", "HighestDegree", "FundingModel", "Region",
            "Geography", "AdmissionRate", "ACTMedian", "SATAverage", "AverageCost",
            "Expenditure", "AverageFacultySalary", "MedianDebt", "AverageAgeofEntry",
            "MedianFamilyIncome", "MedianEarnings"]
    with open(f"{HERE}/college.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(cols)
        for i in range(n):
            w.writerow([
                f"College {i + 1:04d}",
                pred[rng.integers(len(pred))],
                high[rng.integers(len(high))],
                "Private" if private[i] else "Public",
                regions[rng.integers(len(regions))],
                geos[rng.integers(len(geos))],
                f"{admit[i]:.4f}", int(act[i]), int(round(sat[i])), int(round(cost[i])),
                int(round(expend[i])), int(round(salary[i])), int(round(debt[i])),
                f"{age[i]:.2f}", int(round(income[i])), int(round(earnings[i])),
            ])


if __name__ == "__main__":
    cars(sys.argv[1])
    college()
