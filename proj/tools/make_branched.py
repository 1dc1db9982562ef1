#!/usr/bin/env python3
"""Generate the stylized branched trunk scenario (scenarios/branched.yaml).

Geometry is synthetic: a 10-stop corridor C1..C10 (C1 = Malmvik, the
branch junction and only transfer stop; C10 = Morby) and two 6-stop
branches R1..R6 (line 176) and B1..B6 (line 177), numbered outward from
C1. Aggregate AM-peak rates per line and direction are spread uniformly
over the stop pairs of each OD category.
"""

import argparse
import math
import sys

import yaml

CORRIDOR = [f"C{i}" for i in range(1, 11)]
BRANCHES = {"176": [f"R{i}" for i in range(1, 7)], "177": [f"B{i}" for i in range(1, 7)]}

# pax/h and category shares (C2C, C2B, B2C, B2B) per line and direction.
DEMAND = {
    ("176", "east"): (1369, 0.41, 0.00, 0.46, 0.13),
    ("176", "west"): (1109, 0.49, 0.34, 0.00, 0.16),
    ("177", "east"): (1117, 0.46, 0.00, 0.46, 0.08),
    ("177", "west"): (1057, 0.59, 0.33, 0.00, 0.08),
}

SPACING = 800.0
MEDIAN_RUN = 120.0
SIGMA_RUN = 0.2


def stops():
    out = []
    for i, s in enumerate(CORRIDOR):
        name = {"C1": "Malmvik", "C10": "Morby"}.get(s, s)
        out.append({"id": s, "name": name, "x": i * SPACING, "y": 0.0, "tag": "corridor"})
    for line, sign in (("176", 1.0), ("177", -1.0)):
        for k, s in enumerate(BRANCHES[line], start=1):
            d = k * SPACING
            out.append({"id": s, "x": round(-d * math.cos(math.pi / 6), 1), "y": round(sign * d * math.sin(math.pi / 6), 1),
                        "tag": "branch"})
    return out


def links():
    chains = [CORRIDOR] + [list(reversed(b)) + ["C1"] for b in BRANCHES.values()]
    out = []
    for chain in chains:
        for a, b in zip(chain, chain[1:]):
            for u, v in ((a, b), (b, a)):
                out.append({"id": f"{u}-{v}", "from": u, "to": v, "length": SPACING,
                            "running_time": {"type": "lognormal", "median": MEDIAN_RUN, "sigma": SIGMA_RUN}})
    return out


def lines():
    out = []
    # Branch lines 15 min apart at C1; corridor line every 7.5 min.
    for line, offset in (("176", 0.0), ("177", 900.0)):
        east = list(reversed(BRANCHES[line])) + CORRIDOR
        out.append({"id": f"{line}E", "stops": east, "headway": 1800, "first_departure": offset,
                    "vehicle_type": "bus"})
        out.append({"id": f"{line}W", "stops": list(reversed(east)), "headway": 1800,
                    "first_departure": offset, "vehicle_type": "bus"})
    out.append({"id": "CE", "stops": CORRIDOR, "headway": 450, "first_departure": 225, "vehicle_type": "bus"})
    out.append({"id": "CW", "stops": list(reversed(CORRIDOR)), "headway": 450, "first_departure": 225,
                "vehicle_type": "bus"})
    return out


def category_pairs(line, direction):
    branch = BRANCHES[line]
    corr_no_junction = CORRIDOR[1:]
    east = direction == "east"
    c2c = [(a, b) for i, a in enumerate(CORRIDOR) for j, b in enumerate(CORRIDOR) if (i < j if east else i > j)]
    c2b = [] if east else [(c, s) for c in corr_no_junction for s in branch]
    b2c = [(s, c) for s in branch for c in corr_no_junction] if east else []
    # branch lists run outward, so eastbound means a higher index to a lower one
    b2b = [(a, b) for i, a in enumerate(branch) for j, b in enumerate(branch) if (i > j if east else i < j)]
    return c2c, c2b, b2c, b2b


def demand():
    rates = {}
    for (line, direction), (total, *shares) in DEMAND.items():
        for pairs, share in zip(category_pairs(line, direction), shares):
            if share == 0.0 or not pairs:
                continue
            each = total * share / len(pairs)
            for od in pairs:
                rates[od] = rates.get(od, 0.0) + each
    return [{"origin": o, "destination": d, "rate": round(r, 6)} for (o, d), r in sorted(rates.items())]


def scenario(days, replications, seed):
    branch_stops = [s for b in BRANCHES.values() for s in b]
    return {
        "name": "branched",
        "network": {"stops": stops(), "links": links()},
        "vehicle_types": [{"id": "bus", "capacity": 100, "seats": 44},
                          {"id": "shuttle", "capacity": 10, "seats": 5}],
        "lines": lines(),
        "flex": {
            "vehicle_type": "shuttle",
            "service_area": branch_stops + ["C1"],
            "fleet": [{"stop": s, "count": 5} for s in branch_stops],
            "assignment_interval": 5,
            "rebalancing_interval": 600,
            "balance_stops": branch_stops,
        },
        "demand": {"window": 10800, "poisson": demand()},
        "paths": {
            "max_transfers": 1,
            "transfer_stops": ["C1"],
            "allowed_types": {"C2C": ["FIX"], "C2B": ["FIX", "FIX-FLEX"], "B2C": ["FIX", "FLEX-FIX"],
                              "B2B": ["FIX", "FLEX"]},
        },
        "behavior": {"beta_ivt": -0.0015742, "transfer_penalty_ivt_seconds": 300, "walk_variability": 0.0,
                     "sharing": "od_group"},
        "run": {"days": days, "replications": replications, "seed": seed},
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("-o", "--output", default="-")
    ap.add_argument("--days", type=int, default=100)
    ap.add_argument("--replications", type=int, default=20)
    ap.add_argument("--seed", type=int, default=176177)
    args = ap.parse_args()
    text = ("# Stylized branched trunk network, generated by tools/make_branched.py.\n"
            "# Synthetic geometry; stop-level demand is a uniform spread of aggregate rates.\n")
    text += yaml.safe_dump(scenario(args.days, args.replications, args.seed), sort_keys=False,
                           default_flow_style=None, width=120)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text)


if __name__ == "__main__":
    main()
