"""Regenerate the failure-probability curves and plot them.

Run it top to bottom:

    python3 demos/plot_failure_curves.py [OUTDIR]

The curves ship as CSV (the same rows the ``juryshard fig2`` / ``fig4``
commands emit); matplotlib turns them into two PNGs.  OUTDIR defaults to
``demos/out``.
"""

import csv
import math
import pathlib
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from juryshard import SystemParams, hypergeom_tail, max_manipulation_prob

OUTDIR = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "demos/out")
OUTDIR.mkdir(parents=True, exist_ok=True)
POPULATION = 2000


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    print(f"wrote {path} ({len(rows)} rows)")


# -- curve 1: random committee sampling, adversaries t in {n/3, n/2} --------
sampling_rows = []
for adversaries in (POPULATION // 3, POPULATION // 2):
    for shards in range(2, 35):
        committee = POPULATION // shards
        majority = (committee + 1) // 2
        tail = hypergeom_tail(POPULATION, adversaries, committee, majority)
        sampling_rows.append((adversaries, shards, committee, tail.log10))
write_csv(OUTDIR / "sampling_failure.csv", ("t", "s", "m", "log10_failure"), sampling_rows)

# -- curve 2: class-based manipulation, AD = n/2, T = ceil(0.7 m) ----------
class_rows = []
for shards in range(2, 601):
    jury_size = POPULATION // shards
    threshold = max(1, math.ceil(0.7 * jury_size))
    params = SystemParams(
        shards=shards,
        jury_size=jury_size,
        threshold=threshold,
        adversaries=min(POPULATION // 2, jury_size * shards),
    )
    bound = max_manipulation_prob(params, clamp=True)
    class_rows.append((shards, jury_size, bound.exact.log10, bound.approximation_log10))
write_csv(OUTDIR / "class_manipulation.csv",
          ("s", "m", "log10_exact", "log10_approx"), class_rows)

# -- the plots ---------------------------------------------------------------
fig, ax = plt.subplots(figsize=(7, 4.5))
for adversaries, label in ((POPULATION // 3, "t = n/3"), (POPULATION // 2, "t = n/2")):
    points = [(s, v) for t, s, _, v in sampling_rows if t == adversaries]
    ax.plot(*zip(*points), marker="o", markersize=3, label=label)
ax.set_xlabel("shards")
ax.set_ylabel("log10 Pr[committee majority lost]")
ax.set_title(f"Random committee sampling, n = {POPULATION}")
ax.legend()
ax.grid(True, alpha=0.3)
fig.tight_layout()
fig.savefig(OUTDIR / "sampling_failure.png", dpi=150)
print(f"wrote {OUTDIR / 'sampling_failure.png'}")

fig, ax = plt.subplots(figsize=(7, 4.5))
xs = [row[0] for row in class_rows]
ax.plot(xs, [row[2] for row in class_rows], label="exact optimal placement")
ax.plot(xs, [row[3] for row in class_rows], "--", label="(AD/(T·s))^T bound")
ax.set_xlabel("shards")
ax.set_ylabel("log10 Pr[designated jury manipulated]")
ax.set_title(f"Class-based juries, n = {POPULATION}, AD = n/2, T = 0.7·m")
ax.legend()
ax.grid(True, alpha=0.3)
fig.tight_layout()
fig.savefig(OUTDIR / "class_manipulation.png", dpi=150)
print(f"wrote {OUTDIR / 'class_manipulation.png'}")
