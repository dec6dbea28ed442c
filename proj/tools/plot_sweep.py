#!/usr/bin/env python3
# Copyright 2026 The cclbench Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Plot accuracy, max attack advantage and train-loss variance against a sweep knob.

Reads a sweep.csv written by `cclbench sweep` or `cclbench baselines`. Each
knob gets one line (mean over seeds, shaded +-1 std); the vanilla CE row is
drawn as a horizontal reference.
"""

import argparse
import sys

import pandas as pd

REQUIRED = ["knob", "value", "seed", "status", "test_acc", "max_adv", "loss_var"]
PANELS = [("test_acc", "test accuracy"), ("max_adv", "max attack advantage"),
          ("loss_var", "train loss variance")]


def load(path):
    df = pd.read_csv(path)
    missing = [c for c in REQUIRED if c not in df.columns]
    if missing:
        raise SystemExit(f"{path}: missing columns {', '.join(missing)}")
    return df[df.status == "ok"]


def plot(df, out):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(1, len(PANELS), figsize=(4.2 * len(PANELS), 3.4))
    vanilla = df[df.knob == "vanilla"]
    for ax, (col, label) in zip(axes, PANELS):
        for knob, g in df[df.knob != "vanilla"].groupby("knob"):
            s = g.groupby("value")[col].agg(["mean", "std"]).fillna(0.0)
            ax.plot(s.index, s["mean"], marker="o", label=knob)
            ax.fill_between(s.index, s["mean"] - s["std"], s["mean"] + s["std"], alpha=0.2)
        if not vanilla.empty:
            ax.axhline(vanilla[col].mean(), color="k", ls="--", lw=1, label="CE")
        ax.set_xlabel("knob value")
        ax.set_ylabel(label)
    axes[0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out, dpi=120)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csv", help="sweep.csv")
    ap.add_argument("--out", default="sweep.png", help="output image")
    ap.add_argument("--check", action="store_true", help="validate columns only")
    args = ap.parse_args(argv)
    df = load(args.csv)
    if df.empty:
        raise SystemExit(f"{args.csv}: no ok rows")
    if not args.check:
        plot(df, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
