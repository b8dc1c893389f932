"""Trapped-surface classification and horizon verdicts across the catalog.

Every leafed catalog patch gets the same treatment: classify the leaves by
the signs of the two null expansions, then ask the horizon classifier for
the aggregate verdict (trapping horizon? non-expanding? future? outer?).
The four cases land in four genuinely different corners:

  schwarzschild_horizon  both marginal signatures, outer  -> FOTH
  warped6d_plane         minimal but sheared, not outer   -> future TH
  null_plane             flat and static                  -> TH, not future
  nullcone               nowhere marginal                 -> no verdict

Run from the repository root:  python demos/02_horizon_verdicts.py
"""

import numpy as np

from nullrig import FrameField, catalogs
from nullrig.analysis import horizon_classify, leaf_patches


def describe(name, builder):
    bundle = builder()
    ff = FrameField(bundle.patch, bundle.rigging)
    print(f"\n== {bundle.patch.name} ==")

    leaves = leaf_patches(ff)
    print(f"   {len(leaves)} leaves ({bundle.notes.get('leaf', 'unnamed family')})")
    for leaf in leaves[:: max(1, len(leaves) - 1)]:  # first and last
        sp = ff.shape(leaf.lift(leaf.center()))
        pc = ff.classify(leaf.lift(leaf.center()))
        print(f"   leaf {leaf.label()}: theta_out={sp.theta_out:+.4f} "
              f"theta_in={sp.theta_in:+.4f} -> {pc.label}")

    verdict = horizon_classify(ff)
    labels = verdict.labels()
    print(f"   verdict: {labels if labels else 'none (not a trapping horizon)'}")
    deltas = [row["delta_theta_out"] for row in verdict.per_leaf
              if row.get("delta_theta_out") is not None]
    if deltas:
        print(f"   outer test delta_N theta_out: "
              f"{min(deltas):+.4f} .. {max(deltas):+.4f}")
    return labels


def main():
    got = {}
    for name, builder in [
        ("schwarzschild_horizon", catalogs.schwarzschild_horizon),
        ("warped6d_plane", catalogs.warped6d_plane),
        ("null_plane", catalogs.null_plane),
        ("nullcone", catalogs.nullcone),
    ]:
        got[name] = describe(name, builder)

    print("\nsummary:")
    for name, labels in got.items():
        print(f"   {name:22s} {labels}")


if __name__ == "__main__":
    main()
