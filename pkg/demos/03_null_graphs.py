"""Null graphs x0 = F(u) and their closed-form shape data.

A graph in Minkowski space is null exactly when |grad F| = 1, and then the
whole extrinsic package collapses to derivatives of F: both shape operators
equal -Hess F / sqrt(2), tau vanishes, and the two expansions are
-+ (Laplacian F)/sqrt(2).  That closed form is the independent oracle for
the general frame engine, so this demo builds three graphs, prints the
worst oracle-vs-engine gap over the whole grid, and then shows the wider
dichotomy: the graph is a trapping horizon exactly when F is harmonic.

Run from the repository root:  python demos/03_null_graphs.py
"""

import numpy as np

from nullrig import FrameField, NotNullError, catalogs, monge_surface


def oracle_gap(bundle) -> float:
    ms = bundle.monge
    ff = FrameField(bundle.patch, bundle.rigging)
    worst = 0.0
    for u in bundle.patch.grid_points():
        closed = ms.closed_shape(u)
        sp = ff.shape(u)
        worst = max(
            worst,
            float(np.max(np.abs(sp.B_param - closed["B_param"]))),
            float(np.max(np.abs(sp.A_N_param - closed["shape_param"]))),
            float(np.max(np.abs(sp.tau_param - closed["tau"]))),
            abs(sp.theta_out - closed["theta_out"]),
            abs(sp.theta_in - closed["theta_in"]),
        )
    return worst


def main():
    print("oracle vs engine, worst gap over every grid point:")
    for builder in (catalogs.monge_plane, catalogs.monge_cone,
                    catalogs.monge_cylinder):
        bundle = builder()
        print(f"   {bundle.name:16s} F = {bundle.notes['F']:28s} "
              f"gap = {oracle_gap(bundle):.3e}")

    print("\ntrapping horizon <=> harmonic F:")
    for builder in (catalogs.monge_plane, catalogs.monge_cone,
                    catalogs.monge_cylinder):
        bundle = builder()
        rep = bundle.monge.horizon_report()
        tag = "TRAPPING_HORIZON" if rep.is_trapping_horizon else "no verdict"
        print(f"   {bundle.name:16s} max|Laplacian F| = {rep.max_abs_laplacian:.4f}"
              f"  -> {tag}")
        for leaf, theta_sup, labels in rep.leaves[:2]:
            print(f"      leaf F = {leaf.level:+.4f}: max|theta| = "
                  f"{theta_sup:.4f}, labels {labels}")

    print("\ngraphs that are not null are refused at build time:")
    try:
        monge_surface("u1^2 + u2^2").verify_null_on_grid()
    except NotNullError as err:
        print(f"   NotNullError: {err}")


if __name__ == "__main__":
    main()
