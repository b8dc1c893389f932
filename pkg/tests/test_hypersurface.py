import math

import numpy as np
import pytest

from nullrig import catalogs
from nullrig.hypersurface import (
    AmbientRigging,
    Axis,
    DegenerateRankError,
    FrameField,
    NotNullError,
    TangentRiggingError,
    classify_point,
    patch_from_exprs,
)
from nullrig.spacetime import minkowski

SQRT2 = math.sqrt(2.0)


def field(name, **kwargs):
    b = catalogs.surface(name) if not kwargs else catalogs.surface_catalog()[name](**kwargs)
    return FrameField(b.patch, b.rigging), b


# ---- axes and patches --------------------------------------------------------


def test_axis_grids():
    closed = Axis("s", 1.0, 2.0, 5)
    assert np.allclose(closed.grid(), [1.0, 1.25, 1.5, 1.75, 2.0])
    per = Axis("phi", 0.0, 2 * math.pi, 4, periodic=True)
    g = per.grid()
    assert g.size == 4 and g[0] == 0.0
    assert abs(g[-1] - 1.5 * math.pi) < 1e-15  # endpoint excluded
    with pytest.raises(ValueError):
        Axis("bad", 0.0, 1.0, 1)
    with pytest.raises(ValueError):
        Axis("bad", 1.0, 1.0, 4)


def test_patch_from_exprs_shapes():
    amb = minkowski(4)
    axes = [Axis("v", 0.0, 1.0, 3), Axis("w1", 0.0, 1.0, 3), Axis("w2", 0.0, 1.0, 3)]
    p = patch_from_exprs("p", amb, axes, ["v", "v", "w1", "w2"])
    assert p.chart == ("v", "w1", "w2")
    pts = p.grid_points()
    assert pts.shape == (27, 3)
    assert p.contains(p.interior_point())
    x, J, H = p.embedding_jets([0.2, 0.3, 0.4])
    assert np.allclose(x, [0.2, 0.2, 0.3, 0.4])
    assert np.allclose(J, [[1, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]])
    assert not H.any()
    with pytest.raises(ValueError):
        patch_from_exprs("bad", amb, axes, ["v", "w1", "w2"])


# ---- frozen frames: Schwarzschild horizon ------------------------------------


def test_schwarzschild_horizon_frame():
    ff, b = field("schwarzschild_horizon")
    u = b.patch.interior_point()
    fp = ff.frame(u)
    assert np.allclose(fp.x, [0.0, 2.0, math.pi / 2, math.pi], atol=1e-15)
    assert np.allclose(fp.xi_amb, [-1.0, 0.0, 0.0, 0.0], atol=1e-12)
    assert np.allclose(fp.N_amb, [1.0, -1.0, 0.0, 0.0], atol=1e-12)
    assert np.allclose(fp.eta_param, [-1.0, 0.0, 0.0], atol=1e-12)
    # screen: normalized theta/phi directions, radical candidate dropped
    assert fp.nscreen == 2
    assert np.allclose(fp.screen_param, [[0, 0.5, 0], [0, 0, 0.5]], atol=1e-12)
    assert abs(fp.radical_eigenvalue) < 1e-12
    # <N, xi> = 1 and both null, in ambient terms
    gN = fp.gbar @ fp.N_amb
    assert abs(gN @ fp.xi_amb - 1.0) < 1e-12
    assert abs(gN @ fp.N_amb) < 1e-12


def test_schwarzschild_horizon_shape_frozen():
    ff, b = field("schwarzschild_horizon")
    u = b.patch.interior_point()
    sp = ff.shape(u)
    # totally geodesic: B vanishes identically (killing horizon)
    assert np.max(np.abs(sp.B_param)) < 1e-12
    assert np.max(np.abs(sp.A_xi_screen)) < 1e-10
    # tau = -dt/(4m): nonzero surface gravity tau(xi) = 1/(4m)
    assert np.allclose(sp.tau_param, [-0.25, 0.0, 0.0], atol=1e-9)
    assert abs(sp.tau_of_xi - 0.25) < 1e-9
    # screen shape of the rigging: A_N = P/(2m)
    assert np.allclose(sp.A_N_screen, 0.5 * np.eye(2), atol=1e-9)
    assert abs(sp.S1 - 1.0) < 1e-9
    assert abs(sp.star_S1) < 1e-10
    assert np.allclose(sp.mean_curvature, [1.0, 0.0, 0.0, 0.0], atol=1e-9)
    assert max(abs(v) for v in sp.checks.values()) < 1e-9


def test_schwarzschild_horizon_classify():
    ff, b = field("schwarzschild_horizon")
    for u in ff.sample_points(3):
        pc = ff.classify(u)
        assert pc.label == "MTS"
        assert pc.is_mots and pc.is_mts and not pc.is_ts
    assert ff.classification_band() == pytest.approx(1e-7)


# ---- frozen frames: warped product plane --------------------------------------


def test_warped_plane_frame_and_shape():
    ff, b = field("warped6d_plane")
    u = b.patch.interior_point()
    sp = ff.shape(u)
    fp = sp.frame
    assert np.allclose(fp.xi_amb, [1, -1, 0, 0, 0, 0], atol=1e-12)
    assert np.allclose(fp.N_amb, [-0.5, -0.5, 0, 0, 0, 0], atol=1e-12)
    assert np.allclose(fp.eta_param, [-1, 0, 0, 0, 0], atol=1e-12)
    # at the box center the warp factors are 1
    assert np.allclose(sp.B_param, np.diag([0.0, -1.0, -1.0, 1.0, 1.0]), atol=1e-11)
    assert np.allclose(sp.A_xi_screen, np.diag([-1.0, -1.0, 1.0, 1.0]), atol=1e-10)
    assert np.allclose(sp.A_N_screen, 0.5 * np.eye(4), atol=1e-10)
    assert np.max(np.abs(sp.tau_param)) < 1e-10
    assert abs(sp.S1 - 2.0) < 1e-10
    assert abs(sp.star_S1) < 1e-10
    assert np.allclose(sp.mean_curvature, [-2, 2, 0, 0, 0, 0], atol=1e-10)


def test_warped_plane_B_closed_form_off_center():
    # B(d2,d2) = -exp(2 x0), B(d4,d4) = +exp(2 x1) with x0 = -u1, x1 = u1
    ff, b = field("warped6d_plane")
    for u1 in [-0.41, 0.0, 0.37]:
        sp = ff.shape([u1, 0.3, 0.6, 0.2, 0.8])
        assert abs(sp.B_param[1, 1] + math.exp(-2 * u1)) < 1e-11
        assert abs(sp.B_param[2, 2] + math.exp(-2 * u1)) < 1e-11
        assert abs(sp.B_param[3, 3] - math.exp(2 * u1)) < 1e-11
        assert abs(sp.B_param[4, 4] - math.exp(2 * u1)) < 1e-11
        # minimal but not totally geodesic, at every point
        assert abs(sp.star_S1) < 1e-9
        assert np.max(np.abs(sp.B_param)) > 0.5


def test_warped_plane_is_mts_everywhere():
    ff, b = field("warped6d_plane")
    for u in ff.sample_points(2):
        assert ff.classify(u).label == "MTS"


# ---- frozen frames: null cone --------------------------------------------------


def test_nullcone_umbilic_frozen():
    ff, b = field("nullcone")
    u = b.patch.interior_point()  # s = 1.5, theta = pi/2
    sp = ff.shape(u)
    fp = sp.frame
    rho = -1.0 / (SQRT2 * 1.5)
    assert np.allclose(fp.xi_param, [1 / SQRT2, 0.0, 0.0], atol=1e-12)
    # B = rho g exactly on the cone
    assert np.max(np.abs(sp.B_param - rho * fp.g_param)) < 1e-12
    assert abs(sp.B_param[1, 1] - rho * 2.25) < 1e-12
    assert abs(sp.star_S1 - 2 * rho) < 1e-9
    # UCC: A_N = star A_xi, so both traces agree
    assert abs(sp.S1 - sp.star_S1) < 1e-9
    assert np.max(np.abs(sp.A_N_screen - sp.A_xi_screen)) < 1e-9
    assert abs(sp.tau_of_xi) < 1e-10
    assert np.max(np.abs(sp.tau_param)) < 1e-10


def test_nullcone_rho_scales_with_s():
    ff, b = field("nullcone")
    for s in [1.1, 1.5, 1.9]:
        sp = ff.shape([s, 1.2, 0.7])
        rho = sp.star_S1 / 2
        assert abs(rho + 1.0 / (SQRT2 * s)) < 1e-9
        # expanding outward, contracting inward: TOS but never TS
        pc = ff.classify([s, 1.2, 0.7])
        assert pc.label == "TOS"
        assert pc.is_tos and not pc.is_ts


# ---- classification table -------------------------------------------------------


def test_classify_point_table():
    band = 1e-7
    assert classify_point(0.0, -2.0, band).label == "MTS"
    assert classify_point(0.0, -2.0, band).is_mots
    assert classify_point(-0.3, -1.2, band).label == "TS"
    assert classify_point(0.5, -1.0, band).label == "UNTRAPPED"
    assert classify_point(-0.5, 1.0, band).label == "TOS"
    assert classify_point(0.0, 0.0, band).label == "MTS"
    # MOTS but not MTS: outgoing zero, ingoing positive
    pc = classify_point(0.0, 0.4, band)
    assert pc.label == "MOTS" and pc.is_mots and not pc.is_mts
    # band membership counts as zero
    assert classify_point(band / 2, -1.0, band).label == "MTS"


# ---- rigging behaviour ----------------------------------------------------------


def test_rigging_rescale_covariance():
    # L -> 2L gives xi -> xi/2 and B -> B/2; labels unchanged
    b = catalogs.surface("nullcone")
    ff1 = FrameField(b.patch, b.rigging)
    doubled = AmbientRigging(lambda x: 2.0 * b.rigging.ambient_field(x), name="2L")
    ff2 = FrameField(b.patch, doubled)
    u = b.patch.interior_point()
    sp1, sp2 = ff1.shape(u), ff2.shape(u)
    assert np.allclose(sp2.frame.xi_amb, 0.5 * sp1.frame.xi_amb, atol=1e-12)
    assert np.allclose(sp2.B_param, 0.5 * sp1.B_param, atol=1e-11)
    assert ff1.classify(u).label == ff2.classify(u).label


@pytest.mark.parametrize("phi", [0.5, 2.0, 7.3])
def test_classification_invariant_under_positive_rescale(phi):
    for name in ["nullcone", "schwarzschild_horizon"]:
        b = catalogs.surface(name)
        ff1 = FrameField(b.patch, b.rigging)
        ff2 = FrameField(
            b.patch, AmbientRigging(lambda x: phi * b.rigging.ambient_field(x))
        )
        for u in ff1.sample_points(2):
            try:
                l1 = ff1.classify(u).label
            except DegenerateRankError:
                continue
            assert l1 == ff2.classify(u).label


def test_tangent_rigging_rejected():
    b = catalogs.surface("monge_plane")
    # the rigged field itself is tangent, so it cannot rig the patch
    xi = np.array([1.0, 1 / SQRT2, 1 / SQRT2, 0.0]) / SQRT2
    ff = FrameField(b.patch, AmbientRigging(lambda x: np.broadcast_to(xi, x.shape)))
    with pytest.raises(TangentRiggingError):
        ff.frame(b.patch.interior_point())


def test_non_null_patch_rejected():
    amb = minkowski(4)
    axes = [Axis("u1", 0.1, 1.0, 3), Axis("u2", 0.1, 1.0, 3), Axis("u3", 0.1, 1.0, 3)]
    rig = AmbientRigging(lambda x: np.broadcast_to([1.0, 0, 0, 0], x.shape))
    spacelike = patch_from_exprs("slice", amb, axes, ["0.5*u1", "u1", "u2", "u3"])
    with pytest.raises(NotNullError):
        FrameField(spacelike, rig).frame(spacelike.interior_point())
    timelike = patch_from_exprs("wall", amb, axes, ["2*u1", "u1", "u2", "u3"])
    with pytest.raises(NotNullError):
        FrameField(timelike, rig).frame(timelike.interior_point())


def test_degenerate_rank_at_pole():
    ff, b = field("schwarzschild_horizon")
    with pytest.raises(DegenerateRankError):
        ff.frame([0.0, 0.0, math.pi])  # theta = 0: spherical chart pole


# ---- structural identities -------------------------------------------------------


CATALOG_NAMES = [
    "schwarzschild_horizon",
    "warped6d_plane",
    "nullcone",
    "monge_plane",
    "monge_cone",
    "monge_cylinder",
    "null_plane",
]


@pytest.mark.parametrize("name", CATALOG_NAMES)
def test_frame_invariants_across_catalog(name):
    ff, b = field(name)
    for u in ff.sample_points(2):
        try:
            sp = ff.shape(u)
        except DegenerateRankError:
            continue
        assert max(abs(v) for v in sp.checks.values()) < 1e-8, sp.checks


@pytest.mark.parametrize("name", CATALOG_NAMES)
def test_structure_residuals_across_catalog(name):
    ff, b = field(name)
    u = b.patch.interior_point()
    res = ff.structure_residuals(u)
    # identities that hold for every null patch and admissible rigging
    assert res["lie_xi_g_plus_2B"] < 1e-7
    assert res["non_metricity"] < 1e-7
    assert res["B_vs_A_xi"] < 1e-8
    assert res["C_vs_A_N"] < 1e-8
    # all catalog riggings are closed: integrable screens
    assert res["screen_integrability"] < 1e-7
    assert res["deta_max"] < 1e-7


def test_lie_derivative_sign_discriminates():
    # L_xi g = -2B: the flipped combination vanishes only where B does
    ff, b = field("schwarzschild_horizon")
    res = ff.structure_residuals(b.patch.interior_point())
    assert res["lie_xi_g_minus_2B"] < 1e-9
    ff, b = field("nullcone")
    res = ff.structure_residuals(b.patch.interior_point())
    assert res["lie_xi_g_minus_2B"] > 1.0
    assert res["lie_xi_g_plus_2B"] < 1e-8


def test_umbilicity_and_conformality_keys():
    ff, b = field("nullcone")
    res = ff.structure_residuals(b.patch.interior_point())
    assert res["umbilicity"] < 1e-9
    assert abs(res["umbilic_rho"] + 1.0 / (SQRT2 * 1.5)) < 1e-9
    assert res["conformality"] < 1e-9
    assert abs(res["conformal_phi"] - 1.0) < 1e-9
    assert res["geodesic"] > 1.0

    ff, b = field("schwarzschild_horizon")
    res = ff.structure_residuals(b.patch.interior_point())
    assert res["geodesic"] < 1e-12
    assert res["umbilicity"] < 1e-12
    # A_N = P/(2m) with star A_xi = 0: no conformal factor exists
    assert res["conformal_phi"] == 0.0
    assert abs(res["conformality"] - 0.5) < 1e-9

    ff, b = field("monge_cone")
    res = ff.structure_residuals(b.patch.interior_point())
    assert abs(res["conformal_phi"] - 1.0) < 1e-9
    assert res["umbilicity"] < 1e-9  # the radial graph is the cone itself

    ff, b = field("monge_cylinder")
    res = ff.structure_residuals(b.patch.interior_point())
    assert abs(res["conformal_phi"] - 1.0) < 1e-9
    assert res["umbilicity"] > 1e-2  # one flat screen direction breaks B ~ g


def test_monge_plane_totally_geodesic():
    ff, b = field("monge_plane")
    u = b.patch.interior_point()
    sp = ff.shape(u)
    assert np.max(np.abs(sp.B_param)) < 1e-12
    assert np.max(np.abs(sp.C_hat)) < 1e-10
    assert np.max(np.abs(sp.tau_param)) < 1e-10
    assert np.max(np.abs(sp.mean_curvature)) < 1e-10
    assert ff.classify(u).label == "MTS"


def test_adapted_null_plane_chart():
    # same plane geometry in an adapted chart with periodic leaf axes
    ff, b = field("null_plane")
    for u in ff.sample_points(2):
        sp = ff.shape(u)
        assert np.max(np.abs(sp.B_param)) < 1e-11
        assert abs(sp.theta_out) < 1e-10 and abs(sp.theta_in) < 1e-10


def test_frame_cache_returns_same_object():
    ff, b = field("nullcone")
    u = b.patch.interior_point()
    assert ff.frame(u) is ff.frame(u)
    assert ff.shape(u) is ff.shape(u)


def test_decompose_roundtrip():
    ff, b = field("schwarzschild_horizon")
    fp = ff.frame(b.patch.interior_point())
    X = 0.3 * fp.screen_amb[0] - 0.7 * fp.screen_amb[1] + 1.2 * fp.xi_amb + 0.4 * fp.N_amb
    c_screen, c_xi, c_N = fp.decompose(X)
    assert np.allclose(c_screen, [0.3, -0.7], atol=1e-12)
    assert abs(c_xi - 1.2) < 1e-12
    assert abs(c_N - 0.4) < 1e-12
    tangent = X - 0.4 * fp.N_amb
    up = fp.tangent_param_of(tangent)
    assert np.allclose(up @ fp.J.T, tangent, atol=1e-12)
