import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nullrig import catalogs, rigging
from nullrig.hypersurface import FrameField
from nullrig.rigging import (
    InadmissibleZetaError,
    ZeroPhiError,
    identity_residuals,
    make_change,
    seeded_changes,
    transformed_quantities,
)

RNG_SEED = 20260815

CATALOG_NAMES = [
    "schwarzschild_horizon",
    "warped6d_plane",
    "nullcone",
    "monge_plane",
    "monge_cone",
    "monge_cylinder",
    "null_plane",
]


def field(name, **kwargs):
    b = catalogs.surface(name) if not kwargs else catalogs.surface_catalog()[name](**kwargs)
    return b, FrameField(b.patch, b.rigging)


def test_identity_change_is_exact():
    b, ff = field("nullcone")
    ch = make_change(ff, 1.0, None, name="identity")
    for u in [b.patch.interior_point()] + ff.sample_points(2):
        res = identity_residuals(ch, u)
        assert max(res.values()) < 1e-12


def test_pure_rescale_monge_cone():
    b, ff = field("monge_cone")
    ch = make_change(ff, 2.0, None, name="double")
    for u in [b.patch.interior_point()] + ff.sample_points(2):
        res = identity_residuals(ch, u)
        assert max(res.values()) < 1e-6
    # B halves exactly, expansions halve, so the verdict cannot move
    u0 = b.patch.interior_point()
    sp = ff.shape(u0)
    sp2 = ch.new_field().shape(u0)
    assert np.max(np.abs(sp2.B_param - 0.5 * sp.B_param)) < 1e-12
    assert abs(sp2.star_S1 - 0.5 * sp.star_S1) < 1e-12


def test_smooth_phi_shifts_tau():
    # B = 0 on the horizon patch, so tau~ = tau + d ln|phi| exactly
    b, ff = field("schwarzschild_horizon")
    ch = make_change(ff, "1 + 0.1*sin(theta)", None, name="smooth")
    for u in [np.array([0.3, 1.1, 2.0]), np.array([-0.4, 1.9, 0.7])]:
        sp = ff.shape(u)
        q = transformed_quantities(ch, u)
        dln = ch.dphi(u) / ch.phi(u)
        assert np.max(np.abs(q["tau_param"] - sp.tau_param - dln)) < 1e-9
        assert np.max(np.abs(q["B_param"])) < 1e-12
        res = identity_residuals(ch, u)
        assert max(res.values()) < 1e-6


def test_random_positive_phi_warped():
    b, ff = field("warped6d_plane")
    rng = np.random.default_rng(RNG_SEED)
    wave = rng.standard_normal(b.patch.nparams)
    phi = lambda u: 1.3 + 0.4 * np.sin(float(wave @ u))
    ch = make_change(ff, phi, None, name="random-phi")
    for u in [b.patch.interior_point()] + ff.sample_points(2)[:4]:
        res = identity_residuals(ch, u)
        assert max(res.values()) < 1e-5


@pytest.mark.parametrize("name", CATALOG_NAMES)
def test_seeded_changes_across_catalog(name):
    b, ff = field(name)
    u0 = b.patch.interior_point()
    for ch in seeded_changes(ff, count=3, seed=7):
        res = identity_residuals(ch, u0)
        assert max(res.values()) < 1e-5, (name, ch.name, res)
        assert res["i2_admissible"] < 1e-12


def test_string_fields_on_nullcone():
    b, ff = field("nullcone", dim=3)
    u0 = b.patch.interior_point()
    # eta(zeta) < 0 here, so the screen rescale has a real root
    ch = make_change(ff, "1 + 0.1*sin(phi)", ("-0.05", "0.2"))
    assert ch.admissibility_defect(u0) < 1e-12
    assert max(identity_residuals(ch, u0).values()) < 1e-5
    with pytest.raises(InadmissibleZetaError):
        make_change(ff, "1 + 0.1*sin(phi)", ("0.05", "0.2"))


def test_screen_only_zeta_rejected():
    b, ff = field("nullcone", dim=3)
    with pytest.raises(InadmissibleZetaError):
        make_change(ff, 1.0, ("0", "0.2"))


def test_zeta_without_screen_part_rejected():
    b, ff = field("monge_cone")
    zeta = lambda u: 0.2 * ff.frame(u).xi_param
    with pytest.raises(InadmissibleZetaError):
        make_change(ff, 1.0, zeta)


def test_zero_phi_rejected():
    b, ff = field("monge_plane")
    with pytest.raises(ZeroPhiError):
        make_change(ff, 0.0, None)
    with pytest.raises(ZeroPhiError):
        make_change(ff, "u1 - 1", None)  # vanishes at the box centre


def test_star_S1_divides_by_phi():
    for name in ["monge_cone", "warped6d_plane"]:
        b, ff = field(name)
        u0 = b.patch.interior_point()
        sp = ff.shape(u0)
        for ch in seeded_changes(ff, count=2, seed=11):
            sp2 = ch.new_field().shape(u0)
            assert abs(sp2.star_S1 - sp.star_S1 / ch.phi(u0)) < 1e-8


def test_mots_labels_invariant_under_admissible_changes():
    # theta_out rescales by 1/phi > 0: marginal stays marginal
    for name in ["schwarzschild_horizon", "warped6d_plane"]:
        b, ff = field(name)
        u0 = b.patch.interior_point()
        assert ff.classify(u0).is_mots
        for ch in seeded_changes(ff, count=3, seed=7):
            ff2 = ch.new_field()
            assert ff2.classify(u0).is_mots, (name, ch.name)


def test_labels_invariant_under_pure_rescale():
    for name, expected in [("monge_cone", "TOS"), ("schwarzschild_horizon", "MTS")]:
        b, ff = field(name)
        u0 = b.patch.interior_point()
        assert ff.classify(u0).label == expected
        for phi in [0.5, 3.5]:
            ff2 = make_change(ff, phi, None).new_field()
            assert ff2.classify(u0).label == expected, (name, phi)


def test_umbilic_and_geodesic_invariant():
    # B~ = B/phi preserves both B = rho g and B = 0
    b, ff = field("nullcone")
    u0 = b.patch.interior_point()
    ch = seeded_changes(ff, count=1, seed=3)[0]
    res = ch.new_field().structure_residuals(u0)
    assert res["umbilicity"] < 1e-8
    b2, ff2 = field("schwarzschild_horizon")
    ch2 = seeded_changes(ff2, count=1, seed=3)[0]
    res2 = ch2.new_field().structure_residuals(b2.patch.interior_point())
    assert res2["geodesic"] < 1e-10


def test_transformed_quantities_contents():
    b, ff = field("warped6d_plane")
    u0 = b.patch.interior_point()
    ch = make_change(ff, 2.5, None)
    q = transformed_quantities(ch, u0)
    assert set(q) == {
        "xi_param", "xi_amb", "admissibility", "B_param", "P", "gamma",
        "tau_param", "A_xi_param", "A_N_param", "star_S1",
    }
    sp = ff.shape(u0)
    assert np.max(np.abs(q["B_param"] - sp.B_param / 2.5)) < 1e-14
    assert abs(q["star_S1"] - sp.star_S1 / 2.5) < 1e-14


def test_non_null_change_keeps_raw_zeta():
    b, ff = field("nullcone", dim=3)
    ch = make_change(ff, 1.0, ("0", "0.2"), null=False)
    u0 = b.patch.interior_point()
    assert ch.admissibility_defect(u0) > 1e-3
    # the frame build renormalizes any transverse rigging to a null one
    fp = ch.new_field().frame(u0)
    assert abs(fp.N_amb @ b.ambient.metric(fp.x) @ fp.N_amb) < 1e-10


@given(st.floats(min_value=0.4, max_value=3.0))
@settings(max_examples=20, deadline=None)
def test_rescale_property_nullcone(phi):
    b = catalogs.surface("nullcone")
    ff = FrameField(b.patch, b.rigging)
    u0 = b.patch.interior_point()
    sp = ff.shape(u0)
    ff2 = make_change(ff, phi, None).new_field()
    sp2 = ff2.shape(u0)
    assert abs(sp2.star_S1 - sp.star_S1 / phi) < 1e-9
    assert ff2.classify(u0).label == "TOS"
