import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wedgelab.retmap import LiftPoint, MapConstants, Params, jacobian, peak_value, return_map
from wedgelab.resonance import (
    BTBranch,
    DegenerateCircle,
    Membership,
    PointClass,
    SurfaceLabel,
    bt_locate,
    bt_nondegeneracy,
    bt_points,
    classify,
    fixed_points,
    peak_omega,
    polish_fixed_point,
    sample_surfaces,
    scale_coefficient,
    wedge_center,
    wedge_center_inverse,
    wedge_membership,
)

TWO_PI = 2.0 * math.pi


class TestCenterCurve:
    def test_reference_values(self, c_k1):
        assert wedge_center(8.0, 1, c_k1) == pytest.approx(
            0.36115790292384137, abs=1e-14
        )
        assert wedge_center(0.1, 1, c_k1) < 1e-25  # flat at small omega
        assert wedge_center(peak_omega(1, c_k1), 1, c_k1) == pytest.approx(
            c_k1.peak, abs=1e-15
        )

    def test_nonpositive_omega(self, c_k1):
        with pytest.raises(ValueError, match="omega"):
            wedge_center(0.0, 1, c_k1)

    def test_peak_omega_values(self, c_k1, c_k2):
        w1 = peak_omega(1, c_k1)
        assert w1 == pytest.approx(11.438403469520507, abs=1e-12)
        assert w1 == pytest.approx(TWO_PI * 2.0 / math.log(3.0), abs=1e-12)
        assert peak_omega(2, c_k1) == pytest.approx(2.0 * w1, abs=1e-12)
        assert peak_omega(1, c_k2) == pytest.approx(w1 / 2.0, abs=1e-12)
        assert peak_omega(1, c_k2) == pytest.approx(5.7192017347602535, abs=1e-12)

    def test_peak_independent_of_ell(self, c_k1):
        for ell in range(1, 11):
            assert wedge_center(peak_omega(ell, c_k1), ell, c_k1) == pytest.approx(
                c_k1.peak, abs=1e-12
            )

    def test_unimodal(self, c_k1):
        w_star = peak_omega(1, c_k1)
        rising = np.linspace(0.05 * w_star, w_star, 1000)
        falling = np.linspace(w_star, 12.0 * w_star, 1000)
        g_r = [wedge_center(w, 1, c_k1) for w in rising]
        g_f = [wedge_center(w, 1, c_k1) for w in falling]
        assert all(a < b for a, b in zip(g_r, g_r[1:]))
        assert all(a > b for a, b in zip(g_f, g_f[1:]))

    def test_inverse_round_trip(self, c_k1):
        for value in (0.05, 0.2, 0.384):
            for rising in (True, False):
                w = wedge_center_inverse(value, 1, c_k1, rising=rising)
                assert wedge_center(w, 1, c_k1) == pytest.approx(value, abs=1e-12)
        with pytest.raises(ValueError, match="peak"):
            wedge_center_inverse(0.4, 1, c_k1)


class TestMembership:
    def test_examples(self, c_k1):
        assert (
            wedge_membership(Params(A=0.35, lam=0.05, omega=8.0), 1, c_k1)
            is Membership.INSIDE
        )
        assert (
            wedge_membership(Params(A=0.30, lam=0.05, omega=8.0), 1, c_k1)
            is Membership.OUTSIDE
        )
        g = wedge_center(8.0, 1, c_k1)
        assert (
            wedge_membership(Params(A=g - 0.05, lam=0.05, omega=8.0), 1, c_k1)
            is Membership.BOUNDARY
        )


class TestClassify:
    def test_examples(self):
        assert classify(0.7684505232468848, 0.6236387290522857) is PointClass.SINK_FOCUS
        assert classify(2.0, 1.0) is PointClass.NON_HYPERBOLIC
        # modulus rule: real pair {0.5, -0.5} is a sink node, not a saddle
        assert classify(0.0, -0.25) is PointClass.SINK_NODE
        assert classify(2.4788269348576866, 0.6236387290522857) is PointClass.SADDLE
        assert classify(3.0, 2.25) is PointClass.SOURCE_NODE
        assert classify(0.4, 1.21) is PointClass.SOURCE_FOCUS


class TestFixedPoints:
    def test_principal_wedge_pair(self, c_k1):
        recs = fixed_points(Params(A=0.35, lam=0.05, omega=8.0), c_k1, 1)
        assert len(recs) == 2
        sink, saddle = recs
        if sink.cls is PointClass.SADDLE:
            sink, saddle = saddle, sink
        assert sink.x == pytest.approx(0.22505303341339447, abs=1e-10)
        assert sink.y == pytest.approx(0.09478022484215486, abs=1e-10)
        assert sink.cls is PointClass.SINK_FOCUS
        assert sink.trace == pytest.approx(0.7684505232468848, abs=1e-10)
        assert sink.det == pytest.approx(0.6236387290522857, abs=1e-10)
        assert abs(sink.eigenvalues[0]) == pytest.approx(math.sqrt(sink.det), abs=1e-10)
        assert saddle.x == pytest.approx(2.9165396201763985, abs=1e-10)
        assert saddle.cls is PointClass.SADDLE
        assert saddle.trace == pytest.approx(2.4788269348576866, abs=1e-10)
        eigs = sorted(abs(e) for e in saddle.eigenvalues)
        assert eigs[0] == pytest.approx(0.2841611373130237, abs=1e-9)
        assert eigs[1] == pytest.approx(2.194665797544663, abs=1e-9)

    def test_outside_is_empty(self, c_k1):
        assert fixed_points(Params(A=0.30, lam=0.05, omega=8.0), c_k1, 1) == []

    def test_tangent_point_on_boundary(self, c_k1):
        g = wedge_center(8.0, 1, c_k1)
        recs = fixed_points(Params(A=g - 0.05, lam=0.05, omega=8.0), c_k1, 1)
        assert len(recs) == 1
        assert recs[0].x == pytest.approx(math.pi / 2, abs=1e-6)

    def test_degenerate_circle(self, c_k1):
        g = wedge_center(8.0, 1, c_k1)
        with pytest.raises(DegenerateCircle):
            fixed_points(Params(A=g, lam=0.0, omega=8.0), c_k1, 1)
        # lam = 0 off the center curve: no fixed points, no error
        assert fixed_points(Params(A=g + 0.01, lam=0.0, omega=8.0), c_k1, 1) == []

    def test_record_invariants(self, c_k1, rng):
        # closed-form radius/section values, exact lift increment, det law
        for _ in range(100):
            omega = rng.uniform(4.0, 25.0)
            lam = rng.uniform(0.01, 0.1)
            a = wedge_center(omega, 1, c_k1) + rng.uniform(-0.99, 0.99) * lam
            if a < 0:
                continue
            mu = Params(A=a, lam=lam, omega=omega)
            for rec in fixed_points(mu, c_k1, 1):
                assert rec.y == pytest.approx(
                    math.exp(-TWO_PI * 3.0 / omega), rel=1e-10
                )
                assert rec.s == pytest.approx(math.exp(-TWO_PI / omega), rel=1e-10)
                img = return_map(rec.point, mu, c_k1)
                assert img.x - rec.x == pytest.approx(TWO_PI, abs=1e-10)
                assert rec.det == pytest.approx(
                    3.0 * math.exp(-2.0 * 2.0 * math.pi / omega), rel=1e-10
                )

    def test_newton_polish_agrees_with_seed(self, c_k1):
        mu = Params(A=0.35, lam=0.05, omega=8.0)
        ratio = (wedge_center(8.0, 1, c_k1) - mu.A) / mu.lam
        x_seed = math.asin(ratio)
        y_seed = math.exp(-TWO_PI * 3.0 / 8.0)
        x, y, res, iters = polish_fixed_point(x_seed, y_seed, mu, c_k1, 1)
        assert res < 1e-12
        assert x == pytest.approx(x_seed, abs=1e-8)
        assert y == pytest.approx(y_seed, abs=1e-8)


class TestBTPoints:
    def test_locations(self, c_k1, peak3):
        lo, hi = bt_points(0.1, 1, c_k1)
        w_star = peak_omega(1, c_k1)
        assert lo.branch is BTBranch.PI_HALF
        assert lo.A == pytest.approx(peak3 - 0.1, abs=1e-12)
        assert hi.branch is BTBranch.THREE_PI_HALF
        assert hi.A == pytest.approx(peak3 + 0.1, abs=1e-12)
        assert lo.omega == hi.omega == pytest.approx(w_star, abs=1e-12)

    def test_double_unit_eigenvalue(self, c_k1):
        for bt in bt_points(0.1, 1, c_k1):
            mu = Params(A=bt.A, lam=bt.lam, omega=bt.omega)
            j = jacobian(LiftPoint(bt.x, bt.y), mu, c_k1)
            assert j.trace == pytest.approx(2.0, abs=1e-8)
            assert j.det == pytest.approx(1.0, abs=1e-8)
            # far from the identity: the twist entry is large
            assert abs(j.a12) > 1.0
            expected_a12 = -c_k1.twist * bt.omega / math.exp(
                -TWO_PI / (c_k1.twist * bt.omega)
            )
            assert j.a12 == pytest.approx(expected_a12, rel=1e-10)

    def test_unforced_pair_coincides(self, c_k1, peak3):
        lo, hi = bt_points(0.0, 1, c_k1)
        assert lo.A == hi.A == pytest.approx(peak3, abs=1e-15)

    def test_large_amplitude_flagged(self, c_k1, peak3):
        lo, _ = bt_points(peak3 + 0.01, 1, c_k1)
        assert any("negative" in f or "A" in f for f in lo.flags)

    def test_scale_coefficient(self, c_k1):
        assert scale_coefficient(1, c_k1) == pytest.approx(
            -59.435687900044925, rel=1e-12
        )


class TestBTNondegeneracy:
    def test_upper_branch_pattern(self, c_k1):
        _, hi = bt_points(0.1, 1, c_k1)
        hi = bt_nondegeneracy(hi, c_k1)
        assert hi.coeffC == pytest.approx(-59.435687900044925, rel=1e-12)
        assert hi.b20 < 0.0
        assert hi.a20 + hi.b11 - hi.b20 > 0.0
        assert hi.stable_circle
        assert hi.nondegenerate
        # closed-form curvature table on this branch
        assert hi.cf_b == pytest.approx(-0.350940108, abs=1e-6)
        assert hi.cf_a20 == pytest.approx(198.723485459, abs=1e-4)
        assert hi.cf_b < 0.0 < hi.cf_a20

    def test_lower_branch_mirrors(self, c_k1):
        lo, _ = bt_points(0.1, 1, c_k1)
        lo = bt_nondegeneracy(lo, c_k1)
        assert lo.b20 > 0.0
        assert lo.a20 + lo.b11 - lo.b20 < 0.0
        assert lo.stable_circle
        assert lo.nondegenerate
        assert lo.cf_b > 0.0 > lo.cf_a20

    def test_mixed_coefficient_at_noise_floor(self, c_k1):
        # the mixed partial of the radial component is proportional to
        # cos(x) and both branches sit at its zeros, so the measured b11
        # can never clear its finite-difference noise
        for bt in bt_points(0.1, 1, c_k1):
            bt = bt_nondegeneracy(bt, c_k1)
            assert "b11" in bt.inconclusive
            assert abs(bt.b11) < 10.0 * max(bt.noise_b11, 1e-12)

    def test_unforced_coefficients_vanish(self, c_k1):
        lo, _ = bt_points(0.0, 1, c_k1)
        lo = bt_nondegeneracy(lo, c_k1)
        assert not lo.nondegenerate
        assert "inconclusive" in lo.flags

    def test_noise_floor_shrinks_with_step(self, c_k1):
        _, hi = bt_points(0.1, 1, c_k1)
        coarse = bt_nondegeneracy(hi, c_k1, step=1e-3)
        fine = bt_nondegeneracy(hi, c_k1, step=1e-4)
        assert fine.b20 == pytest.approx(coarse.b20, rel=1e-3)


class TestBTLocate:
    def test_free_newton_agrees_with_closed_form(self, c_k1, peak3):
        w_star = peak_omega(1, c_k1)
        for branch, a_ref in (
            (BTBranch.PI_HALF, peak3 - 0.1),
            (BTBranch.THREE_PI_HALF, peak3 + 0.1),
        ):
            cont = bt_locate(0.1, 1, c_k1, branch)
            assert cont.residual < 1e-10
            assert cont.A == pytest.approx(a_ref, abs=1e-8)
            assert cont.omega == pytest.approx(w_star, abs=1e-6)
            assert cont.iters <= 25


class TestSurfaces:
    def test_sn_slice_reference(self, c_k1):
        # at omega = 8, lam = 0.05 the two sheets sit at G(8) -+ lam
        g = wedge_center(8.0, 1, c_k1)
        samples = sample_surfaces(
            ((0.25, 0.45), (0.049, 0.051), (7.9, 8.1)), 1, c_k1, (64, 3, 5)
        )
        sn1 = [s for s in samples if s.label is SurfaceLabel.SN1
               and abs(s.lam - 0.05) < 1e-12 and abs(s.omega - 8.0) < 1e-12]
        sn2 = [s for s in samples if s.label is SurfaceLabel.SN2
               and abs(s.lam - 0.05) < 1e-12 and abs(s.omega - 8.0) < 1e-12]
        assert any(abs(s.A - (g - 0.05)) < 1e-8 for s in sn1)
        assert any(abs(s.A - (g + 0.05)) < 1e-8 for s in sn2)

    def test_residuals_and_families(self, c_k2):
        samples = sample_surfaces(
            ((0.0, 0.5), (0.0, 0.1), (0.5, 10.0)), 1, c_k2, (24, 8, 48)
        )
        labels = {s.label for s in samples}
        assert labels == set(SurfaceLabel)
        assert max(abs(s.residual) for s in samples) < 1e-8

    def test_hopf_pinned_to_peak_omega(self, c_k2):
        samples = sample_surfaces(
            ((0.0, 0.5), (0.0, 0.1), (0.5, 10.0)), 1, c_k2, (16, 4, 64)
        )
        hopf = [s for s in samples if s.label is SurfaceLabel.HOPF]
        assert hopf
        w_star = peak_omega(1, c_k2)
        for s in hopf:
            assert s.omega == pytest.approx(w_star, abs=1e-8)

    def test_sn_tangency_eigenvalue(self, c_k1):
        # on a sheet with sin x = +-1 the Jacobian is triangular with one
        # eigenvalue exactly 1
        g = wedge_center(8.0, 1, c_k1)
        for sign, x_t in ((-1.0, math.pi / 2), (1.0, 1.5 * math.pi)):
            mu = Params(A=g + sign * 0.05, lam=0.05, omega=8.0)
            y = math.exp(-TWO_PI * 3.0 / 8.0)
            j = jacobian(LiftPoint(x_t, y), mu, c_k1)
            assert j.a21 == pytest.approx(0.0, abs=1e-12)
            eigs = sorted(e.real for e in j.eigenvalues)
            assert min(abs(e - 1.0) for e in eigs) < 1e-10

    def test_pd_and_nf_eigenvalues(self, c_k1):
        # period-doubling needs small A and omega with this twist
        samples = sample_surfaces(
            ((0.0, 0.1), (0.04, 0.06), (0.5, 3.0)), 1, c_k1, (24, 4, 48)
        )
        pd = [s for s in samples if s.label is SurfaceLabel.PD]
        nf = [s for s in samples if s.label is SurfaceLabel.NF]
        assert pd, "no period-doubling samples in the expected window"
        for s in pd[:20]:
            recs = fixed_points(Params(A=s.A, lam=s.lam, omega=s.omega), c_k1, 1)
            best = min(
                (min(abs(e + 1.0) for e in r.eigenvalues) for r in recs),
                default=math.inf,
            )
            assert best < 1e-6
        for s in nf[:20]:
            recs = fixed_points(Params(A=s.A, lam=s.lam, omega=s.omega), c_k1, 1)
            disc = min(abs(r.trace**2 - 4.0 * r.det) for r in recs)
            assert disc < 1e-6

    def test_empty_region_is_valid(self, c_k1):
        samples = sample_surfaces(
            ((0.0, 0.005), (0.0, 0.001), (30.0, 31.0)), 1, c_k1, (4, 3, 4)
        )
        assert samples == []

    def test_grid_validation(self, c_k1):
        with pytest.raises(ValueError, match="grid"):
            sample_surfaces(((0, 0.5), (0, 0.1), (1, 10)), 1, c_k1, (1, 4, 4))


@settings(max_examples=120, deadline=None)
@given(
    omega=st.floats(3.0, 30.0),
    lam=st.floats(0.01, 0.1),
    offset=st.floats(-0.95, 0.95),
    ell=st.integers(1, 3),
)
def test_lift_increment_property(omega, lam, offset, ell):
    c = MapConstants(math.sqrt(3), math.sqrt(3), 3.0, 1.0, peak_value(3.0))
    a = wedge_center(omega, ell, c) + offset * lam
    if a < 0.0:
        return
    mu = Params(A=a, lam=lam, omega=omega)
    for rec in fixed_points(mu, c, ell):
        img = return_map(rec.point, mu, c)
        assert img.x - rec.x == pytest.approx(TWO_PI * ell, abs=1e-9)
        assert img.y == pytest.approx(rec.y, abs=1e-9)
        assert rec.det == pytest.approx(
            3.0 * math.exp(-2.0 * ell * 2.0 * math.pi / omega), rel=1e-9
        )
