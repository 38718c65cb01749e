import math

import numpy as np
import pytest

from wedgelab.retmap import (
    LeftDomain,
    LiftPoint,
    MapConstants,
    Params,
    jacobian,
    peak_value,
)
from wedgelab.resonance import PointClass, fixed_points, wedge_center_inverse
from wedgelab.orbits import (
    AttractorClass,
    EscapedOrbit,
    OrbitSettings,
    Outcome,
    ScanAxis,
    Side,
    classify_attractor,
    crossing_count,
    default_seeds,
    homoclinic_bracket,
    iterate,
    manifold_trace,
    rotation_number,
    scan,
)

TWO_PI = 2.0 * math.pi
MU_SINK = Params(A=0.35, lam=0.05, omega=8.0)
FP_SINK = LiftPoint(0.22505303341339447, 0.09478022484215486)
HALF_LOG_DET = -0.23609201906339342  # 0.5*ln det at the reference sink


class TestIterate:
    def test_sink_convergence(self, c_k1):
        r = iterate(FP_SINK, MU_SINK, c_k1, 400, 100)
        assert r.outcome is Outcome.CONVERGED
        assert r.completed == 400
        assert r.drift == pytest.approx(TWO_PI, rel=1e-12)
        assert r.final.x == pytest.approx(FP_SINK.x + 400 * TWO_PI, abs=1e-8)
        assert r.final.y == pytest.approx(FP_SINK.y, abs=1e-10)

    def test_focus_exponents_split_log_det(self, c_k1):
        # a complex pair shares one modulus: the qr product pins the sum
        # immediately while the split closes like 1/n
        r = iterate(FP_SINK, MU_SINK, c_k1, 20000, 5000)
        assert r.exponents[0] >= r.exponents[1]
        assert r.exponents[0] + r.exponents[1] == pytest.approx(
            2.0 * HALF_LOG_DET, abs=1e-12
        )
        for le in r.exponents:
            assert le == pytest.approx(HALF_LOG_DET, abs=1e-4)

    def test_saddle_exponents_match_eigenvalues(self, c_k1):
        # short orbit pinned at the saddle before rounding ejects it
        recs = fixed_points(MU_SINK, c_k1, 1)
        saddle = next(r for r in recs if r.cls is PointClass.SADDLE)
        r = iterate(saddle.point, MU_SINK, c_k1, 30, 8)
        moduli = sorted((abs(e) for e in saddle.eigenvalues), reverse=True)
        assert r.exponents[0] == pytest.approx(math.log(moduli[0]), abs=1e-6)
        assert r.exponents[1] == pytest.approx(math.log(moduli[1]), abs=1e-6)

    def test_exponent_sum_matches_det_average(self, c_k1):
        # qr-accumulated sum against the closed-form log-determinant average
        mu = Params(A=0.2, lam=0.05, omega=4.0)
        p = LiftPoint(0.3, 0.1)
        n, transient = 3000, 500
        r = iterate(p, mu, c_k1, n, transient)
        assert r.outcome is not Outcome.ESCAPED
        q = LiftPoint(p.x, p.y)
        acc = 0.0
        from wedgelab.retmap import return_map

        for k in range(n):
            if k >= transient:
                acc += math.log(jacobian(q, mu, c_k1).det)
            q = return_map(q, mu, c_k1)
        assert r.exponents[0] + r.exponents[1] == pytest.approx(
            acc / (n - transient), abs=1e-8
        )

    def test_window_validation(self, c_k1):
        with pytest.raises(ValueError, match="transient"):
            iterate(FP_SINK, MU_SINK, c_k1, 100, 100)

    def test_immediate_violation_raises(self, c_k1):
        mu = Params(A=0.01, lam=0.005, omega=1.0)
        with pytest.raises(LeftDomain):
            iterate(LiftPoint(1.5 * math.pi, -0.01), mu, c_k1, 100, 0)

    def test_rigid_case_escapes_by_underflow(self, c_k1):
        # A = lam = 0: y iterates are y0**(3**k), monotone to zero until the
        # section value underflows
        mu = Params(A=0.0, lam=0.0, omega=1.0)
        r = iterate(LiftPoint(0.0, 0.5), mu, c_k1, 50, 0)
        assert r.outcome is Outcome.ESCAPED
        assert r.escape_index is not None and 3 < r.escape_index < 20

    def test_mid_orbit_escape_is_data(self, c_k2):
        # outside the wedge at moderate omega most seeds leave the strip
        mu = Params(A=0.46, lam=0.1, omega=1.5)
        out = [iterate(p, mu, c_k2, 300, 0) for p in default_seeds(mu, c_k2)]
        assert any(r.outcome is Outcome.ESCAPED for r in out)
        for r in out:
            if r.outcome is Outcome.ESCAPED:
                assert r.escape_index >= 1
                assert r.completed == r.escape_index


class TestRotationNumber:
    def test_fixed_point_exact(self, c_k1):
        recs = fixed_points(MU_SINK, c_k1, 1)
        for rec in recs:
            assert rotation_number(rec.point, MU_SINK, c_k1, 50) == pytest.approx(
                1.0, abs=1e-12
            )

    def test_basin_convergence_bound(self, c_k1, rng):
        n = 500
        for _ in range(10):
            p = LiftPoint(rng.uniform(0, TWO_PI), rng.uniform(0.02, 0.3))
            try:
                rho = rotation_number(p, MU_SINK, c_k1, n)
            except EscapedOrbit:
                continue
            assert abs(rho - 1.0) < 2.0 / n

    def test_validation_and_escape(self, c_k1):
        with pytest.raises(ValueError):
            rotation_number(FP_SINK, MU_SINK, c_k1, 0)
        mu = Params(A=0.0, lam=0.0, omega=1.0)
        with pytest.raises(EscapedOrbit):
            rotation_number(LiftPoint(0.0, 0.5), mu, c_k1, 100)


class TestClassify:
    def test_sink_cell(self, c_k1):
        cls = classify_attractor(MU_SINK, c_k1, default_seeds(MU_SINK, c_k1))
        assert cls is AttractorClass.PERIODIC_SINK

    def test_circle_of_fixed_points(self, c_k1):
        # lam = 0 on the center curve: a whole invariant circle, one neutral
        # direction and one contracting
        omega = wedge_center_inverse(0.35, 1, c_k1, rising=True)
        mu = Params(A=0.35, lam=0.0, omega=omega)
        cls = classify_attractor(
            mu, c_k1, default_seeds(mu, c_k1), OrbitSettings(n=3000, transient=1000)
        )
        assert cls is AttractorClass.INVARIANT_CIRCLE

    def test_all_escaped(self, c_k1):
        mu = Params(A=0.01, lam=0.0, omega=1.0)
        seeds = [LiftPoint(x, -0.5) for x in (0.0, 1.0, 2.0)]
        assert classify_attractor(mu, c_k1, seeds) is AttractorClass.ESCAPED

    def test_chaotic_cell(self, c_k2):
        # just below the principal peak of the K=2 constants the sink is
        # gone and the positive exponent shows up
        mu = Params(A=0.4, lam=0.1, omega=5.72)
        cls = classify_attractor(
            mu, c_k2, default_seeds(mu, c_k2), OrbitSettings(n=2000, transient=500)
        )
        assert cls is AttractorClass.CHAOTIC

    def test_needs_seeds(self, c_k1):
        with pytest.raises(ValueError):
            classify_attractor(MU_SINK, c_k1, [])


class TestScan:
    AXES = (ScanAxis("omega", 0.6, 5.0, 5), ScanAxis("A", 0.37, 0.45, 4))

    def test_shape_and_rowmajor(self, c_k2):
        g = scan(self.AXES, {"lam": 0.1}, c_k2, OrbitSettings(n=300, transient=100))
        assert g.shape == (5, 4)
        assert len(g.classes) == 5 and len(g.classes[0]) == 4
        assert g.le1.shape == (5, 4)
        assert g.cell_params(2, 1).omega == pytest.approx(g.axes[0].values()[2])

    def test_thread_count_invariance(self, c_k2):
        settings = OrbitSettings(n=300, transient=100)
        grids = [
            scan(self.AXES, {"lam": 0.1}, c_k2, settings, threads=t)
            for t in (1, 3, 8)
        ]
        ref = grids[0]
        for g in grids[1:]:
            assert g.classes == ref.classes
            assert np.array_equal(
                g.le1.view(np.uint64), ref.le1.view(np.uint64)
            )
            assert np.array_equal(
                g.rotation.view(np.uint64), ref.rotation.view(np.uint64)
            )
            assert g.flags == ref.flags

    def test_axis_validation(self, c_k2):
        with pytest.raises(ValueError):
            ScanAxis("omega", 2.0, 1.0, 4)
        with pytest.raises(ValueError):
            ScanAxis("omega", 1.0, 2.0, 1)
        with pytest.raises(ValueError, match="cover"):
            scan(
                (ScanAxis("omega", 1, 2, 3), ScanAxis("omega", 1, 2, 3)),
                {"lam": 0.1},
                c_k2,
            )

    def test_membership_agreement_slice(self, c_k2):
        # wedge interior cells lock onto the sink; cells past the lower
        # sheet carry an invariant circle
        from wedgelab.resonance import Membership, wedge_membership

        g = scan(
            (ScanAxis("omega", 2.8, 5.0, 6), ScanAxis("A", 0.38, 0.42, 3)),
            {"lam": 0.1},
            c_k2,
            OrbitSettings(n=1500, transient=400),
        )
        agree = 0
        cells = 0
        for i in range(6):
            for j in range(3):
                member = wedge_membership(g.cell_params(i, j), 1, c_k2)
                cells += 1
                inside = member is Membership.INSIDE
                locked = g.classes[i][j] is AttractorClass.PERIODIC_SINK
                agree += inside == locked
        assert agree / cells >= 0.9


class TestManifolds:
    def _saddle(self, c):
        return next(
            r for r in fixed_points(MU_SINK, c, 1) if r.cls is PointClass.SADDLE
        )

    def test_seed_alignment(self, c_k1):
        fp = self._saddle(c_k1)
        tr = manifold_trace(fp, MU_SINK, c_k1, Side.UNSTABLE, steps=3)
        v = tr.points[1] - tr.points[0]
        v = v / np.hypot(*v)
        J = jacobian(fp.point, MU_SINK, c_k1)
        m = np.array([[J.a11, J.a12], [J.a21, J.a22]])
        w, vecs = np.linalg.eig(m)
        u = vecs[:, np.argmax(np.abs(w))].real
        u = u / np.hypot(*u)
        assert min(np.hypot(*(v - u)), np.hypot(*(v + u))) < 1e-6

    def test_arclength_expansion_rate(self, c_k1):
        fp = self._saddle(c_k1)
        lam_u = max(abs(e) for e in fp.eigenvalues)
        assert lam_u == pytest.approx(2.194665797544663, abs=1e-9)
        arcs = [
            manifold_trace(fp, MU_SINK, c_k1, Side.UNSTABLE, steps=k).arclength
            for k in range(3, 10)
        ]
        devs = [abs(a1 / a0 - lam_u) for a0, a1 in zip(arcs, arcs[1:])]
        # geometric partial sums: the step ratio closes on the multiplier
        # from above as the early segments stop mattering
        assert all(d1 < d0 for d0, d1 in zip(devs, devs[1:]))
        assert devs[-1] < 1.5e-3 * lam_u

    def test_stable_side_contracts_under_forward_map(self, c_k1):
        fp = self._saddle(c_k1)
        tr = manifold_trace(fp, MU_SINK, c_k1, Side.STABLE, steps=4)
        assert tr.side is Side.STABLE
        lam_s = min(abs(e) for e in fp.eigenvalues)
        arcs = [
            manifold_trace(fp, MU_SINK, c_k1, Side.STABLE, steps=k).arclength
            for k in (4, 5, 6)
        ]
        # traced under the inverse map, so while the arc stays in the linear
        # regime it grows by 1/lam_s per step
        growth = 1.0 / lam_s
        assert arcs[1] / arcs[0] == pytest.approx(growth, rel=2e-3)
        assert arcs[2] / arcs[1] == pytest.approx(growth, rel=2e-3)

    def test_spacing_cap_respected(self, c_k1):
        fp = self._saddle(c_k1)
        cap = 0.01
        tr = manifold_trace(fp, MU_SINK, c_k1, Side.UNSTABLE, steps=10, step_cap=cap)
        gaps = np.hypot(*np.diff(tr.points, axis=0).T)
        if "spacing-exceeded" not in tr.flags:
            assert gaps.max() <= cap * (1.0 + 1e-9)

    def test_long_trace_truncates_cleanly(self, c_k1):
        mu = Params(A=0.385, lam=0.1, omega=14.0)
        fp = next(
            r for r in fixed_points(mu, c_k1, 1) if r.cls is PointClass.SADDLE
        )
        tr = manifold_trace(fp, mu, c_k1, Side.UNSTABLE, steps=14, orientation=-1)
        assert "truncated" in tr.flags
        assert np.all(np.abs(tr.points[:, 1]) <= 1.0 + 1e-12)

    def test_point_cap_flag(self, c_k1):
        mu = Params(A=0.385, lam=0.1, omega=14.0)
        fp = next(
            r for r in fixed_points(mu, c_k1, 1) if r.cls is PointClass.SADDLE
        )
        tr = manifold_trace(
            fp, mu, c_k1, Side.UNSTABLE, steps=14, max_points=50
        )
        assert "point-cap" in tr.flags
        assert len(tr.points) == 50

    def test_no_self_intersections_short_arc(self, c_k1):
        fp = self._saddle(c_k1)
        tr = manifold_trace(fp, MU_SINK, c_k1, Side.UNSTABLE, steps=8)
        assert crossing_count(tr, tr) == 0

    def test_rejects_non_saddle(self, c_k1):
        sink = next(
            r for r in fixed_points(MU_SINK, c_k1, 1) if r.cls is PointClass.SINK_FOCUS
        )
        with pytest.raises(ValueError):
            manifold_trace(sink, MU_SINK, c_k1, Side.UNSTABLE)


class TestHomoclinicIndicator:
    def test_bracket_from_crossing_change(self, c_k1):
        # along this sweep the tangle disappears: counts drop to zero, and
        # every change is reported as a bracketing interval
        omegas = [14.0, 18.0, 22.0]
        brackets = homoclinic_bracket(0.385, 0.1, omegas, c_k1, ell=1, steps=14)
        assert brackets, "expected at least one crossing-count change"
        for lo, hi in brackets:
            assert lo < hi
            assert lo in omegas and hi in omegas
