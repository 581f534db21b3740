"""Smooth Hausdorff surrogate, localized distortion energy, combined objective."""

import numpy as np
import pytest

from pcparam.geometry import TriangleMesh, modified_hausdorff_exact
from pcparam.losses import (
    BoundAuditReport,
    HandConfig,
    LegConfig,
    ObjectiveConfig,
    audit_theorem_bound,
    hand,
    hand_with_grad,
    lambda_inv_chain,
    lambda_pair_from_inverse,
    landmark_energy,
    landmark_energy_with_grad,
    leg,
    leg_with_grad,
    total_loss,
    total_loss_with_grad,
)


def _fd_grad(f, x, eps=1e-6):
    x = np.asarray(x, dtype=np.float64)
    g = np.zeros_like(x)
    flat = g.ravel()
    xf = x.ravel()
    for i in range(xf.size):
        h = np.zeros_like(xf)
        h[i] = eps
        flat[i] = (f((xf + h).reshape(x.shape)) - f((xf - h).reshape(x.shape))) / (
            2 * eps
        )
    return g


def _rel_err(analytic, numeric):
    # vector-norm relative error: entrywise ratios are meaningless once an
    # entry falls below the finite-difference noise floor
    analytic = np.asarray(analytic).ravel()
    numeric = np.asarray(numeric).ravel()
    denom = max(np.linalg.norm(numeric), 1e-12)
    return np.linalg.norm(analytic - numeric) / denom


# ---------------------------------------------------------------------------
# smooth Hausdorff surrogate
# ---------------------------------------------------------------------------


def test_hand_singletons_twice_distance():
    cfg = HandConfig(alpha=7.0)
    assert hand([[0.0, 0.0]], [[3.0, 4.0]], cfg) == 10.0
    assert hand([[1.0, 1.0, 1.0]], [[1.0, 1.0, 6.0]], cfg) == 10.0


def test_hand_closed_form_two_vs_one():
    # y = {(0,0),(1,0)}, w = {(0,0)}: hand = e^a/(1+e^a) + e^-a/(1+e^-a)
    a = 2.0
    got = hand([[0.0, 0.0], [1.0, 0.0]], [[0.0, 0.0]], HandConfig(alpha=a))
    want = np.exp(a) / (1 + np.exp(a)) + np.exp(-a) / (1 + np.exp(-a))
    assert got == pytest.approx(want, rel=1e-14)


def test_hand_symmetric():
    # symmetric up to summation order: numpy reduces transposed rows in a
    # different blocking, so allow an ulp-scale difference
    rng = np.random.default_rng(3)
    cfg = HandConfig(alpha=11.0)
    for _ in range(20):
        y = rng.normal(0, 1, (int(rng.integers(1, 15)), 2))
        w = rng.normal(0, 1, (int(rng.integers(1, 15)), 2))
        assert hand(y, w, cfg) == pytest.approx(hand(w, y, cfg), rel=1e-13)


def test_hand_converges_to_modified_hausdorff():
    rng = np.random.default_rng(12)
    for _ in range(10):
        y = rng.uniform(-1, 1, (int(rng.integers(3, 20)), 2))
        w = rng.uniform(-1, 1, (int(rng.integers(3, 20)), 2))
        exact = modified_hausdorff_exact(y, w)
        both = np.vstack([y, w])
        diam = np.sqrt(((both[:, None] - both[None]) ** 2).sum(-1)).max()
        err_lo = abs(hand(y, w, HandConfig(alpha=5.0)) - exact)
        err_hi = abs(hand(y, w, HandConfig(alpha=80.0)) - exact)
        assert err_hi <= err_lo + 1e-12
        # near-ties between point distances slow the exponential rate, so the
        # sharp claim is percent-of-diameter accuracy at alpha = 100
        err_tight = abs(hand(y, w, HandConfig(alpha=100.0)) - exact)
        assert err_tight < 1e-2 * diam


def test_hand_gradient_fd():
    rng = np.random.default_rng(21)
    cfg = HandConfig(alpha=6.0)
    for _ in range(10):
        y = rng.normal(0, 1, (int(rng.integers(2, 10)), 2))
        w = rng.normal(0, 1, (int(rng.integers(2, 10)), 2))
        val, gy, gw = hand_with_grad(y, w, cfg)
        assert val == hand(y, w, cfg)
        fy = _fd_grad(lambda p: hand(p, w, cfg), y)
        fw = _fd_grad(lambda p: hand(y, p, cfg), w)
        assert _rel_err(gy, fy) < 1e-6
        assert _rel_err(gw, fw) < 1e-6


def test_hand_gradient_finite_at_coincident_points():
    y = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]])
    w = np.array([[0.0, 0.0], [2.0, 1.0]])
    val, gy, gw = hand_with_grad(y, w, HandConfig(alpha=5.0))
    assert np.isfinite(val)
    assert np.isfinite(gy).all()
    assert np.isfinite(gw).all()


def test_hand_config_validation():
    with pytest.raises(ValueError):
        HandConfig(alpha=0.0)
    with pytest.raises(ValueError):
        HandConfig(alpha=-3.0)
    with pytest.raises(ValueError):
        HandConfig(alpha=float("nan"))


# ---------------------------------------------------------------------------
# lambda factors
# ---------------------------------------------------------------------------


def test_lambda_pair_values():
    lam = lambda_pair_from_inverse([0.1, 0.4])
    assert lam[0, 1] == 2.0
    assert lam[1, 0] == 2.0
    assert lam[0, 0] == 5.0
    assert lam[1, 1] == 1.25
    np.testing.assert_array_equal(lam, lam.T)


def test_lambda_pair_validation():
    with pytest.raises(ValueError):
        lambda_pair_from_inverse([])
    with pytest.raises(ValueError):
        lambda_pair_from_inverse([0.5, -0.1])
    with pytest.raises(ValueError):
        lambda_pair_from_inverse([0.0, 0.0])
    with pytest.raises(ValueError):
        lambda_pair_from_inverse([np.inf, 1.0])


def test_lambda_inv_chain_matches_fd():
    rng = np.random.default_rng(5)
    x = rng.normal(0, 1, (8, 3))
    y = rng.normal(0, 1, (8, 2))
    cfg = LegConfig(sigma=0.7)

    def f(v):
        return leg(x, y, lambda_pair_from_inverse(v), cfg)

    v0 = rng.uniform(0.3, 1.5, 8)
    lam = lambda_pair_from_inverse(v0)
    _, _, g_lambda = leg_with_grad(x, y, lam, cfg)
    analytic = lambda_inv_chain(g_lambda, lam)
    assert _rel_err(analytic, _fd_grad(f, v0)) < 1e-6


# ---------------------------------------------------------------------------
# localized distortion energy
# ---------------------------------------------------------------------------


def test_leg_identity_is_exact_zero():
    rng = np.random.default_rng(9)
    x = rng.normal(0, 1, (12, 2))
    lam = lambda_pair_from_inverse(np.full(12, 0.5))  # all ones
    assert leg(x, x, lam, LegConfig(sigma=0.6)) == 0.0


def test_leg_compensated_scaling_is_fixed_point():
    rng = np.random.default_rng(10)
    x = rng.normal(0, 1, (10, 2))
    for s in (0.25, 3.0):
        lam = lambda_pair_from_inverse(np.full(10, 1.0 / (2 * s)))
        assert leg(x, s * x, lam, LegConfig(sigma=0.5)) < 1e-12


def test_leg_rigid_invariance():
    rng = np.random.default_rng(11)
    x = rng.normal(0, 1, (9, 3))
    y = rng.normal(0, 1, (9, 2))
    lam = lambda_pair_from_inverse(rng.uniform(0.2, 1.0, 9))
    cfg = LegConfig(sigma=0.8)
    base = leg(x, y, lam, cfg)
    th = 1.234
    rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    moved = y @ rot.T + np.array([5.0, -2.0])
    assert abs(leg(x, moved, lam, cfg) - base) < 1e-10


def test_leg_joint_scale_covariance():
    # scaling the image by c and every lambda by c leaves the energy unchanged
    rng = np.random.default_rng(13)
    x = rng.normal(0, 1, (7, 3))
    y = rng.normal(0, 1, (7, 2))
    lam = lambda_pair_from_inverse(rng.uniform(0.2, 1.0, 7))
    cfg = LegConfig(sigma=0.5)
    c = 1.7
    assert abs(leg(x, c * y, c * lam, cfg) - leg(x, y, lam, cfg)) < 1e-10


def test_leg_positive_when_distorted():
    x = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    y = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]])  # one edge stretched
    lam = lambda_pair_from_inverse(np.full(3, 0.5))
    assert leg(x, y, lam, LegConfig(sigma=1.0)) > 1e-4


def test_leg_gradients_fd():
    rng = np.random.default_rng(14)
    cfg = LegConfig(sigma=0.6)
    for _ in range(10):
        n = int(rng.integers(3, 12))
        x = rng.normal(0, 1, (n, 3))
        y = rng.normal(0, 1, (n, 2))
        lam = lambda_pair_from_inverse(rng.uniform(0.3, 1.2, n))
        val, gy, glam = leg_with_grad(x, y, lam, cfg)
        assert val == leg(x, y, lam, cfg)
        fy = _fd_grad(lambda p: leg(x, p, lam, cfg), y)
        assert _rel_err(gy, fy) < 1e-6
        flam = _fd_grad(lambda p: leg(x, y, p, cfg), lam)
        assert _rel_err(glam, flam) < 1e-6


def test_leg_shape_mismatch_errors():
    x = np.zeros((3, 2))
    lam = np.ones((3, 3))
    with pytest.raises(ValueError):
        leg(x, np.zeros((4, 2)), lam, LegConfig())
    with pytest.raises(ValueError):
        leg(x, np.zeros((3, 2)), np.ones((2, 2)), LegConfig())
    bad = lam.copy()
    bad[0, 1] = -1.0
    with pytest.raises(ValueError):
        leg(x, np.zeros((3, 2)), bad, LegConfig())


# ---------------------------------------------------------------------------
# landmark energy
# ---------------------------------------------------------------------------


def test_landmark_energy_frozen_singletons():
    cfg = HandConfig(alpha=4.0)
    got = landmark_energy([[[0.0, 0.0]]], [[[3.0, 0.0]]], cfg)
    assert got == 6.0  # twice the distance for singleton clouds


def test_landmark_energy_sums_pairs():
    cfg = HandConfig(alpha=4.0)
    m1, q1 = [[0.0, 0.0]], [[3.0, 0.0]]
    m2, q2 = [[1.0, 1.0], [2.0, 2.0]], [[1.0, 1.0]]
    total = landmark_energy([m1, m2], [q1, q2], cfg)
    assert total == pytest.approx(hand(m1, q1, cfg) + hand(m2, q2, cfg), rel=1e-15)
    assert landmark_energy([], [], cfg) == 0.0


def test_landmark_energy_list_mismatch():
    with pytest.raises(ValueError):
        landmark_energy([[[0.0, 0.0]]], [], HandConfig())


def test_landmark_energy_gradients():
    rng = np.random.default_rng(15)
    cfg = HandConfig(alpha=5.0)
    m = [rng.normal(0, 1, (4, 2)), rng.normal(0, 1, (3, 2))]
    q = [rng.normal(0, 1, (5, 2)), rng.normal(0, 1, (3, 2))]
    val, grads = landmark_energy_with_grad(m, q, cfg)
    assert val == pytest.approx(landmark_energy(m, q, cfg), rel=1e-15)
    for k in range(2):
        def f(p, k=k):
            clouds = [p if i == k else m[i] for i in range(2)]
            return landmark_energy(clouds, q, cfg)

        assert _rel_err(grads[k], _fd_grad(f, m[k])) < 1e-6


# ---------------------------------------------------------------------------
# combined objective
# ---------------------------------------------------------------------------


def _instance(seed=16, n=10, n_extra=3):
    rng = np.random.default_rng(seed)
    x = rng.normal(0, 1, (n + n_extra, 3))
    y = rng.normal(0, 1, (n + n_extra, 2))
    v = rng.uniform(0.3, 1.2, n + n_extra)
    w = rng.uniform(0, 1, (20, 2))
    rows = [np.arange(n, n + n_extra)]
    targets = [rng.uniform(0, 1, (4, 2))]
    return x, y, v, w, rows, targets


def test_total_is_weighted_sum_of_parts():
    x, y, v, w, rows, targets = _instance()
    n = 10
    cfg = ObjectiveConfig(beta1=5.0, beta2=2.0, beta3=0.5)
    bd = total_loss(x, y, v, w, rows, targets, cfg, n_base=n)
    lam = lambda_pair_from_inverse(v)
    want_leg = leg(x, y, lam, cfg.leg)
    want_hand = hand(y[:n], w, cfg.hand)
    want_lm = landmark_energy([y[rows[0]]], targets, cfg.hand)
    assert bd.leg == pytest.approx(want_leg, rel=1e-14)
    assert bd.hand == pytest.approx(want_hand, rel=1e-14)
    assert bd.landmark == pytest.approx(want_lm, rel=1e-14)
    assert bd.total == pytest.approx(
        5.0 * want_leg + 2.0 * want_hand + 0.5 * want_lm, rel=1e-13
    )


def test_total_n_base_restricts_domain_term():
    x, y, v, w, rows, targets = _instance()
    cfg = ObjectiveConfig(beta1=0.0, beta2=1.0, beta3=0.0)
    bd_cut = total_loss(x, y, None, w, [], [], cfg, n_base=10)
    bd_all = total_loss(x, y, None, w, [], [], cfg)
    assert bd_cut.hand == hand(y[:10], w, cfg.hand)
    assert bd_all.hand == hand(y, w, cfg.hand)
    assert bd_cut.hand != bd_all.hand


def test_total_identity_with_zero_weights_is_zero():
    rng = np.random.default_rng(17)
    x = rng.normal(0, 1, (8, 2))
    v = np.full(8, 0.5)
    cfg = ObjectiveConfig(beta1=4.0, beta2=0.0, beta3=0.0)
    bd = total_loss(x, x, v, np.zeros((1, 2)), [], [], cfg)
    assert bd.total == 0.0
    assert bd.leg == 0.0


def test_total_beta1_zero_skips_distortion():
    x, y, _, w, rows, targets = _instance()
    cfg = ObjectiveConfig(beta1=0.0, beta2=1.0, beta3=1.0)
    bd = total_loss(x, y, None, w, rows, targets, cfg, n_base=10)
    assert bd.leg == 0.0
    assert bd.total == pytest.approx(bd.hand + bd.landmark, rel=1e-14)


def test_total_requires_lambda_when_beta1_positive():
    x, y, _, w, rows, targets = _instance()
    cfg = ObjectiveConfig(beta1=1.0, beta2=1.0, beta3=1.0)
    with pytest.raises(ValueError, match="lambda_inv_values"):
        total_loss(x, y, None, w, rows, targets, cfg, n_base=10)


def test_total_gradients_fd():
    x, y, v, w, rows, targets = _instance()
    n = 10
    cfg = ObjectiveConfig(beta1=5.0, beta2=2.0, beta3=0.5)
    bd, gm, gv = total_loss_with_grad(x, y, v, w, rows, targets, cfg, n_base=n)
    assert np.isfinite(bd.total)

    def f_mapped(p):
        return total_loss(x, p, v, w, rows, targets, cfg, n_base=n).total

    def f_v(p):
        return total_loss(x, y, p, w, rows, targets, cfg, n_base=n).total

    assert _rel_err(gm, _fd_grad(f_mapped, y)) < 1e-5
    assert _rel_err(gv, _fd_grad(f_v, v)) < 1e-5


def test_objective_config_validation():
    ObjectiveConfig(beta1=0.0)  # shape matching is allowed
    with pytest.raises(ValueError):
        ObjectiveConfig(beta1=-1.0)
    with pytest.raises(ValueError):
        ObjectiveConfig(beta2=-0.5)
    with pytest.raises(ValueError):
        ObjectiveConfig(beta3=float("inf"))


# ---------------------------------------------------------------------------
# distortion-vs-angle bound audit
# ---------------------------------------------------------------------------


def _bump_instance(seed):
    rng = np.random.default_rng(seed)
    k = 5
    xs, ys = np.meshgrid(np.linspace(0, 1, k), np.linspace(0, 1, k))
    grid = np.column_stack([xs.ravel(), ys.ravel()])
    z = 0.3 * np.exp(-((grid - 0.5) ** 2).sum(axis=1) / 0.1)
    verts = np.column_stack([grid, z])
    tris = []
    for r in range(k - 1):
        for c in range(k - 1):
            a = r * k + c
            tris.append([a, a + 1, a + k])
            tris.append([a + 1, a + k + 1, a + k])
    mesh = TriangleMesh(verts, np.array(tris))
    mapped = grid + rng.normal(0, 0.02, grid.shape)
    v = rng.uniform(0.4, 0.8, len(verts))
    return mesh, mapped, lambda_pair_from_inverse(v)


def test_audit_bound_holds_on_random_instances():
    for seed in range(8):
        mesh, mapped, lam = _bump_instance(seed)
        report = audit_theorem_bound(mesh, mapped, lam, LegConfig(sigma=0.5))
        assert isinstance(report, BoundAuditReport)
        assert report.holds
        assert report.lhs >= report.rhs
        assert report.n_points == len(mesh.vertices)
        assert report.n_triangles == len(mesh.triangles)
        assert report.r_lambda >= 1.0


def test_audit_bound_error_paths():
    mesh, mapped, lam = _bump_instance(0)
    cfg = LegConfig(sigma=0.5)
    with pytest.raises(ValueError):
        audit_theorem_bound(mesh, mapped[:-1], lam, cfg)
    with pytest.raises(ValueError):
        audit_theorem_bound(mesh, mapped, lam[:-1, :-1], cfg)
    bad = lam.copy()
    bad[2, 3] = 0.0
    with pytest.raises(ValueError):
        audit_theorem_bound(mesh, mapped, bad, cfg)


def test_audit_bound_rejects_zero_length_edge():
    # two vertices at the same position joined by a face edge
    verts = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]])
    mesh = TriangleMesh(verts, np.array([[0, 1, 2]]))
    lam = np.ones((3, 3))
    mapped = np.array([[0.0, 0.0], [0.5, 0.5], [1.0, 0.0]])
    with pytest.raises(ValueError, match="zero-length"):
        audit_theorem_bound(mesh, mapped, lam, LegConfig(sigma=0.5))
