"""Inner-solver oracles.

The l1 path solver is checked three ways: exact endpoints (identity design,
completed paths equal plain least squares), stationarity at every breakpoint
(the correlation vector must satisfy the l1 optimality conditions at the
path's own penalty level), and brute-force grids over a masked box.  The
locality ridge has a closed form to compare against, and the sparse-group
solver has analytic prox solutions for identity designs plus a coarse grid
oracle for general ones.
"""

import numpy as np
import pytest

from srcl import (
    Dictionary,
    FeatureVector,
    GroupPartition,
    SingularSystem,
    SparseCoefficients,
    custom_distances,
    lars_l1,
    llc_closed_form,
    sparse_group_lasso,
)

# ---------------------------------------------------------------------------
# lars_l1
# ---------------------------------------------------------------------------


def _lasso_kkt_gap(design, target, w):
    """Worst violation of the l1 optimality conditions at the path's own
    penalty level (lam = max |correlation|)."""
    c = design.T @ (target - design @ w)
    lam = float(np.max(np.abs(c)))
    gap = 0.0
    for j, wj in enumerate(w):
        if abs(wj) > 1e-12:
            gap = max(gap, abs(c[j] - lam * np.sign(wj)))
        else:
            gap = max(gap, max(0.0, abs(c[j]) - lam))
    return gap


def test_lars_identity_design_recovers_target():
    y = np.array([3.0, -1.0, 2.0, 0.5])
    res = lars_l1(np.eye(4), y, max_steps=50)
    assert res.completed and not res.breakdown
    np.testing.assert_allclose(res.coefficients.weights, y, atol=1e-10)


def test_lars_single_step_selects_most_correlated():
    rng = np.random.default_rng(0)
    for _ in range(20):
        design = rng.normal(size=(8, 5))
        target = rng.normal(size=8)
        res = lars_l1(design, target, max_steps=1)
        expected = int(np.argmax(np.abs(design.T @ target)))
        support = res.coefficients.support
        assert list(support) == [expected]
        assert res.steps == 1


def test_lars_single_step_tie_goes_to_lowest_index():
    # Columns 0 and 2 have identical correlation with the target.
    design = np.array(
        [
            [1.0, 0.3, 1.0],
            [0.0, 0.9, 0.0],
        ]
    )
    target = np.array([2.0, 0.0])
    res = lars_l1(design, target, max_steps=1)
    assert list(res.coefficients.support) == [0]


def test_lars_l1_norm_monotone_in_step_budget():
    rng = np.random.default_rng(1)
    for _ in range(10):
        design = rng.normal(size=(10, 6))
        target = rng.normal(size=10)
        norms = [
            lars_l1(design, target, max_steps=s).l1_bound
            for s in range(1, 12)
        ]
        assert all(b >= a - 1e-12 for a, b in zip(norms, norms[1:]))


def test_lars_completed_path_equals_least_squares():
    rng = np.random.default_rng(2)
    for _ in range(25):
        design = rng.normal(size=(12, 4))
        target = rng.normal(size=12)
        res = lars_l1(design, target, max_steps=60)
        assert res.completed
        ls = np.linalg.lstsq(design, target, rcond=None)[0]
        np.testing.assert_allclose(res.coefficients.weights, ls, atol=1e-8)


def test_lars_kkt_at_every_breakpoint():
    rng = np.random.default_rng(3)
    for _ in range(40):
        design = rng.normal(size=(9, 6))
        target = rng.normal(size=9)
        for s in (1, 2, 3, 5, 8):
            res = lars_l1(design, target, max_steps=s)
            w = res.coefficients.weights
            assert _lasso_kkt_gap(design, target, w) < 1e-8


def test_lars_handles_coefficient_drops():
    # Search random instances for a path that shrinks its active set, then
    # check optimality still holds there.  Drops are rare but guaranteed to
    # appear across enough draws.
    rng = np.random.default_rng(4)
    seen_drop = False
    for _ in range(300):
        design = rng.normal(size=(6, 5))
        target = rng.normal(size=6)
        sizes = []
        for s in range(1, 14):
            res = lars_l1(design, target, max_steps=s)
            sizes.append(res.coefficients.support_size)
            if res.completed:
                break
        if any(b < a for a, b in zip(sizes, sizes[1:])):
            seen_drop = True
            assert _lasso_kkt_gap(design, target, res.coefficients.weights) < 1e-8
            break
    assert seen_drop, "no coefficient drop found in 300 random paths"


def test_lars_duplicate_columns_complete_without_breakdown():
    # Exact twins tie at every breakpoint; the tie-break keeps the lower
    # index and the twin never co-activates, so the path stays full rank.
    col = np.array([1.0, 2.0, -1.0])
    design = np.column_stack([col, col, np.array([0.5, -0.3, 0.8])])
    target = col * 2.0 + np.array([0.1, -0.2, 0.3])
    res = lars_l1(design, target, max_steps=30)
    assert not res.breakdown
    assert res.coefficients.weights[1] == 0.0
    assert np.all(np.isfinite(res.coefficients.weights))
    assert _lasso_kkt_gap(design, target, res.coefficients.weights) < 1e-8


def test_lars_cholesky_failure_flags_breakdown(monkeypatch):
    # Rank collapse inside the active set is a float-roundoff event, so it is
    # injected here: fail the factorization as soon as two columns are active
    # and check the solver halts with the flag instead of raising.
    import scipy.linalg

    real_cholesky = scipy.linalg.cholesky

    def failing(matrix, *args, **kwargs):
        if matrix.shape[0] >= 2:
            raise np.linalg.LinAlgError("injected rank deficiency")
        return real_cholesky(matrix, *args, **kwargs)

    monkeypatch.setattr(scipy.linalg, "cholesky", failing)
    rng = np.random.default_rng(19)
    design = rng.normal(size=(8, 4))
    target = rng.normal(size=8)
    res = lars_l1(design, target, max_steps=10)
    assert res.breakdown
    assert not res.completed
    assert np.all(np.isfinite(res.coefficients.weights))
    # The iterate kept is the last valid breakpoint (the one-column step).
    assert res.coefficients.support_size <= 1


def test_lars_zero_target_returns_zero():
    res = lars_l1(np.eye(3), np.zeros(3), max_steps=5)
    assert res.completed
    assert res.steps == 0
    np.testing.assert_array_equal(res.coefficients.weights, 0.0)


def test_lars_is_deterministic():
    rng = np.random.default_rng(5)
    design = rng.normal(size=(20, 10))
    target = rng.normal(size=20)
    a = lars_l1(design, target, max_steps=7)
    b = lars_l1(design, target, max_steps=7)
    assert np.array_equal(a.coefficients.weights, b.coefficients.weights)
    assert a.l1_bound == b.l1_bound


def test_lars_completed_beats_fine_grid():
    # Brute-force grid around the independent least-squares solution; the
    # quadratic has no gradient at its minimum, so a 1e-2 grid certifies
    # well below the 1e-3 tolerance.
    rng = np.random.default_rng(6)
    h = 1e-2
    offsets = np.arange(-20, 21) * h
    v0, v1, v2 = np.meshgrid(offsets, offsets, offsets, indexing="ij")
    for _ in range(20):
        design = rng.normal(size=(8, 3))
        design /= np.linalg.norm(design, axis=0)
        target = rng.normal(size=8) * 0.5
        res = lars_l1(design, target, max_steps=40)
        assert res.completed
        center = np.linalg.lstsq(design, target, rcond=None)[0]
        pts = np.stack(
            [v0 + center[0], v1 + center[1], v2 + center[2]], axis=-1
        ).reshape(-1, 3)
        residuals = pts @ design.T - target
        f_grid = 0.5 * np.einsum("ij,ij->i", residuals, residuals)
        mask = np.abs(pts).sum(axis=1) <= res.l1_bound + 1e-9
        assert mask.any()
        f_best = float(f_grid[mask].min())
        w = res.coefficients.weights
        f_lars = 0.5 * float(np.sum((target - design @ w) ** 2))
        assert abs(f_lars - f_best) <= 1e-3


def test_lars_mid_path_beats_masked_grid():
    # Small-scale 2-D instances so the l1 ball fits in a fine grid box and
    # the active-face gradient (~ the path's own penalty) stays small enough
    # for an h = 1e-3 grid to certify at 1e-3.
    rng = np.random.default_rng(7)
    h = 1e-3
    for _ in range(10):
        design = rng.normal(size=(6, 2))
        design /= np.linalg.norm(design, axis=0)
        target = rng.normal(size=6)
        target *= 0.35 / np.max(np.abs(design.T @ target))
        for s in (1, 2):
            res = lars_l1(design, target, max_steps=s)
            bound = res.l1_bound
            if bound == 0.0:
                continue
            ticks = np.arange(-bound - h, bound + 2 * h, h)
            g0, g1 = np.meshgrid(ticks, ticks, indexing="ij")
            pts = np.stack([g0, g1], axis=-1).reshape(-1, 2)
            pts = pts[np.abs(pts).sum(axis=1) <= bound + 1e-12]
            residuals = pts @ design.T - target
            f_grid = 0.5 * np.einsum("ij,ij->i", residuals, residuals)
            w = res.coefficients.weights
            f_lars = 0.5 * float(np.sum((target - design @ w) ** 2))
            assert abs(f_lars - float(f_grid.min())) <= 1e-3


# ---------------------------------------------------------------------------
# llc_closed_form
# ---------------------------------------------------------------------------


def _ridge_instance(rng, n_features=7, n_atoms=4):
    atoms = rng.normal(size=(n_features, n_atoms))
    d = Dictionary(atoms, rng.uniform(0.2, 0.9, size=n_atoms))
    y = FeatureVector(rng.normal(size=n_features))
    return y, d


def test_llc_uniform_locality_is_plain_ridge():
    rng = np.random.default_rng(8)
    y, d = _ridge_instance(rng)
    lam = 0.37
    w = llc_closed_form(y, d, custom_distances(np.ones(4)), lam)
    expected = np.linalg.solve(
        d.atoms.T @ d.atoms + lam * np.eye(4), d.atoms.T @ y.values
    )
    np.testing.assert_allclose(w.weights, expected, atol=1e-10)


def test_llc_stationarity():
    rng = np.random.default_rng(9)
    for _ in range(20):
        y, d = _ridge_instance(rng)
        c = rng.uniform(0.5, 3.0, size=4)
        lam = float(rng.uniform(0.01, 2.0))
        w = llc_closed_form(y, d, custom_distances(c), lam).weights
        grad = 2.0 * d.atoms.T @ (d.atoms @ w - y.values) + 2.0 * lam * c**2 * w
        np.testing.assert_allclose(grad, 0.0, atol=1e-9)


def test_llc_large_locality_weight_suppresses_far_atom():
    rng = np.random.default_rng(10)
    y, d = _ridge_instance(rng)
    c = np.ones(4)
    c[2] = 1e4
    w = llc_closed_form(y, d, custom_distances(c), 0.1).weights
    assert abs(w[2]) < 1e-4
    assert np.max(np.abs(w)) > 1e-3


def test_llc_singular_system_raises():
    col = np.array([1.0, 2.0, 3.0])
    atoms = np.column_stack([col, col])
    d = Dictionary(atoms, [0.3, 0.7])
    y = FeatureVector(np.array([1.0, 1.0, 1.0]))
    with pytest.raises(SingularSystem):
        llc_closed_form(y, d, custom_distances(np.ones(2)), 0.0)


def test_llc_solution_is_dense():
    rng = np.random.default_rng(11)
    y, d = _ridge_instance(rng)
    w = llc_closed_form(y, d, custom_distances(np.ones(4)), 0.05)
    assert w.support_size == 4


# ---------------------------------------------------------------------------
# sparse_group_lasso
# ---------------------------------------------------------------------------


def _sgl_objective(design, target, w, lam1, lam3, partition):
    fit = 0.5 * float(np.sum((target - design @ w) ** 2))
    pen = lam1 * float(np.sum(np.abs(w)))
    pen += lam3 * sum(
        float(p * np.linalg.norm(w[g]))
        for g, p in zip(partition.groups, partition.group_weights)
    )
    return fit + pen


def test_sgl_identity_design_soft_threshold():
    # lambda3 = 0 on an identity design has the exact soft-threshold answer.
    y = np.array([2.0, -0.7, 0.3, -0.1])
    part = GroupPartition([[0, 1, 2, 3]], [1.0])
    res = sparse_group_lasso(np.eye(4), y, 0.5, 0.0, part)
    assert res.converged
    expected = np.sign(y) * np.maximum(np.abs(y) - 0.5, 0.0)
    np.testing.assert_allclose(res.coefficients.weights, expected, atol=1e-7)


def test_sgl_identity_design_group_shrink():
    # lambda1 = 0, one group: w = (1 - lam3*psi/||y||)_+ y.
    y = np.array([3.0, 4.0])  # norm 5
    part = GroupPartition([[0, 1]], [1.0])
    res = sparse_group_lasso(np.eye(2), y, 0.0, 2.0, part)
    assert res.converged
    np.testing.assert_allclose(
        res.coefficients.weights, (1.0 - 2.0 / 5.0) * y, atol=1e-7
    )


def test_sgl_identity_design_two_stage_prox():
    # Combined penalties on an identity design: soft-threshold then shrink.
    y = np.array([2.0, -1.0, 0.2])
    lam1, lam3 = 0.3, 0.8
    part = GroupPartition([[0, 1, 2]], [1.0])
    res = sparse_group_lasso(np.eye(3), y, lam1, lam3, part)
    assert res.converged
    u = np.sign(y) * np.maximum(np.abs(y) - lam1, 0.0)
    scale = max(0.0, 1.0 - lam3 / np.linalg.norm(u))
    np.testing.assert_allclose(res.coefficients.weights, scale * u, atol=1e-7)


def test_sgl_strong_group_penalty_kills_group_exactly():
    rng = np.random.default_rng(12)
    design = rng.normal(size=(10, 4))
    target = rng.normal(size=10)
    part = GroupPartition([[0, 1], [2, 3]], [1.0, 50.0])
    res = sparse_group_lasso(design, target, 0.01, 1.0, part)
    assert res.converged
    w = res.coefficients.weights
    assert w[2] == 0.0 and w[3] == 0.0
    assert np.any(w[:2] != 0.0)


def test_sgl_beats_coarse_grid():
    rng = np.random.default_rng(13)
    part = GroupPartition([[0, 1], [2]], [np.sqrt(2.0), 1.0])
    ticks = np.arange(-2.0, 2.0 + 1e-9, 0.05)
    g0, g1, g2 = np.meshgrid(ticks, ticks, ticks, indexing="ij")
    pts = np.stack([g0, g1, g2], axis=-1).reshape(-1, 3)
    l1_grid = np.abs(pts).sum(axis=1)
    group_grid = np.sqrt(2.0) * np.linalg.norm(pts[:, :2], axis=1) + np.abs(
        pts[:, 2]
    )
    for _ in range(5):
        design = rng.normal(size=(6, 3))
        target = rng.normal(size=6)
        lam1, lam3 = 0.2, 0.3
        res = sparse_group_lasso(design, target, lam1, lam3, part)
        assert res.converged
        residuals = pts @ design.T - target
        f_grid = (
            0.5 * np.einsum("ij,ij->i", residuals, residuals)
            + lam1 * l1_grid
            + lam3 * group_grid
        )
        f_solver = _sgl_objective(
            design, target, res.coefficients.weights, lam1, lam3, part
        )
        assert f_solver <= float(f_grid.min()) + 1e-4


def test_sgl_kkt_residual_small_on_random_instances():
    rng = np.random.default_rng(14)
    for _ in range(20):
        n_atoms = 6
        design = rng.normal(size=(9, n_atoms))
        target = rng.normal(size=9)
        part = GroupPartition(
            [[0, 1, 2], [3, 4], [5]], [np.sqrt(3.0), np.sqrt(2.0), 1.0]
        )
        res = sparse_group_lasso(design, target, 0.1, 0.15, part)
        assert res.converged
        assert res.kkt_residual <= 1e-6


def test_sgl_iteration_cap_flags_nonconvergence():
    rng = np.random.default_rng(15)
    design = rng.normal(size=(30, 12))
    target = rng.normal(size=30)
    part = GroupPartition([list(range(12))], [1.0])
    res = sparse_group_lasso(
        design, target, 0.01, 0.01, part, max_inner_iterations=2
    )
    assert not res.converged
    assert res.iterations == 2
    assert np.all(np.isfinite(res.coefficients.weights))


def test_sgl_zero_target_converges_immediately():
    part = GroupPartition([[0, 1]], [1.0])
    res = sparse_group_lasso(np.eye(2), np.zeros(2), 0.1, 0.1, part)
    assert res.converged
    assert res.iterations == 0
    np.testing.assert_array_equal(res.coefficients.weights, 0.0)


def test_sgl_is_deterministic():
    rng = np.random.default_rng(16)
    design = rng.normal(size=(12, 5))
    target = rng.normal(size=12)
    part = GroupPartition([[0, 1], [2, 3, 4]], [1.2, 0.8])
    a = sparse_group_lasso(design, target, 0.05, 0.07, part)
    b = sparse_group_lasso(design, target, 0.05, 0.07, part)
    assert np.array_equal(a.coefficients.weights, b.coefficients.weights)
    assert a.objective == b.objective


# ---------------------------------------------------------------------------
# shared plumbing
# ---------------------------------------------------------------------------


def test_inert_row_dropping_matches_padded_system():
    rng = np.random.default_rng(17)
    design = rng.normal(size=(8, 4))
    target = rng.normal(size=8)
    padded_design = np.vstack([design, np.zeros((3, 4))])
    padded_target = np.concatenate([target, np.zeros(3)])
    a = lars_l1(design, target, max_steps=6)
    b = lars_l1(padded_design, padded_target, max_steps=6)
    assert np.array_equal(a.coefficients.weights, b.coefficients.weights)


def test_solvers_reject_nan_input():
    from srcl import NonFiniteData

    bad = np.eye(3)
    bad_target = np.array([1.0, np.nan, 0.0])
    with pytest.raises(NonFiniteData):
        lars_l1(bad, bad_target, max_steps=3)
    part = GroupPartition([[0, 1, 2]], [1.0])
    with pytest.raises(NonFiniteData):
        sparse_group_lasso(bad, bad_target, 0.1, 0.1, part)
