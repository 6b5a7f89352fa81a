"""Discrete convex program: discretization, solver, and cross-validation."""

import numpy as np
import pytest

from surfmod import (
    CrossValidationRow,
    DiscreteModulusProblem,
    InfeasibleSurface,
    NoConvergence,
    conjugate_exponent,
    cross_validate,
    discretize_family,
    make_parallel,
    make_polar_annulus,
    solve_discrete,
)


def closed_form_single_surface(p, volumes, weights):
    """Exact optimum of the one-constraint program.

    Holder duality gives density_c proportional to (w_c/v_c)^(1/(p-1))
    and the optimal value (sum of w^q v^(1-q))^(1-p).
    """
    q = conjugate_exponent(p)
    total = np.sum(weights**q * volumes ** (1.0 - q))
    return float(total ** (1.0 - p))


def random_problem(rng, cells=12, surfaces=4, p=2.0):
    centers = rng.uniform(0.0, 1.0, size=(cells, 2))
    volumes = rng.uniform(0.5, 1.5, size=cells) / cells
    rows = []
    for _ in range(surfaces):
        count = int(rng.integers(2, cells + 1))
        idx = rng.choice(cells, size=count, replace=False)
        rows.append((np.sort(idx), rng.uniform(0.2, 1.0, size=count)))
    return DiscreteModulusProblem(
        p=p, centers=centers, volumes=volumes, surfaces=tuple(rows)
    )


def test_problem_validation():
    with pytest.raises(ValueError):
        DiscreteModulusProblem(
            p=2.0, centers=[[0.0]], volumes=[1.0, 2.0], surfaces=()
        )
    with pytest.raises(ValueError):
        DiscreteModulusProblem(p=2.0, centers=[[0.0]], volumes=[0.0], surfaces=())
    with pytest.raises(ValueError):
        DiscreteModulusProblem(
            p=2.0,
            centers=[[0.0]],
            volumes=[1.0],
            surfaces=((np.array([2]), np.array([1.0])),),
        )
    with pytest.raises(ValueError):
        DiscreteModulusProblem(
            p=2.0,
            centers=[[0.0]],
            volumes=[1.0],
            surfaces=((np.array([0]), np.array([-1.0])),),
        )


def test_constraint_matrix_layout():
    problem = DiscreteModulusProblem(
        p=2.0,
        centers=[[0.25], [0.75]],
        volumes=[0.5, 0.5],
        surfaces=((np.array([0, 1]), np.array([2.0, 3.0])),),
    )
    a = problem.constraint_matrix().toarray()
    np.testing.assert_allclose(a, [[2.0, 3.0]])


def test_single_cell_closed_form():
    problem = DiscreteModulusProblem(
        p=2.0,
        centers=[[0.5]],
        volumes=[0.7],
        surfaces=((np.array([0]), np.array([3.0])),),
    )
    solution = solve_discrete(problem)
    assert solution.objective == pytest.approx(0.7 / 9.0, rel=1e-9)
    assert solution.max_constraint_violation <= 1e-10


def test_single_surface_matches_closed_form():
    rng = np.random.default_rng(21)
    for p in (1.5, 2.0, 3.0):
        for _ in range(20):
            cells = int(rng.integers(1, 9))
            volumes = rng.uniform(0.2, 2.0, size=cells)
            weights = rng.uniform(0.1, 1.0, size=cells)
            problem = DiscreteModulusProblem(
                p=p,
                centers=rng.uniform(size=(cells, 1)),
                volumes=volumes,
                surfaces=((np.arange(cells), weights),),
            )
            solution = solve_discrete(problem)
            assert solution.objective == pytest.approx(
                closed_form_single_surface(p, volumes, weights), rel=1e-8
            )


def test_duality_gap_certificate():
    rng = np.random.default_rng(3)
    problem = random_problem(rng)
    solution = solve_discrete(problem)
    assert solution.lower_bound <= solution.objective + 1e-12
    assert (solution.objective - solution.lower_bound) <= 1e-8 * solution.objective


def test_more_surfaces_cannot_shrink_the_modulus():
    rng = np.random.default_rng(5)
    for _ in range(20):
        problem = random_problem(rng, cells=10, surfaces=5)
        subset = DiscreteModulusProblem(
            p=problem.p,
            centers=problem.centers,
            volumes=problem.volumes,
            surfaces=problem.surfaces[:2],
        )
        full = solve_discrete(problem).objective
        partial = solve_discrete(subset).objective
        assert partial <= full * (1.0 + 1e-7)


def test_union_subadditivity():
    # joined families cost at most the sum: (rho1^p + rho2^p)^(1/p) is admissible
    rng = np.random.default_rng(12)
    for _ in range(10):
        base = random_problem(rng, cells=9, surfaces=3)
        extra = random_problem(rng, cells=9, surfaces=3)
        union = DiscreteModulusProblem(
            p=base.p,
            centers=base.centers,
            volumes=base.volumes,
            surfaces=base.surfaces + extra.surfaces,
        )
        a = solve_discrete(base).objective
        b = solve_discrete(
            DiscreteModulusProblem(
                p=base.p,
                centers=base.centers,
                volumes=base.volumes,
                surfaces=extra.surfaces,
            )
        ).objective
        assert solve_discrete(union).objective <= (a + b) * (1.0 + 1e-7)


def test_weight_scaling_law():
    # scaling all weights by c scales the optimum by c^(-p)
    rng = np.random.default_rng(17)
    for p in (1.5, 2.0, 3.0):
        problem = random_problem(rng, p=p)
        scaled = DiscreteModulusProblem(
            p=p,
            centers=problem.centers,
            volumes=problem.volumes,
            surfaces=tuple((idx, 2.0 * w) for idx, w in problem.surfaces),
        )
        base = solve_discrete(problem).objective
        assert solve_discrete(scaled).objective == pytest.approx(
            base * 2.0**-p, rel=1e-6
        )


def test_volume_scaling_law():
    rng = np.random.default_rng(19)
    problem = random_problem(rng)
    scaled = DiscreteModulusProblem(
        p=problem.p,
        centers=problem.centers,
        volumes=3.0 * problem.volumes,
        surfaces=problem.surfaces,
    )
    assert solve_discrete(scaled).objective == pytest.approx(
        3.0 * solve_discrete(problem).objective, rel=1e-7
    )


def test_cell_permutation_invariance():
    rng = np.random.default_rng(23)
    problem = random_problem(rng)
    perm = rng.permutation(problem.cell_count)
    inverse = np.argsort(perm)
    permuted = DiscreteModulusProblem(
        p=problem.p,
        centers=problem.centers[perm],
        volumes=problem.volumes[perm],
        surfaces=tuple((inverse[idx], w) for idx, w in problem.surfaces),
    )
    assert solve_discrete(permuted).objective == pytest.approx(
        solve_discrete(problem).objective, rel=1e-9
    )


def test_infeasible_surface_raises():
    problem = DiscreteModulusProblem(
        p=2.0,
        centers=[[0.5]],
        volumes=[1.0],
        surfaces=((np.array([], dtype=int), np.array([])),),
    )
    with pytest.raises(InfeasibleSurface):
        solve_discrete(problem)


def test_iteration_cap_raises():
    problem = DiscreteModulusProblem(
        p=2.0,
        centers=[[0.25], [0.75]],
        volumes=[0.5, 0.5],
        surfaces=((np.array([0, 1]), np.array([3.0, 1.0])),),
    )
    with pytest.raises(NoConvergence):
        solve_discrete(problem, max_iters=0)


def test_text_round_trip():
    rng = np.random.default_rng(29)
    problem = random_problem(rng)
    text = problem.to_text()
    back = DiscreteModulusProblem.from_text(text)
    assert back.to_text() == text
    assert back.p == problem.p
    np.testing.assert_array_equal(back.centers, problem.centers)
    np.testing.assert_array_equal(back.volumes, problem.volumes)
    for (i1, w1), (i2, w2) in zip(back.surfaces, problem.surfaces):
        np.testing.assert_array_equal(i1, i2)
        np.testing.assert_array_equal(w1, w2)


def test_from_text_rejects_garbage():
    with pytest.raises(ValueError):
        DiscreteModulusProblem.from_text("not a problem\n")
    good = random_problem(np.random.default_rng(1)).to_text()
    with pytest.raises(ValueError):
        DiscreteModulusProblem.from_text(good.replace("cells", "cheese"))


def test_discretize_weight_totals():
    # every sampled surface deposits its full measure: flat surfaces carry
    # vol(V), rays carry r1-r0, circles carry 2*pi*radius
    flat = make_parallel([(0.0, 1.0)], [(0.0, 3.0)]).family
    problem = discretize_family(flat, 2.0, cells_per_axis=6, surfaces_count=5, samples_per_surface=40)
    for _, w in problem.surfaces:
        assert w.sum() == pytest.approx(3.0, rel=1e-12)

    rays = make_polar_annulus(1.0, 2.0, mode="radial").family
    problem = discretize_family(rays, 2.0, cells_per_axis=6, surfaces_count=5, samples_per_surface=40)
    for _, w in problem.surfaces:
        assert w.sum() == pytest.approx(1.0, rel=1e-12)

    circles = make_polar_annulus(1.0, 2.0, mode="circular").family
    problem = discretize_family(circles, 2.0, cells_per_axis=6, surfaces_count=5, samples_per_surface=60)
    radii = circles.param_box.grid(5)[:, 0]
    for (_, w), t in zip(problem.surfaces, radii):
        assert w.sum() == pytest.approx(2.0 * np.pi * t, rel=1e-12)


def test_discretize_is_reproducible():
    fam = make_parallel([(0.0, 1.0)], [(0.0, 1.0)]).family
    one = discretize_family(fam, 2.0, 8, 24, 32, rng=np.random.default_rng(5))
    two = discretize_family(fam, 2.0, 8, 24, 32, rng=np.random.default_rng(5))
    other = discretize_family(fam, 2.0, 8, 24, 32, rng=np.random.default_rng(6))
    assert one.to_text() == two.to_text()
    assert one.to_text() != other.to_text()


def test_discretize_validates_counts():
    fam = make_parallel([(0.0, 1.0)], [(0.0, 1.0)]).family
    with pytest.raises(ValueError):
        discretize_family(fam, 2.0, 0, 3, 4)
    with pytest.raises(ValueError):
        discretize_family(fam, 2.0, 4, 0, 4)


def test_flat_family_converges_within_band():
    fam = make_parallel([(0.0, 1.0)], [(0.0, 1.0)]).family
    problem = discretize_family(
        fam, 2.0, cells_per_axis=64, surfaces_count=192, samples_per_surface=256
    )
    solution = solve_discrete(problem, max_iters=20000)
    assert 0.95 <= solution.objective <= 1.05


def test_cross_validate_ladder():
    fam = make_parallel([(0.0, 1.0)], [(0.0, 1.0)]).family
    rows = cross_validate(fam, 2.0, 1.0, [8, 16], max_iters=20000)
    assert [row.resolution for row in rows] == [8, 16]
    assert all(isinstance(row, CrossValidationRow) for row in rows)
    assert rows[1].relative_gap < rows[0].relative_gap
    assert rows[1].relative_gap < 0.10


def test_cross_validate_rejects_nonpositive_reference():
    fam = make_parallel([(0.0, 1.0)], [(0.0, 1.0)]).family
    with pytest.raises(ValueError):
        cross_validate(fam, 2.0, 0.0, [4])
