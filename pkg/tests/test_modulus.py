"""Surface weights, moduli, extremal densities, and both verification routes."""

import numpy as np
import pytest

from surfmod import (
    BoxDomain,
    DegenerateJacobian,
    InconsistentSubmersion,
    InversionFailure,
    ModulusReport,
    NonFiniteIntegrand,
    ParametrizedFamily,
    QuadratureScheme,
    Submersion,
    admissibility_check,
    coarea_check,
    conjugate_exponent,
    extremal_density,
    extremality_probe,
    jacobian_floor,
    l_of_x,
    make_parallel,
    make_polar_annulus,
    make_shear,
    modulus_p,
    submersion_modulus,
)

QUAD = QuadratureScheme(order=10, subdivisions=3)


def constant_jacobian_family(matrix):
    matrix = np.asarray(matrix, dtype=float)
    box = BoxDomain([0.0], [1.0])
    return ParametrizedFamily(
        n=2,
        m=1,
        param_box=box,
        surface_box=box,
        map=lambda x, y: matrix @ np.concatenate([x, y]),
        jacobian=lambda x, y: matrix,
    )


def test_conjugate_exponent_values():
    assert conjugate_exponent(2.0) == pytest.approx(2.0)
    assert conjugate_exponent(3.0) == pytest.approx(1.5)
    for p in np.geomspace(1.01, 10.0, 50):
        q = conjugate_exponent(p)
        assert abs(1.0 / p + 1.0 / q - 1.0) < 1e-12


def test_conjugate_exponent_rejects_bad_p():
    for p in (1.0, 0.9, -2.0, np.inf, np.nan):
        with pytest.raises(ValueError):
            conjugate_exponent(p)


def test_surface_weight_parallel():
    # flat surfaces: the weight is the surface volume, for every p
    fam = make_parallel([(0.0, 2.0)], [(0.0, 3.0)]).family
    for p in (1.5, 2.0, 3.0):
        assert l_of_x(fam, [0.7], p, QUAD) == pytest.approx(3.0, rel=1e-13)


def test_surface_weight_radial():
    # radial segments of the annulus 1 < |z| < 2 at p=2: weight log 2
    fam = make_polar_annulus(1.0, 2.0, mode="radial").family
    assert l_of_x(fam, [1.2], 2.0, QUAD) == pytest.approx(np.log(2.0), rel=1e-12)


def test_surface_weight_circles():
    # concentric circles at p=2: weight is the circumference
    fam = make_polar_annulus(1.0, 2.0, mode="circular").family
    for t in (1.1, 1.5, 1.9):
        assert l_of_x(fam, [t], 2.0, QUAD) == pytest.approx(
            2.0 * np.pi * t, rel=1e-12
        )


def test_modulus_parallel_box():
    report = modulus_p(make_parallel([(0.0, 2.0)], [(0.0, 3.0)]).family, 2.0, QUAD)
    assert report.modulus == pytest.approx(2.0 / 3.0, rel=1e-13)
    assert report.p == 2.0 and report.q == 2.0
    assert report.min_jacobian == pytest.approx(1.0)
    assert len(report.l_samples) == 30
    assert report.node_count == 30 * 30


def test_modulus_radial_annulus():
    fam = make_polar_annulus(1.0, float(np.e), mode="radial").family
    report = modulus_p(fam, 2.0, QUAD)
    assert report.modulus == pytest.approx(2.0 * np.pi, rel=1e-10)


def test_modulus_shear():
    fam = make_shear([(0.0, 1.0)], [(0.0, 1.0)], [[1.0]]).family
    report = modulus_p(fam, 2.0, QUAD)
    assert report.modulus == pytest.approx(0.5, rel=1e-13)


def test_modulus_threads_match_serial():
    fam = make_polar_annulus(1.0, 2.0, mode="radial").family
    serial = modulus_p(fam, 2.0, QUAD)
    parallel = modulus_p(fam, 2.0, QUAD, threads=4)
    assert parallel.modulus == serial.modulus
    assert parallel.l_samples == serial.l_samples


def test_modulus_rejects_p_one():
    fam = make_parallel([(0.0, 1.0)], [(0.0, 1.0)]).family
    with pytest.raises(ValueError):
        modulus_p(fam, 1.0, QUAD)


def test_report_validates_conjugacy():
    with pytest.raises(ValueError):
        ModulusReport(
            p=2.0, q=3.0, modulus=1.0, l_samples=((0.5,), 1.0),
            min_jacobian=1.0, node_count=1,
        )
    with pytest.raises(ValueError):
        ModulusReport(
            p=2.0, q=2.0, modulus=1.0, l_samples=(((0.5,), -1.0),),
            min_jacobian=1.0, node_count=1,
        )


def test_degenerate_jacobian_detected():
    fam = constant_jacobian_family([[1.0, 1.0], [1.0, 1.0]])
    with pytest.raises(DegenerateJacobian):
        l_of_x(fam, [0.5], 2.0, QUAD)


def test_non_finite_integrand_detected():
    # ratio (area/det)^q overflows while det stays above the floor
    fam = constant_jacobian_family([[1e-200, 0.0], [0.0, 1e20]])
    with pytest.raises(NonFiniteIntegrand):
        l_of_x(fam, [0.5], 2.0, QUAD)


def test_underflowing_weight_detected():
    fam = constant_jacobian_family([[1.0, 0.0], [0.0, 1e-301]])
    with pytest.raises(NonFiniteIntegrand):
        modulus_p(fam, 2.0, QUAD)


def test_jacobian_floor_scales_with_family():
    fam = make_polar_annulus(1.0, 2.0, mode="radial").family
    floor = jacobian_floor(fam)
    assert 0.0 < floor < 1e-10


def test_extremal_density_parallel_constant():
    entry = make_parallel([(0.0, 2.0)], [(0.0, 3.0)])
    density = extremal_density(entry.family, 2.0, QUAD)
    for x, y in (([0.3], [0.4]), ([1.7], [2.9])):
        assert density.evaluate_param(x, y) == pytest.approx(1.0 / 3.0, rel=1e-12)
    # ambient route through Newton inversion of the identity map
    assert density.evaluate_ambient([1.0, 1.5]) == pytest.approx(1.0 / 3.0, rel=1e-9)


def test_extremal_density_radial_ambient():
    # 1/(|z| log(r1/r0)), reached both through inversion and a given inverse
    entry = make_polar_annulus(1.0, 2.0, mode="radial")
    density = extremal_density(entry.family, 2.0, QUAD)
    z = np.array([1.3, 0.4])
    expected = 1.0 / (np.hypot(*z) * np.log(2.0))
    assert density.evaluate_ambient(z) == pytest.approx(expected, rel=1e-8)

    def inverse(z):
        return np.array([np.arctan2(z[1], z[0])]), np.array([np.hypot(z[0], z[1])])

    with_inverse = extremal_density(entry.family, 2.0, QUAD, inverse=inverse)
    assert with_inverse.evaluate_ambient(z) == pytest.approx(expected, rel=1e-12)


def test_extremal_density_tabulated():
    entry = make_polar_annulus(1.0, 2.0, mode="circular")
    direct = extremal_density(entry.family, 2.0, QUAD)
    tabulated = extremal_density(entry.family, 2.0, QUAD, tabulate=True, table_points=65)
    rng = np.random.default_rng(8)
    for _ in range(20):
        x = rng.uniform(1.01, 1.99, size=1)
        y = rng.uniform(0.1, 6.1, size=1)
        # the weight is linear in the radius, so interpolation is exact
        assert tabulated.evaluate_param(x, y) == pytest.approx(
            direct.evaluate_param(x, y), rel=1e-9
        )


def test_inversion_failure_outside_image():
    entry = make_parallel([(0.0, 1.0)], [(0.0, 1.0)])
    density = extremal_density(entry.family, 2.0, QUAD)
    with pytest.raises(InversionFailure):
        density.evaluate_ambient([5.0, 5.0])


def test_admissibility_of_extremal_density():
    for entry in (
        make_parallel([(0.0, 2.0)], [(0.0, 3.0)]),
        make_polar_annulus(1.0, 2.0, mode="radial"),
    ):
        density = extremal_density(entry.family, 2.0, QUAD)
        samples = entry.family.param_box.grid(8)
        for x, integral in admissibility_check(entry.family, density, QUAD, samples):
            assert integral == pytest.approx(1.0, abs=1e-10)


def test_coarea_identity_radial():
    entry = make_polar_annulus(1.0, 2.0, mode="radial")
    # g = |z|: both sides equal the integral of the radius over the annulus rays
    lhs, rhs = coarea_check(entry.family, entry.submersion, lambda z: np.hypot(*z), QUAD)
    exact = 2.0 * np.pi * (2.0**2 - 1.0**2) / 2.0
    assert lhs == pytest.approx(exact, rel=1e-12)
    assert rhs == pytest.approx(exact, rel=1e-12)


def test_coarea_identity_quadratic_integrand():
    entry = make_polar_annulus(1.0, 2.0, mode="radial")
    lhs, rhs = coarea_check(
        entry.family, entry.submersion, lambda z: z[0] ** 2 + z[1] ** 2, QUAD
    )
    exact = 2.0 * np.pi * (2.0**3 - 1.0**3) / 3.0
    assert lhs == pytest.approx(exact, rel=1e-12)
    assert rhs == pytest.approx(exact, rel=1e-12)


def test_submersion_route_matches_reduction():
    for entry in (
        make_parallel([(0.0, 2.0)], [(0.0, 3.0)]),
        make_shear([(0.0, 1.0)], [(0.0, 1.0)], [[1.0]]),
        make_polar_annulus(1.0, 2.0, mode="radial"),
        make_polar_annulus(1.0, 2.0, mode="circular"),
    ):
        for p in (1.5, 2.0, 3.0):
            direct = modulus_p(entry.family, p, QUAD)
            via_sub = submersion_modulus(entry.submersion, entry.family, p, QUAD)
            assert via_sub.modulus == pytest.approx(direct.modulus, rel=1e-10)


def test_submersion_route_radial_value():
    entry = make_polar_annulus(1.0, 2.0, mode="radial")
    report = submersion_modulus(entry.submersion, entry.family, 2.0, QUAD)
    assert report.modulus == pytest.approx(2.0 * np.pi / np.log(2.0), rel=1e-10)


def test_inconsistent_submersion_rejected():
    radial = make_polar_annulus(1.0, 2.0, mode="radial")
    circular = make_polar_annulus(1.0, 2.0, mode="circular")
    # the radius submersion describes circles, not rays
    with pytest.raises(InconsistentSubmersion):
        submersion_modulus(circular.submersion, radial.family, 2.0, QUAD)


def test_extremality_zero_amplitude_gap_vanishes():
    fam = make_parallel([(0.0, 1.0)], [(0.0, 1.0)]).family
    gap = extremality_probe(fam, 2.0, QUAD, trials=3, amplitude=0.0)
    assert abs(gap) < 1e-10


def test_extremality_random_competitors_lose():
    for entry in (
        make_parallel([(0.0, 2.0)], [(0.0, 3.0)]),
        make_polar_annulus(1.0, 2.0, mode="radial"),
    ):
        for p in (1.5, 2.0, 3.0):
            gap = extremality_probe(entry.family, p, QUAD, trials=40, seed=1)
            assert gap >= -1e-9


def test_extremality_probe_needs_trials():
    fam = make_parallel([(0.0, 1.0)], [(0.0, 1.0)]).family
    with pytest.raises(ValueError):
        extremality_probe(fam, 2.0, QUAD, trials=0)
