import numpy as np
import pytest

from dbardisk.criticality import (
    boundary_condition,
    conformality,
    harmonic_residual,
    is_critical,
)
from dbardisk.diskmap import DiskMap, PolynomialMap
from dbardisk.errors import ConstraintViolationError
from dbardisk.geometry import DefiningFunction


def test_harmonic_residual_linear_maps(maps):
    assert harmonic_residual(maps["f3"]) < 1e-10
    assert harmonic_residual(maps["f4"]) < 1e-10


def test_harmonic_residual_nonharmonic(grid):
    # first coordinate x (x^2 + y^2): Laplacian is 8x, far from zero
    pm = PolynomialMap(2, [[(2, 1, 0.5), (1, 2, 0.5)], []])
    f = DiskMap.from_polynomial(pm, grid)
    assert harmonic_residual(f) > 0.1
    sampled = DiskMap(grid, 2, f.values, f.boundary, analytic=None)
    assert harmonic_residual(sampled) > 0.1


def test_harmonic_residual_sampled_harmonic_polynomials(grid, rng):
    # harmonic polynomials Re(c z^k) of degree <= n_theta/2 - 2 resolve to
    # spectral accuracy through the sampled differentiation path
    kmax = grid.n_theta // 2 - 2
    coords = [[], []]
    for k in range(kmax + 1):
        coords[0].append((k, 0, (rng.normal() + 1j * rng.normal()) / (1.0 + k) ** 2))
    pm = PolynomialMap(2, coords)
    exact = DiskMap.from_polynomial(pm, grid)
    sampled = DiskMap(grid, 2, exact.values, exact.boundary, analytic=None)
    assert harmonic_residual(sampled) < 1e-9


def test_boundary_condition_f3_ball(maps, ball):
    res, lam = boundary_condition(maps["f3"], ball)
    assert res < 1e-10
    assert np.max(np.abs(lam - 2.0)) < 1e-10


def test_boundary_condition_f4_weak(maps, weak):
    res, lam = boundary_condition(maps["f4"], weak)
    assert res < 1e-10
    assert np.max(np.abs(lam - np.sqrt(2.0))) < 1e-10


def test_boundary_condition_f1_cylinder(maps, cylinder):
    res, _ = boundary_condition(maps["f1"], cylinder)
    assert res > 0.5


def test_boundary_condition_off_surface(maps, cylinder):
    # f3 sends the rim off the cylinder boundary
    with pytest.raises(ConstraintViolationError) as err:
        boundary_condition(maps["f3"], cylinder)
    assert err.value.worst_node is not None


def test_boundary_residual_scale_invariance(maps, ball):
    c = 3.5
    scaled = DefiningFunction(
        n=2,
        rho=lambda p: c * ball.rho(p),
        grad=lambda p: c * ball.grad(p),
        hess=lambda p: c * ball.hess(p),
    )
    res1, lam1 = boundary_condition(maps["f3"], ball)
    res2, lam2 = boundary_condition(maps["f3"], scaled)
    assert abs(res1 - res2) < 1e-12
    assert np.max(np.abs(lam1 - lam2)) < 1e-12


def test_conformality_catalog(maps, grid):
    assert conformality(maps["f3"]) < 1e-12
    assert conformality(maps["f2"]) < 1e-12
    # (2x, y, 0, 0): |f_x|^2 - |f_y|^2 = 3 everywhere
    pm = PolynomialMap(2, [[(1, 0, 1.0), (0, 1, 1.0)], [(1, 0, -0.5j), (0, 1, 0.5j)]])
    assert conformality(DiskMap.from_polynomial(pm, grid)) >= 3.0


def test_is_critical_catalog(maps, ball, weak, cylinder):
    ok, rep = is_critical(maps["f3"], ball)
    assert ok
    assert abs(rep.lambda_min - 2.0) < 1e-10
    assert not rep.warnings

    ok, rep = is_critical(maps["f4"], weak)
    assert ok
    assert abs(rep.lambda_min - np.sqrt(2.0)) < 1e-10

    ok, rep = is_critical(maps["f1"], cylinder)
    assert not ok
    assert rep.boundary_residual > 0.1


def test_certified_critical_points_obey_consequences(maps, ball, weak, cylinder):
    # weak conformality and lambda >= 0 must hold on every certified
    # critical point in the catalog
    for name, dom in (("f3", ball), ("f4", weak), ("f2", cylinder)):
        ok, rep = is_critical(maps[name], dom)
        if ok:
            assert rep.conformality_defect < 1e-8
            assert rep.lambda_min >= -1e-8


def test_report_serialization(maps, ball):
    _, rep = is_critical(maps["f3"], ball)
    d = rep.to_json_dict()
    assert set(d) >= {"harmonic_residual", "boundary_residual", "lambda",
                      "lambda_min", "conformality_defect", "critical"}
    assert len(d["lambda"]) == maps["f3"].grid.n_theta
