from __future__ import annotations

import pytest

from thetastrat import linalg
from thetastrat.fans import (
    Cone,
    PointOutsideFanError,
    arrangement_faces,
    build_arrangement,
    build_sigma_X,
    chamber_cone,
    dedupe_functionals,
    fan_to_json,
    minimal_cone_containing,
    project_onto_span,
)
from thetastrat.rootdata import ParabolicType, build_root_datum


def v(*values) -> linalg.Vector:
    return linalg.vec(values)


def test_quadrant_from_generators():
    cone = Cone.from_generators([v(1, 0), v(0, 1)], [], 2)

    assert sorted(cone.halfspaces) == [v(0, 1), v(1, 0)]
    assert cone.contains(v(1, 1))
    assert cone.contains(v(1, 0))
    assert not cone.in_relative_interior(v(1, 0))
    assert not cone.contains(v(-1, 0))
    assert cone.dimension == 2


def test_halfplane_keeps_its_lineality():
    cone = Cone.from_halfspaces([], [v(1, 0)], 2)

    assert len(cone.lineality) == 1
    assert cone.contains(v(0, -5))
    assert len(cone.generators) == len(cone.rays) + 2


def test_dedupe_drops_parallel_and_zero_functionals():
    assert dedupe_functionals([v(2, 0), v(-1, 0), v(0, 0), v(0, 3)]) == (v(1, 0), v(0, 1))


@pytest.mark.parametrize(
    ("functionals", "faces"),
    [([v(1, 0)], 3), ([v(1, 0), v(0, 1)], 9), ([v(1, 0), v(0, 1), v(1, 1)], 13)],
)
def test_face_counts_of_central_line_arrangements(functionals, faces):
    assert len(arrangement_faces(build_arrangement(functionals, 2))) == faces


def test_abelian_fan_has_three_cones():
    fan = build_sigma_X(build_root_datum("GL1"), [v(1)])

    assert [cone.label for cone in fan] == ["0", "-", "+"]
    assert minimal_cone_containing(fan, v(-2)).label == "-"
    assert minimal_cone_containing(fan, v(0)).label == "0"
    assert [entry["id"] for entry in fan_to_json(fan)] == [0, 1, 2]


def test_sigma_x_is_restricted_to_the_dominant_chamber():
    fan = build_sigma_X(build_root_datum("A1"), [v(1), v(-1)])

    assert len(fan) == 2
    assert minimal_cone_containing(fan, v(3)).contains(v(1))
    with pytest.raises(PointOutsideFanError):
        minimal_cone_containing(fan, v(-1))


def test_chamber_cones_of_a2():
    datum = build_root_datum("A2")
    borel = ParabolicType.borel(datum)

    sigma = chamber_cone(datum, borel, "sigma")
    tau = chamber_cone(datum, borel, "tau")

    rho_vee = linalg.add(datum.fundamental_coweights[0], datum.fundamental_coweights[1])
    assert sigma.in_relative_interior(rho_vee)
    assert tau.contains(rho_vee)
    assert sigma.dimension == tau.dimension == 2


def test_projection_onto_a_ray_is_b_orthogonal_and_idempotent():
    ray = Cone.from_generators([v(1, 0)], [], 2)
    b = linalg.mat([[2, 1], [1, 2]])

    image = project_onto_span(ray, v(3, 4), b)

    assert image == v(5, 0)
    assert project_onto_span(ray, image, b) == image
    assert linalg.bilinear(b, v(1, 0), linalg.sub(v(3, 4), image)) == 0
