import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from flowplan import FieldError, GoalSpec, Lattice, LatticeError, State
from flowplan.flowfield import FlowField
from flowplan.lattice import (
    angular_distance_deg,
    direction_deg,
    heading_deg,
    octant_of,
    octant_of_deg,
)

from conftest import geometry, random_field, still_field


class TestEncodeDecode:
    def test_origin_state_is_index_zero(self):
        lat = Lattice(still_field(3, 3))
        assert lat.encode(State(0, 0, 0, 0)) == 0

    def test_heading_varies_fastest(self):
        lat = Lattice(still_field(3, 3))
        assert lat.encode(State(0, 0, 0, 1)) == 1
        assert lat.encode(State(1, 0, 0, 0)) == 8

    def test_paper_geometry_state_count(self):
        # Enumerate every (ix, iy, layer, heading) and count distinct codes.
        lat = Lattice(still_field(21, 29, layers=4))
        g = lat.geometry
        codes = {
            lat.encode(State(ix, iy, l, h))
            for l in range(4)
            for iy in range(g.ny)
            for ix in range(g.nx)
            for h in range(8)
        }
        assert len(codes) == 19488
        assert lat.num_states == 19488

    def test_decode_out_of_range(self):
        lat = Lattice(still_field(2, 2))
        with pytest.raises(LatticeError):
            lat.decode(lat.num_states)
        with pytest.raises(LatticeError):
            lat.decode(-1)

    def test_encode_out_of_bounds(self):
        lat = Lattice(still_field(2, 2))
        with pytest.raises(LatticeError):
            lat.encode(State(2, 0, 0, 0))
        with pytest.raises(LatticeError):
            lat.encode(State(0, 0, 0, 8))

    def test_round_trip_all_indices(self):
        lat = Lattice(random_field(11, nx=4, ny=3, layers=2))
        for z in range(lat.num_states):
            assert lat.encode(lat.decode(z)) == z

    @given(st.integers(0, 3), st.integers(0, 4), st.integers(0, 1), st.integers(0, 7))
    def test_round_trip_states(self, ix, iy, layer, h):
        lat = Lattice(still_field(4, 5, layers=2))
        s = State(ix, iy, layer, h)
        assert lat.decode(lat.encode(s)) == s

    def test_land_states_encodable_but_not_free(self):
        f = random_field(5, land_frac=0.4)
        lat = Lattice(f)
        land_states = [z for z in range(lat.num_states) if not lat.is_free(z)]
        assert land_states, "fixture should contain land"
        z = land_states[0]
        assert lat.encode(lat.decode(z)) == z
        with pytest.raises(LatticeError):
            lat.require_free_state(lat.decode(z))


class TestGoalStates:
    def test_any_heading_is_eight_states(self):
        lat = Lattice(still_field(3, 3))
        zs = lat.goal_states(GoalSpec(1, 1, 0))
        assert len(zs) == 8 and len(set(zs)) == 8

    def test_exact_heading_is_singleton(self):
        lat = Lattice(still_field(3, 3))
        zs = lat.goal_states(GoalSpec(1, 1, 0, heading=2))
        assert zs == (lat.encode(State(1, 1, 0, 2)),)

    def test_goal_on_land_rejected(self):
        g = geometry(2, 1)
        land = np.array([[[True, False]]])
        f = FlowField(geometry=g, u=np.zeros((1, 1, 2)), v=np.zeros((1, 1, 2)), land=land)
        with pytest.raises(FieldError, match="land"):
            Lattice(f).goal_states(GoalSpec(0, 0, 0))

    def test_goal_heading_validated(self):
        with pytest.raises(LatticeError):
            GoalSpec(0, 0, 0, heading=9)


class TestDirectionHelpers:
    def test_axis_and_diagonal_directions_exact(self):
        assert direction_deg(1, 0) == 0.0
        assert direction_deg(0, 2) == 90.0
        assert direction_deg(-3, 0) == 180.0
        assert direction_deg(0, -1) == 270.0
        assert direction_deg(2, 2) == 45.0
        assert direction_deg(-1, 1) == 135.0
        assert direction_deg(-2, -2) == 225.0
        assert direction_deg(1, -1) == 315.0
        assert direction_deg(0, 0) is None

    def test_off_axis_direction(self):
        assert direction_deg(2, 1) == pytest.approx(math.degrees(math.atan2(1, 2)))

    def test_octant_rounding_ties_counterclockwise(self):
        assert octant_of_deg(22.5) == 1
        assert octant_of_deg(22.4) == 0
        assert octant_of_deg(337.5) == 0
        assert octant_of(1, 0) == 0
        assert octant_of(2, 1) == 1  # 26.57 degrees rounds to 45
        assert octant_of(0, 0) is None

    def test_heading_deg(self):
        assert [heading_deg(h) for h in range(8)] == [0.0, 45.0, 90.0, 135.0, 180.0, 225.0, 270.0, 315.0]

    @given(st.floats(0.0, 359.999), st.floats(0.0, 359.999))
    def test_angular_distance_deg_bounds_and_symmetry(self, a, b):
        d = angular_distance_deg(a, b)
        assert 0.0 <= d <= 180.0
        assert d == angular_distance_deg(b, a)
