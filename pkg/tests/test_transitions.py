import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowplan import (
    Action,
    ActionUnavailable,
    CostSet,
    FlowField,
    State,
    UncertaintyConfig,
    action_cost,
    alignment_score,
    angular_distance,
    displacement_cells,
    flow_direction,
    generate_synthetic_field,
    successors,
)
from flowplan.lattice import Lattice
from flowplan.transitions import available_actions

from conftest import geometry, random_field, still_field, uniform_east

TWO_PI = 2.0 * math.pi
angles = st.floats(0.0, TWO_PI, exclude_max=True)


class TestCostSet:
    def test_defaults_match_paper_values(self):
        c = CostSet()
        assert (c.drift, c.glide, c.forward, c.rotate) == (0, 2, 4, 10)

    def test_ordering_enforced(self):
        with pytest.raises(ValueError):
            CostSet(drift=2, glide=2, forward=4, rotate=10)
        with pytest.raises(ValueError):
            CostSet(drift=-1, glide=2, forward=4, rotate=10)

    def test_action_cost_lookup(self):
        c = CostSet()
        assert action_cost(Action.DRIFT, c) == 0
        assert action_cost(Action.DOWN, c) == 2  # glides charge the glide cost
        assert action_cost(Action.UP, c) == 2
        assert action_cost(Action.FORWARD, c) == 4
        assert action_cost(Action.ROTATE_LEFT, c) == 10

    def test_exactly_six_actions(self):
        assert len(Action) == 6

    def test_as_table_ordered_by_action_value(self):
        assert CostSet().as_table() == (0, 2, 2, 4, 10, 10)


class TestAngularDistance:
    def test_antipodal(self):
        assert angular_distance(0.0, math.pi) == math.pi

    def test_identity(self):
        assert angular_distance(math.pi / 4, math.pi / 4) == 0.0

    def test_wraparound_example(self):
        # min(|0.1 - 6.2|, 2*pi - |0.1 - 6.2|): the wrap branch wins.
        expected = min(abs(0.1 - 6.2), TWO_PI - abs(0.1 - 6.2))
        got = angular_distance(0.1, 6.2)
        assert got == expected
        assert got == pytest.approx(0.18319, abs=5e-6)

    @given(angles, angles)
    def test_symmetric_and_bounded(self, a, b):
        d = angular_distance(a, b)
        assert 0.0 <= d <= math.pi
        assert d == angular_distance(b, a)

    @given(angles, angles, st.floats(0.0, TWO_PI, exclude_max=True))
    def test_rotation_invariant(self, a, b, r):
        d0 = angular_distance(a, b)
        d1 = angular_distance((a + r) % TWO_PI, (b + r) % TWO_PI)
        assert d1 == pytest.approx(d0, abs=1e-9)

    @given(angles)
    def test_zero_iff_equal(self, a):
        assert angular_distance(a, a) == 0.0


class TestAlignmentScore:
    def test_aligned_is_zero(self):
        assert alignment_score(1.0, 1.0) == 0.0

    def test_opposed_is_one(self):
        assert alignment_score(0.0, math.pi) == 1.0

    def test_perpendicular_is_half(self):
        assert alignment_score(0.0, math.pi / 2) == pytest.approx(0.5)

    @given(angles, angles)
    def test_in_unit_interval(self, a, b):
        assert 0.0 <= alignment_score(a, b) <= 1.0

    @given(angles, angles, angles, angles)
    def test_monotone_in_angular_distance(self, a, b, c, d):
        if angular_distance(a, b) <= angular_distance(c, d):
            assert alignment_score(a, b) <= alignment_score(c, d) + 1e-12


class TestDisplacementCells:
    @pytest.mark.parametrize(
        "s,cells",
        [(0.0, 2), (0.2, 2), (0.2 + 1e-9, 1), (0.5, 1), (0.5 + 1e-9, 0), (0.7, 0), (1.0, 0)],
    )
    def test_threshold_table(self, s, cells):
        assert displacement_cells(s) == cells

    @given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
    def test_monotone_non_increasing(self, s1, s2):
        if s1 <= s2:
            assert displacement_cells(s1) >= displacement_cells(s2)


class TestFlowDirection:
    def test_uniform_east(self):
        assert flow_direction(uniform_east(speed=0.5), (2, 2, 0), 2000.0) == 0.0

    def test_uniform_north(self):
        f = generate_synthetic_field("uniform", geometry(5, 5), u0=0.0, v0=0.5)
        assert flow_direction(f, (2, 2, 0), 2000.0) == pytest.approx(math.pi / 2)

    def test_still_water_is_none(self):
        assert flow_direction(still_field(), (2, 2, 0), 2000.0) is None


def _outcome(field, state, action, dt=2000.0, dispersal=True, strict=False):
    return successors(
        state,
        action,
        field,
        dt,
        UncertaintyConfig(dispersal=dispersal),
        strict_paper_displacement=strict,
    )


class TestSuccessors:
    def test_still_water_forward_dispersal(self):
        # Forward east from (2, 3): nominal (3, 3), laterals (3, 2), (3, 4).
        f = still_field(7, 7)
        lat = Lattice(f)
        out = _outcome(f, State(2, 3, 0, 0), Action.FORWARD)
        assert out.nominal == lat.encode(State(3, 3, 0, 0))
        assert out.members == tuple(
            sorted(lat.encode(State(3, y, 0, 0)) for y in (2, 3, 4))
        )

    def test_forward_dispersal_clipped_at_boundary(self):
        f = still_field(7, 7)
        lat = Lattice(f)
        out = _outcome(f, State(2, 0, 0, 0), Action.FORWARD)  # southern edge
        assert out.members == tuple(sorted(lat.encode(State(3, y, 0, 0)) for y in (0, 1)))

    def test_rotate_right_from_north_is_northeast(self):
        # 90 degrees rotating right (clockwise) yields 45.
        f = still_field()
        out = _outcome(f, State(3, 3, 0, 2), Action.ROTATE_RIGHT)
        lat = Lattice(f)
        assert out.members == (lat.encode(State(3, 3, 0, 1)),)

    def test_rotate_left_wraps(self):
        f = still_field()
        lat = Lattice(f)
        out = _outcome(f, State(3, 3, 0, 7), Action.ROTATE_LEFT)
        assert out.members == (lat.encode(State(3, 3, 0, 0)),)

    def test_drift_aligned_with_east_flow_moves_two_cells(self):
        f = uniform_east(speed=0.5)
        lat = Lattice(f)
        out = _outcome(f, State(1, 3, 0, 0), Action.DRIFT)
        assert out.nominal == lat.encode(State(3, 3, 0, 0))

    def test_drift_perpendicular_flow_moves_one_cell(self):
        # heading north (s = 0.5) in east flow: one cell east.
        f = uniform_east(speed=0.5)
        lat = Lattice(f)
        out = _outcome(f, State(1, 3, 0, 2), Action.DRIFT)
        assert out.nominal == lat.encode(State(2, 3, 0, 2))

    def test_drift_opposed_flow_floats_in_place(self):
        f = uniform_east(speed=0.5)
        lat = Lattice(f)
        out = _outcome(f, State(3, 3, 0, 4), Action.DRIFT)
        assert out.members == (lat.encode(State(3, 3, 0, 4)),)

    def test_drift_still_water_is_identity(self):
        f = still_field()
        lat = Lattice(f)
        z = lat.encode(State(2, 2, 0, 5))
        out = _outcome(f, State(2, 2, 0, 5), Action.DRIFT)
        assert out.nominal == z and out.members == (z,)

    def test_drift_heading_preserved(self):
        f = uniform_east(speed=0.5)
        out = _outcome(f, State(1, 3, 0, 1), Action.DRIFT)
        lat = Lattice(f)
        assert all(lat.decode(m).heading == 1 for m in out.members)

    def test_up_at_surface_unavailable(self):
        f = still_field(3, 3, layers=2)
        with pytest.raises(ActionUnavailable):
            _outcome(f, State(1, 1, 0, 0), Action.UP)

    def test_down_at_deepest_layer_unavailable(self):
        f = still_field(3, 3, layers=2)
        with pytest.raises(ActionUnavailable):
            _outcome(f, State(1, 1, 1, 0), Action.DOWN)

    def test_glide_changes_layer_by_one_and_keeps_heading(self):
        f = still_field(3, 3, layers=3)
        lat = Lattice(f)
        out = _outcome(f, State(1, 1, 1, 3), Action.UP)
        assert out.members == (lat.encode(State(1, 1, 0, 3)),)
        out = _outcome(f, State(1, 1, 1, 3), Action.DOWN)
        assert out.members == (lat.encode(State(1, 1, 2, 3)),)

    def test_glide_uses_destination_layer_flow(self):
        # Layer 0 still, layer 1 east-flowing: gliding down while heading
        # east rides the destination flow two cells east.
        g = geometry(7, 7, layers=2)
        u = np.zeros((2, 7, 7))
        u[1] = 0.5
        f = FlowField(geometry=g, u=u, v=np.zeros((2, 7, 7)), land=np.zeros((2, 7, 7), bool))
        lat = Lattice(f)
        out = _outcome(f, State(1, 3, 0, 0), Action.DOWN)
        assert out.nominal == lat.encode(State(3, 3, 1, 0))
        # and gliding up from the moving layer into still water stays put
        out_up = _outcome(f, State(1, 3, 1, 0), Action.UP)
        assert out_up.members == (lat.encode(State(1, 3, 0, 0)),)

    def test_glide_onto_land_column_redirects(self):
        g = geometry(3, 1, layers=2)
        land = np.zeros((2, 1, 3), bool)
        land[1, 0, 1] = True  # column blocked on the lower layer
        f = FlowField(geometry=g, u=np.zeros((2, 1, 3)), v=np.zeros((2, 1, 3)), land=land)
        lat = Lattice(f)
        out = _outcome(f, State(1, 0, 0, 0), Action.DOWN)
        # ties between free cells 0 and 2 resolve to the smaller column
        assert out.nominal == lat.encode(State(0, 0, 1, 0))

    def test_glide_onto_all_land_layer_unavailable(self):
        g = geometry(2, 1, layers=2)
        land = np.zeros((2, 1, 2), bool)
        land[1] = True
        f = FlowField(geometry=g, u=np.zeros((2, 1, 2)), v=np.zeros((2, 1, 2)), land=land)
        with pytest.raises(ActionUnavailable):
            _outcome(f, State(0, 0, 0, 0), Action.DOWN)

    def test_forward_pinned_against_wall_unavailable(self):
        f = still_field(3, 3)
        with pytest.raises(ActionUnavailable):
            _outcome(f, State(2, 1, 0, 0), Action.FORWARD)  # east wall, heading east

    def test_forward_single_cell_grid_has_no_forward(self):
        f = still_field(1, 1)
        acts = [a for a, _ in available_actions(State(0, 0, 0, 0), f, 1000.0)]
        assert acts == [Action.DRIFT, Action.ROTATE_LEFT, Action.ROTATE_RIGHT]

    def test_forward_with_current_moves_two_cells(self):
        # s = 0 grants the forward action two cells as well.
        f = uniform_east(speed=0.5)
        lat = Lattice(f)
        out = _outcome(f, State(1, 3, 0, 0), Action.FORWARD)
        assert out.nominal == lat.encode(State(3, 3, 0, 0))

    def test_forward_against_current_still_makes_way_by_default(self):
        f = uniform_east(speed=0.5)
        lat = Lattice(f)
        out = _outcome(f, State(3, 3, 0, 4), Action.FORWARD)  # heading west, s = 1
        assert out.nominal == lat.encode(State(2, 3, 0, 4))

    def test_forward_strict_paper_mode_suppressed_when_opposed(self):
        f = uniform_east(speed=0.5)
        with pytest.raises(ActionUnavailable):
            _outcome(f, State(3, 3, 0, 4), Action.FORWARD, strict=True)

    def test_forward_strict_mode_still_water_moves_one(self):
        f = still_field()
        lat = Lattice(f)
        out = _outcome(f, State(2, 2, 0, 0), Action.FORWARD, strict=True)
        assert out.nominal == lat.encode(State(3, 2, 0, 0))

    def test_dispersal_off_gives_singletons(self):
        f = uniform_east(speed=0.5)
        for a in (Action.DRIFT, Action.FORWARD):
            out = _outcome(f, State(1, 3, 0, 0), a, dispersal=False)
            assert out.members == (out.nominal,)

    def test_rotations_never_disperse(self):
        f = uniform_east(speed=0.5)
        out = _outcome(f, State(1, 3, 0, 0), Action.ROTATE_LEFT)
        assert len(out.members) == 1

    @given(seed=st.integers(0, 80), h=st.integers(0, 7))
    @settings(max_examples=40, deadline=None)
    def test_members_always_valid_free_states(self, seed, h):
        f = random_field(seed, layers=2)
        lat = Lattice(f)
        g = f.geometry
        for layer in range(g.num_layers):
            for iy in range(g.ny):
                for ix in range(g.nx):
                    if f.land[layer, iy, ix]:
                        continue
                    for action, out in available_actions(State(ix, iy, layer, h), f, 900.0):
                        for m in out.members:
                            s = lat.decode(m)
                            assert f.is_free(s.ix, s.iy, s.layer)
                            if action in (Action.ROTATE_LEFT, Action.ROTATE_RIGHT):
                                assert (s.ix, s.iy, s.layer) == (ix, iy, layer)
                            elif action in (Action.UP, Action.DOWN):
                                assert abs(s.layer - layer) == 1
                            else:
                                assert s.heading == h
