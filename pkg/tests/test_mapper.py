import math

import numpy as np
import pytest

from conftest import room_config
from oracles import segment_cell_intersections
from uncmap.estimators import ErrorModel, OracleEstimator
from uncmap.grid import GridGeometry, raycast_cells, raycast_cells_direction
from uncmap.mapper import (L_MAX, O_FLOOR, O_FREE, LogOddsMap,
                           build_uncertainty_map, cell_occupancy, integrate_scan,
                           read_probability_csv, to_log_odds, to_probability, write_pgm,
                           write_probability_csv)
from uncmap.sensor_models import U_MIN, occupancy_h
from uncmap.world import Obstacle, Pose2D, build_world, simulate_scan


class TestRaycast:
    def test_axis_aligned_ray_from_cell_center(self):
        geom = GridGeometry(8, 8, 1.0)
        cells = raycast_cells(geom, 2.5, 2.5, 0.0, 3.0)
        assert [tuple(c) for c in cells] == [(2, 2), (3, 2), (4, 2), (5, 2)]

    def test_exact_diagonal_steps_through_corners(self):
        geom = GridGeometry(8, 8, 1.0)
        d = math.sqrt(0.5)
        cells = raycast_cells_direction(geom, 2.5, 2.5, d, d, 3.0)
        got = [tuple(c) for c in cells]
        assert got == [(2, 2), (3, 3), (4, 4)]
        assert got == segment_cell_intersections(geom, 2.5, 2.5, d, d, 3.0)

    def test_sub_cell_ray_is_single_cell(self):
        geom = GridGeometry(8, 8, 1.0)
        cells = raycast_cells(geom, 2.5, 2.5, 1.0, 0.3)
        assert [tuple(c) for c in cells] == [(2, 2)]

    def test_truncated_at_grid_boundary(self):
        geom = GridGeometry(8, 8, 1.0)
        cells = raycast_cells(geom, 6.5, 2.5, 0.0, 50.0)
        assert [tuple(c) for c in cells] == [(6, 2), (7, 2)]

    def test_origin_outside_grid_rejected(self):
        geom = GridGeometry(8, 8, 1.0)
        with pytest.raises(ValueError):
            raycast_cells(geom, -1.0, 2.0, 0.0, 3.0)
        with pytest.raises(ValueError):
            raycast_cells(geom, 1.0, 2.0, 0.0, 0.0)

    def test_matches_brute_force_oracle_on_random_rays(self):
        geom = GridGeometry(32, 32, 0.5)
        rng = np.random.default_rng(21)
        for _ in range(150):
            x0 = rng.uniform(0.3, 15.7)
            y0 = rng.uniform(0.3, 15.7)
            ang = rng.uniform(0, 2 * math.pi)
            stop = rng.uniform(0.2, 20.0)
            got = [tuple(map(int, c)) for c in raycast_cells(geom, x0, y0, ang, stop)]
            dx, dy = math.cos(ang), math.sin(ang)
            assert got == segment_cell_intersections(geom, x0, y0, dx, dy, stop)

    def test_first_row_contains_start_and_path_is_connected(self):
        geom = GridGeometry(64, 64, 0.25)
        rng = np.random.default_rng(2)
        for _ in range(50):
            x0 = rng.uniform(1, 15)
            y0 = rng.uniform(1, 15)
            cells = raycast_cells(geom, x0, y0, rng.uniform(0, 2 * math.pi),
                                  rng.uniform(0.5, 10))
            assert tuple(cells[0]) == geom.world_to_cell(x0, y0)
            steps = np.abs(np.diff(cells, axis=0))
            assert np.all(steps.max(axis=1) == 1)


class TestIntegrateScan:
    def geometry(self):
        return GridGeometry(40, 40, 0.25)

    def test_cell_at_estimated_surface_is_unchanged(self, spline16):
        # pose at a cell center, ray along +x: cell centers on the ray sit
        # at exact multiples of the resolution
        lmap = LogOddsMap(self.geometry())
        pose = Pose2D(1.125, 5.125, 0.0)
        d_surface = 2.0  # cell 8 steps away
        y = np.array([d_surface])
        u = np.array([0.5])
        integrate_scan(lmap, pose, y, u, spline16, alpha=0.01, fov=2 * math.pi)
        ix, iy = lmap.geometry.world_to_cell(pose.x + d_surface, pose.y)
        assert lmap.data[iy, ix] == 0.0
        # cells in front accumulated free evidence
        assert lmap.data[iy, ix - 4] < 0.0

    def test_far_in_front_uses_occupancy_floor(self, spline16):
        lmap = LogOddsMap(self.geometry())
        pose = Pose2D(1.125, 5.125, 0.0)
        integrate_scan(lmap, pose, np.array([6.0]), np.array([0.1]), spline16,
                       alpha=0.01)
        ix, iy = lmap.geometry.world_to_cell(pose.x + 1.0, pose.y)  # t = -50
        expected = 0.01 * math.log(O_FLOOR / (1.0 - O_FLOOR))
        assert lmap.data[iy, ix] == pytest.approx(expected, abs=1e-15)
        assert expected == pytest.approx(-0.0691, abs=1e-4)

    def test_increment_consistent_with_occupancy_curve(self, spline16):
        lmap = LogOddsMap(self.geometry())
        pose = Pose2D(1.125, 5.125, 0.0)
        u = 0.5
        d_cell = 3.0            # exact cell center distance along the ray
        y = d_cell - 2.0 * u    # puts the probe cell at t = +2
        integrate_scan(lmap, pose, np.array([y]), np.array([u]), spline16, alpha=0.01)
        ix, iy = lmap.geometry.world_to_cell(pose.x + d_cell, pose.y)
        o = np.clip(occupancy_h(spline16, 2.0), O_FLOOR, 1 - O_FLOOR)
        assert o == cell_occupancy(spline16, d_cell, y, u)
        assert abs(lmap.data[iy, ix] - 0.01 * math.log(o / (1 - o))) < 1e-12

    def test_max_range_ray_writes_free_evidence_only(self, spline16):
        geom = self.geometry()
        lmap = LogOddsMap(geom)
        pose = Pose2D(1.125, 5.125, 0.0)
        integrate_scan(lmap, pose, np.array([8.0]), np.array([0.2]), spline16,
                       alpha=0.01, max_range=8.0)
        expected = 0.01 * math.log(O_FREE / (1.0 - O_FREE))
        touched = lmap.data[lmap.data != 0.0]
        assert touched.size > 0
        np.testing.assert_allclose(touched, expected, rtol=1e-12)

    def test_two_scan_alpha_additivity_is_exact(self, spline16):
        # single-ray scans touch every cell once per scan, so doubling the
        # scan is bit-for-bit the same as doubling alpha
        pose = Pose2D(1.125, 5.125, 0.3)
        y = np.array([2.0])
        u = np.array([0.3])
        twice = LogOddsMap(self.geometry())
        for _ in range(2):
            integrate_scan(twice, pose, y, u, spline16, alpha=0.01)
        once = LogOddsMap(self.geometry())
        integrate_scan(once, pose, y, u, spline16, alpha=0.02)
        np.testing.assert_array_equal(twice.data, once.data)

    def test_repeated_scan_alpha_additivity_close(self, spline16):
        pose = Pose2D(1.125, 5.125, 0.3)
        y = np.array([2.0, 3.0])
        u = np.array([0.3, 0.2])
        k = 5
        many = LogOddsMap(self.geometry())
        for _ in range(k):
            integrate_scan(many, pose, y, u, spline16, alpha=0.002)
        one = LogOddsMap(self.geometry())
        integrate_scan(one, pose, y, u, spline16, alpha=k * 0.002)
        np.testing.assert_allclose(many.data, one.data, atol=1e-15)

    def test_scan_order_permutation_invariance(self, spline16):
        rng = np.random.default_rng(6)
        scans = []
        for _ in range(6):
            pose = Pose2D(rng.uniform(2, 8), rng.uniform(2, 8), rng.uniform(0, 6.28))
            y = rng.uniform(0.5, 4.0, size=16)
            u = rng.uniform(0.05, 0.5, size=16)
            scans.append((pose, y, u))
        maps = []
        for order in (range(6), reversed(range(6)), [3, 1, 5, 0, 4, 2]):
            lmap = LogOddsMap(self.geometry())
            for i in order:
                pose, y, u = scans[i]
                integrate_scan(lmap, pose, y, u, spline16, alpha=0.01)
            maps.append(lmap.data.copy())
        assert np.max(np.abs(maps[0] - maps[1])) <= 1e-9
        assert np.max(np.abs(maps[0] - maps[2])) <= 1e-9

    def test_all_front_scan_never_increases(self, spline16):
        lmap = LogOddsMap(self.geometry())
        rng = np.random.default_rng(1)
        lmap.data[:] = rng.normal(0, 1, size=lmap.data.shape)
        before = lmap.data.copy()
        pose = Pose2D(5.0, 5.0, 0.0)
        # estimates far beyond every traversed cell: t <= -4 throughout
        integrate_scan(lmap, pose, np.full(32, 50.0), np.full(32, 0.1), spline16,
                       alpha=0.01)
        assert np.all(lmap.data <= before + 1e-15)

    def test_occupied_band_thickness_with_floor_uncertainty(self, spline16):
        lmap = LogOddsMap(self.geometry())
        pose = Pose2D(1.125, 5.125, 0.0)
        y_est = 4.0
        integrate_scan(lmap, pose, np.array([y_est]), np.array([U_MIN]), spline16,
                       alpha=0.01)
        iy = 20
        positive = np.nonzero(lmap.data[iy] > 0)[0]
        res = lmap.geometry.resolution
        if positive.size:
            d = (positive + 0.5) * res - pose.x
            assert d.min() >= y_est - 2 * res
            assert d.max() <= y_est + 8 * U_MIN + 2 * res

    def test_input_validation(self, spline16):
        lmap = LogOddsMap(self.geometry())
        pose = Pose2D(5.0, 5.0, 0.0)
        with pytest.raises(ValueError):
            integrate_scan(lmap, pose, np.ones(3), np.ones(2), spline16)
        with pytest.raises(ValueError):
            integrate_scan(lmap, pose, np.array([np.inf]), np.ones(1), spline16)
        with pytest.raises(ValueError):
            integrate_scan(lmap, pose, np.ones(1), np.ones(1), spline16, alpha=0.0)


class TestMapBuilding:
    def test_zero_scans_gives_uniform_half(self, spline16):
        geom = GridGeometry(10, 10, 0.5)
        prob = build_uncertainty_map([], [], lambda x, p: None, spline16, geom)
        np.testing.assert_array_equal(prob, np.full((10, 10), 0.5))

    def test_mismatched_inputs_rejected(self, spline16):
        geom = GridGeometry(10, 10, 0.5)
        with pytest.raises(ValueError):
            build_uncertainty_map([Pose2D(1, 1, 0)], [], lambda x, p: None, spline16, geom)

    def test_wall_world_map_marks_wall_and_free(self, spline16):
        wall = Obstacle.rect(4.0, 0.0, 4.3, 6.0, (0.0, 2.0), name="wall")
        world = build_world(room_config(obstacles=[wall], n_rays=64))
        est = OracleEstimator(world, ErrorModel("laplace", 0.05, 0.05),
                              np.random.default_rng(0))
        rng = np.random.default_rng(1)
        ys = np.linspace(1.0, 5.0, 100)
        poses = [Pose2D(3.4, float(y), 0.0) for y in ys]
        scans = [simulate_scan(world, p, 0.01, rng) for p in poses]
        prob = build_uncertainty_map(poses, scans, est, spline16, world.geometry,
                                     alpha=0.01, max_range=world.config.max_range)
        # the patrol corridor in front of the wall reads free
        free = prob[30:90, 56:66]
        assert free.mean() < 0.1
        # the band just behind the wall face accumulates occupancy
        band = prob[40:80, 81:86]
        assert band.max() > 0.65

    def test_resolution_halving_is_stable_in_smooth_regions(self, spline16):
        wall = Obstacle.rect(4.0, 0.0, 4.3, 6.0, (0.0, 2.0), name="wall")
        probs = {}
        for res in (0.05, 0.025):
            world = build_world(room_config(obstacles=[wall], n_rays=64,
                                            resolution=res))
            est = OracleEstimator(world, ErrorModel("laplace", 0.05, 0.05),
                                  np.random.default_rng(0))
            rng = np.random.default_rng(1)
            poses = [Pose2D(3.4, float(y), 0.0) for y in np.linspace(1.0, 5.0, 150)]
            scans = [simulate_scan(world, p, 0.0, rng) for p in poses]
            prob = build_uncertainty_map(poses, scans, est, spline16, world.geometry,
                                         alpha=0.01, max_range=world.config.max_range)
            geom = world.geometry
            # probe points where evidence has converged: the saturated free
            # corridor between patrol and wall, and unobserved space (cells
            # with partial coverage scale their evidence with cell size)
            pts = [(3.7, 3.0), (3.7, 2.0), (6.5, 3.0), (5.5, 1.0)]
            probs[res] = [prob[geom.world_to_cell(x, y)[1], geom.world_to_cell(x, y)[0]]
                          for x, y in pts]
        for a, b in zip(probs[0.05], probs[0.025]):
            assert abs(a - b) <= 0.1

    def test_probability_read_out_is_clamped(self):
        geom = GridGeometry(4, 4, 1.0)
        lmap = LogOddsMap(geom)
        lmap.data[0, 0] = 1000.0
        lmap.data[1, 1] = -1000.0
        prob = lmap.probability()
        assert prob[0, 0] == to_probability(L_MAX) < 1.0
        assert prob[1, 1] == to_probability(-L_MAX) > 0.0
        assert prob[2, 2] == 0.5


class TestConversions:
    def test_logistic_anchors(self):
        assert to_probability(0.0) == 0.5
        assert to_probability(13.8) == pytest.approx(1.0 / (1.0 + math.exp(-13.8)))
        assert to_probability(13.8) < 1.0

    def test_logit_roundtrip(self):
        for o in (0.1, 0.5, 0.9):
            assert to_probability(to_log_odds(o)) == pytest.approx(o, abs=1e-12)


class TestExports:
    def test_pgm_layout_and_thresholds(self, tmp_path):
        geom = GridGeometry(3, 2, 0.5)
        prob = np.array([[0.9, 0.5, 0.1],
                         [0.05, 0.7, 0.5]])
        path = tmp_path / "map.pgm"
        write_pgm(prob, geom, path)
        raw = path.read_bytes()
        header, rest = raw.split(b"\n", 1)
        assert header == b"P5"
        dims, rest = rest.split(b"\n", 1)
        assert dims == b"3 2"
        maxval, data = rest.split(b"\n", 1)
        assert maxval == b"255" and len(data) == 6
        # top row of the image is the highest-y row of the grid
        assert list(data[:3]) == [254, 0, 205]
        assert list(data[3:]) == [0, 205, 254]
        sidecar = (tmp_path / "map.yaml").read_text()
        assert "resolution: 0.5" in sidecar
        assert "occupied_thresh: 0.65" in sidecar
        assert "image: map.pgm" in sidecar

    def test_probability_csv_roundtrip_is_lossless(self, tmp_path):
        rng = np.random.default_rng(0)
        prob = rng.uniform(0, 1, size=(7, 5))
        path = tmp_path / "map.csv"
        write_probability_csv(prob, path)
        np.testing.assert_array_equal(read_probability_csv(path), prob)
