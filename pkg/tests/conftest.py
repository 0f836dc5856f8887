import pytest

from uncmap.sensor_models import derive_spline
from uncmap.world import Obstacle, WorldConfig, build_world


@pytest.fixture(scope="session")
def spline16():
    return derive_spline(16, 512)


def room_config(width=8.0, height=6.0, obstacles=(), n_rays=128, resolution=0.05,
                max_range=8.0, scan_height=0.25, robot_height=1.4):
    return WorldConfig(width=width, height=height, resolution=resolution,
                       robot_height=robot_height, scan_height=scan_height,
                       max_range=max_range, n_rays=n_rays, obstacles=list(obstacles))


@pytest.fixture(scope="session")
def glass_before_solid_world():
    """Glass wall 2 m ahead of the probe pose, solid wall 3 m behind it."""
    obstacles = [
        Obstacle.rect(4.0, 0.0, 4.2, 6.0, (0.0, 2.0), laser_visible=False, name="glass"),
        Obstacle.rect(7.0, 0.0, 7.2, 6.0, (0.0, 2.0), name="solid"),
    ]
    return build_world(room_config(obstacles=obstacles))
