import pytest

from ksenergy import EnergyConfig, build_grid, make_map, make_space


@pytest.fixture(scope="session")
def unit_grid_32():
    return build_grid([0.0, 0.0], [1.0, 1.0], [32, 32])


@pytest.fixture(scope="session")
def unit_grid_16():
    return build_grid([0.0, 0.0], [1.0, 1.0], [16, 16])


@pytest.fixture(scope="session")
def cfg_small():
    # light settings for unit tests; acceptance runs use the defaults
    return EnergyConfig(dense_count=256, sphere_order=128, ball_order=(12, 96), h_count=4)


def catalog(domain_dim=2):
    """The standard map/space combinations exercised across the suite."""
    entries = [
        ("identity", "euclidean:2"),
        ("linear:1,0;0,2", "euclidean:2"),
        ("identity", "max_norm_plane"),
        ("winding:2", "circle"),
        ("qsplit", "q:2:1"),
    ]
    out = []
    for map_spec, space_spec in entries:
        space = make_space(space_spec)
        out.append((map_spec, space_spec, make_map(map_spec, space, domain_dim)))
    return out
