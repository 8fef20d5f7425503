import numpy as np
import pytest

from memdrift import config as cf


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def build_desk(overrides: dict | None = None):
    """Default desk-scale simulation objects; overrides use config syntax."""
    cfg = cf.load_config(None, environ={}, overrides=overrides or {})
    return cf.build_simulation(cfg)


@pytest.fixture(scope="session")
def desk_1d():
    """Table-default 1D device: 200 cells, Schottky contacts."""
    mesh, dev, grid, settings, t_final, outputs = build_desk()
    return mesh, dev, settings


@pytest.fixture(scope="session")
def tiny_1d():
    """Small 1D device for dense finite-difference work."""
    mesh, dev, grid, settings, t_final, outputs = build_desk(
        {"geometry": {"nx": "24"}}
    )
    return mesh, dev, settings


@pytest.fixture(scope="session")
def tiny_1d_ohmic():
    mesh, dev, grid, settings, t_final, outputs = build_desk(
        {"geometry": {"nx": "24"}, "contacts": {"model": "ohmic"}}
    )
    return mesh, dev, settings
