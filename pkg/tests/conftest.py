import os
import time

import numpy as np
import pytest

from ssgnav.nav import Environment
from ssgnav.pointcloud import PointCloud
from ssgnav.ssg import build_ssg
from ssgnav.synthetic import apartment_layout, hall_layout, make_scene, two_room_layout

_ACCEPTANCE = {}
SESSION_START = time.monotonic()


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): one top-level acceptance criterion")
    config.addinivalue_line("markers", "run_last: run after every other collected test")


def pytest_collection_modifyitems(items):
    # tests marked run_last see (almost) the whole session's elapsed time
    items.sort(key=lambda item: item.get_closest_marker("run_last") is not None)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    key = (marker.args[0], marker.args[1])
    if report.when == "call" or (report.when == "setup" and report.failed):
        _ACCEPTANCE[key] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for (num, title), verdict in sorted(_ACCEPTANCE.items()):
        terminalreporter.write_line(f"[{verdict}] criterion {num}: {title}")


class Scene:
    """A synthetic layout plus the scene graph built from its point cloud."""

    def __init__(self, spec):
        self.spec = spec
        self.synthetic = make_scene(spec)
        self.graph, self.annotation_result = build_ssg(self.synthetic.cloud, self.synthetic.annotations)
        self.nav = self.synthetic.nav
        self.episodes = self.synthetic.episodes

    def env(self, **kw):
        return Environment(self.graph, self.nav, **kw)


@pytest.fixture(scope="session")
def two_room():
    return Scene(two_room_layout())


@pytest.fixture(scope="session")
def hall():
    return Scene(hall_layout())


@pytest.fixture(scope="session")
def apartment():
    return Scene(apartment_layout())


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def gaussian_slab_cloud(rng, modes, n=10_000, sigma=0.02, extent=6.0):
    pts = []
    for z in modes:
        xy = rng.uniform(0, extent, size=(n, 2))
        pts.append(np.column_stack([xy, rng.normal(z, sigma, n)]))
    return PointCloud(np.concatenate(pts))


@pytest.fixture
def slab_cloud():
    return gaussian_slab_cloud


def run_cli(*args):
    from ssgnav.cli import main

    return main([str(a) for a in args])


@pytest.fixture
def cli():
    return run_cli


@pytest.fixture
def chdir_tmp(tmp_path):
    old = os.getcwd()
    os.chdir(tmp_path)
    yield tmp_path
    os.chdir(old)
