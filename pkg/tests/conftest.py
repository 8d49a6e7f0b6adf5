import numpy as np
import pytest

import gcsurf as g


@pytest.fixture(scope="session")
def c60():
    return g.generate_c60(1.0)


@pytest.fixture(scope="session")
def hexpatch1():
    return g.generate_hex_patch(1)


@pytest.fixture(scope="session")
def hexpatch2():
    return g.generate_hex_patch(2)


@pytest.fixture(scope="session")
def k4_chunk_emb():
    return g.k4_chunk(1)


@pytest.fixture(scope="session")
def mackay():
    return g.mackay_patch()


def central_face(graph):
    """A face all of whose vertices are interior (unique for small patches)."""
    for fid, f in enumerate(graph.faces):
        if all(v in graph.interior for v in f):
            return fid
    raise AssertionError("no fully interior face")


def dense_cyclic_matrix(n):
    """The matrix 3I - T - T^t materialized densely (test-side oracle only)."""
    T = np.roll(np.eye(n), 1, axis=1)
    return 3 * np.eye(n) - T - T.T
