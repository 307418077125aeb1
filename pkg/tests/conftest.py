import numpy as np
import pytest

from poynting.mesh import apply_pec_mask, unpack_edge, unpack_face


def random_edge(g, rng, conforming=True):
    e = unpack_edge(rng.standard_normal(g.num_edge_dofs), g)
    if conforming:
        apply_pec_mask(e)
    return e


def random_face(g, rng):
    return unpack_face(rng.standard_normal(g.num_face_dofs), g)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
