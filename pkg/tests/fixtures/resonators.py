import pytest

from pyxbar.designfile import load_resonator
from pyxbar.data import data_path
from pyxbar.resonator import MbvdParams, MotionalBranch


@pytest.fixture
def resonator(request):
    return request.getfixturevalue(request.param)


@pytest.fixture
def resonator_a():
    """Arm A of the bundled direct lattice, f_s near 15.75 GHz"""
    return MbvdParams(
        c0=1.4624e-13,
        r0=0.5,
        rs=0.5,
        ls=5e-12,
        branches=(MotionalBranch(rm=0.4607, lm=1.39651e-9, cm=7.312e-14, mode="S2"),),
    )


@pytest.fixture
def resonator_b():
    """Arm B of the bundled direct lattice, f_s near 19.3 GHz"""
    return MbvdParams(
        c0=1.4624e-13,
        r0=0.5,
        rs=0.5,
        ls=5e-12,
        branches=(MotionalBranch(rm=0.3761, lm=9.3102e-10, cm=7.312e-14, mode="S2"),),
    )


@pytest.fixture
def lossless_a(resonator_a):
    b = resonator_a.branches[0]
    return MbvdParams(c0=resonator_a.c0, branches=(MotionalBranch(rm=0.0, lm=b.lm, cm=b.cm, mode="S2"),))


@pytest.fixture
def lossless_b(resonator_b):
    b = resonator_b.branches[0]
    return MbvdParams(c0=resonator_b.c0, branches=(MotionalBranch(rm=0.0, lm=b.lm, cm=b.cm, mode="S2"),))


@pytest.fixture
def single_branch_resonator():
    """20 GHz, Q near 200, C_m/C_0 = 0.3"""
    return MbvdParams(
        c0=1e-13,
        r0=0.5,
        rs=0.5,
        ls=5e-12,
        branches=(MotionalBranch(rm=1.3263, lm=2.1109e-9, cm=3e-14, mode="S2"),),
    )


@pytest.fixture
def three_mode_resonator():
    return load_resonator(data_path("three_mode_resonator.json"))


@pytest.fixture
def spur_a1():
    """Spurious A1 mode at 11 GHz, Q 100"""
    return MotionalBranch(rm=32.98, lm=4.7717e-8, cm=4.387e-15, mode="A1")


@pytest.fixture
def spur_a3():
    """Spurious A3 mode at 26.8 GHz"""
    return MotionalBranch(rm=20.30, lm=1.2058e-8, cm=2.9248e-15, mode="A3")
