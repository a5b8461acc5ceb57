import dataclasses

import numpy as np
import pytest
from scipy.signal import find_peaks

from pyxbar.errors import DuplicateResonance, PyxbarValidationError
from pyxbar.resonator import (
    MbvdParams,
    ModeFamily,
    ModeLabel,
    MotionalBranch,
    ResonatorGeometry,
    add_spur,
    admittance,
    antiresonance,
    branch_q,
    coupling,
    geometry_scale_factor,
    scale,
    scale_to_geometry,
    series_resonance,
    summary,
)


@pytest.fixture
def geometry():
    return ResonatorGeometry(n_e=10, l_e=40e-6, w_e=1e-6, w_g=2e-6)


def test_series_resonance_and_q(resonator_a):
    b = resonator_a.branches[0]
    assert series_resonance(b) == pytest.approx(15.75e9, rel=1e-3)
    assert b.fs == series_resonance(b)
    assert branch_q(b) == pytest.approx(300.0, rel=1e-3)


def test_lossless_branch_has_infinite_q(lossless_a):
    assert branch_q(lossless_a.branches[0]) == np.inf


def test_isolated_lossless_antiresonance(lossless_a):
    b = lossless_a.branches[0]
    assert antiresonance(lossless_a, 0) == pytest.approx(b.fs * np.sqrt(1.5), rel=1e-12)
    assert coupling(lossless_a, 0) == pytest.approx(1 / 3, rel=1e-12)


def test_lossy_antiresonance_is_a_zero_of_the_susceptance(resonator_a):
    fp = antiresonance(resonator_a, 0)
    seed = resonator_a.branches[0].fs * np.sqrt(1.5)
    assert fp == pytest.approx(seed, rel=0.01)
    assert abs(np.imag(admittance(resonator_a, fp))) < 1e-6 * abs(admittance(resonator_a, 0.9 * fp))


def test_three_mode_antiresonances(three_mode_resonator):
    fs = [b.fs for b in three_mode_resonator.branches]
    np.testing.assert_allclose(fs, [10e9, 18e9, 27e9], rtol=1e-4)
    for i, f in enumerate(fs):
        assert antiresonance(three_mode_resonator, i) > f


def test_admittance_is_finite_at_lossless_series_resonance(lossless_a):
    y = admittance(lossless_a, lossless_a.branches[0].fs)
    assert np.isfinite(y)
    assert abs(y) > 1e3


def test_admittance_broadcasts(resonator_a):
    f = np.linspace(1e10, 3e10, 11)
    y = admittance(resonator_a, f)
    assert y.shape == (11,)
    assert np.all(y.real > 0)
    assert isinstance(admittance(resonator_a, 2e10), complex)



def _lossless(p):
    branches = tuple(dataclasses.replace(b, rm=0.0) for b in p.branches)
    return dataclasses.replace(p, r0=0.0, rs=0.0, ls=0.0, branches=branches)


@pytest.mark.parametrize("lossy", [False, True])
def test_resonances_and_antiresonances_interlace(three_mode_resonator, lossy):
    p = three_mode_resonator if lossy else _lossless(three_mode_resonator)
    edges = []
    for i, b in enumerate(p.branches):
        edges += [series_resonance(b), antiresonance(p, i)]
    assert edges == sorted(edges)
    assert len(set(edges)) == len(edges)


def test_lossless_susceptance_rises_between_poles(three_mode_resonator):
    p = _lossless(three_mode_resonator)
    poles = [series_resonance(b) for b in p.branches]
    for lo, hi in zip([1e9] + poles, poles + [40e9]):
        f = np.linspace(lo, hi, 2002)[1:-1]
        b = np.imag(admittance(p, f))
        assert np.all(np.abs(admittance(p, f).real) <= 1e-12 * np.abs(b))
        assert np.all(np.diff(b) > 0)


@pytest.mark.parametrize("resonator", ["resonator_a", "resonator_b", "three_mode_resonator", "single_branch_resonator"])
def test_lossy_resonators_absorb_power(resonator, request):
    p = request.getfixturevalue(resonator)
    f = np.geomspace(1e8, 1e11, 20001)
    y = admittance(p, f)
    assert np.all(y.real >= -1e-12 * np.abs(y))
    y = admittance(add_spur(p, MotionalBranch(rm=5.0, lm=3e-8, cm=4e-15, mode="A1")), f)
    assert np.all(y.real >= -1e-12 * np.abs(y))


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.5])
def test_scale_multiplies_admittance(resonator_a, alpha):
    f = np.linspace(1e10, 3e10, 101)
    scaled = scale(resonator_a, alpha)
    np.testing.assert_allclose(admittance(scaled, f), alpha * admittance(resonator_a, f), rtol=1e-12)
    assert scaled.branches[0].fs == pytest.approx(resonator_a.branches[0].fs, rel=1e-14)


def test_scale_drops_geometry_unless_identity(resonator_a, geometry):
    p = dataclasses.replace(resonator_a, geometry=geometry)
    assert scale(p, 1.0).geometry == geometry
    assert scale(p, 2.0).geometry is None


def test_scale_rejects_non_positive(resonator_a):
    with pytest.raises(PyxbarValidationError):
        scale(resonator_a, 0.0)


def test_scale_to_geometry(resonator_a, geometry):
    p = dataclasses.replace(resonator_a, geometry=geometry)
    twice = dataclasses.replace(geometry, n_e=20)
    assert geometry_scale_factor(geometry, twice) == pytest.approx(2.0)
    scaled = scale_to_geometry(p, twice)
    assert scaled.geometry == twice
    assert scaled.c0 == pytest.approx(2 * p.c0)
    with pytest.raises(PyxbarValidationError):
        scale_to_geometry(resonator_a, twice)


def test_geometry_area_and_pitch(geometry):
    assert geometry.pitch == pytest.approx(3e-6)
    assert geometry.area == pytest.approx(10 * 3e-6 * 40e-6)


def test_geometry_pitch_must_be_consistent():
    with pytest.raises(PyxbarValidationError):
        ResonatorGeometry.from_dict({"n_e": 10, "l_e": 40e-6, "w_e": 1e-6, "w_g": 2e-6, "pitch": 4e-6})


def test_branches_closer_than_a_permille_are_rejected(resonator_a):
    b = resonator_a.branches[0]
    twin = MotionalBranch(rm=b.rm, lm=b.lm * 1.001, cm=b.cm, mode="A1")
    with pytest.raises(DuplicateResonance):
        add_spur(resonator_a, twin)


def test_add_spur(resonator_a, spur_a1):
    p = add_spur(resonator_a, spur_a1)
    assert p.n_branches == 2
    assert str(p.branches[1].mode) == "A1"


def test_spur_adds_an_admittance_peak_at_its_resonance(resonator_a, spur_a1):
    f = np.linspace(9e9, 13e9, 4001)
    clean = np.abs(admittance(resonator_a, f))
    spurious = np.abs(admittance(add_spur(resonator_a, spur_a1), f))

    peaks, _ = find_peaks(spurious)
    assert find_peaks(clean)[0].size == 0
    assert peaks.size == 1
    assert f[peaks[0]] == pytest.approx(spur_a1.fs, rel=0.01)
    assert spurious[peaks[0]] > 1.5 * clean[peaks[0]]


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(c0=0.0),
        dict(r0=-1.0),
        dict(branches=()),
    ],
)
def test_invalid_parameters(resonator_a, kwargs):
    with pytest.raises(PyxbarValidationError):
        dataclasses.replace(resonator_a, **kwargs)


def test_invalid_branch():
    with pytest.raises(PyxbarValidationError):
        MotionalBranch(rm=1.0, lm=0.0, cm=1e-14)
    with pytest.raises(PyxbarValidationError):
        MotionalBranch(rm=-1.0, lm=1e-9, cm=1e-14)


@pytest.mark.parametrize(
    "label, family, order",
    [("S2", ModeFamily.SYMMETRIC, 2), ("a1", ModeFamily.ANTISYMMETRIC, 1), (" A3 ", ModeFamily.ANTISYMMETRIC, 3)],
)
def test_mode_labels(label, family, order):
    mode = ModeLabel.parse(label)
    assert (mode.family, mode.order) == (family, order)
    assert str(mode) == f"{family.value}{order}"


@pytest.mark.parametrize("label", ["X1", "S", "S0", ""])
def test_bad_mode_labels(label):
    with pytest.raises(PyxbarValidationError):
        ModeLabel.parse(label)


def test_dict_round_trip_keeps_geometry(resonator_a, geometry):
    p = dataclasses.replace(resonator_a, geometry=geometry)
    assert MbvdParams.from_dict(p.to_dict()) == p


def test_summary(three_mode_resonator):
    df = summary(three_mode_resonator)
    assert list(df["mode"]) == ["A1", "S2", "A3"]
    np.testing.assert_allclose(df["q"], [200, 500, 300], rtol=1e-3)
    assert (df["k2"] > 0).all()
