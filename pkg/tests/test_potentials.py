import numpy as np
import pytest

from otoclab.potentials import (
    DoubleWell,
    EckartAsymmetric,
    EckartSymmetric,
    Harmonic,
    InvertedParabola,
    NoBarrierError,
    Quartic2D,
    ScatteringWell,
    barrier_frequency,
    evaluate,
    make_potential,
)


def sample_models():
    return [
        Harmonic(mass=1.0, omega=1.3),
        InvertedParabola(mass=0.7, omega_b=2.1),
        DoubleWell(mass=0.5, g=0.08, lam=2.0),
        ScatteringWell(mass=0.5, g=0.08, lam=2.0),
        EckartSymmetric(mass=1.0, v0=18 / np.pi**2, a=1.0),
        EckartAsymmetric(mass=1.0, A=-18 / np.pi**2, B=54 / np.pi**2,
                         a=8 / (np.sqrt(3.0) * np.pi)),
        Quartic2D(mass=1.0, a=0.1, b=10.0),
    ]


def finite_difference_gradient(model, q, h=1e-5):
    g = np.zeros_like(q)
    for i in range(q.shape[-1]):
        qp, qm = q.copy(), q.copy()
        qp[..., i] += h
        qm[..., i] -= h
        g[..., i] = (model.value(qp) - model.value(qm)) / (2 * h)
    return g


def finite_difference_hessian(model, q, h=1e-5):
    d = q.shape[-1]
    hess = np.zeros(q.shape + (d,))
    for i in range(d):
        qp, qm = q.copy(), q.copy()
        qp[..., i] += h
        qm[..., i] -= h
        hess[..., i, :] = (model.gradient(qp) - model.gradient(qm)) / (2 * h)
    return hess


@pytest.mark.parametrize("model", sample_models(), ids=lambda m: type(m).__name__)
def test_derivatives_match_finite_differences(model):
    rng = np.random.default_rng(7)
    q = rng.uniform(-3.0, 3.0, size=(100, model.dim))
    if isinstance(model, ScatteringWell):
        # keep clear of the V'' kink at +-L/2
        bad = np.abs(np.abs(q[:, 0]) - model.cutoff) < 1e-3
        q[bad, 0] = 0.5
    g = model.gradient(q)
    h = model.hessian(q)
    g_fd = finite_difference_gradient(model, q)
    h_fd = finite_difference_hessian(model, q)
    assert np.all(np.abs(g - g_fd) / (1.0 + np.abs(g)) < 1e-6)
    assert np.all(np.abs(h - h_fd) / (1.0 + np.abs(h)) < 1e-5)
    # Hessian symmetric
    assert np.allclose(h, np.swapaxes(h, -1, -2), atol=1e-14)


def test_double_well_examples():
    dw = DoubleWell(g=0.08, lam=2.0, mass=0.5)
    # barrier height lam^4/(64 g) = 16/5.12 = 3.125
    assert dw.value(np.array([0.0])) == pytest.approx(3.125, abs=1e-14)
    # zero-energy minima at +-lam/sqrt(8 g)
    qmin = dw.half_width
    assert dw.value(np.array([qmin])) == pytest.approx(0.0, abs=1e-13)
    assert dw.value(np.array([-qmin])) == pytest.approx(0.0, abs=1e-13)
    assert abs(dw.gradient(np.array([qmin]))[0]) < 1e-13


def test_scattering_well_matches_double_well_inside_and_zero_outside():
    sw = ScatteringWell(g=0.08, lam=2.0, mass=0.5)
    dw = DoubleWell(g=0.08, lam=2.0, mass=0.5)
    L2 = sw.cutoff
    q_in = np.linspace(-L2, L2, 41)[:, None]
    q_out = np.concatenate([np.linspace(-8, -L2 - 1e-9, 20),
                            np.linspace(L2 + 1e-9, 8, 20)])[:, None]
    assert np.allclose(sw.value(q_in), dw.value(q_in), atol=1e-14)
    assert np.all(sw.value(q_out) == 0.0)
    assert np.all(sw.gradient(q_out) == 0.0)
    # continuity at the cut
    edge = np.array([[L2]])
    assert sw.value(edge)[0] == pytest.approx(0.0, abs=1e-13)
    assert sw.gradient(edge)[0, 0] == pytest.approx(0.0, abs=1e-13)


def test_quartic2d_value_example():
    q2 = Quartic2D(a=0.1, b=10.0)
    v = q2.value(np.array([1.0, 1.0]))
    assert v == pytest.approx(10.2, abs=1e-14)


def test_evaluate_orders_and_dim_mismatch():
    h = Harmonic(omega=2.0, mass=1.5)
    q = np.array([0.7])
    v, g, hess = evaluate(h, q, order=2)
    assert hess[..., 0, 0] == pytest.approx(1.5 * 4.0)
    v, g, hess = evaluate(h, q, order=0)
    assert g is None and hess is None
    with pytest.raises(ValueError):
        evaluate(h, np.array([0.1, 0.2]), order=1)
    with pytest.raises(ValueError):
        evaluate(h, q, order=3)


def test_barrier_frequency():
    dw = DoubleWell(g=0.08, lam=2.0, mass=0.5)
    assert barrier_frequency(dw) == pytest.approx(2.0, abs=1e-12)
    ip = InvertedParabola(omega_b=1.0, mass=1.0)
    assert barrier_frequency(ip) == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(NoBarrierError):
        barrier_frequency(Harmonic(omega=1.0))
    with pytest.raises(NoBarrierError):
        barrier_frequency(Quartic2D(a=0.1, b=10.0))
    # off-center guess still finds the origin barrier
    assert barrier_frequency(dw, guess=[0.4]) == pytest.approx(2.0, abs=1e-10)


def test_asymmetric_eckart_reference_parameters():
    # transcribed reference parametrization: barrier frequency exactly 1
    a = 8.0 / (np.sqrt(3.0) * np.pi)
    ea = EckartAsymmetric(mass=1.0, A=-18 / np.pi**2, B=54 / np.pi**2, a=a)
    assert barrier_frequency(ea) == pytest.approx(1.0, abs=1e-10)
    # asymptotics: 0 on the left, A on the right
    assert ea.value(np.array([-60.0])) == pytest.approx(0.0, abs=1e-12)
    assert ea.value(np.array([60.0])) == pytest.approx(ea.A, abs=1e-12)
    # barrier height above the left side
    top, _ = __import__("otoclab.potentials", fromlist=["barrier_top"]).barrier_top(ea, guess=[0.1])
    assert ea.value(top[None, :])[0] == pytest.approx((ea.A + ea.B) ** 2 / (4 * ea.B), abs=1e-12)


def test_eckart_requires_parameters():
    with pytest.raises(ValueError):
        EckartSymmetric(mass=1.0)
    with pytest.raises(ValueError):
        EckartAsymmetric(mass=1.0, A=1.0)
    with pytest.raises(ValueError):
        make_potential({"kind": "eckart_asymmetric", "mass": 1.0})


def test_make_potential_roundtrip_and_errors():
    m = make_potential({"kind": "double_well", "g": 0.08, "lambda": 2.0, "mass": 0.5})
    assert isinstance(m, DoubleWell) and m.lam == 2.0 and m.mass == 0.5
    m = make_potential({"kind": "eckart_symmetric", "mass": 2.0,
                        "eckart_params": {"v0": 1.0, "a": 0.5}})
    assert isinstance(m, EckartSymmetric) and m.a == 0.5
    with pytest.raises(ValueError):
        make_potential({"kind": "nope"})
    with pytest.raises(ValueError):
        make_potential({"kind": "harmonic", "bogus": 1.0})
