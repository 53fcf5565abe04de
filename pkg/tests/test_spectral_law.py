import numpy as np
import pytest

from spikedet.spectral_law import (
    MarchenkoPastur,
    OffSupportError,
    law_m_derivatives,
    mp_edges,
    mp_stieltjes,
)


def quadratic_residual(z, c):
    m = mp_stieltjes(z, c)
    return abs(c * z * m * m - (1.0 - c - z) * m + 1.0)


def test_stieltjes_golden_value():
    # root of c z m^2 - (1-c-z) m + 1 = 0 selecting the branch decaying at
    # infinity; the discarded root at z=2.25, c=0.125 is -4
    m = mp_stieltjes(2.25, 0.125)
    assert m.real == pytest.approx(-0.888889, abs=1e-6)
    assert abs(m.imag) < 1e-14
    roots = np.roots([0.125 * 2.25, -(1 - 0.125 - 2.25), 1.0])
    assert min(abs(roots - m.real)) < 1e-12
    assert max(abs(roots + 4.0)) < 1e-12 or min(abs(roots + 4.0)) < 1e-12


def test_quadratic_identity_random_points(rng):
    c = 0.125
    a, b = mp_edges(c)
    for _ in range(20):
        if rng.uniform() < 0.5:
            z = complex(rng.uniform(b + 0.05, b + 20.0), rng.uniform(-3, 3))
        else:
            z = complex(rng.uniform(0.01, a - 0.01), 0.0)
        assert quadratic_residual(z, c) < 1e-12


def test_large_z_tail():
    m = mp_stieltjes(1e6, 0.125)
    assert m.real == pytest.approx(-1e-6, rel=0.01)


def test_branch_upper_half_plane(rng):
    law = MarchenkoPastur(0.3)
    for _ in range(100):
        z = complex(rng.uniform(0.05, 6.0), rng.uniform(1e-6, 4.0))
        assert law.m(z).imag > 0.0


def test_edges():
    a, b = mp_edges(0.125)
    assert a == pytest.approx(0.417893, abs=1e-6)
    assert b == pytest.approx(1.832107, abs=1e-6)
    assert mp_edges(0.0) == (1.0, 1.0)
    assert mp_edges(1.0) == (0.0, 4.0)
    with pytest.raises(ValueError):
        mp_edges(-0.1)
    with pytest.raises(ValueError):
        mp_edges(1.1)
    with pytest.raises(ValueError):
        MarchenkoPastur(1.0)


def test_h_values():
    law = MarchenkoPastur(0.125)
    assert law.h(2.25) == pytest.approx(-2.0, abs=1e-12)
    # consistency h'(rho) = m(rho)(1+h(rho))/zeta with zeta = 7/9
    assert law.h_prime(2.25) == pytest.approx(8.0 / 7.0, abs=1e-12)
    # independent check: complex-step differentiation of z*m(z)
    step = 1e-20
    cs = (complex(2.25, step) * law.m(complex(2.25, step))).imag / step
    assert law.h_prime(2.25) == pytest.approx(cs, rel=1e-12)


def test_h_range_and_monotonicity(rng):
    law = MarchenkoPastur(0.125)
    xs_hi = np.sort(rng.uniform(law.b + 1e-3, law.b + 30, size=25))
    xs_lo = np.sort(rng.uniform(1e-3, law.a - 1e-3, size=25))
    h_a, h_b = law.h_edge_limits()
    for x in xs_hi:
        # increasing from h(b+) toward the -1 limit at infinity
        assert h_b < law.h(x) < -1.0
        assert law.h_prime(x) > 0.0
    for x in xs_lo:
        assert 0.0 < law.h(x) < h_a
        assert law.h_prime(x) > 0.0
    assert law.h(law.b + 1e5) == pytest.approx(-1.0, abs=1e-4)
    assert law.h(1e-7) == pytest.approx(0.0, abs=1e-6)
    hs_hi = [law.h(x) for x in xs_hi]
    hs_lo = [law.h(x) for x in xs_lo]
    assert all(np.diff(hs_hi) > 0)
    assert all(np.diff(hs_lo) > 0)


@pytest.mark.parametrize("order,rtol", [(1, 1e-6), (2, 1e-5), (3, 1e-4)])
def test_m_derivatives_match_finite_differences(order, rtol, rng):
    # chain oracle: each analytic derivative is checked against a central
    # difference of the previous (analytic) one, which keeps the finite
    # difference first-order and free of catastrophic cancellation
    law = MarchenkoPastur(0.125)
    base = {1: law.m, 2: lambda z: law.m_derivative(z, 1), 3: lambda z: law.m_derivative(z, 2)}

    for z in [2.25, 3.7, 0.2, complex(1.0, 1.5)]:
        h = 1e-5 * (1 + abs(z))
        f = base[order]
        approx = (f(z + h) - f(z - h)) / (2 * h)
        exact = law.m_derivative(z, order)
        assert abs(approx - exact) / abs(exact) < rtol


def test_m_prime_positive_on_real_axis(rng):
    law = MarchenkoPastur(0.2)
    for _ in range(20):
        x = rng.uniform(law.b + 0.01, law.b + 15)
        assert law.m_derivative(x, 1).real > 0.0


def test_support_rejection():
    law = MarchenkoPastur(0.125)
    with pytest.raises(OffSupportError):
        law.m(1.0)  # inside [a, b]
    with pytest.raises(OffSupportError):
        law.m(law.b + 1e-12)  # inside the guard band
    with pytest.raises(OffSupportError):
        law.m(0.0)
    with pytest.raises(ValueError):
        law.m_derivative(2.25, 4)


def test_edge_limits_closed_form_vs_generic():
    law = MarchenkoPastur(0.125)
    h_a, h_b = law.h_edge_limits()
    gen_a, gen_b = SpectralLawProbe(law).h_edge_limits()
    assert h_a == pytest.approx(gen_a, rel=1e-3)
    assert h_b == pytest.approx(gen_b, rel=1e-3)


class SpectralLawProbe:
    """Wrap a law but force the generic extrapolated edge limits."""

    def __init__(self, inner):
        self.inner = inner
        self.a, self.b, self.c = inner.a, inner.b, inner.c

    def h(self, x):
        return self.inner.h(x)

    def h_edge_limits(self):
        from spikedet.spectral_law import SpectralLaw

        return SpectralLaw.h_edge_limits(self)


def test_generic_law_pathway():
    # a SpectralLaw defined only through m() must drive h and friends
    from spikedet.spectral_law import SpectralLaw

    class ShiftedMp(SpectralLaw):
        """MP law expressed through the interface without the shortcuts."""

        def __init__(self, c):
            self._mp = MarchenkoPastur(c)
            self.c, self.a, self.b = c, self._mp.a, self._mp.b

        def m(self, z):
            return self._mp.m(z)

        def m_derivative(self, z, order=1):
            return self._mp.m_derivative(z, order)

    law = ShiftedMp(0.125)
    ref = MarchenkoPastur(0.125)
    assert law.h(2.25) == pytest.approx(ref.h(2.25), abs=1e-14)
    assert law.h_prime(2.25) == pytest.approx(ref.h_prime(2.25), abs=1e-14)
    assert law.h_second(2.25) == pytest.approx(ref.h_second(2.25), abs=1e-14)
    assert law_m_derivatives(2.25, law, 2) == ref.m_derivative(2.25, 2)
