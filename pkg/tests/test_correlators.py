"""Correlators against a direct dense-sampling oracle.

The oracle discretizes the two-mode wavefunction on a fine midpoint
mesh and applies the box operators literally: parity signs multiply
rows and columns, and the flip operator moves amplitude by one box
length between box partners.  No lattice reduction, prefactor algebra,
or shared quadrature code is involved, so agreement pins both the
integrand derivation and the panel sums.
"""

import math

import numpy as np
import pytest

from boxspin import (
    CorrelatorSet,
    InvalidScale,
    RangeError,
    SqueezeState,
    correlator,
    correlator_set,
    czz_sampled,
    rotated_correlator,
    single_site,
    wavefunction,
)
from boxspin.correlators import MAX_BOX_LENGTH, clear_cache, default_spec


class _DenseOracle:
    """Mesh wavefunction with literal box-operator actions."""

    def __init__(self, l: float, r: float, extent: float = 6.0, h: float = 1.0 / 128.0):
        n = int(round(2 * extent / h))
        self.x = -extent + (np.arange(n) + 0.5) * h
        self.h = h
        state = SqueezeState(r)
        self.psi = wavefunction(self.x[:, None], self.x[None, :], state)
        self.norm = float(np.sum(self.psi**2))
        box = np.floor(self.x / l).astype(int)
        self.parity = 1 - 2 * (box % 2)
        self.shift = int(round(l / h))
        assert abs(self.shift * h - l) < 1e-12, "box length must sit on the mesh"
        self.even = box % 2 == 0

    def _flip(self, field: np.ndarray, axis: int, phase_plus, phase_minus) -> np.ndarray:
        """Apply phase_plus * (pull from partner above, on even boxes)
        plus phase_minus * (pull from partner below, on odd boxes)."""
        moved = np.zeros_like(field, dtype=complex)
        idx = np.arange(field.shape[axis])
        up = idx + self.shift
        down = idx - self.shift
        even = self.even
        f = np.moveaxis(field.astype(complex), axis, 0)
        out = np.moveaxis(moved, axis, 0)
        ok_up = even & (up < field.shape[axis])
        ok_down = (~even) & (down >= 0)
        out[idx[ok_up]] += phase_plus * f[up[ok_up]]
        out[idx[ok_down]] += phase_minus * f[down[ok_down]]
        return np.moveaxis(out, 0, axis)

    def apply(self, axis_ops: tuple[str, str]) -> complex:
        field = self.psi.astype(complex)
        for axis, op in enumerate(axis_ops):
            if op == "z":
                field = field * (self.parity[:, None] if axis == 0 else self.parity[None, :])
            elif op == "x":
                field = self._flip(field, axis, 1.0, 1.0)
            elif op == "y":
                field = self._flip(field, axis, -1.0j, 1.0j)
            elif op == "1":
                pass
            else:
                raise ValueError(op)
        return complex(np.sum(self.psi * field)) / self.norm


@pytest.fixture(scope="module")
def oracle():
    return _DenseOracle(l=1.0, r=0.6)


class TestAgainstDenseOracle:
    def test_all_pairs_at_moderate_squeezing(self, oracle):
        for pair, ops in (("zz", "zz"), ("xx", "xx"), ("yy", "yy"), ("zx", "zx"), ("xz", "xz")):
            want = oracle.apply(tuple(ops))
            assert abs(want.imag) < 1e-12
            got, err = correlator(pair, 1.0, 0.6)
            assert got == pytest.approx(want.real, abs=5e-4), pair

    def test_single_site_x(self, oracle):
        want = oracle.apply(("x", "1"))
        got, _ = single_site("x", 1.0, 0.6)
        assert got == pytest.approx(want.real, abs=5e-4)

    def test_single_site_z(self, oracle):
        want = oracle.apply(("z", "1"))
        got, _ = single_site("z", 1.0, 0.6)
        assert abs(want.real) < 1e-6
        assert abs(got) < 1e-9


class TestStructure:
    def test_product_state_factorizes(self):
        """At r=0 the two modes are independent: cxx = <s_x>^2, czz = cyy = 0."""
        l = 0.8
        cxx, cxx_err = correlator("xx", l, 0.0)
        sx, sx_err = single_site("x", l, 0.0)
        assert cxx == pytest.approx(sx**2, abs=5e-7)
        czz, _ = correlator("zz", l, 0.0)
        cyy, _ = correlator("yy", l, 0.0)
        assert abs(czz) < 1e-9
        assert abs(cyy) < 1e-12

    def test_yy_is_never_positive(self):
        for l, r in ((0.4, 0.5), (1.0, 1.0), (2.0, 2.0)):
            cyy, _ = correlator("yy", l, r)
            assert cyy <= 0.0

    def test_monte_carlo_agreement(self):
        value, err = correlator("zz", 0.9, 1.1)
        est, se = czz_sampled(0.9, 1.1, 200_000, seed=42)
        assert abs(value - est) <= 4.0 * se + err

    def test_correlator_set_is_consistent(self):
        cs = correlator_set(1.0, 0.6)
        assert cs.czz == correlator("zz", 1.0, 0.6)[0]
        assert cs.cxx == correlator("xx", 1.0, 0.6)[0]
        assert abs(cs.czx - cs.cxz) < 1e-9
        d = cs.as_dict()
        assert set(d) == {"l", "r", "czz", "cxx", "cyy", "czx", "cxz", "errs"}
        assert set(d["errs"]) == {"czz", "cxx", "cyy", "czx", "cxz"}


class TestRotation:
    def _synthetic(self):
        return CorrelatorSet(
            l=1.0, r=0.0, czz=0.6, cxx=0.5, cyy=-0.4, czx=0.0, cxz=0.0,
            czz_err=0.0, cxx_err=0.0, cyy_err=0.0, czx_err=0.0, cxz_err=0.0,
        )

    def test_axis_extractions(self):
        cs = self._synthetic()
        assert rotated_correlator(0.0, 0.0, cs) == pytest.approx(0.6)
        assert rotated_correlator(math.pi / 2, math.pi / 2, cs) == pytest.approx(0.5)
        assert rotated_correlator(0.0, math.pi / 2, cs) == pytest.approx(0.0, abs=1e-15)

    def test_bilinear_form(self):
        cs = self._synthetic()
        rng = np.random.default_rng(7)
        for a, b in rng.uniform(-math.pi, math.pi, size=(20, 2)):
            want = math.cos(a) * math.cos(b) * 0.6 + math.sin(a) * math.sin(b) * 0.5
            assert rotated_correlator(a, b, cs) == pytest.approx(want, abs=1e-14)


class TestValidation:
    def test_unknown_pair_rejected(self):
        with pytest.raises(ValueError):
            correlator("qq", 1.0, 0.5)

    def test_unknown_axis_rejected(self):
        with pytest.raises(ValueError):
            single_site("y", 1.0, 0.5)

    def test_box_length_bounds(self):
        with pytest.raises(InvalidScale):
            correlator("zz", 0.0, 0.5)
        with pytest.raises(InvalidScale):
            correlator("zz", MAX_BOX_LENGTH * 2, 0.5)
        with pytest.raises(InvalidScale):
            czz_sampled(-1.0, 0.5, 1000)

    def test_set_rejects_out_of_range_values(self):
        with pytest.raises(RangeError):
            CorrelatorSet(
                l=1.0, r=0.0, czz=1.5, cxx=0.0, cyy=0.0, czx=0.0, cxz=0.0,
                czz_err=0.0, cxx_err=0.0, cyy_err=0.0, czx_err=0.0, cxz_err=0.0,
            )

    def test_set_rejects_asymmetric_cross_terms(self):
        with pytest.raises(RangeError):
            CorrelatorSet(
                l=1.0, r=0.0, czz=0.0, cxx=0.0, cyy=0.0, czx=0.2, cxz=-0.2,
                czz_err=0.0, cxx_err=0.0, cyy_err=0.0, czx_err=1e-6, cxz_err=1e-6,
            )


class TestSampling:
    def test_seed_reproducibility(self):
        a = czz_sampled(1.0, 0.8, 50_000, seed=5)
        b = czz_sampled(1.0, 0.8, 50_000, seed=5)
        assert a == b
        c = czz_sampled(1.0, 0.8, 50_000, seed=6)
        assert a != c

    def test_standard_error_shrinks(self):
        _, se_small = czz_sampled(1.0, 0.8, 10_000, seed=1)
        _, se_big = czz_sampled(1.0, 0.8, 160_000, seed=1)
        assert se_big == pytest.approx(se_small / 4.0, rel=0.25)

    def test_tiny_sample_rejected(self):
        with pytest.raises(ValueError):
            czz_sampled(1.0, 0.8, 1)


class TestSpecAndCache:
    def test_default_spec_tracks_state_scales(self):
        state = SqueezeState(2.0)
        spec = default_spec(1.0, state)
        assert spec.tail_radius == pytest.approx(8.0 * state.sigma)
        assert spec.max_panel_width == pytest.approx(
            min(1.0, 2.0 * state.sigma / state.cosh2r)
        )

    def test_cache_roundtrip(self):
        clear_cache()
        first = correlator("zz", 0.6, 0.9)
        again = correlator("zz", 0.6, 0.9)
        assert first == again
        clear_cache()
        fresh = correlator("zz", 0.6, 0.9)
        assert first == fresh
