"""Grid-field tests: padding against a brute-force index oracle,
resampling against direct interpolation, domain extension bookkeeping."""

import numpy as np
import pytest

from dealloy.errors import ConfigError
from dealloy.fields import (
    FieldState,
    PaddingSpec,
    circular_padding,
    downsample_array,
    downsample_state,
    extend_domain_below,
    pad_field,
    physics_padding,
    upsample_array,
    upsample_state,
    zero_padding,
)


def pad_oracle(x, spec):
    """Reference padding: resolve every padded cell by explicit index rules,
    vertical rule first, then horizontal."""
    h, w = x.shape
    ww = spec.width
    out = np.zeros((h + 2 * ww, w + 2 * ww), dtype=x.dtype)

    def vertical(r, c):
        # r in [-ww, h+ww), c in [0, w): apply top/bottom rule only
        if 0 <= r < h:
            return x[r, c]
        mode = spec.top_mode if r < 0 else spec.bottom_mode
        if mode == "zero":
            return 0.0
        if mode == "replicate":
            return x[0, c] if r < 0 else x[h - 1, c]
        return x[r % h, c]

    for r in range(-ww, h + ww):
        for c in range(-ww, w + ww):
            if 0 <= c < w:
                out[r + ww, c + ww] = vertical(r, c)
            elif spec.x_mode == "zero":
                out[r + ww, c + ww] = 0.0
            elif spec.x_mode == "replicate":
                out[r + ww, c + ww] = vertical(r, min(max(c, 0), w - 1))
            else:
                out[r + ww, c + ww] = vertical(r, c % w)
    return out


@pytest.mark.parametrize("spec", [
    physics_padding(1),
    physics_padding(2),
    zero_padding(1),
    circular_padding(1),
    circular_padding(3),
    PaddingSpec(width=2, x_mode="replicate", top_mode="circular", bottom_mode="zero"),
])
def test_pad_field_matches_index_oracle(spec):
    rng = np.random.default_rng(7)
    x = rng.standard_normal((6, 9))
    got = pad_field(x, spec)
    assert got.shape == (6 + 2 * spec.width, 9 + 2 * spec.width)
    np.testing.assert_array_equal(got, pad_oracle(x, spec))


def test_pad_field_width_zero_is_identity():
    x = np.arange(12.0).reshape(3, 4)
    out = pad_field(x, PaddingSpec(width=0))
    np.testing.assert_array_equal(out, x)


def test_pad_field_corners_use_vertical_rule_then_wrap():
    # corner of the circular-x / zero-top pad must equal the zero that the
    # vertical rule placed in the wrapped column, not a raw field value
    x = np.ones((4, 5))
    out = pad_field(x, physics_padding(1))
    assert out[0, 0] == 0.0 and out[0, -1] == 0.0
    # bottom corners replicate the bottom row through the wrap
    assert out[-1, 0] == 1.0 and out[-1, -1] == 1.0


def test_physics_padding_spec_values():
    spec = physics_padding()
    assert (spec.x_mode, spec.top_mode, spec.bottom_mode) == (
        "circular", "zero", "replicate")


def test_padding_spec_rejects_bad_mode():
    with pytest.raises(ConfigError):
        PaddingSpec(x_mode="mirror")
    with pytest.raises(ConfigError):
        PaddingSpec(width=-1)


def test_field_state_shape_and_dx_validation():
    ok = np.zeros((4, 4))
    with pytest.raises(ValueError):
        FieldState(phi=ok, ca=np.zeros((4, 5)), cb=ok, dx=0.2)
    with pytest.raises(ValueError):
        FieldState(phi=ok, ca=ok, cb=ok, dx=0.0)


def test_field_state_is_read_only_and_cc_complement():
    rng = np.random.default_rng(0)
    ca = rng.uniform(0, 0.4, (5, 6))
    cb = rng.uniform(0, 0.4, (5, 6))
    st = FieldState(phi=np.ones((5, 6)), ca=ca, cb=cb, dx=0.2)
    with pytest.raises(ValueError):
        st.phi[0, 0] = 2.0
    np.testing.assert_allclose(st.cc, 1.0 - ca - cb, atol=1e-15)
    # round trip through channels
    back = FieldState.from_channels(st.channels(), st.dx)
    np.testing.assert_array_equal(back.ca, st.ca)


def downsample_oracle(x, f):
    h, w = x.shape
    out = np.zeros((h // f, w // f))
    for i in range(h // f):
        for j in range(w // f):
            out[i, j] = x[i * f:(i + 1) * f, j * f:(j + 1) * f].mean()
    return out


def test_downsample_matches_block_mean_oracle():
    rng = np.random.default_rng(3)
    x = rng.uniform(0, 1, (8, 12))
    np.testing.assert_allclose(downsample_array(x, 2), downsample_oracle(x, 2),
                               atol=1e-15)
    np.testing.assert_allclose(downsample_array(x, 4), downsample_oracle(x, 4),
                               atol=1e-15)


def test_downsample_rejects_nondivisible():
    with pytest.raises(ValueError, match="divisible"):
        downsample_array(np.zeros((6, 6)), 4)


def upsample_oracle(x, f):
    h, w = x.shape
    out = np.zeros((h * f, w * f))
    for i_out in range(h * f):
        for j_out in range(w * f):
            y = (i_out + 0.5) / f - 0.5
            xx = (j_out + 0.5) / f - 0.5
            y0 = int(np.floor(y))
            x0 = int(np.floor(xx))
            ty, tx = y - y0, xx - x0
            y0c, y1c = max(y0, 0), min(y0 + 1, h - 1)
            acc = 0.0
            for (yy, wy) in ((y0c, 1 - ty), (y1c, ty)):
                for (xc, wx) in ((x0 % w, 1 - tx), ((x0 + 1) % w, tx)):
                    acc += wy * wx * x[yy, xc]
            out[i_out, j_out] = acc
    return out


def test_upsample_matches_bilinear_oracle():
    rng = np.random.default_rng(5)
    x = rng.uniform(0, 1, (6, 8))
    np.testing.assert_allclose(upsample_array(x, 2), upsample_oracle(x, 2),
                               atol=1e-14)
    np.testing.assert_allclose(upsample_array(x, 3), upsample_oracle(x, 3),
                               atol=1e-14)


def test_upsample_preserves_value_range():
    rng = np.random.default_rng(11)
    x = rng.uniform(0.2, 0.8, (16, 16))
    up = upsample_array(x, 2)
    assert up.min() >= x.min() - 1e-12 and up.max() <= x.max() + 1e-12


def test_upsample_is_x_periodic():
    rng = np.random.default_rng(12)
    x = rng.uniform(0, 1, (4, 8))
    up_roll = upsample_array(np.roll(x, 3, axis=1), 2)
    np.testing.assert_allclose(up_roll, np.roll(upsample_array(x, 2), 6, axis=1),
                               atol=1e-14)


def test_down_then_up_preserves_constant_field():
    x = np.full((8, 8), 0.37)
    np.testing.assert_allclose(upsample_array(downsample_array(x, 2), 2), x,
                               atol=1e-14)


def test_state_resampling_scales_dx():
    st = FieldState(phi=np.ones((8, 8)), ca=np.zeros((8, 8)),
                    cb=np.zeros((8, 8)), dx=0.2)
    assert downsample_state(st, 2).dx == pytest.approx(0.4)
    assert upsample_state(st, 2).dx == pytest.approx(0.1)


def test_extend_domain_below_adds_pristine_metal():
    rng = np.random.default_rng(9)
    st = FieldState(phi=rng.uniform(0, 1, (6, 5)), ca=rng.uniform(0, 0.4, (6, 5)),
                    cb=rng.uniform(0, 0.4, (6, 5)), dx=0.2)
    ext = extend_domain_below(st, 3, ca_ideal=0.3)
    assert ext.height == 9 and ext.width == 5
    np.testing.assert_array_equal(ext.phi[:6], st.phi)
    np.testing.assert_array_equal(ext.phi[6:], 1.0)
    np.testing.assert_array_equal(ext.ca[6:], 0.3)
    np.testing.assert_array_equal(ext.cb[6:], 0.7)
    # total A mass grows by exactly rows * width * ca_ideal (sum convention)
    assert ext.ca.sum() == pytest.approx(st.ca.sum() + 3 * 5 * 0.3)
    # zero rows returns the same state
    assert extend_domain_below(st, 0, 0.3) is st
