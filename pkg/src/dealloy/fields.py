"""Grid fields and physics-informed padding.

The simulation domain is a 2D cell-centered grid. Row 0 is the top of the
domain (liquid reservoir side), the last row is the bottom (solid side).
x (columns) is periodic; y (rows) is bounded. A state carries the solid
fraction phi and the two independent species concentrations c_A and c_B;
c_C is implied by c_C = 1 - c_A - c_B.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

PAD_MODES = ("circular", "zero", "replicate")


def _as_field_array(x, name):
    a = np.asarray(x)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2D, got shape {a.shape}")
    if a.dtype not in (np.float32, np.float64):
        a = a.astype(np.float64)
    return a


@dataclass(frozen=True)
class FieldState:
    """One snapshot of the coupled fields on a single grid.

    Arrays are marked read-only on construction; operations return new
    states instead of mutating. dx is the uniform grid spacing in both
    directions.
    """

    phi: np.ndarray
    ca: np.ndarray
    cb: np.ndarray
    dx: float

    def __post_init__(self):
        phi = _as_field_array(self.phi, "phi")
        ca = _as_field_array(self.ca, "ca")
        cb = _as_field_array(self.cb, "cb")
        if not (phi.shape == ca.shape == cb.shape):
            raise ValueError(
                f"field shapes differ: phi {phi.shape}, ca {ca.shape}, cb {cb.shape}"
            )
        if not self.dx > 0:
            raise ValueError(f"dx must be positive, got {self.dx}")
        for name, a in (("phi", phi), ("ca", ca), ("cb", cb)):
            a = a.copy()
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    @property
    def height(self):
        return self.phi.shape[0]

    @property
    def width(self):
        return self.phi.shape[1]

    @property
    def cc(self):
        """Dependent concentration c_C = 1 - c_A - c_B."""
        return 1.0 - self.ca - self.cb

    def channels(self):
        """Stack (phi, c_A, c_B) into a (3, H, W) array."""
        return np.stack([self.phi, self.ca, self.cb])

    @classmethod
    def from_channels(cls, arr, dx):
        """Inverse of channels(): build a state from a (3, H, W) array."""
        arr = np.asarray(arr)
        if arr.ndim != 3 or arr.shape[0] != 3:
            raise ValueError(f"expected (3, H, W) array, got shape {arr.shape}")
        return cls(phi=arr[0], ca=arr[1], cb=arr[2], dx=dx)

    def with_channels(self, arr):
        return FieldState.from_channels(arr, self.dx)


def fields_allclose(a, b, atol=0.0, rtol=0.0):
    """True when two states match elementwise within tolerances."""
    if a.phi.shape != b.phi.shape:
        return False
    return all(
        np.allclose(x, y, atol=atol, rtol=rtol)
        for x, y in ((a.phi, b.phi), (a.ca, b.ca), (a.cb, b.cb))
    )


@dataclass(frozen=True)
class PaddingSpec:
    """Per-edge padding rules for stencil and convolution halos.

    x_mode applies to both left and right edges. Corner cells are resolved
    by applying the top/bottom rule first and then the horizontal rule on
    the already-extended rows, so a circular x wrap copies the vertically
    padded cells too.
    """

    width: int = 1
    x_mode: str = "circular"
    top_mode: str = "zero"
    bottom_mode: str = "replicate"

    def __post_init__(self):
        if self.width < 0:
            raise ConfigError(f"padding width must be >= 0, got {self.width}")
        for name, mode in (
            ("x_mode", self.x_mode),
            ("top_mode", self.top_mode),
            ("bottom_mode", self.bottom_mode),
        ):
            if mode not in PAD_MODES:
                raise ConfigError(f"{name} must be one of {PAD_MODES}, got {mode!r}")


def physics_padding(width=1):
    """Padding matching the physical boundary conditions: periodic in x,
    liquid (zero) above the top row, bulk solid (edge value) below."""
    return PaddingSpec(width=width, x_mode="circular", top_mode="zero",
                       bottom_mode="replicate")


def zero_padding(width=1):
    """All-zero padding on every edge (ablation variant)."""
    return PaddingSpec(width=width, x_mode="zero", top_mode="zero",
                       bottom_mode="zero")


def circular_padding(width=1):
    """Fully periodic padding on every edge."""
    return PaddingSpec(width=width, x_mode="circular", top_mode="circular",
                       bottom_mode="circular")


def _pad_rows(x, w, top_mode, bottom_mode):
    h = x.shape[0]
    if top_mode == "circular" or bottom_mode == "circular":
        if w > h:
            raise ValueError(f"padding width {w} exceeds height {h}")
    top = {
        "zero": lambda: np.zeros((w,) + x.shape[1:], dtype=x.dtype),
        "replicate": lambda: np.repeat(x[:1], w, axis=0),
        "circular": lambda: x[h - w:],
    }[top_mode]()
    bottom = {
        "zero": lambda: np.zeros((w,) + x.shape[1:], dtype=x.dtype),
        "replicate": lambda: np.repeat(x[-1:], w, axis=0),
        "circular": lambda: x[:w],
    }[bottom_mode]()
    return np.concatenate([top, x, bottom], axis=0)


def _pad_cols(x, w, mode):
    wd = x.shape[1]
    if mode == "circular" and w > wd:
        raise ValueError(f"padding width {w} exceeds width {wd}")
    if mode == "zero":
        left = np.zeros((x.shape[0], w), dtype=x.dtype)
        right = left
    elif mode == "replicate":
        left = np.repeat(x[:, :1], w, axis=1)
        right = np.repeat(x[:, -1:], w, axis=1)
    else:
        left = x[:, wd - w:]
        right = x[:, :w]
    return np.concatenate([left, x, right], axis=1)


def pad_field(x, spec):
    """Pad a 2D array by spec.width on every side.

    Rows are extended first (top/bottom rules), then columns (x rule), so
    the corners follow the documented vertical-then-horizontal order.
    """
    x = np.asarray(x)
    if x.ndim != 2:
        raise ValueError(f"pad_field expects a 2D array, got shape {x.shape}")
    if spec.width == 0:
        return x.copy()
    y = _pad_rows(x, spec.width, spec.top_mode, spec.bottom_mode)
    return _pad_cols(y, spec.width, spec.x_mode)


def downsample_array(x, factor):
    """Block-average a 2D array by an integer factor along both axes."""
    x = np.asarray(x)
    f = int(factor)
    if f < 1:
        raise ValueError(f"downsample factor must be >= 1, got {factor}")
    h, w = x.shape
    if h % f or w % f:
        raise ValueError(
            f"grid shape {x.shape} not divisible by downsample factor {f}"
        )
    return x.reshape(h // f, f, w // f, f).mean(axis=(1, 3))


def upsample_array(x, factor):
    """Bilinear upsample of a 2D array by an integer factor.

    Cell-centered convention: output sample (I, J) reads the source at
    ((I + 0.5) / f - 0.5, (J + 0.5) / f - 0.5). x wraps periodically,
    y clamps at the first/last row, so outputs stay inside the convex
    hull of the inputs.
    """
    x = np.asarray(x)
    f = int(factor)
    if f < 1:
        raise ValueError(f"upsample factor must be >= 1, got {factor}")
    if f == 1:
        return x.copy()
    h, w = x.shape
    ys = (np.arange(h * f) + 0.5) / f - 0.5
    xs = (np.arange(w * f) + 0.5) / f - 0.5
    y0 = np.floor(ys).astype(int)
    ty = ys - y0
    y0c = np.clip(y0, 0, h - 1)
    y1c = np.clip(y0 + 1, 0, h - 1)
    x0 = np.floor(xs).astype(int)
    tx = xs - x0
    x0w = np.mod(x0, w)
    x1w = np.mod(x0 + 1, w)

    ty = ty[:, None]
    tx = tx[None, :]
    top = x[np.ix_(y0c, x0w)] * (1 - tx) + x[np.ix_(y0c, x1w)] * tx
    bot = x[np.ix_(y1c, x0w)] * (1 - tx) + x[np.ix_(y1c, x1w)] * tx
    return top * (1 - ty) + bot * ty


def downsample_state(state, factor):
    """Block-average all channels; dx scales up by the factor."""
    f = int(factor)
    return FieldState(
        phi=downsample_array(state.phi, f),
        ca=downsample_array(state.ca, f),
        cb=downsample_array(state.cb, f),
        dx=state.dx * f,
    )


def upsample_state(state, factor):
    """Bilinear-upsample all channels; dx scales down by the factor."""
    f = int(factor)
    return FieldState(
        phi=upsample_array(state.phi, f),
        ca=upsample_array(state.ca, f),
        cb=upsample_array(state.cb, f),
        dx=state.dx / f,
    )


def extend_domain_below(state, extra_rows, ca_ideal):
    """Append pristine solid below the bottom edge.

    The new rows carry phi = 1, c_A = ca_ideal, c_B = 1 - ca_ideal, i.e.
    pure metal with no dissolved C. Used to give long rollouts room to
    corrode past the original domain depth.
    """
    n = int(extra_rows)
    if n < 0:
        raise ValueError(f"extra_rows must be >= 0, got {extra_rows}")
    if n == 0:
        return state
    w = state.width
    dt = state.phi.dtype
    phi_new = np.ones((n, w), dtype=dt)
    ca_new = np.full((n, w), ca_ideal, dtype=dt)
    cb_new = np.full((n, w), 1.0 - ca_ideal, dtype=dt)
    return FieldState(
        phi=np.concatenate([state.phi, phi_new]),
        ca=np.concatenate([state.ca, ca_new]),
        cb=np.concatenate([state.cb, cb_new]),
        dx=state.dx,
    )
