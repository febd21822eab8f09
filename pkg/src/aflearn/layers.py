"""Complex-valued building blocks with explicit forward and backward passes.

Gradient convention: for a real scalar loss L and a complex array z, gradient
arrays hold dL/dRe(z) + 1j * dL/dIm(z).  Complex parameters are then exactly
pairs of real parameters and every backward pass here can be checked against
central finite differences over those pairs.

Forward passes optionally take a FlopCounter; only matrix products are
tallied (see flops.py for the convention).
"""

from __future__ import annotations

from collections import namedtuple
from dataclasses import dataclass, fields

import numpy as np

from .structures import cached_window_bins

__all__ = [
    "complex_glorot",
    "log_scale",
    "log_scale_backward",
    "dense",
    "dense_backward",
    "ComplexGruLayer",
    "GroupSampler",
]

_TINY = 1e-12


def complex_glorot(rng, shape, fan_in, fan_out):
    """Glorot-scaled complex normal; variance split evenly across re/im."""
    scale = np.sqrt(1.0 / (fan_in + fan_out))
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def _log_gain(m):
    """ln(1 + m)/m evaluated stably, 1 at m = 0."""
    small = m < 1e-4
    safe = np.where(small, 1.0, m)
    gain = np.log1p(safe) / safe
    series = 1.0 - m / 2.0 + m * m / 3.0
    return np.where(small, series, gain)


def _log_gain_deriv(m):
    """d/dm of ln(1 + m)/m, -1/2 at m = 0."""
    small = m < 1e-4
    safe = np.where(small, 1.0, m)
    deriv = (safe / (1.0 + safe) - np.log1p(safe)) / (safe * safe)
    series = -0.5 + 2.0 * m / 3.0 - 0.75 * m * m
    return np.where(small, series, deriv)


def log_scale(z):
    """Magnitude compression ln(1 + |z|) e^{j arg z}; phase preserving."""
    z = np.asarray(z)
    return _log_gain(np.abs(z)) * z


def log_scale_backward(z, g_out):
    """Backward of log_scale at input z."""
    m = np.abs(z)
    gain = _log_gain(m)
    radial = np.real(np.conj(z) * g_out) * _log_gain_deriv(m)
    correction = np.where(m < _TINY, 0.0, radial / np.where(m < _TINY, 1.0, m))
    return gain * g_out + correction * z


def _matmul(x, weight, counter):
    # x (..., n_in) @ weight (n_out, n_in)^T
    if counter is not None:
        counter.tally_matmul(x.size // x.shape[-1], weight.shape[1], weight.shape[0])
    return x @ weight.T


def dense(x, weight, bias=None, counter=None):
    """y = x W^T (+ b) over the last axis."""
    y = _matmul(x, weight, counter)
    if bias is not None:
        y = y + bias
    return y


def dense_backward(g_y, x, weight, with_bias=True):
    """Returns (g_x, g_weight, g_bias); leading axes are summed into weights."""
    g_x = g_y @ np.conj(weight)
    flat_g = g_y.reshape(-1, g_y.shape[-1])
    flat_x = x.reshape(-1, x.shape[-1])
    g_w = flat_g.T @ np.conj(flat_x)
    g_b = flat_g.sum(axis=0) if with_bias else None
    return g_x, g_w, g_b


def _split_sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z.real)) + 1j / (1.0 + np.exp(-z.imag))


def _split_tanh(z):
    return np.tanh(z.real) + 1j * np.tanh(z.imag)


def _split_sigmoid_backward(g, s):
    return g.real * (s.real * (1.0 - s.real)) + 1j * (g.imag * (s.imag * (1.0 - s.imag)))


def _split_tanh_backward(g, t):
    return g.real * (1.0 - t.real**2) + 1j * (g.imag * (1.0 - t.imag**2))


GruCache = namedtuple("GruCache", "x h z r rh c")


@dataclass
class ComplexGruLayer:
    """Complex GRU with split re/im activations, reset applied before the candidate."""

    w_z: np.ndarray
    u_z: np.ndarray
    b_z: np.ndarray
    w_r: np.ndarray
    u_r: np.ndarray
    b_r: np.ndarray
    w_c: np.ndarray
    u_c: np.ndarray
    b_c: np.ndarray

    @classmethod
    def init(cls, rng, input_size, hidden_size):
        def mat(n_in):
            return complex_glorot(rng, (hidden_size, n_in), n_in, hidden_size)

        zero = np.zeros(hidden_size, dtype=complex)
        return cls(
            w_z=mat(input_size), u_z=mat(hidden_size), b_z=zero.copy(),
            w_r=mat(input_size), u_r=mat(hidden_size), b_r=zero.copy(),
            w_c=mat(input_size), u_c=mat(hidden_size), b_c=zero.copy(),
        )

    @property
    def hidden_size(self):
        return self.w_z.shape[0]

    def tensor_items(self):
        return [(f.name, getattr(self, f.name)) for f in fields(self)]

    def step(self, x, h, counter=None):
        """One recurrence step.  x (..., in), h (..., H) -> (h_new, cache)."""
        z = _split_sigmoid(_matmul(x, self.w_z, counter) + _matmul(h, self.u_z, counter) + self.b_z)
        r = _split_sigmoid(_matmul(x, self.w_r, counter) + _matmul(h, self.u_r, counter) + self.b_r)
        rh = r * h
        c = _split_tanh(_matmul(x, self.w_c, counter) + _matmul(rh, self.u_c, counter) + self.b_c)
        h_new = (1.0 - z) * c + z * h
        return h_new, GruCache(x, h, z, r, rh, c)

    def backward(self, g_h_new, cache):
        """Returns (g_x, g_h, grads) with grads keyed like tensor_items()."""
        x, h, z, r, rh, c = cache
        g_z = np.conj(h - c) * g_h_new
        g_c = np.conj(1.0 - z) * g_h_new
        g_h = np.conj(z) * g_h_new

        g_ac = _split_tanh_backward(g_c, c)
        g_x, g_wc, g_bc = dense_backward(g_ac, x, self.w_c)
        g_rh, g_uc, _ = dense_backward(g_ac, rh, self.u_c, with_bias=False)
        g_r = np.conj(h) * g_rh
        g_h = g_h + np.conj(r) * g_rh

        g_ar = _split_sigmoid_backward(g_r, r)
        gx2, g_wr, g_br = dense_backward(g_ar, x, self.w_r)
        gh2, g_ur, _ = dense_backward(g_ar, h, self.u_r, with_bias=False)
        g_x = g_x + gx2
        g_h = g_h + gh2

        g_az = _split_sigmoid_backward(g_z, z)
        gx3, g_wz, g_bz = dense_backward(g_az, x, self.w_z)
        gh3, g_uz, _ = dense_backward(g_az, h, self.u_z, with_bias=False)
        g_x = g_x + gx3
        g_h = g_h + gh3

        grads = {
            "w_z": g_wz, "u_z": g_uz, "b_z": g_bz,
            "w_r": g_wr, "u_r": g_ur, "b_r": g_br,
            "w_c": g_wc, "u_c": g_uc, "b_c": g_bc,
        }
        return g_x, g_h, grads


@dataclass
class GroupSampler:
    """Gathers per-group feature windows and scatters per-group outputs back.

    down_kernel (H, 5*width) maps a flattened window (width bins x 5 channels,
    bin-major) to the group input; up_kernel (width, H) maps the group output
    to per-bin corrections, overlap-added for banded layouts.  Both are
    bias-free so zero activations map to zero corrections.
    """

    structure: object
    down_kernel: np.ndarray
    up_kernel: np.ndarray

    NUM_CHANNELS = 5

    @classmethod
    def init(cls, rng, structure, hidden_size):
        n_in = cls.NUM_CHANNELS * structure.width
        down = complex_glorot(rng, (hidden_size, n_in), n_in, hidden_size)
        up = complex_glorot(rng, (structure.width, hidden_size), hidden_size, structure.width)
        return cls(structure=structure, down_kernel=down, up_kernel=up)

    @property
    def hidden_size(self):
        return self.down_kernel.shape[0]

    def tensor_items(self):
        return [("down_kernel", self.down_kernel), ("up_kernel", self.up_kernel)]

    def downsample(self, features, counter=None):
        """(..., K, 5) -> (..., C, H) group inputs; returns (groups, cache)."""
        num_bins = features.shape[-2]
        bins = cached_window_bins(self.structure, num_bins)
        windows = features[..., bins, :]
        flat = windows.reshape(*windows.shape[:-3], bins.shape[0], -1)
        return dense(flat, self.down_kernel, counter=counter), (flat, num_bins)

    def downsample_backward(self, g_groups, cache):
        flat, num_bins = cache
        g_flat, g_down, _ = dense_backward(g_groups, flat, self.down_kernel, with_bias=False)
        width = self.structure.width
        g_windows = g_flat.reshape(*g_flat.shape[:-1], width, self.NUM_CHANNELS)
        g_features = self._scatter_windows(g_windows, num_bins)
        return g_features, g_down

    def upsample(self, groups, counter=None):
        """(..., C, H) -> (..., K) per-bin corrections; returns (delta, cache)."""
        per_bin = dense(groups, self.up_kernel, counter=counter)
        num_bins = self.structure.bins_for_groups(groups.shape[-2])
        delta = self._scatter_windows(per_bin[..., None], num_bins)[..., 0]
        return delta, (groups, num_bins)

    def upsample_backward(self, g_delta, cache):
        groups, num_bins = cache
        bins = cached_window_bins(self.structure, num_bins)
        g_per_bin = g_delta[..., bins]
        g_groups, g_up, _ = dense_backward(g_per_bin, groups, self.up_kernel, with_bias=False)
        return g_groups, g_up

    def _scatter_windows(self, windows, num_bins):
        """Adjoint of the window gather: overlap-add (..., C, width, ch) -> (..., K, ch)."""
        chans = windows.shape[-1]
        if self.structure.kind == "banded":
            even = windows[..., 0::2, :, :]
            odd = windows[..., 1::2, :, :]
            out = even.reshape(*even.shape[:-3], num_bins, chans)
            odd_flat = odd.reshape(*odd.shape[:-3], num_bins, chans)
            return out + np.roll(odd_flat, self.structure.width // 2, axis=-2)
        return windows.reshape(*windows.shape[:-3], num_bins, chans)
