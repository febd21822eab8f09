"""End-to-end echo cancellation over full signals.

A session walks the far-end/microphone pair hop by hop, filters with the
current weights, emits the residual, and lets the chosen adaptation rule
update the weights.  The filter output at hop t always uses the weights from
before the hop-t update.

Only whole hops are processed; a trailing partial hop is dropped and outputs
are trimmed accordingly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .classic import (
    kf_step,
    make_kf_state,
    make_nlms_state,
    make_rls_state,
    nlms_step,
    rls_step,
)
from .errors import ConfigError, NumericError
from .flops import FlopCounter
from .optimizer import GroupState, apply_update, build_input, optimizer_step
from .ols import af_error, filter_gradient, hop_spectrum, ols_apply, spectrum_to_hop

__all__ = ["SessionResult", "run_learned_session", "run_classic_session", "CLASSIC_ALGORITHMS"]

CLASSIC_ALGORITHMS = ("nlms", "rls", "kf")


@dataclass
class SessionResult:
    """Outputs of one session, trimmed to the processed whole hops."""

    error: np.ndarray
    output: np.ndarray
    weights: np.ndarray
    erle_db: np.ndarray
    frames: int
    flops: int
    snapshots: list

    @property
    def mean_erle_db(self):
        return float(np.mean(self.erle_db)) if self.erle_db.size else 0.0


def _erle_db(d_hop, e_hop):
    num = float(d_hop @ d_hop)
    den = float(e_hop @ e_hop)
    if den <= 0.0:
        return 80.0
    return float(np.clip(10.0 * np.log10(max(num, 1e-300) / den), -80.0, 80.0))


def _session_frames(u, d, cfg):
    u = np.asarray(u, dtype=float)
    d = np.asarray(d, dtype=float)
    if u.ndim != 1 or d.ndim != 1:
        raise ValueError("session signals must be 1-D")
    if u.size != d.size:
        raise ValueError(f"signal lengths differ: {u.size} vs {d.size}")
    frames = u.size // cfg.hop
    if frames == 0:
        raise ValueError(f"need at least {cfg.hop} samples, got {u.size}")
    return u, d, frames


def _run(u, d, cfg, update_fn, telemetry_path=None, snapshot_stride=0, count_flops=False):
    u, d, frames = _session_frames(u, d, cfg)
    k, r = cfg.dft_size, cfg.hop
    n = frames * r
    error = np.empty(n)
    output = np.empty(n)
    erle = np.empty(frames)
    snapshots = []
    counter = FlopCounter() if count_flops else None
    w = np.zeros(k, dtype=complex)

    telemetry = open(telemetry_path, "w") if telemetry_path else None
    try:
        for t in range(frames):
            stop = (t + 1) * r
            frame = np.zeros(k)
            lo = max(0, stop - k)
            frame[k - (stop - lo) :] = u[lo:stop]
            d_hop = d[stop - r : stop]

            w, y_hop, e_hop = update_fn(w, frame, d_hop, counter)
            if not np.all(np.isfinite(e_hop)):
                raise NumericError("non-finite residual", frame=t)

            error[stop - r : stop] = e_hop
            output[stop - r : stop] = y_hop
            erle[t] = _erle_db(d_hop, e_hop)
            if snapshot_stride and (t + 1) % snapshot_stride == 0:
                snapshots.append((t, w.copy()))
            if telemetry is not None:
                telemetry.write(
                    json.dumps(
                        {
                            "frame": t,
                            "erle_db": round(erle[t], 4),
                            "residual_power": float(e_hop @ e_hop),
                        }
                    )
                    + "\n"
                )
    finally:
        if telemetry is not None:
            telemetry.close()

    return SessionResult(
        error=error,
        output=output,
        weights=w,
        erle_db=erle,
        frames=frames,
        flops=counter.total if counter else 0,
        snapshots=snapshots,
    )


def run_learned_session(params, u, d, cfg, **kwargs):
    """Run a trained update rule over a signal pair."""
    num_bins = cfg.dft_size
    state = GroupState.zeros(params.structure, num_bins, params.hidden_size)

    def update(w, frame, d_hop, counter):
        nonlocal state
        u_freq = np.fft.fft(frame)
        y_hop, y_freq = ols_apply(cfg, w, frame)
        e_hop, e_freq = af_error(d_hop, y_hop, cfg)
        grad = filter_gradient(u_freq, e_hop, cfg)
        d_freq = hop_spectrum(d_hop, cfg)
        xi = build_input(grad, u_freq, d_freq, e_freq, y_freq)
        delta, state = optimizer_step(params, xi, state, counter=counter)
        return apply_update(w, delta), y_hop, e_hop

    return _run(u, d, cfg, update, **kwargs)


def run_classic_session(algorithm, u, d, cfg, hyper=None, **kwargs):
    """Run one of the classical baselines ('nlms', 'rls', 'kf')."""
    if algorithm not in CLASSIC_ALGORITHMS:
        raise ConfigError("algorithm", f"unknown baseline {algorithm!r}")
    hyper = dict(hyper or {})
    k = cfg.dft_size

    if algorithm == "nlms":
        state = make_nlms_state(**hyper)
    elif algorithm == "rls":
        state = make_rls_state(k, **hyper)
    else:
        state = make_kf_state(k, **hyper)

    def update(w, frame, d_hop, counter):
        nonlocal state
        u_freq = np.fft.fft(frame)
        if algorithm == "kf":
            d_freq = hop_spectrum(d_hop, cfg)
            w_new, e_freq, state = kf_step(state, u_freq, d_freq, w)
            e_hop = spectrum_to_hop(e_freq, cfg)
            y_hop = d_hop - e_hop
            return w_new, y_hop, e_hop
        y_hop, _ = ols_apply(cfg, w, frame)
        e_hop, e_freq = af_error(d_hop, y_hop, cfg)
        if algorithm == "nlms":
            w_new, state = nlms_step(state, u_freq, e_freq, w)
        else:
            w_new, state = rls_step(state, u_freq, e_freq, w)
        return w_new, y_hop, e_hop

    return _run(u, d, cfg, update, **kwargs)
