"""Moment-based CamShift tracking over grayscale frame sequences.

The pipeline per frame: back-project the frame through a histogram built
from the initial region of interest, mean-shift the search window onto
the mode of the resulting probability map, then adapt the window size
from the zeroth moment under the converged window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyRegionError, InvalidInputError, LostTrackError


@dataclass(frozen=True)
class Window:
    """Search window: top-left corner (x, y) and extent (w, h) in pixels."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise InvalidInputError(f"window extent must be >= 1, got {self.w}x{self.h}")

    @property
    def center(self) -> tuple[float, float]:
        return (self.x + (self.w - 1) / 2.0, self.y + (self.h - 1) / 2.0)


@dataclass(frozen=True)
class Histogram:
    """Intensity histogram normalized so the maximum bin weight is 1."""

    weights: np.ndarray
    bin_count: int


@dataclass
class TrackState:
    """Per-frame tracker output."""

    window: Window
    centroid: tuple[float, float]
    iterations: int
    converged: bool
    lost: bool = False


@dataclass
class TrackConfig:
    bin_count: int = 32
    max_iter: int = 20
    eps: float = 1.0


@dataclass(frozen=True)
class MomentSet:
    """Raw moments M_ij and central moments mu_pq for orders i+j <= 2."""

    raw: dict = field(default_factory=dict)
    central: dict = field(default_factory=dict)


def _round_half_up(v: float) -> int:
    return int(math.floor(v + 0.5))


def _clip_window(img: np.ndarray, window: Window | None):
    """Window-restricted view plus the absolute offset of its corner."""
    h, w = img.shape
    if window is None:
        return img, 0, 0
    x0, y0 = max(window.x, 0), max(window.y, 0)
    x1, y1 = min(window.x + window.w, w), min(window.y + window.h, h)
    if x0 >= x1 or y0 >= y1:
        raise EmptyRegionError(
            f"window {window} does not intersect {w}x{h} image"
        )
    return img[y0:y1, x0:x1], x0, y0


def raw_moment(img: np.ndarray, i: int, j: int, window: Window | None = None) -> float:
    """Raw image moment M_ij = sum over pixels of x^i y^j I(x, y)."""
    if i not in (0, 1, 2) or j not in (0, 1, 2) or i + j > 2:
        raise InvalidInputError(f"moment order ({i},{j}) out of supported range")
    img = np.asarray(img)
    if img.ndim != 2:
        raise InvalidInputError(f"image must be single-channel, got shape {img.shape}")
    sub, x0, y0 = _clip_window(img, window)
    sub = sub.astype(np.float64)
    xs = np.arange(x0, x0 + sub.shape[1], dtype=np.float64) ** i
    ys = np.arange(y0, y0 + sub.shape[0], dtype=np.float64) ** j
    return float(ys @ sub @ xs)


def centroid(img: np.ndarray, window: Window | None = None) -> tuple[float, float]:
    """Mass centroid (M10/M00, M01/M00); raises when the region is empty."""
    m00 = raw_moment(img, 0, 0, window)
    if m00 <= 0.0:
        raise EmptyRegionError("zero mass: M00 = 0")
    return raw_moment(img, 1, 0, window) / m00, raw_moment(img, 0, 1, window) / m00


def central_moment(
    img: np.ndarray, p: int, q: int, window: Window | None = None
) -> float:
    """Central moment mu_pq about the centroid."""
    if p not in (0, 1, 2) or q not in (0, 1, 2) or p + q > 2:
        raise InvalidInputError(f"moment order ({p},{q}) out of supported range")
    xbar, ybar = centroid(img, window)
    img = np.asarray(img)
    sub, x0, y0 = _clip_window(img, window)
    sub = sub.astype(np.float64)
    xs = (np.arange(x0, x0 + sub.shape[1], dtype=np.float64) - xbar) ** p
    ys = (np.arange(y0, y0 + sub.shape[0], dtype=np.float64) - ybar) ** q
    return float(ys @ sub @ xs)


def moment_set(img: np.ndarray, window: Window | None = None) -> MomentSet:
    """All raw and central moments of order i+j <= 2."""
    orders = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    raw = {(i, j): raw_moment(img, i, j, window) for i, j in orders}
    central = {(p, q): central_moment(img, p, q, window) for p, q in orders}
    return MomentSet(raw=raw, central=central)


def build_histogram(img: np.ndarray, roi: Window, bin_count: int = 32) -> Histogram:
    """Histogram of the region of interest, max bin normalized to 1.

    Intensity v maps to bin floor(v * bin_count / 256).
    """
    if bin_count < 1:
        raise InvalidInputError(f"bin_count must be positive, got {bin_count}")
    img = np.asarray(img)
    if img.ndim != 2:
        raise InvalidInputError(f"image must be single-channel, got shape {img.shape}")
    sub, _, _ = _clip_window(img, roi)
    bins = (sub.astype(np.int64) * bin_count) // 256
    counts = np.bincount(bins.ravel(), minlength=bin_count).astype(np.float64)
    return Histogram(weights=counts / counts.max(), bin_count=bin_count)


def back_project(img: np.ndarray, hist: Histogram) -> np.ndarray:
    """Replace each pixel by the histogram weight of its intensity bin."""
    img = np.asarray(img)
    if img.ndim != 2:
        raise InvalidInputError(f"image must be single-channel, got shape {img.shape}")
    bins = (img.astype(np.int64) * hist.bin_count) // 256
    return hist.weights[bins]


def _window_mass_centroid(prob: np.ndarray, window: Window):
    """(M00, cx, cy) of the probability map restricted to the window."""
    sub, x0, y0 = _clip_window(prob, window)
    m00 = float(sub.sum())
    if m00 <= 0.0:
        raise LostTrackError(f"no probability mass under window {window}")
    xs = np.arange(x0, x0 + sub.shape[1], dtype=np.float64)
    ys = np.arange(y0, y0 + sub.shape[0], dtype=np.float64)
    cx = float(sub.sum(axis=0) @ xs) / m00
    cy = float(sub.sum(axis=1) @ ys) / m00
    return m00, cx, cy


def _recenter(window: Window, cx: float, cy: float) -> Window:
    # Sub-pixel centroid, but window origins stay on the pixel grid.
    nx = _round_half_up(cx - (window.w - 1) / 2.0)
    ny = _round_half_up(cy - (window.h - 1) / 2.0)
    return Window(nx, ny, window.w, window.h)


def mean_shift(
    prob: np.ndarray, start: Window, max_iter: int = 20, eps: float = 1.0
) -> TrackState:
    """Shift the window onto the local centroid until it stops moving.

    The window is recentered on the mass centroid of the map under it;
    iteration stops when the center moves less than eps pixels
    (converged) or after max_iter iterations. Window size is unchanged.
    """
    if max_iter < 1:
        raise InvalidInputError(f"max_iter must be >= 1, got {max_iter}")
    if eps <= 0:
        raise InvalidInputError(f"eps must be positive, got {eps}")
    prob = np.asarray(prob, dtype=np.float64)
    window = start
    cx, cy = window.center
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        _, cx, cy = _window_mass_centroid(prob, window)
        wcx, wcy = window.center
        shift = math.hypot(cx - wcx, cy - wcy)
        window = _recenter(window, cx, cy)
        if shift < eps:
            converged = True
            break
    return TrackState(
        window=window, centroid=(cx, cy), iterations=iterations, converged=converged
    )


def _adapt_window(prob: np.ndarray, state: TrackState) -> Window:
    """CamShift size adaptation: s = 2 * sqrt(M00 / p_max).

    The new window is centered on the converged centroid, keeps the
    input aspect ratio, and is clamped to [4, image extent] per axis.
    """
    win = state.window
    h, w = prob.shape
    try:
        sub, _, _ = _clip_window(prob, win)
        m00 = float(sub.sum())
    except EmptyRegionError:
        m00 = 0.0
    p_max = float(prob.max())
    s = 2.0 * math.sqrt(m00 / p_max) if p_max > 0 else 0.0
    ratio = math.sqrt(win.w / win.h)
    new_w = min(max(_round_half_up(s * ratio), 4), w)
    new_h = min(max(_round_half_up(s / ratio), 4), h)
    cx, cy = state.centroid
    nx = _round_half_up(cx - (new_w - 1) / 2.0)
    ny = _round_half_up(cy - (new_h - 1) / 2.0)
    nx = min(max(nx, 0), w - new_w)
    ny = min(max(ny, 0), h - new_h)
    return Window(nx, ny, new_w, new_h)


def camshift_step(
    prob: np.ndarray, window: Window, max_iter: int = 20, eps: float = 1.0
) -> Window:
    """One CamShift step: mean shift, then window size adaptation."""
    state = mean_shift(prob, window, max_iter=max_iter, eps=eps)
    return _adapt_window(np.asarray(prob, dtype=np.float64), state)


def track_sequence(
    frames, initial_roi: Window, config: TrackConfig | None = None
) -> list[TrackState]:
    """Track across frames with a histogram model built from frame 0.

    Each frame is back-projected and CamShift-stepped from the previous
    window. A frame whose window holds no mass is flagged lost and the
    previous window is reused for the next frame.
    """
    frames = list(frames)
    if not frames:
        raise InvalidInputError("frame sequence is empty")
    config = config or TrackConfig()
    hist = build_histogram(frames[0], initial_roi, config.bin_count)
    window = initial_roi
    last_centroid = initial_roi.center
    states: list[TrackState] = []
    for frame in frames:
        prob = back_project(frame, hist)
        try:
            state = mean_shift(prob, window, max_iter=config.max_iter, eps=config.eps)
        except LostTrackError:
            states.append(
                TrackState(
                    window=window,
                    centroid=last_centroid,
                    iterations=0,
                    converged=False,
                    lost=True,
                )
            )
            continue
        state.window = _adapt_window(prob, state)
        states.append(state)
        window = state.window
        last_centroid = state.centroid
    return states


def format_track_csv(states: list[TrackState]) -> str:
    """CSV rows `frame,cx,cy,wx,wy,ww,wh,converged,lost`, 3-decimal centroids."""
    lines = ["frame,cx,cy,wx,wy,ww,wh,converged,lost"]
    for i, s in enumerate(states):
        w = s.window
        lines.append(
            f"{i},{s.centroid[0]:.3f},{s.centroid[1]:.3f},"
            f"{w.x},{w.y},{w.w},{w.h},"
            f"{'true' if s.converged else 'false'},{'true' if s.lost else 'false'}"
        )
    return "\n".join(lines) + "\n"
