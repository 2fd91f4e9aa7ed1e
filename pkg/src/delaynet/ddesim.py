"""Fixed-step RK4 integration of constant-delay mass-action DDEs by the
method of steps, with piecewise cubic Hermite dense output.

Time starts at 0; the initial history lives on [-tau_max, 0].  Delayed
states needed by a stage at time t are read from the dense output at
t - tau, which always lies in an already completed step because the step
is at most a tenth of the smallest positive delay.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .kinetics import CompiledRHS
from .network import DelayedNetwork

NEGATIVE_ABORT = -1e-9


class SimulationError(RuntimeError):
    pass


def _hermite(t, a, b, xa, xb, da, db):
    hh = b - a
    if hh == 0:
        return np.array(xa, dtype=float)
    u = (t - a) / hh
    u2, u3 = u * u, u * u * u
    h00 = 2 * u3 - 3 * u2 + 1
    h10 = u3 - 2 * u2 + u
    h01 = -2 * u3 + 3 * u2
    h11 = u3 - u2
    return h00 * xa + h10 * hh * da + h01 * xb + h11 * hh * db


@dataclass
class Piecewise:
    """Piecewise cubic Hermite curve.

    Piece k spans [times[k], times[k+1]] with end values values[k],
    values[k+1] and one-sided end derivatives dleft[k], dright[k], so the
    derivative may jump at a breakpoint while the value stays continuous.
    """

    times: np.ndarray
    values: np.ndarray
    dleft: np.ndarray
    dright: np.ndarray

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.times[0]), float(self.times[-1])

    def _piece(self, t: float) -> int:
        lo, hi = self.domain
        span = max(1.0, abs(lo), abs(hi))
        if t < lo - 1e-12 * span or t > hi + 1e-12 * span:
            raise ValueError(f"t={t} outside [{lo}, {hi}]")
        k = int(np.searchsorted(self.times, t, side="right")) - 1
        return min(max(k, 0), len(self.times) - 2) if len(self.times) > 1 else 0

    def __call__(self, t: float) -> np.ndarray:
        if len(self.times) == 1:
            self._piece(t)
            return self.values[0].copy()
        k = self._piece(t)
        t = min(max(t, self.times[k]), self.times[k + 1])
        return _hermite(
            t, self.times[k], self.times[k + 1],
            self.values[k], self.values[k + 1], self.dleft[k], self.dright[k],
        )

    def eval_many(self, ts: np.ndarray) -> np.ndarray:
        """Vectorised evaluation; returns shape (len(ts), n)."""
        ts = np.asarray(ts, dtype=float)
        if len(self.times) == 1:
            return np.repeat(self.values[:1], ts.size, axis=0)
        lo, hi = self.domain
        span = max(1.0, abs(lo), abs(hi))
        if ts.size and (ts.min() < lo - 1e-12 * span or ts.max() > hi + 1e-12 * span):
            raise ValueError(f"evaluation outside [{lo}, {hi}]")
        k = np.clip(np.searchsorted(self.times, ts, side="right") - 1, 0, len(self.times) - 2)
        a, b = self.times[k], self.times[k + 1]
        hh = (b - a)[:, None]
        u = (np.clip(ts, a, b) - a)[:, None] / np.where(hh == 0, 1.0, hh)
        u2, u3 = u * u, u * u * u
        return (
            (2 * u3 - 3 * u2 + 1) * self.values[k]
            + (u3 - 2 * u2 + u) * hh * self.dleft[k]
            + (-2 * u3 + 3 * u2) * self.values[k + 1]
            + (u3 - u2) * hh * self.dright[k]
        )

    def breakpoints(self, a: float, b: float) -> np.ndarray:
        inner = self.times[(self.times > a) & (self.times < b)]
        return np.concatenate(([a], inner, [b]))


class HistorySegment(Piecewise):
    """Initial history on [-tau_max, 0]."""

    @classmethod
    def constant(cls, x: Sequence[float], tau_max: float) -> "HistorySegment":
        x = np.asarray(x, dtype=float)
        z = np.zeros((1, x.size))
        if tau_max <= 0:
            return cls(np.array([0.0]), x[None, :].copy(), z[:0], z[:0])
        return cls(np.array([-float(tau_max), 0.0]), np.vstack([x, x]), z.copy(), z.copy())

    @classmethod
    def from_function(
        cls, phi: Callable[[float], Sequence[float]], tau_max: float, h: float
    ) -> "HistorySegment":
        """Sample phi on a grid of spacing about h; derivatives by finite
        differences."""
        m = max(1, math.ceil(tau_max / h - 1e-12))
        ts = np.linspace(-tau_max, 0.0, m + 1)
        xs = np.array([np.asarray(phi(t), dtype=float) for t in ts])
        if m >= 2:
            ds = np.gradient(xs, ts, axis=0, edge_order=2)
        else:
            ds = np.vstack([xs[1] - xs[0]] * 2) / (ts[1] - ts[0])
        return cls(ts, xs, ds[:-1], ds[1:])


@dataclass
class Window:
    """View of a curve as a segment s -> curve(t + s), s in [-tau, 0]."""

    curve: Piecewise
    t: float
    tau: float

    def __call__(self, s: float) -> np.ndarray:
        return self.curve(self.t + s)

    def eval_many(self, ss: np.ndarray) -> np.ndarray:
        return self.curve.eval_many(np.asarray(ss, dtype=float) + self.t)

    def breakpoints(self, a: float, b: float) -> np.ndarray:
        return self.curve.breakpoints(self.t + a, self.t + b) - self.t


@dataclass
class Trajectory:
    net: DelayedNetwork
    curve: Piecewise
    h: float
    T: float
    step_defects: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def tau_max(self) -> float:
        return self.net.tau_max

    @property
    def times(self) -> np.ndarray:
        return self.curve.times

    @property
    def step_times(self) -> np.ndarray:
        return self.curve.times[self.curve.times >= 0]

    @property
    def states(self) -> np.ndarray:
        return self.curve.values[self.curve.times >= 0]

    def segment(self, t: float) -> Window:
        lo, hi = self.curve.domain
        if t - self.tau_max < lo - 1e-9 or t > hi + 1e-9:
            raise ValueError(f"segment at t={t} needs [{t - self.tau_max}, {t}] within [{lo}, {hi}]")
        return Window(self.curve, t, self.tau_max)

    def to_csv(self, stride: int = 1) -> str:
        return trajectory_csv(self, stride)


def dense_eval(traj: Trajectory, t: float) -> np.ndarray:
    return traj.curve(t)


def simulate(
    net: DelayedNetwork,
    psi: HistorySegment | Sequence[float],
    T: float,
    h: float,
) -> Trajectory:
    """Integrate from history ``psi`` (a segment or a constant state) to T.

    The step is T / ceil(T / h), so it never exceeds ``h``.
    """
    if not h > 0:
        raise ValueError("step must be positive")
    if T < 0:
        raise ValueError("T must be nonnegative")
    rhs = CompiledRHS(net)
    positive = [d for d in rhs.delays if d > 0]
    tau_max = max(positive, default=0.0)
    if positive and h > min(positive) / 10 * (1 + 1e-12):
        raise ValueError(f"step {h} exceeds a tenth of the smallest delay {min(positive)}")
    if not isinstance(psi, Piecewise):
        psi = np.asarray(psi, dtype=float)
        if psi.shape != (net.n,):
            raise ValueError(f"initial state has shape {psi.shape}, expected ({net.n},)")
        psi = HistorySegment.constant(psi, tau_max)
    lo, hi = psi.domain
    if abs(hi) > 1e-12 or lo > -tau_max + 1e-12:
        raise ValueError(f"history must cover [{-tau_max}, 0], got [{lo}, {hi}]")
    if np.any(psi.values <= 0):
        raise ValueError("initial history must be strictly positive")

    N = math.ceil(T / h - 1e-12) if T > 0 else 0
    step = T / N if N else h
    n = net.n
    X = np.empty((N + 1, n))
    D = np.empty((N + 1, n))
    X[0] = psi(0.0)
    defects = np.zeros(N)

    def state_at(t: float) -> np.ndarray:
        if t <= 0.0:
            return psi(max(t, lo))
        k = min(int(t / step), N - 1)
        a = k * step
        return _hermite(t, a, a + step, X[k], X[k + 1], D[k], D[k + 1])

    def f(t: float, x: np.ndarray) -> np.ndarray:
        xc = np.maximum(x, 0.0)
        past = [xc if d == 0.0 else np.maximum(state_at(t - d), 0.0) for d in rhs.delays]
        return rhs.dde(xc, past)

    D[0] = f(0.0, X[0])
    for k in range(N):
        t = k * step
        x = X[k]
        k1 = D[k]
        k2 = f(t + step / 2, x + step / 2 * k1)
        k3 = f(t + step / 2, x + step / 2 * k2)
        k4 = f(t + step, x + step * k3)
        xn = x + step / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(xn)):
            raise SimulationError(f"nonfinite state at t={t + step:.6g}")
        if xn.min() < NEGATIVE_ABORT:
            j = int(np.argmin(xn))
            raise SimulationError(
                f"{net.species[j]} fell to {xn[j]:.3g} at t={t + step:.6g}"
            )
        X[k + 1] = xn
        D[k + 1] = f(t + step, xn)
        # residual of the Hermite interpolant at the midpoint
        mid = t + step / 2
        pm = 0.5 * (x + xn) + step / 8 * (k1 - D[k + 1])
        dpm = 1.5 * (xn - x) / step - 0.25 * (k1 + D[k + 1])
        defects[k] = step * float(np.max(np.abs(dpm - f(mid, pm))))

    ts = np.arange(N + 1) * step
    times = np.concatenate((psi.times[:-1], ts))
    values = np.vstack((psi.values[:-1], X))
    dleft = np.vstack((psi.dleft, D[:-1])) if N else psi.dleft
    dright = np.vstack((psi.dright, D[1:])) if N else psi.dright
    curve = Piecewise(times, values, dleft, dright)
    return Trajectory(net, curve, step, float(T), defects)


def trajectory_csv(traj: Trajectory, stride: int = 1) -> str:
    """CSV with header ``t,x_<species>...``: history samples on the step
    grid from -tau_max, then every ``stride``-th step."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + [f"x_{s}" for s in traj.net.species])
    m = math.ceil(traj.tau_max / traj.h - 1e-12) if traj.tau_max > 0 else 0
    hist = [-traj.tau_max + i * traj.tau_max / m for i in range(m)] if m else []
    steps = traj.step_times[::stride]
    for t in list(hist) + list(steps):
        x = traj.curve(float(t))
        w.writerow([repr(float(t))] + [repr(float(v)) for v in x])
    return buf.getvalue()
