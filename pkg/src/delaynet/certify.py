"""Trajectory-level certification: simulate a classified network, centre
the Lyapunov functional at the equilibrium of the trajectory's invariant
set, and record descent and conservation statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classifier import StabilityCertificate, classify
from .ddesim import Trajectory, simulate
from .invariants import InvariantSetSpec, conservation_check, equilibrium_in_set, invariant_set
from .lyapunov import LyapunovFunctional, build_functional, trace
from .network import ConjugacyWitness, DelayedNetwork

DESCENT_TOL = 1e-6


@dataclass
class CertificationRun:
    certificate: StabilityCertificate
    spec: InvariantSetSpec
    xbar: np.ndarray
    functional: LyapunovFunctional
    trajectory: Trajectory
    trace: np.ndarray  # rows (t, V, dV/dt)
    drift: float

    @property
    def max_increment(self) -> float:
        v = self.trace[:, 1]
        return float(np.max(np.diff(v), initial=0.0))

    @property
    def terminal_value(self) -> float:
        return float(self.trace[-1, 1])

    @property
    def endpoint(self) -> np.ndarray:
        return self.trajectory.curve(self.trajectory.T)

    def descent_ok(self, tol: float = DESCENT_TOL) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.trace[:, 1]))))
        return self.max_increment <= tol * scale

    def to_json(self) -> dict:
        return {
            "theorem": self.certificate.theorem,
            "xbar": [float(v) for v in self.xbar],
            "invariant_set": self.spec.to_json(),
            "endpoint": [float(v) for v in self.endpoint],
            "max_increment": self.max_increment,
            "terminal_V": self.terminal_value,
            "conservation_drift": self.drift,
            "descent_ok": self.descent_ok(),
        }


def certificate_witness(cert: StabilityCertificate) -> ConjugacyWitness:
    d = cert.decomposition
    return ConjugacyWitness(d.target, d.l_vector)


def center_for(net: DelayedNetwork, cert: StabilityCertificate, psi) -> tuple[InvariantSetSpec, np.ndarray]:
    """Invariant set through psi and the equilibrium inside it."""
    w = certificate_witness(cert)
    kind = "new_scc_de3" if cert.decomposition.L is not None else "new_scc_de12"
    spec = invariant_set(net, w, psi, kind)
    return spec, equilibrium_in_set(net, w, spec)


def certify(
    net: DelayedNetwork,
    witness: ConjugacyWitness | None,
    psi,
    T: float,
    h: float,
    samples: int = 400,
    cert: StabilityCertificate | None = None,
) -> CertificationRun:
    cert = classify(net, witness) if cert is None else cert
    if not cert.accepted:
        raise ValueError("network is not certified: " + "; ".join(cert.notes))
    spec, xbar = center_for(net, cert, psi)
    V = build_functional(cert, xbar)
    traj = simulate(net, psi, T, h)
    stride = max(1, (len(traj.step_times) - 1) // samples)
    times = traj.step_times[::stride]
    rows = trace(V, traj, times)
    drift = conservation_check(traj, spec, samples=min(samples, 200))
    return CertificationRun(cert, spec, xbar, V, traj, rows, drift)
