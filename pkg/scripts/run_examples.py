"""Classify and certify every built-in example and print a summary table."""

from __future__ import annotations

import argparse

from delaynet import fixtures
from delaynet.certify import certify
from delaynet.classifier import classify

# initial states and horizons long enough for V to settle near zero
RUNS = {
    "example1": ((2.0,), 50.0, 0.01),
    "example2": ((1.2, 0.9, 1.0), 140.0, 0.01),
    "example2_distinct": ((1.2, 0.9, 1.0), 140.0, 0.01),
    "pak1": (fixtures.SCPAK_THETAS[0], 80.0, 0.05),
    "scpak": (fixtures.SCPAK_THETAS[0], 80.0, 0.05),
    "degenerate_pair": ((2.0, 0.5), 40.0, 0.025),
    "reversible_pair": ((2.0,), 20.0, 0.01),
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--quick", action="store_true", help="divide every horizon by 10")
    args = ap.parse_args()
    header = f"{'network':<18} {'theorem':<11} {'V(0)':>10} {'V(T)':>10} {'max dV':>10} {'drift':>10}"
    print(header)
    print("-" * len(header))
    for name, (net, witness) in fixtures.catalogue().items():
        cert = classify(net, witness)
        psi, T, h = RUNS[name]
        if args.quick:
            T /= 10
        if not cert.accepted:
            print(f"{name:<18} {cert.theorem:<11} (no certificate)")
            continue
        run = certify(net, witness, psi, T, h, cert=cert)
        print(
            f"{name:<18} {cert.theorem:<11} {run.trace[0, 1]:10.3e} {run.terminal_value:10.3e}"
            f" {run.max_increment:10.3e} {run.drift:10.3e}"
        )


if __name__ == "__main__":
    main()
