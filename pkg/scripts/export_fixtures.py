"""Write the built-in example networks to src/delaynet/data as text files."""

from __future__ import annotations

import argparse
from pathlib import Path

from delaynet import fixtures
from delaynet.network import serialize_network, serialize_witness

DEFAULT_OUT = Path(__file__).resolve().parents[1] / "src" / "delaynet" / "data"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", type=Path, default=DEFAULT_OUT)
    args = ap.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)
    for name, (net, witness) in fixtures.catalogue(exact=True).items():
        (args.out_dir / f"{name}.net").write_text(serialize_network(net))
        if witness is not None:
            (args.out_dir / f"{name}.wit").write_text(serialize_witness(witness))
        print(f"wrote {name}")


if __name__ == "__main__":
    main()
