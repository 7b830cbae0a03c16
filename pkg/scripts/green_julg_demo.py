"""Green–Julg at desk scale: σ for three groups and the order-two roundtrip report."""

import argparse
import json
import time

from kkalg.core import ring_algebroid
from kkalg.equivariant import GreenJulg, cyclic_group, green_julg_roundtrip, swap_galgebra, symmetric_group, trivial_galgebra
from kkalg.rings import ZZ


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--json", action="store_true", help="print the roundtrip report as JSON")
    args = ap.parse_args()

    for G in (cyclic_group(2), cyclic_group(3), symmetric_group(3)):
        for A in (trivial_galgebra(G, ring_algebroid(ZZ)), swap_galgebra(G)):
            start = time.perf_counter()
            gj = GreenJulg(A)
            fails = gj.failures()
            print(f"{G.name:4} {A.name:12} fixed rank {len(gj.fixed_lattice()):3}  "
                  f"{'ok' if not fails else fails[0].detail}  ({time.perf_counter() - start:.2f}s)")

    report = green_julg_roundtrip(trivial_galgebra(cyclic_group(2), ring_algebroid(ZZ)))
    if args.json:
        print(json.dumps(report.to_dict(), indent=2, ensure_ascii=False))
        return
    print(f"\nroundtrip for {report.group}, {report.algebra}:")
    for item in report.items:
        print(f"  [{'ok' if item.ok else 'FAIL'}] {item.name}: {item.detail}")


if __name__ == "__main__":
    main()
