"""Time the strain-splitting and histogram kernels on maps of increasing size.

Compares the compiled extension, the NumPy fallback and a per-cell
``numpy.linalg.eigvalsh`` reference, and checks that all three agree.

    python3 benchmarks/bench_kernels.py [--sizes 1000 10000 100000] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from acceptorloss import constants as const
from acceptorloss import kernels
from acceptorloss.acceptor import AcceptorParams, StrainTensor, hamiltonian_strain

P = AcceptorParams()
GB, GBP = const.ev_to_joule(P.gamma_b), const.ev_to_joule(P.gamma_b_prime)


def eigh_reference(strain):
    out = np.empty(len(strain))
    for i, row in enumerate(strain):
        w = np.linalg.eigvalsh(hamiltonian_strain(P, StrainTensor.from_array(row)))
        out[i] = w[2] - w[0]  # Kramers pairs: levels 0,1 and 2,3
    return out


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[1_000, 10_000, 100_000, 1_000_000])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--eigh-max", type=int, default=10_000, help="skip the per-cell reference above this size")
    args = ap.parse_args()

    backends = kernels.backends()
    rng = np.random.default_rng(0)
    print(f"active backend: {kernels.BACKEND}; available: {', '.join(sorted(backends))}")
    head = f"{'cells':>9} | " + " | ".join(f"{n + ' split':>14}" for n in sorted(backends))
    head += f" | {'eigh split':>12} | " + " | ".join(f"{n + ' hist':>13}" for n in sorted(backends))
    print(head)
    for n in args.sizes:
        strain = np.ascontiguousarray(rng.uniform(-3e-5, 3e-5, (n, 6)))
        weights = rng.uniform(0, 1, n)
        edges = np.linspace(0, 150e9, 301)
        cells = []
        results = {}
        for name in sorted(backends):
            b = backends[name]
            results[name] = b.orbital_splittings(strain, GB, GBP)
            cells.append(f"{best_of(lambda: b.orbital_splittings(strain, GB, GBP), args.repeat) * 1e3:11.2f} ms")
        if n <= args.eigh_max:
            ref = eigh_reference(strain)
            for r in results.values():
                np.testing.assert_allclose(r, ref, rtol=1e-9, atol=1e-12 * np.abs(ref).max())
            cells.append(f"{best_of(lambda: eigh_reference(strain), 1) * 1e3:9.1f} ms")
        else:
            cells.append(f"{'skipped':>12}")
        vals = next(iter(results.values())) / const.H
        for name in sorted(backends):
            b = backends[name]
            cells.append(f"{best_of(lambda: b.weighted_histogram(vals, weights, edges), args.repeat) * 1e3:10.2f} ms")
        print(f"{n:>9} | " + " | ".join(cells))


if __name__ == "__main__":
    main()
