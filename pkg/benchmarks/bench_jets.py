"""Compiled vs numpy jet product, and the full curvature pipeline on each backend.

    python3 benchmarks/bench_jets.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from solitonlab import catalog, geometry as geo, jets


def _random_jets(n, dim, seed=0):
    rng = np.random.default_rng(seed)
    t = jets.table(dim)
    return jets.Jet(rng.normal(size=(n, t.ncoef)), dim), jets.Jet(rng.normal(size=(n, t.ncoef)), dim)


def _pipeline(spec, x):
    g = spec.metric_jet(x)
    gam = geo.christoffel(g)
    return geo.ricci(geo.riemann(gam))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = ["python"] + (["cython"] if jets._ck is not None else [])
    print(f"{'case':<34s}" + "".join(f"{b:>12s}" for b in backends) + "   speedup")
    cases = []
    for dim, n in [(2, 10_000), (3, 10_000), (4, 2_000)]:
        a, b = _random_jets(n, dim)
        cases.append((f"product dim={dim} n={n}", lambda a=a, b=b: a * b))
    for name in ("round-sphere-2", "kenmotsu-3", "pp-wave-4"):
        spec = catalog.builtin(name)
        x = spec.sample(200, 0)
        cases.append((f"ricci {name} n=200", lambda spec=spec, x=x: _pipeline(spec, x)))
    for label, fn in cases:
        times = []
        ref = None
        for backend in backends:
            jets.set_backend(backend)
            out = fn()
            ref = out.c if ref is None else ref
            np.testing.assert_allclose(out.c, ref, rtol=1e-12, atol=1e-12)
            times.append(min(timeit.repeat(fn, number=1, repeat=args.repeat)))
        speed = f"{times[0] / times[-1]:8.2f}x" if len(times) > 1 else "       -"
        print(f"{label:<34s}" + "".join(f"{t * 1e3:10.2f}ms" for t in times) + "  " + speed)
    jets.set_backend(backends[-1])


if __name__ == "__main__":
    main()
