#!/usr/bin/env python3
"""Times the compiled evolution kernel against the pure-python fallback.

The hot loops are the adaptive stepping inside one conditional evolution
and the per-trajectory integrations of a Monte Carlo batch.  Everything
else (synthesis, bookkeeping) is shared.

Usage: python3 benchmarks/bench_backends.py [--trajectories N] [--repeat R]
"""

import argparse
import time

from cascade_sim import EvolutionConfig, SynthesisSpec, SystemParams, \
    available_backends, evolve, run_trajectories, set_backend, synthesize


def best_of(repeat, fn):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trajectories", type=int, default=200)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    params = SystemParams()
    synth = synthesize(SynthesisSpec(tail=params.kappa, params=params))
    ideal = EvolutionConfig(params=params,
                            pulses=(synth.pulse1, synth.pulse2),
                            initial=synth.initial_state())
    mismatched = EvolutionConfig(params=params,
                                 pulses=(synth.pulse1, synth.pulse1),
                                 initial=synth.initial_state())

    cases = {
        "evolve (ideal pulse)": lambda: evolve(ideal),
        "evolve (mismatched)": lambda: evolve(mismatched),
        f"{args.trajectories} trajectories (mismatched)":
            lambda: run_trajectories(mismatched, args.trajectories, seed=1),
    }

    backends = available_backends()
    results = {}
    fidelity = {}
    for name in backends:
        set_backend(name)
        results[name] = {label: best_of(args.repeat, fn)
                         for label, fn in cases.items()}
        fidelity[name] = evolve(ideal).fidelity

    width = max(len(label) for label in cases)
    header = f"{'case':<{width}}" + "".join(f"  {b:>12}" for b in backends)
    if len(backends) == 2:
        header += f"  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for label in cases:
        row = f"{label:<{width}}"
        for b in backends:
            row += f"  {results[b][label] * 1e3:>10.1f}ms"
        if len(backends) == 2:
            slow, fast = (results["python"][label],
                          results["compiled"][label])
            row += f"  {slow / fast:>7.1f}x"
        print(row)

    values = list(fidelity.values())
    agree = max(abs(v - values[0]) for v in values)
    print(f"\nideal-transfer fidelity agreement across backends: "
          f"{agree:.2e}")
    if "compiled" not in backends:
        print("note: compiled kernel unavailable; showing python only")


if __name__ == "__main__":
    main()
