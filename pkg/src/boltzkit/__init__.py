"""boltzkit: a simulated coherent Ising machine as a Boltzmann sampler.

The package wraps a SimCIM annealer in the plumbing needed to use it as a
generator of Boltzmann-distributed spin configurations: effective-temperature
estimation from paired sample batches, annealed importance sampling for
partition functions, and fully visible Boltzmann machine training, with
brute-force exact oracles for validation at small n.

Submodules:
    rng          deterministic seeded random streams
    errors       exception hierarchy
    ising        models, energies, spin batches, file formats
    exact        exhaustive enumeration oracles
    samplers     uniform / Metropolis / SimCIM draw interface
    simcim       the annealer itself
    thermometry  two-batch effective-temperature estimation
    ais          annealed importance sampling for ln Z
    datasets     Bars-and-Stripes and MNIST loaders
    bm           Boltzmann machine training, classification, generation
    cli          command-line entry point

Importing the top-level package is deliberately cheap (no numpy); pull in
submodules explicitly, e.g. ``from boltzkit import ising``.
"""

__version__ = "0.1.0"

__all__ = [
    "ais",
    "bm",
    "cli",
    "datasets",
    "errors",
    "exact",
    "ising",
    "rng",
    "samplers",
    "simcim",
    "thermometry",
    "__version__",
]
