"""Seeded random generators shared by the test suites.

All ensembles are driven by explicit numpy Generators so every run sees
the same cases.  Netlists are built as a random spanning chain over a
small node set plus extra random branches, which keeps them connected by
construction; cases whose nodal system is singular at a source frequency
are rejected and redrawn.
"""

import math

import numpy as np
import pytest

from pqbalance.network import Branch, Netlist, SingularNetworkError, solve
from pqbalance.spectrum import VOLT, LineSpectrum

KINDS = ("resistor", "inductor", "capacitor")


def random_source(rng, max_lines=8, amp_span=(0.1, 10.0), allow_dc=False):
    """Random commensurate voltage with 1..max_lines harmonic lines."""
    base = 10.0 ** rng.uniform(-1.0, 1.0)
    count = int(rng.integers(1, max_lines + 1))
    harmonics = rng.choice(np.arange(1, 13), size=count, replace=False)
    lo, hi = math.log10(amp_span[0]), math.log10(amp_span[1])
    pairs = []
    for n in sorted(int(h) for h in harmonics):
        peak = 10.0 ** rng.uniform(lo, hi)
        phase = rng.uniform(0.0, 2.0 * math.pi)
        pairs.append((n * base, peak * complex(math.cos(phase), math.sin(phase))))
    if allow_dc and rng.random() < 0.4:
        pairs.insert(0, (0.0, rng.uniform(-5.0, 5.0)))
    return LineSpectrum.from_lines(pairs, VOLT)


def random_netlist(rng, max_branches=10, value_span=(1e-2, 1e2),
                   require_resistor=False):
    """Random connected RLC netlist across a two-terminal port."""
    extra = int(rng.integers(0, 4))
    nodes = ["gnd", "port"] + [f"n{i}" for i in range(extra)]
    spanning = len(nodes) - 1
    count = int(rng.integers(spanning, max_branches + 1)) if spanning <= max_branches \
        else spanning
    count = max(count, 1)
    order = list(rng.permutation(nodes))
    lo, hi = math.log10(value_span[0]), math.log10(value_span[1])
    branches = []
    for k in range(count):
        if k < spanning:
            pair = (order[k], order[k + 1])
        else:
            a, b = rng.choice(len(nodes), size=2, replace=False)
            pair = (nodes[a], nodes[b])
        kind = KINDS[int(rng.integers(0, 3))]
        value = 10.0 ** rng.uniform(lo, hi)
        branches.append(Branch(f"b{k}", kind, value, pair))
    if require_resistor and not any(b.kind == "resistor" for b in branches):
        b = branches[0]
        branches[0] = Branch(b.id, "resistor", b.value, b.nodes)
    return Netlist(tuple(branches), ("port", "gnd"))


def solved_case(rng, max_branches=10, value_span=(1e-2, 1e2), max_lines=8,
                amp_span=(0.1, 10.0), allow_dc=False, require_resistor=False,
                source=None, attempts=50):
    """Draw a solved random case, rejecting singular net/source pairings.

    The returned NetworkSolution carries its netlist and source; pass
    ``source`` to hold the excitation fixed while the net varies.
    """
    for _ in range(attempts):
        net = random_netlist(rng, max_branches, value_span, require_resistor)
        src = source if source is not None else random_source(
            rng, max_lines, amp_span, allow_dc)
        try:
            return solve(net, src)
        except SingularNetworkError:
            continue
    raise RuntimeError("could not draw a solvable random case")


@pytest.fixture
def rng():
    return np.random.default_rng(20230823)


@pytest.fixture
def flicker_source():
    """10*sqrt(2)*(1 + 0.1 cos 0.2t) cos t as exact lines."""
    return LineSpectrum.am_modulated(10.0 * math.sqrt(2.0), 1.0, 0.1, 0.2, VOLT)


@pytest.fixture
def flicker_netlist():
    """Reference load for the benchmark source: 10 ohm parallel 0.3 F."""
    return Netlist(
        (
            Branch("r1", "resistor", 10.0, ("a", "0")),
            Branch("c1", "capacitor", 0.3, ("a", "0")),
        ),
        ("a", "0"),
    )
