#!/usr/bin/env python3
"""Walk the harmonic-oscillator ladder end to end.

Builds the operator family behind the oscillator, iterates the Darboux
transformation with automatic level detection, constructs the bound
states via the raising operator, and prints the spectrum bookkeeping.
"""

from darbouxkit import (
    DerivationTable,
    SecondOrderFamily,
    X,
    auto_level_seed,
    darboux_potential,
    hermite,
    normalize,
    oscillator_states,
    to_pretty,
)
from darbouxkit.expr import ONE, ZERO
from darbouxkit.susyqm import matrix_formalism, partner_potentials


def main() -> None:
    family = SecondOrderFamily(
        p=ZERO, q=normalize(-(X ** 2) + 1), r=ONE, w=ONE, table=DerivationTable()
    )
    print("chain of potentials (q at each step, seed log-derivative -x):")
    current = family
    for step in range(5):
        seed = auto_level_seed(current, -X)
        print(f"  step {step}: q = {to_pretty(current.q):<12}  level = {to_pretty(seed.level)}")
        current = darboux_potential(current, seed)
    print(f"  step 5: q = {to_pretty(current.q)}")

    print("\nladder states (component 1 = Hermite factor times Gaussian):")
    states, _table = oscillator_states(5)
    for n, state in enumerate(states):
        print(f"  n={n}: H_{n} = {to_pretty(hermite(n))}")

    pair = partner_potentials(X)
    mf = matrix_formalism(pair, 2)
    print("\nenergy ladder (eigenvalue matrix is lambda * minus_n, lambda = 2n):")
    for n in range(6):
        print(f"  n={n}: lambda = {2 * n}")
    print("\npartner potentials:", to_pretty(pair.v_minus), "|", to_pretty(pair.v_plus))


if __name__ == "__main__":
    main()
