"""Shared generators for the test modules."""

import random
from fractions import Fraction

from lptv.trigmat import TrigMatrix


def random_trig(rng: random.Random, n: int, L: int, N: int = 0, exact: bool = True, den: int = 4,
                span: int = 4) -> TrigMatrix:
    """Random TrigMatrix with every coefficient present up to harmonic L and omega power N."""
    terms = []
    for r in range(N + 1):
        for l in range(L + 1):
            for parity in ("c", "s"):
                if l == 0 and parity == "s":
                    continue
                if exact:
                    m = [[Fraction(rng.randint(-span * den, span * den), den) for _ in range(n)]
                         for _ in range(n)]
                else:
                    m = [[rng.uniform(-span, span) for _ in range(n)] for _ in range(n)]
                terms.append((r, l, parity, m))
    return TrigMatrix.from_terms(terms, n=n)
