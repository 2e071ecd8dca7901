"""Finite abelian K0 groups given by a list of moduli.

A class is a tuple of residues, one per cyclic factor.  The zero class is
all zeros; equivalence of projections is equality of classes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

from .errors import GroupMismatch, NonTorsionGroup

KClass = tuple


@dataclass(frozen=True)
class KGroup:
    moduli: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "moduli", tuple(int(k) for k in self.moduli))
        for k in self.moduli:
            if k < 1:
                raise NonTorsionGroup(f"modulus {k} does not define a finite cyclic group")

    @classmethod
    def cuntz(cls, n: int) -> "KGroup":
        """K0 of the Cuntz algebra O_n is Z/(n-1)."""
        if n < 2:
            raise ValueError("O_n needs n >= 2")
        return cls((n - 1,))

    @property
    def order(self) -> int:
        return math.prod(self.moduli)

    @property
    def zero(self) -> KClass:
        return (0,) * len(self.moduli)

    def element(self, residues: Iterable[int]) -> KClass:
        """Reduce ``residues`` into a class; lengths must match."""
        r = tuple(int(x) for x in residues)
        if len(r) != len(self.moduli):
            raise GroupMismatch(f"class {r} has {len(r)} components, group has {len(self.moduli)}")
        return tuple(x % k for x, k in zip(r, self.moduli))

    def check(self, g: KClass) -> KClass:
        g = tuple(g)
        if len(g) != len(self.moduli) or any(not 0 <= x < k for x, k in zip(g, self.moduli)):
            raise GroupMismatch(f"{g} is not a reduced class of Z/{self.moduli}")
        return g

    def add(self, g: KClass, h: KClass) -> KClass:
        g, h = self.check(g), self.check(h)
        return tuple((a + b) % k for a, b, k in zip(g, h, self.moduli))

    def neg(self, g: KClass) -> KClass:
        g = self.check(g)
        return tuple((-a) % k for a, k in zip(g, self.moduli))

    def sub(self, g: KClass, h: KClass) -> KClass:
        return self.add(g, self.neg(h))

    def scale(self, n: int, g: KClass) -> KClass:
        g = self.check(g)
        return tuple((n * a) % k for a, k in zip(g, self.moduli))

    def is_zero(self, g: KClass) -> bool:
        return not any(self.check(g))

    def class_order(self, g: KClass) -> int:
        g = self.check(g)
        return reduce(math.lcm, (k // math.gcd(a, k) for a, k in zip(g, self.moduli)), 1)

    def total(self, classes: Sequence[KClass]) -> KClass:
        return reduce(self.add, classes, self.zero)

    def split_legal(self, parent: KClass, children: Sequence[KClass]) -> bool:
        """A split into nonzero orthogonal subprojections exists iff the classes add up."""
        if not children:
            raise ValueError("a split needs at least one child")
        return self.total(children) == self.check(parent)

    def elements(self):
        """Enumerate every class (small groups only)."""
        def rec(i):
            if i == len(self.moduli):
                yield ()
                return
            for a in range(self.moduli[i]):
                for rest in rec(i + 1):
                    yield (a,) + rest
        return list(rec(0))


def parse_group(spec: str) -> KGroup:
    """Parse ``"2,3"`` into Z/2 x Z/3.  ``""`` and ``"1"`` are trivial; ``"0"`` is Z and rejected."""
    text = spec.strip()
    if not text:
        return KGroup(())
    moduli = []
    for part in text.split(","):
        part = part.strip()
        try:
            k = int(part)
        except ValueError:
            raise NonTorsionGroup(f"bad modulus {part!r}") from None
        if k == 0:
            raise NonTorsionGroup("modulus 0 is a free Z summand; only torsion K0 is supported")
        moduli.append(k)
    return KGroup(tuple(moduli))
