"""Cyclic group arithmetic, homomorphisms Z_K -> Z_N, characters and Fourier transforms.

Everything here is written additively: the element ``x`` of ``Z_n`` is the
integer representative in ``[0, n)``.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass
from math import gcd

import numpy as np

__all__ = [
    "CyclicGroup",
    "GroupElement",
    "Homomorphism",
    "Character",
    "Classification",
    "enumerate_homomorphisms",
    "kernel_order",
    "image_order",
    "cokernel_order",
    "gsd_formula",
    "classify",
    "characters",
    "fourier_transform",
    "inverse_fourier_transform",
]


@dataclass(frozen=True)
class CyclicGroup:
    """The additive cyclic group ``Z_order``."""

    order: int

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 1:
            raise ValueError(f"group order must be a positive integer, got {self.order!r}")

    def __len__(self) -> int:
        return self.order

    def __iter__(self):
        return (GroupElement(self, x) for x in range(self.order))

    def __call__(self, value: int) -> GroupElement:
        return GroupElement(self, value % self.order)

    @property
    def identity(self) -> GroupElement:
        return GroupElement(self, 0)

    def elements(self) -> np.ndarray:
        return np.arange(self.order)


@dataclass(frozen=True)
class GroupElement:
    group: CyclicGroup
    value: int

    def __post_init__(self):
        if not 0 <= self.value < self.group.order:
            raise ValueError(
                f"{self.value} is not a canonical representative of Z_{self.group.order}"
            )

    def _check(self, other: GroupElement) -> None:
        if other.group != self.group:
            raise ValueError("elements belong to different groups")

    def __add__(self, other: GroupElement) -> GroupElement:
        self._check(other)
        return self.group(self.value + other.value)

    def __sub__(self, other: GroupElement) -> GroupElement:
        self._check(other)
        return self.group(self.value - other.value)

    def __neg__(self) -> GroupElement:
        return self.group(-self.value)

    def __mul__(self, k: int) -> GroupElement:
        return self.group(self.value * k)

    __rmul__ = __mul__

    @property
    def inverse(self) -> GroupElement:
        return -self

    def __int__(self) -> int:
        return self.value


@dataclass(frozen=True)
class Homomorphism:
    """A homomorphism ``f: Z_K -> Z_N`` given by ``f(x) = n*x mod N``.

    The multiplier is stored in canonical form ``0 <= n < N``; any integer is
    accepted and reduced, but a map for which ``N`` does not divide ``n*K`` is
    rejected because it is not additive.
    """

    domain: CyclicGroup
    codomain: CyclicGroup
    multiplier: int

    def __post_init__(self):
        n = self.multiplier % self.codomain.order
        object.__setattr__(self, "multiplier", n)
        if (n * self.domain.order) % self.codomain.order:
            raise ValueError(
                f"not a homomorphism: n={n} does not satisfy "
                f"{self.codomain.order} | n*{self.domain.order}"
            )

    @classmethod
    def from_orders(cls, K: int, N: int, n: int) -> Homomorphism:
        return cls(CyclicGroup(K), CyclicGroup(N), n)

    @property
    def K(self) -> int:
        return self.domain.order

    @property
    def N(self) -> int:
        return self.codomain.order

    def __call__(self, x):
        if isinstance(x, GroupElement):
            if x.group != self.domain:
                raise ValueError("argument is not in the domain")
            return self.codomain(self.multiplier * x.value)
        return (self.multiplier * np.asarray(x)) % self.N

    def table(self) -> np.ndarray:
        """Images of ``0, 1, ..., K-1``."""
        return (self.multiplier * np.arange(self.K)) % self.N

    @property
    def is_trivial(self) -> bool:
        return self.multiplier == 0

    @property
    def kernel_order(self) -> int:
        return self.K // self.image_order

    @property
    def image_order(self) -> int:
        # image is generated by f(1) = n, whose additive order in Z_N is N / gcd(n, N)
        return self.N // gcd(self.multiplier, self.N)

    @property
    def cokernel_order(self) -> int:
        return self.N // self.image_order

    def kernel(self) -> np.ndarray:
        return np.flatnonzero(self.table() == 0)

    def image(self) -> np.ndarray:
        return np.unique(self.table())

    def image_in_center(self) -> bool:
        """Center condition for the face coupling. Vacuous for abelian gauge groups."""
        return True


def enumerate_homomorphisms(K: int, N: int) -> list[Homomorphism]:
    """All homomorphisms ``Z_K -> Z_N``, sorted by multiplier.

    The valid multipliers are the multiples of ``N / gcd(N, K)`` in ``[0, N)``,
    so there are exactly ``gcd(N, K)`` of them.
    """
    if K < 1 or N < 1:
        raise ValueError("group orders must be positive")
    step = N // gcd(N, K)
    dom, cod = CyclicGroup(K), CyclicGroup(N)
    return [Homomorphism(dom, cod, n) for n in range(0, N, step)]


def kernel_order(f: Homomorphism) -> int:
    return f.kernel_order


def image_order(f: Homomorphism) -> int:
    return f.image_order


def cokernel_order(f: Homomorphism) -> int:
    return f.cokernel_order


def gsd_formula(f: Homomorphism, genus: int = 1) -> int:
    """Closed-form ground-state degeneracy ``|ker f| * |coker f|**(2*genus)``.

    The quotient is ``Z_N / Im f``; with ``K = 1`` this reproduces the
    ``N**(2*genus)`` degeneracy of the plain quantum double.
    """
    if genus < 0:
        raise ValueError("genus must be non-negative")
    return f.kernel_order * f.cokernel_order ** (2 * genus)


@dataclass(frozen=True)
class Classification:
    label: str
    N: int
    K: int
    n: int
    kernel: int
    image: int
    cokernel: int
    descriptor: str

    def as_dict(self) -> dict:
        return {
            "N": self.N,
            "K": self.K,
            "n": self.n,
            "label": self.label,
            "kernel": self.kernel,
            "image": self.image,
            "cokernel": self.cokernel,
            "descriptor": self.descriptor,
        }


def classify(N: int, K: int, n: int) -> Classification:
    """Sort a model ``(N, K, n)`` into the classes A, B, C.

    A: trivial coupling, maximal algebraic degeneracy.
    B: ``f`` an isomorphism onto ``Z_N``, minimal algebraic degeneracy and every
       non-trivial charge confined.
    C: everything else; charges outside the annihilator of ``Im f`` are confined.
    """
    f = Homomorphism.from_orders(K, N, n)
    kern, img, coker = f.kernel_order, f.image_order, f.cokernel_order
    if f.is_trivial:
        label = "A"
        if K == 1:
            descriptor = "plain quantum double D(Z_%d) (trivial matter)" % N
        else:
            descriptor = "trivial coupling: matter invisible to edge excitations"
    elif kern == 1 and coker == 1:
        label = "B"
        descriptor = "isomorphic coupling: all charges confined, no algebraic degeneracy"
    else:
        label = "C"
        descriptor = (
            f"intermediate coupling: {coker} deconfined charge species, "
            f"algebraic degeneracy {kern}"
        )
    return Classification(label, N, K, f.multiplier, kern, img, coker, descriptor)


@dataclass(frozen=True)
class Character:
    """The character ``x -> exp(2 pi i label x / order)`` of a cyclic group."""

    group: CyclicGroup
    label: int

    def __post_init__(self):
        object.__setattr__(self, "label", self.label % self.group.order)

    def __call__(self, x):
        if isinstance(x, GroupElement):
            x = x.value
        return np.exp(2j * np.pi * self.label * np.asarray(x) / self.group.order)

    def values(self) -> np.ndarray:
        return self(np.arange(self.group.order))

    def __mul__(self, other: Character) -> Character:
        if other.group != self.group:
            raise ValueError("characters of different groups")
        return Character(self.group, self.label + other.label)

    def conj(self) -> Character:
        return Character(self.group, -self.label)


def characters(group: CyclicGroup | int) -> list[Character]:
    if isinstance(group, int):
        group = CyclicGroup(group)
    return [Character(group, k) for k in range(group.order)]


def character_table(order: int) -> np.ndarray:
    """``table[label, x] = exp(2 pi i label x / order)``."""
    k = np.arange(order)
    return np.exp(2j * np.pi * np.outer(k, k) / order)


def _values_on(fn: Callable | Sequence | np.ndarray, order: int) -> np.ndarray:
    if callable(fn):
        return np.array([fn(x) for x in range(order)], dtype=complex)
    vals = np.asarray(fn, dtype=complex)
    if vals.shape != (order,):
        raise ValueError(f"function must be given on all {order} group elements")
    return vals


def fourier_transform(fn, group: CyclicGroup | int) -> np.ndarray:
    """``hat[c] = sum_x fn(x) * chi_c(x)`` for every character label ``c``."""
    order = group if isinstance(group, int) else group.order
    return character_table(order) @ _values_on(fn, order)


def inverse_fourier_transform(hat, group: CyclicGroup | int) -> np.ndarray:
    """Recover ``fn`` from :func:`fourier_transform` output.

    ``fn(x) = (1/|S|) sum_c hat[c] * conj(chi_c(x))``.
    """
    order = group if isinstance(group, int) else group.order
    hat = np.asarray(hat, dtype=complex)
    return character_table(order).conj().T @ hat / order
