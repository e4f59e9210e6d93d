"""Dense table algebra over discrete variables.

A :class:`Factor` is a real table over an ordered scope of :class:`Variable`
objects.  The scope is sorted by variable name at construction, so two
factors over the same variables always share one axis layout and can be
compared entrywise.  Values are stored as a read-only numpy array whose
axes follow the scope; ``factor.flat()`` gives the row-major table.

Every operation accepts an optional :class:`InferenceStats` and records the
scalar work it performs:

* ``product``  -- one multiplication per output entry
* ``sum_out``  -- ``|input| - |output|`` additions
* ``add``      -- one addition per output entry
* ``divide``   -- one division per output entry
* ``max_out``/``restrict`` -- no arithmetic recorded
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np


class FactorError(ValueError):
    """Raised on ill-formed factors or incompatible factor operations."""


@dataclass(frozen=True)
class Variable:
    """A named discrete variable with ``cardinality`` states."""

    name: str
    cardinality: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if not isinstance(self.cardinality, (int, np.integer)) or self.cardinality < 1:
            raise FactorError(f"variable {self.name!r}: cardinality must be an integer >= 1")
        if self.labels is not None:
            labels = tuple(str(label) for label in self.labels)
            if len(labels) != self.cardinality:
                raise FactorError(
                    f"variable {self.name!r}: {len(labels)} labels for cardinality {self.cardinality}")
            if len(set(labels)) != len(labels):
                raise FactorError(f"variable {self.name!r}: labels must be distinct")
            object.__setattr__(self, "labels", labels)

    def label(self, index: int) -> str:
        return self.labels[index] if self.labels else str(index)


@dataclass
class InferenceStats:
    """Scalar operation counters for one inference call (or a merge of several).

    ``multiplications``, ``additions`` and ``divisions`` count the work done
    while eliminating variables.  Combining the surviving factors after the
    last elimination (and any post-processing of the result) is counted in
    ``final_multiplications``; it is bounded by the size of the answer.
    """

    multiplications: int = 0
    additions: int = 0
    divisions: int = 0
    final_multiplications: int = 0
    max_factor_size: int = 0
    calls: int = 0

    def observe(self, factor: "Factor") -> None:
        self.max_factor_size = max(self.max_factor_size, len(factor.scope))

    def merge(self, other: "InferenceStats") -> "InferenceStats":
        self.multiplications += other.multiplications
        self.additions += other.additions
        self.divisions += other.divisions
        self.final_multiplications += other.final_multiplications
        self.max_factor_size = max(self.max_factor_size, other.max_factor_size)
        self.calls += other.calls
        return self

    def absorb_final(self, other: "InferenceStats") -> "InferenceStats":
        """Merge ``other`` as work done after elimination finished."""
        self.final_multiplications += (other.multiplications + other.divisions
                                       + other.final_multiplications)
        self.additions += other.additions
        self.max_factor_size = max(self.max_factor_size, other.max_factor_size)
        return self

    def as_dict(self) -> dict:
        return {
            "multiplications": self.multiplications,
            "additions": self.additions,
            "divisions": self.divisions,
            "finalMultiplications": self.final_multiplications,
            "maxFactorSize": self.max_factor_size,
            "calls": self.calls,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "InferenceStats":
        return cls(
            multiplications=int(data.get("multiplications", 0)),
            additions=int(data.get("additions", 0)),
            divisions=int(data.get("divisions", 0)),
            final_multiplications=int(data.get("finalMultiplications", 0)),
            max_factor_size=int(data.get("maxFactorSize", 0)),
            calls=int(data.get("calls", 0)),
        )


class Factor:
    """A real-valued table over a scope of distinct variables.

    ``values`` may be given either with one axis per scope variable (in the
    order of ``scope``) or as a flat row-major sequence in that order.
    """

    __slots__ = ("scope", "values")

    def __init__(self, scope: Iterable[Variable], values=1.0):
        scope = tuple(scope)
        names = [v.name for v in scope]
        if len(set(names)) != len(names):
            raise FactorError(f"duplicate variables in scope {names}")
        shape = tuple(int(v.cardinality) for v in scope)
        values = np.array(values, dtype=float)
        if values.shape != shape:
            if values.size != int(np.prod(shape, dtype=np.int64)):
                raise FactorError(
                    f"table over {names} needs {int(np.prod(shape))} entries, got {values.size}")
            values = values.reshape(shape)
        perm = sorted(range(len(scope)), key=lambda i: scope[i].name)
        values = np.ascontiguousarray(np.transpose(values, perm)) if scope else values.reshape(())
        values.setflags(write=False)
        object.__setattr__(self, "scope", tuple(scope[i] for i in perm))
        object.__setattr__(self, "values", values)

    def __setattr__(self, key, value):
        raise AttributeError("Factor is immutable")

    @classmethod
    def _raw(cls, scope: tuple[Variable, ...], values: np.ndarray) -> "Factor":
        # scope already sorted and values laid out to match
        f = object.__new__(cls)
        values = np.array(values, dtype=float, order="C")
        values.setflags(write=False)
        object.__setattr__(f, "scope", scope)
        object.__setattr__(f, "values", values)
        return f

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.scope)

    @property
    def size(self) -> int:
        return int(self.values.size)

    def __contains__(self, item) -> bool:
        name = item.name if isinstance(item, Variable) else item
        return any(v.name == name for v in self.scope)

    def variable(self, name: str) -> Variable:
        for v in self.scope:
            if v.name == name:
                return v
        raise FactorError(f"{name!r} not in scope {self.names}")

    def axis(self, name: str) -> int:
        for i, v in enumerate(self.scope):
            if v.name == name:
                return i
        raise FactorError(f"{name!r} not in scope {self.names}")

    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def aligned(self, names: Sequence[str]) -> np.ndarray:
        """The table with axes permuted into ``names`` order."""
        if sorted(names) != sorted(self.names):
            raise FactorError(f"cannot align scope {self.names} to {tuple(names)}")
        return np.transpose(self.values, [self.axis(n) for n in names])

    def value(self, assignment: dict) -> float:
        return float(self.values[tuple(int(assignment[v.name]) for v in self.scope)])

    def item(self) -> float:
        if self.scope:
            raise FactorError(f"factor over {self.names} is not a scalar")
        return float(self.values)

    def allclose(self, other: "Factor", atol: float = 1e-9) -> bool:
        return (self.scope == other.scope
                and np.allclose(self.values, other.values, rtol=0.0, atol=atol))

    def __repr__(self):
        return f"Factor({list(self.names)}, {self.values.tolist()!r})"


def scalar(value: float) -> Factor:
    return Factor((), value)


def ones(scope: Iterable[Variable]) -> Factor:
    scope = tuple(scope)
    return Factor(scope, np.ones(tuple(v.cardinality for v in scope)))


def uniform(variable: Variable) -> Factor:
    return Factor((variable,), np.full(variable.cardinality, 1.0 / variable.cardinality))


def _union(*scopes: tuple[Variable, ...]) -> tuple[Variable, ...]:
    seen: dict[str, Variable] = {}
    for scope in scopes:
        for v in scope:
            known = seen.setdefault(v.name, v)
            if known.cardinality != v.cardinality:
                raise FactorError(
                    f"variable {v.name!r} has cardinality {known.cardinality} and {v.cardinality}")
    return tuple(seen[n] for n in sorted(seen))


def _expand(f: Factor, scope: tuple[Variable, ...]) -> np.ndarray:
    # both scopes are name-sorted, so f's axes already appear in scope order
    names = set(f.names)
    return f.values.reshape([v.cardinality if v.name in names else 1 for v in scope])


def product(f: Factor, g: Factor, stats: InferenceStats | None = None) -> Factor:
    """Pointwise product over the union of both scopes."""
    scope = _union(f.scope, g.scope)
    values = _expand(f, scope) * _expand(g, scope)
    values = np.broadcast_to(values, tuple(v.cardinality for v in scope))
    out = Factor._raw(scope, values)
    if stats is not None:
        stats.multiplications += out.size
        stats.observe(out)
    return out


def product_all(factors: Iterable[Factor], stats: InferenceStats | None = None) -> Factor:
    """Left-to-right product; the empty product is the scalar 1."""
    factors = list(factors)
    if not factors:
        return scalar(1.0)
    return reduce(lambda a, b: product(a, b, stats), factors)


def add(f: Factor, g: Factor, stats: InferenceStats | None = None) -> Factor:
    scope = _union(f.scope, g.scope)
    values = _expand(f, scope) + _expand(g, scope)
    values = np.broadcast_to(values, tuple(v.cardinality for v in scope))
    out = Factor._raw(scope, values)
    if stats is not None:
        stats.additions += out.size
        stats.observe(out)
    return out


def add_all(factors: Iterable[Factor], stats: InferenceStats | None = None) -> Factor:
    """Sum of utility tables; the empty sum is the scalar 0."""
    factors = list(factors)
    if not factors:
        return scalar(0.0)
    return reduce(lambda a, b: add(a, b, stats), factors)


def scale(f: Factor, c: float, stats: InferenceStats | None = None) -> Factor:
    out = Factor._raw(f.scope, f.values * float(c))
    if stats is not None:
        stats.multiplications += out.size
    return out


def sum_out(f: Factor, x, stats: InferenceStats | None = None) -> Factor:
    """Marginalize ``x`` (a Variable or a name) out of ``f``."""
    name = x.name if isinstance(x, Variable) else x
    axis = f.axis(name)
    out = Factor._raw(f.scope[:axis] + f.scope[axis + 1:], f.values.sum(axis=axis))
    if stats is not None:
        stats.additions += f.size - out.size
        stats.observe(out)
    return out


def sum_out_all(f: Factor, names: Iterable, stats: InferenceStats | None = None) -> Factor:
    for x in names:
        f = sum_out(f, x, stats)
    return f


@dataclass(frozen=True)
class ArgTable:
    """Maximizing choices of ``variable`` for each configuration of ``scope``."""

    variable: Variable
    scope: tuple[Variable, ...]
    choices: np.ndarray

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.scope)

    def choice(self, assignment: dict) -> int:
        return int(self.choices[tuple(int(assignment[v.name]) for v in self.scope)])


def max_out(f: Factor, x, stats: InferenceStats | None = None) -> tuple[Factor, ArgTable]:
    """Maximize ``x`` out of ``f``; ties go to the smallest index."""
    name = x.name if isinstance(x, Variable) else x
    axis = f.axis(name)
    scope = f.scope[:axis] + f.scope[axis + 1:]
    choices = np.argmax(f.values, axis=axis)
    maxima = np.take_along_axis(f.values, np.expand_dims(choices, axis), axis=axis).squeeze(axis)
    out = Factor._raw(scope, maxima)
    if stats is not None:
        stats.observe(out)
    choices = np.asarray(choices, dtype=np.int64)
    choices.setflags(write=False)
    return out, ArgTable(f.scope[axis], scope, choices)


def divide(f: Factor, g: Factor, stats: InferenceStats | None = None) -> Factor:
    """Entrywise ``f / g`` with ``scope(g)`` contained in ``scope(f)``.

    ``0/0`` is defined as 0; a nonzero numerator over a zero denominator
    means the two factors are inconsistent and raises :class:`FactorError`.
    """
    if not set(g.names) <= set(f.names):
        raise FactorError(f"divisor scope {g.names} not contained in {f.names}")
    _union(f.scope, g.scope)
    den = np.broadcast_to(_expand(g, f.scope), f.values.shape)
    zero = den == 0
    if np.any(zero & (f.values != 0)):
        raise FactorError("division of a nonzero entry by zero")
    with np.errstate(divide="ignore", invalid="ignore"):
        values = np.where(zero, 0.0, f.values / np.where(zero, 1.0, den))
    out = Factor._raw(f.scope, values)
    if stats is not None:
        stats.divisions += out.size
        stats.observe(out)
    return out


def restrict(f: Factor, x, value: int) -> Factor:
    """Slice of ``f`` at ``x = value``."""
    name = x.name if isinstance(x, Variable) else x
    axis = f.axis(name)
    card = f.scope[axis].cardinality
    if not 0 <= int(value) < card:
        raise FactorError(f"value {value} out of range for {name!r} (cardinality {card})")
    return Factor._raw(f.scope[:axis] + f.scope[axis + 1:], np.take(f.values, int(value), axis=axis))


def normalize(f: Factor) -> Factor:
    """Scale ``f`` to sum to one (an all-zero table stays zero)."""
    total = float(f.values.sum())
    return f if total == 0 else Factor._raw(f.scope, f.values / total)
