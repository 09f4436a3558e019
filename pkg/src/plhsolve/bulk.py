"""Exact vectorized evaluation of formulas and cost tables over a sample.

Brute-force interpretation over a sample of size n enumerates n**arity
points; doing that with per-point Python objects is too slow for the sizes
the samplers produce.  This module keeps exactness while letting numpy do
the bulk work:

- every atom compares two scaled sample values, so one n-by-n boolean
  matrix per (coefficient pair, operator) decides the atom everywhere;
  formula evaluation is then elementwise boolean algebra on broadcast views;
- cost values are mapped through `order_embedding_ints`, which preserves
  order of sums of up to a configured number of summands, so tables hold
  plain integers (int64 when they fit, Python bigints otherwise) and
  minimization / threshold comparison is ordinary integer arithmetic.

Nothing here is approximate: the embeddings are exact order embeddings and
every final answer extracted from a table is re-derived with Laurent
arithmetic by the callers that report it.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from . import syntax as sx
from .errors import MultipleGuards, PlhError, ResourceLimitExceeded
from .laurent import Laurent, order_embedding_ints
from .syntax import Atom, BoolAtom, Const, Scaled

_INT64_SAFE = 2**62


def as_int_array(ints, headroom: int = 1):
    """int64 array when all values (times headroom) fit, object array
    otherwise; the flag tells callers whether C-speed arithmetic applies."""
    if ints and max(abs(int(x)) for x in ints) * headroom < _INT64_SAFE:
        return np.array([int(x) for x in ints], dtype=np.int64), True
    return np.array([int(x) for x in ints], dtype=object), False


def open_mesh(n: int, num_axes: int):
    """Index grids such that grids[k] varies along axis k of an
    (n,)*num_axes array."""
    return np.ix_(*([range(n)] * num_axes))


class AtomTables:
    """Boolean comparison tables for atoms over a fixed sample."""

    def __init__(self, sample_values):
        self.values = tuple(sample_values)
        self.n = len(self.values)
        self._scaled: dict[Fraction, list[Laurent]] = {}
        self._pair_cache: dict = {}
        self._unary_cache: dict = {}

    def _scaled_values(self, coeff: Fraction):
        out = self._scaled.get(coeff)
        if out is None:
            out = [v.scale(coeff) for v in self.values]
            self._scaled[coeff] = out
        return out

    def _compare(self, lhs, rhs, op):
        if op == sx.LT:
            return lhs < rhs
        if op == sx.LEQ:
            return lhs <= rhs
        return lhs == rhs

    def pair_table(self, c1: Fraction, c2: Fraction, op: str):
        """M[a, b] = (c1 * values[a]) op (c2 * values[b])."""
        key = (c1, c2, op)
        out = self._pair_cache.get(key)
        if out is None:
            left = self._scaled_values(c1)
            right = self._scaled_values(c2)
            out = np.empty((self.n, self.n), dtype=bool)
            for i, lv in enumerate(left):
                out[i] = [self._compare(lv, rv, op) for rv in right]
            out.setflags(write=False)
            self._pair_cache[key] = out
        return out

    def unary_table(self, coeff: Fraction, op: str, constant: Laurent, flipped: bool):
        """V[a] = (coeff * values[a]) op constant, or constant op (coeff *
        values[a]) when flipped."""
        key = (coeff, op, constant, flipped)
        out = self._unary_cache.get(key)
        if out is None:
            scaled = self._scaled_values(coeff)
            if flipped:
                out = np.array([self._compare(constant, v, op) for v in scaled])
            else:
                out = np.array([self._compare(v, constant, op) for v in scaled])
            out.setflags(write=False)
            self._unary_cache[key] = out
        return out

    def atom_array(self, atom, arity: int):
        """Truth of the atom over the whole point grid, shape (n,)*arity,
        returned broadcast-ready (may be a read-only view)."""
        n = self.n
        if isinstance(atom, BoolAtom):
            return np.broadcast_to(np.bool_(atom.value), (n,) * arity)
        lhs, rhs = atom.lhs, atom.rhs
        if isinstance(lhs, Scaled) and isinstance(rhs, Scaled):
            m = self.pair_table(lhs.coeff, rhs.coeff, atom.op)
            if lhs.var == rhs.var:
                vec = m.diagonal()
                return self._along_axis(vec, lhs.var, arity)
            shape = [1] * arity
            shape[lhs.var] = n
            shape[rhs.var] = n
            if lhs.var < rhs.var:
                view = m.reshape(shape)
            else:
                view = m.T.reshape(shape)
            return np.broadcast_to(view, (n,) * arity)
        if isinstance(lhs, Scaled):
            vec = self.unary_table(lhs.coeff, atom.op, rhs.value, False)
            return self._along_axis(vec, lhs.var, arity)
        if isinstance(rhs, Scaled):
            vec = self.unary_table(rhs.coeff, atom.op, lhs.value, True)
            return self._along_axis(vec, rhs.var, arity)
        # both constant: normalized atoms never reach here, but stay total
        value = self._compare(lhs.value, rhs.value, atom.op)
        return np.broadcast_to(np.bool_(value), (n,) * arity)

    def _along_axis(self, vec, axis: int, arity: int):
        shape = [1] * arity
        shape[axis] = self.n
        return np.broadcast_to(vec.reshape(shape), (self.n,) * arity)

    def formula_array(self, f, arity: int):
        if isinstance(f, sx.Leaf):
            return self.atom_array(f.atom, arity)
        if isinstance(f, sx.And):
            out = np.ones((self.n,) * arity, dtype=bool)
            for p in f.parts:
                out &= self.formula_array(p, arity)
            return out
        if isinstance(f, sx.Or):
            out = np.zeros((self.n,) * arity, dtype=bool)
            for p in f.parts:
                out |= self.formula_array(p, arity)
            return out
        if isinstance(f, sx.Not):
            return ~self.formula_array(f.body, arity)
        raise PlhError("formula is not quantifier-free: %r" % (f,))

    def guard_array(self, guard, arity: int):
        out = np.ones((self.n,) * arity, dtype=bool)
        for atom in guard:
            out &= self.atom_array(atom, arity)
        return out

    def piece_index(self, f: sx.PlhCostFunction):
        """Which piece fires at each point (-1 where none); overlapping
        pieces are detected here in bulk."""
        idx = np.full((self.n,) * f.arity, -1, dtype=np.int16)
        for j, piece in enumerate(f.pieces):
            mask = self.guard_array(piece.guard, f.arity)
            clash = mask & (idx >= 0)
            if clash.any():
                where = tuple(int(i) for i in np.argwhere(clash)[0])
                point = tuple(self.values[i] for i in where)
                raise MultipleGuards(
                    "pieces of %r overlap at %s" % (f.name, point)
                )
            idx[mask] = j
        return idx


class CostTable:
    """Embedded-integer cost table of one cost function over the sample."""

    __slots__ = ("function", "finite", "cost", "int64")

    def __init__(self, function, finite, cost, int64):
        self.function = function
        self.finite = finite  # bool array, shape (n,)*arity
        self.cost = cost  # integer array; arbitrary where not finite
        self.int64 = int64


def build_cost_tables(functions, tables: AtomTables, combo_size: int,
                      extra_values=(), max_cells=None):
    """Cost tables for several functions sharing one order embedding.

    combo_size must be at least the number of cost values ever added
    together before a comparison (summands of an instance plus the
    threshold).  Returns (tables dict by name, embed function for extras).
    """
    values = list(extra_values)
    owners = []  # (function name, piece index, var or None) aligned with chunks
    offsets = {}
    for f in functions:
        for j, piece in enumerate(f.pieces):
            v = piece.value
            if isinstance(v, Scaled):
                offsets[(f.name, j)] = (len(values), True)
                values.extend(t.scale(v.coeff) for t in tables.values)
            else:
                offsets[(f.name, j)] = (len(values), False)
                values.append(v.value)
    embedded = order_embedding_ints(values, combo_size=combo_size)
    arr, int64 = as_int_array(embedded, headroom=combo_size)
    extras = arr[: len(extra_values)]
    out = {}
    n = tables.n
    for f in functions:
        cells = n**f.arity
        if max_cells is not None and cells > max_cells:
            raise ResourceLimitExceeded(
                "cost table for %r needs %d cells, cap is %d"
                % (f.name, cells, max_cells)
            )
        idx = tables.piece_index(f)
        finite = idx >= 0
        cost = np.zeros((n,) * f.arity, dtype=np.int64 if int64 else object)
        for j, piece in enumerate(f.pieces):
            mask = idx == j
            if not mask.any():
                continue
            start, is_scaled = offsets[(f.name, j)]
            if is_scaled:
                vec = arr[start : start + n]
                spread = tables._along_axis(vec, piece.value.var, f.arity)
                cost[mask] = spread[mask]
            else:
                cost[mask] = arr[start]
        out[f.name] = CostTable(f, finite, cost, int64)
    return out, extras


def gather(table_array, scope, num_vars: int, n: int):
    """View a summand's table (indexed by its own positions) as an array
    over the full assignment space, honoring repeated scope variables."""
    mesh = open_mesh(n, num_vars)
    return table_array[tuple(mesh[v] for v in scope)]


def build_slot_tables(f, tables: AtomTables, max_cells=None):
    """Cost table of one function as per-exponent integer coefficient arrays.

    Values at a fixed exponent slot only ever combine with the same slot, so
    scaling each slot by its own common denominator yields exact integer
    coefficients; comparing sums of costs is then a lexicographic slot walk.
    Returns (finite mask, list of (exponent, array) ascending).
    """
    from math import lcm

    n = tables.n
    if max_cells is not None and n**f.arity > max_cells:
        raise ResourceLimitExceeded(
            "cost table for %r needs %d cells, cap is %d"
            % (f.name, n**f.arity, max_cells)
        )
    idx = tables.piece_index(f)
    finite = idx >= 0
    piece_values = []  # per piece: list of Laurent per sample rank, or [const]
    exponents = set()
    for piece in f.pieces:
        if isinstance(piece.value, Scaled):
            vec = [v.scale(piece.value.coeff) for v in tables.values]
        else:
            vec = [piece.value.value]
        piece_values.append(vec)
        for v in vec:
            exponents.update(v.support())
    slots = []
    for e in sorted(exponents):
        denom = 1
        for vec in piece_values:
            for v in vec:
                denom = lcm(denom, v.coeff(e).denominator)
        nums = []
        for vec in piece_values:
            nums.append([int(v.coeff(e) * denom) for v in vec])
        peak = max((abs(x) for row in nums for x in row), default=0)
        if peak * 4 < 2**30:
            dtype = np.int32
        elif peak * 4 < _INT64_SAFE:
            dtype = np.int64
        else:
            dtype = object
        arr = np.zeros((n,) * f.arity, dtype=dtype)
        for j, piece in enumerate(f.pieces):
            mask = idx == j
            if not mask.any():
                continue
            if isinstance(piece.value, Scaled):
                vec = np.array(nums[j], dtype=dtype)
                spread = tables._along_axis(vec, piece.value.var, f.arity)
                arr[mask] = spread[mask]
            else:
                arr[mask] = nums[j][0]
        slots.append((e, arr))
    return finite, slots
