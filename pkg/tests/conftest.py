"""Shared test helpers: random expression trees, random polynomials, oracles."""

from fractions import Fraction

import numpy as np
import pytest

from jetlag.expr import add, const, func, mul, pow_, sym
from jetlag.symbols import param, q


SYMBOL_POOL = [q(1, 0), q(1, 1), q(1, 2), q(2, 0), q(2, 1), param("mu"), param("c")]


def random_tree(rng, depth=6, pool=SYMBOL_POOL, allow_funcs=True):
    """Random expression tree; biased toward polynomial-ish shapes."""
    if depth <= 0 or rng.random() < 0.3:
        r = rng.random()
        if r < 0.5:
            return sym(pool[rng.integers(0, len(pool))])
        if r < 0.8:
            return const(Fraction(int(rng.integers(-6, 7)), int(rng.integers(1, 5))))
        return const(float(rng.uniform(-2, 2)))
    r = rng.random()
    if r < 0.35:
        k = int(rng.integers(2, 4))
        return add(*(random_tree(rng, depth - 1, pool, allow_funcs) for _ in range(k)))
    if r < 0.7:
        k = int(rng.integers(2, 4))
        return mul(*(random_tree(rng, depth - 1, pool, allow_funcs) for _ in range(k)))
    if r < 0.85:
        return pow_(random_tree(rng, depth - 1, pool, allow_funcs), int(rng.integers(1, 4)))
    if allow_funcs:
        name = ("sin", "cos", "exp")[rng.integers(0, 3)]
        return func(name, random_tree(rng, depth - 2, pool, allow_funcs))
    return pow_(random_tree(rng, depth - 1, pool, allow_funcs), 2)


def random_polynomial(rng, symbols, degree=3, terms=6, scale=1.0):
    """Random polynomial with float coefficients over the given symbols."""
    total = const(0)
    for _ in range(terms):
        factors = [const(float(rng.uniform(-scale, scale)))]
        for s in symbols:
            e = int(rng.integers(0, degree + 1))
            if e:
                factors.append(pow_(sym(s), e))
        total = add(total, mul(*factors))
    return total


def rational_polynomial(rng, symbols, degree=3, terms=6):
    """Random polynomial with exact rational coefficients."""
    total = const(0)
    for _ in range(terms):
        factors = [const(Fraction(int(rng.integers(-8, 9)), int(rng.integers(1, 7))))]
        for s in symbols:
            e = int(rng.integers(0, degree + 1))
            if e:
                factors.append(pow_(sym(s), e))
        total = add(total, mul(*factors))
    return total


def bounded_degree_polynomial(rng, symbols, total_degree=3, terms=6):
    """Random rational-coefficient polynomial with capped total degree."""
    total = const(0)
    for _ in range(terms):
        budget = int(rng.integers(0, total_degree + 1))
        factors = [const(Fraction(int(rng.integers(-6, 7)), int(rng.integers(1, 5))))]
        order = list(rng.permutation(len(symbols)))
        for idx in order:
            if budget <= 0:
                break
            e = int(rng.integers(0, budget + 1))
            if e:
                factors.append(pow_(sym(symbols[idx]), e))
                budget -= e
        total = add(total, mul(*factors))
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
