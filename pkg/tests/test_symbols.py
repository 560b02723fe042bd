import pytest

from jetlag.errors import UnknownIdentifierError
from jetlag.symbols import (
    Kind,
    Symbol,
    acc,
    aux,
    dp,
    dq,
    lam,
    p,
    pa,
    pm,
    pq,
    param,
    q,
    symbol_from_name,
)


ROSTER = [
    q(1, 0), q(2, 3), p(1, 1), p(7, 0), acc(1, 0), acc(2, 1), aux(3, 0),
    pq(1), pa(2), pm(3), dq(1, 2), dp(4, 0), lam(1), lam(12),
    param("mu"), param("rho"), param("c2"), param("A"),
]


def test_render_round_trips():
    for s in ROSTER:
        assert symbol_from_name(s.render()) == s


def test_identity_is_kind_component_level_name():
    assert q(1, 2) == q(1, 2)
    assert q(1, 2) != q(2, 1)
    assert q(1, 0) != p(1, 0)
    assert param("mu") != param("nu")
    assert hash(q(1, 2)) == hash(q(1, 2))


def test_component_must_be_positive():
    with pytest.raises(ValueError):
        q(0, 1)
    with pytest.raises(ValueError):
        Symbol(Kind.P, -1, 0)


@pytest.mark.parametrize(
    "bad",
    ["q1", "q0_1", "p0_0", "lam", "lam0", "pq0", "pq1_2", "dq3", "m7", "a12", "sin"],
)
def test_malformed_structured_names_rejected(bad):
    with pytest.raises(UnknownIdentifierError):
        symbol_from_name(bad)


@pytest.mark.parametrize("name", ["mu", "rho", "c2", "A", "B", "lmb", "a_coef", "m", "zeta"])
def test_parameters_are_bare_identifiers(name):
    s = symbol_from_name(name)
    assert s.kind is Kind.PARAM
    assert s.render() == name


def test_shifted_raises_level():
    assert q(1, 0).shifted() == q(1, 1)
    assert acc(2, 0).shifted() == acc(2, 1)


def test_sort_is_deterministic():
    once = sorted(ROSTER)
    again = sorted(list(reversed(ROSTER)))
    assert once == again
