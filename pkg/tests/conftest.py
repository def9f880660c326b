import numpy as np
import pytest
from hypothesis import settings, strategies as st

from sl2coalg.expr import Binary, Call, Const, Neg, Symbol

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

SYMBOLS = ("x", "y", "w")


def ast_strategy(symbols=SYMBOLS, funcs=("exp", "sinh", "cosh", "tanh", "sinhc")):
    """Small expression trees; functions restricted to ones defined on all reals."""
    leaves = st.one_of(
        st.floats(min_value=0, max_value=5).map(lambda v: Const(abs(v))),
        st.sampled_from(symbols).map(Symbol),
    )

    def extend(children):
        return st.one_of(
            children.map(Neg),
            st.tuples(st.sampled_from("+-*"), children, children).map(lambda t: Binary(*t)),
            st.tuples(st.sampled_from(funcs), children).map(lambda t: Call(*t)),
            children.map(lambda c: Binary("^", c, Const(2.0))),
        )

    return st.recursive(leaves, extend, max_leaves=8)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
