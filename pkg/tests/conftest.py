"""Shared fixtures: the published example parameter sets."""

import pytest

from harvestdyn import ModelParams


@pytest.fixture
def fig1():
    return ModelParams(a=2.0, c=0.6, d=0.07, e=0.6, q=0.6, m1=0.4, m2=0.4, m=0.5, rho=1.0, p=0.8)


@pytest.fixture
def fig2():
    return ModelParams(a=2.0, c=0.6, d=0.07, e=0.6, q=0.8, m1=0.4, m2=0.4, m=0.6, rho=1.0, p=1.0)


@pytest.fixture
def fig3():
    # harvest fraction varies in the persistence study; 0.4 is a persistent choice
    return ModelParams(a=1.2, c=3.0, d=0.07, e=0.6, q=0.6, m1=0.4, m2=0.4, m=0.4, rho=1.0, p=6.0)


@pytest.fixture
def fig4():
    return ModelParams(a=1.2, c=3.0, d=0.07, e=0.6, q=0.6, m1=0.4, m2=0.4, m=0.5, rho=1.0, p=6.0)


@pytest.fixture
def fig5(fig4):
    return fig4.replace(m=0.385)


@pytest.fixture
def fig6():
    # the (c, d) values are sweep variables; the carrier values are arbitrary
    return ModelParams(a=1.4, c=3.0, d=0.07, e=0.6, q=0.6, m1=0.4, m2=0.4, m=0.5, rho=1.0, p=6.0)


@pytest.fixture
def fig7():
    return ModelParams(a=1.4, c=4.0, d=0.18, e=0.6, q=0.6, m1=0.4, m2=0.4, m=0.5, rho=1.0, p=6.0)


@pytest.fixture
def fig8():
    return ModelParams(a=1.4, c=4.6, d=0.3, e=0.6, q=0.6, m1=0.4, m2=0.4, m=0.5, rho=1.0, p=6.0)
