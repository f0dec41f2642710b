import pytest

from hgforge.elliptic import LatticeSpec
from hgforge.params import (
    PositivityColumn,
    RealExponentSet,
    SamplingMode,
    constructed_positivity_set,
    sample_parameters,
    with_a2,
)
from hgforge.settings import Config, Settings


@pytest.fixture(params=[1, 2, 3], ids=lambda m: f"m{m}")
def exponents(request):
    """Generic real exponents, b and c sorted."""
    return sample_parameters(request.param, seed=7)


@pytest.fixture(params=[2, 3], ids=lambda m: f"m{m}")
def exponents_multi(request):
    return sample_parameters(request.param, seed=11)


@pytest.fixture(params=[1, 2, 3], ids=lambda m: f"m{m}")
def complex_exponents(request):
    return sample_parameters(request.param, seed=5, mode=SamplingMode.COMPLEX)


@pytest.fixture(params=[1, 2, 3], ids=lambda m: f"m{m}")
def series_exponents(request):
    """Exponents with a2 = 0, as the Frobenius series need."""
    return with_a2(sample_parameters(request.param, seed=3), 0)


@pytest.fixture
def hand_picked():
    """A small set that is easy to reason about."""
    return RealExponentSet.from_exponents(0.3, [0.1, 0.45], [0.2, 0.7])


@pytest.fixture(
    params=[
        (1, PositivityColumn.COLUMN1),
        (2, PositivityColumn.COLUMN1),
        (3, PositivityColumn.COLUMN2),
        (2, PositivityColumn.NEITHER),
        (3, PositivityColumn.NEITHER),
    ],
    ids=lambda p: f"m{p[0]}-{p[1].value}",
)
def positivity_case(request):
    m, column = request.param
    return constructed_positivity_set(m, column, seed=1), column


@pytest.fixture(scope="session")
def lattice():
    return LatticeSpec(omega1=1, omega2=0.8j)


@pytest.fixture(scope="session")
def trig_limit_lattice():
    return LatticeSpec(omega1=1, omega2=40j)


@pytest.fixture
def settings(tmp_path):
    return Settings(config=Config(), threads=1, config_dir=tmp_path)
