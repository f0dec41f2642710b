import pytest

from hgforge.settings import (
    THREADS_VARIABLE,
    Config,
    ConfigLoadError,
    Defaults,
    LatticeConfig,
    Tolerances,
    initialize,
    load_config,
    to_toml,
)


@pytest.fixture
def conf_path(tmp_path):
    return tmp_path / "config.toml"


def test_default_toml_content():
    """Every section of the default config ends up in the file, with comments."""
    content = to_toml(Config())
    for section in ("[defaults]", "[tolerances]", "[lattice]", "[debug]"):
        assert section in content
    assert "# Complex numbers are written as [re, im]." in content
    assert f"# {THREADS_VARIABLE} overrides threads." in content


def test_load_config_does_not_exist(conf_path):
    """A missing config file is created with the defaults."""
    assert load_config(conf_path) == Config()
    assert conf_path.read_text() == to_toml(Config())


def test_default_config_round_trip(conf_path):
    """What we write for the defaults we can read back."""
    conf_path.write_text(to_toml(Config()))
    assert load_config(conf_path) == Config()


def test_duplicate_toml_keys(conf_path):
    """Duplicate keys are caught by toml parser, make sure we report them nicely."""
    conf_path.write_text("[defaults]\nm=2\nm=3")
    with pytest.raises(ConfigLoadError) as excinfo:
        load_config(conf_path)
    assert str(excinfo.value) == (
        'There was a problem parsing your configuration file: Key "m" already exists.'
    )


def test_load_config_toml_parse_error(conf_path):
    conf_path.write_text('a="valid"\nb=invalid\nc="valid"')
    with pytest.raises(ConfigLoadError) as excinfo:
        load_config(conf_path)
    assert str(excinfo.value) == (
        "There was a problem parsing your configuration file: "
        "Unexpected character: 'i' at line 2 col 2\n"
        "b=invalid\n"
        "  ^"
    )


def test_load_valid_config(conf_path):
    conf_path.write_text(
        "[defaults]\n"
        "m = 2\n"
        "trials = 3\n\n"
        "[tolerances]\n"
        "residual = 1e-7\n\n"
        "[lattice]\n"
        "omega2 = [0.1, 1.2]\n"
        "trunc = 50\n\n"
        "[debug]\n"
        "accelerate = false\n"
    )
    config = load_config(conf_path)
    assert config == Config(
        defaults=Defaults(m=2, trials=3),
        tolerances=Tolerances(residual=1e-7),
        lattice=LatticeConfig(omega2=(0.1, 1.2), trunc=50),
        debug={"accelerate": False},
    )
    assert config.lattice.spec().omega2 == complex(0.1, 1.2)
    assert config.lattice.spec().n1 == 50


def test_partial_config_keeps_defaults(conf_path):
    """Sections and keys missing from the file fall back to the defaults."""
    conf_path.write_text("[defaults]\nseed = 42\n")
    config = load_config(conf_path)
    assert config.defaults.seed == 42
    assert config.defaults.m == Defaults().m
    assert config.tolerances == Tolerances()


@pytest.mark.parametrize(
    "contents, errmsg",
    [
        ("[defaults]\nm = 9\n", "m: Expected a value between 1 and 6, got 9."),
        ("[defaults]\ntrials = 0\n", "trials: Must be positive, got 0."),
        ("[tolerances]\nresidual = -1.0\n", "residual: Must be positive, got -1.0."),
        ("[lattice]\ntrunc = 5\n", "trunc: n1: Need at least 13 terms, got 5."),
    ],
)
def test_invalid_values(contents, errmsg, conf_path):
    """Validation problems are reported with the name of the offending key."""
    conf_path.write_text(contents)
    with pytest.raises(ConfigLoadError) as excinfo:
        load_config(conf_path)
    assert str(excinfo.value) == (
        "Detected the following problems with your configuration:\n" + errmsg
    )


def test_lattice_orientation_is_validated(conf_path):
    """omega2 / omega1 must lie in the upper half plane."""
    conf_path.write_text("[lattice]\nomega2 = [0.0, -0.8]\n")
    with pytest.raises(ConfigLoadError) as excinfo:
        load_config(conf_path)
    assert "Im(omega2/omega1) must be positive" in str(excinfo.value)


def test_unknown_section(conf_path):
    conf_path.write_text("[shortcuts]\na = 1\n")
    with pytest.raises(ConfigLoadError) as excinfo:
        load_config(conf_path)
    assert "shortcuts" in str(excinfo.value)


def test_lattice_overrides():
    """Overrides take precedence over the file values."""
    spec = LatticeConfig().spec(omega2=1.5j, n1=30)
    assert spec.omega2 == 1.5j
    assert spec.n1 == 30
    assert spec.omega1 == 1


def test_initialize_creates_config(tmp_path, monkeypatch):
    monkeypatch.delenv(THREADS_VARIABLE, raising=False)
    settings = initialize(config_root=tmp_path)
    assert settings.config == Config()
    assert settings.threads == 1
    assert (tmp_path / ".config" / "hgforge" / "config.toml").exists()


def test_threads_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(THREADS_VARIABLE, "4")
    assert initialize(config_root=tmp_path).threads == 4


@pytest.mark.parametrize("raw", ["many", "0"])
def test_invalid_threads_from_environment(raw, tmp_path, monkeypatch):
    monkeypatch.setenv(THREADS_VARIABLE, raw)
    with pytest.raises(ConfigLoadError) as excinfo:
        initialize(config_root=tmp_path)
    assert THREADS_VARIABLE in str(excinfo.value)
