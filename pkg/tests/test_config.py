import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from igdpinn.config import Config, parse_config, serialize_config
from igdpinn.errors import ConfigError


def test_minimal_config_fills_defaults():
    cfg = parse_config("# nothing but a comment\n\n")
    assert cfg == Config()
    assert cfg.optim.eta == 1.0 and cfg.lbfgs.memory == 10 and cfg.lbfgs.grad_tol == 1e-8
    assert cfg.diagnostics.panels == 32 and cfg.seed == 0


def test_values_are_parsed():
    cfg = parse_config("""
        optim.eta = 0.1   # trailing comment
        optim.mode = gd
        model.m = 64
        study.widths = [8, 16]
        diagnostics.residual_terms = true
        output = "runs/a #1"
    """)
    assert cfg.optim.eta == 0.1 and cfg.optim.mode == "gd" and cfg.model.m == 64
    assert cfg.study.widths == (8, 16) and cfg.diagnostics.residual_terms is True
    assert cfg.output == "runs/a #1"


@pytest.mark.parametrize("text, key", [
    ("optim.eta = -1", "optim.eta"),
    ("optim.learning_rate = 1", "optim.learning_rate"),
    ("model.m = 2.5", "model.m"),
    ("model.activation = relu", "model.activation"),
    ("diagnostics.panels = 7", "diagnostics.panels"),
    ("scaling.widths = [128]", "scaling.widths"),
    ("optim.eta = nan", "optim.eta"),
    ("lbfgs.wolfe_c1 = 0.95", "lbfgs.wolfe_c2"),
    ("seed = -3", "seed"),
    ("optim.iters =", "optim.iters"),
])
def test_errors_name_the_key(text, key):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert exc.value.key == key and key in str(exc.value)


def test_line_without_equals():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config("seed = 1\noops\n")


def test_with_values_revalidates():
    cfg = Config().with_values(**{"optim.eta": 0.25, "seed": 7})
    assert cfg.optim.eta == 0.25 and cfg.seed == 7
    with pytest.raises(ConfigError):
        Config().with_values(**{"optim.eta": -0.25})


_configs = st.fixed_dictionaries({
    "optim.eta": st.floats(min_value=0, max_value=1e6, allow_nan=False),
    "optim.mode": st.sampled_from(["gd", "igd"]),
    "model.m": st.integers(1, 10**6),
    "model.activation": st.sampled_from(["tanh", "logistic", "softplus"]),
    "lbfgs.grad_tol": st.floats(min_value=0, max_value=1.0, allow_nan=False),
    "problem.offset": st.floats(min_value=1e-6, max_value=10, allow_nan=False),
    "study.widths": st.lists(st.integers(1, 10**5), min_size=1, max_size=5).map(tuple),
    "diagnostics.timing": st.booleans(),
    "seed": st.integers(0, 2**64 - 1),
    "output": st.text(st.characters(min_codepoint=32, max_codepoint=126), min_size=1, max_size=20),
})


@settings(max_examples=200, deadline=None)
@given(_configs)
def test_round_trip(values):
    cfg = Config().with_values(**values)
    again = parse_config(serialize_config(cfg))
    assert again == cfg
    assert serialize_config(again) == serialize_config(cfg)
