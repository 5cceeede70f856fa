"""Flat key=value configuration: parsing, validation, builders, round-trips."""

import pytest

from dnasim import ConfigError, ErrorTarget, RunConfig


def test_defaults_are_complete():
    cfg = RunConfig()
    assert cfg["channel.num_molecules"] == 64
    assert cfg["channel.alpha"] == 4.0
    assert cfg["channel.beta"] == 2.0
    assert cfg["inner.rate_b"] == 1.25
    assert cfg["inner.p_b"] == 0.001
    assert cfg["inner.zeta"] is None
    assert cfg["code.rate"] is None and cfg["code.num_codewords"] is None
    assert cfg["decoder.tau"] == 0.125
    assert cfg["campaign.trials"] == 1000
    assert cfg["analysis.regime"] == "theta"
    assert cfg["analysis.gap_alphas"] == (1.0, 2.0, 4.0, 8.0)
    assert cfg["sweep.alphas"] == (1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0)


def test_from_text_parses_comments_lists_and_none():
    cfg = RunConfig.from_text(
        """
        # a comment line
        channel.num_molecules = 32   # trailing comment
        channel.alpha = 2.5
        analysis.sigma_grid = 0.25, 0.5, 0.75
        inner.p_b = none
        inner.zeta = 0.8
        inner.c = 0.3
        """
    )
    assert cfg["channel.num_molecules"] == 32
    assert cfg["channel.alpha"] == 2.5
    assert cfg["analysis.sigma_grid"] == (0.25, 0.5, 0.75)
    assert cfg["inner.p_b"] is None
    assert cfg["inner.zeta"] == 0.8
    # untouched keys keep their defaults
    assert cfg["channel.beta"] == 2.0


@pytest.mark.parametrize(
    "text, msg",
    [
        ("channel.speed = 3", "unknown key"),
        ("channel.alpha = fast", "bad value"),
        ("channel.alpha = 2\nchannel.alpha = 3", "line 2: duplicate key"),
        ("channel.alpha 2", "expected key = value"),
        ("inner.error_target = sideways", "error_target"),
        ("analysis.regime = sigma", "regime"),
        ("code.rate = 0.05\ncode.num_codewords = 64", "at most one"),
        ("inner.p_b = 0.1\ninner.zeta = 0.5\ninner.c = 1.0", "not both"),
    ],
)
def test_from_text_rejects(text, msg):
    with pytest.raises(ConfigError, match=msg):
        RunConfig.from_text(text)


def test_error_lines_are_numbered():
    with pytest.raises(ConfigError, match="line 3"):
        RunConfig.from_text("\n# fine\nnot.a.key = 1\n")


def test_decay_law_without_explicit_pb_is_fine():
    cfg = RunConfig.from_text("inner.zeta = 1.0\ninner.c = 0.5\n")
    p = cfg.build_channel()
    inner = cfg.build_inner(p)
    import math

    assert inner.error_prob == pytest.approx(math.exp(-0.5 * p.molecule_len))
    assert (inner.zeta, inner.c) == (1.0, 0.5)


def test_with_overrides():
    cfg = RunConfig()
    out = cfg.with_overrides(**{"campaign.seed": 99, "campaign.trials": None})
    assert out["campaign.seed"] == 99
    assert out["campaign.trials"] == 1000  # None means "leave alone"
    assert cfg["campaign.seed"] == 20260816  # original untouched
    with pytest.raises(ConfigError, match="unknown key"):
        cfg.with_overrides(**{"campaign.bogus": 1})


def test_text_round_trip():
    cfg = RunConfig.from_text(
        "channel.num_molecules = 48\n"
        "inner.p_b = none\n"
        "inner.zeta = 0.5\n"
        "inner.c = 2.0\n"
        "analysis.rates = 0.1,0.2\n"
        "code.num_codewords = 128\n"
    )
    again = RunConfig.from_text(cfg.to_text())
    assert again.values == cfg.values


def test_to_dict_lists_tuples():
    d = RunConfig().to_dict()
    assert d["analysis.gap_alphas"] == [1.0, 2.0, 4.0, 8.0]
    assert d["channel.num_molecules"] == 64


def test_builders_produce_consistent_models():
    cfg = RunConfig()
    params, inner, cb, dp = cfg.build_all()
    assert params.num_molecules == 64
    assert params.num_reads == 256
    assert params.molecule_len == 8
    assert inner.error_prob == 0.001
    assert inner.error_target is ErrorTarget.UNIFORM_WRONG
    assert cb.num_codewords == 256  # default size when neither rate nor count given
    assert cb.payload_space == 344
    assert dp.threshold == pytest.approx(4.0 * (1 - 0.5))

    sized = RunConfig.from_text("code.num_codewords = 32\n")
    assert sized.build_all()[2].num_codewords == 32

    rated = RunConfig.from_text("code.rate = 0.01\n")
    cb2 = rated.build_all()[2]
    import math

    assert cb2.num_codewords == max(2, math.floor(math.exp(512 * 0.01) + 0.5))


def test_invalid_geometry_surfaces_as_value_error():
    cfg = RunConfig.from_text("channel.alpha = 0.5\n")
    with pytest.raises(ValueError, match="alpha"):
        cfg.build_channel()
    cfg2 = RunConfig.from_text("decoder.tau = 0.6\n")
    with pytest.raises(ValueError, match="tau"):
        cfg2.build_decoder(cfg2.build_channel())
