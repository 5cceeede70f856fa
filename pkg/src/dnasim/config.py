"""Flat key=value run configuration.

Config files are plain text: one `section.key = value` per line, `#` comments,
blank lines ignored. Every key has a default, so an empty file is a valid
config. Lists are comma separated, `none` clears an optional value.

The schema is deliberately flat; sections are just name prefixes. Unknown or
duplicate keys are rejected rather than ignored so typos fail loudly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from dnasim.decoder import DecoderParams, make_decoder_params
from dnasim.model import (
    ChannelParams,
    CodedIndexCodebook,
    ErrorTarget,
    InnerCodeModel,
    build_codebook,
    build_inner_model,
    make_channel_params,
)


class ConfigError(ValueError):
    """Raised for malformed or inconsistent run configuration."""


# key -> (type tag, default); tags: int, float, str, floats, opt_int, opt_float
_SCHEMA: dict[str, tuple[str, object]] = {
    "channel.num_molecules": ("int", 64),
    "channel.alpha": ("float", 4.0),
    "channel.beta": ("float", 2.0),
    "inner.rate_b": ("float", 1.25),
    "inner.p_b": ("opt_float", 0.001),
    "inner.zeta": ("opt_float", None),
    "inner.c": ("opt_float", None),
    "inner.error_target": ("str", "uniform-wrong"),
    "inner.victim_index": ("int", 0),
    "inner.victim_payload": ("int", 0),
    "code.rate": ("opt_float", None),
    "code.num_codewords": ("opt_int", None),
    "code.seed": ("int", 7),
    "decoder.tau": ("float", 0.125),
    "campaign.trials": ("int", 1000),
    "campaign.seed": ("int", 20260816),
    "campaign.workers": ("int", 0),
    "analysis.regime": ("str", "theta"),
    "analysis.rates": ("floats", ()),
    "analysis.sigma_grid": ("floats", ()),
    "analysis.kappa_grid": ("floats", ()),
    "analysis.theta_grid": ("floats", ()),
    "analysis.gap_alphas": ("floats", (1.0, 2.0, 4.0, 8.0)),
    "analysis.gap_crossovers": ("floats", (0.001, 0.01, 0.05, 0.11)),
    "sweep.alphas": ("floats", (1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0)),
    "expurgate.eta": ("opt_float", None),
}

_TARGETS = {t.value for t in ErrorTarget}


def _parse_value(key: str, raw: str):
    tag = _SCHEMA[key][0]
    raw = raw.strip()
    try:
        if tag in ("opt_int", "opt_float") and raw.lower() in ("none", ""):
            return None
        if tag in ("int", "opt_int"):
            return int(raw)
        if tag in ("float", "opt_float"):
            return float(raw)
        if tag == "floats":
            if not raw:
                return ()
            return tuple(float(tok) for tok in raw.split(","))
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r} ({exc})") from None


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)
    explicit: frozenset = frozenset()

    def __post_init__(self):
        merged = {k: default for k, (_, default) in _SCHEMA.items()}
        merged.update(self.values)
        self.values = merged
        self._validate()

    def _validate(self):
        if self.values["inner.error_target"] not in _TARGETS:
            raise ConfigError(
                "inner.error_target must be one of " + ", ".join(sorted(_TARGETS))
            )
        if self.values["analysis.regime"] not in ("theta", "omega"):
            raise ConfigError("analysis.regime must be 'theta' or 'omega'")
        if (
            self.values["code.rate"] is not None
            and self.values["code.num_codewords"] is not None
        ):
            raise ConfigError("give at most one of code.rate, code.num_codewords")
        zc = ("inner.zeta" in self.explicit) or ("inner.c" in self.explicit)
        if zc and "inner.p_b" in self.explicit and self.values["inner.p_b"] is not None:
            raise ConfigError(
                "give either inner.p_b or the pair (inner.zeta, inner.c), not both"
            )

    def __getitem__(self, key: str):
        return self.values[key]

    # --- constructors ---------------------------------------------------

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        values: dict = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
            key, raw = body.split("=", 1)
            key = key.strip()
            if key not in _SCHEMA:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            if key in values:
                raise ConfigError(f"line {lineno}: duplicate key {key!r}")
            values[key] = _parse_value(key, raw)
        return cls(values=values, explicit=frozenset(values))

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        return cls.from_text(p.read_text())

    def with_overrides(self, **overrides) -> "RunConfig":
        """New config with the given keys replaced (dots spelled as given)."""
        vals = dict(self.values)
        expl = set(self.explicit)
        for key, val in overrides.items():
            if val is None:
                continue
            if key not in _SCHEMA:
                raise ConfigError(f"unknown key {key!r}")
            vals[key] = val
            expl.add(key)
        return RunConfig(values=vals, explicit=frozenset(expl))

    # --- serialization --------------------------------------------------

    def to_text(self) -> str:
        lines = []
        for key in sorted(_SCHEMA):
            val = self.values[key]
            if val is None:
                out = "none"
            elif isinstance(val, tuple):
                out = ",".join(repr(float(v)) for v in val)
            else:
                out = repr(val) if isinstance(val, float) else str(val)
            lines.append(f"{key} = {out}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            k: (list(v) if isinstance(v, tuple) else v) for k, v in self.values.items()
        }

    # --- model builders ---------------------------------------------------

    def build_channel(self) -> ChannelParams:
        return make_channel_params(
            self.values["channel.num_molecules"],
            self.values["channel.alpha"],
            self.values["channel.beta"],
        )

    def build_inner(self, params: ChannelParams) -> InnerCodeModel:
        p_b = self.values["inner.p_b"]
        zeta, c = self.values["inner.zeta"], self.values["inner.c"]
        if zeta is not None or c is not None:
            p_b = None
        return build_inner_model(
            params,
            self.values["inner.rate_b"],
            error_prob=p_b,
            zeta=zeta,
            c=c,
            error_target=ErrorTarget(self.values["inner.error_target"]),
            victim_index=self.values["inner.victim_index"],
            victim_payload=self.values["inner.victim_payload"],
        )

    def build_codebook(
        self, params: ChannelParams, inner: InnerCodeModel
    ) -> CodedIndexCodebook:
        rate = self.values["code.rate"]
        num = self.values["code.num_codewords"]
        if rate is None and num is None:
            num = 256
        return build_codebook(
            params, inner, self.values["code.seed"], rate=rate, num_codewords=num
        )

    def build_decoder(self, params: ChannelParams) -> DecoderParams:
        return make_decoder_params(params, self.values["decoder.tau"])

    def build_all(self):
        params = self.build_channel()
        inner = self.build_inner(params)
        cb = self.build_codebook(params, inner)
        dp = self.build_decoder(params)
        return params, inner, cb, dp
