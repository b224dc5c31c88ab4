"""Run configuration: a JSON document with one section per field group."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .bayes import NormalGammaPrior, SamplerConfig
from .censoring import UhcsScheme
from .errors import ValidationError
from .fileio import resolve_data_path
from .warranty import WarrantyPolicy

SCHEME_KEYS = ("n", "l", "r", "T1", "T2")
PRIOR_KEYS = ("a1", "b1", "p2", "q2_prior")
SAMPLER_KEYS = ("N", "N0", "proposal_scale")
POLICY_KEYS = tuple(f.name for f in fields(WarrantyPolicy))
OPTIMIZER_KEYS = ("grid_density",)
TOP_KEYS = ("data_path", "output_dir", "seed", "scheme", "prior", "sampler",
            "policy", "optimizer")

# quantile levels used when t_w or L is left null in the policy section
T_W_LEVEL = 0.1
L_LEVEL = 0.5


def _check_keys(section: str, given: dict, allowed) -> None:
    if not isinstance(given, dict):
        raise ValidationError(f"config section {section!r} must be an object")
    for key in given:
        if key not in allowed:
            where = f"{section}.{key}" if section else key
            raise ValidationError(f"unknown config key {where!r}")


@dataclass
class RunConfig:
    data_path: str | None = None
    output_dir: str = "."
    seed: int = 0
    scheme: dict = field(default_factory=dict)
    prior: dict = field(default_factory=dict)
    sampler: dict = field(default_factory=dict)
    policy: dict = field(default_factory=dict)
    optimizer: dict = field(default_factory=lambda: {"grid_density": 40})

    @classmethod
    def from_dict(cls, raw: dict, base_dir: Path | None = None) -> RunConfig:
        _check_keys("", raw, TOP_KEYS)
        for name, allowed in (("scheme", SCHEME_KEYS), ("prior", PRIOR_KEYS),
                              ("sampler", SAMPLER_KEYS), ("policy", POLICY_KEYS),
                              ("optimizer", OPTIMIZER_KEYS)):
            _check_keys(name, raw.get(name, {}), allowed)
        cfg = cls(
            data_path=raw.get("data_path"),
            output_dir=raw.get("output_dir", "."),
            seed=int(raw.get("seed", 0)),
            scheme=dict(raw.get("scheme", {})),
            prior=dict(raw.get("prior", {})),
            sampler={**{"N": 60_000, "N0": 10_000, "proposal_scale": 1.0},
                     **raw.get("sampler", {})},
            policy=dict(raw.get("policy", {})),
            optimizer={"grid_density": 40, **raw.get("optimizer", {})},
        )
        if base_dir is not None:
            if cfg.data_path is not None:
                cfg.data_path = resolve_data_path(cfg.data_path, base_dir)
            cfg.output_dir = str((base_dir / cfg.output_dir).resolve())
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.scheme:
            self.scheme_obj()
        if self.prior:
            self.prior_obj()
        self.sampler_obj()
        if self.policy:
            self.policy_obj(t_w=self.policy.get("t_w") or 1.0, L=self.policy.get("L") or 1.0)
        if int(self.optimizer["grid_density"]) < 2:
            raise ValidationError("optimizer.grid_density must be at least 2")

    def _build(self, section: str, cls, keys, **override):
        values = {**getattr(self, section), **override}
        missing = [k for k in keys if k not in values]
        if missing:
            raise ValidationError(f"config section {section!r} is missing {missing}")
        try:
            return cls(**values)
        except TypeError as exc:
            raise ValidationError(f"bad {section} section: {exc}") from exc

    def scheme_obj(self) -> UhcsScheme:
        return self._build("scheme", UhcsScheme, SCHEME_KEYS)

    def prior_obj(self) -> NormalGammaPrior:
        return self._build("prior", NormalGammaPrior, PRIOR_KEYS)

    def sampler_obj(self) -> SamplerConfig:
        return self._build("sampler", SamplerConfig, SAMPLER_KEYS, seed=self.seed)

    def policy_obj(self, t_w: float | None = None, L: float | None = None) -> WarrantyPolicy:
        """Build the policy; ``t_w``/``L`` fill in values left null in the file."""
        values = dict(self.policy)
        if values.get("t_w") is None:
            values["t_w"] = t_w
        if values.get("L") is None:
            values["L"] = L
        if values["t_w"] is None or values["L"] is None:
            raise ValidationError("policy t_w and L are null and no chain was given to derive them")
        required = ("S", "A2", "M", "q1_dissat", "q2_dissat")
        missing = [k for k in required if k not in values]
        if missing:
            raise ValidationError(f"config section 'policy' is missing {missing}")
        try:
            return WarrantyPolicy(**values)
        except TypeError as exc:
            raise ValidationError(f"bad policy section: {exc}") from exc

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def load_config(path) -> RunConfig:
    path = Path(path)
    text = path.read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from exc
    return RunConfig.from_dict(raw, base_dir=path.parent)
