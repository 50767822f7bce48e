"""JSON run configuration."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from importlib import resources

from .base_splines import TorusGrid
from .cover import BranchedCoverSpec, CutCrossing
from .geometry import EmbeddingConfig

BUNDLED = ("example2.json", "example3.json")


class ConfigError(ValueError):
    """Unparseable or structurally malformed configuration."""


@dataclass
class RunConfig:
    spec: BranchedCoverSpec
    kind: str = "bspline"
    degree: int = 2
    embedding: EmbeddingConfig = field(default_factory=EmbeddingConfig)
    output: str | None = None


def _bundled_path(name: str):
    base = name if name.endswith(".json") else name + ".json"
    if base in BUNDLED:
        return resources.files("branched_splines") / "data" / base
    return None


def read_config_text(path: str) -> str:
    if os.path.exists(path):
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    bundled = _bundled_path(os.path.basename(path))
    if bundled is not None:
        return bundled.read_text(encoding="utf-8")
    raise ConfigError(f"config file not found: {path}")


def parse_config(data: dict) -> RunConfig:
    """Build a :class:`RunConfig`; cover invariants are left to ``validate_cover``."""
    try:
        W, H = (int(v) for v in data["grid"])
        cover = data["cover"]
        n = int(cover["sheets"])
        crossings = tuple(
            CutCrossing(tuple(int(v) for v in c["cell"]), str(c["direction"]), tuple(int(v) for v in c["permutation"]))
            for c in cover.get("crossings", [])
        )
        spline = data.get("spline", {"kind": "bspline", "degree": 2})
        kind = spline.get("kind", "bspline")
        if kind not in ("bspline", "fvs"):
            raise ConfigError(f"unknown spline kind {kind!r}")
        degree = int(spline.get("degree", 2)) if kind == "bspline" else 3
        if kind == "bspline" and degree not in (1, 2):
            raise ConfigError(f"B-spline degree must be 1 or 2, got {degree}")
        emb = data.get("embedding", {})
        offsets = emb.get("offsets")
        embedding = EmbeddingConfig(
            R=float(emb.get("R", 4.0)),
            r_minor=float(emb.get("r_minor", 1.0)),
            offsets=None if offsets is None else tuple(float(o) for o in offsets),
            rho=float(emb.get("rho", 2.0)),
            k=int(emb.get("k", 2)),
        )
        spec = BranchedCoverSpec(TorusGrid(W, H), n, crossings)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed config: {exc!r}") from exc
    return RunConfig(spec, kind, degree, embedding, data.get("output"))


def load_config(path: str) -> RunConfig:
    try:
        data = json.loads(read_config_text(path))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return parse_config(data)


def config_dict(cfg: RunConfig) -> dict:
    spec = cfg.spec
    spline = {"kind": "fvs"} if cfg.kind == "fvs" else {"kind": "bspline", "degree": cfg.degree}
    emb = cfg.embedding
    return {
        "grid": [spec.grid.W, spec.grid.H],
        "cover": {
            "sheets": spec.sheets,
            "crossings": [
                {"cell": list(c.cell), "direction": c.direction, "permutation": list(c.permutation)}
                for c in spec.crossings
            ],
        },
        "spline": spline,
        "embedding": {"R": emb.R, "r_minor": emb.r_minor,
                      "offsets": None if emb.offsets is None else list(emb.offsets),
                      "rho": emb.rho, "k": emb.k},
        "output": cfg.output,
    }
