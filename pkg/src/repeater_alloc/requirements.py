"""Toy repeater-chain model and the (N_max, L_max) bounds it implies.

The chain has N repeaters and N + 1 elementary links of equal length L. Links
deliver Werner states; swaps succeed with probability 1/2; each link makes M
heralded attempts per round, and a round lasts L / c_fiber.

All requirement comparisons are strict: a chain exactly at F_min or R_min
does not meet the requirement.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from .errors import RequirementError

DEFAULT_N_CEILING = 64
MIN_LINK_KM = 0.1


@dataclass(frozen=True)
class HardwareConstants:
    f_link: float = 0.99
    m: int = 1000
    c_fiber_km_s: float = 200_000.0
    l_att_km: float = 22.0

    def __post_init__(self):
        if not 0.25 < self.f_link <= 1:
            raise RequirementError(f"f_link must lie in (0.25, 1], got {self.f_link}")
        if int(self.m) != self.m or self.m < 1:
            raise RequirementError(f"m must be a positive integer, got {self.m}")
        if self.c_fiber_km_s <= 0 or self.l_att_km <= 0:
            raise RequirementError("c_fiber and l_att must be positive")


@dataclass(frozen=True)
class Bounds:
    """Hop and link-length limits for admissible paths (N_max, L_max)."""

    n_max: int
    l_max: float
    l_max_continuous: float | None = None

    def __post_init__(self):
        if self.n_max < 0 or int(self.n_max) != self.n_max:
            raise RequirementError(f"n_max must be a nonnegative integer, got {self.n_max}")
        if not self.l_max > 0:
            raise RequirementError(f"l_max must be positive, got {self.l_max}")


@dataclass(frozen=True)
class PairRequirement:
    """Per-pair override; any field left None falls back to the global value."""

    r_min_hz: float | None = None
    f_min: float | None = None
    k: int | None = None
    n_max: int | None = None
    l_max: float | None = None


@dataclass(frozen=True)
class ChainRequirements:
    r_min_hz: float = 1.0
    f_min: float = 0.93
    k: int = 1
    d: int = 1
    hardware: HardwareConstants = field(default_factory=HardwareConstants)
    # unordered pair (sorted tuple) -> override
    per_pair: dict = field(default_factory=dict)
    # repeater id -> capacity D_u
    per_node: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.r_min_hz <= 0:
            raise RequirementError("r_min_hz must be positive")
        if not 0.25 < self.f_min < 1:
            raise RequirementError(f"f_min must lie in (0.25, 1), got {self.f_min}")
        if self.k < 1 or self.d < 1:
            raise RequirementError("k and d must be at least 1")

    @property
    def heterogeneous(self) -> bool:
        return bool(self.per_pair or self.per_node)

    def pair_override(self, q) -> PairRequirement:
        return self.per_pair.get(tuple(sorted(q)), PairRequirement())

    def k_for(self, q) -> int:
        o = self.pair_override(q)
        return self.k if o.k is None else o.k

    def d_for(self, u: str) -> int:
        return self.per_node.get(u, self.d)


def chain_fidelity(n: int, f_link: float) -> float:
    if not 0.25 < f_link <= 1:
        raise RequirementError(f"f_link must lie in (0.25, 1], got {f_link}")
    if n < 0:
        raise RequirementError("n must be nonnegative")
    p_link = (4 * f_link - 1) / 3
    return (1 + 3 * p_link ** (n + 1)) / 4


def chain_rate(n: int, length_km: float, hw: HardwareConstants) -> float:
    if not length_km > 0:
        raise RequirementError(f"link length must be positive, got {length_km}")
    p_attempt = 0.5 * math.exp(-length_km / hw.l_att_km)
    # 1 - (1 - p)^M, stable for large M and tiny p
    p_link = -math.expm1(hw.m * math.log1p(-p_attempt))
    return hw.c_fiber_km_s / length_km * 0.5**n * p_link ** (n + 1)


def max_repeaters(f_min: float, f_link: float, ceiling: int = DEFAULT_N_CEILING) -> int:
    if not chain_fidelity(0, f_link) > f_min:
        raise RequirementError(
            f"fidelity target {f_min} unreachable: a single link only gives {f_link}"
        )
    n = 0
    while n < ceiling and chain_fidelity(n + 1, f_link) > f_min:
        n += 1
    return n


def max_link_length(
    n: int, r_min_hz: float, hw: HardwareConstants, *, integer_km: bool = True, tol: float = 1e-6
) -> float:
    """Largest L with chain_rate(n, L) > r_min_hz.

    Bisection on the monotone rate; with ``integer_km`` the result is rounded
    down to whole km (still strictly meeting the rate).
    """
    lo = MIN_LINK_KM
    if not chain_rate(n, lo, hw) > r_min_hz:
        raise RequirementError(
            f"rate target {r_min_hz} Hz unreachable with {n} repeaters even at {lo} km links"
        )
    hi = 2 * lo
    while chain_rate(n, hi, hw) > r_min_hz:
        lo, hi = hi, 2 * hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if chain_rate(n, mid, hw) > r_min_hz:
            lo = mid
        else:
            hi = mid
    if not integer_km:
        return lo
    whole = math.floor(lo)
    while whole >= 1 and not chain_rate(n, whole, hw) > r_min_hz:
        whole -= 1
    if whole < 1:
        raise RequirementError(
            f"no whole-km link length meets {r_min_hz} Hz with {n} repeaters"
        )
    return float(whole)


def derive_bounds(
    req: ChainRequirements,
    *,
    integer_km: bool = True,
    n_ceiling: int = DEFAULT_N_CEILING,
    r_min_hz: float | None = None,
    f_min: float | None = None,
) -> Bounds:
    """N_max from fidelity first, then L_max from rate at that N_max."""
    r_min_hz = req.r_min_hz if r_min_hz is None else r_min_hz
    f_min = req.f_min if f_min is None else f_min
    n_max = max_repeaters(f_min, req.hardware.f_link, n_ceiling)
    l_cont = max_link_length(n_max, r_min_hz, req.hardware, integer_km=False)
    l_max = max_link_length(n_max, r_min_hz, req.hardware, integer_km=True) if integer_km else l_cont
    return Bounds(n_max, l_max, l_cont)


def derive_pair_bounds(
    req: ChainRequirements, pairs, default: Bounds | None = None, **kw
) -> dict[tuple[str, str], Bounds]:
    """Bounds per ordered pair, honouring per-pair overrides.

    ``default`` replaces the toy-model bounds for pairs without rate/fidelity
    overrides (used when N_max/L_max are given directly).
    """
    base = default if default is not None else derive_bounds(req, **kw)
    out = {}
    for q in pairs:
        o = req.pair_override(q)
        b = base
        if o.r_min_hz is not None or o.f_min is not None:
            b = derive_bounds(req, r_min_hz=o.r_min_hz, f_min=o.f_min, **kw)
        if o.n_max is not None or o.l_max is not None:
            b = Bounds(
                b.n_max if o.n_max is None else o.n_max,
                b.l_max if o.l_max is None else o.l_max,
            )
        out[tuple(q)] = b
    return out


_NUM = {"type": "number"}
REQUIREMENTS_SCHEMA = {
    "type": "object",
    "properties": {
        "r_min_hz": _NUM,
        "f_min": _NUM,
        "k": {"type": "integer", "minimum": 1},
        "d": {"type": "integer", "minimum": 1},
        "hardware": {
            "type": "object",
            "properties": {"f_link": _NUM, "m": {"type": "integer"}, "c_fiber_km_s": _NUM, "l_att_km": _NUM},
            "additionalProperties": False,
        },
        "per_pair": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["s", "t"],
                "properties": {
                    "s": {"type": "string"},
                    "t": {"type": "string"},
                    "r_min_hz": _NUM,
                    "f_min": _NUM,
                    "k": {"type": "integer", "minimum": 1},
                    "n_max": {"type": "integer", "minimum": 0},
                    "l_max_km": _NUM,
                },
                "additionalProperties": False,
            },
        },
        "per_node": {"type": "object", "additionalProperties": {"type": "integer", "minimum": 1}},
    },
}


def requirements_from_dict(doc: dict) -> ChainRequirements:
    try:
        jsonschema.validate(doc, REQUIREMENTS_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise RequirementError(f"schema violation: {exc.message}") from exc
    hw = HardwareConstants(**doc.get("hardware", {})) if "hardware" in doc else HardwareConstants()
    per_pair = {}
    for entry in doc.get("per_pair", []):
        key = tuple(sorted((entry["s"], entry["t"])))
        per_pair[key] = PairRequirement(
            r_min_hz=entry.get("r_min_hz"),
            f_min=entry.get("f_min"),
            k=entry.get("k"),
            n_max=entry.get("n_max"),
            l_max=entry.get("l_max_km"),
        )
    per_node = {str(u): int(d) for u, d in doc.get("per_node", {}).items()}
    return ChainRequirements(
        r_min_hz=doc.get("r_min_hz", 1.0),
        f_min=doc.get("f_min", 0.93),
        k=doc.get("k", 1),
        d=doc.get("d", 1),
        hardware=hw,
        per_pair=per_pair,
        per_node=per_node,
    )


def load_requirements(source) -> ChainRequirements:
    if isinstance(source, Path):
        source = source.read_text(encoding="utf-8")
    if isinstance(source, str):
        try:
            source = json.loads(source)
        except json.JSONDecodeError as exc:
            raise RequirementError(f"invalid JSON: {exc}") from exc
    return requirements_from_dict(source)
