"""Closed-form proximal operators.

Every kind exposes ``prox(v, mu)``, returning the minimizer of
``psi(z) + ||v - z||^2 / (2 mu)``.  Indicator kinds return the metric
projection onto their set (independent of ``mu``) and expose ``contains``;
kinds with a finite closed-form ``psi`` expose ``value``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

TOL = 1e-10


def _vec(v) -> np.ndarray:
    return np.asarray(v, dtype=float)


def _check_mu(mu: float) -> None:
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu}")


class ProxKind:
    tag = "abstract"
    is_indicator = False

    def prox(self, v, mu: float) -> np.ndarray:
        raise NotImplementedError

    def value(self, z) -> float:
        raise TypeError(f"{self.tag}: psi has no finite closed form, use contains()")

    def contains(self, z) -> bool:
        """Membership in the domain of psi."""
        return True

    def to_dict(self) -> dict:
        return {"kind": self.tag}


@dataclass(frozen=True)
class Zero(ProxKind):
    """psi == 0; the prox is the identity.  Also the indicator of the whole space."""

    tag = "zero"
    is_indicator = True

    def prox(self, v, mu):
        _check_mu(mu)
        return _vec(v).copy()

    def value(self, z):
        return 0.0


@dataclass(frozen=True)
class NonNeg(ProxKind):
    tag = "indicator_nonneg"
    is_indicator = True

    def prox(self, v, mu):
        _check_mu(mu)
        return np.maximum(_vec(v), 0.0)

    def contains(self, z):
        return bool(np.all(_vec(z) >= 0.0))


@dataclass(frozen=True)
class Box(ProxKind):
    lo: tuple
    hi: tuple
    tag = "indicator_box"
    is_indicator = True

    def __post_init__(self):
        lo, hi = _vec(self.lo), _vec(self.hi)
        if lo.shape != hi.shape or np.any(lo > hi):
            raise ValueError("box needs lo <= hi componentwise with equal shapes")
        object.__setattr__(self, "lo", tuple(lo.tolist()))
        object.__setattr__(self, "hi", tuple(hi.tolist()))

    def prox(self, v, mu):
        _check_mu(mu)
        v = _vec(v)
        if v.shape != (len(self.lo),):
            raise ValueError(f"dimension mismatch: {v.shape} vs box of size {len(self.lo)}")
        return np.clip(v, self.lo, self.hi)

    def contains(self, z):
        z = _vec(z)
        return bool(np.all(z >= self.lo) and np.all(z <= self.hi))

    def to_dict(self):
        return {"kind": self.tag, "lo": list(self.lo), "hi": list(self.hi)}


@dataclass(frozen=True)
class Ball(ProxKind):
    center: tuple
    radius: float
    tag = "indicator_ball"
    is_indicator = True

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")
        object.__setattr__(self, "center", tuple(_vec(self.center).tolist()))

    def prox(self, v, mu):
        # v == center lies inside the ball and is returned unchanged
        _check_mu(mu)
        v = _vec(v)
        c = _vec(self.center)
        if v.shape != c.shape:
            raise ValueError(f"dimension mismatch: {v.shape} vs ball center {c.shape}")
        d = v - c
        n = np.linalg.norm(d)
        if n <= self.radius:
            return v.copy()
        scale = self.radius / n
        out = c + d * scale
        while np.linalg.norm(out - c) > self.radius:  # rounding can land one ulp outside
            scale = np.nextafter(scale, 0.0)
            out = c + d * scale
        return out

    def contains(self, z):
        return bool(np.linalg.norm(_vec(z) - _vec(self.center)) <= self.radius)

    def to_dict(self):
        return {"kind": self.tag, "center": list(self.center), "radius": self.radius}


@dataclass(frozen=True)
class L1(ProxKind):
    weight: float = 1.0
    tag = "l1"

    def __post_init__(self):
        if self.weight < 0:
            raise ValueError("l1 weight must be nonnegative")

    def prox(self, v, mu):
        _check_mu(mu)
        v = _vec(v)
        return np.sign(v) * np.maximum(np.abs(v) - mu * self.weight, 0.0)

    def value(self, z):
        return float(self.weight * np.sum(np.abs(_vec(z))))

    def to_dict(self):
        return {"kind": self.tag, "weight": self.weight}


@dataclass(frozen=True)
class Product(ProxKind):
    """Separable psi(w, y) = psi1(w) + psi2(y) over consecutive blocks."""

    blocks: tuple = field(default_factory=tuple)  # ((ProxKind, size), ...)
    tag = "product"

    @property
    def is_indicator(self):
        return all(k.is_indicator for k, _ in self.blocks)

    def _split(self, v):
        v = _vec(v)
        sizes = [n for _, n in self.blocks]
        if v.shape != (sum(sizes),):
            raise ValueError(f"dimension mismatch: {v.shape} vs blocks {sizes}")
        return np.split(v, np.cumsum(sizes)[:-1])

    def prox(self, v, mu):
        parts = self._split(v)
        return np.concatenate([k.prox(p, mu) for (k, _), p in zip(self.blocks, parts)])

    def value(self, z):
        return float(sum(k.value(p) for (k, _), p in zip(self.blocks, self._split(z))))

    def contains(self, z):
        return all(k.contains(p) for (k, _), p in zip(self.blocks, self._split(z)))

    def to_dict(self):
        return {"kind": self.tag, "blocks": [[k.to_dict(), n] for k, n in self.blocks]}


def prox_apply(kind: ProxKind, v, mu: float) -> np.ndarray:
    return kind.prox(v, mu)


def psi_or_inf(kind: ProxKind, z) -> float:
    """psi(z), with indicator kinds mapped to 0 inside the set and +inf outside."""
    if kind.is_indicator and not isinstance(kind, Product):
        return 0.0 if kind.contains(z) else np.inf
    if isinstance(kind, Product):
        parts = kind._split(z)
        return float(sum(psi_or_inf(k, p) for (k, _), p in zip(kind.blocks, parts)))
    return kind.value(z)


@dataclass
class CharacterizationResult:
    holds: bool
    min_slack: float
    skipped: int

    def __bool__(self):
        return self.holds


def check_prox_characterization(kind: ProxKind, v, mu: float, probes: Sequence,
                                nu=None, tol: float = TOL) -> CharacterizationResult:
    """Check <nu - v, a - nu> >= mu*psi(nu) - mu*psi(a) at every probe ``a``.

    ``nu`` defaults to ``prox_apply(kind, v, mu)``; pass a different point to
    test whether it could be the prox.  For indicator kinds, probes outside
    the set are skipped and counted.
    """
    v = _vec(v)
    if nu is None:
        nu = prox_apply(kind, v, mu)
    nu = _vec(nu)
    psi_nu = psi_or_inf(kind, nu)
    if not np.isfinite(psi_nu):
        return CharacterizationResult(False, -np.inf, 0)
    skipped = 0
    slack = np.inf
    for a in probes:
        a = _vec(a)
        psi_a = psi_or_inf(kind, a)
        if not np.isfinite(psi_a):
            skipped += 1
            continue
        s = float(np.dot(nu - v, a - nu) - mu * psi_nu + mu * psi_a)
        slack = min(slack, s)
    return CharacterizationResult(bool(slack >= -tol), slack, skipped)


def prox_from_dict(d: dict) -> ProxKind:
    """Build a kind from its tagged-record form, e.g. ``{"kind": "l1", "weight": 1.0}``."""
    if not isinstance(d, dict) or "kind" not in d:
        raise ValueError(f"prox spec must be a mapping with a 'kind' key, got {d!r}")
    kind = d["kind"]
    allowed = {
        "zero": set(),
        "indicator_nonneg": set(),
        "indicator_box": {"lo", "hi"},
        "indicator_ball": {"center", "radius"},
        "l1": {"weight"},
        "product": {"blocks"},
    }
    if kind not in allowed:
        raise ValueError(f"unknown prox kind {kind!r}; expected one of {sorted(allowed)}")
    extra = set(d) - {"kind"} - allowed[kind]
    if extra:
        raise ValueError(f"unknown keys for prox kind {kind!r}: {sorted(extra)}")
    if kind == "zero":
        return Zero()
    if kind == "indicator_nonneg":
        return NonNeg()
    if kind == "indicator_box":
        return Box(tuple(d["lo"]), tuple(d["hi"]))
    if kind == "indicator_ball":
        return Ball(tuple(d["center"]), float(d["radius"]))
    if kind == "l1":
        return L1(float(d.get("weight", 1.0)))
    return Product(tuple((prox_from_dict(k), int(n)) for k, n in d["blocks"]))
