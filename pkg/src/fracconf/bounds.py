"""Closed-form dimension bounds and the empirical-vs-theory verdict."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import OutOfValidity, ParamError


@dataclass(frozen=True)
class BoundValue:
    name: str
    value: float
    side: str
    validity: dict = field(default_factory=dict)

    def to_dict(self):
        return {"name": self.name, "value": self.value, "side": self.side, "validity": self.validity}


def _need(cond, msg):
    if not cond:
        raise ParamError(msg)


def _chain_args(k, d, alpha):
    _need(int(k) == k and k >= 1, "k must be an integer >= 1")
    _need(int(d) == d and d >= 2, "d must be an integer >= 2")
    _need(0 < alpha <= d, "alpha must lie in (0, d]")


def chain_upper_u(k, d, alpha) -> float:
    _chain_args(k, d, alpha)
    if alpha >= (d + 1) / 2:
        return (k + 1) * alpha - k
    return k * d / 2 + alpha - k / 2


def chain_upper_bound(k, d, alpha) -> BoundValue:
    side = "exact" if alpha >= (d + 1) / 2 else "upper"
    return BoundValue("chain_upper_u", chain_upper_u(k, d, alpha), side,
                      {"k": ">=1", "d": ">=2", "alpha": "(0, d]"})


def chain_trivial_upper(k, d, alpha) -> float:
    _chain_args(k, d, alpha)
    return (k + 1) * alpha


def alt_chain_upper(k, d, alpha) -> float:
    _need(int(k) == k and k >= 1, "k must be an integer >= 1")
    _need(int(d) == d and d >= 2, "d must be an integer >= 2")
    _need(0 <= alpha < (d + 1) / 2, "alpha must lie in [0, (d+1)/2)")
    return alpha + (d - 1) / 2 + (k - 1) * alpha


def beta_sobolev(d, alpha) -> float:
    _need(int(d) == d and d >= 2, "d must be an integer >= 2")
    _need(0 < alpha <= d, "alpha must lie in (0, d]")
    return d - alpha + 1 if alpha >= (d + 1) / 2 else (d + 1) / 2


def tri_upper(d, alpha) -> float:
    _need(int(d) == d and d >= 2, "d must be an integer >= 2")
    _need(0 < alpha <= d, "alpha must lie in (0, d]")
    if d >= 3:
        return 3 * alpha - 3 if alpha >= 2 * d / 3 + 1 else d + 1.5 * alpha - 1.5
    if alpha >= 1.75:
        return 3 * alpha - 3
    if alpha >= 1.5:
        return 2 * alpha - 1
    if alpha >= 1:
        return alpha + 0.5
    return min(5 * alpha / 3, alpha * (2 + alpha) / (1 + alpha))


def tri_trivial(d, alpha) -> float:
    _need(int(d) == d and d >= 2, "d must be an integer >= 2")
    _need(0 <= alpha <= d, "alpha must lie in [0, d]")
    return min(3 * alpha, 3 * d - 3)


def pinned_tree_lower(k, alpha) -> float:
    _need(int(k) == k and k >= 1, "k must be an integer >= 1")
    _need(1 < alpha <= 2, "alpha must lie in (1, 2]")
    return min(4 * k / 3 * alpha - 2 * k / 3, k)


def tau0(k, alpha) -> float:
    _need(int(k) == k and k >= 1, "k must be an integer >= 1")
    _need(1 < alpha <= 2, "alpha must lie in (1, 2]")
    if alpha <= 1.25:
        return 4 * (k - 1) / 3 * alpha + (5 - 2 * k) / 3
    return float(k)


def exceptional_bound(k, tau, alpha) -> float:
    t0 = tau0(k, alpha)
    if not 0 < tau < t0:
        raise OutOfValidity(f"tau={tau} outside (0, {t0})")
    if alpha <= 1.25:
        branch = 2 * k + 3 * tau + (1 - 4 * k) * alpha
    else:
        branch = 5 - 3 * k + 3 * tau - 3 * alpha
    return max(branch, 2 - alpha)


def distance_exceptional_bound(tau, alpha) -> float:
    """Pinned distance set exceptional-set bound (the k = 1 case)."""
    _need(1 < alpha <= 2, "alpha must lie in (1, 2]")
    if not 0 < tau < 1:
        raise OutOfValidity("tau must lie in (0, 1)")
    return max(2 + 3 * tau - 3 * alpha, 2 - alpha)


def star_exceptional_bound(k, tau, alpha) -> float:
    _need(int(k) == k and k >= 1, "k must be an integer >= 1")
    _need(1 < alpha <= 2, "alpha must lie in (1, 2]")
    if not 0 < tau < k:
        raise OutOfValidity(f"tau={tau} outside (0, {k})")
    return max(2 + 3 * tau / k - 3 * alpha, 2 - alpha)


def valtr_lower(k, d, alpha) -> float:
    _need(int(k) == k and k >= 0, "k must be an integer >= 0")
    _need(int(d) == d and d >= 2, "d must be an integer >= 2")
    _need(0 < alpha <= d, "alpha must lie in (0, d]")
    return alpha * ((d + 1) + (d - 1) * k) / (d + 1)


def valtr_pair_exponent(d) -> float:
    """Growth exponent of unit pairs in the lattice, in powers of q."""
    return d + d * (d - 1) / (d + 1)


_SIDES = {
    "chain_upper_u": lambda k, d, a: ("upper", chain_upper_u(k, d, a)),
    "chain_trivial_upper": lambda k, d, a: ("upper", chain_trivial_upper(k, d, a)),
    "alt_chain_upper": lambda k, d, a: ("upper", alt_chain_upper(k, d, a)),
    "beta_sobolev": lambda k, d, a: ("exact", beta_sobolev(d, a)),
    "tri_upper": lambda k, d, a: ("upper", tri_upper(d, a)),
    "tri_trivial": lambda k, d, a: ("upper", tri_trivial(d, a)),
    "pinned_tree_lower": lambda k, d, a: ("lower", pinned_tree_lower(k, a)),
    "valtr_lower": lambda k, d, a: ("lower", valtr_lower(k, d, a)),
}


def evaluate(name: str, k=1, d=2, alpha=1.0, tau=None) -> BoundValue:
    if name in ("exceptional_bound", "star_exceptional_bound"):
        fn = exceptional_bound if name == "exceptional_bound" else star_exceptional_bound
        return BoundValue(name, fn(k, tau, alpha), "upper", {"k": k, "tau": tau, "alpha": alpha})
    if name == "tau0":
        return BoundValue(name, tau0(k, alpha), "exact", {"k": k, "alpha": alpha})
    if name not in _SIDES:
        raise ParamError(f"unknown bound {name!r}")
    side, val = _SIDES[name](k, d, alpha)
    return BoundValue(name, float(val), side, {"k": k, "d": d, "alpha": alpha})


BOUND_NAMES = tuple(_SIDES) + ("exceptional_bound", "star_exceptional_bound", "tau0")


def verdict(empirical, bounds, margin: float = 0.0) -> str:
    """'violates_upper', 'below_lower', 'consistent' or 'inconclusive'."""
    bounds = list(bounds)
    if not bounds:
        return "inconclusive"
    slope, err = empirical.slope, empirical.stderr
    for b in bounds:
        if b.side in ("upper", "exact") and slope > b.value + err + margin:
            return "violates_upper"
    for b in bounds:
        if b.side in ("lower", "exact") and slope < b.value - err - margin:
            return "below_lower"
    return "consistent"
