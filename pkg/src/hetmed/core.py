"""Domain types shared by every module, and input validation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from .errors import InputError

MIN_SUBGROUPS = 3


@dataclass(frozen=True)
class SubgroupEffect:
    """Estimated treatment effects on the mediator and outcome for one subgroup.

    ``gamma_hat`` is measured in mediator units and ``tau_hat`` in outcome
    units. ``cov_uv`` is the covariance between the two estimation errors.
    """

    group_id: Hashable
    gamma_hat: float
    se_gamma: float
    tau_hat: float
    se_tau: float
    n: int
    cov_uv: float = 0.0
    covariate_means: tuple[float, ...] | None = None

    def __post_init__(self):
        for name in ("gamma_hat", "se_gamma", "tau_hat", "se_tau", "cov_uv"):
            value = getattr(self, name)
            if not isinstance(value, (int, float, np.floating, np.integer)) or not math.isfinite(value):
                raise InputError(f"invalid record: {name}")
        if self.se_gamma < 0:
            raise InputError("invalid record: se_gamma")
        if self.se_tau < 0:
            raise InputError("invalid record: se_tau")
        # small slack so estimated covariances at the boundary are not rejected
        bound = self.se_gamma * self.se_tau
        if abs(self.cov_uv) > bound * (1 + 1e-9) + 1e-300:
            raise InputError("invalid record: cov_uv")
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise InputError("invalid record: n")
        if self.covariate_means is not None:
            means = tuple(float(v) for v in self.covariate_means)
            if not all(math.isfinite(v) for v in means):
                raise InputError("invalid record: covariate_means")
            object.__setattr__(self, "covariate_means", means)


def weights_from_sizes(sizes: Sequence[int]) -> np.ndarray:
    """Population-share weights ``n_k / sum(n)``."""
    sizes = np.asarray(sizes, dtype=float)
    if sizes.size == 0:
        raise InputError("empty input")
    if np.any(sizes < 1):
        raise InputError("invalid record: n")
    return sizes / sizes.sum()


@dataclass(frozen=True, eq=False)
class EffectDataset:
    """Validated collection of subgroup effects with aggregation weights.

    Arrays are exposed as read-only views in record order.
    """

    effects: tuple[SubgroupEffect, ...]
    weights: np.ndarray
    covariate_names: tuple[str, ...] | None = None

    def __post_init__(self):
        effects = tuple(self.effects)
        object.__setattr__(self, "effects", effects)
        if len(effects) < MIN_SUBGROUPS:
            raise InputError("insufficient subgroups")
        seen = set()
        for e in effects:
            if e.group_id in seen:
                raise InputError(f"duplicate group: {e.group_id}")
            seen.add(e.group_id)
        w = np.array(self.weights, dtype=float)
        if w.shape != (len(effects),):
            raise InputError("invalid record: weights length")
        if np.any(~np.isfinite(w)) or np.any(w < 0):
            raise InputError("invalid record: weights")
        if abs(w.sum() - 1.0) > 1e-12:
            raise InputError("invalid record: weights must sum to 1")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

        has_x = [e.covariate_means is not None for e in effects]
        if any(has_x):
            if not all(has_x) or len({len(e.covariate_means) for e in effects}) != 1:
                raise InputError("invalid record: covariate_means")
            p = len(effects[0].covariate_means)
            names = self.covariate_names or tuple(f"x{j + 1}" for j in range(p))
            if len(names) != p:
                raise InputError("invalid record: covariate_names")
            object.__setattr__(self, "covariate_names", tuple(names))
        else:
            object.__setattr__(self, "covariate_names", None)

        cols = {
            "gamma_hat": [e.gamma_hat for e in effects],
            "se_gamma": [e.se_gamma for e in effects],
            "tau_hat": [e.tau_hat for e in effects],
            "se_tau": [e.se_tau for e in effects],
            "cov_uv": [e.cov_uv for e in effects],
            "n": [e.n for e in effects],
        }
        arrays = {}
        for name, values in cols.items():
            a = np.array(values, dtype=float)
            a.flags.writeable = False
            arrays[name] = a
        object.__setattr__(self, "_arrays", arrays)

    def __len__(self):
        return len(self.effects)

    def __eq__(self, other):
        if not isinstance(other, EffectDataset):
            return NotImplemented
        return (
            self.effects == other.effects
            and np.array_equal(self.weights, other.weights)
            and self.covariate_names == other.covariate_names
        )

    __hash__ = None

    @property
    def K(self) -> int:
        return len(self.effects)

    @property
    def group_ids(self) -> list:
        return [e.group_id for e in self.effects]

    @property
    def gamma_hat(self) -> np.ndarray:
        return self._arrays["gamma_hat"]

    @property
    def se_gamma(self) -> np.ndarray:
        return self._arrays["se_gamma"]

    @property
    def tau_hat(self) -> np.ndarray:
        return self._arrays["tau_hat"]

    @property
    def se_tau(self) -> np.ndarray:
        return self._arrays["se_tau"]

    @property
    def cov_uv(self) -> np.ndarray:
        return self._arrays["cov_uv"]

    @property
    def sizes(self) -> np.ndarray:
        return self._arrays["n"]

    @property
    def covariate_matrix(self) -> np.ndarray | None:
        if self.covariate_names is None:
            return None
        return np.array([e.covariate_means for e in self.effects], dtype=float)

    def with_weights(self, weights) -> "EffectDataset":
        """Copy with user-supplied weights, normalized to sum to one."""
        w = np.asarray(weights, dtype=float)
        if w.shape != (self.K,) or np.any(w < 0) or not np.all(np.isfinite(w)) or w.sum() <= 0:
            raise InputError("invalid record: weights")
        return EffectDataset(self.effects, w / w.sum(), self.covariate_names)

    def subset(self, index) -> "EffectDataset":
        """Records at ``index`` (repeats allowed; repeated ids get a suffix)."""
        index = np.asarray(index, dtype=int)
        counts: dict = {}
        picked = []
        for i in index:
            e = self.effects[i]
            c = counts.get(e.group_id, 0)
            counts[e.group_id] = c + 1
            if c:
                e = SubgroupEffect(
                    (e.group_id, c), e.gamma_hat, e.se_gamma, e.tau_hat, e.se_tau,
                    e.n, e.cov_uv, e.covariate_means,
                )
            picked.append(e)
        return EffectDataset(
            tuple(picked), weights_from_sizes([e.n for e in picked]), self.covariate_names
        )


def validate_dataset(raw: Sequence[SubgroupEffect], weights=None, covariate_names=None) -> EffectDataset:
    """Build an :class:`EffectDataset`, weighting by sample size unless given."""
    raw = list(raw)
    if not raw:
        raise InputError("empty input")
    if len(raw) < MIN_SUBGROUPS:
        raise InputError("insufficient subgroups")
    if weights is None:
        w = weights_from_sizes([e.n for e in raw])
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (len(raw),) or w.sum() <= 0:
            raise InputError("invalid record: weights")
        w = w / w.sum()
    return EffectDataset(tuple(raw), w, covariate_names)


def dataset_from_arrays(gamma_hat, se_gamma, tau_hat, se_tau, n=None, cov_uv=None,
                        group_ids=None, covariate_means=None, covariate_names=None) -> EffectDataset:
    """Convenience constructor from parallel arrays."""
    gamma_hat = np.asarray(gamma_hat, dtype=float)
    K = gamma_hat.size
    se_gamma = np.broadcast_to(np.asarray(se_gamma, dtype=float), (K,))
    tau_hat = np.asarray(tau_hat, dtype=float)
    se_tau = np.broadcast_to(np.asarray(se_tau, dtype=float), (K,))
    n = np.ones(K, dtype=int) if n is None else np.broadcast_to(np.asarray(n), (K,))
    cov_uv = np.zeros(K) if cov_uv is None else np.broadcast_to(np.asarray(cov_uv, dtype=float), (K,))
    group_ids = list(range(1, K + 1)) if group_ids is None else list(group_ids)
    if tau_hat.size != K or len(group_ids) != K:
        raise InputError("invalid record: array lengths differ")
    xs = None if covariate_means is None else np.atleast_2d(np.asarray(covariate_means, dtype=float))
    if xs is not None and xs.shape[0] != K:
        xs = xs.T if xs.shape[1] == K else None
        if xs is None:
            raise InputError("invalid record: covariate_means")
    effects = [
        SubgroupEffect(
            group_ids[k], float(gamma_hat[k]), float(se_gamma[k]), float(tau_hat[k]),
            float(se_tau[k]), int(n[k]), float(cov_uv[k]),
            None if xs is None else tuple(xs[k]),
        )
        for k in range(K)
    ]
    return validate_dataset(effects, covariate_names=covariate_names)


@dataclass(frozen=True, eq=False)
class IndividualDataset:
    """Unit-level records: treatment, mediator, outcome, covariates, optional group label."""

    treatment: np.ndarray
    mediator: np.ndarray
    outcome: np.ndarray
    covariates: np.ndarray = None
    covariate_names: tuple[str, ...] = ()
    group_label: np.ndarray | None = None
    binary: bool | None = None

    def __post_init__(self):
        t = np.array(self.treatment, dtype=float)
        m = np.array(self.mediator, dtype=float)
        y = np.array(self.outcome, dtype=float)
        n = t.size
        if n == 0:
            raise InputError("no data rows")
        if m.size != n or y.size != n:
            raise InputError("invalid record: column lengths differ")
        for name, a in (("treatment", t), ("mediator", m), ("outcome", y)):
            if not np.all(np.isfinite(a)):
                raise InputError(f"invalid record: missing value in {name}")
        x = np.zeros((n, 0)) if self.covariates is None else np.array(self.covariates, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if x.shape[0] != n:
            raise InputError("invalid record: covariate rows")
        names = tuple(self.covariate_names) or tuple(f"x{j + 1}" for j in range(x.shape[1]))
        if len(names) != x.shape[1]:
            raise InputError("invalid record: covariate_names")
        is_binary = bool(np.all((t == 0) | (t == 1)))
        if self.binary and not is_binary:
            raise InputError("invalid record: treatment flagged binary but not in {0,1}")
        labels = None
        if self.group_label is not None:
            labels = np.asarray(self.group_label, dtype=object)
            if labels.shape != (n,):
                raise InputError("invalid record: group_label length")
        for a in (t, m, y, x):
            a.flags.writeable = False
        object.__setattr__(self, "treatment", t)
        object.__setattr__(self, "mediator", m)
        object.__setattr__(self, "outcome", y)
        object.__setattr__(self, "covariates", x)
        object.__setattr__(self, "covariate_names", names)
        object.__setattr__(self, "group_label", labels)
        object.__setattr__(self, "binary", is_binary if self.binary is None else bool(self.binary))

    def __len__(self):
        return self.treatment.size

    @property
    def n(self) -> int:
        return self.treatment.size

    def take(self, index) -> "IndividualDataset":
        index = np.asarray(index)
        return IndividualDataset(
            self.treatment[index], self.mediator[index], self.outcome[index],
            self.covariates[index], self.covariate_names,
            None if self.group_label is None else self.group_label[index],
        )


@dataclass(frozen=True)
class LatentEffects:
    """True effect draws behind a synthetic aggregate dataset."""

    gamma: np.ndarray
    delta: np.ndarray
    tau: np.ndarray
    beta: float = field(default=0.0)
