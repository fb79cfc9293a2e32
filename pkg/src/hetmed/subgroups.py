"""From individual-level data to subgroup effects.

Groups come from explicit covariate rules, from an existing label column, or
from an honest causal tree grown on the treatment effect on the mediator.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from ._rng import substream
from .core import IndividualDataset, SubgroupEffect, validate_dataset
from .errors import InputError

_RULE_RE = re.compile(r"^\s*([A-Za-z_][\w.]*)\s*(<=|>=|<|>|==|in)\s*(.+?)\s*$")


@dataclass(frozen=True)
class GroupingRule:
    """A predicate on one covariate: ``lower < x <= upper`` or ``x in categories``.

    Either bound may be None (unbounded). ``lower_inclusive`` /
    ``upper_inclusive`` switch the interval ends.
    """

    covariate: str
    lower: float | None = None
    upper: float | None = None
    categories: frozenset | None = None
    lower_inclusive: bool = False
    upper_inclusive: bool = True

    def mask(self, values: np.ndarray) -> np.ndarray:
        if self.categories is not None:
            return np.isin(values, list(self.categories))
        out = np.ones(values.shape, dtype=bool)
        if self.lower is not None:
            out &= values >= self.lower if self.lower_inclusive else values > self.lower
        if self.upper is not None:
            out &= values <= self.upper if self.upper_inclusive else values < self.upper
        return out

    @classmethod
    def parse(cls, text: str) -> "GroupingRule":
        """Parse ``"age>30"``, ``"x1<=0.5"`` or ``"region in {1,3}"``."""
        m = _RULE_RE.match(text)
        if not m:
            raise InputError(f"cannot parse grouping rule {text!r}")
        name, op, value = m.groups()
        if op == "in":
            items = value.strip().strip("{}").split(",")
            return cls(name, categories=frozenset(float(v) for v in items if v.strip()))
        v = float(value)
        if op == "<=":
            return cls(name, upper=v)
        if op == "<":
            return cls(name, upper=v, upper_inclusive=False)
        if op == ">":
            return cls(name, lower=v)
        if op == ">=":
            return cls(name, lower=v, lower_inclusive=True)
        return cls(name, categories=frozenset([v]))


@dataclass(frozen=True)
class GroupDefinition:
    """A named conjunction of rules."""

    name: str
    rules: tuple[GroupingRule, ...]

    @classmethod
    def parse(cls, name: str, text: str) -> "GroupDefinition":
        return cls(name, tuple(GroupingRule.parse(part) for part in text.split("&")))


@dataclass(frozen=True)
class Partition:
    labels: np.ndarray
    group_ids: tuple
    counts: dict
    empty: tuple = ()


def _column(data: IndividualDataset, name: str) -> np.ndarray:
    try:
        j = data.covariate_names.index(name)
    except ValueError:
        raise InputError(f"unknown covariate {name!r}") from None
    return data.covariates[:, j]


def group_by_rules(data: IndividualDataset, groups: Sequence[GroupDefinition] = ()) -> Partition:
    """Assign every unit to exactly one group.

    With no rules, the dataset's own group labels are used verbatim.
    """
    groups = list(groups)
    if not groups:
        if data.group_label is None:
            raise InputError("no grouping rules and no group labels")
        labels = data.group_label
        ids = tuple(_sorted_unique(labels))
        counts = {g: int(np.sum(labels == g)) for g in ids}
        return Partition(labels, ids, counts)

    masks = []
    for g in groups:
        m = np.ones(data.n, dtype=bool)
        for rule in g.rules:
            m &= rule.mask(_column(data, rule.covariate))
        masks.append(m)
    hits = np.sum(masks, axis=0)
    bad = np.flatnonzero(hits != 1)
    if bad.size:
        i = int(bad[0])
        what = "no group" if hits[i] == 0 else f"{int(hits[i])} groups"
        raise InputError(f"invalid partition: unit {i} matches {what}")
    labels = np.empty(data.n, dtype=object)
    for g, m in zip(groups, masks):
        labels[m] = g.name
    counts = {g.name: int(m.sum()) for g, m in zip(groups, masks)}
    empty = tuple(name for name, c in counts.items() if c == 0)
    return Partition(labels, tuple(g.name for g in groups), counts, empty)


def _sorted_unique(labels):
    values = list(dict.fromkeys(labels.tolist()))
    try:
        return sorted(values)
    except TypeError:
        return sorted(values, key=str)


@dataclass(frozen=True)
class TreeConfig:
    """Causal tree settings.

    ``min_split_z`` is the smallest standardized difference between the two
    children's effects that justifies a split; it controls how readily the
    tree splits on noise.
    """

    min_leaf: int = 50
    max_depth: int = 4
    honest_fraction: float = 0.5
    seed: int = 0
    min_split_z: float = 4.0

    def __post_init__(self):
        if self.min_leaf < 10:
            raise InputError("min_leaf must be at least 10")
        if self.max_depth < 0:
            raise InputError("max_depth must be non-negative")
        if not 0 < self.honest_fraction < 1:
            raise InputError("honest_fraction must lie in (0, 1)")
        if self.min_split_z < 0:
            raise InputError("min_split_z must be non-negative")


@dataclass
class TreeNode:
    depth: int
    n_split: int
    n_est: int
    estimate: float
    se: float
    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    leaf_id: int | None = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


@dataclass
class CausalTree:
    root: TreeNode
    covariate_names: tuple[str, ...]
    target: str
    config: TreeConfig = field(default_factory=TreeConfig)

    def leaves(self) -> list[TreeNode]:
        out = []

        def walk(node):
            if node.is_leaf:
                out.append(node)
            else:
                walk(node.left)
                walk(node.right)

        walk(self.root)
        return out

    @property
    def n_leaves(self) -> int:
        return len(self.leaves())

    def apply(self, covariates) -> np.ndarray:
        """Leaf id for each row of ``covariates``."""
        x = np.asarray(covariates, dtype=float)
        out = np.empty(x.shape[0], dtype=int)

        def walk(node, rows):
            if node.is_leaf:
                out[rows] = node.leaf_id
                return
            go_left = x[rows, node.feature] <= node.threshold
            walk(node.left, rows[go_left])
            walk(node.right, rows[~go_left])

        walk(self.root, np.arange(x.shape[0]))
        return out

    def to_text(self) -> str:
        """Indented audit listing of splits and leaves."""
        lines = []

        def walk(node, indent):
            pad = "  " * indent
            if node.is_leaf:
                lines.append(f"{pad}leaf id={node.leaf_id} gamma_hat={node.estimate:.6g} "
                             f"se={node.se:.6g} n_split={node.n_split} n_est={node.n_est}")
            else:
                name = self.covariate_names[node.feature]
                lines.append(f"{pad}node covariate={name} threshold={node.threshold!r}")
                walk(node.left, indent + 1)
                walk(node.right, indent + 1)

        walk(self.root, 0)
        return "\n".join(lines) + "\n"


def _diff_in_means(t, y):
    treated, control = y[t == 1], y[t == 0]
    nt, nc = treated.size, control.size
    est = treated.mean() - control.mean()
    var = treated.var(ddof=1) / nt + control.var(ddof=1) / nc
    return float(est), math.sqrt(var)


def fit_causal_tree(data: IndividualDataset, target: str = "mediator",
                    config: TreeConfig | None = None) -> CausalTree:
    """Honest causal tree on the treatment effect on ``target``.

    The units are split at random into a splitting half and an estimation
    half. Splits are chosen greedily on the splitting half to maximize the
    penalized between-child variance of difference-in-means effects; leaf
    effects are then re-estimated on the estimation half only. Every child
    must hold at least ``min_leaf`` units in both halves.
    """
    config = config or TreeConfig()
    if target not in ("mediator", "outcome"):
        raise InputError(f"unknown target {target!r}")
    if not data.binary:
        raise InputError("binary treatment required")
    if data.n < 4 * config.min_leaf:
        raise InputError("insufficient data")
    y_all = data.mediator if target == "mediator" else data.outcome
    t_all = data.treatment
    x_all = data.covariates

    rng = substream(config.seed, "honest_split")
    perm = rng.permutation(data.n)
    n_split = int(round(config.honest_fraction * data.n))
    split_idx = np.sort(perm[:n_split])
    est_idx = np.sort(perm[n_split:])
    penalty = config.min_split_z ** 2
    min_arm = 2.0

    def grow(s_rows, e_rows, depth):
        est, se = _diff_in_means(t_all[e_rows], y_all[e_rows])
        node = TreeNode(depth, s_rows.size, e_rows.size, est, se)
        if depth >= config.max_depth:
            return node
        y_s = y_all[s_rows]
        y_s = y_s - y_s.mean()
        best = (0.0, None, None)
        for j in range(x_all.shape[1]):
            order = np.argsort(x_all[s_rows, j], kind="stable")
            eorder = np.argsort(x_all[e_rows, j], kind="stable")
            gain, thr, found = _kernels.best_split(
                np.ascontiguousarray(x_all[s_rows, j][order]),
                np.ascontiguousarray(t_all[s_rows][order]),
                np.ascontiguousarray(y_s[order]),
                np.ascontiguousarray(x_all[e_rows, j][eorder]),
                np.ascontiguousarray(t_all[e_rows][eorder]),
                float(config.min_leaf), min_arm, penalty,
            )
            if found and gain > best[0]:
                best = (gain, j, thr)
        gain, j, thr = best
        if j is None:
            return node
        node.feature, node.threshold = j, thr
        node.left = grow(s_rows[x_all[s_rows, j] <= thr], e_rows[x_all[e_rows, j] <= thr], depth + 1)
        node.right = grow(s_rows[x_all[s_rows, j] > thr], e_rows[x_all[e_rows, j] > thr], depth + 1)
        return node

    root = grow(split_idx, est_idx, 0)
    tree = CausalTree(root, data.covariate_names, target, config)
    for i, leaf in enumerate(tree.leaves()):
        leaf.leaf_id = i
    return tree


def _influence_diff_in_means(t, v):
    # per-unit contributions whose cross-products give Neyman (co)variances
    out = np.zeros_like(v)
    for arm in (1.0, 0.0):
        m = t == arm
        n = m.sum()
        sign = 1.0 if arm == 1.0 else -1.0
        out[m] = sign * (v[m] - v[m].mean()) / math.sqrt(n * (n - 1))
    return out


def _influence_ols(t, v):
    n = t.size
    tc = t - t.mean()
    stt = float(np.dot(tc, tc))
    slope = float(np.dot(tc, v)) / stt
    resid = (v - v.mean()) - slope * tc
    # HC1 scaling folded into the contributions
    return slope, tc * resid / stt * math.sqrt(n / (n - 2))


def estimate_group_effects(data: IndividualDataset, partition: Partition | Sequence | None = None,
                           method: str = "auto"):
    """Per-group treatment effects on the mediator and the outcome.

    ``method="diff_means"`` (binary treatment) uses differences in means with
    Neyman standard errors; ``"ols"`` uses the least-squares slope on the
    treatment with HC1 standard errors; ``"auto"`` picks by treatment type.
    The error covariance comes from the same per-unit contributions.
    Groups are ordered by sorted label, so unit order does not matter.
    """
    if partition is None:
        partition = group_by_rules(data)
    labels = partition.labels if isinstance(partition, Partition) else np.asarray(partition, dtype=object)
    if labels.shape != (data.n,):
        raise InputError("invalid partition: label length")
    if method == "auto":
        method = "diff_means" if data.binary else "ols"
    if method not in ("diff_means", "ols"):
        raise InputError(f"unknown effect method {method!r}")
    if method == "diff_means" and not data.binary:
        raise InputError("binary treatment required")
    ids = partition.group_ids if isinstance(partition, Partition) else tuple(_sorted_unique(labels))

    effects = []
    for g in ids:
        rows = labels == g
        t, m, y = data.treatment[rows], data.mediator[rows], data.outcome[rows]
        if method == "diff_means":
            if np.sum(t == 1) < 2 or np.sum(t == 0) < 2:
                raise InputError(f"degenerate group: {g}")
            gm, _ = _diff_in_means(t, m)
            ty, _ = _diff_in_means(t, y)
            im = _influence_diff_in_means(t, m)
            iy = _influence_diff_in_means(t, y)
        else:
            if t.size < 3 or not np.ptp(t) > 0:
                raise InputError(f"degenerate group: {g}")
            gm, im = _influence_ols(t, m)
            ty, iy = _influence_ols(t, y)
        se_m = math.sqrt(float(np.dot(im, im)))
        se_y = math.sqrt(float(np.dot(iy, iy)))
        cov = float(np.dot(im, iy))
        covariate_means = tuple(data.covariates[rows].mean(axis=0)) if data.covariates.shape[1] else None
        effects.append(SubgroupEffect(g, gm, se_m, ty, se_y, int(rows.sum()), cov, covariate_means))
    names = data.covariate_names if data.covariates.shape[1] else None
    return validate_dataset(effects, covariate_names=names)


def discover(data: IndividualDataset, config: TreeConfig | None = None, target: str = "mediator",
             holdout_fraction: float = 1 / 3):
    """Grow a tree and estimate subgroup effects on held-out units.

    With ``holdout_fraction > 0`` a random fold of that size is set aside
    before the tree is grown, and leaf-level effects for the returned
    dataset come only from that fold. With 0 they are estimated on all units.
    """
    config = config or TreeConfig()
    if not 0 <= holdout_fraction < 1:
        raise InputError("holdout_fraction must lie in [0, 1)")
    if holdout_fraction > 0:
        perm = substream(config.seed, "holdout").permutation(data.n)
        n_hold = int(round(holdout_fraction * data.n))
        hold, grow_rows = np.sort(perm[:n_hold]), np.sort(perm[n_hold:])
        tree = fit_causal_tree(data.take(grow_rows), target, config)
        effect_data = data.take(hold)
    else:
        tree = fit_causal_tree(data, target, config)
        effect_data = data
    leaf = tree.apply(effect_data.covariates)
    labels = np.array([f"leaf{i}" for i in leaf], dtype=object)
    ids = tuple(f"leaf{node.leaf_id}" for node in tree.leaves())
    counts = {g: int(np.sum(labels == g)) for g in ids}
    present = tuple(g for g in ids if counts[g])
    partition = Partition(labels, present, counts, tuple(g for g in ids if not counts[g]))
    return tree, estimate_group_effects(effect_data, partition)
