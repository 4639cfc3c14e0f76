"""Domain types shared across the package and bag-proportion arithmetic."""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True)
class FeatureMatrix:
    """Sparse instance-by-feature matrix, optionally carrying a bias column.

    ``matrix`` is a CSR matrix with sorted indices. When ``bias_index`` is
    set, that column holds 1.0 in every row.
    """

    matrix: sp.csr_matrix
    bias_index: Optional[int] = None

    def __post_init__(self):
        m = sp.csr_matrix(self.matrix, dtype=np.float64)
        m.sort_indices()
        if not np.all(np.isfinite(m.data)):
            raise ValueError("feature values must be finite")
        object.__setattr__(self, "matrix", m)
        if self.bias_index is not None:
            if not 0 <= self.bias_index < m.shape[1]:
                raise ValueError("bias_index out of range")
            col = m[:, self.bias_index].toarray().ravel()
            if not np.all(col == 1.0):
                raise ValueError("bias column must be 1.0 in every row")

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_cols(self) -> int:
        return self.matrix.shape[1]

    @property
    def has_bias(self) -> bool:
        return self.bias_index is not None

    def take(self, rows) -> "FeatureMatrix":
        return FeatureMatrix(self.matrix[np.asarray(rows, dtype=np.intp)],
                             self.bias_index)

    @classmethod
    def from_dense(cls, array, bias_index=None) -> "FeatureMatrix":
        return cls(sp.csr_matrix(np.asarray(array, dtype=np.float64)),
                   bias_index)


@dataclass(frozen=True)
class Bag:
    name: str
    members: tuple

    def __init__(self, name, members):
        object.__setattr__(self, "name", str(name))
        object.__setattr__(self, "members", tuple(int(i) for i in members))

    def __len__(self):
        return len(self.members)


@dataclass(frozen=True)
class BagSet:
    bags: tuple

    def __init__(self, bags):
        object.__setattr__(self, "bags", tuple(bags))

    def __iter__(self):
        return iter(self.bags)

    def __len__(self):
        return len(self.bags)

    def __getitem__(self, name) -> Bag:
        for bag in self.bags:
            if bag.name == name:
                return bag
        raise KeyError(name)

    def __contains__(self, name):
        return any(b.name == name for b in self.bags)

    @property
    def names(self):
        return [b.name for b in self.bags]


@dataclass(frozen=True)
class Bound:
    bag: str
    lower: float = 0.0
    upper: float = 1.0


@dataclass(frozen=True)
class Difference:
    """``lower <= p[upper_bag] - p[lower_bag] <= upper``."""

    upper_bag: str
    lower_bag: str
    lower: float = 0.0
    upper: float = 1.0


@dataclass(frozen=True)
class ConstraintSet:
    bounds: tuple = ()
    differences: tuple = ()
    extra_orderings: tuple = ()

    def __init__(self, bounds=(), differences=(), extra_orderings=()):
        object.__setattr__(self, "bounds", tuple(bounds))
        object.__setattr__(self, "differences", tuple(differences))
        object.__setattr__(self, "extra_orderings",
                           tuple((str(a), str(b)) for a, b in extra_orderings))

    def bag_names(self):
        names = []
        for b in self.bounds:
            names.append(b.bag)
        for d in self.differences:
            names.extend([d.upper_bag, d.lower_bag])
        return list(dict.fromkeys(names))


@dataclass(frozen=True)
class LabeledSet:
    """Labeled instances, indexed in ``[N, N + L)`` of the global numbering."""

    indices: tuple = ()
    labels: tuple = ()

    def __init__(self, indices=(), labels=()):
        object.__setattr__(self, "indices", tuple(int(i) for i in indices))
        object.__setattr__(self, "labels", tuple(int(v) for v in labels))
        if len(self.indices) != len(self.labels):
            raise ValueError("indices and labels differ in length")
        if len(set(self.indices)) != len(self.indices):
            raise ValueError("labeled indices must be unique")
        if any(v not in (-1, 1) for v in self.labels):
            raise ValueError("labels must be exactly -1 or +1")

    def __len__(self):
        return len(self.indices)

    def as_dict(self):
        return dict(zip(self.indices, self.labels))


@dataclass(frozen=True)
class Hyperparams:
    C: float = 1.0
    C_L: float = 0.0
    max_outer_iters: int = 200
    rel_tol: float = 1e-5
    lp_feas_tol: float = 1e-8
    svm_tol: float = 1e-4
    descent_mode: str = "sign"
    soft_penalty: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if self.C < 0 or self.C_L < 0:
            raise ValueError("costs must be nonnegative")
        if min(self.rel_tol, self.lp_feas_tol, self.svm_tol) <= 0:
            raise ValueError("tolerances must be positive")
        if self.descent_mode not in ("sign", "exact"):
            raise ValueError("descent_mode must be 'sign' or 'exact'")
        if self.soft_penalty is not None and self.soft_penalty <= 0:
            raise ValueError("soft penalty must be positive")


def sign(values):
    """Elementwise sign with the tie rule sign(0) = +1."""
    return np.where(np.asarray(values) >= 0, 1, -1)


def bag_proportion(labels, bag: Bag) -> float:
    """Fraction of positive members of ``bag`` under ground-truth labels."""
    labels = np.asarray(labels)
    vals = labels[list(bag.members)]
    if not np.all(np.isin(vals, (-1, 1))):
        raise ValueError(f"bag {bag.name!r} has members without a +/-1 label")
    return float(np.count_nonzero(vals == 1)) / len(bag)


def estimated_proportion(y, labeled: LabeledSet, bag: Bag) -> float:
    """Relaxed proportion ``sum(y) / (2|B|) + 1/2``.

    Members below ``len(y)`` read from ``y``; the rest must be labeled and
    contribute their fixed label.
    """
    y = np.asarray(y, dtype=np.float64)
    fixed = labeled.as_dict()
    total = 0.0
    for i in bag.members:
        if 0 <= i < len(y):
            total += y[i]
        elif i in fixed:
            total += fixed[i]
        else:
            raise IndexError(f"bag {bag.name!r} member {i} is neither "
                             "unlabeled nor labeled")
    return total / (2 * len(bag)) + 0.5


def validate(bags: BagSet, cons: ConstraintSet, n_unlabeled: int,
             n_labeled: int = 0) -> list:
    """Return every invariant violation found; an empty list means ok."""
    problems = []
    n_total = n_unlabeled + n_labeled
    seen = set()
    for bag in bags:
        if bag.name in seen:
            problems.append(f"duplicate bag name {bag.name!r}")
        seen.add(bag.name)
        if len(bag) == 0:
            problems.append(f"bag {bag.name!r} is empty")
        if len(set(bag.members)) != len(bag.members):
            problems.append(f"bag {bag.name!r} has repeated members")
        bad = [i for i in bag.members if not 0 <= i < n_total]
        if bad:
            problems.append(f"bag {bag.name!r} has out-of-range members "
                            f"{bad[:5]}")

    def check_interval(what, lo, hi):
        if not (0.0 <= lo <= 1.0 and 0.0 <= hi <= 1.0):
            problems.append(f"{what}: bounds must lie in [0, 1]")
        if lo > hi:
            problems.append(f"{what}: lower exceeds upper ({lo} > {hi})")

    for b in cons.bounds:
        if b.bag not in seen:
            problems.append(f"bound references unknown bag {b.bag!r}")
        check_interval(f"bound on {b.bag!r}", b.lower, b.upper)
    for d in cons.differences:
        what = f"difference {d.upper_bag!r} - {d.lower_bag!r}"
        for name in (d.upper_bag, d.lower_bag):
            if name not in seen:
                problems.append(f"{what} references unknown bag {name!r}")
        if d.upper_bag == d.lower_bag:
            problems.append(f"{what}: a bag cannot be compared with itself")
        check_interval(what, d.lower, d.upper)
    for a, b in cons.extra_orderings:
        for name in (a, b):
            if name not in seen:
                problems.append(f"ordering references unknown bag {name!r}")
        if a == b:
            problems.append(f"ordering ({a!r}, {b!r}) compares a bag with "
                            "itself")
    return problems


def derive_orderings(cons: ConstraintSet) -> list:
    """Pairs ``(k1, k2)`` known to satisfy ``p[k1] >= p[k2]``, deduplicated."""
    pairs = list(cons.extra_orderings)
    pairs += [(d.upper_bag, d.lower_bag) for d in cons.differences]
    return list(dict.fromkeys(pairs))


def split_labeled(bag: Bag, n_unlabeled: int):
    """Split members into unlabeled indices and labeled global indices."""
    members = np.asarray(bag.members, dtype=np.intp)
    return members[members < n_unlabeled], members[members >= n_unlabeled]
