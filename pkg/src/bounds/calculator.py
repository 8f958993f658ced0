"""
Closed-form regret bounds for norm-constrained logistic regression
"""

import logging
import math
from dataclasses import asdict, dataclass, replace
from typing import Dict, Optional, Tuple

from comparators.projection import Norm, NormConstraint
from mixtures.grid import default_spacing, grid_cardinality

LN2 = math.log(2.0)
E = math.e

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoundQuery:
    """
    Inputs of every bound formula.

    Attributes:
        d: Dimension (>= 1)
        T: Horizon (>= 2)
        B: Ball radius (> 0)
        norm: Ball geometry
        eps_exponent: Slack exponent in T^(1 - eps), in [0, 1)
        drop_vanishing: Evaluate (1 +/- o(1)) factors as 1
    """

    d: int
    T: float
    B: float
    norm: Norm = Norm.LINF
    eps_exponent: float = 0.0
    drop_vanishing: bool = True

    def __post_init__(self):
        object.__setattr__(self, 'norm', Norm.parse(self.norm))
        if self.d < 1:
            raise ValueError(f"Dimension must be at least 1, got {self.d}")
        if not self.T >= 2:
            raise ValueError(f"Horizon must be at least 2, got {self.T}")
        if not self.B > 0 or not math.isfinite(self.B):
            raise ValueError(f"Radius B must be positive, got {self.B}")
        if not 0.0 <= self.eps_exponent < 1.0:
            raise ValueError(f"eps_exponent must lie in [0, 1), got {self.eps_exponent}")

    @property
    def tau(self) -> float:
        """Effective horizon T^(1 - eps_exponent)."""
        return self.T ** (1.0 - self.eps_exponent)

    def with_norm(self, norm: Norm) -> 'BoundQuery':
        return replace(self, norm=Norm.parse(norm))


def gamma_effective(query: BoundQuery) -> float:
    """gamma = min(B / ln T, tau / min(tau, d)) with tau = T^(1 - eps)."""
    tau = query.tau
    return min(query.B / math.log(query.T), tau / min(tau, query.d))


def lower_bound(query: BoundQuery) -> Tuple[str, float]:
    """
    Leading term of the worst-case regret lower bound.

    Region 1 (d <= 1) is shared by all norms. Otherwise each norm has a
    logarithmic branch below its threshold and a plateau above it; a query
    exactly at the threshold takes the logarithmic branch.

    Args:
        query: Bound inputs

    Returns:
        (branch label, nats)
    """
    d, T, tau = query.d, query.T, query.tau
    gamma = gamma_effective(query)

    if d <= 1:
        return 'lower:region-1 (d/2) ln(T/d)', d / 2.0 * math.log(T / d)

    if query.norm is Norm.LINF:
        threshold = 4.0 / E * gamma * tau
        if d <= threshold:
            return 'lower:linf-log (d/2) ln(4 gamma T/d)', d / 2.0 * math.log(4.0 * gamma * T / d)
        return 'lower:linf-plateau (2/e) gamma T^(1-eps)', 2.0 / E * gamma * tau

    if query.norm is Norm.L2:
        threshold = math.sqrt(2.0 * math.pi * gamma * tau / E)
        if d <= threshold:
            return (
                'lower:l2-log (d/2) ln(2 pi e gamma T/d^2)',
                d / 2.0 * math.log(2.0 * math.pi * E * gamma * T / d ** 2),
            )
        return 'lower:l2-plateau sqrt(2 pi gamma T^(1-eps)/e)', threshold

    threshold = (4.0 * gamma * tau / E) ** (1.0 / 3.0)
    if d <= threshold:
        return (
            'lower:l1-log (d/2) ln(4 e^2 gamma T/d^3)',
            d / 2.0 * math.log(4.0 * E ** 2 * gamma * T / d ** 3),
        )
    return 'lower:l1-plateau (3/2)(4 gamma T^(1-eps)/e)^(1/3)', 1.5 * threshold


def l1_dense_bound(d: int, B: float, T: float) -> float:
    """Dense-dimension L1 regret bound with explicit constants."""
    return 1.25 * 2.0 ** 0.6 * B ** 0.4 * d ** 0.6 * T ** 0.2


def upper_bound(query: BoundQuery) -> Tuple[str, float]:
    """
    Regret guaranteed by a Bayesian mixture for the query's ball.

    For L1 the branch is chosen by d against B sqrt(T); above B sqrt(T) the
    smaller of the generic and the dense-dimension expression is returned.

    Args:
        query: Bound inputs

    Returns:
        (branch label, nats)
    """
    d, T, B = query.d, query.T, query.B

    if query.norm is Norm.LINF:
        return 'upper:linf (d/2) ln(B^2 T e/4 + e)', d / 2.0 * math.log(B ** 2 * T * E / 4.0 + E)
    if query.norm is Norm.L2:
        return (
            'upper:l2 (d/2) ln(B^2 T e/(4d) + e)',
            d / 2.0 * math.log(B ** 2 * T * E / (4.0 * d) + E),
        )

    scale = B * math.sqrt(T)
    if d <= scale / 2.0:
        return (
            'upper:l1-log (d/2) ln(B^2 T e^3/(4 d^2))',
            d / 2.0 * math.log(B ** 2 * T * E ** 3 / (4.0 * d ** 2)),
        )
    if d <= scale:
        return 'upper:l1-mid (d/2) ln(4e) + B sqrt(T)/2', d / 2.0 * math.log(4.0 * E) + scale / 2.0

    generic = d / 2.0 + math.sqrt(2.0 * d * scale)
    dense = l1_dense_bound(d, B, T)
    if dense < generic:
        return 'upper:l1-dense (5/4) 2^(3/5) B^(2/5) d^(3/5) T^(1/5)', dense
    return 'upper:l1-wide d/2 + sqrt(2 d B sqrt(T))', generic


def lower_in_region(query: BoundQuery) -> bool:
    """
    Whether the lower-bound construction fits inside the ball.

    Region 1 needs gamma >= 1/2; the other branches need gamma >= 1.
    """
    if not query.drop_vanishing:
        return False
    gamma = gamma_effective(query)
    return gamma >= 0.5 if query.d <= 1 else gamma >= 1.0


TABLE_ROWS: Dict[int, str] = {
    1: 'L1: d = o((gamma T)^(1/3))',
    2: 'L1: (gamma T)^(1/3) < d <= B sqrt(T)',
    3: 'L1: d > B sqrt(T)',
    4: 'L2: d = o(sqrt(gamma T))',
    5: 'L2: sqrt(gamma T) < d <= B^2 T',
    6: 'L2: d > B^2 T (plateau)',
    7: 'Linf: d = o(gamma T)',
    8: 'Linf: d > gamma T (plateau)',
}


def classify_region(query: BoundQuery) -> Tuple[int, str]:
    """
    Summary-table row of a query.

    A dimension equal to a threshold is assigned to the lower row.

    Returns:
        (row number, row description)
    """
    d = query.d
    gamma_tau = gamma_effective(query) * query.tau

    if query.norm is Norm.L1:
        if d <= gamma_tau ** (1.0 / 3.0):
            row = 1
        elif d <= query.B * math.sqrt(query.T):
            row = 2
        else:
            row = 3
    elif query.norm is Norm.L2:
        if d <= math.sqrt(gamma_tau):
            row = 4
        elif d <= query.B ** 2 * query.T:
            row = 5
        else:
            row = 6
    else:
        row = 7 if d <= gamma_tau else 8
    return row, TABLE_ROWS[row]


def theorem2_instance_bound(M: int, d: int, T: float, spacing_eps: float) -> float:
    """
    Lattice-mixture regret bound ln M + d T eps^2 / 32.

    Args:
        M: Grid cardinality (>= 1)
        d: Dimension
        T: Horizon
        spacing_eps: Lattice step

    Returns:
        Bound in nats
    """
    if M < 1:
        raise ValueError(f"Grid cardinality must be at least 1, got {M}")
    return math.log(M) + d * T * spacing_eps ** 2 / 32.0


@dataclass(frozen=True)
class GaussianPriorChoice:
    """Worst-case Gaussian prior variance for a ball."""

    variance: float
    norm: Norm

    def induced_spacing_sq(self, T: float) -> float:
        """Matching lattice step eps^2 = 4 nu^2 / (4 + T nu^2)."""
        return 4.0 * self.variance / (4.0 + T * self.variance)


def gaussian_prior_variance(constraint: NormConstraint, d: int) -> GaussianPriorChoice:
    """
    Prior variance nu^2 for the quantized Gaussian mixture.

    Args:
        constraint: L2 or Linf ball
        d: Dimension

    Returns:
        GaussianPriorChoice with nu^2 = B^2 (Linf) or B^2 / d (L2)
    """
    if constraint.norm is Norm.L1:
        raise ValueError(
            "No Gaussian prior is tuned for the L1 ball; use the uniform lattice mixture"
        )
    B = constraint.radius_B
    variance = B ** 2 if constraint.norm is Norm.LINF else B ** 2 / d
    return GaussianPriorChoice(variance=variance, norm=constraint.norm)


def gaussian_mixture_bound(theta_norm_sq: float, d: int, T: float, variance: float) -> float:
    """Regret of the Gaussian mixture: ||theta||^2/(2 nu^2) + (d/2) ln(1 + T nu^2/4)."""
    if variance <= 0:
        raise ValueError(f"Prior variance must be positive, got {variance}")
    return theta_norm_sq / (2.0 * variance) + d / 2.0 * math.log1p(T * variance / 4.0)


def multilabel_lower_bound(d: int, m: int, T: float) -> float:
    """
    Lower bound (d (m - 1) / 2) ln(T / (m d)) for m-label logistic regression.

    Raises:
        ValueError: When m < 2 or T <= m d
    """
    if m < 2:
        raise ValueError(f"Need at least 2 labels, got {m}")
    if T <= m * d:
        raise ValueError(f"Horizon T={T} must exceed m*d={m * d}")
    return d * (m - 1) / 2.0 * math.log(T / (m * d))


def l1_grid_cardinality_bound(d: int, B: float, spacing_eps: float) -> float:
    """Counting bound ((2 (B + eps) / eps) + 1)^d / d! on the L1 lattice size."""
    log_count = d * math.log(2.0 * (B + spacing_eps) / spacing_eps + 1.0) - math.lgamma(d + 1)
    try:
        return math.exp(log_count)
    except OverflowError:
        return math.inf


def l1_optimal_spacing(d: int, B: float, T: float) -> float:
    """Lattice step 2^(9/5) B^(1/5) / (T^(2/5) d^(1/5)) for dense L1 problems."""
    return 2.0 ** 1.8 * B ** 0.2 / (T ** 0.4 * d ** 0.2)


def scaled_grid_log_cardinality(d: int, T: float, gamma: float, eps_exponent: float = 0.0) -> float:
    """ln M of the scaled construction: (d - 1) [ln(2 gamma + 1) + ((1 - eps)/2) ln(T/(d gamma))]."""
    return (d - 1) * (
        math.log(2.0 * gamma + 1.0) + (1.0 - eps_exponent) / 2.0 * math.log(T / (d * gamma))
    )


def binary_entropy(p: float) -> float:
    """h(p) in nats, with h(0) = h(1) = 0."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log(p) - (1.0 - p) * math.log1p(-p)


def fano_error_bound(error_rate: float, M: int) -> float:
    """
    Mutual-information lower bound ln M - h(Pe) - Pe ln(M - 1).

    Args:
        error_rate: Identification error probability Pe
        M: Grid cardinality

    Returns:
        Lower bound on expected regret in nats
    """
    if not 0.0 <= error_rate <= 1.0:
        raise ValueError(f"Error rate must lie in [0, 1], got {error_rate}")
    if M < 1:
        raise ValueError(f"Grid cardinality must be at least 1, got {M}")
    penalty = error_rate * math.log(M - 1) if M > 1 and error_rate > 0 else 0.0
    return math.log(M) - binary_entropy(error_rate) - penalty


def pe_upper(query: BoundQuery) -> Optional[float]:
    """Large-deviation bound exp(ln T - (T / (gamma d))^eps / 4) on Pe; None at eps = 0."""
    if query.eps_exponent <= 0.0:
        return None
    gamma = gamma_effective(query)
    exponent = math.log(query.T) - 0.25 * (query.T / (gamma * query.d)) ** query.eps_exponent
    return min(1.0, math.exp(exponent))


def to_bits(nats: float) -> float:
    return nats / LN2


def _l1_upper_envelope(query: BoundQuery) -> float:
    """
    min over T' >= T of the L1 upper bound.

    Inside each branch the bound grows with T. The only way a longer horizon
    gives a smaller value is entering the logarithmic branch at
    T' = (2d/B)^2, where it equals 3d/2.
    """
    _, value = upper_bound(query.with_norm(Norm.L1))
    entry_horizon = (2.0 * query.d / query.B) ** 2
    if query.T < entry_horizon:
        value = min(value, 1.5 * query.d)
    return value


_CONTAINED = {
    Norm.L1: (Norm.L1,),
    Norm.L2: (Norm.L1, Norm.L2),
    Norm.LINF: (Norm.L1, Norm.L2, Norm.LINF),
}
_CONTAINING = {
    Norm.L1: (Norm.L1, Norm.L2, Norm.LINF),
    Norm.L2: (Norm.L2, Norm.LINF),
    Norm.LINF: (Norm.LINF,),
}


def instance_bound_at_default_spacing(query: BoundQuery) -> float:
    """
    ln M + d/2 for the lattice mixture with eps = 4 / sqrt(T).

    M is the exact lattice count when it can be counted; otherwise the
    enclosing index cube (2K + 1)^d bounds it.
    """
    spacing = default_spacing(query.T)
    constraint = NormConstraint(query.norm, query.B)
    count = grid_cardinality(query.d, constraint, spacing)
    if count is not None:
        return theorem2_instance_bound(count, query.d, query.T, spacing)
    K = int(math.floor(query.B / spacing + 1e-9)) + 1
    return query.d * math.log(2 * K + 1) + query.d / 2.0


@dataclass(frozen=True)
class BoundReport:
    """
    Lower and upper regret bounds for one query, in nats.

    lower_nats and upper_nats are tightened across nested balls;
    lower_branch_nats and upper_branch_nats are the literal branch values
    for the query's own norm.
    """

    query: BoundQuery
    gamma: float
    table_row: int
    region_label: str
    lower_branch: str
    upper_branch: str
    lower_branch_nats: float
    upper_branch_nats: float
    lower_nats: float
    upper_nats: float
    lower_in_region: bool
    upper_in_region: bool = True
    theorem2_bound: Optional[float] = None
    pe_upper: Optional[float] = None

    def to_dict(self, bits: bool = False) -> dict:
        record = asdict(self)
        query = record.pop('query')
        query['norm'] = self.query.norm.value
        record = {**query, **record}
        record['units'] = 'nats'
        if bits:
            for key in _NAT_FIELDS:
                value = record.pop(key)
                record[key.replace('_nats', '_bits')] = None if value is None else to_bits(value)
            record['units'] = 'bits'
        return record


_NAT_FIELDS = ('lower_branch_nats', 'upper_branch_nats', 'lower_nats', 'upper_nats', 'theorem2_bound')


def evaluate(query: BoundQuery, include_instance_bound: bool = False) -> BoundReport:
    """
    Evaluate every bound for a query.

    The lower bound is the largest over balls contained in the query's ball
    (L1 inside L2 inside Linf at the same B); the upper bound is the smallest
    over balls containing it, with the L1 bound replaced by its envelope over
    longer horizons.

    Args:
        query: Bound inputs
        include_instance_bound: Also count the lattice and report ln M + d/2

    Returns:
        BoundReport
    """
    lower_branch, lower_value = lower_bound(query)
    upper_branch, upper_value = upper_bound(query)

    lower = max(lower_bound(query.with_norm(norm))[1] for norm in _CONTAINED[query.norm])
    uppers = []
    for norm in _CONTAINING[query.norm]:
        if norm is Norm.L1:
            uppers.append(_l1_upper_envelope(query))
        else:
            uppers.append(upper_bound(query.with_norm(norm))[1])
    upper = min(uppers)

    in_region = lower_in_region(query)
    if in_region and lower > upper:
        logger.warning(f"Lower bound {lower:.6g} exceeds upper bound {upper:.6g} for {query}")

    row, row_label = classify_region(query)
    return BoundReport(
        query=query,
        gamma=gamma_effective(query),
        table_row=row,
        region_label=row_label,
        lower_branch=lower_branch,
        upper_branch=upper_branch,
        lower_branch_nats=lower_value,
        upper_branch_nats=upper_value,
        lower_nats=lower,
        upper_nats=upper,
        lower_in_region=in_region,
        theorem2_bound=instance_bound_at_default_spacing(query) if include_instance_bound else None,
        pe_upper=pe_upper(query),
    )
