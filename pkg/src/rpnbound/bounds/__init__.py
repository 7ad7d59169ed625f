from .analytic import AnalyticBound, Regime, analytic_two_body_bound
from .scaling import ScalingResult, model_scaling, scaling_exponent, spanning_thresholds
from .sdp import BoundResult, BoundVariables, Status, alpha_beta, extension_matrix, solve_sdp
from .timedep import analytic_rate, sampled_bound, sdp_rate, time_dependent_bound


def rpn_bound(channel, **kw) -> BoundResult:
    """Bound for the full N-particle problem: the sub-channel SDP times C(N, n)."""
    return solve_sdp(channel.model, channel.subchannel_count, **kw)


__all__ = [
    "AnalyticBound",
    "BoundResult",
    "BoundVariables",
    "Regime",
    "ScalingResult",
    "Status",
    "alpha_beta",
    "analytic_rate",
    "analytic_two_body_bound",
    "extension_matrix",
    "model_scaling",
    "rpn_bound",
    "scaling_exponent",
    "sampled_bound",
    "sdp_rate",
    "solve_sdp",
    "spanning_thresholds",
    "time_dependent_bound",
]
