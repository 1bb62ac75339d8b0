"""Built-in metrics and the closed-form checks that accompany them."""

from .identities import (IDENTITY_NAMES, IdentityResiduals, PullbackAudit, TimePeriodicForms,
                         g00_bound_check, g00_lower_bound, helper_jets, helpers_at,
                         periodicity_check, property1_residuals, pullback_audit,
                         residuals_from_jets, sample_regular_points, tilde_to_polar)
from .metrics import (BUILDERS, get_metric, helper_expr, minkowski, schwarzschild,
                      shipped_document, time_periodic_polar, time_periodic_tilde)

__all__ = [
    "BUILDERS", "IDENTITY_NAMES", "IdentityResiduals", "PullbackAudit", "TimePeriodicForms",
    "g00_bound_check", "g00_lower_bound", "get_metric", "helper_expr", "helper_jets",
    "helpers_at", "minkowski", "periodicity_check", "property1_residuals", "pullback_audit",
    "residuals_from_jets", "sample_regular_points", "schwarzschild", "shipped_document",
    "tilde_to_polar", "time_periodic_polar", "time_periodic_tilde",
]
