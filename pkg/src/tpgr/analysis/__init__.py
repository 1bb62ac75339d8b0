"""Signature, singular sets, horizon candidate sets and large-r structure."""

from .congruence import (AsymptoticAudit, DiagonalForm, asymptotic_audit, congruence_diagonal,
                         congruence_reduce, diagonal_closed_form)
from .horizons import (ARCS, CASES, HorizonBranch, HorizonExtent, endpoint_times,
                       feasibility_ratio, gamma, gamma_prime, horizon_extent, horizon_f,
                       horizon_time_slots, trace_horizon_branch)
from .signature import (SINGULAR_SETS, MinorsReport, SignatureReport, det_closed_form,
                        eigen_signs, leading_minors, metric_shape, minors_closed_form,
                        principal_minors, signature_at, singular_set_classify)

__all__ = [
    "ARCS", "AsymptoticAudit", "CASES", "DiagonalForm", "HorizonBranch", "HorizonExtent",
    "MinorsReport", "SINGULAR_SETS", "SignatureReport", "asymptotic_audit", "congruence_diagonal",
    "congruence_reduce", "det_closed_form", "diagonal_closed_form", "eigen_signs",
    "endpoint_times", "feasibility_ratio", "gamma", "gamma_prime", "horizon_extent", "horizon_f",
    "horizon_time_slots", "leading_minors", "metric_shape", "minors_closed_form",
    "principal_minors", "signature_at", "singular_set_classify", "trace_horizon_branch",
]
