"""Katugampola fractional integrals and Hermite-Hadamard-type
inequality verification for generalized s-convex functions."""

from .errors import (ConfigError, ConvergenceError, DomainError,
                     EvaluationError, FracineqError, IntegrandError,
                     ParseError)
from .expr import (DualValue, Expr, eval_dual_many, eval_many, evaluate,
                   evaluate_dual, parse, parse_function, to_text)
from .fracint import (FracParams, Interval, conjugate_exponent, katugampola,
                      riemann_liouville)
from .harness import (AuditRow, SweepConfig, SweepResult, ViolationRecord,
                      load_config, reproduce_reference, run_sweep, write_csv,
                      write_json)
from .ineq import (VARIANT_DERIVED, VARIANT_PRINTED, ConvexityCertificate,
                   GapBoundReport, LemmaReport, SandwichReport,
                   certify_s_convex, gap_bound_t2, gap_bound_t3,
                   gap_bound_t4, hh_sandwich, lemma_identity, min_bound)
from .means import (MeansReport, arithmetic_mean, check_proposition,
                    generalized_log_mean, logarithmic_mean)
from .quad import QuadResult, QuadSettings, integrate
from .specfun import SpecfunAccuracy, beta, beta_rho, ln_gamma

__version__ = "0.1.0"

__all__ = [
    "AuditRow", "ConfigError", "ConvergenceError", "ConvexityCertificate",
    "DomainError", "DualValue", "EvaluationError", "Expr", "FracParams",
    "FracineqError", "GapBoundReport", "IntegrandError", "Interval",
    "LemmaReport", "MeansReport", "ParseError", "QuadResult", "QuadSettings",
    "SandwichReport", "SpecfunAccuracy", "SweepConfig", "SweepResult",
    "VARIANT_DERIVED", "VARIANT_PRINTED", "ViolationRecord",
    "arithmetic_mean", "beta", "beta_rho", "certify_s_convex",
    "check_proposition", "conjugate_exponent", "eval_dual_many", "eval_many",
    "evaluate", "evaluate_dual", "gap_bound_t2", "gap_bound_t3",
    "gap_bound_t4", "generalized_log_mean", "hh_sandwich", "integrate",
    "katugampola", "lemma_identity", "ln_gamma", "load_config",
    "logarithmic_mean", "min_bound", "parse", "parse_function",
    "reproduce_reference", "riemann_liouville", "run_sweep", "to_text",
    "write_csv", "write_json",
]
