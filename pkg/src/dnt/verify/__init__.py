"""Brute-force oracles and the verification suites run by ``dnt verify``."""

from .suites import SUITES, CheckResult, miniature_model_check, run_suite

__all__ = ["SUITES", "CheckResult", "miniature_model_check", "run_suite"]
