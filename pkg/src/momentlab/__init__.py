"""Hausdorff moment tests for rational sequences."""
from .classify import (
    Budget,
    Verdict,
    classify_degree3,
    classify_degree4,
    classify_degree5_vertical,
    decide,
    decide_roots,
    g_function,
    hausdorff_finite_test,
    necessary_condition,
    rational_necessary_q,
)
from .convo import ExpFamily, convolve_exponentials, multiplicative_convolution, simplex_form, weight_via_convolution
from .divdiff import NodeList, divided_difference, sufficient_condition, weight_via_divdiff
from .kernelcheck import KernelCoefficients, misra_counterexample, schur_product_with_szego, subnormality_test
from .pfd import PfdTable, decompose
from .polycore import RealPolynomial, RootMultiset, faulhaber_partial_sum, find_roots
from .weight import WeightFunction, build_weight, eval_weight, moment, moments, shift_rescale, sign_scan

__version__ = "0.1.0"

__all__ = [
    "Budget",
    "ExpFamily",
    "KernelCoefficients",
    "NodeList",
    "PfdTable",
    "RealPolynomial",
    "RootMultiset",
    "Verdict",
    "WeightFunction",
    "build_weight",
    "classify_degree3",
    "classify_degree4",
    "classify_degree5_vertical",
    "convolve_exponentials",
    "decide",
    "decide_roots",
    "decompose",
    "divided_difference",
    "eval_weight",
    "faulhaber_partial_sum",
    "find_roots",
    "g_function",
    "hausdorff_finite_test",
    "misra_counterexample",
    "moment",
    "moments",
    "multiplicative_convolution",
    "necessary_condition",
    "rational_necessary_q",
    "schur_product_with_szego",
    "shift_rescale",
    "sign_scan",
    "simplex_form",
    "subnormality_test",
    "sufficient_condition",
    "weight_via_convolution",
    "weight_via_divdiff",
]
