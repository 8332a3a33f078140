"""Sub-linear expectations on finite sample spaces.

Upper expectations as maxima over finite families of measures, their
capacities and Choquet integrals, END certificates for product families,
exact verifiers for von Bahr-Esseen type tail bounds, and lattice-exact
law-of-large-numbers and complete-convergence experiments.
"""

from .bounds import (BoundReport, H, bahr_esseen_bounded, bahr_esseen_general, chernoff_bound,
                     cosh_dominance_check, verify_theorem_2_1, verify_theorem_2_2)
from .dependence import (ENDCertificate, MonotoneTestGrid, certify, estimate_K,
                         homogeneous_product_family, product_family)
from .errors import AtomLimitError, HypothesisError, PolicyError, StructuralError
from .experiments import (MarginalSet, SeriesConfig, WeightArray, complete_convergence_report,
                          family_tail_capacity, lemma32_check, lemma33_check, weighted_sum_law,
                          wlln_experiment)
from .measure_space import (Measure, PiecewiseLinearFn, RandomVector, SampleSpace, apply_fn,
                            expectation, product_measure, product_space)
from .sublinear_core import (EventSet, MeasureFamily, check_axioms, choquet_integral,
                             lower_expectation, upper_capacity, upper_expectation,
                             upper_probability)
from .transforms import SlowlyVaryingFn, SmoothingG, check_lemma31, clip, g_eval, gj_eval, overshoot

__version__ = "0.1.0"
