"""Matching rates for 2-type bipartite stochastic block models with flexible agents."""
from ._accel import USE_NUMBA, backend_name
from .errors import (DegenerateRatio, DenseRegime, DomainError, FlexMatchError, HypothesisViolated,
                     InvalidLaw, InvalidParams, NoConvergence, TooLarge, UnimodularityViolation)
from .model import (Allocation, FlexScenario, ModelSpec, build_connection_matrix, derive_model,
                    resolve_allocation, scenario_model)
from .variational import EtaPair, MaximizerResult, Method, eta_pair, eval_F, grad_F, H_map, maximize_F

__version__ = "0.1.0"
