"""Equilibria for markets where producers forecast prices with local
polynomial approximations of the demand curve.

The pieces, in dependency order:

- :mod:`polyequil.demand` — the three inverse-demand families;
- :mod:`polyequil.ree` — the frictionless fixed point and its shifter
  pass-through;
- :mod:`polyequil.polyeq` — equilibria under four forecast-penalty
  variants, plus comparative statics;
- :mod:`polyequil.learning` — nearest-point learning dynamics and
  population mixtures;
- :mod:`polyequil.asyminfo` — aggregation across producers who each know
  a different demand point;
- :mod:`polyequil.oracle` — independent brute-force checks (never used
  by the solvers);
- :mod:`polyequil.cli` — scenario files, CSV emission, verification.
"""

from .demand import DemandSpec, Family, ValidationReport
from .errors import (ArgError, BracketError, ComplexError,
                     ComplexForecastError, ComplexRootError, ConfigError,
                     DomainError, ExistenceError, HypothesisError,
                     NonFiniteError, PolyequilError, QuadratureError,
                     ShapeError, UnknownEquationError)
from .ree import ReePoint, ree_multiplier, solve_ree
from .polyeq import (Branch, Equilibrium, Regime, alt_discount_equilibria,
                     first_order_equilibria, marginal_multiplier,
                     parameter_change_equilibria, regime_bound,
                     regime_bounds, second_order_equilibria)
from .learning import (LearningTrace, MixtureEquilibrium, RootPolicy,
                       StepRecord, find_cycling_pair, mixture_equilibrium,
                       policy_root, simulate, step)
from .asyminfo import (AsymEquilibrium, ConvexityReport, PointMass,
                       PopulationSpec, TruncatedGaussian, Uniform,
                       agent_forecast, agent_supply, aggregate,
                       convexity_bound_check)

__version__ = "0.1.0"
