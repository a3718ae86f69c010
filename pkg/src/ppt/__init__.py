"""Transport costs between point configurations and point-process laws, with numerical
checks of transport-entropy, concentration and modified log-Sobolev inequalities."""
from .config import Configuration, Functional, PointConfiguration
from .ground import AlphaFamily, CostFunction, GroundSpace
from .measures import DiscreteMeasure, relative_entropy, tv_distance
from .processes import ConfigurationSpaceIndex, ProcessLaw, binomial_law, mixed_binomial_law, poisson_law
from .transport import assignment_cost, marton_cost, ot_lp, weak_transport

__all__ = [
    "AlphaFamily", "Configuration", "ConfigurationSpaceIndex", "CostFunction", "DiscreteMeasure", "Functional",
    "GroundSpace", "PointConfiguration", "ProcessLaw", "assignment_cost", "binomial_law", "marton_cost",
    "mixed_binomial_law", "ot_lp", "poisson_law", "relative_entropy", "tv_distance", "weak_transport",
]

__version__ = "0.1.0"
