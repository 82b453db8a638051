"""Parking on random rooted trees: simulation, exact oracles and closed forms."""
from .errors import (DegenerateInput, DomainError, InvalidArgument, NumericalFailure,
                     SingularityError, TreeParkError, ValidationError)
from .laws import (Binary, Deterministic, Explicit, ModelSpec, Poisson, TwoPoint,
                   arrival_family, parse_law)
from .parking import (ArrivalConfig, ParkingOutcome, assign_arrivals_iid,
                      assign_arrivals_multinomial, count_path_parking_functions,
                      park_recursive, park_sequential, parking_event)
from .pmf import Pmf
from .trees import (RootedTree, complete_binary_tree, sample_cayley_tree, sample_gw_tree,
                    sample_spine_tree, size_biased_law, validate_tree)

__version__ = "0.1.0"
