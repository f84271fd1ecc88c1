"""Symbol families, hyperbolicity in a direction and symmetrizer fields."""
from .analysis import (ConeChart, DirectionSweep, HyperbolicityReport, char_roots, complement_basis,
                       cone_explore, det_gradient, direction_certificate, direction_change_constant,
                       gradient_bound, hyperbolicity_check, necessary_condition_probe, sphere_samples,
                       strong_hyperbolicity_in_direction)
from .builtins import build_builtin, builtin_config, example1, example2, friedrichs, load_builtin
from .family import SCHEMA_VERSION, Parameter, SymbolFamily, eval_symbol
from .full import (FullSymmetrizerField, TimeDirectionChange, canonical_direction_symmetrizer,
                   change_time_direction, characteristic_samples, full_from_symmetrizer,
                   full_positivity_check, homotopy_positivity, kernel_identities, random_kernel_instance,
                   symmetrizer_from_full)
from .two_by_two import reduce_double_point, symmetrize_2x2

__all__ = [name for name in dir() if not name.startswith("_")]
