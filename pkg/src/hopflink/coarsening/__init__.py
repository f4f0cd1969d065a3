from .oracle import LinkingResult, linking_oracle
from .templates import TemplateTable, default_table, generate_template_table
from .cubical import (CellLink, CubicalMap, MapBuilder, MapReport, assign_cable_degrees, cable_hopf, coarse_map,
                      match_hopf, random_map, random_pair, validate_map, wire_ranges, zero_map)
from .clutching import (ClutchingDescriptor, build_clutching, clutching_expression, clutching_from_inflows,
                        null_homotopy_clutching)
from .plan import PlanReport, StepResult, ValidationFailed, coarsen_step, plan_homotopy
