"""Numerical verification toolkit for almost paracontact metric
structures and their para-CR geometry.

Public surface:

- ``paracr.jets``: nestable forward-mode jets (derivatives to order 3);
- ``paracr.expr``: the expression grammar (parse, eval_expr, render);
- ``paracr.geometry``: charts, structures, and PointFrame (pointwise
  curvature and structure tensors);
- ``paracr.conditions``: the condition registry, evaluation, and
  classification;
- ``paracr.presets``: the built-in example families and the random
  dimension-3 generator;
- ``paracr.spec_io`` / ``paracr.runner`` / ``paracr.cli``: manifold spec
  files, seeded verification runs, and the ``paracr`` command.
"""

from .conditions import (
    BUNDLES,
    CONDITIONS,
    classify,
    evaluate_condition,
    expand_checks,
)
from .errors import ParacrError, ValidationError
from .geometry import Chart, CoordinateStructure, FrameStructure, PointFrame
from .presets import PRESET_NAMES, build_example, random_dim3_structure
from .runner import Report, run
from .spec_io import DEFAULT_NUMERIC, ManifoldSpec, load_spec, spec_from_dict

__version__ = "0.1.0"

__all__ = [
    "BUNDLES",
    "CONDITIONS",
    "Chart",
    "CoordinateStructure",
    "DEFAULT_NUMERIC",
    "FrameStructure",
    "ManifoldSpec",
    "PRESET_NAMES",
    "ParacrError",
    "PointFrame",
    "Report",
    "ValidationError",
    "build_example",
    "classify",
    "evaluate_condition",
    "expand_checks",
    "load_spec",
    "random_dim3_structure",
    "run",
    "spec_from_dict",
    "__version__",
]
