from .cfg import Cfg, build_cfg  # noqa: F401
from .dataflow import (  # noqa: F401
    compute_control_dependence,
    compute_data_dependence,
    compute_postdominators,
)
from .model import FunctionModel, SourceUnit, parse_source, statements_at_line  # noqa: F401
