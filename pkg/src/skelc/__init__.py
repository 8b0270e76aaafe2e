"""skelc: turn recursive functions into parallel skeleton programs.

The pipeline stages are importable a la carte:

* parser / syntax / pretty: the language front end
* interp: sequential evaluation (machine + rewriting stepper)
* lift / distilled: source normalisation and shape checks
* encode: the call-structure encoding pass
* lts / templates / matching: skeleton identification
* extractor: rewriting identified functions to skeleton calls
* compilepy / runtime: the execution backends
* pipeline / bench / cli: the end-to-end drivers
"""

__version__ = "0.1.0"

from .syntax import (  # noqa: F401
    ConVal,
    IntVal,
    Program,
    Value,
    values_equal,
)
from .parser import ParseError, parse_program  # noqa: F401
from .interp import EvalError, FuelError, evaluate  # noqa: F401
