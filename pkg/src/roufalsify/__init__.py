"""Compositional falsification toolkit for closed-loop systems with ML perception.

The package splits the falsification workflow into:

* ``trace`` / ``stl`` -- signals on a uniform time grid and an STL monitor
  with qualitative and quantitative (robustness) semantics;
* ``sampling`` -- low-discrepancy samplers over the unit hypercube plus a
  discrepancy estimator;
* ``classifier`` -- binary classifier handles (synthetic, remote) and
  error-rate metrics;
* ``analyzer`` -- abstract feature space exploration, surrogate-classifier
  construction and misclassification-region extraction;
* ``aebs`` -- a synthetic emergency-braking plant with swappable perception;
* ``falsify`` -- validity domains, region of uncertainty and the targeted
  counterexample search;
* ``service`` / ``cli`` -- HTTP surface and a thin command-line client.
"""

__version__ = "0.1.0"

from .pipeline import analyze_ml, comp_falsify, validity_domain  # noqa: E402
from .scenario import Scenario, default_aebs_scenario, load_scenario  # noqa: E402
from .stl import eval_qualitative, eval_robustness, parse, satisfaction_signal  # noqa: E402
from .trace import Trace, trace_from_csv, trace_to_csv  # noqa: E402

__all__ = [
    "Scenario",
    "Trace",
    "analyze_ml",
    "comp_falsify",
    "default_aebs_scenario",
    "eval_qualitative",
    "eval_robustness",
    "load_scenario",
    "parse",
    "satisfaction_signal",
    "trace_from_csv",
    "trace_to_csv",
    "validity_domain",
]
