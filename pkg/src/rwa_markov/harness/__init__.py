from .output import emit_csv, read_csv, write_report, write_series
from .scenario import Scenario, TimeGrid, load_scenario, random_scenario, scenario_from_dict
from .sweep import QUANTITIES, ScalingReport, fit_loglog, run_sweep
from .validation import ValidationReport, validate

__all__ = ["Scenario", "TimeGrid", "load_scenario", "random_scenario", "scenario_from_dict",
           "QUANTITIES", "ScalingReport", "fit_loglog", "run_sweep", "emit_csv", "read_csv",
           "write_report", "write_series", "ValidationReport", "validate"]
