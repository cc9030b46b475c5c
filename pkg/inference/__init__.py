"""Full-length sequence imputation with a trained network."""

from .imputation import impute_sequence, imputed_record, save_imputed
from .windows import WindowPlan, plan_windows

__all__ = ["WindowPlan", "plan_windows", "impute_sequence", "imputed_record", "save_imputed"]
