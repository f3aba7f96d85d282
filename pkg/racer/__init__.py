from racer.estimators import CenteringConfig, center_of_mass, geometric_median, scm_center, scm_landscape
from racer.prediction import StackCenterer, SurrogateCenterer

__all__ = ["CenteringConfig", "SurrogateCenterer", "StackCenterer", "scm_center", "scm_landscape", "center_of_mass", "geometric_median"]
