from .centerer import SurrogateCenterer, StackCenterer, shift_summary

__all__ = ["SurrogateCenterer", "StackCenterer", "shift_summary"]
