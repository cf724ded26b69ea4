"""Exceptions raised by the solver and the command-line pipeline"""
from typing import Optional

import numpy as np
import pandas as pd

from mra.index import levels_array, translations_array


class HJSGError(Exception):
    """Base class for solver errors"""
    exit_code = 1


class ConfigurationError(HJSGError, ValueError):
    """Invalid or inconsistent run configuration"""
    exit_code = 2


class NumericalInstabilityError(HJSGError, FloatingPointError):
    """Non-finite values in the numerical state.

    `diagnostics` holds one row per offending element with its level and
    translation vectors and any per-element quantities supplied by the caller.
    """
    exit_code = 3

    def __init__(self, message: str, elements: Optional[np.ndarray] = None, **columns):
        super().__init__(message)
        self.diagnostics = element_frame(elements, **columns) if elements is not None else pd.DataFrame()


class ReferenceSolutionError(HJSGError):
    """A reference solution could not be evaluated"""


def element_frame(elements: np.ndarray, **columns) -> pd.DataFrame:
    """Table of element level/translation vectors plus extra per-element columns"""
    elements = np.atleast_2d(np.asarray(elements, dtype=np.int64))
    levels = levels_array(elements)
    translations = translations_array(elements)
    data = {}
    for axis in range(elements.shape[1]):
        data[f'l{axis + 1}'] = levels[:, axis]
    for axis in range(elements.shape[1]):
        data[f'j{axis + 1}'] = translations[:, axis]
    for name, values in columns.items():
        data[name] = np.asarray(values)
    return pd.DataFrame(data)
