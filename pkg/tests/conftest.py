from __future__ import annotations

import numpy as np
import pytest

from oscillab.constitutive import (analytic_cubic_law,
                                   build_matched_gas_stress,
                                   build_matched_pressure,
                                   build_matched_shear_stress)


@pytest.fixture(scope="session")
def shear_law():
    return build_matched_shear_stress(0.5, 2.0, lambda u: u)


@pytest.fixture(scope="session")
def gas_law():
    return build_matched_gas_stress(0.5, 2.0, lambda u: u)


@pytest.fixture(scope="session")
def pressure_1d():
    return build_matched_pressure(0.5, 2.0, 1, lambda r: r)


@pytest.fixture(scope="session")
def pressure_2d():
    return build_matched_pressure(1.0, 8.0, 2, lambda r: r)


@pytest.fixture(scope="session")
def cubic_law():
    return analytic_cubic_law(0.0)


@pytest.fixture(scope="session")
def xi_sym():
    """Symmetric xi grid with a node exactly at zero."""
    return np.linspace(-1.5, 1.5, 513)
