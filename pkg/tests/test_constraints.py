"""Hardware feasibility calculators."""

import math

import pytest

from talbotlab import (HardwareSpec, InvalidSpec, gate_distances,
                       max_dimension, mutual_information)
from talbotlab.constraints import talbot_length


def test_talbot_length_example():
    # 10 um pixels, 19 levels, 800 nm light
    z_t = talbot_length(10e-6, 19, 800e-9)
    assert abs(z_t - (10e-6 * 19) ** 2 / 800e-9) < 1e-15
    assert round(z_t * 1e3, 1) == 45.1  # millimetres


def test_talbot_length_quadratic_scaling():
    assert abs(talbot_length(10e-6, 38, 800e-9) / talbot_length(10e-6, 19, 800e-9)
               - 4.0) < 1e-12


def test_talbot_length_identity():
    pitch, dim, lam = 7e-6, 11, 650e-9
    assert abs(talbot_length(pitch, dim, lam) * lam - (pitch * dim) ** 2) < 1e-20


def test_max_dimension_reference_panel():
    spec = HardwareSpec(10e-6, (1080, 1920), 800e-9)
    assert max_dimension(spec) == 19


def test_max_dimension_degenerate_and_linear():
    assert max_dimension(HardwareSpec(10e-6, (1, 100), 800e-9)) == 1
    base = HardwareSpec(10e-6, (1080, 1920), 800e-9)
    doubled = HardwareSpec(10e-6, (1080, 3840), 800e-9)
    assert max_dimension(doubled) == 2 * max_dimension(base)


def test_max_dimension_threshold_is_a_parameter():
    spec = HardwareSpec(10e-6, (1080, 1920), 800e-9)
    assert max_dimension(spec, illuminated_slits=50) == 38


def test_mutual_information_values():
    assert abs(mutual_information(19) - math.log2(19)) < 1e-12
    assert mutual_information(2) == 1.0
    assert mutual_information(1) == 0.0


def test_gate_distance_conventions_disagree_for_odd_dimensions():
    even = gate_distances(10e-6, 4, 800e-9)
    assert abs(even["gate_distance"] - even["gate_distance_alt"]) < 1e-18
    odd = gate_distances(10e-6, 5, 800e-9)
    assert abs(odd["gate_distance"] / odd["gate_distance_alt"] - 4.0) < 1e-12


def test_invalid_hardware_rejected():
    with pytest.raises(InvalidSpec):
        HardwareSpec(-1e-6, (100, 100), 800e-9)
    with pytest.raises(InvalidSpec):
        mutual_information(0)
