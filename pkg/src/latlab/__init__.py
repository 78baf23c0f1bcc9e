"""Lattice points, Fourier decay and boundary caps for block domains of finite type."""

from .caps import CapError, CapStats, cap_extents, cap_measure, cap_stats, lemma1_bound, lemma1_check, support_point, support_value
from .corpus import load as load_corpus
from .counting import CountResult, brute_force_count, coordinate_range, count_lattice_points, is_member, remainder
from .domain import (
    DomainSpec,
    ExponentReport,
    ExponentTable,
    SpecError,
    cone_axes,
    eval_F,
    grad_F,
    load_spec,
    m_exponent,
    predicted_exponents,
    radial_boundary,
    supersphere,
    validate_spec,
    volume,
)
from .fourier import FTValue, SliceProfile, axis_asymptotics, decay_check, ft_dilate, ft_indicator, slice_area, slice_profile, theorem2_bound
from .poisson import Mollifier, epsilon_schedule, poisson_rhs, sandwich_check, smoothed_count
from .remainder import FitResult, Verdict, compare_to_bound, fit_growth_exponent, omega_scan, omega_windows, scale_grid, sweep_remainder
from .report import write_report

__all__ = [name for name in dir() if not name.startswith("_")]
