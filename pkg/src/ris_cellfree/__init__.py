"""RIS-aided cell-free massive MIMO downlink under electromagnetic
interference: channel models, two-phase LMMSE estimation, closed-form
spectral efficiency, and Monte Carlo cross-validation."""

from .channel import (ChannelRealization, assemble_aggregate, sample_ap_ris,
                      sample_direct, sample_realization, sample_user_ris)
from .downlink import (SeReport, ds_power, emi_received_power,
                       power_coefficients, se_closed_form, se_sum,
                       sinr_closed_form, ui_power)
from .estimation import (BenchmarkState, PilotAssignment, TwoPhasePlan,
                         TwoPhaseState, assign_pilots, benchmark_state,
                         cascaded_power, emi_at_aps, estimate_benchmark,
                         estimate_two_phase, fractional_pilot_power,
                         lmmse_coefficients, nmse_closed_form, nmse_empirical,
                         simulate_estimates, two_phase_state)
from .experiments import (CSV_HEADER, FIG1_GRID, FIG2_GRID, FIG3_GRID,
                          SweepPoint, ValidationCheck, ValidationReport,
                          read_csv, resolvable, run_fig1, run_fig2, run_fig3,
                          run_single, run_sweep, validate, write_csv)
from .geometry import (LargeScaleFading, NetworkLayout, RadioConstants,
                       db_to_linear, dbm_to_watt, generate_layout,
                       large_scale_fading, layout_to_csv, link_distances,
                       path_loss)
from .ris import (RisPanel, build_panel, correlation_matrix,
                  element_positions, emi_power, matrix_sqrt_psd, sample_emi)
from .scenario import (SCHEMES, Scenario, ScenarioConfig, SchemeView,
                       build_scenario, desk_scenario, load_config,
                       nmse_closed, nmse_monte_carlo, scheme_view, se_closed,
                       se_monte_carlo)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
