"""Discrete-event simulator and coincidence analyzer for a heralded
single-photon source feeding an atomic-frequency-comb storage line.

The package splits into sampling (source), transport (chain), storage
(memory), click generation (detection), statistics (analysis) and the
orchestration layers (config, pipeline, report, cli).
"""

from .analysis import (CorrelationHistogram, CorrelationResult, DichroismFit,
                       EfficiencyBudget, HeraldingEfficiency, autocorrelation_g2,
                       cauchy_schwarz_ratio, cross_correlation_histogram,
                       default_noise_windows, fit_dichroism, g2_auto_theory,
                       g2_input_prediction, g2_windowed, generated_rate,
                       heralding_efficiency, ratio_for_visibility,
                       synthesize_dichroism_scan, visibility_for_ratio,
                       visibility_from_g2, window_decay_factor)
from .chain import (ArmChain, CavitySpec, DichroismModel, LossTable,
                    cavity_transmission, crystal_survival)
from .config import (AnalysisParams, ConfigError, ExperimentConfig,
                     ScenarioParams, build_config, default_config,
                     format_config, load_config, parse_config_text,
                     reference_config_path)
from .core import (IDLER_CHANNEL, SIGNAL_CHANNEL, Intervals, PhotonEvent,
                   RandomStreams, SpectralMode, mode_table,
                   periodic_on_intervals)
from .detection import (ClickStream, DetectorSpec, TimestampFormatError,
                        detect, read_timestamps_binary, read_timestamps_csv,
                        write_timestamps_binary, write_timestamps_csv)
from .memory import (CombParams, afc_efficiency_analytic,
                     afc_efficiency_numeric, comb_from_storage_time,
                     comb_profile, comb_transmission, echo_delay_ps,
                     efficiency_vs_storage_time, storage_transform)
from .pipeline import (PassResult, RunAnalysis, analyze_run, simulate_pass,
                       simulate_run, with_pump_power, with_storage_time,
                       without_filter_cavity)
from .source import (PairBatch, SourceParams, build_gate_schedule,
                     gate_off_window, sample_broadband_noise,
                     sample_pair_emissions)
from .units import UnitError, format_time_ps, ms, ns, parse_scalar, seconds, us

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
