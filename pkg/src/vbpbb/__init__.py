"""Variable bandpass periodic block bootstrap (VBPBB) for periodically
correlated time series."""

from ._kernels import BACKEND
from .bootstrap import (
    BootstrapConfig,
    PhaseMeanEnsemble,
    PipelineResult,
    bootstrap_ensemble,
    ci_band,
    combine_components,
    pbb_pipeline,
    pbb_resample,
    periodic_mean,
    resample_stream,
    vbpbb_pipeline,
)
from .errors import ConfigError, DataError, VBPBBError
from .inference import (
    AnalysisReport,
    SignificanceReport,
    analyze,
    harmonic_scan,
    horizontal_line_test,
    median_band_width,
    r_squared,
    width_ratio,
)
from .ingest import IngestConfig, cumulative_to_incident, load_csv, normalize_per_capita
from .kz import KZFTPlan, FilteredComponent, kz_coefficients, kz_lowpass, kzft_apply, reconstruct_real, select_bandwidth
from .series import CIBand, ComponentSpec, TimeSeries, phase_of, trim
from .synth import SynthSpec, Wave, coverage_experiment, generate, true_periodic_mean

__version__ = "0.1.0"
